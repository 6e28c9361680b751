//! Nonredundant (Q, C) candidate lists and their pruning kernels.
//!
//! A candidate summarizes a buffer-assignment choice for a subtree by its
//! slack `Q` and downstream capacitance `C`. A [`CandidateList`] keeps the
//! nonredundant set: strictly increasing in both Q and C, so no member
//! dominates another. The list is an arena-backed doubly linked chain with
//! a sentinel header, giving O(1) neighbor access and O(1) deletion at a
//! known position — the costs the pruning kernels rely on.

/// Opaque provenance handle. The solver resolves it against its trace
/// arena; candidates built by tests or the oracle use [`TraceHandle::NONE`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceHandle(pub u32);

impl TraceHandle {
    pub const NONE: TraceHandle = TraceHandle(u32::MAX);
}

/// A (Q, C) point with provenance. Q in seconds, C in farads; both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    /// Slack, seconds.
    pub q: f64,
    /// Downstream capacitance, farads.
    pub c: f64,
    pub trace: TraceHandle,
}

impl Candidate {
    pub fn new(q: f64, c: f64) -> Self {
        Self {
            q,
            c,
            trace: TraceHandle::NONE,
        }
    }

    /// True if `self` dominates `other`: at least as much slack for at most
    /// as much load.
    pub fn dominates(&self, other: &Candidate) -> bool {
        self.q >= other.q && self.c <= other.c
    }
}

/// Counters for the convex-pruning scan. The forward-move bound
/// (at most `2k` per call on a list of `k` candidates) is asserted on
/// every call and the totals accumulate here.
#[derive(Debug, Clone, Copy, Default)]
pub struct ScanStats {
    pub calls: u64,
    pub forward_moves: u64,
    pub backward_moves: u64,
    pub pruned: u64,
    /// Calls whose forward-move count exceeded `2k`. Always zero; kept as a
    /// release-mode observable alongside the assert.
    pub bound_violations: u64,
}

impl ScanStats {
    pub fn merge(&mut self, other: &ScanStats) {
        self.calls += other.calls;
        self.forward_moves += other.forward_moves;
        self.backward_moves += other.backward_moves;
        self.pruned += other.pruned;
        self.bound_violations += other.bound_violations;
    }
}

/// True iff `a1, a2, a3` (with strictly increasing C) form a left turn on
/// the (C, Q) plane, i.e. the slope from `a1` to `a2` does not exceed the
/// slope from `a2` to `a3`. Computed in cross-multiplied form; collinear
/// middles count as left turns so they get pruned too.
pub fn left_turn(a1: &Candidate, a2: &Candidate, a3: &Candidate) -> bool {
    assert!(
        a1.c < a2.c && a2.c < a3.c,
        "left_turn requires strictly increasing C: {} {} {}",
        a1.c,
        a2.c,
        a3.c
    );
    (a2.q - a1.q) * (a3.c - a2.c) <= (a3.q - a2.q) * (a2.c - a1.c)
}

const HEAD: u32 = 0;

#[derive(Debug, Clone, Copy)]
struct Node {
    q: f64,
    c: f64,
    trace: TraceHandle,
    prev: u32,
    next: u32,
}

/// Ordered sequence of nonredundant candidates.
///
/// Invariants: walking from the head, both Q and C are strictly
/// increasing. Maintained by every operation.
#[derive(Debug, Clone)]
pub struct CandidateList {
    nodes: Vec<Node>,
    free: Vec<u32>,
    len: usize,
}

impl Default for CandidateList {
    fn default() -> Self {
        Self::new()
    }
}

impl CandidateList {
    pub fn new() -> Self {
        // nodes[0] is the sentinel header; it doubles as the paper's dummy
        // (-inf, C) candidate without ever exposing a non-finite Q.
        Self {
            nodes: vec![Node {
                q: 0.0,
                c: 0.0,
                trace: TraceHandle::NONE,
                prev: HEAD,
                next: HEAD,
            }],
            free: Vec::new(),
            len: 0,
        }
    }

    /// Builds a list from candidates already sorted strictly increasing in
    /// both Q and C.
    pub fn from_sorted(cands: impl IntoIterator<Item = Candidate>) -> Self {
        let mut list = Self::new();
        for c in cands {
            list.push_back(c);
        }
        list
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn first(&self) -> Option<Candidate> {
        (self.len > 0).then(|| self.get(self.nodes[HEAD as usize].next))
    }

    pub fn last(&self) -> Option<Candidate> {
        (self.len > 0).then(|| self.get(self.nodes[HEAD as usize].prev))
    }

    fn get(&self, idx: u32) -> Candidate {
        let n = &self.nodes[idx as usize];
        Candidate {
            q: n.q,
            c: n.c,
            trace: n.trace,
        }
    }

    fn alloc(&mut self, cand: Candidate, prev: u32, next: u32) -> u32 {
        let node = Node {
            q: cand.q,
            c: cand.c,
            trace: cand.trace,
            prev,
            next,
        };
        let idx = match self.free.pop() {
            Some(idx) => {
                self.nodes[idx as usize] = node;
                idx
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.nodes[prev as usize].next = idx;
        self.nodes[next as usize].prev = idx;
        self.len += 1;
        idx
    }

    fn unlink(&mut self, idx: u32) {
        debug_assert_ne!(idx, HEAD);
        let Node { prev, next, .. } = self.nodes[idx as usize];
        self.nodes[prev as usize].next = next;
        self.nodes[next as usize].prev = prev;
        self.free.push(idx);
        self.len -= 1;
    }

    /// Appends a candidate that extends the staircase.
    pub fn push_back(&mut self, cand: Candidate) {
        debug_assert!(cand.q.is_finite() && cand.c.is_finite());
        if let Some(last) = self.last() {
            debug_assert!(
                last.q < cand.q && last.c < cand.c,
                "push_back must extend the staircase: ({}, {}) after ({}, {})",
                cand.q,
                cand.c,
                last.q,
                last.c
            );
        }
        let tail = self.nodes[HEAD as usize].prev;
        self.alloc(cand, tail, HEAD);
    }

    pub fn iter(&self) -> CandidateIter<'_> {
        CandidateIter {
            list: self,
            cur: self.nodes[HEAD as usize].next,
        }
    }

    pub fn to_vec(&self) -> Vec<Candidate> {
        self.iter().collect()
    }

    /// Inserts `cand` unless it is dominated by a member; removes members it
    /// dominates. An exact (Q, C) duplicate keeps the incumbent. Returns
    /// whether `cand` was inserted.
    pub fn insert_pruned(&mut self, cand: Candidate) -> bool {
        // First node with C >= cand.c, or HEAD if none.
        let mut pos = self.nodes[HEAD as usize].next;
        while pos != HEAD && self.nodes[pos as usize].c < cand.c {
            pos = self.nodes[pos as usize].next;
        }
        let pred = self.nodes[pos as usize].prev;
        if pred != HEAD && self.nodes[pred as usize].q >= cand.q {
            return false; // dominated from the left (Q >= at smaller C)
        }
        if pos != HEAD && self.nodes[pos as usize].c == cand.c && self.nodes[pos as usize].q >= cand.q
        {
            return false; // dominated at equal C, or an exact duplicate
        }
        // Remove everything cand dominates: C >= cand.c with Q <= cand.q,
        // which is a contiguous run because Q increases along the list.
        while pos != HEAD && self.nodes[pos as usize].q <= cand.q {
            let next = self.nodes[pos as usize].next;
            self.unlink(pos);
            pos = next;
        }
        let prev = self.nodes[pos as usize].prev;
        self.alloc(cand, prev, pos);
        true
    }

    /// Graham's scan over the (C, Q) staircase: removes every candidate
    /// strictly below (or on) the chord of its neighbors, leaving the
    /// upper-left convex hull. Linear time; the forward-move count is
    /// asserted to stay within `2k`. Returns the number pruned.
    pub fn convex_prune(&mut self, stats: &mut ScanStats) -> usize {
        let k = self.len as u64;
        let mut forward = 0u64;
        let mut backward = 0u64;

        let mut a1 = HEAD;
        let mut a2 = self.nodes[a1 as usize].next;
        let mut a3 = if a2 == HEAD {
            HEAD
        } else {
            self.nodes[a2 as usize].next
        };
        while a3 != HEAD {
            // The sentinel plays the dummy (-inf, C) candidate: a turn at the
            // header can never fire, so the minimum-C member always survives.
            let prune = a1 != HEAD
                && left_turn(&self.get(a1), &self.get(a2), &self.get(a3));
            if prune {
                self.unlink(a2);
                backward += 1;
                a2 = a1;
                a1 = self.nodes[a1 as usize].prev;
            } else {
                forward += 1;
                a1 = a2;
                a2 = a3;
                a3 = self.nodes[a3 as usize].next;
            }
        }

        stats.calls += 1;
        stats.forward_moves += forward;
        stats.backward_moves += backward;
        stats.pruned += backward;
        if forward > 2 * k {
            stats.bound_violations += 1;
        }
        assert!(
            forward <= 2 * k,
            "convex_prune made {forward} forward moves on a list of {k}"
        );
        backward as usize
    }

    /// Merges `betas` (sorted by non-decreasing C) into the list in one
    /// pass, keeping exactly the nonredundant set of the union. Returns the
    /// number of candidates dropped (from either side).
    pub fn merge_sorted(&mut self, betas: &[Candidate]) -> usize {
        debug_assert!(betas.windows(2).all(|w| w[0].c <= w[1].c));
        let mut dropped = 0usize;
        let mut last = HEAD; // last surviving node
        let mut cur = self.nodes[HEAD as usize].next;
        let mut bi = 0usize;
        loop {
            // Take the smaller-C item next; at equal C the incumbent list
            // node goes first, which makes exact duplicates keep it.
            let take_existing = cur != HEAD
                && (bi >= betas.len() || self.nodes[cur as usize].c <= betas[bi].c);
            if take_existing {
                let next = self.nodes[cur as usize].next;
                if last != HEAD && self.nodes[cur as usize].q <= self.nodes[last as usize].q {
                    self.unlink(cur);
                    dropped += 1;
                } else {
                    last = cur;
                    // Once the betas are exhausted the remaining staircase
                    // can no longer lose members.
                    if bi >= betas.len() {
                        break;
                    }
                }
                cur = next;
            } else if bi < betas.len() {
                let beta = betas[bi];
                bi += 1;
                if last != HEAD && beta.q <= self.nodes[last as usize].q {
                    dropped += 1; // dominated (or an exact duplicate)
                    continue;
                }
                if last != HEAD && self.nodes[last as usize].c == beta.c {
                    // beta.q > last.q at equal C: beta supersedes it.
                    let prev = self.nodes[last as usize].prev;
                    self.unlink(last);
                    dropped += 1;
                    last = prev;
                }
                last = self.alloc(beta, last, cur);
            } else {
                break;
            }
        }
        dropped
    }

    /// Applies `f` to every candidate in order, then removes the ones whose
    /// updated Q no longer increases along the list. `f` must preserve the
    /// strict C order (e.g. adding a constant to every C).
    pub fn transform_prune(&mut self, mut f: impl FnMut(&mut Candidate)) -> usize {
        let mut dropped = 0usize;
        let mut last = HEAD;
        let mut cur = self.nodes[HEAD as usize].next;
        while cur != HEAD {
            let next = self.nodes[cur as usize].next;
            let mut cand = self.get(cur);
            f(&mut cand);
            debug_assert!(cand.q.is_finite() && cand.c.is_finite());
            if last != HEAD {
                debug_assert!(self.nodes[last as usize].c < cand.c);
            }
            if last != HEAD && cand.q <= self.nodes[last as usize].q {
                self.unlink(cur);
                dropped += 1;
            } else {
                let n = &mut self.nodes[cur as usize];
                n.q = cand.q;
                n.c = cand.c;
                n.trace = cand.trace;
                last = cur;
            }
            cur = next;
        }
        dropped
    }

    // Raw index cursors for the solver's pointer walks. An index of HEAD
    // means "past the end".
    pub(crate) fn first_raw(&self) -> u32 {
        self.nodes[HEAD as usize].next
    }

    pub(crate) fn next_raw(&self, idx: u32) -> u32 {
        self.nodes[idx as usize].next
    }

    pub(crate) fn prev_raw(&self, idx: u32) -> u32 {
        self.nodes[idx as usize].prev
    }

    pub(crate) fn is_end(&self, idx: u32) -> bool {
        idx == HEAD
    }

    pub(crate) fn get_raw(&self, idx: u32) -> Candidate {
        self.get(idx)
    }

    /// Panics if the doubly linked structure or the staircase invariant is
    /// broken. Test helper.
    pub fn assert_invariants(&self) {
        let mut count = 0usize;
        let mut cur = self.nodes[HEAD as usize].next;
        let mut prev = HEAD;
        let mut last: Option<Candidate> = None;
        while cur != HEAD {
            let n = &self.nodes[cur as usize];
            assert_eq!(n.prev, prev, "broken prev link at node {cur}");
            assert!(n.q.is_finite() && n.c.is_finite());
            if let Some(p) = last {
                assert!(
                    p.q < n.q && p.c < n.c,
                    "staircase violated: ({}, {}) then ({}, {})",
                    p.q,
                    p.c,
                    n.q,
                    n.c
                );
            }
            last = Some(self.get(cur));
            prev = cur;
            cur = n.next;
            count += 1;
        }
        assert_eq!(self.nodes[HEAD as usize].prev, prev, "broken tail link");
        assert_eq!(count, self.len, "length mismatch");
    }
}

pub struct CandidateIter<'a> {
    list: &'a CandidateList,
    cur: u32,
}

impl Iterator for CandidateIter<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        if self.cur == HEAD {
            return None;
        }
        let cand = self.list.get(self.cur);
        self.cur = self.list.nodes[self.cur as usize].next;
        Some(cand)
    }
}

impl<'a> IntoIterator for &'a CandidateList {
    type Item = Candidate;
    type IntoIter = CandidateIter<'a>;

    fn into_iter(self) -> CandidateIter<'a> {
        self.iter()
    }
}
