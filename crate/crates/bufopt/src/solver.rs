//! Bottom-up dynamic program over the routing tree.
//!
//! Candidates flow from the sinks toward the source through three
//! operations: [`add_wire`] (RC delay of an edge), [`merge_branches`]
//! (two-pointer combination at branch points), and buffered-candidate
//! generation at buffer positions. The latter comes in two kernels:
//!
//! * [`add_buffer_fast`]: convex-prunes the child list, then finds every
//!   buffer type's best candidate with a single pointer pair that only
//!   moves forward across the whole buffer loop - O(k + b) per position.
//! * [`add_buffer_baseline`]: re-scans the whole child list for every
//!   buffer type - O(k * b) per position, the classic multi-type kernel.
//!
//! Both produce the same candidate sets; only the time complexity differs.

use std::collections::BTreeMap;

use crate::candidate::{Candidate, CandidateList, ScanStats, TraceHandle};
use crate::model::{Assignment, BufferLibrary, ModelError, RoutingTree};

/// Buffered-candidate generation kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Fast,
    Baseline,
}

/// Whether convex pruning shrinks the shared candidate list in place or
/// works on a copy, preserving the full nonredundant list for upstream.
///
/// `Copy` is the optimal configuration: hull-interior candidates can still
/// win at the root once a branch merge mixes in the sibling's objective
/// terms, and copy mode keeps them available. `Destructive` mutates the
/// shared list the way the classic formulation does; it is equivalent on
/// single-sink nets and cheaper, but can return a slightly smaller root
/// slack on multi-sink trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PruneMode {
    Destructive,
    Copy,
}

/// Provenance of a candidate: enough to rebuild the buffer assignment.
#[derive(Debug, Clone, Copy)]
pub enum TraceNode {
    /// The base candidate of a sink.
    SinkBase { vertex: u32 },
    /// Buffer `buffer` (library index) inserted at `vertex`, driving the
    /// candidate `below`.
    Buffer {
        buffer: u32,
        vertex: u32,
        below: TraceHandle,
    },
    /// Combination of one candidate per branch.
    Merge { left: TraceHandle, right: TraceHandle },
}

/// Append-only arena for trace nodes. Candidates are pruned freely during
/// list surgery, so traces are never mutated or freed mid-solve.
#[derive(Debug, Default)]
pub struct TraceArena {
    nodes: Vec<TraceNode>,
}

impl TraceArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, node: TraceNode) -> TraceHandle {
        self.nodes.push(node);
        TraceHandle((self.nodes.len() - 1) as u32)
    }

    pub fn get(&self, h: TraceHandle) -> &TraceNode {
        &self.nodes[h.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Operation counters for one solve.
#[derive(Debug, Clone, Copy, Default)]
pub struct KernelStats {
    /// Convex-pruning scan counters (moves, prunes, bound checks).
    pub scan: ScanStats,
    pub candidates_created: u64,
    /// Candidates dropped as dominated during wire updates and merges.
    pub candidates_dropped: u64,
    pub betas_generated: u64,
    pub wire_ops: u64,
    pub merge_ops: u64,
    pub buffer_ops: u64,
    /// Largest candidate list seen at any point of the traversal.
    pub peak_list_len: usize,
    /// Ops after which a list exceeded its b*positions + sinks bound.
    /// Always zero; kept observable for release builds.
    pub list_bound_violations: u64,
}

/// Solver output: the optimal slack, a witnessing assignment, per-vertex
/// candidate counts, and kernel counters.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Max slack at the source, seconds (driver-adjusted when a driver is
    /// present).
    pub slack: f64,
    pub assignment: Assignment,
    pub candidate_counts: BTreeMap<String, usize>,
    pub stats: KernelStats,
}

/// The single base candidate of a sink: Q = RAT, C = sink capacitance.
pub fn leaf_candidates(arena: &mut TraceArena, vertex: u32, cap: f64, rat: f64) -> CandidateList {
    let trace = arena.alloc(TraceNode::SinkBase { vertex });
    CandidateList::from_sorted([Candidate { q: rat, c: cap, trace }])
}

/// Propagates every candidate through a wire: Q loses the Elmore delay
/// `r * (c/2 + C)`, C gains the wire capacitance. The C order survives but
/// the Q penalty grows with C, so one linear pass drops newly dominated
/// members. Returns the number dropped.
pub fn add_wire(list: &mut CandidateList, r: f64, c: f64) -> usize {
    list.transform_prune(|cand| {
        cand.q -= r * (0.5 * c + cand.c);
        cand.c += c;
    })
}

/// Two-pointer branch merge: emits `(min(Ql, Qr), Cl + Cr)` pairs, always
/// advancing the smaller-Q side (both on a tie). The output staircase is
/// already nonredundant.
pub fn merge_branches(
    arena: &mut TraceArena,
    left: &CandidateList,
    right: &CandidateList,
) -> CandidateList {
    assert!(!left.is_empty() && !right.is_empty());
    let mut out = CandidateList::new();
    let mut li = left.first_raw();
    let mut ri = right.first_raw();
    while !left.is_end(li) && !right.is_end(ri) {
        let l = left.get_raw(li);
        let r = right.get_raw(ri);
        let q = if l.q <= r.q { l.q } else { r.q };
        let trace = arena.alloc(TraceNode::Merge {
            left: l.trace,
            right: r.trace,
        });
        out.push_back(Candidate {
            q,
            c: l.c + r.c,
            trace,
        });
        if l.q <= r.q {
            li = left.next_raw(li);
        }
        if r.q <= l.q {
            ri = right.next_raw(ri);
        }
    }
    out
}

/// Computes `P_i(alpha)`: the slack obtained by letting buffer `i` drive
/// candidate `alpha`.
#[inline]
fn buffered_slack(alpha: &Candidate, r: f64, k: f64) -> f64 {
    alpha.q - r * alpha.c - k
}

/// Generates the buffered candidates for every allowed buffer type and
/// merges them into `list`.
///
/// The list is convex-pruned first (in place or on a copy, per `mode`);
/// on the pruned hull each buffer's gain `P_i` is unimodal in C, and with
/// buffers visited in non-increasing R order the maximizer only moves
/// toward larger C, so one persistent pointer pair finds every best
/// candidate in a single forward sweep. The betas are then ordered by the
/// library's precomputed C permutation and merged in one pass.
pub fn add_buffer_fast(
    arena: &mut TraceArena,
    list: &mut CandidateList,
    lib: &BufferLibrary,
    allowed: &[usize],
    vertex: u32,
    mode: PruneMode,
    stats: &mut KernelStats,
) {
    assert!(!list.is_empty(), "add_buffer on an empty candidate list");
    stats.buffer_ops += 1;

    let hull_copy = match mode {
        PruneMode::Destructive => {
            list.convex_prune(&mut stats.scan);
            None
        }
        PruneMode::Copy => {
            let mut hull = list.clone();
            hull.convex_prune(&mut stats.scan);
            Some(hull)
        }
    };
    let hull: &CandidateList = hull_copy.as_ref().unwrap_or(list);

    let mut allow = vec![false; lib.len()];
    for &i in allowed {
        allow[i] = true;
    }

    let mut betas: Vec<Option<Candidate>> = vec![None; lib.len()];
    let mut a1 = hull.first_raw();
    let mut a2 = hull.next_raw(a1);
    let mut pos = 0usize;
    #[cfg(debug_assertions)]
    let mut prev_pos = 0usize;
    for &bi in lib.order_by_r() {
        if !allow[bi] {
            continue;
        }
        let bt = lib.get(bi);
        while !hull.is_end(a2) {
            let p1 = buffered_slack(&hull.get_raw(a1), bt.r, bt.k);
            let p2 = buffered_slack(&hull.get_raw(a2), bt.r, bt.k);
            if p1 < p2 {
                a1 = a2;
                a2 = hull.next_raw(a2);
                pos += 1;
            } else {
                break;
            }
        }
        let alpha = hull.get_raw(a1);
        let q = buffered_slack(&alpha, bt.r, bt.k);

        #[cfg(debug_assertions)]
        {
            // Monotone pointer: the chosen index never decreases across the
            // buffer loop.
            debug_assert!(pos >= prev_pos);
            prev_pos = pos;
            // Local max implies global max on the hull: verify against an
            // exhaustive scan and against both neighbors.
            let prev = hull.prev_raw(a1);
            if !hull.is_end(prev) {
                debug_assert!(buffered_slack(&hull.get_raw(prev), bt.r, bt.k) <= q);
            }
            if !hull.is_end(a2) {
                debug_assert!(buffered_slack(&hull.get_raw(a2), bt.r, bt.k) <= q);
            }
            let mut best = f64::NEG_INFINITY;
            let mut idx = hull.first_raw();
            while !hull.is_end(idx) {
                let p = buffered_slack(&hull.get_raw(idx), bt.r, bt.k);
                if p > best {
                    best = p;
                }
                idx = hull.next_raw(idx);
            }
            debug_assert!(
                q == best,
                "pointer scan missed the best candidate: {q} vs {best}"
            );
        }

        let trace = arena.alloc(TraceNode::Buffer {
            buffer: bi as u32,
            vertex,
            below: alpha.trace,
        });
        betas[bi] = Some(Candidate {
            q,
            c: bt.c,
            trace,
        });
    }

    merge_betas(list, lib, &mut betas, stats);
}

/// Baseline kernel: one full scan of the child list per buffer type.
/// Produces the same candidate sets as [`add_buffer_fast`].
pub fn add_buffer_baseline(
    arena: &mut TraceArena,
    list: &mut CandidateList,
    lib: &BufferLibrary,
    allowed: &[usize],
    vertex: u32,
    mode: PruneMode,
    stats: &mut KernelStats,
) {
    assert!(!list.is_empty(), "add_buffer on an empty candidate list");
    stats.buffer_ops += 1;

    let mut allow = vec![false; lib.len()];
    for &i in allowed {
        allow[i] = true;
    }

    let mut betas: Vec<Option<Candidate>> = vec![None; lib.len()];
    for &bi in lib.order_by_r() {
        if !allow[bi] {
            continue;
        }
        let bt = lib.get(bi);
        let mut best: Option<Candidate> = None;
        let mut best_p = f64::NEG_INFINITY;
        for alpha in list.iter() {
            let p = buffered_slack(&alpha, bt.r, bt.k);
            // Strict improvement keeps the first (minimum-C) maximizer.
            if best.is_none() || p > best_p {
                best = Some(alpha);
                best_p = p;
            }
        }
        let alpha = best.expect("nonempty list");
        let trace = arena.alloc(TraceNode::Buffer {
            buffer: bi as u32,
            vertex,
            below: alpha.trace,
        });
        betas[bi] = Some(Candidate {
            q: best_p,
            c: bt.c,
            trace,
        });
    }

    // The best candidates survive convex pruning, so pruning before or
    // after the scan yields the same betas; pruning here keeps the output
    // list identical to the fast kernel's in destructive mode.
    if mode == PruneMode::Destructive {
        list.convex_prune(&mut stats.scan);
    }

    merge_betas(list, lib, &mut betas, stats);
}

fn merge_betas(
    list: &mut CandidateList,
    lib: &BufferLibrary,
    betas: &mut [Option<Candidate>],
    stats: &mut KernelStats,
) {
    // Non-decreasing C via the precomputed permutation: O(b), no sort.
    let mut ordered = Vec::with_capacity(lib.len());
    for &bi in lib.order_by_c() {
        if let Some(beta) = betas[bi].take() {
            ordered.push(beta);
        }
    }
    stats.betas_generated += ordered.len() as u64;
    stats.candidates_created += ordered.len() as u64;
    stats.candidates_dropped += list.merge_sorted(&ordered) as u64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum VertexKind {
    Source,
    Sink { cap: f64, rat: f64 },
    Internal,
}

struct Compiled {
    names: Vec<String>,
    kinds: Vec<VertexKind>,
    /// Library indices allowed at each vertex; empty unless the vertex is a
    /// buffer position.
    allowed: Vec<Vec<usize>>,
    /// Children with their incoming wire, sorted by child id.
    children: Vec<Vec<(usize, f64, f64)>>,
    source: usize,
}

fn compile(tree: &RoutingTree, lib: &BufferLibrary) -> Result<Compiled, ModelError> {
    tree.validate()?;
    tree.validate_with(lib)?;

    let mut names: Vec<String> = Vec::with_capacity(1 + tree.sinks.len() + tree.internal.len());
    names.push(tree.source.clone());
    names.extend(tree.sinks.keys().cloned());
    names.extend(tree.internal.keys().cloned());
    names.sort();
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();

    let mut kinds = vec![VertexKind::Internal; names.len()];
    let mut allowed = vec![Vec::new(); names.len()];
    kinds[index[tree.source.as_str()]] = VertexKind::Source;
    for (id, s) in &tree.sinks {
        kinds[index[id.as_str()]] = VertexKind::Sink {
            cap: s.cap,
            rat: s.rat,
        };
    }
    // Distinct allowed sets are few; resolve each once.
    let mut resolved: std::collections::HashMap<&[String], Vec<usize>> =
        std::collections::HashMap::new();
    for (id, ids) in &tree.internal {
        allowed[index[id.as_str()]] = resolved
            .entry(ids.as_slice())
            .or_insert_with(|| {
                ids.iter()
                    .map(|b| lib.index_of(b).expect("validated against library"))
                    .collect()
            })
            .clone();
    }

    let mut children: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); names.len()];
    for e in &tree.edges {
        children[index[e.from.as_str()]].push((index[e.to.as_str()], e.r, e.c));
    }
    for ch in &mut children {
        // Indices were assigned in sorted-name order, so this is id order.
        ch.sort_by_key(|&(c, _, _)| c);
    }

    Ok(Compiled {
        kinds,
        allowed,
        children,
        source: index[tree.source.as_str()],
        names,
    })
}

/// Runs the dynamic program and reconstructs the optimal assignment.
pub fn solve(
    tree: &RoutingTree,
    lib: &BufferLibrary,
    kernel: Kernel,
    mode: PruneMode,
) -> Result<SolveResult, ModelError> {
    let net = compile(tree, lib)?;
    let nv = net.names.len();
    let mut arena = TraceArena::new();
    let mut stats = KernelStats::default();
    let mut lists: Vec<Option<CandidateList>> = (0..nv).map(|_| None).collect();
    // (buffer positions, sinks) in each processed subtree, for the
    // b*n + m list-size bound.
    let mut subtree = vec![(0u64, 0u64); nv];
    // Per-vertex list sizes; keyed by name only after the traversal so the
    // hot loop stays free of string work.
    let mut counts = vec![0usize; nv];

    let b = lib.len() as u64;
    let check_bound = |stats: &mut KernelStats, list: &CandidateList, np: u64, ns: u64| {
        stats.peak_list_len = stats.peak_list_len.max(list.len());
        let bound = b * np + ns;
        if list.len() as u64 > bound {
            stats.list_bound_violations += 1;
        }
        debug_assert!(
            list.len() as u64 <= bound,
            "candidate list of {} exceeds bound b*n + m = {}",
            list.len(),
            bound
        );
    };

    enum Frame {
        Enter(usize),
        Exit(usize),
    }
    let mut stack = vec![Frame::Enter(net.source)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(v) => {
                stack.push(Frame::Exit(v));
                for &(child, _, _) in net.children[v].iter().rev() {
                    stack.push(Frame::Enter(child));
                }
            }
            Frame::Exit(v) => {
                let list = match net.kinds[v] {
                    VertexKind::Sink { cap, rat } => {
                        subtree[v] = (0, 1);
                        stats.candidates_created += 1;
                        leaf_candidates(&mut arena, v as u32, cap, rat)
                    }
                    VertexKind::Source | VertexKind::Internal => {
                        let mut acc: Option<(CandidateList, u64, u64)> = None;
                        for &(child, r, c) in &net.children[v] {
                            let mut cl = lists[child].take().expect("post-order");
                            let (np, ns) = subtree[child];
                            stats.wire_ops += 1;
                            stats.candidates_dropped += add_wire(&mut cl, r, c) as u64;
                            check_bound(&mut stats, &cl, np, ns);
                            acc = Some(match acc {
                                None => (cl, np, ns),
                                Some((left, lnp, lns)) => {
                                    stats.merge_ops += 1;
                                    let merged = merge_branches(&mut arena, &left, &cl);
                                    stats.candidates_created += merged.len() as u64;
                                    let (np, ns) = (lnp + np, lns + ns);
                                    check_bound(&mut stats, &merged, np, ns);
                                    (merged, np, ns)
                                }
                            });
                        }
                        let (mut cl, mut np, ns) = acc.expect("validated: no internal leaves");
                        if !net.allowed[v].is_empty() {
                            np += 1;
                            match kernel {
                                Kernel::Fast => add_buffer_fast(
                                    &mut arena,
                                    &mut cl,
                                    lib,
                                    &net.allowed[v],
                                    v as u32,
                                    mode,
                                    &mut stats,
                                ),
                                Kernel::Baseline => add_buffer_baseline(
                                    &mut arena,
                                    &mut cl,
                                    lib,
                                    &net.allowed[v],
                                    v as u32,
                                    mode,
                                    &mut stats,
                                ),
                            }
                            check_bound(&mut stats, &cl, np, ns);
                        }
                        subtree[v] = (np, ns);
                        cl
                    }
                };
                counts[v] = list.len();
                lists[v] = Some(list);
            }
        }
    }

    let root = lists[net.source].take().expect("traversal reached the source");
    let score = |cand: &Candidate| match tree.driver {
        Some(d) => cand.q - d.r * cand.c - d.k,
        None => cand.q,
    };
    let mut best: Option<Candidate> = None;
    let mut best_score = f64::NEG_INFINITY;
    for cand in root.iter() {
        let s = score(&cand);
        // Strict improvement: ties resolve to the smallest C, which comes
        // first in list order.
        if best.is_none() || s > best_score {
            best = Some(cand);
            best_score = s;
        }
    }
    let best = best.expect("candidate lists are never empty");

    let mut assignment = Assignment::empty();
    let mut walk = vec![best.trace];
    while let Some(h) = walk.pop() {
        match *arena.get(h) {
            TraceNode::SinkBase { .. } => {}
            TraceNode::Buffer {
                buffer,
                vertex,
                below,
            } => {
                assignment.placements.insert(
                    net.names[vertex as usize].clone(),
                    lib.get(buffer as usize).id.clone(),
                );
                walk.push(below);
            }
            TraceNode::Merge { left, right } => {
                walk.push(left);
                walk.push(right);
            }
        }
    }

    let candidate_counts = net
        .names
        .iter()
        .cloned()
        .zip(counts.iter().copied())
        .collect();

    Ok(SolveResult {
        slack: best_score,
        assignment,
        candidate_counts,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BufferType, Edge, SinkSpec};

    fn cand(q: f64, c: f64) -> Candidate {
        Candidate::new(q, c)
    }

    fn qc(list: &CandidateList) -> Vec<(f64, f64)> {
        list.iter().map(|x| (x.q, x.c)).collect()
    }

    fn lib2() -> BufferLibrary {
        // Non-increasing R order: B1 (R=3) before B2 (R=2).
        BufferLibrary::new(
            "l",
            vec![
                BufferType {
                    id: "B1".into(),
                    r: 3.0,
                    c: 0.5,
                    k: 0.0,
                },
                BufferType {
                    id: "B2".into(),
                    r: 2.0,
                    c: 0.6,
                    k: 0.0,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn leaf_is_single_candidate() {
        let mut arena = TraceArena::new();
        let l = leaf_candidates(&mut arena, 0, 3e-15, 1e-10);
        assert_eq!(qc(&l), vec![(1e-10, 3e-15)]);
        let l = leaf_candidates(&mut arena, 0, 0.0, 0.0);
        assert_eq!(qc(&l), vec![(0.0, 0.0)]);
    }

    #[test]
    fn add_wire_applies_elmore_delay() {
        let mut l = CandidateList::from_sorted([cand(1e-10, 5e-15)]);
        add_wire(&mut l, 1000.0, 2e-15);
        let v = l.to_vec();
        assert_eq!(v[0].q, 1e-10 - 1000.0 * 6e-15);
        assert_eq!(v[0].c, 7e-15);
    }

    #[test]
    fn add_wire_identity_wire_is_noop() {
        let mut l = CandidateList::from_sorted([cand(1.0, 1.0), cand(2.0, 2.0)]);
        assert_eq!(add_wire(&mut l, 0.0, 0.0), 0);
        assert_eq!(qc(&l), vec![(1.0, 1.0), (2.0, 2.0)]);
    }

    #[test]
    fn add_wire_prunes_inverted_candidates() {
        let mut l = CandidateList::from_sorted([cand(10e-12, 1e-15), cand(11e-12, 100e-15)]);
        assert_eq!(add_wire(&mut l, 100.0, 0.0), 1);
        let v = l.to_vec();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].q, 10e-12 - 100.0 * 1e-15);
    }

    #[test]
    fn merge_branches_singletons() {
        let mut arena = TraceArena::new();
        let l = CandidateList::from_sorted([cand(10.0, 1.0)]);
        let r = CandidateList::from_sorted([cand(8.0, 2.0)]);
        let m = merge_branches(&mut arena, &l, &r);
        assert_eq!(qc(&m), vec![(8.0, 3.0)]);
    }

    #[test]
    fn merge_branches_two_by_one() {
        let mut arena = TraceArena::new();
        let l = CandidateList::from_sorted([cand(5.0, 1.0), cand(9.0, 4.0)]);
        let r = CandidateList::from_sorted([cand(7.0, 2.0)]);
        let m = merge_branches(&mut arena, &l, &r);
        assert_eq!(qc(&m), vec![(5.0, 3.0), (7.0, 6.0)]);
    }

    #[test]
    fn merge_branches_neutral_element() {
        let mut arena = TraceArena::new();
        let l = CandidateList::from_sorted([cand(5.0, 1.0), cand(9.0, 4.0)]);
        let r = CandidateList::from_sorted([cand(1e9, 0.0)]);
        let m = merge_branches(&mut arena, &l, &r);
        assert_eq!(qc(&m), vec![(5.0, 1.0), (9.0, 4.0)]);
    }

    #[test]
    fn add_buffer_fast_matches_hand_example() {
        let lib = lib2();
        let mut arena = TraceArena::new();
        let mut list = CandidateList::from_sorted([cand(10.0, 1.0), cand(20.0, 5.0)]);
        let mut stats = KernelStats::default();
        add_buffer_fast(
            &mut arena,
            &mut list,
            &lib,
            &[0, 1],
            0,
            PruneMode::Copy,
            &mut stats,
        );
        // B1: max(10-3, 20-15) = 7 at the first candidate;
        // B2: max(10-2, 20-10) = 10 at the second.
        // Betas (7, 0.5) and (10, 0.6) merge ahead of the unbuffered pair;
        // (10, 1.0) is dominated by (10, 0.6).
        assert_eq!(
            qc(&list),
            vec![(7.0, 0.5), (10.0, 0.6), (20.0, 5.0)]
        );
        assert_eq!(stats.betas_generated, 2);
    }

    #[test]
    fn add_buffer_single_candidate_list() {
        let lib = lib2();
        let mut arena = TraceArena::new();
        let mut list = CandidateList::from_sorted([cand(10.0, 1.0)]);
        let mut stats = KernelStats::default();
        add_buffer_fast(
            &mut arena,
            &mut list,
            &lib,
            &[0, 1],
            0,
            PruneMode::Copy,
            &mut stats,
        );
        // Every beta is P_i of the lone candidate: (7, 0.5), (8, 0.6).
        assert_eq!(qc(&list), vec![(7.0, 0.5), (8.0, 0.6), (10.0, 1.0)]);
    }

    #[test]
    fn add_buffer_empty_allowed_set() {
        let lib = lib2();
        let mut arena = TraceArena::new();
        let pts = [cand(1.0, 1.0), cand(2.0, 2.0), cand(5.0, 3.0)];
        let mut list = CandidateList::from_sorted(pts);
        let mut stats = KernelStats::default();
        add_buffer_fast(
            &mut arena,
            &mut list,
            &lib,
            &[],
            0,
            PruneMode::Copy,
            &mut stats,
        );
        // Copy mode: unchanged.
        assert_eq!(qc(&list), vec![(1.0, 1.0), (2.0, 2.0), (5.0, 3.0)]);
        let mut list = CandidateList::from_sorted(pts);
        add_buffer_fast(
            &mut arena,
            &mut list,
            &lib,
            &[],
            0,
            PruneMode::Destructive,
            &mut stats,
        );
        // Destructive mode: the hull-interior point is gone.
        assert_eq!(qc(&list), vec![(1.0, 1.0), (5.0, 3.0)]);
    }

    #[test]
    fn baseline_matches_fast_on_example() {
        let lib = lib2();
        for mode in [PruneMode::Destructive, PruneMode::Copy] {
            let mut arena = TraceArena::new();
            let mut fast = CandidateList::from_sorted([cand(10.0, 1.0), cand(20.0, 5.0)]);
            let mut base = fast.clone();
            let mut stats = KernelStats::default();
            add_buffer_fast(&mut arena, &mut fast, &lib, &[0, 1], 0, mode, &mut stats);
            add_buffer_baseline(&mut arena, &mut base, &lib, &[0, 1], 0, mode, &mut stats);
            assert_eq!(qc(&fast), qc(&base));
        }
    }

    fn chain_tree() -> RoutingTree {
        RoutingTree {
            source: "src".into(),
            driver: None,
            sinks: BTreeMap::from([(
                "s1".to_string(),
                SinkSpec {
                    cap: 3e-15,
                    rat: 1e-10,
                },
            )]),
            internal: BTreeMap::new(),
            edges: vec![Edge {
                from: "src".into(),
                to: "s1".into(),
                r: 1000.0,
                c: 2e-15,
            }],
            library_ref: "l".into(),
        }
    }

    #[test]
    fn solve_unbuffered_chain() {
        let lib = BufferLibrary::new(
            "l",
            vec![BufferType {
                id: "b0".into(),
                r: 1000.0,
                c: 1e-15,
                k: 3e-11,
            }],
        )
        .unwrap();
        let tree = chain_tree();
        let res = solve(&tree, &lib, Kernel::Fast, PruneMode::Destructive).unwrap();
        assert_eq!(res.slack, 1e-10 - 1000.0 * 4e-15);
        assert!(res.assignment.placements.is_empty());
        assert_eq!(res.candidate_counts["src"], 1);
    }

    #[test]
    fn solve_rejects_unknown_allowed_buffer() {
        let lib = BufferLibrary::new(
            "l",
            vec![BufferType {
                id: "b0".into(),
                r: 1000.0,
                c: 1e-15,
                k: 0.0,
            }],
        )
        .unwrap();
        let mut tree = chain_tree();
        tree.internal.insert("v1".into(), vec!["ghost".into()]);
        tree.edges[0].to = "v1".into();
        tree.edges.push(Edge {
            from: "v1".into(),
            to: "s1".into(),
            r: 0.0,
            c: 0.0,
        });
        let err = solve(&tree, &lib, Kernel::Fast, PruneMode::Destructive).unwrap_err();
        assert!(matches!(err, ModelError::UnknownBuffer { buffer, .. } if buffer == "ghost"));
    }

    #[test]
    fn solve_driver_adjusts_root_choice() {
        // One buffer position on a resistance-free path: buffering only
        // costs slack (R*C of the buffer), so Q alone prefers no buffer.
        // A heavy driver rewards the low-C buffered candidate instead.
        let lib = BufferLibrary::new(
            "l",
            vec![BufferType {
                id: "b0".into(),
                r: 10.0,
                c: 1e-15,
                k: 0.0,
            }],
        )
        .unwrap();
        let mut tree = chain_tree();
        tree.internal.insert("v1".into(), vec!["b0".into()]);
        tree.edges[0] = Edge {
            from: "src".into(),
            to: "v1".into(),
            r: 0.0,
            c: 0.0,
        };
        tree.edges.push(Edge {
            from: "v1".into(),
            to: "s1".into(),
            r: 0.0,
            c: 0.0,
        });
        tree.sinks.get_mut("s1").unwrap().cap = 50e-15;

        let no_driver = solve(&tree, &lib, Kernel::Fast, PruneMode::Destructive).unwrap();
        assert!(no_driver.assignment.placements.is_empty());

        tree.driver = Some(crate::model::DriverSpec { r: 5000.0, k: 0.0 });
        let with_driver = solve(&tree, &lib, Kernel::Fast, PruneMode::Destructive).unwrap();
        assert_eq!(
            with_driver.assignment.placements.get("v1").map(String::as_str),
            Some("b0")
        );
    }
}
