//! Ground truth, independent of the solver: an Elmore-delay evaluator for a
//! fixed buffer assignment, and exhaustive search over all assignments on
//! small instances.
//!
//! The delay math here is deliberately duplicated rather than shared with
//! the solver, so the two can check each other. Expressions and traversal
//! order (post-order, children in id order) mirror the solver's exactly,
//! which makes slack comparisons bit-exact rather than tolerance-based.

use std::collections::BTreeMap;

use crate::model::{Assignment, BufferLibrary, ModelError, RoutingTree};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(
        "brute force would enumerate {combinations} assignments, above the cap of {cap}"
    )]
    CapExceeded { combinations: u128, cap: u64 },
}

/// Per-sink timing of one assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkTiming {
    /// Source-to-sink delay, seconds (driver included when present).
    pub delay: f64,
    /// RAT minus delay, seconds.
    pub slack: f64,
}

/// Full evaluation of one assignment.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// Minimum slack over all sinks, seconds.
    pub slack: f64,
    pub per_sink: BTreeMap<String, SinkTiming>,
    /// Capacitance seen from upstream at each vertex: the buffer's input
    /// capacitance where one is placed, the subtree load otherwise.
    pub downstream_cap: BTreeMap<String, f64>,
}

/// Preprocessed tree shape shared by repeated evaluations. Holds no
/// per-assignment state; every evaluation traverses from scratch.
struct EvalContext<'a> {
    tree: &'a RoutingTree,
    lib: &'a BufferLibrary,
    names: Vec<String>,
    /// (child, edge r, edge c), sorted by child id.
    children: Vec<Vec<(usize, f64, f64)>>,
    /// `Some((cap, rat))` where the vertex is a sink.
    sink_of: Vec<Option<(f64, f64)>>,
    source: usize,
    /// Post-order schedule (children before parents, id order within).
    postorder: Vec<usize>,
}

impl<'a> EvalContext<'a> {
    fn new(tree: &'a RoutingTree, lib: &'a BufferLibrary) -> Result<Self, ModelError> {
        tree.validate()?;
        tree.validate_with(lib)?;

        let mut names: Vec<String> =
            Vec::with_capacity(1 + tree.sinks.len() + tree.internal.len());
        names.push(tree.source.clone());
        names.extend(tree.sinks.keys().cloned());
        names.extend(tree.internal.keys().cloned());
        names.sort();
        let index: BTreeMap<&str, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();

        let mut children: Vec<Vec<(usize, f64, f64)>> = vec![Vec::new(); names.len()];
        for e in &tree.edges {
            children[index[e.from.as_str()]].push((index[e.to.as_str()], e.r, e.c));
        }
        for ch in &mut children {
            ch.sort_by_key(|&(c, _, _)| c);
        }

        let mut sink_of = vec![None; names.len()];
        for (id, s) in &tree.sinks {
            sink_of[index[id.as_str()]] = Some((s.cap, s.rat));
        }

        let source = index[tree.source.as_str()];
        let mut postorder = Vec::with_capacity(names.len());
        let mut stack = vec![(source, false)];
        while let Some((v, expanded)) = stack.pop() {
            if expanded {
                postorder.push(v);
            } else {
                stack.push((v, true));
                for &(c, _, _) in children[v].iter().rev() {
                    stack.push((c, false));
                }
            }
        }

        Ok(Self {
            tree,
            lib,
            names,
            children,
            sink_of,
            source,
            postorder,
        })
    }

    /// Buffer placement as library indices per vertex, resolved once.
    fn resolve(&self, a: &Assignment) -> Result<Vec<Option<usize>>, ModelError> {
        a.validate_for(self.tree, self.lib)?;
        let mut placed = vec![None; self.names.len()];
        for (vertex, buffer) in &a.placements {
            let v = self
                .names
                .binary_search_by(|n| n.as_str().cmp(vertex))
                .expect("validated vertex");
            placed[v] = Some(self.lib.index_of(buffer).expect("validated buffer"));
        }
        Ok(placed)
    }

    /// Capacitance pass. `load[v]` is the full subtree load driven at `v`;
    /// `cap[v]` is what upstream sees (the buffer's input capacitance when
    /// one is placed at `v`).
    fn caps(&self, placed: &[Option<usize>]) -> (Vec<f64>, Vec<f64>) {
        let n = self.names.len();
        let mut load = vec![0.0; n];
        let mut cap = vec![0.0; n];
        for &v in &self.postorder {
            let l = match self.sink_of[v] {
                Some((c, _)) => c,
                None => {
                    let mut acc = 0.0;
                    for (i, &(child, _, ec)) in self.children[v].iter().enumerate() {
                        let w = cap[child] + ec;
                        acc = if i == 0 { w } else { acc + w };
                    }
                    acc
                }
            };
            load[v] = l;
            cap[v] = match placed[v] {
                Some(bi) => self.lib.get(bi).c,
                None => l,
            };
        }
        (load, cap)
    }

    /// Minimum slack at the source: per-sink RAT minus accumulated delay,
    /// subtracted sink-to-source, minimized progressively.
    fn slack(&self, placed: &[Option<usize>]) -> f64 {
        let (load, cap) = self.caps(placed);
        let mut q = vec![0.0f64; self.names.len()];
        for &v in &self.postorder {
            let mut qv = match self.sink_of[v] {
                Some((_, rat)) => rat,
                None => {
                    let mut acc = f64::INFINITY;
                    for &(child, er, ec) in &self.children[v] {
                        let qc = q[child] - er * (0.5 * ec + cap[child]);
                        if qc < acc {
                            acc = qc;
                        }
                    }
                    acc
                }
            };
            if let Some(bi) = placed[v] {
                let bt = self.lib.get(bi);
                qv = qv - bt.r * load[v] - bt.k;
            }
            q[v] = qv;
        }
        let mut slack = q[self.source];
        if let Some(d) = self.tree.driver {
            slack = slack - d.r * load[self.source] - d.k;
        }
        slack
    }
}

/// Evaluates a fixed assignment: bottom-up capacitance pass, then slack
/// accumulation per sink.
pub fn evaluate(
    tree: &RoutingTree,
    lib: &BufferLibrary,
    a: &Assignment,
) -> Result<EvalReport, ModelError> {
    let ctx = EvalContext::new(tree, lib)?;
    let placed = ctx.resolve(a)?;
    let (load, cap) = ctx.caps(&placed);

    // Per-sink slack chains, same subtraction order as the progressive
    // minimum: sink upward.
    let mut chains: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ctx.names.len()];
    for &v in &ctx.postorder {
        let mut entries = match ctx.sink_of[v] {
            Some((_, rat)) => vec![(v, rat)],
            None => {
                let mut acc = Vec::new();
                for &(child, er, ec) in &ctx.children[v] {
                    for &(s, qv) in &chains[child] {
                        acc.push((s, qv - er * (0.5 * ec + cap[child])));
                    }
                }
                acc
            }
        };
        if let Some(bi) = placed[v] {
            let bt = ctx.lib.get(bi);
            for e in &mut entries {
                e.1 = e.1 - bt.r * load[v] - bt.k;
            }
        }
        chains[v] = entries;
    }

    let mut per_sink = BTreeMap::new();
    let mut slack = f64::INFINITY;
    for &(s, mut qv) in &chains[ctx.source] {
        if let Some(d) = tree.driver {
            qv = qv - d.r * load[ctx.source] - d.k;
        }
        let rat = ctx.sink_of[s].expect("chain ends at a sink").1;
        per_sink.insert(
            ctx.names[s].clone(),
            SinkTiming {
                delay: rat - qv,
                slack: qv,
            },
        );
        if qv < slack {
            slack = qv;
        }
    }

    let downstream_cap = ctx
        .names
        .iter()
        .enumerate()
        .map(|(v, n)| (n.clone(), cap[v]))
        .collect();

    Ok(EvalReport {
        slack,
        per_sink,
        downstream_cap,
    })
}

pub const DEFAULT_BRUTE_CAP: u64 = 1 << 22;

/// Exhaustive search over every legal assignment, with the default
/// enumeration cap.
pub fn brute_force(
    tree: &RoutingTree,
    lib: &BufferLibrary,
) -> Result<(f64, Assignment), OracleError> {
    brute_force_with_cap(tree, lib, DEFAULT_BRUTE_CAP)
}

/// Exhaustive search. Refuses (reporting the combination count) rather than
/// enumerate more than `cap` assignments. Ties go to the lexicographically
/// smallest assignment: positions in id order, "no buffer" before buffer
/// ids in ascending order.
pub fn brute_force_with_cap(
    tree: &RoutingTree,
    lib: &BufferLibrary,
    cap: u64,
) -> Result<(f64, Assignment), OracleError> {
    let ctx = EvalContext::new(tree, lib)?;

    // Buffer positions in id order, each with its allowed library indices
    // in ascending buffer-id order.
    let mut positions: Vec<(usize, Vec<usize>)> = Vec::new();
    for (id, allowed) in &tree.internal {
        if allowed.is_empty() {
            continue;
        }
        let v = ctx
            .names
            .binary_search_by(|n| n.as_str().cmp(id))
            .expect("internal vertex is indexed");
        let mut ids: Vec<&String> = allowed.iter().collect();
        ids.sort();
        let idxs = ids
            .into_iter()
            .map(|b| ctx.lib.index_of(b).expect("validated"))
            .collect();
        positions.push((v, idxs));
    }

    let mut combinations: u128 = 1;
    for (_, allowed) in &positions {
        combinations = combinations.saturating_mul(allowed.len() as u128 + 1);
    }
    if combinations > cap as u128 {
        return Err(OracleError::CapExceeded { combinations, cap });
    }

    let mut placed: Vec<Option<usize>> = vec![None; ctx.names.len()];
    // Odometer over the choice vector; counting from the last position
    // makes the enumeration order lexicographic.
    let mut digits = vec![0usize; positions.len()];
    let mut best_slack = f64::NEG_INFINITY;
    let mut best: Option<Vec<Option<usize>>> = None;
    loop {
        let slack = ctx.slack(&placed);
        if best.is_none() || slack > best_slack {
            best_slack = slack;
            best = Some(placed.clone());
        }

        let mut i = positions.len();
        loop {
            if i == 0 {
                // Odometer wrapped: all assignments visited.
                let chosen = best.expect("at least one assignment evaluated");
                let mut assignment = Assignment::empty();
                for (v, bi) in chosen.iter().enumerate() {
                    if let Some(bi) = bi {
                        assignment
                            .placements
                            .insert(ctx.names[v].clone(), ctx.lib.get(*bi).id.clone());
                    }
                }
                return Ok((best_slack, assignment));
            }
            i -= 1;
            let (v, allowed) = &positions[i];
            if digits[i] < allowed.len() {
                digits[i] += 1;
                placed[*v] = Some(allowed[digits[i] - 1]);
                break;
            }
            digits[i] = 0;
            placed[*v] = None;
        }
    }
}
