//! Property tests for the candidate-list kernels, checked against
//! independent brute-force oracles.

use bufopt::{Candidate, CandidateList, ScanStats};
use proptest::prelude::*;

fn cand(q: f64, c: f64) -> Candidate {
    Candidate::new(q, c)
}

/// Strictly increasing staircase built from positive steps.
fn staircase(max_len: usize) -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec((0.01f64..10.0, 0.01f64..10.0), 1..=max_len).prop_map(|steps| {
        let mut q = 0.0;
        let mut c = 0.0;
        steps
            .into_iter()
            .map(|(dq, dc)| {
                q += dq;
                c += dc;
                cand(q, c)
            })
            .collect()
    })
}

/// Arbitrary finite points for insertion sequences.
fn points(max_len: usize) -> impl Strategy<Value = Vec<Candidate>> {
    prop::collection::vec((-100.0f64..100.0, 0.0f64..100.0), 1..=max_len)
        .prop_map(|v| v.into_iter().map(|(q, c)| cand(q, c)).collect())
}

/// O(k^3) hull oracle: a middle point is pruned iff some chord of the
/// original staircase passes on or above it.
fn hull_oracle(pts: &[Candidate]) -> Vec<(f64, f64)> {
    let n = pts.len();
    let mut keep = vec![true; n];
    for j in 0..n {
        'search: for i in 0..j {
            for k in (j + 1)..n {
                let (a, b, m) = (&pts[i], &pts[k], &pts[j]);
                if (m.q - a.q) * (b.c - m.c) <= (b.q - m.q) * (m.c - a.c) {
                    keep[j] = false;
                    break 'search;
                }
            }
        }
    }
    (0..n)
        .filter(|&j| keep[j])
        .map(|j| (pts[j].q, pts[j].c))
        .collect()
}

fn qc(list: &CandidateList) -> Vec<(f64, f64)> {
    list.iter().map(|x| (x.q, x.c)).collect()
}

proptest! {
    #[test]
    fn insert_sequences_keep_the_staircase(pts in points(40)) {
        let mut list = CandidateList::new();
        for p in &pts {
            list.insert_pruned(*p);
            // Strictly increasing in both Q and C after every operation.
            list.assert_invariants();
        }
        // The list is the complete nonredundant set: every point seen so
        // far is dominated by (or is) a member.
        for p in &pts {
            prop_assert!(list.iter().any(|m| m.dominates(p)));
        }
    }

    #[test]
    fn convex_prune_matches_chord_oracle(pts in staircase(24)) {
        let mut list = CandidateList::from_sorted(pts.iter().copied());
        let mut stats = ScanStats::default();
        list.convex_prune(&mut stats);
        list.assert_invariants();
        prop_assert_eq!(qc(&list), hull_oracle(&pts));
    }

    #[test]
    fn convex_prune_is_idempotent(pts in staircase(48)) {
        let mut list = CandidateList::from_sorted(pts);
        let mut stats = ScanStats::default();
        list.convex_prune(&mut stats);
        let once = qc(&list);
        list.convex_prune(&mut stats);
        prop_assert_eq!(once, qc(&list));
        prop_assert_eq!(stats.bound_violations, 0);
    }

    #[test]
    fn convex_prune_stays_within_move_bound(pts in staircase(64)) {
        let k = pts.len() as u64;
        let mut list = CandidateList::from_sorted(pts);
        let mut stats = ScanStats::default();
        list.convex_prune(&mut stats);
        prop_assert!(stats.forward_moves <= 2 * k);
        prop_assert_eq!(stats.bound_violations, 0);
    }

    #[test]
    fn convex_prune_preserves_best_buffered_slack(
        pts in staircase(48),
        // Library-range resistances in SI, against fF-scale capacitances.
        r in 180.0f64..7000.0,
    ) {
        // Rescale the staircase to library-realistic magnitudes.
        let pts: Vec<Candidate> = pts
            .iter()
            .map(|p| cand(p.q * 1e-11, p.c * 1e-15))
            .collect();
        let full_best = pts
            .iter()
            .map(|p| p.q - r * p.c)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut list = CandidateList::from_sorted(pts);
        let mut stats = ScanStats::default();
        list.convex_prune(&mut stats);
        let hull_best = list
            .iter()
            .map(|p| p.q - r * p.c)
            .fold(f64::NEG_INFINITY, f64::max);
        // The maximizer survives pruning, so the values are identical bits.
        prop_assert_eq!(full_best, hull_best);
    }

    #[test]
    fn merge_sorted_equals_insert_fold(base in staircase(24), extra in points(16)) {
        let mut betas = extra.clone();
        betas.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());

        let mut merged = CandidateList::from_sorted(base.iter().copied());
        merged.merge_sorted(&betas);
        merged.assert_invariants();

        let mut folded = CandidateList::from_sorted(base.iter().copied());
        for b in &betas {
            folded.insert_pruned(*b);
        }
        prop_assert_eq!(qc(&merged), qc(&folded));
    }

    #[test]
    fn merged_list_remains_a_staircase(base in staircase(24), extra in points(16)) {
        let mut betas = extra;
        betas.sort_by(|a, b| a.c.partial_cmp(&b.c).unwrap());
        let mut merged = CandidateList::from_sorted(base);
        merged.merge_sorted(&betas);
        merged.assert_invariants();
    }
}

#[test]
fn hull_oracle_agrees_on_spec_examples() {
    // (C, Q) = (1,1),(2,2),(3,5): middle below the chord, pruned.
    let pts = [cand(1.0, 1.0), cand(2.0, 2.0), cand(5.0, 3.0)];
    assert_eq!(hull_oracle(&pts), vec![(1.0, 1.0), (5.0, 3.0)]);
    // (C, Q) = (1,1),(2,3),(3,4): concave staircase, untouched.
    let pts = [cand(1.0, 1.0), cand(3.0, 2.0), cand(4.0, 3.0)];
    assert_eq!(hull_oracle(&pts).len(), 3);
}
