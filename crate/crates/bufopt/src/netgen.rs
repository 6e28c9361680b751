//! Seeded random net and library generation for tests and benchmarks.
//!
//! Topology: a random binary tree over `m` sinks built by repeated random
//! pairing, with edge lengths uniform in [10, 2000] um. Buffer positions
//! are created by segmenting edges into equal pieces, distributed across
//! edges proportionally to length. Electrical values use 180 nm-class
//! constants: wire 0.076 ohm/um and 0.118 fF/um; library R in [180, 7000]
//! ohm, C in [0.7, 23] fF, K in [29, 36.4] ps, all log-uniform; sink
//! capacitance uniform in [2, 41] fF.
//!
//! Everything is a pure function of the seed: the same call produces
//! byte-identical files.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{BufferLibrary, BufferType, Edge, RoutingTree, SinkSpec};

const WIRE_RES_PER_UM: f64 = 0.076;
const WIRE_CAP_PER_UM: f64 = 0.118e-15;
const EDGE_LEN_RANGE_UM: (f64, f64) = (10.0, 2000.0);
const SINK_CAP_RANGE: (f64, f64) = (2e-15, 41e-15);
const SINK_RAT_RANGE: (f64, f64) = (1e-10, 2e-9);
const BUF_R_RANGE: (f64, f64) = (180.0, 7000.0);
const BUF_C_RANGE: (f64, f64) = (0.7e-15, 23e-15);
const BUF_K_RANGE: (f64, f64) = (29e-12, 36.4e-12);

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(base: u64, tag: u64) -> u64 {
    splitmix(base ^ splitmix(tag))
}

/// Generates a `b`-buffer library. Deterministic in `seed`; the name
/// encodes both so regenerated libraries match their references.
///
/// Driving resistance and input capacitance are anti-correlated along a
/// drive-strength axis, as in real libraries (a stronger buffer drives
/// harder but presents more load). Independent sampling would let one
/// low-R low-C buffer dominate the rest, collapsing every buffered
/// candidate staircase to a couple of points.
pub fn gen_library(b: usize, seed: u64) -> BufferLibrary {
    assert!(b >= 1, "library size must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x11B));
    let (r_lo, r_hi) = BUF_R_RANGE;
    let (c_lo, c_hi) = BUF_C_RANGE;
    let (k_lo, k_hi) = BUF_K_RANGE;
    let buffers = (0..b)
        .map(|i| {
            // Drive strength: 0 = weakest (high R, low C), 1 = strongest.
            let strength = if b == 1 {
                rng.gen_range(0.0..1.0)
            } else {
                i as f64 / (b - 1) as f64
            };
            let jitter = rng.gen_range(-0.08..0.08f64);
            let t = (strength + jitter).clamp(0.0, 1.0);
            let r = r_hi * (r_lo / r_hi).powf(t);
            let c = c_lo * (c_hi / c_lo).powf(t);
            // Stronger buffers carry slightly more intrinsic delay.
            let k = k_lo * (k_hi / k_lo).powf(t) * rng.gen_range(0.98..1.02f64);
            BufferType {
                id: format!("b{i}"),
                r,
                c,
                k: k.clamp(k_lo, k_hi),
            }
        })
        .collect();
    BufferLibrary::new(format!("genlib-b{b}-s{seed:#018x}"), buffers)
        .expect("generated library is valid")
}

/// Generates a routing tree with `m` sinks and exactly `n` buffer
/// positions, plus a matching `b`-buffer library (every position allows
/// all of it). The topology depends on `(m, n, seed)` only, so sweeping
/// `b` keeps the net fixed.
pub fn gen_net(m: usize, n: usize, b: usize, seed: u64) -> (RoutingTree, BufferLibrary) {
    assert!(m >= 1, "a net needs at least one sink");
    let lib = gen_library(b, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x709));

    let mut sinks = BTreeMap::new();
    for i in 1..=m {
        sinks.insert(
            format!("s{i}"),
            SinkSpec {
                cap: rng.gen_range(SINK_CAP_RANGE.0..SINK_CAP_RANGE.1),
                rat: rng.gen_range(SINK_RAT_RANGE.0..SINK_RAT_RANGE.1),
            },
        );
    }

    // Random pairing: combine two subtree roots under a fresh branch vertex
    // until one root remains, then hang it off the source.
    let mut internal: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut lengths: Vec<(String, String, f64)> = Vec::new(); // from, to, um
    let mut pool: Vec<String> = (1..=m).map(|i| format!("s{i}")).collect();
    let mut next_branch = 0usize;
    while pool.len() > 1 {
        let a = pool.swap_remove(rng.gen_range(0..pool.len()));
        let b_ = pool.swap_remove(rng.gen_range(0..pool.len()));
        let parent = format!("v{next_branch}");
        next_branch += 1;
        internal.insert(parent.clone(), Vec::new());
        for child in [a, b_] {
            lengths.push((
                parent.clone(),
                child,
                rng.gen_range(EDGE_LEN_RANGE_UM.0..EDGE_LEN_RANGE_UM.1),
            ));
        }
        pool.push(parent);
    }
    let root = pool.pop().expect("at least one sink");
    lengths.push((
        "src".to_string(),
        root,
        rng.gen_range(EDGE_LEN_RANGE_UM.0..EDGE_LEN_RANGE_UM.1),
    ));

    // Distribute n buffer positions over edges proportionally to length
    // (largest remainder), then cut each edge into equal pieces.
    let total: f64 = lengths.iter().map(|&(_, _, l)| l).sum();
    let mut cuts = vec![0usize; lengths.len()];
    if n > 0 {
        let mut fractions: Vec<(usize, f64)> = Vec::with_capacity(lengths.len());
        let mut assigned = 0usize;
        for (i, &(_, _, l)) in lengths.iter().enumerate() {
            let share = n as f64 * l / total;
            cuts[i] = share.floor() as usize;
            assigned += cuts[i];
            fractions.push((i, share - share.floor()));
        }
        fractions.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        for &(i, _) in fractions.iter().take(n - assigned) {
            cuts[i] += 1;
        }
    }

    let allowed: Vec<String> = lib.buffers().iter().map(|bt| bt.id.clone()).collect();
    let mut edges = Vec::new();
    let mut next_pos = 0usize;
    for (i, (from, to, len)) in lengths.iter().enumerate() {
        let pieces = cuts[i] + 1;
        let piece_len = len / pieces as f64;
        let (r, c) = (WIRE_RES_PER_UM * piece_len, WIRE_CAP_PER_UM * piece_len);
        let mut upstream = from.clone();
        for _ in 0..cuts[i] {
            let p = format!("p{next_pos}");
            next_pos += 1;
            internal.insert(p.clone(), allowed.clone());
            edges.push(Edge {
                from: upstream,
                to: p.clone(),
                r,
                c,
            });
            upstream = p;
        }
        edges.push(Edge {
            from: upstream,
            to: to.clone(),
            r,
            c,
        });
    }

    let tree = RoutingTree {
        source: "src".to_string(),
        driver: None,
        sinks,
        internal,
        edges,
        library_ref: lib.name().to_string(),
    };
    debug_assert!(tree.validate().is_ok());
    debug_assert_eq!(tree.buffer_position_count(), n);
    (tree, lib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::{library_to_string, net_to_string};

    #[test]
    fn minimal_net_is_a_two_vertex_chain() {
        let (tree, _) = gen_net(1, 0, 1, 7);
        assert_eq!(tree.sinks.len(), 1);
        assert_eq!(tree.internal.len(), 0);
        assert_eq!(tree.edges.len(), 1);
        tree.validate().unwrap();
    }

    #[test]
    fn position_count_is_exact() {
        for (m, n) in [(1, 5), (3, 0), (5, 20), (8, 13)] {
            let (tree, lib) = gen_net(m, n, 4, 42);
            assert_eq!(tree.buffer_position_count(), n, "m={m} n={n}");
            assert_eq!(tree.sinks.len(), m);
            tree.validate().unwrap();
            tree.validate_with(&lib).unwrap();
        }
    }

    #[test]
    fn table_scale_net_shape() {
        let (tree, lib) = gen_net(337, 5647, 8, 1);
        assert_eq!(tree.sinks.len(), 337);
        assert_eq!(tree.buffer_position_count(), 5647);
        assert_eq!(lib.len(), 8);
        tree.validate().unwrap();
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let (t1, l1) = gen_net(6, 11, 3, 99);
        let (t2, l2) = gen_net(6, 11, 3, 99);
        assert_eq!(net_to_string(&t1), net_to_string(&t2));
        assert_eq!(library_to_string(&l1), library_to_string(&l2));
    }

    #[test]
    fn topology_stable_across_library_sizes() {
        let (t8, _) = gen_net(5, 9, 8, 3);
        let (t64, _) = gen_net(5, 9, 64, 3);
        assert_eq!(t8.edges, t64.edges);
        assert_eq!(t8.sinks, t64.sinks);
    }

    #[test]
    fn library_values_within_ranges() {
        let lib = gen_library(64, 5);
        for b in lib.buffers() {
            assert!(b.r >= 180.0 && b.r <= 7000.0);
            assert!(b.c >= 0.7e-15 && b.c <= 23e-15);
            assert!(b.k >= 29e-12 && b.k <= 36.4e-12);
        }
        // order_by_r non-increasing.
        let rs: Vec<f64> = lib.order_by_r().iter().map(|&i| lib.get(i).r).collect();
        assert!(rs.windows(2).all(|w| w[0] >= w[1]));
    }
}
