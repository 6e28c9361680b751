//! Net model: routing trees, buffer libraries, assignments, and their
//! validation rules.
//!
//! All quantities are stored in SI units internally: ohms, farads, seconds.
//! File formats carry explicit unit tags and the loader converts on the way
//! in (see [`crate::format`]).

use std::collections::{BTreeMap, BTreeSet};

/// Errors raised while building or validating model objects.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("parse error in {path}: {msg}")]
    Parse { path: String, msg: String },
    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("buffer library is empty")]
    EmptyLibrary,
    #[error("duplicate buffer id `{id}` in library")]
    DuplicateBuffer { id: String },
    #[error("buffer `{id}` has non-positive driving resistance {r}")]
    NonPositiveResistance { id: String, r: f64 },
    #[error("buffer `{id}` has negative {field} {value}")]
    NegativeBufferValue {
        id: String,
        field: &'static str,
        value: f64,
    },
    #[error("vertex id `{id}` declared more than once")]
    DuplicateVertex { id: String },
    #[error("edge ({from} -> {to}) references missing vertex `{vertex}`")]
    MissingVertex {
        from: String,
        to: String,
        vertex: String,
    },
    #[error("edge ({from} -> {to}) has negative {field} {value}")]
    NegativeEdgeValue {
        from: String,
        to: String,
        field: &'static str,
        value: f64,
    },
    #[error("sink `{id}` has negative capacitance {c}")]
    NegativeSinkCap { id: String, c: f64 },
    #[error("driver has negative {field} {value}")]
    NegativeDriverValue { field: &'static str, value: f64 },
    #[error("`{id}` has non-finite {field}")]
    NonFinite { id: String, field: &'static str },
    #[error("source `{id}` may not be the target of an edge")]
    EdgeIntoSource { id: String },
    #[error("vertex `{vertex}` has more than one incoming edge")]
    MultipleParents { vertex: String },
    #[error("duplicate edge ({from} -> {to})")]
    DuplicateEdge { from: String, to: String },
    #[error("vertex `{vertex}` is not reachable from the source (dangling or cyclic)")]
    Unreachable { vertex: String },
    #[error("internal vertex `{vertex}` is a leaf; every leaf must be a sink")]
    InternalLeaf { vertex: String },
    #[error("sink `{vertex}` has outgoing edges; sinks must be leaves")]
    SinkWithChildren { vertex: String },
    #[error("source `{id}` has no outgoing edge")]
    SourceWithoutChildren { id: String },
    #[error("vertex `{vertex}` allows unknown buffer id `{buffer}`")]
    UnknownBuffer { vertex: String, buffer: String },
    #[error("vertex `{vertex}` lists buffer id `{buffer}` twice in its allowed set")]
    DuplicateAllowedBuffer { vertex: String, buffer: String },
    #[error("net references library `{want}` but library `{got}` was supplied")]
    LibraryMismatch { want: String, got: String },
    #[error("assignment places buffer at `{vertex}`, which is not a buffer position")]
    NotABufferPosition { vertex: String },
    #[error("assignment places `{buffer}` at `{vertex}`, which does not allow it")]
    BufferNotAllowed { vertex: String, buffer: String },
}

/// One buffer type: driving resistance, input capacitance, intrinsic delay.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferType {
    pub id: String,
    /// Driving resistance, ohms. Strictly positive.
    pub r: f64,
    /// Input capacitance, farads.
    pub c: f64,
    /// Intrinsic delay, seconds.
    pub k: f64,
}

/// A validated buffer library with both sort permutations precomputed.
///
/// `order_by_r` lists buffer indices by non-increasing driving resistance
/// (ties broken by ascending input capacitance, then id); `order_by_c`
/// lists them by non-decreasing input capacitance.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferLibrary {
    name: String,
    buffers: Vec<BufferType>,
    order_by_r: Vec<usize>,
    order_by_c: Vec<usize>,
    id_index: BTreeMap<String, usize>,
}

impl BufferLibrary {
    pub fn new(name: impl Into<String>, buffers: Vec<BufferType>) -> Result<Self, ModelError> {
        if buffers.is_empty() {
            return Err(ModelError::EmptyLibrary);
        }
        let mut seen = BTreeSet::new();
        for b in &buffers {
            if !seen.insert(b.id.clone()) {
                return Err(ModelError::DuplicateBuffer { id: b.id.clone() });
            }
            for (field, value) in [("R", b.r), ("C", b.c), ("K", b.k)] {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite {
                        id: b.id.clone(),
                        field,
                    });
                }
            }
            if b.r <= 0.0 {
                return Err(ModelError::NonPositiveResistance {
                    id: b.id.clone(),
                    r: b.r,
                });
            }
            if b.c < 0.0 {
                return Err(ModelError::NegativeBufferValue {
                    id: b.id.clone(),
                    field: "C",
                    value: b.c,
                });
            }
            if b.k < 0.0 {
                return Err(ModelError::NegativeBufferValue {
                    id: b.id.clone(),
                    field: "K",
                    value: b.k,
                });
            }
        }

        let mut order_by_r: Vec<usize> = (0..buffers.len()).collect();
        // Non-increasing R; equal-R buffers share a best candidate, so any
        // deterministic tie order is correct. We use ascending C, then id.
        order_by_r.sort_by(|&a, &b| {
            let (ba, bb) = (&buffers[a], &buffers[b]);
            bb.r.partial_cmp(&ba.r)
                .unwrap()
                .then(ba.c.partial_cmp(&bb.c).unwrap())
                .then(ba.id.cmp(&bb.id))
        });
        let mut order_by_c: Vec<usize> = (0..buffers.len()).collect();
        order_by_c.sort_by(|&a, &b| {
            let (ba, bb) = (&buffers[a], &buffers[b]);
            ba.c.partial_cmp(&bb.c)
                .unwrap()
                .then(ba.id.cmp(&bb.id))
        });
        let id_index = buffers
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id.clone(), i))
            .collect();

        Ok(Self {
            name: name.into(),
            buffers,
            order_by_r,
            order_by_c,
            id_index,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.buffers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffers.is_empty()
    }

    pub fn get(&self, idx: usize) -> &BufferType {
        &self.buffers[idx]
    }

    pub fn buffers(&self) -> &[BufferType] {
        &self.buffers
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.id_index.get(id).copied()
    }

    /// Buffer indices sorted by non-increasing driving resistance.
    pub fn order_by_r(&self) -> &[usize] {
        &self.order_by_r
    }

    /// Buffer indices sorted by non-decreasing input capacitance.
    pub fn order_by_c(&self) -> &[usize] {
        &self.order_by_c
    }
}

/// Sink load and timing constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkSpec {
    /// Sink capacitance, farads.
    pub cap: f64,
    /// Required arrival time, seconds.
    pub rat: f64,
}

/// Optional source driver. When present, root selection maximizes
/// `Q - r * C - k` instead of `Q` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverSpec {
    pub r: f64,
    pub k: f64,
}

/// A directed wire segment with lumped resistance and capacitance.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// Ohms.
    pub r: f64,
    /// Farads.
    pub c: f64,
}

/// A routing tree: one source, sinks with (C, RAT), internal vertices with
/// allowed-buffer sets, and RC edges directed away from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTree {
    pub source: String,
    pub driver: Option<DriverSpec>,
    pub sinks: BTreeMap<String, SinkSpec>,
    /// Internal vertex id -> allowed buffer ids. An empty set means the
    /// vertex is not a buffer position (e.g. a plain branch point).
    pub internal: BTreeMap<String, Vec<String>>,
    pub edges: Vec<Edge>,
    /// Name of the library the allowed-buffer ids refer to.
    pub library_ref: String,
}

impl RoutingTree {
    /// Structural validation: tree shape, sign constraints, finiteness.
    /// Buffer-id resolution needs a library; see [`RoutingTree::validate_with`].
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut ids: BTreeSet<&str> = BTreeSet::new();
        ids.insert(&self.source);
        for id in self.sinks.keys() {
            if !ids.insert(id) {
                return Err(ModelError::DuplicateVertex { id: id.clone() });
            }
        }
        for id in self.internal.keys() {
            if !ids.insert(id) {
                return Err(ModelError::DuplicateVertex { id: id.clone() });
            }
        }

        for (id, s) in &self.sinks {
            if !s.cap.is_finite() {
                return Err(ModelError::NonFinite {
                    id: id.clone(),
                    field: "c",
                });
            }
            if !s.rat.is_finite() {
                return Err(ModelError::NonFinite {
                    id: id.clone(),
                    field: "rat",
                });
            }
            if s.cap < 0.0 {
                return Err(ModelError::NegativeSinkCap {
                    id: id.clone(),
                    c: s.cap,
                });
            }
        }
        if let Some(d) = &self.driver {
            for (field, value) in [("r", d.r), ("k", d.k)] {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite {
                        id: self.source.clone(),
                        field: if field == "r" { "driver r" } else { "driver k" },
                    });
                }
                if value < 0.0 {
                    return Err(ModelError::NegativeDriverValue { field, value });
                }
            }
        }

        // Edges: known endpoints, at most one parent, no edge into the source.
        let mut parent_of: BTreeMap<&str, &str> = BTreeMap::new();
        let mut children: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        let mut edge_set: BTreeSet<(&str, &str)> = BTreeSet::new();
        for e in &self.edges {
            for v in [&e.from, &e.to] {
                if !ids.contains(v.as_str()) {
                    return Err(ModelError::MissingVertex {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        vertex: v.clone(),
                    });
                }
            }
            for (field, value) in [("r", e.r), ("c", e.c)] {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite {
                        id: format!("edge {} -> {}", e.from, e.to),
                        field: if field == "r" { "r" } else { "c" },
                    });
                }
                if value < 0.0 {
                    return Err(ModelError::NegativeEdgeValue {
                        from: e.from.clone(),
                        to: e.to.clone(),
                        field,
                        value,
                    });
                }
            }
            if !edge_set.insert((&e.from, &e.to)) {
                return Err(ModelError::DuplicateEdge {
                    from: e.from.clone(),
                    to: e.to.clone(),
                });
            }
            if e.to == self.source {
                return Err(ModelError::EdgeIntoSource {
                    id: self.source.clone(),
                });
            }
            if parent_of.insert(&e.to, &e.from).is_some() {
                return Err(ModelError::MultipleParents {
                    vertex: e.to.clone(),
                });
            }
            children.entry(&e.from).or_default().push(&e.to);
        }

        // Reachability from the source covers every vertex: combined with the
        // single-parent rule this excludes cycles and dangling components.
        let mut reached: BTreeSet<&str> = BTreeSet::new();
        let mut stack = vec![self.source.as_str()];
        while let Some(v) = stack.pop() {
            if reached.insert(v) {
                if let Some(ch) = children.get(v) {
                    stack.extend(ch.iter().copied());
                }
            }
        }
        for id in &ids {
            if !reached.contains(id) {
                return Err(ModelError::Unreachable {
                    vertex: (*id).to_string(),
                });
            }
        }

        for (id, _) in &self.sinks {
            if children.contains_key(id.as_str()) {
                return Err(ModelError::SinkWithChildren { vertex: id.clone() });
            }
        }
        for (id, _) in &self.internal {
            if !children.contains_key(id.as_str()) {
                return Err(ModelError::InternalLeaf { vertex: id.clone() });
            }
        }
        if !children.contains_key(self.source.as_str()) {
            return Err(ModelError::SourceWithoutChildren {
                id: self.source.clone(),
            });
        }
        Ok(())
    }

    /// Cross-validation against a named library: the `library_ref` must match
    /// and every allowed-buffer id must resolve.
    pub fn validate_with(&self, lib: &BufferLibrary) -> Result<(), ModelError> {
        if self.library_ref != lib.name() {
            return Err(ModelError::LibraryMismatch {
                want: self.library_ref.clone(),
                got: lib.name().to_string(),
            });
        }
        // Positions usually share one allowed set (often the whole
        // library); check each distinct set once.
        let mut checked: std::collections::HashSet<&[String]> = std::collections::HashSet::new();
        for (vertex, allowed) in &self.internal {
            if !checked.insert(allowed.as_slice()) {
                continue;
            }
            let mut seen = BTreeSet::new();
            for id in allowed {
                if lib.index_of(id).is_none() {
                    return Err(ModelError::UnknownBuffer {
                        vertex: vertex.clone(),
                        buffer: id.clone(),
                    });
                }
                if !seen.insert(id) {
                    return Err(ModelError::DuplicateAllowedBuffer {
                        vertex: vertex.clone(),
                        buffer: id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Number of buffer positions (internal vertices with a non-empty
    /// allowed set).
    pub fn buffer_position_count(&self) -> usize {
        self.internal.values().filter(|a| !a.is_empty()).count()
    }
}

/// A buffer assignment: internal-vertex id -> buffer id. Vertices absent
/// from the map hold no buffer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub placements: BTreeMap<String, String>,
}

impl Assignment {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Checks that every placement names a buffer position of `tree` and a
    /// buffer allowed there.
    pub fn validate_for(&self, tree: &RoutingTree, lib: &BufferLibrary) -> Result<(), ModelError> {
        for (vertex, buffer) in &self.placements {
            let allowed = tree
                .internal
                .get(vertex)
                .ok_or_else(|| ModelError::NotABufferPosition {
                    vertex: vertex.clone(),
                })?;
            if !allowed.iter().any(|b| b == buffer) {
                return Err(ModelError::BufferNotAllowed {
                    vertex: vertex.clone(),
                    buffer: buffer.clone(),
                });
            }
            if lib.index_of(buffer).is_none() {
                return Err(ModelError::UnknownBuffer {
                    vertex: vertex.clone(),
                    buffer: buffer.clone(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn buf(id: &str, r: f64, c: f64, k: f64) -> BufferType {
        BufferType {
            id: id.to_string(),
            r,
            c,
            k,
        }
    }

    #[test]
    fn singleton_library_orders() {
        let lib = BufferLibrary::new("l", vec![buf("b0", 1000.0, 1e-15, 3e-11)]).unwrap();
        assert_eq!(lib.order_by_r(), &[0]);
        assert_eq!(lib.order_by_c(), &[0]);
    }

    #[test]
    fn order_by_r_is_non_increasing() {
        let lib = BufferLibrary::new(
            "l",
            vec![buf("small", 180.0, 23e-15, 3e-11), buf("big", 7000.0, 0.7e-15, 3e-11)],
        )
        .unwrap();
        assert_eq!(lib.order_by_r(), &[1, 0]); // 7000 before 180
        assert_eq!(lib.order_by_c(), &[1, 0]); // 0.7 fF before 23 fF
    }

    #[test]
    fn equal_r_ties_broken_by_ascending_c() {
        let lib = BufferLibrary::new(
            "l",
            vec![buf("a", 500.0, 2e-15, 0.0), buf("b", 500.0, 1e-15, 0.0)],
        )
        .unwrap();
        assert_eq!(lib.order_by_r(), &[1, 0]);
    }

    #[test]
    fn duplicate_buffer_id_rejected() {
        let err = BufferLibrary::new("l", vec![buf("x", 1.0, 0.0, 0.0), buf("x", 2.0, 0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateBuffer { id } if id == "x"));
    }

    #[test]
    fn non_positive_r_rejected() {
        let err = BufferLibrary::new("l", vec![buf("x", 0.0, 0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, ModelError::NonPositiveResistance { .. }));
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
    fn minimal_chain_is_valid() {
        chain_tree().validate().unwrap();
    }

    #[test]
    fn edge_to_missing_vertex_names_it() {
        let mut t = chain_tree();
        t.edges.push(Edge {
            from: "src".into(),
            to: "ghost".into(),
            r: 0.0,
            c: 0.0,
        });
        let err = t.validate().unwrap_err();
        assert!(matches!(err, ModelError::MissingVertex { vertex, .. } if vertex == "ghost"));
    }

    #[test]
    fn cycle_detected_as_multiple_parents_or_unreachable() {
        let mut t = chain_tree();
        t.internal.insert("v1".into(), vec![]);
        t.internal.insert("v2".into(), vec![]);
        // v1 -> v2 -> v1 forms a cycle disconnected from the source chain.
        t.edges.push(Edge {
            from: "v1".into(),
            to: "v2".into(),
            r: 0.0,
            c: 0.0,
        });
        t.edges.push(Edge {
            from: "v2".into(),
            to: "v1".into(),
            r: 0.0,
            c: 0.0,
        });
        assert!(t.validate().is_err());
    }

    #[test]
    fn internal_leaf_rejected() {
        let mut t = chain_tree();
        t.internal.insert("v1".into(), vec![]);
        t.edges.push(Edge {
            from: "src".into(),
            to: "v1".into(),
            r: 1.0,
            c: 1e-15,
        });
        let err = t.validate().unwrap_err();
        assert!(matches!(err, ModelError::InternalLeaf { vertex } if vertex == "v1"));
    }

    #[test]
    fn negative_edge_r_rejected() {
        let mut t = chain_tree();
        t.edges[0].r = -1.0;
        assert!(matches!(
            t.validate().unwrap_err(),
            ModelError::NegativeEdgeValue { field: "r", .. }
        ));
    }

    #[test]
    fn unknown_allowed_buffer_named() {
        let lib = BufferLibrary::new("l", vec![buf("b0", 1.0, 0.0, 0.0)]).unwrap();
        let mut t = chain_tree();
        t.internal.insert("v1".into(), vec!["nope".into()]);
        t.edges[0].to = "v1".into();
        t.edges.push(Edge {
            from: "v1".into(),
            to: "s1".into(),
            r: 0.0,
            c: 0.0,
        });
        t.validate().unwrap();
        let err = t.validate_with(&lib).unwrap_err();
        assert!(matches!(err, ModelError::UnknownBuffer { buffer, .. } if buffer == "nope"));
    }

    #[test]
    fn library_name_mismatch_rejected() {
        let lib = BufferLibrary::new("other", vec![buf("b0", 1.0, 0.0, 0.0)]).unwrap();
        let t = chain_tree();
        assert!(matches!(
            t.validate_with(&lib).unwrap_err(),
            ModelError::LibraryMismatch { .. }
        ));
    }
}
