//! JSON file formats for nets, libraries, and assignments.
//!
//! Every dimensioned field carries an explicit unit tag so files can be
//! written in whatever scale is convenient (ohm/kohm, F/fF/pF, s/ps/ns);
//! the loader converts to SI on the way in. Writers always emit SI tags,
//! which keeps `load(save(x)) == x` bitwise exact. Unknown keys and unknown
//! unit tags are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{
    Assignment, BufferLibrary, BufferType, DriverSpec, Edge, ModelError, RoutingTree, SinkSpec,
};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum ResUnit {
    #[serde(rename = "ohm")]
    Ohm,
    #[serde(rename = "kohm")]
    KiloOhm,
}

impl ResUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            ResUnit::Ohm => v,
            ResUnit::KiloOhm => v * 1e3,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum CapUnit {
    #[serde(rename = "F")]
    Farad,
    #[serde(rename = "pF")]
    PicoFarad,
    #[serde(rename = "fF")]
    FemtoFarad,
}

impl CapUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            CapUnit::Farad => v,
            CapUnit::PicoFarad => v * 1e-12,
            CapUnit::FemtoFarad => v * 1e-15,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
enum TimeUnit {
    #[serde(rename = "s")]
    Second,
    #[serde(rename = "ns")]
    NanoSecond,
    #[serde(rename = "ps")]
    PicoSecond,
}

impl TimeUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            TimeUnit::Second => v,
            TimeUnit::NanoSecond => v * 1e-9,
            TimeUnit::PicoSecond => v * 1e-12,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SinkUnits {
    c: CapUnit,
    rat: TimeUnit,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SinkFile {
    c: f64,
    rat: f64,
    units: SinkUnits,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverUnits {
    r: ResUnit,
    k: TimeUnit,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriverFile {
    r: f64,
    k: f64,
    units: DriverUnits,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InternalFile {
    buffers: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeUnits {
    r: ResUnit,
    c: CapUnit,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeFile {
    from: String,
    to: String,
    r: f64,
    c: f64,
    units: EdgeUnits,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetFile {
    source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    driver: Option<DriverFile>,
    sinks: BTreeMap<String, SinkFile>,
    internal: BTreeMap<String, InternalFile>,
    edges: Vec<EdgeFile>,
    library_ref: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BufferUnits {
    r: ResUnit,
    c: CapUnit,
    k: TimeUnit,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BufferFile {
    id: String,
    r: f64,
    c: f64,
    k: f64,
    units: BufferUnits,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LibraryFile {
    name: String,
    buffers: Vec<BufferFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentFile {
    placements: BTreeMap<String, String>,
}

fn read_to_string(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn write_string(path: &Path, body: &str) -> Result<(), ModelError> {
    std::fs::write(path, body).map_err(|e| ModelError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

fn parse_err(path: &Path, e: serde_json::Error) -> ModelError {
    ModelError::Parse {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

/// Loads and structurally validates a routing tree.
pub fn load_net(path: impl AsRef<Path>) -> Result<RoutingTree, ModelError> {
    let path = path.as_ref();
    let body = read_to_string(path)?;
    let tree = net_from_str(&body).map_err(|e| match e {
        ModelError::Parse { msg, .. } => ModelError::Parse {
            path: path.display().to_string(),
            msg,
        },
        other => other,
    })?;
    Ok(tree)
}

/// Parses a net from a JSON string; used by `load_net` and tests.
pub fn net_from_str(body: &str) -> Result<RoutingTree, ModelError> {
    let file: NetFile = serde_json::from_str(body).map_err(|e| ModelError::Parse {
        path: "<string>".into(),
        msg: e.to_string(),
    })?;
    let tree = RoutingTree {
        source: file.source,
        driver: file.driver.map(|d| DriverSpec {
            r: d.units.r.to_si(d.r),
            k: d.units.k.to_si(d.k),
        }),
        sinks: file
            .sinks
            .into_iter()
            .map(|(id, s)| {
                (
                    id,
                    SinkSpec {
                        cap: s.units.c.to_si(s.c),
                        rat: s.units.rat.to_si(s.rat),
                    },
                )
            })
            .collect(),
        internal: file
            .internal
            .into_iter()
            .map(|(id, i)| (id, i.buffers))
            .collect(),
        edges: file
            .edges
            .into_iter()
            .map(|e| Edge {
                from: e.from,
                to: e.to,
                r: e.units.r.to_si(e.r),
                c: e.units.c.to_si(e.c),
            })
            .collect(),
        library_ref: file.library_ref,
    };
    tree.validate()?;
    Ok(tree)
}

/// Serializes a net in SI units.
pub fn net_to_string(tree: &RoutingTree) -> String {
    let file = NetFile {
        source: tree.source.clone(),
        driver: tree.driver.map(|d| DriverFile {
            r: d.r,
            k: d.k,
            units: DriverUnits {
                r: ResUnit::Ohm,
                k: TimeUnit::Second,
            },
        }),
        sinks: tree
            .sinks
            .iter()
            .map(|(id, s)| {
                (
                    id.clone(),
                    SinkFile {
                        c: s.cap,
                        rat: s.rat,
                        units: SinkUnits {
                            c: CapUnit::Farad,
                            rat: TimeUnit::Second,
                        },
                    },
                )
            })
            .collect(),
        internal: tree
            .internal
            .iter()
            .map(|(id, buffers)| {
                (
                    id.clone(),
                    InternalFile {
                        buffers: buffers.clone(),
                    },
                )
            })
            .collect(),
        edges: tree
            .edges
            .iter()
            .map(|e| EdgeFile {
                from: e.from.clone(),
                to: e.to.clone(),
                r: e.r,
                c: e.c,
                units: EdgeUnits {
                    r: ResUnit::Ohm,
                    c: CapUnit::Farad,
                },
            })
            .collect(),
        library_ref: tree.library_ref.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("net serialization cannot fail");
    s.push('\n');
    s
}

pub fn save_net(tree: &RoutingTree, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_string(path.as_ref(), &net_to_string(tree))
}

/// Loads a buffer library; both sort permutations are computed here.
pub fn load_library(path: impl AsRef<Path>) -> Result<BufferLibrary, ModelError> {
    let path = path.as_ref();
    let body = read_to_string(path)?;
    let file: LibraryFile = serde_json::from_str(&body).map_err(|e| parse_err(path, e))?;
    library_from_file(file)
}

pub fn library_from_str(body: &str) -> Result<BufferLibrary, ModelError> {
    let file: LibraryFile = serde_json::from_str(body).map_err(|e| ModelError::Parse {
        path: "<string>".into(),
        msg: e.to_string(),
    })?;
    library_from_file(file)
}

fn library_from_file(file: LibraryFile) -> Result<BufferLibrary, ModelError> {
    let buffers = file
        .buffers
        .into_iter()
        .map(|b| BufferType {
            id: b.id,
            r: b.units.r.to_si(b.r),
            c: b.units.c.to_si(b.c),
            k: b.units.k.to_si(b.k),
        })
        .collect();
    BufferLibrary::new(file.name, buffers)
}

pub fn library_to_string(lib: &BufferLibrary) -> String {
    let file = LibraryFile {
        name: lib.name().to_string(),
        buffers: lib
            .buffers()
            .iter()
            .map(|b| BufferFile {
                id: b.id.clone(),
                r: b.r,
                c: b.c,
                k: b.k,
                units: BufferUnits {
                    r: ResUnit::Ohm,
                    c: CapUnit::Farad,
                    k: TimeUnit::Second,
                },
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("library serialization cannot fail");
    s.push('\n');
    s
}

pub fn save_library(lib: &BufferLibrary, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_string(path.as_ref(), &library_to_string(lib))
}

pub fn load_assignment(path: impl AsRef<Path>) -> Result<Assignment, ModelError> {
    let path = path.as_ref();
    let body = read_to_string(path)?;
    let file: AssignmentFile = serde_json::from_str(&body).map_err(|e| parse_err(path, e))?;
    Ok(Assignment {
        placements: file.placements,
    })
}

pub fn assignment_to_string(a: &Assignment) -> String {
    let file = AssignmentFile {
        placements: a.placements.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("assignment serialization cannot fail");
    s.push('\n');
    s
}

pub fn save_assignment(a: &Assignment, path: impl AsRef<Path>) -> Result<(), ModelError> {
    write_string(path.as_ref(), &assignment_to_string(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHAIN_NET: &str = r#"{
        "source": "src",
        "sinks": {"s1": {"c": 3.0, "rat": 100.0, "units": {"c": "fF", "rat": "ps"}}},
        "internal": {},
        "edges": [{"from": "src", "to": "s1", "r": 1.0, "c": 2.0,
                   "units": {"r": "kohm", "c": "fF"}}],
        "library_ref": "l"
    }"#;

    #[test]
    fn chain_net_parses_with_unit_conversion() {
        let t = net_from_str(CHAIN_NET).unwrap();
        assert_eq!(t.sinks.len(), 1);
        assert_eq!(t.edges.len(), 1);
        let s = &t.sinks["s1"];
        // Scale factors like 1e-15 are not exact in binary, so converted
        // values match the decimal targets to within an ulp, not bitwise.
        let close = |a: f64, b: f64| (a - b).abs() <= b.abs() * 1e-12;
        assert!(close(s.cap, 3e-15));
        assert!(close(s.rat, 1e-10));
        assert_eq!(t.edges[0].r, 1000.0);
        assert!(close(t.edges[0].c, 2e-15));
    }

    #[test]
    fn unknown_keys_rejected() {
        let body = CHAIN_NET.replace("\"library_ref\"", "\"extra\": 1, \"library_ref\"");
        assert!(matches!(
            net_from_str(&body).unwrap_err(),
            ModelError::Parse { .. }
        ));
    }

    #[test]
    fn unknown_unit_tag_rejected() {
        let body = CHAIN_NET.replace("\"kohm\"", "\"megaohm\"");
        assert!(matches!(
            net_from_str(&body).unwrap_err(),
            ModelError::Parse { .. }
        ));
    }

    #[test]
    fn missing_units_rejected() {
        let body = r#"{
            "source": "src",
            "sinks": {"s1": {"c": 3.0, "rat": 100.0, "units": {"c": "fF", "rat": "ps"}}},
            "internal": {},
            "edges": [{"from": "src", "to": "s1", "r": 1.0, "c": 2.0}],
            "library_ref": "l"
        }"#;
        assert!(matches!(
            net_from_str(body).unwrap_err(),
            ModelError::Parse { .. }
        ));
    }

    #[test]
    fn edge_to_missing_vertex_fails_validation() {
        let body = CHAIN_NET.replace("\"to\": \"s1\"", "\"to\": \"nope\"");
        assert!(matches!(
            net_from_str(&body).unwrap_err(),
            ModelError::MissingVertex { vertex, .. } if vertex == "nope"
        ));
    }

    #[test]
    fn library_round_trip_is_bitwise() {
        let lib = library_from_str(
            r#"{"name": "l", "buffers": [
                {"id": "b0", "r": 1000.0, "c": 1.0, "k": 30.0,
                 "units": {"r": "ohm", "c": "fF", "k": "ps"}}
            ]}"#,
        )
        .unwrap();
        let reloaded = library_from_str(&library_to_string(&lib)).unwrap();
        assert_eq!(lib, reloaded);
    }

    #[test]
    fn net_round_trip_is_bitwise() {
        let t = net_from_str(CHAIN_NET).unwrap();
        let reloaded = net_from_str(&net_to_string(&t)).unwrap();
        assert_eq!(t, reloaded);
    }
}
