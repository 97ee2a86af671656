//! JSON cluster documents.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "weight_kind": "virtual",
//!   "points": [
//!     {"id": "O", "weight": 2},
//!     {"id": "p1", "parent": "O", "weight": 2},
//!     {"id": "p4", "parent": "p3", "second_proximity": "p2"}
//!   ]
//! }
//! ```
//!
//! Points are listed parents first. A point without `weight` belongs to the
//! arena only. Weights are integers of any size.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arena::{ArenaTree, PointId, RawArena, RawPoint};
use crate::cluster::{cluster_diagnostics, WeightKind, WeightedCluster};
use crate::error::{Diagnostic, Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocPoint {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    second_proximity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    format_version: u32,
    weight_kind: String,
    points: Vec<DocPoint>,
}

/// External names of arena points. Points added after parsing are called
/// `q#<index>`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointNames {
    names: Vec<String>,
    lookup: HashMap<String, PointId>,
}

impl PointNames {
    pub fn new(names: Vec<String>) -> Self {
        let lookup = names.iter().enumerate().map(|(i, n)| (n.clone(), PointId::from_index(i))).collect();
        PointNames { names, lookup }
    }

    pub fn name(&self, p: PointId) -> String {
        match self.names.get(p.index()) {
            Some(n) => n.clone(),
            None => format!("q#{}", p.index()),
        }
    }

    pub fn get(&self, name: &str) -> Option<PointId> {
        if let Some(p) = self.lookup.get(name) {
            return Some(*p);
        }
        let idx = name.strip_prefix("q#")?.parse::<usize>().ok()?;
        (idx >= self.names.len()).then(|| PointId::from_index(idx))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Human-readable diagnostic using external names.
    pub fn describe(&self, d: &Diagnostic) -> String {
        let n = |p: &PointId| format!("'{}'", self.name(*p));
        match d {
            Diagnostic::MissingOrigin => "no origin point".into(),
            Diagnostic::DuplicateOrigin { point } => {
                format!("{} has no parent but is not the first point", n(point))
            }
            Diagnostic::UnknownParent { point } => {
                format!("{} refers to a point that does not precede it", n(point))
            }
            Diagnostic::SelfReference { point } => {
                format!("{} uses its parent as second proximity", n(point))
            }
            Diagnostic::IllegalProximity { point, second } => format!(
                "{} cannot be proximate to {}: not a proximity of its parent",
                n(point),
                n(second)
            ),
            Diagnostic::DuplicateSatellite { point, existing } => {
                format!("{} has the same parent and second proximity as {}", n(point), n(existing))
            }
            Diagnostic::NotDownwardClosed { point, missing } => {
                format!("weighted point {} has unweighted parent {}", n(point), n(missing))
            }
            Diagnostic::NonPositiveWeight { point } => format!("{} has a non-positive weight", n(point)),
            Diagnostic::NegativeExcess { point, excess } => {
                format!("proximity inequality fails at {} (excess {excess})", n(point))
            }
            Diagnostic::Document { message } => message.clone(),
        }
    }
}

/// A parsed document: its arena, its cluster and the point names.
#[derive(Clone, Debug)]
pub struct Document<T: Scalar> {
    pub tree: ArenaTree,
    pub cluster: WeightedCluster<T>,
    pub names: PointNames,
}

fn doc_error(message: impl Into<String>) -> Diagnostic {
    Diagnostic::Document { message: message.into() }
}

/// Parses and validates a document, reporting every problem found.
pub fn parse_document<T: Scalar>(text: &str) -> Result<Document<T>> {
    parse_inner(text).map_err(|(e, _)| e)
}

/// Every problem with a document, named by point ids. Besides structure,
/// virtual and multiplicity clusters must satisfy the proximity inequalities.
pub fn validate_document<T: Scalar>(text: &str) -> Vec<String> {
    match parse_inner::<T>(text) {
        Err((Error::Validation(diags), names)) => diags.iter().map(|d| names.describe(d)).collect(),
        Err((e, _)) => vec![e.to_string()],
        Ok(doc) => {
            if doc.cluster.kind() == WeightKind::Value {
                return Vec::new();
            }
            crate::cluster::excesses(&doc.tree, &doc.cluster)
                .map(|ex| {
                    ex.into_iter()
                        .filter(|(_, r)| r.is_negative())
                        .map(|(point, r)| {
                            doc.names.describe(&Diagnostic::NegativeExcess { point, excess: r.to_string() })
                        })
                        .collect()
                })
                .unwrap_or_else(|e| vec![e.to_string()])
        }
    }
}

#[allow(clippy::result_large_err)]
fn parse_inner<T: Scalar>(text: &str) -> std::result::Result<Document<T>, (Error, PointNames)> {
    let doc: Doc = serde_json::from_str(text)
        .map_err(|e| (Error::Document(format!("malformed JSON: {e}")), PointNames::default()))?;
    let mut diags = Vec::new();
    if doc.format_version != FORMAT_VERSION {
        diags.push(doc_error(format!("unsupported format_version {}", doc.format_version)));
    }
    let kind = WeightKind::parse(&doc.weight_kind);
    if kind.is_none() {
        diags.push(doc_error(format!("unknown weight_kind '{}'", doc.weight_kind)));
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, p) in doc.points.iter().enumerate() {
        if index.insert(p.id.as_str(), i).is_some() {
            diags.push(doc_error(format!("duplicate id '{}'", p.id)));
        }
    }
    let resolve = |name: &Option<String>, of: &str, field: &str, diags: &mut Vec<Diagnostic>| {
        name.as_ref().map(|n| match index.get(n.as_str()) {
            Some(&i) => i,
            None => {
                diags.push(doc_error(format!("{field} '{n}' of '{of}' is not a point")));
                // keep the point invalid rather than silently free
                usize::MAX
            }
        })
    };
    let mut raw = RawArena::default();
    let mut weights: BTreeMap<PointId, T> = BTreeMap::new();
    let mut carriers = BTreeSet::new();
    for (i, p) in doc.points.iter().enumerate() {
        let parent = resolve(&p.parent, &p.id, "parent", &mut diags);
        let second = resolve(&p.second_proximity, &p.id, "second_proximity", &mut diags);
        if p.parent.is_none() && p.second_proximity.is_some() {
            diags.push(doc_error(format!("origin '{}' cannot have a second proximity", p.id)));
        }
        raw.points.push(RawPoint { parent, second_proximity: second, label: p.label.clone() });
        if let Some(w) = &p.weight {
            match T::from_str(&w.to_string()) {
                Ok(v) => {
                    if v.is_zero() && kind == Some(WeightKind::Virtual) {
                        carriers.insert(PointId::from_index(i));
                    }
                    weights.insert(PointId::from_index(i), v);
                }
                Err(_) => diags.push(doc_error(format!("weight of '{}' is not an integer: {w}", p.id))),
            }
        }
    }
    let struct_diags = raw.validate();
    let arena_ok = struct_diags.is_empty() && diags.is_empty();
    diags.extend(struct_diags);
    let names = PointNames::new(doc.points.iter().map(|p| p.id.clone()).collect());
    if !arena_ok {
        return Err((Error::Validation(diags), names));
    }
    let tree = raw.build().expect("validated");
    let kind = kind.expect("checked");
    let cdiags = cluster_diagnostics(&tree, &weights, &carriers);
    if !cdiags.is_empty() {
        return Err((Error::Validation(cdiags), names));
    }
    let cluster = WeightedCluster::new_with_carriers(&tree, kind, weights, carriers).expect("checked");
    Ok(Document { tree, cluster, names })
}

/// Which arena points to write.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extent {
    /// Every arena point; those off the cluster carry no weight.
    Arena,
    /// Only the cluster points.
    Cluster,
}

/// Writes a document, one point per line, preserving names.
pub fn serialize_document<T: Scalar>(
    tree: &ArenaTree,
    cluster: &WeightedCluster<T>,
    names: &PointNames,
    extent: Extent,
) -> Result<String> {
    cluster.check_arena(tree)?;
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"format_version\": {FORMAT_VERSION},\n"));
    out.push_str(&format!("  \"weight_kind\": \"{}\",\n", cluster.kind().name()));
    out.push_str("  \"points\": [");
    let pts: Vec<PointId> = match extent {
        Extent::Arena => tree.ids().collect(),
        Extent::Cluster => cluster.points().collect(),
    };
    for (i, &p) in pts.iter().enumerate() {
        let r = tree.record(p);
        let dp = DocPoint {
            id: names.name(p),
            parent: r.parent.map(|q| names.name(q)),
            second_proximity: r.second_proximity.map(|q| names.name(q)),
            weight: cluster
                .weight(p)
                .map(|w| serde_json::Number::from_str(&w.to_string()).expect("integer literal")),
            label: r.label.clone(),
        };
        let line = spaced_json(&dp)?;
        out.push_str(if i == 0 { "\n    " } else { ",\n    " });
        out.push_str(&line);
    }
    out.push_str(if pts.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
    Ok(out)
}

// one line, with a space after `:` and `,`
struct Spaced;

impl serde_json::ser::Formatter for Spaced {
    fn begin_object_key<W: ?Sized + std::io::Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        if first {
            Ok(())
        } else {
            w.write_all(b", ")
        }
    }

    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        w.write_all(b": ")
    }
}

fn spaced_json(v: &impl Serialize) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Spaced);
    v.serialize(&mut ser).map_err(|e| Error::Document(e.to_string()))?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}
