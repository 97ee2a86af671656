//! Graphviz rendering of an arena with cluster overlays.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::arena::{ArenaTree, PointId};
use crate::cluster::WeightedCluster;
use crate::document::PointNames;
use crate::error::Result;
use crate::scalar::Scalar;

/// A cluster drawn over the arena. Points of a `filled` overlay are drawn
/// solid black; points only in other overlays are grey.
pub struct Overlay<'a, T: Scalar> {
    pub name: String,
    pub cluster: &'a WeightedCluster<T>,
    pub filled: bool,
}

fn quote(s: &str) -> String {
    // backslashes pass through so that `\n` line breaks survive
    format!("\"{}\"", s.replace('"', "\\\""))
}

/// Free edges are drawn curved and solid, satellite edges straight and
/// bold; dotted edges point from a satellite to its second proximity.
pub fn render_dot<T: Scalar>(
    tree: &ArenaTree,
    names: &PointNames,
    overlays: &[Overlay<'_, T>],
    annotations: &BTreeMap<PointId, String>,
) -> Result<String> {
    for o in overlays {
        o.cluster.check_arena(tree)?;
    }
    let node = |p: PointId| format!("n{}", p.index());
    let mut s = String::new();
    writeln!(s, "digraph points {{").unwrap();
    writeln!(s, "  rankdir=BT;").unwrap();
    writeln!(s, "  node [shape=circle, style=filled, fillcolor=white];").unwrap();
    for p in tree.ids() {
        let mut label = names.name(p);
        if let Some(a) = annotations.get(&p) {
            label.push_str("\\n");
            label.push_str(a);
        }
        let (fill, font) = if overlays.iter().any(|o| o.filled && o.cluster.contains(p)) {
            ("black", "white")
        } else if overlays.iter().any(|o| o.cluster.contains(p)) {
            ("lightgrey", "black")
        } else {
            ("white", "black")
        };
        writeln!(s, "  {} [label={}, fillcolor={fill}, fontcolor={font}];", node(p), quote(&label)).unwrap();
    }
    for p in tree.ids() {
        let r = tree.record(p);
        if let Some(par) = r.parent {
            if r.is_free() {
                writeln!(s, "  {} -> {} [style=solid, class=curved];", node(par), node(p)).unwrap();
            } else {
                writeln!(s, "  {} -> {} [style=bold, class=straight];", node(par), node(p)).unwrap();
            }
        }
        if let Some(sec) = r.second_proximity {
            writeln!(s, "  {} -> {} [style=dotted, constraint=false, arrowhead=none];", node(p), node(sec))
                .unwrap();
        }
    }
    for (i, o) in overlays.iter().enumerate() {
        writeln!(s, "  subgraph overlay_{i} {{").unwrap();
        writeln!(s, "    label={};", quote(&o.name)).unwrap();
        let members: Vec<String> = o.cluster.points().map(node).collect();
        if !members.is_empty() {
            writeln!(s, "    {};", members.join("; ")).unwrap();
        }
        writeln!(s, "  }}").unwrap();
    }
    writeln!(s, "}}").unwrap();
    Ok(s)
}
