//! Directed causal hypergraph: nodes plus hyperedges `tail set → head`
//! weighted by OCTE.
//!
//! JSON layout (tagged `"format": "octe-hypergraph/1"`):
//!
//! ```text
//! {"format": "octe-hypergraph/1",
//!  "nodes": [{"id": 0, "name": "X1"}, ...],
//!  "edges": [{"tail": [0, 1], "head": 2, "octe_bits": 1.0,
//!             "p_value": 0.000999, "unique": true, "inherited": false}]}
//! ```

use crate::inference::HyperedgeDecision;
use crate::probcore::VariableId;
use crate::{OcteError, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write;

pub const FORMAT_TAG: &str = "octe-hypergraph/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    /// Sorted node ids.
    pub tail: Vec<usize>,
    pub head: usize,
    #[serde(rename = "octe_bits")]
    pub weight: f64,
    pub p_value: Option<f64>,
    pub unique: bool,
    pub inherited: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CausalHypergraph {
    nodes: Vec<VariableId>,
    edges: Vec<Hyperedge>,
}

#[derive(Serialize, Deserialize)]
struct Document {
    format: String,
    nodes: Vec<VariableId>,
    edges: Vec<Hyperedge>,
}

impl CausalHypergraph {
    pub fn new(nodes: Vec<VariableId>, edges: Vec<Hyperedge>) -> Result<Self> {
        let g = Self { nodes, edges };
        g.validate()?;
        Ok(g)
    }

    pub fn nodes(&self) -> &[VariableId] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    fn node(&self, id: usize) -> Option<&VariableId> {
        self.nodes.iter().find(|n| n.index == id)
    }

    fn validate(&self) -> Result<()> {
        crate::probcore::validate_variables(&self.nodes).map_err(|e| OcteError::Validation(e.to_string()))?;
        for (i, e) in self.edges.iter().enumerate() {
            let fail = |m: String| Err(OcteError::Validation(format!("edge {i}: {m}")));
            if e.tail.is_empty() {
                return fail("empty tail".into());
            }
            if e.tail.windows(2).any(|w| w[0] >= w[1]) {
                return fail("tail must be strictly increasing".into());
            }
            if e.tail.contains(&e.head) {
                return fail(format!("head {} is in its own tail", e.head));
            }
            if let Some(v) = e.tail.iter().chain([&e.head]).find(|v| self.node(**v).is_none()) {
                return fail(format!("endpoint {v} is not a node"));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return fail(format!("weight {} must be finite and non-negative", e.weight));
            }
            if let Some(p) = e.p_value {
                if !(p > 0.0 && p <= 1.0) {
                    return fail(format!("p-value {p} outside (0, 1]"));
                }
            }
            if e.unique && e.inherited {
                return fail("an edge cannot be both unique and inherited".into());
            }
            if self.edges[..i].iter().any(|o| o.tail == e.tail && o.head == e.head) {
                return fail("duplicate (tail, head) pair".into());
            }
        }
        Ok(())
    }

    /// Graph of the causal decisions; non-causal ones are dropped.
    pub fn from_decisions(nodes: &[VariableId], decisions: &[HyperedgeDecision]) -> Result<Self> {
        let mut edges: Vec<Hyperedge> = Vec::new();
        for d in decisions.iter().filter(|d| d.causal) {
            let mut tail: Vec<usize> = d.tail.iter().map(|v| v.index).collect();
            tail.sort_unstable();
            let edge = Hyperedge {
                tail,
                head: d.head.index,
                weight: d.octe,
                p_value: d.max_p,
                unique: d.unique,
                inherited: d.inherited,
            };
            match edges.iter().find(|e| e.tail == edge.tail && e.head == edge.head) {
                Some(existing) if *existing == edge => {}
                Some(_) => {
                    return Err(OcteError::Internal(format!(
                        "conflicting decisions for {} -> {}",
                        crate::probcore::format_set(&d.tail),
                        d.head
                    )))
                }
                None => edges.push(edge),
            }
        }
        Self::new(nodes.to_vec(), edges)
    }

    /// Drops every edge whose tail strictly contains another tail with the same head.
    pub fn minimal_frontier(&self) -> Self {
        let edges = self
            .edges
            .iter()
            .filter(|e| {
                !self.edges.iter().any(|o| {
                    o.head == e.head && o.tail.len() < e.tail.len() && o.tail.iter().all(|v| e.tail.contains(v))
                })
            })
            .cloned()
            .collect();
        Self {
            nodes: self.nodes.clone(),
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            format: FORMAT_TAG.to_string(),
            nodes: self.nodes.clone(),
            edges: self.edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("hypergraph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)
            .map_err(|e| OcteError::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        if doc.format != FORMAT_TAG {
            return Err(OcteError::Validation(format!(
                "unsupported format tag {:?}, expected {FORMAT_TAG:?}",
                doc.format
            )));
        }
        Self::new(doc.nodes, doc.edges)
    }

    /// Graphviz rendering. Tails of two or more nodes meet in a point-shaped
    /// junction node that carries the arc to the head.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph octe {\n  rankdir=LR;\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.index, escape(&n.name));
        }
        for (i, e) in self.edges.iter().enumerate() {
            let style = if e.inherited { ", style=dashed" } else { "" };
            let label = format!("{:.3}", e.weight);
            if let [single] = e.tail[..] {
                let _ = writeln!(out, "  n{single} -> n{} [label=\"{label}\"{style}];", e.head);
                continue;
            }
            let _ = writeln!(out, "  j{i} [shape=point, width=0.08, label=\"\"];");
            for t in &e.tail {
                let _ = writeln!(out, "  n{t} -> j{i} [arrowhead=none{style}];");
            }
            let _ = writeln!(out, "  j{i} -> n{} [label=\"{label}\"{style}];", e.head);
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
