//! JSON documents for graphs, matchings and factors, plus DOT export.
//!
//! Graph: `{"vertices":[{"id","side":"L"|"R","boundary"}],"edges":[{"id","u","v"}]}`.
//! A matching document is a graph document with `denominator`, `k` and a
//! `weights` object mapping edge id to numerator.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{BipartiteMultigraph, EdgeId, FactorSubgraph, FractionalMatching, Side};
use crate::error::{Error, Result};

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    #[serde(default)]
    pub boundary: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub stub: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub id: EdgeId,
    pub u: u64,
    pub v: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
}

impl GraphDoc {
    pub fn from_graph(g: &BipartiteMultigraph) -> Self {
        Self {
            vertices: (0..g.vertex_count())
                .map(|v| VertexRecord {
                    id: v as u64,
                    side: Some(g.side(v)),
                    boundary: g.is_boundary(v),
                    stub: false,
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id,
                    u: e.left as u64,
                    v: e.right as u64,
                })
                .collect(),
        }
    }

    /// Vertex records reordered by id; ids must be exactly `0..n`.
    pub fn dense_vertices(&self) -> Result<Vec<&VertexRecord>> {
        let n = self.vertices.len();
        let mut slots: Vec<Option<&VertexRecord>> = vec![None; n];
        for rec in &self.vertices {
            let slot = usize::try_from(rec.id)
                .ok()
                .and_then(|i| slots.get_mut(i))
                .ok_or_else(|| Error::Structural(format!("vertex id {} outside 0..{n}", rec.id)))?;
            if slot.replace(rec).is_some() {
                return Err(Error::Structural(format!("duplicate vertex id {}", rec.id)));
            }
        }
        Ok(slots.into_iter().map(|s| s.expect("filled")).collect())
    }

    pub fn to_graph(&self) -> Result<BipartiteMultigraph> {
        let verts = self.dense_vertices()?;
        let sides = verts
            .iter()
            .map(|r| {
                r.side
                    .ok_or_else(|| Error::Structural(format!("vertex {} has no side", r.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        let boundary = verts.iter().map(|r| r.boundary || r.stub).collect();
        BipartiteMultigraph::new(
            sides,
            boundary,
            self.edges
                .iter()
                .map(|e| (e.id, e.u as usize, e.v as usize)),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingDoc {
    #[serde(flatten)]
    pub graph: GraphDoc,
    pub denominator: u64,
    pub k: u64,
    pub weights: BTreeMap<EdgeId, u64>,
}

impl MatchingDoc {
    pub fn from_matching(f: &FractionalMatching<'_>) -> Self {
        let g = f.graph();
        Self {
            graph: GraphDoc::from_graph(g),
            denominator: f.denominator(),
            k: f.target(),
            weights: g
                .edges()
                .iter()
                .enumerate()
                .map(|(p, e)| (e.id, f.numerator(p)))
                .collect(),
        }
    }

    /// Weights bound to `g`, which must be the graph built from this document.
    pub fn matching<'g>(&self, g: &'g BipartiteMultigraph) -> Result<FractionalMatching<'g>> {
        if self.weights.len() != g.edge_count() {
            return Err(Error::Structural(format!(
                "{} weights for {} edges",
                self.weights.len(),
                g.edge_count()
            )));
        }
        let weights = g
            .edges()
            .iter()
            .map(|e| {
                self.weights
                    .get(&e.id)
                    .copied()
                    .ok_or_else(|| Error::Structural(format!("no weight for edge {}", e.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        FractionalMatching::new(g, self.denominator, weights, self.k)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorDoc {
    pub k: usize,
    pub edges: Vec<EdgeId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unresolved: Vec<u64>,
}

impl FactorDoc {
    pub fn from_factor(h: &FactorSubgraph<'_>) -> Self {
        Self {
            k: h.k(),
            edges: h.edge_ids(),
            unresolved: h.unresolved().iter().map(|&v| v as u64).collect(),
        }
    }

    pub fn factor<'g>(&self, g: &'g BipartiteMultigraph) -> Result<FactorSubgraph<'g>> {
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.edges.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::Structural(format!("edge {dup} listed twice")));
        }
        let unresolved = self
            .unresolved
            .iter()
            .map(|&v| {
                let v = v as usize;
                if v < g.vertex_count() {
                    Ok(v)
                } else {
                    Err(Error::Structural(format!(
                        "unresolved vertex {v} not in graph"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(
            FactorSubgraph::from_ids(g, self.edges.iter().copied(), self.k)
                .map_err(|e| Error::Structural(e.to_string()))?
                .with_unresolved(unresolved),
        )
    }
}

/// Graphviz rendering; edge labels are weights as reduced `p/q` when given.
pub fn to_dot(g: &BipartiteMultigraph, weights: Option<&FractionalMatching<'_>>) -> String {
    let mut out = String::from("graph G {\n");
    for v in 0..g.vertex_count() {
        let shape = match g.side(v) {
            Side::Left => "box",
            Side::Right => "ellipse",
        };
        let style = if g.is_boundary(v) {
            ", style=dashed"
        } else {
            ""
        };
        let _ = writeln!(out, "  v{v} [shape={shape}{style}];");
    }
    for (p, e) in g.edges().iter().enumerate() {
        match weights {
            Some(f) => {
                let _ = writeln!(
                    out,
                    "  v{} -- v{} [id=\"e{}\", label=\"{}\"];",
                    e.left,
                    e.right,
                    e.id,
                    f.weight(p)
                );
            }
            None => {
                let _ = writeln!(out, "  v{} -- v{} [id=\"e{}\"];", e.left, e.right, e.id);
            }
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::*;

    #[test]
    fn graph_json_shape() {
        let g = four_cycle().with_boundary([1]);
        let json = serde_json::to_value(GraphDoc::from_graph(&g)).unwrap();
        assert_eq!(json["vertices"][1]["boundary"], true);
        assert_eq!(json["vertices"][2]["side"], "R");
        assert_eq!(json["edges"][0]["id"], 0);
        assert!(json["vertices"][0].get("stub").is_none());
        let back = serde_json::from_value::<GraphDoc>(json)
            .unwrap()
            .to_graph()
            .unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn matching_json_keys_are_edge_ids() {
        let g = k33();
        let f = FractionalMatching::uniform(&g, 1, 3, 1).unwrap();
        let doc = MatchingDoc::from_matching(&f);
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.contains("\"weights\":{\"0\":1,"));
        let doc: MatchingDoc = serde_json::from_str(&text).unwrap();
        let g2 = doc.graph.to_graph().unwrap();
        assert_eq!(doc.matching(&g2).unwrap().numerators(), f.numerators());
    }

    #[test]
    fn sparse_vertex_ids_rejected() {
        let doc: GraphDoc = serde_json::from_str(
            r#"{"vertices":[{"id":0,"side":"L"},{"id":7,"side":"R"}],"edges":[]}"#,
        )
        .unwrap();
        assert!(matches!(doc.to_graph(), Err(Error::Structural(_))));
    }

    #[test]
    fn dot_labels_weights() {
        let g = four_cycle();
        let f = FractionalMatching::uniform(&g, 2, 4, 1).unwrap();
        let dot = to_dot(&g, Some(&f));
        assert!(dot.contains("label=\"1/2\""));
        assert_eq!(dot.matches("--").count(), 4);
    }
}
