use serde::{Deserialize, Serialize};

use super::{EdgeId, VertexId};
use crate::error::{Error, Result};

/// Finite loopless multigraph, not necessarily bipartite. Edges are stored
/// sorted by id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GeneralDoc", into = "GeneralDoc")]
pub struct UndirectedMultigraph {
    n: usize,
    edges: Vec<(EdgeId, VertexId, VertexId)>,
    incidence: Vec<Vec<usize>>,
}

impl UndirectedMultigraph {
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut edges: Vec<_> = edges.into_iter().collect();
        edges.sort_by_key(|e| e.0);
        if let Some(w) = edges.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Structural(format!("duplicate edge id {}", w[0].0)));
        }
        let mut incidence = vec![Vec::new(); n];
        for (pos, &(id, u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge {id} has a dangling endpoint"
                )));
            }
            if u == v {
                return Err(Error::Structural(format!("edge {id} is a loop")));
            }
            incidence[u].push(pos);
            incidence[v].push(pos);
        }
        Ok(Self {
            n,
            edges,
            incidence,
        })
    }

    /// Edge ids `0..` in the order given.
    pub fn from_pairs(
        n: usize,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        Self::new(
            n,
            pairs
                .into_iter()
                .enumerate()
                .map(|(i, (u, v))| (i as EdgeId, u, v)),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `(id, u, v)` triples sorted by id.
    pub fn edges(&self) -> &[(EdgeId, VertexId, VertexId)] {
        &self.edges
    }

    pub fn incident(&self, v: VertexId) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn is_regular(&self, d: usize) -> bool {
        (0..self.n).all(|v| self.degree(v) == d)
    }

    /// Per-vertex count of incidences with the given edge ids; unknown ids
    /// are an argument error.
    pub fn degrees_of(&self, ids: &[EdgeId]) -> Result<Vec<usize>> {
        let mut deg = vec![0; self.n];
        for id in ids {
            let pos = self
                .edges
                .binary_search_by_key(id, |e| e.0)
                .map_err(|_| Error::Argument(format!("edge {id} is not in the graph")))?;
            let (_, u, v) = self.edges[pos];
            deg[u] += 1;
            deg[v] += 1;
        }
        Ok(deg)
    }
}

#[derive(Serialize, Deserialize)]
struct GeneralDoc {
    vertices: usize,
    edges: Vec<GeneralEdge>,
}

#[derive(Serialize, Deserialize)]
struct GeneralEdge {
    id: EdgeId,
    u: VertexId,
    v: VertexId,
}

impl TryFrom<GeneralDoc> for UndirectedMultigraph {
    type Error = Error;

    fn try_from(doc: GeneralDoc) -> Result<Self> {
        Self::new(
            doc.vertices,
            doc.edges.into_iter().map(|e| (e.id, e.u, e.v)),
        )
    }
}

impl From<UndirectedMultigraph> for GeneralDoc {
    fn from(g: UndirectedMultigraph) -> Self {
        Self {
            vertices: g.n,
            edges: g
                .edges
                .into_iter()
                .map(|(id, u, v)| GeneralEdge { id, u, v })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_and_duplicates_rejected() {
        assert!(UndirectedMultigraph::from_pairs(2, [(0, 0)]).is_err());
        assert!(UndirectedMultigraph::new(2, [(1, 0, 1), (1, 1, 0)]).is_err());
        assert!(UndirectedMultigraph::from_pairs(2, [(0, 2)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = UndirectedMultigraph::from_pairs(3, [(0, 1), (1, 2), (2, 0), (0, 1)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.starts_with("{\"vertices\":3"));
        let back: UndirectedMultigraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(g.degrees_of(&[0, 3]).unwrap(), vec![2, 2, 0]);
        assert!(g.degrees_of(&[9]).is_err());
    }
}
