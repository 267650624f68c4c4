use std::collections::HashSet;

use super::{BipartiteMultigraph, EdgeId, VertexId};
use crate::error::{Error, Result};

/// An edge subset claimed to be a `k`-factor.
///
/// `unresolved` lists non-boundary vertices a windowed construction could not
/// settle; they are exempt from the degree check alongside boundary vertices.
/// On a finite boundary-free graph it is always empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactorSubgraph<'g> {
    graph: &'g BipartiteMultigraph,
    edges: Vec<usize>,
    k: usize,
    unresolved: Vec<VertexId>,
}

impl<'g> FactorSubgraph<'g> {
    pub fn new(graph: &'g BipartiteMultigraph, mut positions: Vec<usize>, k: usize) -> Self {
        positions.sort_unstable();
        positions.dedup();
        Self {
            graph,
            edges: positions,
            k,
            unresolved: Vec::new(),
        }
    }

    pub fn from_ids(
        graph: &'g BipartiteMultigraph,
        ids: impl IntoIterator<Item = EdgeId>,
        k: usize,
    ) -> Result<Self> {
        let positions = ids
            .into_iter()
            .map(|id| {
                graph
                    .position_of(id)
                    .ok_or_else(|| Error::Argument(format!("edge {id} is not in the graph")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(graph, positions, k))
    }

    pub fn empty(graph: &'g BipartiteMultigraph) -> Self {
        Self::new(graph, Vec::new(), 0)
    }

    pub fn all(graph: &'g BipartiteMultigraph, k: usize) -> Self {
        Self::new(graph, (0..graph.edge_count()).collect(), k)
    }

    pub fn with_unresolved(mut self, mut unresolved: Vec<VertexId>) -> Self {
        unresolved.sort_unstable();
        unresolved.dedup();
        self.unresolved = unresolved;
        self
    }

    pub fn graph(&self) -> &'g BipartiteMultigraph {
        self.graph
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Edge positions, sorted.
    pub fn positions(&self) -> &[usize] {
        &self.edges
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|&p| self.graph.edge(p).id).collect()
    }

    pub fn unresolved(&self) -> &[VertexId] {
        &self.unresolved
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.graph.vertex_count()];
        for &p in &self.edges {
            let e = self.graph.edge(p);
            deg[e.left] += 1;
            deg[e.right] += 1;
        }
        deg
    }

    /// Every non-boundary, non-unresolved vertex meets exactly `k` edges.
    pub fn verify(&self) -> bool {
        let deg = self.degrees();
        let exempt: HashSet<_> = self.unresolved.iter().copied().collect();
        self.graph
            .interior()
            .filter(|v| !exempt.contains(v))
            .all(|v| deg[v] == self.k)
    }
}

/// `G \ H`, preserving edge ids. `H` is matched into `G` by edge id and must
/// agree on endpoints; `H` must verify as a factor of its own graph.
pub fn subtract_factor(
    g: &BipartiteMultigraph,
    h: &FactorSubgraph<'_>,
) -> Result<BipartiteMultigraph> {
    if !h.verify() {
        return Err(Error::Argument(format!(
            "subgraph is not {}-regular on its interior",
            h.k()
        )));
    }
    let mut removed = HashSet::new();
    for &p in h.positions() {
        let e = h.graph().edge(p);
        let pos = g
            .position_of(e.id)
            .filter(|&q| {
                let f = g.edge(q);
                f.left == e.left && f.right == e.right
            })
            .ok_or_else(|| Error::Argument(format!("edge {} is not an edge of G", e.id)))?;
        removed.insert(pos);
    }
    Ok(g.without_positions(&removed))
}
