use num_rational::Ratio;

use super::{is_acyclic, BipartiteMultigraph, EdgeId, VertexId};
use crate::error::{Error, Result};

/// Edge weights `numerator / denominator` with a target vertex sum `k`.
///
/// All weights share one denominator, so every comparison and sum is exact
/// integer arithmetic on numerators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FractionalMatching<'g> {
    graph: &'g BipartiteMultigraph,
    denominator: u64,
    weights: Vec<u64>,
    target: u64,
}

impl<'g> FractionalMatching<'g> {
    /// Weights indexed by edge position. Every numerator must lie in
    /// `0..=denominator`; vertex sums are not checked here.
    pub fn new(
        graph: &'g BipartiteMultigraph,
        denominator: u64,
        weights: Vec<u64>,
        target: u64,
    ) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Argument("denominator must be positive".into()));
        }
        if weights.len() != graph.edge_count() {
            return Err(Error::Argument(format!(
                "{} weights for {} edges",
                weights.len(),
                graph.edge_count()
            )));
        }
        if let Some(pos) = weights.iter().position(|&w| w > denominator) {
            return Err(Error::Argument(format!(
                "edge {} has weight {}/{} > 1",
                graph.edge(pos).id,
                weights[pos],
                denominator
            )));
        }
        Ok(Self {
            graph,
            denominator,
            weights,
            target,
        })
    }

    /// The constant function `numerator / denominator` on every edge.
    pub fn uniform(
        graph: &'g BipartiteMultigraph,
        numerator: u64,
        denominator: u64,
        target: u64,
    ) -> Result<Self> {
        Self::new(
            graph,
            denominator,
            vec![numerator; graph.edge_count()],
            target,
        )
    }

    /// 0/1 indicator of the edges at `positions`, target `k`.
    pub fn indicator(
        graph: &'g BipartiteMultigraph,
        positions: impl IntoIterator<Item = usize>,
        k: u64,
    ) -> Self {
        let mut weights = vec![0; graph.edge_count()];
        for p in positions {
            weights[p] = 1;
        }
        Self {
            graph,
            denominator: 1,
            weights,
            target: k,
        }
    }

    pub fn graph(&self) -> &'g BipartiteMultigraph {
        self.graph
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn numerators(&self) -> &[u64] {
        &self.weights
    }

    pub fn numerator(&self, pos: usize) -> u64 {
        self.weights[pos]
    }

    pub fn weight(&self, pos: usize) -> Ratio<u64> {
        Ratio::new(self.weights[pos], self.denominator)
    }

    pub fn weight_by_id(&self, id: EdgeId) -> Option<Ratio<u64>> {
        self.graph.position_of(id).map(|p| self.weight(p))
    }

    pub(crate) fn set_numerator(&mut self, pos: usize, value: u64) {
        debug_assert!(value <= self.denominator);
        self.weights[pos] = value;
    }

    /// Sum of incident numerators at `v` (over the shared denominator).
    pub fn vertex_sum(&self, v: VertexId) -> u64 {
        self.graph
            .incident(v)
            .iter()
            .map(|&p| self.weights[p])
            .sum()
    }

    pub fn is_fractional(&self, pos: usize) -> bool {
        self.weights[pos] > 0 && self.weights[pos] < self.denominator
    }

    pub fn is_integral(&self) -> bool {
        self.weights
            .iter()
            .all(|&w| w == 0 || w == self.denominator)
    }

    /// `is_fractional_k_matching`: every weight in [0, 1] and every
    /// non-boundary vertex sums to exactly `target`.
    pub fn is_valid(&self) -> bool {
        self.weights.iter().all(|&w| w <= self.denominator)
            && self
                .graph
                .interior()
                .all(|v| self.vertex_sum(v) == self.target * self.denominator)
    }

    /// Edge positions whose weight is exactly 1.
    pub fn ones(&self) -> Vec<usize> {
        (0..self.weights.len())
            .filter(|&p| self.weights[p] == self.denominator)
            .collect()
    }

    /// Re-expresses the weights over `denominator`. Fails unless every weight
    /// is exactly representable on the new grid.
    pub fn regrid(&self, denominator: u64) -> Result<Self> {
        if denominator == 0 {
            return Err(Error::Argument("denominator must be positive".into()));
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(pos, &w)| {
                let scaled = w as u128 * denominator as u128;
                if scaled % self.denominator as u128 != 0 {
                    Err(Error::Argument(format!(
                        "weight {w}/{} of edge {} is not on the 1/{denominator} grid",
                        self.denominator,
                        self.graph.edge(pos).id
                    )))
                } else {
                    Ok((scaled / self.denominator as u128) as u64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            graph: self.graph,
            denominator,
            weights,
            target: self.target,
        })
    }

    /// Same weights transported onto another graph with identical edge
    /// positions (used by subgraph and split constructions).
    pub(crate) fn transport<'h>(&self, graph: &'h BipartiteMultigraph) -> FractionalMatching<'h> {
        assert_eq!(graph.edge_count(), self.graph.edge_count());
        FractionalMatching {
            graph,
            denominator: self.denominator,
            weights: self.weights.clone(),
            target: self.target,
        }
    }

    /// `support`: edges with weight strictly between 0 and 1.
    ///
    /// Fails if a non-boundary vertex has exactly one such edge, which is
    /// impossible for a valid fractional matching.
    pub fn support(&self) -> Result<SupportSubgraph<'g>> {
        let s = SupportSubgraph::of(self);
        if let Some(v) = self.graph.interior().find(|&v| s.degree(v) == 1) {
            return Err(Error::InvariantViolation(format!(
                "vertex {v} has support degree 1; weights are not a fractional matching"
            )));
        }
        Ok(s)
    }
}

/// The edges of a fractional matching whose weight is not 0 or 1.
#[derive(Clone, Debug)]
pub struct SupportSubgraph<'g> {
    graph: &'g BipartiteMultigraph,
    edges: Vec<usize>,
    member: Vec<bool>,
    degree: Vec<usize>,
}

impl<'g> SupportSubgraph<'g> {
    /// Support without the degree-1 check.
    pub fn of(f: &FractionalMatching<'g>) -> Self {
        let g = f.graph;
        let mut member = vec![false; g.edge_count()];
        let mut degree = vec![0; g.vertex_count()];
        let mut edges = Vec::new();
        for pos in 0..g.edge_count() {
            if f.is_fractional(pos) {
                member[pos] = true;
                edges.push(pos);
                let e = g.edge(pos);
                degree[e.left] += 1;
                degree[e.right] += 1;
            }
        }
        Self {
            graph: g,
            edges,
            member,
            degree,
        }
    }

    pub fn graph(&self) -> &'g BipartiteMultigraph {
        self.graph
    }

    /// Edge positions in increasing id order.
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges.iter().map(|&p| self.graph.edge(p).id).collect()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, pos: usize) -> bool {
        self.member[pos]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.degree[v]
    }

    pub fn is_subset_of(&self, other: &SupportSubgraph<'_>) -> bool {
        self.edges.iter().all(|&p| other.contains(p))
    }

    pub fn is_acyclic(&self) -> bool {
        is_acyclic(self.graph, self.edges.iter().copied())
    }

    /// Acyclicity of the support edges whose endpoints are both non-boundary.
    pub fn is_interior_acyclic(&self) -> bool {
        let g = self.graph;
        is_acyclic(
            g,
            self.edges.iter().copied().filter(|&p| {
                let e = g.edge(p);
                !g.is_boundary(e.left) && !g.is_boundary(e.right)
            }),
        )
    }
}
