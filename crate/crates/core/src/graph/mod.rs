//! Bipartite multigraphs with stable edge ids, exact fractional matchings
//! over a shared denominator, and factor subgraphs.
//!
//! Vertices are dense indices `0..n`. Edges carry a caller-visible [`EdgeId`]
//! and are stored sorted by it, so an edge's *position* (`usize`) orders the
//! same way as its id. Every smallest-id-first tie-break in the crate is a
//! smallest-position tie-break.

mod factor;
pub mod format;
mod general;
mod matching;

pub use factor::{subtract_factor, FactorSubgraph};
pub use general::UndirectedMultigraph;
pub use matching::{FractionalMatching, SupportSubgraph};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub left: VertexId,
    pub right: VertexId,
}

impl Edge {
    pub fn other(&self, v: VertexId) -> VertexId {
        if self.left == v {
            self.right
        } else {
            self.left
        }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.left == v || self.right == v
    }
}

/// Finite bipartite multigraph. Immutable after construction.
///
/// Vertices flagged `boundary` stand for window vertices whose neighbourhood
/// is only partially visible; degree and sum constraints are never imposed
/// on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    sides: Vec<Side>,
    boundary: Vec<bool>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
}

impl BipartiteMultigraph {
    /// Builds a graph from per-vertex sides and boundary flags plus edges
    /// given as `(id, u, v)` with endpoints in either order.
    pub fn new(
        sides: Vec<Side>,
        boundary: Vec<bool>,
        edges: impl IntoIterator<Item = (EdgeId, VertexId, VertexId)>,
    ) -> Result<Self> {
        if sides.len() != boundary.len() {
            return Err(Error::Structural(format!(
                "{} sides but {} boundary flags",
                sides.len(),
                boundary.len()
            )));
        }
        let n = sides.len();
        let mut list = Vec::new();
        for (id, u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Structural(format!(
                    "edge {id} has dangling endpoint ({u}, {v}) in a graph of {n} vertices"
                )));
            }
            let (left, right) = match (sides[u], sides[v]) {
                (Side::Left, Side::Right) => (u, v),
                (Side::Right, Side::Left) => (v, u),
                _ => {
                    return Err(Error::Structural(format!(
                        "edge {id} joins two vertices on the same side ({u}, {v})"
                    )))
                }
            };
            list.push(Edge { id, left, right });
        }
        list.sort_by_key(|e| e.id);
        if let Some(w) = list.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(Error::Structural(format!("duplicate edge id {}", w[0].id)));
        }
        let mut incidence = vec![Vec::new(); n];
        for (ix, e) in list.iter().enumerate() {
            incidence[e.left].push(ix);
            incidence[e.right].push(ix);
        }
        Ok(Self {
            sides,
            boundary,
            edges: list,
            incidence,
        })
    }

    /// Left vertices `0..n_left`, right vertices after them, edge ids
    /// assigned `0..` in the order given, no boundary.
    pub fn from_pairs(
        n_left: usize,
        n_right: usize,
        pairs: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut sides = vec![Side::Left; n_left];
        sides.extend(std::iter::repeat_n(Side::Right, n_right));
        let n = n_left + n_right;
        Self::new(
            sides,
            vec![false; n],
            pairs
                .into_iter()
                .enumerate()
                .map(|(i, (u, v))| (i as EdgeId, u, v)),
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.sides.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn side(&self, v: VertexId) -> Side {
        self.sides[v]
    }

    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary.iter().any(|&b| b)
    }

    pub fn interior(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).filter(|&v| !self.boundary[v])
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, pos: usize) -> &Edge {
        &self.edges[pos]
    }

    /// Edge positions incident to `v`, in increasing id order.
    pub fn incident(&self, v: VertexId) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.incidence[v].len()
    }

    pub fn position_of(&self, id: EdgeId) -> Option<usize> {
        self.edges.binary_search_by_key(&id, |e| e.id).ok()
    }

    pub fn max_edge_id(&self) -> Option<EdgeId> {
        self.edges.last().map(|e| e.id)
    }

    /// True iff every vertex, boundary or not, has degree exactly `d`.
    /// Bipartiteness holds by construction.
    pub fn is_regular(&self, d: usize) -> bool {
        self.incidence.iter().all(|inc| inc.len() == d)
    }

    /// True iff every non-boundary vertex has degree exactly `d`.
    pub fn is_interior_regular(&self, d: usize) -> bool {
        self.interior().all(|v| self.degree(v) == d)
    }

    /// Copy of the graph with `extra` vertices additionally flagged boundary.
    pub fn with_boundary(&self, extra: impl IntoIterator<Item = VertexId>) -> Self {
        let mut g = self.clone();
        for v in extra {
            g.boundary[v] = true;
        }
        g
    }

    /// Copy of the graph with the edges at the given positions removed.
    /// Edge ids of the survivors are preserved.
    pub fn without_positions(&self, removed: &HashSet<usize>) -> Self {
        let kept = self
            .edges
            .iter()
            .enumerate()
            .filter(|(pos, _)| !removed.contains(pos))
            .map(|(_, e)| (e.id, e.left, e.right));
        Self::new(self.sides.clone(), self.boundary.clone(), kept)
            .expect("a subgraph of a valid graph is valid")
    }

    /// Connected components over the given edge positions, as vertex lists.
    /// Vertices without any of the edges are skipped.
    pub fn components_of(&self, positions: &[usize]) -> Vec<Vec<VertexId>> {
        let mut uf = UnionFind::new(self.vertex_count());
        let mut touched = vec![false; self.vertex_count()];
        for &p in positions {
            let e = self.edges[p];
            uf.union(e.left, e.right);
            touched[e.left] = true;
            touched[e.right] = true;
        }
        let mut by_root: std::collections::BTreeMap<usize, Vec<VertexId>> = Default::default();
        for v in (0..self.vertex_count()).filter(|&v| touched[v]) {
            by_root.entry(uf.find(v)).or_default().push(v);
        }
        let mut comps: Vec<_> = by_root.into_values().collect();
        comps.sort_by_key(|c| c[0]);
        comps
    }
}

/// True iff the subgraph on `positions` of `g` contains no cycle (parallel
/// edges count as 2-cycles).
pub fn is_acyclic(g: &BipartiteMultigraph, positions: impl IntoIterator<Item = usize>) -> bool {
    let mut uf = UnionFind::new(g.vertex_count());
    positions.into_iter().all(|p| {
        let e = g.edge(p);
        uf.union(e.left, e.right)
    })
}

/// `validate_regular_bipartite`: every vertex has degree `d` and every edge
/// crosses sides (the latter holds for any constructed graph).
pub fn validate_regular_bipartite(g: &BipartiteMultigraph, d: usize) -> bool {
    g.is_regular(d)
        && g.edges()
            .iter()
            .all(|e| g.side(e.left) == Side::Left && g.side(e.right) == Side::Right)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}
