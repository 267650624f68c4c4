use serde::{Deserialize, Serialize};

use super::k_factor;
use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, EdgeId, Side, UndirectedMultigraph};

/// Direction of every edge, by position: `forward[p]` means the stored
/// `(u, v)` is traversed `u -> v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orientation {
    pub forward: Vec<bool>,
}

impl Orientation {
    /// `(tail, head)` of the edge at position `p`.
    pub fn arc(&self, g: &UndirectedMultigraph, p: usize) -> (usize, usize) {
        let (_, u, v) = g.edges()[p];
        if self.forward[p] {
            (u, v)
        } else {
            (v, u)
        }
    }

    /// `(in, out)` degree of every vertex.
    pub fn degrees(&self, g: &UndirectedMultigraph) -> Vec<(usize, usize)> {
        let mut deg = vec![(0, 0); g.vertex_count()];
        for p in 0..g.edge_count() {
            let (t, h) = self.arc(g, p);
            deg[t].1 += 1;
            deg[h].0 += 1;
        }
        deg
    }

    pub fn is_balanced(&self, g: &UndirectedMultigraph) -> bool {
        self.forward.len() == g.edge_count() && self.degrees(g).iter().all(|(i, o)| i == o)
    }
}

/// `balanced_orientation`: orients every edge along closed trails that
/// together form an Euler tour of each component.
///
/// Starting from each vertex in turn, unused edges are followed (smallest
/// position first) until the walk is stuck; with all degrees even it can
/// only get stuck where it started, so each walk is a closed trail.
pub fn balanced_orientation(g: &UndirectedMultigraph) -> Result<Orientation> {
    if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(Error::Argument(format!("vertex {v} has odd degree")));
    }
    let mut used = vec![false; g.edge_count()];
    let mut forward = vec![false; g.edge_count()];
    let mut next = vec![0usize; g.vertex_count()];
    for start in 0..g.vertex_count() {
        let mut v = start;
        loop {
            let inc = g.incident(v);
            while next[v] < inc.len() && used[inc[next[v]]] {
                next[v] += 1;
            }
            let Some(&p) = inc.get(next[v]) else { break };
            used[p] = true;
            let (_, a, b) = g.edges()[p];
            forward[p] = a == v;
            v = if a == v { b } else { a };
        }
        debug_assert_eq!(v, start);
    }
    Ok(Orientation { forward })
}

/// Bipartite graph with `v_1 = v` on the left, `v_2 = n + v` on the right and
/// one edge `{t_1, h_2}` (same id) per arc `t -> h`.
pub fn auxiliary_graph(g: &UndirectedMultigraph, o: &Orientation) -> BipartiteMultigraph {
    let n = g.vertex_count();
    let sides = (0..2 * n)
        .map(|i| if i < n { Side::Left } else { Side::Right })
        .collect();
    BipartiteMultigraph::new(
        sides,
        vec![false; 2 * n],
        (0..g.edge_count()).map(|p| {
            let (t, h) = o.arc(g, p);
            (g.edges()[p].0, t, n + h)
        }),
    )
    .expect("arcs join left copies to right copies")
}

/// Edge set of a regular spanning subgraph of a general graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorollaryFactor {
    pub degree: usize,
    pub edges: Vec<EdgeId>,
}

/// `corollary_factor`: a 2-factor of a `2k`-regular graph when `k` is odd, a
/// 4-factor when `k` is even, from a `k'`-factor of the auxiliary graph.
pub fn corollary_factor(g: &UndirectedMultigraph, o: &Orientation) -> Result<CorollaryFactor> {
    let degree = if g.vertex_count() == 0 {
        0
    } else {
        g.degree(0)
    };
    if degree == 0 || degree % 2 == 1 || !g.is_regular(degree) {
        return Err(Error::Argument(
            "graph must be regular of positive even degree".into(),
        ));
    }
    if !o.is_balanced(g) {
        return Err(Error::Argument("orientation is not balanced".into()));
    }
    let k = degree / 2;
    let k_aux = if k % 2 == 1 { 1 } else { 2 };
    let aux = auxiliary_graph(g, o);
    let h = k_factor(&aux, k, k_aux)?;
    let edges = h.edge_ids();
    let want = 2 * k_aux;
    if g.degrees_of(&edges)?.iter().any(|&x| x != want) {
        return Err(Error::InvariantViolation(format!(
            "pulled-back subgraph is not {want}-regular"
        )));
    }
    Ok(CorollaryFactor {
        degree: want,
        edges,
    })
}
