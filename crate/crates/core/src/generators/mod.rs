//! Test instances: random regular bipartite multigraphs, shift-oracle graphs
//! on `Z^m` with finite windows and torus quotients, boundaried forests, and
//! general even-degree multigraphs.

mod forest;
mod general;

pub use forest::{gen_boundaried_forest, BoundariedForest, ForestSpec, RayDescriptor};
pub use general::{gen_random_even_graph, gen_random_regular_multigraph};

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, EdgeId, Side};

/// Union of `d` independent uniform perfect matchings between `n` left
/// vertices (`0..n`) and `n` right vertices (`n..2n`).
pub fn gen_random_regular_bipartite(n: usize, d: usize, seed: u64) -> BipartiteMultigraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::with_capacity(n * d);
    for _ in 0..d {
        perm.shuffle(&mut rng);
        pairs.extend(perm.iter().enumerate().map(|(l, &r)| (l, n + r)));
    }
    BipartiteMultigraph::from_pairs(n, n, pairs).expect("left-right pairs are valid")
}

/// How window and torus vertices and edges receive their dense ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Labeling {
    /// Lattice order: points lexicographically, left before right; edges by
    /// left point then shift index.
    Lexicographic,
    /// Ids ranked by a seeded hash of absolute lattice coordinates. Windows of
    /// the same oracle agree on the relative order of shared vertices and
    /// edges, like a fixed global labelling of the infinite graph.
    Hashed(u64),
}

/// The infinite bipartite graph on `Z^m x {L, R}` with `(p, L) ~ (p + s_i, R)`
/// for every shift `s_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleGraph {
    dim: usize,
    shifts: Vec<Vec<i64>>,
    labeling: Labeling,
}

pub fn gen_oracle(m: usize, shifts: Vec<Vec<i64>>) -> Result<OracleGraph> {
    if shifts.is_empty() {
        return Err(Error::Argument("an oracle needs at least one shift".into()));
    }
    if let Some(s) = shifts.iter().find(|s| s.len() != m) {
        return Err(Error::Argument(format!(
            "shift {s:?} does not have dimension {m}"
        )));
    }
    Ok(OracleGraph {
        dim: m,
        shifts,
        labeling: Labeling::Lexicographic,
    })
}

impl OracleGraph {
    /// Shifts `[0, 1]` on `Z`: every component is a bi-infinite path.
    pub fn line() -> Self {
        gen_oracle(1, vec![vec![0], vec![1]]).expect("valid")
    }

    /// Shifts `[0, 1, 1]` on `Z`: the line with its `+1` edges doubled.
    pub fn doubled_line() -> Self {
        gen_oracle(1, vec![vec![0], vec![1], vec![1]]).expect("valid")
    }

    /// Shifts `(0,0), (1,0), (0,1)` on `Z^2` (a hexagonal lattice).
    pub fn planar3() -> Self {
        gen_oracle(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]]).expect("valid")
    }

    /// Shifts `(0,0), (1,0), (0,1), (1,1)` on `Z^2`.
    pub fn planar4() -> Self {
        gen_oracle(2, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]).expect("valid")
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Self {
        self.labeling = labeling;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.shifts.len()
    }

    pub fn shifts(&self) -> &[Vec<i64>] {
        &self.shifts
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    /// Short description used as a window provenance id.
    pub fn id(&self) -> String {
        let shifts: Vec<String> = self
            .shifts
            .iter()
            .map(|s| {
                let parts: Vec<String> = s.iter().map(i64::to_string).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        format!("Z{}[{}]", self.dim, shifts.join(""))
    }

    fn shifted(&self, p: &[i64], i: usize, sign: i64) -> Vec<i64> {
        p.iter()
            .zip(&self.shifts[i])
            .map(|(a, s)| a + sign * s)
            .collect()
    }

    /// Induced subgraph on the box `|p_j - center_j| <= radius`, both sides.
    /// A vertex is boundary iff one of its infinite-graph neighbours lies
    /// outside the box.
    pub fn window(&self, center: &[i64], radius: u64) -> Result<Window> {
        if center.len() != self.dim {
            return Err(Error::Argument(format!(
                "center {center:?} does not have dimension {}",
                self.dim
            )));
        }
        let r = radius as i64;
        let lo: Vec<i64> = center.iter().map(|c| c - r).collect();
        let extent = vec![2 * r + 1; self.dim];
        let inside = |p: &[i64]| {
            p.iter()
                .zip(&lo)
                .zip(&extent)
                .all(|((x, l), n)| *x >= *l && *x < l + n)
        };
        let (vertices, edges) = self.lattice_graph(&lo, &extent, |p| inside(p).then(|| p.to_vec()));
        let boundary = vertices
            .iter()
            .map(|v| {
                let sign = match v.side {
                    Side::Left => 1,
                    Side::Right => -1,
                };
                (0..self.degree()).any(|i| !inside(&self.shifted(&v.point, i, sign)))
            })
            .collect();
        let (graph, vertices, edge_labels) = self.assemble(&vertices, &edges, boundary);
        Ok(Window {
            graph,
            vertices,
            edge_labels,
            provenance: Provenance {
                oracle: self.id(),
                center: center.to_vec(),
                radius,
            },
        })
    }

    /// Finite quotient by `(period Z)^m`: no boundary, every vertex of degree
    /// `|shifts|` (parallel edges when shifts coincide modulo the period).
    pub fn torus(&self, period: u64) -> Result<BipartiteMultigraph> {
        if period == 0 {
            return Err(Error::Argument("torus period must be positive".into()));
        }
        let n = period as i64;
        let lo = vec![0; self.dim];
        let extent = vec![n; self.dim];
        let (vertices, edges) = self.lattice_graph(&lo, &extent, |p| {
            Some(p.iter().map(|x| x.rem_euclid(n)).collect())
        });
        Ok(self
            .assemble(&vertices, &edges, vec![false; vertices.len()])
            .0)
    }

    /// Enumerates the box `lo + [0, extent)`; `target` maps a shifted point
    /// back into the box (or drops it). Returns vertices in lattice order and
    /// edges as (left point, left index, shift index, right index).
    #[allow(clippy::type_complexity)]
    fn lattice_graph(
        &self,
        lo: &[i64],
        extent: &[i64],
        target: impl Fn(&[i64]) -> Option<Vec<i64>>,
    ) -> (Vec<LatticeVertex>, Vec<(Vec<i64>, usize, usize, usize)>) {
        let count: i64 = extent.iter().product();
        let index_of = |p: &[i64]| -> usize {
            p.iter()
                .zip(lo)
                .zip(extent)
                .fold(0i64, |acc, ((x, l), n)| acc * n + (x - l)) as usize
        };
        let mut points = Vec::with_capacity(count as usize);
        for mut idx in 0..count {
            let mut p = vec![0; self.dim];
            for j in (0..self.dim).rev() {
                p[j] = lo[j] + idx % extent[j];
                idx /= extent[j];
            }
            points.push(p);
        }
        let mut vertices = Vec::with_capacity(2 * points.len());
        for p in &points {
            for side in [Side::Left, Side::Right] {
                vertices.push(LatticeVertex {
                    point: p.clone(),
                    side,
                });
            }
        }
        let mut edges = Vec::new();
        for (pi, p) in points.iter().enumerate() {
            for i in 0..self.degree() {
                if let Some(q) = target(&self.shifted(p, i, 1)) {
                    edges.push((p.clone(), 2 * pi, i, 2 * index_of(&q) + 1));
                }
            }
        }
        (vertices, edges)
    }

    fn assemble(
        &self,
        vertices: &[LatticeVertex],
        edges: &[(Vec<i64>, usize, usize, usize)],
        boundary: Vec<bool>,
    ) -> (BipartiteMultigraph, Vec<LatticeVertex>, Vec<EdgeLabel>) {
        let (vertex_rank, edge_rank) = match self.labeling {
            Labeling::Lexicographic => (
                (0..vertices.len()).collect::<Vec<_>>(),
                (0..edges.len()).collect::<Vec<_>>(),
            ),
            Labeling::Hashed(seed) => {
                let vkeys: Vec<u64> = vertices
                    .iter()
                    .map(|v| label_hash(seed, &v.point, v.side as u64))
                    .collect();
                let ekeys: Vec<u64> = edges
                    .iter()
                    .map(|(p, _, i, _)| label_hash(seed ^ 0x005e_ed0f_ed6e, p, *i as u64))
                    .collect();
                (
                    ranks(&vkeys, |a, b| vertices[a].cmp(&vertices[b])),
                    ranks(&ekeys, |a, b| {
                        (&edges[a].0, edges[a].2).cmp(&(&edges[b].0, edges[b].2))
                    }),
                )
            }
        };
        let mut sides = vec![Side::Left; vertices.len()];
        let mut flags = vec![false; vertices.len()];
        let mut by_id = vertices.to_vec();
        for (v, lv) in vertices.iter().enumerate() {
            sides[vertex_rank[v]] = lv.side;
            flags[vertex_rank[v]] = boundary[v];
            by_id[vertex_rank[v]] = lv.clone();
        }
        let mut labels = vec![
            EdgeLabel {
                left: Vec::new(),
                shift: 0
            };
            edges.len()
        ];
        for (e, (p, _, i, _)) in edges.iter().enumerate() {
            labels[edge_rank[e]] = EdgeLabel {
                left: p.clone(),
                shift: *i,
            };
        }
        let graph = BipartiteMultigraph::new(
            sides,
            flags,
            edges.iter().enumerate().map(|(e, (_, l, _, r))| {
                (edge_rank[e] as EdgeId, vertex_rank[*l], vertex_rank[*r])
            }),
        )
        .expect("lattice graphs are bipartite");
        (graph, by_id, labels)
    }
}

/// Rank of each key (ties broken by `tie`), giving a dense relabelling.
fn ranks(keys: &[u64], tie: impl Fn(usize, usize) -> Ordering) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then_with(|| tie(a, b)));
    let mut rank = vec![0; keys.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

// splitmix64 finaliser
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn label_hash(seed: u64, point: &[i64], tag: u64) -> u64 {
    let mut h = mix(seed);
    for &x in point {
        h = mix(h ^ x as u64);
    }
    mix(h ^ tag)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeVertex {
    pub point: Vec<i64>,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub oracle: String,
    pub center: Vec<i64>,
    pub radius: u64,
}

/// A finite box of an oracle graph. `vertices[v]` and `edge_labels[pos]` give
/// the lattice coordinates behind each dense vertex id and edge position.
#[derive(Clone, Debug)]
pub struct Window {
    pub graph: BipartiteMultigraph,
    pub vertices: Vec<LatticeVertex>,
    pub edge_labels: Vec<EdgeLabel>,
    pub provenance: Provenance,
}

/// An oracle edge: its left lattice point and the index of its shift.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub left: Vec<i64>,
    pub shift: usize,
}

impl Window {
    pub fn interior_count(&self) -> usize {
        self.graph.interior().count()
    }

    pub fn boundary_count(&self) -> usize {
        self.graph.vertex_count() - self.interior_count()
    }
}
