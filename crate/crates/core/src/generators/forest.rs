use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_acyclic, BipartiteMultigraph, Side, VertexId};

/// Degree pattern of the invisible continuation beyond a stub, repeated
/// forever. `[2]` is a plain degree-2 ray.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayDescriptor {
    pub stub: VertexId,
    pub period: Vec<usize>,
}

/// An acyclic bipartite graph whose stub leaves stand for infinite
/// continuations. Stubs are flagged boundary in the underlying graph.
#[derive(Clone, Debug)]
pub struct BoundariedForest {
    graph: BipartiteMultigraph,
    stubs: Vec<bool>,
    rays: Vec<RayDescriptor>,
}

impl BoundariedForest {
    /// Checks acyclicity and that every stub is a leaf.
    pub fn new(
        graph: BipartiteMultigraph,
        stubs: Vec<bool>,
        rays: Vec<RayDescriptor>,
    ) -> Result<Self> {
        if stubs.len() != graph.vertex_count() {
            return Err(Error::Argument("one stub flag per vertex required".into()));
        }
        if !is_acyclic(&graph, 0..graph.edge_count()) {
            return Err(Error::Argument("forest contains a cycle".into()));
        }
        if let Some(v) = (0..stubs.len()).find(|&v| stubs[v] && graph.degree(v) > 1) {
            return Err(Error::Argument(format!("stub {v} is not a leaf")));
        }
        if let Some(r) = rays
            .iter()
            .find(|r| r.stub >= stubs.len() || !stubs[r.stub])
        {
            return Err(Error::Argument(format!(
                "ray descriptor on non-stub {}",
                r.stub
            )));
        }
        let extra: Vec<_> = (0..stubs.len()).filter(|&v| stubs[v]).collect();
        let graph = graph.with_boundary(extra);
        Ok(Self { graph, stubs, rays })
    }

    pub fn graph(&self) -> &BipartiteMultigraph {
        &self.graph
    }

    pub fn is_stub(&self, v: VertexId) -> bool {
        self.stubs[v]
    }

    pub fn stubs(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.stubs.len()).filter(|&v| self.stubs[v])
    }

    pub fn stub_flags(&self) -> &[bool] {
        &self.stubs
    }

    pub fn rays(&self) -> &[RayDescriptor] {
        &self.rays
    }

    pub fn ray_of(&self, stub: VertexId) -> Option<&RayDescriptor> {
        self.rays.iter().find(|r| r.stub == stub)
    }

    /// Every vertex that is neither stub nor boundary nor in `exempt` has
    /// degree at least 2.
    pub fn is_leafless_except(&self, exempt: &[VertexId]) -> bool {
        self.graph
            .interior()
            .filter(|v| !exempt.contains(v))
            .all(|v| self.graph.degree(v) >= 2)
    }

    pub fn is_leafless(&self) -> bool {
        self.is_leafless_except(&[])
    }
}

/// Recipes for [`gen_boundaried_forest`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ForestSpec {
    /// A root with `legs` paths of `leg_length` vertices each; the last vertex
    /// of every leg is a stub.
    Spider { legs: usize, leg_length: usize },
    /// A path of `length` vertices whose two ends are stubs.
    Path { length: usize },
    /// A root of degree `root_degree`; one branch is a ray of `length`
    /// vertices ending in a stub, the others are single stubs.
    Ray { root_degree: usize, length: usize },
    /// A uniformly grown random tree on `vertices` non-stub vertices; every
    /// vertex left with degree below 2 gets stubs, and each vertex gets an
    /// extra stub with probability `extra_stub_percent / 100`.
    Random {
        vertices: usize,
        #[serde(default)]
        extra_stub_percent: u32,
    },
}

/// Builds a forest satisfying the [`BoundariedForest`] invariants: acyclic,
/// stubs are leaves, every other vertex has degree at least 2.
pub fn gen_boundaried_forest(spec: &ForestSpec, seed: u64) -> Result<BoundariedForest> {
    let mut b = TreeBuilder::default();
    match *spec {
        ForestSpec::Spider { legs, leg_length } => {
            if legs < 2 || leg_length == 0 {
                return Err(Error::Argument(
                    "a spider needs at least 2 legs of positive length".into(),
                ));
            }
            let root = b.vertex(Side::Left, false);
            for _ in 0..legs {
                b.chain(root, leg_length);
            }
        }
        ForestSpec::Path { length } => {
            if length < 3 {
                return Err(Error::Argument(
                    "a stubbed path needs at least 3 vertices".into(),
                ));
            }
            let first = b.vertex(Side::Left, true);
            b.chain(first, length - 1);
        }
        ForestSpec::Ray {
            root_degree,
            length,
        } => {
            if root_degree < 2 || length < 2 {
                return Err(Error::Argument(
                    "a ray needs root degree >= 2 and length >= 2".into(),
                ));
            }
            let root = b.vertex(Side::Left, false);
            b.chain(root, length);
            for _ in 1..root_degree {
                let s = b.vertex(Side::Right, true);
                b.edge(root, s);
            }
        }
        ForestSpec::Random {
            vertices,
            extra_stub_percent,
        } => {
            if vertices == 0 {
                return Err(Error::Argument("random forest needs vertices".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            b.vertex(Side::Left, false);
            for v in 1..vertices {
                let parent = rng.gen_range(0..v);
                let side = b.sides[parent].opposite();
                let child = b.vertex(side, false);
                b.edge(parent, child);
            }
            for v in 0..vertices {
                while b.degree(v) < 2 {
                    let s = b.vertex(b.sides[v].opposite(), true);
                    b.edge(v, s);
                }
                if rng.gen_range(0..100) < extra_stub_percent {
                    let s = b.vertex(b.sides[v].opposite(), true);
                    b.edge(v, s);
                }
            }
        }
    }
    let rays = b
        .stubs
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(v, _)| RayDescriptor {
            stub: v,
            period: vec![2],
        })
        .collect();
    b.finish(rays)
}

#[derive(Default)]
struct TreeBuilder {
    sides: Vec<Side>,
    stubs: Vec<bool>,
    edges: Vec<(VertexId, VertexId)>,
}

impl TreeBuilder {
    fn vertex(&mut self, side: Side, stub: bool) -> VertexId {
        self.sides.push(side);
        self.stubs.push(stub);
        self.sides.len() - 1
    }

    fn edge(&mut self, u: VertexId, v: VertexId) {
        self.edges.push((u, v));
    }

    fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .filter(|(a, b)| *a == v || *b == v)
            .count()
    }

    /// Appends `len` vertices after `from`; the last one is a stub.
    fn chain(&mut self, from: VertexId, len: usize) {
        let mut prev = from;
        for i in 0..len {
            let v = self.vertex(self.sides[prev].opposite(), i + 1 == len);
            self.edge(prev, v);
            prev = v;
        }
    }

    fn finish(self, rays: Vec<RayDescriptor>) -> Result<BoundariedForest> {
        let n = self.sides.len();
        let g = BipartiteMultigraph::new(
            self.sides,
            vec![false; n],
            self.edges
                .into_iter()
                .enumerate()
                .map(|(i, (u, v))| (i as u64, u, v)),
        )?;
        BoundariedForest::new(g, self.stubs, rays)
    }
}
