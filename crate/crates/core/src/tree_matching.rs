//! Perfect matchings of acyclic supports.
//!
//! Degree-2 rays running into stubs ("bad rays") are cut back to their first
//! vertex, the remaining forest is matched by a leaf-to-root dynamic program
//! in which stubs and cut points are optional, and the cut rays are then
//! matched by parity.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{BoundariedForest, RayDescriptor};
use crate::graph::{BipartiteMultigraph, EdgeId, FractionalMatching, VertexId};

/// The support of a fractional matching as a [`BoundariedForest`].
///
/// Non-boundary vertices with a support edge keep their relative order; each
/// support edge to a boundary vertex gets its own stub leaf. Support edges
/// between two boundary vertices are dropped. Edge ids are preserved.
#[derive(Clone, Debug)]
pub struct SupportForest {
    forest: BoundariedForest,
    vertex_origin: Vec<VertexId>,
    edge_origin: Vec<usize>,
    numerators: Vec<u64>,
    denominator: u64,
}

impl SupportForest {
    /// Fails if the support among non-boundary vertices has a cycle.
    pub fn extract(f: &FractionalMatching<'_>) -> Result<Self> {
        Self::build(f, 0..f.graph().edge_count())
    }

    /// As [`SupportForest::extract`] but without path components.
    pub fn extract_trees(f: &FractionalMatching<'_>) -> Result<Self> {
        let all = Self::extract(f)?;
        let keep: Vec<usize> = all
            .components()
            .into_iter()
            .filter(|c| !all.is_path_component(c))
            .flat_map(|c| all.component_edges(&c))
            .map(|fp| all.edge_origin[fp])
            .collect();
        let mut keep = keep;
        keep.sort_unstable();
        Self::build(f, keep.into_iter())
    }

    fn build(f: &FractionalMatching<'_>, positions: impl Iterator<Item = usize>) -> Result<Self> {
        let g = f.graph();
        let chosen: Vec<usize> = positions
            .filter(|&p| {
                let e = g.edge(p);
                f.is_fractional(p) && !(g.is_boundary(e.left) && g.is_boundary(e.right))
            })
            .collect();
        let mut index = vec![usize::MAX; g.vertex_count()];
        for &p in &chosen {
            let e = g.edge(p);
            for v in [e.left, e.right] {
                if !g.is_boundary(v) {
                    index[v] = 0;
                }
            }
        }
        let mut vertex_origin = Vec::new();
        let mut sides = Vec::new();
        for v in 0..g.vertex_count() {
            if index[v] == 0 {
                index[v] = vertex_origin.len();
                vertex_origin.push(v);
                sides.push(g.side(v));
            }
        }
        let mut stubs = vec![false; sides.len()];
        let mut edges = Vec::with_capacity(chosen.len());
        for &p in &chosen {
            let e = g.edge(p);
            let mut ends = [e.left, e.right].map(|v| {
                if g.is_boundary(v) {
                    usize::MAX
                } else {
                    index[v]
                }
            });
            for (slot, v) in ends.iter_mut().zip([e.left, e.right]) {
                if *slot == usize::MAX {
                    *slot = vertex_origin.len();
                    vertex_origin.push(v);
                    sides.push(g.side(v));
                    stubs.push(true);
                }
            }
            edges.push((e.id, ends[0], ends[1]));
        }
        let n = sides.len();
        let graph = BipartiteMultigraph::new(sides, vec![false; n], edges)?;
        let forest = BoundariedForest::new(graph, stubs, Vec::new()).map_err(|_| {
            Error::InvariantViolation("support has a cycle through non-boundary vertices".into())
        })?;
        Ok(Self {
            forest,
            vertex_origin,
            numerators: chosen.iter().map(|&p| f.numerator(p)).collect(),
            edge_origin: chosen,
            denominator: f.denominator(),
        })
    }

    pub fn forest(&self) -> &BoundariedForest {
        &self.forest
    }

    pub fn graph(&self) -> &BipartiteMultigraph {
        self.forest.graph()
    }

    /// Original vertex of a forest vertex; a stub maps to its boundary vertex.
    pub fn vertex_origin(&self, v: VertexId) -> VertexId {
        self.vertex_origin[v]
    }

    /// Original edge position of a forest edge position.
    pub fn edge_origin(&self, p: usize) -> usize {
        self.edge_origin[p]
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// The restricted weights as a matching on the forest graph.
    pub fn matching(&self) -> FractionalMatching<'_> {
        FractionalMatching::new(
            self.forest.graph(),
            self.denominator,
            self.numerators.clone(),
            1,
        )
        .expect("weights come from a valid matching")
    }

    /// Forest vertex lists, one per component.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let g = self.graph();
        g.components_of(&(0..g.edge_count()).collect::<Vec<_>>())
    }

    /// Every non-stub vertex of the component has degree 2.
    pub fn is_path_component(&self, comp: &[VertexId]) -> bool {
        let g = self.graph();
        comp.iter()
            .all(|&v| self.forest.is_stub(v) || g.degree(v) == 2)
    }

    /// Forest edge positions inside a component.
    pub fn component_edges(&self, comp: &[VertexId]) -> Vec<usize> {
        let g = self.graph();
        let mut out: Vec<usize> = comp
            .iter()
            .flat_map(|&v| g.incident(v).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A degree-2 ray `x_0, x_1, …, x_j` ending at a stub, with `x_0` of degree
/// at least 3, plus the longer ray `z_0, …, z_N = x_j` on which its weight
/// profile is read.
///
/// The profile ray extends past `x_0` (smallest edge id first) as long as the
/// vertices at even positions `z_2, z_4, …` keep degree 2.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadRayReport {
    pub ray: Vec<VertexId>,
    /// `ray_edges[n]` joins `x_n` and `x_{n+1}`.
    pub ray_edges: Vec<EdgeId>,
    pub stub: VertexId,
    pub stub_edge: EdgeId,
    pub profile: Vec<VertexId>,
    /// `profile_edges[i]` joins `z_i` and `z_{i+1}`.
    pub profile_edges: Vec<EdgeId>,
    /// Forest degree of every profile vertex.
    pub degrees: Vec<usize>,
}

fn next_edge(g: &BipartiteMultigraph, v: VertexId, via: usize) -> Option<usize> {
    g.incident(v)
        .iter()
        .copied()
        .find(|&q| q != via && !g.is_boundary(g.edge(q).other(v)))
}

/// `find_bad_ray_reps`: one report per stub whose inward walk through
/// non-boundary degree-2 vertices ends at a vertex of degree at least 3.
///
/// Stubs whose ray descriptor is not a plain degree-2 continuation are
/// skipped, as are walks ending at another stub (path components) or at a
/// leaf.
pub fn find_bad_ray_reps(forest: &BoundariedForest) -> Vec<BadRayReport> {
    let g = forest.graph();
    let mut reports = Vec::new();
    for s in forest.stubs() {
        if forest
            .ray_of(s)
            .is_some_and(|r| r.period.iter().any(|&p| p != 2))
        {
            continue;
        }
        let Some(&first) = g.incident(s).first() else {
            continue;
        };
        // walked edges and vertices, stub side first
        let mut edges = vec![first];
        let mut tail = Vec::new();
        let mut cur = g.edge(first).other(s);
        while !g.is_boundary(cur) && g.degree(cur) == 2 {
            tail.push(cur);
            let via = *edges.last().unwrap();
            let q = g.incident(cur).iter().copied().find(|&q| q != via).unwrap();
            edges.push(q);
            cur = g.edge(q).other(cur);
        }
        if tail.is_empty() || g.is_boundary(cur) || g.degree(cur) < 3 {
            continue;
        }
        let x0 = cur;
        let mut walk = tail.clone();
        walk.push(x0);
        let mut walk_edges = edges[1..].to_vec();
        if let Some(q) = next_edge(g, x0, *walk_edges.last().unwrap()) {
            walk_edges.push(q);
            walk.push(g.edge(q).other(x0));
            loop {
                let c = *walk.last().unwrap();
                let via = *walk_edges.last().unwrap();
                if g.degree(c) != 2 {
                    break;
                }
                let Some(q1) = next_edge(g, c, via) else {
                    break;
                };
                let a = g.edge(q1).other(c);
                let Some(q2) = next_edge(g, a, q1) else { break };
                walk_edges.extend([q1, q2]);
                walk.extend([a, g.edge(q2).other(a)]);
            }
        }
        let mut ray = vec![x0];
        ray.extend(tail.iter().rev());
        let id = |p: usize| g.edge(p).id;
        walk.reverse();
        walk_edges.reverse();
        reports.push(BadRayReport {
            ray_edges: edges[1..].iter().rev().map(|&p| id(p)).collect(),
            ray,
            stub: s,
            stub_edge: id(first),
            degrees: walk.iter().map(|&v| g.degree(v)).collect(),
            profile: walk,
            profile_edges: walk_edges.into_iter().map(id).collect(),
        });
    }
    reports
}

/// Numerators `w(n) = f(z_{2n}, z_{2n+1})` along the profile ray, or `None`
/// if the report does not describe a path in `f`'s graph.
pub fn weight_profile(f: &FractionalMatching<'_>, report: &BadRayReport) -> Option<Vec<u64>> {
    let g = f.graph();
    let z = &report.profile;
    if z.is_empty() || report.profile_edges.len() + 1 != z.len() {
        return None;
    }
    let mut w = Vec::new();
    for (i, &id) in report.profile_edges.iter().enumerate() {
        let p = g.position_of(id)?;
        let e = g.edge(p);
        if !(e.touches(z[i]) && e.other(z[i]) == z[i + 1]) {
            return None;
        }
        if i % 2 == 0 {
            w.push(f.numerator(p));
        }
    }
    Some(w)
}

/// Number of strict increases in a weight profile.
pub fn strict_increases(w: &[u64]) -> usize {
    w.windows(2).filter(|p| p[1] > p[0]).count()
}

/// `weight_profile_check`: the profile ray lies in the support, its degree
/// pattern matches the report, and `w` stays constant across degree-2 odd
/// vertices and strictly increases across odd vertices of higher degree.
pub fn weight_profile_check(f: &FractionalMatching<'_>, report: &BadRayReport) -> bool {
    let g = f.graph();
    let support_degree = |v: VertexId| {
        g.incident(v)
            .iter()
            .filter(|&&p| f.is_fractional(p))
            .count()
    };
    let Some(w) = weight_profile(f, report) else {
        return false;
    };
    let z = &report.profile;
    if report.degrees.len() != z.len()
        || report.ray.is_empty()
        || z.iter().any(|&v| v >= g.vertex_count())
    {
        return false;
    }
    let path_in_support = report
        .profile_edges
        .iter()
        .all(|&id| g.position_of(id).is_some_and(|p| f.is_fractional(p)));
    let degrees_match = z
        .iter()
        .zip(&report.degrees)
        .enumerate()
        .all(|(i, (&v, &d))| support_degree(v) == d && (i == 0 || i % 2 == 1 || d == 2));
    let canonical = report.ray.iter().enumerate().all(|(n, &x)| {
        x < g.vertex_count()
            && (support_degree(x) >= 3) == (n == 0)
            && (n == 0 || support_degree(x) == 2)
    });
    if !(path_in_support && degrees_match && canonical) {
        return false;
    }
    w.windows(2)
        .enumerate()
        .all(|(n, pair)| match report.degrees[2 * n + 1] {
            2 => pair[1] == pair[0],
            d if d > 2 => pair[1] > pair[0],
            _ => false,
        })
}

/// The forest left after cutting every reported ray behind `x_1`.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub forest: BoundariedForest,
    /// The kept `x_1` of every cut ray, as vertices of `forest`.
    pub y: Vec<VertexId>,
    /// Vertex of the original forest for every vertex of `forest`.
    pub vertex_map: Vec<VertexId>,
}

/// `prune_bad_rays`: deletes `x_2, …, x_j` and the stub of every reported
/// ray. Distinct stubs give disjoint ray tails, so reports sharing `x_0`
/// never conflict.
pub fn prune_bad_rays(forest: &BoundariedForest, reps: &[BadRayReport]) -> Pruned {
    let g = forest.graph();
    let mut deleted = vec![false; g.vertex_count()];
    for r in reps {
        for &x in r.ray.iter().skip(2) {
            deleted[x] = true;
        }
        deleted[r.stub] = true;
    }
    let mut index = vec![usize::MAX; g.vertex_count()];
    let mut vertex_map = Vec::new();
    for v in (0..g.vertex_count()).filter(|&v| !deleted[v]) {
        index[v] = vertex_map.len();
        vertex_map.push(v);
    }
    let sides = vertex_map.iter().map(|&v| g.side(v)).collect();
    let boundary = vertex_map
        .iter()
        .map(|&v| g.is_boundary(v) && !forest.is_stub(v))
        .collect();
    let edges = g
        .edges()
        .iter()
        .filter(|e| !deleted[e.left] && !deleted[e.right])
        .map(|e| (e.id, index[e.left], index[e.right]));
    let pruned =
        BipartiteMultigraph::new(sides, boundary, edges).expect("subgraph of a valid graph");
    let stubs = vertex_map.iter().map(|&v| forest.is_stub(v)).collect();
    let rays = forest
        .rays()
        .iter()
        .filter(|r| !deleted[r.stub])
        .map(|r| RayDescriptor {
            stub: index[r.stub],
            period: r.period.clone(),
        })
        .collect();
    Pruned {
        forest: BoundariedForest::new(pruned, stubs, rays).expect("subforest of a forest"),
        y: reps.iter().map(|r| index[r.ray[1]]).collect(),
        vertex_map,
    }
}

/// Result of [`match_leafless_forest`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ForestMatch {
    pub edges: Vec<EdgeId>,
    /// Mandatory vertices of components where no covering matching exists.
    pub unresolved: Vec<VertexId>,
}

/// `match_leafless_forest`: a matching covering every vertex that is neither
/// a stub, a boundary vertex nor in `y`. Components are solved independently
/// by a leaf-to-root feasibility pass and a root-to-leaf choice; when a vertex
/// has several admissible children it takes the smallest edge id.
pub fn match_leafless_forest(h: &BoundariedForest, y: &[VertexId]) -> ForestMatch {
    let g = h.graph();
    let in_y: HashSet<_> = y.iter().copied().collect();
    let mandatory: Vec<bool> = (0..g.vertex_count())
        .map(|v| !g.is_boundary(v) && !in_y.contains(&v))
        .collect();
    let comps = g.components_of(&(0..g.edge_count()).collect::<Vec<_>>());
    let solved: Vec<_> = comps
        .par_iter()
        .map(|c| (c, match_component(g, c, &mandatory)))
        .collect();
    let mut out = ForestMatch::default();
    for (comp, res) in solved {
        match res {
            Some(ps) => out.edges.extend(ps.into_iter().map(|p| g.edge(p).id)),
            None => out
                .unresolved
                .extend(comp.iter().copied().filter(|&v| mandatory[v])),
        }
    }
    out.edges.sort_unstable();
    out.unresolved.sort_unstable();
    out
}

fn match_component(
    g: &BipartiteMultigraph,
    comp: &[VertexId],
    mandatory: &[bool],
) -> Option<Vec<usize>> {
    let root = *comp.iter().find(|&&v| mandatory[v])?;
    // breadth-first order with parent edges; children are the other edges
    let mut order = vec![root];
    let mut parent = std::collections::HashMap::new();
    parent.insert(root, usize::MAX);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &q in g.incident(v) {
            if q != parent[&v] {
                let c = g.edge(q).other(v);
                parent.insert(c, q);
                order.push(c);
            }
        }
    }
    let parent = &parent;
    let children = |v: VertexId| {
        g.incident(v)
            .iter()
            .copied()
            .filter(move |&q| q != parent[&v])
    };
    // open: every child is settled without v; down: child edge v matches into
    let mut open: std::collections::HashMap<VertexId, bool> = Default::default();
    let mut down: std::collections::HashMap<VertexId, Option<usize>> = Default::default();
    let mut settled: std::collections::HashMap<VertexId, bool> = Default::default();
    for &v in order.iter().rev() {
        let unsettled: Vec<usize> = children(v)
            .filter(|&q| !settled[&g.edge(q).other(v)])
            .collect();
        let choice = match unsettled.as_slice() {
            [] => children(v).find(|&q| open[&g.edge(q).other(v)]),
            [q] if open[&g.edge(*q).other(v)] => Some(*q),
            _ => None,
        };
        let is_open = unsettled.is_empty();
        open.insert(v, is_open);
        settled.insert(v, choice.is_some() || (!mandatory[v] && is_open));
        down.insert(v, choice);
    }
    if !settled[&root] {
        return None;
    }
    let mut matched = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((v, claimed)) = stack.pop() {
        let take = if claimed || (!mandatory[v] && open[&v]) {
            None
        } else {
            down[&v]
        };
        if let Some(q) = take {
            matched.push(q);
        }
        for q in children(v) {
            stack.push((g.edge(q).other(v), Some(q) == take));
        }
    }
    Some(matched)
}

/// `extend_along_rays`: matches each cut ray `x_1 … x_j` by the parity fixed
/// by whether `(x_0, x_1)` is already matched.
pub fn extend_along_rays(m: &[EdgeId], reps: &[BadRayReport]) -> Vec<EdgeId> {
    let have: HashSet<_> = m.iter().copied().collect();
    let mut out = m.to_vec();
    for r in reps {
        let start = if have.contains(&r.ray_edges[0]) { 2 } else { 1 };
        out.extend(r.ray_edges.iter().skip(start).step_by(2));
    }
    out.sort_unstable();
    out
}

/// A matching of a whole boundaried forest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ForestMatching {
    pub edges: Vec<EdgeId>,
    /// Vertices covered only through an edge to a stub.
    pub via_stub: Vec<VertexId>,
    /// Vertices left uncovered.
    pub uncovered: Vec<VertexId>,
    pub reports: Vec<BadRayReport>,
}

impl ForestMatching {
    /// Vertices not covered inside the forest proper.
    pub fn unresolved(&self) -> Vec<VertexId> {
        let mut v: Vec<_> = self
            .via_stub
            .iter()
            .chain(&self.uncovered)
            .copied()
            .collect();
        v.sort_unstable();
        v
    }
}

/// Find, prune, match and extend; then cover what is left through a free
/// stub where one is adjacent.
pub fn match_forest(forest: &BoundariedForest) -> ForestMatching {
    let g = forest.graph();
    let reports = find_bad_ray_reps(forest);
    let pruned = prune_bad_rays(forest, &reports);
    let m = match_leafless_forest(&pruned.forest, &pruned.y);
    let mut edges = extend_along_rays(&m.edges, &reports);
    let mut covered = vec![false; g.vertex_count()];
    for &id in &edges {
        let e = g.edge(g.position_of(id).expect("forest edge"));
        covered[e.left] = true;
        covered[e.right] = true;
    }
    let mut uncovered = Vec::new();
    for v in g.interior() {
        if covered[v] || g.degree(v) == 0 {
            continue;
        }
        let free = g.incident(v).iter().copied().find(|&q| {
            let w = g.edge(q).other(v);
            forest.is_stub(w) && !covered[w]
        });
        match free {
            Some(q) => {
                covered[v] = true;
                covered[g.edge(q).other(v)] = true;
                edges.push(g.edge(q).id);
            }
            None => uncovered.push(v),
        }
    }
    let mut via_stub: Vec<VertexId> = edges
        .iter()
        .filter_map(|&id| {
            let e = g.edge(g.position_of(id).expect("forest edge"));
            match (forest.is_stub(e.left), forest.is_stub(e.right)) {
                (false, true) => Some(e.left),
                (true, false) => Some(e.right),
                _ => None,
            }
        })
        .collect();
    via_stub.sort_unstable();
    edges.sort_unstable();
    ForestMatching {
        edges,
        via_stub,
        uncovered,
        reports,
    }
}
