//! Top-level constructions: half-integral perfect matchings, the
//! vertex-splitting reduction from 2-factors to perfect matchings, the
//! k-factor recursion, and factors of even-degree graphs via balanced
//! orientations.

mod corollary;

pub use corollary::{
    auxiliary_graph, balanced_orientation, corollary_factor, CorollaryFactor, Orientation,
};

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, EdgeId, FactorSubgraph, FractionalMatching, VertexId};
use crate::rounding::{resolve_path_components, round_to_acyclic};
use crate::tree_matching::{match_forest, SupportForest};

/// A half-integral perfect matching plus the non-boundary vertices where it
/// could not be certified (always empty on boundary-free graphs).
#[derive(Clone, Debug)]
pub struct LemmaOutput<'g> {
    pub matching: FractionalMatching<'g>,
    pub unresolved: Vec<VertexId>,
}

fn in_l(w: u64, den: u64) -> bool {
    w == 0 || w == den || (den % 2 == 0 && 2 * w == den)
}

/// Non-boundary vertices whose sum is off target, which carry a weight
/// outside `{0, 1/2, 1}` (`{0, 1}` on odd grids), or which put positive
/// weight on an edge to the boundary.
pub fn unsettled_vertices(f: &FractionalMatching<'_>) -> Vec<VertexId> {
    let g = f.graph();
    let den = f.denominator();
    g.interior()
        .filter(|&v| {
            f.vertex_sum(v) != f.target() * den
                || g.incident(v).iter().any(|&p| {
                    let w = f.numerator(p);
                    !in_l(w, den) || (w > 0 && g.is_boundary(g.edge(p).other(v)))
                })
        })
        .collect()
}

/// `lemma_main`: rounds `f` until its support is a forest, resolves path
/// components by parity of the denominator, and replaces the remaining trees
/// by a perfect matching of their non-boundary vertices.
///
/// The result takes values in `{0, 1}` on an odd grid and in `{0, 1/2, 1}` on
/// an even one, except at the reported unresolved vertices.
pub fn lemma_main<'g>(f: &FractionalMatching<'g>) -> Result<LemmaOutput<'g>> {
    if f.target() != 1 || !f.is_valid() {
        return Err(Error::Argument(
            "expected a fractional perfect matching".into(),
        ));
    }
    let rounded = round_to_acyclic(f);
    let mut out = resolve_path_components(&rounded)?;
    let trees = SupportForest::extract_trees(&out)?;
    let m = match_forest(trees.forest());
    let chosen: HashSet<EdgeId> = m.edges.iter().copied().collect();
    let den = out.denominator();
    for fp in 0..trees.graph().edge_count() {
        let value = if chosen.contains(&trees.graph().edge(fp).id) {
            den
        } else {
            0
        };
        out.set_numerator(trees.edge_origin(fp), value);
    }
    let unresolved = unsettled_vertices(&out);
    Ok(LemmaOutput {
        matching: out,
        unresolved,
    })
}

/// Per-vertex split of the incident edge positions into two parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidentPartition {
    parts: Vec<[Vec<usize>; 2]>,
}

impl IncidentPartition {
    pub fn new(parts: Vec<[Vec<usize>; 2]>) -> Self {
        Self { parts }
    }

    pub fn parts(&self, v: VertexId) -> &[Vec<usize>; 2] {
        &self.parts[v]
    }

    /// Both parts of every vertex together list its incident edges once,
    /// and at non-boundary vertices each part has weight exactly 1.
    pub fn is_valid_for(&self, f: &FractionalMatching<'_>) -> bool {
        let g = f.graph();
        if self.parts.len() != g.vertex_count() {
            return false;
        }
        (0..g.vertex_count()).all(|v| {
            let [a, b] = &self.parts[v];
            let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
            all.sort_unstable();
            let mut inc = g.incident(v).to_vec();
            inc.sort_unstable();
            let weight = |part: &[usize]| part.iter().map(|&p| f.numerator(p)).sum::<u64>();
            all == inc
                && (g.is_boundary(v)
                    || (weight(a) == f.denominator() && weight(b) == f.denominator()))
        })
    }
}

/// `build_two_matching`: from a half-integral perfect matching `g` of a
/// `d`-regular graph (`d` even), the fractional 2-matching with value
/// `1/(d−1)` where `g = 0`, `(d/2)/(d−1)` where `g = 1/2` and `1` where
/// `g = 1`, with a partition of every vertex's edges into two parts of
/// weight 1.
///
/// A vertex with its 1-edge forms the parts {that edge} and {the d−1 zero
/// edges}; a vertex with two 1/2-edges puts one of them and half of its zero
/// edges in each part. Boundary vertices are split arbitrarily.
pub fn build_two_matching<'g>(
    g: &FractionalMatching<'g>,
    d: usize,
) -> Result<(FractionalMatching<'g>, IncidentPartition)> {
    if d == 0 || d % 2 != 0 {
        return Err(Error::OddDegree { d });
    }
    let graph = g.graph();
    let den = g.denominator();
    let d64 = d as u64;
    let numerators = g
        .numerators()
        .iter()
        .map(|&w| match w {
            w if w == den => d64 - 1,
            w if 2 * w == den => d64 / 2,
            _ => 1,
        })
        .collect();
    let mut parts = Vec::with_capacity(graph.vertex_count());
    for v in 0..graph.vertex_count() {
        let inc = graph.incident(v);
        if graph.is_boundary(v) {
            let (a, b) = inc.split_at(inc.len() / 2);
            parts.push([a.to_vec(), b.to_vec()]);
            continue;
        }
        let (mut ones, mut halves, mut zeros, mut other) = (vec![], vec![], vec![], 0);
        for &p in inc {
            match g.numerator(p) {
                0 => zeros.push(p),
                w if w == den => ones.push(p),
                w if 2 * w == den => halves.push(p),
                _ => other += 1,
            }
        }
        let part = match (ones.len(), halves.len(), other) {
            (1, 0, 0) if zeros.len() == d - 1 => [ones, zeros],
            (0, 2, 0) if zeros.len() == d - 2 => {
                let rest = zeros.split_off((d - 2) / 2);
                let (h0, h1) = (halves[0], halves[1]);
                zeros.insert(0, h0);
                let mut second = vec![h1];
                second.extend(rest);
                [zeros, second]
            }
            _ => {
                return Err(Error::InvariantViolation(format!(
                    "vertex {v} has neither one edge at 1 nor two at 1/2 among {d}"
                )))
            }
        };
        parts.push(part);
    }
    let f2 = FractionalMatching::new(graph, d64 - 1, numerators, 2)?;
    Ok((f2, IncidentPartition::new(parts)))
}

/// Every vertex `x` doubled into `(x, 0) = 2x` and `(x, 1) = 2x + 1`; an edge
/// in part `i` at `x` and part `j` at `y` becomes `((x, i), (y, j))` with the
/// same id and position.
#[derive(Clone, Debug)]
pub struct SplitGraph {
    graph: BipartiteMultigraph,
    numerators: Vec<u64>,
    denominator: u64,
}

impl SplitGraph {
    pub fn graph(&self) -> &BipartiteMultigraph {
        &self.graph
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// The transported weights as a fractional perfect matching.
    pub fn matching(&self) -> FractionalMatching<'_> {
        FractionalMatching::new(&self.graph, self.denominator, self.numerators.clone(), 1)
            .expect("weights copied from a valid matching")
    }

    pub fn original_vertex(split: VertexId) -> VertexId {
        split / 2
    }
}

/// `split_graph`. Fails if the partition does not have weight 1 per part.
pub fn split_graph(f: &FractionalMatching<'_>, parts: &IncidentPartition) -> Result<SplitGraph> {
    if !parts.is_valid_for(f) {
        return Err(Error::Argument(
            "partition parts must cover the incident edges with weight 1 each".into(),
        ));
    }
    let g = f.graph();
    let mut left_part = vec![0; g.edge_count()];
    let mut right_part = vec![0; g.edge_count()];
    for v in 0..g.vertex_count() {
        for (i, part) in parts.parts(v).iter().enumerate() {
            for &p in part {
                if g.edge(p).left == v {
                    left_part[p] = i;
                } else {
                    right_part[p] = i;
                }
            }
        }
    }
    let sides = (0..2 * g.vertex_count()).map(|s| g.side(s / 2)).collect();
    let boundary = (0..2 * g.vertex_count())
        .map(|s| g.is_boundary(s / 2))
        .collect();
    let graph = BipartiteMultigraph::new(
        sides,
        boundary,
        g.edges()
            .iter()
            .enumerate()
            .map(|(p, e)| (e.id, 2 * e.left + left_part[p], 2 * e.right + right_part[p])),
    )?;
    Ok(SplitGraph {
        graph,
        numerators: f.numerators().to_vec(),
        denominator: f.denominator(),
    })
}

/// Edge ids and unresolved vertices of one reduction step.
type Step = (Vec<EdgeId>, Vec<VertexId>);

fn one_factor_step(g: &BipartiteMultigraph, d: usize) -> Result<Step> {
    let uniform = FractionalMatching::uniform(g, 1, d as u64, 1)?;
    let out = lemma_main(&uniform)?;
    let m = &out.matching;
    let ids = (0..g.edge_count())
        .filter(|&p| m.numerator(p) == m.denominator())
        .map(|p| g.edge(p).id)
        .collect();
    Ok((ids, out.unresolved))
}

fn two_factor_step(g: &BipartiteMultigraph, d: usize) -> Result<Step> {
    let uniform = FractionalMatching::uniform(g, 1, d as u64, 1)?;
    let first = lemma_main(&uniform)?;
    let promoted = g.with_boundary(first.unresolved.iter().copied());
    let half = first.matching.transport(&promoted);
    let (f2, parts) = build_two_matching(&half, d)?;
    let split = split_graph(&f2, &parts)?;
    if split.denominator() % 2 == 0 {
        return Err(Error::InvariantViolation(format!(
            "split graph landed on the even grid 1/{}",
            split.denominator()
        )));
    }
    let sm = split.matching();
    let second = lemma_main(&sm)?;
    let m = &second.matching;
    let ids = (0..g.edge_count())
        .filter(|&p| m.numerator(p) == m.denominator())
        .map(|p| g.edge(p).id)
        .collect();
    let mut unresolved = first.unresolved;
    unresolved.extend(
        second
            .unresolved
            .iter()
            .map(|&s| SplitGraph::original_vertex(s)),
    );
    unresolved.sort_unstable();
    unresolved.dedup();
    Ok((ids, unresolved))
}

fn checked<'g>(
    g: &'g BipartiteMultigraph,
    ids: Vec<EdgeId>,
    k: usize,
    unresolved: Vec<VertexId>,
) -> Result<FactorSubgraph<'g>> {
    let h = FactorSubgraph::from_ids(g, ids, k)?.with_unresolved(unresolved);
    if !h.verify() {
        return Err(Error::InvariantViolation(format!(
            "constructed subgraph is not {k}-regular"
        )));
    }
    Ok(h)
}

/// `two_factor` of a `d`-regular bipartite graph, `d` even.
pub fn two_factor(g: &BipartiteMultigraph, d: usize) -> Result<FactorSubgraph<'_>> {
    if d % 2 != 0 {
        return Err(Error::OddDegree { d });
    }
    if !g.is_interior_regular(d) {
        return Err(Error::Argument(format!("graph is not {d}-regular")));
    }
    let (ids, unresolved) = two_factor_step(g, d)?;
    checked(g, ids, 2, unresolved)
}

/// One step of the [`k_factor`] recursion, reported before the step's
/// edges are removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageEvent {
    pub stage: &'static str,
    pub d: usize,
    pub k: usize,
    pub edges: usize,
    pub kept: bool,
    pub unresolved: usize,
}

/// `k_factor` of a `d`-regular bipartite graph; needs `d` odd or `k` even.
pub fn k_factor(g: &BipartiteMultigraph, d: usize, k: usize) -> Result<FactorSubgraph<'_>> {
    k_factor_traced(g, d, k, |_| {})
}

/// As [`k_factor`], reporting every reduction step.
///
/// While `d` is odd a perfect matching is removed (and kept if `k` is odd);
/// while `d` is even a 2-factor is removed and kept. Vertices a step cannot
/// settle are treated as boundary by later steps.
pub fn k_factor_traced(
    g: &BipartiteMultigraph,
    d: usize,
    k: usize,
    mut observe: impl FnMut(&StageEvent),
) -> Result<FactorSubgraph<'_>> {
    if k > d {
        return Err(Error::Argument(format!("k={k} exceeds d={d}")));
    }
    if d % 2 == 0 && k % 2 == 1 {
        return Err(Error::Unsupported { d, k });
    }
    if !g.is_interior_regular(d) {
        return Err(Error::Argument(format!("graph is not {d}-regular")));
    }
    let (target, mut d, mut k) = (k, d, k);
    let mut cur = g.clone();
    let mut ids = Vec::new();
    let mut unresolved: Vec<VertexId> = Vec::new();
    while k > 0 {
        if k == d {
            ids.extend(cur.edges().iter().map(|e| e.id));
            break;
        }
        let (stage, (step, lost), keep) = if d % 2 == 1 {
            ("one_factor", one_factor_step(&cur, d)?, k % 2 == 1)
        } else {
            ("two_factor", two_factor_step(&cur, d)?, true)
        };
        observe(&StageEvent {
            stage,
            d,
            k,
            edges: step.len(),
            kept: keep,
            unresolved: lost.len(),
        });
        let removed: HashSet<usize> = step
            .iter()
            .map(|&id| cur.position_of(id).expect("step edges come from cur"))
            .collect();
        cur = cur
            .without_positions(&removed)
            .with_boundary(lost.iter().copied());
        unresolved.extend(lost);
        let width = if d % 2 == 1 { 1 } else { 2 };
        if keep {
            ids.extend(step);
            k -= width;
        }
        d -= width;
    }
    unresolved.sort_unstable();
    unresolved.dedup();
    checked(g, ids, target, unresolved)
}
