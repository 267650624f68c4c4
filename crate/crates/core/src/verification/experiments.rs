use std::collections::HashMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{Labeling, LatticeVertex, OracleGraph, Window};
use crate::graph::{FractionalMatching, VertexId};
use crate::pipeline::{k_factor, lemma_main, unsettled_vertices};
use crate::tree_matching::{match_forest, SupportForest};

pub const CSV_HEADER: &str =
    "experiment,radius,center,interior,unresolved,residual_num,residual_den";

fn center_string(c: &[i64]) -> String {
    c.iter().map(i64::to_string).collect::<Vec<_>>().join(";")
}

/// Outcome of the full pipeline on one window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidualReport {
    pub oracle: String,
    pub seed: u64,
    pub radius: u64,
    pub center: Vec<i64>,
    pub interior: usize,
    pub unresolved: usize,
    #[serde(serialize_with = "ratio_string")]
    pub residual: Ratio<u64>,
}

fn ratio_string<S: serde::Serializer>(
    r: &Ratio<u64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl ResidualReport {
    pub fn csv_row(&self) -> String {
        format!(
            "residual,{},{},{},{},{},{}",
            self.radius,
            center_string(&self.center),
            self.interior,
            self.unresolved,
            self.residual.numer(),
            self.residual.denom()
        )
    }
}

/// Lattice point in `[-10^6, 10^6]^m` drawn from `seed`.
fn random_center(dim: usize, rng: &mut ChaCha8Rng) -> Vec<i64> {
    (0..dim)
        .map(|_| rng.gen_range(-1_000_000..=1_000_000))
        .collect()
}

/// `window_residual_experiment`: for every seed and radius, the k-factor
/// pipeline on a window around a seeded random center, under the hashed
/// labelling for that seed. Residual is unresolved over interior vertices, or
/// 1 for a window without interior.
pub fn window_residual_experiment(
    oracle: &OracleGraph,
    radii: &[u64],
    k: usize,
    seeds: u64,
) -> Result<Vec<ResidualReport>> {
    let d = oracle.degree();
    if d % 2 == 0 && k % 2 == 1 {
        return Err(Error::Unsupported { d, k });
    }
    if k > d {
        return Err(Error::Argument(format!("k={k} exceeds d={d}")));
    }
    let jobs: Vec<(u64, u64)> = (0..seeds)
        .flat_map(|s| radii.iter().map(move |&r| (s, r)))
        .collect();
    jobs.par_iter()
        .map(|&(seed, radius)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let center = random_center(oracle.dim(), &mut rng);
            let labeled = oracle.clone().with_labeling(Labeling::Hashed(seed));
            let w = labeled.window(&center, radius)?;
            let h = k_factor(&w.graph, d, k)?;
            let interior = w.interior_count();
            let unresolved = h.unresolved().len();
            let residual = if interior == 0 {
                Ratio::from_integer(1)
            } else {
                Ratio::new(unresolved as u64, interior as u64)
            };
            Ok(ResidualReport {
                oracle: oracle.id(),
                seed,
                radius,
                center,
                interior,
                unresolved,
                residual,
            })
        })
        .collect()
}

/// Median residual among reports at `radius` (mean of the middle two for an
/// even count).
pub fn median_residual(reports: &[ResidualReport], radius: u64) -> Option<Ratio<u64>> {
    let mut r: Vec<_> = reports
        .iter()
        .filter(|x| x.radius == radius)
        .map(|x| x.residual)
        .collect();
    if r.is_empty() {
        return None;
    }
    r.sort();
    let n = r.len();
    Some(if n % 2 == 1 {
        r[n / 2]
    } else {
        (r[n / 2 - 1] + r[n / 2]) / 2
    })
}

/// A perfect matching of a window's interior, by edge position, with the
/// vertices it leaves unsettled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowMatching {
    pub edges: Vec<usize>,
    pub unresolved: Vec<VertexId>,
}

/// The windowed 1-factor protocol: the half-integral perfect matching, then
/// any components still at 1/2 matched by the forest matcher.
pub fn solve_window(w: &Window, d: usize) -> Result<WindowMatching> {
    let g = &w.graph;
    let uniform = FractionalMatching::uniform(g, 1, d as u64, 1)?;
    let mut f = lemma_main(&uniform)?.matching;
    let sf = SupportForest::extract(&f)?;
    if sf.graph().edge_count() > 0 {
        let m = match_forest(sf.forest());
        let den = f.denominator();
        let mut chosen = vec![false; sf.graph().edge_count()];
        for id in m.edges {
            chosen[sf.graph().position_of(id).expect("forest edge")] = true;
        }
        let mut nums = f.numerators().to_vec();
        for (fp, &c) in chosen.iter().enumerate() {
            nums[sf.edge_origin(fp)] = if c { den } else { 0 };
        }
        f = FractionalMatching::new(g, den, nums, 1)?;
    }
    let den = f.denominator();
    Ok(WindowMatching {
        edges: (0..g.edge_count())
            .filter(|&p| f.numerator(p) == den)
            .collect(),
        unresolved: unsettled_vertices(&f),
    })
}

/// Disagreement on one connected piece of a window overlap.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentDisagreement {
    pub size: usize,
    pub disagree: usize,
}

/// Two overlapping windows solved independently and compared vertex by
/// vertex on the settled part of their common interior.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParityReport {
    pub oracle: String,
    pub pair: u64,
    pub radius: u64,
    pub centers: [Vec<i64>; 2],
    pub overlap: usize,
    pub components: Vec<ComponentDisagreement>,
}

impl ParityReport {
    pub fn disagreeing(&self) -> usize {
        self.components.iter().map(|c| c.disagree).sum()
    }

    pub fn csv_row(&self) -> String {
        let frac = if self.overlap == 0 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(self.disagreeing() as u64, self.overlap as u64)
        };
        format!(
            "parity,{},{},{},{},{},{}",
            self.radius,
            center_string(&self.centers[0]),
            self.overlap,
            self.disagreeing(),
            frac.numer(),
            frac.denom()
        )
    }
}

/// Mean over all overlap components at `radius` of the fraction of their
/// vertices whose partners differ.
pub fn disagreement_frequency(reports: &[ParityReport], radius: u64) -> Option<f64> {
    let fracs: Vec<f64> = reports
        .iter()
        .filter(|r| r.radius == radius)
        .flat_map(|r| &r.components)
        .map(|c| c.disagree as f64 / c.size as f64)
        .collect();
    if fracs.is_empty() {
        None
    } else {
        Some(fracs.iter().sum::<f64>() / fracs.len() as f64)
    }
}

/// Lattice partner of every settled interior vertex.
fn partners(w: &Window, m: &WindowMatching) -> HashMap<LatticeVertex, LatticeVertex> {
    let g = &w.graph;
    let mut settled = vec![true; g.vertex_count()];
    for &v in &m.unresolved {
        settled[v] = false;
    }
    let mut out = HashMap::new();
    for &p in &m.edges {
        let e = g.edge(p);
        for (a, b) in [(e.left, e.right), (e.right, e.left)] {
            if !g.is_boundary(a) && settled[a] {
                out.insert(w.vertices[a].clone(), w.vertices[b].clone());
            }
        }
    }
    out
}

/// `parity_obstruction_experiment`: `pairs` window pairs per radius, the
/// second window shifted along the first axis by 1 to `radius`. Both windows
/// are labelled by `oracle`'s labelling; with [`Labeling::Hashed`] the seed is
/// replaced by one drawn per pair.
pub fn parity_obstruction_experiment(
    oracle: &OracleGraph,
    radii: &[u64],
    pairs: u64,
    seed: u64,
) -> Result<Vec<ParityReport>> {
    let d = oracle.degree();
    let jobs: Vec<(u64, u64)> = (0..pairs)
        .flat_map(|i| radii.iter().map(move |&r| (i, r)))
        .collect();
    jobs.par_iter()
        .map(|&(pair, radius)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ pair.wrapping_mul(0x9e37_79b9_7f4a_7c15));
            let a = random_center(oracle.dim(), &mut rng);
            let mut b = a.clone();
            b[0] += rng.gen_range(1..=radius.max(1)) as i64;
            let labeled = match oracle.labeling() {
                Labeling::Hashed(_) => oracle.clone().with_labeling(Labeling::Hashed(rng.gen())),
                Labeling::Lexicographic => oracle.clone(),
            };
            let wa = labeled.window(&a, radius)?;
            let wb = labeled.window(&b, radius)?;
            let pa = partners(&wa, &solve_window(&wa, d)?);
            let pb = partners(&wb, &solve_window(&wb, d)?);
            let g = &wa.graph;
            let in_overlap: Vec<bool> = wa
                .vertices
                .iter()
                .map(|x| pa.contains_key(x) && pb.contains_key(x))
                .collect();
            let mut uf = crate::graph::UnionFind::new(g.vertex_count());
            for e in g.edges() {
                if in_overlap[e.left] && in_overlap[e.right] {
                    uf.union(e.left, e.right);
                }
            }
            let mut comps: std::collections::BTreeMap<usize, ComponentDisagreement> =
                Default::default();
            for v in (0..g.vertex_count()).filter(|&v| in_overlap[v]) {
                let x = &wa.vertices[v];
                let c = comps.entry(uf.find(v)).or_insert(ComponentDisagreement {
                    size: 0,
                    disagree: 0,
                });
                c.size += 1;
                if pa[x] != pb[x] {
                    c.disagree += 1;
                }
            }
            Ok(ParityReport {
                oracle: oracle.id(),
                pair,
                radius,
                centers: [a, b],
                overlap: in_overlap.iter().filter(|&&x| x).count(),
                components: comps.into_values().collect(),
            })
        })
        .collect()
}
