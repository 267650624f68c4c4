//! Acceptance run: one PASS/FAIL line per criterion.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use kfactor_core::generators::{
    gen_random_even_graph, gen_random_regular_bipartite, gen_random_regular_multigraph, Labeling,
    OracleGraph,
};
use kfactor_core::graph::{BipartiteMultigraph, FractionalMatching, Side, SupportSubgraph};
use kfactor_core::pipeline::{
    balanced_orientation, build_two_matching, corollary_factor, k_factor, lemma_main, split_graph,
};
use kfactor_core::rounding::round_to_acyclic_traced;
use kfactor_core::tree_matching::{
    find_bad_ray_reps, strict_increases, weight_profile, weight_profile_check, SupportForest,
};
use kfactor_core::verification::{
    disagreement_frequency, enumerate_k_factors, median_residual, parity_obstruction_experiment,
    verify_factor, window_residual_experiment,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn supported(d: usize, k: usize) -> bool {
    k % 2 == 0 || d % 2 == 1
}

fn completeness() -> Outcome {
    let start = Instant::now();
    let cases: Vec<(usize, usize, u64)> = (1..=6)
        .flat_map(|d| {
            (0..=d)
                .filter(move |&k| supported(d, k))
                .map(move |k| (d, k))
        })
        .flat_map(|(d, k)| (0..50).map(move |s| (d, k, s)))
        .collect();
    let failures: Vec<_> = cases
        .par_iter()
        .filter(|&&(d, k, seed)| {
            // n left + n right vertices, n in 1..=50
            let n = 1 + (seed as usize * 7 + d * 3 + k) % 50;
            let g = gen_random_regular_bipartite(n, d, seed);
            match k_factor(&g, d, k) {
                Ok(h) => !verify_factor(&g, &h.edge_ids(), k),
                Err(_) => true,
            }
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "{} runs, {} failed, {:.1}s",
            cases.len(),
            failures.len(),
            elapsed.as_secs_f64()
        ),
    )
}

/// Permanent of the biadjacency matrix by Ryser's formula.
fn ryser(g: &BipartiteMultigraph) -> i64 {
    let left: Vec<_> = (0..g.vertex_count())
        .filter(|&v| g.side(v) == Side::Left)
        .collect();
    let right: Vec<_> = (0..g.vertex_count())
        .filter(|&v| g.side(v) == Side::Right)
        .collect();
    let n = left.len();
    let mut a = vec![vec![0i64; n]; n];
    for e in g.edges() {
        let i = left.iter().position(|&x| x == e.left).unwrap();
        let j = right.iter().position(|&x| x == e.right).unwrap();
        a[i][j] += 1;
    }
    (1u32..1 << n)
        .map(|mask| {
            let prod: i64 = a
                .iter()
                .map(|row| {
                    (0..n)
                        .filter(|j| mask >> j & 1 == 1)
                        .map(|j| row[j])
                        .sum::<i64>()
                })
                .product();
            if (n - mask.count_ones() as usize) % 2 == 0 {
                prod
            } else {
                -prod
            }
        })
        .sum()
}

fn small_corpus() -> Vec<(String, BipartiteMultigraph, usize)> {
    let mut out = Vec::new();
    let k33 =
        BipartiteMultigraph::from_pairs(3, 3, (0..3).flat_map(|a| (3..6).map(move |b| (a, b))))
            .unwrap();
    out.push(("K33".to_string(), k33, 3));
    let c4 = BipartiteMultigraph::from_pairs(2, 2, [(0, 2), (2, 1), (1, 3), (3, 0)]).unwrap();
    out.push(("C4".to_string(), c4, 2));
    let base = [(0, 2), (2, 1), (1, 3), (3, 0)];
    let c4x2 =
        BipartiteMultigraph::from_pairs(2, 2, base.iter().chain(base.iter()).copied()).unwrap();
    out.push(("C4x2".to_string(), c4x2, 4));
    let k44 =
        BipartiteMultigraph::from_pairs(4, 4, (0..4).flat_map(|a| (4..8).map(move |b| (a, b))))
            .unwrap();
    out.push(("K44".to_string(), k44, 4));
    let triple = BipartiteMultigraph::from_pairs(1, 1, [(0, 1), (0, 1), (0, 1)]).unwrap();
    out.push(("triple".to_string(), triple, 3));
    for k in 2..=10 {
        let pairs = (0..k).flat_map(|i| [(i, k + i), (k + i, (i + 1) % k)]);
        out.push((
            format!("C{}", 2 * k),
            BipartiteMultigraph::from_pairs(k, k, pairs).unwrap(),
            2,
        ));
    }
    for d in 1..=5 {
        for n in 1..=20 / d {
            for seed in 0..4 {
                out.push((
                    format!("rand n={n} d={d} s={seed}"),
                    gen_random_regular_bipartite(n, d, seed),
                    d,
                ));
            }
        }
    }
    out.retain(|(_, g, _)| g.edge_count() <= 20);
    out
}

fn oracle_agreement() -> Outcome {
    let corpus = small_corpus();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (name, g, d) in &corpus {
        for k in (0..=*d).filter(|&k| supported(*d, k)) {
            let all: HashSet<Vec<u64>> = enumerate_k_factors(g, k).unwrap().into_iter().collect();
            let h = k_factor(g, *d, k).unwrap();
            checked += 1;
            if !all.contains(&h.edge_ids()) {
                bad.push(format!("{name} k={k}"));
            }
        }
    }
    let (k33, c4) = (&corpus[0].1, &corpus[1].1);
    let count = |g, k| enumerate_k_factors(g, k).unwrap().len();
    let counts_ok = count(k33, 1) == 6
        && ryser(k33) == 6
        && count(c4, 1) == 2
        && ryser(c4) == 2
        && count(c4, 2) == 1;
    outcome(
        bad.is_empty() && counts_ok,
        format!(
            "{} graphs, {checked} (graph, k) pairs, {} outside the enumerated set; K33 k=1: {}, C4 k=1: {}, C4 k=2: {}",
            corpus.len(),
            bad.len(),
            count(k33, 1),
            count(c4, 1),
            count(c4, 2)
        ),
    )
}

/// Vertices farther than `radius` (BFS) from vertex 0 become boundary.
fn ball(g: &BipartiteMultigraph, radius: usize) -> BipartiteMultigraph {
    let mut dist = vec![usize::MAX; g.vertex_count()];
    let mut queue = std::collections::VecDeque::from([0]);
    dist[0] = 0;
    while let Some(v) = queue.pop_front() {
        for &p in g.incident(v) {
            let w = g.edge(p).other(v);
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    g.with_boundary((0..g.vertex_count()).filter(|&v| dist[v] > radius))
}

fn rounding_invariants() -> Outcome {
    let mut instances: Vec<(BipartiteMultigraph, usize)> = Vec::new();
    for d in 1..=6 {
        for seed in 0..20 {
            instances.push((
                gen_random_regular_bipartite(10 + seed as usize * 3, d, seed),
                d,
            ));
        }
    }
    for seed in 0..10 {
        let o = OracleGraph::planar4().with_labeling(Labeling::Hashed(seed));
        instances.push((o.window(&[0, 0], 6).unwrap().graph, 4));
        let o = OracleGraph::planar3().with_labeling(Labeling::Hashed(seed));
        instances.push((o.window(&[0, 0], 6).unwrap().graph, 3));
    }
    let results: Vec<(bool, usize, usize)> = instances
        .par_iter()
        .map(|(g, d)| {
            let f = FractionalMatching::uniform(g, 1, *d as u64, 1).unwrap();
            let mut ok = f.is_valid();
            let mut prev: HashSet<usize> =
                SupportSubgraph::of(&f).edges().iter().copied().collect();
            let mut updates = 0;
            let out = round_to_acyclic_traced(&f, |ev, step| {
                updates += 1;
                let now: HashSet<usize> =
                    SupportSubgraph::of(step).edges().iter().copied().collect();
                ok &= step.is_valid() && now.is_subset(&prev) && ev.support_size == now.len();
                prev = now;
            });
            ok &= updates <= g.edge_count();
            if !g.has_boundary() {
                ok &= SupportSubgraph::of(&out).is_empty();
            }
            (ok, updates, g.edge_count())
        })
        .collect();
    let failed = results.iter().filter(|r| !r.0).count();
    let steps: usize = results.iter().map(|r| r.1).sum();
    outcome(
        failed == 0,
        format!(
            "{} traced runs, {steps} updates, {failed} violations",
            results.len()
        ),
    )
}

fn splitting() -> Outcome {
    let mut problems = 0;
    let mut runs = 0;
    for d in [4usize, 6] {
        for seed in 0..100 {
            runs += 1;
            let g = gen_random_regular_bipartite(5 + seed as usize % 40, d, seed);
            let half =
                lemma_main(&FractionalMatching::uniform(&g, 1, d as u64, 1).unwrap()).unwrap();
            let (f2, parts) = build_two_matching(&half.matching, d).unwrap();
            let sums_ok = (0..g.vertex_count()).all(|v| {
                parts
                    .parts(v)
                    .iter()
                    .all(|p| p.iter().map(|&q| f2.numerator(q)).sum::<u64>() == f2.denominator())
            });
            let split = split_graph(&f2, &parts).unwrap();
            let sg = split.graph();
            let bipartite = sg
                .edges()
                .iter()
                .all(|e| sg.side(e.left) != sg.side(e.right));
            let odd = split.denominator() == d as u64 - 1 && split.denominator() % 2 == 1;
            let pm = lemma_main(&split.matching()).unwrap();
            let mut deg = vec![0; g.vertex_count()];
            for p in (0..g.edge_count())
                .filter(|&p| pm.matching.numerator(p) == pm.matching.denominator())
            {
                let e = g.edge(p);
                deg[e.left] += 1;
                deg[e.right] += 1;
            }
            let two_regular = deg.iter().all(|&x| x == 2);
            if !(sums_ok && bipartite && odd && two_regular && f2.is_valid()) {
                problems += 1;
            }
        }
    }
    outcome(
        problems == 0,
        format!("{runs} instances, {problems} failed"),
    )
}

fn bad_ray_laws() -> Outcome {
    let mut sources: Vec<(BipartiteMultigraph, usize)> = Vec::new();
    for seed in 0..40 {
        let o = OracleGraph::planar3().with_labeling(Labeling::Hashed(seed));
        sources.push((o.window(&[seed as i64, 0], 6 + seed % 5).unwrap().graph, 3));
        let o = OracleGraph::planar4().with_labeling(Labeling::Hashed(seed));
        sources.push((o.window(&[0, seed as i64], 5 + seed % 4).unwrap().graph, 4));
    }
    for d in 3..=6 {
        for seed in 0..15 {
            let g = gen_random_regular_bipartite(60, d, seed);
            sources.push((ball(&g, 2 + seed as usize % 2), d));
        }
    }
    let results: Vec<(bool, usize, usize, usize)> = sources
        .par_iter()
        .map(|(g, d)| {
            let f = FractionalMatching::uniform(g, 1, *d as u64, 1).unwrap();
            let rounded = round_to_acyclic_traced(&f, |_, _| {});
            let sf = SupportForest::extract(&rounded).unwrap();
            let m = sf.matching();
            let reports = find_bad_ray_reps(sf.forest());
            let mut ok = true;
            let mut max_inc = 0;
            for r in &reports {
                ok &= weight_profile_check(&m, r);
                let w = weight_profile(&m, r).unwrap_or_default();
                let inc = strict_increases(&w);
                max_inc = max_inc.max(inc);
                ok &= inc as u64 + 2 <= m.denominator();
            }
            (ok, reports.len(), max_inc, sf.graph().edge_count())
        })
        .collect();
    let forests = results.iter().filter(|r| r.3 > 0).count();
    let reports: usize = results.iter().map(|r| r.1).sum();
    let failed = results.iter().filter(|r| !r.0).count();
    let max_inc = results.iter().map(|r| r.2).max().unwrap_or(0);
    outcome(
        failed == 0 && forests >= 100 && reports > 0,
        format!(
            "{forests} non-empty forests, {reports} reports, {failed} forests with a violation, max strict increases {max_inc}"
        ),
    )
}

fn ratio_f64(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn residual_scaling() -> Outcome {
    let start = Instant::now();
    let reports = window_residual_experiment(&OracleGraph::planar3(), &[8, 16, 32], 1, 10).unwrap();
    let elapsed = start.elapsed();
    let m: Vec<_> = [8, 16, 32]
        .iter()
        .map(|&r| median_residual(&reports, r).unwrap())
        .collect();
    let pass = m[0] > m[1] && m[1] > m[2] && m[2] * 2 <= m[0] && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "median residual r=8: {} ({:.4}), r=16: {} ({:.4}), r=32: {} ({:.4}); {:.1}s",
            m[0],
            ratio_f64(m[0]),
            m[1],
            ratio_f64(m[1]),
            m[2],
            ratio_f64(m[2]),
            elapsed.as_secs_f64()
        ),
    )
}

fn parity_obstruction() -> Outcome {
    let radii = [8u64, 16, 32];
    let line = parity_obstruction_experiment(
        &OracleGraph::line().with_labeling(Labeling::Hashed(0)),
        &radii,
        100,
        1,
    )
    .unwrap();
    let doubled = parity_obstruction_experiment(
        &OracleGraph::doubled_line().with_labeling(Labeling::Hashed(0)),
        &[32],
        100,
        1,
    )
    .unwrap();
    let hex = parity_obstruction_experiment(
        &OracleGraph::planar3().with_labeling(Labeling::Hashed(0)),
        &[32],
        100,
        1,
    )
    .unwrap();
    let line_freq: Vec<f64> = radii
        .iter()
        .map(|&r| disagreement_frequency(&line, r).unwrap())
        .collect();
    let doubled_freq = disagreement_frequency(&doubled, 32).unwrap();
    let hex_freq = disagreement_frequency(&hex, 32).unwrap();
    let pass = line_freq.iter().all(|&f| f > 0.25) && doubled_freq < 0.05;
    outcome(
        pass,
        format!(
            "line (d=2) r=8/16/32: {:.3}/{:.3}/{:.3} (need > 0.25); doubled line (d=3) r=32: {:.3} (need < 0.05); hexagonal (d=3) r=32: {:.3}",
            line_freq[0], line_freq[1], line_freq[2], doubled_freq, hex_freq
        ),
    )
}

fn corollary_checks() -> Outcome {
    let balanced = (0..100)
        .filter(|&seed| {
            let g = gen_random_even_graph(30, 25, seed).unwrap();
            balanced_orientation(&g).unwrap().is_balanced(&g)
        })
        .count();
    let mut factors_ok = 0;
    let mut runs = 0;
    for (degree, want) in [(6usize, 2usize), (8, 4)] {
        for seed in 0..20 {
            runs += 1;
            let g = gen_random_regular_multigraph(20 + seed as usize, degree, seed).unwrap();
            let o = balanced_orientation(&g).unwrap();
            if let Ok(h) = corollary_factor(&g, &o) {
                let deg = g.degrees_of(&h.edges).unwrap();
                if h.degree == want && deg.iter().all(|&x| x == want) {
                    factors_ok += 1;
                }
            }
        }
    }
    outcome(
        balanced == 100 && factors_ok == runs,
        format!("{balanced}/100 orientations balanced; {factors_ok}/{runs} factors of the expected degree"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("positive-side completeness", completeness),
        ("oracle agreement", oracle_agreement),
        ("rounding invariants", rounding_invariants),
        ("splitting-trick correctness", splitting),
        ("bad-ray laws", bad_ray_laws),
        ("residual scaling", residual_scaling),
        ("parity obstruction demonstration", parity_obstruction),
        ("corollary checks", corollary_checks),
    ];
    let mut passed = 0;
    for (name, run) in criteria {
        let o = run();
        if o.pass {
            passed += 1;
        }
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {passed} of {} criteria passed", criteria.len());
}
