use std::collections::{HashMap, HashSet};

use proptest::prelude::*;

use kfactor_core::generators::{
    gen_boundaried_forest, gen_random_even_graph, gen_random_regular_bipartite, ForestSpec,
};
use kfactor_core::graph::format::{GraphDoc, MatchingDoc};
use kfactor_core::graph::{
    subtract_factor, BipartiteMultigraph, FactorSubgraph, FractionalMatching, SupportSubgraph,
};
use kfactor_core::pipeline::{balanced_orientation, build_two_matching, k_factor, lemma_main};
use kfactor_core::rounding::{
    apply_cycle_update, find_support_cycle, random_sigma, round_to_acyclic_traced,
    sigma_round_traced,
};
use kfactor_core::tree_matching::{
    find_bad_ray_reps, match_forest, weight_profile_check, SupportForest,
};
use kfactor_core::verification::{edge_color_regular_bipartite, verify_factor};
use kfactor_core::Error;

/// A regular graph with some interior vertices turned into boundary, plus a
/// fractional perfect matching with unequal weights: colour class `i` of a
/// proper edge colouring gets numerator `coef[i]` over `sum(coef)`.
#[derive(Clone, Debug)]
struct Instance {
    g: BipartiteMultigraph,
    numerators: Vec<u64>,
    den: u64,
}

impl Instance {
    fn matching(&self) -> FractionalMatching<'_> {
        FractionalMatching::new(&self.g, self.den, self.numerators.clone(), 1).unwrap()
    }
}

fn support_set(f: &FractionalMatching<'_>) -> HashSet<usize> {
    SupportSubgraph::of(f).edges().iter().copied().collect()
}

fn instance() -> impl Strategy<Value = Instance> {
    (
        1usize..25,
        1usize..=6,
        any::<u64>(),
        prop::collection::vec(any::<bool>(), 50),
        prop::collection::vec(1u64..20, 6),
    )
        .prop_map(|(n, d, seed, mask, coef)| {
            let g = gen_random_regular_bipartite(n, d, seed);
            let mut numerators = vec![0; g.edge_count()];
            for (i, class) in edge_color_regular_bipartite(&g, d)
                .unwrap()
                .iter()
                .enumerate()
            {
                for id in class {
                    numerators[g.position_of(*id).unwrap()] = coef[i];
                }
            }
            let boundary = (0..g.vertex_count()).filter(|&v| mask[v] && v % 3 == 0);
            Instance {
                g: g.with_boundary(boundary),
                numerators,
                den: coef[..d].iter().sum(),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounding_preserves_sums_and_shrinks_support(
        inst in instance(),
    ) {
        let (g, f) = (&inst.g, inst.matching());
        prop_assert!(f.is_valid());
        let mut prev = support_set(&f);
        let mut updates = 0;
        let mut ok = true;
        let out = round_to_acyclic_traced(&f, |_, step| {
            updates += 1;
            let now = support_set(step);
            ok &= step.is_valid() && now.is_subset(&prev) && now.len() < prev.len();
            prev = now;
        });
        prop_assert!(ok);
        prop_assert!(updates <= g.edge_count());
        prop_assert!(SupportSubgraph::of(&out).is_interior_acyclic());
        if !g.has_boundary() {
            prop_assert!(out.is_integral());
        }
    }

    #[test]
    fn sigma_rounds_stay_valid(
        inst in instance(),
        seed in any::<u64>(),
    ) {
        let f = inst.matching();
        let mut prev = support_set(&f);
        let mut ok = true;
        sigma_round_traced(&f, random_sigma(seed), 20, |_, step| {
            let now = support_set(step);
            ok &= step.is_valid() && now.is_subset(&prev);
            prev = now;
        });
        prop_assert!(ok);
    }

    #[test]
    fn single_cycle_update_keeps_vertex_sums(
        inst in instance(),
    ) {
        let (g, f) = (&inst.g, inst.matching());
        if let Some(u) = find_support_cycle(&f) {
            let h = apply_cycle_update(&f, &u).unwrap();
            for v in g.interior() {
                prop_assert_eq!(h.vertex_sum(v), f.vertex_sum(v));
            }
            let changed: Vec<usize> = (0..g.edge_count())
                .filter(|&p| h.numerator(p) != f.numerator(p))
                .collect();
            let mut cycle = u.cycle().to_vec();
            cycle.sort_unstable();
            prop_assert_eq!(changed, cycle);
        }
    }

    #[test]
    fn k_factor_is_a_k_factor(n in 1usize..40, d in 1usize..=6, k in 0usize..=6, seed in any::<u64>()) {
        prop_assume!(k <= d);
        let g = gen_random_regular_bipartite(n, d, seed);
        match k_factor(&g, d, k) {
            Ok(h) => {
                prop_assert!(k % 2 == 0 || d % 2 == 1);
                prop_assert!(verify_factor(&g, &h.edge_ids(), k));
            }
            Err(Error::Unsupported { .. }) => prop_assert!(k % 2 == 1 && d % 2 == 0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn two_matching_partition_is_balanced(n in 1usize..30, half in 1usize..=4, seed in any::<u64>()) {
        let d = 2 * half;
        let g = gen_random_regular_bipartite(n, d, seed);
        let f = FractionalMatching::uniform(&g, 1, d as u64, 1).unwrap();
        let out = lemma_main(&f).unwrap();
        let (f2, parts) = build_two_matching(&out.matching, d).unwrap();
        prop_assert!(f2.is_valid());
        prop_assert!(parts.is_valid_for(&f2));
        for v in 0..g.vertex_count() {
            let [a, b] = parts.parts(v);
            let mut all: Vec<usize> = a.iter().chain(b).copied().collect();
            all.sort_unstable();
            let mut inc = g.incident(v).to_vec();
            inc.sort_unstable();
            prop_assert_eq!(all, inc);
        }
    }

    #[test]
    fn subtracting_a_factor_lowers_the_degree(n in 1usize..30, d in 1usize..=6, seed in any::<u64>()) {
        let g = gen_random_regular_bipartite(n, d, seed);
        let k = if d % 2 == 1 { 1 } else { 2 };
        let h = k_factor(&g, d, k).unwrap();
        let rest = subtract_factor(&g, &h).unwrap();
        prop_assert!(rest.is_regular(d - k));
        let mut ids: Vec<u64> = rest.edges().iter().map(|e| e.id).chain(h.edge_ids()).collect();
        ids.sort_unstable();
        let mut all: Vec<u64> = g.edges().iter().map(|e| e.id).collect();
        all.sort_unstable();
        prop_assert_eq!(ids, all);
    }

    #[test]
    fn graph_and_matching_json_round_trip(inst in instance()) {
        let g = &inst.g;
        let text = serde_json::to_string(&GraphDoc::from_graph(g)).unwrap();
        let back = serde_json::from_str::<GraphDoc>(&text).unwrap().to_graph().unwrap();
        prop_assert_eq!(&back, g);
        let f = inst.matching();
        let text = serde_json::to_string(&MatchingDoc::from_matching(&f)).unwrap();
        let f2 = serde_json::from_str::<MatchingDoc>(&text).unwrap().matching(&back).unwrap();
        prop_assert_eq!(f2.numerators(), f.numerators());
        prop_assert_eq!(f2.denominator(), f.denominator());
    }

    #[test]
    fn even_graphs_orient_balanced(n in 2usize..40, cycles in 0usize..30, seed in any::<u64>()) {
        let g = gen_random_even_graph(n, cycles, seed).unwrap();
        let o = balanced_orientation(&g).unwrap();
        prop_assert!(o.is_balanced(&g));
    }

    #[test]
    fn forest_matching_is_a_matching(vertices in 1usize..60, extra in 0u32..60, seed in any::<u64>()) {
        let spec = ForestSpec::Random { vertices, extra_stub_percent: extra };
        let forest = gen_boundaried_forest(&spec, seed).unwrap();
        let g = forest.graph();
        let m = match_forest(&forest);
        let mut cover: HashMap<usize, usize> = HashMap::new();
        for id in &m.edges {
            let e = g.edge(g.position_of(*id).unwrap());
            *cover.entry(e.left).or_default() += 1;
            *cover.entry(e.right).or_default() += 1;
        }
        prop_assert!(cover.values().all(|&c| c == 1));
        let unresolved: HashSet<usize> = m.unresolved().into_iter().collect();
        for v in (0..g.vertex_count()).filter(|&v| !forest.is_stub(v)) {
            let inside = g.incident(v).iter().any(|&p| {
                let e = g.edge(p);
                m.edges.contains(&e.id) && !forest.is_stub(e.other(v))
            });
            prop_assert!(inside != unresolved.contains(&v), "vertex {v}");
        }
        prop_assert!(m.uncovered.iter().all(|v| !cover.contains_key(v)));
    }

    #[test]
    fn rounded_supports_obey_the_ray_laws(inst in instance()) {
        let f = inst.matching();
        let out = round_to_acyclic_traced(&f, |_, _| {});
        let sf = SupportForest::extract(&out).unwrap();
        let m = sf.matching();
        for r in find_bad_ray_reps(sf.forest()) {
            prop_assert!(weight_profile_check(&m, &r), "{r:?}");
        }
    }
}

#[test]
fn factor_subgraph_verify_matches_free_function() {
    let g = gen_random_regular_bipartite(12, 4, 3);
    let h = k_factor(&g, 4, 2).unwrap();
    assert!(h.verify());
    let mut ids = h.edge_ids();
    ids.pop();
    assert!(!verify_factor(&g, &ids, 2));
    let broken = FactorSubgraph::from_ids(&g, ids.iter().copied(), 2).unwrap();
    assert!(!broken.verify());
}
