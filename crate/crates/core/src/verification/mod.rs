//! Independent checks: factor verification, brute-force enumeration, a
//! König edge colouring baseline, and the window experiments.

mod experiments;

pub use experiments::{
    disagreement_frequency, median_residual, parity_obstruction_experiment, solve_window,
    window_residual_experiment, ComponentDisagreement, ParityReport, ResidualReport,
    WindowMatching, CSV_HEADER,
};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, EdgeId, Side};

/// `verify_factor`: the ids are distinct edges of `g` and every non-boundary
/// vertex meets exactly `k` of them.
pub fn verify_factor(g: &BipartiteMultigraph, edges: &[EdgeId], k: usize) -> bool {
    let mut seen = HashSet::new();
    let mut deg = vec![0; g.vertex_count()];
    for &id in edges {
        let Some(p) = g.position_of(id) else {
            return false;
        };
        if !seen.insert(id) {
            return false;
        }
        let e = g.edge(p);
        deg[e.left] += 1;
        deg[e.right] += 1;
    }
    g.interior().all(|v| deg[v] == k)
}

/// Largest edge count [`enumerate_k_factors`] accepts.
pub const ENUMERATION_LIMIT: usize = 30;

/// `enumerate_k_factors`: every edge subset meeting each non-boundary vertex
/// exactly `k` times, by include/exclude search over edges in id order with
/// per-vertex degree pruning.
pub fn enumerate_k_factors(g: &BipartiteMultigraph, k: usize) -> Result<Vec<Vec<EdgeId>>> {
    if g.edge_count() > ENUMERATION_LIMIT {
        return Err(Error::SizeGuard {
            edges: g.edge_count(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let n = g.vertex_count();
    let mut remaining: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut deg = vec![0; n];
    let mut chosen = Vec::new();
    let mut out = Vec::new();
    search(g, k, 0, &mut deg, &mut remaining, &mut chosen, &mut out);
    Ok(out)
}

/// Number of k-factors, see [`enumerate_k_factors`].
pub fn count_k_factors(g: &BipartiteMultigraph, k: usize) -> Result<usize> {
    enumerate_k_factors(g, k).map(|all| all.len())
}

fn search(
    g: &BipartiteMultigraph,
    k: usize,
    p: usize,
    deg: &mut [usize],
    remaining: &mut [usize],
    chosen: &mut Vec<EdgeId>,
    out: &mut Vec<Vec<EdgeId>>,
) {
    if p == g.edge_count() {
        if g.interior().all(|v| deg[v] == k) {
            out.push(chosen.clone());
        }
        return;
    }
    let e = *g.edge(p);
    let ends = [e.left, e.right];
    for &v in &ends {
        remaining[v] -= 1;
    }
    let free = |v: usize, deg: &[usize]| g.is_boundary(v) || deg[v] < k;
    if ends.iter().all(|&v| free(v, deg)) {
        for &v in &ends {
            deg[v] += 1;
        }
        chosen.push(e.id);
        search(g, k, p + 1, deg, remaining, chosen, out);
        chosen.pop();
        for &v in &ends {
            deg[v] -= 1;
        }
    }
    let reachable = |v: usize| g.is_boundary(v) || deg[v] + remaining[v] >= k;
    if ends.iter().all(|&v| reachable(v)) {
        search(g, k, p + 1, deg, remaining, chosen, out);
    }
    for &v in &ends {
        remaining[v] += 1;
    }
}

/// `edge_color_regular_bipartite`: `d` perfect matchings, each found by
/// augmenting paths on the edges not yet coloured.
pub fn edge_color_regular_bipartite(g: &BipartiteMultigraph, d: usize) -> Result<Vec<Vec<EdgeId>>> {
    if g.has_boundary() || !g.is_regular(d) {
        return Err(Error::Argument(format!(
            "edge colouring needs a boundary-free {d}-regular graph"
        )));
    }
    let mut used = vec![false; g.edge_count()];
    let mut classes = Vec::with_capacity(d);
    for _ in 0..d {
        let m = perfect_matching(g, &used).ok_or_else(|| {
            Error::InvariantViolation("regular bipartite graph without a perfect matching".into())
        })?;
        for &p in &m {
            used[p] = true;
        }
        classes.push(m.into_iter().map(|p| g.edge(p).id).collect());
    }
    Ok(classes)
}

/// Kuhn's augmenting-path matching over unused edges; `None` unless perfect.
fn perfect_matching(g: &BipartiteMultigraph, used: &[bool]) -> Option<Vec<usize>> {
    let n = g.vertex_count();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    let left: Vec<usize> = (0..n).filter(|&v| g.side(v) == Side::Left).collect();
    for &root in &left {
        let mut visited = vec![false; n];
        if !augment(g, used, root, &mut visited, &mut mate) {
            return None;
        }
    }
    let mut m: Vec<usize> = left.iter().filter_map(|&v| mate[v]).collect();
    if 2 * m.len() != n {
        return None;
    }
    m.sort_unstable();
    Some(m)
}

fn augment(
    g: &BipartiteMultigraph,
    used: &[bool],
    v: usize,
    visited: &mut [bool],
    mate: &mut [Option<usize>],
) -> bool {
    for &p in g.incident(v) {
        if used[p] {
            continue;
        }
        let w = g.edge(p).other(v);
        if visited[w] {
            continue;
        }
        visited[w] = true;
        let free = match mate[w] {
            None => true,
            Some(q) => augment(g, used, g.edge(q).other(w), visited, mate),
        };
        if free {
            mate[v] = Some(p);
            mate[w] = Some(p);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_random_regular_bipartite;
    use crate::graph::test_graphs::*;

    /// Permanent of the bipartite adjacency matrix by inclusion-exclusion
    /// (Ryser), an independent count of perfect matchings.
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
        let mut total = 0;
        for mask in 1u32..(1 << n) {
            let mut prod = 1;
            for row in &a {
                prod *= (0..n)
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| row[j])
                    .sum::<i64>();
            }
            let sign = if (n - mask.count_ones() as usize) % 2 == 0 {
                1
            } else {
                -1
            };
            total += sign * prod;
        }
        total
    }

    #[test]
    fn verify_examples() {
        let g = k33();
        assert!(verify_factor(&g, &[], 0));
        assert!(verify_factor(&g, &(0..9).collect::<Vec<_>>(), 3));
        assert!(verify_factor(&g, &[0, 4, 8], 1));
        assert!(!verify_factor(&g, &[0, 4], 1));
        assert!(!verify_factor(&g, &[0, 0, 4, 8], 1));
        assert!(!verify_factor(&g, &[0, 4, 99], 1));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(count_k_factors(&k33(), 1).unwrap(), 6);
        assert_eq!(count_k_factors(&four_cycle(), 1).unwrap(), 2);
        assert_eq!(count_k_factors(&four_cycle(), 2).unwrap(), 1);
        assert_eq!(count_k_factors(&k33(), 0).unwrap(), 1);
        for seed in 0..10 {
            let g = gen_random_regular_bipartite(5, 3, seed);
            assert_eq!(count_k_factors(&g, 1).unwrap() as i64, ryser(&g));
        }
        let big = gen_random_regular_bipartite(20, 3, 0);
        assert!(matches!(
            enumerate_k_factors(&big, 1),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn colouring_examples() {
        let classes = edge_color_regular_bipartite(&k33(), 3).unwrap();
        assert_eq!(classes.len(), 3);
        for c in &classes {
            assert!(verify_factor(&k33(), c, 1));
        }
        let triple = BipartiteMultigraph::from_pairs(1, 1, [(0, 1), (0, 1), (0, 1)]).unwrap();
        let classes = edge_color_regular_bipartite(&triple, 3).unwrap();
        assert_eq!(classes, vec![vec![0], vec![1], vec![2]]);
        let cyc = even_cycle(4);
        assert_eq!(edge_color_regular_bipartite(&cyc, 2).unwrap().len(), 2);
        let g = gen_random_regular_bipartite(40, 5, 2);
        let classes = edge_color_regular_bipartite(&g, 5).unwrap();
        let union: Vec<_> = classes[..3].concat();
        assert!(verify_factor(&g, &union, 3));
    }
}
