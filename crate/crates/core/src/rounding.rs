//! Rounding a fractional matching by alternating updates around even cycles
//! of its support until the support is a forest, and resolving the path
//! components that remain.
//!
//! Only cycles through non-boundary vertices are eligible. Weights on edges
//! at boundary vertices are never changed here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BipartiteMultigraph, EdgeId, FractionalMatching, SupportSubgraph, VertexId};
use crate::tree_matching::SupportForest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increase,
    Decrease,
}

/// Alternating update of `step / denominator` around an even cycle.
///
/// `cycle` holds edge positions in walk order starting with the selected edge;
/// edges at even offsets move in `direction`, the others in the opposite one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleUpdate {
    cycle: Vec<usize>,
    direction: Direction,
    step: u64,
}

impl CycleUpdate {
    /// Validates that `cycle` is a simple closed walk and rotates it so that
    /// `selected` comes first.
    pub fn new(
        g: &BipartiteMultigraph,
        cycle: Vec<usize>,
        selected: usize,
        direction: Direction,
        step: u64,
    ) -> Result<Self> {
        if step == 0 {
            return Err(Error::Argument("step must be at least 1".into()));
        }
        if cycle_vertices(g, &cycle).is_none() {
            return Err(Error::Argument(format!(
                "edges {:?} do not form a simple cycle",
                cycle.iter().map(|&p| g.edge(p).id).collect::<Vec<_>>()
            )));
        }
        let at = cycle
            .iter()
            .position(|&p| p == selected)
            .ok_or_else(|| Error::Argument("selected edge is not on the cycle".into()))?;
        let mut cycle = cycle;
        cycle.rotate_left(at);
        Ok(Self {
            cycle,
            direction,
            step,
        })
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    pub fn selected(&self) -> usize {
        self.cycle[0]
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Edge positions whose weight goes down, then those that go up.
    fn split(&self) -> (Vec<usize>, Vec<usize>) {
        let (mut down, mut up) = (Vec::new(), Vec::new());
        for (i, &p) in self.cycle.iter().enumerate() {
            let with_selected = i % 2 == 0;
            match (self.direction, with_selected) {
                (Direction::Decrease, true) | (Direction::Increase, false) => down.push(p),
                _ => up.push(p),
            }
        }
        (down, up)
    }
}

/// Vertices of a simple closed walk through the given edges, or `None`.
fn cycle_vertices(g: &BipartiteMultigraph, cycle: &[usize]) -> Option<Vec<VertexId>> {
    if cycle.len() < 2 || cycle.len() % 2 != 0 {
        return None;
    }
    let first = g.edge(cycle[0]);
    'start: for start in [first.left, first.right] {
        let mut seen = Vec::with_capacity(cycle.len());
        let mut cur = start;
        for &p in cycle {
            let e = g.edge(p);
            if !e.touches(cur) || seen.contains(&cur) {
                continue 'start;
            }
            seen.push(cur);
            cur = e.other(cur);
        }
        if cur == start {
            return Some(seen);
        }
    }
    None
}

/// `apply_cycle_update`: fails with a range error if an edge would leave
/// [0, 1], and with an argument error if the cycle leaves the support.
pub fn apply_cycle_update<'g>(
    f: &FractionalMatching<'g>,
    u: &CycleUpdate,
) -> Result<FractionalMatching<'g>> {
    let mut out = f.clone();
    apply_in_place(&mut out, u)?;
    Ok(out)
}

fn apply_in_place(f: &mut FractionalMatching<'_>, u: &CycleUpdate) -> Result<()> {
    let g = f.graph();
    if let Some(&p) = u.cycle.iter().find(|&&p| !f.is_fractional(p)) {
        return Err(Error::Argument(format!(
            "edge {} is not in the support",
            g.edge(p).id
        )));
    }
    let (down, up) = u.split();
    let den = f.denominator();
    let out_of_range = down
        .iter()
        .find(|&&p| f.numerator(p) < u.step)
        .or_else(|| up.iter().find(|&&p| f.numerator(p) + u.step > den));
    if let Some(&p) = out_of_range {
        return Err(Error::Range {
            edge: g.edge(p).id,
            step: u.step,
            denominator: den,
        });
    }
    for &p in &down {
        f.set_numerator(p, f.numerator(p) - u.step);
    }
    for &p in &up {
        f.set_numerator(p, f.numerator(p) + u.step);
    }
    Ok(())
}

/// Largest step that keeps `cycle` (selected edge first) within [0, 1] when
/// the selected edge decreases. At least one edge then reaches 0 or 1.
fn saturating_step(f: &FractionalMatching<'_>, cycle: &[usize]) -> u64 {
    let den = f.denominator();
    cycle
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if i % 2 == 0 {
                f.numerator(p)
            } else {
                den - f.numerator(p)
            }
        })
        .min()
        .expect("cycles are non-empty")
}

fn eligible(g: &BipartiteMultigraph, f: &FractionalMatching<'_>, p: usize) -> bool {
    let e = g.edge(p);
    f.is_fractional(p) && !g.is_boundary(e.left) && !g.is_boundary(e.right)
}

/// Depth-first search for a cycle among eligible support edges, visiting
/// start vertices in `order` and edges smallest-id first. Vertices with
/// `blocked[v]` are skipped.
fn dfs_cycle(
    f: &FractionalMatching<'_>,
    order: impl Iterator<Item = VertexId>,
    blocked: &[bool],
) -> Option<Vec<usize>> {
    let g = f.graph();
    let n = g.vertex_count();
    // 0 = unseen, 1 = on stack, 2 = finished
    let mut state = vec![0u8; n];
    let mut via = vec![usize::MAX; n];
    for root in order {
        if state[root] != 0 || blocked[root] || g.is_boundary(root) {
            continue;
        }
        let mut stack: Vec<(VertexId, usize)> = vec![(root, 0)];
        state[root] = 1;
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            let inc = g.incident(v);
            if *next == inc.len() {
                state[v] = 2;
                stack.pop();
                continue;
            }
            let p = inc[*next];
            *next += 1;
            if p == via[v] || !eligible(g, f, p) {
                continue;
            }
            let w = g.edge(p).other(v);
            if blocked[w] {
                continue;
            }
            match state[w] {
                0 => {
                    state[w] = 1;
                    via[w] = p;
                    stack.push((w, 0));
                }
                1 => {
                    // unwind from v back to w along tree edges
                    let mut cycle = vec![p];
                    let mut x = v;
                    while x != w {
                        let q = via[x];
                        cycle.push(q);
                        x = g.edge(q).other(x);
                    }
                    return Some(cycle);
                }
                _ => {}
            }
        }
    }
    None
}

fn saturating_update(f: &FractionalMatching<'_>, cycle: Vec<usize>) -> CycleUpdate {
    let selected = *cycle.iter().min().expect("non-empty");
    let at = cycle.iter().position(|&p| p == selected).unwrap();
    let mut cycle = cycle;
    cycle.rotate_left(at);
    let step = saturating_step(f, &cycle);
    CycleUpdate {
        cycle,
        direction: Direction::Decrease,
        step,
    }
}

/// `find_support_cycle`: some cycle of eligible support edges, with the
/// smallest-id edge selected, direction decrease and the saturating step.
pub fn find_support_cycle(f: &FractionalMatching<'_>) -> Option<CycleUpdate> {
    let n = f.graph().vertex_count();
    dfs_cycle(f, 0..n, &vec![false; n]).map(|c| saturating_update(f, c))
}

/// One line of a rounding trace.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub round: usize,
    pub cycle: Vec<EdgeId>,
    pub direction: Direction,
    pub step: u64,
    pub support_size: usize,
}

fn event(
    g: &BipartiteMultigraph,
    round: usize,
    u: &CycleUpdate,
    f: &FractionalMatching<'_>,
) -> TraceEvent {
    TraceEvent {
        round,
        cycle: u.cycle.iter().map(|&p| g.edge(p).id).collect(),
        direction: u.direction,
        step: u.step,
        support_size: SupportSubgraph::of(f).len(),
    }
}

/// `round_to_acyclic`: saturating cycle updates until the support restricted
/// to non-boundary vertices is a forest.
pub fn round_to_acyclic<'g>(f: &FractionalMatching<'g>) -> FractionalMatching<'g> {
    round_to_acyclic_traced(f, |_, _| {})
}

/// As [`round_to_acyclic`], calling `observe` after every update with the
/// event and the matching it produced.
///
/// Eligible support edges are inserted into a spanning forest in id order.
/// An edge closing a cycle triggers a saturating update on that cycle (the
/// selected edge is the smallest-id forest edge on it); saturated edges
/// leave the forest. Each update removes at least one edge from the support,
/// so there are at most `|E|` updates.
pub fn round_to_acyclic_traced<'g>(
    f: &FractionalMatching<'g>,
    mut observe: impl FnMut(&TraceEvent, &FractionalMatching<'g>),
) -> FractionalMatching<'g> {
    let g = f.graph();
    let mut f = f.clone();
    let mut forest: Vec<Vec<usize>> = vec![Vec::new(); g.vertex_count()];
    let mut search = PathSearch::new(g.vertex_count());
    let mut round = 0;
    for p in 0..g.edge_count() {
        if !eligible(g, &f, p) {
            continue;
        }
        let e = *g.edge(p);
        if let Some(path) = search.path(g, &forest, e.left, e.right) {
            let mut cycle = path;
            cycle.push(p);
            let u = saturating_update(&f, cycle);
            apply_in_place(&mut f, &u).expect("saturating step stays in range");
            for &q in &u.cycle {
                if q != p && !f.is_fractional(q) {
                    let eq = g.edge(q);
                    forest[eq.left].retain(|&x| x != q);
                    forest[eq.right].retain(|&x| x != q);
                }
            }
            round += 1;
            observe(&event(g, round, &u, &f), &f);
        }
        if f.is_fractional(p) {
            forest[e.left].push(p);
            forest[e.right].push(p);
        }
    }
    f
}

/// Breadth-first path search in a forest given by per-vertex edge lists,
/// reusing its scratch buffers between calls.
struct PathSearch {
    stamp: Vec<u32>,
    via: Vec<usize>,
    generation: u32,
    queue: std::collections::VecDeque<VertexId>,
}

impl PathSearch {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            via: vec![usize::MAX; n],
            generation: 0,
            queue: Default::default(),
        }
    }

    /// Edge positions of the forest path from `to` back to `from`, if any.
    fn path(
        &mut self,
        g: &BipartiteMultigraph,
        forest: &[Vec<usize>],
        from: VertexId,
        to: VertexId,
    ) -> Option<Vec<usize>> {
        self.generation += 1;
        let gen = self.generation;
        self.queue.clear();
        self.queue.push_back(from);
        self.stamp[from] = gen;
        self.via[from] = usize::MAX;
        while let Some(v) = self.queue.pop_front() {
            if v == to {
                let mut path = Vec::new();
                let mut x = to;
                while x != from {
                    let q = self.via[x];
                    path.push(q);
                    x = g.edge(q).other(x);
                }
                return Some(path);
            }
            for &q in &forest[v] {
                let w = g.edge(q).other(v);
                if self.stamp[w] != gen {
                    self.stamp[w] = gen;
                    self.via[w] = q;
                    self.queue.push_back(w);
                }
            }
        }
        None
    }
}

/// One entry of a σ schedule: which cycle class to process and whether the
/// selected edge goes down (`true`) or up (`false`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SigmaStep {
    pub color: u64,
    pub decrease: bool,
}

/// Uniformly random σ schedule from `seed`.
pub fn random_sigma(seed: u64) -> impl Iterator<Item = SigmaStep> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    std::iter::from_fn(move || {
        Some(SigmaStep {
            color: rng.gen(),
            decrease: rng.gen(),
        })
    })
}

/// `sigma_round`: `steps` rounds; in each, a maximal vertex-disjoint family of
/// eligible support cycles is packed greedily (search starting at vertex
/// `color mod |V|`, smallest id first) and every packed cycle gets a single
/// `±1/denominator` alternation, its smallest-id edge moving as the round's
/// bit says.
pub fn sigma_round<'g>(
    f: &FractionalMatching<'g>,
    sigma: impl IntoIterator<Item = SigmaStep>,
    steps: usize,
) -> FractionalMatching<'g> {
    sigma_round_traced(f, sigma, steps, |_, _| {})
}

pub fn sigma_round_traced<'g>(
    f: &FractionalMatching<'g>,
    sigma: impl IntoIterator<Item = SigmaStep>,
    steps: usize,
    mut observe: impl FnMut(&TraceEvent, &FractionalMatching<'g>),
) -> FractionalMatching<'g> {
    let g = f.graph();
    let n = g.vertex_count();
    let mut f = f.clone();
    for (round, s) in sigma.into_iter().take(steps).enumerate() {
        if n == 0 {
            break;
        }
        let start = (s.color % n as u64) as usize;
        let mut blocked = vec![false; n];
        let mut packed = Vec::new();
        while let Some(cycle) = dfs_cycle(&f, (start..n).chain(0..start), &blocked) {
            for &p in &cycle {
                let e = g.edge(p);
                blocked[e.left] = true;
                blocked[e.right] = true;
            }
            packed.push(cycle);
        }
        for cycle in packed {
            let selected = *cycle.iter().min().expect("non-empty");
            let direction = if s.decrease {
                Direction::Decrease
            } else {
                Direction::Increase
            };
            let u = CycleUpdate::new(g, cycle, selected, direction, 1)
                .expect("search returns simple cycles");
            apply_in_place(&mut f, &u).expect("unit steps stay inside the support");
            observe(&event(g, round + 1, &u, &f), &f);
        }
    }
    f
}

/// `resolve_path_components`: on every support component that is a path
/// through non-boundary vertices of support degree 2 (ending at boundary
/// vertices), round to the nearest integer when the denominator is odd, or
/// set every weight to 1/2 when it is even. The interior support must be a
/// forest.
pub fn resolve_path_components<'g>(f: &FractionalMatching<'g>) -> Result<FractionalMatching<'g>> {
    let sf = SupportForest::extract(f)?;
    let den = f.denominator();
    let mut out = f.clone();
    for comp in sf.components() {
        if !sf.is_path_component(&comp) {
            continue;
        }
        for fp in sf.component_edges(&comp) {
            let p = sf.edge_origin(fp);
            let w = f.numerator(p);
            let value = if den % 2 == 1 {
                match (2 * w).cmp(&den) {
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Greater => den,
                    std::cmp::Ordering::Equal => {
                        return Err(Error::InvariantViolation(format!(
                            "edge {} has weight exactly 1/2 on an odd grid",
                            f.graph().edge(p).id
                        )))
                    }
                }
            } else {
                den / 2
            };
            out.set_numerator(p, value);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::test_graphs::*;

    fn k33_third(g: &BipartiteMultigraph) -> FractionalMatching<'_> {
        FractionalMatching::uniform(g, 1, 3, 1).unwrap()
    }

    #[test]
    fn k33_four_cycle_update() {
        // a=0, b=1 (left); x=3, y=4 (right); position = 3*left + (right-3)
        let g = k33();
        let f = k33_third(&g);
        // a-x (0), x-b (3), b-y (4), y-a (1)
        let u = CycleUpdate::new(&g, vec![0, 3, 4, 1], 0, Direction::Decrease, 1).unwrap();
        let h = apply_cycle_update(&f, &u).unwrap();
        assert_eq!(h.numerators(), &[0, 2, 1, 2, 0, 1, 1, 1, 1]);
        assert!(h.is_valid());
    }

    #[test]
    fn four_cycle_saturates_both_ways() {
        let g = four_cycle();
        let f = FractionalMatching::uniform(&g, 1, 2, 1).unwrap();
        let up = CycleUpdate::new(&g, vec![0, 1, 2, 3], 0, Direction::Increase, 1).unwrap();
        let down = CycleUpdate::new(&g, vec![0, 1, 2, 3], 0, Direction::Decrease, 1).unwrap();
        let a = apply_cycle_update(&f, &up).unwrap();
        let b = apply_cycle_update(&f, &down).unwrap();
        assert_eq!(a.numerators(), &[2, 0, 2, 0]);
        assert_eq!(b.numerators(), &[0, 2, 0, 2]);
        assert!(a.is_valid() && b.is_valid());
    }

    #[test]
    fn oversized_step_is_a_range_error() {
        let g = four_cycle();
        let f = FractionalMatching::uniform(&g, 1, 2, 1).unwrap();
        let u = CycleUpdate::new(&g, vec![0, 1, 2, 3], 0, Direction::Decrease, 2).unwrap();
        assert!(matches!(
            apply_cycle_update(&f, &u),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn non_cycles_rejected() {
        let g = k33();
        assert!(CycleUpdate::new(&g, vec![0, 3, 4], 0, Direction::Decrease, 1).is_err());
        assert!(CycleUpdate::new(&g, vec![0, 1, 3, 4], 0, Direction::Decrease, 1).is_err());
        let g = BipartiteMultigraph::from_pairs(1, 1, [(0, 1), (0, 1)]).unwrap();
        assert!(CycleUpdate::new(&g, vec![0, 1], 1, Direction::Decrease, 1).is_ok());
    }

    #[test]
    fn find_cycle_examples() {
        let g = four_cycle();
        let f = FractionalMatching::uniform(&g, 1, 2, 1).unwrap();
        let u = find_support_cycle(&f).unwrap();
        let mut c = u.cycle().to_vec();
        c.sort();
        assert_eq!(c, vec![0, 1, 2, 3]);
        assert_eq!(u.step(), 1);

        let g = k33();
        let f = k33_third(&g);
        let u = find_support_cycle(&f).unwrap();
        assert_eq!(u.cycle().len(), 4);
        assert_eq!(u.selected(), *u.cycle().iter().min().unwrap());
        assert_eq!(u.step(), 1);

        let f = FractionalMatching::indicator(&g, [0, 4, 8], 1);
        assert!(find_support_cycle(&f).is_none());
    }

    #[test]
    fn k33_rounds_to_a_perfect_matching() {
        let g = k33();
        let f = k33_third(&g);
        let mut updates = 0;
        let h = round_to_acyclic_traced(&f, |_, step| {
            updates += 1;
            assert!(step.is_valid());
        });
        assert!(h.is_integral() && h.is_valid());
        assert!(updates <= g.edge_count());
        assert_eq!(h.ones().len(), 3);
    }

    #[test]
    fn integral_input_is_a_fixed_point() {
        let g = k33();
        let f = FractionalMatching::indicator(&g, [0, 4, 8], 1);
        assert_eq!(round_to_acyclic(&f), f);
        let sigma = random_sigma(1);
        assert_eq!(sigma_round(&f, sigma, 20), f);
    }

    #[test]
    fn sigma_single_round_on_four_cycle() {
        let g = four_cycle();
        let f = FractionalMatching::uniform(&g, 1, 2, 1).unwrap();
        let h = sigma_round(
            &f,
            [SigmaStep {
                color: 0,
                decrease: true,
            }],
            1,
        );
        assert!(h.is_integral() && h.is_valid());
        assert_eq!(h.numerator(0), 0);
    }

    #[test]
    fn sigma_stabilizes_on_k33() {
        let g = k33();
        let f = k33_third(&g);
        for seed in 0..100 {
            let h = sigma_round(&f, random_sigma(seed), 200);
            assert!(h.is_valid());
            assert!(SupportSubgraph::of(&h).is_acyclic(), "seed {seed}");
            assert_eq!(sigma_round(&h, random_sigma(seed + 1000), 5), h);
        }
    }

    #[test]
    fn path_resolution_odd_and_even() {
        // path window: boundary L0 - R1 - L2 - R3 - L4 boundary, edges 0..4
        let g = BipartiteMultigraph::from_pairs(3, 2, [(0, 3), (3, 1), (1, 4), (4, 2)])
            .unwrap()
            .with_boundary([0, 2]);
        let f = FractionalMatching::new(&g, 3, vec![1, 2, 1, 2], 1).unwrap();
        let h = resolve_path_components(&f).unwrap();
        assert_eq!(h.numerators(), &[0, 3, 0, 3]);
        assert!(h.is_valid());

        let g = BipartiteMultigraph::from_pairs(2, 2, [(0, 2), (2, 1), (1, 3)])
            .unwrap()
            .with_boundary([0, 3]);
        let f = FractionalMatching::new(&g, 4, vec![1, 3, 1], 1).unwrap();
        let h = resolve_path_components(&f).unwrap();
        assert_eq!(h.numerators(), &[2, 2, 2]);
        assert!(h.is_valid());

        let g = k33();
        let f = FractionalMatching::indicator(&g, [0, 4, 8], 1);
        assert_eq!(resolve_path_components(&f).unwrap(), f);
    }
}
