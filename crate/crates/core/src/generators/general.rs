use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::UndirectedMultigraph;

/// Union of `degree / 2` uniform random derangements `v -> π(v)`, giving a
/// loopless `degree`-regular multigraph on `n >= 2` vertices.
pub fn gen_random_regular_multigraph(
    n: usize,
    degree: usize,
    seed: u64,
) -> Result<UndirectedMultigraph> {
    if degree % 2 != 0 || n < 2 {
        return Err(Error::Argument(
            "need an even degree and at least 2 vertices".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut pairs = Vec::with_capacity(n * degree / 2);
    for _ in 0..degree / 2 {
        loop {
            perm.shuffle(&mut rng);
            if perm.iter().enumerate().all(|(v, &w)| v != w) {
                break;
            }
        }
        pairs.extend(perm.iter().enumerate().map(|(v, &w)| (v, w)));
    }
    UndirectedMultigraph::from_pairs(n, pairs)
}

/// Union of `cycles` random cycles of length 2 to 8 on distinct vertices,
/// so every degree is even but the graph is generally irregular.
pub fn gen_random_even_graph(n: usize, cycles: usize, seed: u64) -> Result<UndirectedMultigraph> {
    if n < 2 {
        return Err(Error::Argument("need at least 2 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for _ in 0..cycles {
        let len = rng.gen_range(2..=n.min(8));
        let vs = index::sample(&mut rng, n, len).into_vec();
        for i in 0..len {
            pairs.push((vs[i], vs[(i + 1) % len]));
        }
    }
    UndirectedMultigraph::from_pairs(n, pairs)
}
