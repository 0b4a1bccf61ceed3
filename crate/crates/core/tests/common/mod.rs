//! Helpers shared by the property and acceptance suites.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sft_core::basic_set::{BasicSet, Mode};
use sft_core::catalog;
use sft_core::matrix::BoolMatrix;
use sft_core::primitivity::saturated;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each of the `p⁴` windows kept independently with probability `density`.
pub fn random_set(rng: &mut ChaCha8Rng, p: usize, density: f64) -> BasicSet {
    let keep: Vec<bool> = (0..p.pow(4)).map(|_| rng.gen_bool(density)).collect();
    BasicSet::from_predicate(p, Mode::Vertex, |t| {
        let c = t.iter().fold(0usize, |acc, &u| acc * p + u as usize);
        keep[c]
    })
    .unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, density: f64) -> BoolMatrix {
    let bits: Vec<bool> = (0..dim * dim).map(|_| rng.gen_bool(density)).collect();
    BoolMatrix::from_fn(dim, |i, j| bits[i * dim + j])
}

/// Example sets over the binary alphabet, vertex mode.
pub fn binary_examples() -> Vec<(&'static str, BasicSet)> {
    [
        "golden-mean",
        "simplified-golden-mean",
        "cycle-and-pair",
        "diagonal-order",
        "hole-filling-33",
        "hole-filling-44",
        "boyle",
        "ledrappier-variant",
        "two-constants",
    ]
    .into_iter()
    .map(|n| (n, catalog::by_name(n).unwrap()))
    .collect()
}

/// Primitivity and `n0` from the first `dim² + dim` powers alone.
pub fn direct_primitivity(a: &BoolMatrix) -> (bool, Option<usize>) {
    let dim = a.dim();
    let top = dim * dim + dim;
    let target = saturated(a);
    let mut power = a.clone();
    let mut ok = Vec::with_capacity(top);
    for _ in 0..top {
        ok.push(power.dominates(&target));
        power = power.mul(a);
    }
    if !ok[dim * dim..].iter().all(|&d| d) {
        return (false, None);
    }
    let mut n0 = dim * dim + 1;
    while n0 > 1 && ok[n0 - 2] {
        n0 -= 1;
    }
    (true, Some(n0))
}

/// Hole sizes `(k, M, N)` with `k ≤ 3` and `(M, N) ≤ (3, 3)` that fit the width.
pub const HOLE_SIZES: &[(usize, usize, usize)] =
    &[(2, 1, 1), (2, 1, 2), (2, 2, 1), (2, 2, 2), (2, 1, 3), (2, 3, 1), (2, 2, 3), (2, 3, 2), (2, 3, 3), (3, 3, 3)];
