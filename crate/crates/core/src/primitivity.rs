//! Primitivity in the zero-row/zero-column tolerant sense: `Aⁿ ≥ E(A)` for all large `n`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{domain, resource, Result};
use crate::matrix::{BoolMatrix, CountMatrix};

/// Default cap on the number of powers computed before giving up.
pub const DEFAULT_MAX_STEPS: usize = 1 << 16;

/// `e_{i,j} = 1` unless row `i` or column `j` of `a` is zero.
pub fn saturated(a: &BoolMatrix) -> BoolMatrix {
    let rows = a.row_support();
    let cols = a.col_support();
    BoolMatrix::from_fn(a.dim(), |i, j| rows[i] && cols[j])
}

/// `m_{i,j} = 1` iff block `(i, j)` has a positive entry.
pub fn indicator(blocks: &[Vec<CountMatrix>]) -> Result<BoolMatrix> {
    let n = blocks.len();
    let size = blocks.first().and_then(|r| r.first()).map(|b| b.dim());
    for row in blocks {
        if row.len() != n || row.iter().any(|b| Some(b.dim()) != size) {
            return domain("indicator needs a square array of equally sized blocks");
        }
    }
    Ok(BoolMatrix::from_fn(n, |i, j| blocks[i][j].entry_sum() > 0))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimitivityReport {
    pub primitive: bool,
    /// Least `n` with `Aᵐ ≥ E(A)` for every `m ≥ n`.
    pub n0: Option<usize>,
    /// First exponent of the periodic part of `A, A², …`.
    pub transient: usize,
    pub period: usize,
}

pub fn primitivity_analysis(a: &BoolMatrix) -> Result<PrimitivityReport> {
    primitivity_analysis_capped(a, DEFAULT_MAX_STEPS)
}

/// Runs the boolean power sequence until a repeat, verified by recomputing the earlier power.
pub fn primitivity_analysis_capped(a: &BoolMatrix, max_steps: usize) -> Result<PrimitivityReport> {
    let target = saturated(a);
    let mut seen: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut dominated = Vec::new();
    let mut power = a.clone();
    let mut n = 1;
    let (transient, period) = loop {
        if n > max_steps {
            return resource(format!("power sequence did not repeat within {max_steps} steps"));
        }
        let h = power.hash64();
        if let Some(earlier) = seen.get(&h).and_then(|list| list.iter().copied().find(|&e| a.pow(e) == power)) {
            break (earlier, n - earlier);
        }
        seen.entry(h).or_default().push(n);
        dominated.push(power.dominates(&target));
        power = power.mul(a);
        n += 1;
    };
    // dominated[e - 1] covers exponent e for e in [1, transient + period).
    let periodic_ok = dominated[transient - 1..].iter().all(|&d| d);
    if !periodic_ok {
        return Ok(PrimitivityReport { primitive: false, n0: None, transient, period });
    }
    let mut n0 = transient;
    while n0 > 1 && dominated[n0 - 2] {
        n0 -= 1;
    }
    Ok(PrimitivityReport { primitive: true, n0: Some(n0), transient, period })
}

/// Primitive with `Aⁿ ≥ E(A)` for every `n ≥ big_n`.
pub fn is_n_primitive(a: &BoolMatrix, big_n: usize) -> Result<bool> {
    let r = primitivity_analysis(a)?;
    Ok(r.primitive && r.n0.is_some_and(|n0| n0 <= big_n))
}

/// Least `N ≤ cap` with `A^N ≥ target`.
pub fn dominance_exponent(a: &BoolMatrix, target: &BoolMatrix, cap: usize) -> Option<usize> {
    let mut power = a.clone();
    for n in 1..=cap {
        if power.dominates(target) {
            return Some(n);
        }
        power = power.mul(a);
    }
    None
}
