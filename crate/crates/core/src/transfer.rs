//! Higher-order transition matrices, block addressing and elementary patterns.

use serde::{Deserialize, Serialize};

use crate::basic_set::{code, digits, pow, BasicSet};
use crate::error::{domain, resource, Result};
use crate::matrix::{BoolMatrix, CountMatrix};

/// Horizontal matrices chain columns left to right; vertical ones chain rows bottom to top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "H")]
    Horizontal,
    #[serde(rename = "V")]
    Vertical,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Horizontal => Direction::Vertical,
            Direction::Vertical => Direction::Horizontal,
        }
    }

    pub fn letter(self) -> &'static str {
        match self {
            Direction::Horizontal => "H",
            Direction::Vertical => "V",
        }
    }
}

/// Largest matrix dimension any builder will allocate by default.
pub const DEFAULT_MAX_DIM: usize = 1 << 12;
/// Hard ceiling on matrix dimension.
pub const HARD_MAX_DIM: usize = 1 << 16;

/// Largest `n` with `p^n ≤ max_dim`.
pub fn max_order(p: usize, max_dim: usize) -> usize {
    let mut n = 0;
    while pow(p, n + 1) <= max_dim {
        n += 1;
    }
    n
}

pub(crate) fn check_dim(p: usize, n: usize, max_dim: usize) -> Result<usize> {
    let cap = max_dim.min(HARD_MAX_DIM);
    match p.checked_pow(n as u32) {
        Some(d) if d <= cap => Ok(d),
        _ => resource(format!("{p}^{n} exceeds the dimension cap {cap}")),
    }
}

/// The pair of 2-order tables driving a direction: the one being chained and the cross one.
pub(crate) fn oriented_pair(b: &BasicSet, dir: Direction) -> Result<(BoolMatrix, BoolMatrix)> {
    let (h2, v2) = b.transition_pair()?;
    Ok(match dir {
        Direction::Horizontal => (h2, v2),
        Direction::Vertical => (v2, h2),
    })
}

/// One recursion step: order `k` from order `k-1`, scaling each block by the cross table.
fn step(prev: &BoolMatrix, cross: &BoolMatrix, p: usize) -> BoolMatrix {
    let sub = prev.dim();
    let subsub = sub / p;
    BoolMatrix::from_fn(sub * p, |i, j| {
        let (a, ri) = (i / sub, i % sub);
        let (b, rj) = (j / sub, j % sub);
        let (c, d) = (ri / subsub, rj / subsub);
        cross.get(a * p + b, c * p + d) && prev.get(ri, rj)
    })
}

/// All orders `2..=n_max` from the tables; index `n - 2`.
pub(crate) fn transition_chain(base: &BoolMatrix, cross: &BoolMatrix, p: usize, n_max: usize) -> Vec<BoolMatrix> {
    let mut out = vec![base.clone()];
    for _ in 3..=n_max {
        let next = step(out.last().expect("nonempty"), cross, p);
        out.push(next);
    }
    out
}

/// `H_n` (or `V_n`) with the default dimension cap.
pub fn build_transition(b: &BasicSet, dir: Direction, n: usize) -> Result<BoolMatrix> {
    build_transition_capped(b, dir, n, DEFAULT_MAX_DIM)
}

pub fn build_transition_capped(b: &BasicSet, dir: Direction, n: usize, max_dim: usize) -> Result<BoolMatrix> {
    if n < 2 {
        return domain("transition order must be at least 2");
    }
    check_dim(b.p(), n, max_dim)?;
    let (base, cross) = oriented_pair(b, dir)?;
    Ok(transition_chain(&base, &cross, b.p(), n).pop().expect("nonempty"))
}

/// Lazily grown cache of `H_n` for one basic set and direction.
#[derive(Clone, Debug)]
pub struct TransitionCache {
    p: usize,
    cross: BoolMatrix,
    orders: Vec<BoolMatrix>,
    max_dim: usize,
}

impl TransitionCache {
    pub fn new(b: &BasicSet, dir: Direction) -> Result<Self> {
        let (base, cross) = oriented_pair(b, dir)?;
        Ok(TransitionCache { p: b.p(), cross, orders: vec![base], max_dim: DEFAULT_MAX_DIM })
    }

    pub fn with_max_dim(mut self, max_dim: usize) -> Self {
        self.max_dim = max_dim;
        self
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&mut self, n: usize) -> Result<&BoolMatrix> {
        if n < 2 {
            return domain("transition order must be at least 2");
        }
        check_dim(self.p, n, self.max_dim)?;
        while self.orders.len() < n - 1 {
            let next = step(self.orders.last().expect("nonempty"), &self.cross, self.p);
            self.orders.push(next);
        }
        Ok(&self.orders[n - 2])
    }
}

/// Block `(a, b)` of a matrix viewed as a `p×p` array of blocks; symbols are 0-based.
pub fn block(m: &BoolMatrix, p: usize, a: usize, b: usize) -> BoolMatrix {
    let size = m.dim() / p;
    m.submatrix(a * size, b * size, size)
}

/// Block `α` (1-based, `α = ψ(a, b)`) of a matrix viewed as a `p×p` array of blocks.
pub fn block_alpha(m: &BoolMatrix, p: usize, alpha: usize) -> BoolMatrix {
    let d = digits(alpha - 1, 2, p);
    block(m, p, d[0] as usize, d[1] as usize)
}

/// Sequence `β_1 … β_{q+1}` of 1-based indices in `[1, p²]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPath(pub Vec<usize>);

impl BlockPath {
    /// The path addressing entry `(i, j)` of an order-`(q+1)` matrix, `β_l = ψ(i_l, j_l)`.
    pub fn from_entry(i: usize, j: usize, q: usize, p: usize) -> Result<BlockPath> {
        let size = pow(p, q + 1);
        if i == 0 || j == 0 || i > size || j > size {
            return domain(format!("entry ({i},{j}) outside [1,{size}]"));
        }
        let di = digits(i - 1, q + 1, p);
        let dj = digits(j - 1, q + 1, p);
        Ok(BlockPath(di.iter().zip(&dj).map(|(&a, &b)| code(&[a, b], p) + 1).collect()))
    }

    /// Row and column symbol sequences `(i_l)`, `(j_l)`.
    pub fn split(&self, p: usize) -> (Vec<u8>, Vec<u8>) {
        self.0
            .iter()
            .map(|&beta| {
                let d = digits(beta - 1, 2, p);
                (d[0], d[1])
            })
            .unzip()
    }
}

/// Result of addressing a block through a path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AddressedBlock {
    pub block: BoolMatrix,
    /// Product of cross-table entries along consecutive path steps.
    pub scalar: bool,
}

/// The `p^{n-1}`-square block of `H_{n+q}` addressed by `path` (length `q+1`).
pub fn block_at(b: &BasicSet, dir: Direction, hnq: &BoolMatrix, path: &BlockPath, n: usize) -> Result<AddressedBlock> {
    let p = b.p();
    let q1 = path.0.len();
    if q1 == 0 || n < 2 || pow(p, n - 1 + q1) != hnq.dim() {
        return domain("path length inconsistent with matrix dimension");
    }
    if path.0.iter().any(|&beta| beta == 0 || beta > p * p) {
        return domain("path index outside [1, p^2]");
    }
    let (_, cross) = oriented_pair(b, dir)?;
    let (is, js) = path.split(p);
    let size = pow(p, n - 1);
    let block = hnq.submatrix(code(&is, p) * size, code(&js, p) * size, size);
    let scalar = path.0.windows(2).all(|w| cross.get(w[0] - 1, w[1] - 1));
    Ok(AddressedBlock { block, scalar })
}

/// Checks the order-reduction identity: `H_{n+q}` against the assembly from
/// `H_{q+1}` and the blocks `H_{n;i',j'}`.
pub fn verify_reduction(b: &BasicSet, dir: Direction, n: usize, q: usize) -> Result<bool> {
    if n < 2 || q < 1 {
        return domain("need n ≥ 2 and q ≥ 1");
    }
    let p = b.p();
    let big = build_transition(b, dir, n + q)?;
    let top = build_transition(b, dir, q + 1)?;
    let low = build_transition(b, dir, n)?;
    let size = pow(p, n - 1);
    let assembled = BoolMatrix::from_fn(big.dim(), |i, j| {
        let (ti, ri) = (i / size, i % size);
        let (tj, rj) = (j / size, j % size);
        top.get(ti, tj) && low.get((ti % p) * size + ri, (tj % p) * size + rj)
    });
    Ok(assembled == big)
}

/// `H^{(k)}_{m,n;α}` from an already built `H_n`; `alpha0`, `k0` are 0-based.
pub(crate) fn elementary_from(hn: &BoolMatrix, p: usize, m: usize, alpha0: usize, k0: usize) -> CountMatrix {
    let ends = digits(alpha0, 2, p);
    let mut js = vec![ends[0]];
    js.extend(digits(k0, m - 1, p));
    js.push(ends[1]);
    let size = hn.dim() / p;
    let mut acc = CountMatrix::identity(size);
    for w in js.windows(2) {
        acc = acc.mul(&CountMatrix::from_bool(&block(hn, p, w[0] as usize, w[1] as usize)));
    }
    acc
}

/// Boolean shadow of [`elementary_from`].
pub(crate) fn elementary_bool(hn: &BoolMatrix, p: usize, m: usize, alpha0: usize, k0: usize) -> BoolMatrix {
    let ends = digits(alpha0, 2, p);
    let mut js = vec![ends[0]];
    js.extend(digits(k0, m - 1, p));
    js.push(ends[1]);
    let mut acc = block(hn, p, js[0] as usize, js[1] as usize);
    for w in js[1..].windows(2) {
        acc = acc.mul(&block(hn, p, w[0] as usize, w[1] as usize));
    }
    acc
}

/// Elementary pattern `H^{(k)}_{m,n;α}`: product of the blocks of `H_n` along
/// the bottom row `(j_1, …, j_{m+1})` decoded from `α` and `k` (1-based).
pub fn elementary_pattern(b: &BasicSet, dir: Direction, m: usize, n: usize, alpha: usize, k: usize) -> Result<CountMatrix> {
    let p = b.p();
    if m < 2 || n < 2 {
        return domain("need m ≥ 2 and n ≥ 2");
    }
    if alpha == 0 || alpha > p * p {
        return domain(format!("alpha {alpha} outside [1, {}]", p * p));
    }
    if k == 0 || k > pow(p, m - 1) {
        return domain(format!("k {k} outside [1, {}]", pow(p, m - 1)));
    }
    let hn = build_transition(b, dir, n)?;
    Ok(elementary_from(&hn, p, m, alpha - 1, k - 1))
}

/// `entry_sum(H_n^{m-1})`, the number of admissible `m×n` patterns.
pub fn pattern_count(b: &BasicSet, m: usize, n: usize) -> Result<u64> {
    if m < 2 || n < 2 {
        return domain("need m ≥ 2 and n ≥ 2");
    }
    let hn = CountMatrix::from_bool(&build_transition(b, Direction::Horizontal, n)?);
    Ok(crate::matrix::power_with_saturation(&hn, m - 1).entry_sum())
}
