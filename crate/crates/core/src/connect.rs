//! Connecting operators: `C_m`/`S_m` for horizontal strips and `U_m`/`W_m` for vertical ones.
//!
//! `C_{m;i,j}` has rows indexed by the bottom interior `s` and columns by the top
//! interior `t` of an `(m+1)×2` strip whose left column is `i` and right column `j`.
//! `U_m` is the same object built from the vertical table, which is how a
//! vertical strip reads after exchanging the axes.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::basic_set::{code, digits, pow, BasicSet, Symbol};
use crate::error::{domain, Result};
use crate::matrix::{BoolMatrix, CountMatrix};
use crate::transfer::{check_dim, elementary_from, oriented_pair, Direction, TransitionCache, DEFAULT_MAX_DIM};

/// Which indexing of the connector blocks is exposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConnectorKind {
    C,
    S,
    U,
    W,
}

/// Largest order built eagerly through the recursion.
pub const EAGER_MAX_ORDER: usize = 7;
/// Bit budget for an eagerly built family (64 MiB).
pub const EAGER_MAX_BITS: usize = 64 << 23;

#[derive(Debug)]
struct Inner {
    p: usize,
    m: usize,
    axis: Direction,
    /// `H2` for the horizontal family, `V2` for the vertical one.
    table: BoolMatrix,
    /// Native blocks indexed `i * p² + j`, both 0-based.
    blocks: Vec<OnceLock<BoolMatrix>>,
}

/// The `p²×p²` array of `p^{m-1}`-square connector blocks, shared cheaply between views.
#[derive(Clone, Debug)]
pub struct ConnectorFamily {
    inner: Arc<Inner>,
    kind: ConnectorKind,
}

/// `C_m` for the horizontal axis, `U_m` for the vertical one.
pub fn build_connecting(b: &BasicSet, axis: Direction, m: usize) -> Result<ConnectorFamily> {
    build_connecting_capped(b, axis, m, DEFAULT_MAX_DIM)
}

pub fn build_connecting_capped(b: &BasicSet, axis: Direction, m: usize, max_dim: usize) -> Result<ConnectorFamily> {
    if m < 2 {
        return domain("connector order must be at least 2");
    }
    let p = b.p();
    check_dim(p, m - 1, max_dim)?;
    let (table, _) = oriented_pair(b, axis)?;
    let p2 = p * p;
    let blocks: Vec<OnceLock<BoolMatrix>> = (0..p2 * p2).map(|_| OnceLock::new()).collect();
    let side = pow(p, m - 1);
    let eager = m <= EAGER_MAX_ORDER && p2 * p2 * side * side <= EAGER_MAX_BITS;
    if eager {
        for (idx, blk) in recursive_family(&table, p, m).into_iter().enumerate() {
            blocks[idx].set(blk).expect("fresh cell");
        }
    }
    let kind = match axis {
        Direction::Horizontal => ConnectorKind::C,
        Direction::Vertical => ConnectorKind::U,
    };
    Ok(ConnectorFamily { inner: Arc::new(Inner { p, m, axis, table, blocks }), kind })
}

/// All native blocks of order `m` by the block recursion from order 2.
fn recursive_family(table: &BoolMatrix, p: usize, m: usize) -> Vec<BoolMatrix> {
    let p2 = p * p;
    let mut level: Vec<BoolMatrix> = (0..p2 * p2)
        .map(|idx| {
            let (i, j) = (idx / p2, idx % p2);
            BoolMatrix::from_fn(p, |s, t| {
                let mid = s * p + t;
                table.get(i, mid) && table.get(mid, j)
            })
        })
        .collect();
    for _ in 2..m {
        let size = level[0].dim();
        level = (0..p2 * p2)
            .map(|idx| {
                let (i, j) = (idx / p2, idx % p2);
                let mut out = BoolMatrix::zeros(size * p);
                for a in 0..p {
                    for bb in 0..p {
                        let mid = a * p + bb;
                        if !table.get(i, mid) {
                            continue;
                        }
                        let sub = &level[mid * p2 + j];
                        for r in 0..size {
                            for c in sub.row_ones(r) {
                                out.set(a * size + r, bb * size + c, true);
                            }
                        }
                    }
                }
                out
            })
            .collect();
    }
    level
}

/// One native block decoded straight from strip admissibility.
fn direct_block(table: &BoolMatrix, p: usize, m: usize, i: usize, j: usize) -> BoolMatrix {
    let side = pow(p, m - 1);
    let mut out = BoolMatrix::zeros(side);
    for s in 0..side {
        let bottom = digits(s, m - 1, p);
        // Frontier of (top prefix code, column index of the last placed column).
        let mut frontier = vec![(0usize, i)];
        for &bs in &bottom {
            let mut next = Vec::new();
            for &(prefix, last) in &frontier {
                for t in 0..p {
                    let col = bs as usize * p + t;
                    if table.get(last, col) {
                        next.push((prefix * p + t, col));
                    }
                }
            }
            frontier = next;
        }
        for (t, last) in frontier {
            if table.get(last, j) {
                out.set(s, t, true);
            }
        }
    }
    out
}

impl ConnectorFamily {
    pub fn kind(&self) -> ConnectorKind {
        self.kind
    }

    pub fn axis(&self) -> Direction {
        self.inner.axis
    }

    pub fn m(&self) -> usize {
        self.inner.m
    }

    pub fn p(&self) -> usize {
        self.inner.p
    }

    /// Side length `p^{m-1}` of each block.
    pub fn block_dim(&self) -> usize {
        pow(self.inner.p, self.inner.m - 1)
    }

    /// The re-indexed view: `C → S`, `U → W`; `S` and `W` map to themselves.
    pub fn to_s_w(&self) -> ConnectorFamily {
        let kind = match self.kind {
            ConnectorKind::C | ConnectorKind::S => ConnectorKind::S,
            ConnectorKind::U | ConnectorKind::W => ConnectorKind::W,
        };
        ConnectorFamily { inner: Arc::clone(&self.inner), kind }
    }

    /// The native view: `S → C`, `W → U`.
    pub fn to_c_u(&self) -> ConnectorFamily {
        let kind = match self.kind {
            ConnectorKind::C | ConnectorKind::S => ConnectorKind::C,
            ConnectorKind::U | ConnectorKind::W => ConnectorKind::U,
        };
        ConnectorFamily { inner: Arc::clone(&self.inner), kind }
    }

    fn native(&self, i: usize, j: usize) -> &BoolMatrix {
        let inner = &*self.inner;
        let p2 = inner.p * inner.p;
        inner.blocks[i * p2 + j].get_or_init(|| direct_block(&inner.table, inner.p, inner.m, i, j))
    }

    /// Block by 0-based indices in this family's own indexing.
    pub(crate) fn block0(&self, a: usize, b: usize) -> &BoolMatrix {
        match self.kind {
            ConnectorKind::C | ConnectorKind::U => self.native(a, b),
            ConnectorKind::S | ConnectorKind::W => {
                let p = self.inner.p;
                let (a1, a2) = (a / p, a % p);
                let (b1, b2) = (b / p, b % p);
                self.native(a1 * p + b1, a2 * p + b2)
            }
        }
    }

    /// Block by 1-based indices in `[1, p²]`.
    pub fn block(&self, a: usize, b: usize) -> Result<&BoolMatrix> {
        let p2 = self.inner.p * self.inner.p;
        if a == 0 || b == 0 || a > p2 || b > p2 {
            return domain(format!("block index ({a},{b}) outside [1,{p2}]"));
        }
        Ok(self.block0(a - 1, b - 1))
    }

    /// Product of the blocks along consecutive pairs of `path` (0-based indices).
    pub(crate) fn chain0(&self, path: &[usize]) -> BoolMatrix {
        let mut acc = BoolMatrix::identity(self.block_dim());
        for w in path.windows(2) {
            acc = acc.mul(self.block0(w[0], w[1]));
        }
        acc
    }

    /// Block `(a, b)` recomputed from strip admissibility, bypassing the cache.
    pub fn direct_decode(&self, a: usize, b: usize) -> Result<BoolMatrix> {
        let p2 = self.inner.p * self.inner.p;
        if a == 0 || b == 0 || a > p2 || b > p2 {
            return domain(format!("block index ({a},{b}) outside [1,{p2}]"));
        }
        let (i, j) = match self.kind {
            ConnectorKind::C | ConnectorKind::U => (a - 1, b - 1),
            _ => {
                let p = self.inner.p;
                let (a0, b0) = (a - 1, b - 1);
                ((a0 / p) * p + b0 / p, (a0 % p) * p + b0 % p)
            }
        };
        Ok(direct_block(&self.inner.table, self.inner.p, self.inner.m, i, j))
    }
}

/// An explicit strip pattern stored column-major as `grid[x][y]`.
pub type Grid = Vec<Vec<Symbol>>;

/// The `(m+1)×2` pattern behind `(S_{m;α,β})_{s,t}`: bottom row `(α₁, s, α₂)`, top row `(β₁, t, β₂)`.
pub fn connector_entry_pattern(p: usize, m: usize, alpha: usize, beta: usize, s: usize, t: usize) -> Result<Grid> {
    let p2 = p * p;
    let side = pow(p, m - 1);
    if m < 2 || alpha == 0 || beta == 0 || alpha > p2 || beta > p2 || s == 0 || t == 0 || s > side || t > side {
        return domain("connector entry index out of range");
    }
    let a = digits(alpha - 1, 2, p);
    let b = digits(beta - 1, 2, p);
    let mut bottom = vec![a[0]];
    bottom.extend(digits(s - 1, m - 1, p));
    bottom.push(a[1]);
    let mut top = vec![b[0]];
    top.extend(digits(t - 1, m - 1, p));
    top.push(b[1]);
    Ok(bottom.into_iter().zip(top).map(|(u, v)| vec![u, v]).collect())
}

/// Admissibility of a column-major grid under a vertex basic set.
pub fn grid_admissible(b: &BasicSet, grid: &[Vec<Symbol>]) -> bool {
    let p = b.p();
    grid.windows(2).all(|cols| {
        let (l, r) = (&cols[0], &cols[1]);
        (0..l.len().saturating_sub(1)).all(|y| b.contains_code(code(&[l[y], r[y], l[y + 1], r[y + 1]], p)))
    })
}

/// Column vector `Ĥ_{m,n;α}` of elementary patterns, `k = 1..p^{m-1}`.
fn hat(hn: &BoolMatrix, p: usize, m: usize, alpha0: usize) -> Vec<CountMatrix> {
    (0..pow(p, m - 1)).map(|k| elementary_from(hn, p, m, alpha0, k)).collect()
}

/// `Σ_l M_{k,l} · v_l` for a boolean matrix `M` and a vector of count matrices.
fn apply(mat: &BoolMatrix, v: &[CountMatrix]) -> Vec<CountMatrix> {
    (0..mat.dim())
        .map(|k| {
            let mut acc = CountMatrix::zeros(v[0].dim());
            for l in mat.row_ones(k) {
                acc = acc.add(&v[l]);
            }
            acc
        })
        .collect()
}

/// Checks the single-step and `q`-step reductions of elementary patterns through
/// `S_m`, and the order-2 base case, in both directions.
pub fn verify_connect_reduction(b: &BasicSet, m: usize, n: usize, q: usize) -> Result<bool> {
    if m < 2 || n < 2 || q < 1 {
        return domain("need m, n ≥ 2 and q ≥ 1");
    }
    for dir in [Direction::Horizontal, Direction::Vertical] {
        if !verify_direction(b, dir, m, n, q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn verify_direction(b: &BasicSet, dir: Direction, m: usize, n: usize, q: usize) -> Result<bool> {
    let p = b.p();
    let p2 = p * p;
    let fam = build_connecting(b, dir, m)?.to_s_w();
    let mut cache = TransitionCache::new(b, dir)?;
    let h2 = cache.get(2)?.clone();
    let hn = cache.get(n)?.clone();
    let hn1 = cache.get(n + 1)?.clone();

    // Base case: each scalar entry of H^{(k)}_{m,2;α} is a row sum of S_{m;α,β}.
    for alpha in 0..p2 {
        for k in 0..pow(p, m - 1) {
            let e = elementary_from(&h2, p, m, alpha, k);
            for beta in 0..p2 {
                let row_sum = fam.block0(alpha, beta).row_ones(k).count() as u64;
                if e.get(beta / p, beta % p) != row_sum {
                    return Ok(false);
                }
            }
        }
    }

    // One step: block β of H^{(k)}_{m,n+1;α} equals Σ_l (S_{m;α,β})_{k,l} H^{(l)}_{m,n;β}.
    let hats: Vec<Vec<CountMatrix>> = (0..p2).map(|beta| hat(&hn, p, m, beta)).collect();
    let size = hn.dim() / p;
    for alpha in 0..p2 {
        let big = hat(&hn1, p, m, alpha);
        for beta in 0..p2 {
            let rhs = apply(fam.block0(alpha, beta), &hats[beta]);
            for (k, e) in big.iter().enumerate() {
                if e.submatrix((beta / p) * size, (beta % p) * size, size) != rhs[k] {
                    return Ok(false);
                }
            }
        }
    }

    // q steps: the path-addressed block of H^m_{n+q} against the chained S product.
    let hnq = CountMatrix::from_bool(cache.get(n + q)?);
    let power = crate::matrix::power_with_saturation(&hnq, m);
    for path_code in 0..pow(p2, q + 1) {
        let path: Vec<usize> = digits(path_code, q + 1, p2).into_iter().map(usize::from).collect();
        let (is, js): (Vec<Symbol>, Vec<Symbol>) = path.iter().map(|&beta| ((beta / p) as Symbol, (beta % p) as Symbol)).unzip();
        let lhs = power.submatrix(code(&is, p) * size, code(&js, p) * size, size);
        let mut chain = CountMatrix::identity(fam.block_dim());
        for w in path.windows(2) {
            chain = chain.mul(&CountMatrix::from_bool(fam.block0(w[0], w[1])));
        }
        let last = &hats[*path.last().expect("nonempty")];
        let mut rhs = CountMatrix::zeros(size);
        for (l, h) in last.iter().enumerate() {
            let weight: u64 = (0..chain.dim()).map(|k| chain.get(k, l)).sum();
            for _ in 0..weight {
                rhs = rhs.add(h);
            }
        }
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic_set::Mode;
    use crate::catalog;

    fn rows(m: &BoolMatrix) -> Vec<Vec<u8>> {
        m.to_rows()
    }

    #[test]
    fn golden_mean_order_two() {
        let c = build_connecting(&catalog::golden_mean(), Direction::Horizontal, 2).unwrap();
        assert_eq!(rows(c.block(1, 1).unwrap()), vec![vec![1, 1], vec![1, 0]]);
        let s = c.to_s_w();
        assert_eq!(s.block(1, 1).unwrap(), c.block(1, 1).unwrap());
    }

    #[test]
    fn cycle_and_pair_order_three() {
        let c = build_connecting(&catalog::cycle_and_pair(), Direction::Horizontal, 3).unwrap();
        assert_eq!(
            rows(c.block(1, 1).unwrap()),
            vec![vec![1, 0, 0, 0], vec![0, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]]
        );
    }

    #[test]
    fn three_coloring_reindexing() {
        let c = build_connecting(&catalog::three_coloring(), Direction::Horizontal, 2).unwrap();
        let s = c.to_s_w();
        assert_eq!(s.block(1, 5).unwrap(), c.block(2, 2).unwrap());
        assert_eq!(s.block(5, 1).unwrap(), c.block(4, 4).unwrap());
        assert_eq!(rows(s.block(1, 5).unwrap()), vec![vec![0, 0, 0], vec![1, 0, 1], vec![1, 0, 0]]);
        assert_eq!(rows(s.block(5, 1).unwrap()), vec![vec![0, 1, 1], vec![0, 0, 0], vec![0, 1, 0]]);
    }

    #[test]
    fn full_set_blocks_are_full() {
        let full = BasicSet::full(2, Mode::Vertex).unwrap();
        let c = build_connecting(&full, Direction::Horizontal, 2).unwrap();
        for i in 1..=4 {
            for j in 1..=4 {
                assert_eq!(*c.block(i, j).unwrap(), BoolMatrix::ones(2));
            }
        }
    }

    #[test]
    fn recursion_matches_direct_decode() {
        for b in [catalog::golden_mean(), catalog::cycle_and_pair(), catalog::three_coloring(), catalog::boyle()] {
            for axis in [Direction::Horizontal, Direction::Vertical] {
                for m in 2..=4 {
                    let fam = build_connecting(&b, axis, m).unwrap();
                    let p2 = b.p() * b.p();
                    for i in 1..=p2 {
                        for j in 1..=p2 {
                            assert_eq!(*fam.block(i, j).unwrap(), fam.direct_decode(i, j).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn entry_pattern_examples() {
        let gm = catalog::golden_mean();
        let g = connector_entry_pattern(2, 2, 1, 1, 1, 1).unwrap();
        assert_eq!(g, vec![vec![0, 0]; 3]);
        assert!(grid_admissible(&gm, &g));
        let g = connector_entry_pattern(2, 2, 1, 1, 2, 2).unwrap();
        assert_eq!(g[1], vec![1, 1]);
        assert!(!grid_admissible(&gm, &g));
    }

    #[test]
    fn reductions_hold() {
        assert!(verify_connect_reduction(&catalog::golden_mean(), 2, 2, 1).unwrap());
        assert!(verify_connect_reduction(&catalog::cycle_and_pair(), 3, 2, 2).unwrap());
        assert!(verify_connect_reduction(&BasicSet::full(2, Mode::Vertex).unwrap(), 2, 3, 2).unwrap());
        assert!(verify_connect_reduction(&catalog::three_coloring(), 2, 2, 1).unwrap());
    }

    #[test]
    fn vertical_family_is_transposed_horizontal() {
        let b = catalog::cycle_and_pair();
        let w = build_connecting(&b, Direction::Vertical, 3).unwrap().to_s_w();
        let s = build_connecting(&b.transposed().unwrap(), Direction::Horizontal, 3).unwrap().to_s_w();
        for a in 1..=4 {
            for c in 1..=4 {
                assert_eq!(w.block(a, c).unwrap(), s.block(a, c).unwrap());
            }
        }
    }
}
