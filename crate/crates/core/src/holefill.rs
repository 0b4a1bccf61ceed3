//! Hole filling around rectangular holes, the strong-specification verdict,
//! and bounded uniform-filling and corner-gluing checks.
//!
//! Coordinates follow the oracle: the hole is the `M×N` rectangle at the
//! origin, `y` grows upwards, and a row segment is coded with its leftmost
//! cell as the most significant digit. Corner pairs `α = ψ(left, right)`.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basic_set::{digits, pow, BasicSet, Symbol};
use crate::certify::{Certificate, Property, Status, Verdict};
use crate::connect::{build_connecting, ConnectorFamily};
use crate::error::{domain, resource, Error, Result};
use crate::matrix::{BitVec, BoolMatrix};
use crate::oracle::{annulus_is_unfillable, pattern_from_list, pattern_to_list, Csp, HoleGeometry, Pattern, Site, SiteValue, Window};
use crate::primitivity::is_n_primitive;
use crate::structure::{degeneracy_profile, k_crisscross};
use crate::transfer::{build_transition, Direction};

/// Largest row space `p^M` the matrix searches will index.
pub const MAX_ROW_DIM: usize = 4096;
/// Default node budget of the hole-filling search.
pub const DEFAULT_MAX_NODES: u64 = 2_000_000_000;
/// Route name of a proved strong-specification verdict.
pub const STRONG_SPEC_ROUTE: &str = "crisscross/hole-filling/collar-primitive";

/// The `d`-wide annulus around an `M×N` hole whose lower-left cell is `anchor`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnulusSpec {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    pub anchor: (i32, i32),
}

impl AnnulusSpec {
    pub fn new(m: usize, n: usize, d: usize, anchor: (i32, i32)) -> Result<AnnulusSpec> {
        if m < 1 || n < 1 || d < 2 {
            return domain(format!("annulus needs M, N ≥ 1 and d ≥ 2, got ({m},{n}), d={d}"));
        }
        Ok(AnnulusSpec { m, n, d, anchor })
    }

    pub fn window(&self) -> Window {
        Window::annulus(self.anchor.0, self.anchor.1, self.m as i32, self.n as i32, self.d as i32)
    }

    /// Whether the hole is large enough for the width-`k` test.
    pub fn fits(&self, k: usize) -> bool {
        k >= 2 && self.m + 3 >= 2 * k && self.n + 3 >= 2 * k
    }
}

/// A boundary tuple for which hole filling fails.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HfcWitness {
    /// 1-based corner pairs `ψ(u(-1,y), u(M,y))` for `y = -2..=N+1`.
    pub alphas: Vec<usize>,
    /// 1-based code of row `-1` over the hole columns.
    pub i: usize,
    /// 1-based code of row `N` over the hole columns.
    pub j: usize,
    /// An admissible width-`k` annulus carrying this boundary.
    pub annulus: Vec<SiteValue>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HfcResult {
    pub holds: bool,
    pub k: usize,
    pub m: usize,
    pub n: usize,
    /// Complete corner sequences examined.
    pub examined: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<HfcWitness>,
}

/// Admissibility of single windows, indexed by the code of `[u00,u10,u01,u11]`.
struct Windows {
    p: usize,
    ok: Vec<bool>,
}

impl Windows {
    fn new(b: &BasicSet) -> Windows {
        let p = b.p();
        let ok = (0..pow(p, 4))
            .map(|c| {
                let d = digits(c, 4, p);
                b.contains([d[0], d[1], d[2], d[3]])
            })
            .collect();
        Windows { p, ok }
    }

    fn get(&self, a: usize, b: usize, c: usize, d: usize) -> bool {
        self.ok[((a * self.p + b) * self.p + c) * self.p + d]
    }

    /// Symbols of the column left of a fixed column, one row up.
    fn step_left(&self, mask: u16, prev: usize, cur: usize) -> u16 {
        let mut out = 0;
        for c in (0..self.p).filter(|c| mask >> c & 1 == 1) {
            for c2 in 0..self.p {
                if self.get(c, prev, c2, cur) {
                    out |= 1 << c2;
                }
            }
        }
        out
    }

    fn step_right(&self, mask: u16, prev: usize, cur: usize) -> u16 {
        let mut out = 0;
        for c in (0..self.p).filter(|c| mask >> c & 1 == 1) {
            for c2 in 0..self.p {
                if self.get(prev, c, cur, c2) {
                    out |= 1 << c2;
                }
            }
        }
        out
    }

    /// Whether two stacked rows of equal length are admissible.
    fn rows_ok(&self, lower: &[usize], upper: &[usize]) -> bool {
        (0..lower.len() - 1).all(|x| self.get(lower[x], lower[x + 1], upper[x], upper[x + 1]))
    }

    fn full_mask(&self) -> u16 {
        (1 << self.p) - 1
    }
}

/// Row strips between two corner columns: the `S` blocks of one order, with
/// the single-window test standing in for order 1.
struct Strips {
    p: usize,
    fam: Option<ConnectorFamily>,
    unit: Vec<BoolMatrix>,
}

impl Strips {
    fn new(b: &BasicSet, win: &Windows, order: usize) -> Result<Strips> {
        let p = b.p();
        if order >= 2 {
            if pow(p, order - 1) > MAX_ROW_DIM {
                return resource(format!("strip row space {p}^{} exceeds {MAX_ROW_DIM}", order - 1));
            }
            let fam = build_connecting(b, Direction::Horizontal, order)?.to_s_w();
            return Ok(Strips { p, fam: Some(fam), unit: Vec::new() });
        }
        let unit = win.ok.iter().map(|&ok| BoolMatrix::from_fn(1, |_, _| ok)).collect();
        Ok(Strips { p, fam: None, unit })
    }

    fn dim(&self) -> usize {
        self.fam.as_ref().map_or(1, |f| f.block_dim())
    }

    /// Block for bottom corners `a` and top corners `b`, both 0-based.
    fn block(&self, a: usize, b: usize) -> &BoolMatrix {
        match &self.fam {
            Some(f) => f.block0(a, b),
            None => &self.unit[a * self.p * self.p + b],
        }
    }

    fn chain(&self, path: &[usize]) -> BoolMatrix {
        let mut acc = BoolMatrix::identity(self.dim());
        for w in path.windows(2) {
            acc = acc.mul(self.block(w[0], w[1]));
        }
        acc
    }

    /// Reachable interiors per right corner after stacking rows on `start`.
    ///
    /// `lefts[r]` is the left corner of row `r`; row 0 has right corner
    /// `start_right`, and `rights[r]`, when set, pins the right corner of row `r`.
    fn free_right(&self, lefts: &[usize], start: BitVec, start_right: usize, rights: &[Option<usize>]) -> Vec<BitVec> {
        let p = self.p;
        let mut state: Vec<BitVec> = (0..p).map(|_| BitVec::zeros(self.dim())).collect();
        state[start_right] = start;
        for r in 1..lefts.len() {
            let mut next: Vec<BitVec> = (0..p).map(|_| BitVec::zeros(self.dim())).collect();
            for c in (0..p).filter(|&c| !state[c].is_zero()) {
                for c2 in 0..p {
                    if rights.get(r).copied().flatten().is_some_and(|f| f != c2) {
                        continue;
                    }
                    let moved = self.block(lefts[r - 1] * p + c, lefts[r] * p + c2).left_apply(&state[c]);
                    next[c2].or_assign(&moved);
                }
            }
            state = next;
        }
        state
    }
}

fn split(alpha: usize, p: usize) -> (usize, usize) {
    (alpha / p, alpha % p)
}

fn sym(v: usize) -> Symbol {
    v as Symbol
}

struct HfcSearch {
    p: usize,
    k: usize,
    m: usize,
    n: usize,
    win: Windows,
    strips: Strips,
    col_sup: Vec<BitVec>,
    row_sup: Vec<BitVec>,
    nodes: AtomicU64,
    max_nodes: u64,
    first_fail: AtomicUsize,
}

struct Branch {
    leaves: u64,
    found: Option<(Vec<usize>, usize, usize)>,
}

struct Frame {
    alphas: Vec<usize>,
    root: usize,
    leaves: u64,
}

impl HfcSearch {
    fn new(b: &BasicSet, k: usize, m: usize, n: usize, max_nodes: u64) -> Result<HfcSearch> {
        let p = b.p();
        if pow(p, m) > MAX_ROW_DIM {
            return resource(format!("hole row space {p}^{m} exceeds {MAX_ROW_DIM}"));
        }
        let win = Windows::new(b);
        let strips = Strips::new(b, &win, m + 1)?;
        let p2 = p * p;
        let mut col_sup = Vec::with_capacity(p2 * p2);
        let mut row_sup = Vec::with_capacity(p2 * p2);
        for a in 0..p2 {
            for c in 0..p2 {
                let blk = strips.block(a, c);
                col_sup.push(BitVec::from_bools(&blk.col_support()));
                row_sup.push(BitVec::from_bools(&blk.row_support()));
            }
        }
        Ok(HfcSearch {
            p,
            k,
            m,
            n,
            win,
            strips,
            col_sup,
            row_sup,
            nodes: AtomicU64::new(0),
            max_nodes,
            first_fail: AtomicUsize::new(usize::MAX),
        })
    }

    fn total(&self) -> usize {
        self.n + 4
    }

    fn branch(&self, root: usize) -> Result<Branch> {
        let mask = self.win.full_mask();
        let mut frame = Frame { alphas: vec![root], root, leaves: 0 };
        let id = BoolMatrix::identity(1);
        let found = self.extend(&mut frame, mask, mask, &id, None, &BitVec::zeros(1))?;
        if found.is_some() {
            self.first_fail.fetch_min(root, Ordering::Relaxed);
        }
        Ok(Branch { leaves: frame.leaves, found: found.map(|(i, j)| (frame.alphas.clone(), i, j)) })
    }

    /// Extends the corner sequence in lexicographic order; returns the first failing `(i, j)`.
    fn extend(
        &self,
        f: &mut Frame,
        ml: u16,
        mr: u16,
        prefix: &BoolMatrix,
        collar_low: Option<&BoolMatrix>,
        rows_i: &BitVec,
    ) -> Result<Option<(usize, usize)>> {
        let len = f.alphas.len();
        if len == self.total() {
            f.leaves += 1;
            return Ok(self.leaf(&f.alphas, prefix, collar_low, rows_i));
        }
        if self.first_fail.load(Ordering::Relaxed) < f.root {
            return Ok(None);
        }
        let p2 = self.p * self.p;
        let prev = f.alphas[len - 1];
        let (a_prev, b_prev) = split(prev, self.p);
        for alpha in 0..p2 {
            let seen = self.nodes.fetch_add(1, Ordering::Relaxed);
            if seen >= self.max_nodes {
                return resource(format!("hole-filling search exceeded {} nodes at depth {}", self.max_nodes, len + 1));
            }
            let (a, b) = split(alpha, self.p);
            let nl = self.win.step_left(ml, a_prev, a);
            let nr = self.win.step_right(mr, b_prev, b);
            if nl == 0 || nr == 0 {
                continue;
            }
            let level = len + 1;
            let (next_prefix, next_rows) = if level == 2 {
                let rows = self.col_sup[prev * p2 + alpha].clone();
                if rows.is_zero() {
                    continue;
                }
                (BoolMatrix::identity(self.strips.dim()), rows)
            } else if level <= self.n + 3 {
                (prefix.mul(self.strips.block(prev, alpha)), rows_i.clone())
            } else {
                (prefix.clone(), rows_i.clone())
            };
            let low = if level == self.k && self.k >= 3 { Some(next_prefix.clone()) } else { None };
            f.alphas.push(alpha);
            let hit = self.extend(f, nl, nr, &next_prefix, low.as_ref().or(collar_low), &next_rows)?;
            if hit.is_some() {
                return Ok(hit);
            }
            f.alphas.pop();
        }
        Ok(None)
    }

    fn leaf(&self, alphas: &[usize], fill: &BoolMatrix, collar_low: Option<&BoolMatrix>, rows_i: &BitVec) -> Option<(usize, usize)> {
        let p2 = self.p * self.p;
        let t = self.total();
        let rows_j = &self.row_sup[alphas[t - 2] * p2 + alphas[t - 1]];
        if rows_j.is_zero() {
            return None;
        }
        let reach = if self.k == 2 {
            None
        } else {
            let low = collar_low.expect("collar prefix is set once the sequence passes row k-3");
            let top = self.strips.chain(&alphas[self.n - self.k + 4..self.n + 3]);
            Some(low.mul(&self.collar(alphas).mul(&top)))
        };
        let ones = vec![u64::MAX; fill.words()];
        for i in rows_i.ones() {
            let premise = reach.as_ref().map_or(&ones[..], |r| r.row(i));
            if let Some(j) = rows_j.first_outside(premise, fill.row(i)) {
                return Some((i, j));
            }
        }
        None
    }

    /// Which row pairs `(k-3, N-k+2)` are joined through the side bands of the collar.
    fn collar(&self, alphas: &[usize]) -> BoolMatrix {
        let p = self.p;
        let w = self.k - 2;
        let side = pow(p, w);
        let (lo, hi) = (self.k - 3, self.n + 2 - self.k);
        let corner = |y: usize| split(alphas[y + 2], p);
        let band = |left: bool| {
            let mut acc = BoolMatrix::identity(side);
            for y in lo..hi {
                let (c0, c1) = (corner(y), corner(y + 1));
                let step = BoolMatrix::from_fn(side, |u, v| {
                    let du = digits(u, w, p).into_iter().map(usize::from);
                    let dv = digits(v, w, p).into_iter().map(usize::from);
                    let (lower, upper): (Vec<usize>, Vec<usize>) = if left {
                        (std::iter::once(c0.0).chain(du).collect(), std::iter::once(c1.0).chain(dv).collect())
                    } else {
                        (du.chain(std::iter::once(c0.1)).collect(), dv.chain(std::iter::once(c1.1)).collect())
                    };
                    self.win.rows_ok(&lower, &upper)
                });
                acc = acc.mul(&step);
            }
            acc
        };
        let (left, right) = (band(true), band(false));
        let rest = pow(p, self.m - w);
        BoolMatrix::from_fn(pow(p, self.m), |i, j| left.get(i / rest, j / rest) && right.get(i % side, j % side))
    }
}

/// Builds an admissible width-`k` annulus with the given corners and hole rows.
fn witness_annulus(b: &BasicSet, k: usize, m: usize, n: usize, alphas: &[usize], i: usize, j: usize) -> Result<Pattern> {
    let geo = HoleGeometry::new(k, m, n)?;
    let p = b.p();
    let mut fixed = Pattern::new();
    for (l, &alpha) in alphas.iter().enumerate() {
        let y = l as i32 - 2;
        let (a, c) = split(alpha, p);
        fixed.insert(Site::Cell(-1, y), sym(a));
        fixed.insert(Site::Cell(m as i32, y), sym(c));
    }
    for (x, (&u, &v)) in digits(i, m, p).iter().zip(&digits(j, m, p)).enumerate() {
        fixed.insert(Site::Cell(x as i32, -1), u);
        fixed.insert(Site::Cell(x as i32, n as i32), v);
    }
    match Csp::for_window(b, &geo.thick).solve(&fixed)? {
        Some(w) => Ok(w),
        None => Err(Error::Certificate("failing boundary does not extend to an admissible annulus".into())),
    }
}

/// `(HFC)_k` with size `(M, N)`: every admissible width-`k` annulus keeps its
/// outer two layers when the inside is refilled.
pub fn check_hfc_k(b: &BasicSet, k: usize, m: usize, n: usize) -> Result<HfcResult> {
    check_hfc_k_capped(b, k, m, n, DEFAULT_MAX_NODES)
}

/// Hole filling with size `(M, N)`; the width-2 case of [`check_hfc_k`].
pub fn check_hfc(b: &BasicSet, m: usize, n: usize) -> Result<HfcResult> {
    check_hfc_k(b, 2, m, n)
}

pub fn check_hfc_k_capped(b: &BasicSet, k: usize, m: usize, n: usize, max_nodes: u64) -> Result<HfcResult> {
    b.require_vertex()?;
    HoleGeometry::new(k, m, n)?;
    let search = HfcSearch::new(b, k, m, n, max_nodes)?;
    let p2 = b.p() * b.p();
    let branches: Vec<Result<Branch>> = (0..p2).into_par_iter().map(|root| search.branch(root)).collect();
    let mut examined = 0;
    for br in branches {
        let br = br?;
        examined += br.leaves;
        if let Some((alphas, i, j)) = br.found {
            let annulus = pattern_to_list(&witness_annulus(b, k, m, n, &alphas, i, j)?);
            let alphas = alphas.iter().map(|a| a + 1).collect();
            let witness = HfcWitness { alphas, i: i + 1, j: j + 1, annulus };
            return Ok(HfcResult { holds: false, k, m, n, examined, witness: Some(witness) });
        }
    }
    Ok(HfcResult { holds: true, k, m, n, examined, witness: None })
}

/// Limits of the strong-specification search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongSpecCaps {
    pub k_max: usize,
    /// Largest hole side tried.
    pub mn_max: usize,
}

impl Default for StrongSpecCaps {
    fn default() -> Self {
        StrongSpecCaps { k_max: 3, mn_max: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongSpecCert {
    pub k: usize,
    pub m: usize,
    pub n: usize,
}

/// Hole sizes for width `k`, ordered by perimeter and then width.
fn hole_sizes(k: usize, mn_max: usize) -> Vec<(usize, usize)> {
    let lo = (2 * k).saturating_sub(3).max(1);
    let mut out: Vec<(usize, usize)> = (lo..=mn_max).flat_map(|m| (lo..=mn_max).map(move |n| (m, n))).collect();
    out.sort_by_key(|&(m, n)| (m + n, m));
    out
}

/// Why `(k, M, N)` does not establish strong specification, or `None` when it does.
fn strong_spec_failure(b: &BasicSet, c: &StrongSpecCert, h: &BoolMatrix, v: &BoolMatrix) -> Result<Option<String>> {
    let StrongSpecCert { k, m, n } = *c;
    let tag = format!("k={k} ({m},{n})");
    let (need_h, need_v) = (m + 5 - 2 * k, n + 5 - 2 * k);
    if !is_n_primitive(h, need_h)? {
        return Ok(Some(format!("{tag}: H_{k} is not {need_h}-primitive")));
    }
    if !is_n_primitive(v, need_v)? {
        return Ok(Some(format!("{tag}: V_{k} is not {need_v}-primitive")));
    }
    let r = match check_hfc_k(b, k, m, n) {
        Ok(r) => r,
        Err(Error::Resource(why)) => return Ok(Some(format!("{tag}: {why}"))),
        Err(e) => return Err(e),
    };
    if r.holds {
        return Ok(None);
    }
    Ok(Some(format!("{tag}: hole filling fails after {} corner sequences", r.examined)))
}

pub fn strong_specification_verdict(b: &BasicSet, caps: &StrongSpecCaps) -> Result<Verdict> {
    b.require_vertex()?;
    let mut notes = Vec::new();
    for k in 2..=caps.k_max {
        if pow(b.p(), k) > MAX_ROW_DIM {
            notes.push(format!("k={k}: transition matrices exceed {MAX_ROW_DIM}"));
            break;
        }
        if !k_crisscross(b, k)? {
            notes.push(format!("k={k}: not {k}-crisscross"));
            continue;
        }
        let h = build_transition(b, Direction::Horizontal, k)?;
        let v = build_transition(b, Direction::Vertical, k)?;
        for (m, n) in hole_sizes(k, caps.mn_max) {
            let cert = StrongSpecCert { k, m, n };
            match strong_spec_failure(b, &cert, &h, &v)? {
                Some(why) => notes.push(why),
                None => {
                    let c = Certificate::StrongSpecification(cert);
                    return Ok(Verdict::new(Property::StrongSpecification, Status::Proved, STRONG_SPEC_ROUTE, c, caps));
                }
            }
        }
    }
    Ok(Verdict::new(Property::StrongSpecification, Status::Unknown, "", Certificate::None, caps).with_notes(notes))
}

fn reject<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Certificate(msg.into()))
}

pub fn replay_strong_specification(b: &BasicSet, c: &StrongSpecCert) -> Result<Status> {
    b.require_vertex()?;
    HoleGeometry::new(c.k, c.m, c.n)?;
    if !k_crisscross(b, c.k)? {
        return reject(format!("not {}-crisscross", c.k));
    }
    let h = build_transition(b, Direction::Horizontal, c.k)?;
    let v = build_transition(b, Direction::Vertical, c.k)?;
    match strong_spec_failure(b, c, &h, &v)? {
        Some(why) => reject(why),
        None => Ok(Status::Proved),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillMode {
    Ufp,
    Corner,
}

/// The test a fill-failure witness refutes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "test", rename_all = "kebab-case")]
pub enum FillCondition {
    HoleFilling { k: usize, m: usize, n: usize },
    UniformFilling { g: usize, m: usize, n: usize },
    CornerGluing { g: usize, m: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillFailureCert {
    pub condition: FillCondition,
    pub witness: Vec<SiteValue>,
}

impl FillFailureCert {
    pub fn from_hfc(r: &HfcResult) -> Option<FillFailureCert> {
        let w = r.witness.as_ref()?;
        Some(FillFailureCert { condition: FillCondition::HoleFilling { k: r.k, m: r.m, n: r.n }, witness: w.annulus.clone() })
    }
}

pub fn replay_fill_failure(b: &BasicSet, c: &FillFailureCert) -> Result<Status> {
    b.require_vertex()?;
    let pat = pattern_from_list(&c.witness);
    let refuted = match c.condition {
        FillCondition::HoleFilling { k, m, n } => annulus_is_unfillable(b, k, m, n, &pat)?,
        FillCondition::UniformFilling { g, m, n } => UfpLayout::new(g, m, n)?.refutes(b, &pat)?,
        FillCondition::CornerGluing { g, m, n } => CornerLayout::new(g, m, n)?.refutes(b, &pat)?,
    };
    if refuted {
        Ok(Status::Refuted)
    } else {
        reject("witness does not violate the stated fill condition")
    }
}

/// Placement of the uniform-filling instance: boundary columns at `x = 0` and
/// `x = m+2g+1` over rows `1..=m̄`, the `m×n` rectangle `R` at `(g+1, g+3)`.
struct UfpLayout {
    g: usize,
    m: usize,
    n: usize,
}

impl UfpLayout {
    fn new(g: usize, m: usize, n: usize) -> Result<UfpLayout> {
        if g < 1 || m < 2 || n < 2 {
            return domain(format!("uniform filling needs g ≥ 1 and m, n ≥ 2, got g={g}, ({m},{n})"));
        }
        Ok(UfpLayout { g, m, n })
    }

    fn width(&self) -> i32 {
        (self.m + 2 * self.g + 2) as i32
    }

    fn height(&self) -> i32 {
        (self.n + 2 * self.g + 4) as i32
    }

    fn rect(&self) -> Window {
        Window::rect((self.g + 1) as i32, (self.g + 3) as i32, self.m as i32, self.n as i32)
    }

    fn in_rect_boundary(&self, x: i32, y: i32) -> bool {
        let (x0, y0) = ((self.g + 1) as i32, (self.g + 3) as i32);
        let (x1, y1) = (x0 + self.m as i32 - 1, y0 + self.n as i32 - 1);
        (x0..=x1).contains(&x) && (y0..=y1).contains(&y) && (x == x0 || x == x1 || y == y0 || y == y1)
    }

    /// Sites a witness must assign: frame columns, rows 2 and `m̄-1`, and the boundary of `R`.
    fn expected_sites(&self) -> Vec<Site> {
        let (w, h) = (self.width(), self.height());
        let mut out = Vec::new();
        for y in 1..=h {
            out.push(Site::Cell(0, y));
            out.push(Site::Cell(w - 1, y));
        }
        for x in 1..w - 1 {
            out.push(Site::Cell(x, 2));
            out.push(Site::Cell(x, h - 1));
        }
        out.extend(self.rect().cells().into_iter().filter(|&(x, y)| self.in_rect_boundary(x, y)).map(|(x, y)| Site::Cell(x, y)));
        out
    }

    fn refutes(&self, b: &BasicSet, pat: &Pattern) -> Result<bool> {
        let expected = self.expected_sites();
        if pat.len() != expected.len() || expected.iter().any(|s| !pat.contains_key(s)) {
            return reject("uniform-filling witness has the wrong sites");
        }
        let (w, h) = (self.width(), self.height());
        let (inner, outer): (Pattern, Pattern) = pat.iter().partition(|(s, _)| match s {
            Site::Cell(x, y) => self.in_rect_boundary(*x, *y),
            _ => false,
        });
        let frame = Window::rect(-1, 1, w + 2, h);
        if !Csp::for_window(b, &frame).satisfiable(&outer)? || !Csp::for_window(b, &self.rect()).satisfiable(&inner)? {
            return Ok(false);
        }
        let gap = Window::rect(0, 2, w, h - 2);
        let fixed: Pattern = pat.iter().filter(|(s, _)| matches!(s, Site::Cell(_, y) if (2..h).contains(y))).map(|(&s, &v)| (s, v)).collect();
        Ok(!Csp::for_window(b, &gap).satisfiable(&fixed)?)
    }
}

/// Placement of the corner-gluing instance: the column `s` at `x = 0` over
/// rows `0..=n+g+1`, the row `t` at `y = 1` over `x = 1..=m+g`, and the
/// `m×n` rectangle `R` at `(g+1, g+2)` of which the bottom row and left
/// column are kept.
struct CornerLayout {
    g: usize,
    m: usize,
    n: usize,
}

impl CornerLayout {
    fn new(g: usize, m: usize, n: usize) -> Result<CornerLayout> {
        if g < 1 || m < 2 || n < 2 {
            return domain(format!("corner gluing needs g ≥ 1 and m, n ≥ 2, got g={g}, ({m},{n})"));
        }
        Ok(CornerLayout { g, m, n })
    }

    fn rect(&self) -> Window {
        Window::rect((self.g + 1) as i32, (self.g + 2) as i32, self.m as i32, self.n as i32)
    }

    fn in_kept(&self, x: i32, y: i32) -> bool {
        let (x0, y0) = ((self.g + 1) as i32, (self.g + 2) as i32);
        (y == y0 && (x0..x0 + self.m as i32).contains(&x)) || (x == x0 && (y0..y0 + self.n as i32).contains(&y))
    }

    fn expected_sites(&self) -> Vec<Site> {
        let (g, m, n) = (self.g as i32, self.m as i32, self.n as i32);
        let mut out: Vec<Site> = (0..=n + g + 1).map(|y| Site::Cell(0, y)).collect();
        out.extend((1..=m + g).map(|x| Site::Cell(x, 1)));
        out.extend(self.rect().cells().into_iter().filter(|&(x, y)| self.in_kept(x, y)).map(|(x, y)| Site::Cell(x, y)));
        out
    }

    fn gap(&self) -> Window {
        let (g, m, n) = (self.g as i32, self.m as i32, self.n as i32);
        Window::rect(0, 1, m + g + 1, g + 2).union(&Window::rect(0, g + 2, g + 2, n))
    }

    fn refutes(&self, b: &BasicSet, pat: &Pattern) -> Result<bool> {
        let expected = self.expected_sites();
        if pat.len() != expected.len() || expected.iter().any(|s| !pat.contains_key(s)) {
            return reject("corner-gluing witness has the wrong sites");
        }
        let (g, m, n) = (self.g as i32, self.m as i32, self.n as i32);
        let (inner, outer): (Pattern, Pattern) = pat.iter().partition(|(s, _)| match s {
            Site::Cell(x, y) => self.in_kept(*x, *y),
            _ => false,
        });
        let frame = Window::rect(-1, 0, m + g + 2, n + g + 2);
        if !Csp::for_window(b, &frame).satisfiable(&outer)? || !Csp::for_window(b, &self.rect()).satisfiable(&inner)? {
            return Ok(false);
        }
        let gap = self.gap();
        let fixed: Pattern = pat.iter().filter(|(s, _)| matches!(s, Site::Cell(x, y) if gap.contains((*x, *y)))).map(|(&s, &v)| (s, v)).collect();
        Ok(!Csp::for_window(b, &gap).satisfiable(&fixed)?)
    }
}

/// Boundary of the rectangle `R` in the uniform-filling test.
#[derive(Clone, Debug)]
struct RectBoundary {
    left: Vec<usize>,
    right: Vec<usize>,
    bottom: usize,
    top: usize,
}

/// Reachable sets `(row, fill)` for one choice of the row-2 content: rows the
/// frame premise reaches, and rows (or gap pairs inside `R`'s rows) reachable
/// by a fill that keeps `R`.
type Phi = Vec<(BitVec, BitVec)>;

type MemoKey = (usize, usize, u16, u16, usize, Phi);
type Suffix = Option<(Vec<usize>, Option<usize>)>;

struct UfpSearch<'a> {
    lay: UfpLayout,
    p: usize,
    win: &'a Windows,
    rows: Strips,
    gaps: Strips,
    rects: Vec<RectBoundary>,
    col_sup: Vec<BitVec>,
    row_sup: Vec<BitVec>,
    nodes: u64,
    max_nodes: u64,
}

impl<'a> UfpSearch<'a> {
    fn new(b: &BasicSet, win: &'a Windows, lay: UfpLayout, max_nodes: u64) -> Result<UfpSearch<'a>> {
        let p = b.p();
        let (g, m, n) = (lay.g, lay.m, lay.n);
        if pow(p, 2 * g) > 64 {
            return resource(format!("gap pairs {p}^{} exceed 64", 2 * g));
        }
        let rows = Strips::new(b, win, m + 2 * g + 1)?;
        let gaps = Strips::new(b, win, g + 1)?;
        let inner = Strips::new(b, win, m - 1)?;
        let mut rects = Vec::new();
        let side = pow(p, n);
        for lc in 0..side {
            for rc in 0..side {
                let (left, right): (Vec<usize>, Vec<usize>) =
                    (digits(lc, n, p).into_iter().map(usize::from).collect(), digits(rc, n, p).into_iter().map(usize::from).collect());
                let corners: Vec<usize> = left.iter().zip(&right).map(|(&l, &r)| l * p + r).collect();
                let chain = inner.chain(&corners);
                for bottom in 0..inner.dim() {
                    for top in chain.row_ones(bottom) {
                        rects.push(RectBoundary { left: left.clone(), right: right.clone(), bottom, top });
                    }
                }
            }
        }
        let p2 = p * p;
        let mut col_sup = Vec::with_capacity(p2 * p2);
        let mut row_sup = Vec::with_capacity(p2 * p2);
        for a in 0..p2 {
            for c in 0..p2 {
                let blk = rows.block(a, c);
                col_sup.push(BitVec::from_bools(&blk.col_support()));
                row_sup.push(BitVec::from_bools(&blk.row_support()));
            }
        }
        Ok(UfpSearch { lay, p, win, rows, gaps, rects, col_sup, row_sup, nodes: 0, max_nodes })
    }

    fn height(&self) -> usize {
        self.lay.n + 2 * self.lay.g + 4
    }

    /// Row code of `(gap, left, inner, right, gap')` across the frame interior.
    fn full_row(&self, xi: usize, left: usize, inner: usize, right: usize, xi2: usize) -> usize {
        let (p, g, m) = (self.p, self.lay.g, self.lay.m);
        let mut c = xi;
        c = c * p + left;
        c = c * pow(p, m - 2) + inner;
        c = c * p + right;
        c * pow(p, g) + xi2
    }

    /// Advances `phi` from row `l-1` (corners `prev`) to row `l` (corners `cur`).
    fn step(&self, l: usize, prev: usize, cur: usize, rect: Option<&RectBoundary>, phi: &Phi) -> Phi {
        let (p, g, n) = (self.p, self.lay.g, self.lay.n);
        let gp = pow(p, g);
        let blk = self.rows.block(prev, cur);
        let (bottom_row, top_row) = (g + 3, n + g + 2);
        let mut out: Phi = Vec::with_capacity(phi.len());
        for (e, c) in phi {
            let e2 = blk.left_apply(e);
            if e2.is_zero() {
                continue;
            }
            let c2 = if l <= bottom_row {
                let moved = blk.left_apply(c);
                if l < bottom_row {
                    moved
                } else {
                    let r = rect.expect("rectangle chosen at its bottom row");
                    let mut pairs = BitVec::zeros(gp * gp);
                    for xi in 0..gp {
                        for xi2 in 0..gp {
                            if moved.get(self.full_row(xi, r.left[0], r.bottom, r.right[0], xi2)) {
                                pairs.set(xi * gp + xi2);
                            }
                        }
                    }
                    pairs
                }
            } else if l <= top_row {
                let r = rect.expect("rectangle chosen at its bottom row");
                let k = l - bottom_row;
                let (sp, _) = split(prev, p);
                let (sc, _) = split(cur, p);
                let (_, tp) = split(prev, p);
                let (_, tc) = split(cur, p);
                let lb = self.gaps.block(sp * p + r.left[k - 1], sc * p + r.left[k]);
                let rb = self.gaps.block(r.right[k - 1] * p + tp, r.right[k] * p + tc);
                let mut pairs = 0u64;
                for x in c.ones() {
                    let right_bits = rb.row(x % gp)[0];
                    for eta in lb.row_ones(x / gp) {
                        pairs |= right_bits << (eta * gp);
                    }
                }
                if l < top_row {
                    let mut v = BitVec::zeros(gp * gp);
                    crate::matrix::iter_bits(&[pairs]).for_each(|i| v.set(i));
                    v
                } else {
                    let mut v = BitVec::zeros(self.rows.dim());
                    for i in crate::matrix::iter_bits(&[pairs]) {
                        v.set(self.full_row(i / gp, r.left[n - 1], r.top, r.right[n - 1], i % gp));
                    }
                    v
                }
            } else {
                blk.left_apply(c)
            };
            if l >= top_row && e2.is_subset(&c2) {
                continue;
            }
            out.push((e2, c2));
        }
        out.sort_by(|a, b| (a.0.words(), a.1.words()).cmp(&(b.0.words(), b.1.words())));
        out.dedup();
        out
    }

    fn fails_at_top(&self, prev: usize, cur: usize, phi: &Phi) -> Option<(usize, usize)> {
        let rows_j = &self.row_sup[prev * self.p * self.p + cur];
        phi.iter().enumerate().find_map(|(idx, (e, c))| e.first_outside(rows_j.words(), c.words()).map(|j| (idx, j)))
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &mut self,
        alphas: &mut Vec<usize>,
        ml: u16,
        mr: u16,
        rect: Option<usize>,
        phi: &Phi,
        memo: &mut HashMap<MemoKey, Suffix>,
    ) -> Result<Suffix> {
        let len = alphas.len();
        let h = self.height();
        let key = (len >= 2).then(|| (len, alphas[len - 1], ml, mr, rect.unwrap_or(usize::MAX), phi.clone()));
        if let Some(hit) = key.as_ref().and_then(|k| memo.get(k)) {
            return Ok(hit.clone());
        }
        let p2 = self.p * self.p;
        let prev = alphas[len - 1];
        let (a_prev, b_prev) = split(prev, self.p);
        let mut result = None;
        'outer: for alpha in 0..p2 {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return resource(format!("uniform-filling search exceeded {} nodes at row {}", self.max_nodes, len + 1));
            }
            let (a, b) = split(alpha, self.p);
            let nl = self.win.step_left(ml, a_prev, a);
            let nr = self.win.step_right(mr, b_prev, b);
            if nl == 0 || nr == 0 {
                continue;
            }
            let level = len + 1;
            if level == h {
                if self.fails_at_top(prev, alpha, phi).is_some() {
                    result = Some((vec![alpha], None));
                    break;
                }
                continue;
            }
            let choices: Vec<Option<usize>> =
                if level == self.lay.g + 3 { (0..self.rects.len()).map(Some).collect() } else { vec![rect] };
            for choice in choices {
                let next = if level == 2 {
                    self.col_sup[prev * p2 + alpha].ones().map(|i| (BitVec::unit(self.rows.dim(), i), BitVec::unit(self.rows.dim(), i))).collect()
                } else {
                    let r = choice.map(|i| self.rects[i].clone());
                    self.step(level, prev, alpha, r.as_ref(), phi)
                };
                if next.is_empty() {
                    continue;
                }
                alphas.push(alpha);
                let sub = self.descend(alphas, nl, nr, choice, &next, memo)?;
                alphas.pop();
                if let Some((mut tail, chosen)) = sub {
                    tail.insert(0, alpha);
                    let chosen = chosen.or(if choice != rect { choice } else { None });
                    result = Some((tail, chosen));
                    break 'outer;
                }
            }
        }
        if let Some(k) = key {
            memo.insert(k, result.clone());
        }
        Ok(result)
    }

    /// The first failing `(i, j)` for a complete corner sequence and rectangle.
    fn pin_rows(&self, alphas: &[usize], rect: &RectBoundary) -> Option<(usize, usize)> {
        let p2 = self.p * self.p;
        let h = self.height();
        for i in self.col_sup[alphas[0] * p2 + alphas[1]].ones() {
            let mut phi = vec![(BitVec::unit(self.rows.dim(), i), BitVec::unit(self.rows.dim(), i))];
            for l in 3..h {
                phi = self.step(l, alphas[l - 2], alphas[l - 1], Some(rect), &phi);
            }
            if let Some((_, j)) = self.fails_at_top(alphas[h - 2], alphas[h - 1], &phi) {
                return Some((i, j));
            }
        }
        None
    }

    fn witness(&self, alphas: &[usize], rect: &RectBoundary, i: usize, j: usize) -> Pattern {
        let (p, g, m, n) = (self.p, self.lay.g as i32, self.lay.m, self.lay.n);
        let w = self.lay.width();
        let h = self.height() as i32;
        let mut pat = Pattern::new();
        for (y, &alpha) in (1..).zip(alphas) {
            let (s, t) = split(alpha, p);
            pat.insert(Site::Cell(0, y), sym(s));
            pat.insert(Site::Cell(w - 1, y), sym(t));
        }
        let width = (w - 2) as usize;
        for (x, (&u, &v)) in (1..).zip(digits(i, width, p).iter().zip(&digits(j, width, p))) {
            pat.insert(Site::Cell(x, 2), u);
            pat.insert(Site::Cell(x, h - 1), v);
        }
        let (x0, y0) = (g + 1, g + 3);
        let x1 = x0 + m as i32 - 1;
        for (y, (&l, &r)) in (y0..).zip(rect.left.iter().zip(&rect.right)) {
            pat.insert(Site::Cell(x0, y), sym(l));
            pat.insert(Site::Cell(x1, y), sym(r));
        }
        let top = y0 + n as i32 - 1;
        for (x, (&u, &v)) in (x0 + 1..).zip(digits(rect.bottom, m - 2, p).iter().zip(&digits(rect.top, m - 2, p))) {
            pat.insert(Site::Cell(x, y0), u);
            pat.insert(Site::Cell(x, top), v);
        }
        pat
    }
}

/// Searches the uniform-filling instance of one size for a counterexample.
fn ufp_counterexample(b: &BasicSet, win: &Windows, g: usize, m: usize, n: usize, max_nodes: u64) -> Result<Option<Pattern>> {
    let mut search = UfpSearch::new(b, win, UfpLayout::new(g, m, n)?, max_nodes)?;
    let full = win.full_mask();
    let mut memo = HashMap::new();
    for root in 0..b.p() * b.p() {
        let mut alphas = vec![root];
        if let Some((tail, rect)) = search.descend(&mut alphas, full, full, None, &Vec::new(), &mut memo)? {
            alphas.extend(tail);
            let rect = search.rects[rect.expect("failing sequences pass the rectangle")].clone();
            let (i, j) = search.pin_rows(&alphas, &rect).expect("memoized failure reproduces");
            return Ok(Some(search.witness(&alphas, &rect, i, j)));
        }
    }
    Ok(None)
}

/// Searches the corner-gluing instance of one size for a counterexample.
fn corner_counterexample(b: &BasicSet, win: &Windows, g: usize, m: usize, n: usize) -> Result<Option<Pattern>> {
    let lay = CornerLayout::new(g, m, n)?;
    let p = b.p();
    let rows = Strips::new(b, win, m + g)?;
    let gaps = Strips::new(b, win, g + 1)?;
    let inner = Strips::new(b, win, m - 1)?;
    let col_len = n + g + 2;
    let mut kept = Vec::new();
    for bottom in 0..pow(p, m) {
        let a: Vec<usize> = digits(bottom, m, p).into_iter().map(usize::from).collect();
        for left in 0..pow(p, n - 1) {
            let bl: Vec<usize> = digits(left, n - 1, p).into_iter().map(usize::from).collect();
            let lefts: Vec<usize> = std::iter::once(a[0]).chain(bl.iter().copied()).collect();
            let start = BitVec::unit(inner.dim(), code_of(&a[1..m - 1], p));
            if inner.free_right(&lefts, start, a[m - 1], &[]).iter().any(|s| !s.is_zero()) {
                kept.push((a.clone(), bl));
            }
        }
    }
    let mut s = Vec::with_capacity(col_len);
    let mut found = None;
    corner_columns(win, col_len, &mut s, win.full_mask(), &mut |s| {
        for tc in 0..pow(p, m + g) {
            let t: Vec<usize> = digits(tc, m + g, p).into_iter().map(usize::from).collect();
            if !row_below_exists(win, s[0], s[1], &t) {
                continue;
            }
            let start = BitVec::unit(rows.dim(), code_of(&t[..m + g - 1], p));
            let above = rows.free_right(&s[1..], start.clone(), t[m + g - 1], &[]);
            if above.iter().all(|x| x.is_zero()) {
                continue;
            }
            for (a, bl) in &kept {
                let mut pins = vec![None; g + 2];
                pins[g + 1] = Some(a[m - 1]);
                let reach = rows.free_right(&s[1..g + 3], start.clone(), t[m + g - 1], &pins);
                let rest = pow(p, m - 1);
                let tail = code_of(&a[..m - 1], p);
                let mut low = BitVec::zeros(gaps.dim());
                for eta in 0..gaps.dim() {
                    if reach[a[m - 1]].get(eta * rest + tail) {
                        low.set(eta);
                    }
                }
                let corners: Vec<usize> = (0..n).map(|r| s[g + 2 + r] * p + if r == 0 { a[0] } else { bl[r - 1] }).collect();
                let up = gaps.chain(&corners);
                let joined = low.ones().any(|eta| !up.row_is_zero(eta));
                if !joined {
                    let mut pat = Pattern::new();
                    for (y, &v) in (0..).zip(s.iter()) {
                        pat.insert(Site::Cell(0, y), sym(v));
                    }
                    for (x, &v) in (1..).zip(&t) {
                        pat.insert(Site::Cell(x, 1), sym(v));
                    }
                    let (x0, y0) = ((g + 1) as i32, (g + 2) as i32);
                    for (x, &v) in (x0..).zip(a) {
                        pat.insert(Site::Cell(x, y0), sym(v));
                    }
                    for (y, &v) in (y0 + 1..).zip(bl) {
                        pat.insert(Site::Cell(x0, y), sym(v));
                    }
                    debug_assert_eq!(pat.len(), lay.expected_sites().len());
                    found = Some(pat);
                    return true;
                }
            }
        }
        false
    });
    Ok(found)
}

fn code_of(seq: &[usize], p: usize) -> usize {
    seq.iter().fold(0, |acc, &u| acc * p + u)
}

/// Whether a row exists under `(s0; t)` given the corner `s1` above `s0`.
fn row_below_exists(win: &Windows, s0: usize, s1: usize, t: &[usize]) -> bool {
    let upper: Vec<usize> = std::iter::once(s1).chain(t.iter().copied()).collect();
    let mut mask: u16 = 1 << s0;
    for x in 1..upper.len() {
        let mut next = 0;
        for c in (0..win.p).filter(|c| mask >> c & 1 == 1) {
            for c2 in 0..win.p {
                if win.get(c, c2, upper[x - 1], upper[x]) {
                    next |= 1 << c2;
                }
            }
        }
        mask = next;
        if mask == 0 {
            return false;
        }
    }
    true
}

/// Visits columns with an admissible left neighbour in lexicographic order until `visit` returns true.
fn corner_columns(win: &Windows, len: usize, s: &mut Vec<usize>, mask: u16, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if s.len() == len {
        return visit(s);
    }
    for v in 0..win.p {
        let next = match s.last() {
            Some(&prev) => win.step_left(mask, prev, v),
            None => mask,
        };
        if next == 0 {
            continue;
        }
        s.push(v);
        if corner_columns(win, len, s, next, visit) {
            return true;
        }
        s.pop();
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillCaps {
    pub g: usize,
    pub m_max: usize,
    pub n_max: usize,
}

/// Bounded check of the uniform-filling or corner-gluing characterization at gap `g`.
///
/// Every rectangle size `2 ≤ m ≤ m_max`, `2 ≤ n ≤ n_max` is searched
/// exhaustively; a counterexample refutes the property, a full pass is
/// evidence for it at this gap.
pub fn ufp_corner_gluing_evidence(b: &BasicSet, mode: FillMode, g: usize, m_max: usize, n_max: usize) -> Result<Verdict> {
    ufp_corner_gluing_evidence_capped(b, mode, g, m_max, n_max, DEFAULT_MAX_NODES)
}

pub fn ufp_corner_gluing_evidence_capped(
    b: &BasicSet,
    mode: FillMode,
    g: usize,
    m_max: usize,
    n_max: usize,
    max_nodes: u64,
) -> Result<Verdict> {
    b.require_vertex()?;
    if g < 1 {
        return domain("gap g must be at least 1");
    }
    let caps = FillCaps { g, m_max, n_max };
    let (property, route) = match mode {
        FillMode::Ufp => (Property::UniformFillingProperty, "uniform-filling/bounded-exhaustive"),
        FillMode::Corner => (Property::CornerGluing, "corner-gluing/bounded-exhaustive"),
    };
    if b.is_empty() || !degeneracy_profile(b)?.rectangle.is_established() {
        let note = "rectangle-extendability not established".to_string();
        return Ok(Verdict::new(property, Status::Unknown, "", Certificate::None, caps).with_notes(vec![note]));
    }
    let win = Windows::new(b);
    for m in 2..=m_max {
        for n in 2..=n_max {
            let (found, condition) = match mode {
                FillMode::Ufp => (ufp_counterexample(b, &win, g, m, n, max_nodes)?, FillCondition::UniformFilling { g, m, n }),
                FillMode::Corner => (corner_counterexample(b, &win, g, m, n)?, FillCondition::CornerGluing { g, m, n }),
            };
            if let Some(pat) = found {
                let cert = FillFailureCert { condition, witness: pattern_to_list(&pat) };
                return Ok(Verdict::new(property, Status::Refuted, route, Certificate::FillFailure(cert), caps));
            }
        }
    }
    Ok(Verdict::new(property, Status::Evidence, route, Certificate::None, caps))
}
