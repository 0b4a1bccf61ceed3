//! Primitive commutative cycle pairs.

use serde::{Deserialize, Serialize};

use super::{Caps, Check, Ctx, Route};
use crate::basic_set::{code, digits, pow, BasicSet};
use crate::connect::build_connecting;
use crate::error::{Error, Result};
use crate::primitivity::dominance_exponent;
use crate::structure::Degeneracy;
use crate::transfer::{elementary_bool, Direction};

/// `⟨m, ᾱ; K, L⟩`, all 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairIndex {
    pub m: usize,
    pub alpha: usize,
    pub k: usize,
    pub l: usize,
}

/// Which off-diagonal entry of the diagonal connector block links the two words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairOrientation {
    KL,
    LK,
}

/// Which elementary pattern carries the dominating power.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairSide {
    K,
    L,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommutativePairCert {
    pub direction: Direction,
    /// Closed cycle `i_1 i_2 … i_q i_1`, symbols 1-based.
    pub i_cycle: Vec<usize>,
    /// Closed cycle `i_1 j_2 … j_{q'} i_1`.
    pub j_cycle: Vec<usize>,
    pub index: PairIndex,
    /// Power of the elementary pattern on `side` dominating the saturation block.
    pub n: usize,
    pub side: PairSide,
    pub orientation: PairOrientation,
}

impl CommutativePairCert {
    pub fn i_label(&self) -> String {
        self.i_cycle.iter().map(|s| s.to_string()).collect()
    }

    pub fn j_label(&self) -> String {
        self.j_cycle.iter().map(|s| s.to_string()).collect()
    }
}

/// Decodes `⟨m, ᾱ; K, L⟩` from two closed cycles over 1-based symbols sharing their base.
pub fn pair_index(p: usize, i_cycle: &[usize], j_cycle: &[usize]) -> Result<PairIndex> {
    let bad = |msg: &str| Err(Error::Domain(msg.to_string()));
    if i_cycle.len() < 2 || j_cycle.len() < 2 {
        return bad("each cycle needs at least one step");
    }
    if i_cycle.iter().chain(j_cycle).any(|&s| s == 0 || s > p) {
        return bad("cycle symbols must lie in [1, p]");
    }
    let base = i_cycle[0];
    if *i_cycle.last().unwrap() != base || j_cycle[0] != base || *j_cycle.last().unwrap() != base {
        return bad("both cycles must start and end at the same base symbol");
    }
    let inner_i: Vec<u8> = i_cycle[1..i_cycle.len() - 1].iter().map(|&s| (s - 1) as u8).collect();
    let inner_j: Vec<u8> = j_cycle[1..j_cycle.len() - 1].iter().map(|&s| (s - 1) as u8).collect();
    let b0 = (base - 1) as u8;
    let k: Vec<u8> = inner_i.iter().chain([&b0]).chain(&inner_j).copied().collect();
    let l: Vec<u8> = inner_j.iter().chain([&b0]).chain(&inner_i).copied().collect();
    Ok(PairIndex {
        m: i_cycle.len() + j_cycle.len() - 2,
        alpha: code(&[b0, b0], p) + 1,
        k: code(&k, p) + 1,
        l: code(&l, p) + 1,
    })
}

/// Optional restrictions on the enumeration: base symbol (1-based) and `(q, q')`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSearch {
    pub base: Option<usize>,
    pub split: Option<(usize, usize)>,
}

/// Dominating power and orientation for a decoded index, or `None`.
fn witness(ctx: &Ctx, s_block: &crate::matrix::BoolMatrix, idx: &PairIndex, n_max: usize) -> Result<Option<(usize, PairSide, PairOrientation)>> {
    let (k0, l0, a0) = (idx.k - 1, idx.l - 1, idx.alpha - 1);
    let orientation = if s_block.get(k0, l0) {
        PairOrientation::KL
    } else if s_block.get(l0, k0) {
        PairOrientation::LK
    } else {
        return Ok(None);
    };
    let h2 = ctx.h(2)?;
    let target = ctx.e_block(2, a0)?;
    for (side, c) in [(PairSide::K, k0), (PairSide::L, l0)] {
        let e = elementary_bool(h2, ctx.p, idx.m, a0, c);
        if let Some(n) = dominance_exponent(&e, &target, n_max) {
            return Ok(Some((n, side, orientation)));
        }
    }
    Ok(None)
}

/// First primitive commutative pair in order of `(m, base, q, I word, J word)`.
pub fn find_commutative_pair(b: &BasicSet, dir: Direction, caps: &Caps) -> Result<Option<CommutativePairCert>> {
    find_commutative_pair_with(b, dir, caps, PairSearch::default())
}

pub fn find_commutative_pair_with(b: &BasicSet, dir: Direction, caps: &Caps, filter: PairSearch) -> Result<Option<CommutativePairCert>> {
    let ctx = Ctx::new(b, dir, 2)?;
    search(&ctx, caps, filter)
}

pub(crate) fn search(ctx: &Ctx, caps: &Caps, filter: PairSearch) -> Result<Option<CommutativePairCert>> {
    let p = ctx.p;
    for m in caps.orders(p) {
        if filter.split.is_some_and(|(q, q2)| q + q2 != m) {
            continue;
        }
        let fam = build_connecting(&ctx.b, Direction::Horizontal, m)?.to_s_w();
        for i1 in 1..=p {
            if filter.base.is_some_and(|base| base != i1) {
                continue;
            }
            let alpha0 = (i1 - 1) * (p + 1);
            let s_block = fam.block0(alpha0, alpha0);
            for q in 1..m {
                if filter.split.is_some_and(|(fq, _)| fq != q) {
                    continue;
                }
                let q2 = m - q;
                for iw in 0..pow(p, q - 1) {
                    for jw in 0..pow(p, q2 - 1) {
                        let close = |inner: Vec<u8>| -> Vec<usize> {
                            std::iter::once(i1).chain(inner.into_iter().map(|d| d as usize + 1)).chain([i1]).collect()
                        };
                        let i_cycle = close(digits(iw, q - 1, p));
                        let j_cycle = close(digits(jw, q2 - 1, p));
                        let index = pair_index(p, &i_cycle, &j_cycle)?;
                        if let Some((n, side, orientation)) = witness(ctx, s_block, &index, caps.n_max)? {
                            return Ok(Some(CommutativePairCert { direction: ctx.dir, i_cycle, j_cycle, index, n, side, orientation }));
                        }
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Re-validates a pair from a fresh build and reports the route it supports.
pub fn check_pair_conditions(b: &BasicSet, cert: &CommutativePairCert) -> Result<Check> {
    let p = b.p();
    let index = pair_index(p, &cert.i_cycle, &cert.j_cycle).map_err(|e| Error::Certificate(e.to_string()))?;
    if index != cert.index {
        return Err(Error::Certificate("stated index does not match the cycles".into()));
    }
    if cert.n == 0 {
        return Err(Error::Certificate("power must be positive".into()));
    }
    let ctx = Ctx::new(b, cert.direction, 2)?;
    let fam = build_connecting(&ctx.b, Direction::Horizontal, index.m)?.to_s_w();
    let a0 = index.alpha - 1;
    let s_block = fam.block0(a0, a0);
    let (k0, l0) = (index.k - 1, index.l - 1);
    let linked = match cert.orientation {
        PairOrientation::KL => s_block.get(k0, l0),
        PairOrientation::LK => s_block.get(l0, k0),
    };
    if !linked {
        return Ok(Err("the stated connector entry is zero".into()));
    }
    let c = match cert.side {
        PairSide::K => k0,
        PairSide::L => l0,
    };
    let e = elementary_bool(ctx.h(2)?, p, index.m, a0, c);
    if !e.pow(cert.n).dominates(&ctx.e_block(2, a0)?) {
        return Ok(Err("the stated power does not dominate the saturation block".into()));
    }
    route(&ctx)
}

pub(crate) fn route(ctx: &Ctx) -> Result<Check> {
    if ctx.degeneracy == Degeneracy::NonDegenerate {
        return Ok(Ok(Route::PairNonDegenerate));
    }
    if let Err(why) = ctx.weak_premises() {
        return Ok(Err(why));
    }
    if !ctx.h_primitive(2)? {
        return Ok(Err("order 2 transition matrix is not primitive".into()));
    }
    Ok(Ok(Route::PairWeak))
}
