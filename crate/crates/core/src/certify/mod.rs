//! Finitely checkable primitivity certificates and the verdicts built on them.
//!
//! Every search works on an oriented copy of the basic set: the vertical
//! direction is the horizontal one of the transposed set, so `W`, `V_n` and the
//! vertical one-sided conditions come for free.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::basic_set::{digits, pow, BasicSet};
use crate::error::{resource, Result};
use crate::matrix::BoolMatrix;
use crate::primitivity::{primitivity_analysis, saturated, DEFAULT_MAX_STEPS};
use crate::structure::{classify, r_extendability, Degeneracy};
use crate::transfer::{block, elementary_bool, max_order, Direction, TransitionCache, DEFAULT_MAX_DIM};

mod diagonal;
mod pair;
mod verdict;

pub use diagonal::{
    check_invariant_cycle_conditions, cycle_product, elementary_sum, find_invariant_diagonal_cycle, invariant_candidates,
    is_invariant, maximal_invariant_set, DiagonalCycleCert,
};
pub use pair::{
    check_pair_conditions, find_commutative_pair, find_commutative_pair_with, pair_index, CommutativePairCert, PairIndex,
    PairOrientation, PairSearch, PairSide,
};
pub use verdict::{
    block_gluing_evidence, mixing_verdict, primitivity_all_n_certificate, replay, MixingCert, MixingRoute, NonPrimitiveCert,
    UniformPrimitivityCert,
};

/// Search and checking limits; recorded verbatim in every verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest connector order `m`.
    pub m_max: usize,
    /// Largest diagonal cycle length.
    pub q_max: usize,
    /// Largest power tried for a commutative pair.
    pub n_max: usize,
    /// Largest `n` for direct primitivity checks of `H_n`, `V_n`.
    pub direct_n: usize,
    /// Largest connector block side `p^{m-1}` the search will build.
    pub max_block_dim: usize,
}

impl Caps {
    /// Default caps with the direct-primitivity order scaled so that `p^n ≤ 64`.
    pub fn for_alphabet(p: usize) -> Caps {
        Caps { m_max: 7, q_max: 4, n_max: 8, direct_n: max_order(p, 64).max(2), max_block_dim: 729 }
    }

    pub(crate) fn orders(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        let limit = self.max_block_dim;
        (2..=self.m_max).take_while(move |&m| pow(p, m - 1) <= limit)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Mixing,
    BlockGluing,
    StrongSpecification,
    PrimitivityAllN,
    UniformFillingProperty,
    CornerGluing,
}

impl Property {
    pub fn name(self) -> &'static str {
        match self {
            Property::Mixing => "mixing",
            Property::BlockGluing => "block-gluing",
            Property::StrongSpecification => "strong-specification",
            Property::PrimitivityAllN => "primitivity-all-n",
            Property::UniformFillingProperty => "uniform-filling",
            Property::CornerGluing => "corner-gluing",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Proved,
    Refuted,
    Evidence,
    Unknown,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Proved => "proved",
            Status::Refuted => "refuted",
            Status::Evidence => "evidence",
            Status::Unknown => "unknown",
        }
    }
}

/// Which sufficient condition established primitivity of every `H_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "diagonal-cycle/non-degenerate")]
    DiagonalNonDegenerate,
    #[serde(rename = "diagonal-cycle/weakly-non-degenerate")]
    DiagonalWeak,
    #[serde(rename = "commutative-pair/non-degenerate")]
    PairNonDegenerate,
    #[serde(rename = "commutative-pair/weakly-non-degenerate")]
    PairWeak,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::DiagonalNonDegenerate => "diagonal-cycle/non-degenerate",
            Route::DiagonalWeak => "diagonal-cycle/weakly-non-degenerate",
            Route::PairNonDegenerate => "commutative-pair/non-degenerate",
            Route::PairWeak => "commutative-pair/weakly-non-degenerate",
        }
    }
}

/// Outcome of checking a certificate: the route that fired, or why none did.
pub type Check = std::result::Result<Route, String>;

/// Replayable payload of a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    None,
    DiagonalCycle(DiagonalCycleCert),
    CommutativePair(CommutativePairCert),
    NonPrimitive(NonPrimitiveCert),
    Mixing(MixingCert),
    UniformPrimitivity(UniformPrimitivityCert),
    StrongSpecification(crate::holefill::StrongSpecCert),
    FillFailure(crate::holefill::FillFailureCert),
    EdgeMixing(crate::edge::EdgeMixingCert),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property: Property,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    pub status: Status,
    /// Name of the route that decided the status, empty when none did.
    pub theorem: String,
    pub certificate: Certificate,
    pub caps: serde_json::Value,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    pub(crate) fn new(property: Property, status: Status, theorem: &str, certificate: Certificate, caps: impl Serialize) -> Verdict {
        Verdict {
            property,
            direction: None,
            status,
            theorem: theorem.to_string(),
            certificate,
            caps: serde_json::to_value(caps).unwrap_or(serde_json::Value::Null),
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_direction(mut self, dir: Direction) -> Verdict {
        self.direction = Some(dir);
        self
    }

    pub(crate) fn with_notes(mut self, notes: Vec<String>) -> Verdict {
        self.notes = notes;
        self
    }
}

/// `D_p`, the 1-based diagonal block indices `1 + j(p+1)`.
pub fn diagonal_indices(p: usize) -> Vec<usize> {
    (0..p).map(|j| 1 + j * (p + 1)).collect()
}

pub(crate) fn is_diagonal(p: usize, beta: usize) -> bool {
    beta >= 1 && beta <= p * p && (beta - 1) % (p + 1) == 0
}

/// Precomputed tables for one oriented direction.
pub(crate) struct Ctx {
    pub(crate) b: BasicSet,
    pub(crate) dir: Direction,
    pub(crate) p: usize,
    pub(crate) degeneracy: Degeneracy,
    r_ext: [bool; 4],
    hs: Vec<BoolMatrix>,
    sat: Vec<BoolMatrix>,
    prim: Vec<OnceLock<bool>>,
}

impl Ctx {
    /// Builds `H_n` of the oriented set for `2 ≤ n ≤ n_max`, stopping early at the dimension cap.
    pub(crate) fn new(b: &BasicSet, dir: Direction, n_max: usize) -> Result<Ctx> {
        b.require_vertex()?;
        let b = match dir {
            Direction::Horizontal => b.clone(),
            Direction::Vertical => b.transposed()?,
        };
        let p = b.p();
        let (h2, _) = b.transition_pair()?;
        let degeneracy = classify(&h2, p);
        let r_ext = r_extendability(&b)?;
        let top = n_max.max(2).min(max_order(p, DEFAULT_MAX_DIM));
        let mut cache = TransitionCache::new(&b, Direction::Horizontal)?;
        let mut hs = Vec::new();
        for n in 2..=top {
            hs.push(cache.get(n)?.clone());
        }
        let sat = hs.iter().map(saturated).collect();
        let prim = (0..hs.len()).map(|_| OnceLock::new()).collect();
        Ok(Ctx { b, dir, p, degeneracy, r_ext, hs, sat, prim })
    }

    pub(crate) fn h(&self, n: usize) -> Result<&BoolMatrix> {
        match n.checked_sub(2).and_then(|i| self.hs.get(i)) {
            Some(h) => Ok(h),
            None => resource(format!("order {n} transition matrix was not built")),
        }
    }

    /// Block `α` of `E(H_n)`, `alpha0` 0-based.
    pub(crate) fn e_block(&self, n: usize, alpha0: usize) -> Result<BoolMatrix> {
        self.h(n)?;
        let d = digits(alpha0, 2, self.p);
        Ok(block(&self.sat[n - 2], self.p, d[0] as usize, d[1] as usize))
    }

    pub(crate) fn h_primitive(&self, n: usize) -> Result<bool> {
        let h = self.h(n)?;
        Ok(*self.prim[n - 2].get_or_init(|| primitivity_analysis(h).map(|r| r.primitive).unwrap_or(false)))
    }

    /// Shadow of `Σ_{l∈K} H^{(l)}_{m,n;α}`; `alpha0` and `ks` are 0-based.
    pub(crate) fn elementary_sum(&self, m: usize, n: usize, alpha0: usize, ks: &[usize]) -> Result<BoolMatrix> {
        let h = self.h(n)?;
        let mut acc = BoolMatrix::zeros(h.dim() / self.p);
        for &k in ks {
            acc = acc.or(&elementary_bool(h, self.p, m, alpha0, k));
        }
        Ok(acc)
    }

    /// Name of the one-sided condition `i` (1-based, oriented) in the caller's frame.
    fn r_label(&self, i: usize) -> usize {
        match self.dir {
            Direction::Horizontal => i,
            Direction::Vertical => [2, 1, 4, 3][i - 1],
        }
    }

    pub(crate) fn table_name(&self) -> &'static str {
        match self.dir {
            Direction::Horizontal => "horizontal table",
            Direction::Vertical => "vertical table",
        }
    }

    /// Weak non-degeneracy plus the three one-sided conditions the weak routes need.
    pub(crate) fn weak_premises(&self) -> std::result::Result<(), String> {
        if !self.degeneracy.is_weakly_non_degenerate() {
            return Err(format!("{} is not weakly non-degenerate", self.table_name()));
        }
        let missing: Vec<String> =
            (1..=3).filter(|&i| !self.r_ext[i - 1]).map(|i| format!("R({})", self.r_label(i))).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(format!("one-sided extendability fails: {}", missing.join(", ")))
        }
    }
}

/// Least `a ≥ 1` with `Aᵃ ≥ target`, searched over the whole eventually periodic power sequence.
pub(crate) fn dominating_power(a: &BoolMatrix, target: &BoolMatrix) -> Result<Option<usize>> {
    let mut seen = std::collections::HashMap::<u64, Vec<usize>>::new();
    let mut power = a.clone();
    for n in 1..=DEFAULT_MAX_STEPS {
        if power.dominates(target) {
            return Ok(Some(n));
        }
        let h = power.hash64();
        if seen.get(&h).is_some_and(|list| list.iter().any(|&e| a.pow(e) == power)) {
            return Ok(None);
        }
        seen.entry(h).or_default().push(n);
        power = power.mul(a);
    }
    resource(format!("power sequence did not repeat within {DEFAULT_MAX_STEPS} steps"))
}
