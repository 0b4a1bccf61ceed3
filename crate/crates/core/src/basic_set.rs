//! Symbols, the counting function and the allowed-pattern set.
//!
//! Indices are 1-based at the public boundary (`psi`, `unpsi`, `pattern_coords`)
//! and 0-based everywhere inside the crate. The only conversion is `code + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matrix::BoolMatrix;

pub type Symbol = u8;

/// Largest supported alphabet.
pub const MAX_SYMBOLS: usize = 8;

pub(crate) fn pow(p: usize, n: usize) -> usize {
    p.pow(n as u32)
}

/// 0-based positional code of `seq` in base `p`, most significant first.
pub(crate) fn code(seq: &[Symbol], p: usize) -> usize {
    seq.iter().fold(0, |acc, &u| acc * p + u as usize)
}

/// Inverse of [`code`] for sequences of length `n`.
pub(crate) fn digits(mut c: usize, n: usize, p: usize) -> Vec<Symbol> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = (c % p) as Symbol;
        c /= p;
    }
    out
}

pub(crate) fn check_alphabet(p: usize) -> Result<()> {
    if !(2..=MAX_SYMBOLS).contains(&p) {
        return domain(format!("alphabet size {p} outside 2..={MAX_SYMBOLS}"));
    }
    Ok(())
}

/// Counting function: `1 + Σ u_k p^(n-k)`.
pub fn psi(seq: &[Symbol], p: usize) -> Result<usize> {
    check_alphabet(p)?;
    if seq.is_empty() {
        return domain("psi of an empty sequence");
    }
    if let Some(&u) = seq.iter().find(|&&u| u as usize >= p) {
        return domain(format!("symbol {u} not below {p}"));
    }
    Ok(code(seq, p) + 1)
}

/// Inverse of [`psi`]: the length-`n` sequence with index `index`.
pub fn unpsi(index: usize, n: usize, p: usize) -> Result<Vec<Symbol>> {
    check_alphabet(p)?;
    if n == 0 || n > 64 {
        return domain(format!("sequence length {n} unsupported"));
    }
    let limit = p.checked_pow(n as u32);
    match limit {
        Some(l) if index >= 1 && index <= l => Ok(digits(index - 1, n, p)),
        _ => domain(format!("index {index} outside [1, {p}^{n}]")),
    }
}

/// A 2×2 vertex pattern; `u_st` sits at x = s, y = t.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexPattern {
    pub u00: Symbol,
    pub u10: Symbol,
    pub u01: Symbol,
    pub u11: Symbol,
}

impl VertexPattern {
    pub fn new(u00: Symbol, u10: Symbol, u01: Symbol, u11: Symbol) -> Self {
        VertexPattern { u00, u10, u01, u11 }
    }

    pub fn from_array(a: [Symbol; 4]) -> Self {
        VertexPattern::new(a[0], a[1], a[2], a[3])
    }

    /// `[u00, u10, u01, u11]`.
    pub fn to_array(self) -> [Symbol; 4] {
        [self.u00, self.u10, self.u01, self.u11]
    }

    /// The pattern with x and y exchanged.
    pub fn transposed(self) -> Self {
        VertexPattern::new(self.u00, self.u01, self.u10, self.u11)
    }
}

/// `(i1, j1, i2, j2)`: left/right column and bottom/top row indices, 1-based.
pub fn pattern_coords(pat: VertexPattern, p: usize) -> Result<(usize, usize, usize, usize)> {
    Ok((
        psi(&[pat.u00, pat.u01], p)?,
        psi(&[pat.u10, pat.u11], p)?,
        psi(&[pat.u00, pat.u10], p)?,
        psi(&[pat.u01, pat.u11], p)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Vertex,
    Edge,
}

/// The allowed local patterns.
///
/// Vertex mode stores `[u00, u10, u01, u11]`; edge mode stores tiles
/// `[bottom, top, left, right]`. Membership is a dense table over all `p^4` tuples,
/// so iteration order is the canonical lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasicSet {
    p: usize,
    mode: Mode,
    member: Vec<bool>,
}

impl BasicSet {
    pub fn empty(p: usize, mode: Mode) -> Result<Self> {
        check_alphabet(p)?;
        Ok(BasicSet { p, mode, member: vec![false; pow(p, 4)] })
    }

    pub fn full(p: usize, mode: Mode) -> Result<Self> {
        check_alphabet(p)?;
        Ok(BasicSet { p, mode, member: vec![true; pow(p, 4)] })
    }

    /// Builds a set from tuples; repeated tuples are merged.
    pub fn from_tuples<I: IntoIterator<Item = [Symbol; 4]>>(p: usize, mode: Mode, tuples: I) -> Result<Self> {
        let mut set = BasicSet::empty(p, mode)?;
        for t in tuples {
            set.insert(t)?;
        }
        Ok(set)
    }

    /// All tuples satisfying `keep`.
    pub fn from_predicate(p: usize, mode: Mode, keep: impl Fn([Symbol; 4]) -> bool) -> Result<Self> {
        let mut set = BasicSet::empty(p, mode)?;
        for c in 0..pow(p, 4) {
            let t = digits(c, 4, p);
            set.member[c] = keep([t[0], t[1], t[2], t[3]]);
        }
        Ok(set)
    }

    /// Vertex set `{ pattern : h_{i1,j1} = 1 }` read from a p²×p² horizontal matrix.
    pub fn from_h2(p: usize, h2: &BoolMatrix) -> Result<Self> {
        check_alphabet(p)?;
        if h2.dim() != p * p {
            return Err(Error::Format(format!("h2 must be {0}x{0}, got {1}x{1}", p * p, h2.dim())));
        }
        BasicSet::from_predicate(p, Mode::Vertex, |[u00, u10, u01, u11]| {
            h2.get(code(&[u00, u01], p), code(&[u10, u11], p))
        })
    }

    pub fn insert(&mut self, t: [Symbol; 4]) -> Result<bool> {
        if let Some(&u) = t.iter().find(|&&u| u as usize >= self.p) {
            return domain(format!("symbol {u} not below {}", self.p));
        }
        let c = code(&t, self.p);
        let fresh = !self.member[c];
        self.member[c] = true;
        Ok(fresh)
    }

    pub fn remove(&mut self, t: [Symbol; 4]) {
        if t.iter().all(|&u| (u as usize) < self.p) {
            self.member[code(&t, self.p)] = false;
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    pub fn contains(&self, t: [Symbol; 4]) -> bool {
        t.iter().all(|&u| (u as usize) < self.p) && self.member[code(&t, self.p)]
    }

    /// Membership by 0-based tuple code.
    pub(crate) fn contains_code(&self, c: usize) -> bool {
        self.member[c]
    }

    pub fn contains_pattern(&self, pat: VertexPattern) -> bool {
        self.contains(pat.to_array())
    }

    /// Tuples in canonical order.
    pub fn tuples(&self) -> Vec<[Symbol; 4]> {
        (0..self.member.len())
            .filter(|&c| self.member[c])
            .map(|c| {
                let d = digits(c, 4, self.p);
                [d[0], d[1], d[2], d[3]]
            })
            .collect()
    }

    pub fn is_subset(&self, other: &BasicSet) -> bool {
        self.p == other.p && self.member.iter().zip(&other.member).all(|(&a, &b)| !a || b)
    }

    /// Vertex set with x and y exchanged in every pattern.
    pub fn transposed(&self) -> Result<Self> {
        self.require_vertex()?;
        BasicSet::from_tuples(
            self.p,
            Mode::Vertex,
            self.tuples().into_iter().map(|t| VertexPattern::from_array(t).transposed().to_array()),
        )
    }

    pub(crate) fn require_vertex(&self) -> Result<()> {
        if self.mode != Mode::Vertex {
            return domain("operation needs a vertex-mode basic set");
        }
        Ok(())
    }

    pub(crate) fn require_edge(&self) -> Result<()> {
        if self.mode != Mode::Edge {
            return domain("operation needs an edge-mode basic set");
        }
        Ok(())
    }

    /// `(H2, V2)` with `h_{i1,j1} = v_{i2,j2} = 1` exactly for the allowed patterns.
    pub fn transition_pair(&self) -> Result<(BoolMatrix, BoolMatrix)> {
        self.require_vertex()?;
        let p = self.p;
        let mut h2 = BoolMatrix::zeros(p * p);
        let mut v2 = BoolMatrix::zeros(p * p);
        for [u00, u10, u01, u11] in self.tuples() {
            h2.set(code(&[u00, u01], p), code(&[u10, u11], p), true);
            v2.set(code(&[u00, u10], p), code(&[u01, u11], p), true);
        }
        Ok((h2, v2))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BasicSetDoc = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        doc.into_basic_set()
    }

    /// Canonical JSON: explicit tuple list in canonical order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&BasicSetDoc::from(self)).expect("basic set serializes")
    }
}

/// On-disk form of a basic set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicSetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: usize,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<[Symbol; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h2: Option<Vec<Vec<u8>>>,
}

impl BasicSetDoc {
    pub fn into_basic_set(self) -> Result<BasicSet> {
        check_alphabet(self.p).map_err(|e| Error::Format(e.to_string()))?;
        match (self.allowed, self.h2) {
            (Some(list), None) => {
                let mut set = BasicSet::empty(self.p, self.mode)?;
                for t in list {
                    let fresh = set.insert(t).map_err(|e| Error::Format(e.to_string()))?;
                    if !fresh {
                        return Err(Error::Format(format!("duplicate pattern {t:?}")));
                    }
                }
                Ok(set)
            }
            (None, Some(rows)) => {
                if self.mode != Mode::Vertex {
                    return Err(Error::Format("h2 matrices are only accepted in vertex mode".into()));
                }
                let h2 = BoolMatrix::from_rows(&rows)?;
                BasicSet::from_h2(self.p, &h2)
            }
            (Some(_), Some(_)) => Err(Error::Format("give either allowed or h2, not both".into())),
            (None, None) => Err(Error::Format("missing allowed or h2".into())),
        }
    }
}

impl From<&BasicSet> for BasicSetDoc {
    fn from(b: &BasicSet) -> Self {
        BasicSetDoc { name: None, p: b.p, mode: b.mode, allowed: Some(b.tuples()), h2: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_examples() {
        assert_eq!(psi(&[0, 0], 2).unwrap(), 1);
        assert_eq!(psi(&[1, 1], 2).unwrap(), 4);
        assert_eq!(psi(&[2, 0, 0, 2, 2, 2], 3).unwrap(), 513);
        assert_eq!(psi(&[2, 2, 2, 0, 2, 0], 3).unwrap(), 709);
        assert!(psi(&[2], 2).is_err());
        assert!(psi(&[], 2).is_err());
    }

    #[test]
    fn unpsi_examples() {
        assert_eq!(unpsi(1, 2, 2).unwrap(), vec![0, 0]);
        assert_eq!(unpsi(4, 2, 2).unwrap(), vec![1, 1]);
        assert!(unpsi(12, 2, 2).is_err());
        assert_eq!(unpsi(12, 4, 2).unwrap(), vec![1, 0, 1, 1]);
        assert!(unpsi(0, 3, 2).is_err());
    }

    #[test]
    fn psi_roundtrip_exhaustive() {
        for p in 2..=4 {
            for n in 1..=6 {
                for i in 1..=pow(p, n) {
                    assert_eq!(psi(&unpsi(i, n, p).unwrap(), p).unwrap(), i);
                }
            }
        }
        // longer sequences, sampled
        for p in 2..=4 {
            for i in (1..=pow(p, 12)).step_by(997) {
                assert_eq!(psi(&unpsi(i, 12, p).unwrap(), p).unwrap(), i);
            }
        }
    }

    #[test]
    fn coords_examples() {
        assert_eq!(pattern_coords(VertexPattern::new(0, 0, 0, 0), 2).unwrap(), (1, 1, 1, 1));
        assert_eq!(pattern_coords(VertexPattern::new(0, 1, 1, 0), 2).unwrap(), (2, 3, 2, 3));
        assert_eq!(pattern_coords(VertexPattern::new(0, 1, 0, 1), 3).unwrap(), (1, 5, 2, 2));
    }

    #[test]
    fn json_forms() {
        let b = BasicSet::from_json(r#"{"p":2,"mode":"vertex","allowed":[[0,0,0,0]]}"#).unwrap();
        assert_eq!(b.len(), 1);
        assert!(BasicSet::from_json(r#"{"p":2,"mode":"vertex","allowed":[[0,0,0,0],[0,0,0,0]]}"#).is_err());
        assert!(BasicSet::from_json(r#"{"p":2,"mode":"vertex","h2":[[1,1],[1,1]]}"#).is_err());
        assert!(BasicSet::from_json(r#"{"p":2,"mode":"vertex","h2":[[1,1,1],[1,1,1],[1,1,1]]}"#).is_err());
        let gm = BasicSet::from_json(
            r#"{"p":2,"mode":"vertex","h2":[[1,1,1,0],[1,0,1,0],[1,1,0,0],[0,0,0,0]]}"#,
        )
        .unwrap();
        assert_eq!(gm.len(), 7);
        let again = BasicSet::from_json(&gm.to_json()).unwrap();
        assert_eq!(again, gm);
        assert_eq!(again.to_json(), gm.to_json());
    }

    #[test]
    fn full_set_transition_pair() {
        let b = BasicSet::full(2, Mode::Vertex).unwrap();
        let (h, v) = b.transition_pair().unwrap();
        assert_eq!(h, BoolMatrix::ones(4));
        assert_eq!(v, BoolMatrix::ones(4));
    }
}
