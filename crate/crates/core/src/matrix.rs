//! Dense square matrices: bit-packed zero-one and saturating counts.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const PAR_THRESHOLD: usize = 256;

/// Square zero-one matrix with rows packed into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BoolMatrix {
    dim: usize,
    words: usize,
    data: Vec<u64>,
}

impl BoolMatrix {
    pub fn zeros(dim: usize) -> Self {
        let words = dim.div_ceil(64).max(1);
        BoolMatrix { dim, words, data: vec![0; dim * words] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = BoolMatrix::zeros(dim);
        for i in 0..dim {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(dim: usize) -> Self {
        BoolMatrix::from_fn(dim, |_, _| true)
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut m = BoolMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                if f(i, j) {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    /// Parses a square 0/1 table; any nonzero entry counts as 1.
    pub fn from_rows<T: AsRef<[u8]>>(rows: &[T]) -> Result<Self> {
        let dim = rows.len();
        let mut m = BoolMatrix::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Format(format!("row {i} has {} entries, expected {dim}", r.len())));
            }
            for (j, &x) in r.iter().enumerate() {
                if x > 1 {
                    return Err(Error::Format(format!("entry ({i},{j}) is {x}, expected 0 or 1")));
                }
                m.set(i, j, x == 1);
            }
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j) as u8).collect()).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.data[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    /// Column indices set in row `i`.
    pub fn row_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        iter_bits(self.row(i)).filter(move |&j| j < self.dim)
    }

    /// Boolean product `self · rhs`.
    pub fn mul(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = BoolMatrix::zeros(self.dim);
        let words = self.words;
        let kernel = |i: usize, dst: &mut [u64]| {
            for k in iter_bits(self.row(i)) {
                for (d, s) in dst.iter_mut().zip(rhs.row(k)) {
                    *d |= s;
                }
            }
        };
        if self.dim >= PAR_THRESHOLD {
            out.data.par_chunks_mut(words).enumerate().for_each(|(i, dst)| kernel(i, dst));
        } else {
            out.data.chunks_mut(words).enumerate().for_each(|(i, dst)| kernel(i, dst));
        }
        out
    }

    /// `self^n`, with `self^0 = I`.
    pub fn pow(&self, mut n: usize) -> BoolMatrix {
        let mut result = BoolMatrix::identity(self.dim);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = result.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Entrywise AND.
    pub fn and(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a & b).collect();
        BoolMatrix { dim: self.dim, words: self.words, data }
    }

    /// Entrywise OR.
    pub fn or(&self, rhs: &BoolMatrix) -> BoolMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a | b).collect();
        BoolMatrix { dim: self.dim, words: self.words, data }
    }

    /// `self ≥ rhs` entrywise.
    pub fn dominates(&self, rhs: &BoolMatrix) -> bool {
        self.dim == rhs.dim && self.data.iter().zip(&rhs.data).all(|(a, b)| b & !a == 0)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> u64 {
        self.data.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn row_is_zero(&self, i: usize) -> bool {
        self.row(i).iter().all(|&w| w == 0)
    }

    /// `r(A)`: which rows are nonzero.
    pub fn row_support(&self) -> Vec<bool> {
        (0..self.dim).map(|i| !self.row_is_zero(i)).collect()
    }

    /// `c(A)`: which columns are nonzero.
    pub fn col_support(&self) -> Vec<bool> {
        let mut acc = vec![0u64; self.words];
        for i in 0..self.dim {
            for (a, w) in acc.iter_mut().zip(self.row(i)) {
                *a |= w;
            }
        }
        (0..self.dim).map(|j| (acc[j / 64] >> (j % 64)) & 1 == 1).collect()
    }

    /// Has a zero row or a zero column.
    pub fn is_compressible(&self) -> bool {
        self.row_support().contains(&false) || self.col_support().contains(&false)
    }

    pub fn transpose(&self) -> BoolMatrix {
        BoolMatrix::from_fn(self.dim, |i, j| self.get(j, i))
    }

    /// The `size`-square submatrix with top-left corner `(r0, c0)`.
    pub fn submatrix(&self, r0: usize, c0: usize, size: usize) -> BoolMatrix {
        let mut out = BoolMatrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                if self.get(r0 + i, c0 + j) {
                    out.set(i, j, true);
                }
            }
        }
        out
    }

    /// `v · self` for a row vector `v`.
    pub(crate) fn left_apply(&self, v: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.dim);
        for k in v.ones() {
            for (d, s) in out.data.iter_mut().zip(self.row(k)) {
                *d |= s;
            }
        }
        out
    }

    pub(crate) fn hash64(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.data.hash(&mut h);
        h.finish()
    }
}

impl fmt::Debug for BoolMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BoolMatrix {}x{}", self.dim, self.dim)?;
        for i in 0..self.dim {
            let line: String = (0..self.dim).map(|j| if self.get(i, j) { '1' } else { '0' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl Serialize for BoolMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoolMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(d)?;
        BoolMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

/// Fixed-length bit vector used for reachability sets.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub(crate) struct BitVec {
    len: usize,
    data: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, data: vec![0; len.div_ceil(64).max(1)] }
    }

    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = BitVec::zeros(len);
        v.set(i);
        v
    }

    pub fn set(&mut self, i: usize) {
        self.data[i / 64] |= 1 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        (self.data[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.data).filter(move |&i| i < self.len)
    }

    pub fn or_assign(&mut self, rhs: &BitVec) {
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a |= b;
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVec::zeros(bits.len());
        for (i, _) in bits.iter().enumerate().filter(|(_, &b)| b) {
            v.set(i);
        }
        v
    }

    pub fn is_subset(&self, rhs: &BitVec) -> bool {
        self.data.iter().zip(&rhs.data).all(|(a, b)| a & !b == 0)
    }

    /// Least index set in `self` and `mask` but not in `excluded`.
    pub fn first_outside(&self, mask: &[u64], excluded: &[u64]) -> Option<usize> {
        for (wi, ((a, m), e)) in self.data.iter().zip(mask).zip(excluded).enumerate() {
            let w = a & m & !e;
            if w != 0 {
                return Some(wi * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.data
    }
}

/// Square matrix of nonnegative counts; arithmetic saturates at `u64::MAX`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CountMatrix {
    dim: usize,
    data: Vec<u64>,
    saturated: bool,
}

impl CountMatrix {
    pub fn zeros(dim: usize) -> Self {
        CountMatrix { dim, data: vec![0; dim * dim], saturated: false }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CountMatrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1;
        }
        m
    }

    pub fn from_bool(b: &BoolMatrix) -> Self {
        let dim = b.dim();
        let mut m = CountMatrix::zeros(dim);
        for i in 0..dim {
            for j in b.row_ones(i) {
                m.data[i * dim + j] = 1;
            }
        }
        m
    }

    pub fn from_rows<T: AsRef<[u64]>>(rows: &[T]) -> Result<Self> {
        let dim = rows.len();
        let mut m = CountMatrix::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Format(format!("row {i} has {} entries, expected {dim}", r.len())));
            }
            m.data[i * dim..(i + 1) * dim].copy_from_slice(r);
        }
        Ok(m)
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        self.data.chunks(self.dim.max(1)).take(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.dim + j] = v;
    }

    /// True once any operation producing this matrix hit the saturation sentinel.
    pub fn saturated(&self) -> bool {
        self.saturated
    }

    pub fn add(&self, rhs: &CountMatrix) -> CountMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut sat = self.saturated || rhs.saturated;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| {
                a.checked_add(b).unwrap_or_else(|| {
                    sat = true;
                    u64::MAX
                })
            })
            .collect();
        CountMatrix { dim: self.dim, data, saturated: sat }
    }

    pub fn mul(&self, rhs: &CountMatrix) -> CountMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = CountMatrix::zeros(n);
        let mut sat = self.saturated || rhs.saturated;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.data[k * n + j];
                    if b == 0 {
                        continue;
                    }
                    let prod = a.checked_mul(b);
                    let cell = &mut out.data[i * n + j];
                    match prod.and_then(|x| cell.checked_add(x)) {
                        Some(v) => *cell = v,
                        None => {
                            *cell = u64::MAX;
                            sat = true;
                        }
                    }
                }
            }
        }
        out.saturated = sat;
        out
    }

    /// Entry > 0 pattern.
    pub fn shadow(&self) -> BoolMatrix {
        BoolMatrix::from_fn(self.dim, |i, j| self.get(i, j) > 0)
    }

    pub fn entry_sum(&self) -> u64 {
        self.data.iter().fold(0u64, |acc, &x| acc.saturating_add(x))
    }

    pub fn submatrix(&self, r0: usize, c0: usize, size: usize) -> CountMatrix {
        let mut out = CountMatrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                out.set(i, j, self.get(r0 + i, c0 + j));
            }
        }
        out.saturated = self.saturated;
        out
    }
}

impl fmt::Debug for CountMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CountMatrix {}x{}", self.dim, self.dim)?;
        for r in self.to_rows() {
            writeln!(f, "  {r:?}")?;
        }
        Ok(())
    }
}

impl Serialize for CountMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CountMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u64>>::deserialize(d)?;
        CountMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `m`-th power with saturating arithmetic; `m ≥ 1`.
pub fn power_with_saturation(a: &CountMatrix, m: usize) -> CountMatrix {
    assert!(m >= 1, "power must be at least 1");
    let mut acc = a.clone();
    for _ in 1..m {
        acc = acc.mul(a);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_mul(a: &BoolMatrix, b: &BoolMatrix) -> BoolMatrix {
        BoolMatrix::from_fn(a.dim(), |i, j| (0..a.dim()).any(|k| a.get(i, k) && b.get(k, j)))
    }

    #[test]
    fn mul_matches_naive_across_word_boundaries() {
        for dim in [1, 3, 63, 64, 65, 130, 300] {
            let a = BoolMatrix::from_fn(dim, |i, j| (i * 7 + j * 13) % 5 == 0);
            let b = BoolMatrix::from_fn(dim, |i, j| (i * 3 + j * 11) % 7 < 2);
            assert_eq!(a.mul(&b), naive_mul(&a, &b), "dim {dim}");
        }
    }

    #[test]
    fn supports_and_compressibility() {
        let a = BoolMatrix::from_rows(&[vec![1, 0], vec![0, 0]]).unwrap();
        assert_eq!(a.row_support(), vec![true, false]);
        assert_eq!(a.col_support(), vec![true, false]);
        assert!(a.is_compressible());
        assert!(!BoolMatrix::identity(3).is_compressible());
    }

    #[test]
    fn identity_powers() {
        let i = CountMatrix::identity(4);
        assert_eq!(power_with_saturation(&i, 5), i);
        assert_eq!(BoolMatrix::identity(5).pow(7), BoolMatrix::identity(5));
    }

    #[test]
    fn saturation_is_absorbing() {
        let big = CountMatrix::from_rows(&[vec![u64::MAX / 2, 1], vec![1, 1]]).unwrap();
        let sq = big.mul(&big);
        assert!(sq.saturated());
        let cube = sq.mul(&big);
        assert_eq!(cube.get(0, 0), u64::MAX);
        assert!(cube.saturated());
        assert_eq!(cube.shadow(), BoolMatrix::ones(2));
    }

    #[test]
    fn serde_roundtrip() {
        let a = BoolMatrix::from_rows(&[vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 0]]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, "[[1,0,1],[0,1,0],[1,1,0]]");
        assert_eq!(serde_json::from_str::<BoolMatrix>(&s).unwrap(), a);
    }
}
