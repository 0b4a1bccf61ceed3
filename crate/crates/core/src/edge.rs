//! Edge colorings: tiles `[bottom, top, left, right]`, strip transfer matrices,
//! connectors, diagonal sequences and the edge mixing verdict.
//!
//! `H^e_n` describes one column of `n-1` stacked tiles. Rows and columns are the
//! left and right edges (bottom tile first); the part index `j = ψ(bottom, top)`
//! records the two horizontal boundary edges. Counts are kept, since the parts
//! overlap in position. The vertical family is the horizontal family of the
//! tile set with the two axes exchanged.

use serde::{Deserialize, Serialize};

use crate::basic_set::{digits, pow, BasicSet, Mode, Symbol};
use crate::certify::{is_diagonal, maximal_invariant_set, Caps, Certificate, Property, Status, Verdict};
use crate::error::{domain, resource, Error, Result};
use crate::matrix::{BoolMatrix, CountMatrix};
use crate::primitivity::primitivity_analysis;
use crate::transfer::Direction;

/// Largest transfer dimension built for edge strips.
pub const EDGE_MAX_DIM: usize = 1 << 10;

/// Arrow orientation on one side of a vertex-model tile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arrow {
    In,
    Out,
}

/// Converts arrow tiles with sides `(right, up, left, down)` to an edge set.
///
/// Rightward and upward arrows become 1, leftward and downward arrows 0.
pub fn vertex_model_to_edge(tiles: &[[Arrow; 4]]) -> Result<BasicSet> {
    let mut set = BasicSet::empty(2, Mode::Edge)?;
    for &[right, up, left, down] in tiles {
        let bit = |a: Arrow, inward_is_one: bool| Symbol::from((a == Arrow::In) == inward_is_one);
        set.insert([bit(down, true), bit(up, false), bit(left, true), bit(right, false)])?;
    }
    Ok(set)
}

/// All arrow tiles whose number of inward arrows satisfies `keep`.
pub fn arrow_tiles(keep: impl Fn(usize) -> bool) -> Vec<[Arrow; 4]> {
    (0..16u8)
        .map(|m| std::array::from_fn(|i| if m >> i & 1 == 1 { Arrow::In } else { Arrow::Out }))
        .filter(|t: &[Arrow; 4]| keep(t.iter().filter(|&&a| a == Arrow::In).count()))
        .collect()
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrowDoc {
    #[serde(default)]
    #[allow(dead_code)]
    name: Option<String>,
    arrows: Vec<[Arrow; 4]>,
}

/// Parses an edge set from a basic-set document or an arrow-tile document `{"arrows": [...]}`.
pub fn edge_set_from_json(text: &str) -> Result<BasicSet> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if value.get("arrows").is_some() {
        let doc: ArrowDoc = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
        return vertex_model_to_edge(&doc.arrows);
    }
    let set = BasicSet::from_json(text)?;
    set.require_edge().map_err(|e| Error::Format(e.to_string()))?;
    Ok(set)
}

/// The tile set with x and y exchanged: `[b, t, l, r] → [l, r, b, t]`.
pub fn edge_transposed(b: &BasicSet) -> Result<BasicSet> {
    b.require_edge()?;
    BasicSet::from_tuples(b.p(), Mode::Edge, b.tuples().into_iter().map(|[bo, t, l, r]| [l, r, bo, t]))
}

fn oriented(b: &BasicSet, axis: Direction) -> Result<BasicSet> {
    b.require_edge()?;
    match axis {
        Direction::Horizontal => Ok(b.clone()),
        Direction::Vertical => edge_transposed(b),
    }
}

/// `H^e_{n;j}` (or `V^e_{n;j}`) for every part `j`, stored 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTransferFamily {
    pub n: usize,
    pub p: usize,
    parts: Vec<CountMatrix>,
}

impl EdgeTransferFamily {
    /// Part `j` in `[1, p²]`.
    pub fn part(&self, j: usize) -> Result<&CountMatrix> {
        match j.checked_sub(1).and_then(|i| self.parts.get(i)) {
            Some(m) => Ok(m),
            None => domain(format!("part index {j} outside [1,{}]", self.parts.len())),
        }
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    /// `Σ_j` of the parts.
    pub fn total(&self) -> CountMatrix {
        self.parts.iter().skip(1).fold(self.parts[0].clone(), |acc, m| acc.add(m))
    }

    /// Parts with bottom edge `c` (0-based) summed over the top edge.
    pub fn bar(&self, c: usize) -> CountMatrix {
        let p = self.p;
        (1..p).fold(self.parts[c * p].clone(), |acc, t| acc.add(&self.parts[c * p + t]))
    }
}

fn kron(a: &CountMatrix, b: &CountMatrix) -> CountMatrix {
    let (da, db) = (a.dim(), b.dim());
    let mut out = CountMatrix::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let x = a.get(i, j);
            if x == 0 {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, x * b.get(k, l));
                }
            }
        }
    }
    out
}

fn base_parts(b: &BasicSet) -> Vec<CountMatrix> {
    let p = b.p();
    (0..p * p)
        .map(|j| {
            let (bo, t) = ((j / p) as Symbol, (j % p) as Symbol);
            let mut m = CountMatrix::zeros(p);
            for l in 0..p {
                for r in 0..p {
                    if b.contains([bo, t, l as Symbol, r as Symbol]) {
                        m.set(l, r, 1);
                    }
                }
            }
            m
        })
        .collect()
}

/// One more tile on top: part `(b, t)` of order `n` sums part `(b, c)` of order 2
/// against part `(c, t)` of order `n-1` over the shared edge color `c`.
fn grow(base: &[CountMatrix], prev: &[CountMatrix], p: usize) -> Vec<CountMatrix> {
    (0..p * p)
        .map(|j| {
            let (bo, t) = (j / p, j % p);
            let mut acc: Option<CountMatrix> = None;
            for c in 0..p {
                let term = kron(&base[bo * p + c], &prev[c * p + t]);
                acc = Some(match acc {
                    Some(a) => a.add(&term),
                    None => term,
                });
            }
            acc.expect("p ≥ 2")
        })
        .collect()
}

pub fn build_edge_transfer(b: &BasicSet, axis: Direction, n: usize) -> Result<EdgeTransferFamily> {
    if n < 2 {
        return domain("edge transfer order must be at least 2");
    }
    let b = oriented(b, axis)?;
    let p = b.p();
    if pow(p, n - 1) > EDGE_MAX_DIM {
        return resource(format!("edge transfer of order {n} exceeds dimension {EDGE_MAX_DIM}"));
    }
    let base = base_parts(&b);
    let mut parts = base.clone();
    for _ in 3..=n {
        parts = grow(&base, &parts, p);
    }
    Ok(EdgeTransferFamily { n, p, parts })
}

/// `S^e_{m;α}` (horizontal axis) or `W^e_{m;α}` (vertical), `α = 1..p²`, as the
/// transfer of a row of `m` tiles in the crossing direction.
pub fn build_edge_connectors(b: &BasicSet, axis: Direction, m: usize) -> Result<Vec<CountMatrix>> {
    if m < 2 {
        return domain("edge connector order must be at least 2");
    }
    Ok(build_edge_transfer(b, axis.flip(), m + 1)?.parts)
}

/// Admissible colorings of a block of `cols × rows` tiles.
pub fn edge_pattern_count(b: &BasicSet, cols: usize, rows: usize) -> Result<u64> {
    if cols == 0 || rows == 0 {
        return domain("tile block must be nonempty");
    }
    let h = build_edge_transfer(b, Direction::Horizontal, rows + 1)?.total();
    let mut acc = h.clone();
    for _ in 1..cols {
        acc = acc.mul(&h);
    }
    Ok(acc.entry_sum())
}

/// `H̄^{(l)}_{m,n}`: product of the bottom-edge sums along the digits of `l` (1-based).
pub fn bar_product(fam: &EdgeTransferFamily, m: usize, l: usize) -> Result<CountMatrix> {
    let p = fam.p;
    if l == 0 || l > pow(p, m) {
        return domain(format!("index {l} outside [1,{}]", pow(p, m)));
    }
    let d = digits(l - 1, m, p);
    let mut acc = fam.bar(d[0] as usize);
    for &c in &d[1..] {
        acc = acc.mul(&fam.bar(c as usize));
    }
    Ok(acc)
}

fn axis_name(axis: Direction) -> &'static str {
    match axis {
        Direction::Horizontal => "horizontal",
        Direction::Vertical => "vertical",
    }
}

/// Checks that each depth-`q` block of `(H^e_{n+1})^m` equals the connector
/// product contracted against `H̄_{m,n-q+1}`, in both directions.
pub fn verify_edge_reduction(b: &BasicSet, m: usize, n: usize, q: usize) -> Result<bool> {
    if m < 2 || n < 2 || q < 1 || q > n - 1 {
        return domain("need m, n ≥ 2 and 1 ≤ q ≤ n-1");
    }
    for axis in [Direction::Horizontal, Direction::Vertical] {
        let p = b.p();
        let big = build_edge_transfer(b, axis, n + 1)?.total();
        let mut power = big.clone();
        for _ in 1..m {
            power = power.mul(&big);
        }
        let conn = build_edge_connectors(b, axis, m)?;
        let small = build_edge_transfer(b, axis, n - q + 1)?;
        let bars: Vec<CountMatrix> = (1..=pow(p, m)).map(|l| bar_product(&small, m, l)).collect::<Result<_>>()?;
        let size = pow(p, n - q);
        for path in 0..pow(p * p, q) {
            let betas = digits(path, q, p * p);
            let (mut r0, mut c0) = (0, 0);
            let mut prod = CountMatrix::identity(pow(p, m));
            for &beta in &betas {
                let beta = beta as usize;
                r0 = r0 * p + beta / p;
                c0 = c0 * p + beta % p;
                prod = prod.mul(&conn[beta]);
            }
            let lhs = power.submatrix(r0 * size, c0 * size, size);
            let mut rhs = CountMatrix::zeros(size);
            for (l, bar) in bars.iter().enumerate() {
                let weight: u64 = (0..prod.dim()).map(|k| prod.get(k, l)).sum();
                for i in 0..size {
                    for j in 0..size {
                        rhs.set(i, j, rhs.get(i, j) + weight * bar.get(i, j));
                    }
                }
            }
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Both bottom-edge sums of order 2 have no zero row or column.
pub fn edge_non_degenerate(b: &BasicSet, axis: Direction) -> Result<bool> {
    let fam = build_edge_transfer(b, axis, 2)?;
    Ok((0..fam.p).all(|c| !fam.bar(c).shadow().is_compressible()))
}

/// An invariant diagonal sequence for one direction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSequenceCert {
    pub direction: Direction,
    pub m: usize,
    /// Diagonal part indices, 1-based.
    pub word: Vec<usize>,
    /// Invariant index set, 1-based.
    pub k_set: Vec<usize>,
}

impl EdgeSequenceCert {
    pub fn q(&self) -> usize {
        self.word.len()
    }

    pub fn label(&self) -> String {
        self.word.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeMixingCert {
    pub horizontal: EdgeSequenceCert,
    pub vertical: EdgeSequenceCert,
}

fn word_product(conn: &[CountMatrix], word: &[usize]) -> BoolMatrix {
    let mut acc = BoolMatrix::identity(conn[0].dim());
    for &w in word {
        acc = acc.mul(&conn[w - 1].shadow());
    }
    acc
}

/// Shadow of `Σ_{l∈K} H̄^{(l)}_{m,n}`.
fn bar_sum(fam: &EdgeTransferFamily, m: usize, k_set: &[usize]) -> Result<BoolMatrix> {
    let mut acc = BoolMatrix::zeros(fam.dim());
    for &l in k_set {
        acc = acc.or(&bar_product(fam, m, l)?.shadow());
    }
    Ok(acc)
}

fn sums_primitive(b: &BasicSet, axis: Direction, m: usize, q: usize, k_set: &[usize]) -> Result<bool> {
    for n in 2..=q + 1 {
        let fam = build_edge_transfer(b, axis, n)?;
        if !primitivity_analysis(&bar_sum(&fam, m, k_set)?)?.primitive {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Re-checks a sequence certificate from scratch; `Err` explains the first failed condition.
pub fn check_edge_sequence(b: &BasicSet, cert: &EdgeSequenceCert) -> Result<std::result::Result<(), String>> {
    let p = b.p();
    if cert.m < 2 || cert.word.is_empty() || cert.word.iter().any(|&w| !is_diagonal(p, w)) {
        return Ok(Err("sequence must be a nonempty word of diagonal indices with m ≥ 2".into()));
    }
    if !edge_non_degenerate(b, cert.direction)? {
        return Ok(Err(format!("{} edge table is degenerate", axis_name(cert.direction))));
    }
    let conn = build_edge_connectors(b, cert.direction, cert.m)?;
    let prod = word_product(&conn, &cert.word);
    let ok_set = !cert.k_set.is_empty()
        && cert.k_set.iter().all(|&l| l >= 1 && l <= prod.dim())
        && cert.k_set.iter().all(|&l| cert.k_set.iter().any(|&k| prod.get(k - 1, l - 1)));
    if !ok_set {
        return Ok(Err("index set is not invariant under the sequence".into()));
    }
    if !sums_primitive(b, cert.direction, cert.m, cert.q(), &cert.k_set)? {
        return Ok(Err("summed bar products are not primitive".into()));
    }
    Ok(Ok(()))
}

/// First sequence in `(m, q, word)` order whose maximal invariant set passes the primitivity check.
pub fn find_edge_diagonal_sequence(b: &BasicSet, axis: Direction, caps: &Caps) -> Result<Option<EdgeSequenceCert>> {
    let p = b.p();
    if !edge_non_degenerate(b, axis)? {
        return Ok(None);
    }
    let diag: Vec<usize> = (0..p).map(|j| 1 + j * (p + 1)).collect();
    for m in 2..=caps.m_max {
        if pow(p, m) > caps.max_block_dim {
            break;
        }
        let conn = build_edge_connectors(b, axis, m)?;
        for q in 1..=caps.q_max {
            for idx in 0..pow(p, q) {
                let word: Vec<usize> = digits(idx, q, p).into_iter().map(|d| diag[d as usize]).collect();
                let prod = word_product(&conn, &word);
                let k_set = maximal_invariant_set(&prod);
                if k_set.is_empty() {
                    continue;
                }
                if sums_primitive(b, axis, m, q, &k_set)? {
                    return Ok(Some(EdgeSequenceCert { direction: axis, m, word, k_set }));
                }
            }
        }
    }
    Ok(None)
}

pub const EDGE_ROUTE: &str = "edge-diagonal-sequence/non-degenerate";

/// Mixing from an invariant diagonal sequence in each direction.
pub fn edge_certificates(b: &BasicSet, caps: &Caps) -> Result<Verdict> {
    b.require_edge()?;
    let mut notes = Vec::new();
    let mut found = Vec::new();
    for axis in [Direction::Horizontal, Direction::Vertical] {
        if !edge_non_degenerate(b, axis)? {
            notes.push(format!("{} edge table is degenerate", axis_name(axis)));
            continue;
        }
        match find_edge_diagonal_sequence(b, axis, caps)? {
            Some(c) => found.push(c),
            None => notes.push(format!("no {} diagonal sequence within caps", axis_name(axis))),
        }
    }
    if found.len() == 2 {
        let vertical = found.pop().expect("two");
        let horizontal = found.pop().expect("two");
        let cert = Certificate::EdgeMixing(EdgeMixingCert { horizontal, vertical });
        return Ok(Verdict::new(Property::Mixing, Status::Proved, EDGE_ROUTE, cert, caps));
    }
    Ok(Verdict::new(Property::Mixing, Status::Unknown, "", Certificate::None, caps).with_notes(notes))
}

pub fn replay_edge_mixing(b: &BasicSet, c: &EdgeMixingCert) -> Result<Status> {
    b.require_edge()?;
    for (axis, cert) in [(Direction::Horizontal, &c.horizontal), (Direction::Vertical, &c.vertical)] {
        if cert.direction != axis {
            return Err(Error::Certificate("sequence certificate has the wrong direction".into()));
        }
        if let Err(why) = check_edge_sequence(b, cert)? {
            return Err(Error::Certificate(why));
        }
    }
    Ok(Status::Proved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::oracle::{enumerate_admissible, Window};

    fn rows(m: &CountMatrix) -> Vec<Vec<u64>> {
        m.to_rows()
    }

    #[test]
    fn six_vertex_tables() {
        let b = catalog::six_vertex();
        let h = build_edge_transfer(&b, Direction::Horizontal, 2).unwrap();
        assert_eq!(rows(h.part(1).unwrap()), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(rows(h.part(4).unwrap()), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(rows(h.part(2).unwrap()), vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(rows(h.part(3).unwrap()), vec![vec![0, 1], vec![0, 0]]);
        let v = build_edge_transfer(&b, Direction::Vertical, 2).unwrap();
        assert_eq!(h, v);
        let s = build_edge_connectors(&b, Direction::Horizontal, 2).unwrap();
        assert_eq!(rows(&s[0]), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 1, 1, 0], vec![0, 0, 0, 1]]);
    }

    #[test]
    fn arrow_import() {
        let six = vertex_model_to_edge(&arrow_tiles(|n| n == 2)).unwrap();
        assert_eq!(six, catalog::six_vertex());
        let eight = vertex_model_to_edge(&arrow_tiles(|n| n % 2 == 0)).unwrap();
        assert_eq!(eight, catalog::eight_vertex());
        assert!(vertex_model_to_edge(&[]).unwrap().is_empty());
        let doc = r#"{"arrows": [["in","in","out","out"]]}"#;
        assert_eq!(edge_set_from_json(doc).unwrap().len(), 1);
    }

    #[test]
    fn eight_vertex_parts_have_two_ones() {
        let h = build_edge_transfer(&catalog::eight_vertex(), Direction::Horizontal, 2).unwrap();
        for j in 1..=4 {
            assert_eq!(h.part(j).unwrap().entry_sum(), 2);
        }
    }

    #[test]
    fn full_set_parts_are_all_ones() {
        let full = BasicSet::full(2, Mode::Edge).unwrap();
        let h = build_edge_transfer(&full, Direction::Horizontal, 2).unwrap();
        for j in 1..=4 {
            assert_eq!(rows(h.part(j).unwrap()), vec![vec![1, 1], vec![1, 1]]);
        }
        for s in build_edge_connectors(&full, Direction::Horizontal, 3).unwrap() {
            assert!(s.shadow() == BoolMatrix::ones(8));
        }
        assert!(verify_edge_reduction(&full, 2, 3, 2).unwrap());
    }

    #[test]
    fn strip_counts_match_enumeration() {
        for b in [catalog::six_vertex(), catalog::eight_vertex(), BasicSet::full(2, Mode::Edge).unwrap()] {
            for n in 1..=4 {
                let direct = enumerate_admissible(&b, &Window::rect(0, 0, 1, n), u64::MAX).unwrap().count;
                assert_eq!(edge_pattern_count(&b, 1, n as usize).unwrap(), direct);
            }
            let direct = enumerate_admissible(&b, &Window::rect(0, 0, 3, 2), u64::MAX).unwrap().count;
            assert_eq!(edge_pattern_count(&b, 3, 2).unwrap(), direct);
        }
    }

    #[test]
    fn connectors_match_direct_rows() {
        // (S^e_{m;α})_{k,l} counts rows of m tiles with side edges α, bottoms k and tops l.
        let b = catalog::six_vertex();
        for m in 2..=3usize {
            let conn = build_edge_connectors(&b, Direction::Horizontal, m).unwrap();
            let w = Window::rect(0, 0, m as i32, 1);
            let csp = crate::oracle::Csp::for_window(&b, &w);
            for (alpha, s) in conn.iter().enumerate() {
                for k in 0..pow(2, m) {
                    for l in 0..pow(2, m) {
                        let mut fixed = crate::oracle::Pattern::new();
                        fixed.insert(crate::oracle::Site::VEdge(0, 0), (alpha / 2) as Symbol);
                        fixed.insert(crate::oracle::Site::VEdge(m as i32, 0), (alpha % 2) as Symbol);
                        let (kd, ld) = (digits(k, m, 2), digits(l, m, 2));
                        for x in 0..m {
                            fixed.insert(crate::oracle::Site::HEdge(x as i32, 0), kd[x]);
                            fixed.insert(crate::oracle::Site::HEdge(x as i32, 1), ld[x]);
                        }
                        let (count, _) = csp.count(&fixed, u64::MAX, false).unwrap();
                        assert_eq!(s.get(k, l), count);
                    }
                }
            }
        }
    }

    #[test]
    fn reduction_identity() {
        assert!(verify_edge_reduction(&catalog::six_vertex(), 2, 3, 1).unwrap());
        for b in [catalog::six_vertex(), catalog::eight_vertex()] {
            for (m, n, q) in [(2, 2, 1), (2, 3, 2), (3, 3, 1), (3, 4, 3)] {
                assert!(verify_edge_reduction(&b, m, n, q).unwrap(), "{m} {n} {q}");
            }
        }
    }

    #[test]
    fn six_vertex_mixing() {
        let b = catalog::six_vertex();
        let caps = Caps::for_alphabet(2);
        let c = find_edge_diagonal_sequence(&b, Direction::Horizontal, &caps).unwrap().unwrap();
        assert_eq!((c.m, c.q(), c.label()), (2, 1, "1".to_string()));
        assert_eq!(c.k_set, vec![1, 2, 3, 4]);
        let v = edge_certificates(&b, &caps).unwrap();
        assert_eq!(v.status, Status::Proved);
        assert_eq!(crate::certify::replay(&b, &v).unwrap(), Status::Proved);
    }

    #[test]
    fn eight_vertex_mixing() {
        let b = catalog::eight_vertex();
        let v = edge_certificates(&b, &Caps::for_alphabet(2)).unwrap();
        assert_eq!(v.status, Status::Proved);
    }

    #[test]
    fn empty_set_is_unknown() {
        let b = BasicSet::empty(2, Mode::Edge).unwrap();
        let h = build_edge_transfer(&b, Direction::Horizontal, 3).unwrap();
        assert!(h.total().shadow().is_zero());
        let v = edge_certificates(&b, &Caps::for_alphabet(2)).unwrap();
        assert_eq!(v.status, Status::Unknown);
    }

    #[test]
    fn tampered_sequence_is_rejected() {
        let b = catalog::six_vertex();
        let caps = Caps::for_alphabet(2);
        let v = edge_certificates(&b, &caps).unwrap();
        let Certificate::EdgeMixing(mut c) = v.certificate else { panic!() };
        c.horizontal.word = vec![2];
        assert!(replay_edge_mixing(&b, &c).is_err());
    }
}
