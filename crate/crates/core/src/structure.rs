//! Structural predicates on a basic set: supports, degeneracy, one-sided
//! extendability, corner conditions and the crisscross closure.

use serde::{Deserialize, Serialize};

use crate::basic_set::{code, BasicSet, Symbol, VertexPattern};
use crate::error::Result;
use crate::matrix::BoolMatrix;
use crate::transfer::{block, build_transition, Direction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Degeneracy {
    NonDegenerate,
    WeaklyNonDegenerate,
    Degenerate,
}

impl Degeneracy {
    pub fn is_weakly_non_degenerate(self) -> bool {
        self != Degeneracy::Degenerate
    }
}

/// 1-based indices of nonzero rows.
pub fn row_indices(a: &BoolMatrix) -> Vec<usize> {
    a.row_support().iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i + 1).collect()
}

/// 1-based indices of nonzero columns.
pub fn col_indices(a: &BoolMatrix) -> Vec<usize> {
    a.col_support().iter().enumerate().filter(|(_, &s)| s).map(|(i, _)| i + 1).collect()
}

fn superset(big: &[bool], small: &[bool]) -> bool {
    big.iter().zip(small).all(|(&b, &s)| b || !s)
}

/// Classifies a 2-order table viewed as `p×p` blocks.
pub fn classify(table: &BoolMatrix, p: usize) -> Degeneracy {
    let blocks: Vec<Vec<BoolMatrix>> = (0..p).map(|i| (0..p).map(|j| block(table, p, i, j)).collect()).collect();
    if blocks.iter().flatten().all(|b| !b.is_compressible()) {
        return Degeneracy::NonDegenerate;
    }
    let rows_agree = (0..p).all(|i| {
        let supports: Vec<Vec<bool>> = blocks[i].iter().filter(|b| !b.is_zero()).map(|b| b.row_support()).collect();
        supports.windows(2).all(|w| w[0] == w[1])
    });
    let cols_agree = (0..p).all(|j| {
        let supports: Vec<Vec<bool>> = (0..p).map(|i| &blocks[i][j]).filter(|b| !b.is_zero()).map(|b| b.col_support()).collect();
        supports.windows(2).all(|w| w[0] == w[1])
    });
    if rows_agree && cols_agree {
        Degeneracy::WeaklyNonDegenerate
    } else {
        Degeneracy::Degenerate
    }
}

/// One-sided extendability `[R(1), R(2), R(3), R(4)]`: right, up, left, down.
///
/// R(4) compares the supports of the vertical table, mirroring R(3) for the horizontal one.
pub fn r_extendability(b: &BasicSet) -> Result<[bool; 4]> {
    let (h2, v2) = b.transition_pair()?;
    let (rh, ch) = (h2.row_support(), h2.col_support());
    let (rv, cv) = (v2.row_support(), v2.col_support());
    Ok([superset(&rh, &ch), superset(&rv, &cv), superset(&ch, &rh), superset(&cv, &rv)])
}

pub fn is_crisscross(b: &BasicSet) -> Result<bool> {
    Ok(r_extendability(b)?.iter().all(|&r| r))
}

/// The four 3×3 corners, in condition order: top-right, top-left, bottom-left, bottom-right.
pub const CORNERS: [(usize, usize); 4] = [(2, 2), (0, 2), (0, 0), (2, 0)];

/// Whether every admissible coloring of the 3×3 square minus `missing` extends to the square.
pub fn corner_condition(b: &BasicSet, missing: (usize, usize)) -> Result<bool> {
    b.require_vertex()?;
    let p = b.p();
    let cells: Vec<(usize, usize)> = (0..3)
        .flat_map(|y| (0..3).map(move |x| (x, y)))
        .filter(|&c| c != missing)
        .collect();
    let mut grid = [[0 as Symbol; 3]; 3];
    Ok(corner_search(b, p, &cells, 0, missing, &mut grid))
}

fn window_ok(b: &BasicSet, p: usize, g: &[[Symbol; 3]; 3], x: usize, y: usize) -> bool {
    b.contains_code(code(&[g[x][y], g[x + 1][y], g[x][y + 1], g[x + 1][y + 1]], p))
}

/// Windows (lower-left corners) completed by `cell` in raster order, skipping the one with the missing corner.
fn windows_closed_by(cell: (usize, usize), missing: (usize, usize)) -> Vec<(usize, usize)> {
    if cell.0 == 0 || cell.1 == 0 {
        return Vec::new();
    }
    let w = (cell.0 - 1, cell.1 - 1);
    let covers_missing = missing.0 >= w.0 && missing.0 <= w.0 + 1 && missing.1 >= w.1 && missing.1 <= w.1 + 1;
    if covers_missing {
        Vec::new()
    } else {
        vec![w]
    }
}

fn corner_search(b: &BasicSet, p: usize, cells: &[(usize, usize)], idx: usize, missing: (usize, usize), g: &mut [[Symbol; 3]; 3]) -> bool {
    if idx == cells.len() {
        return (0..p).any(|c| {
            g[missing.0][missing.1] = c as Symbol;
            (0..2).all(|x| (0..2).all(|y| window_ok(b, p, g, x, y)))
        });
    }
    let cell = cells[idx];
    let closing = windows_closed_by(cell, missing);
    for s in 0..p {
        g[cell.0][cell.1] = s as Symbol;
        if closing.iter().all(|&(x, y)| window_ok(b, p, g, x, y)) && !corner_search(b, p, cells, idx + 1, missing, g) {
            return false;
        }
    }
    true
}

/// `[C(1), C(2), C(3), C(4)]`.
pub fn corner_conditions(b: &BasicSet) -> Result<[bool; 4]> {
    let mut out = [false; 4];
    for (slot, &corner) in out.iter_mut().zip(CORNERS.iter()) {
        *slot = corner_condition(b, corner)?;
    }
    Ok(out)
}

/// One pass of removing patterns with a missing neighbour on some side.
pub fn crisscross_core(b: &BasicSet) -> Result<BasicSet> {
    let p = b.p();
    let (h2, v2) = b.transition_pair()?;
    let (rh, ch) = (h2.row_support(), h2.col_support());
    let (rv, cv) = (v2.row_support(), v2.col_support());
    let keep = b.tuples().into_iter().filter(|&t| {
        let pat = VertexPattern::from_array(t);
        let (i1, j1) = (code(&[pat.u00, pat.u01], p), code(&[pat.u10, pat.u11], p));
        let (i2, j2) = (code(&[pat.u00, pat.u10], p), code(&[pat.u01, pat.u11], p));
        ch[i1] && rh[j1] && cv[i2] && rv[j2]
    });
    BasicSet::from_tuples(p, b.mode(), keep)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub core: BasicSet,
    pub star: BasicSet,
    /// Passes run, including the final one that changed nothing.
    pub iterations: usize,
}

/// `B_c` and the fixpoint `B*` of repeated core extraction.
pub fn crisscross_closure(b: &BasicSet) -> Result<Closure> {
    let core = crisscross_core(b)?;
    let mut current = core.clone();
    let mut iterations = 1;
    let mut previous = b.clone();
    while current != previous {
        previous = current.clone();
        current = crisscross_core(&current)?;
        iterations += 1;
    }
    Ok(Closure { core, star: current, iterations })
}

/// Equal row and column supports of `H_k` and of `V_k`.
pub fn k_crisscross(b: &BasicSet, k: usize) -> Result<bool> {
    for dir in [Direction::Horizontal, Direction::Vertical] {
        let m = build_transition(b, dir, k)?;
        if m.row_support() != m.col_support() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How rectangle-extendability was inferred, if at all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RectangleRoute {
    /// Both tables non-degenerate.
    NonDegenerate,
    /// Crisscross plus C(1)&C(3) or C(2)&C(4).
    CrisscrossCorners,
    /// `H_n`, `V_n` non-compressible for every checked `n`; not a proof.
    NonCompressibleEvidence { up_to: usize },
    None,
}

impl RectangleRoute {
    pub fn is_established(self) -> bool {
        matches!(self, RectangleRoute::NonDegenerate | RectangleRoute::CrisscrossCorners)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureProfile {
    pub rows_h2: Vec<usize>,
    pub cols_h2: Vec<usize>,
    pub rows_v2: Vec<usize>,
    pub cols_v2: Vec<usize>,
    pub degeneracy_h: Degeneracy,
    pub degeneracy_v: Degeneracy,
    pub r_ext: [bool; 4],
    pub corner: [bool; 4],
    pub crisscross: bool,
    pub rectangle: RectangleRoute,
}

/// Largest order checked for the non-compressibility evidence route.
pub const EVIDENCE_ORDER: usize = 6;

pub fn degeneracy_profile(b: &BasicSet) -> Result<StructureProfile> {
    let p = b.p();
    let (h2, v2) = b.transition_pair()?;
    let degeneracy_h = classify(&h2, p);
    let degeneracy_v = classify(&v2, p);
    let r_ext = r_extendability(b)?;
    let corner = corner_conditions(b)?;
    let crisscross = r_ext.iter().all(|&r| r);
    let rectangle = if degeneracy_h == Degeneracy::NonDegenerate && degeneracy_v == Degeneracy::NonDegenerate {
        RectangleRoute::NonDegenerate
    } else if crisscross && ((corner[0] && corner[2]) || (corner[1] && corner[3])) {
        RectangleRoute::CrisscrossCorners
    } else {
        non_compressible_evidence(b)?
    };
    Ok(StructureProfile {
        rows_h2: row_indices(&h2),
        cols_h2: col_indices(&h2),
        rows_v2: row_indices(&v2),
        cols_v2: col_indices(&v2),
        degeneracy_h,
        degeneracy_v,
        r_ext,
        corner,
        crisscross,
        rectangle,
    })
}

fn non_compressible_evidence(b: &BasicSet) -> Result<RectangleRoute> {
    let up_to = crate::transfer::max_order(b.p(), 64).clamp(2, EVIDENCE_ORDER);
    for n in 2..=up_to {
        for dir in [Direction::Horizontal, Direction::Vertical] {
            if build_transition(b, dir, n)?.is_compressible() {
                return Ok(RectangleRoute::None);
            }
        }
    }
    Ok(RectangleRoute::NonCompressibleEvidence { up_to })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic_set::Mode;
    use crate::catalog;

    #[test]
    fn degeneracy_examples() {
        let (h, _) = catalog::cycle_and_pair().transition_pair().unwrap();
        assert_eq!(classify(&h, 2), Degeneracy::NonDegenerate);
        let (h, v) = catalog::golden_mean().transition_pair().unwrap();
        assert_eq!(classify(&h, 2), Degeneracy::WeaklyNonDegenerate);
        assert_eq!(classify(&v, 2), Degeneracy::WeaklyNonDegenerate);
        let (h, _) = catalog::diagonal_order().transition_pair().unwrap();
        assert_eq!(classify(&h, 2), Degeneracy::Degenerate);
    }

    #[test]
    fn extendability_examples() {
        assert_eq!(r_extendability(&catalog::golden_mean()).unwrap(), [true; 4]);
        assert!(is_crisscross(&catalog::diagonal_order()).unwrap());
        assert!(is_crisscross(&BasicSet::full(2, Mode::Vertex).unwrap()).unwrap());
    }

    #[test]
    fn corner_examples() {
        assert_eq!(corner_conditions(&BasicSet::full(2, Mode::Vertex).unwrap()).unwrap(), [true; 4]);
        let c = corner_conditions(&catalog::diagonal_order()).unwrap();
        assert!(!c[1] && !c[3]);
        let c = corner_conditions(&catalog::golden_mean()).unwrap();
        assert!(c[0] && c[1] && c[3]);
    }

    #[test]
    fn closure_examples() {
        let gm = catalog::golden_mean();
        let cl = crisscross_closure(&gm).unwrap();
        assert_eq!((cl.core.clone(), cl.star.clone(), cl.iterations), (gm.clone(), gm.clone(), 1));

        let consts = catalog::two_constants();
        assert_eq!(crisscross_closure(&consts).unwrap().star, consts);

        let mut extra = gm.clone();
        extra.insert([0, 1, 0, 1]).unwrap();
        let cl = crisscross_closure(&extra).unwrap();
        assert_eq!(cl.star, gm);

        // The all-ones window continues itself on every side, so it survives.
        let mut ones = gm.clone();
        ones.insert([1, 1, 1, 1]).unwrap();
        assert_eq!(crisscross_closure(&ones).unwrap().star, ones);
    }

    #[test]
    fn k_crisscross_examples() {
        assert!(k_crisscross(&catalog::golden_mean(), 2).unwrap());
        assert!(k_crisscross(&catalog::simplified_golden_mean(), 3).unwrap());
        assert!(k_crisscross(&BasicSet::full(2, Mode::Vertex).unwrap(), 4).unwrap());
    }
}
