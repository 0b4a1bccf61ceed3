//! Named basic sets used throughout the tests, the CLI and the acceptance suite.

use crate::basic_set::{BasicSet, Mode, Symbol};
use crate::matrix::BoolMatrix;

fn from_h2_rows(p: usize, rows: &[&str]) -> BasicSet {
    let rows: Vec<Vec<u8>> = rows.iter().map(|r| r.bytes().map(|c| c - b'0').collect()).collect();
    let h2 = BoolMatrix::from_rows(&rows).expect("catalog matrix is square");
    BasicSet::from_h2(p, &h2).expect("catalog matrix has the right size")
}

/// No two adjacent 1s horizontally or vertically.
pub fn golden_mean() -> BasicSet {
    from_h2_rows(2, &["1110", "1010", "1100", "0000"])
}

/// At most one 1 in each 2×2 window.
pub fn simplified_golden_mean() -> BasicSet {
    from_h2_rows(2, &["1110", "1000", "1000", "0000"])
}

/// Non-degenerate binary set whose mixing needs a diagonal cycle horizontally
/// and a commutative pair vertically.
pub fn cycle_and_pair() -> BasicSet {
    from_h2_rows(2, &["1001", "1110", "1001", "0110"])
}

/// Ternary set with 13 patterns certified by a commutative pair of length 7.
pub fn ternary_pair() -> BasicSet {
    from_h2_rows(
        3,
        &["001000001", "000000000", "101000100", "100000000", "000000000", "001000000", "100100001", "000000000", "001001100"],
    )
}

/// Proper 3-colorings of the square lattice.
pub fn three_coloring() -> BasicSet {
    BasicSet::from_predicate(3, Mode::Vertex, |[u00, u10, u01, u11]| {
        u00 != u10 && u01 != u11 && u00 != u01 && u10 != u11
    })
    .expect("p = 3")
}

/// `u11 ≥ u00` on the main diagonal of each window, everything else free.
pub fn diagonal_order() -> BasicSet {
    from_h2_rows(2, &["1111", "1111", "0101", "0101"])
}

/// Hard-core rule on four colors forbidding the neighbour pairs {0,2}, {0,3}, {1,3}.
pub fn burton_steif() -> BasicSet {
    fn clash(a: Symbol, b: Symbol) -> bool {
        matches!((a.min(b), a.max(b)), (0, 2) | (0, 3) | (1, 3))
    }
    BasicSet::from_predicate(4, Mode::Vertex, |[u00, u10, u01, u11]| {
        !(clash(u00, u10) || clash(u01, u11) || clash(u00, u01) || clash(u10, u11))
    })
    .expect("p = 4")
}

pub fn hole_filling_33() -> BasicSet {
    from_h2_rows(2, &["1111", "1101", "1011", "1110"])
}

pub fn hole_filling_44() -> BasicSet {
    from_h2_rows(2, &["1111", "1011", "1111", "0111"])
}

/// Everything except the window with a single 1 in its top-right corner.
pub fn boyle() -> BasicSet {
    from_h2_rows(2, &["1011", "1111", "1111", "1111"])
}

/// `u01 + u10 + u11` even.
pub fn ledrappier_variant() -> BasicSet {
    from_h2_rows(2, &["1001", "0110", "1001", "0110"])
}

/// Only the two constant windows.
pub fn two_constants() -> BasicSet {
    BasicSet::from_tuples(2, Mode::Vertex, [[0, 0, 0, 0], [1, 1, 1, 1]]).expect("p = 2")
}

/// Ice rule: two arrows in, two out, tiles `[bottom, top, left, right]`.
pub fn six_vertex() -> BasicSet {
    BasicSet::from_predicate(2, Mode::Edge, |[b, t, l, r]| l + b == r + t).expect("p = 2")
}

/// Even number of inward arrows, equivalently an even digit sum.
pub fn eight_vertex() -> BasicSet {
    BasicSet::from_predicate(2, Mode::Edge, |[b, t, l, r]| (b + t + l + r) % 2 == 0).expect("p = 2")
}

/// Catalog keys in display order.
pub const NAMES: &[&str] = &[
    "golden-mean",
    "simplified-golden-mean",
    "cycle-and-pair",
    "ternary-pair",
    "three-coloring",
    "diagonal-order",
    "burton-steif",
    "hole-filling-33",
    "hole-filling-44",
    "boyle",
    "ledrappier-variant",
    "two-constants",
    "six-vertex",
    "eight-vertex",
];

pub fn by_name(name: &str) -> Option<BasicSet> {
    Some(match name {
        "golden-mean" => golden_mean(),
        "simplified-golden-mean" => simplified_golden_mean(),
        "cycle-and-pair" => cycle_and_pair(),
        "ternary-pair" => ternary_pair(),
        "three-coloring" => three_coloring(),
        "diagonal-order" => diagonal_order(),
        "burton-steif" => burton_steif(),
        "hole-filling-33" => hole_filling_33(),
        "hole-filling-44" => hole_filling_44(),
        "boyle" => boyle(),
        "ledrappier-variant" => ledrappier_variant(),
        "two-constants" => two_constants(),
        "six-vertex" => six_vertex(),
        "eight-vertex" => eight_vertex(),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(golden_mean().len(), 7);
        assert_eq!(three_coloring().len(), 18);
        assert_eq!(ternary_pair().len(), 13);
        assert_eq!(cycle_and_pair().len(), 9);
        assert_eq!(burton_steif().len(), 54);
        assert_eq!(boyle().len(), 15);
        assert_eq!(six_vertex().len(), 6);
        assert_eq!(eight_vertex().len(), 8);
    }

    #[test]
    fn symmetric_examples_have_equal_tables() {
        for b in [golden_mean(), simplified_golden_mean(), diagonal_order(), boyle(), ledrappier_variant(), three_coloring(), burton_steif()] {
            let (h, v) = b.transition_pair().unwrap();
            assert_eq!(h, v);
        }
    }

    #[test]
    fn every_name_resolves() {
        for name in NAMES {
            assert!(by_name(name).is_some(), "{name}");
        }
        assert!(by_name("nope").is_none());
    }
}
