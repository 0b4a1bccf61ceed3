//! Acceptance suite: fourteen criteria, one pass/fail line each.
//!
//! Run with `cargo test -p sft-core --test acceptance -- --nocapture` to see the lines.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::Rng;

use common::{binary_examples, direct_primitivity, random_matrix, random_set, seeded, HOLE_SIZES};
use sft_core::basic_set::BasicSet;
use sft_core::catalog;
use sft_core::certify::{
    find_commutative_pair_with, find_invariant_diagonal_cycle, is_invariant, mixing_verdict, primitivity_all_n_certificate,
    replay, Caps, Certificate, PairIndex, PairSearch, Status,
};
use sft_core::connect::{build_connecting, connector_entry_pattern, grid_admissible, verify_connect_reduction};
use sft_core::edge::{build_edge_connectors, build_edge_transfer, edge_certificates, find_edge_diagonal_sequence};
use sft_core::holefill::{
    check_hfc, check_hfc_k, replay_fill_failure, strong_specification_verdict, ufp_corner_gluing_evidence, FillFailureCert,
    FillMode, StrongSpecCaps,
};
use sft_core::matrix::{BoolMatrix, CountMatrix};
use sft_core::oracle::{brute_fill_annulus, brute_glue_window, constant_block, transfer_count_crosscheck, Window};
use sft_core::primitivity::{is_n_primitive, primitivity_analysis, saturated};
use sft_core::structure::{classify, corner_conditions, k_crisscross};
use sft_core::transfer::{block_alpha, build_transition, elementary_pattern, verify_reduction, Direction};

type Outcome = Result<(), String>;

fn ensure(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn bits(rows: &[&str]) -> Vec<Vec<u8>> {
    rows.iter().map(|r| r.bytes().filter(|c| !c.is_ascii_whitespace()).map(|c| c - b'0').collect()).collect()
}

fn counts(rows: &[&[u64]]) -> Vec<Vec<u64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

fn h2(b: &BasicSet) -> BoolMatrix {
    build_transition(b, Direction::Horizontal, 2).unwrap()
}

fn s_block(b: &BasicSet, dir: Direction, m: usize, a: usize, c: usize) -> BoolMatrix {
    build_connecting(b, dir, m).unwrap().to_s_w().block(a, c).unwrap().clone()
}

fn caps(b: &BasicSet) -> Caps {
    Caps::for_alphabet(b.p())
}

fn strong_caps() -> StrongSpecCaps {
    StrongSpecCaps { k_max: 3, mn_max: 4 }
}

fn diagonal_cycle(b: &BasicSet, dir: Direction) -> Result<(usize, String, Vec<usize>), String> {
    match find_invariant_diagonal_cycle(b, dir, &caps(b)).unwrap() {
        Some((c, _)) => Ok((c.m, c.label(), c.k_set)),
        None => Err(format!("no invariant diagonal cycle in direction {dir:?}")),
    }
}

fn golden_mean() -> Outcome {
    let b = catalog::golden_mean();
    let h = h2(&b);
    ensure(h.to_rows() == bits(&["1110", "1010", "1100", "0000"]), "H2")?;
    ensure(saturated(&h).to_rows() == bits(&["1110", "1110", "1110", "0000"]), "E(H2)")?;
    let listed: [((usize, usize), &[&str]); 9] = [
        ((1, 1), &["11", "10"]),
        ((1, 2), &["10", "10"]),
        ((1, 3), &["10", "10"]),
        ((1, 4), &["10", "10"]),
        ((2, 1), &["11", "00"]),
        ((2, 3), &["10", "00"]),
        ((3, 1), &["11", "00"]),
        ((3, 2), &["10", "00"]),
        ((4, 1), &["11", "00"]),
    ];
    let s = build_connecting(&b, Direction::Horizontal, 2).unwrap().to_s_w();
    for a in 1..=4 {
        for c in 1..=4 {
            let got = s.block(a, c).unwrap().to_rows();
            match listed.iter().find(|(key, _)| *key == (a, c)) {
                Some((_, rows)) => ensure(got == bits(rows), format!("S(2;{a},{c})"))?,
                None => ensure(got == bits(&["00", "00"]), format!("S(2;{a},{c}) should vanish"))?,
            }
        }
    }
    let (m, label, k) = diagonal_cycle(&b, Direction::Horizontal)?;
    ensure((m, label.as_str(), k.as_slice()) == (2, "11", &[1, 2][..]), format!("cycle order/K: {m} {label} {k:?}"))?;
    let sum = sft_core::certify::elementary_sum(&b, Direction::Horizontal, 2, 2, 1, &k).unwrap();
    ensure(sum.to_rows() == counts(&[&[3, 2], &[2, 2]]), "elementary sum")?;
    ensure(is_n_primitive(&h, 2).unwrap(), "H2 2-primitive")?;
    ensure(mixing_verdict(&b, &caps(&b)).unwrap().status == Status::Proved, "mixing")?;
    ensure(check_hfc(&b, 1, 1).unwrap().holds, "HFC(1,1)")?;
    ensure(strong_specification_verdict(&b, &strong_caps()).unwrap().status == Status::Proved, "strong specification")
}

fn cycle_and_pair() -> Outcome {
    let b = catalog::cycle_and_pair();
    let s = s_block(&b, Direction::Horizontal, 3, 1, 1);
    ensure(s.to_rows() == bits(&["1000", "0000", "0001", "0010"]), "S(3;1,1)")?;
    let (m, label, k) = diagonal_cycle(&b, Direction::Horizontal)?;
    ensure((m, label.as_str(), k.as_slice()) == (3, "11", &[3, 4][..]), format!("cycle: {m} {label} {k:?}"))?;
    ensure(is_invariant(&s, &[3, 4]), "K={3,4} invariant")?;
    let filter = PairSearch { base: Some(2), split: Some((5, 2)) };
    let cert = find_commutative_pair_with(&b, Direction::Vertical, &caps(&b), filter).unwrap().ok_or("no vertical pair")?;
    ensure(cert.index == PairIndex { m: 7, alpha: 4, k: 12, l: 51 }, format!("pair index {:?}", cert.index))?;
    ensure(s_block(&b, Direction::Vertical, 7, 4, 4).get(11, 50), "(W(7;4,4))[12,51]")?;
    ensure(mixing_verdict(&b, &caps(&b)).unwrap().status == Status::Proved, "mixing")
}

fn ternary_pair() -> Outcome {
    let b = catalog::ternary_pair();
    let hk = elementary_pattern(&b, Direction::Horizontal, 7, 2, 1, 513).unwrap();
    let hl = elementary_pattern(&b, Direction::Horizontal, 7, 2, 1, 709).unwrap();
    ensure(hk.to_rows() == counts(&[&[1, 0, 1], &[0, 0, 0], &[1, 0, 0]]), "H(513)")?;
    ensure(hl.to_rows() == counts(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 1]]), "H(709)")?;
    let e = block_alpha(&saturated(&h2(&b)), 3, 1);
    ensure(e.to_rows() == bits(&["101", "000", "101"]), "E(2;1)")?;
    let filter = PairSearch { base: Some(1), split: Some((3, 4)) };
    let cert = find_commutative_pair_with(&b, Direction::Horizontal, &caps(&b), filter).unwrap().ok_or("no pair")?;
    ensure(cert.index == PairIndex { m: 7, alpha: 1, k: 513, l: 709 } && cert.n == 2, format!("pair {:?} N={}", cert.index, cert.n))?;
    ensure(s_block(&b, Direction::Horizontal, 7, 1, 1).get(512, 708), "(S(7;1,1))[513,709]")?;
    let v = primitivity_all_n_certificate(&b, Direction::Horizontal, &caps(&b)).unwrap();
    ensure(v.status == Status::Proved, format!("primitivity for all n: {:?}", v.status))
}

fn three_coloring() -> Outcome {
    let b = catalog::three_coloring();
    let expected = bits(&[
        "000000000", "000101100", "000100110", "011000010", "000000000", "010000110", "011001000", "001101000", "000000000",
    ]);
    ensure(h2(&b).to_rows() == expected, "H2")?;
    let c = build_connecting(&b, Direction::Horizontal, 2).unwrap();
    let s15 = s_block(&b, Direction::Horizontal, 2, 1, 5);
    let s51 = s_block(&b, Direction::Horizontal, 2, 5, 1);
    ensure(s15 == *c.block(2, 2).unwrap() && s51 == *c.block(4, 4).unwrap(), "S blocks against C blocks")?;
    let prod = CountMatrix::from_bool(&s15).mul(&CountMatrix::from_bool(&s51));
    ensure(prod.to_rows() == counts(&[&[0, 0, 0], &[0, 2, 1], &[0, 1, 1]]), "S(2;1,5)S(2;5,1)")?;
    let (m, label, k) = diagonal_cycle(&b, Direction::Horizontal)?;
    ensure((m, label.as_str(), k.as_slice()) == (2, "151", &[2, 3][..]), format!("cycle: {m} {label} {k:?}"))?;
    ensure(mixing_verdict(&b, &caps(&b)).unwrap().status == Status::Proved, "mixing")
}

fn diagonal_order() -> Outcome {
    let b = catalog::diagonal_order();
    let corner = corner_conditions(&b).unwrap();
    ensure(!corner[1] && !corner[3], format!("C(2), C(4) should fail: {corner:?}"))?;
    let (h, v) = b.transition_pair().unwrap();
    ensure(!classify(&h, 2).is_weakly_non_degenerate() && !classify(&v, 2).is_weakly_non_degenerate(), "weak non-degeneracy")?;
    ensure(mixing_verdict(&b, &caps(&b)).unwrap().status == Status::Unknown, "mixing verdict")?;
    // A 1 below-left of a 0 on the same diagonal cannot be glued at any distance.
    let u1 = constant_block(0, 0, 2, 2, 1);
    let u2 = constant_block(5, 5, 2, 2, 0);
    ensure(!brute_glue_window(&b, &u1, &u2, &Window::rect(0, 0, 7, 7)).unwrap(), "gluing should be refuted")?;
    let u2 = constant_block(5, 0, 2, 2, 0);
    ensure(brute_glue_window(&b, &u1, &u2, &Window::rect(0, 0, 7, 7)).unwrap(), "off-diagonal gluing should succeed")
}

fn simplified_golden_mean() -> Outcome {
    let b = catalog::simplified_golden_mean();
    for m in 1..=3 {
        for n in 1..=3 {
            ensure(!check_hfc(&b, m, n).unwrap().holds, format!("HFC should fail at ({m},{n})"))?;
        }
    }
    ensure(check_hfc_k(&b, 3, 3, 3).unwrap().holds, "(HFC)3 at (3,3)")?;
    ensure(k_crisscross(&b, 3).unwrap(), "3-crisscross")?;
    let h3 = build_transition(&b, Direction::Horizontal, 3).unwrap();
    ensure(is_n_primitive(&h3, 2).unwrap(), "H3 2-primitive")?;
    let v = strong_specification_verdict(&b, &strong_caps()).unwrap();
    let ok = matches!(&v.certificate, Certificate::StrongSpecification(c) if (c.k, c.m, c.n) == (3, 3, 3));
    ensure(v.status == Status::Proved && ok, format!("strong specification: {:?} {:?}", v.status, v.certificate))
}

fn burton_steif() -> Outcome {
    let b = catalog::burton_steif();
    let expected = bits(&[
        "1100 1100 0000 0000",
        "1100 1110 0000 0000",
        "0000 0000 0000 0000",
        "0000 0000 0000 0000",
        "1100 1100 0100 0000",
        "1100 1110 0110 0000",
        "0100 0110 0111 0000",
        "0000 0000 0000 0000",
        "0000 0000 0000 0000",
        "0000 1110 0110 0010",
        "0000 0110 0111 0011",
        "0000 0010 0011 0011",
        "0000 0000 0000 0000",
        "0000 0000 0000 0000",
        "0000 0000 0111 0011",
        "0000 0000 0011 0011",
    ]);
    let h = h2(&b);
    ensure(h.to_rows() == expected, "H2")?;
    ensure(is_n_primitive(&h, 3).unwrap() && !is_n_primitive(&h, 2).unwrap(), "H2 exactly 3-primitive")?;
    ensure(check_hfc(&b, 2, 2).unwrap().holds, "HFC(2,2)")?;
    ensure(strong_specification_verdict(&b, &strong_caps()).unwrap().status == Status::Proved, "strong specification")
}

fn larger_holes() -> Outcome {
    for (b, size, rows) in [
        (catalog::hole_filling_33(), 3, ["1111", "1101", "1011", "1110"]),
        (catalog::hole_filling_44(), 4, ["1111", "1011", "1111", "0111"]),
    ] {
        ensure(h2(&b).to_rows() == bits(&rows), format!("H2 of the size-{size} set"))?;
        ensure(check_hfc(&b, size, size).unwrap().holds, format!("HFC({size},{size})"))?;
        let v = strong_specification_verdict(&b, &strong_caps()).unwrap();
        ensure(v.status == Status::Proved, format!("strong specification of the size-{size} set"))?;
    }
    Ok(())
}

fn boyle() -> Outcome {
    let b = catalog::boyle();
    ensure(h2(&b).to_rows() == bits(&["1011", "1111", "1111", "1111"]), "H2")?;
    let r = check_hfc(&b, 1, 1).unwrap();
    ensure(!r.holds, "HFC(1,1) should fail")?;
    let cert = FillFailureCert::from_hfc(&r).ok_or("missing witness")?;
    let text = serde_json::to_string(&cert).unwrap();
    let back: FillFailureCert = serde_json::from_str(&text).unwrap();
    ensure(replay_fill_failure(&b, &back).unwrap() == Status::Refuted, "witness replay")?;
    let v = strong_specification_verdict(&b, &strong_caps()).unwrap();
    ensure(v.status == Status::Unknown, format!("strong specification should be unknown, got {:?}", v.status))
}

fn six_vertex() -> Outcome {
    let b = catalog::six_vertex();
    for axis in [Direction::Horizontal, Direction::Vertical] {
        let f = build_edge_transfer(&b, axis, 2).unwrap();
        let parts: Vec<_> = (1..=4).map(|j| f.part(j).unwrap().to_rows()).collect();
        let identity = counts(&[&[1, 0], &[0, 1]]);
        ensure(parts[0] == identity && parts[3] == identity, format!("{axis:?} parts 1 and 4"))?;
        ensure(parts[1] == counts(&[&[0, 0], &[1, 0]]) && parts[2] == counts(&[&[0, 1], &[0, 0]]), format!("{axis:?} parts 2 and 3"))?;
    }
    let s = build_edge_connectors(&b, Direction::Horizontal, 2).unwrap();
    ensure(s[0].to_rows() == counts(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 1, 1, 0], &[0, 0, 0, 1]]), "S^e(2;1)")?;
    let c = find_edge_diagonal_sequence(&b, Direction::Horizontal, &caps(&b)).unwrap().ok_or("no diagonal sequence")?;
    ensure((c.m, c.q(), c.k_set.as_slice()) == (2, 1, &[1, 2, 3, 4][..]), format!("sequence {:?}", c))?;
    let v = edge_certificates(&b, &caps(&b)).unwrap();
    ensure(v.status == Status::Proved && replay(&b, &v).unwrap() == Status::Proved, "edge mixing")
}

fn eight_vertex() -> Outcome {
    let b = catalog::eight_vertex();
    ensure(!brute_fill_annulus(&b, 2, 1, 1).unwrap().holds, "annulus fill k=2 (1,1) should fail")?;
    ensure(!brute_fill_annulus(&b, 3, 3, 3).unwrap().holds, "annulus fill k=3 (3,3) should fail")?;
    let v = edge_certificates(&b, &caps(&b)).unwrap();
    ensure(v.status == Status::Proved, "edge mixing")
}

fn property_suites() -> Outcome {
    for name in catalog::NAMES {
        let b = catalog::by_name(name).unwrap();
        let cap = if b.p() == 2 { 4 } else { 3 };
        ensure(transfer_count_crosscheck(&b, cap, cap).unwrap().passed(), format!("count crosscheck on {name}"))?;
    }
    let mut rng = seeded(2024);
    for _ in 0..12 {
        let b = random_set(&mut rng, 2, 0.6);
        let (n, q, m) = (rng.gen_range(2..=4), rng.gen_range(1..=2), rng.gen_range(2..=3));
        for dir in [Direction::Horizontal, Direction::Vertical] {
            ensure(verify_reduction(&b, dir, n, q).unwrap(), format!("reduction n={n} q={q}"))?;
        }
        ensure(verify_connect_reduction(&b, m, n, q).unwrap(), format!("connect reduction m={m} n={n} q={q}"))?;
    }
    for _ in 0..100 {
        let p = rng.gen_range(2..=3);
        let b = random_set(&mut rng, p, 0.6);
        let m = rng.gen_range(2..=if p == 2 { 4 } else { 3 });
        let side = p.pow(m as u32 - 1);
        let (a, c) = (rng.gen_range(1..=p * p), rng.gen_range(1..=p * p));
        let (s, t) = (rng.gen_range(1..=side), rng.gen_range(1..=side));
        let grid = connector_entry_pattern(p, m, a, c, s, t).unwrap();
        let horizontal = s_block(&b, Direction::Horizontal, m, a, c).get(s - 1, t - 1);
        ensure(horizontal == grid_admissible(&b, &grid), format!("S entry semantics p={p} m={m}"))?;
        let vertical = s_block(&b, Direction::Vertical, m, a, c).get(s - 1, t - 1);
        ensure(vertical == grid_admissible(&b.transposed().unwrap(), &grid), format!("W entry semantics p={p} m={m}"))?;
    }
    for _ in 0..300 {
        let dim = rng.gen_range(1..=8);
        let density = rng.gen_range(0.1..0.6);
        let a = random_matrix(&mut rng, dim, density);
        let r = primitivity_analysis(&a).unwrap();
        ensure((r.primitive, r.n0) == direct_primitivity(&a), format!("primitivity of {:?}", a.to_rows()))?;
    }
    let agree = |b: &BasicSet, k: usize, m: usize, n: usize, label: &str| -> Outcome {
        let fast = check_hfc_k(b, k, m, n).unwrap();
        let slow = brute_fill_annulus(b, k, m, n).unwrap();
        ensure(fast.holds == slow.holds, format!("hole filling on {label} k={k} ({m},{n})"))
    };
    for (name, b) in binary_examples() {
        for &(k, m, n) in HOLE_SIZES {
            agree(&b, k, m, n, name)?;
        }
    }
    for (k, m, n) in [(2, 1, 1), (2, 1, 2), (2, 2, 1)] {
        agree(&catalog::three_coloring(), k, m, n, "three-coloring")?;
        agree(&catalog::ternary_pair(), k, m, n, "ternary-pair")?;
    }
    agree(&catalog::burton_steif(), 2, 1, 1, "burton-steif")?;
    let mut rng = seeded(81);
    for idx in 0..50 {
        let density = rng.gen_range(0.5..0.9);
        let b = random_set(&mut rng, 2, density);
        for &(k, m, n) in HOLE_SIZES {
            agree(&b, k, m, n, &format!("random set {idx}"))?;
        }
    }
    Ok(())
}

fn ledrappier_variant() -> Outcome {
    let b = catalog::ledrappier_variant();
    for dir in [Direction::Horizontal, Direction::Vertical] {
        ensure(find_invariant_diagonal_cycle(&b, dir, &caps(&b)).unwrap().is_none(), "no diagonal cycle")?;
        ensure(sft_core::certify::find_commutative_pair(&b, dir, &caps(&b)).unwrap().is_none(), "no commutative pair")?;
    }
    let (h, v) = b.transition_pair().unwrap();
    ensure(h == v, "H2 = V2")?;
    for n in 2..=6 {
        let hn = build_transition(&b, Direction::Horizontal, n).unwrap();
        ensure(hn == build_transition(&b, Direction::Vertical, n).unwrap(), format!("H{n} = V{n}"))?;
        ensure(primitivity_analysis(&hn).unwrap().primitive, format!("H{n} primitive"))?;
    }
    let v = mixing_verdict(&b, &caps(&b)).unwrap();
    ensure(matches!(v.status, Status::Evidence | Status::Unknown), format!("mixing verdict {:?}", v.status))
}

fn filling_checks() -> Outcome {
    let gm = catalog::golden_mean();
    let v = ufp_corner_gluing_evidence(&gm, FillMode::Ufp, 2, 3, 3).unwrap();
    ensure(v.status == Status::Evidence, format!("golden-mean uniform filling: {:?}", v.status))?;
    let b = catalog::boyle();
    for g in 1..=2 {
        let v = ufp_corner_gluing_evidence(&b, FillMode::Corner, g, 3, 3).unwrap();
        ensure(v.status == Status::Refuted, format!("boyle corner gluing at g={g}: {:?}", v.status))?;
        ensure(replay(&b, &v).unwrap() == Status::Refuted, format!("boyle corner refutation replay at g={g}"))?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 14] = [
        ("golden-mean tables, cycle, mixing and strong specification", golden_mean),
        ("non-degenerate set: diagonal cycle and vertical commutative pair", cycle_and_pair),
        ("ternary set: commutative pair certificate", ternary_pair),
        ("three-coloring tables, cycle 151 and mixing", three_coloring),
        ("diagonal-order set: corner failures and unknown mixing", diagonal_order),
        ("simplified golden mean: width-3 hole filling", simplified_golden_mean),
        ("burton-steif hole filling and strong specification", burton_steif),
        ("hole filling at sizes (3,3) and (4,4)", larger_holes),
        ("boyle set: hole-filling witness, strong specification unknown", boyle),
        ("six-vertex edge tables and mixing", six_vertex),
        ("eight-vertex annulus failures and mixing", eight_vertex),
        ("property suites against the oracle", property_suites),
        ("ledrappier variant: no standard certificate", ledrappier_variant),
        ("uniform filling and corner gluing bounded checks", filling_checks),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(r) => r,
            Err(e) => Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()),
        };
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS ({secs:.1}s) {name}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL ({secs:.1}s) {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
