//! Invariant diagonal cycles of the connecting operators.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{is_diagonal, Caps, Check, Ctx, Route};
use crate::basic_set::{pow, BasicSet};
use crate::connect::{build_connecting, ConnectorFamily};
use crate::error::{Error, Result};
use crate::matrix::{BoolMatrix, CountMatrix};
use crate::primitivity::primitivity_analysis;
use crate::structure::Degeneracy;
use crate::transfer::{elementary_pattern, Direction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalCycleCert {
    pub direction: Direction,
    pub m: usize,
    /// `β̄_1 … β̄_q`, 1-based members of `D_p`; the cycle closes back on `β̄_1`.
    pub cycle: Vec<usize>,
    /// Invariant index set, 1-based and increasing.
    pub k_set: Vec<usize>,
}

impl DiagonalCycleCert {
    pub fn q(&self) -> usize {
        self.cycle.len()
    }

    /// The closed cycle as text, e.g. `151`; multi-digit indices are dash-separated.
    pub fn label(&self) -> String {
        let closed: Vec<String> = self.cycle.iter().chain(self.cycle.first()).map(|b| b.to_string()).collect();
        if self.cycle.iter().all(|&b| b < 10) {
            closed.concat()
        } else {
            closed.join("-")
        }
    }
}

fn product0(fam: &ConnectorFamily, cycle0: &[usize]) -> BoolMatrix {
    let mut path = cycle0.to_vec();
    path.push(cycle0[0]);
    fam.chain0(&path)
}

/// `S_{m;β_1,β_2} ⋯ S_{m;β_q,β_1}` (or the `W` product for the vertical direction).
pub fn cycle_product(b: &BasicSet, dir: Direction, m: usize, cycle: &[usize]) -> Result<BoolMatrix> {
    let p = b.p();
    if cycle.is_empty() || cycle.iter().any(|&beta| !is_diagonal(p, beta)) {
        return Err(Error::Domain("cycle entries must be diagonal block indices".into()));
    }
    let ctx = Ctx::new(b, dir, 2)?;
    let fam = build_connecting(&ctx.b, Direction::Horizontal, m)?.to_s_w();
    let cycle0: Vec<usize> = cycle.iter().map(|b| b - 1).collect();
    Ok(product0(&fam, &cycle0))
}

/// Every `l ∈ K` has some `k ∈ K` with `P(k, l) = 1`; `K` 1-based.
pub fn is_invariant(prod: &BoolMatrix, k_set: &[usize]) -> bool {
    !k_set.is_empty()
        && k_set.iter().all(|&l| l >= 1 && l <= prod.dim())
        && k_set.iter().all(|&l| k_set.iter().any(|&k| prod.get(k - 1, l - 1)))
}

fn maximal0(prod: &BoolMatrix) -> Vec<usize> {
    let mut keep: Vec<bool> = vec![true; prod.dim()];
    loop {
        let next: Vec<bool> = (0..prod.dim()).map(|l| keep[l] && (0..prod.dim()).any(|k| keep[k] && prod.get(k, l))).collect();
        if next == keep {
            break;
        }
        keep = next;
    }
    (0..prod.dim()).filter(|&l| keep[l]).collect()
}

/// Largest invariant set, by repeatedly dropping columns with no support row left in the set; 1-based.
pub fn maximal_invariant_set(prod: &BoolMatrix) -> Vec<usize> {
    maximal0(prod).into_iter().map(|l| l + 1).collect()
}

/// Invariant sets tried in order: the nontrivial strongly connected pieces of
/// the maximal set by least index, then the maximal set itself; 1-based.
pub fn invariant_candidates(prod: &BoolMatrix) -> Vec<Vec<usize>> {
    let maximal = maximal0(prod);
    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = maximal.iter().map(|&l| graph.add_node(l)).collect();
    for (a, &k) in maximal.iter().enumerate() {
        for (c, &l) in maximal.iter().enumerate() {
            if prod.get(k, l) {
                graph.add_edge(nodes[a], nodes[c], ());
            }
        }
    }
    let mut pieces: Vec<Vec<usize>> = tarjan_scc(&graph)
        .into_iter()
        .filter(|scc| scc.len() > 1 || graph.contains_edge(scc[0], scc[0]))
        .map(|scc| {
            let mut v: Vec<usize> = scc.iter().map(|&n| graph[n] + 1).collect();
            v.sort_unstable();
            v
        })
        .collect();
    pieces.sort();
    let full: Vec<usize> = maximal.iter().map(|l| l + 1).collect();
    if !full.is_empty() && !pieces.contains(&full) {
        pieces.push(full);
    }
    pieces
}

/// `Σ_{l∈K} H^{(l)}_{m,n;α}` with counts; `alpha` and `K` 1-based.
pub fn elementary_sum(b: &BasicSet, dir: Direction, m: usize, n: usize, alpha: usize, k_set: &[usize]) -> Result<CountMatrix> {
    let size = pow(b.p(), n - 1);
    let mut acc = CountMatrix::zeros(size);
    for &k in k_set {
        acc = acc.add(&elementary_pattern(b, dir, m, n, alpha, k)?);
    }
    Ok(acc)
}

/// Conditions for a cycle whose invariance is already known; indices 0-based.
fn conditions(ctx: &Ctx, m: usize, q: usize, beta0: usize, ks0: &[usize]) -> Result<Check> {
    let mut reasons = Vec::new();
    if ctx.degeneracy == Degeneracy::NonDegenerate {
        let mut failed = None;
        for n in 2..=q + 1 {
            let sum = ctx.elementary_sum(m, n, beta0, ks0)?;
            if !primitivity_analysis(&sum)?.primitive {
                failed = Some(n);
                break;
            }
        }
        match failed {
            None => return Ok(Ok(Route::DiagonalNonDegenerate)),
            Some(n) => reasons.push(format!("elementary sum not primitive at n = {n}")),
        }
    }
    if let Err(why) = ctx.weak_premises() {
        reasons.push(why);
        return Ok(Err(reasons.join("; ")));
    }
    for n in 2..=q + 1 {
        let sum = ctx.elementary_sum(m, n, beta0, ks0)?;
        if super::dominating_power(&sum, &ctx.e_block(n, beta0)?)?.is_none() {
            reasons.push(format!("no power of the elementary sum dominates its saturation block at n = {n}"));
            return Ok(Err(reasons.join("; ")));
        }
        if !ctx.h_primitive(n)? {
            reasons.push(format!("order {n} transition matrix is not primitive"));
            return Ok(Err(reasons.join("; ")));
        }
    }
    Ok(Ok(Route::DiagonalWeak))
}

/// Re-validates a certificate from a fresh build; malformed certificates are errors,
/// failing conditions come back as `Err(reason)`.
pub fn check_invariant_cycle_conditions(b: &BasicSet, cert: &DiagonalCycleCert) -> Result<Check> {
    let p = b.p();
    let reject = |msg: &str| Err(Error::Certificate(msg.to_string()));
    if cert.m < 2 {
        return reject("order m must be at least 2");
    }
    if cert.cycle.is_empty() || cert.cycle.iter().any(|&beta| !is_diagonal(p, beta)) {
        return reject("cycle entries must be diagonal block indices");
    }
    let size = pow(p, cert.m - 1);
    if cert.k_set.iter().any(|&k| k == 0 || k > size) || cert.k_set.windows(2).any(|w| w[0] >= w[1]) {
        return reject("index set must be increasing within [1, p^(m-1)]");
    }
    let ctx = Ctx::new(b, cert.direction, cert.q() + 1)?;
    let fam = build_connecting(&ctx.b, Direction::Horizontal, cert.m)?.to_s_w();
    let cycle0: Vec<usize> = cert.cycle.iter().map(|b| b - 1).collect();
    if !is_invariant(&product0(&fam, &cycle0), &cert.k_set) {
        return Ok(Err("index set is empty or not invariant under the cycle product".into()));
    }
    let ks0: Vec<usize> = cert.k_set.iter().map(|k| k - 1).collect();
    conditions(&ctx, cert.m, cert.q(), cycle0[0], &ks0)
}

fn words(p: usize, q: usize) -> Vec<Vec<usize>> {
    (0..pow(p, q)).map(|c| crate::basic_set::digits(c, q, p).into_iter().map(|d| d as usize * (p + 1)).collect()).collect()
}

/// First cycle, in order of `(m, q, word)`, with an invariant set meeting a primitivity route.
pub fn find_invariant_diagonal_cycle(b: &BasicSet, dir: Direction, caps: &Caps) -> Result<Option<(DiagonalCycleCert, Route)>> {
    let ctx = Ctx::new(b, dir, caps.q_max + 1)?;
    search(&ctx, caps)
}

pub(crate) fn search(ctx: &Ctx, caps: &Caps) -> Result<Option<(DiagonalCycleCert, Route)>> {
    let p = ctx.p;
    for m in caps.orders(p) {
        let fam = build_connecting(&ctx.b, Direction::Horizontal, m)?.to_s_w();
        for q in 1..=caps.q_max {
            let hit = words(p, q)
                .into_par_iter()
                .map(|cycle0| -> Result<Option<(DiagonalCycleCert, Route)>> {
                    let prod = product0(&fam, &cycle0);
                    for k_set in invariant_candidates(&prod) {
                        let ks0: Vec<usize> = k_set.iter().map(|k| k - 1).collect();
                        if let Ok(route) = conditions(ctx, m, q, cycle0[0], &ks0)? {
                            let cycle = cycle0.iter().map(|b| b + 1).collect();
                            return Ok(Some((DiagonalCycleCert { direction: ctx.dir, m, cycle, k_set }, route)));
                        }
                    }
                    Ok(None)
                })
                .find_map_first(|r| r.transpose());
            if let Some(found) = hit {
                return found.map(Some);
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn caps(p: usize) -> Caps {
        Caps::for_alphabet(p)
    }

    #[test]
    fn golden_mean_cycle() {
        let b = catalog::golden_mean();
        let (cert, route) = find_invariant_diagonal_cycle(&b, Direction::Horizontal, &caps(2)).unwrap().unwrap();
        assert_eq!((cert.m, cert.q(), cert.label(), cert.k_set.clone()), (2, 1, "11".to_string(), vec![1, 2]));
        assert_eq!(route, Route::DiagonalWeak);
        let sum = elementary_sum(&b, Direction::Horizontal, 2, 2, 1, &cert.k_set).unwrap();
        assert_eq!(sum.to_rows(), vec![vec![3, 2], vec![2, 2]]);
        assert_eq!(check_invariant_cycle_conditions(&b, &cert).unwrap(), Ok(Route::DiagonalWeak));
    }

    #[test]
    fn cycle_and_pair_cycle() {
        let b = catalog::cycle_and_pair();
        let (cert, route) = find_invariant_diagonal_cycle(&b, Direction::Horizontal, &caps(2)).unwrap().unwrap();
        assert_eq!((cert.m, cert.q(), cert.label(), cert.k_set.clone()), (3, 1, "11".to_string(), vec![3, 4]));
        assert_eq!(route, Route::DiagonalNonDegenerate);
        let sum = elementary_sum(&b, Direction::Horizontal, 3, 2, 1, &cert.k_set).unwrap();
        assert_eq!(sum.to_rows(), vec![vec![2, 1], vec![1, 1]]);
    }

    #[test]
    fn three_coloring_cycle() {
        let b = catalog::three_coloring();
        let (cert, _) = find_invariant_diagonal_cycle(&b, Direction::Horizontal, &caps(3)).unwrap().unwrap();
        assert_eq!((cert.m, cert.q(), cert.label(), cert.k_set.clone()), (2, 2, "151".to_string(), vec![2, 3]));
        let prod = cycle_product(&b, Direction::Horizontal, 2, &[1, 5]).unwrap();
        assert_eq!(prod.to_rows(), vec![vec![0, 0, 0], vec![0, 1, 1], vec![0, 1, 1]]);
    }

    #[test]
    fn emptied_index_set_fails() {
        let b = catalog::golden_mean();
        let (mut cert, _) = find_invariant_diagonal_cycle(&b, Direction::Horizontal, &caps(2)).unwrap().unwrap();
        cert.k_set.clear();
        assert!(check_invariant_cycle_conditions(&b, &cert).unwrap().is_err());
        cert.k_set = vec![9];
        assert!(check_invariant_cycle_conditions(&b, &cert).is_err());
    }

    #[test]
    fn maximal_set_examples() {
        let prod = BoolMatrix::from_rows(&[vec![0u8, 0, 0], vec![0, 1, 1], vec![0, 1, 1]]).unwrap();
        assert_eq!(maximal_invariant_set(&prod), vec![2, 3]);
        let chain = BoolMatrix::from_rows(&[vec![0u8, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]).unwrap();
        assert!(maximal_invariant_set(&chain).is_empty());
        assert!(invariant_candidates(&chain).is_empty());
    }

    #[test]
    fn ledrappier_has_no_cycle() {
        let b = catalog::ledrappier_variant();
        assert!(find_invariant_diagonal_cycle(&b, Direction::Horizontal, &caps(2)).unwrap().is_none());
    }
}
