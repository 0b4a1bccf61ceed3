//! Verdicts assembled from certificates, and their replay.

use serde::{Deserialize, Serialize};

use super::{diagonal, pair, Caps, Certificate, Ctx, Property, Status, Verdict};
use crate::basic_set::BasicSet;
use crate::error::{Error, Result};
use crate::primitivity::primitivity_analysis;
use crate::structure::{crisscross_closure, degeneracy_profile, Degeneracy, StructureProfile};
use crate::transfer::{build_transition, Direction};

/// Theorem name for verdicts decided by running the power sequence directly.
const DIRECT: &str = "direct-power-analysis";
/// Theorem name for refuting mixing from a rectangle route and a non-primitive matrix.
const NON_MIXING: &str = "rectangle-extendable/non-primitive";

/// Some order-`n` transition matrix is not primitive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonPrimitiveCert {
    pub direction: Direction,
    pub n: usize,
    /// Whether the matrix belongs to the crisscross closure rather than the input set.
    pub closure: bool,
}

/// Every `H_n`, `V_n` with `2 ≤ n ≤ up_to` satisfies `A^k ≥ E(A)` for all `k ≥ n0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformPrimitivityCert {
    pub up_to: usize,
    pub n0: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixingRoute {
    #[serde(rename = "non-degenerate/primitive-all-n")]
    NonDegenerate,
    #[serde(rename = "crisscross-corners/primitive-all-n")]
    CrisscrossCorners,
    #[serde(rename = "weakly-non-degenerate/primitive-conditions")]
    WeakConditions,
}

impl MixingRoute {
    pub fn name(self) -> &'static str {
        match self {
            MixingRoute::NonDegenerate => "non-degenerate/primitive-all-n",
            MixingRoute::CrisscrossCorners => "crisscross-corners/primitive-all-n",
            MixingRoute::WeakConditions => "weakly-non-degenerate/primitive-conditions",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixingCert {
    /// Whether the certificates refer to the crisscross closure of the input.
    pub closure: bool,
    pub route: MixingRoute,
    pub horizontal: Box<Certificate>,
    pub vertical: Box<Certificate>,
}

fn mixing_route(prof: &StructureProfile) -> Option<MixingRoute> {
    let nd = Degeneracy::NonDegenerate;
    if prof.degeneracy_h == nd && prof.degeneracy_v == nd {
        Some(MixingRoute::NonDegenerate)
    } else if prof.crisscross && prof.corner.iter().filter(|&&c| c).count() >= 3 {
        Some(MixingRoute::CrisscrossCorners)
    } else if prof.crisscross && prof.degeneracy_h.is_weakly_non_degenerate() && prof.degeneracy_v.is_weakly_non_degenerate() {
        Some(MixingRoute::WeakConditions)
    } else {
        None
    }
}

/// Tries a diagonal cycle, then a commutative pair; otherwise falls back to direct analysis.
pub fn primitivity_all_n_certificate(b: &BasicSet, dir: Direction, caps: &Caps) -> Result<Verdict> {
    let ctx = Ctx::new(b, dir, (caps.q_max + 1).max(caps.direct_n))?;
    let verdict = |status, theorem: &str, cert| Verdict::new(Property::PrimitivityAllN, status, theorem, cert, caps).with_direction(dir);
    for n in 2..=caps.direct_n {
        if !ctx.h_primitive(n)? {
            let cert = Certificate::NonPrimitive(NonPrimitiveCert { direction: dir, n, closure: false });
            return Ok(verdict(Status::Refuted, DIRECT, cert));
        }
    }
    let mut notes = Vec::new();
    match diagonal::search(&ctx, caps) {
        Ok(Some((cert, route))) => return Ok(verdict(Status::Proved, route.name(), Certificate::DiagonalCycle(cert))),
        Ok(None) => notes.push("no invariant diagonal cycle meets a primitivity route within caps".to_string()),
        Err(Error::Resource(why)) => notes.push(format!("diagonal cycle search stopped: {why}")),
        Err(e) => return Err(e),
    }
    match pair::search(&ctx, caps, pair::PairSearch::default()) {
        Ok(Some(cert)) => match pair::route(&ctx)? {
            Ok(route) => return Ok(verdict(Status::Proved, route.name(), Certificate::CommutativePair(cert))),
            Err(why) => notes.push(format!("commutative pair found but {why}")),
        },
        Ok(None) => notes.push("no primitive commutative pair within caps".to_string()),
        Err(Error::Resource(why)) => notes.push(format!("commutative pair search stopped: {why}")),
        Err(e) => return Err(e),
    }
    notes.push(format!("order n transition matrix primitive for 2 ≤ n ≤ {}", caps.direct_n));
    Ok(verdict(Status::Evidence, DIRECT, Certificate::None).with_notes(notes))
}

/// Input set if it is already crisscross-closed, otherwise the closure.
fn closed(b: &BasicSet) -> Result<(BasicSet, bool)> {
    let star = crisscross_closure(b)?.star;
    let changed = star != *b;
    Ok((star, changed))
}

fn first_non_primitive(b: &BasicSet, caps: &Caps, closure: bool) -> Result<Option<NonPrimitiveCert>> {
    for n in 2..=caps.direct_n {
        for direction in [Direction::Horizontal, Direction::Vertical] {
            if !primitivity_analysis(&build_transition(b, direction, n)?)?.primitive {
                return Ok(Some(NonPrimitiveCert { direction, n, closure }));
            }
        }
    }
    Ok(None)
}

/// Mixing from primitivity of every `H_n` and `V_n` of the crisscross closure.
pub fn mixing_verdict(b: &BasicSet, caps: &Caps) -> Result<Verdict> {
    b.require_vertex()?;
    let (star, closure) = closed(b)?;
    if star.is_empty() {
        let v = Verdict::new(Property::Mixing, Status::Unknown, "", Certificate::None, caps);
        return Ok(v.with_notes(vec!["crisscross closure is empty".into()]));
    }
    let prof = degeneracy_profile(&star)?;
    if prof.rectangle.is_established() {
        if let Some(cert) = first_non_primitive(&star, caps, closure)? {
            return Ok(Verdict::new(Property::Mixing, Status::Refuted, NON_MIXING, Certificate::NonPrimitive(cert), caps));
        }
    }
    let hv = primitivity_all_n_certificate(&star, Direction::Horizontal, caps)?;
    let vv = primitivity_all_n_certificate(&star, Direction::Vertical, caps)?;
    let route = mixing_route(&prof);
    if let (Some(route), Status::Proved, Status::Proved) = (route, hv.status, vv.status) {
        let cert = MixingCert { closure, route, horizontal: Box::new(hv.certificate), vertical: Box::new(vv.certificate) };
        return Ok(Verdict::new(Property::Mixing, Status::Proved, route.name(), Certificate::Mixing(cert), caps));
    }
    let mut notes = Vec::new();
    for (i, ok) in prof.corner.iter().enumerate() {
        if !ok {
            notes.push(format!("corner condition C({}) fails", i + 1));
        }
    }
    for (name, d) in [("horizontal", prof.degeneracy_h), ("vertical", prof.degeneracy_v)] {
        if !d.is_weakly_non_degenerate() {
            notes.push(format!("{name} table is not weakly non-degenerate"));
        }
    }
    if !prof.rectangle.is_established() {
        notes.push("rectangle-extendability not established".into());
    }
    for (name, v) in [("horizontal", &hv), ("vertical", &vv)] {
        if v.status != Status::Proved {
            notes.push(format!("{name} primitivity for all n is {}", v.status.name()));
        }
    }
    Ok(Verdict::new(Property::Mixing, Status::Unknown, "", Certificate::None, caps).with_notes(notes))
}

/// Uniform primitivity over `n ≤ caps.direct_n`; never more than evidence.
pub fn block_gluing_evidence(b: &BasicSet, caps: &Caps) -> Result<Verdict> {
    b.require_vertex()?;
    let (star, closure) = closed(b)?;
    let established = !star.is_empty() && degeneracy_profile(&star)?.rectangle.is_established();
    if established {
        if let Some(cert) = first_non_primitive(&star, caps, closure)? {
            return Ok(Verdict::new(Property::BlockGluing, Status::Refuted, NON_MIXING, Certificate::NonPrimitive(cert), caps));
        }
    }
    let mut n0 = 1;
    for n in 2..=caps.direct_n {
        for dir in [Direction::Horizontal, Direction::Vertical] {
            let r = primitivity_analysis(&build_transition(&star, dir, n)?)?;
            n0 = n0.max(r.n0.unwrap_or(usize::MAX));
        }
    }
    if !established || n0 == usize::MAX {
        let note = if established { "some order is not primitive" } else { "rectangle-extendability not established" };
        return Ok(Verdict::new(Property::BlockGluing, Status::Unknown, "", Certificate::None, caps).with_notes(vec![note.into()]));
    }
    let cert = Certificate::UniformPrimitivity(UniformPrimitivityCert { up_to: caps.direct_n, n0 });
    Ok(Verdict::new(Property::BlockGluing, Status::Evidence, "uniform-primitivity", cert, caps))
}

fn reject<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Certificate(msg.into()))
}

fn replay_route(b: &BasicSet, cert: &Certificate) -> Result<String> {
    let check = match cert {
        Certificate::DiagonalCycle(c) => diagonal::check_invariant_cycle_conditions(b, c)?,
        Certificate::CommutativePair(c) => pair::check_pair_conditions(b, c)?,
        _ => return reject("expected a diagonal cycle or commutative pair"),
    };
    match check {
        Ok(route) => Ok(route.name().to_string()),
        Err(why) => reject(why),
    }
}

fn replay_non_primitive(b: &BasicSet, c: &NonPrimitiveCert, mixing: bool) -> Result<Status> {
    let (star, closure) = closed(b)?;
    let target = if c.closure { star } else { b.clone() };
    if c.closure && !closure {
        return reject("closure flag set but the input is already closed");
    }
    if mixing && !degeneracy_profile(&target)?.rectangle.is_established() {
        return reject("rectangle-extendability is not established");
    }
    if primitivity_analysis(&build_transition(&target, c.direction, c.n)?)?.primitive {
        return reject(format!("order {} matrix is primitive", c.n));
    }
    Ok(Status::Refuted)
}

/// Re-validates a verdict from its certificate alone; no search is run.
pub fn replay(b: &BasicSet, verdict: &Verdict) -> Result<Status> {
    match &verdict.certificate {
        Certificate::None => match verdict.status {
            Status::Proved | Status::Refuted => reject("decisive verdict without a certificate"),
            s => Ok(s),
        },
        cert @ (Certificate::DiagonalCycle(_) | Certificate::CommutativePair(_)) => {
            let route = replay_route(b, cert)?;
            if route != verdict.theorem {
                return reject(format!("certificate supports {route}, verdict names {}", verdict.theorem));
            }
            Ok(Status::Proved)
        }
        Certificate::NonPrimitive(c) => {
            replay_non_primitive(b, c, matches!(verdict.property, Property::Mixing | Property::BlockGluing))
        }
        Certificate::Mixing(c) => {
            let (star, closure) = closed(b)?;
            if closure != c.closure {
                return reject("closure flag does not match the input");
            }
            let prof = degeneracy_profile(&star)?;
            let wnd = prof.degeneracy_h.is_weakly_non_degenerate() && prof.degeneracy_v.is_weakly_non_degenerate();
            let ok = match c.route {
                MixingRoute::NonDegenerate => prof.rectangle == crate::structure::RectangleRoute::NonDegenerate,
                MixingRoute::CrisscrossCorners => prof.crisscross && prof.corner.iter().filter(|&&x| x).count() >= 3,
                MixingRoute::WeakConditions => prof.crisscross && wnd,
            };
            if !ok || c.route.name() != verdict.theorem {
                return reject("structural premises of the mixing route fail");
            }
            for (dir, cert) in [(Direction::Horizontal, &c.horizontal), (Direction::Vertical, &c.vertical)] {
                let stated = match cert.as_ref() {
                    Certificate::DiagonalCycle(d) => d.direction,
                    Certificate::CommutativePair(p) => p.direction,
                    _ => return reject("mixing certificate needs two primitivity certificates"),
                };
                if stated != dir {
                    return reject("primitivity certificate has the wrong direction");
                }
                replay_route(&star, cert)?;
            }
            Ok(Status::Proved)
        }
        Certificate::UniformPrimitivity(c) => {
            let (star, _) = closed(b)?;
            for n in 2..=c.up_to {
                for dir in [Direction::Horizontal, Direction::Vertical] {
                    let r = primitivity_analysis(&build_transition(&star, dir, n)?)?;
                    if !r.n0.is_some_and(|n0| n0 <= c.n0) {
                        return reject(format!("order {n} is not {}-primitive", c.n0));
                    }
                }
            }
            Ok(Status::Evidence)
        }
        Certificate::StrongSpecification(c) => crate::holefill::replay_strong_specification(b, c),
        Certificate::FillFailure(c) => crate::holefill::replay_fill_failure(b, c),
        Certificate::EdgeMixing(c) => crate::edge::replay_edge_mixing(b, c),
    }
}
