//! Quick numeric self-checks, run by `satkey verify`. Each takes well under a
//! second in release builds.

use serde::Serialize;

use crate::asymptotics::{envelope, scaled_limit};
use crate::capacity::{default_w_range, sup_over_w};
use crate::channel::{CrossoverPair, SatelliteParams};
use crate::error::Result;
use crate::mi::{cond_mi_bruteforce, cond_mi_closed_form, joint_pmf, sk_upper_bound};
use crate::optimize::{maximize, Interval};
use crate::protocol::{evaluate_exact, one_bit_protocol, repetition_disagreement, repetition_protocol};
use crate::special::erf;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

fn erf_reference() -> Result<CheckOutcome> {
    let err = (erf(1.0)? - 0.842_700_792_949_714_9).abs();
    Ok(outcome("erf-reference", err <= 1e-15, format!("|erf(1) - ref| = {err:.3e}")))
}

fn closed_form_matches_bruteforce() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for i in 1..=24 {
        for j in 1..=24 {
            let c = CrossoverPair::new(i as f64 / 50.0, j as f64 / 50.0)?;
            let a = cond_mi_closed_form(&c)?.bits();
            let b = cond_mi_bruteforce(&joint_pmf(&c)).bits();
            worst = worst.max((a - b).abs());
        }
    }
    Ok(outcome("closed-form", worst <= 1e-12, format!("max deviation {worst:.3e} on a 24x24 grid")))
}

fn envelope_peak() -> Result<CheckOutcome> {
    let m = maximize(|w| envelope(w).unwrap_or(0.0), Interval::new(0.0, 10.0)?, 256, 1e-10)?;
    let ok = (m.value - 0.6330).abs() <= 5e-4 && (m.x - std::f64::consts::SQRT_2).abs() < 1e-4;
    Ok(outcome("envelope-peak", ok, format!("max {:.6} at w = {:.6}", m.value, m.x)))
}

fn scaled_convergence() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for w in [0.5, 1.0, std::f64::consts::SQRT_2, 2.0] {
        let q = 1e6;
        let scaled = q * q * sk_upper_bound(&SatelliteParams::new(w, q)?).bits();
        let limit = scaled_limit(w)?;
        worst = worst.max(((scaled - limit) / limit).abs());
    }
    Ok(outcome("scaled-limit", worst <= 1e-4, format!("max relative gap {worst:.3e} at q = 1e6")))
}

fn quadratic_decay() -> Result<CheckOutcome> {
    let r = sup_over_w(1e4, default_w_range(), 256)?;
    Ok(outcome(
        "quadratic-decay",
        r.scaled_sup <= 0.2,
        format!("q^2 sup I = {:.6} at q = 1e4 (w* = {:.4})", r.scaled_sup, r.w_star),
    ))
}

fn protocol_exactness() -> Result<CheckOutcome> {
    let c = SatelliteParams::new(1.0, 4.0)?.crossovers();
    let d = c.legit_disagreement();
    let one = evaluate_exact(&one_bit_protocol()?, &c)?;
    let rep = evaluate_exact(&repetition_protocol(3)?, &c)?;
    let e1 = (one.pr_disagree - d).abs();
    let e3 = (rep.pr_disagree_given_accept - repetition_disagreement(d, 3)).abs();
    Ok(outcome(
        "protocol-exact",
        e1.max(e3) <= 1e-12,
        format!("one-bit error {e1:.3e}, repetition(3) error {e3:.3e}"),
    ))
}

/// Runs every check in a fixed order.
pub fn run_checks() -> Result<Vec<CheckOutcome>> {
    let checks: [fn() -> Result<CheckOutcome>; 6] = [
        erf_reference,
        closed_form_matches_bruteforce,
        envelope_peak,
        scaled_convergence,
        quadratic_decay,
        protocol_exactness,
    ];
    checks.iter().map(|f| f()).collect()
}
