//! Large-`q` behaviour of the key-rate bound.
//!
//! As `q -> inf`, `q^2 I(X_q;Y_q|Z_q)` tends to
//! `L(w) = 2 w^4 (1 - erf(w/sqrt 2)^2)^2 / (pi^2 ln 2)`, which is dominated by
//! the envelope `8 w^4 exp(-w^2) / (pi^2 ln 2)` (maximum ~0.6330 at `w = sqrt 2`).
//! The truncated expansions used to derive the limit are exposed so their
//! residual orders can be checked against the exact expressions.

use serde::Serialize;

use crate::channel::{CrossoverPair, SatelliteParams};
use crate::error::{domain, Result};
use crate::special::erf_finite;

const LN_2: f64 = std::f64::consts::LN_2;
const PI: f64 = std::f64::consts::PI;

fn check_amplitude(w: f64) -> Result<()> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("amplitude w must be finite and > 0, got {w}")))
    }
}

/// `lim q^2 I(X_q;Y_q|Z_q)` at amplitude `w`.
pub fn scaled_limit(w: f64) -> Result<f64> {
    check_amplitude(w)?;
    let e = erf_finite(w / std::f64::consts::SQRT_2);
    // 1 - e^2 = (1 - e)(1 + e) keeps the tail
    let one_minus_sq = crate::special::erfc_finite(w / std::f64::consts::SQRT_2) * (1.0 + e);
    Ok(2.0 * w.powi(4) * one_minus_sq * one_minus_sq / (PI * PI * LN_2))
}

/// `8 w^4 exp(-w^2) / (pi^2 ln 2)`.
pub fn envelope(w: f64) -> Result<f64> {
    check_amplitude(w)?;
    Ok(envelope_unchecked(w))
}

pub(crate) fn envelope_unchecked(w: f64) -> f64 {
    8.0 * w.powi(4) * (-w * w).exp() / (PI * PI * LN_2)
}

/// The limit and its envelope at one amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledLimit {
    pub w: f64,
    pub limit_value: f64,
    pub envelope_value: f64,
}

impl ScaledLimit {
    pub fn at(w: f64) -> Result<Self> {
        Ok(Self { w, limit_value: scaled_limit(w)?, envelope_value: envelope(w)? })
    }
}

/// Both sides of `(1 - erf(z)^2)^2 <= 4 exp(-2 z^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErfSquareBound {
    pub lhs: f64,
    pub rhs: f64,
}

impl ErfSquareBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn erf_square_bound_check(z: f64) -> Result<ErfSquareBound> {
    if !(z.is_finite() && z > 0.0) {
        return Err(domain(format!("z must be finite and > 0, got {z}")));
    }
    let e = erf_finite(z);
    let t = crate::special::erfc_finite(z) * (1.0 + e);
    Ok(ErfSquareBound { lhs: t * t, rhs: 4.0 * (-2.0 * z * z).exp() })
}

/// Two-term expansion `1/2 - w / sqrt(2 pi q)` of `epsilon`.
pub fn epsilon_series(p: &SatelliteParams) -> f64 {
    0.5 - p.w() / (2.0 * PI * p.q()).sqrt()
}

/// `1 - (2/ln 2)(p - 1/2)^2 - (4/(3 ln 2))(p - 1/2)^4`.
pub fn hb_series(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(domain(format!("series argument must lie in (0, 1), got {p}")));
    }
    Ok(1.0 - hb_series_deficit(p - 0.5))
}

/// The truncation in deficit form, `1 - hb_series(1/2 + d)`.
pub fn hb_series_deficit(d: f64) -> f64 {
    let d2 = d * d;
    (2.0 * d2 + 4.0 / 3.0 * d2 * d2) / LN_2
}

/// Second-order expansions of the three entropy arguments in `eps - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompositeSeries {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

/// `a1 = 1/2 - (1 - 2 gamma) e` (exact),
/// `a2 = a1 - 8 gamma (1 - gamma) e^2`, `a3 = a1 + 8 gamma (1 - gamma) e^2`,
/// with `e = eps - 1/2`.
pub fn composite_series(c: &CrossoverPair) -> CompositeSeries {
    let e = c.epsilon_offset();
    let g = c.gamma();
    let linear = 0.5 - (1.0 - 2.0 * g) * e;
    let quad = 8.0 * g * (1.0 - g) * e * e;
    CompositeSeries { a1: linear, a2: linear - quad, a3: linear + quad }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(domain("slope fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(domain("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(domain("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}

/// `n` points spaced logarithmically in `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mi::{binary_entropy_deficit, centered_offsets, cond_mi_closed_form, sk_upper_bound};
    use std::f64::consts::SQRT_2;

    const ERF_ONE: f64 = 0.842_700_792_949_714_869_341_220_6;

    #[test]
    fn limit_basics() {
        assert!(scaled_limit(1e-12).unwrap() < 1e-9);
        let golden = 8.0 * (1.0 - ERF_ONE * ERF_ONE).powi(2) / (PI * PI * LN_2);
        let got = scaled_limit(SQRT_2).unwrap();
        assert!((got - golden).abs() < 1e-15);
        // 50-digit evaluation
        assert!((got - 0.098_248_853_850_197_48).abs() < 1e-15);
        assert!(scaled_limit(0.0).is_err());
        assert!(envelope(-1.0).is_err());
    }

    #[test]
    fn limit_vanishes_at_both_ends() {
        for w in [1e-4, 30.0] {
            let s = ScaledLimit::at(w).unwrap();
            assert!(s.limit_value < 1e-12 && s.envelope_value < 1e-12);
        }
    }

    #[test]
    fn envelope_peak_value() {
        let v = envelope(SQRT_2).unwrap();
        assert!((v - 0.6330).abs() < 5e-4);
        assert!((v - 0.633_046_785_822_423_2).abs() < 1e-14);
    }

    #[test]
    fn envelope_dominates_limit() {
        for i in 1..=200 {
            let w = 8.0 * i as f64 / 200.0;
            let s = ScaledLimit::at(w).unwrap();
            assert!(s.limit_value <= s.envelope_value, "w = {w}");
        }
    }

    #[test]
    fn envelope_grid_argmax() {
        let (best_w, _) = (1..=200)
            .map(|i| 8.0 * i as f64 / 200.0)
            .map(|w| (w, envelope(w).unwrap()))
            .fold((0.0, f64::MIN), |b, c| if c.1 > b.1 { c } else { b });
        assert!((best_w - SQRT_2).abs() <= 0.04);
    }

    #[test]
    fn erf_square_inequality() {
        let b = erf_square_bound_check(1.0).unwrap();
        assert!((b.lhs - (1.0 - ERF_ONE * ERF_ONE).powi(2)).abs() < 1e-15);
        assert!((b.rhs - 4.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(b.holds());
        let small = erf_square_bound_check(1e-9).unwrap();
        assert!((small.lhs - 1.0).abs() < 1e-12 && (small.rhs - 4.0).abs() < 1e-12 && small.holds());
        let tail = erf_square_bound_check(5.0).unwrap();
        assert!(tail.lhs < 1e-20 && tail.rhs < 1e-20 && tail.holds());
        assert!(erf_square_bound_check(0.0).is_err());
        for i in 1..=400 {
            assert!(erf_square_bound_check(i as f64 * 0.02).unwrap().holds());
        }
    }

    #[test]
    fn epsilon_series_residual_order() {
        let qs = [1e2, 1e4, 1e6];
        let res: Vec<f64> = qs
            .iter()
            .map(|&q| {
                let p = SatelliteParams::new(1.0, q).unwrap();
                (crate::channel::crossover_epsilon(&p) - epsilon_series(&p)).abs()
            })
            .collect();
        let slope = loglog_slope(&qs, &res).unwrap();
        assert!((slope + 1.5).abs() <= 0.1, "slope {slope}");
        let far = epsilon_series(&SatelliteParams::new(1.0, 1e12).unwrap());
        assert!((far - 0.5).abs() < 1e-6);
    }

    #[test]
    fn hb_series_residual_order() {
        assert_eq!(hb_series(0.5).unwrap(), 1.0);
        let ds = [1e-1, 1e-2, 1e-3];
        // residual measured between deficits; 1 - H_b itself has no digits left at 1e-18
        let res: Vec<f64> = ds
            .iter()
            .map(|&d| (binary_entropy_deficit(d).unwrap() - hb_series_deficit(d)).abs())
            .collect();
        let slope = loglog_slope(&ds, &res).unwrap();
        assert!((slope - 6.0).abs() <= 0.2, "slope {slope}");
        for d in [0.1, 0.3, 0.01] {
            assert!((hb_series(0.5 + d).unwrap() - hb_series(0.5 - d).unwrap()).abs() < 1e-15);
        }
        assert!(hb_series(0.0).is_err());
    }

    #[test]
    fn composite_series_orders() {
        let g = 0.2;
        let es = logspace(1e-3, 1e-1, 7);
        let mut r2 = Vec::new();
        let mut r3 = Vec::new();
        for &e in &es {
            let c = CrossoverPair::new(0.5 - e, g).unwrap();
            let s = composite_series(&c);
            let (d1, d2, d3) = centered_offsets(&c);
            assert!(((s.a1 - 0.5) - d1).abs() < 1e-15);
            r2.push(((s.a2 - 0.5) - d2).abs());
            r3.push(((s.a3 - 0.5) - d3).abs());
            let mean = 0.5 * (s.a2 + s.a3);
            assert!((mean - s.a1).abs() < 1e-15);
        }
        for r in [r2, r3] {
            let slope = loglog_slope(&es, &r).unwrap();
            assert!((slope - 3.0).abs() <= 0.2, "slope {slope}");
        }
    }

    #[test]
    fn scaled_bound_converges_to_limit() {
        for i in 1..=20 {
            let w = 4.0 * i as f64 / 20.0;
            let target = scaled_limit(w).unwrap();
            let devs: Vec<f64> = [1e2, 1e3, 1e4, 1e5, 1e6]
                .iter()
                .map(|&q| {
                    let b = sk_upper_bound(&SatelliteParams::new(w, q).unwrap()).bits();
                    (q * q * b / target - 1.0).abs()
                })
                .collect();
            assert!(devs[4] < 0.01, "w = {w}: {devs:?}");
            assert!(devs[1..].windows(2).all(|p| p[1] < p[0]), "w = {w}: {devs:?}");
        }
    }

    #[test]
    fn literal_form_loses_digits_at_large_q() {
        // documents why the bound uses the centered form
        let p = SatelliteParams::new(1.0, 1e6).unwrap();
        let target = scaled_limit(1.0).unwrap();
        let centered = 1e12 * sk_upper_bound(&p).bits();
        assert!((centered / target - 1.0).abs() < 1e-4);
        let literal = 1e12 * cond_mi_closed_form(&p.crossovers()).unwrap().bits();
        assert!((literal / target - 1.0).abs() > (centered / target - 1.0).abs());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let xs = logspace(1.0, 1e3, 10);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 2.5).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_err());
    }
}
