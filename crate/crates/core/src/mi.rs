//! Exact joint law of the quantized triple and the conditional mutual
//! information `I(X_q; Y_q | Z_q)`, the upper bound on the key rate.
//!
//! Three evaluators are provided:
//!
//! * [`cond_mi_bruteforce`] sums over the 8-cell joint table and serves as the
//!   oracle;
//! * [`cond_mi_closed_form`] is the three-term binary-entropy expression,
//!   evaluated literally;
//! * [`cond_mi_centered`] is the same expression rewritten around
//!   `epsilon = 1/2`. It is what [`sk_upper_bound`] uses, since the literal
//!   form cancels to noise once `I` drops below ~1e-10.
//!
//! All logarithms are base 2.

use serde::Serialize;

use crate::channel::{CrossoverPair, SatelliteParams};
use crate::error::{domain, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Tolerated excursion of an entropy argument outside `[0, 1]`.
const ARG_DUST: f64 = 1e-15;

/// A mutual information in bits.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct MIValue(pub f64);

impl MIValue {
    pub fn bits(self) -> f64 {
        self.0
    }
}

/// `H_b(p) = -p log p - (1-p) log(1-p)` with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = clamp_probability(p)?;
    Ok(hb(p))
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !(-ARG_DUST..=1.0 + ARG_DUST).contains(&p) {
        return Err(domain(format!("probability must lie in [0, 1], got {p}")));
    }
    Ok(p.clamp(0.0, 1.0))
}

fn hb(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        return 0.0;
    }
    let a = if p > 0.0 { -p * p.ln() } else { 0.0 };
    let b = -(1.0 - p) * (-p).ln_1p();
    (a + b) / LN_2
}

/// `1 - H_b(1/2 + d)` for `|d| <= 1/2`, without the cancellation of `1 - H_b`.
///
/// Uses `1 - H_b(1/2 + d) = (ln(1 - 4d^2)/2 + 2d atanh(2d)) / ln 2`, whose two
/// terms differ by a factor of about -2, so the result keeps full relative
/// precision for small `d`.
pub fn binary_entropy_deficit(d: f64) -> Result<f64> {
    if d.is_nan() || d.abs() > 0.5 + ARG_DUST {
        return Err(domain(format!("offset from 1/2 must lie in [-1/2, 1/2], got {d}")));
    }
    Ok(deficit(d.clamp(-0.5, 0.5)))
}

fn deficit(d: f64) -> f64 {
    let a = d.abs();
    if a == 0.0 {
        return 0.0;
    }
    if a >= 0.5 {
        return 1.0;
    }
    if a > 0.25 {
        // near the edges the offset itself is the lossy quantity; go direct
        return 1.0 - hb(0.5 - a);
    }
    (0.5 * (-4.0 * a * a).ln_1p() + 2.0 * a * (2.0 * a).atanh()) / LN_2
}

/// Joint pmf of `(X_q, Y_q, Z_q)`, indexed by `x<<2 | y<<1 | z` with bit 0 = `+w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointTriple {
    pmf: [f64; 8],
}

impl JointTriple {
    /// Validates non-negativity and normalization (within 1e-12).
    pub fn from_probabilities(pmf: [f64; 8]) -> Result<Self> {
        if pmf.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(domain("joint pmf entries must be finite and non-negative"));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(domain(format!("joint pmf sums to {total}, not 1")));
        }
        Ok(Self { pmf })
    }

    /// Normalized histogram of cell counts.
    pub fn from_counts(counts: &[u64; 8]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(domain("empty histogram"));
        }
        let n = total as f64;
        let mut pmf = [0.0; 8];
        for (p, &c) in pmf.iter_mut().zip(counts) {
            *p = c as f64 / n;
        }
        Self::from_probabilities(pmf)
    }

    pub fn index(x: u8, y: u8, z: u8) -> usize {
        ((x as usize & 1) << 2) | ((y as usize & 1) << 1) | (z as usize & 1)
    }

    pub fn prob(&self, x: u8, y: u8, z: u8) -> f64 {
        self.pmf[Self::index(x, y, z)]
    }

    pub fn as_array(&self) -> &[f64; 8] {
        &self.pmf
    }

    /// The same law with Eve's labels swapped.
    pub fn flip_z(&self) -> Self {
        let mut pmf = [0.0; 8];
        for (i, p) in pmf.iter_mut().enumerate() {
            *p = self.pmf[i ^ 1];
        }
        Self { pmf }
    }
}

/// `p(x,y,z) = 1/2 sum_r BSC_eps(x|r) BSC_eps(y|r) BSC_gamma(z|r)`.
pub fn joint_pmf(c: &CrossoverPair) -> JointTriple {
    let kernel = |out: u8, r: u8, flip: f64| if out == r { 1.0 - flip } else { flip };
    let mut pmf = [0.0; 8];
    for x in 0..2u8 {
        for y in 0..2u8 {
            for z in 0..2u8 {
                pmf[JointTriple::index(x, y, z)] = (0..2u8)
                    .map(|r| {
                        0.5 * kernel(x, r, c.epsilon())
                            * kernel(y, r, c.epsilon())
                            * kernel(z, r, c.gamma())
                    })
                    .sum();
            }
        }
    }
    JointTriple { pmf }
}

/// `sum_{x,y} p(x,y|z) log p(x,y|z) / (p(x|z) p(y|z))` for one value of `z`,
/// weighted by `p(z)`.
pub fn cond_mi_term(j: &JointTriple, z: u8) -> f64 {
    let pz: f64 = (0..4).map(|xy| j.pmf[(xy << 1) | z as usize]).sum();
    if pz == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for x in 0..2u8 {
        let pxz = j.prob(x, 0, z) + j.prob(x, 1, z);
        for y in 0..2u8 {
            let pxyz = j.prob(x, y, z);
            if pxyz == 0.0 {
                continue;
            }
            let pyz = j.prob(0, y, z) + j.prob(1, y, z);
            acc += pxyz * (pxyz * pz / (pxz * pyz)).log2();
        }
    }
    acc
}

/// Direct evaluation of `I(X;Y|Z)` over the 8 cells.
pub fn cond_mi_bruteforce(j: &JointTriple) -> MIValue {
    MIValue(cond_mi_term(j, 0) + cond_mi_term(j, 1))
}

/// The three binary-entropy arguments of the closed form, exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyArguments {
    /// `eps gamma + (1-eps)(1-gamma)`
    pub a1: f64,
    /// `eps (1-eps) / (eps (1-gamma) + (1-eps) gamma)`
    pub a2: f64,
    /// `(eps^2 gamma + (1-eps)^2 (1-gamma)) / (eps gamma + (1-eps)(1-gamma))`
    pub a3: f64,
    /// `eps (1-gamma) + (1-eps) gamma = 1 - a1`
    pub b: f64,
}

pub fn entropy_arguments(c: &CrossoverPair) -> EntropyArguments {
    let (e, g) = (c.epsilon(), c.gamma());
    let a1 = e * g + (1.0 - e) * (1.0 - g);
    let b = e * (1.0 - g) + (1.0 - e) * g;
    let a2 = if b > 0.0 { e * (1.0 - e) / b } else { 0.0 };
    let a3 = if a1 > 0.0 { (e * e * g + (1.0 - e).powi(2) * (1.0 - g)) / a1 } else { 0.0 };
    EntropyArguments { a1, a2, a3, b }
}

/// The closed-form expression, literally:
/// `H_b(a1) - a1 H_b(a3) - b H_b(a2)`.
pub fn cond_mi_closed_form(c: &CrossoverPair) -> Result<MIValue> {
    let args = entropy_arguments(c);
    let v = binary_entropy(args.a1)?
        - args.a1 * binary_entropy(args.a3)?
        - args.b * binary_entropy(args.a2)?;
    Ok(MIValue(v))
}

/// Offsets `a_i - 1/2` of the entropy arguments in terms of
/// `e = eps - 1/2` and `c = 1 - 2 gamma`:
///
/// * `a1 - 1/2 = -c e`
/// * `a2 - 1/2 = -e (e + c/2) / (1/2 + c e)`
/// * `a3 - 1/2 =  e (e - c/2) / (1/2 - c e)`
pub fn centered_offsets(c: &CrossoverPair) -> (f64, f64, f64) {
    let e = c.epsilon_offset();
    let bias = c.gamma_bias();
    let d1 = -bias * e;
    let b = 0.5 + bias * e;
    let a1 = 0.5 - bias * e;
    let d2 = if b > 0.0 { -e * (e + 0.5 * bias) / b } else { 0.0 };
    let d3 = if a1 > 0.0 { e * (e - 0.5 * bias) / a1 } else { 0.0 };
    (d1, d2, d3)
}

/// `D(d) - 2 d^2 / ln 2`, the part of the deficit beyond its leading term.
fn deficit_quartic_remainder(d: f64) -> f64 {
    let u = 4.0 * d * d;
    if u >= 0.01 {
        return deficit(d) - 2.0 * d * d / LN_2;
    }
    // D(d) ln 2 = sum_k u^k / (2k (2k - 1))
    let mut pow = u * u;
    let mut sum = 0.0;
    for k in 2..40 {
        let kf = k as f64;
        let term = pow / (2.0 * kf * (2.0 * kf - 1.0));
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
        pow *= u;
    }
    sum / LN_2
}

/// The closed form rewritten as `a1 D(d3) + b D(d2) - D(d1)`, with
/// `D(d) = 1 - H_b(1/2 + d)`.
///
/// The three deficits are `O(e^2)` but the result is `O(e^4)`, so their
/// leading terms are combined symbolically:
/// `2 (a1 d3^2 + b d2^2 - d1^2) / ln 2 = 2 e^4 (1 - c^2)^2 / (a1 b ln 2)`,
/// and only the `O(d^4)` remainders are summed numerically.
///
/// Clamped at 0: when Eve's channel is nearly noiseless (`gamma` below ~1e-8)
/// the remainders cancel and rounding can leave a tiny negative residue.
pub fn cond_mi_centered(c: &CrossoverPair) -> Result<MIValue> {
    let (d1, d2, d3) = centered_offsets(c);
    let e = c.epsilon_offset();
    let bias = c.gamma_bias();
    let a1 = 0.5 - bias * e;
    let b = 0.5 + bias * e;
    for d in [d1, d2, d3] {
        binary_entropy_deficit(d)?;
    }
    let v = if a1 > 0.0 && b > 0.0 {
        // 1 - c^2 = 4 gamma (1 - gamma), without cancellation for small gamma
        let g = c.gamma();
        let s = 4.0 * g * (1.0 - g);
        let e2 = e * e;
        let leading = 2.0 * e2 * e2 * s * s / (a1 * b * LN_2);
        leading + a1 * deficit_quartic_remainder(d3) + b * deficit_quartic_remainder(d2)
            - deficit_quartic_remainder(d1)
    } else {
        a1 * deficit(d3) + b * deficit(d2) - deficit(d1)
    };
    Ok(MIValue(v.max(0.0)))
}

/// Upper bound `I(X_q; Y_q | Z_q)` on the quantized key rate at `(w, q)`.
pub fn sk_upper_bound(p: &SatelliteParams) -> MIValue {
    // offsets of an erf-derived pair are always in range
    cond_mi_centered(&p.crossovers()).expect("crossovers in range")
}

/// `I(X;Y)` of a two-dimensional joint table (rows `x`, columns `y`).
pub fn mutual_information_2d(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, Vec::len);
    let px: Vec<f64> = joint.iter().map(|row| row.iter().sum()).collect();
    let py: Vec<f64> = (0..cols).map(|j| joint.iter().map(|row| row[j]).sum()).collect();
    let mut acc = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p * (p / (px[i] * py[j])).log2();
            }
        }
    }
    acc
}
