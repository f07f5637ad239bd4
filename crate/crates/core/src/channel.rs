//! The satellite model: a BPSK symbol `R = ±w` observed by Alice, Bob and Eve
//! through independent AWGN channels and quantized to one bit each.
//!
//! Eve's noise variance is normalized to 1; Alice and Bob both see variance
//! `q > 1`. After sign quantization every observation is a binary symmetric
//! channel of `R`, with crossover `epsilon` for Alice/Bob and `gamma` for Eve.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::special::{erf_finite, erfc_finite};

/// A point `(w, q)` of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SatelliteParams {
    w: f64,
    q: f64,
}

impl SatelliteParams {
    pub fn new(w: f64, q: f64) -> Result<Self> {
        if !(w.is_finite() && w > 0.0) {
            return Err(domain(format!("amplitude w must be finite and > 0, got {w}")));
        }
        if !(q.is_finite() && q > 1.0) {
            return Err(domain(format!("quality ratio q must be finite and > 1, got {q}")));
        }
        Ok(Self { w, q })
    }

    /// BPSK amplitude.
    pub fn w(&self) -> f64 {
        self.w
    }

    /// Channel quality ratio, equal to Alice's (and Bob's) noise variance.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn legit_noise_variance(&self) -> f64 {
        self.q
    }

    pub fn eve_noise_variance(&self) -> f64 {
        1.0
    }

    pub fn crossovers(&self) -> CrossoverPair {
        let legit = self.w / (2.0 * self.q).sqrt();
        let eve = self.w / std::f64::consts::SQRT_2;
        CrossoverPair {
            epsilon: 0.5 * erfc_finite(legit),
            gamma: 0.5 * erfc_finite(eve),
            epsilon_offset: -0.5 * erf_finite(legit),
            gamma_bias: erf_finite(eve),
        }
    }
}

/// Crossover probabilities of the two induced BSCs.
///
/// Besides `epsilon` and `gamma` the pair carries `epsilon - 1/2` and
/// `1 - 2 gamma` as separately rounded values. When the pair comes from
/// [`SatelliteParams`] these are computed straight from `erf`, so they keep
/// full relative precision when `epsilon` is within rounding of one half.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverPair {
    epsilon: f64,
    gamma: f64,
    epsilon_offset: f64,
    gamma_bias: f64,
}

impl CrossoverPair {
    /// Accepts the closed square `[0, 1/2]^2` so that boundary test vectors
    /// (noiseless and pure-noise channels) can be expressed.
    pub fn new(epsilon: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("epsilon", epsilon), ("gamma", gamma)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(domain(format!("{name} must lie in [0, 1/2], got {v}")));
            }
        }
        Ok(Self {
            epsilon,
            gamma,
            epsilon_offset: epsilon - 0.5,
            gamma_bias: 1.0 - 2.0 * gamma,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `epsilon - 1/2` (non-positive).
    pub fn epsilon_offset(&self) -> f64 {
        self.epsilon_offset
    }

    /// `1 - 2 gamma`, the correlation between Eve's bit and the satellite bit.
    pub fn gamma_bias(&self) -> f64 {
        self.gamma_bias
    }

    /// Crossover between Alice's and Bob's bits, `2 epsilon (1 - epsilon)`.
    pub fn legit_disagreement(&self) -> f64 {
        2.0 * self.epsilon * (1.0 - self.epsilon)
    }
}

/// `epsilon(w, q) = (1 - erf(w / sqrt(2q))) / 2`.
pub fn crossover_epsilon(p: &SatelliteParams) -> f64 {
    p.crossovers().epsilon
}

/// `gamma(w) = (1 - erf(w / sqrt 2)) / 2`.
pub fn crossover_gamma(w: f64) -> Result<f64> {
    if !(w.is_finite() && w > 0.0) {
        return Err(domain(format!("amplitude w must be finite and > 0, got {w}")));
    }
    Ok(0.5 * erfc_finite(w / std::f64::consts::SQRT_2))
}

/// A quantized binary symbol. `Plus` is `+w` (bit 0), `Minus` is `-w` (bit 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `+w -> 0`, `-w -> 1`; the XOR convention used by the protocols.
    pub fn bit(self) -> u8 {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    /// One-bit quantizer `sgn(v)`. Zero maps to `Plus`; it has probability 0.
    pub fn quantize(v: f64) -> Self {
        if v < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn symbol(self, w: f64) -> f64 {
        match self {
            Sign::Plus => w,
            Sign::Minus => -w,
        }
    }
}

/// One draw of the satellite symbol and the three quantized observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantizedTriple {
    pub w: f64,
    pub r: Sign,
    pub x: Sign,
    pub y: Sign,
    pub z: Sign,
}

impl QuantizedTriple {
    /// Index `x<<2 | y<<1 | z` into an 8-cell joint table.
    pub fn cell(&self) -> usize {
        ((self.x.bit() as usize) << 2) | ((self.y.bit() as usize) << 1) | self.z.bit() as usize
    }

    pub fn x_q(&self) -> f64 {
        self.x.symbol(self.w)
    }

    pub fn y_q(&self) -> f64 {
        self.y.symbol(self.w)
    }

    pub fn z_q(&self) -> f64 {
        self.z.symbol(self.w)
    }

    pub fn r_symbol(&self) -> f64 {
        self.r.symbol(self.w)
    }
}

/// Draws `R`, adds Gaussian noise of variance `q`, `q` and `1`, and quantizes.
pub fn sample_triple<R: Rng + ?Sized>(p: &SatelliteParams, rng: &mut R) -> QuantizedTriple {
    let r = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
    let signal = r.symbol(p.w);
    let sigma = p.q.sqrt();
    let nx: f64 = rng.sample(StandardNormal);
    let ny: f64 = rng.sample(StandardNormal);
    let nz: f64 = rng.sample(StandardNormal);
    QuantizedTriple {
        w: p.w,
        r,
        x: Sign::quantize(signal + sigma * nx),
        y: Sign::quantize(signal + sigma * ny),
        z: Sign::quantize(signal + nz),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const ERFC_ONE_HALF: f64 = 0.078_649_603_525_142_57;

    fn eps(w: f64, q: f64) -> f64 {
        crossover_epsilon(&SatelliteParams::new(w, q).unwrap())
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SatelliteParams::new(0.0, 4.0).is_err());
        assert!(SatelliteParams::new(-1.0, 4.0).is_err());
        assert!(SatelliteParams::new(1.0, 1.0).is_err());
        assert!(SatelliteParams::new(1.0, f64::NAN).is_err());
        assert!(crossover_gamma(0.0).is_err());
        assert!(CrossoverPair::new(0.6, 0.1).is_err());
        assert!(CrossoverPair::new(0.1, -0.1).is_err());
    }

    #[test]
    fn zero_signal_limit() {
        assert!((eps(1e-12, 4.0) - 0.5).abs() < 1e-9);
        assert!((crossover_gamma(1e-12).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn gamma_at_sqrt_two() {
        let g = crossover_gamma(std::f64::consts::SQRT_2).unwrap();
        assert!((g - ERFC_ONE_HALF).abs() < 1e-15);
    }

    #[test]
    fn epsilon_is_gamma_of_scaled_amplitude() {
        for (w, q) in [(1.0, 4.0), (2.0, 9.0), (0.3, 1.7), (5.0, 40.0)] {
            let lhs = eps(w, q);
            let rhs = crossover_gamma(w / f64::sqrt(q)).unwrap();
            assert!((lhs - rhs).abs() < 1e-15, "{w} {q}");
        }
    }

    #[test]
    fn gamma_strictly_decreasing() {
        let grid: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
        for pair in grid.windows(2) {
            let (g0, g1) = (crossover_gamma(pair[0]).unwrap(), crossover_gamma(pair[1]).unwrap());
            assert!(g0 > g1, "gamma({}) = {g0} <= gamma({}) = {g1}", pair[0], pair[1]);
        }
    }

    #[test]
    fn epsilon_monotone_on_grid() {
        let ws: Vec<f64> = (0..50).map(|i| 0.1 + i as f64 * (2.9 / 49.0)).collect();
        let qs: Vec<f64> = (0..50).map(|i| 1.5 + i as f64 * (98.5 / 49.0)).collect();
        for &w in &ws {
            for pair in qs.windows(2) {
                assert!(eps(w, pair[1]) > eps(w, pair[0]) + 1e-12);
            }
        }
        for &q in &qs {
            for pair in ws.windows(2) {
                assert!(eps(pair[0], q) > eps(pair[1], q) + 1e-12);
            }
        }
    }

    #[test]
    fn unit_ratio_matches_eve() {
        // q = 1 is outside SatelliteParams; evaluate the formula directly.
        for i in 1..=50 {
            let w = i as f64 * 0.2;
            let at_unit = 0.5 * erfc_finite(w / (2.0_f64).sqrt());
            assert_eq!(at_unit, crossover_gamma(w).unwrap());
        }
    }

    #[test]
    fn offsets_are_consistent() {
        let c = SatelliteParams::new(1.3, 7.0).unwrap().crossovers();
        assert!((c.epsilon_offset() - (c.epsilon() - 0.5)).abs() < 1e-16);
        assert!((c.gamma_bias() - (1.0 - 2.0 * c.gamma())).abs() < 1e-15);
        let far = SatelliteParams::new(1.0, 1e12).unwrap().crossovers();
        // the offset keeps digits the rounded epsilon has lost
        let expect = -1.0 / (2.0 * std::f64::consts::PI * 1e12).sqrt();
        assert!(((far.epsilon_offset() - expect) / expect).abs() < 1e-10);
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = SatelliteParams::new(1.0, 4.0).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            assert_eq!(sample_triple(&p, &mut a), sample_triple(&p, &mut b));
        }
    }

    #[test]
    fn sampler_symbols_in_alphabet() {
        let p = SatelliteParams::new(0.7, 3.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = sample_triple(&p, &mut rng);
            for v in [t.x_q(), t.y_q(), t.z_q(), t.r_symbol()] {
                assert!(v == 0.7 || v == -0.7);
            }
        }
    }

    #[test]
    fn sampler_crossovers_and_marginals() {
        let p = SatelliteParams::new(1.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000usize;
        let (mut fx, mut fz) = (0usize, 0usize);
        let mut minus = [0usize; 3];
        for _ in 0..n {
            let t = sample_triple(&p, &mut rng);
            fx += (t.x != t.r) as usize;
            fz += (t.z != t.r) as usize;
            minus[0] += (t.x == Sign::Minus) as usize;
            minus[1] += (t.y == Sign::Minus) as usize;
            minus[2] += (t.z == Sign::Minus) as usize;
        }
        let nf = n as f64;
        let within = |count: usize, prob: f64| {
            let sd = (prob * (1.0 - prob) / nf).sqrt();
            (count as f64 / nf - prob).abs() <= 3.0 * sd
        };
        let c = p.crossovers();
        assert!(within(fx, c.epsilon()));
        assert!(within(fz, c.gamma()));
        // one-degree-of-freedom chi-square per marginal, 99.9% quantile 10.83
        for m in minus {
            let chi2 = 2.0 * (m as f64 - nf / 2.0).powi(2) / (nf / 2.0);
            assert!(chi2 < 10.83, "chi2 = {chi2}");
        }
    }
}
