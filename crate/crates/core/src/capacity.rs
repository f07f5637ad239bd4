//! Sweeps of the key-rate bound, its supremum over the amplitude set, and a
//! Monte Carlo cross-check from raw channel draws.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{sample_triple, SatelliteParams};
use crate::error::{domain, Result};
use crate::mi::{cond_mi_bruteforce, sk_upper_bound, JointTriple};
use crate::optimize::{maximize, Interval, Maximum};
use crate::stats::{multinomial_resample, shard_rng, std_dev, BOOTSTRAP_STREAM};

/// Default amplitude set `(0, 10]`. `envelope(10)` is below 1e-38, so the
/// supremum is not truncated in practice.
pub const DEFAULT_W_MAX: f64 = 10.0;
pub const DEFAULT_GRID_POINTS: usize = 256;
pub const BRACKET_TOL: f64 = 1e-8;

pub fn default_w_range() -> Interval {
    Interval::new(0.0, DEFAULT_W_MAX).expect("static range")
}

/// Monte Carlo estimate of `I(X_q;Y_q|Z_q)` with a bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate_bits: f64,
    pub stderr: f64,
    pub samples: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub w: f64,
    pub q: f64,
    pub bound_bits: f64,
    pub scaled: f64,
    pub mc: Option<McEstimate>,
}

impl SweepRecord {
    pub fn at(p: &SatelliteParams) -> Self {
        let bound_bits = sk_upper_bound(p).bits();
        Self { w: p.w(), q: p.q(), bound_bits, scaled: p.q() * p.q() * bound_bits, mc: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupResult {
    pub q: f64,
    pub w_star: f64,
    pub sup_bits: f64,
    pub scaled_sup: f64,
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("quality ratio q must be finite and > 1, got {q}")))
    }
}

fn bound_at(w: f64, q: f64) -> f64 {
    // w > 0 inside the search interval; q checked by the caller
    sk_upper_bound(&SatelliteParams::new(w, q).expect("validated")).bits()
}

/// Maximizer of the bound at fixed `q`.
pub fn sup_over_w_detail(q: f64, w_range: Interval, grid_points: usize) -> Result<Maximum> {
    check_q(q)?;
    maximize(|w| bound_at(w, q), w_range, grid_points, BRACKET_TOL)
}

/// `sup_{w in w_range} I(X_q;Y_q|Z_q)` at fixed `q`.
pub fn sup_over_w(q: f64, w_range: Interval, grid_points: usize) -> Result<SupResult> {
    let m = sup_over_w_detail(q, w_range, grid_points)?;
    Ok(SupResult { q, w_star: m.x, sup_bits: m.value, scaled_sup: q * q * m.value })
}

/// One [`SupResult`] per `q`, in input order.
pub fn quadratic_decay_table(w_range: Interval, q_list: &[f64]) -> Result<Vec<SupResult>> {
    quadratic_decay_table_with(w_range, q_list, DEFAULT_GRID_POINTS)
}

pub fn quadratic_decay_table_with(
    w_range: Interval,
    q_list: &[f64],
    grid_points: usize,
) -> Result<Vec<SupResult>> {
    if q_list.is_empty() {
        return Err(domain("q list is empty"));
    }
    for &q in q_list {
        check_q(q)?;
    }
    if q_list.windows(2).any(|p| p[1] <= p[0]) {
        return Err(domain("q list must be strictly increasing"));
    }
    q_list.par_iter().map(|&q| sup_over_w(q, w_range, grid_points)).collect()
}

/// Smallest tested `q` from which every later entry has `scaled_sup <= threshold`.
pub fn empirical_threshold(table: &[SupResult], threshold: f64) -> Option<f64> {
    let mut start = None;
    for r in table {
        if r.scaled_sup <= threshold {
            start.get_or_insert(r.q);
        } else {
            start = None;
        }
    }
    start
}

/// Bound values over the grid `ws x qs`, row-major in `w`.
pub fn sweep(ws: &[f64], qs: &[f64]) -> Result<Vec<SweepRecord>> {
    let params: Vec<SatelliteParams> = ws
        .iter()
        .flat_map(|&w| qs.iter().map(move |&q| SatelliteParams::new(w, q)))
        .collect::<Result<_>>()?;
    Ok(params.par_iter().map(SweepRecord::at).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub bootstrap: usize,
    pub shard_size: u64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self { bootstrap: 200, shard_size: 1 << 16 }
    }
}

pub const MIN_MC_SAMPLES: u64 = 10_000;
pub const MIN_BOOTSTRAP: usize = 100;

/// Histogram of `samples` draws of the quantized triple. Shard `i` covers
/// draws `i*shard_size ..` and uses stream `i` of `seed`, so the counts do not
/// depend on how many threads run the shards.
pub fn sample_histogram(p: &SatelliteParams, samples: u64, seed: u64, shard_size: u64) -> [u64; 8] {
    let shards = samples.div_ceil(shard_size);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let len = shard_size.min(samples - s * shard_size);
            let mut counts = [0u64; 8];
            for _ in 0..len {
                counts[sample_triple(p, &mut rng).cell()] += 1;
            }
            counts
        })
        .reduce(
            || [0u64; 8],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

pub fn mc_mi_estimate(p: &SatelliteParams, samples: u64, seed: u64) -> Result<McEstimate> {
    mc_mi_estimate_with(p, samples, seed, McOptions::default())
}

/// Plug-in estimate from the empirical 8-cell histogram; the standard error
/// is the spread over multinomial bootstrap replicates of that histogram.
pub fn mc_mi_estimate_with(
    p: &SatelliteParams,
    samples: u64,
    seed: u64,
    opts: McOptions,
) -> Result<McEstimate> {
    if samples < MIN_MC_SAMPLES {
        return Err(domain(format!("need at least {MIN_MC_SAMPLES} samples, got {samples}")));
    }
    if opts.bootstrap < MIN_BOOTSTRAP {
        return Err(domain(format!("need at least {MIN_BOOTSTRAP} bootstrap resamples")));
    }
    if opts.shard_size == 0 {
        return Err(domain("shard size must be positive"));
    }
    let counts = sample_histogram(p, samples, seed, opts.shard_size);
    let estimate_bits = cond_mi_bruteforce(&JointTriple::from_counts(&counts)?).bits();
    let mut rng = shard_rng(seed, BOOTSTRAP_STREAM);
    let mut reps = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let r = multinomial_resample(&counts, &mut rng);
        let arr: [u64; 8] = r.try_into().expect("8 cells");
        reps.push(cond_mi_bruteforce(&JointTriple::from_counts(&arr)?).bits());
    }
    Ok(McEstimate { estimate_bits, stderr: std_dev(&reps), samples })
}

/// First-order upward bias of the plug-in conditional MI estimate,
/// `|Z| (|X|-1)(|Y|-1) / (2 n ln 2)` with binary alphabets.
pub fn plugin_bias_allowance(samples: u64) -> f64 {
    2.0 / (2.0 * samples as f64 * std::f64::consts::LN_2)
}

/// Attaches Monte Carlo estimates to sweep rows. Row `i` uses stream block `i`
/// of `seed` (seed `seed + i`), keeping rows independent of scheduling.
pub fn attach_mc(records: &mut [SweepRecord], samples: u64, seed: u64) -> Result<()> {
    let ests: Vec<McEstimate> = records
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let p = SatelliteParams::new(r.w, r.q)?;
            mc_mi_estimate(&p, samples, seed.wrapping_add(i as u64))
        })
        .collect::<Result<_>>()?;
    for (r, e) in records.iter_mut().zip(ests) {
        r.mc = Some(e);
    }
    Ok(())
}
