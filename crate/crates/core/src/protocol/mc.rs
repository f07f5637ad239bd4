//! Monte Carlo evaluation for blocklengths beyond exact enumeration.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use super::exact::EveView;
use super::metrics::{metrics_from_table, MetricErrors, OutcomeTable, ProtocolMetrics};
use super::ProtocolSpec;
use crate::channel::CrossoverPair;
use crate::error::{domain, Result};
use crate::stats::{multinomial_resample, shard_rng, std_dev, BOOTSTRAP_STREAM};

pub const MIN_PROTOCOL_SAMPLES: u64 = 100_000;
const SHARD: u64 = 1 << 14;
const BOOTSTRAP_REPS: usize = 100;

type Counts = BTreeMap<(u32, u32, u64), u64>;

pub fn evaluate_mc(
    spec: &ProtocolSpec,
    c: &CrossoverPair,
    samples: u64,
    seed: u64,
) -> Result<ProtocolMetrics> {
    evaluate_mc_with_view(spec, c, samples, seed, EveView::default())
}

/// Plug-in metrics from `samples` simulated blocks, with bootstrap standard
/// errors over 100 multinomial resamples of the outcome histogram.
pub fn evaluate_mc_with_view(
    spec: &ProtocolSpec,
    c: &CrossoverPair,
    samples: u64,
    seed: u64,
    view: EveView,
) -> Result<ProtocolMetrics> {
    if samples < MIN_PROTOCOL_SAMPLES {
        return Err(domain(format!(
            "need at least {MIN_PROTOCOL_SAMPLES} samples, got {samples}"
        )));
    }
    let n = spec.blocklength();
    let shards = samples.div_ceil(SHARD);
    let parts: Vec<Counts> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut rng = shard_rng(seed, s);
            let len = SHARD.min(samples - s * SHARD);
            let mut counts = Counts::new();
            let mut scratch = Vec::new();
            for _ in 0..len {
                let (x, y, z) = draw_block(&mut rng, n, c);
                let coin = draw_coin(&mut rng, spec.coins().probs());
                let (ka, kb, code) = spec.run(x, y, coin, &mut scratch)?;
                *counts.entry((ka, kb, view.code(code, z, n))).or_insert(0) += 1;
            }
            Ok(counts)
        })
        .collect::<Result<_>>()?;
    let mut counts = Counts::new();
    for part in parts {
        for (k, v) in part {
            *counts.entry(k).or_insert(0) += v;
        }
    }

    let keys: Vec<(u32, u32, u64)> = counts.keys().copied().collect();
    let values: Vec<u64> = counts.values().copied().collect();
    let evaluate = |vals: &[u64]| {
        let total = samples as f64;
        let table: OutcomeTable = keys
            .iter()
            .zip(vals)
            .filter(|(_, &v)| v > 0)
            .map(|(&k, &v)| (k, v as f64 / total))
            .collect();
        metrics_from_table(&table, spec.key_alphabet(), spec.abort_symbol(), spec.rate_bits())
    };
    let mut metrics = evaluate(&values);

    let mut rng = shard_rng(seed, BOOTSTRAP_STREAM);
    let reps: Vec<ProtocolMetrics> = (0..BOOTSTRAP_REPS)
        .map(|_| evaluate(&multinomial_resample(&values, &mut rng)))
        .collect();
    let sd = |f: fn(&ProtocolMetrics) -> f64| std_dev(&reps.iter().map(f).collect::<Vec<_>>());

    let mut seen_keys = std::collections::BTreeSet::new();
    let mut seen_views = std::collections::BTreeSet::new();
    for &(ka, _, eve) in &keys {
        seen_keys.insert(ka);
        seen_views.insert(eve);
    }
    let denom = 2.0 * samples as f64 * std::f64::consts::LN_2;
    let k_minus = seen_keys.len().saturating_sub(1) as f64;
    let e_minus = seen_views.len().saturating_sub(1) as f64;
    metrics.stderr = Some(MetricErrors {
        pr_disagree: sd(|m| m.pr_disagree),
        key_entropy_bits: sd(|m| m.key_entropy_bits),
        leakage_bits: sd(|m| m.leakage_bits),
        pr_accept: sd(|m| m.pr_accept),
        pr_disagree_given_accept: sd(|m| m.pr_disagree_given_accept),
        eve_error_given_accept: sd(|m| m.eve_error_given_accept),
        key_entropy_bias: k_minus / denom,
        leakage_bias: k_minus * e_minus / denom,
    });
    Ok(metrics)
}

fn flip<R: Rng>(rng: &mut R, p: f64) -> u32 {
    (rng.random::<f64>() < p) as u32
}

/// One block of `n` i.i.d. quantized triples from the BSC representation.
fn draw_block<R: Rng>(rng: &mut R, n: usize, c: &CrossoverPair) -> (u32, u32, u32) {
    let (mut x, mut y, mut z) = (0u32, 0u32, 0u32);
    for i in 0..n {
        let r = rng.random::<bool>() as u32;
        x |= (r ^ flip(rng, c.epsilon())) << i;
        y |= (r ^ flip(rng, c.epsilon())) << i;
        z |= (r ^ flip(rng, c.gamma())) << i;
    }
    (x, y, z)
}

fn draw_coin<R: Rng>(rng: &mut R, probs: &[f64]) -> u32 {
    if probs.len() == 1 {
        return 0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    (probs.len() - 1) as u32
}
