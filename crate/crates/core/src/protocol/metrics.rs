use std::collections::BTreeMap;

use serde::Serialize;

/// Joint law of `(K_A, K_B, Eve's view)`. Eve's view is the transcript code,
/// optionally combined with her source block.
pub(crate) type OutcomeTable = BTreeMap<(u32, u32, u64), f64>;

/// Bootstrap standard errors of Monte Carlo metrics, plus the first-order
/// plug-in biases of the two entropy-type estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricErrors {
    pub pr_disagree: f64,
    pub key_entropy_bits: f64,
    pub leakage_bits: f64,
    pub pr_accept: f64,
    pub pr_disagree_given_accept: f64,
    pub eve_error_given_accept: f64,
    /// `(|K|-1)/(2 N ln 2)`, downward bias of the plug-in key entropy
    pub key_entropy_bias: f64,
    /// `(|K|-1)(|E|-1)/(2 N ln 2)`, upward bias of the plug-in leakage
    pub leakage_bias: f64,
}

/// Reliability, uniformity and secrecy of a protocol run.
///
/// Accept-conditioned fields treat "accept" as `K_A` differing from the abort
/// symbol; without an abort symbol every run accepts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolMetrics {
    /// `Pr[K_A != K_B]`; a shared abort counts as agreement
    pub pr_disagree: f64,
    /// `H(K_A)`
    pub key_entropy_bits: f64,
    /// `I(K_A; F, Z^n)`
    pub leakage_bits: f64,
    /// `log2 |K_A| / n`
    pub rate_bits: f64,
    pub pr_accept: f64,
    /// `Pr[K_B != K_A | accept]`
    pub pr_disagree_given_accept: f64,
    /// error of Eve's MAP guess of `K_A` from her view, given accept
    pub eve_error_given_accept: f64,
    pub stderr: Option<MetricErrors>,
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

pub(crate) fn metrics_from_table(
    table: &OutcomeTable,
    key_alphabet: u32,
    abort: Option<u32>,
    rate_bits: f64,
) -> ProtocolMetrics {
    let k = key_alphabet as usize;
    let mut key_marginal = vec![0.0; k];
    // per Eve view: mass of each K_A value
    let mut by_view: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut disagree = 0.0;
    let mut disagree_accept = 0.0;
    for (&(ka, kb, eve), &p) in table {
        key_marginal[ka as usize] += p;
        by_view.entry(eve).or_insert_with(|| vec![0.0; k])[ka as usize] += p;
        if ka != kb {
            disagree += p;
            if Some(ka) != abort {
                disagree_accept += p;
            }
        }
    }
    let key_entropy_bits = -key_marginal.iter().map(|&p| plogp(p)).sum::<f64>();

    let mut leakage = 0.0;
    let mut eve_error = 0.0;
    for row in by_view.values() {
        let pe: f64 = row.iter().sum();
        for (ka, &p) in row.iter().enumerate() {
            if p > 0.0 {
                leakage += p * (p / (pe * key_marginal[ka])).log2();
            }
        }
        let (mass, best) = row
            .iter()
            .enumerate()
            .filter(|&(ka, _)| Some(ka as u32) != abort)
            .fold((0.0, 0.0f64), |(m, b), (_, &p)| (m + p, b.max(p)));
        eve_error += mass - best;
    }
    let pr_accept: f64 = key_marginal
        .iter()
        .enumerate()
        .filter(|&(ka, _)| Some(ka as u32) != abort)
        .map(|(_, &p)| p)
        .sum();
    let cond = |v: f64| if pr_accept > 0.0 { v / pr_accept } else { 0.0 };
    ProtocolMetrics {
        pr_disagree: disagree,
        key_entropy_bits: key_entropy_bits.max(0.0),
        leakage_bits: leakage.max(0.0),
        rate_bits,
        pr_accept,
        pr_disagree_given_accept: cond(disagree_accept),
        eve_error_given_accept: cond(eve_error),
        stderr: None,
    }
}
