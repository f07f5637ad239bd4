//! Seeded streams and multinomial bootstrap helpers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

/// Stream reserved for bootstrap resampling; sampling shards use streams
/// `0, 1, 2, ...`.
pub(crate) const BOOTSTRAP_STREAM: u64 = 1 << 63;

/// Independent stream `stream` of the master `seed`.
pub fn shard_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` items from the empirical distribution `counts / sum(counts)` by
/// sequential conditional binomials.
pub fn multinomial_resample<R: rand::Rng + ?Sized>(counts: &[u64], rng: &mut R) -> Vec<u64> {
    let n: u64 = counts.iter().sum();
    let mut remaining_n = n;
    let mut remaining_mass = n;
    let mut out = Vec::with_capacity(counts.len());
    for &c in counts {
        if remaining_n == 0 || c == 0 {
            out.push(0);
            remaining_mass -= c;
            continue;
        }
        let p = (c as f64 / remaining_mass as f64).min(1.0);
        let draw = if p >= 1.0 {
            remaining_n
        } else {
            Binomial::new(remaining_n, p).expect("valid binomial").sample(rng)
        };
        out.push(draw);
        remaining_n -= draw;
        remaining_mass -= c;
    }
    out
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}
