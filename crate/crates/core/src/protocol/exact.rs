//! Exhaustive evaluation over all `8^n` source blocks and every coin value.

use std::collections::HashMap;
use std::hash::BuildHasherDefault;
use std::collections::hash_map::DefaultHasher;

use rayon::prelude::*;

use super::metrics::{metrics_from_table, OutcomeTable, ProtocolMetrics};
use super::ProtocolSpec;
use crate::channel::CrossoverPair;
use crate::error::{Error, Result};
use crate::mi::joint_pmf;

pub const MAX_EXACT_BLOCKLENGTH: usize = 8;

/// What Eve observes besides the public transcript.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EveView {
    /// transcript and her quantized block `Z_q^n`
    #[default]
    SourceAndTranscript,
    /// transcript only
    TranscriptOnly,
}

impl EveView {
    pub(crate) fn code(self, transcript: u64, z: u32, n: usize) -> u64 {
        match self {
            EveView::SourceAndTranscript => (transcript << n) | z as u64,
            EveView::TranscriptOnly => transcript,
        }
    }
}

type Partial = HashMap<(u32, u32, u64), f64, BuildHasherDefault<DefaultHasher>>;

pub fn evaluate_exact(spec: &ProtocolSpec, c: &CrossoverPair) -> Result<ProtocolMetrics> {
    evaluate_exact_with_view(spec, c, EveView::default())
}

/// Exact metrics. The outcome space is split by the first source symbol; each
/// part is summed sequentially and the parts are merged in index order, so
/// the result does not depend on the number of worker threads.
pub fn evaluate_exact_with_view(
    spec: &ProtocolSpec,
    c: &CrossoverPair,
    view: EveView,
) -> Result<ProtocolMetrics> {
    let n = spec.blocklength();
    if n > MAX_EXACT_BLOCKLENGTH {
        return Err(Error::Capacity(format!(
            "exact mode enumerates 8^n outcomes and supports n <= {MAX_EXACT_BLOCKLENGTH}, got {n}"
        )));
    }
    let cell = *joint_pmf(c).as_array();
    let parts: Vec<Partial> = (0..8usize)
        .into_par_iter()
        .map(|first| {
            let mut acc = Partial::default();
            let mut scratch = Vec::with_capacity(2 * spec.rounds());
            let p = cell[first];
            if p > 0.0 {
                let (x, y, z) = split_cell(first);
                enumerate(spec, &cell, view, 1, x, y, z, p, &mut scratch, &mut acc)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut table = OutcomeTable::new();
    for part in parts {
        for (k, v) in part {
            *table.entry(k).or_insert(0.0) += v;
        }
    }
    Ok(metrics_from_table(&table, spec.key_alphabet(), spec.abort_symbol(), spec.rate_bits()))
}

fn split_cell(cell: usize) -> (u32, u32, u32) {
    (((cell >> 2) & 1) as u32, ((cell >> 1) & 1) as u32, (cell & 1) as u32)
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    spec: &ProtocolSpec,
    cell: &[f64; 8],
    view: EveView,
    pos: usize,
    x: u32,
    y: u32,
    z: u32,
    prob: f64,
    scratch: &mut Vec<u32>,
    acc: &mut Partial,
) -> Result<()> {
    let n = spec.blocklength();
    if pos == n {
        for (coin, &pc) in spec.coins().probs().iter().enumerate() {
            if pc == 0.0 {
                continue;
            }
            let (ka, kb, code) = spec.run(x, y, coin as u32, scratch)?;
            *acc.entry((ka, kb, view.code(code, z, n))).or_insert(0.0) += prob * pc;
        }
        return Ok(());
    }
    for (idx, &p) in cell.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let (bx, by, bz) = split_cell(idx);
        enumerate(
            spec,
            cell,
            view,
            pos + 1,
            x | (bx << pos),
            y | (by << pos),
            z | (bz << pos),
            prob * p,
            scratch,
            acc,
        )?;
    }
    Ok(())
}
