//! Named protocols: the repetition advantage-distillation protocol and the
//! small reference protocols used as test vectors.

use serde::Serialize;

use super::exact::evaluate_exact;
use super::spec::{
    CoinDistribution, Input, MapExpr, Message, PartyMap, ProtocolParts, ProtocolSpec, Round,
};
use crate::channel::SatelliteParams;
use crate::error::{domain, Result};

/// Key symbol both parties output when the repetition protocol rejects.
pub const REPETITION_ABORT: u32 = 2;

/// Largest repetition block; Alice's message is an `N`-bit word.
pub const MAX_REPETITION_BLOCK: usize = 16;

/// Repetition protocol on a block of `block_len` symbols.
///
/// Alice draws a uniform bit `C` and publishes `M_i = X_i xor C`. Bob accepts
/// iff `Y_i xor M_i` is the same for every `i` and publishes the verdict. On
/// accept Alice's key is `C` and Bob's is the common value; on reject both
/// output [`REPETITION_ABORT`]. The key alphabet is `{0, 1, abort}`.
pub fn repetition_protocol(block_len: usize) -> Result<ProtocolSpec> {
    if block_len == 0 || block_len > MAX_REPETITION_BLOCK {
        return Err(domain(format!(
            "repetition block must lie in 1..={MAX_REPETITION_BLOCK}, got {block_len}"
        )));
    }
    let mask = (1u32 << block_len) - 1;
    let alice_msg = PartyMap::builtin("repetition-mask", block_len, true, move |v| {
        (v.obs & mask) ^ if v.coin == 1 { mask } else { 0 }
    });
    let bob_msg = PartyMap::builtin("repetition-check", block_len, false, move |v| {
        let t = (v.obs & mask) ^ v.transcript[0];
        (t == 0 || t == mask) as u32
    });
    let alice_key = PartyMap::builtin("repetition-key-a", 0, true, |v| {
        if v.transcript[1] == 1 {
            v.coin
        } else {
            REPETITION_ABORT
        }
    });
    let bob_key = PartyMap::builtin("repetition-key-b", block_len, false, move |v| {
        if v.transcript[1] == 1 {
            (v.obs ^ v.transcript[0]) & 1
        } else {
            REPETITION_ABORT
        }
    });
    ProtocolSpec::new(ProtocolParts {
        n: block_len,
        rounds: vec![Round {
            alice: Message::new(1 << block_len, alice_msg),
            bob: Message::new(2, bob_msg),
        }],
        alice_key,
        bob_key,
        key_alphabet: 3,
        abort: Some(REPETITION_ABORT),
        coins: CoinDistribution::uniform(2)?,
    })
}

fn silent_round() -> Vec<Round> {
    vec![Round { alice: Message::silent(), bob: Message::silent() }]
}

/// Both parties output the constant 0 and say nothing.
pub fn trivial_protocol(n: usize) -> Result<ProtocolSpec> {
    ProtocolSpec::new(ProtocolParts {
        n,
        rounds: silent_round(),
        alice_key: PartyMap::constant(0),
        bob_key: PartyMap::constant(0),
        key_alphabet: 1,
        abort: None,
        coins: CoinDistribution::deterministic(),
    })
}

/// `K_A = X_1`, `F_1 = X_1`, `K_B = F_1`: perfect agreement, no secrecy.
pub fn broadcast_protocol() -> Result<ProtocolSpec> {
    ProtocolSpec::new(ProtocolParts {
        n: 1,
        rounds: vec![Round {
            alice: Message::new(2, PartyMap::Expr(MapExpr::Var(Input::Obs(0)))),
            bob: Message::silent(),
        }],
        alice_key: PartyMap::Expr(MapExpr::Var(Input::Obs(0))),
        bob_key: PartyMap::Expr(MapExpr::Var(Input::Msg(0))),
        key_alphabet: 2,
        abort: None,
        coins: CoinDistribution::deterministic(),
    })
}

/// `K_A = X_1`, `K_B = Y_1`, no public discussion.
pub fn one_bit_protocol() -> Result<ProtocolSpec> {
    ProtocolSpec::new(ProtocolParts {
        n: 1,
        rounds: silent_round(),
        alice_key: PartyMap::Expr(MapExpr::Var(Input::Obs(0))),
        bob_key: PartyMap::Expr(MapExpr::Var(Input::Obs(0))),
        key_alphabet: 2,
        abort: None,
        coins: CoinDistribution::deterministic(),
    })
}

/// Conditional disagreement of the repetition protocol after acceptance,
/// `d^N / (d^N + (1-d)^N)` with `d = 2 eps (1 - eps)` the Alice-Bob crossover.
pub fn repetition_disagreement(legit_crossover: f64, block_len: usize) -> f64 {
    let n = block_len as i32;
    let a = legit_crossover.powi(n);
    a / (a + (1.0 - legit_crossover).powi(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdvantageRow {
    pub w: f64,
    pub q: f64,
    pub block_len: usize,
    pub pr_accept: f64,
    /// `Pr[K_B != K_A | accept]`
    pub bob_error: f64,
    /// Eve's MAP error about `K_A` given her view and accept
    pub eve_error: f64,
    /// without discussion: `Pr[Y_q != X_q]`
    pub bob_raw_error: f64,
    /// without discussion: Eve's MAP error about `X_q` from `Z_q`
    pub eve_raw_error: f64,
}

impl AdvantageRow {
    /// Bob ends up strictly better informed than Eve about the key.
    pub fn distilled(&self) -> bool {
        self.bob_error < self.eve_error
    }

    /// Eve starts out strictly better informed than Bob.
    pub fn eve_ahead_initially(&self) -> bool {
        self.eve_raw_error < self.bob_raw_error
    }
}

/// Exact repetition-protocol errors over every `(w, q, N)` combination.
pub fn advantage_search(ws: &[f64], qs: &[f64], blocks: &[usize]) -> Result<Vec<AdvantageRow>> {
    let mut rows = Vec::with_capacity(ws.len() * qs.len() * blocks.len());
    for &w in ws {
        for &q in qs {
            let c = SatelliteParams::new(w, q)?.crossovers();
            let bob_raw_error = c.legit_disagreement();
            // Eve guesses X from Z; with gamma, eps < 1/2 the MAP guess is Z
            let eve_raw_error = c.epsilon() + c.gamma() - 2.0 * c.epsilon() * c.gamma();
            for &n in blocks {
                let m = evaluate_exact(&repetition_protocol(n)?, &c)?;
                rows.push(AdvantageRow {
                    w,
                    q,
                    block_len: n,
                    pr_accept: m.pr_accept,
                    bob_error: m.pr_disagree_given_accept,
                    eve_error: m.eve_error_given_accept,
                    bob_raw_error,
                    eve_raw_error,
                });
            }
        }
    }
    Ok(rows)
}
