//! Line-oriented text format for protocols.
//!
//! ```text
//! # comment (also allowed after a statement)
//! n 2                       # blocklength
//! coins 2                   # uniform coin over {0, 1}; or explicit: coins 0.25 0.75
//! keys 2                    # key alphabet size |K_A|
//! abort 2                   # optional abort key symbol
//! round                     # opens round k; at least one is required
//!   alice 2 xor x1 coin     # Alice's message: alphabet size, then a map
//!   bob 1 const 0           # Bob's message (omitted messages are silent)
//! key alice xor x1 coin
//! key bob table y1 m1 : 0 1 1 0
//! ```
//!
//! Maps are `const V`, `var NAME`, `xor NAME...` or
//! `table NAME... : OUT...`, where table outputs are listed in mixed-radix
//! order of the inputs, first input most significant. Names are `x<i>` and
//! `coin` (Alice only), `y<i>` (Bob only) and `m<j>` for the `j`-th public
//! message, all 1-based. A message may only read earlier messages.
//!
//! Named builtins replace the whole description:
//! `repetition N`, `trivial`, `broadcast`, `onebit`. A builtin may be
//! combined with `n` to run it on a longer block.

use super::builtins::{broadcast_protocol, one_bit_protocol, repetition_protocol, trivial_protocol};
use super::spec::{
    CoinDistribution, Input, MapExpr, Message, Party, PartyMap, ProtocolParts, ProtocolSpec, Round,
};
use crate::error::{Error, Result};

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

#[derive(Default)]
struct RoundDraft {
    alice: Option<Message>,
    bob: Option<Message>,
}

/// Parses a protocol description. Structural problems are reported as
/// [`Error::Parse`]; semantic ones (causality, alphabets) as
/// [`Error::Validation`].
pub fn parse_protocol(src: &str) -> Result<ProtocolSpec> {
    let mut n: Option<usize> = None;
    let mut coins = CoinDistribution::deterministic();
    let mut keys: u32 = 2;
    let mut abort = None;
    let mut rounds: Vec<RoundDraft> = Vec::new();
    let mut alice_key = None;
    let mut bob_key = None;
    let mut builtin: Option<(usize, ProtocolSpec)> = None;
    let mut other_statement = None;

    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| -> Result<u64> {
            s.parse::<u64>().map_err(|_| err(line_no, format!("expected an integer, got `{s}`")))
        };
        let arity = |k: usize| -> Result<()> {
            if toks.len() == k {
                Ok(())
            } else {
                Err(err(line_no, format!("`{}` takes {} argument(s)", toks[0], k - 1)))
            }
        };
        if toks[0] != "n" && !matches!(toks[0], "repetition" | "trivial" | "broadcast" | "onebit") {
            other_statement.get_or_insert(line_no);
        }
        match toks[0] {
            "n" => {
                arity(2)?;
                n = Some(int(toks[1])? as usize);
            }
            "repetition" | "trivial" | "broadcast" | "onebit" => {
                if builtin.is_some() {
                    return Err(err(line_no, "only one builtin protocol per description"));
                }
                let spec = match toks[0] {
                    "repetition" => {
                        arity(2)?;
                        repetition_protocol(int(toks[1])? as usize)?
                    }
                    "trivial" => {
                        arity(1)?;
                        trivial_protocol(1)?
                    }
                    "broadcast" => {
                        arity(1)?;
                        broadcast_protocol()?
                    }
                    _ => {
                        arity(1)?;
                        one_bit_protocol()?
                    }
                };
                builtin = Some((line_no, spec));
            }
            "coins" => {
                if toks.len() < 2 {
                    return Err(err(line_no, "`coins` needs a support size or probabilities"));
                }
                coins = if toks.len() == 2 && !toks[1].contains('.') {
                    CoinDistribution::uniform(int(toks[1])? as usize)?
                } else {
                    let probs = toks[1..]
                        .iter()
                        .map(|s| s.parse::<f64>().map_err(|_| err(line_no, format!("bad probability `{s}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    CoinDistribution::new(probs)?
                };
            }
            "keys" => {
                arity(2)?;
                keys = u32::try_from(int(toks[1])?).map_err(|_| err(line_no, "key alphabet too large"))?;
            }
            "abort" => {
                arity(2)?;
                abort = Some(u32::try_from(int(toks[1])?).map_err(|_| err(line_no, "abort symbol too large"))?);
            }
            "round" => {
                arity(1)?;
                rounds.push(RoundDraft::default());
            }
            "alice" | "bob" => {
                let party = if toks[0] == "alice" { Party::Alice } else { Party::Bob };
                let Some(current) = rounds.last_mut() else {
                    return Err(err(line_no, "message outside a `round` block"));
                };
                if toks.len() < 3 {
                    return Err(err(line_no, "expected `<party> <alphabet> <map>`"));
                }
                let alphabet =
                    u32::try_from(int(toks[1])?).map_err(|_| err(line_no, "alphabet too large"))?;
                let map = parse_map(&toks[2..], party, line_no)?;
                let slot = match party {
                    Party::Alice => &mut current.alice,
                    Party::Bob => &mut current.bob,
                };
                if slot.is_some() {
                    return Err(err(line_no, format!("{party} already has a message in this round")));
                }
                *slot = Some(Message::new(alphabet, map));
            }
            "key" => {
                if toks.len() < 3 {
                    return Err(err(line_no, "expected `key <party> <map>`"));
                }
                let (party, slot) = match toks[1] {
                    "alice" => (Party::Alice, &mut alice_key),
                    "bob" => (Party::Bob, &mut bob_key),
                    other => return Err(err(line_no, format!("unknown party `{other}`"))),
                };
                if slot.is_some() {
                    return Err(err(line_no, format!("{party} key given twice")));
                }
                *slot = Some(parse_map(&toks[2..], party, line_no)?);
            }
            other => return Err(err(line_no, format!("unknown statement `{other}`"))),
        }
    }

    if let Some((line_no, spec)) = builtin {
        if let Some(l) = other_statement {
            return Err(err(l, format!("builtin on line {line_no} cannot be combined with other statements")));
        }
        return match n {
            Some(n) => spec.with_blocklength(n),
            None => Ok(spec),
        };
    }
    let n = n.ok_or_else(|| err(0, "missing `n` statement"))?;
    if rounds.is_empty() {
        return Err(err(0, "at least one `round` is required"));
    }
    let alice_key = alice_key.ok_or_else(|| err(0, "missing `key alice`"))?;
    let bob_key = bob_key.ok_or_else(|| err(0, "missing `key bob`"))?;
    let rounds = rounds
        .into_iter()
        .map(|r| Round {
            alice: r.alice.unwrap_or_else(Message::silent),
            bob: r.bob.unwrap_or_else(Message::silent),
        })
        .collect();
    ProtocolSpec::new(ProtocolParts { n, rounds, alice_key, bob_key, key_alphabet: keys, abort, coins })
}

fn parse_input(tok: &str, party: Party, line: usize) -> Result<Input> {
    let index = |rest: &str| -> Result<usize> {
        match rest.parse::<usize>() {
            Ok(i) if i >= 1 => Ok(i - 1),
            _ => Err(err(line, format!("bad variable `{tok}` (indices are 1-based)"))),
        }
    };
    if tok == "coin" {
        return if party == Party::Alice {
            Ok(Input::Coin)
        } else {
            Err(err(line, "bob cannot read alice's coin"))
        };
    }
    let split = if tok.is_char_boundary(1) { tok.split_at(1) } else { ("", tok) };
    match (split, party) {
        (("x", rest), Party::Alice) | (("y", rest), Party::Bob) => Ok(Input::Obs(index(rest)?)),
        (("m", rest), _) => Ok(Input::Msg(index(rest)?)),
        (("x", _), Party::Bob) => Err(err(line, "bob cannot read alice's observation")),
        (("y", _), Party::Alice) => Err(err(line, "alice cannot read bob's observation")),
        _ => Err(err(line, format!("unknown variable `{tok}`"))),
    }
}

fn parse_map(toks: &[&str], party: Party, line: usize) -> Result<PartyMap> {
    let value = |s: &str| s.parse::<u32>().map_err(|_| err(line, format!("expected a symbol, got `{s}`")));
    let expr = match toks[0] {
        "const" if toks.len() == 2 => MapExpr::Const(value(toks[1])?),
        "var" if toks.len() == 2 => MapExpr::Var(parse_input(toks[1], party, line)?),
        "xor" if toks.len() >= 2 => MapExpr::Xor(
            toks[1..].iter().map(|t| parse_input(t, party, line)).collect::<Result<_>>()?,
        ),
        "table" => {
            let colon = toks
                .iter()
                .position(|&t| t == ":")
                .ok_or_else(|| err(line, "table needs `:` before its outputs"))?;
            let inputs = toks[1..colon]
                .iter()
                .map(|t| parse_input(t, party, line))
                .collect::<Result<_>>()?;
            let outputs = toks[colon + 1..].iter().map(|t| value(t)).collect::<Result<_>>()?;
            MapExpr::Table { inputs, outputs }
        }
        other => return Err(err(line, format!("malformed map starting with `{other}`"))),
    };
    Ok(PartyMap::Expr(expr))
}
