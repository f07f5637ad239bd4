use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest blocklength representable by the bitmask views.
pub const MAX_BLOCKLENGTH: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Party {
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "alice",
            Party::Bob => "bob",
        })
    }
}

/// A variable a map may read. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Input {
    /// The party's own quantized bit at a position (`x_i` for Alice, `y_i` for Bob).
    Obs(usize),
    /// Alice's local coin.
    Coin,
    /// A previously sent public message.
    Msg(usize),
}

/// What a party sees when it computes a message or its key.
#[derive(Debug, Clone, Copy)]
pub struct View<'a> {
    /// own observation, bit `i` = position `i` (0 = `+w`)
    pub obs: u32,
    /// Alice's coin; always 0 for Bob
    pub coin: u32,
    /// messages sent so far
    pub transcript: &'a [u32],
}

impl View<'_> {
    pub fn obs_bit(&self, i: usize) -> u32 {
        (self.obs >> i) & 1
    }

    fn read(&self, input: Input) -> u32 {
        match input {
            Input::Obs(i) => self.obs_bit(i),
            Input::Coin => self.coin,
            Input::Msg(j) => self.transcript[j],
        }
    }
}

/// Declarative map, as produced by the text format.
#[derive(Debug, Clone, PartialEq)]
pub enum MapExpr {
    Const(u32),
    Var(Input),
    Xor(Vec<Input>),
    /// Output indexed by the inputs in mixed radix, first input most significant.
    Table { inputs: Vec<Input>, outputs: Vec<u32> },
}

pub type BuiltinFn = Arc<dyn Fn(&View<'_>) -> u32 + Send + Sync>;

#[derive(Clone)]
pub enum PartyMap {
    Expr(MapExpr),
    /// Hand-written map. `obs_used` is the number of leading positions it may
    /// read and `uses_coin` whether it reads the coin.
    Builtin { name: String, f: BuiltinFn, obs_used: usize, uses_coin: bool },
}

impl fmt::Debug for PartyMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyMap::Expr(e) => f.debug_tuple("Expr").field(e).finish(),
            PartyMap::Builtin { name, .. } => f.debug_tuple("Builtin").field(name).finish(),
        }
    }
}

impl PartyMap {
    pub fn constant(v: u32) -> Self {
        PartyMap::Expr(MapExpr::Const(v))
    }

    pub fn builtin(
        name: impl Into<String>,
        obs_used: usize,
        uses_coin: bool,
        f: impl Fn(&View<'_>) -> u32 + Send + Sync + 'static,
    ) -> Self {
        PartyMap::Builtin { name: name.into(), f: Arc::new(f), obs_used, uses_coin }
    }

    /// Evaluates a validated map; tables are compiled by [`ProtocolSpec::new`].
    pub(crate) fn eval(&self, view: &View<'_>) -> u32 {
        match self {
            PartyMap::Builtin { f, .. } => f(view),
            PartyMap::Expr(MapExpr::Const(v)) => *v,
            PartyMap::Expr(MapExpr::Var(i)) => view.read(*i),
            PartyMap::Expr(MapExpr::Xor(inputs)) => inputs.iter().fold(0, |acc, &i| acc ^ view.read(i)),
            PartyMap::Expr(MapExpr::Table { .. }) => unreachable!("tables are compiled during validation"),
        }
    }
}

/// A message slot: its alphabet size and the map producing it.
#[derive(Debug, Clone)]
pub struct Message {
    pub alphabet: u32,
    pub map: PartyMap,
}

impl Message {
    pub fn new(alphabet: u32, map: PartyMap) -> Self {
        Self { alphabet, map }
    }

    /// A message that carries no information.
    pub fn silent() -> Self {
        Self { alphabet: 1, map: PartyMap::constant(0) }
    }
}

/// Round `k`: Alice sends `F_{2k-1}`, then Bob sends `F_{2k}`.
#[derive(Debug, Clone)]
pub struct Round {
    pub alice: Message,
    pub bob: Message,
}

/// Finite distribution of Alice's coin over `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoinDistribution {
    probs: Vec<f64>,
}

impl CoinDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Validation("coin probabilities must be non-negative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(format!("coin probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation("coin support must be non-empty".into()));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn deterministic() -> Self {
        Self { probs: vec![1.0] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> usize {
        self.probs.len()
    }
}

/// A finite public-discussion protocol over `n` quantized source symbols.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    pub(crate) n: usize,
    pub(crate) rounds: Vec<Round>,
    pub(crate) alice_key: PartyMap,
    pub(crate) bob_key: PartyMap,
    pub(crate) key_alphabet: u32,
    pub(crate) abort: Option<u32>,
    pub(crate) coins: CoinDistribution,
    /// radix of every transcript position
    pub(crate) radices: Vec<u64>,
}

/// Raw parts of a [`ProtocolSpec`], validated by [`ProtocolSpec::new`].
#[derive(Debug, Clone)]
pub struct ProtocolParts {
    pub n: usize,
    pub rounds: Vec<Round>,
    pub alice_key: PartyMap,
    pub bob_key: PartyMap,
    pub key_alphabet: u32,
    pub abort: Option<u32>,
    pub coins: CoinDistribution,
}

/// Where a map sits, which fixes what it may read.
#[derive(Debug, Clone, Copy)]
struct Slot {
    party: Party,
    /// number of transcript messages visible
    visible: usize,
    /// output alphabet
    alphabet: u32,
}

impl ProtocolSpec {
    pub fn new(parts: ProtocolParts) -> Result<Self> {
        let ProtocolParts { n, mut rounds, mut alice_key, mut bob_key, key_alphabet, abort, coins } =
            parts;
        let invalid = |m: String| Err(Error::Validation(m));
        if n == 0 || n > MAX_BLOCKLENGTH {
            return invalid(format!("blocklength must lie in 1..={MAX_BLOCKLENGTH}, got {n}"));
        }
        if rounds.is_empty() {
            return invalid("a protocol needs at least one round".into());
        }
        if key_alphabet == 0 {
            return invalid("key alphabet must be non-empty".into());
        }
        if let Some(a) = abort {
            if a >= key_alphabet {
                return invalid(format!("abort symbol {a} outside key alphabet {key_alphabet}"));
            }
        }
        let mut radices = Vec::with_capacity(2 * rounds.len());
        for r in &rounds {
            for m in [&r.alice, &r.bob] {
                if m.alphabet == 0 {
                    return invalid("message alphabets must be non-empty".into());
                }
                radices.push(m.alphabet as u64);
            }
        }
        if radices.iter().try_fold(1u64 << n, |acc, &r| acc.checked_mul(r)).is_none() {
            return Err(Error::Capacity("transcript and source views exceed 64-bit codes".into()));
        }

        let ctx = Ctx { n, coin_support: coins.support(), radices: &radices };
        for (k, r) in rounds.iter_mut().enumerate() {
            let a = Slot { party: Party::Alice, visible: 2 * k, alphabet: r.alice.alphabet };
            ctx.check(&mut r.alice.map, a, &format!("round {} alice message", k + 1))?;
            let b = Slot { party: Party::Bob, visible: 2 * k + 1, alphabet: r.bob.alphabet };
            ctx.check(&mut r.bob.map, b, &format!("round {} bob message", k + 1))?;
        }
        let all = radices.len();
        let ka = Slot { party: Party::Alice, visible: all, alphabet: key_alphabet };
        ctx.check(&mut alice_key, ka, "alice key")?;
        let kb = Slot { party: Party::Bob, visible: all, alphabet: key_alphabet };
        ctx.check(&mut bob_key, kb, "bob key")?;

        Ok(Self { n, rounds, alice_key, bob_key, key_alphabet, abort, coins, radices })
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds.len()
    }

    pub fn key_alphabet(&self) -> u32 {
        self.key_alphabet
    }

    pub fn abort_symbol(&self) -> Option<u32> {
        self.abort
    }

    pub fn coins(&self) -> &CoinDistribution {
        &self.coins
    }

    /// `log2 |K_A| / n`.
    pub fn rate_bits(&self) -> f64 {
        (self.key_alphabet as f64).log2() / self.n as f64
    }

    /// The same protocol run on a longer block (extra positions are ignored).
    pub fn with_blocklength(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::Validation(format!(
                "blocklength {n} is shorter than the {} positions the protocol reads",
                self.n
            )));
        }
        ProtocolSpec::new(ProtocolParts {
            n,
            rounds: self.rounds.clone(),
            alice_key: self.alice_key.clone(),
            bob_key: self.bob_key.clone(),
            key_alphabet: self.key_alphabet,
            abort: self.abort,
            coins: self.coins.clone(),
        })
    }

    /// Appends a round whose messages are functions of the transcript only.
    pub fn with_extra_round(&self, round: Round) -> Result<Self> {
        let mut rounds = self.rounds.clone();
        rounds.push(round);
        ProtocolSpec::new(ProtocolParts {
            n: self.n,
            rounds,
            alice_key: self.alice_key.clone(),
            bob_key: self.bob_key.clone(),
            key_alphabet: self.key_alphabet,
            abort: self.abort,
            coins: self.coins.clone(),
        })
    }

    /// Runs the protocol on one source outcome. `transcript` is scratch space.
    /// Returns `(K_A, K_B, transcript code)`.
    pub(crate) fn run(
        &self,
        x: u32,
        y: u32,
        coin: u32,
        transcript: &mut Vec<u32>,
    ) -> Result<(u32, u32, u64)> {
        transcript.clear();
        for (k, r) in self.rounds.iter().enumerate() {
            let m = r.alice.map.eval(&View { obs: x, coin, transcript });
            check_range(m, r.alice.alphabet, || format!("round {} alice message", k + 1))?;
            transcript.push(m);
            let m = r.bob.map.eval(&View { obs: y, coin: 0, transcript });
            check_range(m, r.bob.alphabet, || format!("round {} bob message", k + 1))?;
            transcript.push(m);
        }
        let ka = self.alice_key.eval(&View { obs: x, coin, transcript });
        check_range(ka, self.key_alphabet, || "alice key".into())?;
        let kb = self.bob_key.eval(&View { obs: y, coin: 0, transcript });
        check_range(kb, self.key_alphabet, || "bob key".into())?;
        let mut code = 0u64;
        for (&m, &r) in transcript.iter().zip(&self.radices).rev() {
            code = code * r + m as u64;
        }
        Ok((ka, kb, code))
    }
}

fn check_range(v: u32, alphabet: u32, what: impl FnOnce() -> String) -> Result<()> {
    if v < alphabet {
        Ok(())
    } else {
        Err(Error::Validation(format!("{} produced {v}, outside alphabet {alphabet}", what())))
    }
}

struct Ctx<'a> {
    n: usize,
    coin_support: usize,
    radices: &'a [u64],
}

impl Ctx<'_> {
    fn domain(&self, i: Input) -> u64 {
        match i {
            Input::Obs(_) => 2,
            Input::Coin => self.coin_support as u64,
            Input::Msg(j) => self.radices[j],
        }
    }

    fn check_input(&self, i: Input, slot: Slot, what: &str) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("{what}: {m}")));
        match i {
            Input::Obs(p) if p >= self.n => bad(format!("position {} beyond blocklength {}", p + 1, self.n)),
            Input::Coin if slot.party == Party::Bob => bad("bob cannot read alice's coin".into()),
            Input::Msg(j) if j >= slot.visible => {
                bad(format!("message m{} is not yet sent (causality)", j + 1))
            }
            _ => Ok(()),
        }
    }

    /// Validates `map` for `slot` and compiles tables into builtins that carry
    /// their radices.
    fn check(&self, map: &mut PartyMap, slot: Slot, what: &str) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("{what}: {m}")));
        let expr = match map {
            PartyMap::Builtin { obs_used, uses_coin, .. } => {
                if *obs_used > self.n {
                    return bad(format!("reads {obs_used} positions, blocklength is {}", self.n));
                }
                if *uses_coin && slot.party == Party::Bob {
                    return bad("bob cannot read alice's coin".into());
                }
                return Ok(());
            }
            PartyMap::Expr(e) => e.clone(),
        };
        match &expr {
            MapExpr::Const(v) => {
                if *v >= slot.alphabet {
                    return bad(format!("constant {v} outside alphabet {}", slot.alphabet));
                }
            }
            MapExpr::Var(i) => self.check_input(*i, slot, what)?,
            MapExpr::Xor(inputs) => {
                if inputs.is_empty() {
                    return bad("xor needs at least one input".into());
                }
                for &i in inputs {
                    self.check_input(i, slot, what)?;
                }
            }
            MapExpr::Table { inputs, outputs } => {
                let mut size = 1u64;
                for &i in inputs {
                    self.check_input(i, slot, what)?;
                    size = size.saturating_mul(self.domain(i));
                }
                if size != outputs.len() as u64 {
                    return bad(format!("table needs {size} entries, got {}", outputs.len()));
                }
                if let Some(v) = outputs.iter().find(|&&v| v >= slot.alphabet) {
                    return bad(format!("table entry {v} outside alphabet {}", slot.alphabet));
                }
                let radices: Vec<(Input, usize)> =
                    inputs.iter().map(|&i| (i, self.domain(i) as usize)).collect();
                let outputs = outputs.clone();
                let obs_used = inputs
                    .iter()
                    .filter_map(|i| if let Input::Obs(p) = i { Some(p + 1) } else { None })
                    .max()
                    .unwrap_or(0);
                let uses_coin = inputs.contains(&Input::Coin);
                *map = PartyMap::builtin("table", obs_used, uses_coin, move |v| {
                    let idx = radices.iter().fold(0usize, |acc, &(i, r)| acc * r + v.read(i) as usize);
                    outputs[idx]
                });
            }
        }
        Ok(())
    }
}
