//! `satkey`: bounds, sweeps, Monte Carlo runs and protocol evaluation for the
//! quantized BPSK satellite key-agreement model.
//!
//! Exit codes: 0 success, 2 usage error, 3 data or domain error, 4 failed
//! self-check. Failures print a one-line JSON error record on stderr.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use output::{Cell, Table};
use satkey_core::asymptotics::{envelope, logspace, scaled_limit};
use satkey_core::capacity::{
    attach_mc, mc_mi_estimate, plugin_bias_allowance, quadratic_decay_table_with, sweep,
    DEFAULT_GRID_POINTS,
};
use satkey_core::optimize::MIN_GRID_POINTS;
use satkey_core::protocol::{
    advantage_search, broadcast_protocol, evaluate_exact_with_view, evaluate_mc_with_view,
    one_bit_protocol, parse_protocol, repetition_protocol, trivial_protocol, EveView,
};
use satkey_core::verify::run_checks;
use satkey_core::{sk_upper_bound, Error, Interval, ProtocolSpec, SatelliteParams};

#[derive(Debug, Parser, Serialize)]
#[command(name = "satkey", version, about = "Quantized secret-key bounds for the BPSK/AWGN satellite model")]
struct Cli {
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Write to this file instead of standard output
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Master seed for every random draw; generated and printed if omitted
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Bound I(X_q;Y_q|Z_q) at one (w, q)
    Bound {
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
    },
    /// Bound over a (w, q) grid, or its supremum over w per q with --sup
    Sweep(SweepArgs),
    /// Scaled limit q^2 I -> L(w) and its envelope over a w range
    Limit(RangeArgs),
    /// Envelope 8 w^4 exp(-w^2) / (pi^2 ln 2) over a w range
    Envelope(RangeArgs),
    /// Monte Carlo estimate of the bound from raw channel draws
    Mc {
        #[arg(long, allow_negative_numbers = true)]
        w: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// Evaluate a finite public-discussion protocol
    Protocol(ProtocolArgs),
    /// Run the numeric self-checks
    Verify,
}

#[derive(Debug, Args, Serialize)]
struct RangeArgs {
    #[arg(long, default_value_t = 0.1)]
    w_min: f64,
    #[arg(long, default_value_t = 4.0)]
    w_max: f64,
    /// Number of points, endpoints included
    #[arg(long, default_value_t = 100)]
    steps: usize,
}

#[derive(Debug, Args, Serialize)]
struct SweepArgs {
    /// Explicit amplitudes (comma separated); overrides the w range
    #[arg(long, value_delimiter = ',')]
    w: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    w_min: f64,
    #[arg(long, default_value_t = 4.0)]
    w_max: f64,
    #[arg(long, default_value_t = 40)]
    w_steps: usize,
    /// Explicit quality ratios (comma separated); overrides the log-spaced q range
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, default_value_t = 1e2)]
    q_min: f64,
    #[arg(long, default_value_t = 1e6)]
    q_max: f64,
    #[arg(long, default_value_t = 5)]
    q_steps: usize,
    /// Report sup over w in (0, w-max] for each q instead of the grid
    #[arg(long)]
    sup: bool,
    /// Coarse grid size of the supremum search
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Attach a Monte Carlo estimate with this many samples to every row
    #[arg(long)]
    mc_samples: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Builtin {
    Trivial,
    Broadcast,
    Onebit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Eve {
    /// transcript and her quantized block
    Full,
    /// transcript only
    Transcript,
}

#[derive(Debug, Args, Serialize)]
struct ProtocolArgs {
    /// Protocol description file
    #[arg(long, conflicts_with_all = ["repetition", "builtin"])]
    file: Option<PathBuf>,
    /// Repetition protocol on blocks of N symbols
    #[arg(long, value_name = "N", conflicts_with = "builtin")]
    repetition: Option<usize>,
    #[arg(long, value_enum)]
    builtin: Option<Builtin>,
    /// Run the protocol on a longer block than it reads
    #[arg(long)]
    blocklength: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long, default_value_t = 4.0)]
    q: f64,
    #[arg(long, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, value_enum, default_value_t = Eve::Full)]
    eve_view: Eve,
    /// Repetition-protocol search over --w-list x --q-list x --blocks
    #[arg(long, conflicts_with_all = ["file", "repetition", "builtin"])]
    advantage_search: bool,
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    w_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.5,2,4")]
    q_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    blocks: Vec<usize>,
}

enum Failure {
    Usage(String),
    Data(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Check(_) => 4,
        }
    }

    fn record(&self) -> String {
        let (kind, msg) = match self {
            Failure::Usage(m) => ("usage", m),
            Failure::Data(m) => ("data", m),
            Failure::Check(m) => ("check", m),
        };
        serde_json::json!({ "error": { "kind": kind, "exit_code": self.code(), "message": msg } }).to_string()
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Validation(_) => Failure::Usage(e.to_string()),
            Error::Domain(_) | Error::Capacity(_) => Failure::Data(e.to_string()),
        }
    }
}

fn usage_if(bad: bool, msg: impl FnOnce() -> String) -> Result<(), Failure> {
    if bad {
        Err(Failure::Usage(msg()))
    } else {
        Ok(())
    }
}

fn check_point(w: f64, q: f64) -> Result<(), Failure> {
    SatelliteParams::new(w, q).map(|_| ()).map_err(|e| Failure::Usage(e.to_string()))
}

fn check_range(lo: f64, hi: f64, steps: usize) -> Result<(), Failure> {
    usage_if(!(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo), || {
        format!("need 0 < w-min < w-max, got {lo} and {hi}")
    })?;
    usage_if(steps < 2, || format!("need at least 2 steps, got {steps}"))
}

/// `steps` points from `lo` to `hi`, both included.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let f = Failure::Usage(first.trim_start_matches("error: ").to_owned());
            eprintln!("{}", f.record());
            return ExitCode::from(f.code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(f.code())
        }
    }
}

fn needs_seed(cmd: &Command) -> bool {
    match cmd {
        Command::Mc { .. } => true,
        Command::Sweep(a) => a.mc_samples.is_some(),
        Command::Protocol(a) => a.mode == Mode::Mc && !a.advantage_search,
        _ => false,
    }
}

fn run(mut cli: Cli) -> Result<(), Failure> {
    if needs_seed(&cli.command) && cli.seed.is_none() {
        let seed: u64 = rand::random();
        eprintln!("seed: {seed}");
        cli.seed = Some(seed);
    }
    let seed = cli.seed.unwrap_or(0);
    let (table, status) = dispatch(&cli.command, seed)?;
    let text = match cli.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(&cli),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    status
}

type Dispatched = (Table, Result<(), Failure>);

fn dispatch(cmd: &Command, seed: u64) -> Result<Dispatched, Failure> {
    let table = match cmd {
        Command::Bound { w, q } => {
            check_point(*w, *q)?;
            let p = SatelliteParams::new(*w, *q)?;
            let c = p.crossovers();
            let mut t = Table::new(&["w", "q", "epsilon", "gamma", "bound_bits"]);
            t.push(vec![(*w).into(), (*q).into(), c.epsilon().into(), c.gamma().into(), sk_upper_bound(&p).bits().into()]);
            t
        }
        Command::Sweep(a) => sweep_table(a, seed)?,
        Command::Limit(a) => {
            check_range(a.w_min, a.w_max, a.steps)?;
            let mut t = Table::new(&["w", "scaled_limit", "envelope"]);
            for w in linspace(a.w_min, a.w_max, a.steps) {
                t.push(vec![w.into(), scaled_limit(w)?.into(), envelope(w)?.into()]);
            }
            t
        }
        Command::Envelope(a) => {
            check_range(a.w_min, a.w_max, a.steps)?;
            let mut t = Table::new(&["w", "envelope"]);
            for w in linspace(a.w_min, a.w_max, a.steps) {
                t.push(vec![w.into(), envelope(w)?.into()]);
            }
            t
        }
        Command::Mc { w, q, samples } => {
            check_point(*w, *q)?;
            let p = SatelliteParams::new(*w, *q)?;
            let est = mc_mi_estimate(&p, *samples, seed)?;
            let mut t = Table::new(&["w", "q", "samples", "mc_bits", "mc_stderr", "bias_allowance", "bound_bits"]);
            t.push(vec![
                (*w).into(),
                (*q).into(),
                est.samples.into(),
                est.estimate_bits.into(),
                est.stderr.into(),
                plugin_bias_allowance(est.samples).into(),
                sk_upper_bound(&p).bits().into(),
            ]);
            t
        }
        Command::Protocol(a) => protocol_table(a, seed)?,
        Command::Verify => {
            let checks = run_checks()?;
            let mut t = Table::new(&["check", "passed", "detail"]);
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            for c in checks {
                eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                t.push(vec![c.name.into(), c.passed.into(), c.detail.into()]);
            }
            let status = if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Check(format!("failed checks: {}", failed.join(", "))))
            };
            return Ok((t, status));
        }
    };
    Ok((table, Ok(())))
}

fn sweep_table(a: &SweepArgs, seed: u64) -> Result<Table, Failure> {
    let qs = if a.q.is_empty() {
        usage_if(!(a.q_min > 1.0 && a.q_max > a.q_min && a.q_max.is_finite()), || {
            format!("need 1 < q-min < q-max, got {} and {}", a.q_min, a.q_max)
        })?;
        usage_if(a.q_steps < 2, || "need at least 2 q steps".into())?;
        logspace(a.q_min, a.q_max, a.q_steps)
    } else {
        a.q.clone()
    };
    if a.sup {
        usage_if(a.grid_points < MIN_GRID_POINTS, || {
            format!("grid must have at least {MIN_GRID_POINTS} points, got {}", a.grid_points)
        })?;
        usage_if(a.mc_samples.is_some(), || "--mc-samples does not apply to --sup".into())?;
        usage_if(!a.w.is_empty(), || "--sup searches (0, w-max]; drop --w".into())?;
        let range = Interval::new(0.0, a.w_max).map_err(|e| Failure::Usage(e.to_string()))?;
        for &q in &qs {
            check_point(1.0, q)?;
        }
        usage_if(qs.windows(2).any(|p| p[1] <= p[0]), || "q list must be strictly increasing".into())?;
        let rows = quadratic_decay_table_with(range, &qs, a.grid_points)?;
        let mut t = Table::new(&["q", "w_star", "sup_bits", "scaled_sup"]);
        for r in rows {
            t.push(vec![r.q.into(), r.w_star.into(), r.sup_bits.into(), r.scaled_sup.into()]);
        }
        return Ok(t);
    }
    let ws = if a.w.is_empty() {
        check_range(a.w_min, a.w_max, a.w_steps)?;
        linspace(a.w_min, a.w_max, a.w_steps)
    } else {
        a.w.clone()
    };
    for &w in &ws {
        for &q in &qs {
            check_point(w, q)?;
        }
    }
    let mut records = sweep(&ws, &qs)?;
    let mut columns = vec!["w", "q", "bound_bits", "scaled_bound"];
    if let Some(n) = a.mc_samples {
        attach_mc(&mut records, n, seed)?;
        columns.extend(["mc_bits", "mc_stderr"]);
    }
    let mut t = Table::new(&columns);
    for r in records {
        let mut row: Vec<Cell> = vec![r.w.into(), r.q.into(), r.bound_bits.into(), r.scaled.into()];
        if let Some(mc) = r.mc {
            row.extend([mc.estimate_bits.into(), mc.stderr.into()]);
        }
        t.push(row);
    }
    Ok(t)
}

fn load_protocol(a: &ProtocolArgs) -> Result<ProtocolSpec, Failure> {
    let spec = if let Some(path) = &a.file {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
        parse_protocol(&src)?
    } else if let Some(n) = a.repetition {
        repetition_protocol(n).map_err(|e| Failure::Usage(e.to_string()))?
    } else {
        match a.builtin {
            Some(Builtin::Trivial) => trivial_protocol(1)?,
            Some(Builtin::Broadcast) => broadcast_protocol()?,
            Some(Builtin::Onebit) => one_bit_protocol()?,
            None => return Err(Failure::Usage("choose --file, --repetition, --builtin or --advantage-search".into())),
        }
    };
    match a.blocklength {
        Some(n) => Ok(spec.with_blocklength(n)?),
        None => Ok(spec),
    }
}

fn protocol_table(a: &ProtocolArgs, seed: u64) -> Result<Table, Failure> {
    if a.advantage_search {
        for &w in &a.w_list {
            for &q in &a.q_list {
                check_point(w, q)?;
            }
        }
        let rows = advantage_search(&a.w_list, &a.q_list, &a.blocks).map_err(Failure::from)?;
        let mut t = Table::new(&[
            "w",
            "q",
            "block_len",
            "pr_accept",
            "bob_error",
            "eve_error",
            "bob_raw_error",
            "eve_raw_error",
            "eve_ahead_initially",
            "distilled",
        ]);
        for r in rows {
            t.push(vec![
                r.w.into(),
                r.q.into(),
                r.block_len.into(),
                r.pr_accept.into(),
                r.bob_error.into(),
                r.eve_error.into(),
                r.bob_raw_error.into(),
                r.eve_raw_error.into(),
                r.eve_ahead_initially().into(),
                r.distilled().into(),
            ]);
        }
        return Ok(t);
    }
    check_point(a.w, a.q)?;
    let spec = load_protocol(a)?;
    let c = SatelliteParams::new(a.w, a.q)?.crossovers();
    let view = match a.eve_view {
        Eve::Full => EveView::SourceAndTranscript,
        Eve::Transcript => EveView::TranscriptOnly,
    };
    let m = match a.mode {
        Mode::Exact => evaluate_exact_with_view(&spec, &c, view)?,
        Mode::Mc => evaluate_mc_with_view(&spec, &c, a.samples, seed, view)?,
    };
    let mut columns = vec![
        "blocklength",
        "pr_disagree",
        "key_entropy_bits",
        "leakage_bits",
        "rate_bits",
        "pr_accept",
        "pr_disagree_given_accept",
        "eve_error_given_accept",
    ];
    let mut row: Vec<Cell> = vec![
        spec.blocklength().into(),
        m.pr_disagree.into(),
        m.key_entropy_bits.into(),
        m.leakage_bits.into(),
        m.rate_bits.into(),
        m.pr_accept.into(),
        m.pr_disagree_given_accept.into(),
        m.eve_error_given_accept.into(),
    ];
    if let Some(se) = m.stderr {
        columns.extend([
            "pr_disagree_stderr",
            "key_entropy_stderr",
            "leakage_stderr",
            "pr_disagree_given_accept_stderr",
            "eve_error_given_accept_stderr",
            "key_entropy_bias",
            "leakage_bias",
        ]);
        row.extend([
            se.pr_disagree.into(),
            se.key_entropy_bits.into(),
            se.leakage_bits.into(),
            se.pr_disagree_given_accept.into(),
            se.eve_error_given_accept.into(),
            se.key_entropy_bias.into(),
            se.leakage_bias.into(),
        ]);
    }
    let mut t = Table::new(&columns);
    t.push(row);
    Ok(t)
}
