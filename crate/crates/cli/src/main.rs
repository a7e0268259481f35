//! `erax`: command-line front end for erasure-decoding error exponents.
//!
//! Four subcommands cover the library surface:
//!
//! - `exponent`: single evaluations of `E1`, `E2`, the tilted
//!   conditional-entropy exponent `F`, the pairwise moment exponent, and the
//!   binary-symmetric random-coding integrand.
//! - `xi-table`: a CSV grid of the universally achievable fraction
//!   `xi*(R, T)` over a channel family.
//! - `simulate`: seeded decoder ensemble runs (exact enumeration below the
//!   output-space budget, Monte Carlo above unless `--exact` forbids it)
//!   with JSON reports and plot-ready series CSV.
//! - `verify`: the self-check suites with one PASS/FAIL line per check.
//!
//! Rates and thresholds are read in nats by default; `--units bits` converts
//! inputs and displayed exponents at the boundary only. Channel shorthand
//! `bsc:<theta>` and family shorthand `bsc-grid:<lo>:<step>:<hi>` (plus
//! `bsc-canonical` for the fifty-point grid `{0.01, ..., 0.50}`) avoid spec
//! files for the common case; anything else is treated as a JSON spec path.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 budget
//! refusal. Every artifact embeds its configuration, seed where applicable,
//! and the tool version; identical invocations produce identical artifacts.

use std::f64::consts::LN_2;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use erax_core::channel::{message_count, ChannelFamily, Dmc};
use erax_core::decoders::Variant;
use erax_core::exponents::{
    e1_detailed, e2, exponent_table, f_exponent, gallager_e, pair_exponent, write_xi_csv, xi_star,
    GridSpec, XiRow,
};
use erax_core::sim::{
    ensemble_average, exponent_fit, mc_error_probs, sample_codebook, write_series_csv,
    DecoderKind, EnsembleReport, ErrorStats, PerThetaStats, SeriesRow, SlopeFit,
};
use erax_core::tol::DEFAULT_ENUM_BUDGET;
use erax_core::verify::{
    suite_closed_forms, suite_decoder_optimality, suite_gallager_consistency, suite_table1,
    suite_u_bound, CheckResult, TABLE1_RATES, TABLE1_THRESHOLDS,
};
use erax_core::{CoreError, Result};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "erax",
    version,
    about = "Erasure-decoding error exponents, universal decoding, and verification suites"
)]
struct Cli {
    /// Unit for rates, thresholds, and displayed exponents.
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    units: Units,
    /// Worker threads for the data-parallel loops (default: all cores).
    #[arg(long, global = true, env = "ERAX_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one exponent quantity.
    Exponent {
        #[command(subcommand)]
        which: ExponentCmd,
    },
    /// Emit a CSV grid of xi*(R, T) over a channel family.
    XiTable(XiTableArgs),
    /// Run seeded decoder ensemble simulations.
    Simulate(SimulateArgs),
    /// Run the self-check suites.
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum ExponentCmd {
    /// Erasure exponent E1(R, T) of one channel with its maximizing (s, rho).
    E1 {
        /// Channel spec: `bsc:<theta>` or a JSON file path.
        #[arg(long)]
        channel: String,
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        threshold: f64,
        #[command(flatten)]
        grid: GridArgs,
        /// JSON output path (stdout otherwise).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Undetected-error exponent E2 = E1 + T from a known E1.
    E2 {
        #[arg(long)]
        e1: f64,
        #[arg(long)]
        threshold: f64,
    },
    /// Tilted conditional-entropy exponent F(P_y, lambda) of a channel.
    F {
        /// Channel spec: `bsc:<theta>` or a JSON file path.
        #[arg(long)]
        channel: String,
        /// Output distribution, comma separated.
        #[arg(long, value_delimiter = ',')]
        py: Vec<f64>,
        #[arg(long)]
        lambda: f64,
    },
    /// Pairwise moment exponent of two channels at (s, rho).
    Pair {
        #[arg(long)]
        channel_a: String,
        #[arg(long)]
        channel_b: String,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        rho: f64,
    },
    /// Binary-symmetric random-coding integrand E0(rho) - rho R.
    Gallager {
        #[arg(long)]
        theta: f64,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        rate: f64,
    },
}

#[derive(Args)]
struct GridArgs {
    /// Grid step for the (s, rho) search.
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Disable local refinement around coarse grid optima.
    #[arg(long)]
    no_refine: bool,
}

impl GridArgs {
    fn to_spec(&self) -> GridSpec {
        GridSpec {
            step_s: self.step,
            step_rho: self.step,
            refine: !self.no_refine,
            ..GridSpec::default()
        }
    }
}

#[derive(Args)]
struct XiTableArgs {
    /// Family spec: `bsc-canonical`, `bsc-grid:<lo>:<step>:<hi>`,
    /// `bsc:<theta>`, or a JSON file path.
    #[arg(long, default_value = "bsc-canonical")]
    family: String,
    /// Rates to tabulate, comma separated (default 0, 0.05, ..., 0.30 nats).
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Thresholds to tabulate, comma separated (default 0, 0.025, ..., 0.150
    /// nats).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    #[command(flatten)]
    grid: GridArgs,
    /// CSV output path (stdout otherwise).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Block lengths, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Decoding rule.
    #[arg(long, value_enum)]
    decoder: DecoderArg,
    /// Single-channel spec (shorthand for a one-point family).
    #[arg(long, conflicts_with = "family")]
    channel: Option<String>,
    /// Family spec (see `xi-table --family`).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    threshold: f64,
    /// Exponent fraction: a number in (0, 1] or `auto` for xi*(R, T) of the
    /// family.
    #[arg(long, default_value = "auto")]
    xi: String,
    /// Require exact enumeration; refuse above the budget instead of falling
    /// back to Monte Carlo.
    #[arg(long)]
    exact: bool,
    /// Monte Carlo trials per codebook and channel when above the budget.
    #[arg(long, default_value_t = 20_000)]
    trials: u64,
    /// Number of random codebooks in the ensemble.
    #[arg(long, default_value_t = 10)]
    codebooks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output-space budget for exact enumeration.
    #[arg(long, default_value_t = DEFAULT_ENUM_BUDGET)]
    budget: u64,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON report path (stdout otherwise).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Series CSV path (`n,pr_e1,pr_e2,pr_erasure` from the family average).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum DecoderArg {
    Forney,
    Universal,
    UniversalMaxAlpha,
}

impl DecoderArg {
    fn kind(self) -> DecoderKind {
        match self {
            DecoderArg::Forney => DecoderKind::Forney,
            DecoderArg::Universal => DecoderKind::Universal {
                variant: Variant::SumOverOthers,
            },
            DecoderArg::UniversalMaxAlpha => DecoderKind::Universal {
                variant: Variant::MaxAlpha,
            },
        }
    }

    fn name(self) -> &'static str {
        match self {
            DecoderArg::Forney => "forney",
            DecoderArg::Universal => "universal",
            DecoderArg::UniversalMaxAlpha => "universal-max-alpha",
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run.
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 2024)]
    seed: u64,
    #[command(flatten)]
    grid: GridArgs,
    /// JSON results path (in addition to the PASS/FAIL lines).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    #[value(name = "closed-forms")]
    ClosedForms,
    #[value(name = "table1")]
    Table1,
    #[value(name = "decoder-optimality")]
    DecoderOptimality,
    #[value(name = "u-bound")]
    UBound,
    #[value(name = "gallager")]
    Gallager,
    #[value(name = "all")]
    All,
}

impl SuiteArg {
    fn name(self) -> &'static str {
        match self {
            SuiteArg::ClosedForms => "closed-forms",
            SuiteArg::Table1 => "table1",
            SuiteArg::DecoderOptimality => "decoder-optimality",
            SuiteArg::UBound => "u-bound",
            SuiteArg::Gallager => "gallager",
            SuiteArg::All => "all",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Units {
    Nats,
    Bits,
}

impl Units {
    /// Converts a user-supplied rate or exponent into nats.
    fn to_nats(self, v: f64) -> f64 {
        match self {
            Units::Nats => v,
            Units::Bits => v * LN_2,
        }
    }

    /// Converts an internal nat value into the display unit.
    fn from_nats(self, v: f64) -> f64 {
        match self {
            Units::Nats => v,
            Units::Bits => v / LN_2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(k) = cli.threads {
        // A later duplicate initialization (e.g. under test harnesses) only
        // loses the resize, never correctness: results are thread-invariant.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CoreError::BudgetExceeded(_) => 3,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Exponent { which } => cmd_exponent(which, cli.units),
        Command::XiTable(a) => cmd_xi_table(a, cli.units),
        Command::Simulate(a) => cmd_simulate(a, cli.units),
        Command::Verify(a) => cmd_verify(a),
    }
}

// ---------------------------------------------------------------------------
// Spec parsing and output plumbing
// ---------------------------------------------------------------------------

fn parse_channel(spec: &str) -> Result<Dmc> {
    if let Some(rest) = spec.strip_prefix("bsc:") {
        let theta: f64 = rest.parse().map_err(|_| {
            CoreError::InvalidArgument(format!("bad crossover probability in channel spec {spec:?}"))
        })?;
        Dmc::bsc(theta)
    } else {
        Dmc::from_spec_file(Path::new(spec))
    }
}

fn parse_family(spec: &str) -> Result<ChannelFamily> {
    if spec == "bsc-canonical" {
        return Ok(ChannelFamily::bsc_canonical());
    }
    if let Some(rest) = spec.strip_prefix("bsc-grid:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CoreError::InvalidArgument(format!(
                "family spec {spec:?} must be bsc-grid:<lo>:<step>:<hi>"
            )));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.parse().map_err(|_| {
                    CoreError::InvalidArgument(format!("bad number {p:?} in family spec {spec:?}"))
                })
            })
            .collect::<Result<_>>()?;
        let (lo, step, hi) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || hi < lo {
            return Err(CoreError::InvalidArgument(format!(
                "family spec {spec:?} needs step > 0 and hi >= lo"
            )));
        }
        let mut thetas = Vec::new();
        let mut k = 0usize;
        loop {
            let theta = lo + (k as f64) * step;
            if theta > hi + step * 1e-9 {
                break;
            }
            thetas.push(theta);
            k += 1;
        }
        return ChannelFamily::bsc_grid(&thetas);
    }
    if spec.starts_with("bsc:") {
        let ch = parse_channel(spec)?;
        // One-point grid keeps the crossover probability as the label.
        return ChannelFamily::bsc_grid(&[ch.prob(0, 1)]);
    }
    ChannelFamily::from_spec_file(Path::new(spec))
}

/// Writes to the path when given, stdout otherwise.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, bytes)?;
            eprintln!("wrote {}", p.display());
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn emit_json(path: Option<&Path>, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CoreError::Format(e.to_string()))?;
    emit(path, format!("{text}\n").as_bytes())
}

// ---------------------------------------------------------------------------
// exponent
// ---------------------------------------------------------------------------

fn cmd_exponent(which: &ExponentCmd, units: Units) -> Result<i32> {
    match which {
        ExponentCmd::E1 {
            channel,
            rate,
            threshold,
            grid,
            output,
        } => {
            let ch = parse_channel(channel)?;
            let g = grid.to_spec();
            let r = units.to_nats(*rate);
            let t = units.to_nats(*threshold);
            let d = e1_detailed(r, t, &ch, None, &g)?;
            let report = json!({
                "config": {
                    "command": "exponent e1",
                    "channel": channel,
                    "rate": rate,
                    "threshold": threshold,
                    "step": g.step_s,
                    "refine": g.refine,
                    "units": units.name(),
                },
                "version": VERSION,
                "units": units.name(),
                "e1": units.from_nats(d.value),
                "e2": units.from_nats(e2(d.value, t)),
                "argmax": {"s": d.argmax.0, "rho": d.argmax.1},
            });
            emit_json(output.as_deref(), &report)?;
        }
        ExponentCmd::E2 { e1, threshold } => {
            let v = e2(units.to_nats(*e1), units.to_nats(*threshold));
            let report = json!({
                "config": {
                    "command": "exponent e2",
                    "e1": e1,
                    "threshold": threshold,
                    "units": units.name(),
                },
                "version": VERSION,
                "units": units.name(),
                "e2": units.from_nats(v),
            });
            emit_json(None, &report)?;
        }
        ExponentCmd::F {
            channel,
            py,
            lambda,
        } => {
            let ch = parse_channel(channel)?;
            let v = f_exponent(py, *lambda, &ch)?;
            let report = json!({
                "config": {
                    "command": "exponent f",
                    "channel": channel,
                    "py": py,
                    "lambda": lambda,
                    "units": units.name(),
                },
                "version": VERSION,
                "units": units.name(),
                "f": units.from_nats(v),
            });
            emit_json(None, &report)?;
        }
        ExponentCmd::Pair {
            channel_a,
            channel_b,
            s,
            rho,
        } => {
            let a = parse_channel(channel_a)?;
            let b = parse_channel(channel_b)?;
            let v = pair_exponent(&a, &b, *rho, *s)?;
            let report = json!({
                "config": {
                    "command": "exponent pair",
                    "channel_a": channel_a,
                    "channel_b": channel_b,
                    "s": s,
                    "rho": rho,
                    "units": units.name(),
                },
                "version": VERSION,
                "units": units.name(),
                "pair_exponent": units.from_nats(v),
            });
            emit_json(None, &report)?;
        }
        ExponentCmd::Gallager { theta, rho, rate } => {
            let v = gallager_e(*theta, *rho, units.to_nats(*rate))?;
            let report = json!({
                "config": {
                    "command": "exponent gallager",
                    "theta": theta,
                    "rho": rho,
                    "rate": rate,
                    "units": units.name(),
                },
                "version": VERSION,
                "units": units.name(),
                "gallager_e": units.from_nats(v),
            });
            emit_json(None, &report)?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// xi-table
// ---------------------------------------------------------------------------

fn cmd_xi_table(a: &XiTableArgs, units: Units) -> Result<i32> {
    let fam = parse_family(&a.family)?;
    let g = a.grid.to_spec();
    // Explicit lists are read in the chosen unit; the defaults are the
    // canonical nat axes regardless of the display unit.
    let rates: Vec<f64> = match &a.rates {
        Some(v) => v.iter().map(|&x| units.to_nats(x)).collect(),
        None => TABLE1_RATES.to_vec(),
    };
    let thresholds: Vec<f64> = match &a.thresholds {
        Some(v) => v.iter().map(|&x| units.to_nats(x)).collect(),
        None => TABLE1_THRESHOLDS.to_vec(),
    };
    if rates.is_empty() || thresholds.is_empty() {
        return Err(CoreError::InvalidArgument(
            "rate and threshold lists must be nonempty".into(),
        ));
    }
    let mut rows = Vec::with_capacity(rates.len() * thresholds.len());
    for &r in &rates {
        for &t in &thresholds {
            let res = xi_star(r, t, &fam, &g)?;
            rows.push(XiRow::new(units.from_nats(r), units.from_nats(t), &res));
        }
    }
    let config = json!({
        "command": "xi-table",
        "family": a.family,
        "rates": rates.iter().map(|&r| units.from_nats(r)).collect::<Vec<_>>(),
        "thresholds": thresholds.iter().map(|&t| units.from_nats(t)).collect::<Vec<_>>(),
        "step": g.step_s,
        "refine": g.refine,
        "units": units.name(),
    });
    let comments = vec![
        format!("erax xi-table v{VERSION}"),
        format!("config: {config}"),
    ];
    let mut buf = Vec::new();
    write_xi_csv(&mut buf, &comments, &rows)?;
    emit(a.output.as_deref(), &buf)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn resolve_xi(spec: &str, r: f64, t: f64, fam: &ChannelFamily, g: &GridSpec) -> Result<f64> {
    let xi = if spec == "auto" {
        xi_star(r, t, fam, g)?.xi
    } else {
        spec.parse::<f64>().map_err(|_| {
            CoreError::InvalidArgument(format!("--xi must be `auto` or a number, got {spec:?}"))
        })?
    };
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(CoreError::InvalidArgument(format!(
            "xi = {xi} outside (0, 1]"
        )));
    }
    Ok(xi)
}

fn simulate_family(a: &SimulateArgs) -> Result<ChannelFamily> {
    match (&a.channel, &a.family) {
        (Some(spec), None) => {
            if spec.starts_with("bsc:") {
                parse_family(spec)
            } else {
                ChannelFamily::general(vec![Dmc::from_spec_file(Path::new(spec))?])
            }
        }
        (None, Some(spec)) => parse_family(spec),
        _ => Err(CoreError::InvalidArgument(
            "give exactly one of --channel and --family".into(),
        )),
    }
}

fn fit_json(fit: &SlopeFit, units: Units) -> Value {
    json!({
        "slope": units.from_nats(fit.slope),
        "intercept": units.from_nats(fit.intercept),
        "residual": units.from_nats(fit.residual),
        "censored": fit.censored,
    })
}

fn cmd_simulate(a: &SimulateArgs, units: Units) -> Result<i32> {
    if a.n.is_empty() {
        return Err(CoreError::InvalidArgument(
            "--n needs at least one block length".into(),
        ));
    }
    let fam = simulate_family(a)?;
    let r = units.to_nats(a.rate);
    let t = units.to_nats(a.threshold);
    let g = a.grid.to_spec();
    let kind = a.decoder.kind();
    let xi = resolve_xi(&a.xi, r, t, &fam, &g)?;

    let mut runs = Vec::with_capacity(a.n.len());
    let mut series = Vec::with_capacity(a.n.len());
    let mut e1_points = Vec::with_capacity(a.n.len());
    let mut e2_points = Vec::with_capacity(a.n.len());
    for &n in &a.n {
        let over_budget = (fam.output_size() as u64)
            .checked_pow(n as u32)
            .map_or(true, |total| total > a.budget);
        let (mode, rep) = if !over_budget {
            let rep =
                ensemble_average(n, r, t, &fam, kind, xi, a.codebooks, a.seed, &g, a.budget)?;
            ("exact", rep)
        } else if a.exact {
            return Err(CoreError::BudgetExceeded(format!(
                "exact enumeration of {}^{} output blocks exceeds the budget {}",
                fam.output_size(),
                n,
                a.budget
            )));
        } else {
            let rep = mc_ensemble(n, r, t, &fam, kind, xi, a.codebooks, a.trials, a.seed, &g)?;
            ("monte-carlo", rep)
        };
        series.push(SeriesRow {
            n,
            pr_e1: rep.avg.pr_e1,
            pr_e2: rep.avg.pr_e2,
            pr_erasure: rep.avg.pr_erasure,
        });
        e1_points.push((n, rep.avg.pr_e1));
        e2_points.push((n, rep.avg.pr_e2));
        let rep_value = serde_json::to_value(&rep).map_err(|e| CoreError::Format(e.to_string()))?;
        runs.push(json!({
            "mode": mode,
            "kn_log_rate": units.from_nats(rep.kn_ratio.ln() / n as f64),
            "report": rep_value,
        }));
    }
    let fits = if a.n.len() >= 2 {
        json!({
            "pr_e1": exponent_fit(&e1_points).ok().map(|f| fit_json(&f, units)),
            "pr_e2": exponent_fit(&e2_points).ok().map(|f| fit_json(&f, units)),
        })
    } else {
        Value::Null
    };
    let config = json!({
        "command": "simulate",
        "n": a.n,
        "decoder": a.decoder.name(),
        "channel": a.channel,
        "family": a.family,
        "rate": a.rate,
        "threshold": a.threshold,
        "xi": a.xi,
        "exact": a.exact,
        "trials": a.trials,
        "codebooks": a.codebooks,
        "seed": a.seed,
        "budget": a.budget,
        "step": g.step_s,
        "refine": g.refine,
        "units": units.name(),
    });
    let report = json!({
        "config": config,
        "version": VERSION,
        "units": units.name(),
        "xi": xi,
        "runs": runs,
        "fits": fits,
    });
    emit_json(a.output.as_deref(), &report)?;
    if let Some(csv_path) = &a.csv {
        let comments = vec![
            format!("erax simulate v{VERSION}"),
            format!("config: {config}"),
        ];
        let mut buf = Vec::new();
        write_series_csv(&mut buf, &comments, &series)?;
        emit(Some(csv_path), &buf)?;
    }
    Ok(0)
}

/// Monte Carlo counterpart of the exact ensemble run: same codebook seeds,
/// same aggregation, but each (codebook, channel) cell is estimated from
/// `trials` sampled output blocks instead of enumerated exactly.
#[allow(clippy::too_many_arguments)]
fn mc_ensemble(
    n: usize,
    r: f64,
    t: f64,
    fam: &ChannelFamily,
    kind: DecoderKind,
    xi: f64,
    codebooks: usize,
    trials: u64,
    seed: u64,
    g: &GridSpec,
) -> Result<EnsembleReport> {
    if codebooks == 0 {
        return Err(CoreError::InvalidArgument(
            "ensemble needs at least one codebook".into(),
        ));
    }
    let m = message_count(n, r);
    let table = exponent_table(fam, r, t, g)?;
    let bound_inv: Vec<f64> = table
        .e1
        .iter()
        .map(|&e| ((n as f64) * (xi * e + t)).exp())
        .collect();
    let mut sums = vec![[0.0f64; 4]; fam.len()];
    let mut ratio_sum = vec![0.0f64; fam.len()];
    let mut kn_sum = 0.0;
    for c in 0..codebooks {
        let cb_seed = derived_seed(seed, c as u64);
        let cb = sample_codebook(n, m, fam.input_size(), cb_seed)?;
        let mut kn = f64::NEG_INFINITY;
        for i in 0..fam.len() {
            let ch = fam.channel(i);
            let mc_seed = derived_seed(cb_seed, 1 + i as u64);
            let stats = match kind {
                DecoderKind::Forney => mc_error_probs(
                    &cb,
                    |y| erax_core::decoders::forney_decode(&cb, y, ch, t),
                    ch,
                    t,
                    trials,
                    mc_seed,
                )?,
                DecoderKind::Universal { variant } => {
                    let ctx = erax_core::decoders::UniversalContext::new(
                        fam,
                        table.clone(),
                        xi,
                        t,
                        n,
                        variant,
                    )?;
                    mc_error_probs(
                        &cb,
                        |y| erax_core::decoders::universal_decode(&cb, y, &ctx),
                        ch,
                        t,
                        trials,
                        mc_seed,
                    )?
                }
            };
            sums[i][0] += stats.pr_e1;
            sums[i][1] += stats.pr_e2;
            sums[i][2] += stats.pr_erasure;
            sums[i][3] += stats.gamma;
            let ratio = stats.gamma * bound_inv[i];
            ratio_sum[i] += ratio;
            kn = kn.max(ratio);
        }
        kn_sum += kn;
    }
    let cbs = codebooks as f64;
    let per_theta: Vec<PerThetaStats> = (0..fam.len())
        .map(|i| PerThetaStats {
            theta: fam.label(i),
            pr_e1: sums[i][0] / cbs,
            pr_e2: sums[i][1] / cbs,
            pr_erasure: sums[i][2] / cbs,
            gamma: sums[i][3] / cbs,
            ratio: ratio_sum[i] / cbs,
        })
        .collect();
    let l = fam.len() as f64;
    let avg = ErrorStats {
        pr_e1: per_theta.iter().map(|p| p.pr_e1).sum::<f64>() / l,
        pr_e2: per_theta.iter().map(|p| p.pr_e2).sum::<f64>() / l,
        pr_erasure: per_theta.iter().map(|p| p.pr_erasure).sum::<f64>() / l,
        gamma: per_theta.iter().map(|p| p.gamma).sum::<f64>() / l,
        stderr: None,
    };
    Ok(EnsembleReport {
        n,
        trials: codebooks,
        avg,
        kn_ratio: kn_sum / cbs,
        seed,
        per_theta,
    })
}

/// Standard 64-bit finalizer; same constants as the library's internal seed
/// derivation so the Monte Carlo fallback samples the same codebooks as the
/// exact path.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derived_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let g = a.grid.to_spec();
    let mut results: Vec<CheckResult> = Vec::new();
    let suites: Vec<SuiteArg> = match a.suite {
        SuiteArg::All => vec![
            SuiteArg::ClosedForms,
            SuiteArg::Table1,
            SuiteArg::DecoderOptimality,
            SuiteArg::UBound,
            SuiteArg::Gallager,
        ],
        s => vec![s],
    };
    for s in suites {
        let mut part = match s {
            SuiteArg::ClosedForms => suite_closed_forms(a.seed)?,
            SuiteArg::Table1 => suite_table1(&g)?,
            SuiteArg::DecoderOptimality => suite_decoder_optimality()?,
            SuiteArg::UBound => suite_u_bound(a.seed)?,
            SuiteArg::Gallager => suite_gallager_consistency(&g)?,
            SuiteArg::All => unreachable!(),
        };
        results.append(&mut part);
    }
    for r in &results {
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    let passed = results.iter().filter(|r| r.passed).count();
    println!("verify: {passed}/{} checks passed", results.len());
    if let Some(path) = &a.output {
        let report = json!({
            "config": {
                "command": "verify",
                "suite": a.suite.name(),
                "seed": a.seed,
                "step": g.step_s,
                "refine": g.refine,
            },
            "version": VERSION,
            "results": results,
            "passed": passed == results.len(),
        });
        emit_json(Some(path), &report)?;
    }
    Ok(if passed == results.len() { 0 } else { 2 })
}
