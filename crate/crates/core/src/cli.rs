//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::egalitarian::{
    default_k, egalitarian_continuous, egalitarian_decomposed, minimal_split, objective_g,
    packet_split_plan, sda, ContinuousOptions, EgalitarianMode, SdaOutcome, WeightVector,
};
use crate::error::{Error, Result};
use crate::omniscience::{
    min_sum_rate, truncation_by_enumeration, truncation_incremental, CoreViolation, GameContext,
    RateSearch, SolveOptions, Subgame, TruncationBackend, ENUMERATION_LIMIT,
};
use crate::rate::RateVector;
use crate::report::{
    rate_record, Diagnostics, ErrorRecord, ErrorReport, Fairness, Report, Solution,
    SplitRecord, Timings, TraceEntry, Verdict,
};
use crate::setfn::{is_intersecting_submodular, is_submodular, FnSetFunction, SfmBackend};
use crate::shapley::{
    shapley_approx, shapley_decomposed, shapley_exact, shapley_mean_of_vertices,
    DecomposedMode, PermutationSample,
};
use crate::source_model::{EntropyOracle, Source, UserSet};
use crate::subset::Subset;
use crate::value::{Rational, Value};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "OMNIFAIR_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Minimum sum-rate and fundamental partition.
    Solve,
    /// Shapley value.
    Shapley,
    /// Egalitarian allocation.
    Egalitarian,
    /// Check a rate vector and structural properties of the instance.
    Verify,
    /// Chunk counts for K-packet splitting of a rate vector.
    SplitPlan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchArg {
    Auto,
    BruteForce,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationArg {
    Auto,
    Enumeration,
    Incremental,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SfmArg {
    Exhaustive,
    MinNorm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerArg {
    Sda,
    Continuous,
}

/// Fair rate allocation for communication for omniscience.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "omnifair", version, about)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Source description (JSON).
    #[arg(long)]
    pub input: PathBuf,

    /// Report destination; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// shapley: exact | mean | approx | decomposed.
    /// egalitarian: sda | continuous | decomposed.
    #[arg(long)]
    pub mode: Option<String>,

    /// Chunks per packet (grid 1/K).
    #[arg(long = "K", value_name = "K")]
    pub k: Option<u64>,

    /// Seed for random permutations.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of random permutations (per block in decomposed mode).
    #[arg(long)]
    pub permutations: Option<usize>,

    /// Explicit permutations as a JSON list of user-id lists.
    #[arg(long)]
    pub orders: Option<String>,

    /// Restrict to the subgame on these user ids, e.g. `1,4,5`.
    #[arg(long)]
    pub subgame: Option<String>,

    /// Weights as a JSON object from user id to weight.
    #[arg(long)]
    pub weights: Option<String>,

    /// Duality-gap tolerance of the continuous solver.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Include every iterate in the report.
    #[arg(long)]
    pub trace: bool,

    /// Rate vector: comma-separated in user order, or a JSON object.
    #[arg(long)]
    pub rate: Option<String>,

    /// Write a CSV of the ℓ1 distance to the endpoint per iteration.
    #[arg(long)]
    pub plot: Option<PathBuf>,

    /// Per-block solver for `egalitarian --mode decomposed`.
    #[arg(long, value_enum)]
    pub inner: Option<InnerArg>,

    #[arg(long, value_enum, default_value = "auto")]
    pub search: SearchArg,

    #[arg(long, value_enum, default_value = "auto")]
    pub truncation: TruncationArg,

    #[arg(long, value_enum, default_value = "exhaustive")]
    pub sfm: SfmArg,
}

impl RunConfig {
    /// Rejects flags that do not apply to the command.
    pub fn validate(&self) -> Result<()> {
        use Command::*;
        let allowed: &[(&str, bool, &[Command])] = &[
            ("--mode", self.mode.is_some(), &[Shapley, Egalitarian]),
            ("--K", self.k.is_some(), &[Egalitarian, SplitPlan]),
            ("--seed", self.seed.is_some(), &[Shapley]),
            ("--permutations", self.permutations.is_some(), &[Shapley]),
            ("--orders", self.orders.is_some(), &[Shapley]),
            ("--subgame", self.subgame.is_some(), &[Shapley, Egalitarian, Verify]),
            ("--weights", self.weights.is_some(), &[Egalitarian]),
            ("--tol", self.tol.is_some(), &[Egalitarian]),
            ("--trace", self.trace, &[Egalitarian]),
            ("--rate", self.rate.is_some(), &[Egalitarian, Verify, SplitPlan]),
            ("--plot", self.plot.is_some(), &[Egalitarian]),
            ("--inner", self.inner.is_some(), &[Egalitarian]),
        ];
        for (flag, given, commands) in allowed {
            if *given && !commands.contains(&self.command) {
                return Err(Error::InvalidArgument(format!(
                    "{flag} does not apply to {:?}",
                    self.command
                )));
            }
        }
        let modes: &[&str] = match self.command {
            Shapley => &["exact", "mean", "approx", "decomposed"],
            Egalitarian => &["sda", "continuous", "decomposed"],
            _ => &[],
        };
        if let Some(m) = &self.mode {
            if !modes.contains(&m.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "unknown mode {m:?}; expected one of {modes:?}"
                )));
            }
        }
        if self.mode.as_deref() == Some("decomposed") && self.subgame.is_some() {
            return Err(Error::InvalidArgument(
                "--subgame cannot be combined with decomposed mode".into(),
            ));
        }
        if self.inner.is_some() && self.mode.as_deref() != Some("decomposed") {
            return Err(Error::InvalidArgument(
                "--inner needs --mode decomposed".into(),
            ));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidArgument("--K must be positive".into()));
        }
        if self.tol.is_some_and(|t| !(t > 0.0)) {
            return Err(Error::InvalidArgument("--tol must be positive".into()));
        }
        if self.command == SplitPlan && self.rate.is_none() {
            return Err(Error::InvalidArgument("split-plan needs --rate".into()));
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            search: match self.search {
                SearchArg::Auto => RateSearch::Auto,
                SearchArg::BruteForce => RateSearch::BruteForce,
                SearchArg::Iterative => RateSearch::Iterative,
            },
            truncation: match self.truncation {
                TruncationArg::Auto => TruncationBackend::Auto,
                TruncationArg::Enumeration => TruncationBackend::Enumeration,
                TruncationArg::Incremental => TruncationBackend::Incremental,
            },
            sfm: match self.sfm {
                SfmArg::Exhaustive => SfmBackend::Exhaustive,
                SfmArg::MinNorm => SfmBackend::MinNorm,
            },
        }
    }
}

/// Exit status for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
        Error::Inconsistent(_) => EXIT_INTERNAL,
        _ => EXIT_PARSE,
    }
}

fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Parse(_) => "parse",
        Error::MalformedSource(_) => "malformed_source",
        Error::UnknownUser(_) => "unknown_user",
        Error::Overlap => "overlap",
        Error::TooLarge { .. } => "too_large",
        Error::InfeasibleLattice => "infeasible_lattice",
        Error::NonPositiveWeight { .. } => "non_positive_weight",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::NotInCore(_) => "not_in_core",
        Error::OffGrid { .. } => "off_grid",
        Error::EmptyPermutations => "empty_permutations",
        Error::NonIntegralSplit { .. } => "non_integral_split",
        Error::NonConvergence { .. } => "non_convergence",
        Error::Inconsistent(_) => "inconsistent",
        Error::Io(_) => "io",
    }
}

pub fn error_report(err: &Error) -> ErrorReport {
    ErrorReport {
        error: ErrorRecord {
            kind: error_kind(err).to_string(),
            message: err.to_string(),
            exit_code: exit_code(err),
        },
    }
}

/// Caps the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads() -> Result<()> {
    let Ok(text) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={text:?}")))?;
    // A pool that is already initialized keeps its size.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Runs the pipeline; returns the report and the exit status it implies.
pub fn run(config: &RunConfig) -> Result<(Report, i32)> {
    let started = Instant::now();
    config.validate()?;
    let text = fs::read_to_string(&config.input)?;
    let source = Source::from_json(&text)?;
    let (mut report, code) = match source {
        Source::Linear(s) => execute::<Rational>(Arc::new(s), config)?,
        Source::Pmf(s) => execute::<f64>(Arc::new(s), config)?,
    };
    report.timings.total_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok((report, code))
}

/// Runs `config`, writes the report (or an error record) and returns the
/// exit status.
pub fn main_with(config: &RunConfig) -> i32 {
    let (text, code) = match run(config) {
        Ok((report, code)) => (
            serde_json::to_string_pretty(&report).expect("report serializes"),
            code,
        ),
        Err(err) => {
            eprintln!("omnifair: {err}");
            (
                serde_json::to_string_pretty(&error_report(&err)).expect("error serializes"),
                exit_code(&err),
            )
        }
    };
    match &config.output {
        Some(path) => {
            if let Err(err) = fs::write(path, text + "\n") {
                eprintln!("omnifair: cannot write {}: {err}", path.display());
                return EXIT_PARSE;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if writeln!(stdout, "{text}").is_err() {
                return EXIT_INTERNAL;
            }
        }
    }
    code
}

fn parse_ids(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad user id {t:?}")))
        })
        .collect()
}

fn json_number<T: Value>(v: &serde_json::Value) -> Result<T> {
    let text = match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(Error::Parse(format!("expected a number, got {other}"))),
    };
    T::decode(&text).ok_or_else(|| Error::Parse(format!("bad number {text:?}")))
}

fn json_id_map(text: &str) -> Result<Vec<(u32, serde_json::Value)>> {
    let map: serde_json::Map<String, serde_json::Value> =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    map.into_iter()
        .map(|(k, v)| {
            let id = k
                .parse::<u32>()
                .map_err(|_| Error::Parse(format!("bad user id {k:?}")))?;
            Ok((id, v))
        })
        .collect()
}

/// Parses a rate vector on `support`: either a JSON object keyed by user id
/// or a comma-separated list in increasing user order.
pub fn parse_rates<T: Value>(users: &UserSet, support: Subset, text: &str) -> Result<RateVector<T>> {
    let mut r = RateVector::zeros(users.len(), support);
    let text = text.trim();
    if text.starts_with('{') {
        let entries = json_id_map(text)?;
        let mut seen = Subset::EMPTY;
        for (id, v) in entries {
            let i = users.position(id)?;
            if !support.contains(i) {
                return Err(Error::InvalidArgument(format!(
                    "user {id} is outside the game"
                )));
            }
            r.set(i, json_number(&v)?);
            seen = seen.with(i);
        }
        if seen != support {
            return Err(Error::InvalidArgument(format!(
                "rates missing for users {:?}",
                users.ids_of(support - seen)
            )));
        }
        return Ok(r);
    }
    let values: Vec<T> = text
        .split(',')
        .map(|t| T::decode(t).ok_or_else(|| Error::Parse(format!("bad rate {t:?}"))))
        .collect::<Result<_>>()?;
    RateVector::on_support(users.len(), support, values)
}

/// Parses `{"id": weight, ...}`; every user needs a weight.
pub fn parse_weights<T: Value>(users: &UserSet, text: &str) -> Result<WeightVector<T>> {
    let pairs = json_id_map(text)?
        .into_iter()
        .map(|(id, v)| Ok((id, json_number::<T>(&v)?)))
        .collect::<Result<Vec<_>>>()?;
    WeightVector::from_ids(users, &pairs)
}

/// Parses a JSON list of user-id orders into position orders.
pub fn parse_orders(users: &UserSet, text: &str) -> Result<Vec<Vec<usize>>> {
    let ids: Vec<Vec<u32>> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    ids.iter()
        .map(|o| o.iter().map(|&id| users.position(id)).collect())
        .collect()
}

fn to_rational<T: Value>(r: &RateVector<T>) -> Result<RateVector<Rational>> {
    if !T::EXACT {
        return Err(Error::InvalidArgument(
            "packet splitting needs a linear source".into(),
        ));
    }
    let mut out = RateVector::zeros(r.dimension(), r.support());
    for (i, v) in r.iter() {
        out.set(i, Rational::from_big(&v.to_big()));
    }
    Ok(out)
}

fn describe_violation<T: Value>(users: &UserSet, v: &CoreViolation<T>) -> String {
    match v {
        CoreViolation::Support { expected, actual } => format!(
            "rates given for users {:?}, expected {:?}",
            users.ids_of(*actual),
            users.ids_of(*expected)
        ),
        CoreViolation::SumRate { expected, actual } => {
            format!("sum-rate {actual} differs from {expected}")
        }
        CoreViolation::LowerBound { set, bound, actual } => format!(
            "r({:?}) = {actual} is below {bound}",
            users.ids_of(*set)
        ),
    }
}

fn select_game<'a, T: Value>(ctx: &'a GameContext<T>, config: &RunConfig) -> Result<Subgame<'a, T>> {
    match &config.subgame {
        Some(text) => ctx.subgame(ctx.users().subset(&parse_ids(text)?)?),
        None => Ok(ctx.whole()),
    }
}

fn execute<T: Value>(
    oracle: Arc<dyn EntropyOracle<T>>,
    config: &RunConfig,
) -> Result<(Report, i32)> {
    let ctx = min_sum_rate(oracle, config.solve_options())?;
    let mut report = Report {
        command: serde_json::to_value(config.command)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default(),
        config: serde_json::to_value(config).map_err(|e| Error::Parse(e.to_string()))?,
        solution: Solution::from_context(&ctx),
        fairness: None,
        verification: Vec::new(),
        split_plan: None,
        timings: Timings { total_ms: 0.0 },
    };
    let mut code = EXIT_OK;
    match config.command {
        Command::Solve => {}
        Command::Shapley => report.fairness = Some(run_shapley(&ctx, config)?),
        Command::Egalitarian => report.fairness = Some(run_egalitarian(&ctx, config)?),
        Command::Verify => {
            report.verification = run_verify(&ctx, config)?;
            if report.verification.iter().any(|v| !v.pass) {
                code = EXIT_VERIFY;
            }
        }
        Command::SplitPlan => {
            let text = config.rate.as_deref().expect("validated");
            let r = to_rational(&parse_rates::<T>(ctx.users(), ctx.users().full(), text)?)?;
            let minimal_k = minimal_split(&r);
            let plan = packet_split_plan(ctx.users(), &r, config.k.unwrap_or(minimal_k))?;
            report.split_plan = Some(SplitRecord {
                k: plan.k,
                minimal_k,
                chunks: plan.chunks.into_iter().collect(),
            });
        }
    }
    Ok((report, code))
}

fn run_shapley<T: Value>(ctx: &GameContext<T>, config: &RunConfig) -> Result<Fairness> {
    let users = ctx.users();
    let mode = config.mode.as_deref().unwrap_or("exact");
    let game = select_game(ctx, config)?;
    let orders = config.orders.as_deref().map(|t| parse_orders(users, t)).transpose()?;
    let mut seed = None;
    let mut permutations = None;
    let rates = match mode {
        "exact" => shapley_exact(&game)?,
        "mean" => shapley_mean_of_vertices(&game)?,
        "approx" => {
            let sample = match orders {
                Some(o) => {
                    permutations = Some(o.len());
                    PermutationSample::Explicit(o)
                }
                None => {
                    let count = config.permutations.unwrap_or(game.len());
                    let s = config.seed.unwrap_or(0);
                    seed = Some(s);
                    permutations = Some(count);
                    PermutationSample::Random { count, seed: s }
                }
            };
            shapley_approx(&game, &sample)?
        }
        "decomposed" => {
            let m = match orders {
                Some(o) => {
                    permutations = Some(o.len());
                    DecomposedMode::Explicit(o)
                }
                None if config.permutations.is_some() || config.seed.is_some() => {
                    let s = config.seed.unwrap_or(0);
                    seed = Some(s);
                    permutations = config.permutations;
                    DecomposedMode::Random {
                        count: config.permutations,
                        seed: s,
                    }
                }
                None => DecomposedMode::Exact,
            };
            shapley_decomposed(ctx, &m)?
        }
        other => unreachable!("mode {other} passed validation"),
    };
    Ok(Fairness {
        method: "shapley".into(),
        mode: mode.into(),
        rates: rate_record(users, &rates),
        seed,
        permutations,
        k: None,
        iterations: None,
        objective: None,
        gap: None,
        diagnostics: None,
        trace: None,
    })
}

fn diagnostics<T>(out: &SdaOutcome<T>) -> Diagnostics {
    Diagnostics {
        default_k: out.diagnostics.default_k,
        locally_optimal: out.diagnostics.locally_optimal,
        left_core: out.diagnostics.left_core,
        warning: out.diagnostics.warning.clone(),
    }
}

fn trace_entries<T: Value>(users: &UserSet, out: &SdaOutcome<T>) -> Vec<TraceEntry> {
    let end = &out.rates;
    out.trace
        .iterates
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let (exchange, objective) = match n {
                0 => (None, out.trace.initial_objective.clone()),
                _ => {
                    let s = &out.trace.steps[n - 1];
                    (
                        Some((users.id(s.increase), users.id(s.decrease))),
                        s.objective.clone(),
                    )
                }
            };
            TraceEntry {
                iteration: n,
                exchange,
                rates: rate_record(users, r),
                objective: objective.encode(),
                distance_to_end: r.l1_distance(end).encode(),
            }
        })
        .collect()
}

fn plot_rows<T: Value>(users: &UserSet, out: &SdaOutcome<T>, csv: &mut String) {
    let label = users
        .ids_of(out.rates.support())
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join("-");
    for entry in trace_entries(users, out) {
        let _ = writeln!(
            csv,
            "{label},{},{},{}",
            entry.iteration,
            T::decode(&entry.distance_to_end).map_or(f64::NAN, |v| v.to_f64()),
            T::decode(&entry.objective).map_or(f64::NAN, |v| v.to_f64()),
        );
    }
}

fn run_egalitarian<T: Value>(ctx: &GameContext<T>, config: &RunConfig) -> Result<Fairness> {
    let users = ctx.users();
    let mode = config.mode.as_deref().unwrap_or("sda");
    let w = match &config.weights {
        Some(text) => parse_weights::<T>(users, text)?,
        None => WeightVector::uniform(users.len()),
    };
    let k = config.k.unwrap_or_else(|| default_k(ctx));
    let continuous = ContinuousOptions {
        tol: config.tol.unwrap_or(ContinuousOptions::default().tol),
        ..ContinuousOptions::default()
    };
    let mut fairness = Fairness {
        method: "egalitarian".into(),
        mode: mode.into(),
        rates: Default::default(),
        seed: None,
        permutations: None,
        k: None,
        iterations: None,
        objective: None,
        gap: None,
        diagnostics: None,
        trace: None,
    };
    let mut runs: Vec<SdaOutcome<T>> = Vec::new();
    let inner = config.inner.unwrap_or(InnerArg::Sda);
    match mode {
        "sda" => {
            let game = select_game(ctx, config)?;
            let start = match &config.rate {
                Some(text) => parse_rates::<T>(users, game.ground(), text)?,
                None => ctx.vertex().restrict(game.ground()),
            };
            let out = sda(&game, &start, k, &w)?;
            fairness.rates = rate_record(users, &out.rates);
            fairness.objective = Some(objective_g(&out.rates, &w)?.encode());
            runs.push(out);
        }
        "continuous" => {
            let game = select_game(ctx, config)?;
            let out = egalitarian_continuous(&game, &w, &continuous)?;
            fairness.rates = rate_record(users, &out.rates);
            fairness.iterations = Some(out.iterations);
            fairness.gap = Some(out.gap);
        }
        "decomposed" => {
            let m = match inner {
                InnerArg::Sda => EgalitarianMode::Fractional {
                    k,
                    start: config
                        .rate
                        .as_deref()
                        .map(|t| parse_rates::<T>(users, users.full(), t))
                        .transpose()?,
                },
                InnerArg::Continuous => EgalitarianMode::Continuous(continuous),
            };
            let out = egalitarian_decomposed(ctx, &w, &m)?;
            fairness.rates = match &out.exact {
                Some(r) => rate_record(users, r),
                None => rate_record(users, &out.rates),
            };
            runs = out.blocks;
        }
        other => unreachable!("mode {other} passed validation"),
    }
    if !runs.is_empty() {
        fairness.k = Some(k);
        fairness.iterations = Some(runs.iter().map(|r| r.trace.iterations()).sum());
        fairness.diagnostics = Some(runs.iter().map(diagnostics).collect());
        if config.trace {
            fairness.trace = Some(runs.iter().flat_map(|r| trace_entries(users, r)).collect());
        }
    }
    if let Some(path) = &config.plot {
        if runs.is_empty() {
            return Err(Error::InvalidArgument(
                "--plot needs a steepest-descent run".into(),
            ));
        }
        let mut csv = String::from("block,iteration,l1_distance,objective\n");
        for r in &runs {
            plot_rows(users, r, &mut csv);
        }
        fs::write(path, csv)?;
    }
    Ok(fairness)
}

fn run_verify<T: Value>(ctx: &GameContext<T>, config: &RunConfig) -> Result<Vec<Verdict>> {
    let users = ctx.users();
    let full = users.full();
    let pair = |w: Option<(Subset, Subset)>| {
        w.map(|(a, b)| format!("{:?} and {:?}", users.ids_of(a), users.ids_of(b)))
    };
    let mut out = Vec::new();

    if let Some(text) = &config.rate {
        let game = select_game(ctx, config)?;
        let r = parse_rates::<T>(users, game.ground(), text)?;
        let check = game.core_membership(&r)?;
        out.push(Verdict {
            check: "core".into(),
            pass: check.member,
            witness: check.violation.as_ref().map(|v| describe_violation(users, v)),
        });
    }

    let h = FnSetFunction::new(full, |x: Subset| ctx.entropy(x));
    let sub = is_submodular(&h)?;
    out.push(Verdict {
        check: "entropy_submodular".into(),
        pass: sub.holds,
        witness: pair(sub.witness),
    });

    let f = ctx.f_alpha_fn(ctx.r_co().clone());
    let inter = is_intersecting_submodular(&f)?;
    out.push(Verdict {
        check: "f_intersecting_submodular".into(),
        pass: inter.holds,
        witness: pair(inter.witness),
    });

    let split = ctx.decomposition_violation();
    out.push(Verdict {
        check: "decomposition".into(),
        pass: split.is_none(),
        witness: split.map(|x| format!("{:?}", users.ids_of(x))),
    });

    if full.len() <= ENUMERATION_LIMIT {
        let mut mismatch = None;
        for x in full.subsets().filter(|x| !x.is_empty()) {
            let a = truncation_by_enumeration(&f, x)?;
            let order: Vec<usize> = x.iter().collect();
            let b = truncation_incremental(&f, &order, ctx.options().sfm)?;
            if !a.value.tol_eq(&b.value) || a.partition != b.partition {
                mismatch = Some(x);
                break;
            }
        }
        out.push(Verdict {
            check: "truncation_backends".into(),
            pass: mismatch.is_none(),
            witness: mismatch.map(|x| format!("{:?}", users.ids_of(x))),
        });
    }
    Ok(out)
}
