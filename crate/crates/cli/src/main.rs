//! `cpmm` — simulate swap traces, query exchange rates, solve arbitrage
//! with independent numeric verification, emit gain curves, and check
//! conformance against Uniswap v2 integer arithmetic.
//!
//! Exit codes: 0 success, 1 validation or parse failure, 2 disabled
//! transaction, 3 verification discrepancy.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cpmm_core::arbitrage::solve_arbitrage;
use cpmm_core::json::{oracle_from_json, state_from_json, state_to_json, trace_from_json};
use cpmm_core::numeric::golden_max;
use cpmm_core::rates::{external_rate, gain, gain_curve, gain_curve_csv, pool_internal_rate};
use cpmm_core::swap::{execute_swap, swap_output};
use cpmm_core::uniswap::{post_swap_k_holds, random_cases, run_case, SwapCase};
use cpmm_core::{AmmError, PriceOracle, SystemState, TokenId};

#[derive(Parser)]
#[command(name = "cpmm", about = "Constant-product AMM simulator with trading fees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StateArgs {
    /// Path to the state JSON document.
    #[arg(long)]
    state: PathBuf,

    /// Path to the price oracle JSON document.
    #[arg(long)]
    oracle: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a trace of swaps in order, printing each step's gain and state.
    Simulate {
        #[command(flatten)]
        files: StateArgs,

        /// Path to the trace JSON document (an array of swaps).
        #[arg(long)]
        trace: PathBuf,
    },

    /// Print the internal and external exchange rates for a pair.
    Rate {
        #[command(flatten)]
        files: StateArgs,

        /// Oriented pair, e.g. `T0,T1`.
        #[arg(long)]
        pair: String,
    },

    /// Solve the arbitrage problem for a pair.
    Arbitrage {
        #[command(flatten)]
        files: StateArgs,

        /// Pair to analyze, e.g. `T0,T1` (both orientations are tried).
        #[arg(long)]
        pair: String,

        /// Account whose balance gates enabledness.
        #[arg(long)]
        sender: String,

        /// Re-derive the maximizer with a golden-section search and fail
        /// (exit 3) if it disagrees with the closed form beyond 1e-6.
        #[arg(long)]
        verify: bool,
    },

    /// Sample the gain curve for a pair and write it as CSV.
    GainCurve {
        #[command(flatten)]
        files: StateArgs,

        /// Oriented pair, e.g. `T0,T1`.
        #[arg(long)]
        pair: String,

        /// Account executing the hypothetical swaps.
        #[arg(long)]
        sender: String,

        #[arg(long)]
        x_min: f64,

        #[arg(long)]
        x_max: f64,

        #[arg(long)]
        steps: usize,

        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },

    /// Differential-check integer swap arithmetic against the real model.
    UniswapCheck {
        /// JSON file with an array of {amount_in, reserve_in, reserve_out}.
        #[arg(long, conflicts_with_all = ["random", "seed"])]
        cases: Option<PathBuf>,

        /// Number of random cases to generate.
        #[arg(long, requires = "seed")]
        random: Option<usize>,

        /// Seed for the random case generator.
        #[arg(long)]
        seed: Option<u64>,
    },
}

enum CliError {
    /// Bad input: unreadable files, parse failures, violated invariants.
    Input(String),
    /// A trace transaction was not enabled in its state.
    Disabled { step: usize, reason: String },
    /// An independent check disagreed with a computed result.
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Disabled { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Input(m) => m.clone(),
            CliError::Disabled { step, reason } => {
                format!("step {step}: transaction disabled: {reason}")
            }
            CliError::Verification(m) => m.clone(),
        }
    }
}

impl From<AmmError> for CliError {
    fn from(e: AmmError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Formats with 12 significant digits, plain decimal where readable.
fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        format!("{x:.11e}")
    } else {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Rounds a value to 12 significant digits.
fn round_sig(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Rounds every number in a JSON tree to 12 significant digits.
fn round_numbers(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    *value = serde_json::json!(round_sig(f));
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_numbers),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn read_file(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_state(files: &StateArgs) -> Result<(SystemState, PriceOracle), CliError> {
    let state = state_from_json(&read_file(&files.state)?)?;
    let oracle = oracle_from_json(&read_file(&files.oracle)?)?;
    Ok((state, oracle))
}

fn parse_pair(pair: &str) -> Result<(TokenId, TokenId), CliError> {
    let parts: Vec<&str> = pair.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Input(format!(
            "pair must be written as `A,B`, got {pair:?}"
        )));
    }
    Ok((TokenId::new(parts[0])?, TokenId::new(parts[1])?))
}

fn state_line(state: &SystemState) -> String {
    let mut doc = state_to_json(state);
    round_numbers(&mut doc);
    doc.to_string()
}

fn cmd_simulate(files: StateArgs, trace_path: PathBuf) -> Result<(), CliError> {
    let (mut state, oracle) = load_state(&files)?;
    let trace = trace_from_json(&read_file(&trace_path)?)?;
    for (step, tx) in trace.iter().enumerate() {
        let step_gain = gain(&state, &oracle, tx).map_err(|e| match e {
            AmmError::NoPool(..)
            | AmmError::InsufficientBalance { .. }
            | AmmError::NonPositiveAmount => CliError::Disabled {
                step,
                reason: e.to_string(),
            },
            other => CliError::Input(other.to_string()),
        })?;
        state = execute_swap(&state, tx).expect("swap enabled above");
        println!(
            "step {step}: {} swaps {} {} -> {}",
            tx.sender(),
            fmt_sig(tx.amount_in()),
            tx.token_in(),
            tx.token_out()
        );
        println!("  gain {}", fmt_sig(step_gain));
        println!("  state {}", state_line(&state));
    }
    println!("final {}", state_line(&state));
    Ok(())
}

fn cmd_rate(files: StateArgs, pair: String) -> Result<(), CliError> {
    let (state, oracle) = load_state(&files)?;
    let (t_in, t_out) = parse_pair(&pair)?;
    let internal = pool_internal_rate(&state, &t_in, &t_out)?.value();
    let external = external_rate(&oracle, &t_in, &t_out)?.value();
    println!("internal {}", fmt_sig(internal));
    println!("external {}", fmt_sig(external));
    println!("relative gap {}", fmt_sig((internal - external).abs() / external));
    Ok(())
}

fn cmd_arbitrage(
    files: StateArgs,
    pair: String,
    sender: String,
    verify: bool,
) -> Result<(), CliError> {
    let (state, oracle) = load_state(&files)?;
    let (a, b) = parse_pair(&pair)?;
    let solution = solve_arbitrage(&state, &oracle, &a, &b, &sender)?;
    let mut doc = serde_json::to_value(&solution).expect("solution serializes");
    round_numbers(&mut doc);
    println!("{doc}");

    if verify {
        let Some(x_max) = solution.x_max else {
            println!("verify: no profitable direction, nothing to check");
            return Ok(());
        };
        let x_equil = solution.x_equil.expect("x_equil accompanies x_max");
        let (t_in, t_out) = solution.direction.clone();
        let view = state
            .lookup_pool(&t_in, &t_out)
            .expect("solution direction has a pool");
        let p_in = oracle.price_or_err(&t_in)?;
        let p_out = oracle.price_or_err(&t_out)?;
        let g = |x: f64| {
            -p_in * x
                + p_out * swap_output(view.fee, x, view.reserve_in, view.reserve_out).unwrap()
        };
        let hi = x_equil / view.fee.value() + x_equil.max(1.0);
        let (x_star, _) = golden_max(g, 0.0, hi, 1e-10)
            .map_err(|e| CliError::Verification(format!("maximizer search failed: {e}")))?;
        let discrepancy = (x_star - x_max).abs() / x_max;
        println!("verify: golden-section discrepancy {}", fmt_sig(discrepancy));
        if discrepancy > 1e-6 {
            return Err(CliError::Verification(format!(
                "closed form {x_max} disagrees with search {x_star} (relative {discrepancy:e})"
            )));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gain_curve(
    files: StateArgs,
    pair: String,
    sender: String,
    x_min: f64,
    x_max: f64,
    steps: usize,
    out: PathBuf,
) -> Result<(), CliError> {
    let (state, oracle) = load_state(&files)?;
    let (t_in, t_out) = parse_pair(&pair)?;
    let points = gain_curve(&state, &oracle, &sender, &t_in, &t_out, x_min, x_max, steps)?;
    let mut csv = gain_curve_csv(&points);

    // Vertical-marker metadata rows for plotting tools.
    let solution = solve_arbitrage(&state, &oracle, &t_in, &t_out, &sender)?;
    if solution.direction == (t_in.clone(), t_out.clone()) {
        if let Some(x) = solution.x_equil {
            csv.push_str(&format!("# x_equil,{x}\n"));
        }
        if let Some(x) = solution.x_max {
            csv.push_str(&format!("# x_max,{x}\n"));
        }
    }
    fs::write(&out, csv).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    println!("wrote {} samples to {}", points.len(), out.display());
    Ok(())
}

fn cmd_uniswap_check(
    cases_path: Option<PathBuf>,
    random: Option<usize>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let cases: Vec<SwapCase> = match (cases_path, random) {
        (Some(path), None) => serde_json::from_str(&read_file(&path)?)
            .map_err(|e| CliError::Input(format!("case file: {e}")))?,
        (None, Some(count)) => random_cases(seed.expect("clap enforces --seed"), count),
        _ => {
            return Err(CliError::Input(
                "pass exactly one of --cases or --random N --seed S".into(),
            ))
        }
    };

    let mut records = Vec::with_capacity(cases.len());
    let mut max_divergence: i64 = 0;
    let mut k_failures = 0usize;
    for (i, case) in cases.iter().enumerate() {
        let record = run_case(case)
            .map_err(|e| CliError::Input(format!("case {i}: {e}")))?;
        let k_ok = post_swap_k_holds(case, &record.integer_out)
            .map_err(|e| CliError::Input(format!("case {i}: {e}")))?;
        max_divergence = max_divergence.max(record.divergence.abs());
        if !k_ok {
            k_failures += 1;
        }
        records.push(record);
    }
    println!(
        "{}",
        serde_json::to_string(&records).expect("records serialize")
    );
    eprintln!(
        "checked {} cases: max |divergence| {max_divergence}, K-check failures {k_failures}",
        records.len()
    );
    if max_divergence > 1 || k_failures > 0 {
        return Err(CliError::Verification(format!(
            "integer path diverges from the real model: max |divergence| {max_divergence}, K-check failures {k_failures}"
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { files, trace } => cmd_simulate(files, trace),
        Command::Rate { files, pair } => cmd_rate(files, pair),
        Command::Arbitrage { files, pair, sender, verify } => {
            cmd_arbitrage(files, pair, sender, verify)
        }
        Command::GainCurve { files, pair, sender, x_min, x_max, steps, out } => {
            cmd_gain_curve(files, pair, sender, x_min, x_max, steps, out)
        }
        Command::UniswapCheck { cases, random, seed } => cmd_uniswap_check(cases, random, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
