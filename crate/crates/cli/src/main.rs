//! Command-line front end: compute invariants on state files, run the
//! certification suites, sweep the monotonicity inequality and demo the
//! eta > 4 violating family.
//!
//! Exit codes: 0 success (or all suites pass), 1 verification failure,
//! 2 usage or I/O error.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use qtangle::harness::{run_suites, Suite, SuiteReport};
use qtangle::{
    construct_violation, ghz, n_tangle, random_state, sweep, violation_ratio, w_state,
    write_sweep_csv, Invariant, PureState, SweepRecord,
};

const INDEX_CONVENTION: &str = "State files are JSON: {\"dims\": [d1, ..., dN], \"amps\": [[re, im], ...]} \
with amplitudes in flat big-endian order: amps[k] = a_{i1...iN} where \
k = sum_j i_j * prod_{m>j} d_m, so party 1 is the most significant digit. \
Party positions in invariant names (b:1,2 / det:1 / gconc:1,3) are 1-based.";

#[derive(Parser)]
#[command(name = "qtangle", version, about = "Polynomial SLOCC invariants of pure multipartite states", long_about = None, after_long_help = INDEX_CONVENTION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an invariant on a state file.
    Compute {
        /// Path to the JSON state file.
        #[arg(long)]
        state: PathBuf,
        /// Invariant name: tau | conc | b:i[,j] | lmn | det:PARTIES | gconc:PARTIES.
        #[arg(long)]
        invariant: String,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        output: OutputFormat,
    },
    /// Run certification suites; exit 0 iff all pass.
    Verify {
        /// all | invariance | homogeneity | identities | monotone | rank.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Trials per suite (per-suite defaults when omitted).
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Tolerance override (per-suite defaults when omitted).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sweep the monotonicity inequality over an (a, b, x) grid.
    Sweep {
        /// Comma-separated homogeneity degrees.
        #[arg(long, value_delimiter = ',', required = true)]
        etas: Vec<f64>,
        /// Points per axis of the open grid i/(R+1), i = 1..=R.
        #[arg(long, default_value_t = 50)]
        grid: usize,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Demonstrate the eta > 4 violating family at one parameter point.
    Violate {
        /// Homogeneity degree of the invariant function.
        #[arg(long)]
        eta: f64,
        /// Branch weight beta of the test state, 0 < beta < 1/sqrt(2).
        #[arg(long)]
        beta: f64,
        /// Number of qubits.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Write a standard or random state file.
    Gen {
        /// ghz | w | bell | random.
        #[arg(long)]
        state: String,
        /// Number of qubits (bell fixes 2).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Compute {
            state,
            invariant,
            output,
        } => cmd_compute(&state, &invariant, output),
        Command::Verify {
            suite,
            trials,
            seed,
            tol,
        } => cmd_verify(&suite, trials, seed, tol),
        Command::Sweep { etas, grid, out } => cmd_sweep(&etas, grid, &out),
        Command::Violate { eta, beta, n } => cmd_violate(eta, beta, n),
        Command::Gen {
            state,
            n,
            seed,
            out,
        } => cmd_gen(&state, n, seed, &out),
    }
}

fn load_state(path: &PathBuf) -> Result<PureState> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    PureState::from_json_reader(BufReader::new(file))
        .with_context(|| format!("cannot parse state file {}", path.display()))
}

fn fmt_c(v: Complex64) -> String {
    format!("[{:.16e}, {:.16e}]", v.re, v.im)
}

fn cmd_compute(path: &PathBuf, name: &str, output: OutputFormat) -> Result<ExitCode> {
    let state = load_state(path)?;
    let invariant = Invariant::from_str(name)?;
    let degree = invariant.degree(state.dims())?;
    let components = invariant.evaluate(&state)?;

    // det-family invariants carry the reduced-determinant cross-check
    let det_check = match &invariant {
        Invariant::Det(left) | Invariant::GConcurrence(left) => {
            let nu = qtangle::det_invariant(&state, left)?;
            let rho_det = state.partial_trace(left)?.det().re;
            Some((nu.norm_sqr(), rho_det))
        }
        Invariant::LuqueThibon => None,
        _ => None,
    };

    match output {
        OutputFormat::Text => {
            for (label, value) in &components {
                if invariant.is_real_valued() {
                    println!("{label} = {:.16e} (degree {degree})", value.re);
                } else {
                    println!("{label} = {} (degree {degree})", fmt_c(*value));
                }
            }
            if let Invariant::LuqueThibon = invariant {
                let sum: Complex64 = components.iter().map(|(_, v)| *v).sum();
                println!("|L+M+N| = {:.3e}", sum.norm());
            }
            if let Some((abs_sq, rho_det)) = det_check {
                println!("|nu|^2 = {abs_sq:.16e}");
                println!("det rho = {rho_det:.16e}");
                println!("residual = {:.3e}", (abs_sq - rho_det).abs());
            }
        }
        OutputFormat::Json => {
            let values: serde_json::Map<String, serde_json::Value> = components
                .iter()
                .map(|(label, v)| {
                    (
                        label.clone(),
                        serde_json::json!([v.re, v.im]),
                    )
                })
                .collect();
            let mut report = serde_json::json!({
                "invariant": name,
                "degree": degree,
                "values": values,
            });
            if let Some((abs_sq, rho_det)) = det_check {
                report["abs_value_sq"] = serde_json::json!(abs_sq);
                report["det_rho"] = serde_json::json!(rho_det);
            }
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(suite: &str, trials: Option<usize>, seed: u64, tol: Option<f64>) -> Result<ExitCode> {
    let selection = Suite::from_str(suite)?;
    let reports: Vec<SuiteReport> = run_suites(selection, trials, seed, tol)?;
    let pass = reports.iter().all(|r| r.pass);
    let out = serde_json::json!({
        "pass": pass,
        "suites": reports,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(etas: &[f64], grid: usize, out: &PathBuf) -> Result<ExitCode> {
    let records = sweep(etas, grid)?;
    let file =
        File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    write_sweep_csv(&records, &mut writer)?;
    writer.flush()?;

    for &eta in etas {
        let block: Vec<&SweepRecord> = records.iter().filter(|r| r.eta == eta).collect();
        let holds = block.iter().filter(|r| r.holds).count();
        let violations = block.len() - holds;
        let max_rhs = block.iter().map(|r| r.rhs).fold(f64::NEG_INFINITY, f64::max);
        println!(
            "eta={eta}: {} points, {holds} hold, {violations} violations, max rhs = {max_rhs:.12}",
            block.len()
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_violate(eta: f64, beta: f64, n: usize) -> Result<ExitCode> {
    if !eta.is_finite() || eta <= 0.0 {
        bail!("--eta must be positive, got {eta}");
    }
    if !(beta > 0.0 && beta < std::f64::consts::FRAC_1_SQRT_2) {
        bail!("--beta must lie in (0, 1/sqrt(2)), got {beta}");
    }
    if n < 2 {
        bail!("--n must be at least 2, got {n}");
    }
    let alpha = (1.0 - beta * beta).sqrt();
    // |tau_N|^(eta/4) is degree-eta homogeneous and nonzero on the family
    let eval = move |s: &PureState| Ok(n_tangle(s)?.powf(eta / 4.0));
    let report = construct_violation(alpha, beta, n, eval, eta)?;
    let closed = violation_ratio(alpha, beta, eta)?;

    println!("eta = {eta}, beta = {beta}, alpha = {alpha:.12}, qubits = {n}");
    println!("closed-form ratio    = {closed:.12}");
    println!("simulated mubar/mu0  = {:.12}", report.simulated_ratio);
    println!(
        "closed-form agreement: {}",
        if report.matches_closed_form {
            "within 1e-9 relative"
        } else {
            "MISMATCH beyond 1e-9"
        }
    );
    if report.violated {
        println!("monotonicity VIOLATED: average increased under the POVM");
    } else {
        println!("monotonicity holds for this parameter point (ratio <= 1)");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(kind: &str, n: Option<usize>, seed: u64, out: &PathBuf) -> Result<ExitCode> {
    let state = match kind {
        "ghz" => {
            let n = n.context("--n is required for ghz")?;
            ghz(n)?
        }
        "w" => {
            let n = n.context("--n is required for w")?;
            w_state(n)?
        }
        "bell" => {
            if let Some(n) = n {
                if n != 2 {
                    bail!("bell is a two-qubit state, got --n {n}");
                }
            }
            qtangle::bell()
        }
        "random" => {
            let n = n.context("--n is required for random")?;
            if n == 0 {
                bail!("--n must be positive");
            }
            random_state(&vec![2; n], seed)?
        }
        other => bail!("unknown state '{other}' (expected ghz | w | bell | random)"),
    };
    let file =
        File::create(out).with_context(|| format!("cannot write {}", out.display()))?;
    let mut writer = BufWriter::new(file);
    state.to_json_writer(&mut writer)?;
    writer.flush()?;
    Ok(ExitCode::SUCCESS)
}
