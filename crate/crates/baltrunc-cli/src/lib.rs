//! Command-line front end for the balanced-truncation library.
//!
//! `cli_main` is the whole program behind an injectable interface — argv in,
//! exit code out, output on the supplied streams — so the full command
//! surface is testable in-process. The `main` binary is a thin wrapper.
//!
//! Exit codes: 0 success (or verification passed), 1 usage error, 2 invalid
//! input (unreadable, unparseable, or invalid files and arguments), 3
//! numerical failure (instability, lost rank, no spectral gap, ...), 4
//! verification failed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use baltrunc::analysis::{frequency_sweep, simulate, verify_bound};
use baltrunc::error::Error;
use baltrunc::io::{
    format_g17, gen_example, load_model, load_report, load_signal, save_model, save_model_file,
    save_report, save_signal, ExampleKind, GenParams, ModelFile,
};
use baltrunc::linalg::default_rank_tol;
use baltrunc::realization::minimal_realization;
use baltrunc::reduction::{
    balanced_truncation, hankel_singular_values, OrderCriterion, ReductionOptions,
};
use baltrunc::statespace::is_stable;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

#[derive(Parser)]
#[command(
    name = "baltrunc",
    version,
    about = "Balanced truncation for continuous-time LTI state-space models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print order, dimensions, stability, and spectral abscissa
    Info {
        /// Model file (JSON)
        model: PathBuf,
    },
    /// Write a minimal realization and print the subspace dimensions
    Minreal {
        model: PathBuf,
        /// Output model file
        #[arg(short, long)]
        output: PathBuf,
        /// Relative rank tolerance (overrides BALTRUNC_TOL)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Print the Hankel singular values, largest first
    Hsv {
        model: PathBuf,
        /// Also write the values as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the full reduction pipeline and write the reduced model
    Reduce {
        model: PathBuf,
        /// Output model file
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        criterion: CriterionArgs,
        /// Also write the reduction report as JSON
        #[arg(long)]
        report: Option<PathBuf>,
        /// Relative rank tolerance (overrides BALTRUNC_TOL)
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Sample the frequency response onto a log grid and write CSV
    Bode {
        model: PathBuf,
        /// Lowest frequency (rad/time; 0 prepends the static response)
        #[arg(long)]
        wmin: f64,
        /// Highest frequency (rad/time)
        #[arg(long)]
        wmax: f64,
        /// Number of log-spaced grid points
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Output CSV file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Simulate the response to a sampled input signal
    Simulate {
        model: PathBuf,
        /// Input signal CSV (time column plus one column per input)
        #[arg(long)]
        input: PathBuf,
        /// File of initial-state values (defaults to the origin)
        #[arg(long)]
        x0: Option<PathBuf>,
        /// Output signal CSV
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check a reduction against its error bounds; exits 0 iff it passes
    Verify {
        full: PathBuf,
        reduced: PathBuf,
        /// Reduction report (JSON written by `reduce --report`)
        #[arg(long)]
        report: PathBuf,
        /// Number of random time-domain trials
        #[arg(long, default_value_t = 12)]
        trials: usize,
        /// Seed for the trial inputs
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate an example system and write it as a model file
    Gen {
        /// random_stable, mass_spring_chain, or rc_ladder
        #[arg(long)]
        kind: String,
        /// States (random_stable), masses (chain), or sections (ladder)
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output model file
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Exactly one of these picks the reduced order.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct CriterionArgs {
    /// Keep exactly this many states
    #[arg(long)]
    order: Option<usize>,
    /// Keep as few states as the guaranteed error bound allows
    #[arg(long)]
    error: Option<f64>,
    /// Keep states with singular values at least this fraction of the largest
    #[arg(long)]
    floor: Option<f64>,
}

impl CriterionArgs {
    fn to_criterion(&self) -> OrderCriterion {
        match (self.order, self.error, self.floor) {
            (Some(r), None, None) => OrderCriterion::ExplicitOrder(r),
            (None, Some(eps), None) => OrderCriterion::ErrorBudget(eps),
            (None, None, Some(rho)) => OrderCriterion::RelativeFloor(rho),
            _ => unreachable!("clap enforces exactly one criterion flag"),
        }
    }
}

/// Run the CLI against explicit argv and streams; returns the exit code.
pub fn cli_main(argv: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match run(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ParseError { .. }
        | Error::InvalidModel(_)
        | Error::InvalidArgument(_)
        | Error::Io(_) => EXIT_INVALID_INPUT,
        Error::ShapeMismatch { .. }
        | Error::SingularMatrix { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::NotSymmetric { .. }
        | Error::NumericalFailure { .. }
        | Error::UnstableSystem { .. }
        | Error::Resonance { .. }
        | Error::NoValidGap { .. } => EXIT_NUMERICAL,
    }
}

fn run(command: Command, stdout: &mut dyn Write) -> Result<i32, Error> {
    match command {
        Command::Info { model } => info(&model, stdout),
        Command::Minreal { model, output, tol } => minreal(&model, &output, tol, stdout),
        Command::Hsv { model, csv } => hsv(&model, csv.as_deref(), stdout),
        Command::Reduce {
            model,
            output,
            criterion,
            report,
            tol,
        } => reduce(&model, &output, &criterion, report.as_deref(), tol, stdout),
        Command::Bode {
            model,
            wmin,
            wmax,
            points,
            output,
        } => bode(&model, wmin, wmax, points, &output),
        Command::Simulate {
            model,
            input,
            x0,
            output,
        } => run_simulation(&model, &input, x0.as_deref(), &output),
        Command::Verify {
            full,
            reduced,
            report,
            trials,
            seed,
        } => verify(&full, &reduced, &report, trials, seed, stdout),
        Command::Gen {
            kind,
            size,
            seed,
            output,
        } => gen(&kind, size, seed, &output),
    }
}

/// Rank tolerance resolution: explicit flag, then BALTRUNC_TOL, then the
/// built-in default.
fn resolve_tol(flag: Option<f64>) -> Result<Option<f64>, Error> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("BALTRUNC_TOL") {
        Ok(text) => {
            let value = text.parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("BALTRUNC_TOL must be a number, got {text:?}"))
            })?;
            Ok(Some(value))
        }
        Err(_) => Ok(None),
    }
}

fn info(path: &Path, stdout: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(path)?;
    let (stable, abscissa) = is_stable(&model, 0.0)?;
    let _ = writeln!(stdout, "order: {}", model.n);
    let _ = writeln!(stdout, "inputs: {}", model.m);
    let _ = writeln!(stdout, "outputs: {}", model.p);
    let _ = writeln!(stdout, "stable: {stable}");
    let _ = writeln!(stdout, "spectral abscissa: {}", format_g17(abscissa));
    Ok(EXIT_OK)
}

fn minreal(
    path: &Path,
    output: &Path,
    tol: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<i32, Error> {
    let model = load_model(path)?;
    let tol = resolve_tol(tol)?.unwrap_or_else(|| default_rank_tol(model.n, model.n));
    let (minimal, decomposition) = minimal_realization(&model, tol)?;
    save_model(&minimal, output)?;
    let _ = writeln!(
        stdout,
        "controllable and observable: {}",
        decomposition.dim_co
    );
    let _ = writeln!(
        stdout,
        "controllable, unobservable: {}",
        decomposition.dim_cno
    );
    let _ = writeln!(
        stdout,
        "uncontrollable, observable: {}",
        decomposition.dim_nco
    );
    let _ = writeln!(
        stdout,
        "uncontrollable, unobservable: {}",
        decomposition.dim_ncno
    );
    let _ = writeln!(stdout, "minimal order: {}", minimal.n);
    Ok(EXIT_OK)
}

fn hsv(path: &Path, csv: Option<&Path>, stdout: &mut dyn Write) -> Result<i32, Error> {
    let model = load_model(path)?;
    let (values, clamped) = hankel_singular_values(&model)?;
    let _ = writeln!(stdout, "index  value");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(stdout, "{:>5}  {}", i + 1, format_g17(*v));
    }
    if clamped {
        let _ = writeln!(
            stdout,
            "note: values near the working-precision floor were clamped; the model is close to non-minimal"
        );
    }
    if let Some(csv_path) = csv {
        let mut text = String::from("index,value\n");
        for (i, v) in values.iter().enumerate() {
            text.push_str(&format!("{},{}\n", i + 1, format_g17(*v)));
        }
        std::fs::write(csv_path, text)?;
    }
    Ok(EXIT_OK)
}

fn reduce(
    path: &Path,
    output: &Path,
    criterion: &CriterionArgs,
    report_path: Option<&Path>,
    tol: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<i32, Error> {
    let model = load_model(path)?;
    let options = ReductionOptions {
        rank_tol: resolve_tol(tol)?,
    };
    let (reduced, report, _) = balanced_truncation(&model, criterion.to_criterion(), &options)?;
    save_model(&reduced, output)?;
    if let Some(report_path) = report_path {
        save_report(&report, report_path)?;
    }
    let _ = writeln!(stdout, "original order: {}", report.original_order);
    let _ = writeln!(stdout, "minimal order: {}", report.minimal_order);
    let _ = writeln!(stdout, "reduced order: {}", report.reduced_order);
    let _ = writeln!(stdout, "lower bound: {}", format_g17(report.lower_bound));
    let _ = writeln!(stdout, "upper bound: {}", format_g17(report.upper_bound));
    Ok(EXIT_OK)
}

fn bode(path: &Path, wmin: f64, wmax: f64, points: usize, output: &Path) -> Result<i32, Error> {
    let model = load_model(path)?;
    let response = frequency_sweep(&model, wmin, wmax, points)?;
    let mut text = String::from("omega");
    for i in 1..=model.p {
        for j in 1..=model.m {
            text.push_str(&format!(",re_{i}_{j},im_{i}_{j},mag_{i}_{j}"));
        }
    }
    text.push('\n');
    for (omega, value) in response.omegas.iter().zip(&response.values) {
        text.push_str(&format_g17(*omega));
        for i in 0..model.p {
            for j in 0..model.m {
                let h = value[(i, j)];
                text.push_str(&format!(
                    ",{},{},{}",
                    format_g17(h.re),
                    format_g17(h.im),
                    format_g17(h.norm())
                ));
            }
        }
        text.push('\n');
    }
    std::fs::write(output, text)?;
    Ok(EXIT_OK)
}

fn run_simulation(
    model_path: &Path,
    input_path: &Path,
    x0_path: Option<&Path>,
    output: &Path,
) -> Result<i32, Error> {
    let model = load_model(model_path)?;
    let u = load_signal(input_path)?;
    if u.channels != model.m {
        return Err(Error::InvalidArgument(format!(
            "input signal has {} channels but the model has {} inputs",
            u.channels, model.m
        )));
    }
    let x0 = match x0_path {
        Some(path) => {
            let x0 = parse_vector_file(path)?;
            if x0.len() != model.n {
                return Err(Error::InvalidArgument(format!(
                    "initial state has {} entries but the model has {} states",
                    x0.len(),
                    model.n
                )));
            }
            x0
        }
        None => vec![0.0; model.n],
    };
    let (y, _) = simulate(&model, &u, &x0)?;
    save_signal(&y, output)?;
    Ok(EXIT_OK)
}

fn parse_vector_file(path: &Path) -> Result<Vec<f64>, Error> {
    let text = std::fs::read_to_string(path)?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|piece| !piece.is_empty())
        .map(|piece| {
            piece.parse::<f64>().map_err(|e| Error::ParseError {
                context: format!("{} value {piece:?}", path.display()),
                detail: e.to_string(),
            })
        })
        .collect()
}

fn verify(
    full_path: &Path,
    reduced_path: &Path,
    report_path: &Path,
    trials: usize,
    seed: u64,
    stdout: &mut dyn Write,
) -> Result<i32, Error> {
    let full = load_model(full_path)?;
    let reduced = load_model(reduced_path)?;
    if full.m != reduced.m || full.p != reduced.p {
        return Err(Error::InvalidArgument(format!(
            "models are not conformable: {}x{} vs {}x{} outputs x inputs",
            full.p, full.m, reduced.p, reduced.m
        )));
    }
    let report = load_report(report_path)?;
    let outcome = verify_bound(&full, &reduced, &report, trials, seed)?;
    let _ = writeln!(stdout, "lower bound: {}", format_g17(outcome.lower_bound));
    let _ = writeln!(stdout, "upper bound: {}", format_g17(outcome.upper_bound));
    let _ = writeln!(
        stdout,
        "frequency error estimate: {}",
        format_g17(outcome.freq_error_estimate)
    );
    let _ = writeln!(
        stdout,
        "worst time ratio: {}",
        format_g17(outcome.worst_time_ratio)
    );
    let _ = writeln!(stdout, "trials: {}", outcome.num_trials);
    let _ = writeln!(stdout, "passed: {}", outcome.passed);
    Ok(if outcome.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn gen(kind: &str, size: usize, seed: u64, output: &Path) -> Result<i32, Error> {
    let kind: ExampleKind = kind.parse()?;
    let model = gen_example(kind, size, &GenParams::default(), seed)?;
    save_model_file(
        &ModelFile {
            model,
            label: Some(format!("{kind} size {size} seed {seed}")),
        },
        output,
    )?;
    Ok(EXIT_OK)
}
