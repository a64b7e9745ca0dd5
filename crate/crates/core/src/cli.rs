//! Command-line front end. Output is a pure function of the flags.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use crate::helstrom::{self, HelstromConfig};
use crate::model::{Beamsplitter, DiscriminationResult, PulsePair};
use crate::montecarlo::{self, DecisionRule, TrialConfig};
use crate::receivers;
use crate::scan::{self, format_significant, FigureRequest, SIGNIFICANT_DIGITS};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping worker threads; 0 or unset means automatic.
pub const THREADS_ENV: &str = "PHASEKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "phasekit",
    version,
    about = "Discrimination of opposite-phase weak coherent pulses with a finite phase reference"
)]
struct Cli {
    /// Also print tail tolerances and truncation bounds.
    #[arg(long, global = true)]
    quote_tolerances: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generalized (or asymptotic) Kennedy receiver.
    Kennedy(ReceiverArgs),
    /// Generalized (or asymptotic) homodyne receiver.
    Homodyne(ReceiverArgs),
    /// Maximum-likelihood receiver behind an arbitrary beamsplitter.
    Bsclass(BsArgs),
    /// Minimum-error (Helstrom) bound.
    Optimum(OptimumArgs),
    /// Monte Carlo estimate of a receiver's error rate.
    Montecarlo(MonteCarloArgs),
    /// Data table behind one of the standard figures.
    Figure(FigureArgs),
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a finite non-negative number"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must lie strictly between 0 and 1"))
    }
}

#[derive(Debug, Args)]
struct ReceiverArgs {
    /// Mean photon number of the signal.
    #[arg(long, value_parser = non_negative)]
    alpha2: f64,
    /// Mean photon number of the reference.
    #[arg(long, value_parser = non_negative, required_unless_present = "asymptotic", conflicts_with = "asymptotic")]
    beta2: Option<f64>,
    /// Infinitely strong reference.
    #[arg(long)]
    asymptotic: bool,
    #[arg(long, value_parser = probability, default_value_t = receivers::DEFAULT_TAIL_TOL)]
    tail_tol: f64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("angle").required(true).args(["phi_over_pi", "optimize"])))]
struct BsArgs {
    #[arg(long, value_parser = non_negative)]
    alpha2: f64,
    #[arg(long, value_parser = non_negative)]
    beta2: f64,
    /// Splitter angle in units of pi, within [0, 0.25].
    #[arg(long)]
    phi_over_pi: Option<f64>,
    /// Search the family for the best angle.
    #[arg(long)]
    optimize: bool,
    #[arg(long, default_value_t = 256)]
    grid_points: usize,
    #[arg(long, value_parser = probability, default_value_t = receivers::DEFAULT_TAIL_TOL)]
    tail_tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OptimumMethod {
    Exact,
    SmallAlpha,
}

#[derive(Debug, Args)]
struct OptimumArgs {
    #[arg(long, value_parser = non_negative)]
    alpha2: f64,
    #[arg(long, value_parser = non_negative)]
    beta2: f64,
    #[arg(long, value_parser = probability, default_value_t = helstrom::DEFAULT_TAIL_TOL)]
    tail_tol: f64,
    #[arg(long, value_enum, default_value_t = OptimumMethod::Exact)]
    method: OptimumMethod,
    /// Ceiling on the total photon number of the truncated basis.
    #[arg(long, default_value_t = HelstromConfig::default().max_photons)]
    max_photons: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Ml,
    Kennedy,
    Homodyne,
}

impl From<RuleArg> for DecisionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Ml => DecisionRule::MlJoint,
            RuleArg::Kennedy => DecisionRule::KennedySinglePort,
            RuleArg::Homodyne => DecisionRule::HomodyneCompare,
        }
    }
}

#[derive(Debug, Args)]
struct MonteCarloArgs {
    #[arg(long, value_parser = non_negative)]
    alpha2: f64,
    #[arg(long, value_parser = non_negative)]
    beta2: f64,
    /// Splitter angle in units of pi; defaults to the rule's own angle.
    #[arg(long)]
    phi_over_pi: Option<f64>,
    #[arg(long, value_enum, default_value_t = RuleArg::Ml)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Draw a fresh common phase for signal and reference each trial.
    #[arg(long)]
    random_phase: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct FigureArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    id: u8,
    /// Signal intensities (figures 1-2: grid; 3-4: single value; 5: exact cross-check value).
    #[arg(long, value_delimiter = ',', value_parser = non_negative)]
    alpha2: Option<Vec<f64>>,
    /// Reference intensities (figures 1-2 and 5: list; 3-4: single value).
    #[arg(long, value_delimiter = ',', value_parser = non_negative)]
    beta2: Option<Vec<f64>>,
    #[arg(long)]
    n_angles: Option<usize>,
    #[arg(long, value_parser = probability)]
    tail_tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn g(x: f64) -> String {
    format_significant(x, SIGNIFICANT_DIGITS)
}

fn write_result(out: &mut dyn Write, r: &DiscriminationResult, quote: bool) -> std::io::Result<()> {
    writeln!(out, "method = {}", r.method.label())?;
    writeln!(out, "P = {}", g(r.error_probability))?;
    writeln!(out, "D = {}", g(r.distinguishability))?;
    if r.accuracy.degenerate {
        writeln!(out, "degenerate = true")?;
    }
    if quote {
        if let Some(tol) = r.accuracy.tail_tol {
            writeln!(out, "tail_tol = {}", g(tol))?;
        }
        writeln!(out, "truncation_bound = {}", g(r.accuracy.truncation_bound))?;
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut Vec<u8>) -> Result<(), Failure> {
    let quote = cli.quote_tolerances;
    match cli.command {
        Command::Kennedy(a) => {
            let r = match a.beta2 {
                None => receivers::p_kennedy_asymptotic(a.alpha2)?,
                Some(b2) => receivers::p_kennedy_generalized(&PulsePair::new(a.alpha2, b2)?),
            };
            write_result(out, &r, quote)?;
        }
        Command::Homodyne(a) => {
            let r = match a.beta2 {
                None => receivers::p_homodyne_asymptotic(a.alpha2)?,
                Some(b2) => {
                    receivers::p_homodyne_generalized(&PulsePair::new(a.alpha2, b2)?, a.tail_tol)?
                }
            };
            write_result(out, &r, quote)?;
        }
        Command::Bsclass(a) => {
            let p = PulsePair::new(a.alpha2, a.beta2)?;
            let (bs, r) = match a.phi_over_pi {
                Some(x) => {
                    let bs = Beamsplitter::from_phi_over_pi(x)?;
                    (bs, receivers::p_beamsplitter_ml(&p, &bs, a.tail_tol)?)
                }
                None => receivers::best_angle(&p, a.grid_points, a.tail_tol)?,
            };
            writeln!(out, "phi_over_pi = {}", g(bs.phi_over_pi()))?;
            write_result(out, &r, quote)?;
        }
        Command::Optimum(a) => {
            let p = PulsePair::new(a.alpha2, a.beta2)?;
            let r = match a.method {
                OptimumMethod::Exact => helstrom::p_err_optimal(
                    &p,
                    &HelstromConfig {
                        tail_tol: a.tail_tol,
                        max_photons: a.max_photons,
                    },
                )?,
                OptimumMethod::SmallAlpha => helstrom::p_err_small_alpha(&p)?,
            };
            writeln!(out, "method = {}", r.method.label())?;
            writeln!(out, "P_err = {}", g(r.error_probability))?;
            writeln!(out, "D_err = {}", g(r.distinguishability))?;
            let n = r.accuracy.max_photons.unwrap_or(0);
            match a.method {
                OptimumMethod::Exact => writeln!(out, "N_max = {n}")?,
                OptimumMethod::SmallAlpha => writeln!(out, "n_cut = {}", n.saturating_sub(1))?,
            }
            if quote {
                if let Some(tol) = r.accuracy.tail_tol {
                    writeln!(out, "tail_tol = {}", g(tol))?;
                }
                writeln!(out, "truncation_bound = {}", g(r.accuracy.truncation_bound))?;
            }
        }
        Command::Montecarlo(a) => {
            let p = PulsePair::new(a.alpha2, a.beta2)?;
            let rule = DecisionRule::from(a.rule);
            let bs = match a.phi_over_pi {
                Some(x) => Beamsplitter::from_phi_over_pi(x)?,
                None => montecarlo::default_splitter(rule, &p)?,
            };
            let cfg = TrialConfig::new(p, bs, rule, a.trials, a.seed)?
                .with_random_global_phase(a.random_phase);
            let e = montecarlo::run_trials(&cfg)?;
            let rule_label = serde_json::to_value(rule)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default();
            writeln!(out, "rule = {rule_label}")?;
            writeln!(out, "phi_over_pi = {}", g(bs.phi_over_pi()))?;
            writeln!(out, "trials = {}", e.trials)?;
            writeln!(out, "seed = {}", e.seed)?;
            writeln!(out, "errors = {}", e.errors)?;
            writeln!(
                out,
                "estimate = {} ± {}",
                g(e.rate),
                g(montecarlo::Z_99 * e.standard_error)
            )?;
            writeln!(out, "standard_error = {}", g(e.standard_error))?;
            writeln!(out, "ci99 = [{}, {}]", g(e.ci_low), g(e.ci_high))?;
        }
        Command::Figure(a) => {
            let req = FigureRequest {
                id: a.id,
                alpha2: a.alpha2,
                beta2: a.beta2,
                n_angles: a.n_angles,
                tail_tol: a.tail_tol,
            };
            let table = scan::build_figure(&req)?;
            let text = match a.format {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json(),
            };
            match a.out {
                Some(path) => std::fs::write(path, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let outcome = match builder.build() {
        Ok(pool) => pool.install(|| {
            let mut buf = Vec::new();
            execute(cli, &mut buf).map(|()| buf)
        }),
        Err(e) => Err(Failure::Io(std::io::Error::other(e))),
    };
    let outcome = outcome.and_then(|buf| out.write_all(&buf).map_err(Failure::Io));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical_resource() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            }
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_IO
        }
    }
}
