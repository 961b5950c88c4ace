use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lamplighter_core::analytic::{self, BoundsReport, ModelParams};
use lamplighter_core::geodesic::{self, DEFAULT_STATE_CAP};
use lamplighter_core::montecarlo::{self, SimulationRequest};
use lamplighter_core::verify::{self, Suite, VerifyConfig};
use lamplighter_core::{table, Error, ModelKind, ModelSpec};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_BAD_ARGS: u8 = 2;
const EXIT_RESOURCE_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lamplighter",
    version,
    about = "Drift bounds and simulation for lamplighter walks on homogeneous trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form bounds for one (q, p)
    Bounds {
        #[arg(long)]
        q: u32,
        /// Switch probability; decimals or fractions such as 2/3
        #[arg(long, value_parser = parse_probability)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of the sixteen reference rows
    Table {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimates as JSON
    Simulate(SimulateArgs),
    /// Run the self-check suites
    Verify {
        /// Run only these suites (repeatable)
        #[arg(long, value_parser = parse_suite)]
        only: Vec<Suite>,
        /// Evaluate the table with the displayed closed form of Ghat (fault injection)
        #[arg(long)]
        displayed_ghat: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, env = "LAMPLIGHTER_THREADS")]
        threads: Option<usize>,
    },
    /// Compare closed-form lengths with breadth-first search
    Oracle {
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        q: u32,
        /// Lamp states (multi-state model only)
        #[arg(long)]
        r: Option<u8>,
        #[arg(long)]
        radius: u32,
        /// Maximum number of group elements to enumerate
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: usize,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    q: u32,
    #[arg(long, value_parser = parse_probability)]
    p: f64,
    /// Lamp states (multi-state model); defaults to alpha length + 1, or 3
    #[arg(long)]
    r: Option<u8>,
    /// Comma-separated switch weights summing to p; defaults to p/(r−1) each
    #[arg(long, value_delimiter = ',', value_parser = parse_probability)]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate boundary statistics (wos only)
    #[arg(long)]
    boundary_stats: bool,
    #[arg(long, default_value_t = 30)]
    ball_radius: u32,
    /// Estimate exit times and pseudo-increments (sws only)
    #[arg(long)]
    exit_stats: bool,
    /// Steps required after an exit time; defaults to 10·q
    #[arg(long)]
    horizon_buffer: Option<usize>,
    #[arg(long, env = "LAMPLIGHTER_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

/// Accepts `0.25`, `1/4` or `1`.
fn parse_probability(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: u64 = num
                .trim()
                .parse()
                .map_err(|e| format!("bad numerator: {e}"))?;
            let den: u64 = den
                .trim()
                .parse()
                .map_err(|e| format!("bad denominator: {e}"))?;
            if den == 0 {
                return Err("zero denominator".into());
            }
            num as f64 / den as f64
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Io(io::Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn multi_state_model(q: u32, p: f64, r: Option<u8>, alpha: Vec<f64>) -> Result<ModelSpec, Error> {
    let alpha = if alpha.is_empty() {
        let r = r.unwrap_or(3);
        if r < 2 {
            return Err(Error::InvalidParameter(format!("r must be ≥ 2, got {r}")));
        }
        vec![p / (r - 1) as f64; r as usize - 1]
    } else {
        if let Some(r) = r.filter(|&r| r as usize != alpha.len() + 1) {
            return Err(Error::InvalidParameter(format!(
                "r = {r} needs {} switch weights, got {}",
                r.saturating_sub(1),
                alpha.len()
            )));
        }
        alpha
    };
    ModelSpec::multi_state(q, p, alpha)
}

fn build_model(
    kind: ModelKind,
    q: u32,
    p: f64,
    r: Option<u8>,
    alpha: Vec<f64>,
) -> Result<ModelSpec, Error> {
    if kind != ModelKind::MultiState && (r.is_some_and(|r| r != 2) || !alpha.is_empty()) {
        return Err(Error::InvalidParameter(format!(
            "--r and --alpha apply to the multi model only, not {kind}"
        )));
    }
    match kind {
        ModelKind::MultiState => multi_state_model(q, p, r, alpha),
        _ => ModelSpec::from_kind(kind, q, p, Vec::new()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds { q, p, format, out } => {
            let report = analytic::bounds_report(ModelParams::new(q, p)?)?;
            let text = match format {
                Format::Csv => format!("{}\n{}\n", BoundsReport::CSV_HEADER, report.csv_row()),
                _ => to_json(&report),
            };
            emit(out.as_ref(), &text)?;
        }
        Command::Table { out } => emit(out.as_ref(), &table::table_csv()?)?,
        Command::Simulate(args) => simulate(args)?,
        Command::Verify {
            only,
            displayed_ghat,
            format,
            threads,
        } => {
            let suites = if only.is_empty() {
                Suite::ALL.to_vec()
            } else {
                only
            };
            let config = VerifyConfig {
                displayed_g_hat: displayed_ghat,
                ..VerifyConfig::default()
            };
            let checks = montecarlo::in_pool(threads, || verify::run_suites(&suites, &config))??;
            let failed = checks.iter().filter(|c| !c.pass).count();
            let text = match format {
                Format::Json => to_json(&checks),
                _ => {
                    let mut s: String = checks.iter().map(|c| format!("{c}\n")).collect();
                    s.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
                    s
                }
            };
            emit(None, &text)?;
            if failed > 0 {
                return Err(Failure::Verification(format!("{failed} checks failed")));
            }
        }
        Command::Oracle {
            model,
            q,
            r,
            radius,
            cap,
        } => {
            let spec = build_model(model, q, 0.5, r, Vec::new())?;
            let report = geodesic::oracle_check(&spec, radius, cap)?;
            let mut text = String::new();
            for m in &report.mismatches {
                text.push_str(&serde_json::to_string(m).expect("mismatches serialize"));
                text.push('\n');
            }
            text.push_str(&format!(
                "{} mismatches ({} elements within radius {radius})\n",
                report.mismatches.len(),
                report.elements
            ));
            emit(None, &text)?;
            if !report.mismatches.is_empty() {
                return Err(Failure::Verification(format!(
                    "{} mismatches",
                    report.mismatches.len()
                )));
            }
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let model = build_model(args.model, args.q, args.p, args.r, args.alpha)?;
    if args.boundary_stats && model.kind != ModelKind::WalkOrSwitch {
        return Err(Error::InvalidArgument("--boundary-stats needs --model wos".into()).into());
    }
    if args.exit_stats && model.kind != ModelKind::SwitchWalkSwitch {
        return Err(Error::InvalidArgument("--exit-stats needs --model sws".into()).into());
    }
    let request = SimulationRequest {
        n_steps: args.steps,
        n_trials: args.trials,
        base_seed: args.seed,
        ball_radius: args.boundary_stats.then_some(args.ball_radius),
        horizon_buffer: args.exit_stats.then(|| {
            args.horizon_buffer
                .unwrap_or(SimulationRequest::default_horizon_buffer(model.q))
        }),
        model,
    };
    let report = montecarlo::in_pool(args.threads, || montecarlo::simulate(&request))??;
    if let Some(boundary) = &report.estimates.boundary {
        for w in &boundary.warnings {
            eprintln!("warning: {w}");
        }
    }
    emit(args.out.as_ref(), &to_json(&report))?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceLimit { .. } => EXIT_RESOURCE_LIMIT,
                _ => EXIT_BAD_ARGS,
            })
        }
    }
}
