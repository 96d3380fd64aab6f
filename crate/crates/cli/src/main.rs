//! `ur`: analyze measurement models against noise-disturbance uncertainty
//! relations.
//!
//! Exit codes: 0 when the matrix inequality holds, 2 when it fails, 1 on any
//! input or usage error.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ur_core::builtin::{self, EXAMPLE_NAMES};
use ur_core::fuzz::{self, FuzzBackend, FuzzConfig};
use ur_core::symplectic::{random_symplectic, rotated_ozawa, verdict_invariance, RotationRecord};
use ur_core::tolerance::validate_tolerance;
use ur_core::{analyze, Error, MeasurementModel, ModelFile, ReportDocument, Tolerances};

const EXIT_HOLDS: u8 = 0;
const EXIT_INPUT: u8 = 1;
const EXIT_FAILS: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ur",
    version,
    about = "Noise-disturbance uncertainty relations for measurement models"
)]
struct Cli {
    /// Sets every residual tolerance (Hermitian, unitary, norm, PSD).
    #[arg(long, global = true, env = "UR_TOL", value_parser = parse_tol)]
    tol: Option<f64>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Finite,
    Gaussian,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analyze a model file.
    Analyze { file: PathBuf },
    /// Analyze a built-in example (bae, identity, cnot).
    Example {
        name: String,
        /// Amplifier gain (bae only).
        #[arg(long)]
        gain: Option<f64>,
        /// Also write the materialized model to this path.
        #[arg(long)]
        emit_model: Option<PathBuf>,
    },
    /// Analyze a built-in example over a range of one parameter.
    Sweep {
        name: String,
        #[arg(long, default_value = "gain")]
        param: String,
        #[arg(long)]
        min: f64,
        #[arg(long)]
        max: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Run a seeded campaign over random physical models.
    Fuzz {
        #[arg(long, value_enum)]
        backend: BackendArg,
        /// Object and probe dimensions for the finite backend, e.g. 2x3.
        #[arg(long, default_value = "2x2", value_parser = parse_dims)]
        dims: (usize, usize),
        /// Object modes (and as many probe modes) for the Gaussian backend.
        #[arg(long, default_value_t = 1)]
        modes: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Campaign seed; generated and echoed when absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Random probe vectors per trial for the commutator identity.
        #[arg(long, default_value_t = 16)]
        probes: usize,
    },
    /// Symplectic covariance experiments on a single-pair model file.
    Covariance {
        file: PathBuf,
        /// Rotation angle of the noise-disturbance vector in radians.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
        angle: f64,
        /// Number of random symplectic maps for the verdict-invariance check.
        #[arg(long, default_value_t = 0)]
        random_s: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_tol(s: &str) -> Result<f64, String> {
    let tol: f64 = s.trim().parse().map_err(|e| format!("invalid tolerance `{s}`: {e}"))?;
    validate_tolerance(tol)
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected dimensions like 2x2, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|e| format!("invalid dimension `{t}`: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}

/// CLI flag or `UR_TOL`, then model-file overrides, then defaults.
fn resolve_tolerances(cli: Option<f64>, file: Option<&ModelFile>) -> Tolerances {
    let base = Tolerances::default();
    let from_file = file.and_then(ModelFile::tolerances).map_or(base, |o| o.apply(base));
    match cli {
        Some(tol) => Tolerances {
            max_dim: from_file.max_dim,
            ..Tolerances::uniform(tol)
        },
        None => from_file,
    }
}

fn fresh_seed() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64)
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(value).expect("outputs always serialize")
        ),
        Format::Text => print!("{}", text()),
    }
}

fn verdict_exit(holds: bool) -> u8 {
    if holds {
        EXIT_HOLDS
    } else {
        EXIT_FAILS
    }
}

fn load(path: &Path) -> Result<ModelFile, Error> {
    ModelFile::load(path)
}

fn report_document(model: &MeasurementModel, file: ModelFile, tol: Tolerances) -> Result<ReportDocument, Error> {
    let start = Instant::now();
    let report = analyze(model, &tol)?;
    Ok(ReportDocument::new(file, tol, report, start.elapsed().as_secs_f64()))
}

fn print_report(format: Format, doc: &ReportDocument) -> u8 {
    match format {
        Format::Json => println!("{}", doc.to_json()),
        Format::Text => print!("{}", doc.to_text()),
    }
    verdict_exit(doc.report.matrix_holds())
}

#[derive(Debug, Serialize)]
struct InvarianceSummary {
    maps: usize,
    seed: u64,
    before_psd: bool,
    unchanged: usize,
    changed: usize,
}

#[derive(Debug, Serialize)]
struct CovarianceDocument {
    model: Option<String>,
    angle: f64,
    matrix_holds: bool,
    rotation: Option<RotationRecord>,
    /// Why the rotation experiment was skipped.
    rotation_skipped: Option<String>,
    invariance: Option<InvarianceSummary>,
}

fn run(cli: Cli) -> Result<u8, Error> {
    let format = cli.format;
    match cli.command {
        Command::Analyze { file } => {
            let model_file = load(&file)?;
            let tol = resolve_tolerances(cli.tol, Some(&model_file));
            let model = model_file.to_model(&tol)?;
            let doc = report_document(&model, model_file, tol)?;
            Ok(print_report(format, &doc))
        }
        Command::Example { name, gain, emit_model } => {
            let tol = resolve_tolerances(cli.tol, None);
            let model = builtin::example(&name, gain)?;
            let file = ModelFile::from_model(&model, None, None);
            if let Some(path) = emit_model {
                std::fs::write(&path, file.to_json_pretty() + "\n")?;
            }
            let mut doc = report_document(&model, file, tol)?;
            if name == "bae" {
                doc.notes.push("object moments are the vacuum default".into());
            }
            Ok(print_report(format, &doc))
        }
        Command::Sweep {
            name,
            param,
            min,
            max,
            steps,
        } => {
            let tol = resolve_tolerances(cli.tol, None);
            let doc = builtin::sweep(&name, &param, min, max, steps, &tol)?;
            emit(format, &doc, || render::sweep_text(&doc));
            Ok(verdict_exit(doc.all_hold()))
        }
        Command::Fuzz {
            backend,
            dims,
            modes,
            trials,
            seed,
            probes,
        } => {
            let seed = seed.unwrap_or_else(|| {
                let s = fresh_seed();
                eprintln!("seed: {s}");
                s
            });
            let backend = match backend {
                BackendArg::Finite => FuzzBackend::Finite {
                    object_dim: dims.0,
                    probe_dim: dims.1,
                },
                BackendArg::Gaussian => FuzzBackend::Gaussian { modes },
            };
            let mut config = FuzzConfig::new(backend, trials, seed);
            config.probes_per_trial = probes;
            config.tolerances = resolve_tolerances(cli.tol, None);
            let summary = fuzz::run(&config)?;
            emit(format, &summary, || render::fuzz_text(&summary));
            Ok(verdict_exit(summary.physical_violations == 0))
        }
        Command::Covariance {
            file,
            angle,
            random_s,
            seed,
        } => {
            let model_file = load(&file)?;
            let tol = resolve_tolerances(cli.tol, Some(&model_file));
            let model = model_file.to_model(&tol)?;
            let report = analyze(&model, &tol)?;
            let (rotation, rotation_skipped) =
                match rotated_ozawa(&report.k_matrix, &report.gamma, &report.gexp, angle, &tol) {
                    Ok(r) => (Some(r), None),
                    Err(e @ Error::Premise { .. }) => (None, Some(e.to_string())),
                    Err(e) => return Err(e),
                };
            let invariance = if random_s > 0 {
                let seed = seed.or(model_file.seed()).unwrap_or_else(|| {
                    let s = fresh_seed();
                    eprintln!("seed: {s}");
                    s
                });
                let maps = (0..random_s as u64)
                    .map(|k| random_symplectic(report.n, seed.wrapping_add(k)))
                    .collect::<Result<Vec<_>, _>>()?;
                let pairs = verdict_invariance(&maps, &report.k_matrix, &report.gamma, &report.gexp, &tol)?;
                let unchanged = pairs.iter().filter(|(b, a)| b.is_psd == a.is_psd).count();
                Some(InvarianceSummary {
                    maps: random_s,
                    seed,
                    before_psd: report.matrix_oup.is_psd,
                    unchanged,
                    changed: random_s - unchanged,
                })
            } else {
                None
            };
            let doc = CovarianceDocument {
                model: model.name().map(str::to_string),
                angle,
                matrix_holds: report.matrix_holds(),
                rotation,
                rotation_skipped,
                invariance,
            };
            emit(format, &doc, || render::covariance_text(&doc));
            Ok(verdict_exit(doc.matrix_holds))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_HOLDS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::Domain(msg) = &e {
                if msg.starts_with("unknown example") {
                    eprintln!("available examples: {}", EXAMPLE_NAMES.join(", "));
                }
            }
            ExitCode::from(EXIT_INPUT)
        }
    }
}
