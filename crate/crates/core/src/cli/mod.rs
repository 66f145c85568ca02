//! Command-line front end.
//!
//! ```text
//! l1pca solve <matrix.csv> [--solver l1bf|fp|ao|oracle] [--k K] [--restarts L]
//!             [--seed S] [--init svsign|random] [--tol T] [--budget M]
//!             [--transpose] [--out report.json] [--threads T] [--timing]
//! l1pca experiment --name compare|sets|linefit|classify|initcdf
//!             [--config config.json] --out DIR [--threads T] [--timing]
//! l1pca replay <manifest.json> [--out PATH]
//! ```
//!
//! Exit codes: 0 success, 2 malformed input, 3 violated precondition,
//! 4 numerical failure or replay mismatch.

mod csv;
mod manifest;
mod report;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;

use crate::config::{Init, SolverConfig};
use crate::error::{Error, Result};
use crate::experiments::{
    line_fit_demo, run_comparison, run_init_cdf, run_sets, subspace_classify, ClassifyConfig, InitCdfConfig,
    LineFitConfig, SetsConfig, TrialBatch,
};
use crate::linalg::DataMatrix;
use crate::solve::{solve, Solver};

pub use csv::parse_matrix;
pub use manifest::{sha256_file, Artifact, Invocation, RunManifest};
pub use report::{round12, BasisJson, SolveReportJson};

#[derive(Parser, Debug)]
#[command(name = "l1pca", version, about = "L1-norm principal component analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    L1bf,
    Fp,
    Ao,
    Oracle,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::L1bf => Solver::L1bf,
            SolverArg::Fp => Solver::Fp,
            SolverArg::Ao => Solver::Ao,
            SolverArg::Oracle => Solver::Oracle,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    Svsign,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentName {
    Compare,
    Sets,
    Linefit,
    Classify,
    Initcdf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute K principal components of a D x N matrix (rows = dimensions).
    Solve {
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "l1bf")]
        solver: SolverArg,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// First start; defaults to random for fp and svsign otherwise.
        #[arg(long, value_enum)]
        init: Option<InitArg>,
        #[arg(long)]
        tol: Option<f64>,
        /// Flip (iteration) budget per start.
        #[arg(long)]
        budget: Option<usize>,
        /// Treat rows of the file as samples.
        #[arg(long)]
        transpose: bool,
        /// Report path; prints to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "L1PCA_THREADS")]
        threads: Option<usize>,
        /// Include wall-clock times (makes output non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Run one of the Monte-Carlo experiments and write its CSV artifacts.
    Experiment {
        #[arg(long, value_enum)]
        name: ExperimentName,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "L1PCA_THREADS")]
        threads: Option<usize>,
        #[arg(long)]
        timing: bool,
    },
    /// Re-run a recorded command and verify its artifacts.
    Replay {
        manifest: PathBuf,
        /// Output location for the re-run; defaults to the recorded one.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, env = "L1PCA_THREADS")]
        threads: Option<usize>,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match threads {
        None => f(),
        Some(0) => Err(Error::Precondition("--threads must be >= 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Input(format!("thread pool: {e}")))?
            .install(f),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Solve {
            matrix,
            solver,
            k,
            restarts,
            seed,
            init,
            tol,
            budget,
            transpose,
            out,
            threads,
            timing,
        } => {
            let invocation = Invocation::Solve {
                input: matrix.display().to_string(),
                input_sha256: sha256_file(&matrix)?,
                solver: Solver::from(solver).name().to_string(),
                k,
                restarts,
                seed,
                init: init.map(|i| format!("{i:?}").to_lowercase()),
                tol,
                budget,
                transpose,
                out: out.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            };
            with_threads(threads, || run_invocation(&invocation, out.as_deref(), timing)).map(|_| ())
        }
        Command::Experiment {
            name,
            config,
            out,
            threads,
            timing,
        } => {
            let raw = match &config {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
                    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?
                }
                None => serde_json::Value::Object(Default::default()),
            };
            let invocation = Invocation::Experiment {
                name: format!("{name:?}").to_lowercase(),
                config: normalized_config(name, raw)?,
                out: out.display().to_string(),
            };
            with_threads(threads, || run_invocation(&invocation, Some(&out), timing)).map(|_| ())
        }
        Command::Replay { manifest, out, threads } => {
            let recorded = RunManifest::read(&manifest)?;
            let target = match (&out, &recorded.invocation) {
                (Some(p), _) => Some(p.clone()),
                (None, Invocation::Solve { out, .. }) if out.is_empty() => None,
                (None, Invocation::Solve { out, .. }) | (None, Invocation::Experiment { out, .. }) => {
                    Some(PathBuf::from(out))
                }
            };
            if target.is_none() {
                return Err(Error::Input("recorded solve printed to stdout; pass --out".into()));
            }
            let fresh = with_threads(threads, || {
                run_invocation(&recorded.invocation, target.as_deref(), recorded.timing)
            })?;
            let fresh = fresh.expect("output location given");
            let bad = recorded.mismatches(&fresh);
            if !bad.is_empty() {
                return Err(Error::Mismatch(format!("artifacts differ: {}", bad.join(", "))));
            }
            let checked = recorded.artifacts.iter().filter(|a| a.deterministic).count();
            eprintln!("replay: {checked} artifacts reproduced byte for byte");
            Ok(())
        }
    }
}

/// The full configuration after defaults, so manifests are explicit.
fn normalized_config(name: ExperimentName, raw: serde_json::Value) -> Result<serde_json::Value> {
    fn fill<T: DeserializeOwned + serde::Serialize>(raw: serde_json::Value) -> Result<serde_json::Value> {
        let cfg: T = serde_json::from_value(raw).map_err(|e| Error::Parse(format!("experiment config: {e}")))?;
        Ok(serde_json::to_value(cfg).expect("config serializes"))
    }
    match name {
        ExperimentName::Compare => fill::<TrialBatch>(raw),
        ExperimentName::Sets => fill::<SetsConfig>(raw),
        ExperimentName::Linefit => fill::<LineFitConfig>(raw),
        ExperimentName::Classify => fill::<ClassifyConfig>(raw),
        ExperimentName::Initcdf => fill::<InitCdfConfig>(raw),
    }
}

fn typed<T: DeserializeOwned>(config: &serde_json::Value) -> Result<T> {
    serde_json::from_value(config.clone()).map_err(|e| Error::Parse(format!("experiment config: {e}")))
}

fn manifest_path_for_report(report: &Path) -> PathBuf {
    let stem = report
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    report.with_file_name(format!("{stem}.manifest.json"))
}

/// Executes an invocation with its outputs at `out`; returns the manifest
/// written next to the outputs, if any.
fn run_invocation(invocation: &Invocation, out: Option<&Path>, timing: bool) -> Result<Option<RunManifest>> {
    let mut invocation = invocation.clone();
    let (paths, manifest_path, nondeterministic): (Vec<PathBuf>, Option<PathBuf>, Vec<String>) = match &mut invocation {
        Invocation::Solve {
            input,
            input_sha256,
            solver,
            k,
            restarts,
            seed,
            init,
            tol,
            budget,
            transpose,
            out: recorded_out,
        } => {
            let input_path = Path::new(input.as_str());
            let actual = sha256_file(input_path)?;
            if actual != *input_sha256 {
                return Err(Error::Mismatch(format!("input {input} changed since it was recorded")));
            }
            let text = fs::read_to_string(input_path).map_err(|e| Error::io(input.clone(), e))?;
            let x = DataMatrix::new(parse_matrix(&text, *transpose)?)?;
            let solver: Solver = solver.parse()?;
            let init = match init.as_deref() {
                None => solver.default_init(),
                Some("svsign") => Init::SvSign,
                Some("random") => Init::Random,
                Some(other) => return Err(Error::Input(format!("unknown init '{other}'"))),
            };
            let cfg = SolverConfig {
                init,
                restarts: *restarts,
                flip_budget: *budget,
                tol: *tol,
                seed: *seed,
            };
            let report = solve(&x, *k, solver, &cfg)?;
            let json = serde_json::to_string_pretty(&SolveReportJson::new(solver, *restarts, &report, timing))
                .expect("report serializes")
                + "\n";
            match out {
                None => {
                    print!("{json}");
                    return Ok(None);
                }
                Some(path) => {
                    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                        fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
                    }
                    fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))?;
                    *recorded_out = path.display().to_string();
                    let name = path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default();
                    let timed = if timing { vec![name] } else { vec![] };
                    (vec![path.to_path_buf()], Some(manifest_path_for_report(path)), timed)
                }
            }
        }
        Invocation::Experiment { name, config, out: recorded_out } => {
            let dir = out.expect("experiments always have an output directory");
            *recorded_out = dir.display().to_string();
            let paths = match name.as_str() {
                "compare" => run_comparison(&typed(config)?)?.write(dir, timing)?,
                "sets" => run_sets(&typed(config)?)?.write(dir)?,
                "linefit" => line_fit_demo(&typed(config)?)?.write(dir)?,
                "classify" => subspace_classify(&typed(config)?)?.write(dir)?,
                "initcdf" => run_init_cdf(&typed(config)?)?.write(dir)?,
                other => return Err(Error::Input(format!("unknown experiment '{other}'"))),
            };
            let timed = if timing && name == "compare" {
                vec!["summary.csv".to_string()]
            } else {
                vec![]
            };
            (paths, Some(dir.join("manifest.json")), timed)
        }
    };
    let manifest = RunManifest {
        artifacts: manifest::artifacts(&paths, &nondeterministic)?,
        invocation,
        timing,
    };
    if let Some(path) = manifest_path {
        manifest.write(&path)?;
    }
    Ok(Some(manifest))
}
