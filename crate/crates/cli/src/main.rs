use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use paneitz_cli::error::{CliError, EXIT_OK, EXIT_VIOLATION};
use paneitz_cli::report::ReportFile;
use paneitz_cli::run::{
    coordinate_count, evaluate_bounds, exit_code, prepare, RunOptions, Selection, DEFAULT_SEED,
};
use paneitz_cli::specfile::ManifoldSpec;
use paneitz_cli::sweep::{default_dim, run_sweep, write_csv, Family, ParamRange};
use paneitz_core::bounds::{eigenvalues_needed, BoundId};

const THREADS_VAR: &str = "PANEITZ_LAB_THREADS";

#[derive(Parser)]
#[command(
    name = "paneitz-lab",
    version,
    about = "Paneitz spectra and sharp eigenvalue bounds on submanifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Manifold spec file (TOML)
    #[arg(long)]
    spec: PathBuf,
    /// Number of eigenvalues (overrides the spec's k)
    #[arg(long)]
    count: Option<usize>,
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print nothing on stdout and no summary on stderr
    #[arg(long)]
    quiet: bool,
    /// Solver seed (overrides the spec's seed)
    #[arg(long)]
    seed: Option<u64>,
    /// Relative tolerance for equality and violation
    #[arg(long)]
    tol: Option<f64>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            count: self.count,
            seed: self.seed,
            tol: self.tol,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Paneitz spectrum and curvature integrals
    Spectrum(Common),
    /// Evaluate eigenvalue bounds
    Verify {
        #[command(flatten)]
        common: Common,
        /// Bound id (thm_1_1, cor_1_1, thm_1_2, cor_3_1, thm_1_3, chenli_l1, chenli_l2) or "all"
        #[arg(long, default_value = "all")]
        bound: Selection,
        /// Also replay the trial-function argument step by step
        #[arg(long)]
        replay: bool,
    },
    /// Evaluate one bound along a one-parameter family and write CSV
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        /// START:STOP:SAMPLES
        #[arg(long)]
        range: ParamRange,
        #[arg(long)]
        bound: BoundId,
        /// Manifold dimension (default depends on the bound)
        #[arg(long)]
        dim: Option<usize>,
        /// Write CSV here instead of stdout
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Replay the trial-function argument behind a bound
    Replay {
        #[command(flatten)]
        common: Common,
        /// Bound whose argument to replay (default: chosen from the dimension)
        #[arg(long)]
        bound: Option<BoundId>,
    },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::InvalidArgs(format!(
            "{THREADS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::InvalidArgs(e.to_string()))
}

fn emit(text: &str, out: Option<&Path>, quiet: bool) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            if !quiet {
                println!("{text}");
            }
            Ok(())
        }
    }
}

fn finish(report: &ReportFile, common: &Common, code: i32) -> Result<i32, CliError> {
    emit(&report.to_json(), common.out.as_deref(), common.quiet)?;
    if !common.quiet {
        for line in report.summary() {
            eprintln!("{line}");
        }
    }
    Ok(code)
}

fn load(
    common: &Common,
    minimum: impl FnOnce(&ManifoldSpec) -> Result<usize, CliError>,
) -> Result<paneitz_cli::run::Prepared, CliError> {
    let (spec, text) = ManifoldSpec::read(&common.spec)?;
    let min = minimum(&spec)?;
    prepare(spec, &text, Some(&common.spec), &common.options(), min)
}

fn replay_minimum(spec: &ManifoldSpec) -> Result<usize, CliError> {
    Ok(coordinate_count(&spec.target()?) + 1)
}

fn cmd_spectrum(common: &Common) -> Result<i32, CliError> {
    let p = load(common, |_| Ok(1))?;
    finish(&p.report("spectrum"), common, EXIT_OK)
}

fn cmd_verify(common: &Common, selection: Selection, replay: bool) -> Result<i32, CliError> {
    let p = load(common, |spec| {
        let mut need = eigenvalues_needed(spec.dim);
        if replay {
            need = need.max(replay_minimum(spec)?);
        }
        Ok(need)
    })?;
    let mut report = p.report("verify");
    let start = Instant::now();
    let (bounds, refusals, failure) = evaluate_bounds(&p, selection);
    report.bounds = bounds;
    report.refusals = refusals;
    report.timings.bounds_s = start.elapsed().as_secs_f64();
    if replay {
        let start = Instant::now();
        let bound = match selection {
            Selection::One(id) => Some(id),
            Selection::All => None,
        };
        match p.chain_for(bound).and_then(|t| p.replay(t, common.tol)) {
            Ok(chain) => report.proof_chain = Some(chain),
            Err(e) => {
                if !common.quiet {
                    eprintln!("replay refused: {e}");
                }
            }
        }
        report.timings.replay_s = start.elapsed().as_secs_f64();
    }
    let code = exit_code(&report, failure.is_some());
    if let Some(e) = &failure {
        if !common.quiet {
            eprintln!("error: {e}");
        }
    }
    finish(&report, common, code)
}

fn cmd_replay(common: &Common, bound: Option<BoundId>) -> Result<i32, CliError> {
    let p = load(common, replay_minimum)?;
    let mut report = p.report("replay");
    let start = Instant::now();
    let chain = p.chain_for(bound).and_then(|t| p.replay(t, common.tol));
    report.timings.replay_s = start.elapsed().as_secs_f64();
    match chain {
        Ok(c) => {
            report.proof_chain = Some(c);
            let code = exit_code(&report, false);
            finish(&report, common, code)
        }
        Err(e) => {
            if !common.quiet {
                eprintln!("error: {e}");
            }
            finish(&report, common, e.exit_code())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    family: Family,
    range: ParamRange,
    bound: BoundId,
    dim: Option<usize>,
    csv: Option<&Path>,
    quiet: bool,
    seed: Option<u64>,
    tol: Option<f64>,
) -> Result<i32, CliError> {
    let rows = run_sweep(family, range, bound, dim, tol, seed.unwrap_or(DEFAULT_SEED))?;
    let n = dim.unwrap_or_else(|| default_dim(bound));
    match csv {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            write_csv(&rows, n, file)?;
        }
        None if !quiet => write_csv(&rows, n, std::io::stdout().lock())?,
        None => {}
    }
    if !quiet {
        let tight = rows.iter().filter(|r| r.report.equality).count();
        eprintln!("{} rows, {tight} with equality", rows.len());
    }
    Ok(if rows.iter().any(|r| r.report.violated) {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(common) => cmd_spectrum(common),
        Command::Verify {
            common,
            bound,
            replay,
        } => cmd_verify(common, *bound, *replay),
        Command::Replay { common, bound } => cmd_replay(common, *bound),
        Command::Sweep {
            family,
            range,
            bound,
            dim,
            csv,
            quiet,
            seed,
            tol,
        } => cmd_sweep(
            *family,
            *range,
            *bound,
            *dim,
            csv.as_deref(),
            *quiet,
            *seed,
            *tol,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
