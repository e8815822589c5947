//! `nsch` subcommands as library functions, so they can be driven from
//! tests as well as from the binary.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nsch_core::analysis::{pressure_decompose, trajectory_tensors, truncation_gradient_bound, PressureOptions};
use nsch_core::constitutive::{validate_a1, validate_a2, validate_a3, ValidationReport};
use nsch_core::coupled::{read_trajectory, run, run_from_checkpoint, RunSummary};
use nsch_core::grid::{divergence, gradient, laplacian, Grid, Projector, ScalarField, VectorField};
use nsch_core::{Error, Result, RunConfig, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nsch", version, about = "Two-phase power-law Navier–Stokes/Cahn–Hilliard simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration, the constitutive assumptions and the grid operators.
    #[command(after_help = RunConfig::defaults_help())]
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the coupled solver.
    #[command(after_help = RunConfig::defaults_help())]
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        /// Write snapshots as little-endian f64 instead of text.
        #[arg(long)]
        binary_snapshots: bool,
        /// Worker threads (falls back to NSCH_THREADS, then all cores).
        #[arg(long, env = "NSCH_THREADS")]
        threads: Option<usize>,
        /// Continue from a checkpoint directory instead of the initial state.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Post-process a run directory.
    Analyze {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: AnalyzeMode,
    },
    /// Print the complete configuration of a named scenario.
    Preset {
        /// spinodal_64, shear_powerlaw, density_contrast, smoke or rest.
        name: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeMode {
    Truncation,
    Pressure,
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else if e.is_io_error() {
        EXIT_IO
    } else {
        EXIT_SOLVER
    }
}

fn kind(e: &Error) -> &'static str {
    match exit_code(e) {
        EXIT_CONFIG => "config",
        EXIT_IO => "io",
        _ => "solver",
    }
}

/// Operator self-tests on the configured grid: `(name, value, tolerance)`.
fn grid_self_tests(g: &Grid, seed: u64) -> Result<Vec<(&'static str, f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = ScalarField::from_vec(g, (0..g.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let mut u = VectorField::zeros(g);
    u.data_mut().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    u.enforce_walls();
    let gf = gradient(&f);
    let adj = (gf.dot(&u) + f.dot(&divergence(&u))).abs() / (gf.norm_l2() * u.norm_l2());
    let proj = Projector::new(g);
    let pu = proj.project(&u)?;
    let div = divergence(&pu).norm_l2() / u.norm_l2();
    let mut rhs = f.clone();
    rhs.subtract_mean();
    let sol = proj.poisson(&rhs)?;
    let res = laplacian(&sol).sub(&rhs).norm_l2() / rhs.norm_l2();
    Ok(vec![("grad_div_adjointness", adj, 1e-12), ("projection_divergence", div, 1e-9), ("poisson_residual", res, 1e-9)])
}

/// Validation report text and whether every check passed.
pub fn cmd_validate(cfg: &RunConfig) -> Result<(String, bool)> {
    cfg.validate()?;
    let reports: Vec<ValidationReport> = vec![
        validate_a1(&cfg.params.potential, (-10.0, 10.0), 10_000)?,
        validate_a2(&cfg.params, 10_000, cfg.seed)?,
        validate_a3(&cfg.params.density_law()?, (-5.0, 5.0), 10_000)?,
    ];
    let mut out = String::new();
    let mut ok = true;
    for r in &reports {
        ok &= r.passed();
        out.push_str(&r.table());
    }
    let g = cfg.grid.build()?;
    let _ = writeln!(out, "grid {}x{} {} self-tests:", g.nx, g.ny, g.bc.tag());
    let tests = grid_self_tests(&g, cfg.seed)?;
    for (name, value, tol) in &tests {
        let pass = *value <= *tol;
        ok &= pass;
        let _ = writeln!(out, "  {name:<24} {value:>14.6e}  (tol {tol:e}) {}", if pass { "PASS" } else { "FAIL" });
    }
    let _ = writeln!(out, "\n# key-value");
    for r in &reports {
        out.push_str(&r.key_values());
    }
    for (name, value, _) in &tests {
        let _ = writeln!(out, "grid.{name}={value:e}");
    }
    let _ = writeln!(out, "overall.passed={ok}");
    Ok((out, ok))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub binary_snapshots: bool,
    pub threads: Option<usize>,
    pub resume: Option<PathBuf>,
}

/// Runs `cfg` (or resumes a checkpoint) inside a pool of the requested size.
pub fn cmd_run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary> {
    let mut cfg = cfg.clone();
    cfg.output_dir = Some(opts.output_dir.clone());
    cfg.binary_snapshots |= opts.binary_snapshots;
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        if n == 0 {
            return Err(Error::Config { key: "threads".into(), message: "must be positive".into() });
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config { key: "threads".into(), message: e.to_string() })?;
    pool.install(|| match &opts.resume {
        Some(ck) => run_from_checkpoint(ck, Some(&opts.output_dir)),
        None => run(&cfg),
    })
}

pub fn run_summary_text(s: &RunSummary, area: f64) -> String {
    let mut out = String::new();
    let last = s.records.last().copied().unwrap_or_default();
    let _ = writeln!(out, "steps = {}", s.steps);
    let _ = writeln!(out, "t_final = {}", s.final_state.t);
    let _ = writeln!(out, "E_total = {:e}", last.e_total);
    let _ = writeln!(out, "max_mass_drift_rel = {:e}", s.max_mass_drift() / area);
    let _ = writeln!(out, "max_abs_energy_residual = {:e}", s.max_abs_energy_residual());
    let _ = writeln!(out, "max_continuity_residual = {:e}", s.max_continuity_residual());
    let _ = writeln!(out, "max_picard_iterations = {}", s.max_picard_iterations());
    let _ = writeln!(out, "elapsed_s = {:.3}", s.elapsed.as_secs_f64());
    if let Some(d) = &s.output_dir {
        let _ = writeln!(out, "output_dir = {}", d.display());
    }
    out
}

/// Post-processes the snapshots stored under `dir`.
pub fn cmd_analyze(dir: &Path, mode: AnalyzeMode) -> Result<String> {
    let frames = read_trajectory(dir)?;
    if frames.is_empty() {
        return Err(Error::Snapshot { path: dir.join("snapshots"), message: "no snapshots found".into() });
    }
    let mut out = String::new();
    let _ = writeln!(out, "frames = {}", frames.len());
    match mode {
        AnalyzeMode::Truncation => {
            let _ = writeln!(out, "{:>8} {:>12} {:>4} {:>12} {:>12}", "step", "t", "L", "measured_c", "full_ratio");
            let mut worst: f64 = 0.0;
            for f in &frames {
                for levels in 1..=8 {
                    let (c, rep) = truncation_gradient_bound(&f.v, levels);
                    worst = worst.max(c);
                    let _ = writeln!(out, "{:>8} {:>12.6} {levels:>4} {c:>12.5e} {:>12.5e}", f.step, f.t, rep.full_ratio);
                }
            }
            let _ = writeln!(out, "max_measured_c = {worst:e}");
        }
        AnalyzeMode::Pressure => {
            if frames.len() < 2 {
                return Err(Error::Config {
                    key: "input".into(),
                    message: "pressure analysis needs at least two snapshot levels".into(),
                });
            }
            let times: Vec<f64> = frames.iter().map(|f| f.t).collect();
            let u: Vec<VectorField> = frames.iter().map(|f| f.v.clone()).collect();
            let h = trajectory_tensors(&times, &u)?;
            let d = pressure_decompose(&times, &u, &h, None, &PressureOptions::default())?;
            out.push_str(&d.report.to_text());
        }
    }
    Ok(out)
}

/// Parses `args` and executes the command, writing reports to `out` and
/// errors to `err`. Returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let result: Result<i32> = (|| match cli.command {
        Command::Validate { config } => {
            let cfg = RunConfig::from_path(&config)?;
            let (text, ok) = cmd_validate(&cfg)?;
            let _ = out.write_all(text.as_bytes());
            Ok(if ok { EXIT_OK } else { EXIT_CONFIG })
        }
        Command::Run { config, output_dir, binary_snapshots, threads, resume } => {
            let cfg = RunConfig::from_path(&config)?;
            let opts = RunOptions { output_dir, binary_snapshots, threads, resume };
            let s = cmd_run(&cfg, &opts)?;
            let _ = out.write_all(run_summary_text(&s, cfg.grid.area()).as_bytes());
            Ok(EXIT_OK)
        }
        Command::Analyze { input, mode } => {
            let _ = out.write_all(cmd_analyze(&input, mode)?.as_bytes());
            Ok(EXIT_OK)
        }
        Command::Preset { name } => {
            let s = Scenario::from_name(&name).ok_or_else(|| Error::Config {
                key: "scenario".into(),
                message: format!("unknown scenario `{name}`"),
            })?;
            let _ = out.write_all(s.preset().to_config_string().as_bytes());
            Ok(EXIT_OK)
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", kind(&e));
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let _ = writeln!(err, "  caused by: {s}");
                src = s.source();
            }
            exit_code(&e)
        }
    }
}
