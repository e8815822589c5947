//! The time loop with its on-disk artefacts.
//!
//! ```text
//! <out>/config.cfg                      normalized configuration
//! <out>/diagnostics.csv                 one row per time level
//! <out>/snapshots/step_NNNNNN/{phi,mu,pi,v}.dat
//! <out>/checkpoints/step_NNNNNN/        exact restart data
//! ```
//!
//! File output runs on a writer thread fed through a bounded channel, so
//! the next step overlaps the I/O of the previous one. Checkpoints are
//! always binary so a restart continues bit for bit.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use super::{DiagnosticsRecord, State, StepStats, Stepper, CSV_HEADER};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::snapshot::{self, Encoding};
use crate::grid::{ScalarField, VectorField};

pub const CONFIG_FILE: &str = "config.cfg";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
const STATE_FILE: &str = "state.txt";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub stats: Vec<StepStats>,
    pub final_state: State,
    pub output_dir: Option<PathBuf>,
    pub elapsed: Duration,
}

impl RunSummary {
    /// `max_n |∫φⁿ − ∫φ⁰|`.
    pub fn max_mass_drift(&self) -> f64 {
        let m0 = self.records.first().map_or(0.0, |r| r.mass);
        self.records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_energy_residual(&self) -> f64 {
        self.records.iter().map(|r| r.energy_res.abs()).fold(0.0, f64::max)
    }

    pub fn max_continuity_residual(&self) -> f64 {
        self.records.iter().map(|r| r.cont_res).fold(0.0, f64::max)
    }

    /// Largest single-step increase of `E_total`.
    pub fn max_energy_increase(&self) -> f64 {
        self.records.windows(2).map(|w| w[1].e_total - w[0].e_total).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_picard_iterations(&self) -> usize {
        self.stats.iter().map(|s| s.picard_iterations).max().unwrap_or(0)
    }
}

/// Restart data read back from a checkpoint directory.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub config: RunConfig,
    pub state: State,
    /// Diagnostics rows up to and including the checkpointed level.
    pub rows: Vec<String>,
}

impl Checkpoint {
    pub fn load(dir: &Path) -> Result<Self> {
        let config = RunConfig::from_path(&dir.join(CONFIG_FILE))?;
        let meta_path = dir.join(STATE_FILE);
        let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let bad = |m: &str| Error::Snapshot { path: meta_path.clone(), message: m.to_string() };
        let mut t = None;
        let mut step = None;
        for line in meta.lines() {
            match line.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("t", v)) => t = v.parse::<f64>().ok(),
                Some(("step", v)) => step = v.parse::<usize>().ok(),
                _ => {}
            }
        }
        let (t, step) = (t.ok_or_else(|| bad("missing t"))?, step.ok_or_else(|| bad("missing step"))?);
        let (phi, _) = snapshot::read_scalar(&dir.join("phi.dat"))?;
        let (mu, _) = snapshot::read_scalar(&dir.join("mu.dat"))?;
        let (pi, _) = snapshot::read_scalar(&dir.join("pi.dat"))?;
        let (v, _) = snapshot::read_vector(&dir.join("v.dat"))?;
        let g = config.grid.build()?;
        g.check_same(phi.grid())?;
        let state = State::assemble(t, step, v, phi, mu, pi, &config.params)?;
        let diag_path = dir.join(DIAGNOSTICS_FILE);
        let text = fs::read_to_string(&diag_path).map_err(|e| Error::io(&diag_path, e))?;
        let rows = text.lines().skip(1).filter(|l| !l.trim().is_empty()).map(str::to_string).collect();
        Ok(Checkpoint { config, state, rows })
    }
}

pub fn step_dir_name(step: usize) -> String {
    format!("step_{step:06}")
}

enum Msg {
    Row(String),
    Snapshot(Box<State>),
    Checkpoint(Box<State>),
}

struct Writer {
    tx: SyncSender<Msg>,
    handle: JoinHandle<Result<()>>,
}

impl Writer {
    fn spawn(dir: PathBuf, cfg: RunConfig, prefix: Vec<String>) -> Result<Self> {
        fs::create_dir_all(dir.join("snapshots")).map_err(|e| Error::io(dir.join("snapshots"), e))?;
        let cfg_text = cfg.to_config_string();
        let cfg_path = dir.join(CONFIG_FILE);
        fs::write(&cfg_path, &cfg_text).map_err(|e| Error::io(&cfg_path, e))?;
        let diag_path = dir.join(DIAGNOSTICS_FILE);
        let file = fs::File::create(&diag_path).map_err(|e| Error::io(&diag_path, e))?;
        let enc = if cfg.binary_snapshots { Encoding::Binary } else { Encoding::Text };
        let (tx, rx) = sync_channel::<Msg>(4);
        let handle = std::thread::spawn(move || -> Result<()> {
            let mut out = BufWriter::new(file);
            let io = |e| Error::io(&diag_path, e);
            writeln!(out, "{CSV_HEADER}").map_err(io)?;
            let mut rows = prefix;
            for r in &rows {
                writeln!(out, "{r}").map_err(io)?;
            }
            for msg in rx {
                match msg {
                    Msg::Row(r) => {
                        writeln!(out, "{r}").map_err(io)?;
                        rows.push(r);
                    }
                    Msg::Snapshot(s) => {
                        let d = dir.join("snapshots").join(step_dir_name(s.step));
                        write_state(&d, &s, enc)?;
                    }
                    Msg::Checkpoint(s) => {
                        out.flush().map_err(io)?;
                        let d = dir.join("checkpoints").join(step_dir_name(s.step));
                        write_state(&d, &s, Encoding::Binary)?;
                        let p = d.join(CONFIG_FILE);
                        fs::write(&p, &cfg_text).map_err(|e| Error::io(&p, e))?;
                        let p = d.join(STATE_FILE);
                        fs::write(&p, format!("t = {}\nstep = {}\n", s.t, s.step)).map_err(|e| Error::io(&p, e))?;
                        let mut body = String::with_capacity(rows.len() * 200);
                        body.push_str(CSV_HEADER);
                        body.push('\n');
                        for r in &rows {
                            body.push_str(r);
                            body.push('\n');
                        }
                        let p = d.join(DIAGNOSTICS_FILE);
                        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
                    }
                }
            }
            out.flush().map_err(io)?;
            Ok(())
        });
        Ok(Writer { tx, handle })
    }

    /// Sends a message; a closed channel means the writer failed, and the
    /// error surfaces from `finish`.
    fn send(&self, msg: Msg) -> bool {
        self.tx.send(msg).is_ok()
    }

    fn finish(self) -> Result<()> {
        drop(self.tx);
        match self.handle.join() {
            Ok(r) => r,
            Err(_) => Err(Error::Snapshot { path: PathBuf::from("<writer>"), message: "writer thread panicked".into() }),
        }
    }
}

fn write_state(dir: &Path, s: &State, enc: Encoding) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    snapshot::write_scalar(&dir.join("phi.dat"), &s.phi, s.t, enc)?;
    snapshot::write_scalar(&dir.join("mu.dat"), &s.mu, s.t, enc)?;
    snapshot::write_scalar(&dir.join("pi.dat"), &s.pi, s.t, enc)?;
    snapshot::write_vector(&dir.join("v.dat"), &s.v, s.t, enc)
}

/// Runs a configuration from its scenario's initial state. Output goes to
/// `cfg.output_dir` when set; otherwise the run stays in memory.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    run_observed(cfg, |_, _| {})
}

/// As [`run`], calling `observe` on every level including the initial one.
pub fn run_observed(cfg: &RunConfig, observe: impl FnMut(&State, &DiagnosticsRecord)) -> Result<RunSummary> {
    cfg.validate()?;
    let state = cfg.scenario.initial_state(cfg)?;
    drive(cfg, state, Vec::new(), observe)
}

/// Continues a checkpoint to the configured end time. The diagnostics file
/// in `output_dir` starts with the checkpoint's rows, so it matches an
/// uninterrupted run.
pub fn run_from_checkpoint(dir: &Path, output_dir: Option<&Path>) -> Result<RunSummary> {
    let ck = Checkpoint::load(dir)?;
    let mut cfg = ck.config;
    cfg.output_dir = output_dir.map(Path::to_path_buf);
    drive(&cfg, ck.state, ck.rows, |_, _| {})
}

fn drive(
    cfg: &RunConfig,
    mut state: State,
    prefix: Vec<String>,
    mut observe: impl FnMut(&State, &DiagnosticsRecord),
) -> Result<RunSummary> {
    let start = Instant::now();
    let stepper = Stepper::new(state.grid(), &cfg.params, cfg.step_config())?;
    let total = cfg.time.steps();
    let resumed = !prefix.is_empty();
    let writer = match &cfg.output_dir {
        Some(d) => Some(Writer::spawn(d.clone(), cfg.clone(), prefix)?),
        None => None,
    };
    let send = |msg: Msg| writer.as_ref().is_none_or(|w| w.send(msg));
    let snap_due = |step: usize| {
        step == total || (cfg.time.snapshot_every > 0 && step % cfg.time.snapshot_every == 0)
    };

    let mut records = Vec::with_capacity(total + 1);
    let mut stats = Vec::with_capacity(total);
    let mut result = Ok(());
    if !resumed {
        let rec = stepper.initial_record(&state);
        observe(&state, &rec);
        send(Msg::Row(rec.csv_row()));
        send(Msg::Snapshot(Box::new(state.clone())));
        records.push(rec);
    }
    while state.step < total {
        match stepper.step_with(&state, Default::default()) {
            Ok((next, rec, st)) => {
                state = next;
                observe(&state, &rec);
                log::debug!(
                    "step {} t={} E={:.6e} newton={} picard={}",
                    state.step,
                    state.t,
                    rec.e_total,
                    st.newton_iterations,
                    st.picard_iterations
                );
                let mut ok = send(Msg::Row(rec.csv_row()));
                if snap_due(state.step) {
                    ok &= send(Msg::Snapshot(Box::new(state.clone())));
                }
                if cfg.time.checkpoint_every > 0 && state.step % cfg.time.checkpoint_every == 0 {
                    ok &= send(Msg::Checkpoint(Box::new(state.clone())));
                }
                records.push(rec);
                stats.push(st);
                if !ok {
                    break;
                }
            }
            Err(e) => {
                result = Err(e);
                break;
            }
        }
    }
    let written = match writer {
        Some(w) => w.finish(),
        None => Ok(()),
    };
    result?;
    written?;
    Ok(RunSummary {
        steps: stats.len(),
        records,
        stats,
        final_state: state,
        output_dir: cfg.output_dir.clone(),
        elapsed: start.elapsed(),
    })
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse { path: path.to_path_buf(), line: 1, message: "unexpected CSV header".into() })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            DiagnosticsRecord::parse_csv_row(l).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("malformed diagnostics row `{l}`"),
            })
        })
        .collect()
}

/// One stored level of a run directory.
#[derive(Debug, Clone)]
pub struct Frame {
    pub step: usize,
    pub t: f64,
    pub v: VectorField,
    pub phi: ScalarField,
    pub mu: ScalarField,
    pub pi: ScalarField,
}

/// All snapshot levels of a run directory in step order.
pub fn read_trajectory(dir: &Path) -> Result<Vec<Frame>> {
    let snaps = dir.join("snapshots");
    let entries = fs::read_dir(&snaps).map_err(|e| Error::io(&snaps, e))?;
    let mut steps = Vec::new();
    for e in entries {
        let e = e.map_err(|e| Error::io(&snaps, e))?;
        let name = e.file_name().to_string_lossy().into_owned();
        if let Some(n) = name.strip_prefix("step_").and_then(|s| s.parse::<usize>().ok()) {
            steps.push((n, e.path()));
        }
    }
    steps.sort_by_key(|(n, _)| *n);
    steps
        .into_iter()
        .map(|(step, d)| {
            let (phi, t) = snapshot::read_scalar(&d.join("phi.dat"))?;
            let (mu, _) = snapshot::read_scalar(&d.join("mu.dat"))?;
            let (pi, _) = snapshot::read_scalar(&d.join("pi.dat"))?;
            let (v, _) = snapshot::read_vector(&d.join("v.dat"))?;
            Ok(Frame { step, t, v, phi, mu, pi })
        })
        .collect()
}
