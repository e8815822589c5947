//! Run configuration: a flat `key = value` format with `[section]` headers.
//!
//! ```text
//! [grid]        nx ny Lx Ly bc
//! [params]      p nu1 nu2 rho1 rho2 eps0 m alpha eps_mollifier blend_width
//! [time]        dt T snapshot_every checkpoint_every
//! [run]         scenario seed output_dir binary_snapshots
//! [tolerances]  newton_tol newton_max_iter ch_linear_tol ch_linear_max_iter
//!               picard_tol picard_max_iter picard_relaxation picard_anderson_depth
//!               momentum_linear_tol momentum_linear_max_iter
//!               elliptic_method elliptic_tol elliptic_max_iter
//! [numerics]    convection splitting momentum_convection capillary
//! ```
//!
//! `[grid]` and `[time]` are required; every other key has a default.
//! Comments start with `#`. Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::ch_solver::{ChStepConfig, ConvectionScheme, Splitting};
use crate::constitutive::FluidParams;
use crate::coupled::StepConfig;
use crate::error::{Error, Result};
use crate::grid::{Bc, EllipticMethod, EllipticSolverConfig, Grid};
use crate::ns_solver::{CapillaryForm, ConvectionForm, MomentumStepConfig};
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub bc: Bc,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.lx, self.ly, self.bc)
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Snapshot cadence in steps; 0 keeps only the initial and final level.
    pub snapshot_every: usize,
    /// Checkpoint cadence in steps; 0 disables checkpoints.
    pub checkpoint_every: usize,
}

impl TimeConfig {
    /// Number of steps, `round(T / dt)`.
    pub fn steps(&self) -> usize {
        crate::ch_solver::step_count(self.t_end, self.dt)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub ch_linear_tol: f64,
    pub ch_linear_max_iter: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub picard_relaxation: f64,
    pub picard_anderson_depth: usize,
    pub momentum_linear_tol: f64,
    pub momentum_linear_max_iter: usize,
    pub elliptic_method: EllipticMethod,
    pub elliptic_tol: f64,
    pub elliptic_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let ch = ChStepConfig::new(1.0);
        let mo = MomentumStepConfig::new(1.0);
        let el = EllipticSolverConfig::default();
        Tolerances {
            newton_tol: ch.newton_tol,
            newton_max_iter: ch.max_newton_iter,
            ch_linear_tol: ch.linear_tol,
            ch_linear_max_iter: ch.max_linear_iter,
            picard_tol: mo.picard_tol,
            picard_max_iter: mo.max_picard_iter,
            picard_relaxation: mo.relaxation,
            picard_anderson_depth: mo.anderson_depth,
            momentum_linear_tol: mo.linear_tol,
            momentum_linear_max_iter: mo.max_linear_iter,
            elliptic_method: el.method,
            elliptic_tol: el.rel_tol,
            elliptic_max_iter: el.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Numerics {
    pub convection: ConvectionScheme,
    pub splitting: Splitting,
    pub momentum_convection: ConvectionForm,
    pub capillary: CapillaryForm,
}

impl Default for Numerics {
    fn default() -> Self {
        let mo = MomentumStepConfig::new(1.0);
        Numerics {
            convection: ChStepConfig::new(1.0).convection,
            splitting: Splitting::ConvexSplit,
            momentum_convection: mo.convection_form,
            capillary: mo.capillary,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: FluidParams,
    pub eps_mollifier: f64,
    pub time: TimeConfig,
    pub scenario: Scenario,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub binary_snapshots: bool,
    pub tolerances: Tolerances,
    pub numerics: Numerics,
}

impl RunConfig {
    /// Defaults for everything except the required `[grid]` and `[time]`.
    pub fn with_grid_and_time(grid: GridConfig, time: TimeConfig) -> Self {
        RunConfig {
            grid,
            params: FluidParams::default().normalized(),
            eps_mollifier: 0.0,
            time,
            scenario: Scenario::Spinodal,
            seed: 0,
            output_dir: None,
            binary_snapshots: false,
            tolerances: Tolerances::default(),
            numerics: Numerics::default(),
        }
    }

    pub fn step_config(&self) -> StepConfig {
        let t = &self.tolerances;
        let n = &self.numerics;
        let mut ch = ChStepConfig::new(self.time.dt);
        ch.splitting = n.splitting;
        ch.convection = n.convection;
        ch.newton_tol = t.newton_tol;
        ch.max_newton_iter = t.newton_max_iter;
        ch.linear_tol = t.ch_linear_tol;
        ch.max_linear_iter = t.ch_linear_max_iter;
        let mut mo = MomentumStepConfig::new(self.time.dt);
        mo.picard_tol = t.picard_tol;
        mo.max_picard_iter = t.picard_max_iter;
        mo.relaxation = t.picard_relaxation;
        mo.anderson_depth = t.picard_anderson_depth;
        mo.convection_form = n.momentum_convection;
        mo.capillary = n.capillary;
        mo.phase_scheme = n.convection;
        mo.eps = self.eps_mollifier;
        mo.linear_tol = t.momentum_linear_tol;
        mo.max_linear_iter = t.momentum_linear_max_iter;
        let elliptic = EllipticSolverConfig {
            method: t.elliptic_method,
            rel_tol: t.elliptic_tol,
            max_iter: t.elliptic_max_iter,
        };
        StepConfig { ch, momentum: mo, elliptic }
    }

    /// Cross-module validation; errors name the offending key.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.nx < 8 || g.ny < 8 {
            return Err(cfg_err("grid.nx", format!("grid needs at least 8 cells per direction, got {}x{}", g.nx, g.ny)));
        }
        positive("grid.Lx", g.lx)?;
        positive("grid.Ly", g.ly)?;

        let p = &self.params;
        if !(p.p > 1.0 && p.p.is_finite()) {
            return Err(cfg_err("params.p", format!("requires p > 1, got {}", p.p)));
        }
        positive("params.nu1", p.nu1)?;
        positive("params.nu2", p.nu2)?;
        positive("params.rho1", p.rho1)?;
        positive("params.rho2", p.rho2)?;
        positive("params.eps0", p.eps0)?;
        positive("params.m", p.mobility)?;
        positive("params.blend_width", p.blend_width)?;
        if !(p.alpha >= 0.0 && p.alpha.is_finite()) {
            return Err(cfg_err("params.alpha", format!("requires alpha >= 0, got {}", p.alpha)));
        }
        if !(self.eps_mollifier >= 0.0 && self.eps_mollifier.is_finite()) {
            return Err(cfg_err("params.eps_mollifier", format!("requires eps_mollifier >= 0, got {}", self.eps_mollifier)));
        }

        positive("time.dt", self.time.dt)?;
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            return Err(cfg_err("time.T", format!("requires T >= 0, got {}", self.time.t_end)));
        }

        let t = &self.tolerances;
        positive("tolerances.newton_tol", t.newton_tol)?;
        positive("tolerances.ch_linear_tol", t.ch_linear_tol)?;
        positive("tolerances.picard_tol", t.picard_tol)?;
        positive("tolerances.momentum_linear_tol", t.momentum_linear_tol)?;
        for (key, n) in [
            ("tolerances.newton_max_iter", t.newton_max_iter),
            ("tolerances.ch_linear_max_iter", t.ch_linear_max_iter),
            ("tolerances.picard_max_iter", t.picard_max_iter),
            ("tolerances.momentum_linear_max_iter", t.momentum_linear_max_iter),
            ("tolerances.elliptic_max_iter", t.elliptic_max_iter),
        ] {
            if n == 0 {
                return Err(cfg_err(key, "must be positive"));
            }
        }
        if !(t.picard_relaxation > 0.0 && t.picard_relaxation <= 1.0) {
            return Err(cfg_err("tolerances.picard_relaxation", "must lie in (0, 1]"));
        }
        if !(t.elliptic_tol > 0.0 && t.elliptic_tol <= 1e-4) {
            return Err(cfg_err("tolerances.elliptic_tol", format!("must lie in (0, 1e-4], got {}", t.elliptic_tol)));
        }

        // Backstop: the module validators must agree.
        p.validate().map_err(|e| cfg_err("params", e.to_string()))?;
        let sc = self.step_config();
        sc.ch.validate().map_err(|e| cfg_err("tolerances", e.to_string()))?;
        sc.momentum.validate().map_err(|e| cfg_err("tolerances", e.to_string()))?;
        sc.elliptic.validate().map_err(|e| cfg_err("tolerances", e.to_string()))?;
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let doc = Document::parse(text, origin)?;
        doc.into_config()
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_str(&text, path)
    }

    /// Normalized form: every key, fixed order, round-trippable numbers.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let p = &self.params;
        let t = &self.tolerances;
        let n = &self.numerics;
        let _ = writeln!(s, "[grid]");
        let _ = writeln!(s, "nx = {}", g.nx);
        let _ = writeln!(s, "ny = {}", g.ny);
        let _ = writeln!(s, "Lx = {:?}", g.lx);
        let _ = writeln!(s, "Ly = {:?}", g.ly);
        let _ = writeln!(s, "bc = {}", g.bc.tag());
        let _ = writeln!(s, "\n[params]");
        let _ = writeln!(s, "p = {:?}", p.p);
        let _ = writeln!(s, "nu1 = {:?}", p.nu1);
        let _ = writeln!(s, "nu2 = {:?}", p.nu2);
        let _ = writeln!(s, "rho1 = {:?}", p.rho1);
        let _ = writeln!(s, "rho2 = {:?}", p.rho2);
        let _ = writeln!(s, "eps0 = {:?}", p.eps0);
        let _ = writeln!(s, "m = {:?}", p.mobility);
        let _ = writeln!(s, "alpha = {:?}", p.alpha);
        let _ = writeln!(s, "eps_mollifier = {:?}", self.eps_mollifier);
        let _ = writeln!(s, "blend_width = {:?}", p.blend_width);
        let _ = writeln!(s, "\n[time]");
        let _ = writeln!(s, "dt = {:?}", self.time.dt);
        let _ = writeln!(s, "T = {:?}", self.time.t_end);
        let _ = writeln!(s, "snapshot_every = {}", self.time.snapshot_every);
        let _ = writeln!(s, "checkpoint_every = {}", self.time.checkpoint_every);
        let _ = writeln!(s, "\n[run]");
        let _ = writeln!(s, "scenario = {}", self.scenario.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(s, "output_dir = {}", dir.display());
        }
        let _ = writeln!(s, "binary_snapshots = {}", self.binary_snapshots);
        let _ = writeln!(s, "\n[tolerances]");
        let _ = writeln!(s, "newton_tol = {:?}", t.newton_tol);
        let _ = writeln!(s, "newton_max_iter = {}", t.newton_max_iter);
        let _ = writeln!(s, "ch_linear_tol = {:?}", t.ch_linear_tol);
        let _ = writeln!(s, "ch_linear_max_iter = {}", t.ch_linear_max_iter);
        let _ = writeln!(s, "picard_tol = {:?}", t.picard_tol);
        let _ = writeln!(s, "picard_max_iter = {}", t.picard_max_iter);
        let _ = writeln!(s, "picard_relaxation = {:?}", t.picard_relaxation);
        let _ = writeln!(s, "picard_anderson_depth = {}", t.picard_anderson_depth);
        let _ = writeln!(s, "momentum_linear_tol = {:?}", t.momentum_linear_tol);
        let _ = writeln!(s, "momentum_linear_max_iter = {}", t.momentum_linear_max_iter);
        let _ = writeln!(s, "elliptic_method = {}", elliptic_tag(t.elliptic_method));
        let _ = writeln!(s, "elliptic_tol = {:?}", t.elliptic_tol);
        let _ = writeln!(s, "elliptic_max_iter = {}", t.elliptic_max_iter);
        let _ = writeln!(s, "\n[numerics]");
        let _ = writeln!(s, "convection = {}", n.convection.tag());
        let _ = writeln!(s, "splitting = {}", splitting_tag(n.splitting));
        let _ = writeln!(s, "momentum_convection = {}", convection_form_tag(n.momentum_convection));
        let _ = writeln!(s, "capillary = {}", capillary_tag(n.capillary));
        s
    }

    /// Key/default listing for `--help` texts.
    pub fn defaults_help() -> String {
        let d = RunConfig::with_grid_and_time(
            GridConfig { nx: 0, ny: 0, lx: 1.0, ly: 1.0, bc: Bc::Physical },
            TimeConfig { dt: 0.0, t_end: 0.0, snapshot_every: 0, checkpoint_every: 0 },
        );
        let mut out = String::from("Config file defaults ([grid] nx, ny and [time] dt, T are required):\n");
        let mut section = "";
        for line in d.to_config_string().lines() {
            if line.starts_with('[') {
                section = line;
                continue;
            }
            let key = line.split('=').next().unwrap_or("").trim();
            if line.is_empty() || ["nx", "ny", "dt", "T"].contains(&key) {
                continue;
            }
            let _ = writeln!(out, "  {section:<13}{line}");
        }
        out
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    RunConfig::from_path(path)
}

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), message: message.into() }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(cfg_err(key, format!("must be positive and finite, got {v}")))
    }
}

fn elliptic_tag(m: EllipticMethod) -> &'static str {
    match m {
        EllipticMethod::Direct => "direct",
        EllipticMethod::ConjugateGradient => "cg",
    }
}

fn splitting_tag(s: Splitting) -> &'static str {
    match s {
        Splitting::ConvexSplit => "convex",
        Splitting::FullyImplicit => "implicit",
    }
}

fn convection_form_tag(c: ConvectionForm) -> &'static str {
    match c {
        ConvectionForm::Advective => "advective",
        ConvectionForm::Conservative => "conservative",
    }
}

fn capillary_tag(c: CapillaryForm) -> &'static str {
    match c {
        CapillaryForm::MuGradPhi => "mu_grad_phi",
        CapillaryForm::PhiGradMu => "phi_grad_mu",
    }
}

struct Entry {
    value: String,
    line: usize,
}

struct Document {
    path: PathBuf,
    sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

const SCHEMA: &[(&str, &[&str])] = &[
    ("grid", &["nx", "ny", "Lx", "Ly", "bc"]),
    (
        "params",
        &["p", "nu1", "nu2", "rho1", "rho2", "eps0", "m", "alpha", "eps_mollifier", "blend_width"],
    ),
    ("time", &["dt", "T", "snapshot_every", "checkpoint_every"]),
    ("run", &["scenario", "seed", "output_dir", "binary_snapshots"]),
    (
        "tolerances",
        &[
            "newton_tol",
            "newton_max_iter",
            "ch_linear_tol",
            "ch_linear_max_iter",
            "picard_tol",
            "picard_max_iter",
            "picard_relaxation",
            "picard_anderson_depth",
            "momentum_linear_tol",
            "momentum_linear_max_iter",
            "elliptic_method",
            "elliptic_tol",
            "elliptic_max_iter",
        ],
    ),
    ("numerics", &["convection", "splitting", "momentum_convection", "capillary"]),
];

impl Document {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
        let mut sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| perr(lineno, format!("malformed section header `{line}`")))?
                    .trim();
                let known = SCHEMA.iter().any(|(s, _)| *s == name);
                if !known {
                    return Err(perr(lineno, format!("unknown section `[{name}]`")));
                }
                if let Some((first, _)) = sections.get(name) {
                    return Err(perr(lineno, format!("duplicate section `[{name}]` (first at line {first})")));
                }
                sections.insert(name.to_string(), (lineno, BTreeMap::new()));
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| perr(lineno, format!("expected `key = value`, got `{line}`")))?;
            let key = key.trim();
            let value = value.trim();
            let section = current
                .as_ref()
                .ok_or_else(|| perr(lineno, format!("key `{key}` appears before any [section] header")))?;
            let allowed = SCHEMA.iter().find(|(s, _)| s == section).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(perr(lineno, format!("unknown key `{key}` in [{section}]")));
            }
            if value.is_empty() {
                return Err(perr(lineno, format!("empty value for `{key}`")));
            }
            let entries = &mut sections.get_mut(section).expect("section registered").1;
            if let Some(prev) = entries.get(key) {
                return Err(perr(
                    lineno,
                    format!("duplicate key `{section}.{key}` at lines {} and {lineno}", prev.line),
                ));
            }
            entries.insert(key.to_string(), Entry { value: value.to_string(), line: lineno });
        }
        Ok(Document { path: path.to_path_buf(), sections })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section).and_then(|(_, m)| m.remove(key))
    }

    fn parse_err(&self, line: usize, message: String) -> Error {
        Error::Parse { path: self.path.clone(), line, message }
    }

    fn get<T>(&mut self, section: &str, key: &str, default: Option<T>, conv: impl Fn(&str) -> Option<T>) -> Result<T> {
        match self.take(section, key) {
            Some(e) => conv(&e.value).ok_or_else(|| {
                self.parse_err(e.line, format!("cannot parse `{section}.{key}` from `{}`", e.value))
            }),
            None => default.ok_or_else(|| cfg_err(&format!("{section}.{key}"), "missing required key")),
        }
    }

    fn f64(&mut self, section: &str, key: &str, default: Option<f64>) -> Result<f64> {
        self.get(section, key, default, |s| s.parse::<f64>().ok())
    }

    fn usize(&mut self, section: &str, key: &str, default: Option<usize>) -> Result<usize> {
        self.get(section, key, default, |s| s.parse::<usize>().ok())
    }

    fn into_config(mut self) -> Result<RunConfig> {
        for required in ["grid", "time"] {
            if !self.sections.contains_key(required) {
                return Err(cfg_err(required, format!("missing required section [{required}]")));
            }
        }
        let grid = GridConfig {
            nx: self.usize("grid", "nx", None)?,
            ny: self.usize("grid", "ny", None)?,
            lx: self.f64("grid", "Lx", Some(1.0))?,
            ly: self.f64("grid", "Ly", Some(1.0))?,
            bc: self.get("grid", "bc", Some(Bc::Physical), Bc::from_tag)?,
        };
        let time = TimeConfig {
            dt: self.f64("time", "dt", None)?,
            t_end: self.f64("time", "T", None)?,
            snapshot_every: self.usize("time", "snapshot_every", Some(0))?,
            checkpoint_every: self.usize("time", "checkpoint_every", Some(0))?,
        };
        let mut cfg = RunConfig::with_grid_and_time(grid, time);

        let d = cfg.params.clone();
        let mut p = FluidParams {
            p: self.f64("params", "p", Some(d.p))?,
            nu1: self.f64("params", "nu1", Some(d.nu1))?,
            nu2: self.f64("params", "nu2", Some(d.nu2))?,
            rho1: self.f64("params", "rho1", Some(d.rho1))?,
            rho2: self.f64("params", "rho2", Some(d.rho2))?,
            eps0: self.f64("params", "eps0", Some(d.eps0))?,
            mobility: self.f64("params", "m", Some(d.mobility))?,
            alpha: self.f64("params", "alpha", Some(d.alpha))?,
            blend_width: self.f64("params", "blend_width", Some(d.blend_width))?,
            ..d
        };
        p = p.normalized();
        cfg.params = p;
        cfg.eps_mollifier = self.f64("params", "eps_mollifier", Some(0.0))?;

        cfg.scenario = self.get("run", "scenario", Some(Scenario::Spinodal), Scenario::from_name)?;
        cfg.seed = self.get("run", "seed", Some(0), |s| s.parse::<u64>().ok())?;
        cfg.output_dir = self.take("run", "output_dir").map(|e| PathBuf::from(e.value));
        cfg.binary_snapshots = self.get("run", "binary_snapshots", Some(false), |s| s.parse::<bool>().ok())?;

        let dt = Tolerances::default();
        cfg.tolerances = Tolerances {
            newton_tol: self.f64("tolerances", "newton_tol", Some(dt.newton_tol))?,
            newton_max_iter: self.usize("tolerances", "newton_max_iter", Some(dt.newton_max_iter))?,
            ch_linear_tol: self.f64("tolerances", "ch_linear_tol", Some(dt.ch_linear_tol))?,
            ch_linear_max_iter: self.usize("tolerances", "ch_linear_max_iter", Some(dt.ch_linear_max_iter))?,
            picard_tol: self.f64("tolerances", "picard_tol", Some(dt.picard_tol))?,
            picard_max_iter: self.usize("tolerances", "picard_max_iter", Some(dt.picard_max_iter))?,
            picard_relaxation: self.f64("tolerances", "picard_relaxation", Some(dt.picard_relaxation))?,
            picard_anderson_depth: self.usize("tolerances", "picard_anderson_depth", Some(dt.picard_anderson_depth))?,
            momentum_linear_tol: self.f64("tolerances", "momentum_linear_tol", Some(dt.momentum_linear_tol))?,
            momentum_linear_max_iter: self.usize(
                "tolerances",
                "momentum_linear_max_iter",
                Some(dt.momentum_linear_max_iter),
            )?,
            elliptic_method: self.get("tolerances", "elliptic_method", Some(dt.elliptic_method), |s| match s {
                "direct" => Some(EllipticMethod::Direct),
                "cg" => Some(EllipticMethod::ConjugateGradient),
                _ => None,
            })?,
            elliptic_tol: self.f64("tolerances", "elliptic_tol", Some(dt.elliptic_tol))?,
            elliptic_max_iter: self.usize("tolerances", "elliptic_max_iter", Some(dt.elliptic_max_iter))?,
        };

        let dn = Numerics::default();
        cfg.numerics = Numerics {
            convection: self.get("numerics", "convection", Some(dn.convection), ConvectionScheme::from_tag)?,
            splitting: self.get("numerics", "splitting", Some(dn.splitting), |s| match s {
                "convex" => Some(Splitting::ConvexSplit),
                "implicit" => Some(Splitting::FullyImplicit),
                _ => None,
            })?,
            momentum_convection: self.get("numerics", "momentum_convection", Some(dn.momentum_convection), |s| {
                match s {
                    "advective" => Some(ConvectionForm::Advective),
                    "conservative" => Some(ConvectionForm::Conservative),
                    _ => None,
                }
            })?,
            capillary: self.get("numerics", "capillary", Some(dn.capillary), |s| match s {
                "mu_grad_phi" => Some(CapillaryForm::MuGradPhi),
                "phi_grad_mu" => Some(CapillaryForm::PhiGradMu),
                _ => None,
            })?,
        };

        cfg.validate()?;
        Ok(cfg)
    }
}
