//! Sampling validators for the structural assumptions on the potential,
//! the stress and the density law.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::stress::{contract, frobenius, stress, Mat2};
use super::{DensityLaw, FluidParams, PotentialSpec};
use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub check: &'static str,
    pub sample: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub name: &'static str,
    pub samples: usize,
    /// Named constants measured or checked, in a stable order.
    pub constants: Vec<(&'static str, f64)>,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn constant(&self, key: &str) -> Option<f64> {
        self.constants.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} ({} samples): {}", self.name, self.samples, if self.passed() { "PASS" } else { "FAIL" });
        for (k, v) in &self.constants {
            let _ = writeln!(s, "  {k:<24} {v:>14.6e}");
        }
        for v in self.violations.iter().take(10) {
            let _ = writeln!(s, "  violation [{}] {}: {:e} vs {:e}", v.check, v.sample, v.lhs, v.rhs);
        }
        s
    }

    pub fn key_values(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}.passed={}", self.name, self.passed());
        let _ = writeln!(s, "{}.samples={}", self.name, self.samples);
        for (k, v) in &self.constants {
            let _ = writeln!(s, "{}.{k}={v}", self.name);
        }
        let _ = writeln!(s, "{}.violations={}", self.name, self.violations.len());
        s
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid("samples", format!("need at least {MIN_SAMPLES}, got {samples}")));
    }
    Ok(())
}

fn grid_points(range: (f64, f64), samples: usize) -> impl Iterator<Item = f64> {
    let (a, b) = range;
    (0..samples).map(move |k| a + (b - a) * k as f64 / (samples - 1) as f64)
}

/// Checks `f″ ≥ −α`, `f₀″ ≥ 0` and reports the smallest `C` with
/// `|f‴(s)| ≤ C(|s| + 1)` over the sampled range.
pub fn validate_a1(spec: &PotentialSpec, range: (f64, f64), samples: usize) -> Result<ValidationReport> {
    check_samples(samples)?;
    spec.validate()?;
    let mut c: f64 = 0.0;
    let mut min_f2 = f64::INFINITY;
    let mut violations = Vec::new();
    for s in grid_points(range, samples) {
        let (_, f2, f3) = spec.derivs(s);
        c = c.max(f3.abs() / (s.abs() + 1.0));
        min_f2 = min_f2.min(f2);
        if f2 < -spec.alpha {
            violations.push(Violation { check: "f'' >= -alpha", sample: format!("s={s}"), lhs: f2, rhs: -spec.alpha });
        }
    }
    Ok(ValidationReport {
        name: "A1",
        samples,
        constants: vec![("growth_C", c), ("min_f2", min_f2), ("alpha", spec.alpha)],
        violations,
    })
}

fn random_sym(rng: &mut ChaCha8Rng) -> Mat2 {
    let scale = 10f64.powf(rng.gen_range(-3.0..2.0));
    let a = rng.gen_range(-1.0..1.0) * scale;
    let b = rng.gen_range(-1.0..1.0) * scale;
    let d = rng.gen_range(-1.0..1.0) * scale;
    [[a, b], [b, d]]
}

fn diff(a: &Mat2, b: &Mat2) -> Mat2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// Samples random symmetric pairs and order-parameter values and checks
/// growth, Lipschitz dependence on `s`, coercivity with the declared
/// `(ω, C₁)` and monotonicity of the stress.
pub fn validate_a2(params: &FluidParams, samples: usize, seed: u64) -> Result<ValidationReport> {
    check_samples(samples)?;
    params.validate()?;
    let p = params.p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut growth: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let mut min_mono = f64::INFINITY;
    let mut violations = Vec::new();
    for _ in 0..samples {
        let m1 = random_sym(&mut rng);
        let m2 = random_sym(&mut rng);
        let s1 = rng.gen_range(-3.0..3.0);
        let s2 = rng.gen_range(-3.0..3.0);
        let a = stress(s1, &m1, params)?;
        let b = stress(s1, &m2, params)?;
        let n1 = frobenius(&m1);
        let bound = n1.powf(p - 1.0) + 1.0;
        growth = growth.max(frobenius(&a) / bound);
        let c = stress(s2, &m1, params)?;
        if s1 != s2 {
            lip = lip.max(frobenius(&diff(&a, &c)) / ((s1 - s2).abs() * bound));
        }
        let coer = contract(&a, &m1);
        let need = params.omega * n1.powf(p) - params.c1;
        if coer < need {
            violations.push(Violation {
                check: "coercivity",
                sample: format!("s={s1} M={m1:?}"),
                lhs: coer,
                rhs: need,
            });
        }
        let dm = diff(&m1, &m2);
        let mono = contract(&diff(&a, &b), &dm);
        let tol = 1e-12 * (frobenius(&a) + frobenius(&b)) * frobenius(&dm);
        let dn = frobenius(&dm);
        if dn > 0.0 {
            min_mono = min_mono.min(mono / (dn * dn));
        }
        if mono < -tol {
            violations.push(Violation {
                check: "monotonicity",
                sample: format!("s={s1} M1={m1:?} M2={m2:?}"),
                lhs: mono,
                rhs: 0.0,
            });
        }
    }
    Ok(ValidationReport {
        name: "A2",
        samples,
        constants: vec![
            ("p", p),
            ("growth_C", growth),
            ("lipschitz_s", lip),
            ("omega", params.omega),
            ("C1", params.c1),
            ("min_monotone_ratio", min_mono),
        ],
        violations,
    })
}

/// Positivity and boundedness of `ρ, ρ′, ρ″` on a sampled range.
pub fn validate_a3(law: &DensityLaw, range: (f64, f64), samples: usize) -> Result<ValidationReport> {
    check_samples(samples)?;
    law.validate()?;
    let mut min_rho = f64::INFINITY;
    let mut max_rho: f64 = 0.0;
    let mut max_d1: f64 = 0.0;
    let mut max_d2: f64 = 0.0;
    let mut violations = Vec::new();
    for s in grid_points(range, samples) {
        let r = law.rho(s);
        let d1 = law.drho(s);
        let d2 = law.d2rho(s);
        min_rho = min_rho.min(r);
        max_rho = max_rho.max(r);
        max_d1 = max_d1.max(d1.abs());
        max_d2 = max_d2.max(d2.abs());
        if !(r > 0.0) {
            violations.push(Violation { check: "positivity", sample: format!("phi={s}"), lhs: r, rhs: 0.0 });
        }
        if !(r.is_finite() && d1.is_finite() && d2.is_finite()) {
            violations.push(Violation { check: "boundedness", sample: format!("phi={s}"), lhs: r, rhs: f64::INFINITY });
        }
    }
    Ok(ValidationReport {
        name: "A3",
        samples,
        constants: vec![("min_rho", min_rho), ("max_rho", max_rho), ("max_drho", max_d1), ("max_d2rho", max_d2)],
        violations,
    })
}
