//! Matrix-free preconditioned conjugate gradients with a fixed reduction
//! order, so results are reproducible run to run.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final `‖r‖ / ‖b‖`.
    pub residual: f64,
    pub converged: bool,
    pub history: Vec<f64>,
}

impl CgStats {
    pub fn check(self, solver: &'static str) -> Result<CgStats> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                solver,
                iterations: self.iterations,
                residual: self.residual,
                history: self.history,
            })
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Restrict iterates to zero-sum vectors (singular Neumann/periodic
    /// operators).
    pub zero_mean: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(a: &mut [f64]) {
    let m = a.iter().sum::<f64>() / a.len() as f64;
    a.iter_mut().for_each(|x| *x -= m);
}

/// Solves `A x = b` for symmetric positive (semi)definite `A`, starting from
/// the given `x`. `apply(x, y)` writes `y = A x`, `precond(r, z)` writes
/// `z = M⁻¹ r`.
pub fn pcg(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> CgStats {
    let n = b.len();
    assert_eq!(x.len(), n);
    let mut b = b.to_vec();
    if opts.zero_mean {
        remove_mean(&mut b);
        remove_mean(x);
    }
    let bnorm = dot(&b, &b).sqrt();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return CgStats { iterations: 0, residual: 0.0, converged: true, history: vec![0.0] };
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    if opts.zero_mean {
        remove_mean(&mut r);
    }
    let mut z = vec![0.0; n];
    let mut history = Vec::new();
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    history.push(rel);
    if rel <= opts.rel_tol {
        return CgStats { iterations: 0, residual: rel, converged: true, history };
    }
    precond(&r, &mut z);
    if opts.zero_mean {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgStats { iterations: it, residual: rel, converged: false, history };
        }
        let alpha = rz / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        if opts.zero_mean {
            remove_mean(&mut r);
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        history.push(rel);
        if rel <= opts.rel_tol {
            if opts.zero_mean {
                remove_mean(x);
            }
            return CgStats { iterations: it, residual: rel, converged: true, history };
        }
        precond(&r, &mut z);
        if opts.zero_mean {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    if opts.zero_mean {
        remove_mean(x);
    }
    CgStats { iterations: opts.max_iter, residual: rel, converged: false, history }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // tridiagonal [-1, 3, -1]
        let n = 20;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                y[i] = 3.0 * x[i] - l - r;
            }
        };
        let want: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = vec![0.0; n];
        apply(&want, &mut b);
        let mut x = vec![0.0; n];
        let st = pcg(
            apply,
            |r, z| z.copy_from_slice(r),
            &b,
            &mut x,
            CgOptions { rel_tol: 1e-14, max_iter: 100, zero_mean: false },
        );
        assert!(st.converged);
        for (a, w) in x.iter().zip(&want) {
            assert!((a - w).abs() < 1e-12);
        }
    }

    #[test]
    fn reports_non_convergence() {
        let st = pcg(
            |x, y| y.copy_from_slice(x),
            |r, z| z.iter_mut().zip(r).for_each(|(a, b)| *a = 0.5 * b),
            &[1.0, 2.0],
            &mut [0.0, 0.0],
            CgOptions { rel_tol: 1e-30, max_iter: 0, zero_mean: false },
        );
        assert!(!st.converged);
        assert!(st.check("test").is_err());
    }
}
