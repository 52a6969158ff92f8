//! Bound-constrained least squares for one magnitude row.
//!
//! Minimizes
//!
//! ```text
//! f(x) = ‖A x − t‖² + λ ‖x − m‖²,   x ≥ 0
//! ```
//!
//! where `A` is the sliding window sum of width `ℓ`. Both `A` and `Aᵀ` run
//! in `O(N)` through running sums, so each iteration is linear in the row
//! length regardless of `ℓ`. The solver is accelerated projected gradient
//! with a fixed step `1/L`, `L = 2(ℓ² + λ)`, and gradient-based restarts.

use alloc::vec;
use alloc::vec::Vec;


use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 5000;

/// The objective for one row, with its data.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    pub original: &'a [f64],
    pub target: &'a [f64],
    pub ell: usize,
    pub lam: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn apply_sws(x: &[f64], ell: usize, out: &mut [f64]) {
    let mut acc: f64 = x[..ell].iter().sum();
    out[0] = acc;
    for j in 1..out.len() {
        acc += x[j + ell - 1] - x[j - 1];
        out[j] = acc;
    }
}

fn apply_adjoint(r: &[f64], ell: usize, out: &mut [f64]) {
    // out[m] = Σ r[j] over j in [m − ℓ + 1, m] ∩ [0, len(r)).
    let nr = r.len();
    let mut acc = 0.0;
    for m in 0..out.len() {
        if m < nr {
            acc += r[m];
        }
        if m >= ell {
            acc -= r[m - ell];
        }
        out[m] = acc;
    }
}

impl<'a> Objective<'a> {
    pub fn new(original: &'a [f64], target: &'a [f64], ell: usize, lam: f64) -> Result<Self> {
        let n = original.len();
        if ell == 0 || ell > n {
            return Err(Error::SlidingWindowOutOfRange { window: ell, len: n });
        }
        if target.len() != n - ell + 1 {
            return Err(Error::DimensionMismatch(alloc::format!(
                "target has {} entries, expected {}",
                target.len(),
                n - ell + 1
            )));
        }
        if !(lam >= 0.0) || !lam.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("lambda must be finite and >= 0, got {lam}")));
        }
        if original.iter().chain(target).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite input".into()));
        }
        if original.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter("original magnitudes must be nonnegative".into()));
        }
        Ok(Self { original, target, ell, lam })
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut r = vec![0.0; self.target.len()];
        apply_sws(x, self.ell, &mut r);
        let fit: f64 = r.iter().zip(self.target).map(|(a, t)| (a - t) * (a - t)).sum();
        let keep: f64 = x.iter().zip(self.original).map(|(a, m)| (a - m) * (a - m)).sum();
        fit + self.lam * keep
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.target.len()];
        let mut g = vec![0.0; x.len()];
        self.value_and_gradient(x, &mut r, &mut g);
        g
    }

    fn value_and_gradient(&self, x: &[f64], r: &mut [f64], g: &mut [f64]) -> f64 {
        apply_sws(x, self.ell, r);
        let mut fit = 0.0;
        for (ri, t) in r.iter_mut().zip(self.target) {
            *ri -= t;
            fit += *ri * *ri;
        }
        apply_adjoint(r, self.ell, g);
        let mut keep = 0.0;
        for ((gi, xi), m) in g.iter_mut().zip(x).zip(self.original) {
            let d = xi - m;
            keep += d * d;
            *gi = 2.0 * *gi + 2.0 * self.lam * d;
        }
        fit + self.lam * keep
    }

    /// Upper bound on the gradient's Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        2.0 * ((self.ell * self.ell) as f64 + self.lam)
    }
}

/// Norm of the projected gradient: components pushing into the bound at
/// zero are dropped.
pub fn projected_gradient_norm(x: &[f64], g: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| if xi > 0.0 { gi } else { gi.min(0.0) })
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Solves for a perturbed magnitude row, starting from the original row.
///
/// Stops when the projected gradient norm drops below
/// `tol · max(1, initial norm)` or after `max_iter` iterations; the best
/// iterate seen is returned either way, so the objective never exceeds its
/// value at the original row.
pub fn solve_magnitudes(
    m_row: &[f64],
    t_row: &[f64],
    ell: usize,
    lam: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let obj = Objective::new(m_row, t_row, ell, lam)?;
    let n = m_row.len();
    let step = 1.0 / obj.lipschitz();
    let mut r = vec![0.0; t_row.len()];
    let mut g = vec![0.0; n];

    let mut x = m_row.to_vec();
    let initial = obj.value_and_gradient(&x, &mut r, &mut g);
    let threshold = tol * projected_gradient_norm(&x, &g).max(1.0);
    let mut best = x.clone();
    let mut best_value = initial;
    if projected_gradient_norm(&x, &g) <= threshold {
        return Ok(SolveReport { solution: x, objective: initial, initial_objective: initial, iterations: 0, converged: true });
    }

    let mut y = x.clone();
    let mut x_prev = x.clone();
    let mut momentum = 1.0f64;
    let mut gx = vec![0.0; n];
    for iter in 1..=max_iter {
        obj.value_and_gradient(&y, &mut r, &mut g);
        for i in 0..n {
            x_prev[i] = x[i];
            x[i] = (y[i] - step * g[i]).max(0.0);
        }
        let value = obj.value_and_gradient(&x, &mut r, &mut gx);
        if value < best_value {
            best_value = value;
            best.copy_from_slice(&x);
        }
        if projected_gradient_norm(&x, &gx) <= threshold {
            return Ok(SolveReport {
                solution: best,
                objective: best_value,
                initial_objective: initial,
                iterations: iter,
                converged: true,
            });
        }
        // Restart when the momentum direction disagrees with descent.
        let uphill: f64 = (0..n).map(|i| g[i] * (x[i] - x_prev[i])).sum();
        if uphill > 0.0 {
            momentum = 1.0;
            y.copy_from_slice(&x);
            continue;
        }
        let next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / next;
        momentum = next;
        for i in 0..n {
            y[i] = x[i] + beta * (x[i] - x_prev[i]);
        }
    }
    Ok(SolveReport {
        solution: best,
        objective: best_value,
        initial_objective: initial,
        iterations: max_iter,
        converged: false,
    })
}
