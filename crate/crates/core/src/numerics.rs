//! Shared numerical kernels: bracketed scalar root finding, tridiagonal
//! solves, trapezoidal L² norms, and least-squares line fits.
//!
//! Every function here is pure; callers may invoke them concurrently.

use crate::error::{Error, Result};
use crate::model::Profile;

/// Iteration cap for [`find_root`].
pub const ROOT_ITERATION_CAP: usize = 200;

/// Default termination tolerance (bracket width) for [`find_root`].
pub const ROOT_DEFAULT_TOL: f64 = 1e-12;

/// An interval `[lo, hi]` known to enclose a sign change of some function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
}

impl Bracket {
    /// Validates `lo < hi` and `f_lo * f_hi <= 0` (a zero endpoint counts).
    pub fn new(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(lo < hi) || !f_lo.is_finite() || !f_hi.is_finite() || f_lo * f_hi > 0.0 {
            return Err(Error::InvalidBracket { lo, hi, f_lo, f_hi });
        }
        Ok(Self { lo, hi, f_lo, f_hi })
    }

    /// Evaluates `f` at both ends and validates the sign change.
    pub fn from_fn<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> Result<Self> {
        Self::new(lo, hi, f(lo), f(hi))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Scans `[lo, hi]` with `steps` uniform sub-intervals and returns every
/// sub-interval whose endpoints change sign, in increasing order.
///
/// Exact zeros at scan points are returned as degenerate-width brackets of
/// one step around the hit.
pub fn find_sign_changes<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, steps: usize) -> Vec<Bracket> {
    assert!(steps >= 1 && lo < hi, "scan requires lo < hi and steps >= 1");
    let mut brackets = Vec::new();
    let dx = (hi - lo) / steps as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=steps {
        let x = if i == steps { hi } else { lo + i as f64 * dx };
        let fx = f(x);
        if f_prev.is_finite() && fx.is_finite() && f_prev * fx <= 0.0 && !(f_prev == 0.0 && fx == 0.0)
        {
            // Skip duplicate detection when the shared endpoint was the zero.
            let duplicate = brackets
                .last()
                .is_some_and(|b: &Bracket| b.f_hi == 0.0 && b.hi == x_prev);
            if !duplicate {
                brackets.push(Bracket {
                    lo: x_prev,
                    hi: x,
                    f_lo: f_prev,
                    f_hi: fx,
                });
            }
        }
        x_prev = x;
        f_prev = fx;
    }
    brackets
}

/// Finds a root of `f` inside `bracket` to bracket width `tol`.
///
/// Alternates bisection with secant steps; a secant proposal is used only
/// when it falls strictly inside the current bracket, so the iterate can
/// never escape. This matters here because the spectral equations have
/// poles right next to their roots.
pub fn find_root<F: Fn(f64) -> f64>(f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol = {tol} must be > 0")));
    }
    let Bracket {
        mut lo,
        mut hi,
        mut f_lo,
        mut f_hi,
    } = bracket;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    for iter in 0..ROOT_ITERATION_CAP {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        // Every other iteration tries a secant step for faster tail
        // convergence; bisection on the alternate iterations guarantees the
        // bracket width halves at least every two rounds.
        let x = if iter % 2 == 1 {
            let secant = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if secant > lo + 0.01 * (hi - lo) && secant < hi - 0.01 * (hi - lo) {
                secant
            } else {
                mid
            }
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if f_lo * fx < 0.0 {
            hi = x;
            f_hi = fx;
        } else {
            lo = x;
            f_lo = fx;
        }
    }
    Err(Error::NoConvergence {
        iterations: ROOT_ITERATION_CAP,
        context: format!("root bracket [{lo}, {hi}] still wider than {tol}"),
    })
}

/// Solves a tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` multiplies `x[i]` in row `i + 1`, `upper[i]` multiplies
/// `x[i + 1]` in row `i`. Returns `SingularMatrix` when a pivot magnitude
/// drops below 1e-300.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n >= 1, "empty system");
    assert_eq!(lower.len(), n - 1, "lower diagonal length");
    assert_eq!(upper.len(), n - 1, "upper diagonal length");
    assert_eq!(rhs.len(), n, "rhs length");

    let mut c_prime = vec![0.0; n - 1];
    let mut d_prime = vec![0.0; n];

    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 {
        return Err(Error::SingularMatrix { row: 0, pivot });
    }
    if n > 1 {
        c_prime[0] = upper[0] / pivot;
    }
    d_prime[0] = rhs[0] / pivot;

    for i in 1..n {
        pivot = diag[i] - lower[i - 1] * c_prime[i - 1];
        if pivot.abs() < 1e-300 {
            return Err(Error::SingularMatrix { row: i, pivot });
        }
        if i < n - 1 {
            c_prime[i] = upper[i] / pivot;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / pivot;
    }

    let mut x = d_prime;
    for i in (0..n - 1).rev() {
        x[i] -= c_prime[i] * x[i + 1];
    }
    Ok(x)
}

/// Trapezoidal approximation of `(∫ p(x)² dx)^{1/2}` over the profile's grid.
pub fn l2_norm(p: &Profile) -> f64 {
    l2_norm_sampled(p.values(), p.grid().spacing())
}

/// Trapezoid rule for the L² norm of uniformly sampled values.
pub fn l2_norm_sampled(values: &[f64], spacing: f64) -> f64 {
    assert!(values.len() >= 2, "l2_norm needs at least 2 samples");
    let mut acc = 0.5 * (values[0] * values[0] + values[values.len() - 1] * values[values.len() - 1]);
    for v in &values[1..values.len() - 1] {
        acc += v * v;
    }
    (acc * spacing).sqrt()
}

/// An ordinary least-squares line `y ≈ slope·t + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square of the fit residuals; always >= 0.
    pub residual_rms: f64,
}

/// Least-squares slope and intercept of `y` against `t`.
pub fn fit_line(t: &[f64], y: &[f64]) -> Result<LineFit> {
    assert_eq!(t.len(), y.len(), "sample length mismatch");
    let m = t.len();
    if m < 2 {
        return Err(Error::DegenerateInput(format!(
            "line fit needs at least 2 samples, got {m}"
        )));
    }
    let mf = m as f64;
    let t_mean = t.iter().sum::<f64>() / mf;
    let y_mean = y.iter().sum::<f64>() / mf;
    let mut stt = 0.0;
    let mut sty = 0.0;
    for i in 0..m {
        let dt = t[i] - t_mean;
        stt += dt * dt;
        sty += dt * (y[i] - y_mean);
    }
    if stt == 0.0 {
        return Err(Error::DegenerateInput("all abscissae equal".into()));
    }
    let slope = sty / stt;
    let intercept = y_mean - slope * t_mean;
    let mut ss = 0.0;
    for i in 0..m {
        let r = y[i] - (slope * t[i] + intercept);
        ss += r * r;
    }
    Ok(LineFit {
        slope,
        intercept,
        residual_rms: (ss / mf).sqrt(),
    })
}
