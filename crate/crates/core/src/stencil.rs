//! Finite-difference plumbing shared by the steady-state solver and the
//! time integrator: second-order interior stencils for `D·ξ″ − v·ξ′`,
//! one-sided second-order boundary rows for the Robin inlet and Neumann
//! outlet conditions, and a solver for the resulting almost-tridiagonal
//! systems.
//!
//! The boundary rows touch three nodes each, so the assembled matrix is
//! tridiagonal except for one extra entry in the first and last rows. One
//! exact row operation against the adjacent interior row removes each extra
//! entry, after which the Thomas algorithm applies.

use crate::error::{Error, Result};
use crate::model::ReactorParams;
use crate::numerics;

/// Central-difference coefficients of the transport operator
/// `A_h = D·δ² − v·δ` at an interior node: `(sub, diag, sup)` multiplying
/// `(ξ_{i−1}, ξ_i, ξ_{i+1})`.
pub(crate) fn interior_coefficients(params: &ReactorParams, h: f64) -> (f64, f64, f64) {
    let diffusion = params.d / (h * h);
    let advection = params.v / (2.0 * h);
    (diffusion + advection, -2.0 * diffusion, diffusion - advection)
}

/// Inlet constraint row `(1−α)·ξ₀ − (D/v)·ξ′(0) = 0` with the one-sided
/// O(h²) derivative `ξ′(0) ≈ (−3ξ₀ + 4ξ₁ − ξ₂)/(2h)`; coefficients on
/// `(ξ₀, ξ₁, ξ₂)`.
pub(crate) fn robin_inlet_row(params: &ReactorParams, alpha: f64, h: f64) -> [f64; 3] {
    let scale = params.d / (params.v * 2.0 * h);
    [1.0 - alpha + 3.0 * scale, -4.0 * scale, scale]
}

/// Outlet constraint row `ξ′(l) ≈ (ξ_{n−3} − 4ξ_{n−2} + 3ξ_{n−1})/(2h) = 0`;
/// coefficients on `(ξ_{n−3}, ξ_{n−2}, ξ_{n−1})`.
pub(crate) fn neumann_outlet_row(h: f64) -> [f64; 3] {
    let scale = 1.0 / (2.0 * h);
    [scale, -4.0 * scale, 3.0 * scale]
}

/// A tridiagonal matrix whose first and last rows each carried one extra
/// entry, already folded away; `solve` replays the same row operations on
/// the right-hand side.
#[derive(Debug, Clone)]
pub(crate) struct ConstrainedTridiagonal {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    fold_first: f64,
    fold_last: f64,
}

impl ConstrainedTridiagonal {
    /// Assembles the system with `inlet`/`outlet` three-point constraint
    /// rows and `interior(i) -> (sub, diag, sup)` for rows `1..n−1`.
    pub fn assemble(
        n: usize,
        inlet: [f64; 3],
        outlet: [f64; 3],
        interior: impl Fn(usize) -> (f64, f64, f64),
    ) -> Result<Self> {
        assert!(n >= 3, "need at least 3 nodes");
        let mut lower = vec![0.0; n - 1];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n - 1];
        for i in 1..n - 1 {
            let (sub, mid, sup) = interior(i);
            lower[i - 1] = sub;
            diag[i] = mid;
            upper[i] = sup;
        }

        // Fold the inlet row's third entry using interior row 1.
        if upper[1].abs() < 1e-300 {
            return Err(Error::SingularMatrix { row: 0, pivot: upper[1] });
        }
        let fold_first = inlet[2] / upper[1];
        diag[0] = inlet[0] - fold_first * lower[0];
        upper[0] = inlet[1] - fold_first * diag[1];

        // Fold the outlet row's first entry using interior row n−2.
        if lower[n - 3].abs() < 1e-300 {
            return Err(Error::SingularMatrix {
                row: n - 1,
                pivot: lower[n - 3],
            });
        }
        let fold_last = outlet[0] / lower[n - 3];
        lower[n - 2] = outlet[1] - fold_last * diag[n - 2];
        diag[n - 1] = outlet[2] - fold_last * upper[n - 2];

        Ok(Self {
            lower,
            diag,
            upper,
            fold_first,
            fold_last,
        })
    }

    /// Solves the folded system; `rhs` is given in original (unfolded) form.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        assert_eq!(rhs.len(), n);
        let mut folded = rhs.to_vec();
        folded[0] -= self.fold_first * rhs[1];
        folded[n - 1] -= self.fold_last * rhs[n - 2];
        numerics::solve_tridiagonal(&self.lower, &self.diag, &self.upper, &folded)
    }
}
