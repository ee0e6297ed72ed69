//! Decay-rate characteristics of the closed loop: the Lipschitz bound L of
//! the reaction increment over the invariant set, the certified rate
//! λ_T = λ₀ + L, and the observed Lyapunov exponent fitted from a
//! simulated norm history.

use crate::error::{Error, Result};
use crate::model::ClosedLoopSetup;
use crate::numerics::{self, LineFit};
use crate::pde_sim::{TrajectoryRecord, NORM_FLOOR_REL};

/// Default trailing fraction of above-floor samples used for the
/// Lyapunov-exponent fit.
pub const DEFAULT_FIT_WINDOW: f64 = 0.5;

/// Per-gain decay characteristics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub alpha: f64,
    /// Principal eigenvalue of the linear operator (1/s).
    pub lambda0: f64,
    /// Lipschitz constant of the reaction increment (1/s).
    pub lipschitz_l: f64,
    /// Certified exponent λ_T = λ₀ + L, reported signed and never clamped.
    pub lambda_t: f64,
    /// Fitted Lyapunov exponent from a simulation, when one was run (1/s).
    pub lambda_num: Option<f64>,
    /// Whether the contraction condition L < −λ₀ holds strictly (K = 1).
    pub certificate_holds: bool,
    /// Certified decay rate ω = −λ₀ − L = −λ_T.
    pub omega: f64,
}

impl DecayReport {
    pub fn with_lambda_num(mut self, lambda_num: f64) -> Self {
        self.lambda_num = Some(lambda_num);
        self
    }
}

/// Lipschitz constant of the reaction increment over the invariant set:
///
/// ```text
/// L = k·n·(M·(l²v(1−α) + 2Dl)/(v(1−α)))^{n−1},
/// ```
///
/// whose inner factor equals M·φ(l).
pub fn lipschitz_constant(setup: &ClosedLoopSetup) -> f64 {
    let p = &setup.params;
    let one_minus = 1.0 - setup.alpha;
    let inner = setup.m_amplitude * (p.l * p.l * p.v * one_minus + 2.0 * p.d * p.l)
        / (p.v * one_minus);
    p.k * p.n * inner.powf(p.n - 1.0)
}

/// Assembles the certified-rate report with the contraction-semigroup
/// growth constant K = 1, which this reactor model admits.
pub fn theoretical_rate(setup: &ClosedLoopSetup, lambda0: f64) -> Result<DecayReport> {
    theoretical_rate_with_growth(setup, lambda0, 1.0)
}

/// General-K variant: the certified exponent is λ₀/K² + L and the
/// certificate requires L < −λ₀/K² strictly.
pub fn theoretical_rate_with_growth(
    setup: &ClosedLoopSetup,
    lambda0: f64,
    growth_k: f64,
) -> Result<DecayReport> {
    if !(lambda0 < 0.0) {
        return Err(Error::InvalidSpectrum { lambda0 });
    }
    if !(growth_k >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "growth constant K = {growth_k} must be >= 1"
        )));
    }
    let lipschitz_l = lipschitz_constant(setup);
    let lambda_t = lambda0 / (growth_k * growth_k) + lipschitz_l;
    Ok(DecayReport {
        alpha: setup.alpha,
        lambda0,
        lipschitz_l,
        lambda_t,
        lambda_num: None,
        certificate_holds: lipschitz_l < -lambda0 / (growth_k * growth_k),
        omega: -lambda_t,
    })
}

/// Fits the Lyapunov exponent as the least-squares slope of ln‖ξ(t)‖ over
/// the trailing `window_fraction` of samples that sit above the norm
/// floor.
pub fn lyapunov_exponent(record: &TrajectoryRecord, window_fraction: f64) -> Result<LineFit> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "window fraction {window_fraction} must lie in (0, 1]"
        )));
    }
    let floor = NORM_FLOOR_REL * record.norms.first().copied().unwrap_or(0.0);
    let eligible: Vec<(f64, f64)> = record
        .times
        .iter()
        .zip(&record.norms)
        .filter(|(_, &n)| n > floor && n > 0.0)
        .map(|(&t, &n)| (t, n.ln()))
        .collect();
    let window_len = ((eligible.len() as f64) * window_fraction).ceil() as usize;
    if window_len < 10 {
        return Err(Error::InsufficientData(format!(
            "only {window_len} above-floor samples in the fitting window (need 10)"
        )));
    }
    let window = &eligible[eligible.len() - window_len..];
    let t: Vec<f64> = window.iter().map(|(t, _)| *t).collect();
    let ln_n: Vec<f64> = window.iter().map(|(_, ln)| *ln).collect();
    numerics::fit_line(&t, &ln_n)
}
