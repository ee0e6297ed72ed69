//! Physical model of the boundary-controlled tubular reactor: parameters,
//! feedback configuration, spatial grids and profiles, the invariant-set
//! weight function, and the experiment's initial data.
//!
//! The reactor state C(x, t) obeys
//!
//! ```text
//! ∂C/∂t = D·∂²C/∂x² − v·∂C/∂x − k·Cⁿ          on [0, l],
//! (1 − α)·C(0, t) = (D/v)·∂C/∂x(0, t),          ∂C/∂x(l, t) = 0,
//! ```
//!
//! where the inlet condition is the Danckwerts boundary condition closed by
//! the feedback `u(t) = α·C(0, t)`.

use crate::error::{Error, Result};

/// Physical constants of the reactor equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactorParams {
    /// Axial dispersion coefficient (m²/s).
    pub d: f64,
    /// Flow rate of the reaction stream (m/s).
    pub v: f64,
    /// Reactor tube length (m).
    pub l: f64,
    /// Reaction rate constant (1/(s·molⁿ⁻¹)).
    pub k: f64,
    /// Reaction order (dimensionless).
    pub n: f64,
}

impl ReactorParams {
    /// Validates the physical floor: `d`, `v`, `l` strictly positive,
    /// `k >= 0` (zero is the linear limit), `n > 0`.
    ///
    /// The exponential-stability hypotheses `n > 1` and `k > 0` are checked
    /// by [`validate`], not here, so that out-of-hypothesis configurations
    /// can still be constructed and diagnosed.
    pub fn new(d: f64, v: f64, l: f64, k: f64, n: f64) -> Result<Self> {
        let all_finite = [d, v, l, k, n].iter().all(|x| x.is_finite());
        if !all_finite || d <= 0.0 || v <= 0.0 || l <= 0.0 || k < 0.0 || n <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "reactor parameters must satisfy D, v, l > 0, k >= 0, n > 0 (got D={d}, v={v}, l={l}, k={k}, n={n})"
            )));
        }
        Ok(Self { d, v, l, k, n })
    }

    /// `true` when the reaction order is an integer, in which case `Cⁿ` is
    /// defined for negative bases and no clamping is ever needed.
    pub fn integer_order(&self) -> bool {
        self.n.fract() == 0.0
    }

    /// `Cⁿ` with an exact integer fast path.
    pub fn reaction_power(&self, c: f64) -> f64 {
        if self.integer_order() {
            c.powi(self.n as i32)
        } else {
            c.powf(self.n)
        }
    }
}

impl Default for ReactorParams {
    /// Baseline experiment constants: k = 0.001, v = 0.01, l = 1,
    /// D = 0.0025, n = 2.
    fn default() -> Self {
        Self {
            d: 0.0025,
            v: 0.01,
            l: 1.0,
            k: 0.001,
            n: 2.0,
        }
    }
}

/// Reactor parameters plus the feedback gain and invariant-set amplitude.
///
/// Construction is unchecked so that out-of-hypothesis setups (α ≥ 1,
/// n ≤ 1, ...) can be built and then diagnosed with [`validate`]. The
/// operations that mathematically require α < 1 return errors instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedLoopSetup {
    pub params: ReactorParams,
    /// Feedback gain α in u(t) = α·C(0, t).
    pub alpha: f64,
    /// Invariant-set amplitude M bounding profiles by M·φ(x) (mol/m²).
    pub m_amplitude: f64,
}

impl ClosedLoopSetup {
    pub fn new(params: ReactorParams, alpha: f64, m_amplitude: f64) -> Self {
        Self {
            params,
            alpha,
            m_amplitude,
        }
    }
}

/// Outcome of checking a setup against the stabilization hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// One human-readable entry per violated hypothesis; empty when valid.
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the exponential-stability hypotheses: n > 1, α < 1, k > 0, and
/// positivity of the amplitude M. Returns a report, never an error.
pub fn validate(setup: &ClosedLoopSetup) -> ValidationReport {
    let mut violations = Vec::new();
    if !(setup.params.n > 1.0) {
        violations.push(format!("n > 1 violated: n = {}", setup.params.n));
    }
    if !(setup.alpha < 1.0) {
        violations.push(format!("alpha < 1 violated: alpha = {}", setup.alpha));
    }
    if !(setup.params.k > 0.0) {
        violations.push(format!("k > 0 violated: k = {}", setup.params.k));
    }
    if !(setup.m_amplitude > 0.0) {
        violations.push(format!("M > 0 violated: M = {}", setup.m_amplitude));
    }
    ValidationReport { violations }
}

/// A closed uniform grid over `[0, l]` including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(l: f64, n_points: usize) -> Result<Self> {
        if !(l > 0.0) || n_points < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid needs l > 0 and at least 3 points (got l={l}, n_points={n_points})"
            )));
        }
        Ok(Self {
            l,
            n_points,
            spacing: l / (n_points - 1) as f64,
        })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Coordinate of node `i`; the last node lands on `l` exactly.
    pub fn x(&self, i: usize) -> f64 {
        if i == self.n_points - 1 {
            self.l
        } else {
            i as f64 * self.spacing
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.x(i))
    }
}

/// A spatial function sampled on a uniform grid over `[0, l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    /// Validates the value count and finiteness.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::InvalidParameter(format!(
                "profile has {} values for a {}-point grid",
                values.len(),
                grid.n_points()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite profile value {bad}")));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every grid node.
    pub fn sample(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(*grid, grid.xs().map(f).collect())
    }

    pub fn zero(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Shape of the experiment's initial data: scale factor μ and the gain
/// ceiling α_max used to anchor the amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub mu: f64,
    pub alpha_max: f64,
}

impl InitialDataSpec {
    pub fn new(mu: f64, alpha_max: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) || !(alpha_max < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "initial data spec needs 0 < mu < 1 and alpha_max < 1 (got mu={mu}, alpha_max={alpha_max})"
            )));
        }
        Ok(Self { mu, alpha_max })
    }
}

impl Default for InitialDataSpec {
    /// Baseline experiment choice: μ = 0.9, α_max = 0.95.
    fn default() -> Self {
        Self {
            mu: 0.9,
            alpha_max: 0.95,
        }
    }
}

/// The weight function φ(x) = −(x−l)² + l² + 2Dl/(v(1−α)).
///
/// φ is strictly positive and non-decreasing on [0, l] whenever α < 1, and
/// satisfies both closed-loop boundary relations exactly:
/// (1−α)·φ(0) = (D/v)·φ′(0) and φ′(l) = 0.
pub fn phi(setup: &ClosedLoopSetup, x: f64) -> Result<f64> {
    let p = &setup.params;
    if !(setup.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "phi requires alpha < 1, got {}",
            setup.alpha
        )));
    }
    if !(0.0..=p.l).contains(&x) {
        return Err(Error::OutOfDomain {
            what: "x",
            value: x,
            lo: 0.0,
            hi: p.l,
        });
    }
    Ok(phi_unchecked(p, setup.alpha, x))
}

/// φ′(x) = 2(l − x), independent of α.
pub fn phi_prime(params: &ReactorParams, x: f64) -> f64 {
    2.0 * (params.l - x)
}

pub(crate) fn phi_unchecked(params: &ReactorParams, alpha: f64, x: f64) -> f64 {
    let dx = x - params.l;
    -dx * dx + params.l * params.l + 2.0 * params.d * params.l / (params.v * (1.0 - alpha))
}

/// The initial-data amplitude
/// `M* = (−λ₀(α_max)/(kn))^{1/(n−1)} · v(1−α) / (2l²v(1−α) + 4Dl)`.
///
/// Built so that `M*·φ(l)` — and with it the outlet value of the initial
/// data — does not depend on α, which makes decay rates comparable across
/// gains.
pub fn m_star(
    params: &ReactorParams,
    alpha: f64,
    // The anchor gain only enters through the precomputed eigenvalue; the
    // parameter is kept so call sites carry the full initial-data context.
    _spec: &InitialDataSpec,
    lambda0_at_alpha_max: f64,
) -> Result<f64> {
    if !(lambda0_at_alpha_max < 0.0) {
        return Err(Error::InvalidSpectrum {
            lambda0: lambda0_at_alpha_max,
        });
    }
    if !(alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "m_star requires alpha < 1, got {alpha}"
        )));
    }
    let kn = params.k * params.n;
    if kn <= 0.0 {
        return Err(Error::InvalidParameter(
            "m_star needs k > 0 (nonlinear regime)".into(),
        ));
    }
    let scale = (-lambda0_at_alpha_max / kn).powf(1.0 / (params.n - 1.0));
    let one_minus = 1.0 - alpha;
    Ok(scale * params.v * one_minus
        / (2.0 * params.l * params.l * params.v * one_minus + 4.0 * params.d * params.l))
}

/// Samples the initial deviation ξ₀(x) = μ·M*·φ(x) on `grid`.
///
/// The result is nonnegative, satisfies both boundary relations exactly
/// (inherited from φ), and its outlet value ξ₀(l) is the same for every
/// α < 1.
pub fn initial_data(
    setup: &ClosedLoopSetup,
    spec: &InitialDataSpec,
    lambda0_at_alpha_max: f64,
    grid: &Grid,
) -> Result<Profile> {
    let amplitude = spec.mu * m_star(&setup.params, setup.alpha, spec, lambda0_at_alpha_max)?;
    Profile::sample(grid, |x| amplitude * phi_unchecked(&setup.params, setup.alpha, x))
}
