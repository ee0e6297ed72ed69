//! Time integration of the closed-loop nonlinear parabolic equation.
//!
//! The spatial discretization is the shared second-order stencil set; time
//! stepping is IMEX Crank–Nicolson: the transport part `A_h = D·δ² − v·δ`
//! is treated implicitly (trapezoidal), the reaction nonlinearity
//! explicitly at the half step through an Euler predictor. Boundary rows of
//! the implicit system carry the discrete Robin/Neumann constraints
//! directly.
//!
//! Default working variable is the deviation ξ = C − C̄; the raw form
//! (integrating C itself and subtracting C̄ in post-processing) is kept for
//! cross-validation.

use crate::error::{Error, Result};
use crate::model::{ClosedLoopSetup, Grid, Profile};
use crate::numerics;
use crate::stencil::{
    interior_coefficients, neumann_outlet_row, robin_inlet_row, ConstrainedTridiagonal,
};

/// Time stepping halts once ‖ξ(t)‖ drops below this fraction of ‖ξ₀‖, to
/// keep log-norm fits away from round-off noise.
pub const NORM_FLOOR_REL: f64 = 1e-13;

/// Relative cushion defining `tol_inv` for invariant-set monitoring.
pub const INVARIANT_TOL_REL: f64 = 1e-8;

/// Which variable the integrator advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimForm {
    /// Advance ξ(t) with reaction increment r(ξ) = k·C̄ⁿ − k·(ξ+C̄)ⁿ.
    Deviation,
    /// Advance C(t) with reaction −k·Cⁿ; deviations are formed afterwards.
    Raw,
}

/// Integration configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    /// Time step (s).
    pub dt: f64,
    /// Horizon (s); the run may stop earlier at the norm floor.
    pub t_final: f64,
    /// A state snapshot is kept every this many steps.
    pub snapshot_stride: usize,
    pub form: SimForm,
}

impl SimConfig {
    pub fn new(grid: Grid, dt: f64, t_final: f64, snapshot_stride: usize, form: SimForm) -> Result<Self> {
        if !(dt > 0.0) || !(t_final >= dt) || snapshot_stride == 0 {
            return Err(Error::InvalidParameter(format!(
                "sim config needs dt > 0, t_final >= dt, snapshot_stride >= 1 (got dt={dt}, t_final={t_final}, stride={snapshot_stride})"
            )));
        }
        Ok(Self {
            grid,
            dt,
            t_final,
            snapshot_stride,
            form,
        })
    }

    /// Baseline run: dt = 0.05 s, horizon 2000 s, one snapshot per 400
    /// steps, deviation form.
    pub fn baseline(grid: Grid) -> Self {
        Self {
            grid,
            dt: 0.05,
            t_final: 2000.0,
            snapshot_stride: 400,
            form: SimForm::Deviation,
        }
    }
}

/// Everything recorded along one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// Strictly increasing sample times, starting at 0 (s).
    pub times: Vec<f64>,
    /// ‖ξ(t)‖ in L²(0, l) at each sample time.
    pub norms: Vec<f64>,
    /// Snapshots of the physical concentration C = ξ + C̄.
    pub snapshots: Vec<(f64, Profile)>,
    /// Count of (step, node) pairs where C left `[−tol_inv, Mφ + tol_inv]`.
    pub invariant_violations: usize,
}

/// The reusable Crank–Nicolson step: the factored implicit system
/// `(I − dt/2·A_h)` with constraint boundary rows, plus the explicit
/// stencil for the right-hand side.
#[derive(Debug, Clone)]
pub struct StepOperator {
    system: ConstrainedTridiagonal,
    diffusion: f64,
    advection: f64,
    dt: f64,
    n: usize,
}

/// Builds the Crank–Nicolson pair for the transport operator on `grid`.
///
/// Interior rows of the implicit matrix hold `I − dt/2·A_h`; the first and
/// last rows are replaced by the discrete Robin and Neumann constraints
/// (with zero right-hand side), so boundary conditions hold at every step.
pub fn step_operator(setup: &ClosedLoopSetup, grid: &Grid, dt: f64) -> Result<StepOperator> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt = {dt} must be > 0")));
    }
    let params = &setup.params;
    let h = grid.spacing();
    let n = grid.n_points();
    let (a_sub, a_diag, a_sup) = interior_coefficients(params, h);
    let inlet = robin_inlet_row(params, setup.alpha, h);
    let outlet = neumann_outlet_row(h);
    let system = ConstrainedTridiagonal::assemble(n, inlet, outlet, |_| {
        (
            -0.5 * dt * a_sub,
            1.0 - 0.5 * dt * a_diag,
            -0.5 * dt * a_sup,
        )
    })?;
    Ok(StepOperator {
        system,
        diffusion: params.d / (h * h),
        advection: params.v / (2.0 * h),
        dt,
        n,
    })
}

impl StepOperator {
    /// Applies the discrete transport operator `A_h` at interior nodes;
    /// boundary entries of `out` are set to zero. The grouped form makes
    /// constant states map to exact zeros.
    pub fn apply_transport(&self, state: &[f64], out: &mut [f64]) {
        assert_eq!(state.len(), self.n);
        assert_eq!(out.len(), self.n);
        out[0] = 0.0;
        out[self.n - 1] = 0.0;
        for i in 1..self.n - 1 {
            out[i] = self.diffusion * (state[i - 1] - 2.0 * state[i] + state[i + 1])
                + self.advection * (state[i - 1] - state[i + 1]);
        }
    }

    /// One Crank–Nicolson step: `transport` must hold `A_h·state` (as from
    /// [`Self::apply_transport`]) and `reaction_half` the explicit reaction
    /// term at the half step; boundary rows get zero right-hand side.
    pub fn advance(&self, state: &[f64], transport: &[f64], reaction_half: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            rhs[i] = state[i] + 0.5 * self.dt * transport[i] + self.dt * reaction_half[i];
        }
        self.system.solve(&rhs)
    }
}

/// Reaction power with deterministic clamping: fractional orders see
/// negative bases clamped to zero (integer orders are exact on negatives).
fn reaction_power_clamped(setup: &ClosedLoopSetup, c: f64) -> f64 {
    if setup.params.integer_order() {
        setup.params.reaction_power(c)
    } else {
        setup.params.reaction_power(c.max(0.0))
    }
}

/// Accumulates the trajectory record while a run is in flight: norms and
/// times at every step, snapshots of C, and nodewise invariant-set
/// violation counts against the envelope M·φ.
struct Recorder<'a> {
    setup: &'a ClosedLoopSetup,
    cfg: &'a SimConfig,
    cbar: &'a [f64],
    m_phi: Vec<f64>,
    tol_inv: f64,
    times: Vec<f64>,
    norms: Vec<f64>,
    snapshots: Vec<(f64, Profile)>,
    violations: usize,
    deviation: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(setup: &'a ClosedLoopSetup, cfg: &'a SimConfig, cbar: &'a [f64]) -> Self {
        let m_phi: Vec<f64> = cfg
            .grid
            .xs()
            .map(|x| setup.m_amplitude * crate::model::phi_unchecked(&setup.params, setup.alpha, x))
            .collect();
        let tol_inv = INVARIANT_TOL_REL * m_phi.iter().fold(0.0f64, |m, v| m.max(*v));
        let n = cfg.grid.n_points();
        Recorder {
            setup,
            cfg,
            cbar,
            m_phi,
            tol_inv,
            times: Vec::new(),
            norms: Vec::new(),
            snapshots: Vec::new(),
            violations: 0,
            deviation: vec![0.0; n],
        }
    }

    fn concentration_at(&self, state_i: f64, cbar_i: f64) -> f64 {
        match self.cfg.form {
            SimForm::Deviation => state_i + cbar_i,
            SimForm::Raw => state_i,
        }
    }

    /// Records one sample; returns the deviation norm ‖ξ(t)‖.
    fn record(&mut self, t: f64, state: &[f64], snapshot: bool) -> Result<f64> {
        let integer_order = self.setup.params.integer_order();
        for i in 0..state.len() {
            let c = self.concentration_at(state[i], self.cbar[i]);
            if c < -self.tol_inv || c > self.m_phi[i] + self.tol_inv {
                self.violations += 1;
            }
            if !integer_order && c < -self.tol_inv {
                return Err(Error::NegativeConcentration { t, value: c });
            }
            self.deviation[i] = match self.cfg.form {
                SimForm::Deviation => state[i],
                SimForm::Raw => state[i] - self.cbar[i],
            };
        }
        let norm = numerics::l2_norm_sampled(&self.deviation, self.cfg.grid.spacing());
        self.times.push(t);
        self.norms.push(norm);
        if snapshot {
            let concentrations = state
                .iter()
                .zip(self.cbar)
                .map(|(&s, &c)| self.concentration_at(s, c))
                .collect();
            self.snapshots.push((t, Profile::new(self.cfg.grid, concentrations)?));
        }
        Ok(norm)
    }

    fn finish(self) -> TrajectoryRecord {
        TrajectoryRecord {
            times: self.times,
            norms: self.norms,
            snapshots: self.snapshots,
            invariant_violations: self.violations,
        }
    }
}

/// Integrates the closed loop from `xi0` around the reference profile
/// `steady`, recording ‖ξ(t)‖ at every step, snapshots of C every
/// `snapshot_stride` steps, and invariant-set compliance nodewise.
pub fn simulate(
    setup: &ClosedLoopSetup,
    steady: &Profile,
    xi0: &Profile,
    cfg: &SimConfig,
) -> Result<TrajectoryRecord> {
    if steady.grid() != &cfg.grid || xi0.grid() != &cfg.grid {
        return Err(Error::InvalidParameter(
            "steady profile and initial data must live on the configured grid".into(),
        ));
    }
    let op = step_operator(setup, &cfg.grid, cfg.dt)?;
    let n = cfg.grid.n_points();
    let cbar = steady.values();
    let k = setup.params.k;

    // State is ξ in deviation form, C in raw form.
    let mut state: Vec<f64> = match cfg.form {
        SimForm::Deviation => xi0.values().to_vec(),
        SimForm::Raw => xi0.values().iter().zip(cbar).map(|(x, c)| x + c).collect(),
    };

    // Reaction term as seen by the advanced variable.
    let reaction = |state_i: f64, cbar_i: f64| -> f64 {
        match cfg.form {
            SimForm::Deviation => {
                k * (reaction_power_clamped(setup, cbar_i)
                    - reaction_power_clamped(setup, state_i + cbar_i))
            }
            SimForm::Raw => -k * reaction_power_clamped(setup, state_i),
        }
    };

    let n_steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;
    let mut transport = vec![0.0; n];
    let mut reaction_half = vec![0.0; n];

    let mut recorder = Recorder::new(setup, cfg, cbar);
    let initial_norm = recorder.record(0.0, &state, true)?;
    let floor = NORM_FLOOR_REL * initial_norm;

    for step in 1..=n_steps {
        let t = step as f64 * cfg.dt;
        op.apply_transport(&state, &mut transport);
        // Explicit Euler predictor to the half step, then the reaction term
        // is evaluated there.
        for i in 1..n - 1 {
            let predicted =
                state[i] + 0.5 * cfg.dt * (transport[i] + reaction(state[i], cbar[i]));
            reaction_half[i] = reaction(predicted, cbar[i]);
        }
        state = op.advance(&state, &transport, &reaction_half)?;
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        let snapshot = step % cfg.snapshot_stride == 0 || step == n_steps;
        let norm = recorder.record(t, &state, snapshot)?;
        if norm < floor {
            break;
        }
    }
    Ok(recorder.finish())
}

/// Nodewise bounds of one snapshot relative to the invariant envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnapshotBounds {
    pub time: f64,
    /// Minimum of C over the grid.
    pub min_value: f64,
    /// Maximum of C(x)/(M·φ(x)) over the grid.
    pub max_ratio: f64,
}

/// Invariant-set compliance summary over a recorded trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceSummary {
    pub per_snapshot: Vec<SnapshotBounds>,
    /// Snapshot entries that left `[−tol_inv, Mφ + tol_inv]` somewhere.
    pub flagged_snapshots: usize,
    /// Stepwise violation count carried over from the record.
    pub stepwise_violations: usize,
    pub tol_inv: f64,
}

/// Checks every stored snapshot against `0 ≤ C ≤ M·φ` with the standard
/// cushion.
pub fn invariance_report(record: &TrajectoryRecord, setup: &ClosedLoopSetup) -> InvarianceSummary {
    let mut per_snapshot = Vec::with_capacity(record.snapshots.len());
    let mut flagged = 0usize;
    let mut tol_inv = 0.0;
    for (t, profile) in &record.snapshots {
        let grid = profile.grid();
        let m_phi: Vec<f64> = grid
            .xs()
            .map(|x| setup.m_amplitude * crate::model::phi_unchecked(&setup.params, setup.alpha, x))
            .collect();
        tol_inv = INVARIANT_TOL_REL * m_phi.iter().fold(0.0f64, |m, v| m.max(*v));
        let mut min_value = f64::INFINITY;
        let mut max_ratio = f64::NEG_INFINITY;
        let mut violated = false;
        for (i, &c) in profile.values().iter().enumerate() {
            min_value = min_value.min(c);
            max_ratio = max_ratio.max(c / m_phi[i]);
            if c < -tol_inv || c > m_phi[i] + tol_inv {
                violated = true;
            }
        }
        if violated {
            flagged += 1;
        }
        per_snapshot.push(SnapshotBounds {
            time: *t,
            min_value,
            max_ratio,
        });
    }
    InvarianceSummary {
        per_snapshot,
        flagged_snapshots: flagged,
        stepwise_violations: record.invariant_violations,
        tol_inv,
    }
}

/// Super-solution certificate for the envelope C_max = M·φ, evaluated with
/// exact derivatives (φ′ = 2(l−x), φ″ = −2).
#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionReport {
    /// Minimum over the grid of `−D·C″ + v·C′ + k·Cⁿ` for C = M·φ; must be
    /// nonnegative for the envelope to be a super-solution.
    pub min_interior_slack: f64,
    /// `(D/v)·C′(0) − (1−α)·C(0)`; zero by construction of φ.
    pub inlet_residual: f64,
    /// `C′(l)`; zero by construction of φ.
    pub outlet_residual: f64,
}

/// Evaluates the three super-solution relations for C_max = M·φ nodewise.
pub fn supersolution_check(setup: &ClosedLoopSetup, grid: &Grid) -> Result<SupersolutionReport> {
    let params = &setup.params;
    if !(setup.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "super-solution check requires alpha < 1, got {}",
            setup.alpha
        )));
    }
    let m = setup.m_amplitude;
    let mut min_slack = f64::INFINITY;
    for x in grid.xs() {
        let c = m * crate::model::phi_unchecked(params, setup.alpha, x);
        let c_prime = m * crate::model::phi_prime(params, x);
        let c_second = -2.0 * m;
        let slack = -params.d * c_second + params.v * c_prime + params.k * params.reaction_power(c);
        min_slack = min_slack.min(slack);
    }
    let c0 = m * crate::model::phi_unchecked(params, setup.alpha, 0.0);
    let inlet_residual = params.d / params.v * m * crate::model::phi_prime(params, 0.0)
        - (1.0 - setup.alpha) * c0;
    let outlet_residual = m * crate::model::phi_prime(params, params.l);
    Ok(SupersolutionReport {
        min_interior_slack: min_slack,
        inlet_residual,
        outlet_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{self, ClosedLoopSetup, InitialDataSpec, ReactorParams};
    use crate::{spectral, steady_state};

    fn baseline_setup(alpha: f64) -> ClosedLoopSetup {
        ClosedLoopSetup::new(ReactorParams::default(), alpha, 1.0)
    }

    fn default_initial_data(setup: &ClosedLoopSetup, grid: &Grid) -> Profile {
        let spec = InitialDataSpec::default();
        let lambda0_max = spectral::principal_eigenvalue(&setup.params, spec.alpha_max)
            .unwrap()
            .lambda;
        model::initial_data(setup, &spec, lambda0_max, grid).unwrap()
    }

    #[test]
    fn transport_annihilates_constants_at_interior() {
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 21).unwrap();
        let op = step_operator(&setup, &grid, 0.05).unwrap();
        let state = vec![3.7; 21];
        let mut out = vec![1.0; 21];
        op.apply_transport(&state, &mut out);
        for v in &out[1..20] {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn transport_matches_principal_eigenvalue_action() {
        // A_h applied to a sampled principal eigenfunction reproduces
        // λ₀·ξ with second-order accuracy.
        let setup = baseline_setup(0.9);
        let params = &setup.params;
        let eig = spectral::principal_eigenvalue(params, 0.9).unwrap();
        let err_at = |n: usize| -> f64 {
            let grid = Grid::new(params.l, n).unwrap();
            let xi = spectral::eigenfunction(params, &eig, 0.9, &grid).unwrap();
            let op = step_operator(&setup, &grid, 0.05).unwrap();
            let mut out = vec![0.0; n];
            op.apply_transport(xi.values(), &mut out);
            let mut max_err = 0.0f64;
            for i in 1..n - 1 {
                max_err = max_err.max((out[i] - eig.lambda * xi.values()[i]).abs());
            }
            max_err
        };
        let ratio = err_at(101) / err_at(201);
        assert!(ratio > 3.0 && ratio < 5.0, "ratio = {ratio}");
    }

    #[test]
    fn outlet_row_annihilates_phi_samples() {
        // φ is quadratic with φ′(l) = 0; the one-sided stencil is exact on
        // quadratics, so the outlet constraint row gives 0 to round-off.
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 41).unwrap();
        let h = grid.spacing();
        let phi: Vec<f64> = grid
            .xs()
            .map(|x| model::phi(&setup, x).unwrap())
            .collect();
        let row = crate::stencil::neumann_outlet_row(h);
        let n = phi.len();
        let applied = row[0] * phi[n - 3] + row[1] * phi[n - 2] + row[2] * phi[n - 1];
        assert!(applied.abs() < 1e-10, "outlet row residual {applied}");
    }

    #[test]
    fn equilibrium_stays_put_in_deviation_form() {
        let setup = baseline_setup(0.5);
        let grid = Grid::new(1.0, 101).unwrap();
        let steady = steady_state::solve_steady(&setup, &Profile::zero(&grid), 1e-12, 50)
            .unwrap()
            .profile;
        let cfg = SimConfig::new(grid, 0.05, 20.0, 100, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &steady, &Profile::zero(&grid), &cfg).unwrap();
        assert!(record.norms.iter().all(|&n| n < 1e-12));
    }

    #[test]
    fn equilibrium_stays_put_in_raw_form() {
        let setup = baseline_setup(0.5);
        let grid = Grid::new(1.0, 101).unwrap();
        let cfg = SimConfig::new(grid, 0.05, 20.0, 100, SimForm::Raw).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &Profile::zero(&grid), &cfg).unwrap();
        assert!(record.norms.iter().all(|&n| n < 1e-12));
    }

    #[test]
    fn deviation_and_raw_forms_agree() {
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 81).unwrap();
        let xi0 = default_initial_data(&setup, &grid);
        let steady = Profile::zero(&grid);
        let make = |form| SimConfig::new(grid, 0.05, 50.0, 1000, form).unwrap();
        let dev = simulate(&setup, &steady, &xi0, &make(SimForm::Deviation)).unwrap();
        let raw = simulate(&setup, &steady, &xi0, &make(SimForm::Raw)).unwrap();
        assert_eq!(dev.norms.len(), raw.norms.len());
        for (a, b) in dev.norms.iter().zip(&raw.norms) {
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn linear_limit_decays_at_principal_rate() {
        // k = 0 removes the nonlinearity; the fitted slope of ln‖ξ‖ must
        // match λ₀(α) (here α = 0.5) within 2e−4.
        let params = ReactorParams::new(0.0025, 0.01, 1.0, 0.0, 2.0).unwrap();
        let setup = ClosedLoopSetup::new(params, 0.5, 1.0);
        let grid = Grid::new(1.0, 201).unwrap();
        let xi0 = Profile::sample(&grid, |x| model::phi_unchecked(&params, 0.5, x)).unwrap();
        let cfg = SimConfig::new(grid, 0.05, 600.0, 100_000, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        let m = record.norms.len();
        let window = m / 2..m;
        let t: Vec<f64> = record.times[window.clone()].to_vec();
        let ln_n: Vec<f64> = record.norms[window].iter().map(|n| n.ln()).collect();
        let fit = numerics::fit_line(&t, &ln_n).unwrap();
        let lambda0 = spectral::principal_eigenvalue(&params, 0.5).unwrap().lambda;
        assert!(
            (fit.slope - lambda0).abs() < 2e-4,
            "slope {} vs lambda0 {lambda0}",
            fit.slope
        );
    }

    #[test]
    fn imex_step_matches_substepped_euler() {
        // One IMEX step on a coarse grid against a brute-force explicit
        // Euler integration with 1000 substeps; the boundary nodes of the
        // oracle are recovered from the constraint rows after every substep.
        let setup = baseline_setup(0.0);
        let params = &setup.params;
        let n = 41;
        let grid = Grid::new(params.l, n).unwrap();
        let h = grid.spacing();
        let dt = 0.05;
        let xi0 = default_initial_data(&setup, &grid);
        let steady = Profile::zero(&grid);

        let cfg = SimConfig::new(grid, dt, dt, 1, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &steady, &xi0, &cfg).unwrap();
        let imex = record.snapshots.last().unwrap().1.values().to_vec();

        // Independent oracle, written out from scratch.
        let k = params.k;
        let sub_steps = 1000;
        let hh = dt / sub_steps as f64;
        let mut state = xi0.values().to_vec();
        let diffusion = params.d / (h * h);
        let advection = params.v / (2.0 * h);
        let dv_scale = params.d / (params.v * 2.0 * h);
        for _ in 0..sub_steps {
            let mut next = state.clone();
            for i in 1..n - 1 {
                let transport = diffusion * (state[i - 1] - 2.0 * state[i] + state[i + 1])
                    + advection * (state[i - 1] - state[i + 1]);
                let reaction = -k * state[i] * state[i];
                next[i] = state[i] + hh * (transport + reaction);
            }
            // Robin inlet: (1−α + 3s)x0 = 4s·x1 − s·x2, s = D/(2hv).
            next[0] = (4.0 * dv_scale * next[1] - dv_scale * next[2])
                / (1.0 - setup.alpha + 3.0 * dv_scale);
            // Neumann outlet: 3x_{n−1} = 4x_{n−2} − x_{n−3}.
            next[n - 1] = (4.0 * next[n - 2] - next[n - 3]) / 3.0;
            state = next;
        }

        let norm: f64 = state.iter().map(|v| v * v).sum::<f64>().sqrt();
        let diff: f64 = state
            .iter()
            .zip(&imex)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff / norm < 1e-6, "relative gap {}", diff / norm);
    }

    #[test]
    fn time_refinement_is_at_least_first_order_overall() {
        // Terminal error versus a dt/16 reference; halving dt must shrink
        // the error by at least 1.9x (second order on the linear part).
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 41).unwrap();
        let xi0 = default_initial_data(&setup, &grid);
        let steady = Profile::zero(&grid);
        let terminal = |dt: f64| -> Vec<f64> {
            let cfg = SimConfig::new(grid, dt, 8.0, usize::MAX, SimForm::Deviation).unwrap();
            let record = simulate(&setup, &steady, &xi0, &cfg).unwrap();
            let (_, profile) = record.snapshots.last().unwrap();
            let cbar = steady.values();
            profile
                .values()
                .iter()
                .zip(cbar)
                .map(|(c, s)| c - s)
                .collect()
        };
        let reference = terminal(0.5 / 16.0);
        let err = |state: &[f64]| -> f64 {
            state
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(&terminal(0.5));
        let e2 = err(&terminal(0.25));
        let ratio = e1 / e2;
        assert!(ratio >= 1.9, "ratio = {ratio} (e1 = {e1:e}, e2 = {e2:e})");
    }

    #[test]
    fn default_run_keeps_invariant_set() {
        let params = ReactorParams::default();
        let spec = InitialDataSpec::default();
        let lambda0_max = spectral::principal_eigenvalue(&params, spec.alpha_max)
            .unwrap()
            .lambda;
        let alpha = 0.5;
        let m = spec.mu * model::m_star(&params, alpha, &spec, lambda0_max).unwrap();
        let setup = ClosedLoopSetup::new(params, alpha, m);
        let grid = Grid::new(1.0, 101).unwrap();
        let xi0 = model::initial_data(&setup, &spec, lambda0_max, &grid).unwrap();
        let cfg = SimConfig::new(grid, 0.05, 100.0, 200, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        assert_eq!(record.invariant_violations, 0);
        let summary = invariance_report(&record, &setup);
        assert_eq!(summary.flagged_snapshots, 0);
        assert!(summary.per_snapshot[0].max_ratio <= 1.0 + 1e-12);
        assert!(summary.per_snapshot.iter().all(|s| s.min_value >= -summary.tol_inv));
    }

    #[test]
    fn planted_violation_is_flagged() {
        let setup = baseline_setup(0.5);
        let grid = Grid::new(1.0, 41).unwrap();
        let mut xi0 = default_initial_data(&setup, &grid);
        // Push one node above the envelope M·φ (M = 1 here).
        xi0.values_mut()[20] = 10.0 * model::phi(&setup, grid.x(20)).unwrap();
        let cfg = SimConfig::new(grid, 0.05, 0.05, 1, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        assert!(record.invariant_violations > 0);
        let summary = invariance_report(&record, &setup);
        assert!(summary.flagged_snapshots >= 1);
        assert!(summary.per_snapshot[0].max_ratio > 1.0);
    }

    #[test]
    fn zero_initial_data_keeps_zero_bounds() {
        let setup = baseline_setup(0.5);
        let grid = Grid::new(1.0, 41).unwrap();
        let cfg = SimConfig::new(grid, 0.05, 1.0, 4, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &Profile::zero(&grid), &cfg).unwrap();
        let summary = invariance_report(&record, &setup);
        for s in &summary.per_snapshot {
            assert_eq!(s.min_value, 0.0);
            assert_eq!(s.max_ratio, 0.0);
        }
    }

    #[test]
    fn supersolution_relations_hold() {
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 101).unwrap();
        let report = supersolution_check(&setup, &grid).unwrap();
        assert!(report.min_interior_slack > 0.0);
        assert!(report.inlet_residual.abs() < 1e-12);
        assert_eq!(report.outlet_residual, 0.0);
    }

    #[test]
    fn simulation_is_bit_deterministic() {
        let setup = baseline_setup(0.75);
        let grid = Grid::new(1.0, 81).unwrap();
        let xi0 = default_initial_data(&setup, &grid);
        let cfg = SimConfig::new(grid, 0.05, 30.0, 100, SimForm::Deviation).unwrap();
        let a = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        let b = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        assert_eq!(a.norms.len(), b.norms.len());
        for (x, y) in a.norms.iter().zip(&b.norms) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn late_time_log_norm_is_monotone() {
        let setup = baseline_setup(0.0);
        let grid = Grid::new(1.0, 101).unwrap();
        let xi0 = default_initial_data(&setup, &grid);
        let cfg = SimConfig::new(grid, 0.05, 200.0, 100_000, SimForm::Deviation).unwrap();
        let record = simulate(&setup, &Profile::zero(&grid), &xi0, &cfg).unwrap();
        let m = record.norms.len();
        for w in record.norms[m / 2..].windows(2) {
            assert!(w[1] < w[0], "norm not strictly decreasing: {} -> {}", w[0], w[1]);
        }
    }
}
