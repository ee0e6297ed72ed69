//! Acceptance suite: runs every contract criterion at its stated tolerance
//! and prints one pass/fail line per criterion.
//!
//! Run with `cargo test -p reactor-cli --test acceptance`.

use std::panic::AssertUnwindSafe;
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use reactor_cli::sweep::{self, SweepRow, SweepSpec, DEFAULT_ALPHAS};
use reactor_core::decay;
use reactor_core::model::{self, ClosedLoopSetup, Grid, InitialDataSpec, Profile, ReactorParams};
use reactor_core::numerics;
use reactor_core::pde_sim::{self, SimConfig, SimForm};
use reactor_core::spectral::{self, Branch};

type CriterionResult = Result<String, String>;

const SWEEP_GAINS: [f64; 6] = [-10.0, -1.0, 0.0, 0.5, 0.75, 0.9];
const EXPECTED_NEG_LAMBDA0: [f64; 6] = [0.0226, 0.0202, 0.0174, 0.0129, 0.0081, 0.0037];
const EXPECTED_NEG_LAMBDA_NUM: [f64; 6] = [0.0228, 0.0204, 0.0174, 0.0129, 0.0082, 0.0038];
const EXPECTED_NEG_LAMBDA_T: [(f64, f64); 5] = [
    (-10.0, 0.0186),
    (-1.0, 0.0162),
    (0.0, 0.0134),
    (0.5, 0.0088),
    (0.75, 0.0041),
];

fn baseline_params() -> ReactorParams {
    ReactorParams::default()
}

/// The full baseline sweep (N = 201, dt = 0.05, t_final = 2000 over the
/// tabulated gains), shared between criteria 2 and 6.
fn full_sweep() -> Result<(&'static Vec<SweepRow>, f64), String> {
    static SWEEP: OnceLock<Result<(Vec<SweepRow>, f64), String>> = OnceLock::new();
    let entry = SWEEP.get_or_init(|| {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let spec = SweepSpec {
            alphas: DEFAULT_ALPHAS.to_vec(),
            params: baseline_params(),
            initial: InitialDataSpec::default(),
            nx: 201,
            dt: 0.05,
            t_final: 2000.0,
            outputs: dir.path().to_path_buf(),
            workers: 0,
        };
        let start = Instant::now();
        let rows = sweep::run_sweep(&spec).map_err(|e| e.to_string())?;
        Ok((rows, start.elapsed().as_secs_f64()))
    });
    entry
        .as_ref()
        .map(|(rows, secs)| (rows, *secs))
        .map_err(|e| e.clone())
}

fn criterion_1_spectral_rate_column() -> CriterionResult {
    let params = baseline_params();
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (&alpha, &expected) in SWEEP_GAINS.iter().zip(&EXPECTED_NEG_LAMBDA0) {
        let lambda0 = spectral::principal_eigenvalue(&params, alpha)
            .map_err(|e| e.to_string())?
            .lambda;
        let gap = (-lambda0 - expected).abs();
        worst = worst.max(gap);
        if gap > 2e-4 {
            return Err(format!(
                "alpha = {alpha}: -lambda0 = {}, expected {expected} (gap {gap:.2e} > 2e-4)",
                -lambda0
            ));
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs_f64() >= 1.0 {
        return Err(format!("runtime {elapsed:?} exceeds 1 s"));
    }
    Ok(format!("worst gap {worst:.2e} (tol 2e-4), runtime {elapsed:?}"))
}

fn criterion_2_observed_rate_column() -> CriterionResult {
    let (rows, secs) = full_sweep()?;
    if secs >= 120.0 {
        return Err(format!("sweep runtime {secs:.1} s exceeds 2 min"));
    }
    let mut worst = 0.0f64;
    for (row, &expected) in rows.iter().zip(&EXPECTED_NEG_LAMBDA_NUM) {
        let data = row.outcome.as_ref().map_err(|e| e.clone())?;
        let lambda_num = data
            .report
            .lambda_num
            .ok_or_else(|| format!("alpha = {}: no fitted exponent", row.alpha))?;
        let gap = (-lambda_num - expected).abs();
        worst = worst.max(gap);
        if gap > 5e-4 {
            return Err(format!(
                "alpha = {}: -lambda_num = {}, expected {expected} (gap {gap:.2e} > 5e-4)",
                row.alpha, -lambda_num
            ));
        }
        let spectral_gap = (lambda_num - data.report.lambda0).abs();
        if spectral_gap > 5e-4 {
            return Err(format!(
                "alpha = {}: lambda_num and lambda0 disagree by {spectral_gap:.2e} > 5e-4",
                row.alpha
            ));
        }
    }
    Ok(format!("worst gap {worst:.2e} (tol 5e-4), sweep runtime {secs:.1} s"))
}

fn criterion_3_critical_gain() -> CriterionResult {
    let params = baseline_params();
    let a_star = spectral::critical_alpha(&params);
    if (a_star - 2.0 / 3.0).abs() > 1e-12 {
        return Err(format!("alpha* = {a_star}, expected 2/3 within 1e-12"));
    }
    let at_star = spectral::principal_eigenvalue(&params, a_star)
        .map_err(|e| e.to_string())?
        .lambda;
    if (at_star + 0.01).abs() > 1e-6 {
        return Err(format!("lambda0(alpha*) = {at_star}, expected -0.01 within 1e-6"));
    }
    let at_one = spectral::principal_eigenvalue(&params, 1.0)
        .map_err(|e| e.to_string())?
        .lambda;
    if at_one.abs() > 1e-8 {
        return Err(format!("lambda0(1) = {at_one}, expected 0 within 1e-8"));
    }
    Ok(format!(
        "alpha* = {a_star:.12}, lambda0(alpha*) = {at_star:.9}, lambda0(1) = {at_one:e}"
    ))
}

fn criterion_4_asymptotic_gain_limit() -> CriterionResult {
    let lambda0 = spectral::principal_eigenvalue(&baseline_params(), -1e6)
        .map_err(|e| e.to_string())?
        .lambda;
    let gap = (lambda0 + 0.0234).abs();
    if gap > 5e-4 {
        return Err(format!("lambda0(-1e6) = {lambda0}, expected -0.0234 within 5e-4"));
    }
    Ok(format!("lambda0(-1e6) = {lambda0:.6} (gap {gap:.2e}, tol 5e-4)"))
}

fn criterion_5_monotonicity_and_branches() -> CriterionResult {
    let params = baseline_params();
    let a_star = spectral::critical_alpha(&params);
    let v2_over_4d = params.v * params.v / (4.0 * params.d);
    let mut prev = f64::NEG_INFINITY;
    for i in 0..50 {
        let alpha = -10.0 + 11.0 * i as f64 / 49.0;
        let eig = spectral::principal_eigenvalue(&params, alpha).map_err(|e| e.to_string())?;
        if eig.lambda <= prev {
            return Err(format!(
                "lambda0 not strictly increasing at alpha = {alpha}: {} <= {prev}",
                eig.lambda
            ));
        }
        prev = eig.lambda;
        if alpha < a_star && !(eig.lambda < -v2_over_4d) {
            return Err(format!("item (ii) fails at alpha = {alpha}: lambda0 = {}", eig.lambda));
        }
        if alpha > a_star && alpha < 1.0 && !(-v2_over_4d < eig.lambda && eig.lambda < 0.0) {
            return Err(format!("item (iv) fails at alpha = {alpha}: lambda0 = {}", eig.lambda));
        }
        if alpha == 1.0 && eig.lambda != 0.0 {
            return Err(format!("item (v) fails: lambda0(1) = {}", eig.lambda));
        }
    }
    // Item (iii) at the critical gain itself.
    let at_star = spectral::principal_eigenvalue(&params, a_star).map_err(|e| e.to_string())?;
    if at_star.branch != Branch::Zero || (at_star.lambda + v2_over_4d).abs() > 1e-12 {
        return Err(format!("item (iii) fails: lambda0(alpha*) = {}", at_star.lambda));
    }
    Ok("strictly increasing over 50 gains on [-10, 1]; branch items (ii)-(v) hold".into())
}

fn criterion_6_invariant_set_suite() -> CriterionResult {
    let (rows, _) = full_sweep()?;
    for row in rows.iter() {
        let data = row.outcome.as_ref().map_err(|e| e.clone())?;
        if data.invariant_violations != 0 {
            return Err(format!(
                "alpha = {}: {} invariant-set violations",
                row.alpha, data.invariant_violations
            ));
        }
    }
    // Super-solution relations with exact derivatives, M = 1.
    let params = baseline_params();
    for &alpha in &SWEEP_GAINS {
        let setup = ClosedLoopSetup::new(params, alpha, 1.0);
        let grid = Grid::new(params.l, 201).map_err(|e| e.to_string())?;
        let report = pde_sim::supersolution_check(&setup, &grid).map_err(|e| e.to_string())?;
        if report.min_interior_slack < 0.0 {
            return Err(format!(
                "alpha = {alpha}: interior slack {} negative",
                report.min_interior_slack
            ));
        }
        if report.inlet_residual.abs() >= 1e-10 || report.outlet_residual.abs() >= 1e-10 {
            return Err(format!(
                "alpha = {alpha}: boundary residuals {} / {} exceed 1e-10",
                report.inlet_residual, report.outlet_residual
            ));
        }
    }
    Ok("zero violations across the sweep; super-solution slack >= 0, boundary residuals < 1e-10".into())
}

fn criterion_7_oracle_equivalence() -> CriterionResult {
    // (a) One IMEX step on N = 41 against a 1000-substep explicit Euler
    // integration, written out independently of the library stencils.
    let params = baseline_params();
    let spec = InitialDataSpec::default();
    let lambda0_max = spectral::principal_eigenvalue(&params, spec.alpha_max)
        .map_err(|e| e.to_string())?
        .lambda;
    let alpha = 0.0;
    let m = spec.mu
        * model::m_star(&params, alpha, &spec, lambda0_max).map_err(|e| e.to_string())?;
    let setup = ClosedLoopSetup::new(params, alpha, m);
    let n = 41;
    let grid = Grid::new(params.l, n).map_err(|e| e.to_string())?;
    let xi0 = model::initial_data(&setup, &spec, lambda0_max, &grid).map_err(|e| e.to_string())?;
    let dt = 0.05;

    let cfg = SimConfig::new(grid, dt, dt, 1, SimForm::Deviation).map_err(|e| e.to_string())?;
    let record = pde_sim::simulate(&setup, &Profile::zero(&grid), &xi0, &cfg)
        .map_err(|e| e.to_string())?;
    let imex: Vec<f64> = record.snapshots.last().unwrap().1.values().to_vec();

    let h = grid.spacing();
    let k = params.k;
    let substeps = 1000;
    let hh = dt / substeps as f64;
    let mut state = xi0.values().to_vec();
    let diffusion = params.d / (h * h);
    let advection = params.v / (2.0 * h);
    let robin_scale = params.d / (params.v * 2.0 * h);
    for _ in 0..substeps {
        let mut next = state.clone();
        for i in 1..n - 1 {
            let transport = diffusion * (state[i - 1] - 2.0 * state[i] + state[i + 1])
                + advection * (state[i - 1] - state[i + 1]);
            next[i] = state[i] + hh * (transport - k * state[i] * state[i]);
        }
        next[0] = (4.0 * robin_scale * next[1] - robin_scale * next[2])
            / (1.0 - alpha + 3.0 * robin_scale);
        next[n - 1] = (4.0 * next[n - 2] - next[n - 3]) / 3.0;
        state = next;
    }
    let norm: f64 = state.iter().map(|v| v * v).sum::<f64>().sqrt();
    let gap: f64 = state
        .iter()
        .zip(&imex)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
        / norm;
    if gap > 1e-6 {
        return Err(format!("IMEX vs substepped Euler relative gap {gap:.2e} > 1e-6"));
    }

    // (b) Trapezoid norms against closed-form integrals at N = 1001.
    let grid_fine = Grid::new(1.0, 1001).map_err(|e| e.to_string())?;
    let linear = Profile::sample(&grid_fine, |x| x).map_err(|e| e.to_string())?;
    let gap_linear = (numerics::l2_norm(&linear) - (1.0f64 / 3.0).sqrt()).abs();
    let sine = Profile::sample(&grid_fine, |x| (std::f64::consts::PI * x).sin())
        .map_err(|e| e.to_string())?;
    let gap_sine = (numerics::l2_norm(&sine) - 0.5f64.sqrt()).abs();
    if gap_linear > 1e-6 || gap_sine > 1e-6 {
        return Err(format!(
            "trapezoid norms off closed forms: linear {gap_linear:.2e}, sine {gap_sine:.2e}"
        ));
    }
    Ok(format!(
        "IMEX vs Euler gap {gap:.2e} (tol 1e-6); trapezoid gaps {gap_linear:.2e}, {gap_sine:.2e}"
    ))
}

fn criterion_8_linear_limit() -> CriterionResult {
    let params = ReactorParams::new(0.0025, 0.01, 1.0, 0.0, 2.0).map_err(|e| e.to_string())?;
    let grid = Grid::new(params.l, 201).map_err(|e| e.to_string())?;
    let mut detail = String::new();
    for alpha in [0.0, 0.5, 0.9] {
        let lambda0 = spectral::principal_eigenvalue(&params, alpha)
            .map_err(|e| e.to_string())?
            .lambda;
        let setup = ClosedLoopSetup::new(params, alpha, 1.0);
        let xi0 = Profile::sample(&grid, |x| model::phi(&setup, x).unwrap())
            .map_err(|e| e.to_string())?;
        let cfg = SimConfig::new(grid, 0.05, 2000.0, 400, SimForm::Deviation)
            .map_err(|e| e.to_string())?;
        let record = pde_sim::simulate(&setup, &Profile::zero(&grid), &xi0, &cfg)
            .map_err(|e| e.to_string())?;
        let fit = decay::lyapunov_exponent(&record, 0.5).map_err(|e| e.to_string())?;
        let gap = (fit.slope - lambda0).abs();
        if gap > 2e-4 {
            return Err(format!(
                "alpha = {alpha}: slope {} vs lambda0 {lambda0} (gap {gap:.2e} > 2e-4)",
                fit.slope
            ));
        }
        detail.push_str(&format!("alpha {alpha}: gap {gap:.1e}; "));
    }
    Ok(format!("{detail}(tol 2e-4)"))
}

fn criterion_9_lambda_t_column() -> CriterionResult {
    // M is chosen per gain so that L = kn·(M·phi(l))^{n-1} = 0.0040; the
    // alpha = 0.9 entry stays excluded (no constant-L reading matches it).
    let params = baseline_params();
    let target_l = 0.0040;
    let mut worst = 0.0f64;
    for &(alpha, expected) in &EXPECTED_NEG_LAMBDA_T {
        let lambda0 = spectral::principal_eigenvalue(&params, alpha)
            .map_err(|e| e.to_string())?
            .lambda;
        let probe = ClosedLoopSetup::new(params, alpha, 1.0);
        let phi_l = model::phi(&probe, params.l).map_err(|e| e.to_string())?;
        let m = (target_l / (params.k * params.n)).powf(1.0 / (params.n - 1.0)) / phi_l;
        let setup = ClosedLoopSetup::new(params, alpha, m);
        let report = decay::theoretical_rate(&setup, lambda0).map_err(|e| e.to_string())?;
        if (report.lipschitz_l - target_l).abs() > 1e-12 {
            return Err(format!(
                "alpha = {alpha}: L = {} instead of {target_l}",
                report.lipschitz_l
            ));
        }
        let gap = (-report.lambda_t - expected).abs();
        worst = worst.max(gap);
        if gap > 2e-4 {
            return Err(format!(
                "alpha = {alpha}: -lambda_T = {}, expected {expected} (gap {gap:.2e} > 2e-4)",
                -report.lambda_t
            ));
        }
    }
    Ok(format!("worst gap {worst:.2e} (tol 2e-4); alpha = 0.9 excluded as documented"))
}

fn criterion_10_determinism() -> CriterionResult {
    let run = |dir: &std::path::Path| -> Result<Vec<SweepRow>, String> {
        let spec = SweepSpec {
            alphas: vec![-1.0, 0.75],
            params: baseline_params(),
            initial: InitialDataSpec::default(),
            nx: 101,
            dt: 0.05,
            t_final: 50.0,
            outputs: dir.to_path_buf(),
            workers: 2,
        };
        let rows = sweep::run_sweep(&spec).map_err(|e| e.to_string())?;
        sweep::emit_plots(&rows, &spec.outputs).map_err(|e| e.to_string())?;
        Ok(rows)
    };
    let dir_a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir_b = tempfile::tempdir().map_err(|e| e.to_string())?;
    run(dir_a.path())?;
    run(dir_b.path())?;
    let mut names: Vec<String> = std::fs::read_dir(dir_a.path())
        .map_err(|e| e.to_string())?
        .map(|entry| entry.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    if names.is_empty() {
        return Err("no output files produced".into());
    }
    for name in &names {
        let a = std::fs::read(dir_a.path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir_b.path().join(name))
            .map_err(|e| format!("{name} missing in second run: {e}"))?;
        if a != b {
            return Err(format!("{name} differs between identical runs"));
        }
    }
    Ok(format!("{} files byte-identical across two runs ({names:?})", names.len()))
}

fn main() -> ExitCode {
    let criteria: &[(&str, fn() -> CriterionResult)] = &[
        ("1 spectral rate column", criterion_1_spectral_rate_column),
        ("2 observed rate column", criterion_2_observed_rate_column),
        ("3 critical gain", criterion_3_critical_gain),
        ("4 asymptotic gain limit", criterion_4_asymptotic_gain_limit),
        ("5 monotonicity suite", criterion_5_monotonicity_and_branches),
        ("6 invariant-set suite", criterion_6_invariant_set_suite),
        ("7 oracle equivalence", criterion_7_oracle_equivalence),
        ("8 linear-limit consistency", criterion_8_linear_limit),
        ("9 lambda_T column", criterion_9_lambda_t_column),
        ("10 determinism", criterion_10_determinism),
    ];
    let mut failures = 0;
    for (name, criterion) in criteria {
        match std::panic::catch_unwind(AssertUnwindSafe(criterion)) {
            Ok(Ok(detail)) => println!("[PASS] criterion {name}: {detail}"),
            Ok(Err(reason)) => {
                println!("[FAIL] criterion {name}: {reason}");
                failures += 1;
            }
            Err(_) => {
                println!("[FAIL] criterion {name}: panicked");
                failures += 1;
            }
        }
    }
    if failures == 0 {
        println!("acceptance: all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    }
}
