//! The gain sweep: per-α spectrum → initial data → steady state →
//! simulation → decay report, emitted as CSV files plus gnuplot scripts.
//!
//! Rows are computed in parallel (worker count configurable) but always
//! assembled and written in input order, so identical sweeps produce
//! byte-identical outputs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use reactor_core::decay::{self, DecayReport, DEFAULT_FIT_WINDOW};
use reactor_core::model::{self, ClosedLoopSetup, Grid, InitialDataSpec, Profile, ReactorParams};
use reactor_core::pde_sim::{self, SimConfig, SimForm};
use reactor_core::{spectral, steady_state};

/// A full sweep request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Gains, in emission order; all < 1, non-empty, no duplicates.
    pub alphas: Vec<f64>,
    pub params: ReactorParams,
    pub initial: InitialDataSpec,
    pub nx: usize,
    /// Time step (s).
    pub dt: f64,
    /// Horizon (s).
    pub t_final: f64,
    /// Directory receiving every generated file.
    pub outputs: PathBuf,
    /// Worker threads; 0 means one per available core.
    pub workers: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            bail!("sweep needs at least one alpha");
        }
        if let Some(bad) = self.alphas.iter().find(|a| !(**a < 1.0)) {
            bail!("sweep alphas must be < 1, got {bad}");
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if self.alphas[..i].contains(a) {
                bail!("duplicate alpha {a} in sweep");
            }
        }
        Ok(())
    }
}

/// The default sweep gains.
pub const DEFAULT_ALPHAS: [f64; 6] = [-10.0, -1.0, 0.0, 0.5, 0.75, 0.9];

/// Everything computed for one successful row.
#[derive(Debug, Clone)]
pub struct RowData {
    pub report: DecayReport,
    /// File name (relative to the output directory) of this row's norm
    /// history.
    pub norm_curve_path: String,
    /// (t, ‖ξ(t)‖/‖ξ₀‖) samples, rescaled to start at 1.
    pub rescaled_norms: Vec<(f64, f64)>,
    /// Nodewise invariant-set violations accumulated over the run.
    pub invariant_violations: usize,
    /// Steady-state reference branch used ("zero" for the default guess).
    pub steady_branch: &'static str,
}

/// One sweep row: the gain plus either its data or the error that aborted
/// it (failures isolate per row).
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub alpha: f64,
    pub outcome: Result<RowData, String>,
}

/// Computes the full pipeline for a single gain.
///
/// `lambda0_at_alpha_max` anchors the initial-data amplitude and is shared
/// across every row of a sweep.
pub fn compute_row(
    params: &ReactorParams,
    initial: &InitialDataSpec,
    lambda0_at_alpha_max: f64,
    alpha: f64,
    nx: usize,
    dt: f64,
    t_final: f64,
) -> Result<RowData, reactor_core::Error> {
    let lambda0 = spectral::principal_eigenvalue(params, alpha)?.lambda;
    let m_amplitude = initial.mu * model::m_star(params, alpha, initial, lambda0_at_alpha_max)?;
    let setup = ClosedLoopSetup::new(*params, alpha, m_amplitude);
    let grid = Grid::new(params.l, nx)?;
    let xi0 = model::initial_data(&setup, initial, lambda0_at_alpha_max, &grid)?;

    // Reference profile: the zero branch of the time-invariant problem.
    let steady = steady_state::solve_steady(&setup, &Profile::zero(&grid), 1e-10, 50)?;
    if !steady.converged {
        return Err(reactor_core::Error::NoConvergence {
            iterations: steady.iterations,
            context: format!("steady solve stalled at residual {:e}", steady.residual_norm),
        });
    }
    let cfg = SimConfig::new(grid, dt, t_final, 400, SimForm::Deviation)?;
    let record = pde_sim::simulate(&setup, &steady.profile, &xi0, &cfg)?;
    let fit = decay::lyapunov_exponent(&record, DEFAULT_FIT_WINDOW)?;
    let report = decay::theoretical_rate(&setup, lambda0)?.with_lambda_num(fit.slope);

    let norm0 = record.norms[0];
    let rescaled_norms = record
        .times
        .iter()
        .zip(&record.norms)
        .map(|(&t, &n)| (t, n / norm0))
        .collect();
    Ok(RowData {
        report,
        norm_curve_path: format!("norms_{alpha}.csv"),
        rescaled_norms,
        invariant_violations: record.invariant_violations,
        steady_branch: "zero",
    })
}

/// Runs the sweep and writes `table1.csv`, one `norms_<alpha>.csv` per
/// gain, `decay_vs_alpha.csv`, and `run_meta.txt` into the output
/// directory. A failing gain aborts only its own row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    fs::create_dir_all(&spec.outputs)
        .with_context(|| format!("creating output directory {}", spec.outputs.display()))?;

    let lambda0_at_alpha_max = spectral::principal_eigenvalue(&spec.params, spec.initial.alpha_max)
        .map_err(|e| anyhow::anyhow!("principal eigenvalue at alpha_max: {e}"))?
        .lambda;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .context("building worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        spec.alphas
            .par_iter()
            .map(|&alpha| SweepRow {
                alpha,
                outcome: compute_row(
                    &spec.params,
                    &spec.initial,
                    lambda0_at_alpha_max,
                    alpha,
                    spec.nx,
                    spec.dt,
                    spec.t_final,
                )
                .map_err(|e| e.to_string()),
            })
            .collect()
    });

    write_table1(&rows, &spec.outputs)?;
    write_norm_curves(&rows, &spec.outputs)?;
    write_decay_vs_alpha(&rows, &spec.outputs)?;
    write_run_meta(spec, lambda0_at_alpha_max, &rows, &spec.outputs)?;
    Ok(rows)
}

fn create(outputs: &Path, name: &str) -> Result<std::io::BufWriter<fs::File>> {
    let path = outputs.join(name);
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(std::io::BufWriter::new(file))
}

/// One row per requested gain, in input order; failed rows keep the alpha
/// and leave the remaining columns empty.
fn write_table1(rows: &[SweepRow], outputs: &Path) -> Result<()> {
    let mut w = create(outputs, "table1.csv")?;
    writeln!(w, "alpha,lambda_num,lambda0,L,lambda_T,certificate,omega")?;
    for row in rows {
        match &row.outcome {
            Ok(data) => {
                let r = &data.report;
                let lambda_num = r
                    .lambda_num
                    .map(|v| v.to_string())
                    .unwrap_or_default();
                writeln!(
                    w,
                    "{},{},{},{},{},{},{}",
                    row.alpha, lambda_num, r.lambda0, r.lipschitz_l, r.lambda_t, r.certificate_holds, r.omega
                )?;
            }
            Err(_) => writeln!(w, "{},,,,,,", row.alpha)?,
        }
    }
    Ok(())
}

fn write_norm_curves(rows: &[SweepRow], outputs: &Path) -> Result<()> {
    for row in rows {
        let Ok(data) = &row.outcome else { continue };
        let mut w = create(outputs, &data.norm_curve_path)?;
        writeln!(w, "t,l2_norm")?;
        for (t, n) in &data.rescaled_norms {
            writeln!(w, "{t},{n}")?;
        }
    }
    Ok(())
}

/// Signed rates per gain; display-side negation happens in the plot
/// scripts.
fn write_decay_vs_alpha(rows: &[SweepRow], outputs: &Path) -> Result<()> {
    let mut w = create(outputs, "decay_vs_alpha.csv")?;
    writeln!(w, "alpha,lambda_num,lambda0,lambda_T")?;
    for row in rows {
        let Ok(data) = &row.outcome else { continue };
        let r = &data.report;
        let lambda_num = r.lambda_num.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{}", row.alpha, lambda_num, r.lambda0, r.lambda_t)?;
    }
    Ok(())
}

fn write_run_meta(
    spec: &SweepSpec,
    lambda0_at_alpha_max: f64,
    rows: &[SweepRow],
    outputs: &Path,
) -> Result<()> {
    let mut w = create(outputs, "run_meta.txt")?;
    let p = &spec.params;
    writeln!(w, "D = {}", p.d)?;
    writeln!(w, "v = {}", p.v)?;
    writeln!(w, "l = {}", p.l)?;
    writeln!(w, "k = {}", p.k)?;
    writeln!(w, "n = {}", p.n)?;
    writeln!(w, "mu = {}", spec.initial.mu)?;
    writeln!(w, "alpha_max = {}", spec.initial.alpha_max)?;
    writeln!(w, "nx = {}", spec.nx)?;
    writeln!(w, "dt = {}", spec.dt)?;
    writeln!(w, "t_final = {}", spec.t_final)?;
    writeln!(w, "lambda0_at_alpha_max = {lambda0_at_alpha_max}")?;
    for row in rows {
        match &row.outcome {
            Ok(data) => writeln!(
                w,
                "alpha = {}: ok, steady_branch = {}, invariant_violations = {}",
                row.alpha, data.steady_branch, data.invariant_violations
            )?,
            Err(e) => writeln!(w, "alpha = {}: FAILED: {e}", row.alpha)?,
        }
    }
    Ok(())
}

/// Writes the two gnuplot scripts next to the CSVs: a log-scale overlay of
/// the norm histories and the three decay-rate series against α. Paths
/// inside the scripts are relative, so a moved output directory still
/// plots.
pub fn emit_plots(rows: &[SweepRow], outputs: &Path) -> Result<()> {
    if rows.is_empty() {
        bail!("no rows to plot");
    }
    let mut norms = String::new();
    writeln!(norms, "set datafile separator comma")?;
    writeln!(norms, "set logscale y")?;
    writeln!(norms, "set xlabel 't (s)'")?;
    writeln!(norms, "set ylabel 'rescaled L2 norm'")?;
    writeln!(norms, "set key top right")?;
    let mut first = true;
    for row in rows {
        let Ok(data) = &row.outcome else { continue };
        let prefix = if first { "plot " } else { ",\\\n     " };
        write!(
            norms,
            "{prefix}'{}' skip 1 using 1:2 with lines title 'alpha = {}'",
            data.norm_curve_path, row.alpha
        )?;
        first = false;
    }
    if first {
        bail!("no successful rows to plot");
    }
    norms.push('\n');
    fs::write(outputs.join("fig1_norms.gp"), norms)?;

    let mut rates = String::new();
    writeln!(rates, "set datafile separator comma")?;
    writeln!(rates, "set xlabel 'alpha'")?;
    writeln!(rates, "set ylabel 'decay rate'")?;
    writeln!(rates, "set key top right")?;
    writeln!(
        rates,
        "plot 'decay_vs_alpha.csv' skip 1 using 1:(-$2) with linespoints title '-lambda_Num',\\"
    )?;
    writeln!(
        rates,
        "     'decay_vs_alpha.csv' skip 1 using 1:(-$3) with linespoints title '-lambda_0',\\"
    )?;
    writeln!(
        rates,
        "     'decay_vs_alpha.csv' skip 1 using 1:(-$4) with linespoints title '-lambda_T'"
    )?;
    fs::write(outputs.join("fig2_decay_vs_alpha.gp"), rates)?;
    Ok(())
}
