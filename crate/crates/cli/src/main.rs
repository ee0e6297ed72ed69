//! `reactor` — spectral analysis, steady states, simulation, and decay
//! reports for the boundary-controlled tubular reactor.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use reactor_cli::config::{self, Overrides, RunConfig};
use reactor_cli::sweep::{self, SweepSpec, DEFAULT_ALPHAS};
use reactor_core::decay::{self, DEFAULT_FIT_WINDOW};
use reactor_core::model::{self, ClosedLoopSetup, Grid, Profile};
use reactor_core::pde_sim::{self, SimConfig, SimForm};
use reactor_core::{spectral, steady_state};

#[derive(Parser)]
#[command(name = "reactor", version, about = "Boundary-feedback tubular reactor toolkit")]
struct Cli {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for generated files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for the sweep (default: one per core).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-loop eigenvalues as CSV (k,branch,q,theta,lambda).
    Spectrum {
        /// Feedback gain.
        #[arg(long)]
        alpha: Option<f64>,
        /// How many eigenvalues to print.
        #[arg(long = "num-eigs", default_value_t = 1)]
        num_eigs: usize,
    },
    /// Solve the steady-state boundary-value problem; writes x,value CSV.
    Steady {
        #[arg(long)]
        alpha: Option<f64>,
        /// Grid nodes.
        #[arg(long)]
        nx: Option<usize>,
        /// Newton starting profile.
        #[arg(long, value_enum, default_value_t = Guess::Zero)]
        guess: Guess,
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Time-integrate the closed loop; writes norms.csv and snapshots.csv.
    Simulate {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        /// Time step (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Horizon (s).
        #[arg(long)]
        tfinal: Option<f64>,
        /// Target number of stored snapshots.
        #[arg(long, default_value_t = 100)]
        snapshots: usize,
    },
    /// Print one decay report row as CSV.
    Decay {
        #[arg(long)]
        alpha: Option<f64>,
        /// Invariant-set amplitude M (default: the initial-data amplitude
        /// mu*M_star).
        #[arg(long)]
        m: Option<f64>,
        /// Also simulate and fit the observed Lyapunov exponent.
        #[arg(long)]
        simulate: bool,
        /// Trailing fraction of samples used for the fit.
        #[arg(long = "fit-window", default_value_t = DEFAULT_FIT_WINDOW)]
        fit_window: f64,
    },
    /// Run the gain sweep: table1.csv, per-gain norm curves, decay data,
    /// and plot scripts.
    Sweep {
        /// Comma-separated gains (default: -10,-1,0,0.5,0.75,0.9).
        #[arg(long, value_delimiter = ',', value_parser = parse_trimmed_f64)]
        alphas: Option<Vec<f64>>,
    },
}

fn parse_trimmed_f64(raw: &str) -> Result<f64, std::num::ParseFloatError> {
    raw.trim().parse()
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Guess {
    /// Start from the zero profile.
    Zero,
    /// Start from the initial-data envelope mu*M_star*phi.
    Phi,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

struct Globals {
    config: Option<PathBuf>,
    out: PathBuf,
    workers: Option<usize>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let command = cli.command;
    let globals = Globals {
        config: cli.config,
        out: cli.out,
        workers: cli.workers,
    };
    match command {
        Command::Spectrum { alpha, num_eigs } => {
            let config = load(&globals, &Overrides { alpha, ..Overrides::default() })?;
            cmd_spectrum(&config, num_eigs)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Steady {
            alpha,
            nx,
            guess,
            output,
        } => {
            let config = load(&globals, &Overrides { alpha, nx, ..Overrides::default() })?;
            cmd_steady(&config, guess, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            alpha,
            nx,
            dt,
            tfinal,
            snapshots,
        } => {
            let config = load(
                &globals,
                &Overrides {
                    alpha,
                    nx,
                    dt,
                    t_final: tfinal,
                    ..Overrides::default()
                },
            )?;
            cmd_simulate(&config, snapshots, &globals.out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Decay {
            alpha,
            m,
            simulate,
            fit_window,
        } => {
            let config = load(&globals, &Overrides { alpha, ..Overrides::default() })?;
            cmd_decay(&config, m, simulate, fit_window)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { alphas } => {
            let config = load(&globals, &Overrides::default())?;
            let spec = SweepSpec {
                alphas: alphas.unwrap_or_else(|| DEFAULT_ALPHAS.to_vec()),
                params: config.params()?,
                initial: config.initial_data_spec()?,
                nx: config.nx,
                dt: config.dt,
                t_final: config.t_final,
                outputs: globals.out.clone(),
                workers: globals.workers.unwrap_or(0),
            };
            let rows = sweep::run_sweep(&spec)?;
            let failures = rows.iter().filter(|r| r.outcome.is_err()).count();
            if failures < rows.len() {
                sweep::emit_plots(&rows, &spec.outputs)?;
            }
            for row in &rows {
                match &row.outcome {
                    Ok(data) => {
                        let r = &data.report;
                        eprintln!(
                            "alpha = {:>6}: lambda_num = {:+.6}, lambda0 = {:+.6}, lambda_T = {:+.6}",
                            row.alpha,
                            r.lambda_num.unwrap_or(f64::NAN),
                            r.lambda0,
                            r.lambda_t
                        );
                    }
                    Err(e) => eprintln!("alpha = {:>6}: FAILED: {e}", row.alpha),
                }
            }
            if failures > 0 {
                eprintln!("{failures} of {} rows failed", rows.len());
                Ok(ExitCode::from(2))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
    }
}

fn load(globals: &Globals, overrides: &Overrides) -> Result<RunConfig> {
    Ok(config::load_config(globals.config.as_deref(), overrides)?)
}

fn cmd_spectrum(config: &RunConfig, num_eigs: usize) -> Result<()> {
    let params = config.params()?;
    let spectrum = spectral::spectrum(&params, config.alpha, num_eigs.max(1))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "k,branch,q,theta,lambda")?;
    for (k, eig) in spectrum.eigenvalues.iter().enumerate() {
        writeln!(out, "{k},{},{},{},{}", eig.branch, eig.q, eig.theta, eig.lambda)?;
    }
    Ok(())
}

fn build_guess(config: &RunConfig, guess: Guess, grid: &Grid) -> Result<Profile> {
    let params = config.params()?;
    match guess {
        Guess::Zero => Ok(Profile::zero(grid)),
        Guess::Phi => {
            let initial = config.initial_data_spec()?;
            let lambda0_max = spectral::principal_eigenvalue(&params, initial.alpha_max)?.lambda;
            let setup = ClosedLoopSetup::new(params, config.alpha, 0.0);
            Ok(model::initial_data(&setup, &initial, lambda0_max, grid)?)
        }
    }
}

fn cmd_steady(config: &RunConfig, guess: Guess, output: Option<&std::path::Path>) -> Result<()> {
    let params = config.params()?;
    let grid = Grid::new(params.l, config.nx)?;
    let setup = ClosedLoopSetup::new(params, config.alpha, 0.0);
    let start = build_guess(config, guess, &grid)?;
    let result = steady_state::solve_steady(&setup, &start, 1e-10, steady_state::DEFAULT_MAX_ITER)?;
    eprintln!(
        "steady solve: converged = {}, iterations = {}, residual = {:e}, guess = {}",
        result.converged,
        result.iterations,
        result.residual_norm,
        match guess {
            Guess::Zero => "zero",
            Guess::Phi => "phi",
        }
    );
    let mut body = String::from("x,value\n");
    for (i, x) in grid.xs().enumerate() {
        body.push_str(&format!("{x},{}\n", result.profile.values()[i]));
    }
    match output {
        Some(path) => std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn cmd_simulate(config: &RunConfig, snapshots: usize, out_dir: &std::path::Path) -> Result<()> {
    let params = config.params()?;
    let initial = config.initial_data_spec()?;
    let grid = Grid::new(params.l, config.nx)?;
    let lambda0_max = spectral::principal_eigenvalue(&params, initial.alpha_max)?.lambda;
    let m = initial.mu * model::m_star(&params, config.alpha, &initial, lambda0_max)?;
    let setup = ClosedLoopSetup::new(params, config.alpha, m);
    let xi0 = model::initial_data(&setup, &initial, lambda0_max, &grid)?;
    let steady = steady_state::solve_steady(&setup, &Profile::zero(&grid), 1e-10, 50)?;

    let n_steps = (config.t_final / config.dt).round().max(1.0) as usize;
    let stride = (n_steps / snapshots.max(1)).max(1);
    let cfg = SimConfig::new(grid, config.dt, config.t_final, stride, SimForm::Deviation)?;
    let record = pde_sim::simulate(&setup, &steady.profile, &xi0, &cfg)?;

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let mut norms = String::from("t,l2_norm\n");
    for (t, n) in record.times.iter().zip(&record.norms) {
        norms.push_str(&format!("{t},{n}\n"));
    }
    std::fs::write(out_dir.join("norms.csv"), norms)?;

    let mut snaps = String::from("t,x,value\n");
    for (t, profile) in &record.snapshots {
        for (i, x) in profile.grid().xs().enumerate() {
            snaps.push_str(&format!("{t},{x},{}\n", profile.values()[i]));
        }
    }
    std::fs::write(out_dir.join("snapshots.csv"), snaps)?;
    eprintln!(
        "simulated {} steps, invariant violations: {}, steady_branch = zero",
        record.times.len() - 1,
        record.invariant_violations
    );
    Ok(())
}

fn cmd_decay(config: &RunConfig, m_flag: Option<f64>, simulate: bool, fit_window: f64) -> Result<()> {
    let params = config.params()?;
    let initial = config.initial_data_spec()?;
    let lambda0_max = spectral::principal_eigenvalue(&params, initial.alpha_max)?.lambda;
    let lambda0 = spectral::principal_eigenvalue(&params, config.alpha)?.lambda;
    let m = match m_flag {
        Some(m) => m,
        None => initial.mu * model::m_star(&params, config.alpha, &initial, lambda0_max)?,
    };
    let setup = ClosedLoopSetup::new(params, config.alpha, m);
    let mut report = decay::theoretical_rate(&setup, lambda0)?;

    if simulate {
        let grid = Grid::new(params.l, config.nx)?;
        let xi0 = model::initial_data(&setup, &initial, lambda0_max, &grid)?;
        let steady = steady_state::solve_steady(&setup, &Profile::zero(&grid), 1e-10, 50)?;
        let cfg = SimConfig::new(grid, config.dt, config.t_final, 400, SimForm::Deviation)?;
        let record = pde_sim::simulate(&setup, &steady.profile, &xi0, &cfg)?;
        let fit = decay::lyapunov_exponent(&record, fit_window)?;
        report = report.with_lambda_num(fit.slope);
    }

    println!("alpha,lambda_num,lambda0,L,lambda_T,certificate,omega");
    println!(
        "{},{},{},{},{},{},{}",
        report.alpha,
        report.lambda_num.map(|v| v.to_string()).unwrap_or_default(),
        report.lambda0,
        report.lipschitz_l,
        report.lambda_t,
        report.certificate_holds,
        report.omega
    );
    Ok(())
}
