//! Spectrum of the closed-loop linear operator `𝒜ξ = Dξ″ − vξ′` with the
//! feedback boundary conditions `(1−α)ξ(0) = (D/v)ξ′(0)`, `ξ′(l) = 0`.
//!
//! The substitution `y(x) = e^{−vx/(2D)}·ξ(x)` turns the eigenvalue problem
//! into the self-adjoint form `−D·y″ = θ·y` with
//!
//! ```text
//! y′(0) = γ·y(0),    γ = (v/D)(1/2 − α),
//! y′(l) = −δ·y(l),   δ = v/(2D),
//! λ = −v²/(4D) − θ.
//! ```
//!
//! Eigenvalues come in three branches depending on the sign of θ:
//! trigonometric solutions (θ > 0) satisfying
//! `(q² − δγ)·tan(ql) = q(γ + δ)` with `θ = Dq²`, a single affine solution
//! at θ = 0 (exactly at the critical gain α*), and exponential solutions
//! (θ < 0) satisfying `e^{2ql} = (q−γ)(q−δ)/((q+γ)(q+δ))` with `θ = −Dq²`.

use crate::error::{Error, Result};
use crate::model::{Grid, Profile, ReactorParams};
use crate::numerics::{self, find_sign_changes};

/// Scan resolution inside each root-search interval (fraction of the
/// interval scale).
const SCAN_RESOLUTION: f64 = 1e-3;
/// Absolute shrink applied to interval ends that touch a pole.
const POLE_SHRINK: f64 = 1e-9;
/// Normalized determinant residual accepted for a computed root.
const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Normalized residual below which an eigenvalue is accepted as consistent
/// input for eigenfunction evaluation.
const EIGENFUNCTION_RESIDUAL_TOL: f64 = 1e-6;
/// Width of the exact zero-branch window around the critical gain,
/// measured on `γ + δ/(1 + δl)`.
const ZERO_BRANCH_WINDOW: f64 = 1e-10;

/// The transformed self-adjoint boundary-value problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedBVP {
    /// Inlet coefficient γ = (v/D)(1/2 − α) (1/m).
    pub gamma: f64,
    /// Outlet coefficient δ = v/(2D) > 0 (1/m).
    pub delta: f64,
    /// Domain length (m).
    pub l: f64,
    /// Dispersion coefficient (m²/s).
    pub d: f64,
}

/// Maps reactor parameters and a gain to the transformed problem.
pub fn transform(params: &ReactorParams, alpha: f64) -> TransformedBVP {
    TransformedBVP {
        gamma: params.v / params.d * (0.5 - alpha),
        delta: params.v / (2.0 * params.d),
        l: params.l,
        d: params.d,
    }
}

/// The critical gain `α* = 1/2 + D/(vl + 2D)`, always in (1/2, 1).
///
/// Below α* the principal eigenvalue sits on the trigonometric branch,
/// above it on the exponential branch; at α* it equals −v²/(4D) exactly.
pub fn critical_alpha(params: &ReactorParams) -> f64 {
    0.5 + params.d / (params.v * params.l + 2.0 * params.d)
}

/// Which solution family an eigenvalue belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// θ > 0: `y = C₁cos(qx) + C₂sin(qx)`, θ = Dq².
    Trig,
    /// θ = 0: `y = C₁x + C₂`; occurs only at the critical gain.
    Zero,
    /// θ < 0: `y = C₁e^{qx} + C₂e^{−qx}`, θ = −Dq².
    Exponential,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Trig => "trig",
            Branch::Zero => "zero",
            Branch::Exponential => "exp",
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One eigenvalue of the closed-loop operator, with its transformed-problem
/// data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    /// λ = −v²/(4D) − θ (1/s).
    pub lambda: f64,
    /// Eigenvalue of the transformed operator (1/s).
    pub theta: f64,
    /// Transcendental-equation parameter q ≥ 0 (1/m).
    pub q: f64,
    pub branch: Branch,
}

impl Eigenvalue {
    fn from_branch(params: &ReactorParams, branch: Branch, q: f64) -> Self {
        let neg_v2_over_4d = -(params.v * params.v) / (4.0 * params.d);
        let theta = match branch {
            Branch::Trig => params.d * q * q,
            Branch::Zero => 0.0,
            Branch::Exponential => -params.d * q * q,
        };
        Eigenvalue {
            lambda: neg_v2_over_4d - theta,
            theta,
            q,
            branch,
        }
    }

    /// The α = 1 limit, where the exponential root sits exactly at q = δ so
    /// that θ = −v²/(4D) cancels the shift and λ = 0 exactly.
    fn alpha_one(params: &ReactorParams) -> Self {
        Eigenvalue {
            lambda: 0.0,
            theta: -(params.v * params.v) / (4.0 * params.d),
            q: params.v / (2.0 * params.d),
            branch: Branch::Exponential,
        }
    }
}

/// The computed spectrum for one gain: eigenvalues in decreasing λ order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub alpha: f64,
    /// Strictly decreasing in λ; `eigenvalues[0]` is the principal one.
    pub eigenvalues: Vec<Eigenvalue>,
}

impl Spectrum {
    pub fn principal(&self) -> &Eigenvalue {
        &self.eigenvalues[0]
    }
}

/// Trig-branch determinant `(q² − δγ)sin(ql) − q(γ + δ)cos(ql)`, written in
/// the pole-free sin/cos form.
fn trig_determinant(bvp: &TransformedBVP, q: f64) -> f64 {
    let (s, c) = (q * bvp.l).sin_cos();
    (q * q - bvp.delta * bvp.gamma) * s - q * (bvp.gamma + bvp.delta) * c
}

/// Normalized trig-branch residual; < 1e−9 certifies a root regardless of
/// the (possibly huge) coefficient scale.
pub fn trig_branch_residual(bvp: &TransformedBVP, q: f64) -> f64 {
    let (s, c) = (q * bvp.l).sin_cos();
    let t1 = (q * q - bvp.delta * bvp.gamma) * s;
    let t2 = q * (bvp.gamma + bvp.delta) * c;
    (t1 - t2).abs() / (t1.abs() + t2.abs() + 1.0)
}

/// Exponential-branch gap `S(q) = R(q) − e^{2ql}` with
/// `R(q) = (q−γ)(q−δ)/((q+γ)(q+δ))`; the branch's eigenvalues are its
/// zeros on (0, −γ). `S(0) = 0` identically.
pub fn exponential_branch_gap(bvp: &TransformedBVP, q: f64) -> f64 {
    let r = ((q - bvp.gamma) * (q - bvp.delta)) / ((q + bvp.gamma) * (q + bvp.delta));
    r - (2.0 * q * bvp.l).exp()
}

/// Normalized exponential-branch residual.
pub fn exponential_branch_residual(bvp: &TransformedBVP, q: f64) -> f64 {
    let r = ((q - bvp.gamma) * (q - bvp.delta)) / ((q + bvp.gamma) * (q + bvp.delta));
    let e = (2.0 * q * bvp.l).exp();
    (r - e).abs() / (r.abs() + e.abs() + 1.0)
}

/// Zero-branch determinant residual `|γ(1 + δl) + δ|`, normalized.
fn zero_branch_residual(bvp: &TransformedBVP) -> f64 {
    let t1 = bvp.gamma * (1.0 + bvp.delta * bvp.l);
    (t1 + bvp.delta).abs() / (t1.abs() + bvp.delta.abs() + 1.0)
}

fn zero_branch_gap(bvp: &TransformedBVP) -> f64 {
    bvp.gamma + bvp.delta / (1.0 + bvp.delta * bvp.l)
}

/// The `count` smallest positive roots of the trig-branch equation
/// `(q² − δγ)tan(ql) = q(γ + δ)`.
///
/// Scans the intervals between consecutive tangent singularities,
/// `ql ∈ ((m − 1/2)π, (m + 1/2)π)`, brackets every sign change, and
/// bisects. Interval ends are pulled in by 1e−9 to stay clear of the
/// poles.
pub fn trig_branch_roots(bvp: &TransformedBVP, count: usize) -> Result<Vec<f64>> {
    assert!(count >= 1, "count must be at least 1");
    let half_period = std::f64::consts::PI / (2.0 * bvp.l);
    let mut roots = Vec::with_capacity(count);
    let max_intervals = 2 * count + 16;
    for m in 0..max_intervals {
        let lo = if m == 0 {
            POLE_SHRINK
        } else {
            (2.0 * m as f64 - 1.0) * half_period + POLE_SHRINK
        };
        let hi = (2.0 * m as f64 + 1.0) * half_period - POLE_SHRINK;
        if hi <= lo {
            continue;
        }
        let steps = ((hi - lo) / (SCAN_RESOLUTION * 2.0 * half_period)).ceil().max(8.0) as usize;
        for bracket in find_sign_changes(|q| trig_determinant(bvp, q), lo, hi, steps) {
            let q = numerics::find_root(|q| trig_determinant(bvp, q), bracket, 1e-12)?;
            let residual = trig_branch_residual(bvp, q);
            if residual >= ROOT_RESIDUAL_TOL {
                return Err(Error::NoConvergence {
                    iterations: numerics::ROOT_ITERATION_CAP,
                    context: format!("trig root q = {q} has residual {residual:e}"),
                });
            }
            roots.push(q);
            if roots.len() == count {
                return Ok(roots);
            }
        }
    }
    Err(Error::NoConvergence {
        iterations: max_intervals,
        context: format!(
            "found only {} of {count} trig-branch roots after {max_intervals} intervals",
            roots.len()
        ),
    })
}

/// The exponential-branch root on (0, −γ), when it exists.
///
/// Roots require γ < 0; the scan looks for a sign change of
/// [`exponential_branch_gap`] and bisects. Returns `None` when γ ≥ 0 or no
/// sign change is found (gains at or below the critical value).
pub fn exponential_branch_root(bvp: &TransformedBVP) -> Result<Option<f64>> {
    if bvp.gamma >= 0.0 {
        return Ok(None);
    }
    let hi = -bvp.gamma - POLE_SHRINK;
    let lo = POLE_SHRINK;
    if hi <= lo {
        return Ok(None);
    }
    let steps = (1.0 / SCAN_RESOLUTION).ceil() as usize;
    let brackets = find_sign_changes(|q| exponential_branch_gap(bvp, q), lo, hi, steps);
    // The Sturm–Liouville structure admits at most one θ < 0 eigenvalue
    // here; if scanning ever produced several brackets, the largest q (the
    // largest λ) would be the principal candidate.
    let Some(bracket) = brackets.last() else {
        return Ok(None);
    };
    let q = numerics::find_root(|q| exponential_branch_gap(bvp, q), *bracket, 1e-12)?;
    let residual = exponential_branch_residual(bvp, q);
    if residual >= ROOT_RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            iterations: numerics::ROOT_ITERATION_CAP,
            context: format!("exponential root q = {q} has residual {residual:e}"),
        });
    }
    Ok(Some(q))
}

/// The principal eigenvalue λ₀(α) = sup σ(𝒜).
///
/// Branch selection: trig for α < α*, the exact affine solution inside a
/// ±1e−10 window of the critical gain (measured on γ), exponential for
/// α* < α < 1, and the exact q = δ limit at α = 1. Gains above 1 produce a
/// positive principal eigenvalue and are refused.
pub fn principal_eigenvalue(params: &ReactorParams, alpha: f64) -> Result<Eigenvalue> {
    if alpha > 1.0 {
        return Err(Error::Unsupported(format!(
            "alpha = {alpha} > 1 leaves the stabilizing regime (positive principal eigenvalue)"
        )));
    }
    let bvp = transform(params, alpha);
    if alpha == 1.0 {
        return Ok(Eigenvalue::alpha_one(params));
    }
    if zero_branch_gap(&bvp).abs() < ZERO_BRANCH_WINDOW {
        return Ok(Eigenvalue::from_branch(params, Branch::Zero, 0.0));
    }
    if let Some(q) = exponential_branch_root(&bvp)? {
        return Ok(Eigenvalue::from_branch(params, Branch::Exponential, q));
    }
    let roots = trig_branch_roots(&bvp, 1)?;
    Ok(Eigenvalue::from_branch(params, Branch::Trig, roots[0]))
}

/// The `count` largest eigenvalues in decreasing λ order.
///
/// Beyond at most one exponential (or zero-branch) principal value, every
/// eigenvalue lies on the trig branch.
pub fn spectrum(params: &ReactorParams, alpha: f64, count: usize) -> Result<Spectrum> {
    assert!(count >= 1, "count must be at least 1");
    let principal = principal_eigenvalue(params, alpha)?;
    let bvp = transform(params, alpha);
    let mut eigenvalues = Vec::with_capacity(count);
    match principal.branch {
        Branch::Trig => {
            for q in trig_branch_roots(&bvp, count)? {
                eigenvalues.push(Eigenvalue::from_branch(params, Branch::Trig, q));
            }
        }
        Branch::Zero | Branch::Exponential => {
            eigenvalues.push(principal);
            if count > 1 {
                for q in trig_branch_roots(&bvp, count - 1)? {
                    eigenvalues.push(Eigenvalue::from_branch(params, Branch::Trig, q));
                }
            }
        }
    }
    debug_assert!(eigenvalues.windows(2).all(|w| w[0].lambda > w[1].lambda));
    Ok(Spectrum { alpha, eigenvalues })
}

/// Evaluates the eigenfunction `ξ(x) = e^{vx/(2D)}·y(x)` on `grid`,
/// normalized to unit L² norm.
///
/// The coefficient pair (C₁, C₂) is taken from the inlet boundary-condition
/// kernel of the eigenvalue's branch. The eigenvalue must satisfy its
/// branch's determinant condition (normalized residual < 1e−6) for the same
/// `(params, alpha)` it was produced from.
pub fn eigenfunction(
    params: &ReactorParams,
    eig: &Eigenvalue,
    alpha: f64,
    grid: &Grid,
) -> Result<Profile> {
    let bvp = transform(params, alpha);
    let residual = match eig.branch {
        Branch::Trig => trig_branch_residual(&bvp, eig.q),
        Branch::Exponential => exponential_branch_residual(&bvp, eig.q),
        Branch::Zero => zero_branch_residual(&bvp),
    };
    if residual >= EIGENFUNCTION_RESIDUAL_TOL {
        return Err(Error::InconsistentInput(format!(
            "eigenvalue (branch {}, q = {}) fails its determinant condition for alpha = {alpha}: residual {residual:e}",
            eig.branch, eig.q
        )));
    }
    let delta = bvp.delta;
    let gamma = bvp.gamma;
    let q = eig.q;
    let y = |x: f64| -> f64 {
        match eig.branch {
            // q·C₂ = γ·C₁ with y = C₁cos(qx) + C₂sin(qx); take C₁ = q.
            Branch::Trig => q * (q * x).cos() + gamma * (q * x).sin(),
            // (q−γ)C₁ = (q+γ)C₂; take C₁ = q+γ, C₂ = q−γ.
            Branch::Exponential => (q + gamma) * (q * x).exp() + (q - gamma) * (-q * x).exp(),
            // C₁ = γ·C₂; take C₂ = 1.
            Branch::Zero => gamma * x + 1.0,
        }
    };
    let mut profile = Profile::sample(grid, |x| (delta * x).exp() * y(x))?;
    let norm = numerics::l2_norm(&profile);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InconsistentInput(format!(
            "eigenfunction norm {norm} is not normalizable"
        )));
    }
    for v in profile.values_mut() {
        *v /= norm;
    }
    Ok(profile)
}

/// The Sturm–Liouville weights that put `−𝒜` in divergence form:
/// `𝒜ξ = (1/ρ)·(p·ξ′)′` with ρ(x) = e^{−vx/D}, p(x) = D·ρ(x), q(x) ≡ 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SturmLiouvilleWeights {
    d: f64,
    v: f64,
}

impl SturmLiouvilleWeights {
    /// Weight ρ(x) = e^{−vx/D}.
    pub fn rho(&self, x: f64) -> f64 {
        (-self.v * x / self.d).exp()
    }

    /// Coefficient p(x) = D·ρ(x), so that p(x)/ρ(x) = D for every x.
    pub fn p(&self, x: f64) -> f64 {
        self.d * self.rho(x)
    }

    /// Potential q(x) ≡ 0.
    pub fn q(&self, _x: f64) -> f64 {
        0.0
    }
}

pub fn sturm_liouville_weights(params: &ReactorParams) -> SturmLiouvilleWeights {
    SturmLiouvilleWeights {
        d: params.d,
        v: params.v,
    }
}
