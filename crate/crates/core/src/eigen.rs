//! Lowest eigenpairs of `L⁺_z = -∂² + 1 - pQ^{p-1} + Γδ_{-z/2}`.
//!
//! The operator is discretized with the 3-point Laplacian on every grid node
//! (homogeneous Dirichlet values just outside the grid) and the delta as
//! `+Γ/h` on one node, which is the exact restriction of the quadratic form
//! `∫|f'|² + Γ|f(a)|²` to the finite-difference space. Eigenvalues are
//! isolated by Sturm-sequence bisection, eigenvectors by inverse iteration,
//! and the reported value is the Rayleigh quotient evaluated in form
//! (gradient) representation, which avoids the `O(ε/h²)` cancellation of
//! the matrix representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{tridiagonal_solve_pivoted, Grid1D, RealField};
use crate::profiles::{cp_constant, q_omega, q_prime, q_prime_norm_sq, ModelParams};

/// Symmetric tridiagonal discretization of a point-interaction operator.
#[derive(Debug, Clone)]
pub struct PointOperator {
    pub grid: Grid1D,
    pub p: f64,
    pub gamma: f64,
    pub omega: f64,
    /// Snapped delta location.
    pub delta_position: f64,
    pub delta_index: usize,
    /// Whether the `-pQ^{p-1}` well is present.
    pub potential: bool,
    /// Multiplicative potential `V_k` (without the Laplacian and delta).
    pub potential_values: Vec<f64>,
    pub diag: Vec<f64>,
    pub off_diag: f64,
}

impl PointOperator {
    /// `-∂² + 1 - pQ^{p-1} + Γδ_{-z/2}` with `Γ ≥ 0`.
    pub fn assemble(grid: &Grid1D, p: f64, gamma: f64, z: f64) -> Result<Self> {
        let params = ModelParams::new(p, gamma)?;
        Self::build(grid, params.p, params.gamma, 1.0, -0.5 * z, true)
    }

    /// `-∂² + ω - pQ_ω^{p-1} + Γδ_{-z/2}`, the operator linearized at `Q_ω`.
    pub fn assemble_scaled(grid: &Grid1D, p: f64, gamma: f64, z: f64, omega: f64) -> Result<Self> {
        let params = ModelParams::new(p, gamma)?;
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Self::build(grid, params.p, params.gamma, omega, -0.5 * z, true)
    }

    /// Validation operator `-∂² + 1 + Γδ_a` with no well; `Γ` may be negative.
    pub fn validation(grid: &Grid1D, gamma: f64, position: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("potential strength must be finite".into()));
        }
        Self::build(grid, 3.0, gamma, 1.0, position, false)
    }

    fn build(grid: &Grid1D, p: f64, gamma: f64, omega: f64, position: f64, potential: bool) -> Result<Self> {
        let idx = grid
            .nearest_index(position)
            .filter(|&k| k > 0 && k + 1 < grid.n)
            .ok_or_else(|| {
                Error::Domain(format!(
                    "delta position {position} outside grid interior [{}, {}]",
                    grid.x_min, grid.x_max
                ))
            })?;
        let h = grid.h;
        let potential_values: Vec<f64> = (0..grid.n)
            .map(|k| {
                if potential {
                    omega - p * q_omega(grid.x(k), p, omega).powf(p - 1.0)
                } else {
                    omega
                }
            })
            .collect();
        let mut diag: Vec<f64> = potential_values.iter().map(|v| 2.0 / (h * h) + v).collect();
        diag[idx] += gamma / h;
        Ok(Self {
            grid: *grid,
            p,
            gamma,
            omega,
            delta_position: grid.x(idx),
            delta_index: idx,
            potential,
            potential_values,
            diag,
            off_diag: -1.0 / (h * h),
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut s = self.diag[k] * v[k];
                if k > 0 {
                    s += self.off_diag * v[k - 1];
                }
                if k + 1 < n {
                    s += self.off_diag * v[k + 1];
                }
                s
            })
            .collect()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn sturm_count(&self, x: f64) -> usize {
        let b2 = self.off_diag * self.off_diag;
        let floor = f64::EPSILON * (self.off_diag.abs() + 1.0);
        let mut count = 0;
        let mut d = 1.0;
        for (k, &a) in self.diag.iter().enumerate() {
            d = if k == 0 { a - x } else { a - x - b2 / d };
            if d == 0.0 {
                d = -floor;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `q(v, v)` with weight `h`: gradient, potential and point terms.
    ///
    /// Summed with compensation: for `ν ~ e^{-z}` the gradient and well
    /// contributions cancel to many digits.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        let h = self.grid.h;
        let n = v.len();
        let mut acc = Neumaier::default();
        acc.add((v[0] * v[0] + v[n - 1] * v[n - 1]) / h);
        for k in 0..n - 1 {
            let d = v[k + 1] - v[k];
            acc.add(d * d / h);
        }
        for (a, w) in v.iter().zip(&self.potential_values) {
            acc.add(w * a * a * h);
        }
        acc.add(self.gamma * v[self.delta_index] * v[self.delta_index]);
        acc.sum()
    }

    pub fn rayleigh(&self, v: &[f64]) -> f64 {
        let mut norm = Neumaier::default();
        for a in v {
            norm.add(a * a);
        }
        self.quadratic_form(v) / (norm.sum() * self.grid.h)
    }

    fn gershgorin(&self) -> (f64, f64) {
        let r = 2.0 * self.off_diag.abs();
        let lo = self.diag.iter().fold(f64::INFINITY, |m, &d| m.min(d - r));
        let hi = self.diag.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d + r));
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based) by bisection.
    pub fn bisect_eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Weighted residual `‖(L - μ) v‖₂ / ‖v‖₂`.
    pub fn residual(&self, mu: f64, v: &[f64]) -> f64 {
        let lv = self.apply(v);
        let r: f64 = lv.iter().zip(v).map(|(a, b)| (a - mu * b).powi(2)).sum();
        (r / dot(v, v)).sqrt()
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub value: f64,
    pub vector: RealField,
    pub norm_target: f64,
    pub residual: f64,
}

const MAX_INVERSE_ITERATIONS: usize = 20;
const RESIDUAL_TOL: f64 = 1e-8;

fn inverse_iteration(op: &PointOperator, shift: f64, start: Vec<f64>, deflate: Option<&[f64]>) -> Result<(f64, Vec<f64>, f64)> {
    let n = op.len();
    let offs = vec![op.off_diag; n - 1];
    // Nudge the shift so the factorization stays finite.
    let mu = shift + 1e-11 * shift.abs().max(1.0);
    let shifted: Vec<f64> = op.diag.iter().map(|d| d - mu).collect();
    let mut v = start;
    let project = |v: &mut Vec<f64>| {
        if let Some(phi) = deflate {
            let c = dot(v, phi) / dot(phi, phi);
            for (a, b) in v.iter_mut().zip(phi) {
                *a -= c * b;
            }
        }
        let s = dot(v, v).sqrt();
        for a in v.iter_mut() {
            *a /= s;
        }
    };
    project(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        v = tridiagonal_solve_pivoted(&shifted, &offs, &v)?;
        project(&mut v);
        let value = op.rayleigh(&v);
        residual = op.residual(value, &v);
        if residual <= 0.1 * RESIDUAL_TOL {
            return Ok((value, v, residual));
        }
    }
    if residual <= RESIDUAL_TOL {
        let value = op.rayleigh(&v);
        return Ok((value, v, residual));
    }
    Err(Error::NoConvergence { what: "inverse iteration", iterations: MAX_INVERSE_ITERATIONS, residual })
}

fn finish(op: &PointOperator, value: f64, mut v: Vec<f64>, residual: f64, target: f64, reference: &[f64]) -> EigenPair {
    let h = op.grid.h;
    let norm = (dot(&v, &v) * h).sqrt();
    let sign = if dot(&v, reference) < 0.0 { -1.0 } else { 1.0 };
    for a in v.iter_mut() {
        *a *= sign * target / norm;
    }
    EigenPair {
        value,
        vector: RealField { grid: op.grid, values: v },
        norm_target: target,
        residual,
    }
}

/// Ground state only, normalized to unit `L²` norm and positive overall.
pub fn ground_state(op: &PointOperator) -> Result<EigenPair> {
    let e0 = op.bisect_eigenvalue(0);
    let start: Vec<f64> = (0..op.len()).map(|k| (-op.grid.x(k).abs() / 4.0).exp() + 0.1).collect();
    let (value, v, res) = inverse_iteration(op, e0, start, None)?;
    let positive = vec![1.0; op.len()];
    Ok(finish(op, value, v, res, 1.0, &positive))
}

/// Ground state `φ` and first excited state `T`.
///
/// The excited vector is normalized to `‖Q_ω'‖₂` (continuum value) with
/// `⟨T, Q_ω'⟩ > 0`; without a well it is normalized to 1 instead.
pub fn lowest_two(op: &PointOperator) -> Result<(EigenPair, EigenPair)> {
    let ground = ground_state(op)?;
    let e1 = op.bisect_eigenvalue(1);
    let (p, omega) = (op.p, op.omega);
    let reference: Vec<f64> = (0..op.len())
        .map(|k| {
            let x = op.grid.x(k);
            if op.potential {
                omega.powf(1.0 / (p - 1.0) + 0.5) * q_prime(omega.sqrt() * x, p)
            } else {
                x * (-x.abs()).exp()
            }
        })
        .collect();
    let start = reference.clone();
    let (value, v, res) = inverse_iteration(op, e1, start, Some(&ground.vector.values))?;
    let target = if op.potential {
        (omega.powf(2.0 / (p - 1.0) + 0.5) * q_prime_norm_sq(p)).sqrt()
    } else {
        1.0
    };
    Ok((ground, finish(op, value, v, res, target, &reference)))
}

/// Discretization used for the perturbed eigenproblem.
///
/// With `richardson` set, scalar quantities are extrapolated from the grids
/// with spacing `h` and `h/2`, removing the `O(h²)` bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSettings {
    pub half_width: f64,
    pub h: f64,
    pub richardson: bool,
}

impl Default for EigenSettings {
    fn default() -> Self {
        Self { half_width: 40.0, h: 0.0125, richardson: true }
    }
}

impl EigenSettings {
    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::symmetric(self.half_width, self.h)
    }

    /// Same domain, half the spacing, no extrapolation.
    pub fn refined(&self) -> Self {
        Self { half_width: self.half_width, h: 0.5 * self.h, richardson: false }
    }

    pub fn single(&self) -> Self {
        Self { richardson: false, ..*self }
    }

    /// Separation rounded so that `-z/2` is a node of this grid and its refinements.
    pub fn snap(&self, z: f64) -> f64 {
        2.0 * self.h * (z / (2.0 * self.h)).round()
    }
}

/// The bracket for `τ_z = ‖Q'‖² ν_z / (2c_p² e^{-z})`, shared by `1 - ρ_z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NuBracket {
    pub lower: f64,
    pub upper: f64,
    /// Rate of the lower correction, `e^{-z/2}`.
    pub lower_rate: f64,
    /// Rate of the upper correction, `e^{-a_p z}` with `a_p = min(1/2, (p-1)/(p+3))`.
    pub upper_rate: f64,
}

impl NuBracket {
    pub fn lower_budget(&self, c: f64, z: f64) -> f64 {
        c * (-self.lower_rate * z).exp()
    }

    pub fn upper_budget(&self, c: f64, z: f64) -> f64 {
        c * (-self.upper_rate * z).exp()
    }

    /// Correction constants from a value observed at `z_fit`: the distance
    /// to the nearest endpoint, scaled by each side's rate.
    pub fn fit(&self, value: f64, z_fit: f64) -> (f64, f64) {
        let d = (value - self.lower).abs().min((value - self.upper).abs());
        (d * (self.lower_rate * z_fit).exp(), d * (self.upper_rate * z_fit).exp())
    }

    pub fn contains(&self, value: f64, z: f64, c_lower: f64, c_upper: f64) -> bool {
        value >= self.lower - self.lower_budget(c_lower, z) && value <= self.upper + self.upper_budget(c_upper, z)
    }
}

pub fn nu_bracket(p: f64, gamma: f64) -> Result<NuBracket> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("bracket needs gamma > 0, got {gamma}")));
    }
    Ok(NuBracket {
        lower: (1.0 + gamma - (1.0 + 2.0 * gamma).sqrt()) / gamma,
        upper: gamma / (gamma + 2.0),
        lower_rate: 0.5,
        upper_rate: a_p(p),
    })
}

pub fn a_p(p: f64) -> f64 {
    0.5f64.min((p - 1.0) / (p + 3.0))
}

/// The perturbed translational mode on one grid.
#[derive(Debug, Clone, Serialize)]
pub struct PerturbedMode {
    pub p: f64,
    pub gamma: f64,
    /// Snapped separation actually used.
    pub z: f64,
    /// Raw discrete eigenvalue.
    pub nu_raw: f64,
    /// Discrete zero-mode eigenvalue of the same grid without the delta.
    pub nu_baseline: f64,
    /// `ν_z`, baseline corrected.
    pub nu: f64,
    pub tau: f64,
    pub rho: f64,
    /// `T_z(-z/2)`.
    pub t_at_delta: f64,
    pub delta_index: usize,
    pub ground_value: f64,
    pub ground_residual: f64,
    pub t: EigenPair,
    pub orthogonality: f64,
}

/// The excited pair of `L⁺` with no delta on the settings' grid.
pub fn baseline_mode(p: f64, settings: &EigenSettings) -> Result<EigenPair> {
    let grid = settings.grid()?;
    let op = PointOperator::assemble(&grid, p, 0.0, 2.0)?;
    Ok(lowest_two(&op)?.1)
}

/// Single-grid perturbed mode (no extrapolation).
pub fn perturbed_mode(p: f64, gamma: f64, z: f64, settings: &EigenSettings) -> Result<PerturbedMode> {
    let base = baseline_mode(p, settings)?;
    mode_on_grid(p, gamma, z, settings, base.value)
}

fn mode_on_grid(p: f64, gamma: f64, z: f64, settings: &EigenSettings, baseline: f64) -> Result<PerturbedMode> {
    let grid = settings.grid()?;
    let z = settings.snap(z);
    let op = PointOperator::assemble(&grid, p, gamma, z)?;
    let (ground, t) = lowest_two(&op)?;
    let c = cp_constant(p)?;
    let nu = t.value - baseline;
    let t_at_delta = t.vector.values[op.delta_index];
    let orth = dot(&ground.vector.values, &t.vector.values) * grid.h / (t.norm_target * ground.norm_target);
    Ok(PerturbedMode {
        p,
        gamma,
        z,
        nu_raw: t.value,
        nu_baseline: baseline,
        nu,
        tau: q_prime_norm_sq(p) * nu / (2.0 * c * c * (-z).exp()),
        rho: t_at_delta / (c * (-0.5 * z).exp()),
        t_at_delta,
        delta_index: op.delta_index,
        ground_value: ground.value,
        ground_residual: ground.residual,
        t,
        orthogonality: orth.abs(),
    })
}

/// Scalar spectral data at one separation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Spectral {
    pub z: f64,
    pub nu: f64,
    pub tau: f64,
    pub rho: f64,
    pub t_at_delta: f64,
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Perturbed-mode solver with cached zero-mode baselines.
#[derive(Debug, Clone)]
pub struct SpectralSolver {
    pub p: f64,
    pub settings: EigenSettings,
    coarse_base: EigenPair,
    fine_base: Option<EigenPair>,
}

impl SpectralSolver {
    pub fn new(p: f64, settings: EigenSettings) -> Result<Self> {
        ModelParams::new(p, 0.0)?;
        let coarse_base = baseline_mode(p, &settings.single())?;
        let fine_base = if settings.richardson { Some(baseline_mode(p, &settings.refined())?) } else { None };
        Ok(Self { p, settings, coarse_base, fine_base })
    }

    pub fn snap(&self, z: f64) -> f64 {
        self.settings.snap(z)
    }

    /// The mode on the finest grid in use.
    pub fn mode(&self, gamma: f64, z: f64) -> Result<PerturbedMode> {
        match &self.fine_base {
            Some(b) => mode_on_grid(self.p, gamma, self.snap(z), &self.settings.refined(), b.value),
            None => mode_on_grid(self.p, gamma, z, &self.settings, self.coarse_base.value),
        }
    }

    /// The modes on the coarse grid and, with extrapolation on, the refined one.
    pub fn modes(&self, gamma: f64, z: f64) -> Result<(PerturbedMode, Option<PerturbedMode>)> {
        let z = self.snap(z);
        let coarse = mode_on_grid(self.p, gamma, z, &self.settings.single(), self.coarse_base.value)?;
        let fine = match &self.fine_base {
            Some(b) => Some(mode_on_grid(self.p, gamma, z, &self.settings.refined(), b.value)?),
            None => None,
        };
        Ok((coarse, fine))
    }

    pub fn quantities(&self, gamma: f64, z: f64) -> Result<Spectral> {
        let (c, f) = self.modes(gamma, z)?;
        let pick = |g: fn(&PerturbedMode) -> f64| match &f {
            Some(f) => richardson(g(&c), g(f)),
            None => g(&c),
        };
        Ok(Spectral {
            z: c.z,
            nu: pick(|m| m.nu),
            tau: pick(|m| m.tau),
            rho: pick(|m| m.rho),
            t_at_delta: pick(|m| m.t_at_delta),
        })
    }

    /// `T_z - Q'` on the coarse grid, with the discrete zero mode standing in
    /// for `Q'` so that the `O(h²)` profile error cancels.
    pub fn deviation(&self, gamma: f64, z: f64) -> Result<RealField> {
        let (c, f) = self.modes(gamma, z)?;
        let grid = c.t.vector.grid;
        let dc: Vec<f64> = c.t.vector.values.iter().zip(&self.coarse_base.vector.values).map(|(a, b)| a - b).collect();
        let values = match (&f, &self.fine_base) {
            (Some(f), Some(fb)) => dc
                .iter()
                .enumerate()
                .map(|(k, d)| richardson(*d, f.t.vector.values[2 * k] - fb.vector.values[2 * k]))
                .collect(),
            _ => dc,
        };
        Ok(RealField { grid, values })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NuCheck {
    pub z: f64,
    pub tau: f64,
    pub bracket: NuBracket,
    /// Constants fitted at the reference separation.
    pub c_lower: f64,
    pub c_upper: f64,
    pub within: bool,
}

/// Reference separation where bracket budget constants are fitted.
pub const FIT_Z: f64 = 8.0;

/// `τ_z` against its bracket with correction constants fitted at `z = 8`.
pub fn check_nu(p: f64, gamma: f64, z: f64, settings: &EigenSettings) -> Result<NuCheck> {
    Ok(check_nu_sweep(p, gamma, &[z], settings)?.remove(0))
}

pub fn check_nu_sweep(p: f64, gamma: f64, zs: &[f64], settings: &EigenSettings) -> Result<Vec<NuCheck>> {
    if let Some(z) = zs.iter().find(|z| !(8.0..=24.0).contains(*z)) {
        return Err(Error::Domain(format!("check_nu needs z in [8, 24], got {z}")));
    }
    let bracket = nu_bracket(p, gamma)?;
    let solver = SpectralSolver::new(p, *settings)?;
    let reference = solver.quantities(gamma, FIT_Z)?;
    let (cl, cu) = bracket.fit(reference.tau, reference.z);
    zs.iter()
        .map(|&z| {
            let q = solver.quantities(gamma, z)?;
            Ok(NuCheck {
                z: q.z,
                tau: q.tau,
                bracket,
                c_lower: cl,
                c_upper: cu,
                within: bracket.contains(q.tau, q.z, cl, cu),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaValue {
    pub z: f64,
    pub rho: f64,
    pub tau: f64,
    pub bracket: (f64, f64),
    pub c_lower: f64,
    pub c_upper: f64,
    /// `|ρ_z - (1 - τ_z)|`.
    pub consistency_gap: f64,
    pub within: bool,
}

/// `ρ_z = T_z(-z/2) / (c_p e^{-z/2})` and the bracket for `1 - ρ_z`.
pub fn t_at_delta(p: f64, gamma: f64, z: f64, settings: &EigenSettings) -> Result<DeltaValue> {
    Ok(t_at_delta_sweep(p, gamma, &[z], settings)?.remove(0))
}

pub fn t_at_delta_sweep(p: f64, gamma: f64, zs: &[f64], settings: &EigenSettings) -> Result<Vec<DeltaValue>> {
    if let Some(z) = zs.iter().find(|z| **z < 8.0) {
        return Err(Error::Domain(format!("t_at_delta needs z >= 8, got {z}")));
    }
    let bracket = nu_bracket(p, gamma)?;
    let solver = SpectralSolver::new(p, *settings)?;
    let reference = solver.quantities(gamma, FIT_Z)?;
    let (cl, cu) = bracket.fit(1.0 - reference.rho, reference.z);
    zs.iter()
        .map(|&z| {
            let q = solver.quantities(gamma, z)?;
            Ok(DeltaValue {
                z: q.z,
                rho: q.rho,
                tau: q.tau,
                bracket: (bracket.lower, bracket.upper),
                c_lower: cl,
                c_upper: cu,
                consistency_gap: (q.rho - (1.0 - q.tau)).abs(),
                within: bracket.contains(1.0 - q.rho, q.z, cl, cu),
            })
        })
        .collect()
}

/// Step used for finite differences in `z`.
pub const DZ: f64 = 0.25;

/// `∂_z ν_z` by a central difference with step [`DZ`].
pub fn dz_nu(p: f64, gamma: f64, z: f64, settings: &EigenSettings) -> Result<f64> {
    let solver = SpectralSolver::new(p, *settings)?;
    dz_nu_with(&solver, gamma, z)
}

pub fn dz_nu_with(solver: &SpectralSolver, gamma: f64, z: f64) -> Result<f64> {
    if z < 8.0 {
        return Err(Error::Domain(format!("dz_nu needs z >= 8, got {z}")));
    }
    let z = solver.snap(z);
    Ok((solver.quantities(gamma, z + DZ)?.nu - solver.quantities(gamma, z - DZ)?.nu) / (2.0 * DZ))
}

/// Deviation of `T_z` from `Q'` measured against the regime bounds.
#[derive(Debug, Clone, Serialize)]
pub struct PointwiseProfile {
    pub z: f64,
    /// `max |T_z - Q'| / bound` in the regimes `|y| ≥ z/2`, `-z/2 ≤ y ≤ 0`, `y ≥ 0`.
    pub regime_ratios: [f64; 3],
    /// `‖T_z - Q'‖_{H¹} + ‖T_z - Q'‖_{L¹}`.
    pub h1_l1: f64,
    pub l2: f64,
    /// `‖∂_z T_z‖₂` by a central difference.
    pub dz_l2: f64,
    /// `y, |T_z - Q'|, bound` for every node.
    pub table: Vec<(f64, f64, f64)>,
}

// Bounds below this are at round-off level relative to O(1) eigenvectors.
const BOUND_FLOOR: f64 = 1e-13;

pub fn pointwise_profile(p: f64, gamma: f64, z: f64, settings: &EigenSettings) -> Result<PointwiseProfile> {
    let solver = SpectralSolver::new(p, *settings)?;
    pointwise_profile_with(&solver, gamma, z)
}

pub fn pointwise_profile_with(solver: &SpectralSolver, gamma: f64, z: f64) -> Result<PointwiseProfile> {
    if z < 8.0 {
        return Err(Error::Domain(format!("pointwise_profile needs z >= 8, got {z}")));
    }
    let z = solver.snap(z);
    let nu = solver.quantities(gamma, z)?.nu;
    let dev = solver.deviation(gamma, z)?;
    let grid = dev.grid;
    let h = grid.h;
    let kappa = (1.0 - nu).max(0.0).sqrt();
    let mut ratios = [0.0f64; 3];
    let mut table = Vec::with_capacity(grid.n);
    for (k, d) in dev.values.iter().enumerate() {
        let y = grid.x(k);
        let (regime, bound) = if y.abs() >= 0.5 * z {
            (0, (-kappa * y.abs()).exp())
        } else if y <= 0.0 {
            (1, (-z - y).exp())
        } else {
            (2, (-z).exp() * ((y + z) * (-y).exp() + (-0.5 * z).exp()))
        };
        table.push((y, d.abs(), bound));
        if bound > BOUND_FLOOR {
            ratios[regime] = ratios[regime].max(d.abs() / bound);
        }
    }
    let v = &dev.values;
    let l2 = (dot(v, v) * h).sqrt();
    let l1: f64 = v.iter().map(|d| d.abs()).sum::<f64>() * h;
    let dv = crate::numerics::derivative(v, h);
    let h1 = l2 + (dot(&dv, &dv) * h).sqrt();
    let plus = solver.deviation(gamma, z + DZ)?;
    let minus = solver.deviation(gamma, z - DZ)?;
    let dz: Vec<f64> = plus.values.iter().zip(&minus.values).map(|(a, b)| (a - b) / (2.0 * DZ)).collect();
    Ok(PointwiseProfile {
        z,
        regime_ratios: ratios,
        h1_l1: h1 + l1,
        l2,
        dz_l2: (dot(&dz, &dz) * h).sqrt(),
        table,
    })
}
