//! Modulation: writing `u = e^{iγ} λ^{-2/(p-1)} [P(·/λ; z, v) + ξ(·/λ)]` with
//! the remainder orthogonal to the right soliton's tangent directions, plus
//! the diagnostic functionals built on the remainder.

use std::sync::Mutex;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::ForceLaw;
use crate::eigen::{EigenSettings, SpectralSolver};
use crate::error::{Error, Result};
use crate::interaction::h_interaction;
use crate::numerics::{derivative, interpolate_cubic, norms, solve_dense, Grid1D, RealField, WaveField};
use crate::profiles::{
    cp_constant, cutoff_error_at, error_field_at, lambda_q, p_at, q_prime, q_profile, smoothstep,
    soliton_mass, MVector, ModelParams, SolitonState,
};

/// Which orthogonality conditions fix the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModulationMode {
    /// `⟨η,Q⟩ = ⟨η,yQ⟩ = ⟨η,iΛQ⟩ = ⟨η,iT_z⟩ = 0` for `(λ, γ, z, v)`.
    #[default]
    Full,
    /// The first three conditions for `(λ, γ, z)`; `v` is supplied by the
    /// force law.
    ThreePlusLaw,
}

#[derive(Debug, Clone)]
pub struct ModulationResult {
    pub state: SolitonState,
    pub mode: ModulationMode,
    /// Remainder on the `λ`-scaled grid.
    pub xi: WaveField,
    /// Remainder in the right-soliton frame; `None` when the frame shift
    /// would push part of the remainder (radiation near the ends) off the grid.
    pub eta: Option<WaveField>,
    /// The four orthogonality defects (the fourth is reported, not enforced,
    /// in [`ModulationMode::ThreePlusLaw`]).
    pub residuals: [f64; 4],
    pub iterations: usize,
    pub xi_h1: f64,
}

/// Largest defect accepted as converged.
pub const RESIDUAL_TOL: f64 = 1e-10;
const TARGET_TOL: f64 = 1e-13;
const MAX_ITERATIONS: usize = 50;
const FD_STEP: f64 = 1e-6;
/// `T_z` is re-solved when the separation has moved this far.
pub const TZ_REUSE: f64 = 0.25;

enum Translational {
    Analytic,
    Grid(RealField),
}

/// Decomposes snapshots for one model; caches `T_z` between calls.
pub struct Modulator {
    pub params: ModelParams,
    solver: Option<SpectralSolver>,
    cache: Mutex<Option<(f64, RealField)>>,
}

impl std::fmt::Debug for Modulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Modulator").field("params", &self.params).finish_non_exhaustive()
    }
}

impl Modulator {
    pub fn new(params: ModelParams) -> Result<Self> {
        let solver = if params.gamma == 0.0 {
            None
        } else {
            Some(SpectralSolver::new(params.p, EigenSettings::default().single())?)
        };
        Ok(Self { params, solver, cache: Mutex::new(None) })
    }

    fn translational(&self, z: f64) -> Result<Translational> {
        let Some(solver) = &self.solver else {
            return Ok(Translational::Analytic);
        };
        let mut cache = self.cache.lock().expect("cache lock");
        if let Some((zc, field)) = cache.as_ref() {
            if (zc - z).abs() <= TZ_REUSE {
                return Ok(Translational::Grid(field.clone()));
            }
        }
        let mode = solver.mode(self.params.gamma, z)?;
        *cache = Some((z, mode.t.vector.clone()));
        Ok(Translational::Grid(mode.t.vector))
    }

    /// Separation at which the cached `T_z` was solved, if any.
    pub fn cached_z(&self) -> Option<f64> {
        self.cache.lock().expect("cache lock").as_ref().map(|(z, _)| *z)
    }

    fn defects(&self, u: &WaveField, q: [f64; 4], t: &Translational) -> [f64; 4] {
        let p = self.params.p;
        let [lambda, gamma, z, v] = q;
        let grid = u.grid.scaled(lambda);
        let amp = Complex64::from_polar(lambda.powf(2.0 / (p - 1.0)), -gamma);
        let mut acc = [0.0; 4];
        for (k, uk) in u.values.iter().enumerate() {
            let y = grid.x(k);
            let s = y - 0.5 * z;
            let qs = q_profile(s, p);
            if qs < 1e-300 {
                continue;
            }
            let xi = uk * amp - p_at(y, z, v, p);
            let eta = xi * Complex64::from_polar(1.0, -0.5 * v * s);
            let tz = match t {
                Translational::Analytic => q_prime(s, p),
                Translational::Grid(field) => interpolate_cubic(&field.values, &field.grid, s, 0.0),
            };
            let w = grid.weight(k);
            // Re(η conj(g)) for g = Q, yQ, iΛQ, iT.
            acc[0] += w * eta.re * qs;
            acc[1] += w * eta.re * s * qs;
            acc[2] += w * eta.im * lambda_q(s, p);
            acc[3] += w * eta.im * tz;
        }
        acc
    }

    /// Solve the orthogonality conditions starting from `guess`.
    pub fn decompose(&self, u: &WaveField, guess: &SolitonState, mode: ModulationMode) -> Result<ModulationResult> {
        let t = self.translational(guess.z)?;
        let unknowns = match mode {
            ModulationMode::Full => 4,
            ModulationMode::ThreePlusLaw => 3,
        };
        let eval = |q: [f64; 4]| -> Result<[f64; 4]> {
            if !(q[0] > 0.0 && q[2] > 0.0) || q.iter().any(|x| !x.is_finite()) {
                return Err(Error::Decomposition { iterations: 0, residual: f64::INFINITY });
            }
            Ok(self.defects(u, q, &t))
        };
        let size = |r: &[f64; 4]| r[..unknowns].iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let mut q = guess.as_array();
        let mut r = eval(q)?;
        let mut iterations = 0;
        while size(&r) > TARGET_TOL && iterations < MAX_ITERATIONS {
            iterations += 1;
            let mut jac = vec![vec![0.0; unknowns]; unknowns];
            for j in 0..unknowns {
                let (mut a, mut b) = (q, q);
                a[j] += FD_STEP;
                b[j] -= FD_STEP;
                let (ra, rb) = (eval(a)?, eval(b)?);
                for i in 0..unknowns {
                    jac[i][j] = (ra[i] - rb[i]) / (2.0 * FD_STEP);
                }
            }
            let rhs: Vec<f64> = r[..unknowns].iter().map(|x| -x).collect();
            let dq = solve_dense(jac, rhs).map_err(|e| match e {
                Error::Singular { row } => Error::Conditioning { column: row },
                other => other,
            })?;
            if let Some(column) = dq.iter().position(|x| !x.is_finite()) {
                return Err(Error::Conditioning { column });
            }
            let mut damping = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let mut trial = q;
                for j in 0..unknowns {
                    trial[j] += damping * dq[j];
                }
                if let Ok(rt) = eval(trial) {
                    if size(&rt) < size(&r) {
                        q = trial;
                        r = rt;
                        accepted = true;
                        break;
                    }
                }
                damping *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        let residual = size(&r);
        if residual > RESIDUAL_TOL {
            return Err(Error::Decomposition { iterations, residual });
        }
        let state = SolitonState::new(q[0], q[1], q[2], q[3])?;
        let xi = remainder(u, &state, self.params.p);
        let eta = eta_from_xi(&xi, &state).ok();
        let xi_h1 = norms(&xi).h1;
        Ok(ModulationResult { state, mode, xi, eta, residuals: r, iterations, xi_h1 })
    }
}

/// One-shot [`Modulator::decompose`].
pub fn decompose(u: &WaveField, guess: &SolitonState, params: &ModelParams, mode: ModulationMode) -> Result<ModulationResult> {
    Modulator::new(*params)?.decompose(u, guess, mode)
}

/// `ξ(y) = e^{-iγ} λ^{2/(p-1)} u(λy) - P(y; z, v)` on the grid with nodes
/// `x_k/λ`.
pub fn remainder(u: &WaveField, state: &SolitonState, p: f64) -> WaveField {
    let grid = u.grid.scaled(state.lambda);
    let amp = Complex64::from_polar(state.lambda.powf(2.0 / (p - 1.0)), -state.gamma_phase);
    let values =
        u.values.iter().enumerate().map(|(k, uk)| uk * amp - p_at(grid.x(k), state.z, state.v, p)).collect();
    WaveField { grid, values }
}

/// Fraction of `‖ξ‖²` allowed to fall off the grid when shifting.
const SHIFT_LOSS_TOL: f64 = 1e-4;

fn shifted(xi: &WaveField, shift: f64, v_phase: f64) -> Result<WaveField> {
    let grid = xi.grid;
    let zero = Complex64::new(0.0, 0.0);
    let (lo, hi) = (grid.x_min + shift, grid.x_max + shift);
    let mut lost = 0.0;
    let mut total = 0.0;
    for k in 0..grid.n {
        let x = grid.x(k);
        let m = xi.values[k].norm_sqr() * grid.weight(k);
        total += m;
        if x < lo - 0.5 * grid.h || x > hi + 0.5 * grid.h {
            lost += m;
        }
    }
    if lost > SHIFT_LOSS_TOL * total && lost > 1e-24 {
        return Err(Error::Domain(format!(
            "shift by {shift} moves {:.2e} of the remainder's mass off the grid",
            lost / total
        )));
    }
    let values = (0..grid.n)
        .map(|k| {
            let y = grid.x(k);
            interpolate_cubic(&xi.values, &grid, y + shift, zero) * Complex64::from_polar(1.0, v_phase * y)
        })
        .collect();
    Ok(WaveField { grid, values })
}

/// `η(y) = e^{-ivy/2} ξ(y + z/2)`; exact (no interpolation) when `z/2` is
/// a multiple of the spacing.
pub fn eta_from_xi(xi: &WaveField, state: &SolitonState) -> Result<WaveField> {
    shifted(xi, 0.5 * state.z, -0.5 * state.v)
}

/// `η₂(y) = e^{ivy/2} ξ(y - z/2)`, the left-soliton frame.
pub fn eta2_from_xi(xi: &WaveField, state: &SolitonState) -> Result<WaveField> {
    shifted(xi, -0.5 * state.z, 0.5 * state.v)
}

/// Centered-difference `m⃗` at the middle entry of `history` (states at
/// uniform spacing `ds`).
pub fn mvec_estimate(history: &[SolitonState], ds: f64) -> Result<MVector> {
    if history.len() < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 states, got {}", history.len())));
    }
    if !(ds > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {ds}")));
    }
    let c = history.len() / 2;
    let (a, b, mid) = (&history[c - 1], &history[c + 1], &history[c]);
    let d = |f: fn(&SolitonState) -> f64| (f(b) - f(a)) / (2.0 * ds);
    Ok(MVector::from_rates(
        mid,
        d(|s| s.lambda) / mid.lambda,
        d(|s| s.z),
        d(|s| s.gamma_phase),
        d(|s| s.v),
    ))
}

/// The localization profile `χ̃`: `1` on `[0, 1/10]`, `0` on `[1/8, ∞)`.
pub fn momentum_cutoff(r: f64) -> f64 {
    1.0 - smoothstep((r.abs() - 0.1) / 0.025).0
}

/// `M(s) = Im ∫ η̄ ∂_y η χ̃(|y| / log s) dy`.
pub fn localized_momentum(eta: &WaveField, s: f64) -> Result<f64> {
    if !(s > std::f64::consts::E) {
        return Err(Error::Domain(format!("localized momentum needs s > e, got {s}")));
    }
    let scale = s.ln();
    let d = derivative(&eta.values, eta.grid.h);
    Ok((0..eta.grid.n)
        .map(|k| {
            let c = momentum_cutoff(eta.grid.x(k) / scale);
            if c == 0.0 {
                0.0
            } else {
                (eta.values[k].conj() * d[k]).im * c * eta.grid.weight(k)
            }
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyW {
    /// Modified linearized energy `H`.
    pub h: f64,
    /// `J = (v/2)(M₁ - M₂)`.
    pub j: f64,
    /// `W = H - J`.
    pub w: f64,
    pub m1: f64,
    pub m2: f64,
}

/// `H`, `J` and `W = H - J` for a remainder `ξ` at time `s`.
pub fn energy_functional_w(xi: &WaveField, state: &SolitonState, params: &ModelParams, s: f64) -> Result<EnergyW> {
    let p = params.p;
    let g = xi.grid;
    let vals = &xi.values;
    let n = vals.len();
    let mut quad = (vals[0].norm_sqr() + vals[n - 1].norm_sqr()) / g.h;
    for k in 0..n - 1 {
        quad += (vals[k + 1] - vals[k]).norm_sqr() / g.h;
    }
    let mut pairing = 0.0;
    for (k, &x) in vals.iter().enumerate() {
        let y = g.x(k);
        let w = g.weight(k);
        let pk = p_at(y, state.z, state.v, p);
        let ap = pk.norm();
        let nl = -(pk + x).norm().powf(p + 1.0) + ap.powf(p + 1.0) + (p + 1.0) * ap.powf(p - 1.0) * (pk.conj() * x).re;
        quad += (x.norm_sqr() + 2.0 / (p + 1.0) * nl) * w;
        pairing += (x * cutoff_error_at(y, state.z, state.v, p).conj()).re * w;
    }
    let h = 0.5 * quad + 0.5 * state.lambda * params.gamma * xi.at_origin().norm_sqr() - pairing;
    let m1 = localized_momentum(&eta_from_xi(xi, state)?, s)?;
    let m2 = localized_momentum(&eta2_from_xi(xi, state)?, s)?;
    let j = 0.5 * state.v * (m1 - m2);
    Ok(EnergyW { h, j, w: h - j, m1, m2 })
}

/// Advance `(z, v)` along `ż = 2v`, `v̇ = -H̃(z)` by `ds` in RK4 steps of at
/// most `dt`; supplies `v` between [`ModulationMode::ThreePlusLaw`] calls.
pub fn law_advance(law: &ForceLaw, z: f64, v: f64, ds: f64, dt: f64) -> Result<(f64, f64)> {
    let tr = crate::dynamics::integrate_ode_sampled(law, z, v, (0.0, ds), dt.abs(), usize::MAX)?;
    Ok((*tr.z.last().expect("non-empty"), *tr.v.last().expect("non-empty")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EinnerCheck {
    /// Separation used (snapped to the eigen grid).
    pub z: f64,
    /// `⟨E_P, (e^{iv·/2} T_z)(· - z/2)⟩`.
    pub measured: f64,
    /// `M(Q) m₄ + H(z) - 2Γ c_p e^{-z/2} T_z(-z/2)`.
    pub predicted: f64,
    /// `2Γ c_p e^{-z/2} T_z(-z/2)`.
    pub delta_term: f64,
    /// `e^{-z}(|m⃗| z² + v² z² + e^{-z/2})`, without constant.
    pub budget: f64,
    pub gap: f64,
}

/// Pairing of the ansatz error with the perturbed translational mode against
/// the force-law prediction. Requires `z ≥ 10`.
pub fn einner_check(state: &SolitonState, params: &ModelParams, m: &MVector) -> Result<EinnerCheck> {
    let solver = SpectralSolver::new(params.p, EigenSettings::default())?;
    einner_check_with(&solver, state, params, m)
}

pub fn einner_check_with(
    solver: &SpectralSolver,
    state: &SolitonState,
    params: &ModelParams,
    m: &MVector,
) -> Result<EinnerCheck> {
    if state.z < 10.0 {
        return Err(Error::Domain(format!("einner_check needs z >= 10, got {}", state.z)));
    }
    if solver.p != params.p {
        return Err(Error::InvalidParameter("solver built for a different p".into()));
    }
    let p = params.p;
    let z = solver.snap(state.z);
    let at_z = SolitonState { z, ..*state };
    let (coarse, fine) = solver.modes(params.gamma, z)?;
    let pairing = |t: &RealField| -> f64 {
        let g = t.grid;
        (0..g.n)
            .map(|k| {
                let x = g.x(k);
                let e = error_field_at(x + 0.5 * z, &at_z, m, p);
                let tv = Complex64::from_polar(t.values[k], 0.5 * state.v * x);
                (e * tv.conj()).re * g.weight(k)
            })
            .sum()
    };
    let (mut measured, mut t_delta) = (pairing(&coarse.t.vector), coarse.t_at_delta);
    if let Some(f) = &fine {
        measured = (4.0 * pairing(&f.t.vector) - measured) / 3.0;
        t_delta = (4.0 * f.t_at_delta - t_delta) / 3.0;
    }
    let delta_term = 2.0 * params.gamma * cp_constant(p)? * (-0.5 * z).exp() * t_delta;
    let predicted = soliton_mass(p) * m.m4 + h_interaction(z, p)? - delta_term;
    let v = state.v;
    let budget = (-z).exp() * (m.norm() * z * z + v * v * z * z + (-0.5 * z).exp());
    Ok(EinnerCheck { z, measured, predicted, delta_term, budget, gap: (measured - predicted).abs() })
}

/// Samples of `u` for a member of the family, `e^{iγ} λ^{-2/(p-1)} P(x/λ; z, v)`.
pub fn family_member(grid: &Grid1D, state: &SolitonState, p: f64) -> WaveField {
    let amp = Complex64::from_polar(state.lambda.powf(-2.0 / (p - 1.0)), state.gamma_phase);
    WaveField::from_fn(*grid, |x| p_at(x / state.lambda, state.z, state.v, p) * amp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(gamma: f64) -> ModelParams {
        ModelParams::new(3.0, gamma).unwrap()
    }

    fn st(l: f64, g: f64, z: f64, v: f64) -> SolitonState {
        SolitonState::new(l, g, z, v).unwrap()
    }

    #[test]
    fn recovers_exact_member() {
        let grid = Grid1D::default();
        let truth = st(1.0, 0.3, 20.0, 0.05);
        let u = family_member(&grid, &truth, 3.0);
        let modulator = Modulator::new(params(1.0)).unwrap();
        let r = modulator.decompose(&u, &st(1.004, 0.29, 20.1, 0.045), ModulationMode::Full).unwrap();
        for (a, b) in r.state.as_array().iter().zip(truth.as_array()) {
            assert!((a - b).abs() <= 1e-8, "{:?}", r.state);
        }
        assert!(r.residuals.iter().all(|x| x.abs() <= RESIDUAL_TOL));
        assert!(r.xi_h1 <= 1e-10, "{}", r.xi_h1);
    }

    #[test]
    fn recovers_scale() {
        let grid = Grid1D::default();
        let truth = st(1.1, 0.0, 16.0, 0.0);
        let u = family_member(&grid, &truth, 3.0);
        let r = decompose(&u, &st(1.0, 0.0, 16.0, 0.0), &params(0.0), ModulationMode::Full).unwrap();
        assert!((r.state.lambda - 1.1).abs() <= 1e-6, "{:?}", r.state);
    }

    #[test]
    fn perturbed_member_and_uniqueness() {
        let grid = Grid1D::default();
        let base = family_member(&grid, &st(1.0, 0.0, 18.0, 0.0), 3.0);
        // Even bump away from the solitons' tangent directions.
        let u = WaveField::from_fn(grid, |x| base.values[grid.nearest_index(x).unwrap()] + 1e-3 * (-(x.abs() - 6.0).powi(2)).exp());
        let modulator = Modulator::new(params(1.0)).unwrap();
        let guess = st(1.0, 0.0, 18.0, 0.0);
        let r = modulator.decompose(&u, &guess, ModulationMode::Full).unwrap();
        assert!(r.residuals.iter().all(|x| x.abs() <= RESIDUAL_TOL), "{:?}", r.residuals);
        let shift = r.state.as_array().iter().zip(guess.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(shift > 1e-6 && shift < 2e-2, "{shift}");
        for d in [[1e-2, 0.0, 0.0, 0.0], [0.0, -1e-2, 0.0, 0.0], [0.0, 0.0, 1e-2, 0.0], [0.0, 0.0, 0.0, 1e-2]] {
            let g = r.state.as_array();
            let g = st(g[0] + d[0], g[1] + d[1], g[2] + d[2], g[3] + d[3]);
            let again = modulator.decompose(&u, &g, ModulationMode::Full).unwrap();
            for (a, b) in again.state.as_array().iter().zip(r.state.as_array()) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
        // Gauge covariance.
        let theta = 0.7;
        let rotated = u.scale(Complex64::from_polar(1.0, theta));
        let g = st(r.state.lambda, r.state.gamma_phase + theta, r.state.z, r.state.v);
        let rr = modulator.decompose(&rotated, &g, ModulationMode::Full).unwrap();
        assert!((rr.state.gamma_phase - r.state.gamma_phase - theta).abs() <= 1e-10);
        assert!((rr.state.lambda - r.state.lambda).abs() <= 1e-10);
        assert!((rr.state.z - r.state.z).abs() <= 1e-10);
        assert!((rr.state.v - r.state.v).abs() <= 1e-10);
        assert!((rr.xi_h1 - r.xi_h1).abs() <= 1e-10);
    }

    #[test]
    fn three_plus_law_keeps_velocity() {
        let grid = Grid1D::default();
        let truth = st(1.0, 0.1, 14.0, 0.02);
        let u = family_member(&grid, &truth, 3.0);
        let r = decompose(&u, &st(1.0, 0.12, 14.1, 0.02), &params(0.5), ModulationMode::ThreePlusLaw).unwrap();
        assert_eq!(r.state.v, 0.02);
        assert!((r.state.z - 14.0).abs() < 1e-8 && (r.state.gamma_phase - 0.1).abs() < 1e-8);
    }

    #[test]
    fn decomposition_failure_is_reported() {
        let grid = Grid1D::default();
        let u = WaveField::zeros(grid);
        assert!(decompose(&u, &st(1.0, 0.0, 16.0, 0.0), &params(0.0), ModulationMode::Full).is_err());
    }

    #[test]
    fn eta_shift() {
        let grid = Grid1D::symmetric(40.0, 0.02).unwrap();
        let xi = WaveField::from_fn(grid, |x| Complex64::new((-(x - 3.0).powi(2)).exp(), 0.2 * (-(x + 2.0).powi(2)).exp()));
        let id = eta_from_xi(&xi, &SolitonState { lambda: 1.0, gamma_phase: 0.0, z: 0.0, v: 0.0 }).unwrap();
        assert_eq!(id.values, xi.values);
        let eta = eta_from_xi(&xi, &st(1.0, 0.0, 10.0, 0.3)).unwrap();
        assert!((norms(&eta).l2 - norms(&xi).l2).abs() < 1e-14);
        let k = grid.nearest_index(-2.0).unwrap();
        let expect = xi.values[grid.nearest_index(3.0).unwrap()] * Complex64::from_polar(1.0, 0.3);
        assert!((eta.values[k] - expect).norm() < 1e-15);
        let edge = WaveField::from_fn(grid, |x| Complex64::new((-(x + 37.0).powi(2)).exp(), 0.0));
        assert!(eta_from_xi(&edge, &st(1.0, 0.0, 10.0, 0.0)).is_err());
    }

    #[test]
    fn mvec_of_static_and_moving_states() {
        let s = st(1.0, 0.0, 20.0, 0.1);
        let m = mvec_estimate(&[s, s, s], 0.5).unwrap();
        assert_eq!((m.m1, m.m2, m.m4), (0.0, -0.1, 0.0));
        assert!((m.m3 - (0.01 / 4.0 - 1.0)).abs() < 1e-15);
        // Exact trajectory z = z0 + 2 v s, γ = s (1 - v²/4): m⃗ = 0.
        let traj = |ds: f64| -> Vec<SolitonState> {
            (0..3).map(|k| {
                let t = 1.0 + ds * k as f64;
                st(1.0, t * (1.0 - 0.0025) + 0.01 * t * t, 20.0 + 0.1 * t + 0.001 * t * t * t, 0.05)
            }).collect()
        };
        let e1 = mvec_estimate(&traj(0.2), 0.2).unwrap();
        let e2 = mvec_estimate(&traj(0.1), 0.1).unwrap();
        assert!(mvec_estimate(&traj(0.1)[..2], 0.1).is_err());
        // m2 error from the cubic term is O(ds²).
        let exact_m2 = |ds: f64| 0.5 * (0.1 + 0.003 * (1.0 + ds).powi(2)) - 0.05;
        let r = (e1.m2 - exact_m2(0.2)).abs() / (e2.m2 - exact_m2(0.1)).abs();
        assert!((r - 4.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn localized_momentum_properties() {
        let grid = Grid1D::symmetric(40.0, 0.02).unwrap();
        let real = WaveField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0));
        assert_eq!(localized_momentum(&real, 100.0).unwrap(), 0.0);
        assert!(localized_momentum(&real, 2.0).is_err());
        let far = WaveField::from_fn(grid, |x| {
            if x.abs() > 0.125 * 100f64.ln() { Complex64::from_polar(1.0, x) } else { Complex64::new(0.0, 0.0) }
        });
        assert_eq!(localized_momentum(&far, 100.0).unwrap(), 0.0);
        let moving = WaveField::from_fn(grid, |x| Complex64::from_polar((-x * x).exp(), 0.4 * x));
        let m = localized_momentum(&moving, 1e4).unwrap();
        let h1 = norms(&moving).h1;
        assert!(m > 0.0 && m <= h1 * h1);
    }

    #[test]
    fn energy_functional_scaling() {
        let grid = Grid1D::default();
        let state = st(1.0, 0.0, 16.0, 0.02);
        let zero = WaveField::zeros(grid);
        let w0 = energy_functional_w(&zero, &state, &params(1.0), 50.0).unwrap();
        assert_eq!((w0.h, w0.j, w0.w), (0.0, 0.0, 0.0));
        let shape = |x: f64| Complex64::new((-(x.abs() - 8.0).powi(2)).exp(), 0.3 * (-(x.abs() - 7.0).powi(2)).exp());
        let mut ratios = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let xi = WaveField::from_fn(grid, |x| shape(x) * eps);
            let e = energy_functional_w(&xi, &state, &params(1.0), 50.0).unwrap();
            assert!((e.m1 + e.m2).abs() <= 1e-12 * (1.0 + e.m1.abs()));
            let h1 = norms(&xi).h1;
            ratios.push(e.w.abs() / (h1 * h1 + h1 * (-0.5 * state.z).exp()));
        }
        let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
        assert!(hi < 10.0 * lo.max(1e-3) && hi < 5.0, "{ratios:?}");
    }

    #[test]
    fn einner_matches_force_law() {
        // Constants fitted at z = 10 with the 5% margin, enforced beyond.
        let solver = SpectralSolver::new(3.0, EigenSettings::default()).unwrap();
        let m = MVector::zero();
        let ratios = |z: f64| {
            let zero = einner_check_with(&solver, &st(1.0, 0.0, z, 0.0), &params(0.0), &m).unwrap();
            let one = einner_check_with(&solver, &st(1.0, 0.0, z, 0.0), &params(1.0), &m).unwrap();
            assert!(one.delta_term > 0.0 && zero.delta_term == 0.0);
            let iso = (one.measured - zero.measured) + one.delta_term;
            assert!(iso.abs() <= 1e-3 * one.delta_term);
            [zero.gap / zero.budget, one.gap / one.budget, iso.abs() / one.budget]
        };
        let base = ratios(10.0);
        let fitted = 1.05 * base[0].max(base[1]);
        for z in [10.0, 12.0, 14.0] {
            let r = ratios(z);
            assert!(r[0] <= 1.05 * base[0] && r[1] <= 1.05 * base[1], "z = {z}: {r:?} vs {base:?}");
            // The difference changes sign near z = 11, so it is held to the
            // constant fitted for the gap rather than to its own value at 10.
            assert!(r[2] <= fitted, "z = {z}: {r:?}");
        }
        assert!(einner_check_with(&solver, &st(1.0, 0.0, 8.0, 0.0), &params(0.0), &m).is_err());
    }
}
