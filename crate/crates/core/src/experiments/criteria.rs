//! The ten acceptance criteria as library functions, shared by the
//! `acceptance` test target and `logsep validate`.
//!
//! Each criterion returns a [`CriterionReport`] whose `metrics` hold every
//! number the verdict was computed from.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::attraction::attraction_demo;
use super::config::RunConfig;
use super::shooting::{Pipeline, Shooter};
use crate::dynamics::{
    f_bracket, htilde_with, integrate_ode_sampled, sigma, zeta_bracket, ForceLaw, ForceLawOptions, ZetaOrigin,
};
use crate::eigen::{
    a_p, check_nu_sweep, dz_nu_with, pointwise_profile_with, t_at_delta_sweep, EigenSettings, NuBracket,
    PointOperator, SpectralSolver, FIT_Z,
};
use crate::error::Result;
use crate::evolver::{evolve, EvolverConfig};
use crate::interaction::ip_integral;
use crate::modulation::{einner_check_with, family_member, ModulationMode, Modulator, RESIDUAL_TOL};
use crate::numerics::{norms, Grid1D, WaveField};
use crate::profiles::{
    approx_two_soliton, cp_constant, ode_residual, pohozaev_residual, q_profile, MVector, ModelParams,
    SolitonState,
};

/// Margin on constants fitted at a reference point.
pub const FIT_MARGIN: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub metrics: Value,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {} ({:.1} s)",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds
        )
    }
}

pub const NAMES: [&str; 10] = [
    "closed-form identities",
    "discretization oracle",
    "spectral brackets",
    "eigenfunction estimates",
    "force law",
    "effective dynamics",
    "PDE conservation and accuracy",
    "force-law identity in the residual",
    "modulation",
    "desk-scale construction",
];

/// Runs criterion `id` (1 to 10).
pub fn run(id: u8) -> Result<CriterionReport> {
    let start = Instant::now();
    let (passed, metrics) = match id {
        1 => closed_form()?,
        2 => discretization_oracle()?,
        3 => spectral_brackets()?,
        4 => eigenfunction_estimates()?,
        5 => force_law()?,
        6 => effective_dynamics()?,
        7 => pde_accuracy()?,
        8 => residual_identity()?,
        9 => modulation()?,
        10 => construction()?,
        _ => return Err(crate::Error::InvalidParameter(format!("no criterion {id}"))),
    };
    Ok(CriterionReport {
        id,
        name: NAMES[id as usize - 1].to_string(),
        passed,
        seconds: start.elapsed().as_secs_f64(),
        metrics,
    })
}

type Outcome = Result<(bool, Value)>;

fn closed_form() -> Outcome {
    let grid = Grid1D::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for p in [3.0, 4.0, 7.0] {
        let ode = ode_residual(p, &grid).analytic;
        let poh = pohozaev_residual(p, &grid);
        let ratio = ip_integral(p) / (2.0 * cp_constant(p)?);
        let pass = ode <= 1e-10 && poh <= 1e-10 && (ratio - 1.0).abs() <= 1e-6;
        ok &= pass;
        rows.push(json!({"p": p, "ode_residual": ode, "pohozaev_residual": poh, "ip_over_2cp": ratio, "pass": pass}));
    }
    Ok((ok, json!({"rows": rows})))
}

fn discretization_oracle() -> Outcome {
    // Attractive delta of strength Γ: the bound state of -∂² + 1 - Γδ sits at 1 - Γ²/4.
    let grid = Grid1D::default();
    let mut ok = grid.h == 0.02;
    let mut rows = Vec::new();
    for gamma in [1.0, 2.0] {
        let op = PointOperator::validation(&grid, -gamma, 0.0)?;
        let e = crate::eigen::ground_state(&op)?.value;
        let exact = 1.0 - gamma * gamma / 4.0;
        let pass = (e - exact).abs() <= 2e-3;
        ok &= pass;
        rows.push(json!({"gamma": gamma, "eigenvalue": e, "exact": exact, "error": (e - exact).abs(), "pass": pass}));
    }
    Ok((ok, json!({"h": grid.h, "rows": rows})))
}

fn spectral_brackets() -> Outcome {
    let zs = [10.0, 12.0, 16.0, 20.0];
    let settings = EigenSettings::default();
    let results: Vec<Result<(bool, Value)>> = [0.5, 1.0, 2.0]
        .par_iter()
        .map(|&gamma| {
            let nu = check_nu_sweep(3.0, gamma, &zs, &settings)?;
            let rho = t_at_delta_sweep(3.0, gamma, &zs, &settings)?;
            let c = FIT_MARGIN * rho[0].consistency_gap * (0.5 * rho[0].z).exp();
            let mut ok = true;
            let mut rows = Vec::new();
            for (n, r) in nu.iter().zip(&rho) {
                let consistent = r.consistency_gap <= c * (-0.5 * r.z).exp();
                ok &= n.within && r.within && consistent;
                rows.push(json!({
                    "z": n.z, "tau": n.tau, "tau_within": n.within,
                    "one_minus_rho": 1.0 - r.rho, "rho_within": r.within,
                    "consistency_gap": r.consistency_gap, "consistency_budget": c * (-0.5 * r.z).exp(),
                }));
            }
            Ok((ok, json!({"gamma": gamma, "bracket": [nu[0].bracket.lower, nu[0].bracket.upper],
                "c_lower": nu[0].c_lower, "c_upper": nu[0].c_upper, "rows": rows})))
        })
        .collect();
    collect(results)
}

fn collect(results: Vec<Result<(bool, Value)>>) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in results {
        let (pass, v) = r?;
        ok &= pass;
        parts.push(v);
    }
    Ok((ok, json!({"parts": parts})))
}

fn eigenfunction_estimates() -> Outcome {
    let solver = SpectralSolver::new(3.0, EigenSettings::default())?;
    let gamma = 1.0;
    let zs = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0];
    let rows: Vec<Result<[f64; 4]>> = zs
        .par_iter()
        .map(|&z| {
            let pr = pointwise_profile_with(&solver, gamma, z)?;
            let e = (0.5 * pr.z).exp();
            Ok([pr.z, pr.h1_l1 * e, pr.dz_l2 * e, dz_nu_with(&solver, gamma, z)?.abs() * (pr.z).exp()])
        })
        .collect();
    let rows: Vec<[f64; 4]> = rows.into_iter().collect::<Result<_>>()?;
    let fitted = [FIT_MARGIN * rows[0][1], FIT_MARGIN * rows[0][2], FIT_MARGIN * rows[0][3]];
    let ok = rows.iter().all(|r| r[1] <= fitted[0] && r[2] <= fitted[1] && r[3] <= fitted[2]);
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({"z": r[0], "h1_l1_scaled": r[1], "dz_t_scaled": r[2], "dz_nu_scaled": r[3]}))
        .collect();
    Ok((ok, json!({"gamma": gamma, "fitted_constants": fitted, "rows": table})))
}

/// A bracket `[lo, hi]` with `e^{-z/2}` / `e^{-a_p z}` corrections whose
/// constants are fitted from the value at [`FIT_Z`].
fn fitted_bracket(lo: f64, hi: f64, value_at_fit: f64) -> (NuBracket, f64, f64) {
    fitted_with_rates(lo, hi, value_at_fit, 0.5, a_p(3.0))
}

/// ζ ~ 1/√f swaps the endpoints, and with them the correction rates.
fn fitted_zeta_bracket(lo: f64, hi: f64, value_at_fit: f64) -> (NuBracket, f64, f64) {
    fitted_with_rates(lo, hi, value_at_fit, a_p(3.0), 0.5)
}

fn fitted_with_rates(lo: f64, hi: f64, value_at_fit: f64, lower_rate: f64, upper_rate: f64) -> (NuBracket, f64, f64) {
    let b = NuBracket { lower: lo, upper: hi, lower_rate, upper_rate };
    let (cl, cu) = b.fit(value_at_fit, FIT_Z);
    (b, cl, cu)
}

fn force_law() -> Outcome {
    let p = 3.0;
    let s2 = sigma(p)?.powi(2);
    let solver = SpectralSolver::new(p, EigenSettings::default())?;
    let f = |z: f64, gamma: f64| -> Result<f64> { Ok(htilde_with(Some(&solver), z, p, gamma)? * z.exp()) };
    let (lo, hi) = f_bracket(1.0);
    let (fb, cl, cu) = fitted_bracket(lo, hi, f(FIT_Z, 1.0)? / s2);
    let zs = [12.0, 14.0, 16.0, 18.0, 20.0];
    let f_rows: Vec<(f64, f64)> = zs.iter().map(|&z| Ok((z, f(z, 1.0)? / s2))).collect::<Result<_>>()?;
    let f_ok = f_rows.iter().all(|&(z, v)| fb.contains(v, z, cl, cu));
    let mut neg = Vec::new();
    for gamma in [2.5, 3.0] {
        for z in [10.0, 14.0, 18.0] {
            neg.push((gamma, z, f(z, gamma)?));
        }
    }
    let neg_ok = neg.iter().all(|r| r.2 < 0.0);
    let law = ForceLaw::build(p, 1.0, ForceLawOptions { origin: ZetaOrigin::Asymptotic, ..Default::default() })?;
    let big_f = |z: f64| law.big_f(z) * z.exp() / s2;
    let (bf, fcl, fcu) = fitted_bracket(lo, hi, big_f(FIT_Z));
    let f18 = big_f(18.0);
    let big_f_ok = bf.contains(f18, 18.0, fcl, fcu);
    let zeta_ratio = |z: f64| -> Result<f64> { Ok(law.sigma * law.zeta(z)? * (-0.5 * z).exp()) };
    let (za, zb) = zeta_bracket(1.0);
    let (zbk, zcl, zcu) = fitted_zeta_bracket(za, zb, zeta_ratio(FIT_Z)?);
    let z18 = zeta_ratio(18.0)?;
    let zeta_ok = zbk.contains(z18, 18.0, zcl, zcu);
    let ok = f_ok && neg_ok && big_f_ok && zeta_ok;
    Ok((
        ok,
        json!({
            "f_over_sigma2": {"bracket": [lo, hi], "c_lower": cl, "c_upper": cu, "rows": f_rows, "pass": f_ok},
            "negative": {"rows": neg, "pass": neg_ok},
            "big_f_at_18": {"value": f18, "bracket": [lo, hi], "budget": [bf.lower_budget(fcl, 18.0), bf.upper_budget(fcu, 18.0)], "pass": big_f_ok},
            "zeta_at_18": {"value": z18, "bracket": [za, zb], "budget": [zbk.lower_budget(zcl, 18.0), zbk.upper_budget(zcu, 18.0)], "pass": zeta_ok},
        }),
    ))
}

fn effective_dynamics() -> Outcome {
    let results: Vec<Result<(bool, Value)>> = [0.0, 1.0]
        .par_iter()
        .map(|&gamma| {
            let law = ForceLaw::build(3.0, gamma, ForceLawOptions::default())?;
            let z0 = 2.0 * 100f64.ln();
            let v0 = law.classical_velocity(z0)?;
            let tr = integrate_ode_sampled(&law, z0, v0, (100.0, 1.0e4), 0.05, 20)?;
            let mut sup = 0.0f64;
            let mut rate = 0.0f64;
            for k in 0..tr.len() {
                sup = sup.max((tr.z[k] - 2.0 * tr.s[k].ln()).abs());
                // dζ/ds = ζ'(z) ż = v / √F(z).
                rate = rate.max((tr.v[k] / law.big_f(tr.z[k]).sqrt() - 1.0).abs());
            }
            let ok = sup < 3.0 && tr.energy_drift <= 1e-8 && rate <= 1e-3;
            Ok((ok, json!({"gamma": gamma, "sup_z_minus_2logs": sup, "energy_drift": tr.energy_drift, "zeta_rate_error": rate, "status": tr.status})))
        })
        .collect();
    collect(results)
}

fn soliton(grid: &Grid1D) -> WaveField {
    WaveField::from_fn(*grid, |x| Complex64::new(q_profile(x, 3.0), 0.0))
}

fn soliton_error(h: f64, dt: f64) -> Result<f64> {
    let grid = Grid1D::symmetric(40.0, h)?;
    let cfg = EvolverConfig::new(ModelParams::new(3.0, 0.0)?, dt)?.check_every(0);
    let out = evolve(&soliton(&grid), 0.0, 1.0, &cfg)?;
    let exact = soliton(&grid).scale(Complex64::from_polar(1.0, 1.0));
    Ok(norms(&out.u.sub(&exact)?).l2)
}

fn pde_accuracy() -> Outcome {
    let grid = Grid1D::default();
    let u0 = approx_two_soliton(&grid, 16.0, 0.05, 3.0)?;
    let cfg = EvolverConfig::new(ModelParams::new(3.0, 1.0)?, 1e-3)?;
    let out = evolve(&u0, 0.0, 10.0, &cfg)?;
    let conserve = out.blowup.is_none() && out.mass_drift <= 1e-7 && out.energy_drift <= 1e-5;
    let errors: Vec<f64> = [(0.02, 1e-3), (0.08, 4e-3), (0.04, 2e-3)]
        .par_iter()
        .map(|&(h, dt)| soliton_error(h, dt))
        .collect::<Result<_>>()?;
    let ratio = errors[1] / errors[2];
    let accurate = errors[0] <= 1e-3 && (3.5..=4.5).contains(&ratio);
    Ok((
        conserve && accurate,
        json!({
            "two_soliton": {"z": 16.0, "v": 0.05, "gamma": 1.0, "t": [0.0, 10.0], "mass_drift": out.mass_drift,
                "energy_drift": out.energy_drift, "boundary_max": out.boundary_max},
            "soliton_error": errors[0], "refinement_ratio": ratio,
        }),
    ))
}

fn residual_identity() -> Outcome {
    let solver = SpectralSolver::new(3.0, EigenSettings::default())?;
    let m = MVector::zero();
    let zs = [10.0, 12.0, 14.0, 16.0, 18.0];
    let rows: Vec<Result<[f64; 6]>> = zs
        .par_iter()
        .map(|&z| {
            let state = SolitonState::new(1.0, 0.0, z, 0.0)?;
            let zero = einner_check_with(&solver, &state, &ModelParams::new(3.0, 0.0)?, &m)?;
            let one = einner_check_with(&solver, &state, &ModelParams::new(3.0, 1.0)?, &m)?;
            let iso = (one.measured - zero.measured) + one.delta_term;
            Ok([zero.z, zero.gap / zero.budget, one.gap / one.budget, iso.abs() / one.budget, iso.abs() / one.delta_term, one.delta_term])
        })
        .collect();
    let rows: Vec<[f64; 6]> = rows.into_iter().collect::<Result<_>>()?;
    let c0 = FIT_MARGIN * rows[0][1];
    let c1 = FIT_MARGIN * rows[0][2];
    let c_gap = c0.max(c1);
    let ok = rows.iter().all(|r| r[1] <= c0 && r[2] <= c1 && r[3] <= c_gap && r[4] <= 1e-3);
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({"z": r[0], "gap_ratio_gamma0": r[1], "gap_ratio_gamma1": r[2], "isolation_ratio": r[3], "isolation_relative": r[4], "delta_term": r[5]}))
        .collect();
    Ok((ok, json!({"fitted": {"gamma0": c0, "gamma1": c1}, "rows": table})))
}

fn modulation() -> Outcome {
    let grid = Grid1D::default();
    let mut ok = true;
    let mut rows = Vec::new();
    for (gamma, truth, guess) in [
        (0.0, [1.0, 0.3, 20.0, 0.05], [1.004, 0.29, 20.1, 0.045]),
        (1.0, [1.0, 0.3, 20.0, 0.05], [1.004, 0.29, 20.1, 0.045]),
        (1.0, [0.9, -1.2, 14.0, -0.02], [0.905, -1.19, 14.05, -0.018]),
    ] {
        let modulator = Modulator::new(ModelParams::new(3.0, gamma)?)?;
        let t = SolitonState::new(truth[0], truth[1], truth[2], truth[3])?;
        let g = SolitonState::new(guess[0], guess[1], guess[2], guess[3])?;
        let u = family_member(&grid, &t, 3.0);
        let r = modulator.decompose(&u, &g, ModulationMode::Full)?;
        let err = r.state.as_array().iter().zip(t.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let res = r.residuals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let theta = 0.7;
        let rotated = u.scale(Complex64::from_polar(1.0, theta));
        let gr = SolitonState::new(r.state.lambda, r.state.gamma_phase + theta, r.state.z, r.state.v)?;
        let rr = modulator.decompose(&rotated, &gr, ModulationMode::Full)?;
        let d = rr.state.as_array();
        let s = r.state.as_array();
        let gauge = (d[1] - s[1] - theta).abs().max((d[0] - s[0]).abs()).max((d[2] - s[2]).abs()).max((d[3] - s[3]).abs());
        let pass = err <= 1e-8 && res <= RESIDUAL_TOL && gauge <= 1e-10;
        ok &= pass;
        rows.push(json!({"gamma": gamma, "truth": truth, "recovery_error": err, "residual": res, "gauge_error": gauge, "pass": pass}));
    }
    Ok((ok, json!({"rows": rows})))
}

fn construction() -> Outcome {
    let shoot_cfg = RunConfig::new("shoot", 1.0);
    let law1 = ForceLaw::build(3.0, 1.0, ForceLawOptions::default())?;
    let shooter = Shooter::new(&shoot_cfg, &law1)?;
    let prediction = shooter.ode_prediction()?;
    let (bisection, run) = shooter.bisect([prediction - 1.0, prediction + 1.0], Pipeline::Pde)?;
    let run = match run {
        Some(r) => r,
        None => shooter.run(bisection.z_f, None)?,
    };
    let verdicts = run.verdicts;
    let shoot_ok = bisection.converged
        && run.failure.is_none()
        && verdicts.is_some_and(|v| v.xi_bounded && v.slope_ok)
        && (bisection.z_f - prediction).abs() <= 0.5;
    let attract_cfg = RunConfig::new("attract", 3.0);
    let law3 = ForceLaw::build(3.0, 3.0, ForceLawOptions::default())?;
    let attraction = attraction_demo(&attract_cfg, &law3, true)?;
    let trend = attraction.pde.as_ref();
    let attract_ok =
        attraction.ode.crossing_s.is_some() && trend.is_some_and(|t| t.failure.is_none() && t.decreasing && t.sub_two);
    Ok((
        shoot_ok && attract_ok,
        json!({
            "shooting": {
                "z_f": bisection.z_f, "ode_prediction": prediction, "bisection": bisection,
                "verdicts": verdicts, "failure": run.failure, "mass_drift": run.mass_drift,
                "energy_drift": run.energy_drift, "ode_z_rel_gap": run.ode_z_rel_gap, "pass": shoot_ok,
            },
            "attraction": {
                "ode_crossing_s": attraction.ode.crossing_s, "ode_elapsed": attraction.ode.elapsed,
                "pde_trend_slope": trend.map(|t| t.trend_slope), "pde_log_slope": trend.map(|t| t.log_slope),
                "pde_failure": trend.and_then(|t| t.failure.clone()), "pass": attract_ok,
            },
        }),
    ))
}
