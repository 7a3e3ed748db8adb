//! The property suite behind `logsep validate`.
//!
//! `--quick` runs the cheap exact checks (zero-strength limits, identities,
//! plumbing); the full suite adds the ten acceptance criteria.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::attraction::velocity_crossing;
use super::config::RunConfig;
use super::criteria;
use super::output::write_json;
use super::shooting::{Pipeline, Shooter};
use crate::dynamics::{ForceLaw, ForceLawOptions};
use crate::eigen::{EigenSettings, SpectralSolver};
use crate::error::{Error, Result};
use crate::evolver::{Evolver, EvolverConfig};
use crate::interaction::action_and_nehari;
use crate::numerics::{Grid1D, WaveField};
use crate::profiles::{q_profile, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub metrics: Value,
    pub error: Option<String>,
}

type CheckFn = fn() -> Result<(bool, Value)>;

fn quick_checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("closed_form_identities", || criteria::run(1).map(|r| (r.passed, r.metrics))),
        ("attractive_delta_oracle", || criteria::run(2).map(|r| (r.passed, r.metrics))),
        ("zero_strength_spectrum", zero_strength_spectrum),
        ("free_force_law", free_force_law),
        ("nehari_at_soliton", nehari_at_soliton),
        ("linear_flow_unitary", linear_flow_unitary),
        ("config_round_trip", config_round_trip),
        ("bracket_violation", bracket_violation),
        ("free_control_never_turns", free_control_never_turns),
    ]
}

fn zero_strength_spectrum() -> Result<(bool, Value)> {
    let solver = SpectralSolver::new(3.0, EigenSettings::default())?;
    let q = solver.quantities(0.0, 16.0)?;
    Ok((q.tau.abs() < 1e-9 && (q.rho - 1.0).abs() < 1e-6, json!({"tau": q.tau, "rho": q.rho})))
}

fn free_force_law() -> Result<(bool, Value)> {
    let law = ForceLaw::build(3.0, 0.0, ForceLawOptions::default())?;
    let r = law.big_f(30.0) * 30f64.exp() / law.sigma.powi(2);
    let positive = law.g.iter().all(|g| *g > 0.0);
    Ok(((r - 1.0).abs() < 1e-3 && positive, json!({"big_f_ratio_at_30": r, "htilde_positive": positive})))
}

fn nehari_at_soliton() -> Result<(bool, Value)> {
    let grid = Grid1D::default();
    let u = WaveField::from_fn(grid, |x| Complex64::new(q_profile(x, 3.0), 0.0));
    let f = action_and_nehari(&u, &ModelParams::new(3.0, 0.0)?);
    Ok((f.nehari.abs() < 1e-6, json!({"nehari": f.nehari, "action": f.action})))
}

fn linear_flow_unitary() -> Result<(bool, Value)> {
    let grid = Grid1D::symmetric(30.0, 0.02)?;
    let ev = Evolver::new(grid, EvolverConfig::new(ModelParams::new(3.0, 5.0)?, 1e-3)?.linear().check_every(0))?;
    let u = WaveField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()));
    let out = ev.evolve(&u, 0.0, 0.05)?;
    let mass = |u: &WaveField| u.values.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let drift = (mass(&out.u) - mass(&u)).abs() / mass(&u);
    Ok((drift <= 1e-10, json!({"relative_mass_drift": drift})))
}

fn config_round_trip() -> Result<(bool, Value)> {
    let cfg = RunConfig::new("shoot", 1.0);
    let back = RunConfig::from_json(&serde_json::to_string(&cfg)?)?;
    let rejected = matches!(RunConfig::from_json(r#"{"experiment":"shoot","dt":-1}"#), Err(Error::Config(_)));
    Ok((back == cfg && rejected, json!({"round_trip": back == cfg, "bad_config_rejected": rejected})))
}

fn bracket_violation() -> Result<(bool, Value)> {
    let law = ForceLaw::build(3.0, 0.0, ForceLawOptions::default())?;
    let shooter = Shooter::new(&RunConfig::new("shoot", 0.0), &law)?;
    let z = shooter.ode_prediction()?;
    let err = shooter.bisect([z + 0.5, z + 1.0], Pipeline::Ode);
    let ok = matches!(err, Err(Error::Bracket(_)));
    Ok((ok, json!({"bracket_error": ok})))
}

fn free_control_never_turns() -> Result<(bool, Value)> {
    let law = ForceLaw::build(3.0, 0.0, ForceLawOptions::default())?;
    let c = velocity_crossing(&law, 12.0, 4.0 * (-6.0f64).exp(), 100.0, 2000.0)?;
    Ok((c.crossing_s.is_none(), json!({"crossing_s": c.crossing_s, "status": c.status})))
}

fn timed(name: &str, f: impl FnOnce() -> Result<(bool, Value)>) -> CheckReport {
    let start = Instant::now();
    let (passed, metrics, error) = match f() {
        Ok((p, m)) => (p, m, None),
        Err(e) => (false, Value::Null, Some(e.to_string())),
    };
    CheckReport { name: name.to_string(), passed, seconds: start.elapsed().as_secs_f64(), metrics, error }
}

/// Runs the suite on the rayon pool; each check writes `<out>/<name>.json`.
pub fn run_suite(quick: bool, out: Option<&Path>) -> Result<Vec<CheckReport>> {
    let mut reports: Vec<CheckReport> = quick_checks().into_par_iter().map(|(name, f)| timed(name, f)).collect();
    if !quick {
        let full: Vec<CheckReport> = (1..=10u8)
            .into_par_iter()
            .map(|id| timed(&format!("criterion_{id:02}"), || criteria::run(id).map(|r| (r.passed, r.metrics))))
            .collect();
        reports.extend(full);
    }
    if let Some(dir) = out {
        for r in &reports {
            write_json(&dir.join(format!("{}.json", r.name)), r)?;
        }
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes_and_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let start = Instant::now();
        let reports = run_suite(true, Some(dir.path())).unwrap();
        assert!(start.elapsed().as_secs_f64() < 60.0);
        for r in &reports {
            assert!(r.passed, "{r:?}");
            assert!(dir.path().join(format!("{}.json", r.name)).exists());
        }
    }
}
