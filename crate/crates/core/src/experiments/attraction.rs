//! Strong repulsive delta (`Γ > 2`): the relative velocity changes sign and
//! the separation falls behind `2 log t`.

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::{write_json, write_rows};
use super::shooting::{Shooter, TrajectoryRow, ODE_DT};
use crate::dynamics::{integrate_ode_sampled, ForceLaw, ForceLawOptions, TrajectoryStatus, ZetaOrigin};
use crate::error::{Error, Result};
use crate::modulation::ModulationMode;

/// How far back the ODE is followed, in units of `t_f`.
pub const ODE_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeSample {
    pub s: f64,
    pub z: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityCrossing {
    pub s_f: f64,
    pub z_f: f64,
    pub v_f: f64,
    /// First `s < s_f` (backward from `s_f`) with `v(s) = 0`, linearly
    /// interpolated; the ODE is autonomous, so this may be negative.
    pub crossing_s: Option<f64>,
    /// `s_f - crossing_s`.
    pub elapsed: Option<f64>,
    pub z_at_crossing: Option<f64>,
    pub status: TrajectoryStatus,
    pub samples: Vec<OdeSample>,
}

/// Integrates the force law backward from `(s_f, z_f, v_f)` over `horizon`
/// and locates the first zero of `v`.
pub fn velocity_crossing(law: &ForceLaw, z_f: f64, v_f: f64, s_f: f64, horizon: f64) -> Result<VelocityCrossing> {
    let every = (1.0 / ODE_DT).round() as usize;
    let tr = integrate_ode_sampled(law, z_f, v_f, (s_f, s_f - horizon), ODE_DT, 1)?;
    let mut crossing = None;
    for k in 1..tr.len() {
        if tr.v[k - 1] > 0.0 && tr.v[k] <= 0.0 {
            let w = tr.v[k - 1] / (tr.v[k - 1] - tr.v[k]);
            crossing = Some((tr.s[k - 1] + w * (tr.s[k] - tr.s[k - 1]), tr.z[k - 1] + w * (tr.z[k] - tr.z[k - 1])));
            break;
        }
    }
    let samples = (0..tr.len())
        .filter(|&k| k % every == 0 || k + 1 == tr.len())
        .map(|k| OdeSample { s: tr.s[k], z: tr.z[k], v: tr.v[k] })
        .collect();
    Ok(VelocityCrossing {
        s_f,
        z_f,
        v_f,
        crossing_s: crossing.map(|c| c.0),
        elapsed: crossing.map(|c| s_f - c.0),
        z_at_crossing: crossing.map(|c| c.1),
        status: tr.status,
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeTrend {
    pub rows: Vec<TrajectoryRow>,
    /// Least-squares slope of `z(t) - 2 log t` against `t`.
    pub trend_slope: f64,
    /// Least-squares slope of `z` against `log t`.
    pub log_slope: f64,
    pub decreasing: bool,
    pub sub_two: bool,
    /// Blowup or a failed decomposition ends the run early; both are logged.
    pub failure: Option<String>,
    pub mass_drift: f64,
    pub energy_drift: f64,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

impl PdeTrend {
    /// Recomputes the trend flags from logged rows.
    pub fn from_rows(rows: Vec<TrajectoryRow>, failure: Option<String>, mass_drift: f64, energy_drift: f64) -> Self {
        let (trend_slope, log_slope) = if rows.len() >= 3 {
            let t: Vec<f64> = rows.iter().map(|r| r.t).collect();
            let lt: Vec<f64> = t.iter().map(|t| t.ln()).collect();
            let z: Vec<f64> = rows.iter().map(|r| r.z).collect();
            let w: Vec<f64> = rows.iter().map(|r| r.z - 2.0 * r.t.ln()).collect();
            (ls_slope(&t, &w), ls_slope(&lt, &z))
        } else {
            (f64::NAN, f64::NAN)
        };
        Self {
            rows,
            trend_slope,
            log_slope,
            decreasing: trend_slope < 0.0,
            sub_two: log_slope < 2.0,
            failure,
            mass_drift,
            energy_drift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractionReport {
    pub p: f64,
    pub gamma: f64,
    pub ode: VelocityCrossing,
    pub pde: Option<PdeTrend>,
    pub ok: bool,
}

/// Final data of the `Γ = 0` zero-energy orbit at time `t_f`:
/// `z_f = ζ₀^{-1}(t_f)`, `v_f = √F₀(z_f)`.
pub fn escape_launch(p: f64, t_f: f64) -> Result<(f64, f64)> {
    let free = ForceLaw::build(p, 0.0, ForceLawOptions { origin: ZetaOrigin::Asymptotic, ..Default::default() })?;
    let z_f = free.zeta_inverse(t_f)?;
    Ok((z_f, free.classical_velocity(z_f)?))
}

/// Needs `Γ > 2`. The launch is [`escape_launch`] unless the config fixes
/// `z_f` (then `v_f = σ e^{-z_f/2}`). The PDE part decomposes in
/// [`ModulationMode::Full`] so that `z` and `v` both come from the field.
pub fn attraction_demo(cfg: &RunConfig, law: &ForceLaw, with_pde: bool) -> Result<AttractionReport> {
    let params = cfg.params()?;
    if params.gamma <= 2.0 {
        return Err(Error::Regime(format!("attraction demo needs gamma > 2, got {}", params.gamma)));
    }
    if law.gamma != params.gamma || law.p != params.p {
        return Err(Error::Config("force law does not match the run parameters".into()));
    }
    let (z_f, v_f) = match cfg.z_f {
        Some(z) => (z, crate::dynamics::sigma(params.p)? * (-0.5 * z).exp()),
        None => escape_launch(params.p, cfg.t_final)?,
    };
    let ode = velocity_crossing(law, z_f, v_f, cfg.t_final, ODE_HORIZON * cfg.t_final)?;
    let pde = if with_pde {
        let mut run_cfg = cfg.clone();
        run_cfg.mode = ModulationMode::Full;
        run_cfg.z_f = Some(z_f);
        run_cfg.velocity_factor = 1.0;
        let shooter = Shooter::prepare(&run_cfg, law)?;
        let rep = shooter.run_with_velocity(z_f, v_f, None)?;
        Some(PdeTrend::from_rows(rep.rows, rep.failure, rep.mass_drift, rep.energy_drift))
    } else {
        None
    };
    let ok = ode.crossing_s.is_some() && pde.as_ref().is_none_or(|t| t.decreasing && t.sub_two);
    let report = AttractionReport { p: params.p, gamma: params.gamma, ode, pde, ok };
    if let Some(dir) = cfg.out_dir.as_deref() {
        write_rows(&dir.join("ode.csv"), &report.ode.samples)?;
        if let Some(t) = &report.pde {
            write_rows(&dir.join("trajectory.csv"), &t.rows)?;
        }
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strong_delta_reverses_velocity_and_free_control_does_not() {
        let (z_f, v_f) = escape_launch(3.0, 100.0).unwrap();
        assert!((v_f * 100.0 - 1.0).abs() < 0.01, "zero-energy orbit has v s -> 1, got {}", v_f * 100.0);
        let strong = ForceLaw::build(3.0, 3.0, ForceLawOptions::default()).unwrap();
        let c = velocity_crossing(&strong, z_f, v_f, 100.0, 2000.0).unwrap();
        let s_c = c.crossing_s.expect("crossing");
        assert!(s_c < 100.0 && c.elapsed.unwrap() > 0.0);
        let free = ForceLaw::build(3.0, 0.0, ForceLawOptions::default()).unwrap();
        let control = velocity_crossing(&free, z_f, v_f, 100.0, 2000.0).unwrap();
        assert!(control.crossing_s.is_none());
        assert!(control.samples.iter().all(|r| r.v > 0.0));
    }

    #[test]
    fn trend_flags_from_rows() {
        let row = |t: f64, z: f64| TrajectoryRow {
            t,
            s: t,
            lambda: 1.0,
            gamma: 0.0,
            z,
            v: 0.0,
            xi_h1: 0.0,
            z_minus_2logs: z - 2.0 * t.ln(),
            zeta_minus_s: f64::NAN,
        };
        let slow: Vec<_> = (30..=100).map(|t| row(t as f64, 1.5 * (t as f64).ln())).collect();
        let tr = PdeTrend::from_rows(slow, None, 0.0, 0.0);
        assert!(tr.decreasing && tr.sub_two && (tr.log_slope - 1.5).abs() < 1e-12);
        let fast: Vec<_> = (30..=100).map(|t| row(t as f64, 2.5 * (t as f64).ln())).collect();
        let tr = PdeTrend::from_rows(fast, None, 0.0, 0.0);
        assert!(!tr.decreasing && !tr.sub_two);
    }

    #[test]
    fn regime_is_enforced() {
        let cfg = RunConfig::new("attract", 1.0);
        let law = ForceLaw::from_table(3.0, 1.0, ForceLawOptions::default(), vec![8.0, 8.25, 8.5, 8.75], vec![1.0; 4]).unwrap();
        assert!(matches!(attraction_demo(&cfg, &law, false), Err(Error::Regime(_))));
    }
}
