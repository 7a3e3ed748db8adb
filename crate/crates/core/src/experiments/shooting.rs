//! Backward shooting from near-final data and bisection on the final
//! separation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::output::{snapshot_path, write_json, write_rows, write_snapshot};
use crate::dynamics::{integrate_ode, ForceLaw, ZetaOrigin};
use crate::error::{Error, Result};
use crate::evolver::{Evolver, EvolverConfig};
use crate::modulation::{family_member, law_advance, ModulationMode, Modulator};
use crate::numerics::Grid1D;
use crate::profiles::{ModelParams, SolitonState};

/// RK4 step used for the force-law ODE inside the pipelines.
pub const ODE_DT: f64 = 0.05;
/// Bracket width at which the ODE-only bisection stops; below this the
/// RK4 error in `ζ(z(s₀)) - s₀` exceeds its change across the bracket.
pub const ODE_BRACKET: f64 = 1e-8;

/// One decomposition along a backward run; the columns of `trajectory.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub s: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub z: f64,
    pub v: f64,
    pub xi_h1: f64,
    pub z_minus_2logs: f64,
    pub zeta_minus_s: f64,
}

/// Pass/fail summaries computed from trajectory rows alone, so that they can
/// be recomputed from `trajectory.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub window: [f64; 2],
    pub samples: usize,
    pub xi_s_max: f64,
    pub xi_s_median: f64,
    pub xi_bounded: bool,
    /// Least-squares slope of `z` against `log s`.
    pub slope: f64,
    pub slope_ok: bool,
    pub sup_z_minus_2logs: f64,
    /// `max |ζ(z) - s| / (s / √log s)`.
    pub zeta_ratio: f64,
    pub zeta_ok: bool,
    /// `max |v| s` and `max |λ - 1| s`; reported only.
    pub v_s_max: f64,
    pub lambda_s_max: f64,
}

pub const SLOPE_TOL: f64 = 0.3;
pub const XI_MEDIAN_FACTOR: f64 = 10.0;

impl Verdicts {
    /// Rows with `s` in `window`; rows with `ξ = 0` (the final data) are
    /// left out of the `ξ s` statistics.
    pub fn from_rows(rows: &[TrajectoryRow], window: [f64; 2]) -> Result<Self> {
        let inside: Vec<&TrajectoryRow> =
            rows.iter().filter(|r| r.s >= window[0] - 1e-9 && r.s <= window[1] + 1e-9).collect();
        if inside.len() < 3 {
            return Err(Error::Domain(format!("only {} trajectory rows in [{}, {}]", inside.len(), window[0], window[1])));
        }
        let mut xs: Vec<f64> = inside.iter().filter(|r| r.xi_h1 > 0.0).map(|r| r.xi_h1 * r.s).collect();
        xs.sort_by(f64::total_cmp);
        let (xi_s_max, xi_s_median) = if xs.is_empty() {
            (0.0, 0.0)
        } else {
            (xs[xs.len() - 1], xs[xs.len() / 2])
        };
        let n = inside.len() as f64;
        let lx: Vec<f64> = inside.iter().map(|r| r.s.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let mz = inside.iter().map(|r| r.z).sum::<f64>() / n;
        let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
        let sxz: f64 = lx.iter().zip(&inside).map(|(x, r)| (x - mx) * (r.z - mz)).sum();
        let slope = sxz / sxx;
        let fold = |f: &dyn Fn(&TrajectoryRow) -> f64| inside.iter().map(|r| f(r)).fold(0.0f64, f64::max);
        let zeta_ratio = fold(&|r| r.zeta_minus_s.abs() / (r.s / r.s.ln().sqrt()));
        Ok(Self {
            window,
            samples: inside.len(),
            xi_s_max,
            xi_s_median,
            xi_bounded: xi_s_max <= XI_MEDIAN_FACTOR * xi_s_median,
            slope,
            slope_ok: (slope - 2.0).abs() <= SLOPE_TOL,
            sup_z_minus_2logs: fold(&|r| r.z_minus_2logs.abs()),
            zeta_ratio,
            zeta_ok: zeta_ratio.is_finite() && zeta_ratio <= 1.0,
            v_s_max: fold(&|r| r.v.abs() * r.s),
            lambda_s_max: fold(&|r| (r.lambda - 1.0).abs() * r.s),
        })
    }

    pub fn all_ok(&self) -> bool {
        self.xi_bounded && self.slope_ok && self.zeta_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    Ode,
    Pde,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectStep {
    pub z_f: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectReport {
    pub pipeline: Pipeline,
    pub bracket: [f64; 2],
    pub z_f: f64,
    /// `ζ(z(s₀)) - s₀` at the returned `z_f`.
    pub g: f64,
    pub width: f64,
    pub iterations: usize,
    /// `s₀ / √log s₀`.
    pub target: f64,
    pub converged: bool,
    pub history: Vec<BisectStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootingReport {
    pub p: f64,
    pub gamma: f64,
    pub t_final: f64,
    pub s_min: f64,
    pub z_f: f64,
    pub v_f: f64,
    pub mode: ModulationMode,
    pub rows: Vec<TrajectoryRow>,
    /// `ζ^{-1}(t_f)`, the final separation the force law alone would pick.
    pub ode_prediction: Option<f64>,
    pub bisection: Option<BisectReport>,
    /// Why the run stopped early, if it did.
    pub failure: Option<String>,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub boundary_max: f64,
    pub residual_max: f64,
    /// `max |z_PDE(s) - z_ODE(s)| / z_ODE(s)` over the rows, the ODE run from
    /// the same final data.
    pub ode_z_rel_gap: Option<f64>,
    pub verdicts: Option<Verdicts>,
}

/// Everything one backward run needs, prepared once and reused across
/// bisection steps.
#[derive(Debug)]
pub struct Shooter {
    pub cfg: RunConfig,
    pub params: ModelParams,
    pub grid: Grid1D,
    pub law: ForceLaw,
    evolver: Evolver,
    modulator: Modulator,
}

impl Shooter {
    /// `law` is rebased to the asymptotic `ζ` origin. Needs `Γ < 3/2` and
    /// `t_f ∈ [50, 500]`.
    pub fn new(cfg: &RunConfig, law: &ForceLaw) -> Result<Self> {
        if cfg.gamma >= 1.5 {
            return Err(Error::Regime(format!("shooting needs gamma < 3/2, got {}", cfg.gamma)));
        }
        if !(50.0..=500.0).contains(&cfg.t_final) {
            return Err(Error::Config(format!("t_final must lie in [50, 500], got {}", cfg.t_final)));
        }
        Self::prepare(cfg, law)
    }

    /// [`Shooter::new`] without the regime and horizon checks.
    pub(crate) fn prepare(cfg: &RunConfig, law: &ForceLaw) -> Result<Self> {
        cfg.validate()?;
        let params = cfg.params()?;
        if law.gamma != params.gamma || law.p != params.p {
            return Err(Error::Config(format!(
                "force law built for (p, gamma) = ({}, {}), run asks for ({}, {})",
                law.p, law.gamma, params.p, params.gamma
            )));
        }
        let law = law.with_origin(ZetaOrigin::Asymptotic, law.options.z0)?;
        let grid = cfg.grid.build()?;
        let evolver = Evolver::new(grid, EvolverConfig::new(params, -cfg.dt)?.check_every(500))?;
        let modulator = Modulator::new(params)?;
        Ok(Self { cfg: cfg.clone(), params, grid, law, evolver, modulator })
    }

    /// `v_f = factor · √F(z_f)`.
    pub fn final_velocity(&self, z_f: f64) -> Result<f64> {
        Ok(self.cfg.velocity_factor * self.law.classical_velocity(z_f)?)
    }

    pub fn ode_prediction(&self) -> Result<f64> {
        self.law.zeta_inverse(self.cfg.t_final)
    }

    fn target(&self, s: f64) -> f64 {
        s / s.ln().sqrt()
    }

    /// `ζ(z(s₀)) - s₀` along the force-law ODE from `(t_f, z_f, v_f)`.
    pub fn g_ode(&self, z_f: f64) -> Result<(f64, f64)> {
        let v_f = self.final_velocity(z_f)?;
        let tr = integrate_ode(&self.law, z_f, v_f, (self.cfg.t_final, self.cfg.s_min), ODE_DT)?;
        let s = *tr.s.last().expect("non-empty");
        let z = *tr.z.last().expect("non-empty");
        Ok((self.law.zeta(z)? - s, s))
    }

    fn row(&self, t: f64, s: f64, state: &SolitonState, xi_h1: f64) -> TrajectoryRow {
        TrajectoryRow {
            t,
            s,
            lambda: state.lambda,
            gamma: state.gamma_phase,
            z: state.z,
            v: state.v,
            xi_h1,
            z_minus_2logs: state.z - 2.0 * s.ln(),
            zeta_minus_s: self.law.zeta(state.z).map_or(f64::NAN, |zeta| zeta - s),
        }
    }

    /// Backward PDE run from the family member at `(1, 0, z_f, v_f)`,
    /// decomposing every `cadence` time units.
    pub fn run(&self, z_f: f64, out: Option<&Path>) -> Result<ShootingReport> {
        self.run_with_velocity(z_f, self.final_velocity(z_f)?, out)
    }

    /// [`Shooter::run`] with an explicit final velocity.
    pub fn run_with_velocity(&self, z_f: f64, v_f: f64, out: Option<&Path>) -> Result<ShootingReport> {
        let cfg = &self.cfg;
        let p = self.params.p;
        let mut state = SolitonState::new(1.0, 0.0, z_f, v_f)?;
        let mut u = family_member(&self.grid, &state, p);
        let mut t = cfg.t_final;
        let mut s = cfg.t_final;
        let mut rows = vec![self.row(t, s, &state, 0.0)];
        let mut report = ShootingReport {
            p,
            gamma: self.params.gamma,
            t_final: cfg.t_final,
            s_min: cfg.s_min,
            z_f,
            v_f,
            mode: cfg.mode,
            rows: Vec::new(),
            ode_prediction: self.ode_prediction().ok(),
            bisection: None,
            failure: None,
            mass_drift: 0.0,
            energy_drift: 0.0,
            boundary_max: 0.0,
            residual_max: 0.0,
            ode_z_rel_gap: None,
            verdicts: None,
        };
        let intervals = ((cfg.t_final - cfg.s_min) / cfg.cadence).round() as usize;
        let mut reference: Option<(f64, f64)> = None;
        if let Some(dir) = out {
            if cfg.dump_every > 0 {
                write_snapshot(&snapshot_path(dir, 0), &u)?;
            }
        }
        for k in 1..=intervals {
            let t_next = cfg.t_final - k as f64 * cfg.cadence;
            let chunk = self.evolver.evolve(&u, t, t_next)?;
            let first = chunk.log[0];
            let (m0, e0) = *reference.get_or_insert((first.mass, first.energy));
            for rec in &chunk.log {
                report.mass_drift = report.mass_drift.max((rec.mass - m0).abs() / m0);
                report.energy_drift = report.energy_drift.max((rec.energy - e0).abs() / e0.abs());
            }
            report.boundary_max = report.boundary_max.max(chunk.boundary_max);
            if let Some(time) = chunk.blowup {
                report.failure = Some(Error::Blowup { time }.to_string());
                break;
            }
            u = chunk.u;
            let ds_guess = -cfg.cadence / (state.lambda * state.lambda);
            let mut guess = state;
            guess.gamma_phase -= cfg.cadence / (state.lambda * state.lambda);
            let law_v = match law_advance(&self.law, state.z, state.v, ds_guess, cfg.dt) {
                Ok((z, v)) => {
                    guess.z = z;
                    guess.v = v;
                    Some(v)
                }
                Err(_) => None,
            };
            if cfg.mode == ModulationMode::ThreePlusLaw && law_v.is_none() {
                report.failure = Some(format!("force law left its table at z = {:.4}", state.z));
                break;
            }
            let result = match self.modulator.decompose(&u, &guess, cfg.mode) {
                Ok(r) => r,
                Err(e) => {
                    report.failure = Some(format!("t = {t_next}: {e}"));
                    break;
                }
            };
            let lam_old = state.lambda;
            state = result.state;
            s -= 0.5 * cfg.cadence * (1.0 / (lam_old * lam_old) + 1.0 / (state.lambda * state.lambda));
            t = t_next;
            let active = match cfg.mode {
                ModulationMode::Full => 4,
                ModulationMode::ThreePlusLaw => 3,
            };
            let res = result.residuals[..active].iter().fold(0.0f64, |a, b| a.max(b.abs()));
            report.residual_max = report.residual_max.max(res);
            rows.push(self.row(t, s, &state, result.xi_h1));
            if let Some(dir) = out {
                if cfg.dump_every > 0 && k % cfg.dump_every == 0 {
                    write_snapshot(&snapshot_path(dir, k), &u)?;
                }
            }
        }
        report.verdicts = Verdicts::from_rows(&rows, [cfg.s_min, cfg.t_final]).ok();
        report.ode_z_rel_gap = self.ode_gap(z_f, v_f, &rows).ok();
        report.rows = rows;
        if let Some(dir) = out {
            write_rows(&dir.join("trajectory.csv"), &report.rows)?;
            write_json(&dir.join("report.json"), &report)?;
        }
        Ok(report)
    }

    fn ode_gap(&self, z_f: f64, v_f: f64, rows: &[TrajectoryRow]) -> Result<f64> {
        let s_end = rows.last().map_or(self.cfg.t_final, |r| r.s);
        let tr = integrate_ode(&self.law, z_f, v_f, (self.cfg.t_final, s_end), ODE_DT)?;
        let mut gap = 0.0f64;
        for r in rows {
            // s decreases along the ODE samples.
            let k = tr.s.partition_point(|&s| s > r.s);
            let z = if k == 0 {
                tr.z[0]
            } else if k >= tr.len() {
                tr.z[tr.len() - 1]
            } else {
                let w = (tr.s[k - 1] - r.s) / (tr.s[k - 1] - tr.s[k]);
                tr.z[k - 1] + w * (tr.z[k] - tr.z[k - 1])
            };
            gap = gap.max((r.z - z).abs() / z);
        }
        Ok(gap)
    }

    /// `ζ(z(s)) - s` at the last row of a PDE run. A run that stops early
    /// (the separation collapsing out of the force-law table, say) is read at
    /// its last reliable row; it still carries its `failure`.
    pub fn g_pde(&self, z_f: f64) -> Result<(f64, f64, ShootingReport)> {
        let report = self.run(z_f, None)?;
        let last = *report.rows.last().expect("non-empty");
        if report.rows.len() < 2 || !last.zeta_minus_s.is_finite() {
            let reason = report.failure.as_deref().unwrap_or("no usable rows");
            return Err(Error::Domain(format!("backward run from z_f = {z_f} stopped early: {reason}")));
        }
        Ok((last.zeta_minus_s, last.s, report))
    }

    /// Bisection on `z_f` for `ζ(z(s₀)) = s₀`.
    ///
    /// The ODE pipeline runs until the bracket is [`ODE_BRACKET`] wide; the PDE
    /// pipeline stops once `|ζ(z(s₀)) - s₀| <= s₀ / √log s₀`. In PDE mode the
    /// run at the returned `z_f` is handed back as well.
    pub fn bisect(&self, bracket: [f64; 2], pipeline: Pipeline) -> Result<(BisectReport, Option<ShootingReport>)> {
        let [mut lo, mut hi] = bracket;
        if !(lo < hi) {
            return Err(Error::Bracket(format!("empty bracket [{lo}, {hi}]")));
        }
        let mut history = Vec::new();
        let mut eval = |z: f64| -> Result<(f64, f64, Option<ShootingReport>)> {
            let (g, s, rep) = match pipeline {
                Pipeline::Ode => {
                    let (g, s) = self.g_ode(z)?;
                    (g, s, None)
                }
                Pipeline::Pde => {
                    let (g, s, r) = self.g_pde(z)?;
                    (g, s, Some(r))
                }
            };
            history.push(BisectStep { z_f: z, g });
            Ok((g, s, rep))
        };
        let (mut g_lo, s_lo, mut r_lo) = eval(lo)?;
        let (g_hi, s_hi, mut r_hi) = eval(hi)?;
        if !(g_lo.is_finite() && g_hi.is_finite()) || g_lo.signum() == g_hi.signum() {
            return Err(Error::Bracket(format!(
                "no sign change of zeta(z(s0)) - s0 on [{lo}, {hi}]: {g_lo:.4e}, {g_hi:.4e}"
            )));
        }
        let tol = |s: f64| match pipeline {
            Pipeline::Ode => 0.0,
            Pipeline::Pde => self.target(s),
        };
        // Truncated PDE runs only supply a sign; they never become the answer.
        let complete = |r: &Option<ShootingReport>| r.as_ref().is_none_or(|r| r.failure.is_none());
        let rank = |g: f64, r: &Option<ShootingReport>| if complete(r) { g.abs() } else { f64::INFINITY };
        let mut best = if rank(g_lo, &r_lo) <= rank(g_hi, &r_hi) {
            (lo, g_lo, s_lo, r_lo.take())
        } else {
            (hi, g_hi, s_hi, r_hi.take())
        };
        let mut iterations = 0;
        let mut converged = pipeline == Pipeline::Pde && complete(&best.3) && best.1.abs() <= tol(best.2);
        while !converged && iterations < self.cfg.max_bisections {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            iterations += 1;
            let (g, s, rep) = eval(mid)?;
            if rank(g, &rep) <= rank(best.1, &best.3) {
                best = (mid, g, s, rep);
            }
            if g == 0.0 {
                lo = mid;
                hi = mid;
            } else if g.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g;
            } else {
                hi = mid;
            }
            converged = match pipeline {
                Pipeline::Ode => hi - lo <= ODE_BRACKET,
                Pipeline::Pde => complete(&best.3) && best.1.abs() <= tol(best.2),
            };
        }
        let report = BisectReport {
            pipeline,
            bracket,
            z_f: best.0,
            g: best.1,
            width: hi - lo,
            iterations,
            target: self.target(best.2),
            converged,
            history,
        };
        Ok((report, best.3))
    }
}

/// The full shooting experiment: a fixed `z_f` from the config, or a PDE
/// bisection over `z_f_bracket` (default: the force-law prediction ± 1).
pub fn shoot_backward(cfg: &RunConfig, law: &ForceLaw) -> Result<ShootingReport> {
    let shooter = Shooter::new(cfg, law)?;
    let out = cfg.out_dir.as_deref();
    if let Some(z_f) = cfg.z_f {
        return shooter.run(z_f, out);
    }
    let bracket = match cfg.z_f_bracket {
        Some(b) => b,
        None => {
            let z = shooter.ode_prediction()?;
            [z - 1.0, z + 1.0]
        }
    };
    let (bisection, run) = shooter.bisect(bracket, Pipeline::Pde)?;
    let mut report = match (run, out) {
        (Some(r), None) => r,
        _ => shooter.run(bisection.z_f, out)?,
    };
    report.bisection = Some(bisection);
    if let Some(dir) = out {
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ForceLawOptions;
    use std::sync::OnceLock;

    fn law0() -> &'static ForceLaw {
        static L: OnceLock<ForceLaw> = OnceLock::new();
        L.get_or_init(|| ForceLaw::build(3.0, 0.0, ForceLawOptions::default()).unwrap())
    }

    fn row(s: f64, z: f64, xi: f64) -> TrajectoryRow {
        TrajectoryRow {
            t: s,
            s,
            lambda: 1.0,
            gamma: 0.0,
            z,
            v: 1.0 / s,
            xi_h1: xi,
            z_minus_2logs: z - 2.0 * s.ln(),
            zeta_minus_s: 0.0,
        }
    }

    #[test]
    fn verdicts_from_rows() {
        let rows: Vec<_> = (0..=70).map(|k| row(30.0 + k as f64, 2.0 * (30.0 + k as f64).ln() + 2.0, 1.0 / (30.0 + k as f64))).collect();
        let v = Verdicts::from_rows(&rows, [30.0, 100.0]).unwrap();
        assert!((v.slope - 2.0).abs() < 1e-12);
        assert!((v.sup_z_minus_2logs - 2.0).abs() < 1e-12);
        assert!((v.xi_s_max - 1.0).abs() < 1e-12 && v.xi_bounded && v.all_ok());
        assert!((v.v_s_max - 1.0).abs() < 1e-12);
        let mut spiky = rows.clone();
        spiky[10].xi_h1 = 20.0 / spiky[10].s;
        assert!(!Verdicts::from_rows(&spiky, [30.0, 100.0]).unwrap().xi_bounded);
        assert!(Verdicts::from_rows(&rows[..2], [30.0, 100.0]).is_err());
    }

    #[test]
    fn ode_bisection_recovers_force_law_prediction() {
        let cfg = RunConfig::new("shoot", 0.0);
        let shooter = Shooter::new(&cfg, law0()).unwrap();
        let pred = shooter.ode_prediction().unwrap();
        let (rep, run) = shooter.bisect([pred - 1.0, pred + 1.0], Pipeline::Ode).unwrap();
        assert!(run.is_none() && rep.converged && rep.width <= ODE_BRACKET && rep.iterations <= 30);
        // On the zero-energy orbit ζ(z(s)) - s is conserved, so the root sits
        // at ζ(z_f) = t_f.
        assert!((rep.z_f - pred).abs() < 1e-6, "{} vs {pred}", rep.z_f);
        assert!(shooter.bisect([pred + 0.5, pred + 1.0], Pipeline::Ode).is_err());
    }

    #[test]
    fn preconditions() {
        let cfg = RunConfig::new("shoot", 1.0);
        assert!(matches!(Shooter::new(&cfg, law0()), Err(Error::Config(_))));
        let cfg = RunConfig::new("shoot", 2.0);
        assert!(matches!(Shooter::new(&cfg, law0()), Err(Error::Regime(_))));
        let mut cfg = RunConfig::new("shoot", 0.0);
        cfg.t_final = 1000.0;
        assert!(matches!(Shooter::new(&cfg, law0()), Err(Error::Config(_))));
    }

    #[test]
    fn wrong_final_velocity_drifts_off_the_time_map() {
        let mut cfg = RunConfig::new("shoot", 0.0);
        let shooter = Shooter::new(&cfg, law0()).unwrap();
        let z_f = shooter.ode_prediction().unwrap();
        let (g, s) = shooter.g_ode(z_f).unwrap();
        assert!(g.abs() < 1e-6);
        cfg.velocity_factor = 2.0;
        let wrong = Shooter::new(&cfg, law0()).unwrap();
        let (g, s2) = wrong.g_ode(z_f).unwrap();
        // The faster orbit may leave the table before s_min.
        assert!(s2 >= s);
        assert!(g.abs() > s2 / s2.ln().sqrt(), "g = {g} at s = {s2}");
    }

    #[test]
    fn short_backward_run_tracks_the_orbit() {
        let mut cfg = RunConfig::new("shoot", 0.0);
        cfg.grid = super::super::config::GridSpec { xmin: -40.0, xmax: 40.0, n: 2001 };
        cfg.dt = 2e-3;
        cfg.t_final = 50.0;
        cfg.s_min = 46.0;
        cfg.cadence = 1.0;
        cfg.dump_every = 2;
        let dir = tempfile::tempdir().unwrap();
        cfg.out_dir = Some(dir.path().to_path_buf());
        let shooter = Shooter::new(&cfg, law0()).unwrap();
        let z_f = shooter.ode_prediction().unwrap();
        let rep = shooter.run(z_f, Some(dir.path())).unwrap();
        assert!(rep.failure.is_none(), "{:?}", rep.failure);
        assert_eq!(rep.rows.len(), 5);
        assert!(rep.residual_max <= crate::modulation::RESIDUAL_TOL);
        assert!(rep.mass_drift < 1e-8);
        assert!(rep.ode_z_rel_gap.unwrap() < 0.05);
        let last = rep.rows.last().unwrap();
        assert!(last.zeta_minus_s.abs() < last.s / last.s.ln().sqrt());
        let back: Vec<TrajectoryRow> = super::super::output::read_rows(&dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(back, rep.rows);
        assert!(snapshot_path(dir.path(), 4).exists());
    }
}
