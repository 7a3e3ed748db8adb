//! Effective force law `H̃(z)`, its potential `F`, the time map `ζ`, and the
//! planar Newton dynamics `ż = 2v`, `v̇ = -H̃(z)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{EigenSettings, SpectralSolver};
use crate::error::{Error, Result};
use crate::interaction::h_interaction;
use crate::numerics::{gauss_legendre, TridiagonalLu};
use crate::profiles::{cp_constant, soliton_mass, ModelParams};

/// `σ = 2 c_p / √M(Q)`.
pub fn sigma(p: f64) -> Result<f64> {
    Ok(2.0 * cp_constant(p)? / soliton_mass(p).sqrt())
}

/// `H̃(z) = (2/M(Q)) (H(z) - 2Γ c_p e^{-z/2} T_z(-z/2))`.
pub fn htilde(z: f64, p: f64, gamma: f64) -> Result<f64> {
    let solver = if gamma == 0.0 { None } else { Some(SpectralSolver::new(p, EigenSettings::default())?) };
    htilde_with(solver.as_ref(), z, p, gamma)
}

/// As [`htilde`], reusing a spectral solver (required when `gamma != 0`).
pub fn htilde_with(solver: Option<&SpectralSolver>, z: f64, p: f64, gamma: f64) -> Result<f64> {
    ModelParams::new(p, gamma)?;
    if z < 8.0 {
        return Err(Error::Domain(format!("force law needs z >= 8, got {z}")));
    }
    let mass = soliton_mass(p);
    let h = h_interaction(z, p)?;
    let delta = if gamma == 0.0 {
        0.0
    } else {
        let solver = solver.ok_or_else(|| Error::InvalidParameter("spectral solver required for gamma != 0".into()))?;
        let t = solver.quantities(gamma, z)?.t_at_delta;
        2.0 * gamma * cp_constant(p)? * (-0.5 * z).exp() * t
    };
    Ok(2.0 / mass * (h - delta))
}

/// `H̃(z) e^z`, the computable surrogate for `f(z)`.
pub fn f_effective(z: f64, p: f64, gamma: f64) -> Result<f64> {
    Ok(htilde(z, p, gamma)? * z.exp())
}

/// Decay rate of the error in identifying `H̃ e^z` with `f`:
/// `min(3/2, 2(p+1)/(p+3)) - 1`.
pub fn identification_rate(p: f64) -> f64 {
    1.5f64.min(2.0 * (p + 1.0) / (p + 3.0)) - 1.0
}

/// The bracket for `f/σ²` (and for `F e^z/σ²`).
pub fn f_bracket(gamma: f64) -> (f64, f64) {
    (2.0 - (1.0 + 2.0 * gamma).sqrt(), (2.0 - gamma) / (2.0 + gamma))
}

/// The bracket for `σ ζ(z) e^{-z/2}`; requires `gamma < 3/2`.
pub fn zeta_bracket(gamma: f64) -> (f64, f64) {
    (((2.0 + gamma) / (2.0 - gamma)).sqrt(), 1.0 / (2.0 - (1.0 + 2.0 * gamma).sqrt()).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `Γ < 3/2`: the force stays repulsive, `f ≥ f* > 0`.
    Escape,
    /// `Γ > 2`: net attraction, `f ≤ -f* < 0`.
    Attraction,
    /// `3/2 ≤ Γ ≤ 2`: not settled; the conjectured threshold is `Γ = 2`.
    Unresolved,
}

pub fn regime(gamma: f64) -> Regime {
    if gamma < 1.5 {
        Regime::Escape
    } else if gamma > 2.0 {
        Regime::Attraction
    } else {
        Regime::Unresolved
    }
}

/// Where `ζ` is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ZetaOrigin {
    /// `ζ(z0) = 0`.
    #[default]
    Anchored,
    /// `ζ(z0) = 1/√F(z0)`, the value obtained by continuing `F ∝ e^{-z}`
    /// below `z0`; then `ζ(z) ≈ 1/√F(z)` with no additive offset. Defined
    /// below `z0` as well (through the table continuation below `z_min`).
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForceLawOptions {
    pub z_min: f64,
    pub z_max: f64,
    pub step: f64,
    pub z0: f64,
    pub origin: ZetaOrigin,
    pub eigen: EigenSettings,
}

impl Default for ForceLawOptions {
    fn default() -> Self {
        Self { z_min: 8.0, z_max: 40.0, step: 0.25, z0: 8.0, origin: ZetaOrigin::Anchored, eigen: EigenSettings::default() }
    }
}

/// Tabulated force law with a cubic spline for `g = H̃ e^z` and exact
/// piecewise integration for `F`, so that `F' = -H̃` holds to round-off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForceLaw {
    pub p: f64,
    pub gamma: f64,
    pub options: ForceLawOptions,
    pub mass: f64,
    pub sigma: f64,
    /// Table nodes.
    pub zs: Vec<f64>,
    /// `g(z_i) = H̃(z_i) e^{z_i}`.
    pub g: Vec<f64>,
    /// Spline second derivatives of `g`.
    m: Vec<f64>,
    /// `F(z_i)`.
    big_f_nodes: Vec<f64>,
    zeta_offset: f64,
}

impl ForceLaw {
    pub fn build(p: f64, gamma: f64, options: ForceLawOptions) -> Result<Self> {
        ModelParams::new(p, gamma)?;
        if !(options.z_min >= 8.0 && options.z_max > options.z_min + 3.0 * options.step && options.step > 0.0) {
            return Err(Error::InvalidParameter("force-law table needs z_min >= 8 and at least 4 nodes".into()));
        }
        let count = ((options.z_max - options.z_min) / options.step).round() as usize + 1;
        let zs: Vec<f64> = (0..count).map(|k| options.z_min + k as f64 * options.step).collect();
        let solver = if gamma == 0.0 { None } else { Some(SpectralSolver::new(p, options.eigen)?) };
        let g = zs
            .par_iter()
            .map(|&z| Ok(htilde_with(solver.as_ref(), z, p, gamma)? * z.exp()))
            .collect::<Result<Vec<f64>>>()?;
        Self::from_table(p, gamma, options, zs, g)
    }

    /// Build from precomputed samples of `g = H̃ e^z` on uniform nodes.
    pub fn from_table(p: f64, gamma: f64, options: ForceLawOptions, zs: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if zs.len() != g.len() || zs.len() < 4 {
            return Err(Error::InvalidParameter("force-law table needs >= 4 matching samples".into()));
        }
        let m = natural_spline(&zs, &g)?;
        let mut law = Self {
            p,
            gamma,
            options,
            mass: soliton_mass(p),
            sigma: sigma(p)?,
            zs,
            g,
            m,
            big_f_nodes: Vec::new(),
            zeta_offset: 0.0,
        };
        let n = law.zs.len();
        let mut big_f = vec![0.0; n];
        big_f[n - 1] = law.g[n - 1] * (-law.zs[n - 1]).exp();
        for i in (0..n - 1).rev() {
            big_f[i] = big_f[i + 1] + gauss_legendre(|t| law.spline(i, t) * (-t).exp(), law.zs[i], law.zs[i + 1]);
        }
        law.big_f_nodes = big_f;
        law.zeta_offset = match options.origin {
            ZetaOrigin::Anchored => 0.0,
            ZetaOrigin::Asymptotic => {
                let f0 = law.big_f(options.z0);
                if f0 <= 0.0 {
                    0.0
                } else {
                    1.0 / f0.sqrt()
                }
            }
        };
        Ok(law)
    }

    /// The same table with a different `ζ` origin.
    pub fn with_origin(&self, origin: ZetaOrigin, z0: f64) -> Result<Self> {
        let options = ForceLawOptions { origin, z0, ..self.options };
        Self::from_table(self.p, self.gamma, options, self.zs.clone(), self.g.clone())
    }

    pub fn z_min(&self) -> f64 {
        self.zs[0]
    }

    pub fn z_max(&self) -> f64 {
        *self.zs.last().expect("non-empty table")
    }

    fn interval(&self, z: f64) -> usize {
        let k = ((z - self.zs[0]) / self.options.step).floor();
        (k.max(0.0) as usize).min(self.zs.len() - 2)
    }

    fn spline(&self, i: usize, t: f64) -> f64 {
        let h = self.zs[i + 1] - self.zs[i];
        let a = (self.zs[i + 1] - t) / h;
        let b = (t - self.zs[i]) / h;
        a * self.g[i] + b * self.g[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    /// `g(z) = H̃(z) e^z`; constant continuation outside the table.
    pub fn f_surrogate(&self, z: f64) -> f64 {
        if z >= self.z_max() {
            *self.g.last().expect("non-empty table")
        } else if z <= self.z_min() {
            self.g[0]
        } else {
            self.spline(self.interval(z), z)
        }
    }

    pub fn htilde(&self, z: f64) -> f64 {
        self.f_surrogate(z) * (-z).exp()
    }

    /// `F(z) = ∫_z^∞ H̃`.
    pub fn big_f(&self, z: f64) -> f64 {
        if z >= self.z_max() {
            return self.f_surrogate(z) * (-z).exp();
        }
        if z <= self.z_min() {
            return self.big_f_nodes[0] + self.g[0] * ((-z).exp() - (-self.z_min()).exp());
        }
        let i = self.interval(z);
        self.big_f_nodes[i + 1] + gauss_legendre(|t| self.spline(i, t) * (-t).exp(), z, self.zs[i + 1])
    }

    pub fn energy(&self, z: f64, v: f64) -> f64 {
        v * v - self.big_f(z)
    }

    fn require_positive_f(&self, z: f64) -> Result<f64> {
        let f = self.big_f(z);
        if f > 0.0 {
            Ok(f)
        } else {
            Err(Error::Regime(format!("F({z}) = {f:.3e} <= 0: no classical zero-energy trajectory (gamma = {})", self.gamma)))
        }
    }

    /// `v = √F(z)` on the zero-energy orbit.
    pub fn classical_velocity(&self, z: f64) -> Result<f64> {
        Ok(self.require_positive_f(z)?.sqrt())
    }

    /// `ζ(z) = offset + ∫_{z0}^z dz' / (2√F(z'))`.
    pub fn zeta(&self, z: f64) -> Result<f64> {
        if self.gamma >= 1.5 {
            return Err(Error::Regime(format!("time map needs gamma < 3/2, got {}", self.gamma)));
        }
        let z0 = self.options.z0;
        if z < z0 && self.options.origin == ZetaOrigin::Anchored {
            return Err(Error::Domain(format!("zeta needs z >= z0 = {z0}, got {z}")));
        }
        let (lo, hi, sign) = if z >= z0 { (z0, z, 1.0) } else { (z, z0, -1.0) };
        let mut total = 0.0;
        let mut a = lo;
        while a < hi {
            let b = (a + 0.5).min(hi);
            self.require_positive_f(a)?;
            self.require_positive_f(b)?;
            total += gauss_legendre(|t| 0.5 / self.big_f(t).max(f64::MIN_POSITIVE).sqrt(), a, b);
            a = b;
        }
        Ok(self.zeta_offset + sign * total)
    }

    /// Inverse of [`ForceLaw::zeta`] by bisection.
    pub fn zeta_inverse(&self, s: f64) -> Result<f64> {
        let mut lo = self.options.z0;
        if self.zeta(lo)? > s {
            return Err(Error::Domain(format!("time {s} precedes zeta(z0)")));
        }
        let mut hi = lo + 1.0;
        while self.zeta(hi)? < s {
            hi += 2.0 * (hi - lo);
            if hi > 400.0 {
                return Err(Error::Domain(format!("time {s} beyond the force-law range")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.zeta(mid)? < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-13 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

fn natural_spline(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return Ok(m);
    }
    let inner = n - 2;
    let mut diag = Vec::with_capacity(inner);
    let mut off = Vec::with_capacity(inner.saturating_sub(1));
    let mut rhs = Vec::with_capacity(inner);
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        diag.push((h0 + h1) / 3.0);
        if i < n - 2 {
            off.push(h1 / 6.0);
        }
        rhs.push((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    let sol = TridiagonalLu::factor(&diag, &off)?.solve(&rhs);
    m[1..n - 1].copy_from_slice(&sol);
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// Left the tabulated range `z ≥ z_min`.
    ExitedRange,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    /// `max |E(s) - E(s_0)|`.
    pub energy_drift: f64,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Classical RK4 for `ż = 2v`, `v̇ = -H̃(z)` from `s_span.0` to `s_span.1`.
///
/// `dt` is a magnitude; the direction follows the span. Every step is
/// recorded.
pub fn integrate_ode(law: &ForceLaw, z_init: f64, v_init: f64, s_span: (f64, f64), dt: f64) -> Result<Trajectory> {
    integrate_ode_sampled(law, z_init, v_init, s_span, dt, 1)
}

/// As [`integrate_ode`], recording every `every`-th step (and the last).
pub fn integrate_ode_sampled(
    law: &ForceLaw,
    z_init: f64,
    v_init: f64,
    s_span: (f64, f64),
    dt: f64,
    every: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0) || !z_init.is_finite() || !v_init.is_finite() || every == 0 {
        return Err(Error::InvalidParameter("integrate_ode needs dt > 0 and finite data".into()));
    }
    if z_init < law.z_min() {
        return Err(Error::Domain(format!("initial separation {z_init} below table start {}", law.z_min())));
    }
    let (s0, s1) = s_span;
    let steps = ((s1 - s0).abs() / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { (s1 - s0) / steps as f64 };
    let rhs = |z: f64, v: f64| (2.0 * v, -law.htilde(z));
    let e0 = law.energy(z_init, v_init);
    let (mut z, mut v) = (z_init, v_init);
    let mut out = Trajectory { s: vec![s0], z: vec![z], v: vec![v], energy_drift: 0.0, status: TrajectoryStatus::Completed };
    for k in 1..=steps {
        let (k1z, k1v) = rhs(z, v);
        let (k2z, k2v) = rhs(z + 0.5 * h * k1z, v + 0.5 * h * k1v);
        let (k3z, k3v) = rhs(z + 0.5 * h * k2z, v + 0.5 * h * k2v);
        let (k4z, k4v) = rhs(z + h * k3z, v + h * k3v);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        let s = s0 + k as f64 * h;
        out.energy_drift = out.energy_drift.max((law.energy(z, v) - e0).abs());
        let exited = z < law.z_min() || !z.is_finite();
        if k % every == 0 || k == steps || exited {
            out.s.push(s);
            out.z.push(z);
            out.v.push(v);
        }
        if exited {
            out.status = TrajectoryStatus::ExitedRange;
            break;
        }
    }
    Ok(out)
}

/// Maps the `ω`-rescaled eigenproblem onto the unit one: for the operator
/// linearized at `Q_ω` with strength `Γ` and separation `z`, returns
/// `(ν_ω, ω ν(Γ/√ω, √ω z))` and the analogous pair for `T(-z/2)` scaled by
/// `ω^{1/(p-1) + 1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingCheck {
    pub nu_scaled: f64,
    pub nu_mapped: f64,
    pub t_scaled: f64,
    pub t_mapped: f64,
}

pub fn scaling_check(p: f64, gamma: f64, z: f64, omega: f64, settings: &EigenSettings) -> Result<ScalingCheck> {
    use crate::eigen::{lowest_two, PointOperator};
    let root = omega.sqrt();
    let unit_grid = settings.grid()?;
    let scaled_grid = crate::numerics::Grid1D::symmetric(settings.half_width / root, settings.h / root)?;
    let z = settings.snap(z * root) / root;
    let scaled = PointOperator::assemble_scaled(&scaled_grid, p, gamma, z, omega)?;
    let unit = PointOperator::assemble(&unit_grid, p, gamma / root, z * root)?;
    let (_, ts) = lowest_two(&scaled)?;
    let (_, tu) = lowest_two(&unit)?;
    Ok(ScalingCheck {
        nu_scaled: ts.value,
        nu_mapped: omega * tu.value,
        t_scaled: ts.vector.values[scaled.delta_index],
        t_mapped: omega.powf(1.0 / (p - 1.0) + 0.5) * tu.vector.values[unit.delta_index],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn law(gamma: f64) -> &'static ForceLaw {
        static L0: OnceLock<ForceLaw> = OnceLock::new();
        static L1: OnceLock<ForceLaw> = OnceLock::new();
        let cell = if gamma == 0.0 { &L0 } else { &L1 };
        cell.get_or_init(|| ForceLaw::build(3.0, gamma, ForceLawOptions::default()).unwrap())
    }

    #[test]
    fn constants() {
        assert!((sigma(3.0).unwrap() - 4.0).abs() < 1e-9);
        let (lo, hi) = f_bracket(1.0);
        assert!((16.0 * lo - 4.287).abs() < 1e-3 && (16.0 * hi - 5.333).abs() < 1e-3);
        let (a, b) = zeta_bracket(1.0);
        assert!((a - 3f64.sqrt()).abs() < 1e-12 && (b - 1.932).abs() < 1e-3);
        assert_eq!(regime(1.0), Regime::Escape);
        assert_eq!(regime(2.5), Regime::Attraction);
        assert_eq!(regime(1.75), Regime::Unresolved);
    }

    #[test]
    fn force_signs() {
        let h0 = htilde(14.0, 3.0, 0.0).unwrap();
        let h = h_interaction(14.0, 3.0).unwrap();
        assert!((h0 - 2.0 * h / 2.0).abs() < 1e-15 && h0 > 0.0);
        let f = f_effective(14.0, 3.0, 1.0).unwrap() / 16.0;
        let (lo, hi) = f_bracket(1.0);
        assert!(f >= lo && f <= hi + 1e-3, "{f}");
        assert!(htilde(14.0, 3.0, 3.0).unwrap() < 0.0);
        for z in [12.0, 16.0, 20.0] {
            assert!(f_effective(z, 3.0, 2.5).unwrap() < 0.0);
        }
        assert!(htilde(6.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn potential_and_time_map() {
        let l = law(1.0);
        // F' = -H̃.
        for z in [9.1, 13.37, 25.0] {
            let d = (l.big_f(z + 1e-4) - l.big_f(z - 1e-4)) / 2e-4;
            assert!((d + l.htilde(z)).abs() < 1e-7 * l.htilde(z));
        }
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let f = l.big_f(8.0 + 0.5 * k as f64);
            assert!(f < prev);
            prev = f;
        }
        assert_eq!(l.zeta(8.0).unwrap(), 0.0);
        let z = 18.0;
        let r = l.sigma * l.zeta(z).unwrap() * (-0.5 * z).exp();
        let (a, b) = zeta_bracket(1.0);
        assert!(r > a - 0.05 && r < b + 0.05, "{r}");
        let g = l.big_f(18.0) * 18f64.exp() / 16.0;
        let (lo, hi) = f_bracket(1.0);
        assert!(g > lo && g < hi + 1e-3);
        // ζ' = 1/(2√F).
        let d = (l.zeta(15.0 + 1e-4).unwrap() - l.zeta(15.0 - 1e-4).unwrap()) / 2e-4;
        assert!((2.0 * l.big_f(15.0).sqrt() * d - 1.0).abs() < 1e-6);
        let s = l.zeta(17.3).unwrap();
        assert!((l.zeta_inverse(s).unwrap() - 17.3).abs() < 1e-9);
        for z in [12.0, 16.0, 20.0, 24.0] {
            assert!((z - 2.0 * l.zeta(z).unwrap().ln()).abs() < 3.0);
        }
    }

    #[test]
    fn unperturbed_potential_matches_sigma() {
        let l = law(0.0);
        let r = l.big_f(30.0) * 30f64.exp() / (l.sigma * l.sigma);
        assert!((r - 1.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn rk4_conserves_energy() {
        let l = law(1.0);
        let v0 = l.classical_velocity(8.0).unwrap();
        let tr = integrate_ode_sampled(l, 8.0, v0, (0.0, 1.0e4), 0.05, 1000).unwrap();
        assert_eq!(tr.status, TrajectoryStatus::Completed);
        assert!(tr.energy_drift <= 1e-8, "{}", tr.energy_drift);
        let coarse = integrate_ode_sampled(l, 8.0, v0, (0.0, 1.0e3), 0.4, 1000).unwrap().energy_drift;
        let fine = integrate_ode_sampled(l, 8.0, v0, (0.0, 1.0e3), 0.2, 1000).unwrap().energy_drift;
        assert!(coarse / fine > 10.0, "{coarse} {fine}");
    }

    #[test]
    fn strong_delta_reverses_velocity_backward() {
        let strong = ForceLaw::build(3.0, 3.0, ForceLawOptions { z_max: 24.0, ..Default::default() }).unwrap();
        assert!(strong.big_f(12.0) < 0.0);
        // Backward in s from slightly outward final data: v turns negative.
        let tr = integrate_ode(&strong, 10.0, 0.01, (100.0, 0.0), 0.05).unwrap();
        assert!(tr.v.iter().any(|&v| v < 0.0));
        let tr = integrate_ode(law(0.0), 10.0, 0.01, (100.0, 0.0), 0.05).unwrap();
        assert!(tr.v.iter().all(|&v| v > 0.0));
        assert!(strong.zeta(20.0).is_err());
    }

    #[test]
    fn scaling_maps_eigenproblems() {
        let s = EigenSettings { half_width: 40.0, h: 0.0125, richardson: false };
        for omega in [0.25, 4.0] {
            let c = scaling_check(3.0, 1.0, 12.0, omega, &s).unwrap();
            assert!((c.nu_scaled - c.nu_mapped).abs() <= 1e-9 * c.nu_mapped.abs().max(1e-3));
            assert!((c.t_scaled - c.t_mapped).abs() <= 1e-9 * c.t_mapped.abs());
        }
    }
}
