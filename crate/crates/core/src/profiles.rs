//! Closed-form soliton profiles and the cut-off two-soliton ansatz.
//!
//! The ground state is
//! `Q(x) = c_p [2 cosh((p-1)x/2)]^{-2/(p-1)}` with `c_p = [2(p+1)]^{1/(p-1)}`.
//! It is evaluated in log form, `ln(2 cosh t) = |t| + ln(1 + e^{-2|t|})`,
//! which never overflows.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Grid1D, RealField, WaveField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub p: f64,
    pub gamma: f64,
}

impl ModelParams {
    /// Physical parameters: `p > 2`, `p != 5`, `gamma >= 0`.
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        let params = Self::validation(p, gamma)?;
        if gamma < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "potential strength must be non-negative, got {gamma}"
            )));
        }
        Ok(params)
    }

    /// Like [`ModelParams::new`] but admits an attractive (negative) delta.
    pub fn validation(p: f64, gamma: f64) -> Result<Self> {
        if !(p > 2.0) || (p - 5.0).abs() < 1e-12 || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("need p > 2 and p != 5, got p = {p}")));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("potential strength must be finite".into()));
        }
        Ok(Self { p, gamma })
    }
}

/// Modulation parameters: scale, phase, separation and half relative velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonState {
    pub lambda: f64,
    pub gamma_phase: f64,
    pub z: f64,
    pub v: f64,
}

impl SolitonState {
    pub fn new(lambda: f64, gamma_phase: f64, z: f64, v: f64) -> Result<Self> {
        if !(lambda > 0.0) || !(z > 0.0) || !gamma_phase.is_finite() || !v.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "invalid soliton state (lambda = {lambda}, z = {z}, v = {v})"
            )));
        }
        Ok(Self { lambda, gamma_phase, z, v })
    }

    /// Whether the state satisfies `z >= 1, |v| <= 1, 1/2 <= lambda <= 3/2`.
    pub fn in_modulation_regime(&self) -> bool {
        self.z >= 1.0 && self.v.abs() <= 1.0 && (0.5..=1.5).contains(&self.lambda)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.lambda, self.gamma_phase, self.z, self.v]
    }
}

/// Modulation defect vector built from `(λ̇/λ, ż, γ̇, v̇)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MVector {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl MVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Assemble the defects from parameter derivatives at `state`.
    pub fn from_rates(state: &SolitonState, lambda_rate: f64, z_dot: f64, gamma_dot: f64, v_dot: f64) -> Self {
        let (z, v) = (state.z, state.v);
        Self {
            m1: lambda_rate,
            m2: 0.5 * z_dot - v + lambda_rate * 0.5 * z,
            m3: gamma_dot - 1.0 + 0.25 * v * v - lambda_rate * 0.5 * v * 0.5 * z - 0.5 * v * 0.5 * z_dot,
            m4: 0.5 * v_dot - lambda_rate * 0.5 * v,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.m1 * self.m1 + self.m2 * self.m2 + self.m3 * self.m3 + self.m4 * self.m4).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m1.is_finite() && self.m2.is_finite() && self.m3.is_finite() && self.m4.is_finite()
    }
}

pub fn cp_constant(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("c_p needs p > 1, got {p}")));
    }
    Ok((2.0 * (p + 1.0)).powf(1.0 / (p - 1.0)))
}

fn cp_unchecked(p: f64) -> f64 {
    (2.0 * (p + 1.0)).powf(1.0 / (p - 1.0))
}

/// `ln(2 cosh t)` without overflow.
#[inline]
fn ln_two_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p()
}

#[inline]
pub fn q_profile(x: f64, p: f64) -> f64 {
    let a = 0.5 * (p - 1.0);
    cp_unchecked(p) * (-(2.0 / (p - 1.0)) * ln_two_cosh(a * x)).exp()
}

#[inline]
pub fn q_prime(x: f64, p: f64) -> f64 {
    let a = 0.5 * (p - 1.0);
    -q_profile(x, p) * (a * x).tanh()
}

#[inline]
pub fn q_second(x: f64, p: f64) -> f64 {
    let a = 0.5 * (p - 1.0);
    let t = (a * x).tanh();
    q_profile(x, p) * (t * t - a * (1.0 - t * t))
}

/// `ΛQ = x Q' + 2/(p-1) Q`, the generator of L²-scaling applied to `Q`.
#[inline]
pub fn lambda_q(x: f64, p: f64) -> f64 {
    x * q_prime(x, p) + 2.0 / (p - 1.0) * q_profile(x, p)
}

/// Rescaled ground state `ω^{1/(p-1)} Q(√ω x)`.
#[inline]
pub fn q_omega(x: f64, p: f64, omega: f64) -> f64 {
    omega.powf(1.0 / (p - 1.0)) * q_profile(omega.sqrt() * x, p)
}

/// `M(Q) = ½‖Q‖²`, in closed form `c_p² 2^{-4/(p-1)} B(1/2, 2/(p-1)) / (p-1)`
/// evaluated here by quadrature on a fine grid.
pub fn soliton_mass(p: f64) -> f64 {
    let half = 80.0;
    let steps = 64_000;
    0.5 * crate::numerics::trapezoid(|x| q_profile(x, p).powi(2), -half, half, steps)
}

/// `‖Q'‖₂²` by quadrature.
pub fn q_prime_norm_sq(p: f64) -> f64 {
    crate::numerics::trapezoid(|x| q_prime(x, p).powi(2), -80.0, 80.0, 64_000)
}

/// Residuals of the profile equation `-Q'' + Q - Q^p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeResidual {
    /// Sup-norm using the closed-form second derivative.
    pub analytic: f64,
    /// Sup-norm using the 3-point second difference.
    pub finite_difference: f64,
}

pub fn ode_residual(p: f64, grid: &Grid1D) -> OdeResidual {
    let xs = grid.nodes();
    let q: Vec<f64> = xs.iter().map(|&x| q_profile(x, p)).collect();
    let mut analytic = 0.0f64;
    let mut fd = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let r = -q_second(x, p) + q[i] - q[i].powf(p);
        analytic = analytic.max(r.abs());
        if i > 0 && i + 1 < xs.len() {
            let d2 = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (grid.h * grid.h);
            fd = fd.max((-d2 + q[i] - q[i].powf(p)).abs());
        }
    }
    OdeResidual { analytic, finite_difference: fd }
}

/// Sup-norm of `(Q')² + 2/(p+1) Q^{p+1} - Q²` with `Q` replaced by
/// `(1 + perturbation) Q`.
pub fn pohozaev_residual_perturbed(p: f64, grid: &Grid1D, perturbation: f64) -> f64 {
    let s = 1.0 + perturbation;
    grid.nodes()
        .iter()
        .map(|&x| {
            let q = s * q_profile(x, p);
            let dq = s * q_prime(x, p);
            (dq * dq + 2.0 / (p + 1.0) * q.powf(p + 1.0) - q * q).abs()
        })
        .fold(0.0, f64::max)
}

pub fn pohozaev_residual(p: f64, grid: &Grid1D) -> f64 {
    pohozaev_residual_perturbed(p, grid, 0.0)
}

/// Right-moving soliton `P₊(y) = e^{i v (y - z/2)/2} Q(y - z/2)`.
#[inline]
pub fn p_plus(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let s = y - 0.5 * z;
    Complex64::from_polar(q_profile(s, p), 0.5 * v * s)
}

/// Left-moving soliton `P₋(y) = e^{-i v (y + z/2)/2} Q(y + z/2)`.
#[inline]
pub fn p_minus(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let s = y + 0.5 * z;
    Complex64::from_polar(q_profile(s, p), -0.5 * v * s)
}

/// Free two-soliton `P⁰ = P₊ + P₋`.
#[inline]
pub fn p0_at(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    p_plus(y, z, v, p) + p_minus(y, z, v, p)
}

/// `∂_y P⁰`.
#[inline]
pub fn p0_dy_at(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let sp = y - 0.5 * z;
    let sm = y + 0.5 * z;
    let ep = Complex64::from_polar(1.0, 0.5 * v * sp);
    let em = Complex64::from_polar(1.0, -0.5 * v * sm);
    ep * Complex64::new(q_prime(sp, p), 0.5 * v * q_profile(sp, p))
        + em * Complex64::new(q_prime(sm, p), -0.5 * v * q_profile(sm, p))
}

/// Cut-off two-soliton `P = χ P⁰`.
#[inline]
pub fn p_at(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let c = cutoff_chi(y);
    if c == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        p0_at(y, z, v, p) * c
    }
}

pub fn free_two_soliton(grid: &Grid1D, z: f64, v: f64, p: f64) -> Result<WaveField> {
    check_separation(z)?;
    Ok(WaveField::from_fn(*grid, |y| p0_at(y, z, v, p)))
}

pub fn approx_two_soliton(grid: &Grid1D, z: f64, v: f64, p: f64) -> Result<WaveField> {
    check_separation(z)?;
    Ok(WaveField::from_fn(*grid, |y| p_at(y, z, v, p)))
}

fn check_separation(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("separation must be positive, got {z}")))
    }
}

// Smooth step S on [0, 1] built from the mollifier e^{-1/t}:
// S(t) = σ(u(t)), σ the logistic function, u(t) = 1/(1-t) - 1/t.

#[inline]
pub(crate) fn smoothstep(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let u = 1.0 / (1.0 - t) - 1.0 / t;
    let (sig, sig1m) = if u >= 0.0 {
        let e = (-u).exp();
        (1.0 / (1.0 + e), e / (1.0 + e))
    } else {
        let e = u.exp();
        (e / (1.0 + e), 1.0 / (1.0 + e))
    };
    let du = 1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t);
    let d2u = 2.0 / (1.0 - t).powi(3) - 2.0 / (t * t * t);
    let s1 = sig * sig1m;
    let first = s1 * du;
    let second = s1 * ((1.0 - 2.0 * sig) * du * du + d2u);
    (sig, if first.is_finite() { first } else { 0.0 }, if second.is_finite() { second } else { 0.0 })
}

/// The cut-off `χ`: even, `≡ 0` on `|y| ≤ 1`, `≡ 1` on `|y| ≥ 2`,
/// monotone in between. Returns `(χ, χ', χ'')`.
#[inline]
pub fn cutoff_chi_derivs(y: f64) -> (f64, f64, f64) {
    let (s, d1, d2) = smoothstep(y.abs() - 1.0);
    (s, d1 * y.signum(), d2)
}

#[inline]
pub fn cutoff_chi(y: f64) -> f64 {
    smoothstep(y.abs() - 1.0).0
}

/// Interaction term `G = |P⁰|^{p-1}P⁰ - |P₊|^{p-1}P₊ - |P₋|^{p-1}P₋` at `y`.
#[inline]
pub fn interaction_g_at(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let a = p_plus(y, z, v, p);
    let b = p_minus(y, z, v, p);
    nonlinearity(a + b, p) - nonlinearity(a, p) - nonlinearity(b, p)
}

/// `N(u) = |u|^{p-1} u`.
#[inline]
pub fn nonlinearity(u: Complex64, p: f64) -> Complex64 {
    let m2 = u.norm_sqr();
    if m2 == 0.0 {
        return u;
    }
    u * m2.powf(0.5 * (p - 1.0))
}

pub fn interaction_g(grid: &Grid1D, z: f64, v: f64, p: f64) -> Result<WaveField> {
    check_separation(z)?;
    Ok(WaveField::from_fn(*grid, |y| interaction_g_at(y, z, v, p)))
}

/// `‖f‖_{W^{1,∞}}` of the interaction term, with the analytic derivative
/// replaced by a centered difference.
pub fn interaction_w1inf(grid: &Grid1D, z: f64, v: f64, p: f64) -> Result<f64> {
    let g = interaction_g(grid, z, v, p)?;
    let d = crate::numerics::derivative(&g.values, grid.h);
    let sup = g.values.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let dsup = d.iter().map(|c| c.norm()).fold(0.0, f64::max);
    Ok(sup + dsup)
}

/// Pointwise error `E_P` of the ansatz in the modulated equation.
///
/// Built from `χ E_{P⁰}` (tangent-direction defects plus `G`) and the four
/// cut-off corrections. The delta contributes nothing because `P` vanishes
/// on `|y| ≤ 1`.
#[inline]
pub fn error_field_at(y: f64, state: &SolitonState, m: &MVector, p: f64) -> Complex64 {
    let (z, v) = (state.z, state.v);
    let (chi, dchi, d2chi) = cutoff_chi_derivs(y);
    let i = Complex64::i();
    let p0 = p0_at(y, z, v, p);
    let mut e = Complex64::new(0.0, 0.0);
    if chi != 0.0 {
        // m·M Q with M = (iΛ, i∂_y, 1, y).
        let mdot = |s: f64, m1: f64, m2: f64, m3: f64, m4: f64| -> Complex64 {
            i * (m1 * lambda_q(s, p) + m2 * q_prime(s, p)) + (m3 + m4 * s) * q_profile(s, p)
        };
        let sp = y - 0.5 * z;
        let sm = y + 0.5 * z;
        let right = Complex64::from_polar(1.0, 0.5 * v * sp) * mdot(sp, m.m1, m.m2, m.m3, m.m4);
        // Ω = diag(-1, 1, -1, 1).
        let left = Complex64::from_polar(1.0, -0.5 * v * sm) * mdot(sm, -m.m1, m.m2, -m.m3, m.m4);
        let e0 = -right + left + interaction_g_at(y, z, v, p);
        e += e0 * chi;
        e += nonlinearity(p0, p) * (chi * (chi.powf(p - 1.0) - 1.0));
    }
    if dchi != 0.0 || d2chi != 0.0 {
        e += p0_dy_at(y, z, v, p) * (2.0 * dchi) + p0 * d2chi;
        e -= i * p0 * (m.m1 * y * dchi);
    }
    e
}

pub fn error_field(grid: &Grid1D, state: &SolitonState, m: &MVector, p: f64) -> WaveField {
    WaveField::from_fn(*grid, |y| error_field_at(y, state, m, p))
}

/// The cut-off part `E_P^{cut} = 2 χ' ∂_y P⁰ + χ'' P⁰`.
#[inline]
pub fn cutoff_error_at(y: f64, z: f64, v: f64, p: f64) -> Complex64 {
    let (_, dchi, d2chi) = cutoff_chi_derivs(y);
    if dchi == 0.0 && d2chi == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    p0_dy_at(y, z, v, p) * (2.0 * dchi) + p0_at(y, z, v, p) * d2chi
}

/// `‖P(·; z1, 0) − e^{iω} P(·; z2, v)‖₂²`.
pub fn pair_distance(z1: f64, z2: f64, v: f64, omega: f64, p: f64, grid: &Grid1D) -> Result<f64> {
    check_separation(z1)?;
    check_separation(z2)?;
    let phase = Complex64::from_polar(1.0, omega);
    Ok((0..grid.n)
        .map(|k| {
            let y = grid.x(k);
            (p_at(y, z1, 0.0, p) - phase * p_at(y, z2, v, p)).norm_sqr() * grid.weight(k)
        })
        .sum())
}

/// `Q` sampled on a grid.
pub fn q_field(grid: &Grid1D, p: f64) -> RealField {
    RealField::from_fn(*grid, |x| q_profile(x, p))
}

pub fn q_prime_field(grid: &Grid1D, p: f64) -> RealField {
    RealField::from_fn(*grid, |x| q_prime(x, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{norms, WaveField};

    fn sech(x: f64) -> f64 {
        1.0 / x.cosh()
    }

    #[test]
    fn cp_values() {
        assert!((cp_constant(3.0).unwrap() - 2.828_427_1).abs() < 1e-7);
        assert!((cp_constant(2.0).unwrap() - 6.0).abs() < 1e-12);
        for p in [2.5, 3.0, 4.0, 7.0] {
            let c = cp_constant(p).unwrap();
            assert!((c.powf(p - 1.0) - 2.0 * (p + 1.0)).abs() < 1e-10);
        }
        assert!(cp_constant(1.0).is_err());
    }

    #[test]
    fn cubic_profile_is_sqrt2_sech() {
        assert!((q_profile(0.0, 3.0) - 2f64.sqrt()).abs() < 1e-7);
        for x in [-3.0, -0.5, 0.7, 4.0] {
            assert!((q_profile(x, 3.0) - 2f64.sqrt() * sech(x)).abs() < 1e-14);
        }
        for p in [2.5, 3.0, 4.0, 7.0] {
            assert_eq!(q_prime(0.0, p), 0.0);
        }
        let c = cp_constant(3.0).unwrap();
        assert!((q_profile(10.0, 3.0) / (c * (-10.0f64).exp()) - 1.0).abs() < 1e-8);
        // Log form stays finite far out.
        assert!(q_profile(400.0, 3.0) > 0.0 || q_profile(400.0, 3.0) == 0.0);
        assert!(q_profile(400.0, 3.0).is_finite());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for p in [2.5, 3.0, 7.0] {
            for x in [-2.0, 0.3, 1.7] {
                let fd = (q_profile(x + h, p) - q_profile(x - h, p)) / (2.0 * h);
                assert!((fd - q_prime(x, p)).abs() < 1e-8);
                let fd2 = (q_prime(x + h, p) - q_prime(x - h, p)) / (2.0 * h);
                assert!((fd2 - q_second(x, p)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn profile_identities() {
        let g = Grid1D::default();
        for p in [3.0, 4.0, 7.0] {
            assert!(ode_residual(p, &g).analytic < 1e-10);
            assert!(pohozaev_residual(p, &g) < 1e-10);
        }
        assert!(ode_residual(3.0, &g).finite_difference <= 5e-4);
        assert!(pohozaev_residual_perturbed(3.0, &g, 1e-3) > 1e-4);
    }

    #[test]
    fn fd_residual_is_second_order() {
        let coarse = ode_residual(3.0, &Grid1D::new(-20.0, 20.0, 1001).unwrap()).finite_difference;
        let fine = ode_residual(3.0, &Grid1D::new(-20.0, 20.0, 2001).unwrap()).finite_difference;
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn asymptotic_tail() {
        // |Q(x) - c_p e^{-|x|}| <= C e^{-p|x|} with C = 2 c_p / (p-1).
        for p in [3.0, 4.0, 7.0] {
            let c = cp_constant(p).unwrap();
            for k in 0..=28 {
                let x = 5.0 + 0.25 * k as f64;
                for s in [x, -x] {
                    let lead = c * (-x).exp();
                    let gap = (q_profile(s, p) - lead).abs();
                    let bound = 2.0 * c / (p - 1.0) * (-p * x).exp();
                    assert!(gap <= bound + 1e-14 * lead, "p={p} x={s}");
                }
            }
        }
    }

    #[test]
    fn omega_family_matches_scaling() {
        for &(p, omega) in &[(3.0f64, 4.0f64), (4.0, 0.25)] {
            for x in [-1.0, 0.0, 0.8, 3.0] {
                let direct = omega.powf(1.0 / (p - 1.0)) * q_profile(omega.sqrt() * x, p);
                assert_eq!(q_omega(x, p, omega), direct);
            }
        }
    }

    #[test]
    fn cutoff_supports() {
        assert_eq!(cutoff_chi(0.5), 0.0);
        assert_eq!(cutoff_chi(1.0), 0.0);
        assert_eq!(cutoff_chi(3.0), 1.0);
        assert_eq!(cutoff_chi(2.0), 1.0);
        let a = cutoff_chi(1.5);
        assert_eq!(a, cutoff_chi(-1.5));
        assert!(a > 0.0 && a < 1.0);
        let mut prev = 0.0;
        for k in 0..=100 {
            let y = 1.0 + k as f64 * 0.01;
            let c = cutoff_chi(y);
            assert!(c >= prev);
            prev = c;
        }
        // Derivatives agree with differences.
        let h = 1e-6;
        for y in [1.2, 1.5, -1.7] {
            let (_, d1, d2) = cutoff_chi_derivs(y);
            let fd1 = (cutoff_chi(y + h) - cutoff_chi(y - h)) / (2.0 * h);
            let fd2 = (cutoff_chi_derivs(y + h).1 - cutoff_chi_derivs(y - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6);
            assert!((d2 - fd2).abs() < 1e-5);
        }
    }

    #[test]
    fn two_soliton_symmetries() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        let p0 = free_two_soliton(&g, 20.0, 0.0, 3.0).unwrap();
        let o = g.origin_index();
        for k in 0..g.n {
            assert_eq!(p0.values[k].im, 0.0);
            let mirror = 2 * o - k;
            assert!((p0.values[k] - p0.values[mirror]).norm() < 1e-14);
        }
        assert!((p0.values[o].re - 2.0 * q_profile(10.0, 3.0)).abs() < 1e-12);

        let p = approx_two_soliton(&g, 20.0, 0.0, 3.0).unwrap();
        let k09 = g.nearest_index(0.9).unwrap();
        assert_eq!(p.values[k09], Complex64::new(0.0, 0.0));
        for k in 0..g.n {
            if g.x(k).abs() >= 2.0 {
                assert_eq!(p.values[k], p0.values[k]);
            }
        }
        assert!(free_two_soliton(&g, -1.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn interaction_symmetry_and_decay() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        let o = g.origin_index();
        // v = 0: real and even.
        let gz = interaction_g(&g, 12.0, 0.0, 3.0).unwrap();
        for k in 0..g.n {
            assert!(gz.values[k].im.abs() < 1e-15);
            assert!((gz.values[k] - gz.values[2 * o - k]).norm() < 1e-14);
        }
        // Moving pair: still even in y.
        let gv = interaction_g(&g, 12.0, 0.3, 3.0).unwrap();
        for k in (0..g.n).step_by(37) {
            assert!((gv.values[k] - gv.values[2 * o - k]).norm() < 1e-13);
        }
        // Monotone decay of sup|G| for z >= 10.
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let z = 10.0 + k as f64;
            let s = norms(&interaction_g(&g, z, 0.0, 3.0).unwrap()).sup;
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn interaction_w1inf_decays_exponentially() {
        let g = Grid1D::new(-40.0, 40.0, 8001).unwrap();
        let c = interaction_w1inf(&g, 8.0, 0.0, 3.0).unwrap() * 8f64.exp();
        for z in [10.0, 12.0, 16.0, 20.0] {
            let w = interaction_w1inf(&g, z, 0.0, 3.0).unwrap();
            assert!(w <= 1.05 * c * (-z).exp(), "z = {z}");
        }
    }

    #[test]
    fn ansatz_close_to_sum_of_solitons() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        let sum = |z: f64| WaveField::from_fn(g, |y| Complex64::new(q_profile(y - z / 2.0, 3.0) + q_profile(y + z / 2.0, 3.0), 0.0));
        // |P⁰ - sum| ≲ |v|: fit at v = 0.01, hold up to v = 0.2.
        let d = |v: f64| norms(&free_two_soliton(&g, 16.0, v, 3.0).unwrap().sub(&sum(16.0)).unwrap()).h1;
        let c = d(0.01) / 0.01;
        for v in [0.02, 0.05, 0.1, 0.2] {
            assert!(d(v) <= 1.05 * c * v);
        }
        // |P - sum| ≲ |v| + e^{-z/2}.
        let dp = |z: f64, v: f64| norms(&approx_two_soliton(&g, z, v, 3.0).unwrap().sub(&sum(z)).unwrap()).h1;
        let c = dp(10.0, 0.0) / (-5.0f64).exp();
        for z in [12.0, 16.0, 20.0] {
            assert!(dp(z, 0.0) <= 1.05 * c * (-z / 2.0).exp());
            assert!(dp(z, 0.1) <= 1.05 * c * (0.1 + (-z / 2.0).exp()) + 1.05 * d(0.1));
        }
    }

    #[test]
    fn error_field_supports() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        let st = SolitonState::new(1.0, 0.0, 16.0, 0.0).unwrap();
        let e = error_field(&g, &st, &MVector::zero(), 3.0);
        for k in 0..g.n {
            if g.x(k).abs() <= 1.0 {
                assert_eq!(e.values[k], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn pair_distance_properties() {
        let g = Grid1D::new(-40.0, 40.0, 4001).unwrap();
        assert!(pair_distance(12.0, 12.0, 0.0, 0.0, 3.0, &g).unwrap() < 1e-28);
        // Small separation mismatch: distance ≥ c (Δz)²/4 − C e^{-z1}.
        let c = (2.0 / 3.0) * 1f64.tanh().powi(3);
        assert!((c - 0.2945).abs() < 1e-4);
        for dz in [0.05, 0.1, 0.2] {
            let d = pair_distance(12.0, 12.0 + dz, 0.0, 0.0, 3.0, &g).unwrap();
            assert!(d >= c * dz * dz / 4.0 - (-12.0f64).exp());
        }
        // Real profiles: phase misalignment only increases the distance.
        let d0 = pair_distance(12.0, 12.3, 0.0, 0.0, 3.0, &g).unwrap();
        for w in [0.1, -0.2, 1.0] {
            assert!(pair_distance(12.0, 12.3, 0.0, w, 3.0, &g).unwrap() > d0);
        }
    }
}
