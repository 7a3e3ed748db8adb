//! Soliton-soliton interaction integral `H(z)`, the integral `I_p`, and the
//! conserved functionals (energy, mass, action, Nehari).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{gauss_legendre, Grid1D, WaveField};
use crate::profiles::{cp_constant, interaction_g_at, q_prime, q_profile, ModelParams};

/// `I_p = ∫ Q^p(x) e^{-x} dx`, trapezoid rule on the default grid.
pub fn ip_integral(p: f64) -> f64 {
    let g = Grid1D::default();
    (0..g.n)
        .map(|k| {
            let x = g.x(k);
            q_profile(x, p).powf(p) * (-x).exp() * g.weight(k)
        })
        .sum()
}

// Width beyond which every integrand in `H` is below 1e-30 of its peak.
const TAIL: f64 = 40.0;
const PANEL: f64 = 0.25;

fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let panels = ((b - a) / PANEL).ceil().max(1.0) as usize;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * w;
            gauss_legendre(&f, lo, lo + w)
        })
        .sum()
}

fn check_h_domain(z: f64) -> Result<()> {
    if z >= 4.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("interaction integral needs z >= 4, got {z}")))
    }
}

/// The two pieces of `H(z)`, on `[-z/2, ∞)` and `(-∞, -z/2]`.
pub fn h_interaction_parts(z: f64, p: f64) -> Result<(f64, f64)> {
    check_h_domain(z)?;
    let right = composite_gl(
        |y| q_profile(y, p).powf(p - 1.0) * q_prime(y, p) * q_profile(y + z, p),
        -0.5 * z,
        TAIL,
    );
    let left = composite_gl(
        |y| q_profile(y + z, p).powf(p - 1.0) * q_prime(y, p) * q_profile(y, p),
        -0.5 * z - TAIL,
        -0.5 * z,
    );
    Ok((p * right, p * left))
}

/// `H(z)`, composite Gauss-Legendre.
pub fn h_interaction(z: f64, p: f64) -> Result<f64> {
    let (a, b) = h_interaction_parts(z, p)?;
    Ok(a + b)
}

/// `H(z)` by the trapezoid rule with spacing `h` (for refinement studies).
pub fn h_interaction_trapezoid(z: f64, p: f64, h: f64) -> Result<f64> {
    check_h_domain(z)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be positive, got {h}")));
    }
    let trap = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
        let n = ((b - a) / h).round().max(1.0) as usize;
        crate::numerics::trapezoid(f, a, a + n as f64 * h, n)
    };
    let right = trap(
        &|y| q_profile(y, p).powf(p - 1.0) * q_prime(y, p) * q_profile(y + z, p),
        -0.5 * z,
        TAIL,
    );
    let left = trap(
        &|y| q_profile(y + z, p).powf(p - 1.0) * q_prime(y, p) * q_profile(y, p),
        -0.5 * z - TAIL,
        -0.5 * z,
    );
    Ok(p * (right + left))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GInnerCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub budget: f64,
}

/// Compares `⟨G, (e^{iv·/2} Q')(· - z/2)⟩` with `H(z)`.
pub fn g_inner_check(z: f64, v: f64, p: f64) -> Result<GInnerCheck> {
    if z < 8.0 || v.abs() > 1.0 {
        return Err(Error::Domain(format!("need z >= 8 and |v| <= 1, got z = {z}, v = {v}")));
    }
    let rhs = h_interaction(z, p)?;
    let a = -0.5 * z - TAIL;
    let b = 0.5 * z + TAIL;
    let lhs = composite_gl(
        |y| {
            let s = y - 0.5 * z;
            let g = interaction_g_at(y, z, v, p);
            let t = Complex64::from_polar(q_prime(s, p), 0.5 * v * s);
            (g.conj() * t).re
        },
        a,
        b,
    );
    let budget = (-z).exp() * (v * v * z * z + (-0.5 * z).exp());
    Ok(GInnerCheck { lhs, rhs, gap: (lhs - rhs).abs(), budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub energy: f64,
    pub mass: f64,
    pub action: f64,
    pub nehari: f64,
}

/// Energy, mass, action and Nehari functional of a grid field.
///
/// The gradient term uses the fourth-order five-point derivative with zero
/// values beyond the grid ends; the point term reads the node at `x = 0`.
pub fn action_and_nehari(u: &WaveField, params: &ModelParams) -> Functionals {
    let grad = gradient_sq_fourth_order(u);
    functionals_with_gradient(u, params, grad)
}

/// As [`action_and_nehari`], but with the forward-difference gradient
/// `Σ |u_{k+1} - u_k|² / h`, the exact quadratic form of the 3-point
/// Laplacian. This is the energy the semi-discrete flow conserves.
pub fn discrete_functionals(u: &WaveField, params: &ModelParams) -> Functionals {
    let h = u.grid.h;
    let vals = &u.values;
    let n = vals.len();
    let mut grad = (vals[0].norm_sqr() + vals[n - 1].norm_sqr()) / h;
    for k in 0..n - 1 {
        grad += (vals[k + 1] - vals[k]).norm_sqr() / h;
    }
    functionals_with_gradient(u, params, grad)
}

fn gradient_sq_fourth_order(u: &WaveField) -> f64 {
    let h = u.grid.h;
    let vals = &u.values;
    let n = vals.len() as isize;
    let at = |k: isize| if k < 0 || k >= n { Complex64::new(0.0, 0.0) } else { vals[k as usize] };
    (0..n)
        .map(|k| {
            let d = (at(k - 2) - at(k - 1) * 8.0 + at(k + 1) * 8.0 - at(k + 2)) / (12.0 * h);
            d.norm_sqr() * u.grid.weight(k as usize)
        })
        .sum()
}

fn functionals_with_gradient(u: &WaveField, params: &ModelParams, grad: f64) -> Functionals {
    let g = &u.grid;
    let mut l2 = 0.0;
    let mut lp = 0.0;
    for (k, c) in u.values.iter().enumerate() {
        let m2 = c.norm_sqr();
        let w = g.weight(k);
        l2 += m2 * w;
        lp += m2.powf(0.5 * (params.p + 1.0)) * w;
    }
    let point = params.gamma * u.at_origin().norm_sqr();
    let energy = 0.5 * (grad + point) - lp / (params.p + 1.0);
    let mass = 0.5 * l2;
    Functionals {
        energy,
        mass,
        action: energy + mass,
        nehari: grad + l2 + point - lp,
    }
}

/// `H(z) e^z / (2 c_p²)`, which tends to 1.
pub fn normalized_h(z: f64, p: f64) -> Result<f64> {
    let c = cp_constant(p)?;
    Ok(h_interaction(z, p)? * z.exp() / (2.0 * c * c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{approx_two_soliton, q_field, soliton_mass};
    use crate::numerics::WaveField;

    #[test]
    fn ip_matches_closed_form() {
        assert!((ip_integral(3.0) - 5.656_854_2).abs() < 1e-6);
        for p in [2.5, 3.0, 4.0, 5.5, 7.0] {
            let r = ip_integral(p) / (2.0 * cp_constant(p).unwrap());
            assert!((r - 1.0).abs() < 1e-6, "p = {p}: {r}");
        }
    }

    #[test]
    fn h_leading_order() {
        let r = normalized_h(12.0, 3.0).unwrap();
        assert!((r - 1.0).abs() < 0.01, "{r}");
        for p in [3.0, 4.0, 7.0] {
            for k in 0..=18 {
                assert!(h_interaction(6.0 + k as f64, p).unwrap() > 0.0);
            }
        }
        let ratio = h_interaction(17.0, 3.0).unwrap() / h_interaction(16.0, 3.0).unwrap();
        assert!((ratio - (-1.0f64).exp()).abs() < 0.02);
        assert!(h_interaction(3.0, 3.0).is_err());
    }

    #[test]
    fn h_trapezoid_is_second_order() {
        let z = 12.0;
        let h1 = h_interaction_trapezoid(z, 3.0, 0.04).unwrap();
        let h2 = h_interaction_trapezoid(z, 3.0, 0.02).unwrap();
        let h4 = h_interaction_trapezoid(z, 3.0, 0.01).unwrap();
        assert!((h2 - h4).abs() <= (h1 - h2).abs() / 3.0);
        let exact = h_interaction(z, 3.0).unwrap();
        assert!((h4 - exact).abs() / exact < 1e-4);
    }

    #[test]
    fn g_pairing_matches_h() {
        let c = g_inner_check(10.0, 0.0, 3.0).unwrap();
        let k = c.gap / (-15.0f64).exp();
        let at14 = g_inner_check(14.0, 0.0, 3.0).unwrap();
        assert!(at14.gap <= 1.05 * k * (-21.0f64).exp());
        // Moving pair: gap/budget saturates from below, so check that the
        // ratio stays bounded and its growth decelerates.
        let ratios: Vec<f64> = [10.0, 12.0, 14.0, 16.0, 18.0, 24.0, 30.0]
            .iter()
            .map(|&z| {
                let r = g_inner_check(z, 0.05, 3.0).unwrap();
                assert_eq!(r.lhs.signum(), r.rhs.signum());
                r.gap / r.budget
            })
            .collect();
        assert!(ratios.iter().all(|&r| r < 2.0), "{ratios:?}");
        for w in ratios[..5].windows(3) {
            assert!(w[2] - w[1] < w[1] - w[0], "{ratios:?}");
        }
        assert!(g_inner_check(6.0, 0.0, 3.0).is_err());
    }

    #[test]
    fn functionals_of_soliton() {
        let g = Grid1D::default();
        let zero = WaveField::zeros(g);
        let f = action_and_nehari(&zero, &ModelParams::new(3.0, 1.0).unwrap());
        assert_eq!((f.energy, f.mass, f.action, f.nehari), (0.0, 0.0, 0.0, 0.0));

        let q = WaveField::from_real(&q_field(&g, 3.0));
        let f = action_and_nehari(&q, &ModelParams::new(3.0, 0.0).unwrap());
        assert!(f.nehari.abs() < 1e-6, "{}", f.nehari);
        assert!((f.mass - 2.0).abs() < 1e-10);
        assert!((f.mass - soliton_mass(3.0)).abs() < 1e-10);
        assert!((f.energy + 2.0 / 3.0).abs() < 1e-6);
        let d = discrete_functionals(&q, &ModelParams::new(3.0, 0.0).unwrap());
        assert!((d.energy + 2.0 / 3.0).abs() < 1e-3);

        let pz = approx_two_soliton(&g, 20.0, 0.0, 3.0).unwrap();
        let s = action_and_nehari(&pz, &ModelParams::new(3.0, 2.0).unwrap()).action;
        assert!((s - 2.0 * f.action).abs() < 0.02, "{s}");
    }
}
