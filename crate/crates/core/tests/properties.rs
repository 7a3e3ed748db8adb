//! Property checks across modules.

use std::sync::OnceLock;

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use logsep_core::dynamics::{integrate_ode, ForceLaw, ForceLawOptions, ZetaOrigin};
use logsep_core::evolver::{evolve, EvolverConfig};
use logsep_core::modulation::{decompose, family_member, ModulationMode};
use logsep_core::numerics::{Grid1D, WaveField};
use logsep_core::profiles::{cutoff_chi, q_profile, ModelParams, SolitonState};

fn free_law() -> &'static ForceLaw {
    static LAW: OnceLock<ForceLaw> = OnceLock::new();
    LAW.get_or_init(|| {
        ForceLaw::build(3.0, 0.0, ForceLawOptions { origin: ZetaOrigin::Asymptotic, ..Default::default() }).unwrap()
    })
}

fn mass(u: &WaveField) -> f64 {
    u.values.iter().map(|c| c.norm_sqr()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ground_state_is_even_and_peaked(p in 2.0f64..5.0, x in -30.0f64..30.0) {
        let q = q_profile(x, p);
        prop_assert!(q > 0.0 || x.abs() > 20.0);
        prop_assert!((q - q_profile(-x, p)).abs() <= 1e-15);
        prop_assert!(q <= q_profile(0.0, p));
    }

    #[test]
    fn cutoff_is_a_partition(y in -10.0f64..10.0) {
        let c = cutoff_chi(y);
        prop_assert!((0.0..=1.0).contains(&c));
        prop_assert_eq!(c, cutoff_chi(-y));
    }

    #[test]
    fn zeta_is_increasing_and_invertible(a in 9.0f64..38.0, b in 9.0f64..38.0) {
        let law = free_law();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        prop_assert!(law.zeta(lo).unwrap() < law.zeta(hi).unwrap());
        let back = law.zeta_inverse(law.zeta(a).unwrap()).unwrap();
        assert_relative_eq!(back, a, max_relative = 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn effective_energy_is_conserved(z0 in 12.0f64..20.0, factor in 0.5f64..1.5) {
        let law = free_law();
        let v0 = factor * law.classical_velocity(z0).unwrap();
        let tr = integrate_ode(law, z0, v0, (100.0, 300.0), 0.05).unwrap();
        prop_assert!(tr.energy_drift <= 1e-8, "drift {}", tr.energy_drift);
    }

    #[test]
    fn family_members_are_recovered(
        lambda in 0.9f64..1.1,
        phase in -1.0f64..1.0,
        z in 12.0f64..16.0,
        v in -0.02f64..0.05,
    ) {
        let grid = Grid1D::symmetric(40.0, 0.02).unwrap();
        let truth = SolitonState::new(lambda, phase, z, v).unwrap();
        let u = family_member(&grid, &truth, 3.0);
        let guess = SolitonState::new(lambda * 1.01, phase + 0.02, z - 0.1, v + 0.005).unwrap();
        let params = ModelParams::new(3.0, 1.0).unwrap();
        let r = decompose(&u, &guess, &params, ModulationMode::Full).unwrap();
        for (got, want) in r.state.as_array().iter().zip(truth.as_array()) {
            assert_relative_eq!(*got, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn linear_flow_keeps_mass(shift in -5.0f64..5.0, k in -2.0f64..2.0, gamma in 0.0f64..3.0) {
        let grid = Grid1D::symmetric(30.0, 0.05).unwrap();
        let u = WaveField::from_fn(grid, |x| {
            let g = (-(x - shift).powi(2)).exp();
            Complex64::from_polar(g, k * x)
        });
        let cfg = EvolverConfig::new(ModelParams::new(3.0, gamma).unwrap(), 1e-3).unwrap().linear().check_every(0);
        let out = evolve(&u, 0.0, 0.05, &cfg).unwrap();
        assert_relative_eq!(mass(&out.u), mass(&u), max_relative = 1e-10);
    }
}
