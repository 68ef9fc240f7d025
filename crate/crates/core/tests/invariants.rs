use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use szego::jalg::{jay, mobius};
use szego::nodes::{char_function, random_unitary, spectral_norm, UnitaryNode};
use szego::quadrature::tan_rule;
use szego::spectral::{schur_at, SchurOptions};
use szego::system::{coeff_matrices, transfer, ArovProfile, Coefficient, IntegratorOptions};
use szego::C64;

/// Piecewise-constant profile on `[0, 1]` with `a ≥ 1` and `b² + c² ≤ 0.9·a²`.
fn step_profile() -> impl Strategy<Value = ArovProfile> {
    prop::collection::vec((1.0..2.0f64, 0.0..0.9f64, -PI..PI), 1..4).prop_map(|pieces| {
        let n = pieces.len();
        let knots: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
        let a = pieces.iter().map(|p| p.0).collect();
        let b = pieces.iter().map(|p| p.0 * p.1 * p.2.cos()).collect();
        let c = pieces.iter().map(|p| p.0 * p.1 * p.2.sin()).collect();
        ArovProfile::new(
            Coefficient::step(knots.clone(), a),
            Coefficient::step(knots.clone(), b),
            Coefficient::step(knots, c),
            1.0,
            1.0,
        )
        .unwrap()
    })
}

fn opts() -> IntegratorOptions {
    IntegratorOptions::with_step(1e-2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_axis_transfer_is_su11(p in step_profile(), x in -20.0..20.0f64) {
        let r = transfer(&p, C64::new(x, 0.0), 1.0, &opts()).unwrap();
        let scale = r.matrix.norm().powi(2).max(1.0);
        prop_assert!(r.det_defect < 1e-10 * scale, "det defect {}", r.det_defect);
        prop_assert!(r.j_unitarity_defect < 1e-10 * scale, "j defect {}", r.j_unitarity_defect);
    }

    #[test]
    fn upper_half_plane_transfer_is_expansive(p in step_profile(), x in -5.0..5.0f64, y in 0.0..3.0f64) {
        let r = transfer(&p, C64::new(x, y), 1.0, &opts()).unwrap();
        let scale = r.matrix.norm().powi(2).max(1.0);
        prop_assert!(r.expansion_min_eig >= -1e-10 * scale, "{}", r.expansion_min_eig);
    }

    #[test]
    fn constant_piece_is_one_exponential(
        a in 1.0..2.0f64, rho in 0.0..0.9f64, phase in -PI..PI, x in -5.0..5.0f64, y in 0.0..2.0f64, t in 0.1..1.0f64,
    ) {
        let p = ArovProfile::new(
            Coefficient::constant(a),
            Coefficient::constant(a * rho * phase.cos()),
            Coefficient::constant(a * rho * phase.sin()),
            1.0,
            a,
        ).unwrap();
        let z = C64::new(x, y);
        let (am, bm) = coeff_matrices(&p, 0.5).unwrap();
        let expected = ((am.scale(-C64::i() * z) + bm) * jay()).scale(C64::new(t, 0.0)).exp();
        let got = transfer(&p, z, t, &opts()).unwrap().matrix;
        prop_assert!((got - expected).norm() <= 1e-10 * expected.norm(), "{}", (got - expected).norm());
    }

    #[test]
    fn schur_function_maps_into_the_disk(p in step_profile(), x in -10.0..10.0f64, y in 0.05..3.0f64) {
        let w = schur_at(&p, C64::new(x, y), &SchurOptions::default()).unwrap();
        prop_assert!(w.norm() < 1.0, "|w| = {}", w.norm());
    }

    #[test]
    fn mobius_is_a_group_action(p in step_profile(), q in step_profile(), x in -3.0..3.0f64, w in 0.0..0.9f64, arg in -PI..PI) {
        let z = C64::new(x, 0.0);
        let m1 = transfer(&p, z, 1.0, &opts()).unwrap().matrix;
        let m2 = transfer(&q, z, 1.0, &opts()).unwrap().matrix;
        let w = C64::from_polar(w, arg);
        let composed = mobius(&(m1 * m2), w).unwrap();
        let nested = mobius(&m1, mobius(&m2, w).unwrap()).unwrap();
        prop_assert!((composed - nested).norm() < 1e-9);
        // j-unitary maps preserve the unit disk
        prop_assert!(composed.norm() < 1.0 + 1e-9);
    }

    #[test]
    fn characteristic_function_is_contractive(seed in any::<u64>(), n_h in 0usize..4, n_e in 1usize..3, r in 0.0..0.99f64, arg in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let node = UnitaryNode::new(random_unitary(n_h + n_e, &mut rng), n_h).unwrap();
        let theta = char_function(&node, C64::from_polar(r, arg)).unwrap();
        prop_assert!(spectral_norm(&theta) <= 1.0 + 1e-12, "{}", spectral_norm(&theta));
    }

    #[test]
    fn tan_rule_integrates_the_cauchy_density(n in 64usize..512, p in 0u32..4) {
        let rule = tan_rule(n, p);
        let total: f64 = rule.weights.iter().sum();
        prop_assert!((total - PI).abs() < 1e-12, "{total}");
        // ∫ cos²θ dθ = π/2, i.e. ∫ dx/(1+x²)² against the rule's measure
        let second: f64 = rule.weights.iter().zip(&rule.x).map(|(w, x)| w / (1.0 + x * x)).sum();
        prop_assert!((second - PI / 2.0).abs() < 1e-10, "{second}");
        prop_assert!(rule.x.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(rule.weights.iter().all(|w| *w > 0.0));
    }
}
