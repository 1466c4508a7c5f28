use ldg::spheres::{energy_density, eval_angles, eval_sphere, S2Point, SphereSpec};
use ldg::tensor_core::{join_iota, Sign};
use ldg::variation::{
    eval_hedgehog, eval_tangent, random_test_field, second_variation, stability_sides, Base, TangentMap,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn direction() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0..1.0f64).prop_filter("nonzero", |x| x.iter().map(|v| v * v).sum::<f64>() > 1e-3)
}

fn sign() -> impl Strategy<Value = Sign> {
    prop_oneof![Just(Sign::Plus), Just(Sign::Minus)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tangent_maps_are_zero_homogeneous(x in direction(), alpha in -PI..PI, s in sign()) {
        let tm = TangentMap::new(alpha, s);
        let q = eval_tangent(&tm, x).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let qc = eval_tangent(&tm, x.map(|v| c * v)).unwrap();
            prop_assert!((qc - q).norm() < 1e-12);
        }
        prop_assert!((eval_hedgehog(x).unwrap() - eval_hedgehog(x.map(|v| 3.0 * v)).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn tangent_map_restricts_to_the_degree_one_sphere(theta in 0.0..PI, phi in -PI..PI) {
        let x = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let q = eval_tangent(&TangentMap::new(0.0, Sign::Plus), x).unwrap();
        let s = SphereSpec::degenerate(1, C::new(1.0, 0.0), Sign::Plus);
        let w = eval_sphere(&s, &S2Point::spherical(theta, phi)).unwrap();
        prop_assert!((q - join_iota(&w)).norm() < 1e-12);
    }
}

#[test]
fn second_variation_forms_agree() {
    let bases = [
        Base::Hedgehog,
        Base::Tangent(TangentMap::new(0.0, Sign::Plus)),
        Base::Tangent(TangentMap::new(1.1, Sign::Minus)),
        Base::Sphere(SphereSpec::degenerate(2, C::new(0.8, 0.3), Sign::Plus)),
        Base::Sphere(SphereSpec::full_real(1.0, 0.4)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let base = bases[k % bases.len()];
        let x = random_test_field(&mut rng, 1.0, 160, 40);
        let v = second_variation(&base, &x).unwrap();
        let scale = v.value.abs().max(x.l2_norm_sqr()).max(1.0);
        assert!(v.discrepancy.abs() < 1e-6 * scale, "pair {k} {base:?}: {v:?}");
    }
}

/// `g = omega_2` of the hedgehog sphere, real on the meridian `phi = 0`.
fn omega2(theta: f64) -> (f64, f64) {
    let s = Base::Hedgehog.sphere();
    let f = |t: f64| eval_angles(&s, t, 0.0).zeta2.re;
    let h = 1e-4;
    let d = (f(theta - 2.0 * h) - 8.0 * f(theta - h) + 8.0 * f(theta + h) - f(theta + 2.0 * h)) / (12.0 * h);
    (f(theta), d)
}

#[test]
fn hedgehog_violates_the_stability_inequality() {
    let s = Base::Hedgehog.sphere();
    let (lhs, rhs) = stability_sides(&s, omega2).unwrap();
    assert!(lhs > rhs, "lhs {lhs} rhs {rhs}");

    // Independent oracle: the density is 6, and integrating the omega_2 identity gives
    // rhs = lhs - 3 int g^2/sin^2 + 1/4 int g^2.
    let n = 4000;
    let (mut g2, mut g2s) = (0.0, 0.0);
    for k in 0..n {
        let t = PI * (k as f64 + 0.5) / n as f64;
        let w = 2.0 * PI * t.sin() * PI / n as f64;
        let g = omega2(t).0;
        g2 += w * g * g;
        g2s += w * g * g / (t.sin() * t.sin());
    }
    assert!((energy_density(&s, 1.0) - 6.0).abs() < 1e-6);
    assert!((lhs - 6.0 * g2).abs() < 1e-5 * lhs, "lhs {lhs} vs {}", 6.0 * g2);
    let predicted = lhs - 3.0 * g2s + 0.25 * g2;
    assert!((rhs - predicted).abs() < 1e-4 * rhs, "rhs {rhs} vs {predicted}");
}

#[test]
fn equator_map_passes_the_stability_inequality() {
    // Q^(0) is minimizing, so no latitude profile vanishing at the poles can beat it.
    let s = Base::Tangent(TangentMap::new(0.0, Sign::Plus)).sphere();
    for m in 1..=4 {
        let g = |t: f64| ((m as f64 * t).sin() * t.sin(), m as f64 * (m as f64 * t).cos() * t.sin() + (m as f64 * t).sin() * t.cos());
        let (lhs, rhs) = stability_sides(&s, g).unwrap();
        assert!(lhs <= rhs, "mode {m}: lhs {lhs} rhs {rhs}");
    }
}
