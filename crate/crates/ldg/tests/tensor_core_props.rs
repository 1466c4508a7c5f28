use ldg::tensor_core::{
    biaxiality, eigensystem, join_iota, potential_w, rotate, split_iota, tangential_potential_gradient, QTensor,
};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn tensor() -> impl Strategy<Value = QTensor> {
    prop::array::uniform5(-2.0..2.0f64)
        .prop_filter("away from zero", |a| a.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(QTensor::new)
}

fn unit_tensor() -> impl Strategy<Value = QTensor> {
    tensor().prop_map(|q| q.scale(1.0 / q.norm()))
}

fn angle() -> impl Strategy<Value = f64> {
    -10.0..10.0f64
}

/// Component of `v` orthogonal to `q`.
fn tangent_part(q: &QTensor, v: &QTensor) -> QTensor {
    *v - q.scale(q.dot(v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn biaxiality_is_rotation_invariant(q in tensor(), a in angle()) {
        let b0 = biaxiality(&q).unwrap();
        let b1 = biaxiality(&rotate(&q, a)).unwrap();
        prop_assert!((b0 - b1).abs() < 1e-12, "{b0} vs {b1}");
    }

    #[test]
    fn split_is_an_isometry(q in tensor()) {
        prop_assert!((split_iota(&q).norm() - q.norm()).abs() < 1e-12);
        prop_assert!((join_iota(&split_iota(&q)) - q).norm() < 1e-14);
    }

    #[test]
    fn split_is_equivariant(q in tensor(), a in angle()) {
        let lhs = split_iota(&rotate(&q, a));
        let p = split_iota(&q);
        prop_assert!((lhs.t - p.t).abs() < 1e-12);
        prop_assert!((lhs.zeta1 - p.zeta1 * C::from_polar(1.0, a)).norm() < 1e-12);
        prop_assert!((lhs.zeta2 - p.zeta2 * C::from_polar(1.0, 2.0 * a)).norm() < 1e-12);
        prop_assert!(lhs.distance(&p.rotate(a)) < 1e-12);
    }

    #[test]
    fn potential_gradient_matches_differences(q in unit_tensor(), v in tensor()) {
        let v = tangent_part(&q, &v);
        let v = v.scale(1.0 / v.norm().max(1e-3));
        let h = 1e-5;
        let w = |s: f64| {
            let p = q + v.scale(s);
            potential_w(&p.scale(1.0 / p.norm())).unwrap()
        };
        let fd = (w(h) - w(-h)) / (2.0 * h);
        let g = tangential_potential_gradient(&q).unwrap();
        prop_assert!(g.dot(&q).abs() < 1e-12, "gradient not tangent");
        prop_assert!((fd - g.dot(&v)).abs() < 1e-6, "fd {fd} analytic {}", g.dot(&v));
    }

    #[test]
    fn eigen_decomposition_residual(q in tensor()) {
        let m = q.to_matrix();
        let es = eigensystem(&q);
        let sum: f64 = es.values.iter().sum();
        prop_assert!(sum.abs() < 1e-12, "trace {sum}");
        prop_assert!(es.values[0] <= es.values[1] && es.values[1] <= es.values[2]);
        for k in 0..3 {
            let v = es.vectors[k];
            for i in 0..3 {
                let mv: f64 = (0..3).map(|j| m[i][j] * v[j]).sum();
                prop_assert!((mv - es.values[k] * v[i]).abs() < 1e-10, "residual at {k},{i}");
            }
        }
    }
}

#[test]
fn degenerate_spectra_are_resolved() {
    // Uniaxial tensors have a double eigenvalue; the decomposition must still be orthonormal.
    for q in [QTensor::e0(), -QTensor::e0(), rotate(&QTensor::basis(3), 0.4)] {
        let es = eigensystem(&q);
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = (0..3).map(|i| es.vectors[a][i] * es.vectors[b][i]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-10, "{q:?}: <v{a}, v{b}> = {d}");
            }
        }
    }
}
