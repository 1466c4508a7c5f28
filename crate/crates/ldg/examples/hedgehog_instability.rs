// The constant-norm hedgehog is not a minimizer: an explicit equivariant variation
// lowers its energy, while the equator-map tangent maps survive every random probe.
//
// `cargo run --release --example hedgehog_instability`

use ldg::spheres::eval_angles;
use ldg::tensor_core::Sign;
use ldg::variation::{hedgehog_destabilizer, second_variation, stability_battery, stability_sides, Base, TangentMap};

pub struct Outcome {
    /// Second variation of the hedgehog along the destabilizing field, per resolution.
    pub hedgehog: Vec<(usize, f64)>,
    /// `(lhs, rhs)` of the stability inequality for the hedgehog with `g = omega_2`.
    pub sides: (f64, f64),
    /// Smallest `d2E / |X|^2` over the random battery at the equator map.
    pub equator_min_ratio: f64,
}

pub fn study(n_r: usize, n_theta: usize, battery: usize) -> Outcome {
    let hedgehog = [1, 2]
        .iter()
        .map(|&m| {
            let x = hedgehog_destabilizer(n_r * m, n_theta * m).expect("destabilizer fits its grid");
            (n_r * m, second_variation(&Base::Hedgehog, &x).unwrap().value)
        })
        .collect();

    let s = Base::Hedgehog.sphere();
    let omega2 = |t: f64| {
        let f = |u: f64| eval_angles(&s, u, 0.0).zeta2.re;
        let h = 1e-4;
        (f(t), (f(t + h) - f(t - h)) / (2.0 * h))
    };
    let sides = stability_sides(&s, omega2).unwrap();

    let base = Base::Tangent(TangentMap::new(0.0, Sign::Plus));
    let equator_min_ratio = stability_battery(&base, 1, battery, n_r, n_theta / 2)
        .unwrap()
        .iter()
        .map(|(v, n)| v / n)
        .fold(f64::INFINITY, f64::min);

    Outcome { hedgehog, sides, equator_min_ratio }
}

fn main() {
    let o = study(400, 96, 50);
    for (n, v) in &o.hedgehog {
        println!("hedgehog second variation with {n} radial nodes: {v:.4}");
    }
    println!("stability inequality with g = omega_2: lhs {:.5} > rhs {:.5}", o.sides.0, o.sides.1);
    println!("equator map, 50 random fields: min d2E/|X|^2 = {:.4} (nonnegative)", o.equator_min_ratio);
}
