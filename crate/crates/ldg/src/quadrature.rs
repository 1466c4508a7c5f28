//! Gauss-Legendre rules, composite latitude quadrature and a fixed-shape summation tree.

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// (P_n(z), P_n'(z)) by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// A Gauss-Legendre rule mapped to [a, b].
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn on(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|t| half * t).collect(),
        }
    }

    /// `panels` copies of an `order`-point rule tiling [a, b].
    pub fn composite(order: usize, panels: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(order * panels);
        let mut weights = Vec::with_capacity(order * panels);
        for p in 0..panels {
            let lo = a + p as f64 * h;
            for (t, wt) in x.iter().zip(&w) {
                nodes.push(lo + 0.5 * h * (t + 1.0));
                weights.push(0.5 * h * wt);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Sum with a fixed binary tree shape; the result depends only on the slice contents.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if v.len() <= LEAF {
        return v.iter().fold(0.0, |a, b| a + b);
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Outcome of an adaptive latitude integration.
#[derive(Clone, Copy, Debug)]
pub struct Refined {
    pub value: f64,
    pub rel_change: f64,
    pub panels: usize,
}

/// Composite 8-point Gauss-Legendre on [a, b] with panel doubling until the relative
/// change drops below `rtol` or the panel cap is hit.
pub fn refine_until(f: impl Fn(f64) -> f64, a: f64, b: f64, n_quad: usize, rtol: f64) -> Refined {
    const ORDER: usize = 8;
    const MAX_PANELS: usize = 1 << 14;
    let mut panels = (n_quad / ORDER).max(1);
    let mut prev = Rule::composite(ORDER, panels, a, b).integrate(&f);
    loop {
        panels *= 2;
        let cur = Rule::composite(ORDER, panels, a, b).integrate(&f);
        let scale = cur.abs().max(1e-300);
        let rel = (cur - prev).abs() / scale;
        if rel < rtol || panels >= MAX_PANELS {
            return Refined { value: cur, rel_change: rel, panels };
        }
        prev = cur;
    }
}
