//! Q-tensor algebra in the orthonormal basis of symmetric traceless 3x3 matrices.
//!
//! Coordinates `a = (a0, .., a4)` refer to the basis
//!
//! ```text
//! e0 = diag(-1,-1,2)/sqrt6     e1 = (E13+E31)/sqrt2   e2 = (E23+E32)/sqrt2
//! e3 = diag(1,-1,0)/sqrt2      e4 = (E12+E21)/sqrt2
//! ```
//!
//! so that `Q = sum a_k e_k` and `|Q|^2 = tr(Q^2) = sum a_k^2`. A rotation by `alpha`
//! about the x3-axis fixes `a0`, turns `a1 + i a2` by `e^{i alpha}` and `a3 + i a4`
//! by `e^{2 i alpha}`; [`SplitPoint`] is that split.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};
use thiserror::Error;

pub const SQRT2: f64 = std::f64::consts::SQRT_2;
pub const SQRT3: f64 = 1.732_050_807_568_877_2;
pub const SQRT6: f64 = 2.449_489_742_783_178;

/// Dense 3x3 matrix, row-major.
pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("zero tensor has no biaxiality (|Q| = {0:e})")]
    ZeroTensor(f64),
    #[error("tensor is not on the unit sphere (|Q| = {0})")]
    NotUnitNorm(f64),
    #[error("director is not a unit vector (|v| = {0})")]
    NotUnitVector(f64),
    #[error("material parameter `{0}` must be strictly positive")]
    NonPositiveParam(&'static str),
    #[error("biaxiality {0} overshoots [-1, 1] beyond rounding")]
    BiaxialityOvershoot(f64),
}

/// A global sign: the +/- in front of a tangent map, a degenerate sphere, or a singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn of(x: f64) -> Sign {
        if x < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Symmetric traceless tensor stored by its five basis coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QTensor {
    pub a: [f64; 5],
}

impl QTensor {
    pub const fn new(a: [f64; 5]) -> Self {
        Self { a }
    }

    pub const fn zero() -> Self {
        Self { a: [0.0; 5] }
    }

    /// The k-th basis element e_k.
    pub fn basis(k: usize) -> Self {
        let mut a = [0.0; 5];
        a[k] = 1.0;
        Self { a }
    }

    pub fn e0() -> Self {
        Self::basis(0)
    }

    pub fn to_matrix(&self) -> Mat3 {
        let [a0, a1, a2, a3, a4] = self.a;
        let d = a0 / SQRT6;
        let m00 = -d + a3 / SQRT2;
        let m11 = -d - a3 / SQRT2;
        let m22 = 2.0 * d;
        let m01 = a4 / SQRT2;
        let m02 = a1 / SQRT2;
        let m12 = a2 / SQRT2;
        [[m00, m01, m02], [m01, m11, m12], [m02, m12, m22]]
    }

    /// Orthogonal projection of an arbitrary matrix onto the basis (symmetric traceless part).
    pub fn from_matrix(m: &Mat3) -> Self {
        let a0 = (-m[0][0] - m[1][1] + 2.0 * m[2][2]) / SQRT6;
        let a1 = (m[0][2] + m[2][0]) / SQRT2;
        let a2 = (m[1][2] + m[2][1]) / SQRT2;
        let a3 = (m[0][0] - m[1][1]) / SQRT2;
        let a4 = (m[0][1] + m[1][0]) / SQRT2;
        Self { a: [a0, a1, a2, a3, a4] }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.a.iter().zip(other.a.iter()).map(|(x, y)| x * y).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut a = self.a;
        a.iter_mut().for_each(|x| *x *= s);
        Self { a }
    }

    /// tr(Q^3), which equals 3 det(Q) for traceless Q.
    pub fn tr_cube(&self) -> f64 {
        3.0 * det3(&self.to_matrix())
    }
}

impl Add for QTensor {
    type Output = QTensor;
    fn add(self, rhs: QTensor) -> QTensor {
        let mut a = self.a;
        a.iter_mut().zip(rhs.a).for_each(|(x, y)| *x += y);
        QTensor { a }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    fn sub(self, rhs: QTensor) -> QTensor {
        let mut a = self.a;
        a.iter_mut().zip(rhs.a).for_each(|(x, y)| *x -= y);
        QTensor { a }
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    fn neg(self) -> QTensor {
        self.scale(-1.0)
    }
}

impl Mul<QTensor> for f64 {
    type Output = QTensor;
    fn mul(self, rhs: QTensor) -> QTensor {
        rhs.scale(self)
    }
}

/// A point of R + C + C: the degree-(0,1,2) split of a Q-tensor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitPoint {
    pub t: f64,
    pub zeta1: Complex64,
    pub zeta2: Complex64,
}

impl SplitPoint {
    pub const fn new(t: f64, zeta1: Complex64, zeta2: Complex64) -> Self {
        Self { t, zeta1, zeta2 }
    }

    pub fn from_array(v: [f64; 5]) -> Self {
        Self {
            t: v[0],
            zeta1: Complex64::new(v[1], v[2]),
            zeta2: Complex64::new(v[3], v[4]),
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.t, self.zeta1.re, self.zeta1.im, self.zeta2.re, self.zeta2.im]
    }

    /// Real inner product of the underlying R^5.
    pub fn dot(&self, o: &Self) -> f64 {
        self.t * o.t + (self.zeta1.conj() * o.zeta1).re + (self.zeta2.conj() * o.zeta2).re
    }

    pub fn norm_sqr(&self) -> f64 {
        self.t * self.t + self.zeta1.norm_sqr() + self.zeta2.norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.t * s, self.zeta1 * s, self.zeta2 * s)
    }

    /// Degree-(0,1,2) action of the rotation by `alpha`.
    pub fn rotate(&self, alpha: f64) -> Self {
        Self::new(
            self.t,
            self.zeta1 * Complex64::from_polar(1.0, alpha),
            self.zeta2 * Complex64::from_polar(1.0, 2.0 * alpha),
        )
    }

    pub fn normalized(&self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn distance(&self, o: &Self) -> f64 {
        (*self - *o).norm()
    }
}

impl Add for SplitPoint {
    type Output = SplitPoint;
    fn add(self, o: SplitPoint) -> SplitPoint {
        SplitPoint::new(self.t + o.t, self.zeta1 + o.zeta1, self.zeta2 + o.zeta2)
    }
}

impl Sub for SplitPoint {
    type Output = SplitPoint;
    fn sub(self, o: SplitPoint) -> SplitPoint {
        SplitPoint::new(self.t - o.t, self.zeta1 - o.zeta1, self.zeta2 - o.zeta2)
    }
}

impl Neg for SplitPoint {
    type Output = SplitPoint;
    fn neg(self) -> SplitPoint {
        self.scale(-1.0)
    }
}

impl Mul<SplitPoint> for f64 {
    type Output = SplitPoint;
    fn mul(self, rhs: SplitPoint) -> SplitPoint {
        rhs.scale(self)
    }
}

pub fn split_iota(q: &QTensor) -> SplitPoint {
    SplitPoint::from_array(q.a)
}

pub fn join_iota(p: &SplitPoint) -> QTensor {
    QTensor::new(p.to_array())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub a2: f64,
    pub b2: f64,
    pub c2: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

/// Returns `(s_plus, lambda)` for the bulk constants.
pub fn material_params(p: &MaterialParams) -> Result<(f64, f64), TensorError> {
    for (name, v) in [("a2", p.a2), ("b2", p.b2), ("c2", p.c2), ("L", p.l)] {
        if !(v > 0.0) {
            return Err(TensorError::NonPositiveParam(name));
        }
    }
    let s_plus = (p.b2 + (p.b2 * p.b2 + 24.0 * p.a2 * p.c2).sqrt()) / (4.0 * p.c2);
    let lambda = (2.0f64 / 3.0).sqrt() * (p.b2 / p.l) * s_plus;
    Ok((s_plus, lambda))
}

const CLAMP_TOL: f64 = 1e-12;
const ZERO_TOL: f64 = 1e-14;
const UNIT_TOL: f64 = 1e-8;

/// Signed biaxiality sqrt6 tr(Q^3)/|Q|^3.
pub fn biaxiality(q: &QTensor) -> Result<f64, TensorError> {
    let n = q.norm();
    if n <= ZERO_TOL {
        return Err(TensorError::ZeroTensor(n));
    }
    let b = SQRT6 * q.tr_cube() / (n * n * n);
    if b.abs() > 1.0 + CLAMP_TOL {
        return Err(TensorError::BiaxialityOvershoot(b));
    }
    Ok(b.clamp(-1.0, 1.0))
}

fn check_unit(q: &QTensor) -> Result<(), TensorError> {
    let n = q.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(TensorError::NotUnitNorm(n));
    }
    Ok(())
}

/// Reduced potential (1 - beta)/(3 sqrt6) on the unit sphere.
pub fn potential_w(q: &QTensor) -> Result<f64, TensorError> {
    check_unit(q)?;
    Ok((1.0 - biaxiality(q)?) / (3.0 * SQRT6))
}

/// R_alpha Q R_alpha^T for the rotation by `alpha` about x3.
pub fn rotate(q: &QTensor, alpha: f64) -> QTensor {
    let (s, c) = alpha.sin_cos();
    let r = [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    let m = q.to_matrix();
    let rm = matmul(&r, &m);
    let rt = transpose(&r);
    QTensor::from_matrix(&matmul(&rm, &rt))
}

/// sqrt(3/2) (v v^T - I/3) for a unit director.
pub fn uniaxial_from_director(v: [f64; 3]) -> Result<QTensor, TensorError> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(TensorError::NotUnitVector(n));
    }
    Ok(uniaxial_unchecked(v))
}

pub(crate) fn uniaxial_unchecked(v: [f64; 3]) -> QTensor {
    let k = (1.5f64).sqrt();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = k * (v[i] * v[j] - if i == j { 1.0 / 3.0 } else { 0.0 });
        }
    }
    QTensor::from_matrix(&m)
}

/// -(Q^2 - I/3 - tr(Q^3) Q), the tangential gradient of W on the sphere up to sign.
pub fn tangential_potential_gradient(q: &QTensor) -> Result<QTensor, TensorError> {
    check_unit(q)?;
    let m = q.to_matrix();
    let q2 = QTensor::from_matrix(&matmul(&m, &m));
    Ok(-(q2 - q.scale(q.tr_cube())))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigensystem {
    /// Ascending eigenvalues.
    pub values: [f64; 3],
    /// `vectors[k]` is the unit eigenvector for `values[k]`.
    pub vectors: [[f64; 3]; 3],
}

/// Eigen-decomposition of Q: closed-form trigonometric roots, Jacobi sweeps near degeneracy.
pub fn eigensystem(q: &QTensor) -> Eigensystem {
    sym_eigensystem(&q.to_matrix())
}

pub fn sym_eigensystem(m: &Mat3) -> Eigensystem {
    let scale = m.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return Eigensystem {
            values: [0.0; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
    }
    let tr = m[0][0] + m[1][1] + m[2][2];
    let q = tr / 3.0;
    let mut b = *m;
    for (i, row) in b.iter_mut().enumerate() {
        row[i] -= q;
    }
    let p2 = (b.iter().flatten().map(|x| x * x).sum::<f64>()) / 6.0;
    let p = p2.sqrt();
    if p <= 1e-14 * scale {
        return Eigensystem {
            values: [q; 3],
            vectors: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
    }
    let bn = b.map(|row| row.map(|x| x / p));
    let r = (det3(&bn) / 2.0).clamp(-1.0, 1.0);
    // r = +-1 exactly when two eigenvalues coincide; the cross-product vectors lose
    // accuracy there, so the iteration takes over.
    if 1.0 - r.abs() < 1e-6 {
        return jacobi_eigensystem(m);
    }
    let phi = r.acos() / 3.0;
    let l_max = q + 2.0 * p * phi.cos();
    let l_min = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
    let l_mid = tr - l_max - l_min;
    let values = [l_min, l_mid, l_max];
    let mut vectors = [[0.0; 3]; 3];
    for (k, &lam) in values.iter().enumerate() {
        vectors[k] = null_vector(m, lam);
    }
    // Re-orthogonalize the middle vector against the outer two.
    vectors[1] = normalize3(cross(&vectors[2], &vectors[0]));
    let mut out = Eigensystem { values, vectors };
    orient(&mut out);
    out
}

fn null_vector(m: &Mat3, lam: f64) -> [f64; 3] {
    let r0 = [m[0][0] - lam, m[0][1], m[0][2]];
    let r1 = [m[1][0], m[1][1] - lam, m[1][2]];
    let r2 = [m[2][0], m[2][1], m[2][2] - lam];
    let c = [cross(&r0, &r1), cross(&r0, &r2), cross(&r1, &r2)];
    let best = c
        .iter()
        .max_by(|a, b| norm3(a).total_cmp(&norm3(b)))
        .copied()
        .unwrap_or([0.0, 0.0, 1.0]);
    normalize3(best)
}

/// Cyclic Jacobi rotations; used for (nearly) degenerate spectra.
pub fn jacobi_eigensystem(m: &Mat3) -> Eigensystem {
    let mut a = *m;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-34 {
            break;
        }
        for (p, qi) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][qi].abs() < 1e-300 {
                continue;
            }
            let theta = (a[qi][qi] - a[p][p]) / (2.0 * a[p][qi]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][qi];
                a[k][p] = c * akp - s * akq;
                a[k][qi] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[qi][k];
                a[p][k] = c * apk - s * aqk;
                a[qi][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[qi];
                row[p] = c * vp - s * vq;
                row[qi] = s * vp + c * vq;
            }
        }
    }
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values = idx.map(|i| a[i][i]);
    let vectors = idx.map(|i| [v[0][i], v[1][i], v[2][i]]);
    let mut out = Eigensystem { values, vectors };
    orient(&mut out);
    out
}

/// Largest-magnitude component positive (first one on ties).
fn orient(e: &mut Eigensystem) {
    for v in e.vectors.iter_mut() {
        let mut k = 0;
        for i in 1..3 {
            if v[i].abs() > v[k].abs() + 1e-14 {
                k = i;
            }
        }
        if v[k] < 0.0 {
            *v = v.map(|x| -x);
        }
    }
}

pub fn matmul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn normalize3(a: [f64; 3]) -> [f64; 3] {
    let n = norm3(&a);
    a.map(|x| x / n)
}
