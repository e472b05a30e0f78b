//! Exact 2x2 complex matrix algebra.
//!
//! Holds the Pauli matrices, the closed-form matrix exponential, the invariant
//! `nu = sqrt(det A - (tr A / 2)^2)` and the structural tests that separate
//! generator matrices from boundary matrices.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lambda::AdmissibleLambda;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Absolute tolerance becomes relative once magnitudes exceed this.
const RELATIVE_THRESHOLD: f64 = 1e3;

/// Tolerance for classifying `nu` as an integer multiple of pi.
pub const PI_CLASS_TOL: f64 = 1e-9;

/// Below this modulus `sin(nu)/nu` is evaluated by its Taylor series.
const SINC_SERIES_RADIUS: f64 = 1e-4;

/// Compares two complex numbers, switching to a relative test for large values.
pub fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale > RELATIVE_THRESHOLD {
        diff <= tol * scale
    } else {
        diff <= tol
    }
}

/// A 2x2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub m: [[Complex64; 2]; 2],
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]
        )
    }
}

impl Mat2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self {
            m: [[a, b], [c, d]],
        }
    }

    pub const fn zero() -> Self {
        Self::new(ZERO, ZERO, ZERO, ZERO)
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn sigma1() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub const fn sigma2() -> Self {
        Self::new(ZERO, Complex64::new(0.0, -1.0), I, ZERO)
    }

    pub const fn sigma3() -> Self {
        Self::new(ONE, ZERO, ZERO, Complex64::new(-1.0, 0.0))
    }

    pub fn scalar(s: Complex64) -> Self {
        Self::new(s, ZERO, ZERO, s)
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Self::new(a, ZERO, ZERO, d)
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[r][c]
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::new(
            self.m[0][0].conj(),
            self.m[1][0].conj(),
            self.m[0][1].conj(),
            self.m[1][1].conj(),
        )
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if det.norm() <= 1e-14 * scale * scale {
            return None;
        }
        let inv = det.inv();
        Some(Self::new(
            self.m[1][1] * inv,
            -self.m[0][1] * inv,
            -self.m[1][0] * inv,
            self.m[0][0] * inv,
        ))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(
            self.m[0][0] * s,
            self.m[0][1] * s,
            self.m[1][0] * s,
            self.m[1][1] * s,
        )
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.m[0][0], self.m[0][1], self.m[1][0], self.m[1][1]]
    }

    pub fn is_finite(&self) -> bool {
        self.entries()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest entrywise distance.
    pub fn max_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Entrywise comparison; absolute unless magnitudes exceed 1e3.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .all(|(a, b)| close(*a, *b, tol))
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + rhs.m[0][0],
            self.m[0][1] + rhs.m[0][1],
            self.m[1][0] + rhs.m[1][0],
            self.m[1][1] + rhs.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] - rhs.m[0][0],
            self.m[0][1] - rhs.m[0][1],
            self.m[1][0] - rhs.m[1][0],
            self.m[1][1] - rhs.m[1][1],
        )
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &rhs.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Mul<Complex64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Complex64) -> Mat2 {
        self.scale(rhs)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: f64) -> Mat2 {
        self.scale(rhs.into())
    }
}

impl Mul<[Complex64; 2]> for Mat2 {
    type Output = [Complex64; 2];
    fn mul(self, v: [Complex64; 2]) -> [Complex64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }
}

/// `sin(z)/z` with the removable singularity filled in.
pub fn sinc(z: Complex64) -> Complex64 {
    if z.norm() < SINC_SERIES_RADIUS {
        let z2 = z * z;
        ONE - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `det A - (tr A / 2)^2`, written without the cancellation of the naive form.
fn nu_squared_raw(a: &Mat2) -> Complex64 {
    let p = (a.m[0][0] - a.m[1][1]) * 0.5;
    -(p * p + a.m[0][1] * a.m[1][0])
}

/// Matrix exponential through the decomposition into a multiple of the
/// identity and a traceless part whose square is scalar.
pub fn exp2(a: &Mat2) -> Mat2 {
    let half_trace = a.trace() * 0.5;
    let traceless = *a - Mat2::scalar(half_trace);
    let nu = nu_squared_raw(a).sqrt();
    let body = Mat2::scalar(nu.cos()) + traceless * sinc(nu);
    body * half_trace.exp()
}

/// Classification of the invariant `nu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NuClass {
    RealNonPi,
    /// `nu = m * pi` with `m >= 0`.
    PiMultiple(i64),
    /// `nu = i g` with `g > 0`.
    Imaginary,
}

/// The invariant `nu` with its principal square root and classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuBranch {
    pub nu_squared: f64,
    pub class: NuClass,
    pub nu: Complex64,
}

impl NuBranch {
    pub fn from_nu_squared(nu_squared: f64) -> Self {
        if nu_squared < 0.0 {
            return Self {
                nu_squared,
                class: NuClass::Imaginary,
                nu: Complex64::new(0.0, (-nu_squared).sqrt()),
            };
        }
        let nu = nu_squared.sqrt();
        let m = (nu / PI).round();
        let class = if (nu - m * PI).abs() < PI_CLASS_TOL {
            NuClass::PiMultiple(m as i64)
        } else {
            NuClass::RealNonPi
        };
        Self {
            nu_squared,
            class,
            nu: nu.into(),
        }
    }

    /// Builds the branch from `nu` itself; only real or purely imaginary
    /// values are meaningful.
    pub fn from_nu(nu: Complex64) -> Self {
        Self::from_nu_squared((nu * nu).re)
    }

    pub fn is_zero(&self) -> bool {
        self.nu_squared == 0.0
    }
}

/// Computes `nu` for a matrix whose `nu^2` is real.
pub fn nu_of(a: &Mat2) -> Result<NuBranch> {
    let raw = nu_squared_raw(a);
    let tol = if raw.re.abs() > RELATIVE_THRESHOLD {
        1e-12 * raw.re.abs()
    } else {
        1e-12
    };
    if raw.im.abs() > tol {
        return Err(Error::NonRealNuSquared { imag: raw.im });
    }
    Ok(NuBranch::from_nu_squared(raw.re))
}

/// `i sigma1 A sigma1`.
pub fn tilde(a: &Mat2) -> Mat2 {
    (Mat2::sigma1() * *a * Mat2::sigma1()) * I
}

/// True iff `sigma1 A sigma1 = -A^*`, i.e. `i sigma1 A` is hermitian.
pub fn check_generator(a: &Mat2) -> bool {
    let lhs = Mat2::sigma1() * *a * Mat2::sigma1();
    lhs.approx_eq(&(-a.dagger()), 1e-12)
}

/// Verifies `L^* sigma1 L = sigma1` and extracts `(phi, alpha, beta, gamma, delta)`
/// with `phi` in `[0, pi)`.
pub fn check_admissible(l: &Mat2) -> Result<AdmissibleLambda> {
    if !l.is_finite() {
        return Err(Error::NotAdmissible {
            reason: "non-finite entries".into(),
        });
    }
    let form = l.dagger() * Mat2::sigma1() * *l;
    if !form.approx_eq(&Mat2::sigma1(), 1e-12) {
        return Err(Error::NotAdmissible {
            reason: format!(
                "L^* sigma1 L differs from sigma1 by {:e}",
                form.max_diff(&Mat2::sigma1())
            ),
        });
    }
    AdmissibleLambda::from_matrix(l)
}
