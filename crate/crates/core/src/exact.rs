//! Free Dirac resolvent kernel (massless), the Krein matrices `M^Lambda(z)` and
//! `M(z)`, and the exact resolvent kernel of the point interaction.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lambda::{AdmissibleLambda, GeneratorA, GeneratorClass};
use crate::matrix::Mat2;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest admissible `|Im z|`.
pub const MIN_IM_Z: f64 = 1e-3;

/// A point `z` off the real axis together with `zeta = sgn(Im z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    z: Complex64,
    zeta: i8,
}

impl SpectralPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.im.abs() >= MIN_IM_Z) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidSpectralPoint { re: z.re, im: z.im });
        }
        Ok(Self {
            z,
            zeta: if z.im > 0.0 { 1 } else { -1 },
        })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn zeta(&self) -> f64 {
        self.zeta as f64
    }

    pub fn conj(&self) -> Self {
        Self {
            z: self.z.conj(),
            zeta: -self.zeta,
        }
    }
}

/// `sgn` with `sgn(0) = 0`.
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `(i/2)(zeta I + s sigma1) e^{i z zeta r}` for a sign `s` and distance `r >= 0`.
fn kernel_piece(p: &SpectralPoint, s: f64, r: f64) -> Mat2 {
    let zeta = p.zeta();
    let phase = (I * p.z * zeta * r).exp() * (0.5 * I);
    let diag = phase * zeta;
    let off = phase * s;
    Mat2::new(diag, off, off, diag)
}

/// Free resolvent kernel `G_z(x, y)`.
pub fn free_kernel(p: &SpectralPoint, x: f64, y: f64) -> Mat2 {
    kernel_piece(p, sgn(x - y), (x - y).abs())
}

/// `G_{scale z}(x, y)`; at `scale = 0` this is the limit kernel
/// `(i/2)(zeta I + sgn(x - y) sigma1)`.
pub fn free_kernel_rescaled(p: &SpectralPoint, scale: f64, x: f64, y: f64) -> Mat2 {
    kernel_piece(p, sgn(x - y), scale * (x - y).abs())
}

/// Which one-sided limit at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// `G_z(0+-, y)`.
pub fn free_kernel_at_origin(p: &SpectralPoint, side: Side, y: f64) -> Mat2 {
    let s = if y != 0.0 {
        sgn(-y)
    } else {
        match side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    };
    kernel_piece(p, s, y.abs())
}

/// Krein matrix of the boundary condition `psi(0+) = Lambda psi(0-)`.
pub fn m_lambda(p: &SpectralPoint, l: &AdmissibleLambda) -> Result<Mat2> {
    let zeta = p.zeta();
    let den = Complex64::new(zeta * (l.beta - l.gamma), l.alpha + l.delta);
    if den.norm() < 1e-12 {
        return Err(Error::SingularDenominator {
            modulus: den.norm(),
        });
    }
    let diag = zeta * (l.alpha + l.delta - 2.0 * l.phi.cos());
    let sin_phi = l.phi.sin();
    let m = Mat2::new(
        Complex64::new(diag, 2.0 * l.gamma),
        Complex64::new(l.alpha - l.delta, -2.0 * sin_phi),
        Complex64::new(l.delta - l.alpha, -2.0 * sin_phi),
        Complex64::new(diag, -2.0 * l.beta),
    );
    Ok(m * den.inv())
}

/// Krein matrix obtained from the regularized problem, parameterized by the
/// renormalized coupling `eta`.
pub fn m_closed(p: &SpectralPoint, a: &GeneratorA, eta: f64) -> Result<Mat2> {
    let zeta = p.zeta();
    match a.class {
        GeneratorClass::Traceless => {
            let nu2 = a.nu.nu_squared;
            let den = Complex64::new(0.5 * zeta * eta * (a.b + a.c), 1.0 - 0.25 * eta * eta * nu2);
            if den.norm() < 1e-12 {
                return Err(Error::SingularDenominator {
                    modulus: den.norm(),
                });
            }
            let diag = 0.5 * zeta * eta * eta * nu2;
            let ar = a.a.re;
            let m = Mat2::new(
                Complex64::new(diag, eta * a.c),
                Complex64::new(-ar * eta, 0.0),
                Complex64::new(ar * eta, 0.0),
                Complex64::new(diag, eta * a.b),
            );
            Ok(m * (-den.inv()))
        }
        GeneratorClass::Phase => {
            // t = phi eta / 2 equals tan(phi/2) at the renormalized coupling.
            let t = 0.5 * a.phi() * eta;
            let pref = -2.0 * t / (1.0 + t * t);
            let d = Complex64::new(0.0, zeta * t);
            let one = Complex64::new(1.0, 0.0);
            Ok(Mat2::new(d, one, one, d) * pref)
        }
        GeneratorClass::General => Err(Error::UnsupportedClass {
            class: a.class.name(),
        }),
    }
}

/// What a resolvent kernel describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Interaction {
    Free,
    PointInteraction(AdmissibleLambda),
    Approx { a: GeneratorA, eps: f64 },
}

/// A matrix-valued integral kernel of a resolvent.
pub trait KernelField: Sync {
    fn spectral_point(&self) -> SpectralPoint;
    fn interaction(&self) -> Interaction;
    fn eval(&self, x: f64, y: f64) -> Mat2;
}

/// Exact resolvent kernel `G_z(x,y) - G_z(x,0) M G_z(0,y)`.
#[derive(Debug, Clone)]
pub struct ResolventKernelField {
    point: SpectralPoint,
    interaction: Interaction,
    m: Mat2,
}

impl ResolventKernelField {
    pub fn free(p: SpectralPoint) -> Self {
        Self {
            point: p,
            interaction: Interaction::Free,
            m: Mat2::zero(),
        }
    }

    /// The Krein correction matrix (zero for the free kernel).
    pub fn krein_matrix(&self) -> Mat2 {
        self.m
    }

    /// The rank-two correction `G_z(x,0) M G_z(0,y)`.
    pub fn correction(&self, x: f64, y: f64) -> Mat2 {
        free_kernel(&self.point, x, 0.0) * self.m * free_kernel(&self.point, 0.0, y)
    }

    /// `R(0+-, y)` assembled from the analytic one-sided pieces.
    pub fn at_origin(&self, side: Side, y: f64) -> Mat2 {
        let g0 = free_kernel_at_origin(&self.point, side, 0.0);
        free_kernel_at_origin(&self.point, side, y) - g0 * self.m * free_kernel(&self.point, 0.0, y)
    }
}

impl KernelField for ResolventKernelField {
    fn spectral_point(&self) -> SpectralPoint {
        self.point
    }

    fn interaction(&self) -> Interaction {
        self.interaction.clone()
    }

    fn eval(&self, x: f64, y: f64) -> Mat2 {
        free_kernel(&self.point, x, y) - self.correction(x, y)
    }
}

/// Resolvent kernel of the Dirac operator with boundary condition `psi(0+) = Lambda psi(0-)`.
pub fn point_kernel(p: &SpectralPoint, l: &AdmissibleLambda) -> Result<ResolventKernelField> {
    Ok(ResolventKernelField {
        point: *p,
        interaction: Interaction::PointInteraction(*l),
        m: m_lambda(p, l)?,
    })
}
