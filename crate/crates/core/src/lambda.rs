//! Passage between boundary matrices `Lambda` and their generators `A`
//! (`Lambda = exp(A)` with `i sigma1 A` hermitian), the renormalization matrix
//! `W^A` and the coupling scaling law.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{check_generator, exp2, sinc, Mat2, NuBranch};

/// `(alpha + delta) / 2` within this distance of +-1 selects the parabolic case.
const UNIT_TRACE_TOL: f64 = 1e-12;

/// Boundary matrix `Lambda = e^{i phi} [[alpha, i beta], [-i gamma, delta]]`
/// with `alpha delta - beta gamma = 1` and `phi` in `[0, pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibleLambda {
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

fn unimodular_defect(alpha: f64, beta: f64, gamma: f64, delta: f64) -> f64 {
    let det = alpha * delta - beta * gamma;
    let scale = (alpha * delta).abs().max((beta * gamma).abs());
    if scale > 1e3 {
        (det - 1.0).abs() / scale
    } else {
        (det - 1.0).abs()
    }
}

impl AdmissibleLambda {
    pub fn new(phi: f64, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        if ![phi, alpha, beta, gamma, delta]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::NotAdmissible {
                reason: "non-finite parameter".into(),
            });
        }
        if !(0.0..PI).contains(&phi) {
            return Err(Error::NotAdmissible {
                reason: format!("phi = {phi} outside [0, pi)"),
            });
        }
        let defect = unimodular_defect(alpha, beta, gamma, delta);
        if defect > 1e-10 {
            return Err(Error::NotAdmissible {
                reason: format!("alpha*delta - beta*gamma deviates from 1 by {defect:e}"),
            });
        }
        Ok(Self {
            phi,
            alpha,
            beta,
            gamma,
            delta,
        })
    }

    /// Like [`AdmissibleLambda::new`] but folds any real `phi` into `[0, pi)`,
    /// absorbing the sign into the real parameters.
    pub fn with_any_phase(phi: f64, alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let folded = phi.rem_euclid(2.0 * PI);
        let (phi, sign) = if folded >= PI {
            (folded - PI, -1.0)
        } else {
            (folded, 1.0)
        };
        let (phi, sign) = if PI - phi < 1e-12 {
            (0.0, -sign)
        } else {
            (phi, sign)
        };
        Self::new(phi, sign * alpha, sign * beta, sign * gamma, sign * delta)
    }

    pub fn identity() -> Self {
        Self {
            phi: 0.0,
            alpha: 1.0,
            beta: 0.0,
            gamma: 0.0,
            delta: 1.0,
        }
    }

    /// Extracts the parameters of a matrix already known to satisfy
    /// `L^* sigma1 L = sigma1`. The phase comes from `det L = e^{2 i phi}`.
    pub(crate) fn from_matrix(l: &Mat2) -> Result<Self> {
        let det = l.det();
        let mut phi = (0.5 * det.arg()).rem_euclid(PI);
        if PI - phi < 1e-12 {
            phi -= PI;
        }
        let rot = l.scale(Complex64::from_polar(1.0, -phi));
        let alpha = rot.m[0][0].re;
        let delta = rot.m[1][1].re;
        let beta = rot.m[0][1].im;
        let gamma = -rot.m[1][0].im;
        let stray = [
            rot.m[0][0].im,
            rot.m[1][1].im,
            rot.m[0][1].re,
            rot.m[1][0].re,
        ];
        let scale = l.max_abs().max(1.0);
        if let Some(bad) = stray.iter().find(|x| x.abs() > 1e-10 * scale) {
            return Err(Error::NotAdmissible {
                reason: format!("entry off the admissible form by {bad:e}"),
            });
        }
        Self::new(phi.max(0.0), alpha, beta, gamma, delta)
    }

    pub fn matrix(&self) -> Mat2 {
        let m = Mat2::new(
            self.alpha.into(),
            Complex64::new(0.0, self.beta),
            Complex64::new(0.0, -self.gamma),
            self.delta.into(),
        );
        m.scale(Complex64::from_polar(1.0, self.phi))
    }

    /// `(alpha + delta) / 2`, the quantity that selects the logarithm case.
    pub fn half_trace(&self) -> f64 {
        0.5 * (self.alpha + self.delta)
    }

    pub fn is_multiple_of_identity(&self) -> bool {
        self.beta.abs() <= 1e-10
            && self.gamma.abs() <= 1e-10
            && (self.alpha - self.delta).abs() <= 1e-10
    }
}

/// Boundary matrix of the electrostatic interaction of strength `eta`.
pub fn electrostatic_lambda(eta: f64) -> AdmissibleLambda {
    let q = 0.25 * eta * eta;
    let diag = (1.0 - q) / (1.0 + q);
    let off = eta / (1.0 + q);
    AdmissibleLambda {
        phi: 0.0,
        alpha: diag,
        beta: -off,
        gamma: off,
        delta: diag,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorClass {
    /// `A = i phi I`.
    Phase,
    /// `A = [[a, ib], [ic, -a]]` with `a` real.
    Traceless,
    /// `A = [[a, ib], [ic, -conj(a)]]` with complex `a`.
    General,
}

impl GeneratorClass {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorClass::Phase => "phase",
            GeneratorClass::Traceless => "traceless",
            GeneratorClass::General => "general",
        }
    }
}

/// Generator `A = [[a, ib], [ic, -conj(a)]]` with `b, c` real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorA {
    pub a: Complex64,
    pub b: f64,
    pub c: f64,
    pub nu: NuBranch,
    pub class: GeneratorClass,
}

impl GeneratorA {
    pub fn new(a: Complex64, b: f64, c: f64) -> Self {
        let nu = NuBranch::from_nu_squared(b * c - a.re * a.re);
        let tiny = |x: f64| x.abs() <= 1e-15;
        let class = if tiny(a.re) && tiny(b) && tiny(c) {
            GeneratorClass::Phase
        } else if tiny(a.im) {
            GeneratorClass::Traceless
        } else {
            GeneratorClass::General
        };
        Self { a, b, c, nu, class }
    }

    /// `A = i phi I`.
    pub fn phase(phi: f64) -> Self {
        Self::new(Complex64::new(0.0, phi), 0.0, 0.0)
    }

    /// `A = [[a, ib], [ic, -a]]` with real `a`.
    pub fn traceless(a: f64, b: f64, c: f64) -> Self {
        Self::new(a.into(), b, c)
    }

    pub fn from_matrix(m: &Mat2) -> Result<Self> {
        if !check_generator(m) {
            return Err(Error::NotGenerator {
                reason: format!(
                    "sigma1 A sigma1 + A^* = {:?}",
                    Mat2::sigma1() * *m * Mat2::sigma1() + m.dagger()
                ),
            });
        }
        Ok(Self::new(m.m[0][0], m.m[0][1].im, m.m[1][0].im))
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            self.a,
            Complex64::new(0.0, self.b),
            Complex64::new(0.0, self.c),
            -self.a.conj(),
        )
    }

    /// `Im a`, the phase of `exp(A)`.
    pub fn phi(&self) -> f64 {
        self.a.im
    }

    /// The parameter entering the renormalized coupling: `nu` for traceless
    /// generators and `phi` for phase generators (`(i sigma1 A sigma1)^2` is
    /// `nu^2 I` resp. `phi^2 I`).
    pub fn coupling_nu(&self) -> Result<NuBranch> {
        match self.class {
            GeneratorClass::Phase => Ok(NuBranch::from_nu_squared(self.a.im * self.a.im)),
            GeneratorClass::Traceless => Ok(self.nu),
            GeneratorClass::General => Err(Error::UnsupportedClass {
                class: self.class.name(),
            }),
        }
    }

    pub fn exp(&self) -> Mat2 {
        exp2(&self.matrix())
    }
}

/// Which logarithm of `Lambda` to return.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BranchSelector {
    /// `Im a = phi + n pi`.
    pub n: i64,
    /// Root of `(-1)^n cos(nu) = (alpha + delta)/2` in `[0, 2 pi)`: 0 picks the
    /// root in `[0, pi]`, 1 the other one. Only used when `|alpha + delta| < 2`.
    pub root: u8,
    /// `nu = m pi` family for multiples of the identity.
    pub m: i64,
    /// Free parameter `s` of the `m != 0` family: `b = m pi e^s`, `c = m pi e^-s`.
    pub family_param: Option<f64>,
}

impl BranchSelector {
    pub fn n(n: i64) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    pub fn with_root(mut self, root: u8) -> Self {
        self.root = root;
        self
    }

    pub fn with_m(mut self, m: i64, family_param: Option<f64>) -> Self {
        self.m = m;
        self.family_param = family_param;
        self
    }
}

fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Returns a generator `A` with `exp(A) = Lambda` and `sigma1 A sigma1 = -A^*`,
/// on the branch picked by `sel`.
pub fn log_branches(l: &AdmissibleLambda, sel: BranchSelector) -> Result<GeneratorA> {
    let t = l.half_trace();
    let half_diff = 0.5 * (l.alpha - l.delta);
    let s = parity_sign(sel.n);
    let im_a = l.phi + sel.n as f64 * PI;
    if sel.root > 1 {
        return Err(Error::InvalidBranch {
            reason: format!("root index {} (expected 0 or 1)", sel.root),
        });
    }
    let parabolic = (t.abs() - 1.0).abs() <= UNIT_TRACE_TOL;
    if sel.m != 0 && !(parabolic && l.is_multiple_of_identity()) {
        return Err(Error::NonIdentityWithNonzeroM { m: sel.m });
    }
    if sel.root == 1 && t.abs() >= 1.0 - UNIT_TRACE_TOL {
        return Err(Error::InvalidBranch {
            reason: "root 1 only exists when |alpha + delta| < 2".into(),
        });
    }

    if parabolic {
        // exp(A) = e^{i Im a} (-1)^m (I + ...) must reproduce e^{i phi} t I.
        let even_needed = t > 0.0;
        if ((sel.n + sel.m).rem_euclid(2) == 0) != even_needed {
            return Err(Error::ParityMismatch {
                n: sel.n,
                expected: if even_needed {
                    "n + m even"
                } else {
                    "n + m odd"
                },
            });
        }
        if sel.m == 0 {
            return Ok(GeneratorA::new(
                Complex64::new(s * half_diff, im_a),
                s * l.beta,
                -s * l.gamma,
            ));
        }
        let spread = sel.family_param.unwrap_or(0.0);
        let scale = sel.m as f64 * PI;
        return Ok(GeneratorA::new(
            Complex64::new(0.0, im_a),
            scale * spread.exp(),
            scale * (-spread).exp(),
        ));
    }

    if t.abs() < 1.0 {
        let nu0 = (s * t).acos();
        let nu = if sel.root == 0 { nu0 } else { 2.0 * PI - nu0 };
        debug_assert!(nu.sin().abs() > 0.0);
        let k = nu / nu.sin();
        return Ok(GeneratorA::new(
            Complex64::new(s * half_diff * k, im_a),
            s * l.beta * k,
            -s * l.gamma * k,
        ));
    }

    let even_needed = t > 0.0;
    if (sel.n.rem_euclid(2) == 0) != even_needed {
        return Err(Error::ParityMismatch {
            n: sel.n,
            expected: if even_needed { "n even" } else { "n odd" },
        });
    }
    let g = (s * t).acosh();
    let k = g / g.sinh();
    Ok(GeneratorA::new(
        Complex64::new(s * half_diff * k, im_a),
        s * l.beta * k,
        -s * l.gamma * k,
    ))
}

/// `2 (e^A - I)(e^A + I)^{-1}` computed from the exponential directly.
pub fn w_matrix_direct(a: &GeneratorA) -> Option<Mat2> {
    let e = a.exp();
    let inv = (e + Mat2::identity()).inverse()?;
    Some((e - Mat2::identity()) * inv * 2.0)
}

/// The renormalization matrix `W^A = 2 (e^A - I)(e^A + I)^{-1}` in closed form,
/// cross-checked against the direct evaluation.
pub fn w_matrix(a: &GeneratorA) -> Result<Mat2> {
    let phi = a.phi();
    let cos_nu = a.nu.nu.cos().re;
    let sinc_nu = sinc(a.nu.nu).re;
    let den = cos_nu + phi.cos();
    if den.abs() < 1e-10 {
        return Err(Error::PoleOfW { value: den });
    }
    let i_sin_phi = Complex64::new(0.0, phi.sin());
    let ra = a.a.re * sinc_nu;
    let w = Mat2::new(
        ra + i_sin_phi,
        Complex64::new(0.0, a.b * sinc_nu),
        Complex64::new(0.0, a.c * sinc_nu),
        -ra + i_sin_phi,
    ) * (2.0 / den);

    let direct = w_matrix_direct(a).ok_or(Error::PoleOfW { value: den })?;
    let tol = 1e-10 * w.max_abs().max(1.0) * (1.0 / den.abs()).max(1.0);
    let worst = w.max_diff(&direct);
    if worst > tol {
        return Err(Error::CrossCheck {
            reason: format!("closed-form W^A differs from 2(e^A-I)(e^A+I)^-1 by {worst:e}"),
        });
    }
    Ok(w)
}

/// Least-squares scalar `c` with `W ~ c A`, and the residual `|W - c A|_F`.
pub fn scalar_multiple(w: &Mat2, a: &Mat2) -> (Complex64, f64) {
    let num: Complex64 = a
        .entries()
        .iter()
        .zip(w.entries().iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    let den = a.norm_sqr();
    if den == 0.0 {
        return (Complex64::new(0.0, 0.0), w.frobenius());
    }
    let c = num / den;
    (c, (*w - *a * c).frobenius())
}

/// `(2/x) tan(t x / 2)` for `x` real or purely imaginary, with the `x -> 0`
/// limit `t`.
pub(crate) fn scaled_tan(x: Complex64, t: f64) -> Result<f64> {
    if x.norm() * t.abs() < 1e-8 {
        return Ok(t);
    }
    if x.im == 0.0 {
        let arg = 0.5 * t * x.re;
        let off = (arg / PI - 0.5).round();
        if (arg - (0.5 + off) * PI).abs() < 1e-9 {
            return Err(Error::PoleOfTan { arg });
        }
        return Ok(2.0 / x.re * arg.tan());
    }
    let g = x.im;
    Ok(2.0 / g * (0.5 * t * g).tanh())
}

/// Effective strength multiplier when the regularizing potential is scaled by `t`.
pub fn coupling_scale(a: &GeneratorA, t: f64) -> Result<f64> {
    match a.class {
        GeneratorClass::Phase => scaled_tan(Complex64::new(a.phi(), 0.0), t),
        GeneratorClass::Traceless => scaled_tan(a.nu.nu, t),
        GeneratorClass::General => Err(Error::UnsupportedClass {
            class: a.class.name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{check_admissible, NuClass};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn electrostatic_examples() {
        assert_eq!(electrostatic_lambda(0.0).matrix(), Mat2::identity());
        let l = electrostatic_lambda(2.0).matrix();
        assert!(l.approx_eq(
            &Mat2::new(c(0., 0.), c(0., -1.), c(0., -1.), c(0., 0.)),
            1e-15
        ));

        let theta = PI / 3.0;
        let l = electrostatic_lambda(2.0 * (theta / 2.0).tan()).matrix();
        let expected = Mat2::new(
            c(theta.cos(), 0.0),
            c(0.0, -theta.sin()),
            c(0.0, -theta.sin()),
            c(theta.cos(), 0.0),
        );
        assert!(l.approx_eq(&expected, 1e-15));
        check_admissible(&l).unwrap();
    }

    #[test]
    fn log_of_phase_identity() {
        let l = AdmissibleLambda::new(1.0, 1.0, 0.0, 0.0, 1.0).unwrap();
        let a = log_branches(&l, BranchSelector::default()).unwrap();
        assert_eq!(a.class, GeneratorClass::Phase);
        assert!(a.matrix().approx_eq(&Mat2::scalar(c(0.0, 1.0)), 1e-15));
    }

    #[test]
    fn log_of_electrostatic_is_minus_i_sigma1() {
        let l = electrostatic_lambda(2.0 * 0.5f64.tan());
        let a = log_branches(&l, BranchSelector::default()).unwrap();
        assert!(a
            .matrix()
            .approx_eq(&(Mat2::sigma1() * c(0.0, -1.0)), 1e-12));
        assert!(a.exp().approx_eq(&l.matrix(), 1e-12));
    }

    #[test]
    fn log_of_diagonal_counterexample() {
        let l = AdmissibleLambda::new(0.0, 2.0, 0.0, 0.0, 0.5).unwrap();
        let a = log_branches(&l, BranchSelector::default()).unwrap();
        let ln2 = 2f64.ln();
        assert!(a
            .matrix()
            .approx_eq(&Mat2::from_real(ln2, 0.0, 0.0, -ln2), 1e-14));
        assert_eq!(a.nu.class, NuClass::Imaginary);
        assert!((a.nu.nu_squared + ln2 * ln2).abs() < 1e-14);
        assert!(a.exp().approx_eq(&l.matrix(), 1e-12));
        assert!(check_generator(&a.matrix()));
    }

    #[test]
    fn hyperbolic_parity_is_enforced() {
        let l = AdmissibleLambda::new(0.0, 2.0, 0.0, 0.0, 0.5).unwrap();
        let r = log_branches(&l, BranchSelector::n(1));
        assert!(matches!(r, Err(Error::ParityMismatch { .. })));
        let l = AdmissibleLambda::new(0.3, -2.0, 0.0, 0.0, -0.5).unwrap();
        assert!(log_branches(&l, BranchSelector::n(0)).is_err());
        let a = log_branches(&l, BranchSelector::n(1)).unwrap();
        assert!(a.exp().approx_eq(&l.matrix(), 1e-12));
    }

    #[test]
    fn nonzero_m_needs_identity() {
        let l = AdmissibleLambda::new(0.0, 2.0, 0.0, 0.0, 0.5).unwrap();
        let r = log_branches(&l, BranchSelector::default().with_m(1, None));
        assert!(matches!(r, Err(Error::NonIdentityWithNonzeroM { m: 1 })));

        let l = AdmissibleLambda::new(0.4, 1.0, 0.0, 0.0, 1.0).unwrap();
        for (m, n) in [(1, 1), (2, 0), (-3, 1), (1, -1)] {
            let a = log_branches(&l, BranchSelector::n(n).with_m(m, Some(0.3))).unwrap();
            assert_eq!(a.nu.class, NuClass::PiMultiple(m.abs()));
            assert!(a.exp().approx_eq(&l.matrix(), 1e-12), "m={m} n={n}");
        }
        assert!(log_branches(&l, BranchSelector::n(0).with_m(1, None)).is_err());
    }

    #[test]
    fn both_cosine_roots_round_trip() {
        let l = AdmissibleLambda::new(0.7, 0.3, 1.1, -0.5, (1.0 + 1.1 * -0.5) / 0.3).unwrap();
        assert!(l.half_trace().abs() < 1.0);
        for n in [-1, 0, 1, 2] {
            for root in [0, 1] {
                let a = log_branches(&l, BranchSelector::n(n).with_root(root)).unwrap();
                assert!(a.exp().approx_eq(&l.matrix(), 1e-11), "n={n} root={root}");
                assert!(check_generator(&a.matrix()));
            }
        }
    }

    #[test]
    fn w_matrix_examples() {
        assert!(w_matrix(&GeneratorA::phase(0.0))
            .unwrap()
            .approx_eq(&Mat2::zero(), 1e-15));
        let w = w_matrix(&GeneratorA::phase(1.0)).unwrap();
        assert!(w.approx_eq(&Mat2::scalar(c(0.0, 2.0 * 0.5f64.tan())), 1e-14));
        let a = GeneratorA::traceless(0.0, -1.0, -1.0);
        let w = w_matrix(&a).unwrap();
        assert!(w.approx_eq(&(a.matrix() * (2.0 * 0.5f64.tan())), 1e-14));
    }

    #[test]
    fn w_matrix_pole() {
        // nu = pi, phi = 0: cos(nu) + cos(phi) = 0
        let a = GeneratorA::traceless(0.0, PI, PI);
        assert!(matches!(w_matrix(&a), Err(Error::PoleOfW { .. })));
    }

    #[test]
    fn renormalization_fixed_point_only_in_the_limit() {
        let small = GeneratorA::traceless(0.0, 1e-7, 1e-7);
        let w = w_matrix(&small).unwrap();
        assert!(w.approx_eq(&small.matrix(), 1e-9));
        let a = GeneratorA::traceless(0.0, 1.0, 1.0);
        assert!(!w_matrix(&a).unwrap().approx_eq(&a.matrix(), 1e-9));
    }

    #[test]
    fn coupling_scale_examples() {
        let a = GeneratorA::traceless(0.0, -1.0, -1.0);
        assert_eq!(coupling_scale(&a, 0.0).unwrap(), 0.0);
        assert!((coupling_scale(&a, 1.0).unwrap() - 2.0 * 0.5f64.tan()).abs() < 1e-15);
        assert!((coupling_scale(&a, 1.0).unwrap() - 1.0926).abs() < 1e-4);
        let p = GeneratorA::phase(1.0);
        assert!((coupling_scale(&p, 2.0).unwrap() - 2.0 * 1f64.tan()).abs() < 1e-14);
        assert!((coupling_scale(&p, 2.0).unwrap() - 3.1148).abs() < 1e-4);
        assert!(matches!(
            coupling_scale(&p, PI),
            Err(Error::PoleOfTan { .. })
        ));
        let h = GeneratorA::traceless(1.0, 0.0, 0.0);
        assert!((coupling_scale(&h, 1.0).unwrap() - 2.0 * 0.5f64.tanh()).abs() < 1e-15);
        let g = GeneratorA::new(c(0.5, 0.5), 1.0, 1.0);
        assert!(matches!(
            coupling_scale(&g, 1.0),
            Err(Error::UnsupportedClass { .. })
        ));
    }

    #[test]
    fn admissible_constructor_validates() {
        assert!(AdmissibleLambda::new(PI, 1.0, 0.0, 0.0, 1.0).is_err());
        assert!(AdmissibleLambda::new(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        let l = AdmissibleLambda::with_any_phase(PI + 0.5, 2.0, 0.0, 0.0, 0.5).unwrap();
        assert!((l.phi - 0.5).abs() < 1e-15 && l.alpha == -2.0);
    }
}
