//! The operator `K(x,y) = (i/2) u(x) sgn(x-y) v(y)`: Nystrom matrices, spectrum,
//! eigenfunctions, the coupling `eta = <v, (I - nu^2 K^2)^{-1} u>`, the odd term
//! and the moments `<v, K^{2n} u>`.

use std::f64::consts::PI;

use faer::{c64, Mat};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::sgn;
use crate::lambda::scaled_tan;
use crate::linalg::{
    arnoldi_top, dense_eigenvalues, from_c64, gmres, matvec, sort_by_modulus, to_c64,
};
use crate::matrix::NuBranch;
use crate::profile::{PotentialProfile, QuadratureGrid};

const HALF_I: Complex64 = Complex64::new(0.0, 0.5);

/// Radius on `nu^2` around the poles `((2k+1) pi / c)^2`.
pub const POLE_GUARD: f64 = 1e-6;

/// Largest matrix handed to the dense eigensolver; bigger ones go through Arnoldi.
pub const DENSE_EIGEN_LIMIT: usize = 512;

const GMRES_TOL: f64 = 1e-13;

/// A Nystrom matrix on a quadrature grid, with scalar (`block_size = 1`) or
/// 2x2 block entries indexed `2 j + r`.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    matrix: Mat<c64>,
    grid: QuadratureGrid,
    block_size: usize,
}

impl DiscreteOperator {
    pub fn new(matrix: Mat<c64>, grid: QuadratureGrid, block_size: usize) -> Result<Self> {
        let dim = grid.len() * block_size;
        if !(block_size == 1 || block_size == 2) || matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidArgument {
                reason: format!(
                    "{}x{} matrix does not fit {} nodes with block size {block_size}",
                    matrix.nrows(),
                    matrix.ncols(),
                    grid.len()
                ),
            });
        }
        Ok(Self {
            matrix,
            grid,
            block_size,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &Mat<c64> {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        from_c64(self.matrix[(i, j)])
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        matvec(&self.matrix, x)
    }

    fn weight(&self, i: usize) -> f64 {
        self.grid.weights()[i / self.block_size]
    }

    /// Discrete Hilbert-Schmidt norm of the kernel, `sqrt(sum |k|^2 w_j w_l)`.
    pub fn hs_norm(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for l in 0..n {
            let wl = self.weight(l);
            for j in 0..n {
                acc += self.entry(j, l).norm_sqr() * self.weight(j) / wl;
            }
        }
        acc.sqrt()
    }

    /// `W^{1/2} M W^{-1/2}`, the matrix of the operator in the weighted inner product.
    pub fn weight_symmetrized(&self) -> Mat<c64> {
        Mat::<c64>::from_fn(self.dim(), self.dim(), |j, l| {
            self.matrix[(j, l)] * (self.weight(j) / self.weight(l)).sqrt()
        })
    }

    /// `max |S_jl - conj(S_lj)|` of the weight-symmetrized matrix.
    pub fn hermitian_defect(&self) -> f64 {
        let s = self.weight_symmetrized();
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..=j {
                worst = worst.max((s[(j, l)] - s[(l, j)].conj()).norm());
            }
        }
        worst
    }

    /// `max |k(x_j, x_l) - conj(k(x_l, x_j))|` over the kernel values behind the matrix.
    pub fn kernel_asymmetry(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..=j {
                let a = self.entry(j, l) / self.weight(l);
                let b = self.entry(l, j) / self.weight(j);
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst
    }
}

/// Nystrom matrix `K[j,l] = (i/2) u(x_j) sgn(x_j - x_l) v(x_l) w_l`.
pub fn build_k(prof: &PotentialProfile, grid: &QuadratureGrid) -> Result<DiscreteOperator> {
    grid.check_covers(prof.support())?;
    let x = grid.nodes();
    let w = grid.weights();
    let u: Vec<f64> = x.iter().map(|&t| prof.u(t)).collect();
    let vw: Vec<f64> = x.iter().zip(w).map(|(&t, &wt)| prof.v(t) * wt).collect();
    let n = grid.len();
    let m = Mat::<c64>::from_fn(n, n, |j, l| {
        to_c64(HALF_I * (u[j] * sgn(x[j] - x[l]) * vw[l]))
    });
    DiscreteOperator::new(m, grid.clone(), 1)
}

/// The `count` largest-modulus eigenvalues, descending modulus, ties by argument.
pub fn k_spectrum(op: &DiscreteOperator, count: usize) -> Result<Vec<Complex64>> {
    let dim = op.dim();
    if dim <= DENSE_EIGEN_LIMIT {
        let mut all = dense_eigenvalues(op.matrix())?;
        sort_by_modulus(&mut all);
        all.truncate(count);
        return Ok(all);
    }
    arnoldi_top(|v| op.apply(v), dim, count, 1e-12)
}

/// `lambda_k = c / ((2k+1) pi)`.
pub fn k_eigenvalue(k: i64, c: f64) -> f64 {
    c / ((2 * k + 1) as f64 * PI)
}

/// Normalized eigenfunction `psi_k(x) = u(x) e^{i (2k+1) pi Theta(x)} / sqrt(|h|_1)`.
pub fn psi_k(prof: &PotentialProfile, k: i64, x: f64) -> Result<Complex64> {
    require_unit_integral(prof)?;
    let phase = (2 * k + 1) as f64 * PI * prof.theta(x);
    Ok(Complex64::from_polar(
        prof.u(x) / prof.l1_norm().sqrt(),
        phase,
    ))
}

/// Discrete `|K psi_k - lambda_k psi_k| / |psi_k|` in the weighted norm.
pub fn psi_residual(prof: &PotentialProfile, k: i64, grid: &QuadratureGrid) -> Result<f64> {
    let op = SignKernel::new(prof, grid)?;
    let psi = grid
        .nodes()
        .iter()
        .map(|&x| psi_k(prof, k, x))
        .collect::<Result<Vec<_>>>()?;
    let kpsi = op.apply(&psi);
    let lambda = k_eigenvalue(k, 1.0);
    let w = grid.weights();
    let res: f64 = kpsi
        .iter()
        .zip(&psi)
        .zip(w)
        .map(|((a, b), wt)| (a - b * lambda).norm_sqr() * wt)
        .sum();
    let nrm: f64 = psi.iter().zip(w).map(|(b, wt)| b.norm_sqr() * wt).sum();
    Ok((res / nrm).sqrt())
}

/// Weighted `L^2` norm of `psi_k` on the grid.
pub fn psi_norm(prof: &PotentialProfile, k: i64, grid: &QuadratureGrid) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in grid.nodes().iter().zip(grid.weights()) {
        acc += psi_k(prof, k, x)?.norm_sqr() * w;
    }
    Ok(acc.sqrt())
}

fn require_unit_integral(prof: &PotentialProfile) -> Result<()> {
    if (prof.integral() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized {
            integral: prof.integral(),
        });
    }
    Ok(())
}

/// `K` applied in `O(N)` through running sums of `v w f`, valid for any grid
/// with strictly increasing nodes.
#[derive(Debug, Clone)]
pub struct SignKernel {
    u: Vec<f64>,
    v: Vec<f64>,
    w: Vec<f64>,
}

impl SignKernel {
    pub fn new(prof: &PotentialProfile, grid: &QuadratureGrid) -> Result<Self> {
        grid.check_covers(prof.support())?;
        let x = grid.nodes();
        Ok(Self {
            u: x.iter().map(|&t| prof.u(t)).collect(),
            v: x.iter().map(|&t| prof.v(t)).collect(),
            w: grid.weights().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self) -> Vec<Complex64> {
        self.u.iter().map(|&x| x.into()).collect()
    }

    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let g: Vec<Complex64> = (0..n).map(|l| f[l] * (self.v[l] * self.w[l])).collect();
        let total: Complex64 = g.iter().sum();
        let mut below = Complex64::new(0.0, 0.0);
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let above = total - below - g[j];
            out.push(HALF_I * self.u[j] * (below - above));
            below += g[j];
        }
        out
    }

    /// Weighted pairing `<v, f> = sum v_j f_j w_j`.
    pub fn pair_v(&self, f: &[Complex64]) -> Complex64 {
        f.iter()
            .zip(&self.v)
            .zip(&self.w)
            .map(|((fj, vj), wj)| fj * (vj * wj))
            .sum()
    }

    /// `<v, K f>` written as `(i/2) sum_{l<j} (a_j b_l - b_j a_l)` with
    /// `a = u v w` and `b = v w f`, so that it is exactly antisymmetric when
    /// `f = u`.
    pub fn pair_v_k(&self, f: &[Complex64]) -> Complex64 {
        let zero = Complex64::new(0.0, 0.0);
        let (mut pa, mut pb) = (zero, zero);
        let (mut first, mut second) = (zero, zero);
        for j in 0..self.len() {
            let vw = self.v[j] * self.w[j];
            let a = Complex64::from(self.u[j] * vw);
            let b = f[j] * vw;
            first += a * pb;
            second += b * pa;
            pa += a;
            pb += b;
        }
        HALF_I * (first - second)
    }

    /// Solves `(I - nu^2 K^2) f = rhs`.
    pub fn solve_shifted(&self, nu_squared: f64, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        if nu_squared == 0.0 {
            return Ok(rhs.to_vec());
        }
        let apply = |f: &[Complex64]| {
            let k2 = self.apply(&self.apply(f));
            f.iter().zip(&k2).map(|(a, b)| a - b * nu_squared).collect()
        };
        Ok(gmres(apply, rhs, self.shifted_tolerance(nu_squared), 80, 4000)?.x)
    }

    /// `GMRES_TOL` loosened by the conditioning of `I - nu^2 K^2`, which blows up as
    /// `nu^2 c^2` approaches `((2k+1) pi)^2`.
    fn shifted_tolerance(&self, nu_squared: f64) -> f64 {
        if nu_squared <= 0.0 {
            return GMRES_TOL;
        }
        let c: f64 = (0..self.len())
            .map(|j| self.u[j] * self.v[j] * self.w[j])
            .sum();
        let scaled = nu_squared.sqrt() * c.abs() / PI;
        let k = ((scaled - 1.0) / 2.0).round().max(0.0);
        let gap = (1.0 - (scaled / (2.0 * k + 1.0)).powi(2)).abs();
        (GMRES_TOL / gap.max(1e-6)).min(1e-9)
    }
}

/// Rejects `nu^2` within `POLE_GUARD` of `((2k+1) pi / c)^2`.
pub fn check_eta_pole(nu_squared: f64, c: f64) -> Result<()> {
    if nu_squared <= 0.0 || c == 0.0 {
        return Ok(());
    }
    let scaled = nu_squared.sqrt() * c.abs() / PI;
    let k0 = ((scaled - 1.0) / 2.0).round().max(0.0) as i64;
    for k in [k0 - 1, k0, k0 + 1] {
        if k < 0 {
            continue;
        }
        let pole = ((2 * k + 1) as f64 * PI / c).powi(2);
        let distance = (nu_squared - pole).abs();
        if distance < POLE_GUARD {
            return Err(Error::NearPole {
                nu_squared,
                pole,
                distance,
            });
        }
    }
    Ok(())
}

/// The coupling data `f0 = (I - nu^2 K^2)^{-1} u`, `f1 = K f0`, `eta = <v, f0>`,
/// `tau = <v, f1>` on a grid.
#[derive(Debug, Clone)]
pub struct CouplingSolution {
    pub f0: Vec<Complex64>,
    pub f1: Vec<Complex64>,
    pub eta: Complex64,
    pub tau: Complex64,
}

pub fn coupling_solution(
    prof: &PotentialProfile,
    nu: &NuBranch,
    grid: &QuadratureGrid,
) -> Result<CouplingSolution> {
    grid.check_covers(prof.support())?;
    check_eta_pole(nu.nu_squared, prof.integral())?;
    let op = SignKernel::new(prof, grid)?;
    let f0 = op.solve_shifted(nu.nu_squared, &op.u())?;
    let f1 = op.apply(&f0);
    let eta = op.pair_v(&f0);
    let tau = op.pair_v_k(&f0);
    Ok(CouplingSolution { f0, f1, eta, tau })
}

/// Nystrom value of `<v, (I - nu^2 K^2)^{-1} u>`.
pub fn eta_numeric(
    prof: &PotentialProfile,
    nu: &NuBranch,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    Ok(coupling_solution(prof, nu, grid)?.eta)
}

/// `(2/nu) tan(nu c / 2)`, with limit `c` at `nu = 0`.
pub fn eta_closed(nu: &NuBranch, c: f64) -> Result<Complex64> {
    Ok(scaled_tan(nu.nu, c)?.into())
}

/// Nystrom value of `<v, K (I - nu^2 K^2)^{-1} u>`.
pub fn odd_term(
    prof: &PotentialProfile,
    nu: &NuBranch,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    Ok(coupling_solution(prof, nu, grid)?.tau)
}

/// Largest supported moment order.
pub const MAX_MOMENT: usize = 8;

/// `<v, K^{2n} u>` by repeated application of the Nystrom operator.
pub fn moment(prof: &PotentialProfile, n: usize, grid: &QuadratureGrid) -> Result<Complex64> {
    if n > MAX_MOMENT {
        return Err(Error::Overflow { n });
    }
    let op = SignKernel::new(prof, grid)?;
    let mut g = op.u();
    for _ in 0..2 * n {
        g = op.apply(&g);
    }
    Ok(op.pair_v(&g))
}

/// Bernoulli number `B_n` (with `B_1 = +1/2`) by the Akiyama-Tanigawa recurrence.
pub fn bernoulli(n: usize) -> BigRational {
    let mut a: Vec<BigRational> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        a.push(BigRational::new(BigInt::one(), BigInt::from(m + 1)));
        for j in (1..=m).rev() {
            let diff = &a[j - 1] - &a[j];
            a[j - 1] = diff * BigInt::from(j);
        }
    }
    a.swap_remove(0)
}

/// `(-1)^n 4 (2^{2n+2} - 1) / (2n+2)! * B_{2n+2}`, the moment of a unit-mass profile.
pub fn moment_closed(n: usize) -> Result<BigRational> {
    if n > MAX_MOMENT {
        return Err(Error::Overflow { n });
    }
    let m = 2 * n + 2;
    let factorial: BigInt = (1..=m).map(BigInt::from).product();
    let pow = (BigInt::one() << m) - BigInt::one();
    let mut value = BigRational::new(BigInt::from(4) * pow, factorial) * bernoulli(m);
    if n % 2 == 1 {
        value = -value;
    }
    Ok(value)
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let num = r.numer().to_f64().unwrap_or(f64::NAN);
    let den = r.denom().to_f64().unwrap_or(f64::NAN);
    let v = num / den;
    if v.is_finite() {
        return v;
    }
    // shift both parts into range
    let bits = r.numer().abs().bits().max(r.denom().bits()) as i64 - 900;
    let shift = bits.max(0) as usize;
    let n = (r.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}
