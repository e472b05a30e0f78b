//! The regularized operator with potential `(i/eps) h(x/eps) sigma1 A` through
//! Kato's resolvent formula `G - C_eps (I + Q_eps)^{-1} D_eps`, discretized on a
//! quadrature grid over the support of `h`, and its comparison with the exact
//! point-interaction resolvent.

use faer::linalg::solvers::SolveLstsq;
use faer::{c64, Mat};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{
    free_kernel, free_kernel_rescaled, point_kernel, Interaction, KernelField, SpectralPoint,
};
use crate::kernel::{check_eta_pole, coupling_solution, DiscreteOperator};
use crate::lambda::{GeneratorA, GeneratorClass};
use crate::linalg::{from_c64, to_c64, DenseLu};
use crate::matrix::{check_admissible, tilde, Mat2};
use crate::profile::{PotentialProfile, QuadratureGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Margin on the smallest eigenvalue modulus of `I + Q_eps`.
pub const NEAR_POLE_MARGIN: f64 = 1e-6;

/// The square `[-L, L]^2` with an `n_box`-cell midpoint rule per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxSpec {
    pub half_width: f64,
    pub n_box: usize,
}

impl BoxSpec {
    /// `L = 10 / |Im z|`, 256 cells.
    pub fn default_for(p: &SpectralPoint) -> Self {
        Self {
            half_width: 10.0 / p.z().im.abs(),
            n_box: 256,
        }
    }

    pub fn grid(&self) -> QuadratureGrid {
        QuadratureGrid::midpoint(-self.half_width, self.half_width, self.n_box)
    }
}

/// Pointwise kernels `C_eps`, `Q_eps`, `D_eps` in base coordinates; `eps = 0`
/// gives the limits `C`, `Q`, `D`.
#[derive(Debug, Clone)]
struct KatoKernels {
    point: SpectralPoint,
    sigma_a: Mat2,
    eps: f64,
}

impl KatoKernels {
    /// `C_eps(x, s) = G_z(x, eps s) v(s)`.
    fn c(&self, x: f64, s: f64, v_s: f64) -> Mat2 {
        free_kernel(&self.point, x, self.eps * s) * v_s
    }

    /// `D_eps(s, y) = i u(s) sigma1 A G_z(eps s, y)`.
    fn d(&self, s: f64, y: f64, u_s: f64) -> Mat2 {
        self.sigma_a * free_kernel(&self.point, self.eps * s, y) * (I * u_s)
    }

    /// `Q_eps(s, t) = i u(s) sigma1 A G_{eps z}(s, t) v(t)`.
    fn q(&self, s: f64, t: f64, u_s: f64, v_t: f64) -> Mat2 {
        self.sigma_a * free_kernel_rescaled(&self.point, self.eps, s, t) * (I * (u_s * v_t))
    }
}

fn put_block(m: &mut Mat<c64>, row: usize, col: usize, b: &Mat2) {
    for r in 0..2 {
        for c in 0..2 {
            m[(row + r, col + c)] = to_c64(b.m[r][c]);
        }
    }
}

fn get_block(m: &Mat<c64>, row: usize, col: usize) -> Mat2 {
    Mat2::new(
        from_c64(m[(row, col)]),
        from_c64(m[(row, col + 1)]),
        from_c64(m[(row + 1, col)]),
        from_c64(m[(row + 1, col + 1)]),
    )
}

/// The discretized Kato formula at one `eps`, with `I + Q_eps` factored.
pub struct BSAssembly {
    point: SpectralPoint,
    a: GeneratorA,
    prof: PotentialProfile,
    eps: f64,
    grid: QuadratureGrid,
    u: Vec<f64>,
    v: Vec<f64>,
    q: DiscreteOperator,
    lu: DenseLu,
    smallest_modulus: f64,
}

impl std::fmt::Debug for BSAssembly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BSAssembly")
            .field("z", &self.point.z())
            .field("a", &self.a)
            .field("eps", &self.eps)
            .field("n_grid", &self.grid.len())
            .finish()
    }
}

/// Rejects generators whose `nu` sits on a pole of `(I - nu^2 K^2)^{-1}`.
fn refuse_poles(a: &GeneratorA, prof: &PotentialProfile) -> Result<()> {
    match a.coupling_nu() {
        Ok(nu) => check_eta_pole(nu.nu_squared, prof.integral()),
        Err(_) => Ok(()),
    }
}

/// Builds `Q_eps` on `grid` and factors `I + Q_eps`; `eps = 0` selects the limit kernels.
pub fn assemble(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    eps: f64,
    grid: &QuadratureGrid,
) -> Result<BSAssembly> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument {
            reason: format!("eps must be >= 0, got {eps}"),
        });
    }
    grid.check_covers(prof.support())?;
    refuse_poles(a, prof)?;
    let kernels = KatoKernels {
        point,
        sigma_a: Mat2::sigma1() * a.matrix(),
        eps,
    };
    let nodes = grid.nodes();
    let w = grid.weights();
    let u: Vec<f64> = nodes.iter().map(|&s| prof.u(s)).collect();
    let v: Vec<f64> = nodes.iter().map(|&s| prof.v(s)).collect();
    let n = grid.len();
    let mut q = Mat::<c64>::zeros(2 * n, 2 * n);
    for j in 0..n {
        if u[j] == 0.0 {
            continue;
        }
        for l in 0..n {
            if v[l] == 0.0 {
                continue;
            }
            let b = kernels.q(nodes[j], nodes[l], u[j], v[l]) * w[l];
            put_block(&mut q, 2 * j, 2 * l, &b);
        }
    }
    let mut iq = q.clone();
    for i in 0..2 * n {
        iq[(i, i)] += c64::new(1.0, 0.0);
    }
    let lu = DenseLu::new(&iq)?;
    let smallest_modulus = lu.smallest_eigen_modulus(25);
    if smallest_modulus < NEAR_POLE_MARGIN {
        return Err(Error::NearPole {
            nu_squared: a.nu.nu_squared,
            pole: -1.0,
            distance: smallest_modulus,
        });
    }
    Ok(BSAssembly {
        point,
        a: *a,
        prof: prof.clone(),
        eps,
        grid: grid.clone(),
        u,
        v,
        q: DiscreteOperator::new(q, grid.clone(), 2)?,
        lu,
        smallest_modulus,
    })
}

impl BSAssembly {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn generator(&self) -> &GeneratorA {
        &self.a
    }

    pub fn profile(&self) -> &PotentialProfile {
        &self.prof
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Nystrom matrix of `Q_eps`, block index `2 j + r`, weights folded on the right.
    pub fn q_matrix(&self) -> &DiscreteOperator {
        &self.q
    }

    /// Inverse-iteration estimate of the distance of `-1` to the spectrum of `Q_eps`.
    pub fn distance_to_minus_one(&self) -> f64 {
        self.smallest_modulus
    }

    fn kernels(&self) -> KatoKernels {
        KatoKernels {
            point: self.point,
            sigma_a: Mat2::sigma1() * self.a.matrix(),
            eps: self.eps,
        }
    }

    /// `C_eps(x, s_j) w_j` for all nodes, as a `2 x 2N` row block.
    pub fn c_row(&self, x: f64) -> Mat<c64> {
        self.c_rows(&[x])
    }

    /// `D_eps(s_j, y)` for all nodes, as a `2N x 2` column block.
    pub fn d_column(&self, y: f64) -> Mat<c64> {
        self.d_columns(&[y])
    }

    fn c_rows(&self, xs: &[f64]) -> Mat<c64> {
        let k = self.kernels();
        let nodes = self.grid.nodes();
        let w = self.grid.weights();
        let mut m = Mat::<c64>::zeros(2 * xs.len(), 2 * nodes.len());
        for (a, &x) in xs.iter().enumerate() {
            for j in 0..nodes.len() {
                if self.v[j] != 0.0 {
                    put_block(&mut m, 2 * a, 2 * j, &(k.c(x, nodes[j], self.v[j]) * w[j]));
                }
            }
        }
        m
    }

    fn d_columns(&self, ys: &[f64]) -> Mat<c64> {
        let k = self.kernels();
        let nodes = self.grid.nodes();
        let mut m = Mat::<c64>::zeros(2 * nodes.len(), 2 * ys.len());
        for (b, &y) in ys.iter().enumerate() {
            for j in 0..nodes.len() {
                if self.u[j] != 0.0 {
                    put_block(&mut m, 2 * j, 2 * b, &k.d(nodes[j], y, self.u[j]));
                }
            }
        }
        m
    }

    /// `(C_eps (I + Q_eps)^{-1} D_eps)(x, y)`.
    pub fn correction(&self, x: f64, y: f64) -> Mat2 {
        let solved = self.lu.solve_mat(&self.d_column(y));
        let r = &self.c_row(x) * &solved;
        get_block(&r, 0, 0)
    }

    /// Corrections on the tensor grid `xs x ys`, row-major in `x`.
    pub fn correction_grid(&self, xs: &[f64], ys: &[f64]) -> Vec<Mat2> {
        let solved = self.lu.solve_mat(&self.d_columns(ys));
        let r = &self.c_rows(xs) * &solved;
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for a in 0..xs.len() {
            for b in 0..ys.len() {
                out.push(get_block(&r, 2 * a, 2 * b));
            }
        }
        out
    }
}

impl KernelField for BSAssembly {
    fn spectral_point(&self) -> SpectralPoint {
        self.point
    }

    fn interaction(&self) -> Interaction {
        Interaction::Approx {
            a: self.a,
            eps: self.eps,
        }
    }

    fn eval(&self, x: f64, y: f64) -> Mat2 {
        approx_kernel(self, x, y)
    }
}

/// Kato resolvent kernel `G_z(x,y) - (C_eps (I + Q_eps)^{-1} D_eps)(x,y)`.
pub fn approx_kernel(asm: &BSAssembly, x: f64, y: f64) -> Mat2 {
    free_kernel(&asm.point, x, y) - asm.correction(x, y)
}

/// `<v, (I + Q)^{-1} u>` as a 2x2 matrix, from the limit assembly.
pub fn vq_identity(asm: &BSAssembly) -> Result<Mat2> {
    if asm.eps != 0.0 {
        return Err(Error::InvalidArgument {
            reason: format!("limit assembly (eps = 0) required, got eps = {}", asm.eps),
        });
    }
    let n = asm.grid.len();
    let mut rhs = Mat::<c64>::zeros(2 * n, 2);
    for j in 0..n {
        rhs[(2 * j, 0)] = c64::new(asm.u[j], 0.0);
        rhs[(2 * j + 1, 1)] = c64::new(asm.u[j], 0.0);
    }
    let x = asm.lu.solve_mat(&rhs);
    let w = asm.grid.weights();
    let mut out = Mat2::zero();
    for j in 0..n {
        let vw = asm.v[j] * w[j];
        out = out + get_block(&x, 2 * j, 0) * vw;
    }
    if !out.is_finite() {
        return Err(Error::SingularSystem {
            reason: "non-finite solution of (I + Q) X = u".into(),
        });
    }
    Ok(out)
}

/// `eta (I - (zeta eta / 2) sigma1 A)^{-1}`.
pub fn vq_closed(point: &SpectralPoint, a: &GeneratorA, eta: f64) -> Result<Mat2> {
    let inner = Mat2::identity() - Mat2::sigma1() * a.matrix() * (0.5 * point.zeta() * eta);
    let inv = inner.inverse().ok_or(Error::SingularDenominator {
        modulus: inner.det().norm(),
    })?;
    Ok(inv * eta)
}

/// The limit correction assembled from the factorized inverse of `I + Q`:
/// with `f0 = (I - nu^2 K^2)^{-1} u`, `eta = <v, f0>`, `tau = <v, K f0>` and
/// `E = eta I - tau A~`, the pairing `<v, (I + Q)^{-1} u>` is
/// `V = E + (zeta/2) E sigma1 A (I - (zeta/2) E sigma1 A)^{-1} E` and the
/// correction is `G_z(x,0) (i V sigma1 A) G_z(0,y)`.
#[derive(Debug, Clone, Copy)]
pub struct LimitFactorization {
    pub point: SpectralPoint,
    pub eta: Complex64,
    pub tau: Complex64,
    pub pairing: Mat2,
    pub krein: Mat2,
}

pub fn limit_factorization(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    grid: &QuadratureGrid,
) -> Result<LimitFactorization> {
    if a.class == GeneratorClass::General {
        return Err(Error::UnsupportedClass {
            class: a.class.name(),
        });
    }
    let nu = a.coupling_nu()?;
    let sol = coupling_solution(prof, &nu, grid)?;
    let am = a.matrix();
    let sa = Mat2::sigma1() * am;
    let e = Mat2::scalar(sol.eta) - tilde(&am) * sol.tau;
    let half = 0.5 * point.zeta();
    let inner = Mat2::identity() - e * sa * half;
    let p = inner.inverse().ok_or(Error::SingularDenominator {
        modulus: inner.det().norm(),
    })?;
    let pairing = e + e * sa * p * e * half;
    Ok(LimitFactorization {
        point,
        eta: sol.eta,
        tau: sol.tau,
        pairing,
        krein: pairing * sa * I,
    })
}

impl LimitFactorization {
    pub fn correction(&self, x: f64, y: f64) -> Mat2 {
        free_kernel(&self.point, x, 0.0) * self.krein * free_kernel(&self.point, 0.0, y)
    }
}

/// Least-squares `M` with `correction(x, y) = G_z(x,0) M G_z(0,y)` over the samples.
pub fn fit_krein_matrix(point: &SpectralPoint, samples: &[(f64, f64, Mat2)]) -> Result<Mat2> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument {
            reason: "no samples".into(),
        });
    }
    let rows = 4 * samples.len();
    let mut lhs = Mat::<c64>::zeros(rows, 4);
    let mut rhs = Mat::<c64>::zeros(rows, 1);
    for (k, (x, y, value)) in samples.iter().enumerate() {
        let left = free_kernel(point, *x, 0.0);
        let right = free_kernel(point, 0.0, *y);
        for a in 0..2 {
            for b in 0..2 {
                let row = 4 * k + 2 * a + b;
                for c in 0..2 {
                    for d in 0..2 {
                        lhs[(row, 2 * c + d)] = to_c64(left.m[a][c] * right.m[d][b]);
                    }
                }
                rhs[(row, 0)] = to_c64(value.m[a][b]);
            }
        }
    }
    let sol = lhs.qr().solve_lstsq(&rhs);
    let m = Mat2::new(
        from_c64(sol[(0, 0)]),
        from_c64(sol[(1, 0)]),
        from_c64(sol[(2, 0)]),
        from_c64(sol[(3, 0)]),
    );
    // G_z(x,0) has rank one and depends only on sgn x, so every sign quadrant of
    // (x, y) is needed to pin down all four entries
    if !m.is_finite() {
        return Err(Error::SingularSystem {
            reason: "samples do not cover all four sign quadrants of (x, y)".into(),
        });
    }
    Ok(m)
}

/// Discrete HS distances of the Kato kernels from their `eps -> 0` limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelDistances {
    pub c: f64,
    pub q: f64,
    pub d: f64,
}

/// `|C_eps - C|_2`, `|Q_eps - Q|_2`, `|D_eps - D|_2`, with the unbounded variable of
/// `C` and `D` restricted to the box.
pub fn kernel_limit_distances(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    eps: f64,
    grid: &QuadratureGrid,
    bx: BoxSpec,
) -> Result<KernelDistances> {
    grid.check_covers(prof.support())?;
    let sa = Mat2::sigma1() * a.matrix();
    let at = |e: f64| KatoKernels {
        point,
        sigma_a: sa,
        eps: e,
    };
    let (ke, k0) = (at(eps), at(0.0));
    let nodes = grid.nodes();
    let w = grid.weights();
    let u: Vec<f64> = nodes.iter().map(|&s| prof.u(s)).collect();
    let v: Vec<f64> = nodes.iter().map(|&s| prof.v(s)).collect();
    let outer = bx.grid();
    let (mut c2, mut q2, mut d2) = (0.0, 0.0, 0.0);
    for j in 0..nodes.len() {
        for l in 0..nodes.len() {
            let diff = ke.q(nodes[j], nodes[l], u[j], v[l]) - k0.q(nodes[j], nodes[l], u[j], v[l]);
            q2 += diff.norm_sqr() * w[j] * w[l];
        }
        for (&x, &wx) in outer.nodes().iter().zip(outer.weights()) {
            let dc = ke.c(x, nodes[j], v[j]) - k0.c(x, nodes[j], v[j]);
            let dd = ke.d(nodes[j], x, u[j]) - k0.d(nodes[j], x, u[j]);
            c2 += dc.norm_sqr() * wx * w[j];
            d2 += dd.norm_sqr() * wx * w[j];
        }
    }
    Ok(KernelDistances {
        c: c2.sqrt(),
        q: q2.sqrt(),
        d: d2.sqrt(),
    })
}

/// HS distance over the box plus an estimate of the squared HS mass outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsDistance {
    pub value: f64,
    pub tail_estimate: f64,
}

/// `sqrt(sum |R_eps(x,y) - R^Lambda(x,y)|_F^2 w_x w_y)` on the box, with
/// `Lambda = exp(A)`.
pub fn hs_distance(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    eps: f64,
    bx: BoxSpec,
    grid: &QuadratureGrid,
) -> Result<HsDistance> {
    let value = hs_distance_on(point, a, prof, eps, &bx.grid(), grid)?;
    let lambda = check_admissible(&a.exp())?;
    let m = point_kernel(&point, &lambda)?.krein_matrix();
    let kappa = point.z().im.abs();
    let tail_estimate = m.norm_sqr() * 2.0 * (-2.0 * kappa * bx.half_width).exp() / (kappa * kappa);
    Ok(HsDistance {
        value,
        tail_estimate,
    })
}

/// The same distance on an arbitrary tensor grid `outer x outer`.
pub fn hs_distance_on(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    eps: f64,
    outer: &QuadratureGrid,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let lambda = check_admissible(&a.exp())?;
    let exact = point_kernel(&point, &lambda)?;
    let asm = assemble(point, a, prof, eps, grid)?;
    let xs = outer.nodes();
    let wb = outer.weights();
    let approx = asm.correction_grid(xs, xs);
    let left: Vec<Mat2> = xs.iter().map(|&x| free_kernel(&point, x, 0.0)).collect();
    let right: Vec<Mat2> = xs.iter().map(|&y| free_kernel(&point, 0.0, y)).collect();
    let m = exact.krein_matrix();
    let mut acc = 0.0;
    for (ia, &wx) in wb.iter().enumerate() {
        let lm = left[ia] * m;
        for (ib, &wy) in wb.iter().enumerate() {
            // the free parts of both kernels cancel
            let diff = lm * right[ib] - approx[ia * xs.len() + ib];
            acc += diff.norm_sqr() * wx * wy;
        }
    }
    Ok(acc.sqrt())
}

/// One line of a convergence sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub outcome: std::result::Result<HsDistance, Error>,
    pub box_half_width: f64,
    pub n_box: usize,
    pub n_grid: usize,
    pub z: Complex64,
}

impl ConvergenceRow {
    pub fn hs_distance(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|d| d.value)
    }
}

/// `hs_distance` for every `eps` (strictly decreasing), computed concurrently;
/// failures stay attached to their row.
pub fn converge_table(
    point: SpectralPoint,
    a: &GeneratorA,
    prof: &PotentialProfile,
    eps_list: &[f64],
    bx: BoxSpec,
    grid: &QuadratureGrid,
) -> Result<Vec<ConvergenceRow>> {
    if eps_list.iter().any(|e| !(*e >= 0.0 && e.is_finite()))
        || eps_list.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(Error::InvalidArgument {
            reason: "eps list must be non-negative and strictly decreasing".into(),
        });
    }
    refuse_poles(a, prof)?;
    Ok(eps_list
        .par_iter()
        .map(|&eps| ConvergenceRow {
            eps,
            outcome: hs_distance(point, a, prof, eps, bx, grid),
            box_half_width: bx.half_width,
            n_box: bx.n_box,
            n_grid: grid.len(),
            z: point.z(),
        })
        .collect())
}
