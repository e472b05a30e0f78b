//! Dense and Krylov linear algebra on complex vectors, backed by `faer`.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{c64, Mat};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn to_c64(z: Complex64) -> c64 {
    c64::new(z.re, z.im)
}

pub(crate) fn from_c64(z: c64) -> Complex64 {
    Complex64::new(z.re, z.im)
}

pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense matrix-vector product `m x`.
pub fn matvec(m: &Mat<c64>, x: &[Complex64]) -> Vec<Complex64> {
    let n = m.nrows();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (j, xj) in x.iter().enumerate() {
        let xj = to_c64(*xj);
        if xj == c64::new(0.0, 0.0) {
            continue;
        }
        let col = m.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += from_c64(col[i] * xj);
        }
    }
    out
}

/// LU factorization with partial pivoting of a square complex matrix.
pub struct DenseLu {
    lu: PartialPivLu<c64>,
    n: usize,
}

impl DenseLu {
    pub fn new(m: &Mat<c64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument {
                reason: format!("LU of a {}x{} matrix", m.nrows(), m.ncols()),
            });
        }
        let lu = m.partial_piv_lu();
        let lu_ = DenseLu { lu, n: m.nrows() };
        // A zero pivot shows up as non-finite solutions.
        let probe = lu_.solve_mat(&Mat::<c64>::from_fn(lu_.n, 1, |i, _| {
            c64::new(1.0 + i as f64 * 1e-3, 0.0)
        }));
        if (0..lu_.n).any(|i| !probe[(i, 0)].re.is_finite() || !probe[(i, 0)].im.is_finite()) {
            return Err(Error::SingularSystem {
                reason: "LU factorization has a zero pivot".into(),
            });
        }
        Ok(lu_)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = Mat::<c64>::from_fn(self.n, 1, |i, _| to_c64(b[i]));
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| from_c64(x[(i, 0)])).collect()
    }

    pub fn solve_mat(&self, rhs: &Mat<c64>) -> Mat<c64> {
        self.lu.solve(rhs)
    }

    /// Estimate of the smallest eigenvalue modulus of the factored matrix by
    /// inverse iteration.
    pub fn smallest_eigen_modulus(&self, iterations: usize) -> f64 {
        let mut x: Vec<Complex64> = (0..self.n)
            .map(|i| Complex64::new(1.0, 0.37 * (i as f64 + 1.0).sin()))
            .collect();
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let mut estimate = f64::INFINITY;
        for _ in 0..iterations {
            let y = self.solve(&x);
            let ny = norm(&y);
            if !ny.is_finite() || ny == 0.0 {
                return 0.0;
            }
            estimate = 1.0 / ny;
            x = y.into_iter().map(|v| v / ny).collect();
        }
        estimate
    }
}

/// Outcome of a GMRES solve.
#[derive(Debug, Clone)]
pub struct KrylovSolution {
    pub x: Vec<Complex64>,
    pub relative_residual: f64,
    pub iterations: usize,
}

/// Restarted GMRES for `A x = b` with zero initial guess.
pub fn gmres<F>(
    apply: F,
    b: &[Complex64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> Result<KrylovSolution>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return Ok(KrylovSolution {
            x,
            relative_residual: 0.0,
            iterations: 0,
        });
    }
    let m = restart.max(1).min(n.max(1));
    let mut total = 0;
    loop {
        let ax = apply(&x);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol || total >= max_iter {
            if rel <= tol {
                return Ok(KrylovSolution {
                    x,
                    relative_residual: rel,
                    iterations: total,
                });
            }
            return Err(Error::SingularSystem {
                reason: format!("GMRES stalled at relative residual {rel:e} after {total} steps"),
            });
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![zero; m]; m + 1];
        let mut cs = vec![0.0; m];
        let mut sn = vec![zero; m];
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut k_used = 0;
        for k in 0..m {
            let mut w = apply(&basis[k]);
            // modified Gram-Schmidt, applied twice
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    h[i][k] += c;
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let wn = norm(&w);
            h[k + 1][k] = Complex64::new(wn, 0.0);
            for i in 0..k {
                let (a, bb) = (h[i][k], h[i + 1][k]);
                h[i][k] = cs[i] * a + sn[i] * bb;
                h[i + 1][k] = -sn[i].conj() * a + cs[i] * bb;
            }
            let (c, s, rho) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = rho;
            h[k + 1][k] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            k_used = k + 1;
            total += 1;
            if g[k + 1].norm() / bnorm <= tol * 0.5 || wn <= 1e-300 || total >= max_iter {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the triangular system
        let mut y = vec![zero; k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in i + 1..k_used {
                acc -= h[i][j] * y[j];
            }
            if h[i][i].norm() == 0.0 {
                return Err(Error::SingularSystem {
                    reason: "GMRES breakdown on a singular Hessenberg block".into(),
                });
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut()
                .zip(&basis[j])
                .for_each(|(xi, qi)| *xi += yj * qi);
        }
    }
}

/// Complex Givens rotation `(c, s)` with `[c, s; -conj(s), c] [a; b] = [rho; 0]`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let an = a.norm();
    let r = (an * an + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0), b);
    }
    let alpha = a / an;
    (an / r, alpha * b.conj() / r, alpha * r)
}

/// Sorts by descending modulus; near-equal moduli are ordered by ascending argument.
pub fn sort_by_modulus(values: &mut [Complex64]) {
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for v in values.iter_mut() {
        if v.im.abs() <= 1e-12 * scale.max(1e-300) {
            v.im = 0.0;
        }
    }
    values.sort_by(|a, b| {
        let (ma, mb) = (a.norm(), b.norm());
        if (ma - mb).abs() <= 1e-9 * scale {
            a.arg().total_cmp(&b.arg())
        } else {
            mb.total_cmp(&ma)
        }
    });
}

/// All eigenvalues of a dense square matrix.
pub fn dense_eigenvalues(m: &Mat<c64>) -> Result<Vec<Complex64>> {
    let ev = m.eigenvalues().map_err(|e| Error::Eigen {
        reason: format!("{e:?}"),
    })?;
    Ok(ev.into_iter().map(from_c64).collect())
}

/// The `count` largest-modulus eigenvalues of the operator `apply` of size
/// `dim`, by Arnoldi with full reorthogonalization; the Krylov dimension grows
/// until the requested Ritz values settle.
pub fn arnoldi_top<F>(apply: F, dim: usize, count: usize, tol: f64) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let zero = Complex64::new(0.0, 0.0);
    let count = count.min(dim);
    let mut start: Vec<Complex64> = (0..dim)
        .map(|i| {
            let t = i as f64 + 1.0;
            Complex64::new(1.0 + 0.5 * (1.3 * t).sin(), 0.25 * (0.7 * t).cos())
        })
        .collect();
    let sn = norm(&start);
    start.iter_mut().for_each(|v| *v /= sn);

    let max_m = dim.min(600);
    let mut basis = vec![start];
    let mut h: Vec<Vec<Complex64>> = Vec::new();
    let mut previous: Option<Vec<Complex64>> = None;
    let mut target = (4 * count + 20).min(max_m);
    let mut exhausted = false;
    loop {
        while !exhausted && h.len() < target {
            let k = h.len();
            let mut w = apply(&basis[k]);
            let mut col = vec![zero; k + 2];
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    col[i] += c;
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let wn = norm(&w);
            col[k + 1] = Complex64::new(wn, 0.0);
            h.push(col);
            if wn <= 1e-14 {
                // invariant subspace found
                exhausted = true;
                break;
            }
            basis.push(w.into_iter().map(|v| v / wn).collect());
        }
        let m = h.len();
        let hm = Mat::<c64>::from_fn(m, m, |i, j| {
            if i < h[j].len() {
                to_c64(h[j][i])
            } else {
                c64::new(0.0, 0.0)
            }
        });
        let mut ritz = dense_eigenvalues(&hm)?;
        sort_by_modulus(&mut ritz);
        ritz.truncate(count);
        let settled = previous.as_ref().is_some_and(|p| {
            p.len() == ritz.len()
                && p.iter()
                    .zip(&ritz)
                    .all(|(a, b)| (a - b).norm() <= tol * b.norm().max(1e-300))
        });
        if settled || exhausted || m >= max_m {
            if !settled && m >= max_m && m < dim {
                return Err(Error::Eigen {
                    reason: format!("Arnoldi did not settle within Krylov dimension {m}"),
                });
            }
            return Ok(ritz);
        }
        previous = Some(ritz);
        target = (m + m / 2 + 10).min(max_m);
    }
}
