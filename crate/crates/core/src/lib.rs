//! One-dimensional Dirac operators with point interactions.
//!
//! The crate covers the boundary matrices `Lambda` of the interaction
//! `psi(0+) = Lambda psi(0-)`, their generators `A` with `Lambda = exp(A)`,
//! the exact resolvent through Krein's formula, and the regularized operator
//! with potential `(i/eps) h(x/eps) sigma1 A` through Kato's resolvent formula,
//! discretized by the Nystrom method.
// index loops mirror the quadrature sums; `!(x > y)` comparisons deliberately reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod error;
pub mod exact;
pub mod kernel;
pub mod lambda;
pub mod linalg;
pub mod matrix;
pub mod profile;

pub use error::{Error, Result};
pub use exact::{
    free_kernel, m_closed, m_lambda, point_kernel, KernelField, ResolventKernelField, Side,
    SpectralPoint,
};
pub use lambda::{
    coupling_scale, electrostatic_lambda, log_branches, w_matrix, AdmissibleLambda, BranchSelector,
    GeneratorA, GeneratorClass,
};
pub use matrix::{check_admissible, check_generator, exp2, nu_of, tilde, Mat2, NuBranch, NuClass};
