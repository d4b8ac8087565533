//! Diagonally regularized Hermitian least squares.
//!
//! Every coefficient update in the estimators reduces to
//! `(D^H D + diag(reg)) x = D^H v` with a positive `reg`. The system is
//! Hermitian positive definite and is solved either directly (N x N
//! Cholesky) or through the push-through identity
//! `x = R^-1 D^H (D R^-1 D^H + I)^-1 v`, which only factors an M x M matrix
//! and is much cheaper when the grid is larger than the array.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::array::{CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveRoute {
    /// Dual when `M < N`, otherwise primal.
    #[default]
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    DimensionMismatch,
    NonPositiveRegularizer,
    NotPositiveDefinite,
    NonFinite,
}

impl std::fmt::Display for SolveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveError::DimensionMismatch => write!(f, "dimension mismatch"),
            SolveError::NonPositiveRegularizer => write!(f, "regularizer must be positive"),
            SolveError::NotPositiveDefinite => write!(f, "system is not positive definite"),
            SolveError::NonFinite => write!(f, "non-finite solution"),
        }
    }
}

pub fn solve_regularized(
    d: &CMatrix,
    reg: &DVector<f64>,
    v: &CVector,
    route: SolveRoute,
) -> Result<CVector, SolveError> {
    let (m, n) = d.shape();
    if reg.len() != n || v.len() != m {
        return Err(SolveError::DimensionMismatch);
    }
    if reg.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(SolveError::NonPositiveRegularizer);
    }
    let use_dual = match route {
        SolveRoute::Auto => m < n,
        SolveRoute::Primal => false,
        SolveRoute::Dual => true,
    };
    let x = if use_dual { solve_dual(d, reg, v)? } else { solve_primal(d, reg, v)? };
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(SolveError::NonFinite);
    }
    Ok(x)
}

fn solve_primal(d: &CMatrix, reg: &DVector<f64>, v: &CVector) -> Result<CVector, SolveError> {
    let mut gram = d.ad_mul(d);
    for (i, &r) in reg.iter().enumerate() {
        gram[(i, i)] += Complex64::new(r, 0.0);
    }
    let chol = Cholesky::new(gram).ok_or(SolveError::NotPositiveDefinite)?;
    Ok(chol.solve(&d.ad_mul(v)))
}

fn solve_dual(d: &CMatrix, reg: &DVector<f64>, v: &CVector) -> Result<CVector, SolveError> {
    let (m, n) = d.shape();
    // D R^-1, column-scaled
    let mut d_scaled = d.clone();
    for j in 0..n {
        let inv = 1.0 / reg[j];
        d_scaled.column_mut(j).scale_mut(inv);
    }
    let mut kernel: DMatrix<Complex64> = &d_scaled * d.adjoint();
    for i in 0..m {
        kernel[(i, i)] += Complex64::new(1.0, 0.0);
    }
    let chol = Cholesky::new(kernel).ok_or(SolveError::NotPositiveDefinite)?;
    let z = chol.solve(v);
    Ok(d_scaled.ad_mul(&z))
}
