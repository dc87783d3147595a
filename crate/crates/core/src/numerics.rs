//! Dense kernels: ridge regression and the smallest eigenpair of a
//! symmetric-definite generalized eigenproblem.
//!
//! Both are thin layers over `nalgebra` factorizations.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::NumericError;

/// Relative Tikhonov shift applied to the right-hand pencil matrix.
pub const PENCIL_REGULARIZATION: f64 = 1e-6;

/// Largest tolerated asymmetry before a pencil matrix is rejected.
const SYMMETRY_TOLERANCE: f64 = 1e-10;

/// Which closed form to use for ridge regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RidgeForm {
    /// Primal when `m <= n`, dual otherwise.
    #[default]
    Auto,
    /// `(DᵀD + λI)⁻¹ DᵀY`
    Primal,
    /// `Dᵀ (DDᵀ + λI)⁻¹ Y`
    Dual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystemSolution {
    pub weights: DMatrix<f64>,
    /// Frobenius norm of `(DᵀD + λI) W − DᵀY`.
    pub residual_norm: f64,
}

fn check_finite(m: &DMatrix<f64>) -> Result<(), NumericError> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumericError::NonFinite)
    }
}

fn add_diagonal(m: &mut DMatrix<f64>, value: f64) {
    for i in 0..m.nrows() {
        m[(i, i)] += value;
    }
}

fn solve_spd(mut a: DMatrix<f64>, b: DMatrix<f64>) -> Result<DMatrix<f64>, NumericError> {
    // symmetrize away round-off from the Gram product
    let at = a.transpose();
    a += at;
    a *= 0.5;
    match Cholesky::new(a.clone()) {
        Some(ch) => Ok(ch.solve(&b)),
        None => a.lu().solve(&b).ok_or(NumericError::Singular),
    }
}

/// Ridge regression `min ‖DW − Y‖² + λ‖W‖²`.
///
/// With `lambda == 0` the least-squares solution is computed through the SVD
/// and a rank-deficient `D` is reported as [`NumericError::Singular`]; use
/// [`ridge_solve_or_pinv`] to accept the minimum-norm solution instead.
pub fn ridge_solve(
    d: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
    form: RidgeForm,
) -> Result<LinearSystemSolution, NumericError> {
    ridge_impl(d, y, lambda, form, false)
}

/// [`ridge_solve`], falling back to `W = D⁺Y` when `lambda == 0` and `D` is
/// rank deficient.
pub fn ridge_solve_or_pinv(
    d: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
    form: RidgeForm,
) -> Result<LinearSystemSolution, NumericError> {
    ridge_impl(d, y, lambda, form, true)
}

fn ridge_impl(
    d: &DMatrix<f64>,
    y: &DMatrix<f64>,
    lambda: f64,
    form: RidgeForm,
    allow_pinv: bool,
) -> Result<LinearSystemSolution, NumericError> {
    let (n, m) = d.shape();
    if n == 0 || m == 0 {
        return Err(NumericError::Shape("empty design matrix".into()));
    }
    if y.nrows() != n {
        return Err(NumericError::Shape(format!(
            "design has {n} rows, targets have {}",
            y.nrows()
        )));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(NumericError::Shape(format!("invalid ridge parameter {lambda}")));
    }
    check_finite(d)?;
    check_finite(y)?;

    if lambda == 0.0 {
        let svd = d.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let tol = f64::EPSILON * n.max(m) as f64 * smax;
        let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
        if rank < m && !allow_pinv {
            return Err(NumericError::Singular);
        }
        let weights = svd.solve(y, tol).map_err(|_| NumericError::Singular)?;
        let residual_norm = normal_residual(d, y, &weights, 0.0);
        return Ok(LinearSystemSolution { weights, residual_norm });
    }

    let use_primal = match form {
        RidgeForm::Auto => m <= n,
        RidgeForm::Primal => true,
        RidgeForm::Dual => false,
    };
    if use_primal {
        let mut gram = d.tr_mul(d);
        add_diagonal(&mut gram, lambda);
        let rhs = d.tr_mul(y);
        let weights = solve_spd(gram.clone(), rhs.clone())?;
        let residual_norm = (gram * &weights - rhs).norm();
        Ok(LinearSystemSolution { weights, residual_norm })
    } else {
        let mut gram = d * d.transpose();
        add_diagonal(&mut gram, lambda);
        let alpha = solve_spd(gram.clone(), y.clone())?;
        let weights = d.tr_mul(&alpha);
        // (DᵀD + λI)Dᵀα − DᵀY = Dᵀ((DDᵀ + λI)α − Y)
        let residual_norm = d.tr_mul(&(gram * alpha - y)).norm();
        Ok(LinearSystemSolution { weights, residual_norm })
    }
}

fn normal_residual(d: &DMatrix<f64>, y: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> f64 {
    let r = d.tr_mul(&(d * w - y)) + w * lambda;
    r.norm()
}

/// Smallest eigenpair of `G z = λ H z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GenEigenResult {
    /// Unit-norm eigenvector, largest-magnitude entry positive.
    pub eigenvector: DVector<f64>,
    pub eigenvalue: f64,
    /// Diagonal shift that was added to `H` before solving.
    pub shift: f64,
}

impl GenEigenResult {
    /// `‖Gz − λH̃z‖ / (‖G‖‖z‖ + ‖H̃‖‖z‖)` against the regularized `H̃`.
    pub fn relative_residual(&self, g: &DMatrix<f64>, h: &DMatrix<f64>) -> f64 {
        let mut h_reg = h.clone();
        add_diagonal(&mut h_reg, self.shift);
        let z = &self.eigenvector;
        let r = g * z - (&h_reg * z) * self.eigenvalue;
        r.norm() / ((g.norm() + h_reg.norm()) * z.norm())
    }
}

fn symmetrized(m: &DMatrix<f64>) -> Result<DMatrix<f64>, NumericError> {
    if !m.is_square() {
        return Err(NumericError::Shape("pencil matrix must be square".into()));
    }
    check_finite(m)?;
    let scale = m.amax().max(1.0);
    let asym = (m - m.transpose()).amax();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(NumericError::NotSymmetric(asym));
    }
    Ok((m + m.transpose()) * 0.5)
}

/// Eigenpair of `G z = λ H z` with the smallest `λ`.
///
/// `H` is shifted by `δ·tr(H)/(q+1)` (δ = 1e-6) so that pencils built from
/// fewer samples than dimensions stay definite. The regularized `H` is
/// Cholesky-factored and the problem reduced to the standard symmetric
/// eigenproblem `L⁻¹ G L⁻ᵀ y = λ y`, `z = L⁻ᵀ y`.
pub fn gen_eig_smallest(g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<GenEigenResult, NumericError> {
    let g = symmetrized(g)?;
    let mut h = symmetrized(h)?;
    if g.shape() != h.shape() {
        return Err(NumericError::Shape("pencil matrices differ in size".into()));
    }
    let dim = h.nrows();
    let trace = h.trace();
    if trace == 0.0 {
        return Err(NumericError::ZeroTrace);
    }
    let shift = PENCIL_REGULARIZATION * trace / dim as f64;
    add_diagonal(&mut h, shift);

    let chol = Cholesky::new(h).ok_or(NumericError::Singular)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(&g).ok_or(NumericError::Singular)?;
    let mut reduced = l.solve_lower_triangular(&x.transpose()).ok_or(NumericError::Singular)?;
    let rt = reduced.transpose();
    reduced += rt;
    reduced *= 0.5;

    let eig = SymmetricEigen::new(reduced);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or(NumericError::NoConvergence)?;
    let y = eig.eigenvectors.column(idx).into_owned();
    let mut z = l.transpose().solve_upper_triangular(&y).ok_or(NumericError::Singular)?;
    let norm = z.norm();
    if !norm.is_finite() || norm == 0.0 || !lambda.is_finite() {
        return Err(NumericError::NoConvergence);
    }
    z /= norm;
    let lead = z.iamax();
    if z[lead] < 0.0 {
        z.neg_mut();
    }
    Ok(GenEigenResult {
        eigenvector: z,
        eigenvalue: lambda.max(0.0),
        shift,
    })
}
