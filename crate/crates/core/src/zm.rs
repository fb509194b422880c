//! Z-matrix and M-matrix predicates.

use crate::error::{Error, Result};
use crate::matrix::{lu_solve, DenseMatrix, Vector};

/// Relative floor for calling a witness component strictly positive.
pub const POSITIVITY_REL: f64 = 1e-12;

/// Outcome of [`is_m_matrix`]. When `is_m_matrix` holds, `witness` is a
/// vector `x ≫ 0` with `A x ≫ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MMatrixCertificate {
    pub is_m_matrix: bool,
    pub witness: Option<Vector>,
}

impl MMatrixCertificate {
    fn rejected() -> Self {
        MMatrixCertificate { is_m_matrix: false, witness: None }
    }
}

/// True iff every off-diagonal entry is `<= 0`. Non-square input is never a
/// Z-matrix.
pub fn is_z_matrix(a: &DenseMatrix) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows();
    (0..n).all(|i| (0..n).all(|j| i == j || a.get(i, j) <= 0.0))
}

/// Decides whether a Z-matrix is a (nonsingular) M-matrix by solving
/// `A x = e` and checking `x ≫ 0`.
///
/// A Z-matrix is an M-matrix iff some positive `x` has `A x ≫ 0`; conversely
/// an M-matrix has a nonnegative inverse with no zero row, so `A^{-1} e ≫ 0`.
/// Singular input yields `false`.
pub fn is_m_matrix(a: &DenseMatrix) -> Result<MMatrixCertificate> {
    a.require_square("M-matrix test input")?;
    if !is_z_matrix(a) {
        return Err(Error::Precondition("M-matrix test requires a Z-matrix".into()));
    }
    let n = a.rows();
    let x = match lu_solve(a, &vec![1.0; n]) {
        Ok(x) => x,
        Err(Error::Singular { .. }) => return Ok(MMatrixCertificate::rejected()),
        Err(e) => return Err(e),
    };
    let floor = POSITIVITY_REL * x.norm_inf();
    if x.iter().all(|&v| v > floor) {
        Ok(MMatrixCertificate { is_m_matrix: true, witness: Some(x) })
    } else {
        Ok(MMatrixCertificate::rejected())
    }
}

/// Replaces every zero entry by `-eps`, leaving nonzero entries untouched.
///
/// Zero diagonal entries are replaced too; callers pass unit-diagonal
/// matrices.
pub fn epsilon_fill(a: &DenseMatrix, eps: f64) -> Result<DenseMatrix> {
    a.require_square("epsilon_fill input")?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::Parameter(format!("eps must be positive, got {eps}")));
    }
    let data = a.as_slice().iter().map(|&v| if v == 0.0 { -eps } else { v }).collect();
    DenseMatrix::new(a.rows(), a.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[f64; 2]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn z_matrix_predicate() {
        assert!(is_z_matrix(&DenseMatrix::identity(4)));
        assert!(!is_z_matrix(&m(&[[1.0, 0.1], [0.0, 1.0]])));
        assert!(is_z_matrix(&m(&[[-3.0, 0.0], [-1.0, 5.0]])));
        assert!(!is_z_matrix(&DenseMatrix::zeros(2, 3)));
    }

    #[test]
    fn identity_is_m_matrix() {
        let c = is_m_matrix(&DenseMatrix::identity(3)).unwrap();
        assert!(c.is_m_matrix);
        assert_eq!(c.witness.unwrap().as_slice(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn singular_z_matrix_rejected() {
        let c = is_m_matrix(&m(&[[1.0, -1.0], [-1.0, 1.0]])).unwrap();
        assert!(!c.is_m_matrix);
        assert!(c.witness.is_none());
    }

    #[test]
    fn two_by_two_witness() {
        // (1 - 0.5) x = 1 for the symmetric system, x = (2, 2)
        let c = is_m_matrix(&m(&[[1.0, -0.5], [-0.5, 1.0]])).unwrap();
        assert!(c.is_m_matrix);
        let w = c.witness.unwrap();
        assert!((w[0] - 2.0).abs() < 1e-14 && (w[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonsingular_but_not_m() {
        // inverse has negative entries: [[1,-2],[-2,1]] has det -3
        let c = is_m_matrix(&m(&[[1.0, -2.0], [-2.0, 1.0]])).unwrap();
        assert!(!c.is_m_matrix);
    }

    #[test]
    fn non_z_input_is_error() {
        assert!(matches!(is_m_matrix(&m(&[[1.0, 0.5], [0.0, 1.0]])), Err(Error::Precondition(_))));
    }

    #[test]
    fn epsilon_fill_cases() {
        let full = m(&[[1.0, -0.2], [-0.3, 1.0]]);
        assert_eq!(epsilon_fill(&full, 0.5).unwrap(), full);
        assert_eq!(epsilon_fill(&DenseMatrix::identity(2), 0.1).unwrap(), m(&[[1.0, -0.1], [-0.1, 1.0]]));
        assert!(matches!(epsilon_fill(&full, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(epsilon_fill(&full, -1.0), Err(Error::Parameter(_))));
        // verbatim: a zero diagonal is filled as well
        let zd = m(&[[0.0, -1.0], [-1.0, 1.0]]);
        assert_eq!(epsilon_fill(&zd, 0.25).unwrap().get(0, 0), -0.25);
    }
}
