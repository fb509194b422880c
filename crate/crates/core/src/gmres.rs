//! Restarted GMRES(m) with left preconditioning.
//!
//! Each cycle builds an Arnoldi basis of `P A` with single-pass modified
//! Gram–Schmidt and reduces the Hessenberg matrix with Givens rotations.
//! After every inner step the current iterate is formed and the true
//! residual `‖b - A x_k‖₂ / ‖b‖₂` is measured; that quantity decides
//! convergence.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, DenseMatrix, Vector};
use crate::report::SolveReport;

/// Arnoldi steps with `h_{k+1,k}` below this fraction of the initial
/// preconditioned residual end the cycle.
pub const BREAKDOWN_REL: f64 = 1e-14;

/// A square linear map applied by matrix-vector product.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length [`LinearOperator::dim`].
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y);
        y
    }
}

/// Dense matrix-vector product.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    matrix: DenseMatrix,
}

impl DenseOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec_into(x, y);
    }
}

/// Wraps a square dense matrix as a [`LinearOperator`].
pub fn make_operator(a: DenseMatrix) -> Result<DenseOperator> {
    a.require_square("operator matrix")?;
    Ok(DenseOperator { matrix: a })
}

/// The identity map on `R^n`.
#[derive(Clone, Copy, Debug)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

/// Diagnostics beyond [`SolveReport`].
#[derive(Clone, Debug, Default)]
pub struct GmresTrace {
    /// Givens estimate of `‖P(b - A x_k)‖₂ / ‖P b‖₂` after every inner step.
    pub estimate_history: Vec<f64>,
    /// Indices into the histories where a new cycle started.
    pub cycle_starts: Vec<usize>,
    /// Preconditioned relative residual at the start of every cycle.
    pub cycle_start_residuals: Vec<f64>,
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Solves `P A x = P b` from `x₀ = 0` with GMRES(m).
///
/// Stops once the true relative residual drops below `tol` or after
/// `max_total_iter` inner steps (`converged = false`).
pub fn gmres_restarted<A, P>(
    a_op: &A,
    p_op: &P,
    b: &[f64],
    m: usize,
    tol: f64,
    max_total_iter: usize,
) -> Result<SolveReport>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    gmres_restarted_traced(a_op, p_op, b, m, tol, max_total_iter).map(|(r, _)| r)
}

/// [`gmres_restarted`] plus the preconditioned-residual trace.
pub fn gmres_restarted_traced<A, P>(
    a_op: &A,
    p_op: &P,
    b: &[f64],
    m: usize,
    tol: f64,
    max_total_iter: usize,
) -> Result<(SolveReport, GmresTrace)>
where
    A: LinearOperator + ?Sized,
    P: LinearOperator + ?Sized,
{
    let n = a_op.dim();
    if p_op.dim() != n || b.len() != n {
        return Err(Error::Dimension(format!(
            "operator {n}, preconditioner {}, rhs {}",
            p_op.dim(),
            b.len()
        )));
    }
    if m == 0 {
        return Err(Error::Parameter("restart length must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Err(Error::Parameter("right-hand side must be nonzero".into()));
    }
    let pbnorm = norm2(&p_op.apply_vec(b));

    let mut x = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut r = b.to_vec();
    let mut ax = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = (0..=m).map(|_| vec![0.0; n]).collect();
    // column-major Hessenberg, h[k] holds column k (length m + 1)
    let mut h = vec![vec![0.0; m + 1]; m];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut y = vec![0.0; m];

    let mut history = Vec::new();
    let mut trace = GmresTrace::default();
    let mut iterations = 0;
    let mut cycles: usize = 0;
    let mut rel = 1.0;
    let mut beta0 = None;

    while iterations < max_total_iter {
        // r = b - A x, z = P r
        a_op.apply(&x, &mut ax);
        for i in 0..n {
            r[i] = b[i] - ax[i];
        }
        rel = norm2(&r) / bnorm;
        if rel < tol {
            break;
        }
        p_op.apply(&r, &mut z);
        let beta = norm2(&z);
        let beta0 = *beta0.get_or_insert(beta);
        cycles += 1;
        trace.cycle_starts.push(history.len());
        trace.cycle_start_residuals.push(beta / pbnorm);
        if beta == 0.0 {
            // P r = 0 with r ≠ 0: P is singular, nothing more to gain
            break;
        }
        for (v, zi) in basis[0].iter_mut().zip(&z) {
            *v = zi / beta;
        }
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[0] = beta;

        let mut steps = 0;
        let mut done = false;
        for k in 0..m {
            a_op.apply(&basis[k], &mut ax);
            p_op.apply(&ax, &mut w);
            for i in 0..=k {
                let hik = dot(&w, &basis[i]);
                h[k][i] = hik;
                for (wj, vj) in w.iter_mut().zip(&basis[i]) {
                    *wj -= hik * vj;
                }
            }
            let hnext = norm2(&w);
            h[k][k + 1] = hnext;
            let breakdown = hnext <= BREAKDOWN_REL * beta0;
            if !breakdown {
                for (v, wj) in basis[k + 1].iter_mut().zip(&w) {
                    *v = wj / hnext;
                }
            }
            for i in 0..k {
                let t = cs[i] * h[k][i] + sn[i] * h[k][i + 1];
                h[k][i + 1] = -sn[i] * h[k][i] + cs[i] * h[k][i + 1];
                h[k][i] = t;
            }
            let (c, s) = givens(h[k][k], h[k][k + 1]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k][k + 1];
            h[k][k + 1] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            steps = k + 1;
            iterations += 1;
            trace.estimate_history.push(g[k + 1].abs() / pbnorm);

            // x_k = x + V y with R y = g
            for i in (0..steps).rev() {
                let s: f64 = ((i + 1)..steps).map(|j| h[j][i] * y[j]).sum();
                y[i] = (g[i] - s) / h[i][i];
            }
            trial.copy_from_slice(&x);
            for (j, yj) in y.iter().enumerate().take(steps) {
                for (t, v) in trial.iter_mut().zip(&basis[j]) {
                    *t += yj * v;
                }
            }
            a_op.apply(&trial, &mut ax);
            let res: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai) * (bi - ai)).sum::<f64>().sqrt();
            rel = res / bnorm;
            history.push(rel);
            if rel < tol || breakdown || iterations >= max_total_iter {
                done = rel < tol || iterations >= max_total_iter;
                break;
            }
        }
        if steps > 0 {
            x.copy_from_slice(&trial);
        }
        if done {
            break;
        }
    }

    let converged = rel < tol;
    Ok((
        SolveReport {
            iterations,
            restarts: cycles.saturating_sub(1),
            final_relative_residual: rel,
            converged,
            residual_history: history,
            solution: Vector::from_vec_unchecked(x),
        },
        trace,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_one_step() {
        let b = [1.0, -2.0, 0.5, 4.0];
        let r = gmres_restarted(&Identity(4), &Identity(4), &b, 10, 1e-10, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.cycles(), 1);
        for (x, bi) in r.solution.iter().zip(&b) {
            assert!((x - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn argument_validation() {
        let i = Identity(2);
        assert!(matches!(gmres_restarted(&i, &i, &[0.0, 0.0], 5, 1e-8, 10), Err(Error::Parameter(_))));
        assert!(matches!(gmres_restarted(&i, &i, &[1.0, 0.0], 0, 1e-8, 10), Err(Error::Parameter(_))));
        assert!(matches!(gmres_restarted(&i, &i, &[1.0, 0.0], 2, 0.0, 10), Err(Error::Parameter(_))));
        assert!(matches!(gmres_restarted(&i, &Identity(3), &[1.0, 0.0], 2, 1e-8, 10), Err(Error::Dimension(_))));
    }

    #[test]
    fn small_nonsymmetric_system() {
        let a = DenseMatrix::from_rows(&[[4.0, 1.0, 0.0], [-1.0, 3.0, 1.0], [0.5, 0.0, 2.0]]).unwrap();
        let op = make_operator(a.clone()).unwrap();
        let b = a.matvec(&[1.0, 1.0, 1.0]).unwrap();
        let r = gmres_restarted(&op, &Identity(3), &b, 10, 1e-12, 50).unwrap();
        assert!(r.converged);
        // full Krylov space reached after n steps
        assert!(r.iterations <= 3);
        for x in r.solution.iter() {
            assert!((x - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn iteration_cap() {
        let n = 30;
        let a = DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if j == (i + 1) % n { -0.999 } else { 0.0 })
            .unwrap();
        let op = make_operator(a.clone()).unwrap();
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let r = gmres_restarted(&op, &Identity(n), &b, 2, 1e-12, 7).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 7);
        assert_eq!(r.residual_history.len(), 7);
        assert_eq!(r.cycles(), 4);
    }

    #[test]
    fn dense_operator_matches_product() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let op = make_operator(a).unwrap();
        assert_eq!(op.apply_vec(&[1.0, -1.0]), vec![-1.0, -1.0]);
        assert!(make_operator(DenseMatrix::zeros(2, 3)).is_err());
    }
}
