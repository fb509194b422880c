//! Accelerated overrelaxation: iteration matrices, the stationary solver and
//! spectral radii of nonnegative iteration matrices.

use crate::error::{Error, Result};
use crate::matrix::{forward_substitute, norm2, DenseMatrix, SplittingTriple, Vector};
use crate::report::SolveReport;

/// Entries of an iteration matrix below `-NONNEGATIVE_SLACK` are treated as
/// genuinely negative.
pub const NONNEGATIVE_SLACK: f64 = 1e-12;

/// Default bracket width for spectral tables.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-6;
pub const DEFAULT_SPECTRAL_MAX_ITER: usize = 100_000;

const UNDERFLOW_FLOOR: f64 = 1e-300;
const ORACLE_MAX_DIM: usize = 6;
const ORACLE_TOL: f64 = 1e-10;
const DIVERGENCE_FACTOR: f64 = 1e12;

/// Relaxation pair `(γ, ω)` with `0 <= γ <= ω <= 1` and `ω != 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AorParams {
    gamma: f64,
    omega: f64,
}

impl AorParams {
    pub fn new(gamma: f64, omega: f64) -> Result<Self> {
        let ok = gamma.is_finite()
            && omega.is_finite()
            && 0.0 <= gamma
            && gamma <= omega
            && omega <= 1.0
            && omega != 0.0;
        if !ok {
            return Err(Error::Parameter(format!(
                "AOR parameters need 0 <= gamma <= omega <= 1, omega != 0; got ({gamma}, {omega})"
            )));
        }
        Ok(AorParams { gamma, omega })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn jacobi() -> Self {
        AorParams { gamma: 0.0, omega: 1.0 }
    }

    pub fn gauss_seidel() -> Self {
        AorParams { gamma: 1.0, omega: 1.0 }
    }

    pub fn sor(omega: f64) -> Result<Self> {
        AorParams::new(omega, omega)
    }
}

/// `(D - γL)` and `(1-ω)D + (ω-γ)L + ωU`.
fn aor_factors(split: &SplittingTriple, params: AorParams) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = split.dim();
    let (d, l, u) = (split.d(), split.l(), split.u());
    if let Some(i) = (0..n).find(|&i| !(d.get(i, i) > 0.0)) {
        return Err(Error::Precondition(format!(
            "AOR needs a positive diagonal, d[{i}] = {}",
            d.get(i, i)
        )));
    }
    let (g, w) = (params.gamma, params.omega);
    let lower = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            d.get(i, i)
        } else if i > j {
            -g * l.get(i, j)
        } else {
            0.0
        }
    })?;
    let rhs = DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (1.0 - w) * d.get(i, i)
        } else if i > j {
            (w - g) * l.get(i, j)
        } else {
            w * u.get(i, j)
        }
    })?;
    Ok((lower, rhs))
}

/// `T = (D - γL)⁻¹ [(1-ω)D + (ω-γ)L + ωU]`, built one column at a time by
/// forward substitution.
pub fn iteration_matrix(split: &SplittingTriple, params: AorParams) -> Result<DenseMatrix> {
    let n = split.dim();
    let (lower, rhs) = aor_factors(split, params)?;
    let mut t = DenseMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    let mut sol = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            col[i] = rhs.get(i, j);
        }
        forward_substitute(&lower, &col, &mut sol)?;
        for i in 0..n {
            t.set(i, j, sol[i]);
        }
    }
    Ok(t)
}

/// Collatz–Wielandt bracket for the spectral radius of a nonnegative matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    /// Midpoint of the bracket.
    pub rho: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Number of irreducible diagonal blocks (strongly connected classes).
    pub blocks: usize,
}

impl SpectralEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

struct PowerRun {
    lower: f64,
    upper: f64,
    iterations: usize,
    converged: bool,
}

/// Power iteration on `T + I` from `e`, tracking `min/max (Tx)_i / x_i`.
/// Both bounds are valid for any nonnegative `T`; they meet only when `T` is
/// irreducible, which the `+ I` shift makes primitive.
fn bracketed_power(t: &DenseMatrix, tol: f64, max_iter: usize) -> PowerRun {
    let n = t.rows();
    let mut x = vec![1.0; n];
    let mut tx = vec![0.0; n];
    let (mut lower, mut upper) = (0.0, f64::INFINITY);
    for k in 1..=max_iter {
        t.matvec_into(&x, &mut tx);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for (xi, ti) in x.iter().zip(&tx) {
            if *xi > UNDERFLOW_FLOOR {
                let r = ti / xi;
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        lower = lo.max(0.0);
        upper = hi.max(lower);
        if upper - lower <= tol {
            return PowerRun { lower, upper, iterations: k, converged: true };
        }
        let mut scale = 0.0f64;
        for (xi, ti) in x.iter_mut().zip(&tx) {
            *xi += ti;
            scale = scale.max(*xi);
        }
        if scale > 0.0 {
            for xi in x.iter_mut() {
                *xi /= scale;
            }
        }
    }
    PowerRun { lower, upper, iterations: max_iter, converged: false }
}

/// Strongly connected components of the graph with an edge `i -> j` for every
/// `t_ij > 0` (Kosaraju, iterative).
fn strong_components(t: &DenseMatrix) -> Vec<Vec<usize>> {
    let n = t.rows();
    let edge = |i: usize, j: usize| t.get(i, j) > 0.0;

    let mut order = Vec::with_capacity(n);
    let mut visited = vec![false; n];
    for root in 0..n {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (v, ref mut next)) = stack.last_mut() {
            if let Some(w) = (*next..n).find(|&w| !visited[w] && edge(v, w)) {
                *next = w + 1;
                visited[w] = true;
                stack.push((w, 0));
            } else {
                order.push(v);
                stack.pop();
            }
        }
    }

    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for &root in order.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = out.len();
        comp[root] = id;
        let mut members = vec![root];
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if comp[w] == usize::MAX && edge(w, v) {
                    comp[w] = id;
                    members.push(w);
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Spectral radius of a nonnegative matrix with Collatz–Wielandt bounds.
///
/// Entries in `[-1e-12, 0)` are clamped to zero; anything more negative is a
/// precondition error. The matrix is split into its irreducible diagonal
/// blocks and `ρ(T)` is the largest block radius; each block with more than
/// one node is bracketed by power iteration on `T_kk + I`, using at most
/// `max_iter` steps per block. Non-convergence is reported through
/// `converged = false`.
pub fn spectral_radius(t: &DenseMatrix, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    let n = t.require_square("iteration matrix")?;
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if let Some(pos) = t.as_slice().iter().position(|&v| v < -NONNEGATIVE_SLACK) {
        return Err(Error::Precondition(format!(
            "matrix is not nonnegative: entry ({}, {}) = {:e}",
            pos / n,
            pos % n,
            t.as_slice()[pos]
        )));
    }
    let clamped = DenseMatrix::new(n, n, t.as_slice().iter().map(|&v| v.max(0.0)).collect())?;
    let components = strong_components(&clamped);
    let (mut lower, mut upper, mut iterations, mut converged) = (0.0f64, 0.0f64, 0, true);
    // largest blocks first, so small ones can often be skipped
    let mut order: Vec<&Vec<usize>> = components.iter().collect();
    order.sort_by_key(|c| std::cmp::Reverse(c.len()));
    for members in order {
        if let [i] = members[..] {
            let v = clamped.get(i, i);
            lower = lower.max(v);
            upper = upper.max(v);
            continue;
        }
        // the block's radius is at most its largest row sum
        let bound = members.iter().map(|&i| members.iter().map(|&j| clamped.get(i, j)).sum::<f64>()).fold(0.0, f64::max);
        if bound <= lower {
            continue;
        }
        let block = if members.len() == n {
            clamped.clone()
        } else {
            DenseMatrix::from_fn(members.len(), members.len(), |a, b| clamped.get(members[a], members[b]))?
        };
        let run = bracketed_power(&block, tol, max_iter);
        iterations += run.iterations;
        converged &= run.converged;
        lower = lower.max(run.lower);
        upper = upper.max(run.upper);
    }
    Ok(SpectralEstimate {
        rho: 0.5 * (lower + upper),
        lower,
        upper,
        iterations,
        converged: converged && upper - lower <= tol,
        blocks: components.len(),
    })
}

/// `x > ρ(T)` iff `xI - T` is a nonsingular M-matrix, which for a Z-matrix
/// holds iff Gaussian elimination without pivoting produces only positive
/// pivots (all leading principal minors positive).
fn shifted_is_nonsingular_m(t: &DenseMatrix, x: f64) -> bool {
    let n = t.rows();
    let mut m: Vec<f64> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i == j {
                x - t.get(i, j)
            } else {
                -t.get(i, j)
            }
        })
        .collect();
    for k in 0..n {
        let pivot = m[k * n + k];
        if !(pivot > 0.0) {
            return false;
        }
        for i in (k + 1)..n {
            let f = m[i * n + k] / pivot;
            for j in (k + 1)..n {
                m[i * n + j] -= f * m[k * n + j];
            }
        }
    }
    true
}

/// Reference spectral radius for small nonnegative matrices (`n <= 6`).
///
/// Bisects on `x` using the sign of the leading principal minors of
/// `xI - T`: they are all positive exactly when `x > ρ(T)`. The bracket is
/// refined to width `1e-10` and its midpoint returned.
pub fn spectral_radius_oracle(t: &DenseMatrix) -> Result<f64> {
    let n = t.require_square("oracle input")?;
    if n > ORACLE_MAX_DIM {
        return Err(Error::Dimension(format!("oracle limited to n <= {ORACLE_MAX_DIM}, got {n}")));
    }
    if t.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::Precondition("oracle needs a nonnegative matrix".into()));
    }
    let (mut lo, mut hi) = (0.0, t.norm_inf() * (1.0 + 1e-6) + 1e-3);
    if !shifted_is_nonsingular_m(t, hi) {
        return Err(Error::Consistency("upper bracket is not above the spectral radius".into()));
    }
    while hi - lo > ORACLE_TOL {
        let mid = 0.5 * (lo + hi);
        if shifted_is_nonsingular_m(t, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn residual_norm(a: &SplittingTriple, b: &[f64], x: &[f64], scratch: &mut [f64]) -> f64 {
    let (d, l, u) = (a.d(), a.l(), a.u());
    let n = a.dim();
    for i in 0..n {
        let mut s = d.get(i, i) * x[i];
        for j in 0..i {
            s -= l.get(i, j) * x[j];
        }
        for j in (i + 1)..n {
            s -= u.get(i, j) * x[j];
        }
        scratch[i] = b[i] - s;
    }
    norm2(scratch)
}

/// Stationary AOR iteration
/// `(D - γL) x_{k+1} = [(1-ω)D + (ω-γ)L + ωU] x_k + ω b`
/// until `‖b - A x_k‖₂ / ‖b‖₂ <= tol`, with `A = D - L - U`.
/// A zero right-hand side uses the absolute residual instead.
pub fn aor_solve(
    split: &SplittingTriple,
    b: &[f64],
    params: AorParams,
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport> {
    let n = split.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::Dimension(format!(
            "system of size {n} with rhs {} and initial guess {}",
            b.len(),
            x0.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let (lower, rhs) = aor_factors(split, params)?;
    let bnorm = norm2(b);
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    let mut scratch = vec![0.0; n];
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    let initial = residual_norm(split, b, &x, &mut scratch) / scale;
    let mut rel = initial;
    let mut iterations = 0;
    let mut next = vec![0.0; n];
    let mut work = vec![0.0; n];
    while rel > tol && iterations < max_iter {
        rhs.matvec_into(&x, &mut work);
        for (wi, bi) in work.iter_mut().zip(b) {
            *wi += params.omega * bi;
        }
        forward_substitute(&lower, &work, &mut next)?;
        std::mem::swap(&mut x, &mut next);
        iterations += 1;
        rel = residual_norm(split, b, &x, &mut scratch) / scale;
        history.push(rel);
        if !rel.is_finite() || rel > DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence { iterations, residual: rel });
        }
    }
    Ok(SolveReport {
        iterations,
        restarts: 0,
        final_relative_residual: rel,
        converged: rel <= tol,
        residual_history: history,
        solution: Vector::from_vec_unchecked(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{lu_solve, split};

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(AorParams::new(0.7, 0.8).is_ok());
        assert!(AorParams::new(1.0, 1.0).is_ok());
        assert!(AorParams::new(0.0, 0.0).is_err());
        assert!(AorParams::new(0.9, 0.8).is_err());
        assert!(AorParams::new(-0.1, 0.8).is_err());
        assert!(AorParams::new(0.5, 1.2).is_err());
        assert!(AorParams::new(f64::NAN, 0.5).is_err());
    }

    fn sample() -> DenseMatrix {
        m(&[&[1.0, -0.2, -0.3], &[-0.1, 1.0, -0.4], &[-0.25, -0.15, 1.0]])
    }

    #[test]
    fn jacobi_special_case() {
        let s = split(&sample()).unwrap();
        let t = iteration_matrix(&s, AorParams::jacobi()).unwrap();
        let expect = s.l().add(s.u()).unwrap();
        assert!(t.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn gauss_seidel_special_case() {
        let s = split(&sample()).unwrap();
        let t = iteration_matrix(&s, AorParams::gauss_seidel()).unwrap();
        let i_minus_l = DenseMatrix::identity(3).sub(s.l()).unwrap();
        for j in 0..3 {
            let col: Vec<f64> = (0..3).map(|i| s.u().get(i, j)).collect();
            let x = lu_solve(&i_minus_l, &col).unwrap();
            for i in 0..3 {
                assert!((t.get(i, j) - x[i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn non_positive_diagonal_rejected() {
        let a = m(&[&[1.0, -0.5], &[-0.5, 0.0]]);
        let s = split(&a).unwrap();
        assert!(matches!(iteration_matrix(&s, AorParams::jacobi()), Err(Error::Precondition(_))));
    }

    #[test]
    fn spectral_radius_trivial() {
        let z = spectral_radius(&DenseMatrix::zeros(3, 3), 1e-10, 100).unwrap();
        assert!(z.converged && z.rho.abs() < 1e-15);
        let p = spectral_radius(&m(&[&[0.0, 2.0], &[2.0, 0.0]]), 1e-10, 1000).unwrap();
        assert!(p.converged && (p.rho - 2.0).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_periodic_cycle() {
        // 3-cycle permutation scaled by 0.5: eigenvalues 0.5 * cube roots of unity
        let t = m(&[&[0.0, 0.5, 0.0], &[0.0, 0.0, 0.5], &[0.5, 0.0, 0.0]]);
        let e = spectral_radius(&t, 1e-10, 10_000).unwrap();
        assert!(e.converged && (e.rho - 0.5).abs() < 1e-10);
    }

    #[test]
    fn spectral_radius_reducible() {
        // class {0} (0.3) cannot reach class {1,2} (0.8), so a single power run stalls
        let t = m(&[&[0.3, 0.0, 0.0], &[0.2, 0.0, 0.8], &[0.1, 0.8, 0.0]]);
        let e = spectral_radius(&t, 1e-9, 100_000).unwrap();
        assert!(e.converged && e.blocks == 2, "{e:?}");
        assert!((e.rho - 0.8).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn spectral_radius_decoupled_equal_blocks() {
        // two identical blocks joined one way: a Jordan block at the Perron root
        let t = m(&[&[0.0, 0.5, 0.0, 0.0], &[0.5, 0.0, 0.0, 0.0], &[0.3, 0.0, 0.0, 0.5], &[0.0, 0.0, 0.5, 0.0]]);
        let e = spectral_radius(&t, 1e-12, 1000).unwrap();
        assert!(e.converged && e.blocks == 2, "{e:?}");
        assert!((e.rho - 0.5).abs() < 1e-12, "{e:?}");
        let lower_triangular = m(&[&[0.2, 0.0], &[0.9, 0.7]]);
        let e = spectral_radius(&lower_triangular, 1e-12, 10).unwrap();
        assert_eq!((e.rho, e.iterations, e.blocks), (0.7, 0, 2));
    }

    #[test]
    fn spectral_radius_rejects_negative() {
        let t = m(&[&[0.0, -0.1], &[0.1, 0.0]]);
        assert!(matches!(spectral_radius(&t, 1e-8, 10), Err(Error::Precondition(_))));
        let tiny = m(&[&[0.5, -1e-14], &[0.0, 0.25]]);
        let e = spectral_radius(&tiny, 1e-10, 10_000).unwrap();
        assert!((e.rho - 0.5).abs() < 1e-10);
        assert!(spectral_radius(&tiny, 0.0, 10).is_err());
    }

    #[test]
    fn oracle_known_values() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
        assert!(close(spectral_radius_oracle(&DenseMatrix::diagonal(&[0.3, 0.7]).unwrap()).unwrap(), 0.7));
        assert!(close(spectral_radius_oracle(&m(&[&[0.5, 0.5], &[0.5, 0.5]])).unwrap(), 1.0));
        let third = DenseMatrix::from_fn(3, 3, |_, _| 1.0 / 3.0).unwrap();
        assert!(close(spectral_radius_oracle(&third).unwrap(), 1.0));
        assert!(close(spectral_radius_oracle(&DenseMatrix::zeros(2, 2)).unwrap(), 0.0));
        assert!(spectral_radius_oracle(&DenseMatrix::zeros(7, 7)).is_err());
    }

    #[test]
    fn zero_rhs_converges_immediately() {
        let s = split(&sample()).unwrap();
        let r = aor_solve(&s, &[0.0; 3], AorParams::new(0.7, 0.8).unwrap(), &[0.0; 3], 1e-10, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        assert!(r.residual_history.is_empty());
    }

    #[test]
    fn solves_small_system() {
        let a = sample();
        let s = split(&a).unwrap();
        let b = a.matvec(&[1.0, 2.0, 3.0]).unwrap();
        let r = aor_solve(&s, &b, AorParams::new(0.8, 1.0).unwrap(), &[0.0; 3], 1e-12, 1000).unwrap();
        assert!(r.converged);
        for (xi, want) in r.solution.iter().zip([1.0, 2.0, 3.0]) {
            assert!((xi - want).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_detected() {
        // Jacobi on a non-M-matrix with ρ(L+U) = 3
        let a = m(&[&[1.0, -3.0], &[-3.0, 1.0]]);
        let s = split(&a).unwrap();
        let r = aor_solve(&s, &[1.0, 0.5], AorParams::jacobi(), &[0.0, 0.0], 1e-10, 10_000);
        assert!(matches!(r, Err(Error::Divergence { .. })));
    }
}
