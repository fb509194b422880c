//! Test problems: 5-point convection-diffusion discretizations on the unit
//! square (dense and matrix-free) and seeded random M-matrices.
//!
//! Unknowns are numbered with the x index fastest, so node `(i, j)` (both
//! 1-based) is row `(j - 1) N + (i - 1)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gmres::LinearOperator;
use crate::matrix::{kron, tridiag, DenseMatrix};
use crate::precond::NamedPreconditioner;

/// Uniform grid of `N x N` interior nodes with mesh width `h`. Node
/// coordinates are `x_i = i h`, `y_j = j h` for `i, j = 1..N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    n: usize,
    h: f64,
}

impl GridSpec {
    /// Mesh width `h = 1/N`.
    pub fn one_over_n(n: usize) -> Result<Self> {
        Self::check(n)?;
        Ok(GridSpec { n, h: 1.0 / n as f64 })
    }

    /// Mesh width `h = 1/(N+1)`: the `N` interior nodes of the unit
    /// interval with both boundary nodes excluded.
    pub fn interior(n: usize) -> Result<Self> {
        Self::check(n)?;
        Ok(GridSpec { n, h: 1.0 / (n as f64 + 1.0) })
    }

    fn check(n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::Parameter(format!("grid needs N >= 2, got {n}")));
        }
        n.checked_mul(n)
            .ok_or_else(|| Error::Capacity(format!("grid of {n}x{n} nodes")))?;
        Ok(())
    }

    pub fn nodes_per_side(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn unknowns(&self) -> usize {
        self.n * self.n
    }
}

/// Which convection-diffusion model problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Example {
    /// `-(u_xx + u_yy) + u_x + 2 u_y`, `h = 1/N`.
    One,
    /// `-(u_xx + u_yy) + 2 e^{x+y} (x u_x + y u_y)`, `h = 1/(N+1)`.
    Two,
}

impl Example {
    pub fn number(self) -> u8 {
        match self {
            Example::One => 1,
            Example::Two => 2,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Example::One),
            "2" => Ok(Example::Two),
            other => Err(Error::Parameter(format!("unknown example {other:?}, expected 1 or 2"))),
        }
    }
}

/// Neighbor slots of a 5-point row, in increasing column order.
const SOUTH: usize = 0;
const WEST: usize = 1;
const CENTER: usize = 2;
const EAST: usize = 3;
const NORTH: usize = 4;

/// Matrix with (at most) a 5-point stencil pattern on an `N x N` grid,
/// stored as five coefficients per row: `[south, west, center, east,
/// north]`, i.e. columns `r - N, r - 1, r, r + 1, r + N`. Coefficients that
/// would reach outside the grid are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct StencilMatrix {
    side: usize,
    coeffs: Vec<[f64; 5]>,
}

impl StencilMatrix {
    fn column(&self, row: usize, slot: usize) -> Option<usize> {
        let n = self.side;
        let (i, j) = (row % n, row / n);
        match slot {
            SOUTH if j > 0 => Some(row - n),
            WEST if i > 0 => Some(row - 1),
            CENTER => Some(row),
            EAST if i + 1 < n => Some(row + 1),
            NORTH if j + 1 < n => Some(row + n),
            _ => None,
        }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn coefficients(&self, row: usize) -> [f64; 5] {
        self.coeffs[row]
    }

    pub fn to_dense(&self) -> Result<DenseMatrix> {
        let n = self.dim();
        n.checked_mul(n)
            .ok_or_else(|| Error::Capacity(format!("dense {n}x{n}")))?;
        let mut m = DenseMatrix::zeros(n, n);
        for r in 0..n {
            for slot in 0..5 {
                if let Some(c) = self.column(r, slot) {
                    m.set(r, c, self.coeffs[r][slot]);
                }
            }
        }
        Ok(m)
    }

    /// The preconditioner `P̃ = I - α ∘ offdiag(A)` for a named member, on the
    /// same stencil pattern. `α` values are drawn over nonzero off-diagonal
    /// entries in row-major order, matching the dense construction.
    pub fn preconditioner(&self, which: NamedPreconditioner, seed: u64) -> Result<StencilMatrix> {
        let mut src = which.alpha_source(seed);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (r, row) in self.coeffs.iter().enumerate() {
            if (row[CENTER] - 1.0).abs() > 1e-14 {
                return Err(Error::Precondition(format!(
                    "unit diagonal required, a[{r}][{r}] = {}",
                    row[CENTER]
                )));
            }
            let mut p = [0.0; 5];
            p[CENTER] = 1.0;
            for slot in [SOUTH, WEST, EAST, NORTH] {
                if let Some(c) = self.column(r, slot) {
                    let a = row[slot];
                    if a != 0.0 {
                        p[slot] = -src.next(r, c) * a;
                    }
                }
            }
            coeffs.push(p);
        }
        Ok(StencilMatrix { side: self.side, coeffs })
    }
}

impl LinearOperator for StencilMatrix {
    fn dim(&self) -> usize {
        self.coeffs.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.side;
        for (r, (yr, c)) in y.iter_mut().zip(&self.coeffs).enumerate() {
            let (i, j) = (r % n, r / n);
            let mut s = c[CENTER] * x[r];
            if j > 0 {
                s += c[SOUTH] * x[r - n];
            }
            if i > 0 {
                s += c[WEST] * x[r - 1];
            }
            if i + 1 < n {
                s += c[EAST] * x[r + 1];
            }
            if j + 1 < n {
                s += c[NORTH] * x[r + n];
            }
            *yr = s;
        }
    }
}

/// Centered-difference discretization of `-(u_xx + u_yy) + b₁ u_x + b₂ u_y`
/// with homogeneous Dirichlet data, each row scaled by `h²/4` so the
/// diagonal is 1. Convection coefficients are evaluated at the node:
///
/// ```text
/// west/east   = -(2 ± b₁ h) / 8
/// south/north = -(2 ± b₂ h) / 8
/// ```
pub fn convection_diffusion(grid: GridSpec, coeff: impl Fn(f64, f64) -> (f64, f64)) -> StencilMatrix {
    let (n, h) = (grid.n, grid.h);
    let mut coeffs = Vec::with_capacity(n * n);
    for j in 1..=n {
        for i in 1..=n {
            let (b1, b2) = coeff(i as f64 * h, j as f64 * h);
            let mut c = [0.0; 5];
            c[CENTER] = 1.0;
            if j > 1 {
                c[SOUTH] = -(2.0 + b2 * h) / 8.0;
            }
            if i > 1 {
                c[WEST] = -(2.0 + b1 * h) / 8.0;
            }
            if i < n {
                c[EAST] = -(2.0 - b1 * h) / 8.0;
            }
            if j < n {
                c[NORTH] = -(2.0 - b2 * h) / 8.0;
            }
            coeffs.push(c);
        }
    }
    StencilMatrix { side: n, coeffs }
}

/// `A = I ⊗ P + Q ⊗ I` with `P = tridiag(-(2+h)/8, 1, -(2-h)/8)`,
/// `Q = tridiag(-(1+h)/4, 0, -(1-h)/4)` and `h = 1/N`.
pub fn example1_matrix(n: usize) -> Result<DenseMatrix> {
    let h = GridSpec::one_over_n(n)?.h();
    let p = tridiag(n, -(2.0 + h) / 8.0, 1.0, -(2.0 - h) / 8.0)?;
    let q = tridiag(n, -(1.0 + h) / 4.0, 0.0, -(1.0 - h) / 4.0)?;
    let eye = DenseMatrix::identity(n);
    kron(&eye, &p)?.add(&kron(&q, &eye)?)
}

/// Convection field `(2 e^{x+y} x, 2 e^{x+y} y)`.
pub fn example2_coefficients(x: f64, y: f64) -> (f64, f64) {
    let s = 2.0 * (x + y).exp();
    (s * x, s * y)
}

pub fn example1_stencil(n: usize) -> Result<StencilMatrix> {
    Ok(convection_diffusion(GridSpec::one_over_n(n)?, |_, _| (1.0, 2.0)))
}

pub fn example2_stencil(n: usize) -> Result<StencilMatrix> {
    Ok(convection_diffusion(GridSpec::interior(n)?, example2_coefficients))
}

pub fn example2_matrix(n: usize) -> Result<DenseMatrix> {
    example2_stencil(n)?.to_dense()
}

pub fn example_matrix(which: Example, n: usize) -> Result<DenseMatrix> {
    match which {
        Example::One => example1_matrix(n),
        Example::Two => example2_matrix(n),
    }
}

/// Matrix-free operator for a model problem; memory is `O(N²)`.
pub fn stencil_operator(which: Example, n: usize) -> Result<StencilMatrix> {
    match which {
        Example::One => example1_stencil(n),
        Example::Two => example2_stencil(n),
    }
}

fn random_nonnegative_offdiag(n: usize, density: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let mut b = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen::<f64>() < density {
                b.set(i, j, rng.gen::<f64>());
            }
        }
    }
    b
}

fn check_random_args(n: usize, density: f64) -> Result<()> {
    if n < 2 {
        return Err(Error::Parameter(format!("need n >= 2, got {n}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Parameter(format!("density must be in (0, 1], got {density}")));
    }
    Ok(())
}

/// `A = I - B` with `B >= 0` of the given off-diagonal density, entries
/// uniform on `[0, 1)` and rescaled so that `‖B‖∞ = 0.9`. Strict diagonal
/// dominance makes `A` an M-matrix.
pub fn random_m_matrix(n: usize, density: f64, seed: u64) -> Result<DenseMatrix> {
    check_random_args(n, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = random_nonnegative_offdiag(n, density, &mut rng);
    let norm = b.norm_inf();
    let b = if norm > 0.0 { b.scale(0.9 / norm) } else { b };
    DenseMatrix::identity(n).sub(&b)
}

/// `A = I - c B / ρ(B)` for a random `B >= 0` as in [`random_m_matrix`].
/// When `ρ(B) > 0`, `A` is an M-matrix iff `c < 1`. Falls back to `A = I - c B / ‖B‖∞` with the
/// supplied radius when `rho_of` reports zero (nilpotent `B`).
pub fn random_unit_z_matrix(
    n: usize,
    density: f64,
    scale: f64,
    seed: u64,
    rho_of: impl Fn(&DenseMatrix) -> Result<f64>,
) -> Result<DenseMatrix> {
    check_random_args(n, density)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = random_nonnegative_offdiag(n, density, &mut rng);
    let rho = rho_of(&b)?;
    let norm = if rho > 0.0 { rho } else { b.norm_inf().max(1.0) };
    DenseMatrix::identity(n).sub(&b.scale(scale / norm))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_specs() {
        assert_eq!(GridSpec::one_over_n(4).unwrap().h(), 0.25);
        assert_eq!(GridSpec::interior(4).unwrap().h(), 0.2);
        assert!(GridSpec::one_over_n(1).is_err());
        assert!(example1_matrix(1).is_err());
        assert!(example2_matrix(0).is_err());
        assert_eq!(GridSpec::one_over_n(7).unwrap().unknowns(), 49);
    }

    #[test]
    fn example1_by_hand_n2() {
        // h = 1/2: P = tridiag(-5/16, 1, -3/16), Q = tridiag(-3/8, 0, -1/8)
        let a = example1_matrix(2).unwrap();
        let p_sub = -(2.0 + 0.5) / 8.0;
        let p_sup = -(2.0 - 0.5) / 8.0;
        let q_sub = -(1.0 + 0.5) / 4.0;
        let q_sup = -(1.0 - 0.5) / 4.0;
        let expect = DenseMatrix::from_rows(&[
            [1.0, p_sup, q_sup, 0.0],
            [p_sub, 1.0, 0.0, q_sup],
            [q_sub, 0.0, 1.0, p_sup],
            [0.0, q_sub, p_sub, 1.0],
        ])
        .unwrap();
        assert_eq!(a, expect);
        assert_eq!(p_sub, -0.3125);
        assert_eq!(q_sup, -0.125);
    }

    #[test]
    fn unit_diagonal() {
        for n in [2, 3, 6] {
            for a in [example1_matrix(n).unwrap(), example2_matrix(n).unwrap()] {
                assert!(a.diag().iter().all(|&d| d == 1.0));
            }
        }
    }

    #[test]
    fn stencil_dense_agree_exactly_example1() {
        for n in [2, 3, 5] {
            assert_eq!(example1_stencil(n).unwrap().to_dense().unwrap(), example1_matrix(n).unwrap());
        }
    }

    #[test]
    fn example_parse() {
        assert_eq!("1".parse::<Example>().unwrap(), Example::One);
        assert_eq!(" 2".parse::<Example>().unwrap(), Example::Two);
        assert!("3".parse::<Example>().is_err());
    }

    #[test]
    fn random_m_matrix_deterministic() {
        let a = random_m_matrix(8, 0.4, 5).unwrap();
        assert_eq!(a, random_m_matrix(8, 0.4, 5).unwrap());
        assert_ne!(a, random_m_matrix(8, 0.4, 6).unwrap());
        assert!(a.diag().iter().all(|&d| d == 1.0));
        let b = DenseMatrix::identity(8).sub(&a).unwrap();
        assert!(b.norm_inf() <= 0.9 + 1e-15);
        assert!(random_m_matrix(1, 0.5, 0).is_err());
        assert!(random_m_matrix(4, 0.0, 0).is_err());
        assert!(random_m_matrix(4, 1.5, 0).is_err());
    }

    #[test]
    fn preconditioner_stencil_rejects_non_unit() {
        let mut s = example1_stencil(3).unwrap();
        s.coeffs[4][CENTER] = 2.0;
        assert!(s.preconditioner(NamedPreconditioner::P4, 0).is_err());
    }
}
