//! The preconditioner family `P = I + L(α) + U(α)` with `p_ij = -α_ij a_ij`
//! for a unit-diagonal matrix `A`, the preconditioned matrix `Ã = P A`, and
//! its splitting `Ã = D̃ - L̃ - Ũ` assembled from the triangular parts of the
//! products `L(α)U` and `U(α)L`.

use std::fmt;
use std::str::FromStr;

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, SplittingTriple};

/// Tolerance for the `Ã = D̃ - L̃ - Ũ` reconstruction check, relative to
/// `max(1, max |ã_ij|)`.
pub const ASSEMBLY_TOL: f64 = 1e-12;

/// Slack allowed when evaluating the comparison condition for `α ≡ 1`
/// optimality.
pub const CONDITION_TOL: f64 = 1e-12;

const UNIT_DIAGONAL_TOL: f64 = 1e-14;

/// Off-diagonal coefficients `α_ij ∈ [0, 1]`. Diagonal slots are stored as
/// zero and ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaMask {
    n: usize,
    alpha: Vec<f64>,
}

impl AlphaMask {
    /// Builds a mask from an `n x n` row-major array; diagonal entries are
    /// ignored. Values outside `[0, 1]` are rejected.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Dimension(format!(
                "alpha mask for n = {n} needs {} values, got {}",
                n * n,
                values.len()
            )));
        }
        let mut alpha = values;
        for i in 0..n {
            for j in 0..n {
                let v = alpha[i * n + j];
                if i == j {
                    alpha[i * n + j] = 0.0;
                } else if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parameter(format!("alpha[{i}][{j}] = {v} outside [0, 1]")));
                }
            }
        }
        Ok(AlphaMask { n, alpha })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(if i == j { 0.0 } else { f(i, j) });
            }
        }
        AlphaMask::new(n, values)
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        AlphaMask::from_fn(n, |_, _| value)
    }

    /// `α` drawn i.i.d. uniform on `(0, 1)` for every off-diagonal slot, in
    /// row-major order.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alpha = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    alpha[i * n + j] = rng.sample(Open01);
                }
            }
        }
        AlphaMask { n, alpha }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.alpha[i * self.n + j]
    }
}

pub(crate) fn require_unit_diagonal(a: &DenseMatrix) -> Result<usize> {
    let n = a.require_square("matrix")?;
    for i in 0..n {
        if (a.get(i, i) - 1.0).abs() > UNIT_DIAGONAL_TOL {
            return Err(Error::Precondition(format!(
                "unit diagonal required, a[{i}][{i}] = {}",
                a.get(i, i)
            )));
        }
    }
    Ok(n)
}

fn require_mask(a_dim: usize, mask: &AlphaMask) -> Result<()> {
    if mask.dim() != a_dim {
        return Err(Error::Dimension(format!(
            "alpha mask is {}x{}, matrix is {a_dim}x{a_dim}",
            mask.dim(),
            mask.dim()
        )));
    }
    Ok(())
}

/// `P̃` with unit diagonal and `p_ij = -α_ij a_ij` off the diagonal.
pub fn build_preconditioner(a: &DenseMatrix, mask: &AlphaMask) -> Result<DenseMatrix> {
    let n = require_unit_diagonal(a)?;
    require_mask(n, mask)?;
    DenseMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { -mask.get(i, j) * a.get(i, j) })
}

/// `Ã = P A`.
pub fn preconditioned_matrix(a: &DenseMatrix, p: &DenseMatrix) -> Result<DenseMatrix> {
    a.require_square("A")?;
    p.require_square("P")?;
    p.matmul(a)
}

/// Entries of `P̃ A` evaluated term by term from the closed form
///
/// ```text
/// ã_ii = 1 - Σ_{k≠i} α_ik a_ik a_ki
/// ã_ij = a_ij - α_ij a_ij - Σ_{k≠i,j} α_ik a_ik a_kj      (i ≠ j)
/// ```
///
/// for unit-diagonal `A`. Used to cross-check [`preconditioned_matrix`].
pub fn closed_form_preconditioned(a: &DenseMatrix, mask: &AlphaMask) -> Result<DenseMatrix> {
    let n = require_unit_diagonal(a)?;
    require_mask(n, mask)?;
    DenseMatrix::from_fn(n, n, |i, j| {
        let s: f64 = (0..n)
            .filter(|&k| k != i && k != j)
            .map(|k| mask.get(i, k) * a.get(i, k) * a.get(k, j))
            .sum();
        if i == j {
            1.0 - s
        } else {
            a.get(i, j) - mask.get(i, j) * a.get(i, j) - s
        }
    })
}

/// Diagonal (`g`), strictly upper (`e`) and strictly lower (`f`) parts of a
/// product matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangularParts {
    pub g: DenseMatrix,
    pub e: DenseMatrix,
    pub f: DenseMatrix,
}

impl TriangularParts {
    fn of(m: &DenseMatrix) -> Self {
        TriangularParts { g: m.diagonal_part(), e: m.strict_upper(), f: m.strict_lower() }
    }

    pub fn sum(&self) -> DenseMatrix {
        let mut s = self.g.clone();
        let n = s.rows();
        for i in 0..n {
            for j in 0..n {
                s.set(i, j, s.get(i, j) + self.e.get(i, j) + self.f.get(i, j));
            }
        }
        s
    }
}

/// `Ã = P̃ A` together with its splitting and the intermediate parts.
#[derive(Clone, Debug)]
pub struct PreconditionedSplitting {
    pub a_tilde: DenseMatrix,
    pub splitting: SplittingTriple,
    /// Strictly lower part of `P̃`.
    pub l_alpha: DenseMatrix,
    /// Strictly upper part of `P̃`.
    pub u_alpha: DenseMatrix,
    /// Parts of `L(α) U`.
    pub lu_parts: TriangularParts,
    /// Parts of `U(α) L`.
    pub ul_parts: TriangularParts,
}

/// Assembles `D̃`, `L̃`, `Ũ` for `Ã = P̃ A` structurally:
///
/// ```text
/// D̃ = I - G₁ - G₂
/// L̃ = L - L(α) + L(α)L + F₁ + F₂
/// Ũ = U - U(α) + U(α)U + E₁ + E₂
/// ```
///
/// where `L(α)U = G₁ + E₁ + F₁` and `U(α)L = G₂ + E₂ + F₂` (G diagonal,
/// E strictly upper, F strictly lower). The result is checked against the
/// direct product `P̃ A`.
pub fn decompose_preconditioned(a: &DenseMatrix, mask: &AlphaMask) -> Result<PreconditionedSplitting> {
    let n = require_unit_diagonal(a)?;
    let p = build_preconditioner(a, mask)?;
    let base = crate::matrix::split(a)?;
    let (l, u) = (base.l(), base.u());
    let l_alpha = p.strict_lower();
    let u_alpha = p.strict_upper();

    let lu_parts = TriangularParts::of(&l_alpha.matmul(u)?);
    let ul_parts = TriangularParts::of(&u_alpha.matmul(l)?);
    let la_l = l_alpha.matmul(l)?;
    let ua_u = u_alpha.matmul(u)?;

    let mut d = DenseMatrix::zeros(n, n);
    let mut lt = DenseMatrix::zeros(n, n);
    let mut ut = DenseMatrix::zeros(n, n);
    for i in 0..n {
        d.set(i, i, 1.0 - lu_parts.g.get(i, i) - ul_parts.g.get(i, i));
        for j in 0..i {
            lt.set(
                i,
                j,
                l.get(i, j) - l_alpha.get(i, j)
                    + la_l.get(i, j)
                    + lu_parts.f.get(i, j)
                    + ul_parts.f.get(i, j),
            );
        }
        for j in (i + 1)..n {
            ut.set(
                i,
                j,
                u.get(i, j) - u_alpha.get(i, j)
                    + ua_u.get(i, j)
                    + lu_parts.e.get(i, j)
                    + ul_parts.e.get(i, j),
            );
        }
    }
    let splitting = SplittingTriple::from_parts(d, lt, ut)?;

    let a_tilde = preconditioned_matrix(a, &p)?;
    let mismatch = splitting.reconstruct().max_abs_diff(&a_tilde);
    if mismatch > ASSEMBLY_TOL * a_tilde.max_abs().max(1.0) {
        return Err(Error::Consistency(format!(
            "D̃ - L̃ - Ũ differs from P̃A by {mismatch:e}"
        )));
    }
    Ok(PreconditionedSplitting { a_tilde, splitting, l_alpha, u_alpha, lu_parts, ul_parts })
}

/// Largest value over `1 <= j < i <= n` of
///
/// ```text
/// (α_ij - 1) a_ij + Σ_{k≠i} (α_ik - 1) a_ik a_kj + Σ_{k<i} (α_ik - 1) a_ik a_kj
/// ```
///
/// with the sums written exactly as in the sufficient condition for
/// `ρ(𝓛̂) <= ρ(𝓛̃)`. Returns `-∞` for `n = 1` (no pairs).
pub fn unit_alpha_margin(a: &DenseMatrix, mask: &AlphaMask) -> Result<f64> {
    let n = a.require_square("matrix")?;
    require_mask(n, mask)?;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..i {
            let mut v = (mask.get(i, j) - 1.0) * a.get(i, j);
            let (mut s_all_a, mut s_all) = (0.0, 0.0);
            for k in (0..n).filter(|&k| k != i) {
                s_all_a += mask.get(i, k) * a.get(i, k) * a.get(k, j);
                s_all += a.get(i, k) * a.get(k, j);
            }
            let (mut s_low_a, mut s_low) = (0.0, 0.0);
            for k in 0..i {
                s_low_a += mask.get(i, k) * a.get(i, k) * a.get(k, j);
                s_low += a.get(i, k) * a.get(k, j);
            }
            v += (s_all_a - s_all) + (s_low_a - s_low);
            worst = worst.max(v);
        }
    }
    Ok(worst)
}

/// True when the comparison condition holds for every pair `j < i`
/// (up to [`CONDITION_TOL`]). Dimension mismatches count as `false`.
pub fn unit_alpha_condition(a: &DenseMatrix, mask: &AlphaMask) -> bool {
    unit_alpha_margin(a, mask).is_ok_and(|w| w <= CONDITION_TOL)
}

/// The five preconditioners used in the convection-diffusion experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NamedPreconditioner {
    /// `I`
    P0,
    /// `I + 0.5 L`
    P1,
    /// `I + 0.5 L + 0.5 U`
    P2,
    /// `I + L(α) + U(α)`, `α` uniform on `(0, 1)`
    P3,
    /// `I + L + U`
    P4,
}

impl NamedPreconditioner {
    pub const ALL: [NamedPreconditioner; 5] = [Self::P0, Self::P1, Self::P2, Self::P3, Self::P4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Whether the member depends on the random seed.
    pub fn is_random(self) -> bool {
        self == Self::P3
    }

    /// Source of `α` values for this member. Callers must visit the
    /// structurally nonzero off-diagonal entries of `A` in row-major order so
    /// that dense and matrix-free paths draw identical values.
    pub fn alpha_source(self, seed: u64) -> AlphaSource {
        AlphaSource { which: self, rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl fmt::Display for NamedPreconditioner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index())
    }
}

impl FromStr for NamedPreconditioner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P0" | "p0" => Ok(Self::P0),
            "P1" | "p1" => Ok(Self::P1),
            "P2" | "p2" => Ok(Self::P2),
            "P3" | "p3" => Ok(Self::P3),
            "P4" | "p4" => Ok(Self::P4),
            other => Err(Error::Parameter(format!("unknown preconditioner {other:?}"))),
        }
    }
}

/// Per-entry `α` generator for a [`NamedPreconditioner`].
#[derive(Clone, Debug)]
pub struct AlphaSource {
    which: NamedPreconditioner,
    rng: ChaCha8Rng,
}

impl AlphaSource {
    /// `α_ij` for an off-diagonal entry `(i, j)`. Only [`NamedPreconditioner::P3`]
    /// advances the generator.
    pub fn next(&mut self, i: usize, j: usize) -> f64 {
        match self.which {
            NamedPreconditioner::P0 => 0.0,
            NamedPreconditioner::P1 => {
                if i > j {
                    0.5
                } else {
                    0.0
                }
            }
            NamedPreconditioner::P2 => 0.5,
            NamedPreconditioner::P3 => self.rng.sample(Open01),
            NamedPreconditioner::P4 => 1.0,
        }
    }
}

/// `α` mask of a named member on the sparsity pattern of `a`. Entries where
/// `a_ij = 0` get `α_ij = 0`, which leaves `P̃` unchanged.
pub fn named_mask(a: &DenseMatrix, which: NamedPreconditioner, seed: u64) -> Result<AlphaMask> {
    let n = require_unit_diagonal(a)?;
    let mut src = which.alpha_source(seed);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j && a.get(i, j) != 0.0 {
                values[i * n + j] = src.next(i, j);
            }
        }
    }
    AlphaMask::new(n, values)
}

/// Dense `P₀ … P₄` for `a`.
pub fn named_preconditioner(a: &DenseMatrix, which: NamedPreconditioner, seed: u64) -> Result<DenseMatrix> {
    build_preconditioner(a, &named_mask(a, which, seed)?)
}
