//! Dense row-major matrices and vectors, triangular and LU solves, the
//! `A = D - L - U` splitting and Kronecker products.

use std::fmt;
use std::ops::{Deref, Index};

use crate::error::{Error, Result};

/// Relative pivot threshold used by [`lu_solve`].
pub const SINGULAR_PIVOT_REL: f64 = 1e-14;

/// Row-major dense real matrix. All entries are finite.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Capacity(format!("{rows}x{cols}")))?;
        if data.len() != len {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {len} entries, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(Error::Dimension(format!(
                    "row {i} has {} entries, expected {ncols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        DenseMatrix::new(nrows, ncols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.saturating_mul(cols));
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        DenseMatrix::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Dimension(format!(
                "{what} must be square, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        DenseMatrix::new(self.rows, self.cols, data)
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vector> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        Ok(Vector(y))
    }

    /// Unchecked `y = A x`; lengths must already agree.
    pub(crate) fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Strictly lower part (zeros on and above the diagonal).
    pub fn strict_lower(&self) -> DenseMatrix {
        self.masked(|i, j| i > j)
    }

    /// Strictly upper part (zeros on and below the diagonal).
    pub fn strict_upper(&self) -> DenseMatrix {
        self.masked(|i, j| i < j)
    }

    /// Diagonal part as a matrix.
    pub fn diagonal_part(&self) -> DenseMatrix {
        self.masked(|i, j| i == j)
    }

    fn masked(&self, keep: impl Fn(usize, usize) -> bool) -> DenseMatrix {
        let mut m = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !keep(i, j) {
                    m.data[i * self.cols + j] = 0.0;
                }
            }
        }
        m
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| ((i + 1)..self.cols).all(|j| self.get(i, j) == 0.0))
    }

    /// Largest entrywise absolute difference; `INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Real vector with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Vector(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        Vector(vec![1.0; n])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<f64>) -> Self {
        Vector(entries)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `A = D - L - U` with `D` diagonal, `L` strictly lower and `U` strictly
/// upper. `L` and `U` hold the *negated* off-diagonal parts of `A`, so for a
/// Z-matrix both are nonnegative.
#[derive(Clone, Debug, PartialEq)]
pub struct SplittingTriple {
    d: DenseMatrix,
    l: DenseMatrix,
    u: DenseMatrix,
}

impl SplittingTriple {
    /// Assembles a triple from parts, validating the triangular structure.
    pub fn from_parts(d: DenseMatrix, l: DenseMatrix, u: DenseMatrix) -> Result<Self> {
        let n = d.require_square("D")?;
        for (name, m) in [("L", &l), ("U", &u)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::Dimension(format!("{name} must be {n}x{n}")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let bad = (i != j && d.get(i, j) != 0.0)
                    || (i <= j && l.get(i, j) != 0.0)
                    || (i >= j && u.get(i, j) != 0.0);
                if bad {
                    return Err(Error::Precondition(format!(
                        "splitting parts have wrong structure at ({i},{j})"
                    )));
                }
            }
        }
        Ok(SplittingTriple { d, l, u })
    }

    pub fn d(&self) -> &DenseMatrix {
        &self.d
    }

    pub fn l(&self) -> &DenseMatrix {
        &self.l
    }

    pub fn u(&self) -> &DenseMatrix {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.d.rows()
    }

    /// `D - L - U`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let mut a = self.d.clone();
        for i in 0..n {
            for j in 0..n {
                if i > j {
                    a.set(i, j, -self.l.get(i, j));
                } else if i < j {
                    a.set(i, j, -self.u.get(i, j));
                }
            }
        }
        a
    }
}

/// Splits a square matrix as `A = D - L - U`.
pub fn split(a: &DenseMatrix) -> Result<SplittingTriple> {
    let n = a.require_square("split input")?;
    let mut d = DenseMatrix::zeros(n, n);
    let mut l = DenseMatrix::zeros(n, n);
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = a.get(i, j);
            match i.cmp(&j) {
                std::cmp::Ordering::Equal => d.set(i, j, v),
                std::cmp::Ordering::Greater => l.set(i, j, -v),
                std::cmp::Ordering::Less => u.set(i, j, -v),
            }
        }
    }
    Ok(SplittingTriple { d, l, u })
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let overflow = || Error::Capacity(format!(
        "kron of {}x{} and {}x{}",
        a.rows, a.cols, b.rows, b.cols
    ));
    let rows = a.rows.checked_mul(b.rows).ok_or_else(overflow)?;
    let cols = a.cols.checked_mul(b.cols).ok_or_else(overflow)?;
    rows.checked_mul(cols).ok_or_else(overflow)?;
    let mut out = DenseMatrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.get(i, j);
            if aij == 0.0 {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out.set(i * b.rows + k, j * b.cols + l, aij * b.get(k, l));
                }
            }
        }
    }
    Ok(out)
}

/// `n x n` matrix with constant sub-, main and super-diagonals.
pub fn tridiag(n: usize, sub: f64, diag: f64, sup: f64) -> Result<DenseMatrix> {
    if n == 0 {
        return Err(Error::Dimension("tridiag needs n >= 1".into()));
    }
    DenseMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag
        } else if i == j + 1 {
            sub
        } else if j == i + 1 {
            sup
        } else {
            0.0
        }
    })
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// A pivot smaller than [`SINGULAR_PIVOT_REL`] times the largest initial
/// `|a_ij|` is reported as [`Error::Singular`].
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    let n = a.require_square("lu_solve matrix")?;
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for {n}x{n} system", b.len())));
    }
    let threshold = SINGULAR_PIVOT_REL * a.max_abs();
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, m[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold || pmax == 0.0 {
            return Err(Error::Singular { step: k, pivot: pmax });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in (k + 1)..n {
            let f = m[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            m[i * n + k] = 0.0;
            for j in (k + 1)..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|j| m[i * n + j] * x[j]).sum();
        x[i] = (x[i] - s) / m[i * n + i];
    }
    Vector::new(x)
}

/// Forward substitution for a lower-triangular `M`.
pub fn lower_triangular_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    let n = m.require_square("triangular matrix")?;
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for {n}x{n} system", b.len())));
    }
    if !m.is_lower_triangular() {
        return Err(Error::Precondition("matrix is not lower triangular".into()));
    }
    let mut x = vec![0.0; n];
    forward_substitute(m, b, &mut x)?;
    Vector::new(x)
}

/// Forward substitution without the structural check; only the lower
/// triangle of `m` is read.
pub(crate) fn forward_substitute(m: &DenseMatrix, b: &[f64], x: &mut [f64]) -> Result<()> {
    let n = m.rows;
    for i in 0..n {
        let d = m.get(i, i);
        if d == 0.0 {
            return Err(Error::Singular { step: i, pivot: 0.0 });
        }
        let s: f64 = m.row(i)[..i].iter().zip(&x[..i]).map(|(a, v)| a * v).sum();
        x[i] = (b[i] - s) / d;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_sign_convention() {
        let a = DenseMatrix::from_rows(&[[1.0, -0.5], [-0.25, 1.0]]).unwrap();
        let s = split(&a).unwrap();
        assert_eq!(s.d(), &DenseMatrix::identity(2));
        assert_eq!(s.l(), &DenseMatrix::from_rows(&[[0.0, 0.0], [0.25, 0.0]]).unwrap());
        assert_eq!(s.u(), &DenseMatrix::from_rows(&[[0.0, 0.5], [0.0, 0.0]]).unwrap());
        assert_eq!(s.reconstruct(), a);
    }

    #[test]
    fn split_identity() {
        for n in 1..5 {
            let s = split(&DenseMatrix::identity(n)).unwrap();
            assert_eq!(s.d(), &DenseMatrix::identity(n));
            assert_eq!(s.l(), &DenseMatrix::zeros(n, n));
            assert_eq!(s.u(), &DenseMatrix::zeros(n, n));
        }
    }

    #[test]
    fn split_rejects_rectangular() {
        assert!(matches!(split(&DenseMatrix::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]), Err(Error::NonFinite(1)));
        assert!(DenseMatrix::new(2, 2, vec![1.0]).is_err());
        assert!(Vector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn kron_identity_is_block_diagonal() {
        let b = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let k = kron(&DenseMatrix::identity(2), &b).unwrap();
        let expect = DenseMatrix::from_rows(&[
            [1.0, 2.0, 0.0, 0.0],
            [3.0, 4.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 2.0],
            [0.0, 0.0, 3.0, 4.0],
        ])
        .unwrap();
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_block_shift() {
        let s = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let k = kron(&s, &DenseMatrix::identity(2)).unwrap();
        let expect = DenseMatrix::from_fn(4, 4, |i, j| if j == i + 2 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(k, expect);
    }

    #[test]
    fn kron_rectangular_shape() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 3.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        let k = kron(&a, &b).unwrap();
        assert_eq!((k.rows(), k.cols()), (2, 3));
        assert_eq!(k.row(1), &[-1.0, -2.0, -3.0]);
    }

    #[test]
    fn tridiag_cases() {
        assert_eq!(tridiag(1, 7.0, 2.0, 9.0).unwrap(), DenseMatrix::from_rows(&[[2.0]]).unwrap());
        let lap = tridiag(3, -1.0, 2.0, -1.0).unwrap();
        let expect =
            DenseMatrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]).unwrap();
        assert_eq!(lap, expect);
        assert!(matches!(tridiag(0, 0.0, 1.0, 0.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn lu_small_systems() {
        let x = lu_solve(&DenseMatrix::identity(3), &[1.0, -2.0, 3.5]).unwrap();
        assert_eq!(x.as_slice(), &[1.0, -2.0, 3.5]);
        let a = DenseMatrix::from_rows(&[[2.0, 0.0], [0.0, 4.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[2.0, 8.0]).unwrap().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = DenseMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[3.0, 5.0]).unwrap().as_slice(), &[5.0, 3.0]);
    }

    #[test]
    fn lu_singular() {
        let a = DenseMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        assert!(matches!(lu_solve(&a, &[1.0, 1.0]), Err(Error::Singular { .. })));
        assert!(matches!(lu_solve(&DenseMatrix::zeros(2, 2), &[1.0, 1.0]), Err(Error::Singular { .. })));
        assert!(matches!(lu_solve(&a, &[1.0]), Err(Error::Dimension(_))));
    }

    #[test]
    fn forward_substitution() {
        assert_eq!(
            lower_triangular_solve(&DenseMatrix::identity(2), &[4.0, 5.0]).unwrap().as_slice(),
            &[4.0, 5.0]
        );
        let m = DenseMatrix::from_rows(&[[1.0, 0.0], [-1.0, 1.0]]).unwrap();
        assert_eq!(lower_triangular_solve(&m, &[1.0, 1.0]).unwrap().as_slice(), &[1.0, 2.0]);
        let z = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(matches!(lower_triangular_solve(&z, &[1.0, 1.0]), Err(Error::Singular { step: 1, .. })));
        let up = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(lower_triangular_solve(&up, &[1.0, 1.0]), Err(Error::Precondition(_))));
    }

    #[test]
    fn from_parts_checks_structure() {
        let i = DenseMatrix::identity(2);
        let bad_l = DenseMatrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert!(SplittingTriple::from_parts(i.clone(), bad_l, DenseMatrix::zeros(2, 2)).is_err());
        let ok = SplittingTriple::from_parts(i.clone(), DenseMatrix::zeros(2, 2), DenseMatrix::zeros(2, 2));
        assert_eq!(ok.unwrap().reconstruct(), i);
    }
}
