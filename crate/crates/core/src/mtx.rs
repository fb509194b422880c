//! Matrix Market exchange format for dense matrices.
//!
//! Writing always produces `coordinate real general` with 1-based indices and
//! only the nonzero entries. Reading accepts `coordinate` and `array` layouts
//! with `real`, `integer` or `pattern` fields and `general`, `symmetric` or
//! `skew-symmetric` symmetry.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

pub const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

/// Largest `rows * cols` accepted by [`read_matrix_market`].
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::MatrixMarket { line, msg: msg.into() }
}

fn parse_banner(line: &str) -> Result<(Layout, Field, Symmetry)> {
    let mut tok = line.split_whitespace();
    if !tok.next().is_some_and(|t| t.eq_ignore_ascii_case("%%MatrixMarket")) {
        return Err(err(1, "missing %%MatrixMarket banner"));
    }
    if !tok.next().is_some_and(|t| t.eq_ignore_ascii_case("matrix")) {
        return Err(err(1, "only the \"matrix\" object is supported"));
    }
    let layout = match tok.next().map(str::to_ascii_lowercase).as_deref() {
        Some("coordinate") => Layout::Coordinate,
        Some("array") => Layout::Array,
        other => return Err(err(1, format!("unsupported format {other:?}"))),
    };
    let field = match tok.next().map(str::to_ascii_lowercase).as_deref() {
        Some("real") | Some("double") => Field::Real,
        Some("integer") => Field::Integer,
        Some("pattern") => Field::Pattern,
        other => return Err(err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match tok.next().map(str::to_ascii_lowercase).as_deref() {
        Some("general") => Symmetry::General,
        Some("symmetric") => Symmetry::Symmetric,
        Some("skew-symmetric") => Symmetry::SkewSymmetric,
        other => return Err(err(1, format!("unsupported symmetry {other:?}"))),
    };
    if tok.next().is_some() {
        return Err(err(1, "trailing tokens in banner"));
    }
    if field == Field::Pattern && layout == Layout::Array {
        return Err(err(1, "pattern field requires coordinate format"));
    }
    Ok((layout, field, symmetry))
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.ok_or_else(|| err(line, format!("missing {what}")))?
        .parse::<usize>()
        .map_err(|e| err(line, format!("bad {what}: {e}")))
}

fn parse_value(tok: Option<&str>, line: usize, field: Field) -> Result<f64> {
    let t = tok.ok_or_else(|| err(line, "missing value"))?;
    let v = match field {
        Field::Integer => t.parse::<i64>().map(|v| v as f64).map_err(|e| err(line, format!("bad integer: {e}")))?,
        _ => t.parse::<f64>().map_err(|e| err(line, format!("bad real: {e}")))?,
    };
    if !v.is_finite() {
        return Err(err(line, "non-finite value"));
    }
    Ok(v)
}

/// Reads a Matrix Market matrix, refusing matrices with more than
/// [`DEFAULT_MAX_ENTRIES`] dense entries.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<DenseMatrix> {
    read_matrix_market_limited(reader, DEFAULT_MAX_ENTRIES)
}

pub fn read_matrix_market_str(text: &str) -> Result<DenseMatrix> {
    read_matrix_market(text.as_bytes())
}

pub fn read_matrix_market_limited<R: BufRead>(reader: R, max_entries: usize) -> Result<DenseMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let banner = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(err(1, "empty input")),
    };
    let (layout, field, symmetry) = parse_banner(&banner)?;

    // skip comments and blank lines
    let mut body = lines.filter_map(|(no, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('%') => None,
        other => Some((no, other)),
    });

    let (size_no, size_line) = match body.next() {
        Some((no, l)) => (no, l?),
        None => return Err(err(2, "missing size line")),
    };
    let mut tok = size_line.split_whitespace();
    let rows = parse_usize(tok.next(), size_no, "row count")?;
    let cols = parse_usize(tok.next(), size_no, "column count")?;
    let nnz = match layout {
        Layout::Coordinate => Some(parse_usize(tok.next(), size_no, "entry count")?),
        Layout::Array => None,
    };
    if tok.next().is_some() {
        return Err(err(size_no, "trailing tokens in size line"));
    }
    rows.checked_mul(cols)
        .filter(|&t| t <= max_entries)
        .ok_or_else(|| err(size_no, format!("{rows}x{cols} exceeds the size limit")))?;
    if symmetry != Symmetry::General && rows != cols {
        return Err(err(size_no, "symmetric storage requires a square matrix"));
    }

    let mut m = DenseMatrix::zeros(rows, cols);
    match layout {
        Layout::Coordinate => {
            // duplicates are summed, so nnz may exceed rows * cols
            let nnz = nnz.unwrap_or(0);
            let mut seen = 0;
            for (no, l) in body {
                let l = l?;
                if seen == nnz {
                    return Err(err(no, "more entries than declared"));
                }
                let mut tok = l.split_whitespace();
                let i = parse_usize(tok.next(), no, "row index")?;
                let j = parse_usize(tok.next(), no, "column index")?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(err(no, format!("index ({i}, {j}) out of range")));
                }
                let v = match field {
                    Field::Pattern => 1.0,
                    f => parse_value(tok.next(), no, f)?,
                };
                if tok.next().is_some() {
                    return Err(err(no, "trailing tokens in entry"));
                }
                let (i, j) = (i - 1, j - 1);
                match symmetry {
                    Symmetry::SkewSymmetric if i == j => {
                        return Err(err(no, "skew-symmetric matrix with diagonal entry"));
                    }
                    Symmetry::Symmetric | Symmetry::SkewSymmetric if j > i => {
                        return Err(err(no, "symmetric storage expects the lower triangle"));
                    }
                    _ => {}
                }
                accumulate(&mut m, i, j, v, no)?;
                if i != j {
                    match symmetry {
                        Symmetry::Symmetric => accumulate(&mut m, j, i, v, no)?,
                        Symmetry::SkewSymmetric => accumulate(&mut m, j, i, -v, no)?,
                        Symmetry::General => {}
                    }
                }
                seen += 1;
            }
            if seen != nnz {
                return Err(err(size_no, format!("declared {nnz} entries, found {seen}")));
            }
        }
        Layout::Array => {
            // column-major; symmetric variants list the lower triangle only
            let mut next = (0..cols)
                .flat_map(|j| (0..rows).map(move |i| (i, j)))
                .filter(|&(i, j)| match symmetry {
                    Symmetry::General => true,
                    Symmetry::Symmetric => i >= j,
                    Symmetry::SkewSymmetric => i > j,
                });
            let mut last_no = size_no;
            for (no, l) in body {
                let l = l?;
                last_no = no;
                for t in l.split_whitespace() {
                    let (i, j) = next.next().ok_or_else(|| err(no, "more values than the matrix holds"))?;
                    let v = parse_value(Some(t), no, field)?;
                    m.set(i, j, v);
                    match symmetry {
                        Symmetry::Symmetric if i != j => m.set(j, i, v),
                        Symmetry::SkewSymmetric => m.set(j, i, -v),
                        _ => {}
                    }
                }
            }
            if next.next().is_some() {
                return Err(err(last_no, "fewer values than the matrix holds"));
            }
        }
    }
    Ok(m)
}

fn accumulate(m: &mut DenseMatrix, i: usize, j: usize, v: f64, line: usize) -> Result<()> {
    let s = m.get(i, j) + v;
    if !s.is_finite() {
        return Err(err(line, "entry overflows"));
    }
    m.set(i, j, s);
    Ok(())
}

/// Writes the nonzero entries of `a` in coordinate format. Values use the
/// shortest representation that round-trips.
pub fn write_matrix_market<W: Write>(a: &DenseMatrix, mut out: W) -> Result<()> {
    let nnz = a.as_slice().iter().filter(|v| **v != 0.0).count();
    writeln!(out, "{HEADER}")?;
    writeln!(out, "{} {} {}", a.rows(), a.cols(), nnz)?;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j);
            if v != 0.0 {
                writeln!(out, "{} {} {:?}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

pub fn to_matrix_market_string(a: &DenseMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix_market(a, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("output is ASCII")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read() {
        let a = DenseMatrix::from_rows(&[[1.0, 0.0, -0.1], [0.0, 2.5e-17, 0.0]]).unwrap();
        let s = to_matrix_market_string(&a);
        assert!(s.starts_with(HEADER));
        assert!(s.contains("\n2 3 3\n"));
        assert!(s.contains("\n1 3 -0.1\n"));
        assert_eq!(read_matrix_market_str(&s).unwrap(), a);
    }

    #[test]
    fn symmetric_and_pattern() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = read_matrix_market_str(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[4.0, -1.0], [-1.0, 0.0]]).unwrap());
        let text = "%%MatrixMarket matrix coordinate pattern general\n2 2 1\n2 2\n";
        assert_eq!(read_matrix_market_str(text).unwrap().get(1, 1), 1.0);
        let text = "%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 3\n";
        assert_eq!(read_matrix_market_str(text).unwrap().get(0, 1), -3.0);
    }

    #[test]
    fn array_layout() {
        let text = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        assert_eq!(read_matrix_market_str(text).unwrap(), DenseMatrix::from_rows(&[[1.0, 3.0], [2.0, 4.0]]).unwrap());
        let short = "%%MatrixMarket matrix array real general\n2 2\n1 2 3\n";
        assert!(read_matrix_market_str(short).is_err());
        let sym = "%%MatrixMarket matrix array real symmetric\n2 2\n1 2 3\n";
        assert_eq!(read_matrix_market_str(sym).unwrap(), DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 3.0]]).unwrap());
    }

    #[test]
    fn duplicates_are_summed() {
        let text = "%%MatrixMarket matrix coordinate real general\n1 1 2\n1 1 1.5\n1 1 2\n";
        assert_eq!(read_matrix_market_str(text).unwrap().get(0, 0), 3.5);
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            "",
            "%%MatrixMarket vector coordinate real general\n1 1 0\n",
            "%%MatrixMarket matrix coordinate complex general\n1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n0 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1.0\n2 2 1.0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 nan\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 5\n",
            "%%MatrixMarket matrix coordinate real symmetric\n2 3 0\n",
            "%%MatrixMarket matrix coordinate real general\n99999999 99999999 0\n",
            "%%MatrixMarket matrix coordinate integer general\n1 1 1\n1 1 0.5\n",
        ];
        for c in cases {
            assert!(read_matrix_market_str(c).is_err(), "accepted {c:?}");
        }
    }
}
