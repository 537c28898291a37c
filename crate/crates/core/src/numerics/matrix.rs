use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major `f64` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, value: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = value;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data. Fails if the length disagrees with the shape.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::dims(format!("{} values for {rows}x{cols}", rows * cols), data.len()));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::dims(format!("row length {cols}"), r.len()));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::dims(format!("column length {rows}"), c.len()));
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    pub fn ensure_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Matrix product. Panics on incompatible shapes.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let other_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn try_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::dims(format!("{} rows", self.cols), format!("{} rows", other.rows)));
        }
        Ok(self.matmul(other))
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.mat_vec_into(v, &mut out);
        out
    }

    /// `out = self * v`.
    pub fn mat_vec_into(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.cols);
        assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }

    /// `vᵀ A v`.
    pub fn quadratic_form(&self, v: &[f64]) -> f64 {
        assert!(self.is_square() && v.len() == self.rows);
        (0..self.rows).map(|i| v[i] * dot(self.row(i), v)).sum()
    }

    /// `X Xᵀ`, exploiting symmetry.
    pub fn gram(&self) -> Matrix {
        let n = self.rows;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = dot(self.row(i), self.row(j));
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(self.shape(), other.shape(), "elementwise shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Adds `value` to every diagonal entry.
    pub fn add_diag(&self, value: f64) -> Matrix {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += value;
        }
        m
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrize(&self) -> Matrix {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (i + 1..self.cols).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn frobenius_diff(&self, other: &Matrix) -> f64 {
        self.sub(other).frobenius_norm()
    }

    /// Horizontal concatenation of matrices with equal row counts.
    pub fn hcat(parts: &[&Matrix]) -> Result<Matrix> {
        let rows = parts.first().map_or(0, |m| m.rows);
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for m in parts {
            if m.rows != rows {
                return Err(Error::dims(format!("{rows} rows"), format!("{} rows", m.rows)));
            }
            for i in 0..rows {
                out.row_mut(i)[offset..offset + m.cols].copy_from_slice(m.row(i));
            }
            offset += m.cols;
        }
        Ok(out)
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns_range(&self, start: usize, end: usize) -> Matrix {
        assert!(start <= end && end <= self.cols);
        let mut out = Matrix::zeros(self.rows, end - start);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[start..end]);
        }
        out
    }

    /// Text form: `matrix <rows> <cols>` followed by one line per row, each
    /// value printed with 17 significant digits so that parsing is lossless.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(16 + self.data.len() * 25);
        self.write_text(&mut s);
        s
    }

    pub fn write_text(&self, out: &mut String) {
        let _ = writeln!(out, "matrix {} {}", self.rows, self.cols);
        for i in 0..self.rows {
            let mut first = true;
            for v in self.row(i) {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{}", fmt_f64(*v));
            }
            out.push('\n');
        }
    }

    /// Parses the text form produced by [`Matrix::to_text`].
    pub fn from_text(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().enumerate();
        let m = Self::read_text(&mut lines, std::path::Path::new("<matrix>"))?;
        Ok(m)
    }

    /// Reads one matrix block from a line iterator (1-based line numbers are
    /// reported in errors). Values may wrap across lines arbitrarily.
    pub(crate) fn read_text<'a, I>(lines: &mut I, path: &std::path::Path) -> Result<Matrix>
    where
        I: Iterator<Item = (usize, &'a str)>,
    {
        let (lineno, header) = lines
            .by_ref()
            .find(|(_, l)| !l.trim().is_empty())
            .ok_or_else(|| Error::parse(path, 0, 0, "expected `matrix <rows> <cols>` header"))?;
        let mut parts = header.split_whitespace();
        let bad_header = || Error::parse(path, lineno + 1, 1, format!("bad matrix header `{header}`"));
        if parts.next() != Some("matrix") {
            return Err(bad_header());
        }
        let rows: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad_header)?;
        let cols: usize = parts.next().and_then(|p| p.parse().ok()).ok_or_else(bad_header)?;
        if parts.next().is_some() {
            return Err(bad_header());
        }
        let total = rows * cols;
        let mut data = Vec::with_capacity(total);
        let mut last_line = lineno;
        while data.len() < total {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(path, last_line + 1, 0, format!("expected {total} values, found {}", data.len())))?;
            last_line = ln;
            for (col, tok) in line.split_whitespace().enumerate() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(path, ln + 1, col + 1, format!("invalid number `{tok}`")))?;
                if !v.is_finite() {
                    return Err(Error::parse(path, ln + 1, col + 1, "non-finite value"));
                }
                data.push(v);
            }
            if data.len() > total {
                return Err(Error::parse(path, ln + 1, 0, format!("more than {total} values")));
            }
        }
        Ok(Matrix { rows, cols, data })
    }
}

/// Formats with 17 significant digits (lossless for `f64`).
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        // keeps the sign of negative zero out of serialized files
        return "0".to_string();
    }
    format!("{v:.16e}")
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        let b = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(a.matmul(&b), Matrix::from_rows(&[[2.0, 1.0], [4.0, 3.0]]).unwrap());
    }

    #[test]
    fn gram_matches_explicit_product() {
        let x = Matrix::from_rows(&[[1.0, 2.0, 3.0], [-1.0, 0.5, 2.0]]).unwrap();
        assert!(x.gram().max_abs_diff(&x.matmul(&x.transpose())) < 1e-15);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let m = Matrix::from_rows(&[[0.1, -1.0 / 3.0, 1e-300], [std::f64::consts::PI, -0.0, 123456789.123456789]])
            .unwrap();
        let back = Matrix::from_text(&m.to_text()).unwrap();
        assert_eq!(m.shape(), back.shape());
        for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
            assert_eq!(a.to_bits() & !(1 << 63), b.to_bits() & !(1 << 63));
        }
    }

    #[test]
    fn text_header_and_values() {
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("matrix 1 2\n"));
        assert_eq!(text.lines().nth(1).unwrap(), "1.0000000000000000e0 2.0000000000000000e0");
    }

    #[test]
    fn text_rejects_bad_input() {
        assert!(Matrix::from_text("matrix 2 2\n1 2 3\n").is_err());
        assert!(Matrix::from_text("matrix 1 2\n1 x\n").is_err());
        assert!(Matrix::from_text("matrix 1 1\nNaN\n").is_err());
        assert!(Matrix::from_text("mat 1 1\n1\n").is_err());
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(Matrix::from_vec(2, 2, vec![1.0; 3]).is_err());
    }
}
