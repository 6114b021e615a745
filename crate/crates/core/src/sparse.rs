//! Compressed-row complex sparse matrices and Matrix Market export.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::io::Write;

/// Complex matrix in compressed sparse row form with sorted, unique columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, row_ptr: vec![0; n_rows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    /// Build from triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut t: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = t.iter().find(|(r, c, _)| *r >= n_rows || *c >= n_cols) {
            return Err(Error::InvalidQuery(format!("entry ({r}, {c}) outside {n_rows}x{n_cols}")));
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut col_idx = Vec::with_capacity(t.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(t.len());
        let mut rows = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            if rows.last() == Some(&r) && col_idx.last() == Some(&c) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != Complex64::new(0.0, 0.0) {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self { n_rows, n_cols, row_ptr, col_idx: keep_cols, values: keep_vals })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros of row `r` as `(column, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    /// All nonzeros in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n_rows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(k) => self.values[span.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        self.iter().collect()
    }

    pub fn adjoint(&self) -> Self {
        let t = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.n_cols, self.n_rows, t).expect("transpose stays in range")
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::InvalidQuery("shape mismatch".into()));
        }
        let mut t: Vec<_> = self.iter().map(|(r, c, v)| (r, c, a * v)).collect();
        t.extend(other.iter().map(|(r, c, v)| (r, c, b * v)));
        Self::from_triplets(self.n_rows, self.n_cols, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.combine(Complex64::new(1.0, 0.0), &adj, Complex64::new(-1.0, 0.0))
            .map(|d| d.max_abs())
            .unwrap_or(f64::INFINITY)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Matrix Market coordinate format, complex general, 17 significant digits.
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for (r, c, v) in self.iter() {
            writeln!(w, "{} {} {:.16e} {:.16e}", r + 1, c + 1, v.re, v.im)?;
        }
        Ok(())
    }

    /// Parse the output of [`write_matrix_market`](Self::write_matrix_market).
    pub fn read_matrix_market(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::InvalidQuery(format!("matrix market: {what}"));
        let mut lines = text.lines().filter(|l| !l.starts_with('%') && !l.trim().is_empty());
        let header: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("missing size line"))?
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| bad("size line")))
            .collect::<Result<_>>()?;
        let [n_rows, n_cols, nnz] = header[..] else { return Err(bad("size line")) };
        let mut t = Vec::with_capacity(nnz);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(bad("entry line"));
            }
            let r: usize = f[0].parse().map_err(|_| bad("row"))?;
            let c: usize = f[1].parse().map_err(|_| bad("column"))?;
            let re: f64 = f[2].parse().map_err(|_| bad("real part"))?;
            let im: f64 = f[3].parse().map_err(|_| bad("imaginary part"))?;
            t.push((r - 1, c - 1, Complex64::new(re, im)));
        }
        if t.len() != nnz {
            return Err(bad("entry count"));
        }
        Self::from_triplets(n_rows, n_cols, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn duplicates_and_zeros() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0)), (0, 1, c(2.0)), (1, 0, c(0.0))]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0));
        assert_eq!(m.get(1, 0), c(0.0));
    }

    #[test]
    fn matrix_market_round_trip() {
        let m = SparseMatrix::from_triplets(
            3,
            3,
            vec![(0, 0, Complex64::new(0.1, -2.0 / 3.0)), (2, 1, c(std::f64::consts::PI))],
        )
        .unwrap();
        let mut buf = Vec::new();
        m.write_matrix_market(&mut buf).unwrap();
        let back = SparseMatrix::read_matrix_market(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn adjoint_defect() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 1, Complex64::new(0.0, 1.0)), (1, 0, Complex64::new(0.0, -1.0))])
            .unwrap();
        assert_eq!(m.hermiticity_defect(), 0.0);
    }
}
