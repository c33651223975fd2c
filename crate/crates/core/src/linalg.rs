//! Small dense linear algebra for Gram matrices (dimension ≤ a handful).

use crate::error::{Error, Result};

pub const PIVOT_THRESHOLD: f64 = 1e-12;

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub dim_rows: usize,
    pub dim_cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            dim_rows: rows,
            dim_cols: cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            dim_rows: r,
            dim_cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.dim_rows
    }

    pub fn cols(&self) -> usize {
        self.dim_cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim_cols + j] = v;
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim_cols {
            return Err(Error::DimensionMismatch {
                expected: self.dim_cols,
                got: v.len(),
            });
        }
        Ok((0..self.dim_rows)
            .map(|i| {
                self.data[i * self.dim_cols..(i + 1) * self.dim_cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.dim_rows != other.dim_rows || self.dim_cols != other.dim_cols {
            return Err(Error::DimensionMismatch {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(Matrix {
            dim_rows: self.dim_rows,
            dim_cols: self.dim_cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Solves `self · x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim_rows;
        if self.dim_cols != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim_cols,
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut a = self.data.clone();
        let mut x = b.to_vec();
        // pivot threshold is relative to the matrix scale
        let scale = a
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for col in 0..n {
            let (piv, pval) =
                (col..n)
                    .map(|r| (r, a[r * n + col].abs()))
                    .fold(
                        (col, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pval <= PIVOT_THRESHOLD * scale {
                return Err(Error::Singular { pivot: pval });
            }
            if piv != col {
                for j in 0..n {
                    a.swap(piv * n + j, col * n + j);
                }
                x.swap(piv, col);
            }
            for r in col + 1..n {
                let factor = a[r * n + col] / a[col * n + col];
                if factor != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= factor * a[col * n + j];
                    }
                    x[r] -= factor * x[col];
                }
            }
        }
        for col in (0..n).rev() {
            let tail: f64 = (col + 1..n).map(|j| a[col * n + j] * x[j]).sum();
            x[col] = (x[col] - tail) / a[col * n + col];
        }
        Ok(x)
    }

    /// Inverse via column-by-column solves.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.dim_rows;
        let mut inv = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        Ok(inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_two_by_two() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let x = m.solve(&[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        let inv = m.inverse().unwrap();
        assert!((inv.get(0, 0) - 0.6).abs() < 1e-14);
    }

    #[test]
    fn singular_rejected() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(m.solve(&[1.0, 1.0]), Err(Error::Singular { .. })));
    }
}
