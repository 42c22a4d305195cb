//! Small dense complex matrices.
//!
//! Channel matrices in this crate are tiny (at most 16x16), so the storage
//! is a plain row-major buffer with no blocking or stride tricks.  The
//! constructor enforces the size cap once; downstream spectral routines rely
//! on it to use fixed-size scratch space.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported matrix side.
pub const MAX_DIM: usize = 16;

/// Dense row-major complex matrix with `1..=16` rows and columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    ///
    /// Fails if either dimension is zero or exceeds [`MAX_DIM`].
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        Ok(Self {
            rows,
            cols,
            entries: vec![Complex64::ZERO; rows * cols],
        })
    }

    /// Matrix from a row-major entry buffer.
    ///
    /// The buffer length must equal `rows * cols` exactly.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::check_dims(rows, cols)?;
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument(
                "entry buffer length does not match rows * cols",
            ));
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    /// Identity-scaled diagonal matrix: `diag` on the diagonal, zero elsewhere.
    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n, n)?;
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        Ok(m)
    }

    fn check_dims(rows: usize, cols: usize) -> Result<()> {
        if rows == 0 || cols == 0 || rows > MAX_DIM || cols > MAX_DIM {
            return Err(Error::InvalidDimension {
                rows,
                cols,
                max: MAX_DIM,
            });
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at `(r, c)`; panics on out-of-range indices.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.entries[r * self.cols + c]
    }

    /// Overwrite the entry at `(r, c)`; panics on out-of-range indices.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: Complex64) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        self.entries[r * self.cols + c] = value;
    }

    /// Row-major view of the entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Mutable row-major view of the entries.
    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> Self {
        let mut out = Self {
            rows: self.cols,
            cols: self.rows,
            entries: vec![Complex64::ZERO; self.entries.len()],
        };
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.entries[c * out.cols + r] = self.get(r, c).conj();
            }
        }
        out
    }

    /// Squared Frobenius norm: the sum of `|h_ij|^2` over all entries.
    ///
    /// Always finite and nonnegative; equals the trace of the Gram matrix,
    /// i.e. the sum of the Gram eigenvalues.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_and_shape() {
        let m = ComplexMatrix::zeros(3, 2).unwrap();
        assert_eq!(m.rows(), 3);
        assert_eq!(m.cols(), 2);
        assert!(m.entries().iter().all(|z| *z == Complex64::ZERO));
    }

    #[test]
    fn rejects_bad_dims() {
        assert!(matches!(
            ComplexMatrix::zeros(0, 2),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(matches!(
            ComplexMatrix::zeros(17, 2),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(matches!(
            ComplexMatrix::zeros(2, 17),
            Err(Error::InvalidDimension { .. })
        ));
        assert!(ComplexMatrix::zeros(16, 16).is_ok());
    }

    #[test]
    fn rejects_mismatched_buffer() {
        let entries = vec![Complex64::ZERO; 5];
        assert!(ComplexMatrix::from_entries(2, 3, entries).is_err());
    }

    #[test]
    fn frobenius_of_identity() {
        let m = ComplexMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
        assert_eq!(m.frobenius_sq(), 2.0);
        let z = ComplexMatrix::zeros(4, 4).unwrap();
        assert_eq!(z.frobenius_sq(), 0.0);
    }

    #[test]
    fn conj_transpose_roundtrip() {
        let mut m = ComplexMatrix::zeros(2, 3).unwrap();
        m.set(0, 1, Complex64::new(1.0, -2.0));
        m.set(1, 2, Complex64::new(0.5, 3.0));
        let t = m.conj_transpose();
        assert_eq!(t.rows(), 3);
        assert_eq!(t.cols(), 2);
        assert_eq!(t.get(1, 0), Complex64::new(1.0, 2.0));
        assert_eq!(t.conj_transpose(), m);
    }
}
