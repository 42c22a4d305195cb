//! Gram-matrix spectra and mutual information.
//!
//! The mutual information of a MIMO channel realization only depends on the
//! eigenvalues of `H H^H`, so everything funnels through one Hermitian
//! eigensolver: cyclic Jacobi sweeps with complex rotations.  Matrices are
//! at most 16x16, where Jacobi is simple, branch-predictable, and accurate
//! to machine precision; idiomatic LAPACK-style tridiagonalization would
//! buy nothing here.
//!
//! The Gram matrix is always formed on the smaller side of `H` (both sides
//! share the nonzero spectrum), so a spectrum has exactly
//! `min(rows, cols)` entries.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::matrix::{ComplexMatrix, MAX_DIM};

/// Relative off-diagonal Frobenius tolerance at which sweeps stop.
const JACOBI_TOL: f64 = 1e-12;
/// Hard cap on Jacobi sweeps; reached only for pathological inputs.
const MAX_SWEEPS: usize = 64;

/// Ascending, nonnegative eigenvalues of a channel Gram matrix.
///
/// Tiny negative values produced by roundoff are clamped to zero; the
/// clamp threshold is `1e-12` relative to the matrix scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    /// Eigenvalues in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of the eigenvalues (the squared Frobenius norm of the source).
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Eigenvalues of the Gram matrix of `h`, ascending, length `min(rows, cols)`.
pub fn gram_eigenvalues(h: &ComplexMatrix) -> EigenSpectrum {
    let mut buf = [0.0f64; MAX_DIM];
    let len = gram_spectrum(h, &mut buf);
    EigenSpectrum {
        values: buf[..len].to_vec(),
    }
}

/// Mutual information in bits per channel use:
/// `log2 det(I + (rho / power_split) * H H^H)`.
///
/// `power_split` is the divisor spreading transmit power across antennas
/// (equal to the transmit count for the schemes in this crate).  Computed
/// from the Gram spectrum as `sum log2(1 + (rho/power_split) * mu_i)`,
/// which is exact for the determinant and immune to overflow for any
/// representable SNR.
pub fn mutual_info_bits(h: &ComplexMatrix, rho: f64, power_split: f64) -> Result<f64> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidSnr(rho));
    }
    if !(power_split > 0.0 && power_split.is_finite()) {
        return Err(Error::InvalidPowerSplit(power_split));
    }
    let mut buf = [0.0f64; MAX_DIM];
    let len = gram_spectrum(h, &mut buf);
    let x = rho / power_split;
    Ok(buf[..len].iter().map(|&mu| math::log2(1.0 + x * mu)).sum())
}

/// Fill `out` with the ascending Gram eigenvalues of `h` without
/// allocating; returns the spectrum length `min(rows, cols)`.
pub(crate) fn gram_spectrum(h: &ComplexMatrix, out: &mut [f64; MAX_DIM]) -> usize {
    let mut g = [Complex64 { re: 0.0, im: 0.0 }; MAX_DIM * MAX_DIM];
    let n = gram_smaller_side(h, &mut g);
    hermitian_eigenvalues(&mut g, n, out);
    n
}

/// Form this channel's Gram matrix on its smaller side into `g`
/// (row-major `n x n` with `n = min(rows, cols)`); returns `n`.
fn gram_smaller_side(h: &ComplexMatrix, g: &mut [Complex64; MAX_DIM * MAX_DIM]) -> usize {
    let (rows, cols) = (h.rows(), h.cols());
    let n = rows.min(cols);
    if rows <= cols {
        // G = H H^H
        for i in 0..n {
            for j in i..n {
                if i == j {
                    let mut d = 0.0;
                    for k in 0..cols {
                        d += h.get(i, k).norm_sqr();
                    }
                    g[i * n + i] = Complex64 { re: d, im: 0.0 };
                } else {
                    let mut z = Complex64 { re: 0.0, im: 0.0 };
                    for k in 0..cols {
                        z += h.get(i, k) * h.get(j, k).conj();
                    }
                    g[i * n + j] = z;
                    g[j * n + i] = z.conj();
                }
            }
        }
    } else {
        // G = H^H H
        for i in 0..n {
            for j in i..n {
                if i == j {
                    let mut d = 0.0;
                    for k in 0..rows {
                        d += h.get(k, i).norm_sqr();
                    }
                    g[i * n + i] = Complex64 { re: d, im: 0.0 };
                } else {
                    let mut z = Complex64 { re: 0.0, im: 0.0 };
                    for k in 0..rows {
                        z += h.get(k, i).conj() * h.get(k, j);
                    }
                    g[i * n + j] = z;
                    g[j * n + i] = z.conj();
                }
            }
        }
    }
    n
}

/// Column Gram matrix `H^H H` (transmit side), row-major into `g`;
/// returns its side length `cols`.
///
/// Per-antenna outage events are defined through principal submatrices of
/// this matrix, so it is formed on the transmit side regardless of shape.
pub(crate) fn column_gram(h: &ComplexMatrix, g: &mut [Complex64; MAX_DIM * MAX_DIM]) -> usize {
    let (rows, cols) = (h.rows(), h.cols());
    for i in 0..cols {
        for j in i..cols {
            if i == j {
                let mut d = 0.0;
                for k in 0..rows {
                    d += h.get(k, i).norm_sqr();
                }
                g[i * cols + i] = Complex64 { re: d, im: 0.0 };
            } else {
                let mut z = Complex64 { re: 0.0, im: 0.0 };
                for k in 0..rows {
                    z += h.get(k, i).conj() * h.get(k, j);
                }
                g[i * cols + j] = z;
                g[j * cols + i] = z.conj();
            }
        }
    }
    cols
}

/// Eigenvalues of a Hermitian `n x n` matrix stored row-major in `a`.
///
/// `a` is destroyed.  Results land in `out[..n]`, ascending, with
/// roundoff negatives clamped to zero.
pub(crate) fn hermitian_eigenvalues(a: &mut [Complex64], n: usize, out: &mut [f64]) {
    debug_assert!((1..=MAX_DIM).contains(&n) && a.len() >= n * n);
    if n == 1 {
        out[0] = a[0].re.max(0.0);
        return;
    }

    let mut scale_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            scale_sq += a[i * n + j].norm_sqr();
        }
    }
    let threshold_sq = JACOBI_TOL * JACOBI_TOL * scale_sq;

    for _sweep in 0..MAX_SWEEPS {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += 2.0 * a[p * n + q].norm_sqr();
            }
        }
        if off_sq <= threshold_sq {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(a, n, p, q);
            }
        }
    }

    for i in 0..n {
        out[i] = a[i * n + i].re;
    }
    out[..n].sort_unstable_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    let scale = math::sqrt(scale_sq);
    for v in out[..n].iter_mut() {
        debug_assert!(*v >= -JACOBI_TOL * scale.max(1.0), "eigenvalue {v} below clamp range");
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
#[inline]
fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let r = math::sqrt(apq.norm_sqr());
    if r == 0.0 {
        return;
    }
    // Factor out the phase so the 2x2 pivot block becomes real symmetric,
    // then apply the classic symmetric Schur rotation.
    let phase = apq / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + math::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + math::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;
    let phase_conj = phase.conj();

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q] * phase_conj;
        let new_kp = akp * c - akq * s;
        let new_kq = akp * s + akq * c;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp.conj();
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq.conj();
    }

    let d_pp = c * c * app - 2.0 * s * c * r + s * s * aqq;
    let d_qq = s * s * app + 2.0 * s * c * r + c * c * aqq;
    a[p * n + p] = Complex64 { re: d_pp, im: 0.0 };
    a[q * n + q] = Complex64 { re: d_qq, im: 0.0 };
    a[p * n + q] = Complex64 { re: 0.0, im: 0.0 };
    a[q * n + p] = Complex64 { re: 0.0, im: 0.0 };
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ComplexMatrix;
    use crate::rng::{sample_channel, RngStream};
    use alloc::vec;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64 { re, im }
    }

    #[test]
    fn identity_gram() {
        let h = ComplexMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
        let s = gram_eigenvalues(&h);
        assert_eq!(s.values(), &[1.0, 1.0]);
    }

    #[test]
    fn diagonal_gram_squares_the_entries() {
        let h = ComplexMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let s = gram_eigenvalues(&h);
        assert_eq!(s.values(), &[1.0, 4.0]);
    }

    #[test]
    fn known_hermitian_2x2() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let mut a = vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0)];
        let mut out = [0.0; MAX_DIM];
        hermitian_eigenvalues(&mut a, 2, &mut out);
        assert!((out[0] - 1.0).abs() < 1e-12);
        assert!((out[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_length_is_smaller_side() {
        let h = sample_channel(RngStream::new(5, 0), 1, 4).unwrap();
        assert_eq!(gram_eigenvalues(&h).len(), 1);
        let h = sample_channel(RngStream::new(5, 1), 4, 2).unwrap();
        assert_eq!(gram_eigenvalues(&h).len(), 2);
    }

    #[test]
    fn trace_matches_frobenius() {
        for idx in 0..50 {
            let h = sample_channel(RngStream::new(77, idx), 3, 3).unwrap();
            let s = gram_eigenvalues(&h);
            let rel = (s.sum() - h.frobenius_sq()).abs() / h.frobenius_sq();
            assert!(rel < 1e-10, "relative trace error {rel}");
        }
    }

    #[test]
    fn gram_agrees_with_conj_transpose() {
        for idx in 0..50 {
            let h = sample_channel(RngStream::new(11, idx), 4, 2).unwrap();
            let a = gram_eigenvalues(&h);
            let b = gram_eigenvalues(&h.conj_transpose());
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-10 * x.max(1.0), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn mutual_info_known_values() {
        let zero = ComplexMatrix::zeros(2, 2).unwrap();
        assert_eq!(mutual_info_bits(&zero, 10.0, 2.0).unwrap(), 0.0);

        // Identity channel at rho = 2 with power split 2: 2 * log2(2) = 2.
        let id = ComplexMatrix::from_diagonal(&[1.0, 1.0]).unwrap();
        let i = mutual_info_bits(&id, 2.0, 2.0).unwrap();
        assert!((i - 2.0).abs() < 1e-12);

        // Scalar channel |h|^2 = 3 at rho = 1: log2(4) = 2.
        let h = ComplexMatrix::from_entries(1, 1, vec![c(3.0f64.sqrt(), 0.0)]).unwrap();
        let i = mutual_info_bits(&h, 1.0, 1.0).unwrap();
        assert!((i - 2.0).abs() < 1e-12);
    }

    #[test]
    fn mutual_info_rejects_bad_scalars() {
        let h = ComplexMatrix::zeros(2, 2).unwrap();
        assert!(matches!(
            mutual_info_bits(&h, 0.0, 2.0),
            Err(Error::InvalidSnr(_))
        ));
        assert!(matches!(
            mutual_info_bits(&h, -1.0, 2.0),
            Err(Error::InvalidSnr(_))
        ));
        assert!(matches!(
            mutual_info_bits(&h, f64::NAN, 2.0),
            Err(Error::InvalidSnr(_))
        ));
        assert!(matches!(
            mutual_info_bits(&h, 1.0, 0.0),
            Err(Error::InvalidPowerSplit(_))
        ));
    }

    #[test]
    fn large_matrix_converges() {
        // 16x16 is the worst case the crate supports; check the trace
        // identity and nonnegativity there.
        let h = sample_channel(RngStream::new(400, 0), 16, 16).unwrap();
        let s = gram_eigenvalues(&h);
        assert_eq!(s.len(), 16);
        let rel = (s.sum() - h.frobenius_sq()).abs() / h.frobenius_sq();
        assert!(rel < 1e-10);
        assert!(s.values().iter().all(|&v| v >= 0.0));
        assert!(s.values().windows(2).all(|w| w[0] <= w[1]));
    }
}
