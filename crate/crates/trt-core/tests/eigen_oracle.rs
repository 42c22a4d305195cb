//! Cross-checks the spectral mutual-information path against independent
//! references: an LU-decomposition determinant evaluated directly on
//! `I + (rho/m) H H^H`, and deterministic quadrature for the scalar
//! channel's ergodic average.

use trt_core::eigen::mutual_info_bits;
use trt_core::rng::{sample_channel, RngStream};
use trt_core::Complex64;

/// `log2 det(A)` for a Hermitian positive-definite `A`, via LU with
/// partial pivoting.  Written independently of the library's eigenvalue
/// route so the two can disagree.
fn lu_log2_det(mut a: Vec<Vec<Complex64>>) -> f64 {
    let n = a.len();
    let mut log2_abs = 0.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .norm_sqr()
                    .partial_cmp(&a[j][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        a.swap(col, pivot_row);
        let pivot = a[col][col];
        assert!(pivot.norm_sqr() > 0.0, "matrix is singular");
        log2_abs += pivot.norm().log2();
        let pivot_tail: Vec<Complex64> = a[col][col..].to_vec();
        for row in a.iter_mut().skip(col + 1) {
            let factor = row[col] / pivot;
            for (cell, &p) in row[col..].iter_mut().zip(&pivot_tail) {
                *cell -= factor * p;
            }
        }
    }
    // The determinant of I + c H H^H is real and positive, so its
    // magnitude carries all the information.
    log2_abs
}

fn mutual_info_via_determinant(h: &trt_core::matrix::ComplexMatrix, rho: f64) -> f64 {
    let n = h.rows();
    let m = h.cols();
    let c = rho / m as f64;
    let mut a = vec![vec![Complex64::ZERO; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut dot = Complex64::ZERO;
            for k in 0..m {
                dot += h.get(i, k) * h.get(j, k).conj();
            }
            *cell = c * dot;
            if i == j {
                *cell += 1.0;
            }
        }
    }
    lu_log2_det(a)
}

#[test]
fn mutual_info_matches_determinant_oracle() {
    let rhos = [0.1, 1.0, 10.0, 1000.0];
    let mut checked = 0usize;
    for case in 0..10_000u64 {
        let m = 1 + (case % 4) as usize;
        let n = 1 + ((case / 4) % 4) as usize;
        let rho = rhos[(case / 16) as usize % rhos.len()];
        let h = sample_channel(RngStream::new(0x0EAC1E, case), n, m).unwrap();
        let via_eigen = mutual_info_bits(&h, rho, m as f64).unwrap();
        let via_det = mutual_info_via_determinant(&h, rho);
        let tol = 1e-9 * via_det.abs().max(1.0);
        assert!(
            (via_eigen - via_det).abs() <= tol,
            "case {case} ({n}x{m}, rho {rho}): eigen {via_eigen} vs det {via_det}"
        );
        checked += 1;
    }
    assert_eq!(checked, 10_000);
}

/// Simpson's rule on `f` over `[a, b]` with `2 * half_steps` intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half_steps: usize) -> f64 {
    let n = 2 * half_steps;
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn scalar_ergodic_rate_matches_quadrature() {
    // |h|^2 of a unit complex Gaussian is Exp(1), so the mean mutual
    // information is the integral of log2(1 + rho x) e^-x.
    let rho = 10.0;
    let reference = simpson(|x| (1.0 + rho * x).log2() * (-x).exp(), 0.0, 60.0, 30_000);

    let samples = 100_000u64;
    let mut acc = 0.0;
    for i in 0..samples {
        let h = sample_channel(RngStream::new(0x5150, i), 1, 1).unwrap();
        acc += mutual_info_bits(&h, rho, 1.0).unwrap();
    }
    let mc_mean = acc / samples as f64;
    let rel = (mc_mean - reference).abs() / reference;
    assert!(
        rel < 0.01,
        "MC ergodic rate {mc_mean} vs quadrature {reference} (rel {rel})"
    );
}
