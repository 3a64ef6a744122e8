//! Small dense complex linear-algebra helpers.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Pivots smaller than this (relative to the largest entry) are treated as zero.
const SINGULAR_RELATIVE_TOL: f64 = 1e-14;

/// Logarithm of a determinant, kept as `ln|det| + i·arg`.
///
/// The imaginary part is the sum of the pivot phases (plus π for an odd
/// row permutation); it is not reduced modulo 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet(pub Complex64);

impl LogDet {
    pub fn modulus_ln(&self) -> f64 {
        self.0.re
    }

    pub fn phase(&self) -> f64 {
        self.0.im
    }

    pub fn value(&self) -> Complex64 {
        self.0.exp()
    }
}

/// LU factorisation with partial pivoting, returning the log-determinant.
///
/// Fails when a pivot vanishes relative to the matrix scale.
pub fn lu_log_det(matrix: &CMatrix) -> Result<LogDet> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::Dimension(format!(
            "determinant of a {}x{} matrix",
            n,
            matrix.ncols()
        )));
    }
    if n == 0 {
        return Ok(LogDet(Complex64::new(0.0, 0.0)));
    }
    let mut a = matrix.clone();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Numeric(format!("matrix scale {scale}")));
    }
    let mut log_abs = 0.0;
    let mut phase = 0.0;
    let mut swaps = 0usize;
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, a[(r, col)].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs <= SINGULAR_RELATIVE_TOL * scale {
            return Err(Error::Numeric(format!(
                "vanishing pivot {pivot_abs:e} in column {col}"
            )));
        }
        if pivot_row != col {
            a.swap_rows(pivot_row, col);
            swaps += 1;
        }
        let pivot = a[(col, col)];
        log_abs += pivot_abs.ln();
        phase += pivot.arg();
        let inv = pivot.inv();
        for r in (col + 1)..n {
            let factor = a[(r, col)] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in (col + 1)..n {
                let upd = factor * a[(col, c)];
                a[(r, c)] -= upd;
            }
        }
    }
    if swaps % 2 == 1 {
        phase += PI;
    }
    Ok(LogDet(Complex64::new(log_abs, phase)))
}

/// Reduces an angle to (-π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

pub fn singular_values(matrix: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn is_unitary(matrix: &CMatrix, tol: f64) -> bool {
    if !matrix.is_square() {
        return false;
    }
    let prod = matrix.adjoint() * matrix;
    let id = CMatrix::identity(matrix.nrows(), matrix.ncols());
    (prod - id).iter().all(|z| z.norm() <= tol)
}

/// Block-diagonal direct sum of the given matrices.
pub fn direct_sum(blocks: &[CMatrix]) -> CMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}
