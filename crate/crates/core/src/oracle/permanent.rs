use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Largest matrix accepted by [`permanent`].
pub const MAX_PERMANENT_SIZE: usize = 24;

/// Permanent by Ryser's formula with Gray-code updates, `O(2^n n)`.
pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension(format!("permanent of a {}x{} matrix", n, a.ncols())));
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if n > MAX_PERMANENT_SIZE {
        return Err(Error::Size(format!("permanent of size {n} exceeds {MAX_PERMANENT_SIZE}")));
    }
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let next = k ^ (k >> 1);
        let col = (next ^ gray).trailing_zeros() as usize;
        let adding = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if adding {
                *s += a[(i, col)];
            } else {
                *s -= a[(i, col)];
            }
        }
        gray = next;
        let prod: Complex64 = row_sums.iter().product();
        if next.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    // Ryser: perm = (-1)^n Σ_S (-1)^{|S|} ∏_i Σ_{j∈S} a_ij
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}
