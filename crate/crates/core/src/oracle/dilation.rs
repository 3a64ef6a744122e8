use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::network::{TransferMatrix, TOL_SUBUNITARY};

/// `2m × 2m` unitary with top-left block `L`.
///
/// With `L = W Σ V†` and `S = √(I - Σ²)`,
/// `T = [[L, -W S], [S V†, Σ]]`.
pub fn dilate_to_unitary(l: &TransferMatrix) -> Result<CMatrix> {
    let m = l.modes();
    let svd = l.matrix().clone().svd(true, true);
    let w = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma = svd.singular_values;
    let largest = sigma.iter().copied().fold(0.0, f64::max);
    if largest > 1.0 + TOL_SUBUNITARY {
        return Err(Error::NotSubunitary(largest));
    }
    let c: Vec<f64> = sigma.iter().map(|s| s.min(1.0)).collect();
    let s: Vec<f64> = c.iter().map(|x| (1.0 - x * x).max(0.0).sqrt()).collect();

    let mut t = CMatrix::zeros(2 * m, 2 * m);
    t.view_mut((0, 0), (m, m)).copy_from(l.matrix());
    for i in 0..m {
        for k in 0..m {
            t[(i, m + k)] = -w[(i, k)] * s[k];
            t[(m + k, i)] = v_t[(k, i)] * s[k];
        }
        t[(m + i, m + i)] = Complex64::new(c[i], 0.0);
    }
    Ok(t)
}
