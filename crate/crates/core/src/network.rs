//! Linear optical networks described by (sub-)unitary transfer matrices.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Default slack on the largest singular value.
pub const TOL_SUBUNITARY: f64 = 1e-8;

/// Mode transformation `a_in -> L a_in` of a passive, possibly lossy, network.
///
/// Column `j` holds the output amplitudes of input mode `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: CMatrix,
}

/// Singular-value summary of a transfer matrix.
#[derive(Debug, Clone, Serialize)]
pub struct NetworkReport {
    pub singular_values: Vec<f64>,
    pub max_singular_value: f64,
    pub is_unitary: bool,
    pub is_subunitary: bool,
}

impl TransferMatrix {
    /// Builds a transfer matrix, rejecting non-square input and matrices whose
    /// largest singular value exceeds `1 + TOL_SUBUNITARY`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        Self::with_tolerance(entries, TOL_SUBUNITARY)
    }

    pub fn with_tolerance(entries: CMatrix, tol: f64) -> Result<Self> {
        let report = validate_network(&entries, tol)?;
        if !report.is_subunitary {
            return Err(Error::NotSubunitary(report.max_singular_value));
        }
        Ok(Self { entries })
    }

    /// Wraps a matrix without checking subunitarity. Callers guarantee the invariant.
    pub(crate) fn new_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn identity(m: usize) -> Self {
        Self::new_unchecked(CMatrix::identity(m, m))
    }

    /// Balanced two-mode beamsplitter `[[1, 1], [1, -1]] / √2`.
    pub fn balanced_beamsplitter() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::new_unchecked(CMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
    }

    /// Builds from separate real and imaginary row-major tables.
    pub fn from_parts(real: &[Vec<f64>], imag: &[Vec<f64>]) -> Result<Self> {
        let m = real.len();
        if imag.len() != m || real.iter().chain(imag.iter()).any(|row| row.len() != m) {
            return Err(Error::Dimension(
                "network real/imag parts must both be m x m".into(),
            ));
        }
        let entries = CMatrix::from_fn(m, m, |i, j| Complex64::new(real[i][j], imag[i][j]));
        Self::new(entries)
    }

    pub fn modes(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Uniform attenuation of every path by amplitude factor `t`.
    pub fn scaled(&self, t: f64) -> Self {
        Self::new_unchecked(self.entries.map(|z| z * t))
    }

    pub fn report(&self, tol: f64) -> NetworkReport {
        validate_network(&self.entries, tol).expect("transfer matrix is square")
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        linalg::is_unitary(&self.entries, tol)
    }
}

/// Singular-value check of a candidate network matrix.
pub fn validate_network(matrix: &CMatrix, tol: f64) -> Result<NetworkReport> {
    if !matrix.is_square() {
        return Err(Error::Dimension(format!(
            "network matrix is {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if matrix.nrows() == 0 {
        return Err(Error::Dimension("network has no modes".into()));
    }
    if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("network has non-finite entries".into()));
    }
    let singular_values = linalg::singular_values(matrix);
    let max_singular_value = singular_values[0];
    let is_unitary = singular_values.iter().all(|s| (s - 1.0).abs() <= tol);
    Ok(NetworkReport {
        max_singular_value,
        is_subunitary: max_singular_value <= 1.0 + tol,
        is_unitary,
        singular_values,
    })
}
