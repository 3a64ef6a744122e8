//! Squeezed-vacuum inputs through a (possibly lossy) network.
//!
//! With the positive-P representation of squeezed vacuum on a real plane,
//! the characteristic function is a Gaussian integral over `(x, y) ∈ R^{2a}`
//! for the `a` modes with `r > 0`:
//!
//! ```text
//! X(η) = ∏ 2√(1+γ_i)/γ_i / √det Q,   γ_i = e^{2 r_i} - 1,
//! Q = [[2Γ⁻¹ + I, -(I + 𝒰)], [-(I + 𝒰)ᵀ, 2Γ⁻¹ + I]],   𝒰 = Lᵀ H L*.
//! ```
//!
//! The off-diagonal block `-(I + 𝒰)` is valid for sub-unitary `L`; it equals
//! `-Lᵀ diag(e^{iθ}) L*` only when `L` is unitary. Vacuum modes are integrated
//! out exactly (their positive-P weight is a delta function), so they never
//! enter `Q`.

use num_complex::Complex64;

use crate::charfn::{restricted_gram, CharacteristicFunction, GaussianModel, QMatrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::network::TransferMatrix;
use crate::partition::{BinPartition, PhasePoint};

/// Per-mode squeezing parameters `r_j ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezedInput {
    r: Vec<f64>,
}

impl SqueezedInput {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        if let Some(bad) = r.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(Error::Domain(format!("squeezing parameter {bad} must be finite and >= 0")));
        }
        Ok(Self { r })
    }

    pub fn uniform(m: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; m])
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn modes(&self) -> usize {
        self.r.len()
    }

    /// `γ_j = e^{2 r_j} - 1`.
    pub fn gamma(&self) -> Vec<f64> {
        self.r.iter().map(|r| (2.0 * r).exp_m1()).collect()
    }

    pub fn active_modes(&self) -> Vec<usize> {
        (0..self.r.len()).filter(|&i| self.r[i] > 0.0).collect()
    }

    pub fn r_max(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }

    /// Mean photon number `Σ sinh² r_j` before the network.
    pub fn mean_photons(&self) -> f64 {
        self.r.iter().map(|r| r.sinh().powi(2)).sum()
    }
}

/// Squeezed vacuum injected into a transfer matrix.
#[derive(Debug, Clone)]
pub struct SqueezedInstance {
    input: SqueezedInput,
    network: TransferMatrix,
    active: Vec<usize>,
    columns: CMatrix,
    diagonal: Vec<f64>,
    log_prefactor: f64,
}

impl SqueezedInstance {
    pub fn new(input: SqueezedInput, network: TransferMatrix) -> Result<Self> {
        if input.modes() != network.modes() {
            return Err(Error::Dimension(format!(
                "{} squeezing parameters for a {}-mode network",
                input.modes(),
                network.modes()
            )));
        }
        let active = input.active_modes();
        let columns = network.matrix().select_columns(active.iter());
        let gammas: Vec<f64> = active.iter().map(|&i| (2.0 * input.r[i]).exp_m1()).collect();
        let diagonal = gammas.iter().map(|g| 2.0 / g + 1.0).collect();
        let log_prefactor = gammas
            .iter()
            .map(|g| (2.0 * (1.0 + g).sqrt() / g).ln())
            .sum();
        Ok(Self { input, network, active, columns, diagonal, log_prefactor })
    }

    pub fn input(&self) -> &SqueezedInput {
        &self.input
    }

    pub fn network(&self) -> &TransferMatrix {
        &self.network
    }

    /// Modes with `r > 0`; `Q` has dimension twice this count.
    pub fn active_modes(&self) -> &[usize] {
        &self.active
    }
}

impl GaussianModel for SqueezedInstance {
    fn modes(&self) -> usize {
        self.network.modes()
    }

    fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    fn q_matrix(&self, theta: &[f64]) -> Option<QMatrix> {
        let a = self.active.len();
        if a == 0 {
            return None;
        }
        let g = restricted_gram(&self.columns, theta);
        let mut q = CMatrix::zeros(2 * a, 2 * a);
        for i in 0..a {
            q[(i, i)] = Complex64::new(self.diagonal[i], 0.0);
            q[(a + i, a + i)] = Complex64::new(self.diagonal[i], 0.0);
            for j in 0..a {
                let delta = if i == j { 1.0 } else { 0.0 };
                let off = -(g[(i, j)] + delta);
                q[(i, a + j)] = off;
                q[(a + j, i)] = off;
            }
        }
        Some(QMatrix(q))
    }

    fn mean_photons(&self) -> f64 {
        self.input.mean_photons()
    }
}

/// `X(η)` for squeezed vacuum through the network, binned by `partition`.
pub fn char_fn_squeezed(
    instance: &SqueezedInstance,
    partition: &BinPartition,
    eta: &PhasePoint,
) -> Result<Complex64> {
    CharacteristicFunction::new(instance, partition)?.eval(eta)
}
