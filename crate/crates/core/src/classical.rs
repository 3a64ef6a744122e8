//! Classical mock-up inputs: thermal and squashed states.
//!
//! Both have a non-negative Glauber–Sudarshan P function, so the phase space
//! is half the size of the squeezed case. Vacuum modes (`n̄ = 0`, `r = 0`)
//! carry a delta-function P function and are integrated out.

use num_complex::Complex64;

use crate::charfn::{restricted_gram, CharacteristicFunction, GaussianModel, QMatrix};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::network::TransferMatrix;
use crate::partition::{BinPartition, PhasePoint};

fn check_nonnegative(values: &[f64], what: &str) -> Result<()> {
    match values.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        Some(bad) => Err(Error::Domain(format!("{what} {bad} must be finite and >= 0"))),
        None => Ok(()),
    }
}

fn check_modes(inputs: usize, network: &TransferMatrix) -> Result<()> {
    if inputs != network.modes() {
        return Err(Error::Dimension(format!(
            "{inputs} input parameters for a {}-mode network",
            network.modes()
        )));
    }
    Ok(())
}

/// Thermal states with mean photon numbers `n̄_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalInput {
    nbar: Vec<f64>,
}

impl ThermalInput {
    pub fn new(nbar: Vec<f64>) -> Result<Self> {
        check_nonnegative(&nbar, "mean photon number")?;
        Ok(Self { nbar })
    }

    pub fn nbar(&self) -> &[f64] {
        &self.nbar
    }

    /// `k_j = 2 n̄_j + 1`, the covariance scale.
    pub fn k(&self) -> Vec<f64> {
        self.nbar.iter().map(|n| 2.0 * n + 1.0).collect()
    }
}

/// Squashed states `S(r) ν_th(e^{2r}) S(r)†`, parametrised by `r_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SquashedInput {
    r: Vec<f64>,
}

impl SquashedInput {
    pub fn new(r: Vec<f64>) -> Result<Self> {
        check_nonnegative(&r, "squash parameter")?;
        Ok(Self { r })
    }

    /// Squashed states with the same mean photon number as squeezed vacuum
    /// with parameters `squeezing`: `λ/4 = sinh² r_sq`.
    pub fn matched_to_squeezed(squeezing: &[f64]) -> Result<Self> {
        check_nonnegative(squeezing, "squeezing parameter")?;
        Self::new(
            squeezing
                .iter()
                .map(|r| 0.25 * (4.0 * r.sinh().powi(2)).ln_1p())
                .collect(),
        )
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// `λ_j = e^{4 r_j} - 1`.
    pub fn lambda(&self) -> Vec<f64> {
        self.r.iter().map(|r| (4.0 * r).exp_m1()).collect()
    }

    pub fn mean_photons(&self) -> f64 {
        self.lambda().iter().map(|l| 0.25 * l).sum()
    }
}

/// Thermal light through a network.
#[derive(Debug, Clone)]
pub struct ThermalInstance {
    input: ThermalInput,
    network: TransferMatrix,
    columns: CMatrix,
    two_d: Vec<f64>,
    log_prefactor: f64,
}

impl ThermalInstance {
    pub fn new(input: ThermalInput, network: TransferMatrix) -> Result<Self> {
        check_modes(input.nbar.len(), &network)?;
        let active: Vec<usize> = (0..input.nbar.len()).filter(|&i| input.nbar[i] > 0.0).collect();
        let columns = network.matrix().select_columns(active.iter());
        // D = diag(2/(k-1)) = diag(1/n̄); the prefactor N (2π)^a is ∏ 2/n̄.
        let two_d = active.iter().map(|&i| 2.0 / input.nbar[i]).collect();
        let log_prefactor = active.iter().map(|&i| (2.0 / input.nbar[i]).ln()).sum();
        Ok(Self { input, network, columns, two_d, log_prefactor })
    }

    pub fn input(&self) -> &ThermalInput {
        &self.input
    }

    pub fn network(&self) -> &TransferMatrix {
        &self.network
    }
}

impl GaussianModel for ThermalInstance {
    fn modes(&self) -> usize {
        self.network.modes()
    }

    fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    fn q_matrix(&self, theta: &[f64]) -> Option<QMatrix> {
        let a = self.two_d.len();
        if a == 0 {
            return None;
        }
        let g = restricted_gram(&self.columns, theta);
        let i = Complex64::i();
        let mut q = CMatrix::zeros(2 * a, 2 * a);
        for r in 0..a {
            for c in 0..a {
                let diag = if r == c { self.two_d[r] } else { 0.0 };
                let block = Complex64::new(diag, 0.0) - g[(r, c)] - g[(c, r)];
                let skew = i * (g[(r, c)] - g[(c, r)]);
                q[(r, c)] = block;
                q[(a + r, a + c)] = block;
                q[(r, a + c)] = skew;
                q[(a + r, c)] = -skew;
            }
        }
        Some(QMatrix(q))
    }

    fn mean_photons(&self) -> f64 {
        self.input.nbar.iter().sum()
    }
}

/// Squashed light through a network.
#[derive(Debug, Clone)]
pub struct SquashedInstance {
    input: SquashedInput,
    network: TransferMatrix,
    columns: CMatrix,
    two_d: Vec<f64>,
    log_prefactor: f64,
}

impl SquashedInstance {
    pub fn new(input: SquashedInput, network: TransferMatrix) -> Result<Self> {
        check_modes(input.r.len(), &network)?;
        let active: Vec<usize> = (0..input.r.len()).filter(|&i| input.r[i] > 0.0).collect();
        let columns = network.matrix().select_columns(active.iter());
        let lambdas: Vec<f64> = active.iter().map(|&i| (4.0 * input.r[i]).exp_m1()).collect();
        // D = diag(2/λ); N √((2π)^a) = ∏ 2/√λ.
        let two_d = lambdas.iter().map(|l| 4.0 / l).collect();
        let log_prefactor = lambdas.iter().map(|l| std::f64::consts::LN_2 - 0.5 * l.ln()).sum();
        Ok(Self { input, network, columns, two_d, log_prefactor })
    }

    pub fn input(&self) -> &SquashedInput {
        &self.input
    }

    pub fn network(&self) -> &TransferMatrix {
        &self.network
    }
}

impl GaussianModel for SquashedInstance {
    fn modes(&self) -> usize {
        self.network.modes()
    }

    fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    fn q_matrix(&self, theta: &[f64]) -> Option<QMatrix> {
        let a = self.two_d.len();
        if a == 0 {
            return None;
        }
        let g = restricted_gram(&self.columns, theta);
        let q = CMatrix::from_fn(a, a, |r, c| {
            let diag = if r == c { self.two_d[r] } else { 0.0 };
            Complex64::new(diag, 0.0) - g[(r, c)] - g[(c, r)]
        });
        Some(QMatrix(q))
    }

    fn mean_photons(&self) -> f64 {
        self.input.mean_photons()
    }
}

pub fn char_fn_thermal(
    instance: &ThermalInstance,
    partition: &BinPartition,
    eta: &PhasePoint,
) -> Result<Complex64> {
    CharacteristicFunction::new(instance, partition)?.eval(eta)
}

pub fn char_fn_squashed(
    instance: &SquashedInstance,
    partition: &BinPartition,
    eta: &PhasePoint,
) -> Result<Complex64> {
    CharacteristicFunction::new(instance, partition)?.eval(eta)
}
