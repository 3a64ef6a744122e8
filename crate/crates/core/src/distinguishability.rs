//! Partial distinguishability via an expanded network.
//!
//! Each of the `m` ports carries one indistinguishable mode and `m` virtual
//! distinguishable modes. A fraction `η` of the light stays indistinguishable;
//! the rest leaks into the virtual mode belonging to its input port. Absorbing
//! those fictitious losses into the network gives
//!
//! ```text
//! L̃ = √η L ⊕ (√(1-η) L)^{⊕m}
//! ```
//!
//! fed with ideal squeezed vacuum (block 0: every port; block `j`: port `j`
//! only). Output port `i` of every block is detected by the same detector, so
//! bins are unioned across the `m + 1` copies.

use num_complex::Complex64;

use crate::charfn::CharacteristicFunction;
use crate::error::{Error, Result};
use crate::linalg::direct_sum;
use crate::network::TransferMatrix;
use crate::partition::{BinPartition, PhasePoint};
use crate::squeezed::{SqueezedInput, SqueezedInstance};

/// Squeezed inputs with a scalar indistinguishability efficiency.
#[derive(Debug, Clone)]
pub struct PartialDistInstance {
    input: SqueezedInput,
    network: TransferMatrix,
    eta_ind: f64,
}

/// The expanded squeezed instance and the map from base ports to expanded ports.
#[derive(Debug, Clone)]
pub struct ExpandedInstance {
    pub instance: SqueezedInstance,
    pub port_map: Vec<Vec<usize>>,
}

impl ExpandedInstance {
    /// Lifts a partition of the base ports to the expanded ports.
    pub fn expand_partition(&self, partition: &BinPartition) -> Result<BinPartition> {
        if partition.modes() != self.port_map.len() {
            return Err(Error::Dimension(format!(
                "partition over {} modes for a {}-port base network",
                partition.modes(),
                self.port_map.len()
            )));
        }
        partition.expand(&self.port_map, self.instance.network().modes())
    }
}

impl PartialDistInstance {
    pub fn new(input: SqueezedInput, network: TransferMatrix, eta_ind: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta_ind) {
            return Err(Error::Domain(format!(
                "indistinguishability efficiency {eta_ind} outside [0, 1]"
            )));
        }
        if input.modes() != network.modes() {
            return Err(Error::Dimension(format!(
                "{} squeezing parameters for a {}-mode network",
                input.modes(),
                network.modes()
            )));
        }
        Ok(Self { input, network, eta_ind })
    }

    pub fn base_modes(&self) -> usize {
        self.network.modes()
    }

    pub fn input(&self) -> &SqueezedInput {
        &self.input
    }

    pub fn network(&self) -> &TransferMatrix {
        &self.network
    }

    pub fn eta_ind(&self) -> f64 {
        self.eta_ind
    }
}

/// Builds the `m(m+1)`-port squeezed instance.
///
/// Blocks with zero transmissivity (`η = 0` or `η = 1`) get vacuum inputs, so
/// the active mode count is `2m` for `0 < η < 1` and `m` at the endpoints.
pub fn build_partial_instance(p: &PartialDistInstance) -> Result<ExpandedInstance> {
    let m = p.base_modes();
    let big = m * (m + 1);
    let t_ind = p.eta_ind.sqrt();
    let t_dist = (1.0 - p.eta_ind).sqrt();
    let base = p.network.matrix();
    let mut blocks = Vec::with_capacity(m + 1);
    blocks.push(base.map(|z| z * t_ind));
    for _ in 0..m {
        blocks.push(base.map(|z| z * t_dist));
    }
    let matrix = direct_sum(&blocks);

    let r = p.input.r();
    let mut squeezing = vec![0.0; big];
    if t_ind > 0.0 {
        squeezing[..m].copy_from_slice(r);
    }
    if t_dist > 0.0 {
        for j in 0..m {
            squeezing[(j + 1) * m + j] = r[j];
        }
    }
    let port_map = (0..m)
        .map(|i| (0..=m).map(|block| block * m + i).collect())
        .collect();
    let instance = SqueezedInstance::new(
        SqueezedInput::new(squeezing)?,
        TransferMatrix::new_unchecked(matrix),
    )?;
    Ok(ExpandedInstance { instance, port_map })
}

/// `X(η)` of the partially distinguishable model, binned on the base ports.
pub fn char_fn_partial(
    p: &PartialDistInstance,
    partition: &BinPartition,
    eta: &PhasePoint,
) -> Result<Complex64> {
    let expanded = build_partial_instance(p)?;
    let big_partition = expanded.expand_partition(partition)?;
    CharacteristicFunction::new(&expanded.instance, &big_partition)?.eval(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::GaussianModel;

    fn instance(eta: f64) -> PartialDistInstance {
        PartialDistInstance::new(
            SqueezedInput::new(vec![0.3, 0.4]).unwrap(),
            TransferMatrix::balanced_beamsplitter(),
            eta,
        )
        .unwrap()
    }

    #[test]
    fn expanded_dimensions() {
        let e = build_partial_instance(&instance(0.5)).unwrap();
        assert_eq!(e.instance.network().modes(), 6);
        assert_eq!(e.instance.active_modes(), &[0, 1, 2, 5]);
        assert_eq!(e.port_map, vec![vec![0, 2, 4], vec![1, 3, 5]]);
        assert_eq!(e.instance.q_matrix(&[0.0; 6]).unwrap().dim(), 8);
    }

    #[test]
    fn endpoints_reduce_q() {
        for eta in [0.0, 1.0] {
            let e = build_partial_instance(&instance(eta)).unwrap();
            assert_eq!(e.instance.q_matrix(&[0.0; 6]).unwrap().dim(), 4);
        }
    }

    #[test]
    fn efficiency_outside_unit_interval_rejected() {
        let err = PartialDistInstance::new(
            SqueezedInput::new(vec![0.3]).unwrap(),
            TransferMatrix::identity(1),
            1.2,
        );
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn origin_is_normalised() {
        let x = char_fn_partial(&instance(0.5), &BinPartition::singletons(2), &PhasePoint::zero(2)).unwrap();
        assert!((x - 1.0).norm() < 1e-12);
    }
}
