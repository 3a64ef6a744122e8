//! JSON instance description and model dispatch.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binned::{binned_distribution_of, select_cutoff_exact, BinnedDistribution};
use crate::charfn::{CharacteristicFunction, GaussianModel};
use crate::classical::{SquashedInput, SquashedInstance, ThermalInput, ThermalInstance};
use crate::cutoff::{select_cutoff_squeezed, CutoffChoice, CutoffPolicy};
use crate::distinguishability::{build_partial_instance, ExpandedInstance, PartialDistInstance};
use crate::error::{Error, Result};
use crate::network::TransferMatrix;
use crate::oracle::{oracle_binned_distribution, ModeState, OracleOutput};
use crate::partition::{BinPartition, PhasePoint};
use crate::squeezed::{SqueezedInput, SqueezedInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputModel {
    Squeezed,
    Thermal,
    Squashed,
    Partial,
}

/// Network entries as separate real and imaginary row lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub real: Vec<Vec<f64>>,
    #[serde(default)]
    pub imag: Option<Vec<Vec<f64>>>,
}

/// On-disk instance. `squeezing` holds `r` for squeezed/partial inputs and
/// the squash parameter for squashed inputs; `nbar` is used by thermal inputs.
/// A missing network means the identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub modes: usize,
    pub input_model: InputModel,
    #[serde(default)]
    pub squeezing: Option<Vec<f64>>,
    #[serde(default)]
    pub nbar: Option<Vec<f64>>,
    #[serde(default)]
    pub eta_ind: Option<f64>,
    #[serde(default)]
    pub network: Option<NetworkSpec>,
}

/// A validated instance of any supported model.
#[derive(Debug, Clone)]
pub enum Instance {
    Squeezed(SqueezedInstance),
    Thermal(ThermalInstance),
    Squashed(SquashedInstance),
    Partial(PartialDistInstance, Box<ExpandedInstance>),
}

fn per_mode(values: &Option<Vec<f64>>, field: &str, modes: usize) -> Result<Vec<f64>> {
    let v = values
        .as_ref()
        .ok_or_else(|| Error::Instance(format!("field `{field}` is required for this input model")))?;
    match v.len() {
        1 => Ok(vec![v[0]; modes]),
        n if n == modes => Ok(v.clone()),
        n => Err(Error::Instance(format!("`{field}` has {n} entries for {modes} modes"))),
    }
}

impl InstanceSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn network(&self) -> Result<TransferMatrix> {
        let net = match &self.network {
            None => TransferMatrix::identity(self.modes),
            Some(spec) => {
                let zeros;
                let imag = match &spec.imag {
                    Some(i) => i,
                    None => {
                        zeros = spec.real.iter().map(|row| vec![0.0; row.len()]).collect::<Vec<_>>();
                        &zeros
                    }
                };
                TransferMatrix::from_parts(&spec.real, imag)?
            }
        };
        if net.modes() != self.modes {
            return Err(Error::Instance(format!("network has {} modes, `modes` is {}", net.modes(), self.modes)));
        }
        Ok(net)
    }

    pub fn build(&self) -> Result<Instance> {
        if self.modes == 0 {
            return Err(Error::Instance("`modes` must be >= 1".into()));
        }
        let network = self.network()?;
        let m = self.modes;
        Ok(match self.input_model {
            InputModel::Squeezed => Instance::Squeezed(SqueezedInstance::new(
                SqueezedInput::new(per_mode(&self.squeezing, "squeezing", m)?)?,
                network,
            )?),
            InputModel::Thermal => Instance::Thermal(ThermalInstance::new(
                ThermalInput::new(per_mode(&self.nbar, "nbar", m)?)?,
                network,
            )?),
            InputModel::Squashed => Instance::Squashed(SquashedInstance::new(
                SquashedInput::new(per_mode(&self.squeezing, "squeezing", m)?)?,
                network,
            )?),
            InputModel::Partial => {
                let eta = self
                    .eta_ind
                    .ok_or_else(|| Error::Instance("field `eta_ind` is required for partial inputs".into()))?;
                let p = PartialDistInstance::new(
                    SqueezedInput::new(per_mode(&self.squeezing, "squeezing", m)?)?,
                    network,
                    eta,
                )?;
                let expanded = build_partial_instance(&p)?;
                Instance::Partial(p, Box::new(expanded))
            }
        })
    }
}

impl Instance {
    pub fn from_json(text: &str) -> Result<Self> {
        InstanceSpec::from_json(text)?.build()
    }

    pub fn load(path: &Path) -> Result<Self> {
        InstanceSpec::load(path)?.build()
    }

    /// Number of detected modes.
    pub fn modes(&self) -> usize {
        match self {
            Instance::Squeezed(s) => s.modes(),
            Instance::Thermal(t) => t.modes(),
            Instance::Squashed(s) => s.modes(),
            Instance::Partial(p, _) => p.base_modes(),
        }
    }

    pub fn model_name(&self) -> &'static str {
        match self {
            Instance::Squeezed(_) => "squeezed",
            Instance::Thermal(_) => "thermal",
            Instance::Squashed(_) => "squashed",
            Instance::Partial(..) => "partial",
        }
    }

    /// Squashed inputs with the same per-mode mean photon number and network.
    pub fn matched_squashed(&self) -> Result<Instance> {
        match self {
            Instance::Squeezed(s) => Ok(Instance::Squashed(SquashedInstance::new(
                SquashedInput::matched_to_squeezed(s.input().r())?,
                s.network().clone(),
            )?)),
            _ => Err(Error::Instance(format!(
                "mean-photon matching needs a squeezed instance, got {}",
                self.model_name()
            ))),
        }
    }

    pub fn select_cutoff(&self, policy: &CutoffPolicy) -> Result<CutoffChoice> {
        match self {
            Instance::Squeezed(s) => {
                select_cutoff_squeezed(s.active_modes().len(), s.input().r_max(), policy)
            }
            Instance::Partial(_, e) => {
                let inst = &e.instance;
                select_cutoff_squeezed(inst.active_modes().len(), inst.input().r_max(), policy)
            }
            Instance::Thermal(t) => select_cutoff_exact(t, policy),
            Instance::Squashed(s) => select_cutoff_exact(s, policy),
        }
    }

    fn with_model<T>(
        &self,
        partition: &BinPartition,
        f: impl FnOnce(&dyn GaussianModel, &BinPartition) -> Result<T>,
    ) -> Result<T> {
        if partition.modes() != self.modes() {
            return Err(Error::Dimension(format!(
                "partition over {} modes for a {}-mode instance",
                partition.modes(),
                self.modes()
            )));
        }
        match self {
            Instance::Squeezed(s) => f(s, partition),
            Instance::Thermal(t) => f(t, partition),
            Instance::Squashed(s) => f(s, partition),
            Instance::Partial(_, e) => f(&e.instance, &e.expand_partition(partition)?),
        }
    }

    /// `X(η)` for the instance binned by `partition`.
    pub fn char_fn(&self, partition: &BinPartition, eta: &PhasePoint) -> Result<num_complex::Complex64> {
        self.with_model(partition, |model, p| CharacteristicFunction::new(model, p)?.eval(eta))
    }

    /// Table at a fixed cutoff; the tail bound is left at zero.
    pub fn binned_distribution_at(&self, partition: &BinPartition, cutoff: usize) -> Result<BinnedDistribution> {
        let mut dist = self.with_model(partition, |model, p| binned_distribution_of(model, p, cutoff))?;
        dist.partition = partition.clone();
        Ok(dist)
    }

    /// Table at the cutoff chosen by `policy`, carrying that cutoff's tail bound.
    pub fn binned_distribution(
        &self,
        partition: &BinPartition,
        policy: &CutoffPolicy,
    ) -> Result<(BinnedDistribution, CutoffChoice)> {
        let choice = self.select_cutoff(policy)?;
        let dist = self.binned_distribution_at(partition, choice.n)?.with_tail_bound(choice.tail_bound);
        Ok((dist, choice))
    }

    /// Fock-space oracle table.
    pub fn oracle(&self, partition: &BinPartition, n_max: usize) -> Result<OracleOutput> {
        let (states, network, big_partition): (Vec<ModeState>, &TransferMatrix, BinPartition) = match self {
            Instance::Squeezed(s) => {
                (s.input().r().iter().map(|&r| ModeState::Squeezed(r)).collect(), s.network(), partition.clone())
            }
            Instance::Thermal(t) => {
                (t.input().nbar().iter().map(|&n| ModeState::Thermal(n)).collect(), t.network(), partition.clone())
            }
            Instance::Squashed(s) => {
                (s.input().r().iter().map(|&r| ModeState::Squashed(r)).collect(), s.network(), partition.clone())
            }
            Instance::Partial(_, e) => (
                e.instance.input().r().iter().map(|&r| ModeState::Squeezed(r)).collect(),
                e.instance.network(),
                e.expand_partition(partition)?,
            ),
        };
        if partition.modes() != self.modes() {
            return Err(Error::Dimension(format!(
                "partition over {} modes for a {}-mode instance",
                partition.modes(),
                self.modes()
            )));
        }
        let mut out = oracle_binned_distribution(&states, network, &big_partition, n_max)?;
        out.distribution.partition = partition.clone();
        Ok(out)
    }
}
