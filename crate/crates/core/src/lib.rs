//! Binned photon-count distributions for Gaussian boson sampling.
//!
//! Detector outputs are grouped into a few bins and the distribution of the
//! binned counts is reconstructed from its characteristic function by an
//! inverse DFT. Squeezed, thermal, squashed and partially distinguishable
//! inputs through lossy networks are supported, together with Haar-averaged
//! closed forms, a Fock-space oracle for small instances and sample
//! validation utilities.

pub mod binned;
pub mod charfn;
pub mod classical;
pub mod cutoff;
pub mod distinguishability;
pub mod error;
pub mod haar;
pub mod instance;
pub mod linalg;
pub mod network;
pub mod oracle;
pub mod partition;
pub mod squeezed;
pub mod validate;

pub use binned::{binned_distribution, binned_distribution_of, marginalize, merge_bins, BinnedDistribution};
pub use charfn::{CharacteristicFunction, GaussianModel};
pub use classical::{SquashedInput, SquashedInstance, ThermalInput, ThermalInstance};
pub use cutoff::{CutoffChoice, CutoffMethod, CutoffPolicy};
pub use distinguishability::PartialDistInstance;
pub use error::{Error, Result};
pub use instance::{Instance, InstanceSpec};
pub use linalg::CMatrix;
pub use network::TransferMatrix;
pub use partition::{BinPartition, PhasePoint};
pub use squeezed::{SqueezedInput, SqueezedInstance};
pub use validate::{SampleFormat, SampleSet, ValidationReport};
