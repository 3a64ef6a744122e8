//! Grouping of output modes into bins, and phase points on the bin torus.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};

/// Disjoint, non-empty groups of output-mode indices (zero-based).
///
/// The union may leave modes out; those are traced over, which is how
/// marginal distributions are expressed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BinPartition {
    modes: usize,
    bins: Vec<Vec<usize>>,
    #[serde(skip)]
    membership: Vec<Option<usize>>,
}

impl BinPartition {
    pub fn new(bins: Vec<Vec<usize>>, modes: usize) -> Result<Self> {
        if bins.is_empty() {
            return Err(Error::Partition("at least one bin is required".into()));
        }
        let mut membership = vec![None; modes];
        for (b, bin) in bins.iter().enumerate() {
            if bin.is_empty() {
                return Err(Error::Partition(format!("bin {} is empty", b + 1)));
            }
            for &mode in bin {
                let slot = membership.get_mut(mode).ok_or_else(|| {
                    Error::Partition(format!("mode index {} out of range for {modes} modes", mode + 1))
                })?;
                if let Some(other) = slot {
                    return Err(Error::Partition(format!(
                        "mode {} appears in bins {} and {}",
                        mode + 1,
                        *other + 1,
                        b + 1
                    )));
                }
                *slot = Some(b);
            }
        }
        Ok(Self { modes, bins, membership })
    }

    /// Builds from one-based mode labels, as used in the JSON interface.
    pub fn from_one_based(bins: &[Vec<usize>], modes: usize) -> Result<Self> {
        let zero_based = bins
            .iter()
            .map(|bin| {
                bin.iter()
                    .map(|&i| {
                        i.checked_sub(1)
                            .ok_or_else(|| Error::Partition("mode labels start at 1".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero_based, modes)
    }

    pub fn to_one_based(&self) -> Vec<Vec<usize>> {
        self.bins.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }

    /// Every mode in its own bin.
    pub fn singletons(modes: usize) -> Self {
        Self::new((0..modes).map(|i| vec![i]).collect(), modes).expect("valid singleton partition")
    }

    /// All modes in a single bin (total photon number).
    pub fn total(modes: usize) -> Self {
        Self::new(vec![(0..modes).collect()], modes).expect("valid single-bin partition")
    }

    /// Contiguous bins whose sizes differ by at most one.
    pub fn contiguous(modes: usize, bins: usize) -> Result<Self> {
        if bins == 0 || bins > modes {
            return Err(Error::Partition(format!("cannot split {modes} modes into {bins} bins")));
        }
        let mut out = Vec::with_capacity(bins);
        let mut start = 0;
        for b in 0..bins {
            let size = modes / bins + usize::from(b < modes % bins);
            out.push((start..start + size).collect());
            start += size;
        }
        Self::new(out, modes)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn bins(&self) -> &[Vec<usize>] {
        &self.bins
    }

    pub fn bin_of(&self, mode: usize) -> Option<usize> {
        self.membership.get(mode).copied().flatten()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.bins.iter().map(Vec::len).collect()
    }

    /// Bin fractions `|K_i| / m`.
    pub fn fractions(&self) -> Vec<f64> {
        self.bins.iter().map(|b| b.len() as f64 / self.modes as f64).collect()
    }

    pub fn covers_all(&self) -> bool {
        self.membership.iter().all(Option::is_some)
    }

    /// The partition with bin `index` removed.
    pub fn without(&self, index: usize) -> Result<Self> {
        if index >= self.len() {
            return Err(Error::Partition(format!("bin index {index} out of range")));
        }
        let mut bins = self.bins.clone();
        bins.remove(index);
        Self::new(bins, self.modes)
    }

    /// Replaces bins `i` and `j` by their union, placed at position `min(i, j)`.
    pub fn merged(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= self.len() || j >= self.len() {
            return Err(Error::Partition(format!("cannot merge bins {i} and {j}")));
        }
        let (lo, hi) = (i.min(j), i.max(j));
        let mut bins = self.bins.clone();
        let removed = bins.remove(hi);
        bins[lo].extend(removed);
        Self::new(bins, self.modes)
    }

    /// Maps each bin through a port map, taking the union of the images.
    pub fn expand(&self, port_map: &[Vec<usize>], new_modes: usize) -> Result<Self> {
        let bins = self
            .bins
            .iter()
            .map(|bin| bin.iter().flat_map(|&i| port_map[i].iter().copied()).collect())
            .collect();
        Self::new(bins, new_modes)
    }
}

/// Phases `η ∈ [0, 2π)^B`, one per bin.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint(Vec<f64>);

impl PhasePoint {
    /// Reduces each component modulo 2π.
    pub fn new(eta: Vec<f64>) -> Self {
        Self(eta.into_iter().map(|x| x.rem_euclid(TAU)).collect())
    }

    pub fn zero(bins: usize) -> Self {
        Self(vec![0.0; bins])
    }

    /// `-η mod 2π`.
    pub fn negated(&self) -> Self {
        Self::new(self.0.iter().map(|x| -x).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Per-mode phases: `θ_i = η_j` for `i ∈ K_j`, zero for modes outside every bin.
pub fn theta_vector(partition: &BinPartition, eta: &[f64], m: usize) -> Result<Vec<f64>> {
    if eta.len() != partition.len() {
        return Err(Error::Dimension(format!(
            "phase point has {} components for {} bins",
            eta.len(),
            partition.len()
        )));
    }
    if m != partition.modes() {
        return Err(Error::Dimension(format!(
            "partition over {} modes used with {m} modes",
            partition.modes()
        )));
    }
    Ok((0..m)
        .map(|i| partition.bin_of(i).map_or(0.0, |b| eta[b]))
        .collect())
}
