//! Binned count distributions reconstructed from characteristic functions.
//!
//! With a per-bin cutoff `n`, `X(η) = Σ_k P(k) e^{iη·k}` over `k ∈ {0..n}^B`,
//! so sampling `X` on `η = 2πν/(n+1)` and applying the inverse DFT recovers
//! `P(k)`. Mass above the cutoff aliases back onto the grid; the cutoff is
//! chosen so that this mass is below a target tail probability.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::charfn::{grid_point, CharacteristicFunction, CharacteristicGrid, GaussianModel};
use crate::cutoff::{CutoffChoice, CutoffMethod, CutoffPolicy};
use crate::error::{Error, Result};
use crate::partition::{BinPartition, PhasePoint};

/// Entries down to this value are treated as round-off and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = -1e-9;
/// Largest tolerated imaginary part left by the inverse transform.
pub const MAX_IMAG_RESIDUE: f64 = 1e-8;

/// Probability table over `{0..n}^B`, row-major with the first bin most significant.
#[derive(Debug, Clone, Serialize)]
pub struct BinnedDistribution {
    pub cutoff: usize,
    pub bins: usize,
    pub probs: Vec<f64>,
    /// Probability mass known (or bounded) to lie outside the table.
    pub tail_bound: f64,
    /// Largest `|Im P(k)|` discarded by the inverse transform.
    pub imag_residue: f64,
    /// Total negative round-off removed by clamping.
    pub clamped_mass: f64,
    #[serde(serialize_with = "one_based")]
    pub partition: BinPartition,
}

fn one_based<S: serde::Serializer>(p: &BinPartition, s: S) -> std::result::Result<S::Ok, S::Error> {
    p.to_one_based().serialize(s)
}

/// Metadata written next to an exported table.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub n: usize,
    #[serde(rename = "B")]
    pub bins: usize,
    pub partition: Vec<Vec<usize>>,
    pub tail_bound: f64,
    pub imag_residue: f64,
}

/// Applies `y_k = Σ_ν x_ν e^{sign·2πi νk/N}` along every axis in place.
fn dft_all_axes(data: &mut [Complex64], side: usize, bins: usize, sign: f64) {
    let twiddle: Vec<Complex64> =
        (0..side).map(|j| Complex64::from_polar(1.0, sign * TAU * j as f64 / side as f64)).collect();
    let mut line = vec![Complex64::new(0.0, 0.0); side];
    for axis in 0..bins {
        let stride = side.pow((bins - 1 - axis) as u32);
        let block = stride * side;
        for start in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, out) in line.iter_mut().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for nu in 0..side {
                        acc += data[base + nu * stride] * twiddle[(nu * k) % side];
                    }
                    *out = acc;
                }
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

/// `P(k) = (n+1)^{-B} Σ_ν X(2πν/(n+1)) e^{-2πi ν·k/(n+1)}`.
pub fn inverse_dft(values: &[Complex64], side: usize, bins: usize) -> Vec<Complex64> {
    let mut data = values.to_vec();
    dft_all_axes(&mut data, side, bins, -1.0);
    let norm = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|z| *z *= norm);
    data
}

/// `X(2πν/(n+1)) = Σ_k P(k) e^{2πi ν·k/(n+1)}`.
pub fn forward_dft(probs: &[f64], side: usize, bins: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = probs.iter().map(|&p| Complex64::new(p, 0.0)).collect();
    dft_all_axes(&mut data, side, bins, 1.0);
    data
}

impl BinnedDistribution {
    /// Inverse-transforms a characteristic grid.
    pub fn from_grid(grid: &CharacteristicGrid, partition: &BinPartition) -> Result<Self> {
        if grid.bins != partition.len() {
            return Err(Error::Dimension(format!(
                "grid over {} bins for a {}-bin partition",
                grid.bins,
                partition.len()
            )));
        }
        let raw = inverse_dft(&grid.values, grid.side(), grid.bins);
        let imag_residue = raw.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag_residue > MAX_IMAG_RESIDUE {
            return Err(Error::Numeric(format!(
                "inverse transform left imaginary residue {imag_residue:e}; \
                 the characteristic function is not Hermitian on the grid"
            )));
        }
        let mut clamped_mass = 0.0;
        let mut probs = Vec::with_capacity(raw.len());
        for (i, z) in raw.iter().enumerate() {
            let p = z.re;
            if p < NEGATIVE_CLAMP {
                return Err(Error::NegativeProbability {
                    pattern: grid_point(i, grid.side(), grid.bins),
                    value: p,
                });
            }
            if p < 0.0 {
                clamped_mass += -p;
                probs.push(0.0);
            } else {
                probs.push(p);
            }
        }
        Ok(Self {
            cutoff: grid.cutoff,
            bins: grid.bins,
            probs,
            tail_bound: 0.0,
            imag_residue,
            clamped_mass,
            partition: partition.clone(),
        })
    }

    pub fn with_tail_bound(mut self, tail_bound: f64) -> Self {
        self.tail_bound = tail_bound;
        self
    }

    pub fn side(&self) -> usize {
        self.cutoff + 1
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn index_of(&self, pattern: &[usize]) -> Option<usize> {
        if pattern.len() != self.bins || pattern.iter().any(|&k| k > self.cutoff) {
            return None;
        }
        Some(pattern.iter().fold(0, |acc, &k| acc * self.side() + k))
    }

    pub fn pattern(&self, index: usize) -> Vec<usize> {
        grid_point(index, self.side(), self.bins)
    }

    /// `P(k)`, zero outside the table.
    pub fn prob(&self, pattern: &[usize]) -> f64 {
        self.index_of(pattern).map_or(0.0, |i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (self.pattern(i), p))
    }

    /// Characteristic function of the table on its own grid.
    pub fn forward(&self) -> Vec<Complex64> {
        forward_dft(&self.probs, self.side(), self.bins)
    }

    /// Total variation distance, comparing pattern by pattern over both supports.
    pub fn tv_distance(&self, other: &BinnedDistribution) -> f64 {
        let mut sum = 0.0;
        for (k, p) in self.iter() {
            sum += (p - other.prob(&k)).abs();
        }
        for (k, q) in other.iter() {
            if self.index_of(&k).is_none() {
                sum += q.abs();
            }
        }
        0.5 * sum
    }

    /// Restricts (or zero-pads) to a different cutoff. Mass beyond the new
    /// cutoff moves into the tail bound.
    pub fn resized(&self, cutoff: usize) -> BinnedDistribution {
        let side = cutoff + 1;
        let mut probs = vec![0.0; side.pow(self.bins as u32)];
        let mut dropped = 0.0;
        for (k, p) in self.iter() {
            if k.iter().all(|&x| x <= cutoff) {
                let idx = k.iter().fold(0, |acc, &x| acc * side + x);
                probs[idx] = p;
            } else {
                dropped += p;
            }
        }
        BinnedDistribution {
            cutoff,
            probs,
            tail_bound: self.tail_bound + dropped,
            partition: self.partition.clone(),
            ..*self
        }
    }

    /// CSV with header `k_1,…,k_B,probability`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.bins).map(|i| format!("k_{i}")).collect();
        writeln!(out, "{},probability", header.join(","))?;
        for (k, p) in self.iter() {
            let ks: Vec<String> = k.iter().map(ToString::to_string).collect();
            writeln!(out, "{},{:.16e}", ks.join(","), p)?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            n: self.cutoff,
            bins: self.bins,
            partition: self.partition.to_one_based(),
            tail_bound: self.tail_bound,
            imag_residue: self.imag_residue,
        }
    }
}

impl Clone for Sidecar {
    fn clone(&self) -> Self {
        Self { partition: self.partition.clone(), ..*self }
    }
}

/// Inverse DFT of an arbitrary characteristic function evaluated pointwise.
///
/// The closure must return values on a consistent branch; models with a
/// square-root determinant should go through [`binned_distribution_of`].
pub fn binned_distribution<F>(char_fn: F, cutoff: usize, partition: &BinPartition) -> Result<BinnedDistribution>
where
    F: Fn(&PhasePoint) -> Result<Complex64>,
{
    let bins = partition.len();
    let side = cutoff + 1;
    let total = side.pow(bins as u32);
    let values = (0..total)
        .map(|i| {
            let eta = grid_point(i, side, bins).into_iter().map(|v| TAU * v as f64 / side as f64).collect();
            char_fn(&PhasePoint::new(eta))
        })
        .collect::<Result<Vec<_>>>()?;
    BinnedDistribution::from_grid(&CharacteristicGrid { cutoff, bins, values }, partition)
}

/// Binned distribution of a Gaussian model at a fixed cutoff.
pub fn binned_distribution_of<M: GaussianModel + ?Sized>(
    model: &M,
    partition: &BinPartition,
    cutoff: usize,
) -> Result<BinnedDistribution> {
    let grid = CharacteristicFunction::new(model, partition)?.eval_grid(cutoff)?;
    BinnedDistribution::from_grid(&grid, partition)
}

/// Cutoff from the exact total-photon distribution of the model.
///
/// The distribution is computed with all modes in one bin at a provisional
/// cutoff, which is doubled when the selected `n` is not comfortably inside it.
pub fn select_cutoff_exact<M: GaussianModel + ?Sized>(model: &M, policy: &CutoffPolicy) -> Result<CutoffChoice> {
    let everything = BinPartition::total(model.modes());
    let tail_after = |dist: &BinnedDistribution, n: usize| -> f64 { dist.probs[n + 1..].iter().sum() };
    if let Some(n) = policy.n_override {
        let mut provisional = (2 * n + 16).max(32);
        loop {
            let dist = binned_distribution_of(model, &everything, provisional)?;
            let tail = tail_after(&dist, n);
            let beyond = tail_after(&dist, provisional / 2 + n / 2);
            if beyond <= 1e-3 * tail.max(policy.epsilon) || provisional > 1 << 14 {
                return Ok(CutoffChoice { n, tail_bound: tail, alpha: None, method: CutoffMethod::Override });
            }
            provisional *= 2;
        }
    }
    let mean = model.mean_photons();
    if mean == 0.0 {
        return Ok(CutoffChoice { n: 0, tail_bound: 0.0, alpha: None, method: CutoffMethod::Vacuum });
    }
    let mut provisional = ((8.0 * mean).ceil() as usize + 16).max(32);
    for _ in 0..8 {
        let dist = binned_distribution_of(model, &everything, provisional)?;
        let n = (0..provisional)
            .find(|&n| tail_after(&dist, n) <= policy.epsilon)
            .unwrap_or(provisional);
        if 2 * n <= provisional {
            return Ok(CutoffChoice {
                n,
                tail_bound: tail_after(&dist, n),
                alpha: None,
                method: CutoffMethod::ExactTail,
            });
        }
        provisional *= 2;
    }
    Err(Error::Policy(format!("no cutoff found for mean photon number {mean}")))
}

/// Sums out bin `drop_bin`.
pub fn marginalize(dist: &BinnedDistribution, drop_bin: usize) -> Result<BinnedDistribution> {
    if dist.bins < 2 {
        return Err(Error::Dimension("cannot marginalise a single-bin distribution".into()));
    }
    if drop_bin >= dist.bins {
        return Err(Error::Partition(format!("bin index {drop_bin} out of range")));
    }
    let side = dist.side();
    let mut probs = vec![0.0; side.pow(dist.bins as u32 - 1)];
    for (mut k, p) in dist.iter() {
        k.remove(drop_bin);
        let idx = k.iter().fold(0, |acc, &x| acc * side + x);
        probs[idx] += p;
    }
    Ok(BinnedDistribution {
        bins: dist.bins - 1,
        probs,
        partition: dist.partition.without(drop_bin)?,
        ..dist.clone()
    })
}

/// Distribution of `k_i + k_j`, with the merged bin placed at `min(i, j)`.
///
/// Sums above the cutoff are moved into the tail bound.
pub fn merge_bins(dist: &BinnedDistribution, i: usize, j: usize) -> Result<BinnedDistribution> {
    let partition = dist.partition.merged(i, j)?;
    let (lo, hi) = (i.min(j), i.max(j));
    let side = dist.side();
    let mut probs = vec![0.0; side.pow(dist.bins as u32 - 1)];
    let mut dropped = 0.0;
    for (mut k, p) in dist.iter() {
        let extra = k.remove(hi);
        k[lo] += extra;
        if k[lo] > dist.cutoff {
            dropped += p;
            continue;
        }
        let idx = k.iter().fold(0, |acc, &x| acc * side + x);
        probs[idx] += p;
    }
    Ok(BinnedDistribution {
        bins: dist.bins - 1,
        probs,
        tail_bound: dist.tail_bound + dropped,
        partition,
        ..dist.clone()
    })
}

/// Direct route for [`merge_bins`]: recompute with the union bin at cutoff
/// `2n`, then truncate back to `n`.
pub fn merge_bins_direct<M: GaussianModel + ?Sized>(
    model: &M,
    partition: &BinPartition,
    i: usize,
    j: usize,
    cutoff: usize,
) -> Result<BinnedDistribution> {
    let merged = partition.merged(i, j)?;
    Ok(binned_distribution_of(model, &merged, 2 * cutoff)?.resized(cutoff))
}
