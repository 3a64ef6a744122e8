//! Haar-averaged binned distributions and Monte Carlo Haar averaging.
//!
//! Averaging over Haar-random interferometers decoheres the input in the Fock
//! basis, so the binned law of `m` identical squeezed vacua splits into the
//! total-pair distribution times the Haar-averaged law of `n` Fock photons.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::binned::BinnedDistribution;
use crate::cutoff::total_pair_distribution;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::network::TransferMatrix;
use crate::partition::BinPartition;

/// Particle statistics `σ`: 0 for distinguishable, 1 for indistinguishable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistics {
    Distinguishable,
    Indistinguishable,
}

impl Statistics {
    pub fn sigma(self) -> f64 {
        match self {
            Statistics::Distinguishable => 0.0,
            Statistics::Indistinguishable => 1.0,
        }
    }
}

/// `n` photons in `m` modes, detected by bins of the given sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarParams {
    pub n: usize,
    pub m: usize,
    pub bin_sizes: Vec<usize>,
    pub statistics: Statistics,
}

impl HaarParams {
    pub fn new(n: usize, m: usize, bin_sizes: Vec<usize>, statistics: Statistics) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("mode count must be >= 1".into()));
        }
        if bin_sizes.is_empty() {
            return Err(Error::Partition("at least one bin is required".into()));
        }
        let covered: usize = bin_sizes.iter().sum();
        if covered > m {
            return Err(Error::Partition(format!("bins hold {covered} modes but there are only {m}")));
        }
        Ok(Self { n, m, bin_sizes, statistics })
    }

    /// `q_i = |K_i| / m`.
    pub fn q(&self) -> Vec<f64> {
        self.bin_sizes.iter().map(|&s| s as f64 / self.m as f64).collect()
    }

    /// Particle density `n / m`.
    pub fn density(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    fn check_pattern(&self, k: &[usize]) -> Result<()> {
        if k.len() != self.bin_sizes.len() {
            return Err(Error::Dimension(format!(
                "pattern has {} entries for {} bins",
                k.len(),
                self.bin_sizes.len()
            )));
        }
        let total: usize = k.iter().sum();
        if total != self.n {
            return Err(Error::PhotonMismatch { input: self.n, output: total });
        }
        Ok(())
    }
}

/// `ln(n!/∏k_i! ∏q_i^{k_i})`, `-∞` if a photon lands in an empty bin.
fn ln_multinomial(k: &[usize], p: &HaarParams) -> f64 {
    let mut acc = ln_gamma(p.n as f64 + 1.0);
    for (&ki, q) in k.iter().zip(p.q()) {
        if ki == 0 {
            continue;
        }
        if q == 0.0 {
            return f64::NEG_INFINITY;
        }
        acc += ki as f64 * q.ln() - ln_gamma(ki as f64 + 1.0);
    }
    acc
}

/// Haar-averaged probability of pattern `k` for distinguishable photons.
pub fn haar_fock_distinguishable(k: &[usize], p: &HaarParams) -> Result<f64> {
    p.check_pattern(k)?;
    Ok(ln_multinomial(k, p).exp())
}

/// Haar-averaged probability of pattern `k` for indistinguishable photons:
/// the multinomial law times `∏_i ∏_{ℓ<k_i} (1 + ℓ/|K_i|) / ∏_{ℓ<n} (1 + ℓ/m)`.
pub fn haar_fock_indistinguishable(k: &[usize], p: &HaarParams) -> Result<f64> {
    p.check_pattern(k)?;
    let base = ln_multinomial(k, p);
    if base == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    // ∏_{ℓ<k} (1 + ℓ/K) = Γ(K+k) / (Γ(K) K^k)
    let rising = |size: f64, count: usize| -> f64 {
        ln_gamma(size + count as f64) - ln_gamma(size) - count as f64 * size.ln()
    };
    let mut ln_ratio = -rising(p.m as f64, p.n);
    for (&ki, &size) in k.iter().zip(&p.bin_sizes) {
        if ki > 0 {
            ln_ratio += rising(size as f64, ki);
        }
    }
    Ok((base + ln_ratio).exp())
}

/// Haar-averaged Fock law for the statistics in `p`.
pub fn haar_fock(k: &[usize], p: &HaarParams) -> Result<f64> {
    match p.statistics {
        Statistics::Distinguishable => haar_fock_distinguishable(k, p),
        Statistics::Indistinguishable => haar_fock_indistinguishable(k, p),
    }
}

/// Gaussian approximation of the Haar-averaged Fock law, in `x_i = k_i / n`.
pub fn gaussian_asymptotic(k: &[usize], p: &HaarParams) -> Result<f64> {
    if p.n == 0 {
        return Err(Error::Domain("the Gaussian law needs n >= 1".into()));
    }
    if k.len() != p.bin_sizes.len() {
        return Err(Error::Dimension(format!("pattern has {} entries for {} bins", k.len(), p.bin_sizes.len())));
    }
    let q = p.q();
    if q.contains(&0.0) {
        return Err(Error::Partition("the Gaussian law needs non-empty bins".into()));
    }
    let n = p.n as f64;
    let spread = 1.0 + p.statistics.sigma() * p.density();
    let exponent: f64 = k
        .iter()
        .zip(&q)
        .map(|(&ki, &qi)| (ki as f64 / n - qi).powi(2) / (2.0 * spread * qi))
        .sum::<f64>()
        * -n;
    let bins = q.len() as f64;
    let norm = (2.0 * PI * spread * n).powf(0.5 * (bins - 1.0)) * q.iter().map(|x| x.sqrt()).product::<f64>();
    Ok(exponent.exp() / norm)
}

/// Which Haar-averaged Fock law multiplies the pair distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockLaw {
    /// Closed-form average (exact for Haar-random unitaries).
    Exact,
    /// Its large-`n` Gaussian approximation.
    Gaussian,
}

/// Haar-averaged binned law for `m` identical squeezed vacua:
/// `P_m(n/2) ⟨P_Fock(k)⟩` for even `n = Σk`, zero for odd `n`.
pub fn haar_gbs_asymptotic(
    k: &[usize],
    m: usize,
    r: f64,
    bin_sizes: &[usize],
    statistics: Statistics,
    law: FockLaw,
) -> Result<f64> {
    let covered: usize = bin_sizes.iter().sum();
    if covered != m {
        return Err(Error::Partition(format!(
            "bins must cover all {m} modes (they cover {covered})"
        )));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing {r} must be >= 0")));
    }
    let n: usize = k.iter().sum();
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let params = HaarParams::new(n, m, bin_sizes.to_vec(), statistics)?;
    params.check_pattern(k)?;
    let pairs = if r == 0.0 {
        if n == 0 { 1.0 } else { 0.0 }
    } else {
        total_pair_distribution(m, r, n / 2)?
    };
    if n == 0 {
        return Ok(pairs);
    }
    let fock = match law {
        FockLaw::Exact => haar_fock(k, &params)?,
        FockLaw::Gaussian => gaussian_asymptotic(k, &params)?,
    };
    Ok(pairs * fock)
}

/// Haar-random `m × m` unitary from the given generator.
///
/// QR of a complex Ginibre matrix, with the phases of `R`'s diagonal moved
/// into `Q` so that the result is Haar distributed.
pub fn random_haar_unitary_with<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    let z = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    });
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    q
}

/// Haar-random unitary, reproducible from `seed`.
pub fn random_haar_unitary(m: usize, seed: u64) -> Result<TransferMatrix> {
    if m == 0 {
        return Err(Error::Domain("mode count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(TransferMatrix::new_unchecked(random_haar_unitary_with(m, &mut rng)))
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// Per-pattern sample mean and standard error over network draws.
#[derive(Debug, Clone, Serialize)]
pub struct HaarAverage {
    pub cutoff: usize,
    pub bins: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub tail_bound: f64,
    #[serde(skip)]
    pub partition: BinPartition,
}

impl HaarAverage {
    fn side(&self) -> usize {
        self.cutoff + 1
    }

    pub fn index_of(&self, pattern: &[usize]) -> Option<usize> {
        if pattern.len() != self.bins || pattern.iter().any(|&k| k > self.cutoff) {
            return None;
        }
        Some(pattern.iter().fold(0, |acc, &k| acc * self.side() + k))
    }

    /// `(mean, stderr)` of `P(k)`.
    pub fn get(&self, pattern: &[usize]) -> Option<(f64, f64)> {
        self.index_of(pattern).map(|i| (self.mean[i], self.stderr[i]))
    }

    pub fn patterns(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.mean.len()).map(|i| crate::charfn::grid_point(i, self.side(), self.bins))
    }

    /// Patterns with `Σk = total`, with mean and standard error.
    pub fn slice(&self, total: usize) -> Vec<(Vec<usize>, f64, f64)> {
        self.patterns()
            .enumerate()
            .filter(|(_, k)| k.iter().sum::<usize>() == total)
            .map(|(i, k)| (k, self.mean[i], self.stderr[i]))
            .collect()
    }

    /// The mean table as a distribution.
    pub fn mean_distribution(&self) -> BinnedDistribution {
        BinnedDistribution {
            cutoff: self.cutoff,
            bins: self.bins,
            probs: self.mean.clone(),
            tail_bound: self.tail_bound,
            imag_residue: 0.0,
            clamped_mass: 0.0,
            partition: self.partition.clone(),
        }
    }
}

/// Averages `eval(network)` over networks produced by `draw`.
///
/// Trial `t` uses [`trial_rng`]`(seed, t)`, so the result does not depend on
/// scheduling. The first failing trial aborts the run.
pub fn monte_carlo_average<G, F>(trials: usize, seed: u64, draw: G, eval: F) -> Result<HaarAverage>
where
    G: Fn(&mut ChaCha8Rng) -> TransferMatrix + Sync,
    F: Fn(&TransferMatrix) -> Result<BinnedDistribution> + Sync,
{
    if trials < 2 {
        return Err(Error::Domain(format!("need at least 2 trials, got {trials}")));
    }
    let tables = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let network = draw(&mut trial_rng(seed, trial));
            eval(&network).map_err(|e| Error::TrialFailed { trial, seed, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &tables[0];
    if let Some(bad) = tables.iter().position(|t| t.cutoff != first.cutoff || t.bins != first.bins) {
        return Err(Error::TrialFailed {
            trial: bad,
            seed,
            source: Box::new(Error::Dimension("trial tables have different shapes".into())),
        });
    }
    let count = trials as f64;
    let len = first.probs.len();
    let mut mean = vec![0.0; len];
    for t in &tables {
        mean.iter_mut().zip(&t.probs).for_each(|(a, p)| *a += p / count);
    }
    let mut stderr = vec![0.0; len];
    for t in &tables {
        stderr.iter_mut().zip(&t.probs).zip(&mean).for_each(|((s, p), mu)| *s += (p - mu).powi(2));
    }
    stderr.iter_mut().for_each(|s| *s = (*s / (count - 1.0) / count).sqrt());
    let tail_bound = tables.iter().map(|t| t.tail_bound).fold(0.0, f64::max);
    Ok(HaarAverage {
        cutoff: first.cutoff,
        bins: first.bins,
        trials,
        seed,
        mean,
        stderr,
        tail_bound,
        partition: first.partition.clone(),
    })
}

/// Averages `eval` over Haar-random `m`-mode unitaries.
pub fn monte_carlo_haar_average<F>(m: usize, trials: usize, seed: u64, eval: F) -> Result<HaarAverage>
where
    F: Fn(&TransferMatrix) -> Result<BinnedDistribution> + Sync,
{
    if m == 0 {
        return Err(Error::Domain("mode count must be >= 1".into()));
    }
    monte_carlo_average(
        trials,
        seed,
        |rng| TransferMatrix::new_unchecked(random_haar_unitary_with(m, rng)),
        eval,
    )
}
