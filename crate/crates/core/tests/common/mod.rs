#![allow(dead_code)]

use gbs_binning::haar::random_haar_unitary_with;
use gbs_binning::{BinPartition, CMatrix, TransferMatrix};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Haar unitary, or `U diag(t) V` with transmissions in `[0.5, 1)`.
pub fn random_network(m: usize, lossy: bool, rng: &mut ChaCha8Rng) -> TransferMatrix {
    let u = random_haar_unitary_with(m, rng);
    if !lossy {
        return TransferMatrix::new(u).unwrap();
    }
    let v = random_haar_unitary_with(m, rng);
    let t = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(m, |_, _| Complex64::new(rng.random_range(0.5..1.0), 0.0)));
    TransferMatrix::new(u * t * v).unwrap()
}

/// Random assignment of all modes to `bins` non-empty bins.
pub fn random_partition(m: usize, bins: usize, rng: &mut ChaCha8Rng) -> BinPartition {
    let mut modes: Vec<usize> = (0..m).collect();
    modes.shuffle(rng);
    let mut groups: Vec<Vec<usize>> = modes[..bins].iter().map(|&i| vec![i]).collect();
    for &i in &modes[bins..] {
        let b = rng.random_range(0..bins);
        groups[b].push(i);
    }
    BinPartition::new(groups, m).unwrap()
}

pub fn squeezed_closed_form(r: f64, eta: f64) -> Complex64 {
    let z = Complex64::new(r.cosh().powi(2), 0.0) - Complex64::from_polar(r.sinh().powi(2), 2.0 * eta);
    z.powf(-0.5)
}

pub fn thermal_closed_form(nbar: f64, eta: f64) -> Complex64 {
    1.0 / (1.0 + nbar * (1.0 - Complex64::from_polar(1.0, eta)))
}

pub fn squashed_closed_form(lambda: f64, eta: f64) -> Complex64 {
    (1.0 - 0.5 * lambda * (Complex64::from_polar(1.0, eta) - 1.0)).powf(-0.5)
}

/// `Σ_k P(k) e^{iηk}` from a probability series.
pub fn series_char_fn(probs: &[f64], eta: f64) -> Complex64 {
    probs.iter().enumerate().map(|(k, &p)| Complex64::from_polar(p, eta * k as f64)).sum()
}

/// Independent negative-binomial pair law via the recurrence
/// `P(k+1)/P(k) = (k + m/2) tanh²r / (k+1)`.
pub fn pair_law(m: usize, r: f64, k_max: usize) -> Vec<f64> {
    let t2 = r.tanh().powi(2);
    let mut out = vec![r.cosh().powf(-(m as f64))];
    for k in 0..k_max {
        let next = out[k] * (k as f64 + 0.5 * m as f64) * t2 / (k as f64 + 1.0);
        out.push(next);
    }
    out
}

/// Haar-averaged Fock law for indistinguishable photons as a ratio of
/// symmetric-subspace dimensions: `∏ C(K_i + k_i - 1, k_i) / C(m + n - 1, n)`.
pub fn symmetric_subspace_law(k: &[usize], sizes: &[usize]) -> f64 {
    fn ln_choose(n: usize, r: usize) -> f64 {
        (1..=r).map(|i| ((n - r + i) as f64 / i as f64).ln()).sum()
    }
    let m: usize = sizes.iter().sum();
    let n: usize = k.iter().sum();
    let num: f64 = k.iter().zip(sizes).map(|(&ki, &s)| ln_choose(s + ki - 1, ki)).sum();
    (num - ln_choose(m + n - 1, n)).exp()
}
