//! Brute-force truncated Fock-space simulator for small instances.
//!
//! Loss is modelled by dilating `L` to a unitary on system plus environment
//! modes and summing over environment counts. Inputs that never share an
//! output mode are simulated separately and their binned tables convolved.

mod dilation;
mod fock;
mod permanent;

pub use dilation::dilate_to_unitary;
pub use fock::{squeezed_fock_coeffs, ModeMixture, MAX_MONOMIALS, WEIGHT_FLOOR};
pub use permanent::{permanent, MAX_PERMANENT_SIZE};

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::binned::BinnedDistribution;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::network::TransferMatrix;
use crate::partition::BinPartition;
use fock::{for_each_leaf, Basis};

/// Single-mode input state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeState {
    Vacuum,
    Squeezed(f64),
    Thermal(f64),
    Squashed(f64),
}

impl ModeState {
    fn is_vacuum(&self) -> bool {
        match *self {
            ModeState::Vacuum => true,
            ModeState::Squeezed(x) | ModeState::Thermal(x) | ModeState::Squashed(x) => x == 0.0,
        }
    }

    fn mixture(&self, n_max: usize) -> Result<ModeMixture> {
        match *self {
            ModeState::Vacuum => Ok(ModeMixture::vacuum(n_max)),
            ModeState::Squeezed(r) => ModeMixture::squeezed(r, n_max),
            ModeState::Thermal(nbar) => ModeMixture::thermal(nbar, n_max),
            ModeState::Squashed(r) => ModeMixture::squashed(r, n_max),
        }
    }
}

/// Oracle table and the probability mass it could not account for.
#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub distribution: BinnedDistribution,
    /// Mass lost to the photon-number truncation and mixture pruning.
    pub truncation_loss: f64,
}

/// `⟨out| U |in⟩` for Fock states: `perm(U[out, in]) / √(∏ in! ∏ out!)`.
pub fn transition_amplitude(u: &CMatrix, input: &[usize], output: &[usize]) -> Result<Complex64> {
    let m = u.nrows();
    if u.ncols() != m || input.len() != m || output.len() != m {
        return Err(Error::Dimension(format!(
            "{}x{} network with occupations of length {} and {}",
            m,
            u.ncols(),
            input.len(),
            output.len()
        )));
    }
    let n_in: usize = input.iter().sum();
    let n_out: usize = output.iter().sum();
    if n_in != n_out {
        return Err(Error::PhotonMismatch { input: n_in, output: n_out });
    }
    let expand = |occ: &[usize]| -> Vec<usize> {
        occ.iter().enumerate().flat_map(|(i, &c)| std::iter::repeat_n(i, c)).collect()
    };
    let rows = expand(output);
    let cols = expand(input);
    let sub = CMatrix::from_fn(n_in, n_in, |a, b| u[(rows[a], cols[b])]);
    let ln_norm: f64 = input.iter().chain(output).map(|&c| ln_gamma(c as f64 + 1.0)).sum();
    Ok(permanent(&sub)? * (-0.5 * ln_norm).exp())
}

/// Oracle table for `inputs` through the sub-unitary `network`.
pub fn oracle_binned_distribution(
    inputs: &[ModeState],
    network: &TransferMatrix,
    partition: &BinPartition,
    n_max: usize,
) -> Result<OracleOutput> {
    let t = dilate_to_unitary(network)?;
    oracle_with_transfer(inputs, &t, partition, n_max)
}

/// Oracle table for inputs entering the first `inputs.len()` ports of the
/// unitary `t`. Rows beyond the partition's modes are environment.
pub fn oracle_with_transfer(
    inputs: &[ModeState],
    t: &CMatrix,
    partition: &BinPartition,
    n_max: usize,
) -> Result<OracleOutput> {
    let m = partition.modes();
    if inputs.len() > t.ncols() || m > t.nrows() {
        return Err(Error::Dimension(format!(
            "{} inputs and {} detected modes for a {}x{} transfer matrix",
            inputs.len(),
            m,
            t.nrows(),
            t.ncols()
        )));
    }
    let bins = partition.len();
    let row_bin: Vec<Option<usize>> =
        (0..t.nrows()).map(|r| if r < m { partition.bin_of(r) } else { None }).collect();
    let active: Vec<usize> = (0..inputs.len()).filter(|&j| !inputs[j].is_vacuum()).collect();

    let side = n_max + 1;
    let mut table = vec![0.0; side.pow(bins as u32)];
    table[0] = 1.0;
    let mut dropped = 0.0;
    let mut loss = 0.0;
    for component in connected_components(t, &active) {
        let rows: Vec<usize> =
            (0..t.nrows()).filter(|&r| component.iter().any(|&j| t[(r, j)].norm() > COUPLING_FLOOR)).collect();
        let basis = Basis::new(rows.len(), n_max)?;
        let forms: Vec<Vec<Complex64>> =
            component.iter().map(|&j| rows.iter().map(|&r| t[(r, j)]).collect()).collect();
        let mixtures = component.iter().map(|&j| inputs[j].mixture(n_max)).collect::<Result<Vec<_>>>()?;
        let cell: Vec<usize> = (0..basis.len())
            .map(|i| {
                let mut counts = vec![0usize; bins];
                for (&e, &r) in basis.exponents(i).iter().zip(&rows) {
                    if let Some(b) = row_bin[r] {
                        counts[b] += e as usize;
                    }
                }
                counts.iter().fold(0, |acc, &k| acc * side + k)
            })
            .collect();
        let mut part = vec![0.0; table.len()];
        for_each_leaf(&basis, &forms, &mixtures, |w, probs| {
            for (i, p) in probs.iter().enumerate() {
                part[cell[i]] += w * p;
            }
        });
        loss += (1.0 - part.iter().sum::<f64>()).max(0.0);
        let (joined, extra) = convolve(&table, &part, side, bins);
        table = joined;
        dropped += extra;
    }
    let distribution = BinnedDistribution {
        cutoff: n_max,
        bins,
        probs: table,
        tail_bound: loss + dropped,
        imag_residue: 0.0,
        clamped_mass: 0.0,
        partition: partition.clone(),
    };
    Ok(OracleOutput { distribution, truncation_loss: loss })
}

/// Couplings below this are treated as structural zeros.
const COUPLING_FLOOR: f64 = 1e-14;

/// Groups inputs that share at least one output row.
fn connected_components(t: &CMatrix, active: &[usize]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..active.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut root = i;
        while parent[root] != root {
            root = parent[root];
        }
        parent[i] = root;
        root
    }
    for r in 0..t.nrows() {
        let touching: Vec<usize> =
            (0..active.len()).filter(|&a| t[(r, active[a])].norm() > COUPLING_FLOOR).collect();
        for w in touching.windows(2) {
            let (x, y) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[x] = y;
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut label = vec![usize::MAX; active.len()];
    for (a, &mode) in active.iter().enumerate() {
        let root = find(&mut parent, a);
        if label[root] == usize::MAX {
            label[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[label[root]].push(mode);
    }
    groups
}

/// Convolution of two tables on `{0..n}^B`; mass pushed past `n` is returned.
fn convolve(a: &[f64], b: &[f64], side: usize, bins: usize) -> (Vec<f64>, f64) {
    let point = |i: usize| crate::charfn::grid_point(i, side, bins);
    let nz_b: Vec<(Vec<usize>, f64)> =
        b.iter().enumerate().filter(|(_, &p)| p != 0.0).map(|(i, &p)| (point(i), p)).collect();
    let mut out = vec![0.0; a.len()];
    let mut dropped = 0.0;
    for (i, &pa) in a.iter().enumerate() {
        if pa == 0.0 {
            continue;
        }
        let ka = point(i);
        for (kb, pb) in &nz_b {
            let mut idx = 0;
            let mut inside = true;
            for (x, y) in ka.iter().zip(kb) {
                let s = x + y;
                if s >= side {
                    inside = false;
                    break;
                }
                idx = idx * side + s;
            }
            if inside {
                out[idx] += pa * pb;
            } else {
                dropped += pa * pb;
            }
        }
    }
    (out, dropped)
}
