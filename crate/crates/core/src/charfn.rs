//! Characteristic functions of Gaussian photon-count models and their
//! branch-consistent evaluation on the phase torus.
//!
//! Every model handled here yields `X(η) = exp(c) / √det Q(η)` for a real
//! log-prefactor `c` and a complex symmetric `Q`. The square root is the
//! delicate part: `det Q` winds around the origin as `η` moves, so the
//! principal root flips sign across its branch cut. We track `log det Q`
//! continuously along axis-aligned paths from `η = 0`, where `Q` is real
//! positive definite and `X(0) = 1`.

use std::f64::consts::{FRAC_PI_4, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, wrap_phase, CMatrix, LogDet};
use crate::partition::{theta_vector, BinPartition, PhasePoint};

/// Default tolerance for the symmetry check of `Q`.
pub const TOL_SYM: f64 = 1e-10;

/// Largest accepted phase change of `det Q` over one path segment.
const MAX_PHASE_STEP: f64 = FRAC_PI_4;
const MAX_BISECTIONS: usize = 48;

/// Complex symmetric matrix whose determinant gives the characteristic function.
#[derive(Debug, Clone, PartialEq)]
pub struct QMatrix(pub CMatrix);

impl QMatrix {
    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// Largest entrywise deviation from `Q = Qᵀ`.
    pub fn symmetry_defect(&self) -> f64 {
        let q = &self.0;
        (q - q.transpose()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    pub fn real_part_positive_definite(&self) -> bool {
        let re: DMatrix<f64> = self.0.map(|z| z.re);
        let sym = (&re + re.transpose()) * 0.5;
        sym.cholesky().is_some()
    }

    pub fn log_det(&self) -> Result<LogDet> {
        linalg::lu_log_det(&self.0)
    }
}

/// `𝒰 = Lᵀ H L*` with `H = diag(e^{iθ} - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasedGram(pub CMatrix);

impl PhasedGram {
    pub fn new(network: &CMatrix, theta: &[f64]) -> Self {
        Self(restricted_gram(network, theta))
    }
}

/// `e^{iθ} - 1` without cancellation near `θ = 0`.
pub(crate) fn phase_minus_one(theta: f64) -> Complex64 {
    let s = (0.5 * theta).sin();
    Complex64::new(-2.0 * s * s, theta.sin())
}

/// `Cᵀ H C*` for the columns `C` of the network that carry light.
///
/// Rows with `θ_ℓ = 0` (unbinned modes, or bins at zero phase) drop out.
pub(crate) fn restricted_gram(columns: &CMatrix, theta: &[f64]) -> CMatrix {
    let a = columns.ncols();
    let mut g = CMatrix::zeros(a, a);
    for (l, &th) in theta.iter().enumerate() {
        if th == 0.0 {
            continue;
        }
        let h = phase_minus_one(th);
        for j in 0..a {
            let right = h * columns[(l, j)].conj();
            if right == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..a {
                g[(i, j)] += columns[(l, i)] * right;
            }
        }
    }
    g
}

/// A model with `X(η) = exp(log_prefactor) / √det Q(θ(η))`.
pub trait GaussianModel: Sync {
    /// Number of output modes the partition refers to.
    fn modes(&self) -> usize;

    fn log_prefactor(&self) -> f64;

    /// `Q` at per-mode phases `θ`, or `None` when no mode carries light.
    fn q_matrix(&self, theta: &[f64]) -> Option<QMatrix>;

    /// Upper bound on the mean total photon number at the detectors.
    fn mean_photons(&self) -> f64;
}

/// Values of `X` on the grid `η = 2πν/(n+1)`, `ν ∈ {0..n}^B`, in row-major order
/// (first bin most significant).
#[derive(Debug, Clone)]
pub struct CharacteristicGrid {
    pub cutoff: usize,
    pub bins: usize,
    pub values: Vec<Complex64>,
}

impl CharacteristicGrid {
    pub fn side(&self) -> usize {
        self.cutoff + 1
    }

    pub fn eta(&self, index: usize) -> Vec<f64> {
        grid_point(index, self.side(), self.bins)
            .into_iter()
            .map(|v| TAU * v as f64 / self.side() as f64)
            .collect()
    }
}

pub(crate) fn grid_point(mut index: usize, side: usize, bins: usize) -> Vec<usize> {
    let mut nu = vec![0; bins];
    for slot in nu.iter_mut().rev() {
        *slot = index % side;
        index /= side;
    }
    nu
}

/// A model paired with a bin partition.
pub struct CharacteristicFunction<'a, M: GaussianModel + ?Sized> {
    model: &'a M,
    partition: &'a BinPartition,
}

impl<'a, M: GaussianModel + ?Sized> CharacteristicFunction<'a, M> {
    pub fn new(model: &'a M, partition: &'a BinPartition) -> Result<Self> {
        if partition.modes() != model.modes() {
            return Err(Error::Dimension(format!(
                "partition over {} modes for a {}-mode model",
                partition.modes(),
                model.modes()
            )));
        }
        Ok(Self { model, partition })
    }

    pub fn partition(&self) -> &BinPartition {
        self.partition
    }

    fn q_at(&self, eta: &[f64]) -> Result<Option<QMatrix>> {
        let theta = theta_vector(self.partition, eta, self.model.modes())?;
        Ok(self.model.q_matrix(&theta))
    }

    fn raw_log_det(&self, eta: &[f64]) -> Result<LogDet> {
        let q = self.q_at(eta)?.expect("caller checked for active modes");
        q.log_det().map_err(|_| Error::Singular(eta.to_vec()))
    }

    fn anchor(&self) -> Result<Option<LogDet>> {
        let origin = vec![0.0; self.partition.len()];
        let Some(q) = self.q_at(&origin)? else {
            return Ok(None);
        };
        if !q.real_part_positive_definite() {
            return Err(Error::Conditioning("real part of Q(0) is not positive definite".into()));
        }
        let ld = q.log_det().map_err(|_| Error::Singular(origin))?;
        let phase = wrap_phase(ld.phase());
        if phase.abs() > 1e-8 {
            return Err(Error::Conditioning(format!("det Q(0) has phase {phase}")));
        }
        Ok(Some(LogDet(Complex64::new(ld.modulus_ln(), phase))))
    }

    /// Continues `log det Q` from `from` (already unwrapped) to `to` along a
    /// straight segment, bisecting until every piece turns by less than π/4.
    fn continue_segment(
        &self,
        from: &[f64],
        from_ld: Complex64,
        to: &[f64],
        to_raw: Complex64,
        depth: usize,
    ) -> Result<Complex64> {
        let mid: Vec<f64> = from.iter().zip(to).map(|(a, b)| 0.5 * (a + b)).collect();
        let mid_raw = self.raw_log_det(&mid)?.0;
        let d1 = wrap_phase(mid_raw.im - from_ld.im);
        let d2 = wrap_phase(to_raw.im - mid_raw.im);
        let direct = wrap_phase(to_raw.im - from_ld.im);
        if d1.abs() <= MAX_PHASE_STEP
            && d2.abs() <= MAX_PHASE_STEP
            && (d1 + d2 - direct).abs() < 1e-9
        {
            return Ok(Complex64::new(to_raw.re, from_ld.im + direct));
        }
        if depth >= MAX_BISECTIONS {
            return Err(Error::Branch { from: from.to_vec(), to: to.to_vec() });
        }
        let mid_ld = self.continue_segment(from, from_ld, &mid, mid_raw, depth + 1)?;
        self.continue_segment(&mid, mid_ld, to, to_raw, depth + 1)
    }

    /// Unwrapped `log det Q(η)`, reached by moving along bin axes in order.
    fn tracked_log_det(&self, eta: &[f64]) -> Result<Option<Complex64>> {
        let Some(anchor) = self.anchor()? else {
            return Ok(None);
        };
        let mut here = vec![0.0; eta.len()];
        let mut ld = anchor.0;
        for axis in 0..eta.len() {
            if eta[axis] == 0.0 {
                continue;
            }
            let mut next = here.clone();
            next[axis] = eta[axis];
            let raw = self.raw_log_det(&next)?.0;
            ld = self.continue_segment(&here, ld, &next, raw, 0)?;
            here = next;
        }
        Ok(Some(ld))
    }

    fn x_from_log_det(&self, ld: Complex64) -> Result<Complex64> {
        let x = (Complex64::new(self.model.log_prefactor(), 0.0) - 0.5 * ld).exp();
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::Numeric(format!("characteristic function {x}")));
        }
        Ok(x)
    }

    /// `X(η)` at a single phase point.
    ///
    /// Also checks that `Q(η)` is symmetric with positive definite real part.
    pub fn eval(&self, eta: &PhasePoint) -> Result<Complex64> {
        let eta = eta.as_slice();
        if eta.len() != self.partition.len() {
            return Err(Error::Dimension(format!(
                "phase point has {} components for {} bins",
                eta.len(),
                self.partition.len()
            )));
        }
        if let Some(q) = self.q_at(eta)? {
            if !q.is_symmetric(TOL_SYM) {
                return Err(Error::Conditioning(format!(
                    "Q is not symmetric (defect {:e})",
                    q.symmetry_defect()
                )));
            }
            if !q.real_part_positive_definite() {
                return Err(Error::Conditioning("real part of Q is not positive definite".into()));
            }
        }
        match self.tracked_log_det(eta)? {
            None => Ok(Complex64::new(1.0, 0.0)),
            Some(ld) => self.x_from_log_det(ld),
        }
    }

    /// The branch of `√det Q(η)` that keeps `X` continuous from `X(0) = 1`.
    pub fn branch_sqrt_det(&self, eta: &PhasePoint) -> Result<Option<Complex64>> {
        Ok(self.tracked_log_det(eta.as_slice())?.map(|ld| (0.5 * ld).exp()))
    }

    /// `X` on the full `(n+1)^B` grid.
    ///
    /// Each grid point is reached from its predecessor `ν - e_a`, where `a` is
    /// the last axis with `ν_a > 0`. Chains along one axis are independent once
    /// the previous axes are done, so they are evaluated in parallel.
    pub fn eval_grid(&self, cutoff: usize) -> Result<CharacteristicGrid> {
        let bins = self.partition.len();
        let side = cutoff + 1;
        let total = side
            .checked_pow(bins as u32)
            .ok_or_else(|| Error::Size(format!("grid of {side}^{bins} points")))?;
        let Some(anchor) = self.anchor()? else {
            return Ok(CharacteristicGrid {
                cutoff,
                bins,
                values: vec![Complex64::new(1.0, 0.0); total],
            });
        };
        let step = TAU / side as f64;
        let mut log_dets = vec![Complex64::new(f64::NAN, f64::NAN); total];
        log_dets[0] = anchor.0;
        for axis in 0..bins {
            // Strides in row-major order: the first bin is most significant.
            let stride = side.pow((bins - 1 - axis) as u32);
            let prefixes = side.pow(axis as u32);
            let done = &log_dets;
            let chains: Vec<Vec<(usize, Complex64)>> = (0..prefixes)
                .into_par_iter()
                .map(|prefix| {
                    let base = prefix * stride * side;
                    let mut eta: Vec<f64> = grid_point(base, side, bins)
                        .into_iter()
                        .map(|v| v as f64 * step)
                        .collect();
                    let mut ld = done[base];
                    let mut out = Vec::with_capacity(cutoff);
                    for v in 1..side {
                        let mut next = eta.clone();
                        next[axis] = v as f64 * step;
                        let raw = self.raw_log_det(&next)?.0;
                        ld = self.continue_segment(&eta, ld, &next, raw, 0)?;
                        out.push((base + v * stride, ld));
                        eta = next;
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            for (index, ld) in chains.into_iter().flatten() {
                log_dets[index] = ld;
            }
        }
        let values = log_dets
            .into_iter()
            .map(|ld| self.x_from_log_det(ld))
            .collect::<Result<Vec<_>>>()?;
        Ok(CharacteristicGrid { cutoff, bins, values })
    }
}
