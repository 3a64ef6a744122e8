//! Truncated Fock-space amplitudes by creation-operator substitution.
//!
//! A Fock input `∏ (a_j†)^{n_j} / √(n_j!) |0⟩` leaves a passive network as
//! `∏ ℓ_j^{n_j} / √(n_j!) |0⟩` with `ℓ_j = Σ_k T_kj b_k†`. The output state is
//! stored as a dense polynomial in the `b_k†`, truncated at total degree
//! `N`; the amplitude of `|s⟩` is the coefficient of `y^s` times `√(s!)`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Monomial-count limit for one connected component.
pub const MAX_MONOMIALS: usize = 600_000;

/// Mixture components lighter than this are dropped (counted as truncation loss).
pub const WEIGHT_FLOOR: f64 = 1e-15;

const NONE: u32 = u32::MAX;

/// Amplitudes of `S|0⟩` on `|2k⟩`, `k = 0..=k_max`:
/// `tanh^k r √((2k)!) / (2^k k! √cosh r)`.
pub fn squeezed_fock_coeffs(r: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing {r} must be >= 0")));
    }
    if r == 0.0 {
        let mut v = vec![0.0; k_max + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let ln_t = r.tanh().ln();
    let ln_c = r.cosh().ln();
    Ok((0..=k_max)
        .map(|k| {
            let kf = k as f64;
            (kf * ln_t + 0.5 * ln_gamma(2.0 * kf + 1.0)
                - kf * std::f64::consts::LN_2
                - ln_gamma(kf + 1.0)
                - 0.5 * ln_c)
                .exp()
        })
        .collect())
}

/// A single-mode input as a mixture of real Fock-basis vectors over `0..=N`.
#[derive(Debug, Clone)]
pub struct ModeMixture {
    pub components: Vec<(f64, Vec<f64>)>,
}

impl ModeMixture {
    pub fn vacuum(n_max: usize) -> Self {
        let mut v = vec![0.0; n_max + 1];
        v[0] = 1.0;
        Self { components: vec![(1.0, v)] }
    }

    pub fn squeezed(r: f64, n_max: usize) -> Result<Self> {
        let pairs = squeezed_fock_coeffs(r, n_max / 2)?;
        let mut v = vec![0.0; n_max + 1];
        for (k, a) in pairs.into_iter().enumerate() {
            v[2 * k] = a;
        }
        Ok(Self { components: vec![(1.0, v)] })
    }

    /// Geometric mixture `n̄^n / (1+n̄)^{n+1}` of Fock states `n ≤ N`.
    pub fn thermal(nbar: f64, n_max: usize) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(Error::Domain(format!("mean photon number {nbar} must be >= 0")));
        }
        if nbar == 0.0 {
            return Ok(Self::vacuum(n_max));
        }
        let ratio = nbar / (1.0 + nbar);
        let components = (0..=n_max)
            .map(|n| (ratio.powi(n as i32) / (1.0 + nbar), n))
            .filter(|(w, _)| *w >= WEIGHT_FLOOR)
            .map(|(w, n)| {
                let mut v = vec![0.0; n_max + 1];
                v[n] = 1.0;
                (w, v)
            })
            .collect();
        Ok(Self { components })
    }

    /// `S(r) ρ_th S(r)†` with thermal occupation `(e^{2r} - 1)/2`, as the
    /// mixture of `S(r)|n⟩`. `S(r) = exp(r (a†² - a²)/2)` is evaluated as a
    /// matrix exponential in a padded Fock space.
    pub fn squashed(r: f64, n_max: usize) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("squash parameter {r} must be >= 0")));
        }
        if r == 0.0 {
            return Ok(Self::vacuum(n_max));
        }
        let nbar = 0.5 * (2.0 * r).exp_m1();
        let ratio = nbar / (1.0 + nbar);
        let weights: Vec<f64> = (0..=n_max + 40)
            .map(|n| ratio.powi(n as i32) / (1.0 + nbar))
            .take_while(|w| *w >= WEIGHT_FLOOR)
            .collect();
        let dim = n_max + weights.len() + 60;
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for n in 0..dim - 2 {
            let v = 0.5 * (((n + 1) * (n + 2)) as f64).sqrt();
            g[(n + 2, n)] = v * r;
            g[(n, n + 2)] = -v * r;
        }
        let s = g.exp();
        let components = weights
            .iter()
            .enumerate()
            .map(|(n, &w)| (w, (0..=n_max).map(|k| s[(k, n)]).collect()))
            .collect();
        Ok(Self { components })
    }
}

/// Dense monomial basis of total degree `≤ N` in `vars` variables.
pub(crate) struct Basis {
    vars: usize,
    exps: Vec<u16>,
    shift: Vec<u32>,
    factorial: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)).exp()
}

impl Basis {
    pub fn new(vars: usize, degree: usize) -> Result<Self> {
        let count = binomial(vars + degree, degree).round();
        if count > MAX_MONOMIALS as f64 {
            return Err(Error::Size(format!(
                "{count} monomials in {vars} variables up to degree {degree} (limit {MAX_MONOMIALS})"
            )));
        }
        let mut exps: Vec<u16> = Vec::with_capacity(count as usize * vars);
        let mut current = vec![0u16; vars];
        fn fill(pos: usize, left: usize, current: &mut [u16], out: &mut Vec<u16>) {
            if pos == current.len() {
                out.extend_from_slice(current);
                return;
            }
            for e in 0..=left {
                current[pos] = e as u16;
                fill(pos + 1, left - e, current, out);
            }
            current[pos] = 0;
        }
        fill(0, degree, &mut current, &mut exps);
        let len = exps.len() / vars.max(1);
        let index: HashMap<&[u16], u32> =
            (0..len).map(|i| (&exps[i * vars..(i + 1) * vars], i as u32)).collect();
        let mut shift = vec![NONE; len * vars];
        let mut probe = vec![0u16; vars];
        let mut factorial = vec![1.0; len];
        for i in 0..len {
            let e = &exps[i * vars..(i + 1) * vars];
            factorial[i] = e.iter().map(|&x| ln_gamma(x as f64 + 1.0)).sum::<f64>().exp();
            for k in 0..vars {
                probe.copy_from_slice(e);
                probe[k] += 1;
                if let Some(&j) = index.get(probe.as_slice()) {
                    shift[i * vars + k] = j;
                }
            }
        }
        Ok(Self { vars, exps, shift, factorial })
    }

    pub fn len(&self) -> usize {
        self.factorial.len()
    }

    pub fn exponents(&self, i: usize) -> &[u16] {
        &self.exps[i * self.vars..(i + 1) * self.vars]
    }

    /// `form · poly`, dropping terms above the degree limit.
    pub fn mul_linear(&self, poly: &[Complex64], form: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); poly.len()];
        for (i, &c) in poly.iter().enumerate() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = &self.shift[i * self.vars..(i + 1) * self.vars];
            for (k, &j) in row.iter().enumerate() {
                if j != NONE && form[k] != Complex64::new(0.0, 0.0) {
                    out[j as usize] += form[k] * c;
                }
            }
        }
        out
    }

    /// `|c_s|² s!` for every monomial.
    pub fn probabilities(&self, poly: &[Complex64]) -> Vec<f64> {
        poly.iter().zip(&self.factorial).map(|(c, f)| c.norm_sqr() * f).collect()
    }
}

/// Output-state probabilities of independent mode mixtures fed through the
/// linear forms `forms[j]` (one per input, over the basis variables).
///
/// `visit` receives each mixture leaf's probability vector with its weight.
pub(crate) fn for_each_leaf<F>(basis: &Basis, forms: &[Vec<Complex64>], inputs: &[ModeMixture], mut visit: F)
where
    F: FnMut(f64, &[f64]),
{
    let mut start = vec![Complex64::new(0.0, 0.0); basis.len()];
    // the all-zero exponent is enumerated first
    start[0] = Complex64::new(1.0, 0.0);
    descend(basis, forms, inputs, 0, &start, 1.0, &mut visit);
}

fn descend<F>(
    basis: &Basis,
    forms: &[Vec<Complex64>],
    inputs: &[ModeMixture],
    depth: usize,
    poly: &[Complex64],
    weight: f64,
    visit: &mut F,
) where
    F: FnMut(f64, &[f64]),
{
    if depth == inputs.len() {
        visit(weight, &basis.probabilities(poly));
        return;
    }
    let live: Vec<&(f64, Vec<f64>)> =
        inputs[depth].components.iter().filter(|(w, _)| weight * w >= WEIGHT_FLOOR).collect();
    if live.is_empty() {
        return;
    }
    let top = live
        .iter()
        .filter_map(|(_, v)| v.iter().rposition(|&a| a != 0.0))
        .max()
        .unwrap_or(0);
    // R_s = ℓ^s poly / √(s!)
    let mut powers = Vec::with_capacity(top + 1);
    powers.push(poly.to_vec());
    for s in 1..=top {
        let next = basis.mul_linear(&powers[s - 1], &forms[depth]);
        let scale = 1.0 / (s as f64).sqrt();
        powers.push(next.into_iter().map(|z| z * scale).collect());
    }
    for (w, amps) in live {
        let mut combined = vec![Complex64::new(0.0, 0.0); poly.len()];
        for (s, &a) in amps.iter().enumerate().take(top + 1) {
            if a != 0.0 {
                combined.iter_mut().zip(&powers[s]).for_each(|(c, p)| *c += p * a);
            }
        }
        descend(basis, forms, inputs, depth + 1, &combined, weight * w, visit);
    }
}
