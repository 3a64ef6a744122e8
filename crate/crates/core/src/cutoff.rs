//! Photon-number cutoff selection.
//!
//! `m` identical squeezed vacua emit `k` photon pairs with the negative
//! binomial law `P_m(k) = Γ(k + m/2) / (Γ(m/2) k!) · sech^m r · tanh^{2k} r`.
//! Mapping its upper tail onto a binomial lower tail and applying Chernoff's
//! bound gives, for `α > 1`,
//!
//! ```text
//! P[k > α m sinh²r / 2] ≤ exp(-m (α-1)² sinh²r tanh²r / (4 (1 + α sinh²r))).
//! ```
//!
//! A passive lossy network only removes photons, so the bound also caps the
//! count in any bin.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Upper end of the multiplier search.
pub const ALPHA_SEARCH_LIMIT: f64 = 1e6;

/// How the per-bin photon cutoff `n` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffPolicy {
    /// Target tail probability, in `(0, 1)`.
    pub epsilon: f64,
    /// Smallest multiplier of the mean pair number considered (`≥ 1`).
    pub alpha: f64,
    /// Explicit cutoff; skips the search.
    pub n_override: Option<usize>,
}

impl Default for CutoffPolicy {
    fn default() -> Self {
        Self { epsilon: 1e-10, alpha: 1.0, n_override: None }
    }
}

impl CutoffPolicy {
    pub fn new(epsilon: f64, alpha: f64, n_override: Option<usize>) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Policy(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::Policy(format!("alpha {alpha} must be >= 1")));
        }
        Ok(Self { epsilon, alpha, n_override })
    }

    pub fn fixed(n: usize) -> Self {
        Self { n_override: Some(n), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffMethod {
    /// No light reaches the detectors.
    Vacuum,
    /// Chernoff bound on the negative-binomial pair count.
    ChernoffBound,
    /// Tail of the exact total-photon distribution.
    ExactTail,
    /// User-supplied cutoff.
    Override,
}

/// A selected cutoff and the tail probability it leaves out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffChoice {
    pub n: usize,
    pub tail_bound: f64,
    pub alpha: Option<f64>,
    pub method: CutoffMethod,
}

/// Result of evaluating the Chernoff tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub value: f64,
    /// Set when `α ≤ 1`, where the bound says nothing.
    pub vacuous: bool,
}

fn check_pair_args(m: usize, r: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("mode count must be >= 1".into()));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing {r} must be > 0")));
    }
    Ok(())
}

/// Probability that `m` identical squeezed vacua contain exactly `k` photon pairs.
pub fn total_pair_distribution(m: usize, r: f64, k: usize) -> Result<f64> {
    check_pair_args(m, r)?;
    Ok(ln_pair_probability(m as f64, r, k).exp())
}

fn ln_pair_probability(m: f64, r: f64, k: usize) -> f64 {
    let half = 0.5 * m;
    let kf = k as f64;
    ln_gamma(kf + half) - ln_gamma(half) - ln_gamma(kf + 1.0) - m * r.cosh().ln()
        + 2.0 * kf * r.tanh().ln()
}

/// `P[pairs > k0]` by direct summation of the tail terms.
pub fn pair_tail(m: usize, r: f64, k0: usize) -> Result<f64> {
    check_pair_args(m, r)?;
    let mf = m as f64;
    let mean = 0.5 * mf * r.sinh().powi(2);
    let mut sum = 0.0;
    let mut k = k0 + 1;
    loop {
        let term = ln_pair_probability(mf, r, k).exp();
        sum += term;
        if (k as f64) > mean && term <= 1e-18 * sum.max(1e-300) {
            break;
        }
        if k > k0 + 100_000 {
            break;
        }
        k += 1;
    }
    Ok(sum)
}

/// Chernoff bound on `P[pairs > α m sinh²r / 2]`.
pub fn cutoff_tail_bound(m: usize, r: f64, alpha: f64) -> Result<TailBound> {
    check_pair_args(m, r)?;
    if alpha <= 1.0 {
        return Ok(TailBound { value: 1.0, vacuous: true });
    }
    let s2 = r.sinh().powi(2);
    let t2 = r.tanh().powi(2);
    let exponent = -(m as f64) * (alpha - 1.0).powi(2) * s2 * t2 / (4.0 * (1.0 + alpha * s2));
    Ok(TailBound { value: exponent.exp(), vacuous: false })
}

/// Cutoff for `m` squeezed vacua with squeezing at most `r_max`.
///
/// Takes the smallest `α ≥ policy.alpha` whose bound reaches `epsilon`, then
/// `n = 2 ⌈α m sinh²r / 2⌉`.
pub fn select_cutoff_squeezed(m: usize, r_max: f64, policy: &CutoffPolicy) -> Result<CutoffChoice> {
    if m == 0 || r_max == 0.0 {
        return Ok(CutoffChoice {
            n: policy.n_override.unwrap_or(0),
            tail_bound: 0.0,
            alpha: None,
            method: if policy.n_override.is_some() { CutoffMethod::Override } else { CutoffMethod::Vacuum },
        });
    }
    if let Some(n) = policy.n_override {
        return Ok(CutoffChoice {
            n,
            tail_bound: pair_tail(m, r_max, n / 2)?,
            alpha: None,
            method: CutoffMethod::Override,
        });
    }
    let bound = |alpha: f64| cutoff_tail_bound(m, r_max, alpha).map(|b| b.value);
    if bound(ALPHA_SEARCH_LIMIT)? > policy.epsilon {
        return Err(Error::Policy(format!(
            "no alpha below {ALPHA_SEARCH_LIMIT:e} reaches epsilon {:e}",
            policy.epsilon
        )));
    }
    let alpha = if bound(policy.alpha.max(1.0))? <= policy.epsilon {
        policy.alpha.max(1.0)
    } else {
        let (mut lo, mut hi) = (policy.alpha.max(1.0), ALPHA_SEARCH_LIMIT);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bound(mid)? <= policy.epsilon {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        hi
    };
    let mean_pairs = 0.5 * m as f64 * r_max.sinh().powi(2);
    let pairs = (alpha * mean_pairs).ceil() as usize;
    let n = 2 * pairs;
    // n/2 pairs corresponds to a multiplier at least as large as the one found.
    let effective = (pairs as f64 / mean_pairs).max(alpha);
    Ok(CutoffChoice {
        n,
        tail_bound: bound(effective)?,
        alpha: Some(alpha),
        method: CutoffMethod::ChernoffBound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_modes_no_pairs() {
        let p = total_pair_distribution(2, 0.4, 0).unwrap();
        assert!((p - 1.0 / 0.4f64.cosh().powi(2)).abs() < 1e-15);
        assert!((p - 0.85564).abs() < 1e-5);
    }

    #[test]
    fn single_mode_one_pair() {
        let r: f64 = 0.5;
        let p = total_pair_distribution(1, r, 1).unwrap();
        let direct = r.tanh().powi(2) / r.cosh() * 2.0 / 4.0;
        assert!((p - direct).abs() < 1e-15);
        assert!((p - 0.09469).abs() < 1e-5);
    }

    #[test]
    fn normalised() {
        for m in [1, 2, 7, 30] {
            for r in [0.1, 0.4, 0.6] {
                let s: f64 = (0..=200).map(|k| total_pair_distribution(m, r, k).unwrap()).sum();
                assert!((s - 1.0).abs() < 1e-10, "m={m} r={r} sum={s}");
            }
        }
    }

    #[test]
    fn non_positive_squeezing_is_domain_error() {
        assert!(matches!(total_pair_distribution(2, 0.0, 1), Err(Error::Domain(_))));
        assert!(cutoff_tail_bound(2, -0.1, 2.0).is_err());
    }

    #[test]
    fn bound_reference_value() {
        let b = cutoff_tail_bound(20, 0.4, 3.0).unwrap();
        assert!(!b.vacuous);
        assert!((b.value - 0.7237).abs() < 1e-3);
    }

    #[test]
    fn bound_near_one_is_one() {
        assert!((cutoff_tail_bound(10, 0.3, 1.0 + 1e-9).unwrap().value - 1.0).abs() < 1e-12);
        let v = cutoff_tail_bound(10, 0.3, 0.5).unwrap();
        assert!(v.vacuous && v.value == 1.0);
    }

    #[test]
    fn vacuum_cutoff_is_zero() {
        let c = select_cutoff_squeezed(4, 0.0, &CutoffPolicy::default()).unwrap();
        assert_eq!(c.n, 0);
        assert_eq!(c.method, CutoffMethod::Vacuum);
    }

    #[test]
    fn searched_cutoff_meets_epsilon() {
        let policy = CutoffPolicy::new(1e-6, 1.0, None).unwrap();
        let c = select_cutoff_squeezed(20, 0.4, &policy).unwrap();
        assert!(c.tail_bound <= 1e-6);
        assert_eq!(c.n % 2, 0);
        // one pair fewer would exceed the target
        let alpha = c.alpha.unwrap();
        let mean_pairs = 10.0 * 0.4f64.sinh().powi(2);
        let smaller = (c.n / 2 - 1) as f64 / mean_pairs;
        assert!(smaller < alpha);
        assert!(cutoff_tail_bound(20, 0.4, smaller).unwrap().value > 1e-6);
        assert!(pair_tail(20, 0.4, c.n / 2).unwrap() <= c.tail_bound);
    }

    #[test]
    fn override_reports_exact_tail() {
        let c = select_cutoff_squeezed(20, 0.4, &CutoffPolicy::fixed(8)).unwrap();
        assert_eq!(c.n, 8);
        let direct: f64 = 1.0 - (0..=4).map(|k| total_pair_distribution(20, 0.4, k).unwrap()).sum::<f64>();
        assert!((c.tail_bound - direct).abs() < 1e-12);
    }

    #[test]
    fn policy_validation() {
        assert!(CutoffPolicy::new(0.0, 2.0, None).is_err());
        assert!(CutoffPolicy::new(1e-3, 0.5, None).is_err());
    }
}
