//! Exhaustive-search reference optimizer for small instances.
//!
//! Enumerates every `beta`-granular composition of `R` under the per-channel
//! cap and keeps all allocations that reach the best objective value. The
//! objectives are evaluated through [`crate::metrics`] so the oracle and the
//! allocators share one definition of each formula.

use crate::channel::SnrProfile;
use crate::error::{Error, Result};
use crate::greedy::Constraints;
use crate::metrics::{self, inverse_margin_unchecked, weighted_ber_unchecked};

/// Default ceiling on the number of enumerated allocations.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Relative gap under which two objective values count as a tie. Sums over
/// permuted allocations round differently, so exact equality would split
/// symmetric optima.
pub const TIE_TOLERANCE: f64 = 1e-12;

fn ties(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= TIE_TOLERANCE * a.abs().max(b.abs())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `max_i (2^r_i - 1) / snr_i` over loaded channels.
    MarginInverse,
    /// Bit-weighted mean BER.
    WeightedBer,
    /// Peak power fraction needed to meet SNR-gap targets, given full-power SNRs.
    PeakPower { gaps: Vec<f64>, full_snr: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_value: f64,
    /// Every allocation within [`TIE_TOLERANCE`] of `best_value`, in
    /// lexicographic order.
    pub argmins: Vec<Vec<u32>>,
    pub explored: u64,
}

impl OracleResult {
    pub fn contains(&self, bits: &[u32]) -> bool {
        self.argmins.iter().any(|a| a == bits)
    }
}

/// Number of ways to write `units` as an ordered sum of `n` parts in `[0, max]`.
pub fn composition_count(n: usize, units: u64, max: u64) -> u128 {
    let units = units as usize;
    let mut ways = vec![0u128; units + 1];
    ways[0] = 1;
    for _ in 0..n {
        let mut next = vec![0u128; units + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            for k in 0..=max as usize {
                if s + k > units {
                    break;
                }
                next[s + k] = next[s + k].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[units]
}

pub fn exhaustive(
    profile: &SnrProfile,
    c: &Constraints,
    objective: &Objective,
) -> Result<OracleResult> {
    exhaustive_with_budget(profile, c, objective, DEFAULT_BUDGET)
}

pub fn exhaustive_with_budget(
    profile: &SnrProfile,
    c: &Constraints,
    objective: &Objective,
    budget: u128,
) -> Result<OracleResult> {
    c.check_feasible(profile.len())?;
    let n = profile.len();
    if let Objective::PeakPower { gaps, full_snr } = objective {
        if gaps.len() != n || full_snr.len() != n {
            return Err(Error::DimensionMismatch {
                what: "peak-power objective",
                expected: n,
                got: gaps.len().min(full_snr.len()),
            });
        }
    }
    let beta = c.granularity;
    let units = c.target_rate / beta as u64;
    let max_units = (c.cap / beta) as u64;
    let states = composition_count(n, units, max_units);
    if states > budget {
        return Err(Error::BudgetExceeded { states, budget });
    }

    let snr = profile.as_slice();
    let evaluate = |bits: &[u32]| -> f64 {
        if c.target_rate == 0 {
            return 0.0;
        }
        match objective {
            Objective::MarginInverse => inverse_margin_unchecked(bits, snr),
            Objective::WeightedBer => weighted_ber_unchecked(bits, snr),
            Objective::PeakPower { gaps, full_snr } => {
                metrics::peak_power(bits, gaps, full_snr).expect("lengths checked above")
            }
        }
    };

    let mut result = OracleResult {
        best_value: f64::INFINITY,
        argmins: Vec::new(),
        explored: 0,
    };
    let mut values = Vec::new();
    let mut bits = vec![0u32; n];
    enumerate(&mut bits, 0, units, max_units, beta, &mut |b| {
        result.explored += 1;
        let v = evaluate(b);
        if v < result.best_value || result.argmins.is_empty() {
            result.best_value = v;
        }
        if ties(v, result.best_value) {
            result.argmins.push(b.to_vec());
            values.push(v);
        }
    });
    let best = result.best_value;
    let mut keep = values.iter().map(|&v| ties(v, best));
    result.argmins.retain(|_| keep.next().unwrap_or(false));
    Ok(result)
}

fn enumerate<F: FnMut(&[u32])>(
    bits: &mut [u32],
    index: usize,
    remaining: u64,
    max_units: u64,
    beta: u32,
    visit: &mut F,
) {
    let n = bits.len();
    if index == n - 1 {
        if remaining <= max_units {
            bits[index] = remaining as u32 * beta;
            visit(bits);
        }
        return;
    }
    let rest = (n - index - 1) as u64 * max_units;
    let lo = remaining.saturating_sub(rest);
    let hi = remaining.min(max_units);
    // ascending k visits compositions in lexicographic order
    for k in lo..=hi {
        bits[index] = k as u32 * beta;
        enumerate(bits, index + 1, remaining - k, max_units, beta, visit);
    }
    bits[index] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> SnrProfile {
        SnrProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_channel() {
        let c = Constraints::new(3, 1, 5).unwrap();
        let r = exhaustive(&profile(&[9.0]), &c, &Objective::MarginInverse).unwrap();
        assert_eq!(r.argmins, vec![vec![3]]);
        assert_eq!(r.explored, 1);
    }

    #[test]
    fn two_channel_margin() {
        let c = Constraints::new(2, 1, 2).unwrap();
        let r = exhaustive(&profile(&[4.0, 1.0]), &c, &Objective::MarginInverse).unwrap();
        assert_eq!(r.best_value, 0.75);
        assert_eq!(r.argmins, vec![vec![2, 0]]);
        assert_eq!(r.explored, 3);
    }

    #[test]
    fn identical_channels_give_permutation_closed_argmins() {
        let c = Constraints::new(4, 1, 3).unwrap();
        let r = exhaustive(&profile(&[20.0, 20.0, 20.0]), &c, &Objective::WeightedBer).unwrap();
        for a in &r.argmins {
            let mut perm = a.clone();
            perm.rotate_left(1);
            assert!(r.contains(&perm));
            perm.swap(0, 1);
            assert!(r.contains(&perm));
        }
        assert_eq!(r.argmins.len(), 3);
    }

    #[test]
    fn counts_match_enumeration() {
        let p = profile(&[1.0, 2.0, 3.0, 4.0]);
        for beta in [1, 2] {
            for rate in (0..=16).step_by(beta as usize) {
                let c = Constraints::new(rate, beta, 4).unwrap();
                let r = exhaustive(&p, &c, &Objective::MarginInverse).unwrap();
                assert_eq!(
                    r.explored as u128,
                    composition_count(4, rate / beta as u64, 4 / beta as u64)
                );
                for a in &r.argmins {
                    assert_eq!(a.iter().map(|&x| x as u64).sum::<u64>(), rate);
                    assert!(a.iter().all(|&x| x % beta == 0 && x <= 4));
                }
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let p = profile(&[1.0; 12]);
        let c = Constraints::new(60, 1, 10).unwrap();
        assert!(matches!(
            exhaustive(&p, &c, &Objective::MarginInverse),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
