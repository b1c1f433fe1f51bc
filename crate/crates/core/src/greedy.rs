//! Greedy (Fox-type) bit-loading.
//!
//! Every step moves `beta` bits on the subchannel whose step metric is best:
//!
//! * margin, adding: smallest `(2^(r_i+beta) - 1) / snr_i`
//! * margin, removing: largest `(2^r_i - 1) / snr_i`
//! * BER, simplified: smallest `(r_i+beta) ber_i(r_i+beta)`
//! * BER, delta: smallest `(r_i+beta) ber_i(r_i+beta) - r_i ber_i(r_i)`
//!
//! Subchannels at the cap (or empty, when removing) leave the candidate set.
//! Ties go to the lowest index.

use serde::{Deserialize, Serialize};

use crate::ber::{self, expected_bit_errors, inverse_gap};
use crate::channel::{ChannelSpec, SnrProfile};
use crate::error::{Error, Result};
use crate::metrics::{required_power_fraction, Allocation};

/// Rate target `R`, granularity `beta` and per-channel cap `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    pub target_rate: u64,
    pub granularity: u32,
    pub cap: u32,
}

impl Constraints {
    pub fn new(target_rate: u64, granularity: u32, cap: u32) -> Result<Self> {
        if granularity == 0 {
            return Err(Error::InvalidParameter("granularity must be >= 1".into()));
        }
        if cap == 0 || !cap.is_multiple_of(granularity) {
            return Err(Error::InvalidParameter(format!(
                "cap {cap} must be a positive multiple of granularity {granularity}"
            )));
        }
        if cap > ber::MAX_BITS {
            return Err(Error::InvalidParameter(format!(
                "cap {cap} exceeds {} bits",
                ber::MAX_BITS
            )));
        }
        if !target_rate.is_multiple_of(granularity as u64) {
            return Err(Error::Infeasible(format!(
                "target rate {target_rate} is not a multiple of granularity {granularity}"
            )));
        }
        Ok(Self {
            target_rate,
            granularity,
            cap,
        })
    }

    /// Checks `R <= n * r_max` for `n` subchannels.
    pub fn check_feasible(&self, n: usize) -> Result<()> {
        let max = n as u64 * self.cap as u64;
        if self.target_rate > max {
            return Err(Error::Infeasible(format!(
                "target rate {} exceeds n * r_max = {max}",
                self.target_rate
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> u64 {
        self.target_rate / self.granularity as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Add,
    Remove,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BerMetric {
    Simplified,
    Delta,
}

/// Step metric of a greedy run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMetric {
    Margin,
    Ber(BerMetric),
}

/// Subchannel picked at each step and the metric value that won.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub chosen_channel: Vec<usize>,
    pub metric_value: Vec<f64>,
}

impl GreedyTrace {
    pub fn len(&self) -> usize {
        self.chosen_channel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chosen_channel.is_empty()
    }

    /// Replays the trace from `start`, returning every visited state
    /// including `start` itself.
    pub fn states(&self, start: &[u32], step: i64) -> Vec<Vec<u32>> {
        let mut current = start.to_vec();
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(current.clone());
        for &i in &self.chosen_channel {
            current[i] = (current[i] as i64 + step) as u32;
            out.push(current.clone());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyResult {
    pub allocation: Allocation,
    pub trace: GreedyTrace,
    /// False when a BER run left the convex domain, where its optimality
    /// is no longer guaranteed. Always true for margin runs.
    pub certified: bool,
}

fn step_cost(metric: StepMetric, bits: u32, beta: u32, snr: f64) -> f64 {
    let next = bits + beta;
    match metric {
        StepMetric::Margin => inverse_gap(next, snr),
        StepMetric::Ber(BerMetric::Simplified) => expected_bit_errors(next, snr),
        StepMetric::Ber(BerMetric::Delta) => {
            expected_bit_errors(next, snr) - expected_bit_errors(bits, snr)
        }
    }
}

/// Runs bit-addition from `start` until the total reaches the target rate.
fn add_until<F>(mut bits: Vec<u32>, c: &Constraints, cost: F) -> Result<(Vec<u32>, GreedyTrace)>
where
    F: Fn(usize, u32) -> f64,
{
    let beta = c.granularity;
    let total: u64 = bits.iter().map(|&r| r as u64).sum();
    if total > c.target_rate {
        return Err(Error::Infeasible(format!(
            "start already carries {total} bits, more than the target {}",
            c.target_rate
        )));
    }
    let steps = ((c.target_rate - total) / beta as u64) as usize;
    let mut costs: Vec<f64> = bits
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            if r + beta <= c.cap {
                cost(i, r)
            } else {
                f64::NAN
            }
        })
        .collect();
    let mut trace = GreedyTrace {
        chosen_channel: Vec::with_capacity(steps),
        metric_value: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in costs.iter().enumerate() {
            if v.is_nan() {
                continue;
            }
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
        let (j, v) = best.ok_or_else(|| {
            Error::Infeasible("every subchannel reached the cap before the target rate".into())
        })?;
        bits[j] += beta;
        costs[j] = if bits[j] + beta <= c.cap {
            cost(j, bits[j])
        } else {
            f64::NAN
        };
        trace.chosen_channel.push(j);
        trace.metric_value.push(v);
    }
    Ok((bits, trace))
}

/// Greedy bit-addition from an arbitrary starting allocation.
pub fn greedy_add_from(
    profile: &SnrProfile,
    start: Vec<u32>,
    c: &Constraints,
    metric: StepMetric,
) -> Result<GreedyResult> {
    c.check_feasible(profile.len())?;
    if start.len() != profile.len() {
        return Err(Error::DimensionMismatch {
            what: "start allocation",
            expected: profile.len(),
            got: start.len(),
        });
    }
    let snr = profile.as_slice();
    let beta = c.granularity;
    let (bits, trace) = add_until(start, c, |i, r| step_cost(metric, r, beta, snr[i]))?;
    let certified = match metric {
        StepMetric::Margin => true,
        // bits only grow and the BER grows with r, so the final state is the
        // last one to leave the domain
        StepMetric::Ber(_) => bits
            .iter()
            .zip(snr)
            .filter(|(&r, _)| r > 0)
            .all(|(&r, &s)| ber::channel_ber(r, s) <= ber::CONVEX_DOMAIN_BER),
    };
    Ok(GreedyResult {
        allocation: Allocation::new(bits, beta, c.cap)?,
        trace,
        certified,
    })
}

/// Margin-maximizing greedy loading, by bit addition from empty or bit
/// removal from full.
pub fn greedy_margin(
    profile: &SnrProfile,
    c: &Constraints,
    direction: Direction,
) -> Result<GreedyResult> {
    match direction {
        Direction::Add => greedy_add_from(profile, vec![0; profile.len()], c, StepMetric::Margin),
        Direction::Remove => greedy_margin_remove(profile, c),
    }
}

fn greedy_margin_remove(profile: &SnrProfile, c: &Constraints) -> Result<GreedyResult> {
    c.check_feasible(profile.len())?;
    let snr = profile.as_slice();
    let beta = c.granularity;
    let mut bits = vec![c.cap; snr.len()];
    let full = snr.len() as u64 * c.cap as u64;
    let steps = ((full - c.target_rate) / beta as u64) as usize;
    let mut costs: Vec<f64> = snr.iter().map(|&s| inverse_gap(c.cap, s)).collect();
    let mut trace = GreedyTrace {
        chosen_channel: Vec::with_capacity(steps),
        metric_value: Vec::with_capacity(steps),
    };
    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for (i, &v) in costs.iter().enumerate() {
            if bits[i] == 0 {
                continue;
            }
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
        let (j, v) = best.expect("a loaded subchannel remains while total > target");
        bits[j] -= beta;
        costs[j] = inverse_gap(bits[j], snr[j]);
        trace.chosen_channel.push(j);
        trace.metric_value.push(v);
    }
    Ok(GreedyResult {
        allocation: Allocation::new(bits, beta, c.cap)?,
        trace,
        certified: true,
    })
}

/// BER-minimizing greedy loading by bit addition.
pub fn greedy_ber(
    profile: &SnrProfile,
    c: &Constraints,
    metric: BerMetric,
) -> Result<GreedyResult> {
    greedy_add_from(profile, vec![0; profile.len()], c, StepMetric::Ber(metric))
}

/// Greedy loading that minimizes the peak power fraction needed to meet
/// per-channel SNR-gap targets. Power fractions in `spec` are ignored.
pub fn greedy_min_peak_power(
    gap_targets: &[f64],
    spec: &ChannelSpec,
    c: &Constraints,
) -> Result<Allocation> {
    spec.validate()?;
    if gap_targets.len() != spec.len() {
        return Err(Error::DimensionMismatch {
            what: "gap targets",
            expected: spec.len(),
            got: gap_targets.len(),
        });
    }
    if let Some(g) = gap_targets.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "SNR-gap targets must be positive, got {g}"
        )));
    }
    c.check_feasible(spec.len())?;
    let full_snr = spec.full_power_snr();
    let beta = c.granularity;
    let (bits, _) = add_until(vec![0; spec.len()], c, |i, r| {
        required_power_fraction(r + beta, gap_targets[i], full_snr[i])
    })?;
    Allocation::new(bits, beta, c.cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{inverse_margin, weighted_ber};

    fn profile(v: &[f64]) -> SnrProfile {
        SnrProfile::new(v.to_vec()).unwrap()
    }

    fn c(r: u64, beta: u32, cap: u32) -> Constraints {
        Constraints::new(r, beta, cap).unwrap()
    }

    #[test]
    fn constraint_validation() {
        assert!(Constraints::new(3, 2, 4).is_err());
        assert!(Constraints::new(4, 2, 5).is_err());
        assert!(Constraints::new(4, 0, 4).is_err());
        assert!(c(9, 1, 4).check_feasible(2).is_err());
        assert!(c(8, 1, 4).check_feasible(2).is_ok());
    }

    #[test]
    fn equal_snr_spreads_bits() {
        let r = greedy_margin(&profile(&[5.0, 5.0]), &c(2, 1, 4), Direction::Add).unwrap();
        assert_eq!(r.allocation.bits(), &[1, 1]);
        assert_eq!(r.trace.chosen_channel, vec![0, 1]);
    }

    #[test]
    fn strong_channel_takes_both_bits() {
        let p = profile(&[4.0, 1.0]);
        let r = greedy_margin(&p, &c(2, 1, 4), Direction::Add).unwrap();
        assert_eq!(r.allocation.bits(), &[2, 0]);
        // brute force over the three outcomes
        let best = [[2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|b| inverse_margin(b, &p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(inverse_margin(r.allocation.bits(), &p).unwrap(), best);
        assert_eq!(best, 0.75);
    }

    #[test]
    fn trace_length_and_monotone_objective() {
        let p = profile(&[30.0, 3.0, 700.0, 90.0]);
        let r = greedy_margin(&p, &c(12, 2, 6), Direction::Add).unwrap();
        assert_eq!(r.trace.len(), 6);
        assert_eq!(r.allocation.total(), 12);
        let mut prev = 0.0;
        for state in r.trace.states(&[0; 4], 2).iter().skip(1) {
            let obj = inverse_margin(state, &p).unwrap();
            assert!(obj >= prev);
            prev = obj;
        }
    }

    #[test]
    fn capped_channels_leave_candidacy() {
        let p = profile(&[1.0e6, 1.0]);
        let r = greedy_margin(&p, &c(5, 1, 3), Direction::Add).unwrap();
        assert_eq!(r.allocation.bits(), &[3, 2]);
        assert!(greedy_margin(&p, &c(7, 1, 3), Direction::Add).is_err());
    }

    #[test]
    fn removal_matches_addition() {
        let p = profile(&[31.0, 3.3, 701.0, 87.0, 12.7]);
        for rate in 0..=20 {
            let add = greedy_margin(&p, &c(rate, 1, 4), Direction::Add).unwrap();
            let rem = greedy_margin(&p, &c(rate, 1, 4), Direction::Remove).unwrap();
            assert_eq!(add.allocation, rem.allocation, "rate {rate}");
            assert_eq!(rem.trace.len() as u64, 20 - rate);
        }
    }

    #[test]
    fn single_channel_ber() {
        for m in [BerMetric::Simplified, BerMetric::Delta] {
            let r = greedy_ber(&profile(&[50.0]), &c(3, 1, 8), m).unwrap();
            assert_eq!(r.allocation.bits(), &[3]);
        }
    }

    #[test]
    fn ber_two_channel_matches_brute_force() {
        let p = profile(&[100.0, 25.0]);
        let r = greedy_ber(&p, &c(2, 1, 4), BerMetric::Delta).unwrap();
        let got = weighted_ber(r.allocation.bits(), &p).unwrap();
        let best = [[2, 0], [1, 1], [0, 2]]
            .iter()
            .map(|b| weighted_ber(b, &p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(got, best);
        assert!(r.certified);
    }

    #[test]
    fn low_snr_ber_run_is_not_certified() {
        let r = greedy_ber(&profile(&[2.0, 3.0]), &c(4, 1, 4), BerMetric::Delta).unwrap();
        assert!(!r.certified);
    }

    #[test]
    fn peak_power_single_channel() {
        let spec = ChannelSpec::full_power(vec![2.0], vec![1.0], 1.0).unwrap();
        let a = greedy_min_peak_power(&[3.0], &spec, &c(5, 1, 8)).unwrap();
        assert_eq!(a.bits(), &[5]);
        assert!(greedy_min_peak_power(&[0.0], &spec, &c(5, 1, 8)).is_err());
    }

    #[test]
    fn start_above_target_is_rejected() {
        let p = profile(&[10.0, 10.0]);
        let err = greedy_add_from(&p, vec![2, 2], &c(2, 1, 4), StepMetric::Margin);
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }
}
