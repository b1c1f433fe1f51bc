//! Continuous rate allocation under box constraints.
//!
//! With real-valued rates the KKT conditions of both robustness objectives
//! reduce, in the asymptotic regime, to `lambda = 2^r_i / snr_i` on interior
//! channels, so the optimum for a multiplier `lambda` is
//!
//! ```text
//! r_i(lambda) = clamp(log2(lambda * snr_i), 0, r_max)
//! ```
//!
//! [`solve_continuous`] finds `lambda` with `sum_i r_i(lambda) = R` by a
//! secant search (plain or log-shaped) stopped at one bit of error, then
//! recomputes the interior rates in closed form from the interior set.
//! The multipliers of the box constraints are implied by which branch of
//! the clamp each channel takes and are never stored.

mod secant;

pub use secant::{generalized_secant, Identity, Log2, SecantOutcome, Shape, ShapeKind, Stop};

use serde::{Deserialize, Serialize};

use crate::channel::SnrProfile;
use crate::error::{Error, Result};
use crate::greedy::Constraints;

/// Rate error at which the multiplier search stops.
pub const RATE_TOLERANCE: f64 = 1.0;

/// Iteration cap for the multiplier search.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Real-valued allocation together with its multiplier and interior set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSolution {
    pub rates: Vec<f64>,
    pub lambda: f64,
    /// Channels with `0 < r_i < r_max`.
    pub interior_set: Vec<usize>,
    /// Rate carried by the interior set, `R - (channels at cap) * r_max`.
    pub interior_rate: f64,
    /// Secant iterations until the rate error fell below one bit.
    pub iterations: usize,
    /// Closed-form passes needed to settle the interior set.
    pub refinement_passes: usize,
    /// Secant iterations that fell back to bisection.
    pub bisection_steps: usize,
}

impl ContinuousSolution {
    pub fn cap_set(&self, r_max: u32) -> Vec<usize> {
        (0..self.rates.len())
            .filter(|&i| self.rates[i] >= r_max as f64)
            .collect()
    }

    pub fn zero_set(&self) -> Vec<usize> {
        (0..self.rates.len())
            .filter(|&i| self.rates[i] <= 0.0)
            .collect()
    }

    /// Interior rates in the order of `interior_set`.
    pub fn interior_rates(&self) -> Vec<f64> {
        self.interior_set.iter().map(|&i| self.rates[i]).collect()
    }
}

/// Unconstrained closed form `r_i = R/n + (1/n) sum_j log2(snr_i / snr_j)`.
///
/// Rates may be negative or exceed any cap.
pub fn asymptotic_rates(profile: &SnrProfile, rate: f64) -> Result<Vec<f64>> {
    asymptotic_rates_of(profile.as_slice(), rate)
}

fn asymptotic_rates_of(snr: &[f64], rate: f64) -> Result<Vec<f64>> {
    if snr.is_empty() {
        return Err(Error::EmptyChannel);
    }
    if let Some(i) = snr.iter().position(|&s| s <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "closed-form rates need positive SNR, subchannel {i} has {}",
            snr[i]
        )));
    }
    // offsets from the first channel keep equal SNRs at exactly R / n
    let n = snr.len() as f64;
    let reference = snr[0].log2();
    let offsets: Vec<f64> = snr.iter().map(|s| s.log2() - reference).collect();
    let mean = offsets.iter().sum::<f64>() / n;
    let share = rate / n;
    Ok(offsets.iter().map(|d| share + (d - mean)).collect())
}

/// `r_i(lambda) = clamp(log2(lambda * snr_i), 0, r_max)`; zero-SNR channels get 0.
pub fn clipped_rates(lambda: f64, profile: &SnrProfile, r_max: u32) -> Vec<f64> {
    profile
        .as_slice()
        .iter()
        .map(|&s| clipped_rate(lambda.log2(), s, r_max as f64))
        .collect()
}

fn clipped_rate(log_lambda: f64, snr: f64, r_max: f64) -> f64 {
    if snr <= 0.0 {
        return 0.0;
    }
    (log_lambda + snr.log2()).clamp(0.0, r_max)
}

fn rate_error(log_lambda: f64, snr: &[f64], r_max: f64, target: f64) -> f64 {
    snr.iter()
        .map(|&s| clipped_rate(log_lambda, s, r_max))
        .sum::<f64>()
        - target
}

/// Multiplier bracket `[1 / max snr, 2^r_max / min positive snr]`.
pub fn lambda_bracket(profile: &SnrProfile, r_max: u32) -> (f64, f64) {
    (
        1.0 / profile.max(),
        (r_max as f64).exp2() / profile.min_positive(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    Zero,
    Interior,
    Cap,
}

fn branch(log_lambda: f64, snr: f64, r_max: f64) -> Branch {
    if snr <= 0.0 {
        return Branch::Zero;
    }
    let r = log_lambda + snr.log2();
    if r <= 0.0 {
        Branch::Zero
    } else if r >= r_max {
        Branch::Cap
    } else {
        Branch::Interior
    }
}

/// Solves the box-constrained continuous problem for `0 < R < n r_max`.
pub fn solve_continuous(
    profile: &SnrProfile,
    c: &Constraints,
    shape: ShapeKind,
) -> Result<ContinuousSolution> {
    solve_continuous_with(profile, c, shape, DEFAULT_MAX_ITER)
}

pub fn solve_continuous_with(
    profile: &SnrProfile,
    c: &Constraints,
    shape: ShapeKind,
    max_iter: usize,
) -> Result<ContinuousSolution> {
    let snr = profile.as_slice();
    let r_max = c.cap as f64;
    let target = c.target_rate as f64;
    let usable = snr.iter().filter(|&&s| s > 0.0).count();
    if c.target_rate == 0 || target >= usable as f64 * r_max {
        return Err(Error::Infeasible(format!(
            "continuous solution needs 0 < R < {} (usable subchannels times r_max), got {}",
            usable as f64 * r_max,
            c.target_rate
        )));
    }

    let (lambda1, lambda2) = lambda_bracket(profile, c.cap);
    let search = generalized_secant(
        |lambda: f64| rate_error(lambda.log2(), snr, r_max, target),
        &shape,
        lambda1,
        lambda2,
        Stop::Residual(RATE_TOLERANCE),
        max_iter,
    )?;

    // Work in y = log2(lambda), where the rate error is piecewise linear.
    let mut y = search.root.log2();
    let mut y_neg = search.negative.0.log2();
    let mut y_pos = search.positive.0.log2();
    let mut passes = 0;
    let limit = snr.len() + 64;
    loop {
        passes += 1;
        let branches: Vec<Branch> = snr.iter().map(|&s| branch(y, s, r_max)).collect();
        let capped = branches.iter().filter(|&&b| b == Branch::Cap).count();
        let interior: Vec<usize> = (0..snr.len())
            .filter(|&i| branches[i] == Branch::Interior)
            .collect();
        let interior_rate = target - capped as f64 * r_max;

        let y_star = if interior.is_empty() {
            y
        } else {
            let logs = interior.iter().map(|&i| snr[i].log2()).sum::<f64>();
            (interior_rate - logs) / interior.len() as f64
        };
        let consistent = if interior.is_empty() {
            interior_rate == 0.0
        } else {
            (0..snr.len()).all(|i| branch(y_star, snr[i], r_max) == branches[i])
        };

        if consistent {
            let mut rates: Vec<f64> = branches
                .iter()
                .map(|b| match b {
                    Branch::Zero => 0.0,
                    Branch::Cap => r_max,
                    Branch::Interior => 0.0,
                })
                .collect();
            if !interior.is_empty() {
                let sub: Vec<f64> = interior.iter().map(|&i| snr[i]).collect();
                for (&i, r) in interior
                    .iter()
                    .zip(asymptotic_rates_of(&sub, interior_rate)?)
                {
                    rates[i] = r;
                }
            }
            return Ok(ContinuousSolution {
                rates,
                lambda: y_star.exp2(),
                interior_set: interior,
                interior_rate,
                iterations: search.iterations,
                refinement_passes: passes,
                bisection_steps: search.bisection_steps,
            });
        }
        if passes >= limit {
            return Err(Error::NoConvergence { iterations: passes });
        }

        // The interior set guessed at y was wrong: keep the bracket in
        // y-space and move to the closed-form root, bisecting when it leaves.
        let current = rate_error(y, snr, r_max, target);
        if current < 0.0 {
            y_neg = y_neg.max(y);
        } else if current > 0.0 {
            y_pos = y_pos.min(y);
        }
        y = if y_star > y_neg && y_star < y_pos {
            y_star
        } else {
            0.5 * (y_neg + y_pos)
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> SnrProfile {
        SnrProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn asymptotic_examples() {
        let r = asymptotic_rates(&profile(&[3.0; 10]), 100.0).unwrap();
        assert!(r.iter().all(|&x| x == 10.0));

        let s = 7.3;
        let r = asymptotic_rates(&profile(&[4.0 * s, s]), 10.0).unwrap();
        assert!((r[0] - 6.0).abs() < 1e-12 && (r[1] - 4.0).abs() < 1e-12);

        assert!(asymptotic_rates(&profile(&[1.0, 0.0]), 3.0).is_err());
    }

    #[test]
    fn clipped_examples() {
        let p = profile(&[0.5, 4.0, 100.0, 0.0]);
        let (l1, l2) = lambda_bracket(&p, 6);
        assert!(clipped_rates(l1, &p, 6).iter().all(|&r| r == 0.0));
        assert!(clipped_rates(l1 * 0.3, &p, 6).iter().all(|&r| r == 0.0));
        let top = clipped_rates(l2, &p, 6);
        assert_eq!(&top[..3], &[6.0, 6.0, 6.0]);
        assert_eq!(top[3], 0.0);
        let r = clipped_rates(4.0 / 4.0, &p, 6);
        assert_eq!(r[1], 2.0);
    }

    #[test]
    fn uniform_profile_gives_equal_rates() {
        let p = profile(&[42.0; 16]);
        for k in 1..10u64 {
            let c = Constraints::new(16 * k, 1, 10).unwrap();
            let sol = solve_continuous(&p, &c, ShapeKind::Log2).unwrap();
            assert!(sol.rates.iter().all(|&r| r == k as f64), "{:?}", sol.rates);
            assert_eq!(sol.interior_set.len(), 16);
            assert_eq!(sol.refinement_passes, 1);
        }
    }

    #[test]
    fn infeasible_targets() {
        let p = profile(&[1.0, 2.0, 0.0]);
        for r in [0, 8, 9] {
            let c = Constraints::new(r, 1, 4).unwrap();
            assert!(matches!(
                solve_continuous(&p, &c, ShapeKind::Log2),
                Err(Error::Infeasible(_))
            ));
        }
    }

    #[test]
    fn kkt_branch_conditions() {
        let p = profile(&[0.01, 0.3, 2.0, 40.0, 900.0, 5.0e4, 1.0e6]);
        let c = Constraints::new(30, 1, 8).unwrap();
        for shape in [ShapeKind::Log2, ShapeKind::Linear] {
            let sol = solve_continuous(&p, &c, shape).unwrap();
            let total: f64 = sol.rates.iter().sum();
            assert!((total - 30.0).abs() < 1e-9);
            for (i, &s) in p.as_slice().iter().enumerate() {
                let r = sol.rates[i];
                assert!((0.0..=8.0).contains(&r));
                if r == 0.0 {
                    assert!(sol.lambda <= 1.0 / s * (1.0 + 1e-12));
                } else if r == 8.0 {
                    assert!(sol.lambda >= 256.0 / s * (1.0 - 1e-12));
                } else {
                    assert!((r - (sol.lambda * s).log2()).abs() < 1e-9);
                }
            }
        }
    }
}
