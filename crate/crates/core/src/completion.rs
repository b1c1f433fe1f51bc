//! Integer completion of a continuous solution.
//!
//! Channels at 0 or `r_max` keep their value. Interior channels are rounded
//! with a common offset `alpha`:
//!
//! ```text
//! g(alpha) = sum_i beta * floor(r_i / beta + alpha) - R'
//! ```
//!
//! `g` is a nondecreasing staircase with `g(0) <= 0 < g(1)`. The root search
//! keeps a bracket `g(lo) < 0 < g(hi)` and stops on an exact zero or once all
//! breakpoints left in `(lo, hi]` coincide, in which case several channels
//! jump together and the missing bits are added one step at a time from `lo`.

use serde::{Deserialize, Serialize};

use crate::analytic::ContinuousSolution;
use crate::channel::SnrProfile;
use crate::error::{Error, Result};
use crate::greedy::{greedy_add_from, Constraints, StepMetric};
use crate::metrics::Allocation;

/// Upper bound on staircase evaluations; bisection separates any two
/// distinct breakpoints in at most ~60 halvings.
const MAX_ROOT_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionMethod {
    Bisection,
    Secant,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionReport {
    pub method: CompletionMethod,
    /// Staircase evaluations for root methods, `beta`-steps for greedy.
    pub iterations: usize,
    pub alpha: Option<f64>,
    pub post_fix_moves: usize,
    /// `|g(0)|`, the bits left after flooring every interior rate.
    pub residual_bits: u64,
}

/// One interior rate split as `r / beta = whole + frac`.
#[derive(Debug, Clone, Copy)]
struct Unit {
    whole: i64,
    frac: f64,
}

impl Unit {
    fn new(rate: f64, beta: u32) -> Self {
        let t = rate / beta as f64;
        let whole = t.floor();
        Unit {
            whole: whole as i64,
            frac: t - whole,
        }
    }

    /// Smallest `alpha` at which `floor(r / beta + alpha)` steps up.
    fn breakpoint(&self) -> f64 {
        1.0 - self.frac
    }

    fn rounded(&self, alpha: f64) -> i64 {
        self.whole + i64::from(alpha >= self.breakpoint())
    }
}

fn units(rates: &[f64], beta: u32) -> Vec<Unit> {
    rates.iter().map(|&r| Unit::new(r, beta)).collect()
}

fn staircase(alpha: f64, units: &[Unit], beta: u32) -> i64 {
    units.iter().map(|u| u.rounded(alpha)).sum::<i64>() * beta as i64
}

/// `sum_i beta * floor(r_i / beta + alpha)` for `alpha` in `[0, 1]`.
pub fn staircase_rate(alpha: f64, interior_rates: &[f64], beta: u32) -> i64 {
    staircase(alpha, &units(interior_rates, beta), beta)
}

fn check_solution(sol: &ContinuousSolution, c: &Constraints) -> Result<()> {
    let r_max = c.cap as f64;
    if let Some(r) = sol
        .rates
        .iter()
        .find(|r| !(r.is_finite() && (0.0..=r_max).contains(*r)))
    {
        return Err(Error::InvalidParameter(format!(
            "continuous rate {r} outside [0, {r_max}]"
        )));
    }
    Ok(())
}

/// Bits carried by the interior set, from the constraint rather than the
/// floating-point sum so the result is exact.
fn interior_target(sol: &ContinuousSolution, c: &Constraints) -> Result<i64> {
    let capped = sol.cap_set(c.cap).len() as i64;
    let target = c.target_rate as i64 - capped * c.cap as i64;
    if target < 0 {
        return Err(Error::Infeasible(format!(
            "{capped} capped subchannels already exceed the target {}",
            c.target_rate
        )));
    }
    Ok(target)
}

fn fixed_bits(sol: &ContinuousSolution, c: &Constraints) -> Vec<u32> {
    sol.rates
        .iter()
        .map(|&r| if r >= c.cap as f64 { c.cap } else { 0 })
        .collect()
}

/// Rounds the interior rates with a staircase root found by bisection or secant.
pub fn complete_by_root(
    sol: &ContinuousSolution,
    c: &Constraints,
    method: CompletionMethod,
) -> Result<(Allocation, CompletionReport)> {
    if method == CompletionMethod::Greedy {
        return Err(Error::InvalidParameter(
            "greedy completion needs an objective, use complete_by_greedy".into(),
        ));
    }
    check_solution(sol, c)?;
    let beta = c.granularity;
    let target = interior_target(sol, c)?;
    let u = units(&sol.interior_rates(), beta);
    let g = |alpha: f64| staircase(alpha, &u, beta) - target;

    let g0 = g(0.0);
    let residual_bits = g0.unsigned_abs();
    let g1 = g(1.0);
    if g0 > 0 || g1 < 0 {
        return Err(Error::Infeasible(format!(
            "staircase does not bracket the interior target: g(0) = {g0}, g(1) = {g1}"
        )));
    }

    let mut iterations = 0;
    let mut alpha = 0.0;
    let mut post_fix_from = None;
    if g0 < 0 {
        let (mut lo, mut glo, mut hi, mut ghi) = (0.0, g0, 1.0, g1);
        let mut bisect_next = false;
        loop {
            let gaps: Vec<f64> = u
                .iter()
                .map(Unit::breakpoint)
                .filter(|&b| b > lo && b <= hi)
                .collect();
            let tied = gaps.windows(2).all(|w| w[0] == w[1]);
            if ghi == 0 {
                alpha = hi;
                break;
            }
            if tied || iterations >= MAX_ROOT_ITER {
                post_fix_from = Some(lo);
                alpha = lo;
                break;
            }
            let mut next = f64::NAN;
            if method == CompletionMethod::Secant && !bisect_next {
                next = lo + (-glo as f64) * (hi - lo) / (ghi - glo) as f64;
            }
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            iterations += 1;
            let gn = g(next);
            if gn == 0 {
                alpha = next;
                break;
            }
            if gn < 0 {
                bisect_next = gn == glo;
                lo = next;
                glo = gn;
            } else {
                bisect_next = gn == ghi;
                hi = next;
                ghi = gn;
            }
        }
    }

    let mut bits = fixed_bits(sol, c);
    let rounded: Vec<i64> = u.iter().map(|x| x.rounded(alpha)).collect();
    for (k, &i) in sol.interior_set.iter().enumerate() {
        bits[i] = rounded[k] as u32 * beta;
    }
    let mut post_fix_moves = 0;
    if let Some(lo) = post_fix_from {
        // largest fractional part first, lowest index on ties
        let mut order: Vec<usize> = (0..u.len()).filter(|&k| u[k].breakpoint() > lo).collect();
        order.sort_by(|&a, &b| u[b].frac.total_cmp(&u[a].frac).then(a.cmp(&b)));
        let missing = (-g(lo) / beta as i64) as usize;
        for &k in order.iter().take(missing) {
            bits[sol.interior_set[k]] += beta;
            post_fix_moves += 1;
        }
    }

    let allocation = Allocation::new(bits, beta, c.cap)?;
    debug_assert_eq!(allocation.total(), c.target_rate);
    Ok((
        allocation,
        CompletionReport {
            method,
            iterations,
            alpha: Some(alpha),
            post_fix_moves,
            residual_bits,
        },
    ))
}

/// Floors the interior rates and adds the remaining bits greedily with `metric`.
pub fn complete_by_greedy(
    sol: &ContinuousSolution,
    profile: &SnrProfile,
    c: &Constraints,
    metric: StepMetric,
) -> Result<(Allocation, CompletionReport)> {
    check_solution(sol, c)?;
    if profile.len() != sol.rates.len() {
        return Err(Error::DimensionMismatch {
            what: "continuous solution",
            expected: profile.len(),
            got: sol.rates.len(),
        });
    }
    let beta = c.granularity;
    let mut start = fixed_bits(sol, c);
    for &i in &sol.interior_set {
        start[i] = Unit::new(sol.rates[i], beta).whole as u32 * beta;
    }
    let floor_total: u64 = start.iter().map(|&b| b as u64).sum();
    let residual_bits = c.target_rate.abs_diff(floor_total);
    let result = greedy_add_from(profile, start, c, metric)?;
    Ok((
        result.allocation,
        CompletionReport {
            method: CompletionMethod::Greedy,
            iterations: result.trace.len(),
            alpha: None,
            post_fix_moves: 0,
            residual_bits,
        },
    ))
}
