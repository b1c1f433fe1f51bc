//! Resolves configs into sweep points and evaluates them.

use std::path::Path as FsPath;

use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{solve_continuous, ShapeKind};
use crate::channel::{
    linear_grid, multipath_profile, rayleigh_profile, snr_profile, target_bitrate, ChannelSpec,
    MultipathModel, SnrProfile,
};
use crate::completion::{complete_by_greedy, complete_by_root, CompletionMethod, CompletionReport};
use crate::greedy::{greedy_ber, greedy_margin, Constraints, Direction, StepMetric};
use crate::metrics::{dissimilarity, RobustnessReport};
use crate::oracle::{exhaustive, Objective};

use super::config::{
    ChannelConfig, ExperimentConfig, Method, OracleObjective, RateSetting, Study, SweepAxis,
};
use super::ExperimentError;

/// Builds the SNR profile of a loaded channel config.
pub fn resolve_profile(channel: &ChannelConfig, seed: u64) -> Result<SnrProfile, ExperimentError> {
    let profile =
        match channel {
            ChannelConfig::Explicit {
                snr,
                gains,
                noise_vars,
                peak_power,
                power_fractions,
            } => match (snr, gains, noise_vars, peak_power) {
                (Some(snr), None, None, None) => SnrProfile::new(snr.clone())?,
                (None, Some(g), Some(nv), Some(p)) => {
                    let fractions = power_fractions
                        .clone()
                        .unwrap_or_else(|| vec![1.0; g.len()]);
                    snr_profile(&ChannelSpec::new(g.clone(), nv.clone(), *p, fractions)?)?
                }
                _ => return Err(ExperimentError::Config(
                    "explicit channel needs either `snr` or `gains`, `noise_vars` and `peak_power`"
                        .into(),
                )),
            },
            ChannelConfig::Rayleigh { n, psdnr_db } => rayleigh_profile(*n, *psdnr_db, seed)?,
            ChannelConfig::Multipath {
                paths,
                attenuation,
                speed,
                freq_start_hz,
                freq_stop_hz,
                count,
                noise_psd,
                peak_power,
                psdnr_db,
            } => {
                let model = MultipathModel {
                    paths: paths.clone(),
                    attenuation: *attenuation,
                    speed: *speed,
                };
                let freqs = linear_grid(*freq_start_hz, *freq_stop_hz, *count);
                let p = multipath_profile(&model, &freqs, *noise_psd, *peak_power)?;
                match psdnr_db {
                    Some(db) => p.scaled_to_psdnr(*db)?,
                    None => p,
                }
            }
            ChannelConfig::File { .. } => {
                return Err(ExperimentError::Config(
                    "channel file was not loaded".into(),
                ))
            }
        };
    Ok(profile)
}

/// `target_bitrate` rounded down to a multiple of `beta`.
pub fn auto_rate(profile: &SnrProfile, beta: u32, r_max: u32) -> u64 {
    let r = target_bitrate(profile, r_max);
    r - r % beta as u64
}

/// Lowest PSDNR (to 1e-9 dB) whose automatic target reaches `rate`.
pub fn psdnr_for_rate(
    profile: &SnrProfile,
    rate: u64,
    beta: u32,
    r_max: u32,
) -> Result<f64, ExperimentError> {
    let reaches = |db: f64| -> Result<bool, ExperimentError> {
        Ok(auto_rate(&profile.scaled_to_psdnr(db)?, beta, r_max) >= rate)
    };
    let (mut lo, mut hi) = (-100.0, 200.0);
    if !reaches(hi)? {
        return Err(ExperimentError::Config(format!(
            "rate {rate} is above what {} subchannels can carry at r_max {r_max}",
            profile.len()
        )));
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One fully resolved operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub beta: u32,
    pub seed: u64,
    pub rate: u64,
    pub profile: SnrProfile,
}

impl Point {
    pub fn constraints(&self, r_max: u32) -> Result<Constraints, ExperimentError> {
        let c = Constraints::new(self.rate, self.beta, r_max)?;
        c.check_feasible(self.profile.len())?;
        Ok(c)
    }
}

fn point(
    cfg: &ExperimentConfig,
    channel: &ChannelConfig,
    beta: u32,
    seed: u64,
    rate_override: Option<u64>,
    psdnr_override: Option<f64>,
    match_psdnr: bool,
) -> Result<Point, ExperimentError> {
    let mut profile = resolve_profile(channel, seed)?;
    if let Some(db) = psdnr_override {
        profile = profile.scaled_to_psdnr(db)?;
    }
    let rate = match (rate_override, cfg.rate) {
        (Some(r), _) | (None, RateSetting::Bits(r)) => r,
        (None, RateSetting::Keyword(_)) => auto_rate(&profile, beta, cfg.r_max),
    };
    if match_psdnr {
        let db = psdnr_for_rate(&profile, rate, beta, cfg.r_max)?;
        profile = profile.scaled_to_psdnr(db)?;
    }
    if rate == 0 {
        return Err(ExperimentError::Config(
            "resolved rate is 0; raise the PSDNR or set `rate`".into(),
        ));
    }
    if !rate.is_multiple_of(beta as u64) {
        return Err(ExperimentError::Config(format!(
            "rate {rate} is not a multiple of beta {beta}"
        )));
    }
    Ok(Point {
        beta,
        seed,
        rate,
        profile,
    })
}

/// Operating point of the config without its sweep, at the first granularity.
pub fn base_point(cfg: &ExperimentConfig, base_dir: &FsPath) -> Result<Point, ExperimentError> {
    cfg.validate()?;
    let channel = cfg.channel.load(base_dir)?;
    point(
        cfg,
        &channel,
        cfg.granularities()[0],
        cfg.seed,
        None,
        None,
        false,
    )
}

/// Every sweep point, granularity-major, in config order.
pub fn sweep_points(
    cfg: &ExperimentConfig,
    base_dir: &FsPath,
) -> Result<Vec<Point>, ExperimentError> {
    cfg.validate()?;
    let channel = cfg.channel.load(base_dir)?;
    let mut out = Vec::new();
    for beta in cfg.granularities() {
        let Some(sweep) = &cfg.sweep else {
            out.push(point(cfg, &channel, beta, cfg.seed, None, None, false)?);
            continue;
        };
        for &v in &sweep.values {
            let p = match sweep.axis {
                SweepAxis::Rate => point(
                    cfg,
                    &channel,
                    beta,
                    cfg.seed,
                    Some(v as u64),
                    None,
                    sweep.match_psdnr,
                )?,
                SweepAxis::PsdnrDb => point(cfg, &channel, beta, cfg.seed, None, Some(v), false)?,
                SweepAxis::Seed => point(cfg, &channel, beta, v as u64, None, None, false)?,
            };
            out.push(p);
        }
    }
    Ok(out)
}

/// Result of one allocation policy at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub bits: Vec<u32>,
    pub report: RobustnessReport,
    /// Greedy steps, or multiplier search plus completion iterations.
    pub iterations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuous_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub completion: Option<CompletionReport>,
    /// BER greedy only: every loaded channel ended in the convex domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_explored: Option<u64>,
}

/// Dissimilarities between analytic (A), margin greedy (B) and BER greedy (C).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Dissimilarities {
    pub ab: Option<f64>,
    pub ac: Option<f64>,
    pub bc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationResult {
    pub beta: u32,
    pub seed: u64,
    pub psdnr_db: f64,
    pub rate: u64,
    pub outcomes: Vec<MethodOutcome>,
    pub dissimilarity: Dissimilarities,
}

impl AllocationResult {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

fn run_method(
    cfg: &ExperimentConfig,
    point: &Point,
    c: &Constraints,
    method: Method,
) -> Result<MethodOutcome, ExperimentError> {
    let profile = &point.profile;
    let (mut continuous_iterations, mut completion, mut certified, mut oracle_explored) =
        (None, None, None, None);
    let (bits, iterations) = match method {
        Method::GreedyMargin => {
            let g = greedy_margin(profile, c, Direction::Add)?;
            (g.allocation.into_bits(), g.trace.len() as u64)
        }
        Method::GreedyBer => {
            let g = greedy_ber(profile, c, cfg.ber_metric)?;
            certified = Some(g.certified);
            (g.allocation.into_bits(), g.trace.len() as u64)
        }
        Method::Analytic => {
            let sol = solve_continuous(profile, c, ShapeKind::Log2)?;
            let (alloc, report) = match cfg.completion {
                CompletionMethod::Greedy => {
                    complete_by_greedy(&sol, profile, c, StepMetric::Margin)?
                }
                m => complete_by_root(&sol, c, m)?,
            };
            let iterations = (sol.iterations + report.iterations) as u64;
            continuous_iterations = Some(sol.iterations);
            completion = Some(report);
            (alloc.into_bits(), iterations)
        }
        Method::Oracle => {
            let objective = match cfg.oracle_objective {
                OracleObjective::Margin => Objective::MarginInverse,
                OracleObjective::Ber => Objective::WeightedBer,
            };
            let o = exhaustive(profile, c, &objective)?;
            oracle_explored = Some(o.explored);
            let best = o
                .argmins
                .into_iter()
                .next()
                .expect("a feasible rate has an optimum");
            (best, o.explored)
        }
    };
    Ok(MethodOutcome {
        method,
        report: RobustnessReport::evaluate(&bits, profile)?,
        bits,
        iterations,
        continuous_iterations,
        completion,
        certified,
        oracle_explored,
    })
}

fn pair(outcomes: &[MethodOutcome], a: Method, b: Method) -> Option<f64> {
    let x = outcomes.iter().find(|o| o.method == a)?;
    let y = outcomes.iter().find(|o| o.method == b)?;
    dissimilarity(&x.bits, &y.bits).ok()
}

/// Runs every configured method at one point.
pub fn run_allocation(
    cfg: &ExperimentConfig,
    point: &Point,
) -> Result<AllocationResult, ExperimentError> {
    let c = point.constraints(cfg.r_max)?;
    let mut methods = cfg.methods.clone();
    methods.sort();
    methods.dedup();
    let outcomes = methods
        .into_iter()
        .map(|m| run_method(cfg, point, &c, m))
        .collect::<Result<Vec<_>, _>>()?;
    let dissimilarity = Dissimilarities {
        ab: pair(&outcomes, Method::Analytic, Method::GreedyMargin),
        ac: pair(&outcomes, Method::Analytic, Method::GreedyBer),
        bc: pair(&outcomes, Method::GreedyMargin, Method::GreedyBer),
    };
    Ok(AllocationResult {
        beta: point.beta,
        seed: point.seed,
        psdnr_db: point.profile.mean_db(),
        rate: point.rate,
        outcomes,
        dissimilarity,
    })
}

/// Iteration counts of the two multiplier searches at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecantIterations {
    pub rate: u64,
    pub gen_secant_iters: usize,
    pub secant_iters: usize,
    /// Greedy steps from the closer end, `min(R, n r_max - R) / beta`.
    pub greedy_iters: u64,
}

pub fn run_secant_iterations(
    cfg: &ExperimentConfig,
    point: &Point,
) -> Result<SecantIterations, ExperimentError> {
    let c = point.constraints(cfg.r_max)?;
    let full = point.profile.len() as u64 * cfg.r_max as u64;
    Ok(SecantIterations {
        rate: point.rate,
        gen_secant_iters: solve_continuous(&point.profile, &c, ShapeKind::Log2)?.iterations,
        secant_iters: solve_continuous(&point.profile, &c, ShapeKind::Linear)?.iterations,
        greedy_iters: point.rate.min(full - point.rate) / point.beta as u64,
    })
}

/// Iteration counts of the three integer completions at one rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletionIterations {
    pub rate: u64,
    pub bisection_iters: usize,
    pub secant_iters: usize,
    /// Greedy completion steps of `beta` bits.
    pub greedy_iters: usize,
    /// `|g(0)|` in bits.
    pub g0: u64,
}

pub fn run_completion_iterations(
    cfg: &ExperimentConfig,
    point: &Point,
) -> Result<CompletionIterations, ExperimentError> {
    let c = point.constraints(cfg.r_max)?;
    let sol = solve_continuous(&point.profile, &c, ShapeKind::Log2)?;
    let (_, bisection) = complete_by_root(&sol, &c, CompletionMethod::Bisection)?;
    let (_, secant) = complete_by_root(&sol, &c, CompletionMethod::Secant)?;
    let (_, greedy) = complete_by_greedy(&sol, &point.profile, &c, StepMetric::Margin)?;
    Ok(CompletionIterations {
        rate: point.rate,
        bisection_iters: bisection.iterations,
        secant_iters: secant.iterations,
        greedy_iters: greedy.iterations,
        g0: greedy.residual_bits,
    })
}

/// Results of a sweep, one entry per point in sweep order.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepResults {
    Allocation(Vec<AllocationResult>),
    SecantIterations(Vec<SecantIterations>),
    CompletionIterations(Vec<CompletionIterations>),
}

/// Evaluates every point on a pool of `jobs` threads; order follows `points`.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    points: &[Point],
    jobs: usize,
) -> Result<SweepResults, ExperimentError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ExperimentError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cfg.study {
        Study::Allocation => points
            .par_iter()
            .map(|p| run_allocation(cfg, p))
            .collect::<Result<Vec<_>, _>>()
            .map(SweepResults::Allocation),
        Study::SecantIterations => points
            .par_iter()
            .map(|p| run_secant_iterations(cfg, p))
            .collect::<Result<Vec<_>, _>>()
            .map(SweepResults::SecantIterations),
        Study::CompletionIterations => points
            .par_iter()
            .map(|p| run_completion_iterations(cfg, p))
            .collect::<Result<Vec<_>, _>>()
            .map(SweepResults::CompletionIterations),
    })
}
