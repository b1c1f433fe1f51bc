//! Named experiment configurations with committed seeds.

use crate::completion::CompletionMethod;
use crate::greedy::BerMetric;

use super::config::{
    ChannelConfig, ChannelSource, ExperimentConfig, Method, OracleObjective, RateSetting, Study,
    Sweep, SweepAxis,
};
use super::ExperimentError;

pub const NAMES: [&str; 5] = ["fig2", "fig3", "fig4", "fig6", "table1"];

const PLC_CHANNEL: &str = include_str!("../../configs/plc_15path.json");

fn base(channel: ChannelConfig, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        channel: ChannelSource::Inline(channel),
        seed,
        rate: RateSetting::default(),
        beta: 1,
        betas: None,
        r_max: 15,
        methods: vec![Method::Analytic, Method::GreedyMargin, Method::GreedyBer],
        ber_metric: BerMetric::Delta,
        completion: CompletionMethod::Secant,
        oracle_objective: OracleObjective::Margin,
        sweep: None,
        study: Study::Allocation,
    }
}

/// Rates at the given load percentages of `n * r_max`, rounded down to `beta`.
fn load_grid(n: u64, r_max: u64, beta: u64, percents: impl Iterator<Item = u64>) -> Vec<f64> {
    percents
        .map(|p| {
            let r = n * r_max * p / 100;
            (r - r % beta) as f64
        })
        .collect()
}

pub fn preset(name: &str) -> Result<ExperimentConfig, ExperimentError> {
    let rayleigh = ChannelConfig::Rayleigh {
        n: 1024,
        psdnr_db: 30.0,
    };
    let cfg = match name {
        // r_max 15 admits no beta = 2 grid; the multiplier search ignores beta
        // and greedy_iters at beta = 1 is min(R, n r_max - R)
        "fig2" => ExperimentConfig {
            sweep: Some(Sweep {
                axis: SweepAxis::Rate,
                values: load_grid(1024, 15, 2, (1..=49).map(|k| 2 * k)),
                match_psdnr: false,
            }),
            study: Study::SecantIterations,
            ..base(rayleigh, 2)
        },
        "fig3" => ExperimentConfig {
            betas: Some(vec![1, 2]),
            r_max: 14,
            sweep: Some(Sweep {
                axis: SweepAxis::Rate,
                values: (1..=13).map(|k| (k * 1024) as f64).collect(),
                match_psdnr: true,
            }),
            ..base(rayleigh, 3)
        },
        "fig4" => ExperimentConfig {
            sweep: Some(Sweep {
                axis: SweepAxis::Rate,
                values: load_grid(1024, 15, 1, (1..=19).map(|k| 5 * k)),
                match_psdnr: false,
            }),
            study: Study::CompletionIterations,
            ..base(rayleigh, 4)
        },
        "fig6" => {
            let channel: ChannelSource = serde_json::from_str(PLC_CHANNEL)
                .map_err(|e| ExperimentError::Config(format!("built-in PLC channel: {e}")))?;
            ExperimentConfig {
                channel,
                sweep: Some(Sweep {
                    axis: SweepAxis::PsdnrDb,
                    values: (2..=14).map(|k| (5 * k) as f64).collect(),
                    match_psdnr: false,
                }),
                ..base(rayleigh, 6)
            }
        }
        "table1" => ExperimentConfig {
            rate: RateSetting::Bits(100),
            r_max: 10,
            methods: vec![Method::GreedyMargin, Method::GreedyBer],
            sweep: Some(Sweep {
                axis: SweepAxis::Seed,
                values: (0..50).map(|s| s as f64).collect(),
                match_psdnr: false,
            }),
            ..base(
                ChannelConfig::Rayleigh {
                    n: 20,
                    psdnr_db: 25.0,
                },
                0,
            )
        },
        other => {
            return Err(ExperimentError::Config(format!(
                "unknown preset `{other}`, expected one of {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            let json = serde_json::to_string(&cfg).unwrap();
            assert_eq!(ExperimentConfig::from_json(&json).unwrap(), cfg, "{name}");
        }
        assert!(preset("fig5").is_err());
    }

    #[test]
    fn fig2_grid_is_even() {
        let cfg = preset("fig2").unwrap();
        let values = cfg.sweep.unwrap().values;
        assert_eq!(values.len(), 49);
        assert_eq!(values[0], 306.0);
        assert!(values.iter().all(|v| v % 2.0 == 0.0));
    }

    #[test]
    fn plc_channel_spans_a_wide_range() {
        use crate::experiment::run::resolve_profile;
        let cfg = preset("fig6").unwrap();
        let profile =
            resolve_profile(&cfg.channel.load(std::path::Path::new(".")).unwrap(), 0).unwrap();
        let snr = profile.as_slice();
        let min = snr.iter().copied().fold(f64::INFINITY, f64::min);
        let spread_db = 10.0 * (profile.max() / min).log10();
        assert_eq!(snr.len(), 1024);
        assert!(spread_db > 60.0, "{spread_db}");
    }
}
