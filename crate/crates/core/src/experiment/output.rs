//! CSV and JSON rendering of run results.
//!
//! Everything is rendered to memory first so a failed run leaves no
//! partial output behind.

use std::fs;
use std::path::Path as FsPath;

use serde::Serialize;
use serde_json::json;

use crate::channel::{linear_to_db, SnrProfile, RNG_ALGORITHM};

use super::config::{ChannelSummary, ExperimentConfig};
use super::run::{AllocationResult, SweepResults};
use super::ExperimentError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

const SUMMARY_HEADER: [&str; 12] = [
    "beta",
    "seed",
    "psdnr_db",
    "R",
    "method",
    "margin_db",
    "weighted_ber",
    "iterations",
    "valid",
    "mu_ab",
    "mu_ac",
    "mu_bc",
];

fn csv_string<F>(header: &[&str], fill: F) -> Result<String, ExperimentError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let render = |e: csv::Error| ExperimentError::Io(e.to_string());
    w.write_record(header).map_err(render)?;
    fill(&mut w).map_err(render)?;
    let bytes = w
        .into_inner()
        .map_err(|e| ExperimentError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn summary_rows(w: &mut csv::Writer<Vec<u8>>, results: &[AllocationResult]) -> csv::Result<()> {
    for r in results {
        for o in &r.outcomes {
            w.write_record([
                r.beta.to_string(),
                r.seed.to_string(),
                r.psdnr_db.to_string(),
                r.rate.to_string(),
                o.method.name().to_string(),
                o.report.system_margin_db.to_string(),
                o.report.weighted_ber.to_string(),
                o.iterations.to_string(),
                o.report.validity_flag.to_string(),
                opt(r.dissimilarity.ab),
                opt(r.dissimilarity.ac),
                opt(r.dissimilarity.bc),
            ])?;
        }
    }
    Ok(())
}

fn report_json<T: Serialize>(
    cfg: &ExperimentConfig,
    results: &T,
) -> Result<String, ExperimentError> {
    let value = json!({
        "config": cfg,
        "seed": cfg.seed,
        "rng_algorithm": RNG_ALGORITHM,
        "results": results,
    });
    let mut s =
        serde_json::to_string_pretty(&value).map_err(|e| ExperimentError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// `allocation_<method>.csv` per method, `summary.csv` and `report.json`.
pub fn allocation_files(
    cfg: &ExperimentConfig,
    result: &AllocationResult,
) -> Result<Vec<OutputFile>, ExperimentError> {
    let mut files = Vec::new();
    for o in &result.outcomes {
        let contents = csv_string(&["channel", "bits"], |w| {
            for (i, b) in o.bits.iter().enumerate() {
                w.write_record([i.to_string(), b.to_string()])?;
            }
            Ok(())
        })?;
        files.push(OutputFile {
            name: format!("allocation_{}.csv", o.method.name()),
            contents,
        });
    }
    files.push(OutputFile {
        name: "summary.csv".into(),
        contents: csv_string(&SUMMARY_HEADER, |w| {
            summary_rows(w, std::slice::from_ref(result))
        })?,
    });
    files.push(OutputFile {
        name: "report.json".into(),
        contents: report_json(cfg, result)?,
    });
    Ok(files)
}

/// One CSV for the sweep (rows in sweep order) and `report.json`.
pub fn sweep_files(
    cfg: &ExperimentConfig,
    results: &SweepResults,
) -> Result<Vec<OutputFile>, ExperimentError> {
    let (name, contents) = match results {
        SweepResults::Allocation(rs) => (
            "sweep.csv",
            csv_string(&SUMMARY_HEADER, |w| summary_rows(w, rs))?,
        ),
        SweepResults::SecantIterations(rs) => (
            "secant_iterations.csv",
            csv_string(
                &["R", "gen_secant_iters", "secant_iters", "greedy_iters"],
                |w| {
                    for r in rs {
                        w.write_record([
                            r.rate.to_string(),
                            r.gen_secant_iters.to_string(),
                            r.secant_iters.to_string(),
                            r.greedy_iters.to_string(),
                        ])?;
                    }
                    Ok(())
                },
            )?,
        ),
        SweepResults::CompletionIterations(rs) => (
            "completion_iterations.csv",
            csv_string(
                &["R", "bisection_iters", "secant_iters", "greedy_iters", "g0"],
                |w| {
                    for r in rs {
                        w.write_record([
                            r.rate.to_string(),
                            r.bisection_iters.to_string(),
                            r.secant_iters.to_string(),
                            r.greedy_iters.to_string(),
                            r.g0.to_string(),
                        ])?;
                    }
                    Ok(())
                },
            )?,
        ),
    };
    let report = match results {
        SweepResults::Allocation(rs) => report_json(cfg, rs)?,
        SweepResults::SecantIterations(rs) => report_json(cfg, rs)?,
        SweepResults::CompletionIterations(rs) => report_json(cfg, rs)?,
    };
    Ok(vec![
        OutputFile {
            name: name.into(),
            contents,
        },
        OutputFile {
            name: "report.json".into(),
            contents: report,
        },
    ])
}

/// `channel.csv` with `channel,snr,snr_db` and a `channel.json` sidecar.
pub fn channel_files(
    cfg: &ExperimentConfig,
    profile: &SnrProfile,
) -> Result<Vec<OutputFile>, ExperimentError> {
    let contents = csv_string(&["channel", "snr", "snr_db"], |w| {
        for (i, s) in profile.as_slice().iter().enumerate() {
            w.write_record([i.to_string(), s.to_string(), linear_to_db(*s).to_string()])?;
        }
        Ok(())
    })?;
    let sidecar = json!({
        "config": cfg,
        "seed": cfg.seed,
        "rng_algorithm": RNG_ALGORITHM,
        "channel": ChannelSummary::of(profile),
    });
    let mut sidecar =
        serde_json::to_string_pretty(&sidecar).map_err(|e| ExperimentError::Io(e.to_string()))?;
    sidecar.push('\n');
    Ok(vec![
        OutputFile {
            name: "channel.csv".into(),
            contents,
        },
        OutputFile {
            name: "channel.json".into(),
            contents: sidecar,
        },
    ])
}

pub fn write_files(dir: &FsPath, files: &[OutputFile]) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    for f in files {
        fs::write(dir.join(&f.name), &f.contents)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::run::{base_point, run_allocation};

    #[test]
    fn smoke_two_channel_margin() {
        let cfg = ExperimentConfig::from_json(
            r#"{"channel": {"type": "explicit", "snr": [100, 10]}, "rate": 4, "r_max": 4,
                "methods": ["greedy_margin"]}"#,
        )
        .unwrap();
        let p = base_point(&cfg, FsPath::new(".")).unwrap();
        let files = allocation_files(&cfg, &run_allocation(&cfg, &p).unwrap()).unwrap();
        let names: Vec<_> = files.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(
            names,
            ["allocation_greedy_margin.csv", "summary.csv", "report.json"]
        );
        // the fourth bit costs 15/100 on channel 0 but only 1/10 on channel 1
        assert_eq!(files[0].contents, "channel,bits\n0,3\n1,1\n");
        let report: serde_json::Value = serde_json::from_str(&files[2].contents).unwrap();
        assert_eq!(report["config"]["rate"], 4);
        assert!(report["rng_algorithm"]
            .as_str()
            .unwrap()
            .starts_with("pcg64"));
        let summary = &files[1].contents;
        assert!(summary.starts_with("beta,seed,psdnr_db,R,method,margin_db,"));
        assert_eq!(summary.lines().count(), 2);
    }

    #[test]
    fn channel_csv_round_trips() {
        let profile = SnrProfile::new(vec![0.5, 123.456, 1.0e7]).unwrap();
        let cfg = ExperimentConfig::from_json(
            r#"{"channel": {"type": "explicit", "snr": [0.5, 123.456, 1e7]}}"#,
        )
        .unwrap();
        let files = channel_files(&cfg, &profile).unwrap();
        let mut rd = csv::Reader::from_reader(files[0].contents.as_bytes());
        for (row, &s) in rd.records().zip(profile.as_slice()) {
            let row = row.unwrap();
            let snr: f64 = row[1].parse().unwrap();
            let db: f64 = row[2].parse().unwrap();
            assert_eq!(snr, s);
            let back = 10f64.powf(db / 10.0);
            assert!(((back - s) / s).abs() < 1e-9);
        }
    }
}
