//! Batch execution of the two experiments: config points × policies × seeds,
//! merged in a fixed order so the output does not depend on parallelism.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::balancer::Policy;
use crate::config::{Scenario, ScenarioConfig};
use crate::engine::RngStreams;
use crate::geometry::{drop_ues, CellGeometry};
use crate::metrics::{capacity_from_sweep, is_non_monotone, mean_ci, MeanCi, RunResult};
use crate::sim::{run_cell, SimError};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("run failed at {policy}, point {point}, seed {seed}: {source}")]
    Run {
        policy: Policy,
        point: f64,
        seed: u64,
        #[source]
        source: SimError,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub policy: Policy,
    pub result: RunResult,
}

impl RunRecord {
    /// Cell-wide FLR: all late-or-lost frames over all frames.
    pub fn cell_flr(&self) -> Option<f64> {
        let gen: u64 = self.result.ues.iter().map(|u| u.frames_generated).sum();
        let ok: u64 = self.result.ues.iter().map(|u| u.frames_on_time).sum();
        crate::metrics::flr(gen, ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub policy: Policy,
    pub point: f64,
    pub flr: MeanCi,
    pub satisfied: MeanCi,
    pub fr1_usage: MeanCi,
    pub fr2_usage: MeanCi,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub scenario: Scenario,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    /// `(policy, capacity, non_monotone)`; multi-UE sweep only.
    pub capacities: Vec<(Policy, usize, bool)>,
    pub raw_csv: String,
    pub aggregate_csv: String,
    pub summary: String,
}

impl SweepOutput {
    pub fn aggregate(&self, policy: Policy, point: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.policy == policy && a.point == point)
    }

    pub fn capacity(&self, policy: Policy) -> Option<usize> {
        self.capacities.iter().find(|c| c.0 == policy).map(|c| c.1)
    }

    /// Writes `<scenario>_raw.csv`, `<scenario>_aggregate.csv` and
    /// `<scenario>_summary.txt` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, SweepError> {
        let io = |path: &Path, e| SweepError::Io {
            path: path.display().to_string(),
            source: e,
        };
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        let name = self.scenario.name();
        let files = [
            (format!("{name}_raw.csv"), &self.raw_csv),
            (format!("{name}_aggregate.csv"), &self.aggregate_csv),
            (format!("{name}_summary.txt"), &self.summary),
        ];
        let mut written = Vec::new();
        for (file, body) in files {
            let path = dir.join(file);
            std::fs::write(&path, body).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Config points of the scenario: distances or UE counts.
pub fn points(cfg: &ScenarioConfig) -> Vec<f64> {
    match cfg.scenario {
        Scenario::SingleUeDistanceSweep => cfg.distances_m.clone(),
        Scenario::MultiUeCapacitySweep => cfg.n_ues.iter().map(|&n| n as f64).collect(),
    }
}

/// UE distances for one run. Drops depend on the seed and the UE count only,
/// so every policy sees the same cell.
pub fn ue_distances(cfg: &ScenarioConfig, point: f64, seed: u64) -> Vec<f64> {
    match cfg.scenario {
        Scenario::SingleUeDistanceSweep => vec![point],
        Scenario::MultiUeCapacitySweep => {
            let n = point as usize;
            let drop_seed = if cfg.freeze_drops {
                cfg.base_seed
            } else {
                seed
            };
            let mut rng = RngStreams::new(drop_seed).stream(&format!("drop/n{n}"));
            drop_ues(n, &CellGeometry::new(cfg.cell_size_m), &mut rng)
        }
    }
}

pub fn run_seeds(cfg: &ScenarioConfig) -> Vec<u64> {
    (0..cfg.runs as u64)
        .map(|r| cfg.base_seed.wrapping_add(r))
        .collect()
}

/// Runs every (point, policy, seed) combination on `parallel` worker threads.
pub fn run_scenario(cfg: &ScenarioConfig, parallel: usize) -> Result<SweepOutput, SweepError> {
    let pts = points(cfg);
    let seeds = run_seeds(cfg);
    let mut jobs = Vec::new();
    for &point in &pts {
        for &policy in &cfg.policies {
            for &seed in &seeds {
                jobs.push((point, policy, seed));
            }
        }
    }
    let run = |&(point, policy, seed): &(f64, Policy, u64)| {
        let distances = ue_distances(cfg, point, seed);
        run_cell(cfg, policy, &distances, seed)
            .map(|out| RunRecord {
                policy,
                result: out.run_result(point, seed),
            })
            .map_err(|source| SweepError::Run {
                policy,
                point,
                seed,
                source,
            })
    };
    let results: Vec<Result<RunRecord, SweepError>> = if parallel <= 1 {
        jobs.iter().map(run).collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(parallel)
            .build()
            .map_err(|e| SweepError::Pool(e.to_string()))?
            .install(|| jobs.par_iter().map(run).collect())
    };
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(assemble(cfg, &pts, records))
}

fn assemble(cfg: &ScenarioConfig, pts: &[f64], records: Vec<RunRecord>) -> SweepOutput {
    let qos = cfg.traffic.flr_qos;
    let mut aggregates = Vec::new();
    for &point in pts {
        for &policy in &cfg.policies {
            let runs: Vec<&RunRecord> = records
                .iter()
                .filter(|r| r.policy == policy && r.result.point == point)
                .collect();
            let col = |f: &dyn Fn(&RunRecord) -> f64| -> MeanCi {
                let xs: Vec<f64> = runs.iter().map(|r| f(r)).collect();
                mean_ci(&xs).expect("at least one run per point")
            };
            aggregates.push(Aggregate {
                policy,
                point,
                flr: col(&|r| r.cell_flr().unwrap_or(1.0)),
                satisfied: col(&|r| r.result.satisfied_ratio(qos)),
                fr1_usage: col(&|r| r.result.fr1_usage),
                fr2_usage: col(&|r| r.result.fr2_usage),
            });
        }
    }
    let capacities = match cfg.scenario {
        Scenario::SingleUeDistanceSweep => Vec::new(),
        Scenario::MultiUeCapacitySweep => cfg
            .policies
            .iter()
            .map(|&p| {
                let curve: Vec<(usize, f64)> = aggregates
                    .iter()
                    .filter(|a| a.policy == p)
                    .map(|a| (a.point as usize, a.satisfied.mean))
                    .collect();
                (p, capacity_from_sweep(&curve), is_non_monotone(&curve))
            })
            .collect(),
    };
    let header = config_header(cfg);
    SweepOutput {
        scenario: cfg.scenario,
        raw_csv: raw_csv(cfg, &header, &records),
        aggregate_csv: aggregate_csv(cfg, &header, &aggregates),
        summary: summary(cfg, &aggregates, &capacities),
        records,
        aggregates,
        capacities,
    }
}

fn config_header(cfg: &ScenarioConfig) -> String {
    let mut s = format!("# mcsim {}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in cfg.entries() {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn raw_csv(cfg: &ScenarioConfig, header: &str, records: &[RunRecord]) -> String {
    let mut s = header.to_string();
    s.push_str(
        "scenario,policy,point,seed,ue,distance_m,flr,satisfied,fr1_usage,fr2_usage,frames_generated,frames_on_time\n",
    );
    for r in records {
        for ue in &r.result.ues {
            let sat = ue
                .satisfied(cfg.traffic.flr_qos)
                .map_or_else(String::new, |b| b.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                cfg.scenario.name(),
                r.policy,
                r.result.point,
                r.result.seed,
                ue.ue_id,
                ue.distance_m,
                opt(ue.flr()),
                sat,
                r.result.fr1_usage,
                r.result.fr2_usage,
                ue.frames_generated,
                ue.frames_on_time
            );
        }
    }
    s
}

fn aggregate_csv(cfg: &ScenarioConfig, header: &str, aggs: &[Aggregate]) -> String {
    let mut s = header.to_string();
    s.push_str(
        "scenario,policy,point,runs,flr_mean,flr_ci95,satisfied_mean,satisfied_ci95,\
         fr1_usage_mean,fr1_usage_ci95,fr2_usage_mean,fr2_usage_ci95\n",
    );
    for a in aggs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            cfg.scenario.name(),
            a.policy,
            a.point,
            a.flr.n,
            a.flr.mean,
            opt(a.flr.half_width),
            a.satisfied.mean,
            opt(a.satisfied.half_width),
            a.fr1_usage.mean,
            opt(a.fr1_usage.half_width),
            a.fr2_usage.mean,
            opt(a.fr2_usage.half_width)
        );
    }
    s
}

fn pm(m: &MeanCi, scale: f64, digits: usize) -> String {
    match m.half_width {
        Some(h) => format!("{:.*} ± {:.*}", digits, m.mean * scale, digits, h * scale),
        None => format!("{:.*}", digits, m.mean * scale),
    }
}

fn summary(cfg: &ScenarioConfig, aggs: &[Aggregate], caps: &[(Policy, usize, bool)]) -> String {
    let mut s = String::new();
    let point_name = match cfg.scenario {
        Scenario::SingleUeDistanceSweep => "distance_m",
        Scenario::MultiUeCapacitySweep => "n_ues",
    };
    let _ = writeln!(
        s,
        "{}: {} runs of {} s per point, base seed {}",
        cfg.scenario.name(),
        cfg.runs,
        cfg.sim_time,
        cfg.base_seed
    );
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<20} {:>10} {:>22} {:>18} {:>18} {:>18}",
        "policy", point_name, "FLR", "satisfied", "FR1 usage %", "FR2 usage %"
    );
    for a in aggs {
        let _ = writeln!(
            s,
            "{:<20} {:>10} {:>22} {:>18} {:>18} {:>18}",
            a.policy.name(),
            a.point,
            match a.flr.half_width {
                Some(h) => format!("{:.2e} ± {:.1e}", a.flr.mean, h),
                None => format!("{:.2e}", a.flr.mean),
            },
            pm(&a.satisfied, 1.0, 3),
            pm(&a.fr1_usage, 100.0, 2),
            pm(&a.fr2_usage, 100.0, 2),
        );
    }
    if !caps.is_empty() {
        let _ = writeln!(s);
        for &(p, c, non_monotone) in caps {
            let note = if non_monotone {
                " (satisfied-ratio curve is non-monotone)"
            } else {
                ""
            };
            let _ = writeln!(s, "capacity {:<20} {c}{note}", p.name());
        }
    }
    s
}
