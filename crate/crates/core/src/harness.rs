//! Reproducible experiment drivers with CSV and JSON reports.
//!
//! Every run is a pure function of the configuration and its seed; seeds run
//! in parallel and rows are merged back in seed order, so reports are
//! byte-stable.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arboreal::{
    access_to_insertion, geometry_to_tree_offline, random_execution, sort_via_bst, tree_to_geometry,
};
use crate::greedy::greedy_execute;
use crate::model::{is_satisfied, Key, PointSet};
use crate::patterns::{bound_report, contains_pattern, inverse_ackermann, BinaryMatrix, BoundKind, Pattern};
use crate::sequences::{concentrate, gen_deque, random_mixed, random_permutation_access, rng_for};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// Output-restricted deques against `24m + 12n`.
    RestrictedLinear,
    /// General deques against `m 2^alpha(m, m + n) + n`, ratio only.
    GeneralQuasilinear,
    /// Random permutations through the access to insertion to sorting chain.
    Lowerbound,
    /// Both converters on small random inputs.
    Roundtrip,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::RestrictedLinear => "restricted-linear",
            Experiment::GeneralQuasilinear => "general-quasilinear",
            Experiment::Lowerbound => "lowerbound",
            Experiment::Roundtrip => "roundtrip",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: u32,
    /// Operations per run; ignored by the lower-bound experiment, which uses
    /// `n`. For round trips, `n` and `m` are upper limits drawn per seed.
    pub m: u32,
    pub seeds: Vec<u64>,
    pub restricted: bool,
    pub output: Option<PathBuf>,
    /// General runs with more rows than this skip the P5 search; the row
    /// records that it was skipped.
    pub pattern_check_max_rows: u32,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, n: u32, m: u32, seeds: Vec<u64>) -> Self {
        ExperimentConfig {
            experiment,
            n,
            m,
            seeds,
            restricted: experiment == Experiment::RestrictedLinear,
            output: None,
            pattern_check_max_rows: 4000,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.n == 0 || self.m == 0 {
            return bad("sizes must be at least 1");
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is needed");
        }
        if self.restricted != (self.experiment == Experiment::RestrictedLinear) {
            return bad("`restricted` must be set exactly for restricted-linear");
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("{experiment} cannot be run by this driver")]
    WrongExperiment { experiment: &'static str },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One seed's outcome. Checks that do not apply to an experiment are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub n: u32,
    pub m: u32,
    pub cost: u64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    /// `cost <= bound`, where the bound is absolute.
    pub within_bound: Option<bool>,
    /// Ones of the execution matrix below `12 (u + v)`.
    pub matrix_bound: Option<bool>,
    pub satisfied: Option<bool>,
    pub pattern_checked: bool,
    pub pattern_avoided: Option<bool>,
    pub sorted: Option<bool>,
    pub cost_preserved: Option<bool>,
    pub per_n_log_n: Option<f64>,
    pub pass: bool,
}

impl RunRow {
    fn new(seed: u64, n: u32, m: u32) -> Self {
        RunRow {
            seed,
            n,
            m,
            cost: 0,
            bound: None,
            ratio: None,
            within_bound: None,
            matrix_bound: None,
            satisfied: None,
            pattern_checked: false,
            pattern_avoided: None,
            sorted: None,
            cost_preserved: None,
            per_n_log_n: None,
            pass: false,
        }
    }

    /// Names of the checks that came out false.
    pub fn failed_checks(&self) -> Vec<&'static str> {
        [
            ("within_bound", self.within_bound),
            ("matrix_bound", self.matrix_bound),
            ("satisfied", self.satisfied),
            ("pattern_avoided", self.pattern_avoided),
            ("sorted", self.sorted),
            ("cost_preserved", self.cost_preserved),
        ]
        .into_iter()
        .filter(|(_, c)| *c == Some(false))
        .map(|(name, _)| name)
        .collect()
    }

    fn settle(mut self) -> Self {
        self.pass = self.failed_checks().is_empty();
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub seed: u64,
    pub message: String,
    /// Command line that repeats just this run.
    pub replay: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub experiment: Experiment,
    pub runs: usize,
    pub failures: usize,
    pub mean_cost: f64,
    pub max_ratio: Option<f64>,
    pub mean_ratio: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<RunRow>,
    pub failures: Vec<Failure>,
    pub aggregate: Aggregate,
}

impl ExperimentReport {
    fn assemble(config: &ExperimentConfig, results: Vec<(RunRow, Option<String>)>) -> Self {
        let mut rows = Vec::with_capacity(results.len());
        let mut failures = Vec::new();
        for (row, err) in results {
            let message = match err {
                Some(e) => Some(e),
                None if !row.pass => Some(format!("failed: {}", row.failed_checks().join(", "))),
                None => None,
            };
            if let Some(message) = message {
                failures.push(Failure {
                    seed: row.seed,
                    message,
                    replay: replay_command(config, row.seed),
                });
            }
            rows.push(row);
        }
        let ratios: Vec<f64> = rows.iter().filter_map(|r| r.ratio).collect();
        let aggregate = Aggregate {
            experiment: config.experiment,
            runs: rows.len(),
            failures: failures.len(),
            mean_cost: rows.iter().map(|r| r.cost as f64).sum::<f64>() / rows.len().max(1) as f64,
            max_ratio: ratios.iter().copied().reduce(f64::max),
            mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
            pass: failures.is_empty(),
        };
        ExperimentReport {
            config: config.clone(),
            rows,
            failures,
            aggregate,
        }
    }

    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Configuration, aggregate and failures; the rows go to the CSV.
    pub fn to_json(&self) -> Result<String, HarnessError> {
        #[derive(Serialize)]
        struct Summary<'a> {
            config: &'a ExperimentConfig,
            aggregate: &'a Aggregate,
            failures: &'a [Failure],
        }
        let mut s = serde_json::to_string_pretty(&Summary {
            config: &self.config,
            aggregate: &self.aggregate,
            failures: &self.failures,
        })?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `<prefix>.csv` and `<prefix>.json`.
    pub fn write(&self, prefix: &Path) -> Result<(), HarnessError> {
        std::fs::write(prefix.with_extension("csv"), self.to_csv()?)?;
        std::fs::write(prefix.with_extension("json"), self.to_json()?)?;
        Ok(())
    }
}

pub fn replay_command(cfg: &ExperimentConfig, seed: u64) -> String {
    match cfg.experiment {
        Experiment::RestrictedLinear | Experiment::GeneralQuasilinear => format!(
            "geobst bench-deque --n {} --m {} --seed {seed}{}",
            cfg.n,
            cfg.m,
            if cfg.restricted { " --restricted" } else { "" }
        ),
        Experiment::Lowerbound => format!("geobst bench-lowerbound --n {} --seed {seed}", cfg.n),
        Experiment::Roundtrip => format!("geobst roundtrip --n {} --m {} --seed {seed}", cfg.n, cfg.m),
    }
}

fn run_all(cfg: &ExperimentConfig, one: impl Fn(u64) -> (RunRow, Option<String>) + Sync) -> ExperimentReport {
    let results: Vec<(RunRow, Option<String>)> = cfg.seeds.par_iter().map(|&s| one(s)).collect();
    ExperimentReport::assemble(cfg, results)
}

fn finish(report: ExperimentReport) -> Result<ExperimentReport, HarnessError> {
    if let Some(out) = &report.config.output {
        report.write(out)?;
    }
    Ok(report)
}

/// Deque sequences, concentrated, run through GREEDY and checked for
/// satisfaction, pattern avoidance and the cost bound.
pub fn run_deque_bound(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    if !matches!(
        cfg.experiment,
        Experiment::RestrictedLinear | Experiment::GeneralQuasilinear
    ) {
        return Err(HarnessError::WrongExperiment {
            experiment: cfg.experiment.name(),
        });
    }
    let (n, m) = (cfg.n, cfg.m);
    let report = run_all(cfg, |seed| {
        let mut row = RunRow::new(seed, n, m);
        let seq = match concentrate(&gen_deque(n, m as usize, seed, cfg.restricted)) {
            Ok(s) => s,
            Err(e) => return (row, Some(format!("concentration failed: {e}"))),
        };
        let run = greedy_execute(Arc::new(seq));
        row.cost = run.cost as u64;
        row.satisfied = Some(is_satisfied(&run.points).unwrap_or(false));
        let matrix = BinaryMatrix::from_pointset(&run.points);
        // the P4 sweep is near-linear; the P5 search is quadratic in rows
        if cfg.restricted || m <= cfg.pattern_check_max_rows {
            let p = if cfg.restricted { Pattern::p4() } else { Pattern::p5() };
            row.pattern_checked = true;
            row.pattern_avoided = Some(contains_pattern(&matrix, &p.upward()).is_none());
        }
        if cfg.restricted {
            let bound = 24.0 * m as f64 + 12.0 * n as f64;
            row.bound = Some(bound);
            row.ratio = Some(row.cost as f64 / bound);
            row.within_bound = Some(row.cost as f64 <= bound);
            row.matrix_bound = bound_report(&matrix, BoundKind::P4Linear).pass;
        } else {
            let a = inverse_ackermann(m as u64, m as u64 + n as u64);
            let bound = m as f64 * 2f64.powi(a as i32) + n as f64;
            row.bound = Some(bound);
            row.ratio = Some(row.cost as f64 / bound);
        }
        (row.settle(), None)
    });
    finish(report)
}

pub fn log2_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).log2()).sum()
}

/// GREEDY on a random permutation, read as insertions, then sorted by
/// replaying the insertion geometry as a tree.
pub fn run_lowerbound(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    if cfg.experiment != Experiment::Lowerbound {
        return Err(HarnessError::WrongExperiment {
            experiment: cfg.experiment.name(),
        });
    }
    let n = cfg.n;
    let report = run_all(cfg, |seed| {
        let mut row = RunRow::new(seed, n, n);
        let run = greedy_execute(Arc::new(random_permutation_access(n, seed)));
        row.cost = run.cost as u64;
        let floor = log2_factorial(n);
        row.bound = Some(floor);
        if n > 1 {
            row.ratio = Some(row.cost as f64 / floor);
            row.per_n_log_n = Some(row.cost as f64 / (n as f64 * (n as f64).log2()));
        }
        let ins = match access_to_insertion(&run.points) {
            Ok(p) => p,
            Err(e) => return (row, Some(format!("conversion to insertions failed: {e}"))),
        };
        row.cost_preserved = Some(ins.len() == run.cost);
        row.satisfied = Some(is_satisfied(&ins).unwrap_or(false));
        match sort_via_bst(&ins) {
            Ok(keys) => row.sorted = Some(keys.iter().copied().eq((1..=n).map(Key))),
            Err(e) => return (row, Some(format!("sorting failed: {e}"))),
        }
        (row.settle(), None)
    });
    finish(report)
}

fn dump_mismatch(a: &PointSet, b: &PointSet) -> String {
    format!(
        "point sets differ\n--- expected\n{}--- got\n{}",
        a.to_text(),
        b.to_text()
    )
}

/// One round trip each way for a seed: GREEDY output to tree and back, and a
/// random tree execution to geometry and back.
fn roundtrip_one(seed: u64, n_max: u32, m_max: u32) -> (RunRow, Option<String>) {
    let mut rng = rng_for(seed ^ 0x5eed_5eed_5eed_5eed);
    let n = rng.gen_range(1..=n_max);
    let m = rng.gen_range(1..=m_max);
    let mut row = RunRow::new(seed, n, m);
    let seq = random_mixed(n, m as usize, seed);

    let run = greedy_execute(Arc::new(seq.clone()));
    row.cost = run.cost as u64;
    let e = match geometry_to_tree_offline(&run.points) {
        Ok(e) => e,
        Err(err) => return (row, Some(format!("geometry to tree failed: {err}"))),
    };
    let touched = e.replay().map(|r| r.touched).ok();
    match tree_to_geometry(&e) {
        Ok(back) if back == run.points => {}
        Ok(back) => return (row, Some(dump_mismatch(&run.points, &back))),
        Err(err) => return (row, Some(format!("tree to geometry failed: {err}"))),
    }

    let exec = random_execution(&seq, seed);
    let ps = match tree_to_geometry(&exec) {
        Ok(p) => p,
        Err(err) => return (row, Some(format!("random execution rejected: {err}"))),
    };
    row.satisfied = Some(is_satisfied(&ps).unwrap_or(false));
    let again = geometry_to_tree_offline(&ps).and_then(|e| tree_to_geometry(&e));
    match again {
        Ok(back) if back == ps => {}
        Ok(back) => return (row, Some(dump_mismatch(&ps, &back))),
        Err(err) => return (row, Some(format!("second round trip failed: {err}"))),
    }
    let exec_touched = exec.replay().map(|r| r.touched).ok();
    row.cost_preserved = Some(touched == Some(run.cost) && exec_touched == Some(ps.len()));
    (row.settle(), None)
}

pub fn run_roundtrip(cfg: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    cfg.validate()?;
    if cfg.experiment != Experiment::Roundtrip {
        return Err(HarnessError::WrongExperiment {
            experiment: cfg.experiment.name(),
        });
    }
    let report = run_all(cfg, |seed| roundtrip_one(seed, cfg.n, cfg.m));
    finish(report)
}
