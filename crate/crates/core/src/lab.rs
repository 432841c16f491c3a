//! Replicated experiments over grids of `(n, p, m, population)` cells.
//!
//! Replicate `r` of every cell draws its matrix from stream `r` of the master
//! seed, so any replicate can be recomputed on its own. Cells run one after
//! another; replicates inside a cell run in parallel and are collected in
//! replicate order.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{normalize, ratio_target, GumbelLimit, Sidedness, MAX_ORDER};
use crate::error::{Error, Result};
use crate::hypotest::LEVELS;
use crate::populations::{sample_matrix, PopulationSpec};
use crate::rng::SeedSpec;
use crate::statcore::{enumeration_cost, max_entry_with, EnumerationOptions, DEFAULT_COST_CEILING};

/// Master seed used when a config does not name one.
pub const DEFAULT_MASTER_SEED: u64 = 20_170_601;

/// Default ceiling on the summed enumeration cost of a whole experiment.
pub const DEFAULT_TOTAL_BUDGET: u64 = 1_000_000_000_000;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TIMING_FILE: &str = "timing.json";
const RECORDS_HEADER: &str = "cell_id,replicate,w_abs,w_signed,t_value,ratio";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    pub n: usize,
    pub p: usize,
    pub m: usize,
    pub spec: PopulationSpec,
    #[serde(default)]
    pub sided: Sidedness,
}

fn default_seed() -> u64 {
    DEFAULT_MASTER_SEED
}

/// 101 equally spaced points on `[−6, 12]`.
pub fn default_z_grid() -> Vec<f64> {
    (0..=100).map(|i| -6.0 + 18.0 * i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Vec<CellConfig>,
    pub reps: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default = "default_z_grid")]
    pub z_grid: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    /// Summed cost ceiling in multiply-adds; defaults to [`DEFAULT_TOTAL_BUDGET`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_total_cost: Option<u64>,
    /// Per-enumeration ceiling; defaults to [`DEFAULT_COST_CEILING`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_ceiling: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(grid: Vec<CellConfig>, reps: u64, master_seed: u64) -> Self {
        Self {
            grid,
            reps,
            master_seed,
            z_grid: default_z_grid(),
            output_path: None,
            max_total_cost: None,
            cost_ceiling: None,
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    fn cell_ceiling(&self) -> u64 {
        self.cost_ceiling.unwrap_or(DEFAULT_COST_CEILING)
    }

    /// Checks shapes, parameters and the compute budget without running anything.
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::param("reps", "must be at least 1"));
        }
        if self.grid.is_empty() {
            return Err(Error::param("grid", "must contain at least one cell"));
        }
        if self.z_grid.is_empty() || self.z_grid.iter().any(|z| !z.is_finite()) {
            return Err(Error::param("z_grid", "must be a non-empty list of finite values"));
        }
        let mut total: u64 = 0;
        for (id, cell) in self.grid.iter().enumerate() {
            let wrap = |e: Error| Error::Cell { cell: id, source: Box::new(e) };
            if cell.p < 3 {
                return Err(wrap(Error::param("p", format!("must be at least 3, got {}", cell.p))));
            }
            if cell.m < 2 || cell.m > cell.p || cell.m > MAX_ORDER {
                return Err(wrap(Error::param(
                    "m",
                    format!("need 2 <= m <= min(p, {MAX_ORDER}), got m = {} with p = {}", cell.m, cell.p),
                )));
            }
            if cell.n == 0 {
                return Err(wrap(Error::param("n", "must be at least 1")));
            }
            cell.spec.validate().map_err(wrap)?;
            let cost = enumeration_cost(cell.p, cell.m, cell.n);
            if cost.saturated || cost.multiply_adds > self.cell_ceiling() {
                return Err(wrap(Error::Budget {
                    estimated: cost.multiply_adds,
                    ceiling: self.cell_ceiling(),
                }));
            }
            total = total.saturating_add(cost.multiply_adds.saturating_mul(self.reps));
        }
        let budget = self.max_total_cost.unwrap_or(DEFAULT_TOTAL_BUDGET);
        if total > budget {
            return Err(Error::Budget {
                estimated: total,
                ceiling: budget,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub cell_id: usize,
    pub replicate: u64,
    pub w_abs: f64,
    pub w_signed: f64,
    /// Normalized statistic of the cell's sidedness (`w_abs` for two-sided cells).
    pub t_value: f64,
    /// Statistic of the cell's sidedness divided by `√(log p)`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionRate {
    pub level: f64,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub cell_id: usize,
    pub cell: CellConfig,
    pub reps: u64,
    /// Empirical CDF of `t_value` at each point of the config's `z_grid`.
    pub ecdf: Vec<f64>,
    pub ks_distance: f64,
    pub type1: Vec<RejectionRate>,
    pub ratio_mean: f64,
    pub ratio_sd: f64,
    pub ratio_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Summary {
    config: ExperimentConfig,
    cells: Vec<CellSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
    pub records: Vec<ReplicateRecord>,
    /// Wall-clock seconds per cell. Persisted apart from the summary so that
    /// the summary stays byte-reproducible.
    pub runtime_seconds: Vec<f64>,
}

impl ExperimentReport {
    pub fn records_for(&self, cell_id: usize) -> impl Iterator<Item = &ReplicateRecord> {
        self.records.iter().filter(move |r| r.cell_id == cell_id)
    }
}

/// Exact one-sample Kolmogorov–Smirnov distance between the sample and `limit`.
pub fn ks_distance(samples: &[f64], limit: &GumbelLimit) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::param("samples", "KS distance needs at least one sample"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(Error::Domain("KS distance of NaN samples".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = limit.cdf(x);
        d = d.max((i + 1) as f64 / r - f).max(f - i as f64 / r);
    }
    Ok(d)
}

/// Empirical CDF of `samples` at each grid point.
pub fn ecdf_on_grid(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let r = sorted.len() as f64;
    grid.iter()
        .map(|&z| sorted.partition_point(|&t| t <= z) as f64 / r)
        .collect()
}

fn run_replicate(cell_id: usize, cell: &CellConfig, master_seed: u64, rep: u64, opts: &EnumerationOptions) -> Result<ReplicateRecord> {
    let x = sample_matrix(&cell.spec, cell.n, cell.p, SeedSpec::new(master_seed, rep))?;
    let stat = max_entry_with(&x, cell.m, opts)?;
    let w = match cell.sided {
        Sidedness::TwoSided => stat.w_abs,
        Sidedness::OneSided => stat.w_signed.max(0.0),
    };
    let t_value = normalize(w, cell.n, cell.p, cell.m)?.t_value;
    Ok(ReplicateRecord {
        cell_id,
        replicate: rep,
        w_abs: stat.w_abs,
        w_signed: stat.w_signed,
        t_value,
        ratio: w / (cell.p as f64).ln().sqrt(),
    })
}

fn summarize(cell_id: usize, cell: &CellConfig, records: &[ReplicateRecord], z_grid: &[f64]) -> Result<CellSummary> {
    let limit = GumbelLimit::new(cell.m, cell.sided)?;
    let ts: Vec<f64> = records.iter().map(|r| r.t_value).collect();
    let ecdf = ecdf_on_grid(&ts, z_grid);
    let grid_sup = z_grid
        .iter()
        .zip(&ecdf)
        .map(|(&z, &f)| (f - limit.cdf(z)).abs())
        .fold(0.0, f64::max);
    let ks = ks_distance(&ts, &limit)?.max(grid_sup);
    let reps = records.len() as f64;
    let type1 = LEVELS
        .iter()
        .map(|&level| RejectionRate {
            level,
            rate: ts.iter().filter(|&&t| limit.sf(t) < level).count() as f64 / reps,
        })
        .collect();
    let ratio_mean = records.iter().map(|r| r.ratio).sum::<f64>() / reps;
    let ratio_sd = if records.len() > 1 {
        (records.iter().map(|r| (r.ratio - ratio_mean).powi(2)).sum::<f64>() / (reps - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(CellSummary {
        cell_id,
        cell: cell.clone(),
        reps: records.len() as u64,
        ecdf,
        ks_distance: ks,
        type1,
        ratio_mean,
        ratio_sd,
        ratio_target: ratio_target(cell.m),
    })
}

/// Runs every cell and, when `output_path` is set, persists the report there.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let opts = EnumerationOptions {
        cost_ceiling: config.cell_ceiling(),
    };
    let mut cells = Vec::with_capacity(config.grid.len());
    let mut records = Vec::with_capacity(config.grid.len() * config.reps as usize);
    let mut runtime_seconds = Vec::with_capacity(config.grid.len());
    for (cell_id, cell) in config.grid.iter().enumerate() {
        let started = Instant::now();
        let cell_records = (0..config.reps)
            .into_par_iter()
            .map(|rep| run_replicate(cell_id, cell, config.master_seed, rep, &opts))
            .collect::<Result<Vec<_>>>()
            .and_then(|recs| Ok((summarize(cell_id, cell, &recs, &config.z_grid)?, recs)))
            .map_err(|e| Error::Cell { cell: cell_id, source: Box::new(e) })?;
        cells.push(cell_records.0);
        records.extend(cell_records.1);
        runtime_seconds.push(started.elapsed().as_secs_f64());
    }
    let report = ExperimentReport {
        config: config.clone(),
        cells,
        records,
        runtime_seconds,
    };
    if let Some(path) = &config.output_path {
        persist(&report, path)?;
    }
    Ok(report)
}

/// [`run_experiment`] on a dedicated pool of `workers` threads.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    pool.install(|| run_experiment(config))
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn records_csv(records: &[ReplicateRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.cell_id,
            r.replicate,
            fmt17(r.w_abs),
            fmt17(r.w_signed),
            fmt17(r.t_value),
            fmt17(r.ratio)
        ));
    }
    out
}

fn write(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes `records.csv`, `summary.json` and `timing.json` under `dir`.
pub fn persist(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join(RECORDS_FILE), records_csv(&report.records).as_bytes())?;
    let summary = Summary {
        config: report.config.clone(),
        cells: report.cells.clone(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(&dir.join(SUMMARY_FILE), format!("{json}\n").as_bytes())?;
    let timing = serde_json::to_string_pretty(&report.runtime_seconds).expect("timings serialize");
    write(&dir.join(TIMING_FILE), format!("{timing}\n").as_bytes())
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Reads back a report written by [`persist`].
pub fn load(dir: impl AsRef<Path>) -> Result<ExperimentReport> {
    let dir = dir.as_ref();
    let summary_path = dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&summary_path).map_err(|e| Error::io(&summary_path, e))?;
    let summary: Summary = serde_json::from_str(&text).map_err(|e| format_err(&summary_path, e.to_string()))?;

    let timing_path = dir.join(TIMING_FILE);
    let text = fs::read_to_string(&timing_path).map_err(|e| Error::io(&timing_path, e))?;
    let runtime_seconds: Vec<f64> = serde_json::from_str(&text).map_err(|e| format_err(&timing_path, e.to_string()))?;

    let records_path = dir.join(RECORDS_FILE);
    let text = fs::read_to_string(&records_path).map_err(|e| Error::io(&records_path, e))?;
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| format_err(&records_path, e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != RECORDS_HEADER {
        return Err(format_err(&records_path, format!("expected header `{RECORDS_HEADER}`")));
    }
    let records = reader
        .deserialize()
        .collect::<std::result::Result<Vec<ReplicateRecord>, _>>()
        .map_err(|e| format_err(&records_path, e.to_string()))?;
    Ok(ExperimentReport {
        config: summary.config,
        cells: summary.cells,
        records,
        runtime_seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cell(p: usize) -> CellConfig {
        CellConfig {
            n: 40,
            p,
            m: 2,
            spec: PopulationSpec::standard_normal(),
            sided: Sidedness::TwoSided,
        }
    }

    #[test]
    fn ks_of_stratified_quantiles_is_half_spacing() {
        let limit = GumbelLimit::two_sided(2).unwrap();
        let r = 1000;
        let samples: Vec<f64> = (1..=r)
            .map(|i| limit.quantile((i as f64 - 0.5) / r as f64).unwrap())
            .collect();
        let d = ks_distance(&samples, &limit).unwrap();
        assert!((d - 0.0005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn ks_of_single_median_sample() {
        let limit = GumbelLimit::two_sided(3).unwrap();
        let med = limit.quantile(0.5).unwrap();
        assert!((ks_distance(&[med], &limit).unwrap() - 0.5).abs() < 1e-12);
        assert!(ks_distance(&[], &limit).is_err());
    }

    #[test]
    fn ks_of_draws_from_the_limit() {
        use rand::Rng;
        let limit = GumbelLimit::two_sided(2).unwrap();
        for stream in 0..2 {
            let mut rng = SeedSpec::new(31, stream).lane(0);
            let samples: Vec<f64> = (0..2000)
                .map(|_| limit.quantile(rng.random_range(1e-12..1.0)).unwrap())
                .collect();
            assert!(ks_distance(&samples, &limit).unwrap() <= 0.04);
        }
    }

    #[test]
    fn ecdf_counts_ties_inclusively() {
        assert_eq!(ecdf_on_grid(&[1.0, 2.0, 2.0, 3.0], &[0.0, 2.0, 5.0]), vec![0.0, 0.75, 1.0]);
    }

    #[test]
    fn single_replicate_cell() {
        let config = ExperimentConfig::new(vec![small_cell(10)], 1, 4);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.records.len(), 1);
        let t1 = report.records[0].t_value;
        let limit = GumbelLimit::two_sided(2).unwrap();
        let f = limit.cdf(t1);
        let cell = &report.cells[0];
        assert!((cell.ks_distance - f.max(1.0 - f)).abs() < 1e-15);
        // the grid-only supremum never exceeds the exact distance
        let grid_sup = config
            .z_grid
            .iter()
            .map(|&z| ((if t1 <= z { 1.0 } else { 0.0 }) - limit.cdf(z)).abs())
            .fold(0.0, f64::max);
        assert!(grid_sup <= cell.ks_distance);
        assert_eq!(cell.ratio_sd, 0.0);
    }

    #[test]
    fn records_obey_their_invariants() {
        let mut one = small_cell(12);
        one.sided = Sidedness::OneSided;
        let config = ExperimentConfig::new(vec![small_cell(8), one], 30, 9);
        let report = run_experiment(&config).unwrap();
        assert_eq!(report.records.len(), 60);
        for r in report.records_for(0) {
            let lp = 8f64.ln();
            assert_eq!(r.t_value, r.w_abs * r.w_abs - 4.0 * lp + lp.ln());
            assert_eq!(r.ratio, r.w_abs / lp.sqrt());
        }
        for r in report.records_for(1) {
            assert_eq!(r.t_value, normalize(r.w_signed.max(0.0), 40, 12, 2).unwrap().t_value);
            assert!(r.w_signed <= r.w_abs);
        }
        // replicate r of every cell comes from stream r
        let x = sample_matrix(&PopulationSpec::standard_normal(), 40, 8, SeedSpec::new(9, 7)).unwrap();
        let w = crate::statcore::max_entry(&x, 2).unwrap().w_abs;
        assert_eq!(report.records[7].w_abs, w);
    }

    #[test]
    fn validation_names_the_parameter() {
        let config = ExperimentConfig::new(vec![small_cell(10)], 0, 1);
        let err = run_experiment(&config).unwrap_err();
        assert!(matches!(err, Error::Parameter { name: "reps", .. }));
        let mut bad = small_cell(10);
        bad.m = 11;
        let err = ExperimentConfig::new(vec![bad], 1, 1).validate().unwrap_err();
        assert!(err.to_string().contains("cell 0"));
        let mut tight = ExperimentConfig::new(vec![small_cell(100)], 1000, 1);
        tight.max_total_cost = Some(1_000);
        assert!(tight.validate().unwrap_err().is_budget());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"grid":[{"n":10,"p":5,"m":2,"spec":{"family":"Rademacher"}}],"reps":3}"#,
        )
        .unwrap();
        assert_eq!(cfg.master_seed, DEFAULT_MASTER_SEED);
        assert_eq!(cfg.z_grid.len(), 101);
        assert_eq!((cfg.z_grid[0], cfg.z_grid[100]), (-6.0, 12.0));
        assert_eq!(cfg.grid[0].sided, Sidedness::TwoSided);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"grid":[],"reps":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn persist_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = ExperimentConfig::new(vec![small_cell(6), small_cell(9)], 12, 5);
        config.output_path = Some(dir.path().join("out"));
        let report = run_experiment(&config).unwrap();
        let back = load(dir.path().join("out")).unwrap();
        assert_eq!(back, report);
        let csv = fs::read_to_string(dir.path().join("out").join(RECORDS_FILE)).unwrap();
        assert!(csv.starts_with("cell_id,replicate,w_abs,w_signed,t_value,ratio\n"));
        assert_eq!(csv.lines().count(), 25);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn output_is_independent_of_worker_count() {
        let config = ExperimentConfig::new(vec![small_cell(15)], 25, 77);
        let a = run_experiment_with_workers(&config, 1).unwrap();
        let b = run_experiment_with_workers(&config, 4).unwrap();
        assert_eq!(records_csv(&a.records), records_csv(&b.records));
        assert_eq!(a.cells, b.cells);
    }

    #[test]
    fn persist_reports_io_failures() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let report = run_experiment(&ExperimentConfig::new(vec![small_cell(5)], 2, 1)).unwrap();
        let err = persist(&report, blocker.join("sub")).unwrap_err();
        assert!(err.is_io());
        assert!(err.to_string().contains("file"));
    }
}
