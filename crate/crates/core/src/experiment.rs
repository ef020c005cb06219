//! Experiment grid harness: configure pools, strategies, budgets, and
//! seeds; run (rate x strategy x seed) cells; write per-round JSON records
//! and a summary table as CSV and pretty text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::active::{self, AlRun, Oracle, RoundRecord, RunParams, Strategy};
use crate::error::{Error, Result};
use crate::numerics::SeededRng;
use crate::skeleton::{self, Pool, SynthSpec};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Path(PathBuf),
    Synth(SynthSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub strategies: Vec<Strategy>,
    pub rates: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub params: RunParams,
    /// master seed deriving the pool stream and per-cell streams
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_chunks")]
    pub chunks: usize,
    pub out_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
}

fn default_chunks() -> usize {
    4
}

fn default_jobs() -> usize {
    1
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.rates.is_empty() || self.seeds.is_empty() {
            return Err(Error::Config(
                "strategies, rates, and seeds must all be nonempty".into(),
            ));
        }
        for &r in &self.rates {
            if !(0.0 < r && r <= 1.0) {
                return Err(Error::Config(format!("labeling rate {r} outside (0, 1]")));
            }
        }
        if self.params.display_k == 0 {
            return Err(Error::Config("display K must be >= 1".into()));
        }
        if self.params.display_tol <= 0.0 || self.params.display_max_iters == 0 {
            return Err(Error::Config("display tol/max_iters invalid".into()));
        }
        self.params.activation.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.params.net_depth < 2 {
            return Err(Error::Config("net depth must be >= 2".into()));
        }
        if self.params.train.epochs == 0 {
            return Err(Error::Config("train epochs must be >= 1".into()));
        }
        Ok(())
    }

    pub fn build_pool(&self) -> Result<Pool> {
        match &self.data {
            DataSource::Path(p) => skeleton::load_dataset(p, self.chunks),
            DataSource::Synth(spec) => {
                let mut spec = spec.clone();
                spec.chunks = self.chunks;
                skeleton::synth_pool(&spec, &mut SeededRng::new(self.master_seed).derive(0xB0))
            }
        }
    }
}

/// One record line: cell coordinates plus the per-round record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRecord {
    pub rate: f64,
    pub seed: u64,
    #[serde(flatten)]
    pub record: RoundRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub rate: f64,
    pub strategy: String,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub seeds: usize,
    pub failed: usize,
}

/// Rows keyed by (labeling rate, strategy); cells are mean +/- std of the
/// final-round accuracy over the declared seed list.
#[derive(Debug, Clone)]
pub struct ResultTable {
    pub rows: Vec<TableRow>,
}

impl ResultTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("rate,strategy,mean_accuracy,std_accuracy,seeds,failed\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.rate, r.strategy, r.mean_accuracy, r.std_accuracy, r.seeds, r.failed
            );
        }
        s
    }

    pub fn to_pretty(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6}  {:<20} {:>10} {:>10} {:>6}", "rate", "strategy", "mean", "std", "seeds");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>5.0}%  {:<20} {:>10.4} {:>10.4} {:>6}",
                r.rate * 100.0,
                r.strategy,
                r.mean_accuracy,
                r.std_accuracy,
                r.seeds
            );
        }
        s
    }
}

fn cell_file(out_dir: &Path, rate: f64, strategy: Strategy, seed: u64) -> PathBuf {
    out_dir.join(format!("rate{rate}__{}__seed{seed}.jsonl", strategy.name()))
}

/// Run one grid cell, appending round records atomically (write a temp
/// file with all rounds so far, then rename over the record file).
fn run_cell(
    pool: &Pool,
    cfg: &ExperimentConfig,
    rate: f64,
    strategy: Strategy,
    seed: u64,
    records_dir: &Path,
) -> Result<f64> {
    let train_n = pool.train_indices().len();
    let budget = AlRun::rounds_for_rate(rate, train_n, cfg.params.display_k).max(1);
    let cell_seed = derive_cell_seed(cfg.master_seed, rate, strategy, seed);
    let mut run = AlRun::new(strategy, cfg.params.clone(), cell_seed, budget);
    let mut oracle = Oracle::new(pool);
    let mut rng = SeededRng::new(cell_seed);
    let path = cell_file(records_dir, rate, strategy, seed);
    for _ in 0..budget {
        match active::round(&mut run, pool, &mut oracle, &mut rng) {
            Ok(()) => {}
            Err(Error::BudgetComplete) => break,
            Err(e) => return Err(e),
        }
        write_cell_records(&path, rate, seed, &run.records)?;
    }
    Ok(run.records.last().map(|r| r.accuracy).unwrap_or(0.0))
}

fn derive_cell_seed(master: u64, rate: f64, strategy: Strategy, seed: u64) -> u64 {
    // stable mix of the cell coordinates into one stream seed
    let mut h = master ^ 0x517c_c1b7_2722_0a95;
    for b in rate.to_bits().to_le_bytes() {
        h = h.wrapping_mul(0x100_0000_01b3) ^ b as u64;
    }
    for b in strategy.name().bytes() {
        h = h.wrapping_mul(0x100_0000_01b3) ^ b as u64;
    }
    h ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn write_cell_records(path: &Path, rate: f64, seed: u64, records: &[RoundRecord]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    let mut text = String::new();
    for r in records {
        let line = serde_json::to_string(&CellRecord { rate, seed, record: r.clone() })?;
        text.push_str(&line);
        text.push('\n');
    }
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug)]
pub struct GridOutcome {
    pub table: ResultTable,
    pub failed_cells: Vec<String>,
}

/// Execute the full grid. Failed cells are recorded and the grid
/// continues. Cells run in parallel up to `jobs`.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridOutcome> {
    cfg.validate()?;
    let pool = cfg.build_pool()?;
    let records_dir = cfg.out_dir.join("records");
    std::fs::create_dir_all(&records_dir)?;

    let mut cells = Vec::new();
    for &rate in &cfg.rates {
        for &strategy in &cfg.strategies {
            for &seed in &cfg.seeds {
                cells.push((rate, strategy, seed));
            }
        }
    }

    let pool_ref = &pool;
    let records_ref = records_dir.as_path();
    let outcomes: Vec<(f64, Strategy, u64, Result<f64>)> = if cfg.jobs > 1 {
        let pool_handle = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool_handle.install(|| {
            use rayon::prelude::*;
            cells
                .par_iter()
                .map(|&(rate, strategy, seed)| {
                    (
                        rate,
                        strategy,
                        seed,
                        run_cell(pool_ref, cfg, rate, strategy, seed, records_ref),
                    )
                })
                .collect()
        })
    } else {
        cells
            .iter()
            .map(|&(rate, strategy, seed)| {
                (
                    rate,
                    strategy,
                    seed,
                    run_cell(pool_ref, cfg, rate, strategy, seed, records_ref),
                )
            })
            .collect()
    };

    let mut failed_cells = Vec::new();
    let mut rows = Vec::new();
    for &rate in &cfg.rates {
        for &strategy in &cfg.strategies {
            let mut finals = Vec::new();
            let mut failed = 0usize;
            for &(r, s, seed, ref out) in &outcomes {
                if r == rate && s == strategy {
                    match out {
                        Ok(acc) => finals.push(*acc),
                        Err(e) => {
                            failed += 1;
                            failed_cells.push(format!(
                                "rate={rate} strategy={} seed={seed}: {e}",
                                strategy.name()
                            ));
                        }
                    }
                }
            }
            let mean = if finals.is_empty() {
                f64::NAN
            } else {
                finals.iter().sum::<f64>() / finals.len() as f64
            };
            let std = if finals.len() > 1 {
                (finals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                    / (finals.len() - 1) as f64)
                    .sqrt()
            } else {
                0.0
            };
            rows.push(TableRow {
                rate,
                strategy: strategy.name().to_string(),
                mean_accuracy: mean,
                std_accuracy: std,
                seeds: finals.len(),
                failed,
            });
        }
    }
    let table = ResultTable { rows };
    std::fs::write(cfg.out_dir.join("results.csv"), table.to_csv())?;
    std::fs::write(cfg.out_dir.join("results.txt"), table.to_pretty())?;
    Ok(GridOutcome { table, failed_cells })
}

/// Long-format CSV from the per-round record files:
/// rate, strategy, seed, round, accuracy. Corrupt records are skipped
/// with a warning on stderr.
pub fn report(records_dir: &Path) -> Result<String> {
    let mut csv = String::from("rate,strategy,seed,round,accuracy\n");
    let mut paths: Vec<PathBuf> = match std::fs::read_dir(records_dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().map(|x| x == "jsonl").unwrap_or(false))
            .collect(),
        Err(_) => Vec::new(),
    };
    paths.sort();
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CellRecord>(line) {
                Ok(rec) => {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{}",
                        rec.rate,
                        rec.record.strategy,
                        rec.seed,
                        rec.record.round,
                        rec.record.accuracy
                    );
                }
                Err(e) => {
                    eprintln!(
                        "warning: skipping corrupt record {}:{}: {e}",
                        path.display(),
                        lineno + 1
                    );
                }
            }
        }
    }
    Ok(csv)
}
