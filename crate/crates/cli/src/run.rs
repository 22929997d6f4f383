//! Batch execution of every (algorithm, lambda, seed) triple in a config.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use wasn_deploy::optimize::{baseline_cl_onehop, baseline_lbf, baseline_rbf, rl_algorithm, IterationRecord};
use wasn_deploy::{CostBreakdown, DensityGrid, Solution};

use crate::config::{Algorithm, ExperimentConfig};
use crate::state::FinalState;
use crate::sweep::SummaryRow;

pub const SUMMARY_FILE: &str = "summary.csv";
pub const RUNS_DIR: &str = "runs";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Task {
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub seed: u64,
}

impl Task {
    pub fn dir_name(&self) -> String {
        format!("{}_lambda{}_seed{}", self.algorithm.name(), self.lambda, self.seed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` lets rayon decide.
    pub jobs: Option<usize>,
    /// Write into a non-empty output directory.
    pub force: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub rows: Vec<SummaryRow>,
}

/// Tasks in summary order: algorithm as listed, then lambda, then seed.
pub fn tasks(config: &ExperimentConfig) -> Vec<Task> {
    let lambdas = config.lambda.values();
    let mut out = Vec::new();
    for &algorithm in &config.algorithms {
        for &lambda in &lambdas {
            for &seed in &config.seeds {
                out.push(Task { algorithm, lambda, seed });
            }
        }
    }
    out
}

fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let occupied = std::fs::read_dir(dir)
            .with_context(|| format!("reading output directory {}", dir.display()))?
            .next()
            .is_some();
        if occupied && !force {
            bail!("output directory {} is not empty; pass --force to write into it", dir.display());
        }
    }
    std::fs::create_dir_all(dir.join(RUNS_DIR)).with_context(|| format!("creating {}", dir.display()))
}

struct Outcome {
    solution: Solution,
    records: Vec<IterationRecord>,
    iterations: usize,
    truncated: bool,
}

fn execute(grid: &DensityGrid, config: &ExperimentConfig, task: Task) -> Result<Outcome> {
    let opt = config.optimizer(task.lambda, task.seed);
    let single = |solution: Solution, iterations| {
        let records = vec![IterationRecord {
            iteration: 0,
            positions: solution.deployment.positions().to_vec(),
            cost: solution.cost,
        }];
        Outcome { solution, records, iterations, truncated: false }
    };
    Ok(match task.algorithm {
        Algorithm::Rl | Algorithm::Cl => {
            let t = if task.algorithm == Algorithm::Rl {
                rl_algorithm(grid, &opt, None)?
            } else {
                baseline_cl_onehop(grid, &opt, None)?
            };
            let iterations = t.iterations();
            Outcome { solution: t.solution, records: t.records, iterations, truncated: t.truncated }
        }
        // baselines report evaluations in the iterations column
        Algorithm::Rbf => {
            let b = baseline_rbf(grid, &opt, config.rbf_trials)?;
            let evaluations = b.trial_costs.len();
            single(b.solution, evaluations)
        }
        Algorithm::Lbf => single(baseline_lbf(grid, &opt)?.solution, 1),
    })
}

fn write_run(dir: &Path, config: &ExperimentConfig, task: Task, outcome: &Outcome) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = csv::Writer::from_path(dir.join("trajectory.csv"))?;
    w.write_record(["iteration", "H", "P_bar", "D"])?;
    for r in &outcome.records {
        let CostBreakdown { h, p_bar, d, .. } = r.cost;
        w.write_record([r.iteration.to_string(), h.to_string(), p_bar.to_string(), d.to_string()])?;
    }
    w.flush()?;

    FinalState::from_solution(
        task.algorithm.name(),
        task.seed,
        config.region,
        &outcome.solution,
        outcome.iterations,
        outcome.truncated,
    )
    .save(&dir.join("final_state.json"))?;

    if config.snapshot_stride > 0 {
        let mut out = BufWriter::new(File::create(dir.join("snapshots.jsonl"))?);
        let last = outcome.records.len() - 1;
        for (k, r) in outcome.records.iter().enumerate() {
            if k % config.snapshot_stride == 0 || k == last {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
        }
        out.flush()?;
    }
    Ok(())
}

fn run_task(grid: &DensityGrid, config: &ExperimentConfig, runs: &Path, task: Task) -> Result<SummaryRow> {
    let started = Instant::now();
    let outcome = execute(grid, config, task).with_context(|| format!("run {}", task.dir_name()))?;
    let wall_time = started.elapsed().as_secs_f64();
    write_run(&runs.join(task.dir_name()), config, task, &outcome)?;
    let c = outcome.solution.cost;
    Ok(SummaryRow {
        algorithm: task.algorithm.name().to_string(),
        lambda: task.lambda,
        seed: task.seed,
        h: c.h,
        p_bar: c.p_bar,
        d: c.d,
        iterations: outcome.iterations,
        wall_time,
    })
}

/// Runs every task of `config`. `base` resolves relative density paths.
/// Summary rows are appended by one writer in task order regardless of
/// which worker finishes first.
pub fn run(config: &ExperimentConfig, base: &Path, options: &RunOptions) -> Result<RunReport> {
    config.validate()?;
    let grid = config.grid(base)?;
    let output_dir = config.resolve_output_dir();
    prepare_output_dir(&output_dir, options.force)?;
    let runs = output_dir.join(RUNS_DIR);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = options.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder.build()?;

    let mut summary = csv::Writer::from_path(output_dir.join(SUMMARY_FILE))?;
    let all = tasks(config);
    let (tx, rx) = mpsc::channel();
    let mut rows = Vec::with_capacity(all.len());
    let mut first_error = None;

    std::thread::scope(|scope| -> Result<()> {
        scope.spawn(|| {
            pool.install(|| {
                all.par_iter().enumerate().for_each_with(tx, |tx, (k, &task)| {
                    let _ = tx.send((k, run_task(&grid, config, &runs, task)));
                })
            })
        });
        let mut pending = BTreeMap::new();
        let mut next = 0;
        for (k, result) in rx {
            pending.insert(k, result);
            while let Some(result) = pending.remove(&next) {
                next += 1;
                match result {
                    Ok(row) => {
                        summary.serialize(&row)?;
                        summary.flush()?;
                        rows.push(row);
                    }
                    Err(e) => {
                        first_error.get_or_insert(e);
                    }
                }
            }
        }
        Ok(())
    })?;

    if rows.is_empty() {
        // keep the header so the file stays parseable
        summary.write_record(["algorithm", "lambda", "seed", "H", "P_bar", "D", "iterations", "wall_time"])?;
        summary.flush()?;
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(RunReport { output_dir, rows }),
    }
}
