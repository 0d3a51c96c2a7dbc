use std::collections::HashSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::records::{write_audits, write_records, TrialRecord};
use crate::diagnostics::{audit_trial, AuditRecord};
use crate::error::{Error, Result};
use crate::linalg::distance;
use crate::pbp::pbp_reconstruct;
use crate::projectors::Projector;
use crate::quantizer::{sense, QuantizerConfig};
use crate::rng::{mix, seeded, substream, Stream};
use crate::sensing::SensingOperator;

/// Seed of one trial, derived from the run seed and the trial's position in
/// the `(m, δ, trial)` grid.
pub fn trial_seed(base_seed: u64, m: usize, delta_index: usize, trial: usize) -> u64 {
    mix(base_seed, &[m as u64, delta_index as u64, trial as u64])
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    /// Rows in `(m, δ, trial)` order.
    pub records: Vec<TrialRecord>,
    /// Row-aligned audits, `diagnose` runs only.
    pub audits: Option<Vec<AuditRecord>>,
}

#[derive(Clone, Copy)]
struct Task {
    m: usize,
    delta: f64,
    trial: usize,
    seed: u64,
}

fn plan(cfg: &ExperimentConfig) -> Result<Vec<Task>> {
    let mut tasks = Vec::new();
    let mut seen = HashSet::new();
    for m in cfg.measurements() {
        for (delta_index, &delta) in cfg.deltas.iter().enumerate() {
            for trial in 0..cfg.trials {
                let seed = trial_seed(cfg.base_seed, m, delta_index, trial);
                if !seen.insert(seed) {
                    return Err(Error::config(format!(
                        "seed collision at m={m}, delta={delta}, trial={trial}; change base_seed"
                    )));
                }
                tasks.push(Task {
                    m,
                    delta,
                    trial,
                    seed,
                });
            }
        }
    }
    Ok(tasks)
}

fn run_task(cfg: &ExperimentConfig, task: &Task) -> Result<(TrialRecord, Option<AuditRecord>)> {
    let qcfg = QuantizerConfig::new(task.delta, cfg.dithering)?;
    let (error, audit) = if cfg.experiment == ExperimentKind::Diagnose {
        let audit = audit_trial(
            &cfg.model,
            cfg.sensing,
            task.m,
            qcfg,
            task.seed,
            cfg.diagnose_samples,
        )?;
        (audit.error, Some(audit))
    } else {
        let n = cfg.model.dim();
        let op = SensingOperator::new(cfg.sensing, task.m, n, substream(task.seed, Stream::Operator))?;
        let x = cfg
            .model
            .generate(&mut seeded(substream(task.seed, Stream::Signal)))?;
        let meas = sense(&op, &x.values, qcfg, substream(task.seed, Stream::Dither))?;
        let rec = pbp_reconstruct(&op, &meas, &Projector::for_model(&cfg.model))?;
        (distance(&x.values, &rec.estimate.values), None)
    };
    let record = TrialRecord {
        experiment_id: cfg.experiment_id.clone(),
        set: cfg.model.name().to_string(),
        sensing: cfg.sensing.name().to_string(),
        n: cfg.model.dim(),
        k_or_r: cfg.model.complexity(),
        m: task.m,
        delta: task.delta,
        dithered: cfg.dithering.is_on(),
        trial_index: task.trial,
        seed: task.seed,
        error,
    };
    Ok((record, audit))
}

/// Runs every `(m, δ, trial)` cell of `cfg`. Each trial draws a fresh
/// operator, signal and dither from its own seed; output order and values
/// do not depend on `threads` (`None` uses the global pool).
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let tasks = plan(cfg)?;
    let work = || -> Result<Vec<(TrialRecord, Option<AuditRecord>)>> {
        tasks.par_iter().map(|t| run_task(cfg, t)).collect()
    };
    let rows = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::config(format!("cannot build thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };
    let (records, audits): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let audits = (cfg.experiment == ExperimentKind::Diagnose)
        .then(|| audits.into_iter().map(|a| a.expect("diagnose trials carry audits")).collect());
    Ok(ExperimentOutput { records, audits })
}

/// Sidecar path for the audit table of a `diagnose` run.
pub fn audit_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_stem().unwrap_or_default().to_os_string();
    name.push(".audit.csv");
    csv.with_file_name(name)
}

/// Runs `cfg` and writes the trial CSV to `out` (plus the audit sidecar for
/// `diagnose` runs).
pub fn run_to_file(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<ExperimentOutput> {
    let output = run_experiment(cfg, threads)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_records(&output.records, BufWriter::new(File::create(out)?))?;
    if let Some(audits) = &output.audits {
        write_audits(&output.records, audits, BufWriter::new(File::create(audit_path(out))?))?;
    }
    Ok(output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::MGrid;
    use crate::sensing::SensingKind;
    use crate::signals::SignalModel;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new("t", SignalModel::Sparse { n: 64, k: 2 }, SensingKind::Gaussian);
        cfg.m_grid = MGrid::Explicit(vec![16, 32]);
        cfg.deltas = vec![0.5, 1.0];
        cfg.trials = 3;
        cfg.base_seed = 99;
        cfg
    }

    #[test]
    fn single_cell_gives_one_row() {
        let mut cfg = small();
        cfg.m_grid = MGrid::Explicit(vec![20]);
        cfg.deltas = vec![1.0];
        cfg.trials = 1;
        let out = run_experiment(&cfg, Some(1)).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.audits.is_none());
    }

    #[test]
    fn rows_are_ordered_and_thread_independent() {
        let cfg = small();
        let a = run_experiment(&cfg, Some(1)).unwrap().records;
        let b = run_experiment(&cfg, Some(4)).unwrap().records;
        assert_eq!(a, b);
        assert_eq!(a.len(), 2 * 2 * 3);
        let keys: Vec<(usize, f64, usize)> = a.iter().map(|r| (r.m, r.delta, r.trial_index)).collect();
        let mut sorted = keys.clone();
        sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(keys, sorted);
        assert!(a.iter().all(|r| r.error >= 0.0));
    }

    #[test]
    fn diagnose_runs_carry_audits() {
        let mut cfg = small();
        cfg.experiment = ExperimentKind::Diagnose;
        cfg.diagnose_samples = 20;
        let out = run_experiment(&cfg, Some(2)).unwrap();
        let audits = out.audits.unwrap();
        assert_eq!(audits.len(), out.records.len());
        for (r, a) in out.records.iter().zip(&audits) {
            assert_eq!(r.error, a.error);
        }
    }

    #[test]
    fn infeasible_config_fails_before_work() {
        let mut cfg = small();
        cfg.sensing = SensingKind::PartialDct;
        cfg.m_grid = MGrid::Explicit(vec![65]);
        assert!(matches!(run_experiment(&cfg, None), Err(Error::Config(_))));
    }

    #[test]
    fn audit_sidecar_name() {
        assert_eq!(audit_path(Path::new("out/run.csv")), PathBuf::from("out/run.audit.csv"));
    }
}
