//! Ready-made configurations for the reference experiments. Each one is
//! mirrored by a file in the repository's `configs/` directory.

use super::config::{ExperimentConfig, ExperimentKind, MGrid};
use crate::quantizer::Dithering;
use crate::sensing::SensingKind;
use crate::signals::SignalModel;

const SPARSE: SignalModel = SignalModel::Sparse { n: 512, k: 4 };
const COMPRESSIBLE: SignalModel = SignalModel::Compressible { n: 512, k: 4 };

fn decay(id: &str, model: SignalModel, sensing: SensingKind, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id, model, sensing);
    cfg.deltas = vec![0.5, 1.0, 2.0];
    cfg.base_seed = seed;
    cfg
}

fn delta_sweep(id: &str, model: SignalModel, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id, model, SensingKind::Gaussian);
    cfg.experiment = ExperimentKind::ErrorVsDelta;
    cfg.deltas = (-3..=5).map(|e| 2f64.powi(e)).collect();
    cfg.m_grid = MGrid::Explicit(vec![256]);
    cfg.base_seed = seed;
    cfg
}

fn ensemble(id: &str, sensing: SensingKind, dithering: Dithering, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(id, SPARSE, sensing);
    cfg.deltas = vec![0.5, 1.0, 2.0];
    if !dithering.is_on() {
        cfg.experiment = ExperimentKind::NoDither;
    }
    cfg.dithering = dithering;
    cfg.base_seed = seed;
    cfg
}

pub fn fig2a_sparse() -> ExperimentConfig {
    decay("fig2a_sparse", SPARSE, SensingKind::Gaussian, 2001)
}

pub fn fig2b_compressible() -> ExperimentConfig {
    decay("fig2b_compressible", COMPRESSIBLE, SensingKind::Gaussian, 2002)
}

/// 32×32, rank 2, 25 trials.
pub fn fig2c_lowrank() -> ExperimentConfig {
    let mut cfg = decay(
        "fig2c_lowrank",
        SignalModel::LowRank { rows: 32, cols: 32, rank: 2 },
        SensingKind::Gaussian,
        2003,
    );
    cfg.trials = 25;
    cfg
}

/// 64×64, rank 2, 50 trials.
pub fn fig2c_lowrank_full() -> ExperimentConfig {
    let mut cfg = decay(
        "fig2c_lowrank_full",
        SignalModel::LowRank { rows: 64, cols: 64, rank: 2 },
        SensingKind::Gaussian,
        2004,
    );
    cfg.trials = 50;
    cfg
}

pub fn fig3_delta_sparse() -> ExperimentConfig {
    delta_sweep("fig3_delta_sparse", SPARSE, 3001)
}

pub fn fig3_delta_compressible() -> ExperimentConfig {
    delta_sweep("fig3_delta_compressible", COMPRESSIBLE, 3002)
}

pub fn fig4_bernoulli() -> ExperimentConfig {
    ensemble("fig4_bernoulli", SensingKind::Bernoulli, Dithering::Uniform, 4001)
}

pub fn fig4_pdct() -> ExperimentConfig {
    ensemble("fig4_pdct", SensingKind::PartialDct, Dithering::Uniform, 4002)
}

pub fn fig5_bernoulli_nodither() -> ExperimentConfig {
    ensemble("fig5_bernoulli_nodither", SensingKind::Bernoulli, Dithering::Disabled, 5001)
}

pub fn fig5_pdct_nodither() -> ExperimentConfig {
    ensemble("fig5_pdct_nodither", SensingKind::PartialDct, Dithering::Disabled, 5002)
}

/// Per-trial bound audit at `m = 256`, `δ = 1`.
pub fn audit_sparse() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("audit_sparse", SPARSE, SensingKind::Gaussian);
    cfg.experiment = ExperimentKind::Diagnose;
    cfg.m_grid = MGrid::Explicit(vec![256]);
    cfg.base_seed = 6001;
    cfg
}

/// Every preset with its name (also the stem of its config file).
pub fn all() -> Vec<ExperimentConfig> {
    vec![
        fig2a_sparse(),
        fig2b_compressible(),
        fig2c_lowrank(),
        fig2c_lowrank_full(),
        fig3_delta_sparse(),
        fig3_delta_compressible(),
        fig4_bernoulli(),
        fig4_pdct(),
        fig5_bernoulli_nodither(),
        fig5_pdct_nodither(),
        audit_sparse(),
    ]
}

pub fn by_name(name: &str) -> Option<ExperimentConfig> {
    all().into_iter().find(|c| c.experiment_id == name)
}
