//! Empirical estimators for the quantities the error bounds are stated in:
//! RIP distortion `ε`, (local) limited projection distortion `ν`, and the
//! Gaussian mean width of sparse vectors.
//!
//! Every distortion here is a maximum over finitely many samples and hence
//! a *lower bound* on the supremum it approximates. Reports say so.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{check_len, Error, Result};
use crate::linalg::{distance, dot, norm2};
use crate::pbp::{pbp_reconstruct, Reconstruction};
use crate::projectors::Projector;
use crate::quantizer::{draw_dither, quantize_scalar, sense, Dithering, Measurements, QuantizerConfig};
use crate::rng::{seeded, substream, Stream};
use crate::sensing::{SensingKind, SensingOperator};
use crate::signals::{gen_compressible, gen_lowrank, Signal, SignalModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistortionKind {
    Rip,
    Lpd,
    Llpd,
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistortionKind::Rip => "RIP",
            DistortionKind::Lpd => "LPD",
            DistortionKind::Llpd => "L-LPD",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DistortionReport {
    pub kind: DistortionKind,
    /// Largest sampled distortion; a lower bound on the true constant.
    pub max_distortion: f64,
    pub sample_count: usize,
    pub sampler: String,
    pub operator: String,
    pub quantizer: Option<QuantizerConfig>,
    /// Per-sample distortions in draw order.
    pub samples: Vec<f64>,
}

impl DistortionReport {
    /// Running maximum over the first `count` samples.
    pub fn max_over_first(&self, count: usize) -> f64 {
        self.samples[..count.min(self.samples.len())]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    pub fn median(&self) -> f64 {
        median(&self.samples)
    }
}

impl fmt::Display for DistortionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} distortion >= {:.6} (max over {} samples of {}; operator {}",
            self.kind, self.max_distortion, self.sample_count, self.sampler, self.operator
        )?;
        if let Some(q) = &self.quantizer {
            write!(f, "; quantizer {q}")?;
        }
        f.write_str(")")
    }
}

pub(crate) fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Draws unit-norm members of a test set.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitSampler {
    /// Random support of size `k`, Gaussian values, normalized.
    Sparse { n: usize, k: usize },
    /// Normalized compressible profile (already unit norm).
    Compressible { n: usize, k: usize },
    /// Normalized `B Cᵀ` of the given rank.
    LowRank { rows: usize, cols: usize, rank: usize },
    /// Gaussian values on a fixed support, normalized.
    Support { n: usize, support: Vec<usize> },
}

impl UnitSampler {
    pub fn dim(&self) -> usize {
        match self {
            UnitSampler::Sparse { n, .. }
            | UnitSampler::Compressible { n, .. }
            | UnitSampler::Support { n, .. } => *n,
            UnitSampler::LowRank { rows, cols, .. } => rows * cols,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let mut v = match self {
            UnitSampler::Sparse { n, k } => {
                if *k == 0 || k > n {
                    return Err(Error::invalid(format!("sampler sparsity {k} out of 1..={n}")));
                }
                let mut v = vec![0.0; *n];
                for i in rand::seq::index::sample(rng, *n, *k) {
                    v[i] = rng.sample(StandardNormal);
                }
                v
            }
            UnitSampler::Compressible { n, k } => gen_compressible(*n, *k, rng)?.values,
            UnitSampler::LowRank { rows, cols, rank } => {
                gen_lowrank(*rows, *cols, *rank, rng)?.values
            }
            UnitSampler::Support { n, support } => {
                if support.is_empty() || support.iter().any(|&i| i >= *n) {
                    return Err(Error::invalid("support sampler needs indices inside 0..n"));
                }
                let mut v = vec![0.0; *n];
                for &i in support {
                    v[i] = rng.sample(StandardNormal);
                }
                v
            }
        };
        let norm = norm2(&v);
        if norm == 0.0 {
            return self.draw(rng);
        }
        v.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }

    /// Sampler over the difference set `K − K` of a structured model
    /// (2k-sparse, rank-2r), or over `K` itself for convex models.
    pub fn for_differences(model: &SignalModel) -> Self {
        match *model {
            SignalModel::Sparse { n, k } => UnitSampler::Sparse { n, k: (2 * k).min(n) },
            SignalModel::Compressible { n, k } => UnitSampler::Compressible { n, k },
            SignalModel::LowRank { rows, cols, rank } => UnitSampler::LowRank {
                rows,
                cols,
                rank: (2 * rank).min(rows.min(cols)),
            },
        }
    }
}

impl fmt::Display for UnitSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitSampler::Sparse { n, k } => write!(f, "unit {k}-sparse in R^{n}"),
            UnitSampler::Compressible { n, k } => write!(f, "unit compressible C_{k} in R^{n}"),
            UnitSampler::LowRank { rows, cols, rank } => {
                write!(f, "unit rank-{rank} {rows}x{cols}")
            }
            UnitSampler::Support { n, support } => {
                write!(f, "unit vectors on a {}-index support in R^{n}", support.len())
            }
        }
    }
}

/// Source of `(u, v)` pairs for the LPD probes.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSampler {
    /// `u` and `v` drawn independently from the same sampler.
    Independent(UnitSampler),
    /// `u` held fixed, `v` drawn from the sampler.
    FixedFirst { u: Vec<f64>, v: UnitSampler },
}

impl fmt::Display for PairSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairSampler::Independent(s) => write!(f, "independent pairs of {s}"),
            PairSampler::FixedFirst { v, .. } => write!(f, "fixed u, v from {v}"),
        }
    }
}

fn check_count(count: usize) -> Result<()> {
    if count == 0 {
        Err(Error::invalid("sample count must be at least 1"))
    } else {
        Ok(())
    }
}

/// `max_u |‖Φu‖²/m − 1|` over `count` unit vectors from `sampler`.
pub fn rip_distortion_estimate<R: Rng + ?Sized>(
    op: &SensingOperator,
    sampler: &UnitSampler,
    count: usize,
    rng: &mut R,
) -> Result<DistortionReport> {
    check_count(count)?;
    check_len(op.n(), sampler.dim())?;
    let m = op.m() as f64;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let u = sampler.draw(rng)?;
        let image = op.apply(&u)?;
        samples.push((dot(&image, &image) / m - 1.0).abs());
    }
    Ok(DistortionReport {
        kind: DistortionKind::Rip,
        max_distortion: samples.iter().copied().fold(0.0, f64::max),
        sample_count: count,
        sampler: sampler.to_string(),
        operator: op.descriptor(),
        quantizer: None,
        samples,
    })
}

/// `|⟨A(u) − Φu, Φv⟩| / m` for one dither realization.
pub fn projection_distortion(
    op: &SensingOperator,
    delta: f64,
    dither: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64> {
    check_len(op.m(), dither.len())?;
    let phi_u = op.apply(u)?;
    let phi_v = op.apply(v)?;
    let mut acc = 0.0;
    for i in 0..phi_u.len() {
        let noise = quantize_scalar(phi_u[i] + dither[i], delta) - phi_u[i];
        acc += noise * phi_v[i];
    }
    Ok(acc.abs() / op.m() as f64)
}

/// LPD probe: `max |⟨A(u), Φv⟩ − ⟨Φu, Φv⟩| / m` over `count` pairs.
///
/// With `fresh_dither_per_pair = false` one dither realization is shared by
/// every pair (uniform LPD probe); with `true` each pair sees its own
/// (L-LPD probe). Disabled dithering always uses `ξ = 0`.
pub fn lpd_distortion_estimate<R: Rng + ?Sized>(
    op: &SensingOperator,
    config: QuantizerConfig,
    pairs: &PairSampler,
    count: usize,
    fresh_dither_per_pair: bool,
    rng: &mut R,
) -> Result<DistortionReport> {
    check_count(count)?;
    let delta = config.delta();
    let draw = |rng: &mut R| -> Result<Vec<f64>> {
        match config.dithering() {
            Dithering::Uniform => draw_dither(op.m(), delta, rng),
            Dithering::Disabled => Ok(vec![0.0; op.m()]),
        }
    };
    let mut dither = draw(rng)?;
    let mut samples = Vec::with_capacity(count);
    for i in 0..count {
        if fresh_dither_per_pair && i > 0 {
            dither = draw(rng)?;
        }
        let (u, v) = match pairs {
            PairSampler::Independent(s) => (s.draw(rng)?, s.draw(rng)?),
            PairSampler::FixedFirst { u, v } => (u.clone(), v.draw(rng)?),
        };
        samples.push(projection_distortion(op, delta, &dither, &u, &v)?);
    }
    Ok(DistortionReport {
        kind: if fresh_dither_per_pair {
            DistortionKind::Llpd
        } else {
            DistortionKind::Lpd
        },
        max_distortion: samples.iter().copied().fold(0.0, f64::max),
        sample_count: count,
        sampler: pairs.to_string(),
        operator: op.descriptor(),
        quantizer: Some(config),
        samples,
    })
}

/// Which error bound an audit checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundForm {
    /// `2(ε + ν)`, unions of subspaces and low-rank matrices.
    Structured,
    /// `(4ε + 2ν)^{1/2}`, bounded convex symmetric sets.
    Convex,
}

impl BoundForm {
    pub fn for_projector(p: &Projector) -> Self {
        if p.is_convex() {
            BoundForm::Convex
        } else {
            BoundForm::Structured
        }
    }

    pub fn evaluate(self, eps: f64, nu: f64) -> f64 {
        match self {
            BoundForm::Structured => 2.0 * (eps + nu),
            BoundForm::Convex => (4.0 * eps + 2.0 * nu).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub error: f64,
    pub eps_hat: f64,
    pub nu_hat: f64,
    pub form: BoundForm,
    pub bound: f64,
    pub holds: bool,
    /// `bound − error`; negative when violated.
    pub margin: f64,
}

/// Compares the PBP error on one instance with the bound evaluated at the
/// estimated distortions. A violation is recorded, not raised: the
/// estimates are lower bounds on the true constants.
pub fn pbp_bound_audit(
    op: &SensingOperator,
    measurements: &Measurements,
    signal: &Signal,
    projector: &Projector,
    eps_hat: f64,
    nu_hat: f64,
) -> Result<(AuditRecord, Reconstruction)> {
    let rec = pbp_reconstruct(op, measurements, projector)?;
    let error = distance(&signal.values, &rec.estimate.values);
    let form = BoundForm::for_projector(projector);
    let bound = form.evaluate(eps_hat, nu_hat);
    Ok((
        AuditRecord {
            error,
            eps_hat,
            nu_hat,
            form,
            bound,
            holds: error <= bound,
            margin: bound - error,
        },
        rec,
    ))
}

fn support_of(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// One complete audit trial with everything drawn from `seed`:
/// operator, signal (scaled into the unit ball), dither, the RIP estimate
/// over the model's difference set and the local LPD estimate at `x`
/// using the trial's own dither. For sparse models, `v` ranges over unit
/// vectors on `supp(x) ∪ supp(x̂)`.
pub fn audit_trial(
    model: &SignalModel,
    kind: SensingKind,
    m: usize,
    config: QuantizerConfig,
    seed: u64,
    samples: usize,
) -> Result<AuditRecord> {
    check_count(samples)?;
    let n = model.dim();
    let op = SensingOperator::new(kind, m, n, substream(seed, Stream::Operator))?;
    let mut signal = model.generate(&mut seeded(substream(seed, Stream::Signal)))?;
    let norm = norm2(&signal.values);
    if norm > 1.0 {
        signal.values.iter_mut().for_each(|v| *v /= norm);
    }
    let meas = sense(&op, &signal.values, config, substream(seed, Stream::Dither))?;
    let projector = Projector::for_model(model);
    let rec = pbp_reconstruct(&op, &meas, &projector)?;

    let mut rng = seeded(substream(seed, Stream::Diagnostics));
    let eps = rip_distortion_estimate(&op, &UnitSampler::for_differences(model), samples, &mut rng)?
        .max_distortion;

    let v_sampler = match model {
        SignalModel::Sparse { .. } => {
            let mut support = support_of(&signal.values);
            support.extend(support_of(&rec.estimate.values));
            support.sort_unstable();
            support.dedup();
            UnitSampler::Support { n, support }
        }
        other => UnitSampler::for_differences(other),
    };
    let mut nu: f64 = 0.0;
    for _ in 0..samples {
        let v = v_sampler.draw(&mut rng)?;
        nu = nu.max(projection_distortion(
            &op,
            config.delta(),
            &meas.dither,
            &signal.values,
            &v,
        )?);
    }
    Ok(pbp_bound_audit(&op, &meas, &signal, &projector, eps, nu)?.0)
}

/// Monte-Carlo estimate of `w(Σ_k ∩ Bⁿ) = E ‖top-k magnitudes of g‖₂`.
pub fn mean_width_sparse<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k={k} must lie in 1..={n}")));
    }
    check_count(draws)?;
    let mut mags = vec![0.0; n];
    let mut acc = 0.0;
    for _ in 0..draws {
        for m in mags.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *m = g * g;
        }
        if k < n {
            mags.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
        }
        acc += mags[..k].iter().sum::<f64>().sqrt();
    }
    Ok(acc / draws as f64)
}
