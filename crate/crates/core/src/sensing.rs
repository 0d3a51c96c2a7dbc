//! Random sensing ensembles behind one linear-operator type.
//!
//! Dense ensembles (Gaussian, Bernoulli) store the `m × n` matrix. The
//! structured ensembles never materialize it: partial DCT applies
//! `√n R_Ω U` and SORS applies `√n R_Ω U D`, where `U` is the orthonormal
//! DCT-II, `R_Ω` keeps the rows in `Ω` and `D` is a random sign diagonal.
//! The `√n` factor is folded in at construction so that `Φ/√m` is the
//! RIP-normalized map for every kind.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustdct::{DctPlanner, TransformType2And3};

use crate::error::{check_len, Error, Result};
use crate::linalg::axpy;
use crate::rng::{seeded, Rng as Chacha};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensingKind {
    Gaussian,
    Bernoulli,
    PartialDct,
    Sors,
}

impl SensingKind {
    pub const ALL: [SensingKind; 4] = [
        SensingKind::Gaussian,
        SensingKind::Bernoulli,
        SensingKind::PartialDct,
        SensingKind::Sors,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SensingKind::Gaussian => "gaussian",
            SensingKind::Bernoulli => "bernoulli",
            SensingKind::PartialDct => "pdct",
            SensingKind::Sors => "sors",
        }
    }

    pub fn is_subsampled(self) -> bool {
        matches!(self, SensingKind::PartialDct | SensingKind::Sors)
    }
}

impl fmt::Display for SensingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SensingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SensingKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown sensing kind {s:?} (expected gaussian | bernoulli | pdct | sors)"
                ))
            })
    }
}

/// Orthonormal DCT-II of a fixed length and its inverse (DCT-III).
#[derive(Clone)]
pub struct Dct {
    len: usize,
    plan: Arc<dyn TransformType2And3<f64>>,
}

impl fmt::Debug for Dct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Dct").field("len", &self.len).finish()
    }
}

impl Dct {
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "dct length must be positive");
        let plan = DctPlanner::new().plan_dct2(len);
        Dct { len, plan }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn scales(&self) -> (f64, f64) {
        let n = self.len as f64;
        ((1.0 / n).sqrt(), (2.0 / n).sqrt())
    }

    /// `X_j = s_j Σ_i x_i cos(π(2i+1)j / 2n)`, `s_0 = √(1/n)`, `s_j = √(2/n)`.
    pub fn forward_in_place(&self, buf: &mut [f64]) {
        assert_eq!(buf.len(), self.len);
        self.plan.process_dct2(buf);
        let (s0, s) = self.scales();
        buf[0] *= s0;
        buf[1..].iter_mut().for_each(|v| *v *= s);
    }

    /// Transpose (and inverse) of [`Dct::forward_in_place`].
    pub fn inverse_in_place(&self, buf: &mut [f64]) {
        assert_eq!(buf.len(), self.len);
        let (s0, s) = self.scales();
        // the unnormalized DCT-III halves its DC term
        buf[0] *= 2.0 * s0;
        buf[1..].iter_mut().for_each(|v| *v *= s);
        self.plan.process_dct3(buf);
    }
}

/// Orthonormal DCT-II.
pub fn dct2_orthonormal(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    if !out.is_empty() {
        Dct::new(out.len()).forward_in_place(&mut out);
    }
    out
}

/// Inverse of [`dct2_orthonormal`].
pub fn idct2_orthonormal(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    if !out.is_empty() {
        Dct::new(out.len()).inverse_in_place(&mut out);
    }
    out
}

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major `m × n`.
    Dense(Vec<f64>),
    Subsampled {
        rows: Vec<usize>,
        signs: Option<Vec<f64>>,
        dct: Dct,
    },
}

/// Immutable random linear map `Φ: Rⁿ → Rᵐ`, fully determined by
/// `(kind, m, n, seed)`.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    kind: SensingKind,
    m: usize,
    n: usize,
    seed: u64,
    storage: Storage,
}

impl SensingOperator {
    pub fn new(kind: SensingKind, m: usize, n: usize, seed: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid(format!("operator dimensions must be positive (m={m}, n={n})")));
        }
        if kind.is_subsampled() && m > n {
            return Err(Error::invalid(format!(
                "{kind} needs m <= n (m={m}, n={n})"
            )));
        }
        let mut rng = seeded(seed);
        let storage = match kind {
            SensingKind::Gaussian => {
                Storage::Dense((0..m * n).map(|_| rng.sample(StandardNormal)).collect())
            }
            SensingKind::Bernoulli => Storage::Dense(
                (0..m * n)
                    .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                    .collect(),
            ),
            SensingKind::PartialDct | SensingKind::Sors => {
                let rows = sample_rows(m, n, &mut rng);
                let signs = (kind == SensingKind::Sors).then(|| {
                    (0..n)
                        .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                        .collect()
                });
                Storage::Subsampled {
                    rows,
                    signs,
                    dct: Dct::new(n),
                }
            }
        };
        Ok(SensingOperator {
            kind,
            m,
            n,
            seed,
            storage,
        })
    }

    pub fn kind(&self) -> SensingKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Selected DCT rows `Ω`, in sampling order (structured kinds only).
    pub fn rows(&self) -> Option<&[usize]> {
        match &self.storage {
            Storage::Subsampled { rows, .. } => Some(rows),
            Storage::Dense(_) => None,
        }
    }

    /// Sign diagonal `D` (SORS only).
    pub fn signs(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Subsampled { signs, .. } => signs.as_deref(),
            Storage::Dense(_) => None,
        }
    }

    pub fn descriptor(&self) -> String {
        format!("{}(m={}, n={}, seed={})", self.kind, self.m, self.n, self.seed)
    }

    /// `Φx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok(match &self.storage {
            Storage::Dense(a) => a
                .chunks_exact(self.n)
                .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
                .collect(),
            Storage::Subsampled { rows, signs, dct } => {
                let mut buf = x.to_vec();
                if let Some(d) = signs {
                    buf.iter_mut().zip(d).for_each(|(b, s)| *b *= s);
                }
                dct.forward_in_place(&mut buf);
                let root_n = (self.n as f64).sqrt();
                rows.iter().map(|&r| root_n * buf[r]).collect()
            }
        })
    }

    /// `Φᵀy`.
    pub fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m, y.len())?;
        Ok(match &self.storage {
            Storage::Dense(a) => {
                let mut out = vec![0.0; self.n];
                for (row, &yi) in a.chunks_exact(self.n).zip(y) {
                    if yi != 0.0 {
                        axpy(yi, row, &mut out);
                    }
                }
                out
            }
            Storage::Subsampled { rows, signs, dct } => {
                let root_n = (self.n as f64).sqrt();
                let mut buf = vec![0.0; self.n];
                for (&r, &yi) in rows.iter().zip(y) {
                    buf[r] = root_n * yi;
                }
                dct.inverse_in_place(&mut buf);
                if let Some(d) = signs {
                    buf.iter_mut().zip(d).for_each(|(b, s)| *b *= s);
                }
                buf
            }
        })
    }

    /// Row-major dense copy of `Φ`, built column by column from basis probes
    /// for the structured kinds.
    pub fn to_dense(&self) -> Vec<f64> {
        match &self.storage {
            Storage::Dense(a) => a.clone(),
            Storage::Subsampled { .. } => {
                let mut out = vec![0.0; self.m * self.n];
                let mut e = vec![0.0; self.n];
                for j in 0..self.n {
                    e[j] = 1.0;
                    let col = self.apply(&e).expect("basis vector has length n");
                    e[j] = 0.0;
                    for (i, v) in col.into_iter().enumerate() {
                        out[i * self.n + j] = v;
                    }
                }
                out
            }
        }
    }
}

/// First `m` entries of a Fisher–Yates shuffle of `0..n`: a uniformly random
/// ordered `m`-subset drawn without replacement.
fn sample_rows(m: usize, n: usize, rng: &mut Chacha) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        perm.swap(i, j);
    }
    perm.truncate(m);
    perm
}
