//! Low-complexity signal sets and the random generators used by the
//! experiments.

use std::fmt;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{norm1, norm2, Matrix};

/// Which low-complexity set a signal is declared to belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetTag {
    /// `Σ_k`: at most `k` nonzero entries.
    Sparse { k: usize },
    /// `C_k = {u : ‖u‖₁ ≤ √k, ‖u‖₂ ≤ 1}`.
    Compressible { k: usize },
    /// `rows × cols` matrices of rank at most `rank`, vectorized column-major.
    LowRank {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    Generic,
}

impl fmt::Display for SetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetTag::Sparse { k } => write!(f, "sparse(k={k})"),
            SetTag::Compressible { k } => write!(f, "compressible(k={k})"),
            SetTag::LowRank { rows, cols, rank } => write!(f, "lowrank({rows}x{cols},r={rank})"),
            SetTag::Generic => f.write_str("generic"),
        }
    }
}

/// A dense real signal together with the set it claims membership of.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    pub values: Vec<f64>,
    pub tag: SetTag,
}

impl Signal {
    pub fn new(values: Vec<f64>, tag: SetTag) -> Self {
        Signal { values, tag }
    }

    pub fn generic(values: Vec<f64>) -> Self {
        Signal::new(values, SetTag::Generic)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks the membership invariant of [`Signal::tag`].
    pub fn satisfies_tag(&self) -> bool {
        is_member(&self.values, &self.tag)
    }
}

/// Numerical membership test used throughout the crate.
pub fn is_member(values: &[f64], tag: &SetTag) -> bool {
    match *tag {
        SetTag::Sparse { k } => values.iter().filter(|v| **v != 0.0).count() <= k,
        SetTag::Compressible { k } => {
            norm1(values) <= (k as f64).sqrt() + 1e-9 && norm2(values) <= 1.0 + 1e-12
        }
        SetTag::LowRank { rows, cols, rank } => {
            if values.len() != rows * cols {
                return false;
            }
            let m = Matrix::from_col_major(rows, cols, values.to_vec()).expect("length checked");
            match m.svd() {
                Ok(svd) => {
                    let s = &svd.singular_values;
                    let top = s.first().copied().unwrap_or(0.0);
                    s.iter().skip(rank).all(|&x| x <= 1e-10 * top)
                }
                Err(_) => false,
            }
        }
        SetTag::Generic => true,
    }
}

/// Column-major reshape of a vector into an `rows × cols` matrix.
pub fn reshape(values: &[f64], rows: usize, cols: usize) -> Result<Matrix> {
    Matrix::from_col_major(rows, cols, values.to_vec())
}

/// Inverse of [`reshape`].
pub fn vectorize(m: Matrix) -> Vec<f64> {
    m.into_vec()
}

/// k-sparse signal: uniformly random support, i.i.d. standard normal
/// nonzeros, no normalization.
pub fn gen_sparse<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Signal> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("sparsity k={k} must lie in 1..={n}")));
    }
    let mut values = vec![0.0; n];
    for i in index::sample(rng, n, k) {
        let mut g: f64 = rng.sample(StandardNormal);
        // a zero draw would silently lower the sparsity
        while g == 0.0 {
            g = rng.sample(StandardNormal);
        }
        values[i] = g;
    }
    Ok(Signal::new(values, SetTag::Sparse { k }))
}

/// `‖p‖₁ / ‖p‖₂` for the profile `p_i = i^{-alpha}`, `i = 1..=n`.
pub fn decay_ratio(n: usize, alpha: f64) -> f64 {
    let (mut s1, mut s2) = (0.0, 0.0);
    // summed smallest-first for accuracy
    for i in (1..=n).rev() {
        let p = (i as f64).powf(-alpha);
        s1 += p;
        s2 += p * p;
    }
    s1 / s2.sqrt()
}

const ALPHA_BISECTION_STEPS: usize = 60;

/// Smallest decay exponent `alpha ∈ (1, 2]` whose profile meets
/// `‖p‖₁/‖p‖₂ ≤ √k`. The ratio decreases in `alpha`, so bisection applies;
/// the returned value attains the budget with equality whenever the budget
/// is reachable inside the bracket.
pub fn compressible_exponent(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("budget k={k} must lie in 1..={n}")));
    }
    let target = (k as f64).sqrt();
    if decay_ratio(n, 2.0) > target {
        return Err(Error::InfeasibleBudget { n, k });
    }
    let (mut lo, mut hi) = (1.0_f64, 2.0_f64);
    for _ in 0..ALPHA_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if decay_ratio(n, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Compressible signal: magnitudes `i^{-alpha_k}` with random signs, randomly
/// permuted, normalized to unit ℓ₂ norm.
pub fn gen_compressible<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Signal> {
    let alpha = compressible_exponent(n, k)?;
    let mut values: Vec<f64> = (1..=n)
        .map(|i| {
            let mag = (i as f64).powf(-alpha);
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    values.shuffle(rng);
    let norm = norm2(&values);
    values.iter_mut().for_each(|v| *v /= norm);
    // normalization rounding can push the ratio a few ulps over the budget
    let budget = (k as f64).sqrt();
    let l1 = norm1(&values);
    if l1 > budget {
        let s = budget / l1;
        values.iter_mut().for_each(|v| *v *= s);
    }
    Ok(Signal::new(values, SetTag::Compressible { k }))
}

/// Rank-`r` matrix `B Cᵀ / ‖B Cᵀ‖_F` with standard normal factors, returned
/// vectorized.
pub fn gen_lowrank<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rank: usize,
    rng: &mut R,
) -> Result<Signal> {
    if rank == 0 || rank > rows.min(cols) {
        return Err(Error::invalid(format!(
            "rank r={rank} must lie in 1..={}",
            rows.min(cols)
        )));
    }
    let b: Vec<f64> = (0..rows * rank).map(|_| rng.sample(StandardNormal)).collect();
    let c: Vec<f64> = (0..cols * rank).map(|_| rng.sample(StandardNormal)).collect();
    let mut x = Matrix::zeros(rows, cols);
    for j in 0..cols {
        for l in 0..rank {
            let w = c[j + l * cols];
            let bl = &b[l * rows..(l + 1) * rows];
            for (o, bi) in x.col_mut(j).iter_mut().zip(bl) {
                *o += bi * w;
            }
        }
    }
    let f = x.frobenius_norm();
    let values = x.into_vec().into_iter().map(|v| v / f).collect();
    Ok(Signal::new(values, SetTag::LowRank { rows, cols, rank }))
}

/// A parametrized signal set with its experimental generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignalModel {
    Sparse { n: usize, k: usize },
    Compressible { n: usize, k: usize },
    LowRank { rows: usize, cols: usize, rank: usize },
}

impl SignalModel {
    /// Ambient (vectorized) dimension.
    pub fn dim(&self) -> usize {
        match *self {
            SignalModel::Sparse { n, .. } | SignalModel::Compressible { n, .. } => n,
            SignalModel::LowRank { rows, cols, .. } => rows * cols,
        }
    }

    /// `k` for vector sets, `r` for matrices.
    pub fn complexity(&self) -> usize {
        match *self {
            SignalModel::Sparse { k, .. } | SignalModel::Compressible { k, .. } => k,
            SignalModel::LowRank { rank, .. } => rank,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SignalModel::Sparse { .. } => "sparse",
            SignalModel::Compressible { .. } => "compressible",
            SignalModel::LowRank { .. } => "lowrank",
        }
    }

    pub fn tag(&self) -> SetTag {
        match *self {
            SignalModel::Sparse { k, .. } => SetTag::Sparse { k },
            SignalModel::Compressible { k, .. } => SetTag::Compressible { k },
            SignalModel::LowRank { rows, cols, rank } => SetTag::LowRank { rows, cols, rank },
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SignalModel::Sparse { n, k } => {
                if k == 0 || k > n {
                    return Err(Error::invalid(format!("sparsity k={k} must lie in 1..={n}")));
                }
            }
            SignalModel::Compressible { n, k } => {
                compressible_exponent(n, k)?;
            }
            SignalModel::LowRank { rows, cols, rank } => {
                if rank == 0 || rank > rows.min(cols) {
                    return Err(Error::invalid(format!(
                        "rank r={rank} must lie in 1..={}",
                        rows.min(cols)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Signal> {
        match *self {
            SignalModel::Sparse { n, k } => gen_sparse(n, k, rng),
            SignalModel::Compressible { n, k } => gen_compressible(n, k, rng),
            SignalModel::LowRank { rows, cols, rank } => gen_lowrank(rows, cols, rank, rng),
        }
    }
}

impl fmt::Display for SignalModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SignalModel::Sparse { n, k } => write!(f, "sparse(n={n}, k={k})"),
            SignalModel::Compressible { n, k } => write!(f, "compressible(n={n}, k={k})"),
            SignalModel::LowRank { rows, cols, rank } => {
                write!(f, "lowrank({rows}x{cols}, r={rank})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn sparse_has_exact_support_size() {
        let x = gen_sparse(512, 4, &mut seeded(1)).unwrap();
        assert_eq!(x.values.iter().filter(|v| **v != 0.0).count(), 4);
        assert!(x.satisfies_tag());

        let dense = gen_sparse(5, 5, &mut seeded(2)).unwrap();
        assert!(dense.values.iter().all(|v| *v != 0.0));
    }

    #[test]
    fn sparse_rejects_bad_k() {
        assert!(gen_sparse(5, 0, &mut seeded(0)).is_err());
        assert!(gen_sparse(5, 6, &mut seeded(0)).is_err());
    }

    #[test]
    fn sparse_support_frequency_is_uniform() {
        let (n, k, draws) = (512usize, 4usize, 10_000usize);
        let mut counts = vec![0usize; n];
        let mut rng = seeded(99);
        for _ in 0..draws {
            let x = gen_sparse(n, k, &mut rng).unwrap();
            for (i, v) in x.values.iter().enumerate() {
                if *v != 0.0 {
                    counts[i] += 1;
                }
            }
        }
        let p = k as f64 / n as f64;
        let mean = draws as f64 * p;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        // 3σ per index is exceeded by ~0.3% of 512 indices; allow 5σ for the max
        let worst = counts
            .iter()
            .map(|&c| (c as f64 - mean).abs() / sigma)
            .fold(0.0, f64::max);
        let beyond3 = counts
            .iter()
            .filter(|&&c| (c as f64 - mean).abs() > 3.0 * sigma)
            .count();
        assert!(worst < 5.0, "worst deviation {worst}σ");
        assert!(beyond3 <= 8, "{beyond3} indices beyond 3σ");
    }

    #[test]
    fn compressible_meets_budget() {
        let x = gen_compressible(512, 4, &mut seeded(3)).unwrap();
        assert!((norm2(&x.values) - 1.0).abs() < 1e-12);
        assert!(norm1(&x.values) <= 2.0 + 1e-9);
        assert!(x.satisfies_tag());
    }

    #[test]
    fn compressible_exponent_is_tight() {
        let alpha = compressible_exponent(512, 4).unwrap();
        assert!(alpha > 1.0 && alpha < 2.0);
        // independent recomputation by direct summation in increasing order
        let s1: f64 = (1..=512).map(|i| (i as f64).powf(-alpha)).sum();
        let s2: f64 = (1..=512).map(|i| (i as f64).powf(-2.0 * alpha)).sum();
        assert!((s1 / s2.sqrt() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn compressible_single_coordinate() {
        let x = gen_compressible(1, 1, &mut seeded(5)).unwrap();
        assert_eq!(x.values.len(), 1);
        assert!((x.values[0].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compressible_infeasible_budget() {
        // at alpha = 2 the ratio already exceeds 1 = sqrt(1) for n = 512
        assert!(matches!(
            compressible_exponent(512, 1),
            Err(Error::InfeasibleBudget { .. })
        ));
    }

    #[test]
    fn lowrank_has_unit_norm_and_rank() {
        let x = gen_lowrank(64, 64, 2, &mut seeded(4)).unwrap();
        assert_eq!(x.len(), 4096);
        assert!((norm2(&x.values) - 1.0).abs() < 1e-12);
        let s = reshape(&x.values, 64, 64).unwrap().svd().unwrap().singular_values;
        assert!(s[2] <= 1e-10);

        let y = gen_lowrank(8, 6, 3, &mut seeded(6)).unwrap();
        let s = reshape(&y.values, 8, 6).unwrap().svd().unwrap().singular_values;
        assert!(s[3..].iter().all(|&v| v <= 1e-12), "{s:?}");
        assert!(y.satisfies_tag());

        let full = gen_lowrank(2, 2, 2, &mut seeded(7)).unwrap();
        assert!((norm2(&full.values) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lowrank_rejects_bad_rank() {
        assert!(gen_lowrank(4, 3, 0, &mut seeded(0)).is_err());
        assert!(gen_lowrank(4, 3, 4, &mut seeded(0)).is_err());
    }

    #[test]
    fn reshape_layout_and_isometry() {
        let x: Vec<f64> = (1..=6).map(f64::from).collect();
        let m = reshape(&x, 2, 3).unwrap();
        assert_eq!(m.get(1, 2), 6.0);
        assert!((m.frobenius_norm() - norm2(&x)).abs() < 1e-15);
        assert_eq!(vectorize(m), x);
        assert!(reshape(&x, 4, 2).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_compressible(64, 4, &mut seeded(11)).unwrap();
        let b = gen_compressible(64, 4, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
        let a = gen_sparse(64, 3, &mut seeded(11)).unwrap();
        let b = gen_sparse(64, 3, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
    }
}
