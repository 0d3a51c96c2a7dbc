//! Minimal-distance projectors onto the supported signal sets.

use crate::error::{Error, Result};
use crate::linalg::{distance, norm1, norm2, Matrix};
use crate::signals::{reshape, SetTag, Signal, SignalModel};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Best k-term approximation: keeps the `k` largest magnitudes, lowest index
/// first among ties.
pub fn hard_threshold(z: &[f64], k: usize) -> Result<Vec<f64>> {
    if k > z.len() {
        return Err(Error::invalid(format!("k={k} exceeds dimension {}", z.len())));
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    // stable sort keeps ascending index order within equal magnitudes
    order.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()));
    let mut out = vec![0.0; z.len()];
    for &i in &order[..k] {
        out[i] = z[i];
    }
    Ok(out)
}

/// Best rank-`r` approximation by truncated SVD.
pub fn lowrank_project(z: &Matrix, rank: usize) -> Result<Matrix> {
    let p = z.rows().min(z.cols());
    if rank == 0 || rank > p {
        return Err(Error::invalid(format!("rank r={rank} must lie in 1..={p}")));
    }
    Ok(z.svd()?.reconstruct(rank))
}

/// Euclidean projection onto `{u : ‖u‖₁ ≤ radius}` by sorting and
/// soft-thresholding.
///
/// Panics if `radius` is not positive.
pub fn l1ball_project(z: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "l1 radius must be positive");
    if norm1(z) <= radius {
        return z.to_vec();
    }
    let threshold = l1_threshold(z, radius);
    soft_threshold(z, threshold)
}

/// Level `θ` with `‖soft(z, θ)‖₁ = radius`, assuming `‖z‖₁ > radius`.
fn l1_threshold(z: &[f64], radius: f64) -> f64 {
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (j + 1) as f64;
        if m > candidate {
            theta = candidate;
        } else {
            break;
        }
    }
    theta.max(0.0)
}

pub(crate) fn soft_threshold(z: &[f64], theta: f64) -> Vec<f64> {
    z.iter()
        .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

/// Radial projection onto the ℓ₂ ball of the given radius.
///
/// Panics if `radius` is not positive.
pub fn l2ball_project(z: &[f64], radius: f64) -> Vec<f64> {
    assert!(radius > 0.0, "l2 radius must be positive");
    let norm = norm2(z);
    if norm <= radius {
        z.to_vec()
    } else {
        let s = radius / norm;
        z.iter().map(|v| v * s).collect()
    }
}

/// The ℓ₂ projection of the ℓ₁ projection onto `C_k`. Feasible but not the
/// Euclidean projection in general; kept so the gap to
/// [`compressible_project`] can be measured.
pub fn compressible_compose(z: &[f64], k: usize) -> Vec<f64> {
    l2ball_project(&l1ball_project(z, (k as f64).sqrt()), 1.0)
}

/// Euclidean projection onto `C_k = B₁(√k) ∩ B₂(1)` by Dykstra's
/// alternating projections. The first sweep yields
/// [`compressible_compose`]; iteration continues until the iterate and
/// both correction terms move by less than `tol` in one sweep and the
/// iterate meets the ℓ₁ constraint to within `1e-9`.
///
/// Near inputs where one coordinate sits exactly at the soft-threshold
/// level Dykstra converges sublinearly and `max_iter` may not suffice;
/// [`Projector::Compressible`] then falls back to
/// [`compressible_project_exact`].
pub fn compressible_project(z: &[f64], k: usize, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("compressible budget k must be at least 1"));
    }
    let radius = (k as f64).sqrt();
    if norm1(z) <= radius && norm2(z) <= 1.0 {
        return Ok(z.to_vec());
    }
    let n = z.len();
    let mut x = z.to_vec();
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        for i in 0..n {
            shifted[i] = x[i] + p[i];
        }
        let y = l1ball_project(&shifted, radius);
        let mut moved = 0.0;
        for i in 0..n {
            let pi = shifted[i] - y[i];
            moved += (pi - p[i]) * (pi - p[i]);
            p[i] = pi;
            shifted[i] = y[i] + q[i];
        }
        let next = l2ball_project(&shifted, 1.0);
        for i in 0..n {
            let qi = shifted[i] - next[i];
            moved += (qi - q[i]) * (qi - q[i]);
            q[i] = qi;
        }
        // iterates can stall while the corrections still move
        residual = (distance(&next, &x).powi(2) + moved).sqrt();
        x = next;
        if residual < tol && norm1(&x) <= radius + 1e-9 {
            return Ok(x);
        }
    }
    Err(Error::Convergence {
        what: "dykstra projection onto C_k",
        iterations: max_iter,
        residual,
    })
}

/// Projection onto `C_k` from its optimality conditions: a single-ball
/// projection when that is feasible, otherwise `S_θ(z)/‖S_θ(z)‖₂` with `θ`
/// solving `‖S_θ(z)‖₁ = √k ‖S_θ(z)‖₂`, found exactly by scanning the
/// breakpoints of the soft threshold.
pub fn compressible_project_exact(z: &[f64], k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("compressible budget k must be at least 1"));
    }
    let r = (k as f64).sqrt();
    let (l1, l2) = (norm1(z), norm2(z));
    if l1 <= r && l2 <= 1.0 {
        return Ok(z.to_vec());
    }
    if l2 > 1.0 && l1 <= r * l2 {
        return Ok(l2ball_project(z, 1.0));
    }
    let y = l1ball_project(z, r);
    if norm2(&y) <= 1.0 {
        return Ok(y);
    }
    let mut mags: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let kf = k as f64;
    // On [a_{s+1}, a_s] the top s entries survive; with A = Σa, B = Σa²
    // the ratio condition reads s(s−k)θ² − 2A(s−k)θ + A² − kB = 0.
    let (mut a, mut b) = (0.0, 0.0);
    let mut theta = None;
    for s in 1..=mags.len() {
        a += mags[s - 1];
        b += mags[s - 1] * mags[s - 1];
        let hi = mags[s - 1];
        let lo = mags.get(s).copied().unwrap_or(0.0);
        if hi == lo {
            continue;
        }
        let sf = s as f64;
        let ratio_at = |t: f64| (a - sf * t) / (b - 2.0 * t * a + sf * t * t).max(0.0).sqrt();
        // ratio decreases in θ; the root lies where it crosses r
        if ratio_at(lo) < r {
            continue;
        }
        let t = if s == k {
            lo
        } else {
            let c = (a * a - kf * b) / (sf - kf);
            let disc = (a * a - sf * c).max(0.0).sqrt();
            [(a - disc) / sf, (a + disc) / sf]
                .into_iter()
                .filter(|t| *t >= lo - 1e-12 * hi && *t <= hi * (1.0 + 1e-12))
                .min_by(|x, y| (ratio_at(*x) - r).abs().total_cmp(&(ratio_at(*y) - r).abs()))
                .unwrap_or(lo)
        };
        theta = Some(t.clamp(lo, hi));
        break;
    }
    let theta = theta.ok_or(Error::Convergence {
        what: "exact projection onto C_k",
        iterations: mags.len(),
        residual: f64::NAN,
    })?;
    let s = soft_threshold(z, theta);
    let nrm = norm2(&s);
    Ok(s.iter().map(|v| v / nrm).collect())
}

/// A projector bound to one signal set and its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Projector {
    Sparse {
        k: usize,
    },
    Compressible {
        k: usize,
        tol: f64,
        max_iter: usize,
    },
    LowRank {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    L1Ball {
        radius: f64,
    },
    L2Ball {
        radius: f64,
    },
}

impl Projector {
    pub fn sparse(k: usize) -> Self {
        Projector::Sparse { k }
    }

    pub fn compressible(k: usize) -> Self {
        Projector::Compressible {
            k,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn lowrank(rows: usize, cols: usize, rank: usize) -> Self {
        Projector::LowRank { rows, cols, rank }
    }

    /// The projector matching a signal set; `None` for [`SetTag::Generic`].
    pub fn for_set(tag: &SetTag) -> Option<Self> {
        match *tag {
            SetTag::Sparse { k } => Some(Projector::sparse(k)),
            SetTag::Compressible { k } => Some(Projector::compressible(k)),
            SetTag::LowRank { rows, cols, rank } => Some(Projector::lowrank(rows, cols, rank)),
            SetTag::Generic => None,
        }
    }

    pub fn for_model(model: &SignalModel) -> Self {
        Projector::for_set(&model.tag()).expect("models never carry the generic tag")
    }

    pub fn set_tag(&self) -> SetTag {
        match *self {
            Projector::Sparse { k } => SetTag::Sparse { k },
            Projector::Compressible { k, .. } => SetTag::Compressible { k },
            Projector::LowRank { rows, cols, rank } => SetTag::LowRank { rows, cols, rank },
            Projector::L1Ball { .. } | Projector::L2Ball { .. } => SetTag::Generic,
        }
    }

    pub fn is_convex(&self) -> bool {
        matches!(
            self,
            Projector::Compressible { .. } | Projector::L1Ball { .. } | Projector::L2Ball { .. }
        )
    }

    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Projector::Sparse { k } => hard_threshold(z, k),
            Projector::Compressible { k, tol, max_iter } => {
                match compressible_project(z, k, tol, max_iter) {
                    Err(Error::Convergence { .. }) => compressible_project_exact(z, k),
                    other => other,
                }
            }
            Projector::LowRank { rows, cols, rank } => {
                let m = reshape(z, rows, cols)?;
                Ok(lowrank_project(&m, rank)?.into_vec())
            }
            Projector::L1Ball { radius } => {
                check_radius(radius)?;
                Ok(l1ball_project(z, radius))
            }
            Projector::L2Ball { radius } => {
                check_radius(radius)?;
                Ok(l2ball_project(z, radius))
            }
        }
    }

    pub fn project_signal(&self, z: &[f64]) -> Result<Signal> {
        Ok(Signal::new(self.project(z)?, self.set_tag()))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("ball radius {r} must be positive")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::signals::is_member;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn hard_threshold_examples() {
        assert_eq!(hard_threshold(&[3.0, -1.0, 2.0], 2).unwrap(), vec![3.0, 0.0, 2.0]);
        assert_eq!(hard_threshold(&[3.0, -1.0, 2.0], 0).unwrap(), vec![0.0; 3]);
        assert_eq!(hard_threshold(&[1.0, 1.0, 1.0], 1).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(hard_threshold(&[-1.0, 1.0, 0.5], 1).unwrap(), vec![-1.0, 0.0, 0.0]);
        assert!(hard_threshold(&[1.0], 2).is_err());
    }

    #[test]
    fn lowrank_examples() {
        let d = Matrix::from_diag(&[3.0, 1.0]);
        assert_eq!(lowrank_project(&d, 1).unwrap(), Matrix::from_diag(&[3.0, 0.0]));
        let mut rng = seeded(1);
        let z = Matrix::from_col_major(4, 3, (0..12).map(|_| rng.sample(StandardNormal)).collect())
            .unwrap();
        let full = lowrank_project(&z, 3).unwrap();
        assert!(distance(full.as_slice(), z.as_slice()) < 1e-10);
        assert!(lowrank_project(&z, 0).is_err());
        assert!(lowrank_project(&z, 4).is_err());
    }

    #[test]
    fn ball_examples() {
        assert_eq!(l1ball_project(&[2.0, 0.0], 1.0), vec![1.0, 0.0]);
        assert_eq!(l1ball_project(&[0.2, -0.3], 1.0), vec![0.2, -0.3]);
        let p = l1ball_project(&[3.0, 1.0], 2.0);
        assert!((p[0] - 2.0).abs() < 1e-15 && p[1].abs() < 1e-15);
        let p = l2ball_project(&[3.0, 4.0], 1.0);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(l2ball_project(&[0.1, 0.2], 1.0), vec![0.1, 0.2]);
    }

    #[test]
    fn compressible_examples() {
        let inside = [0.3, -0.2, 0.1];
        assert_eq!(compressible_project(&inside, 1, 1e-10, 1000).unwrap(), inside.to_vec());
        let axis = compressible_project(&[10.0, 0.0, 0.0], 4, 1e-10, 1000).unwrap();
        assert!(distance(&axis, &[1.0, 0.0, 0.0]) < 1e-12);
        assert!(compressible_project(&[1.0], 0, 1e-10, 10).is_err());
    }

    #[test]
    fn compressible_reports_non_convergence() {
        let mut rng = seeded(2);
        let z: Vec<f64> = (0..64).map(|_| rng.sample::<f64, _>(StandardNormal) * 3.0).collect();
        match compressible_project(&z, 4, 0.0, 3) {
            Err(Error::Convergence { residual, iterations, .. }) => {
                assert_eq!(iterations, 3);
                assert!(residual.is_finite());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = vec![0.0; 6];
        for p in [
            Projector::sparse(2),
            Projector::compressible(2),
            Projector::lowrank(2, 3, 1),
            Projector::L1Ball { radius: 1.0 },
            Projector::L2Ball { radius: 1.0 },
        ] {
            assert_eq!(p.project(&z).unwrap(), z);
        }
    }

    #[test]
    fn outputs_are_members() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let z: Vec<f64> = (0..12).map(|_| rng.sample::<f64, _>(StandardNormal) * 2.0).collect();
            for p in [Projector::sparse(3), Projector::compressible(2), Projector::lowrank(4, 3, 1)] {
                let out = p.project(&z).unwrap();
                assert!(is_member(&out, &p.set_tag()), "{p:?}");
            }
        }
    }

    #[test]
    fn matrix_projector_checks_shape() {
        assert!(Projector::lowrank(3, 3, 1).project(&[0.0; 8]).is_err());
        assert!(Projector::L1Ball { radius: 0.0 }.project(&[1.0]).is_err());
    }
}
