//! Projected back projection (PBP) and the quantized iterative hard
//! thresholding (QIHT) refinement.

use crate::error::{check_len, Result};
use crate::linalg::{axpy, scale};
use crate::projectors::Projector;
use crate::quantizer::{quantized_map, Measurements};
use crate::sensing::SensingOperator;
use crate::signals::Signal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Pbp,
    Qiht { iterations: usize, step: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub estimate: Signal,
    /// `Φᵀy / m`.
    pub back_projection: Vec<f64>,
    pub method: Method,
}

/// `Φᵀy / m`.
pub fn back_project(op: &SensingOperator, y: &[f64]) -> Result<Vec<f64>> {
    check_len(op.m(), y.len())?;
    let a = op.adjoint(y)?;
    Ok(scale(&a, 1.0 / op.m() as f64))
}

/// `x̂ = P_K(Φᵀy / m)`. Matrix projectors reshape the back projection
/// column-major before truncating and vectorize the result.
pub fn pbp_reconstruct(
    op: &SensingOperator,
    measurements: &Measurements,
    projector: &Projector,
) -> Result<Reconstruction> {
    let back_projection = back_project(op, &measurements.y)?;
    let estimate = projector.project_signal(&back_projection)?;
    Ok(Reconstruction {
        estimate,
        back_projection,
        method: Method::Pbp,
    })
}

pub const DEFAULT_QIHT_STEP: f64 = 1.0;

/// QIHT: `x⁽¹⁾ = P_K((μ/m)Φᵀy)` and
/// `x⁽ᵗ⁺¹⁾ = P_K(x⁽ᵗ⁾ + (μ/m)Φᵀ(y − A(x⁽ᵗ⁾)))`, re-sensing with the dither
/// stored in `measurements`. Returns `x⁽ᵀ⁾`. No convergence is claimed.
pub fn qiht(
    op: &SensingOperator,
    measurements: &Measurements,
    projector: &Projector,
    step: f64,
    iterations: usize,
) -> Result<Reconstruction> {
    if iterations == 0 {
        return Err(crate::Error::invalid("qiht needs at least one iteration"));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(crate::Error::invalid(format!("qiht step {step} must be positive")));
    }
    let back_projection = back_project(op, &measurements.y)?;
    let mut x = projector.project(&scale(&back_projection, step))?;
    let delta = measurements.config.delta();
    let gain = step / op.m() as f64;
    for _ in 1..iterations {
        let resensed = quantized_map(op, &x, delta, &measurements.dither)?;
        let residual: Vec<f64> = measurements
            .y
            .iter()
            .zip(&resensed)
            .map(|(a, b)| a - b)
            .collect();
        if residual.iter().all(|r| *r == 0.0) {
            // consistent iterate: the update vanishes and P_K fixes x ∈ K
            break;
        }
        let mut z = x.clone();
        axpy(gain, &op.adjoint(&residual)?, &mut z);
        x = projector.project(&z)?;
    }
    Ok(Reconstruction {
        estimate: Signal::new(x, projector.set_tag()),
        back_projection,
        method: Method::Qiht { iterations, step },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;
    use crate::quantizer::{sense, Dithering, QuantizerConfig};
    use crate::rng::seeded;
    use crate::sensing::SensingKind;
    use crate::signals::gen_sparse;

    #[test]
    fn back_projection_is_linear() {
        let op = SensingOperator::new(SensingKind::Gaussian, 20, 30, 1).unwrap();
        assert_eq!(back_project(&op, &[0.0; 20]).unwrap(), vec![0.0; 30]);
        let y1: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let y2: Vec<f64> = (0..20).map(|i| (i as f64).cos()).collect();
        let sum: Vec<f64> = y1.iter().zip(&y2).map(|(a, b)| a + b).collect();
        let lhs = back_project(&op, &sum).unwrap();
        let b1 = back_project(&op, &y1).unwrap();
        let b2 = back_project(&op, &y2).unwrap();
        for i in 0..30 {
            assert!((lhs[i] - b1[i] - b2[i]).abs() < 1e-12);
        }
        assert!(back_project(&op, &[0.0; 19]).is_err());
    }

    /// Full partial DCT (`ΦᵀΦ/m = I`) and a signal whose image lies on the
    /// lattice, so undithered quantization is the identity.
    fn lattice_instance(n: usize) -> (SensingOperator, Vec<f64>, Measurements) {
        let op = SensingOperator::new(SensingKind::PartialDct, n, n, 3).unwrap();
        let y: Vec<f64> = (0..n).map(|i| ((i * 7) % 5) as f64 - 2.0).collect();
        let x = back_project(&op, &y).unwrap();
        let cfg = QuantizerConfig::new(1.0, Dithering::Disabled).unwrap();
        let meas = sense(&op, &x, cfg, 0).unwrap();
        assert_eq!(meas.y, y);
        (op, x, meas)
    }

    #[test]
    fn orthonormal_full_sampling_inverts_exactly() {
        let (op, x, meas) = lattice_instance(16);
        let rec = pbp_reconstruct(&op, &meas, &Projector::L2Ball { radius: 1e6 }).unwrap();
        assert_eq!(rec.estimate.values, x);
    }

    #[test]
    fn zero_signal_estimate_is_bounded_for_convex_sets() {
        let op = SensingOperator::new(SensingKind::Gaussian, 40, 20, 4).unwrap();
        let cfg = QuantizerConfig::dithered(1.0).unwrap();
        let meas = sense(&op, &[0.0; 20], cfg, 7).unwrap();
        let rec = pbp_reconstruct(&op, &meas, &Projector::compressible(2)).unwrap();
        assert!(norm2(&rec.estimate.values) <= norm2(&rec.back_projection) + 1e-12);
    }

    #[test]
    fn qiht_first_iterate_is_pbp() {
        let mut rng = seeded(5);
        let x = gen_sparse(64, 3, &mut rng).unwrap();
        let op = SensingOperator::new(SensingKind::Gaussian, 48, 64, 6).unwrap();
        let meas = sense(&op, &x.values, QuantizerConfig::dithered(0.5).unwrap(), 8).unwrap();
        let proj = Projector::sparse(3);
        let a = pbp_reconstruct(&op, &meas, &proj).unwrap();
        let b = qiht(&op, &meas, &proj, 1.0, 1).unwrap();
        assert_eq!(a.estimate, b.estimate);
        assert!(qiht(&op, &meas, &proj, 1.0, 0).is_err());
        assert!(qiht(&op, &meas, &proj, 0.0, 3).is_err());
    }

    #[test]
    fn qiht_consistent_iterate_is_fixed() {
        let (op, x, meas) = lattice_instance(8);
        let proj = Projector::L2Ball { radius: 1e6 };
        let t1 = qiht(&op, &meas, &proj, 1.0, 1).unwrap();
        let t5 = qiht(&op, &meas, &proj, 1.0, 5).unwrap();
        assert_eq!(t1.estimate.values, x);
        assert_eq!(t5.estimate, t1.estimate);
    }
}
