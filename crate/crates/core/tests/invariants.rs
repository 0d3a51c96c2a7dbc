//! Property-based invariants across modules.

use proptest::prelude::*;
use qcs_core::linalg::{distance, dot, norm1, norm2};
use qcs_core::pbp::pbp_reconstruct;
use qcs_core::projectors::{hard_threshold, l1ball_project, Projector};
use qcs_core::quantizer::{quantize_scalar, sense, QuantizerConfig};
use qcs_core::sensing::{SensingKind, SensingOperator};

fn kind() -> impl Strategy<Value = SensingKind> {
    prop_oneof![
        Just(SensingKind::Gaussian),
        Just(SensingKind::Bernoulli),
        Just(SensingKind::PartialDct),
        Just(SensingKind::Sors),
    ]
}

fn vector(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..=max_len)
}

proptest! {
    #[test]
    fn quantizer_error_is_in_half_open_cell(t in -1e3f64..1e3, delta in 1e-3f64..10.0) {
        let q = quantize_scalar(t, delta);
        prop_assert!(q <= t + 1e-12 * t.abs().max(1.0));
        prop_assert!(t - q < delta * (1.0 + 1e-12));
        prop_assert!(((q / delta) - (q / delta).round()).abs() < 1e-9);
    }

    #[test]
    fn adjoint_identity(kind in kind(), n in 1usize..80, frac in 0.05f64..1.0, seed in any::<u64>()) {
        let m = ((n as f64 * frac).ceil() as usize).clamp(1, n);
        let op = SensingOperator::new(kind, m, n, seed).unwrap();
        let x: Vec<f64> = (0..n).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let y: Vec<f64> = (0..m).map(|i| ((i * 5 + 1) % 7) as f64 - 3.0).collect();
        let lhs = dot(&op.apply(&x).unwrap(), &y);
        let rhs = dot(&x, &op.adjoint(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn hard_threshold_keeps_k_largest(z in vector(30), k in 0usize..8) {
        let k = k.min(z.len());
        let h = hard_threshold(&z, k).unwrap();
        prop_assert!(h.iter().filter(|v| **v != 0.0).count() <= k);
        let kept_min = z.iter().zip(&h).filter(|(_, h)| **h != 0.0).map(|(z, _)| z.abs()).fold(f64::INFINITY, f64::min);
        let dropped_max = z.iter().zip(&h).filter(|(_, h)| **h == 0.0).map(|(z, _)| z.abs()).fold(0.0, f64::max);
        prop_assert!(h.iter().all(|v| *v == 0.0) || kept_min >= dropped_max);
    }

    #[test]
    fn l1_projection_is_feasible_and_sign_preserving(z in vector(30), r in 0.01f64..5.0) {
        let p = l1ball_project(&z, r);
        prop_assert!(norm1(&p) <= r * (1.0 + 1e-12) + 1e-12);
        prop_assert!(z.iter().zip(&p).all(|(a, b)| *b == 0.0 || a.signum() == b.signum()));
    }

    #[test]
    fn compressible_projection_is_feasible_and_closest_among_samples(z in vector(24), k in 1usize..5) {
        let k = k.min(z.len());
        let p = Projector::compressible(k).project(&z).unwrap();
        prop_assert!(norm1(&p) <= (k as f64).sqrt() + 1e-9);
        prop_assert!(norm2(&p) <= 1.0 + 1e-9);
        // convex combinations of p with the feasible origin are no closer
        for t in [0.0, 0.5, 0.9] {
            let q: Vec<f64> = p.iter().map(|v| v * t).collect();
            prop_assert!(distance(&z, &p) <= distance(&z, &q) + 1e-9);
        }
    }

    #[test]
    fn pbp_estimate_lies_in_the_set(kind in kind(), seed in any::<u64>(), delta in 0.1f64..4.0) {
        let (n, m, k) = (64, 32, 3);
        let op = SensingOperator::new(kind, m, n, seed).unwrap();
        let mut x = vec![0.0; n];
        x[(seed % n as u64) as usize] = 0.8;
        x[((seed / 7) % n as u64) as usize] = -0.6;
        let meas = sense(&op, &x, QuantizerConfig::dithered(delta).unwrap(), seed ^ 1).unwrap();
        let rec = pbp_reconstruct(&op, &meas, &Projector::sparse(k)).unwrap();
        prop_assert!(rec.estimate.values.iter().filter(|v| **v != 0.0).count() <= k);
        prop_assert!(meas.y.iter().all(|v| ((v / delta) - (v / delta).round()).abs() < 1e-9));
    }
}
