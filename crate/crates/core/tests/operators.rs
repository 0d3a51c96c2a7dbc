use qcs_core::linalg::{distance, dot, norm2};
use qcs_core::rng::seeded;
use qcs_core::sensing::{dct2_orthonormal, idct2_orthonormal, Dct, SensingKind, SensingOperator};
use rand::Rng;
use rand_distr::StandardNormal;

const KINDS: [SensingKind; 4] = [
    SensingKind::Gaussian,
    SensingKind::Bernoulli,
    SensingKind::PartialDct,
    SensingKind::Sors,
];

fn gaussian(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Orthonormal DCT-II matrix entry from the cosine formula.
fn dct_entry(n: usize, k: usize, j: usize) -> f64 {
    let c = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
    c * (std::f64::consts::PI * (2 * j + 1) as f64 * k as f64 / (2 * n) as f64).cos()
}

#[test]
fn adjoint_identity_for_every_ensemble() {
    let mut rng = seeded(11);
    for kind in KINDS {
        for pair in 0..100 {
            let n = rng.gen_range(1..=96);
            let m = rng.gen_range(1..=n);
            let op = SensingOperator::new(kind, m, n, 1000 + pair).unwrap();
            let x = gaussian(n, &mut rng);
            let y = gaussian(m, &mut rng);
            let lhs = dot(&op.apply(&x).unwrap(), &y);
            let rhs = dot(&x, &op.adjoint(&y).unwrap());
            let scale = norm2(&op.apply(&x).unwrap()) * norm2(&y) + norm2(&x) * norm2(&op.adjoint(&y).unwrap());
            assert!(
                (lhs - rhs).abs() <= 1e-10 * scale.max(1e-300),
                "{kind} m={m} n={n}: {lhs} vs {rhs}"
            );
        }
    }
}

#[test]
fn fast_structured_operators_match_formula_matrix() {
    let mut rng = seeded(12);
    for kind in [SensingKind::PartialDct, SensingKind::Sors] {
        for n in 1..=64 {
            let m = rng.gen_range(1..=n);
            let op = SensingOperator::new(kind, m, n, n as u64).unwrap();
            let rows = op.rows().unwrap().to_vec();
            let signs = op.signs().map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; n]);
            let root_n = (n as f64).sqrt();
            let dense: Vec<Vec<f64>> = rows
                .iter()
                .map(|&r| (0..n).map(|j| root_n * dct_entry(n, r, j) * signs[j]).collect())
                .collect();

            let x = gaussian(n, &mut rng);
            let y = gaussian(m, &mut rng);
            let fast = op.apply(&x).unwrap();
            let slow: Vec<f64> = dense.iter().map(|row| dot(row, &x)).collect();
            assert!(distance(&fast, &slow) <= 1e-10 * norm2(&slow).max(1.0), "{kind} n={n}");

            let fast_t = op.adjoint(&y).unwrap();
            let slow_t: Vec<f64> = (0..n).map(|j| (0..m).map(|i| dense[i][j] * y[i]).sum()).collect();
            assert!(distance(&fast_t, &slow_t) <= 1e-10 * norm2(&slow_t).max(1.0), "{kind}ᵀ n={n}");
        }
    }
}

#[test]
fn selected_rows_are_distinct() {
    for kind in [SensingKind::PartialDct, SensingKind::Sors] {
        let op = SensingOperator::new(kind, 200, 256, 3).unwrap();
        let mut rows = op.rows().unwrap().to_vec();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), 200);
        assert!(rows.iter().all(|&r| r < 256));
    }
}

#[test]
fn dct_is_orthonormal() {
    for n in [1usize, 2, 3, 5, 8, 17, 64, 100, 512] {
        let dct = Dct::new(n);
        let cols: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                dct.forward_in_place(&mut e);
                e
            })
            .collect();
        let probe: Vec<usize> = if n <= 64 { (0..n).collect() } else { vec![0, 1, n / 2, n - 1] };
        for &a in &probe {
            for &b in &probe {
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot(&cols[a], &cols[b]) - expect).abs() <= 1e-12, "n={n} ({a},{b})");
            }
        }
    }
}

#[test]
fn dct_round_trip() {
    let mut rng = seeded(13);
    for n in [1usize, 2, 7, 16, 31, 128, 512, 1000] {
        let x = gaussian(n, &mut rng);
        let back = idct2_orthonormal(&dct2_orthonormal(&x));
        assert!(distance(&x, &back) <= 1e-12 * norm2(&x).max(1.0), "n={n}");
        let fwd = dct2_orthonormal(&x);
        assert!((norm2(&fwd) - norm2(&x)).abs() <= 1e-12 * norm2(&x).max(1.0));
    }
}

#[test]
fn structured_operators_are_scaled_isometries_on_full_sampling() {
    let mut rng = seeded(14);
    for kind in [SensingKind::PartialDct, SensingKind::Sors] {
        let op = SensingOperator::new(kind, 64, 64, 5).unwrap();
        let x = gaussian(64, &mut rng);
        let back = op.adjoint(&op.apply(&x).unwrap()).unwrap();
        let expect: Vec<f64> = x.iter().map(|v| 64.0 * v).collect();
        assert!(distance(&back, &expect) <= 1e-10 * norm2(&expect));
    }
}

#[test]
fn operators_are_seed_determined() {
    for kind in KINDS {
        let a = SensingOperator::new(kind, 20, 40, 77).unwrap().to_dense();
        let b = SensingOperator::new(kind, 20, 40, 77).unwrap().to_dense();
        let c = SensingOperator::new(kind, 20, 40, 78).unwrap().to_dense();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
