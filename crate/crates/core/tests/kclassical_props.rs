use proptest::prelude::*;
use qcorr::correlations::discord_oz;
use qcorr::kclassical::{commutant_blocks, is_k_classical_with, mi_drop, DEFAULT_TOL};
use qcorr::linalg::{self, CMatrix};
use qcorr::measurements::membership;
use qcorr::qstate::{derive_seed, random_density, rng_from_seed};
use qcorr::{DensityMatrix, MeasurementClass, OptimizerConfig, QuantumChannel, Subsystem};

/// `Σ_k (P_k⊗I) σ_k (P_k⊗I)` for a partition of A into consecutive blocks,
/// rotated by a random unitary on A.
fn block_state(d_a: usize, sizes: &[usize], seed: u64) -> DensityMatrix {
    let dim = d_a * 2;
    let mut acc = linalg::zeros(dim, dim);
    let mut start = 0;
    for (k, &size) in sizes.iter().enumerate() {
        let mut p = linalg::zeros(d_a, d_a);
        for i in start..start + size {
            p[(i, i)] = 1.0.into();
        }
        let lifted = p.kronecker(&linalg::identity(2));
        let sigma = random_density((d_a, 2), dim, derive_seed(seed, k as u64)).unwrap();
        acc += &lifted * sigma.matrix() * &lifted;
        start += size;
    }
    let tr = linalg::trace(&acc);
    let rho = DensityMatrix::new(acc / tr, (d_a, 2)).unwrap();
    let u = linalg::haar_unitary(d_a, &mut rng_from_seed(derive_seed(seed, 99)));
    rho.apply_channel(&QuantumChannel::unitary(Subsystem::A, vec![d_a], u).unwrap()).unwrap()
}

fn structured() -> impl Strategy<Value = (DensityMatrix, bool)> {
    let partitions = prop::sample::select(vec![
        (2, vec![1, 1]),
        (2, vec![2]),
        (3, vec![1, 1, 1]),
        (3, vec![1, 2]),
        (3, vec![3]),
    ]);
    (partitions, any::<u64>()).prop_map(|((d_a, sizes), seed)| {
        let rank1 = sizes.iter().all(|&s| s == 1);
        (block_state(d_a, &sizes, seed), rank1)
    })
}

fn fast() -> OptimizerConfig {
    OptimizerConfig { restarts: 8, ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn blocks_are_a_fixed_point_decomposition((rho, _) in structured()) {
        let blocks = commutant_blocks(&rho).unwrap();
        let d_a = rho.dims().0;
        let mut total = linalg::zeros(d_a, d_a);
        let mut pinched = linalg::zeros(rho.dim(), rho.dim());
        for (i, p) in blocks.iter().enumerate() {
            prop_assert!(linalg::max_abs_diff(&(p * p), p) < 1e-8);
            for q in &blocks[i + 1..] {
                prop_assert!(linalg::frobenius(&(p * q)) < 1e-8);
            }
            total += p;
            let lifted: CMatrix = p.kronecker(&linalg::identity(rho.dims().1));
            pinched += &lifted * rho.matrix() * &lifted;
        }
        prop_assert!(linalg::max_abs_diff(&total, &linalg::identity(d_a)) < 1e-8);
        prop_assert!(linalg::max_abs_diff(&pinched, rho.matrix()) < 1e-8);
    }

    #[test]
    fn classical_verdicts_carry_a_valid_witness((rho, _) in structured()) {
        let v = is_k_classical_with(&rho, MeasurementClass::All, DEFAULT_TOL, &fast());
        if v.is_classical {
            let w = v.witness.expect("classical verdicts have a witness");
            prop_assert!(membership(&w, MeasurementClass::All));
            prop_assert!(mi_drop(&rho, &w).unwrap() <= DEFAULT_TOL);
        }
    }

    #[test]
    fn rank1_classicality_matches_vanishing_discord((rho, expect_rank1) in structured()) {
        let opt = OptimizerConfig::default();
        let v = is_k_classical_with(&rho, MeasurementClass::Rank1Projective, DEFAULT_TOL, &opt);
        let d = discord_oz(&rho, &opt);
        prop_assert_eq!(v.is_classical, d < 10.0 * DEFAULT_TOL, "discord {}", d);
        if expect_rank1 {
            prop_assert!(v.is_classical);
        }
    }

    #[test]
    fn larger_classes_are_easier((rho, _) in structured()) {
        let opt = fast();
        let d_a = rho.dims().0;
        let verdict = |cls| is_k_classical_with(&rho, cls, DEFAULT_TOL, &opt).is_classical;
        let rank1 = verdict(MeasurementClass::Rank1Projective);
        let all = verdict(MeasurementClass::All);
        prop_assert!(!rank1 || all);
        let mut previous = all;
        for n in 3..=d_a * d_a {
            let now = verdict(MeasurementClass::MinOutcomes(n));
            prop_assert!(!now || previous, "minout:{} classical but minout:{} not", n, n - 1);
            previous = now;
        }
    }
}
