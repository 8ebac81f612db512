use proptest::prelude::*;
use qcorr::linalg;
use qcorr::qstate::{derive_seed, random_density, random_local_channel};
use qcorr::{DensityMatrix, Party};

fn dims() -> impl Strategy<Value = (usize, usize)> {
    prop::sample::select(vec![(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
}

fn state() -> impl Strategy<Value = DensityMatrix> {
    (dims(), any::<u64>(), 0.0..1.0f64).prop_map(|(d, seed, r)| {
        let rank = 1 + (r * (d.0 * d.1) as f64) as usize;
        random_density(d, rank.min(d.0 * d.1), seed).unwrap()
    })
}

fn min_eigenvalue(m: &linalg::CMatrix) -> f64 {
    linalg::eigvalsh(m).into_iter().fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn marginals_have_unit_trace(rho in state()) {
        for keep in [Party::A, Party::B] {
            let m = rho.partial_trace(keep);
            prop_assert!((linalg::trace(m.matrix()).re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn local_channels_preserve_trace_and_positivity(
        rho in state(),
        seed in any::<u64>(),
        n_kraus in 1usize..4,
        on_a in any::<bool>(),
        grow in 0usize..2,
    ) {
        let (party, d) = if on_a { (Party::A, rho.dims().0) } else { (Party::B, rho.dims().1) };
        let ch = random_local_channel(party, (d, d + grow), n_kraus, seed).unwrap();
        prop_assert!(ch.completeness_deviation() < 1e-10);
        let out = rho.apply_channel(&ch).unwrap();
        prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-10);
        prop_assert!(min_eigenvalue(out.matrix()) > -1e-10);
    }

    #[test]
    fn tensor_then_trace_recovers_factors(d_a in 1usize..4, d_b in 1usize..4, seed in any::<u64>()) {
        let a = random_density((d_a, 1), d_a, seed).unwrap();
        let b = random_density((d_b, 1), d_b, derive_seed(seed, 1)).unwrap();
        let ab = a.tensor(&b);
        prop_assert_eq!(ab.dims(), (d_a, d_b));
        prop_assert!(linalg::max_abs_diff(ab.partial_trace(Party::A).matrix(), a.matrix()) < 1e-10);
        prop_assert!(linalg::max_abs_diff(ab.partial_trace(Party::B).matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn sampling_is_deterministic(d in dims(), seed in any::<u64>()) {
        let x = random_density(d, d.0 * d.1, seed).unwrap();
        let y = random_density(d, d.0 * d.1, seed).unwrap();
        prop_assert_eq!(x.matrix(), y.matrix());
    }
}

#[test]
fn separable_mixtures_are_ppt() {
    for trial in 0..100u64 {
        let seed = derive_seed(99, trial);
        let n_terms = 1 + (seed % 4) as usize;
        let terms: Vec<DensityMatrix> = (0..n_terms as u64)
            .map(|k| {
                let a = random_density((2, 1), 1 + (k as usize % 2), derive_seed(seed, 2 * k)).unwrap();
                let b = random_density((3, 1), 1 + (k as usize % 3), derive_seed(seed, 2 * k + 1)).unwrap();
                a.tensor(&b)
            })
            .collect();
        let w = 1.0 / n_terms as f64;
        let parts: Vec<(f64, &DensityMatrix)> = terms.iter().map(|t| (w, t)).collect();
        let rho = DensityMatrix::mixture(&parts).unwrap();
        assert!(!rho.is_npt().npt, "trial {trial}");
    }
}
