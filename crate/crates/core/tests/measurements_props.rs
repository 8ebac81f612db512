use proptest::prelude::*;
use qcorr::linalg;
use qcorr::measurements::{apply_instrument, membership, sample_instrument};
use qcorr::correlations::mutual_information;
use qcorr::qstate::random_density;
use qcorr::{MeasurementClass, PostMeasurement};

fn class_and_dim() -> impl Strategy<Value = (MeasurementClass, usize)> {
    prop::sample::select(vec![
        (MeasurementClass::Rank1Projective, 2),
        (MeasurementClass::Rank1Projective, 3),
        (MeasurementClass::RankRProjective(2), 4),
        (MeasurementClass::MinOutcomes(2), 2),
        (MeasurementClass::MinOutcomes(3), 2),
        (MeasurementClass::MinOutcomes(4), 3),
        (MeasurementClass::All, 3),
    ])
}

proptest! {
    #[test]
    fn sampled_instruments_belong_to_their_class((cls, d) in class_and_dim(), seed in any::<u64>()) {
        let inst = sample_instrument(cls, d, seed).unwrap();
        prop_assert!(inst.completeness_deviation() < 1e-10);
        prop_assert!(membership(&inst, cls), "{} at d = {}", cls, d);
    }

    #[test]
    fn post_measurement_states_are_normalized(
        (cls, d) in class_and_dim(),
        seed in any::<u64>(),
        state_seed in any::<u64>(),
    ) {
        let inst = sample_instrument(cls, d, seed).unwrap();
        let rho = random_density((d, 2), 2 * d, state_seed).unwrap();
        for mode in [PostMeasurement::Average, PostMeasurement::Encode] {
            let out = apply_instrument(&rho, &inst, mode).unwrap();
            prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn keeping_the_outcome_never_loses_information(
        (cls, d) in class_and_dim(),
        seed in any::<u64>(),
        state_seed in any::<u64>(),
    ) {
        let inst = sample_instrument(cls, d, seed).unwrap();
        let rho = random_density((d, 2), 2 * d, state_seed).unwrap();
        let kept = mutual_information(&apply_instrument(&rho, &inst, PostMeasurement::Encode).unwrap());
        let dropped = mutual_information(&apply_instrument(&rho, &inst, PostMeasurement::Average).unwrap());
        prop_assert!(kept >= dropped - 1e-9, "{} < {}", kept, dropped);
    }
}
