use confseq_core::bounds::StitchingFunctions;
use confseq_core::confseq::{
    dkw_boundary, ks_two_sample_boundary, mmd_boundary, tv_finite_boundary, ConfSeqConfig, ConfSeqState,
    DivergenceKind, Mode, Observation, ReferenceCdf, Stream,
};
use confseq_core::estimators::{ks_two_sample, EmpiricalSample, KernelSpec};
use proptest::prelude::*;

fn st() -> StitchingFunctions {
    StitchingFunctions::default()
}

proptest! {
    #[test]
    fn radii_shrink_with_delta(t in 1u64..5000, s in 1u64..5000, d1 in 0.01f64..0.5, d2 in 0.01f64..0.5) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(dkw_boundary(t, hi, &st()).unwrap() <= dkw_boundary(t, lo, &st()).unwrap());
        for mode in [Mode::AsStated, Mode::DerivationConsistent] {
            let a = ks_two_sample_boundary(t, s, hi, &st(), mode).unwrap();
            let b = ks_two_sample_boundary(t, s, lo, &st(), mode).unwrap();
            prop_assert!(a.gamma <= b.gamma && a.kappa <= b.kappa);
            let a = mmd_boundary(t, s, hi, &st(), 1.0, mode).unwrap();
            let b = mmd_boundary(t, s, lo, &st(), 1.0, mode).unwrap();
            prop_assert!(a.gamma <= b.gamma);
        }
    }

    #[test]
    fn tv_modes_agree_at_even_t(half in 1u64..10_000, k in 2usize..20) {
        let t = 2 * half;
        let a = tv_finite_boundary(t, 0.05, &st(), k, Mode::AsStated).unwrap();
        let b = tv_finite_boundary(t, 0.05, &st(), k, Mode::DerivationConsistent).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn ks_monitor_matches_batch(xs in prop::collection::vec((any::<bool>(), -5.0f64..5.0), 1..120)) {
        let mut state = ConfSeqState::new(ConfSeqConfig::new(0.05, DivergenceKind::Ks).unwrap()).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for (is_x, v) in xs {
            let stream = if is_x { x.push(v); Stream::X } else { y.push(v); Stream::Y };
            let rec = state.update(&Observation::Real(v), stream).unwrap();
            prop_assert!(rec.lower <= rec.upper);
            prop_assert!(rec.lower >= 0.0 && rec.upper <= 1.0);
            if !x.is_empty() && !y.is_empty() {
                let batch = ks_two_sample(
                    &EmpiricalSample::from_scalars(x.clone()),
                    &EmpiricalSample::from_scalars(y.clone()),
                ).unwrap();
                prop_assert_eq!(rec.estimate, batch);
            }
        }
    }

    #[test]
    fn bad_observation_leaves_state_untouched(vals in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let kind = DivergenceKind::Dkw { cdf: ReferenceCdf::Uniform { lo: 0.0, hi: 1.0 } };
        let mut state = ConfSeqState::new(ConfSeqConfig::new(0.05, kind).unwrap()).unwrap();
        for v in &vals {
            state.update(&Observation::Real(*v), Stream::X).unwrap();
        }
        let before = state.record().unwrap();
        prop_assert!(state.update(&Observation::Real(0.5), Stream::Y).is_err());
        prop_assert!(state.update(&Observation::Category(1), Stream::X).is_err());
        prop_assert!(state.update(&Observation::Real(f64::NAN), Stream::X).is_err());
        prop_assert_eq!(state.record().unwrap(), before);
    }
}

#[test]
fn mmd_monitor_rejects_a_clear_shift() {
    let kind = DivergenceKind::Mmd { kernel: KernelSpec::gaussian(1.0).unwrap(), dim: 1 };
    let mut state = ConfSeqState::new(ConfSeqConfig::new(0.05, kind).unwrap()).unwrap();
    let mut last = None;
    for i in 0..3000 {
        let u = (i as f64 * 0.618_033_988_75).fract();
        state.update(&Observation::Real(u), Stream::X).unwrap();
        last = Some(state.update(&Observation::Real(u + 3.0), Stream::Y).unwrap());
    }
    assert!(last.unwrap().reject);
}
