use proptest::prelude::*;

use wavegrid::threshold::{apply_threshold, band_threshold, ThresholdMode, ThresholdSpec};
use wavegrid::wavelet::{dwt_nd, WaveletPlan};
use wavegrid::Field;

fn mode() -> impl Strategy<Value = ThresholdMode> {
    prop::sample::select(vec![ThresholdMode::Constant, ThresholdMode::Capped, ThresholdMode::Accumulation])
}

fn field(seed: u64) -> Field {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(&[33, 17], |_| rng.gen_range(-1.0..1.0)).unwrap()
}

#[test]
fn laws_on_a_two_axis_band() {
    let spec = |m| ThresholdSpec::new(m, 0.5).unwrap();
    assert_eq!(band_threshold(&[1, 3], &spec(ThresholdMode::Constant)), 0.5);
    assert_eq!(band_threshold(&[1, 3], &spec(ThresholdMode::Capped)), 4.0);
    assert_eq!(band_threshold(&[1, 3], &spec(ThresholdMode::Accumulation)), 8.0);
    let three = ThresholdSpec::with_alpha(ThresholdMode::Capped, 1.0, 3.0).unwrap();
    assert_eq!(band_threshold(&[2, 0], &three), 9.0);
}

#[test]
fn comparison_is_strict() {
    let plan = WaveletPlan::new(&[5], 1).unwrap();
    // details of [0, 1, 0, 1, 0] are [1, 1]
    let mut c = dwt_nd(&Field::from_vec(&[5], vec![0.0, 1.0, 0.0, 1.0, 0.0]).unwrap(), &plan).unwrap();
    let n = apply_threshold(&mut c, &ThresholdSpec::new(ThresholdMode::Constant, 1.0).unwrap());
    assert_eq!(n, 0);
    assert_eq!(&c.values()[3..], &[1.0, 1.0]);
    let n = apply_threshold(&mut c, &ThresholdSpec::new(ThresholdMode::Constant, 1.0 + f64::EPSILON * 2.0).unwrap());
    assert_eq!(n, 2);
    assert_eq!(&c.values()[3..], &[0.0, 0.0]);
}

#[test]
fn infinite_constant_clears_every_detail() {
    let plan = WaveletPlan::new(&[33, 17], 3).unwrap();
    let mut c = dwt_nd(&field(3), &plan).unwrap();
    let n = apply_threshold(&mut c, &ThresholdSpec::new(ThresholdMode::Capped, f64::INFINITY).unwrap());
    assert_eq!(n, 33 * 17 - 5 * 3);
    assert_eq!(c.nonzero_count(), 15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn zeroed_count_grows_with_c(seed in any::<u64>(), m in mode(), c1 in 0.0f64..0.5, c2 in 0.0f64..0.5, levels in 1u32..=4) {
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let plan = WaveletPlan::new(&[33, 17], levels).unwrap();
        let base = dwt_nd(&field(seed), &plan).unwrap();
        let mut a = base.clone();
        let mut b = base.clone();
        let na = apply_threshold(&mut a, &ThresholdSpec::new(m, lo).unwrap());
        let nb = apply_threshold(&mut b, &ThresholdSpec::new(m, hi).unwrap());
        prop_assert!(na <= nb);
        prop_assert!(a.nonzero_count() >= b.nonzero_count());
    }

    #[test]
    fn survivors_are_untouched(seed in any::<u64>(), m in mode(), c in 0.0f64..0.3) {
        let plan = WaveletPlan::new(&[33, 17], 2).unwrap();
        let base = dwt_nd(&field(seed), &plan).unwrap();
        let mut t = base.clone();
        let spec = ThresholdSpec::new(m, c).unwrap();
        apply_threshold(&mut t, &spec);
        for (k, (before, after)) in base.values().iter().zip(t.values()).enumerate() {
            let band = base.band(k);
            if band.is_sample() {
                prop_assert_eq!(before.to_bits(), after.to_bits());
            } else if before.abs() < band_threshold(&band.scales(), &spec) {
                prop_assert_eq!(*after, 0.0);
            } else {
                prop_assert_eq!(before.to_bits(), after.to_bits());
            }
        }
    }
}
