#![allow(clippy::needless_range_loop)]

use nalgebra::DMatrix;
use proptest::prelude::*;

use wavegrid::wavelet::{
    analysis_matrix, deinterleave, dwt_nd, dwt_step_1d, idwt_nd, idwt_step_1d, interleave, synthesis_matrix,
    trapezoid_mass, trapezoid_mass_nd, DenseMatrix, Traversal, WaveletPlan,
};
use wavegrid::Field;

const PRINTED_A: [[f64; 9]; 9] = [
    [8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-4.0, 8.0, -4.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-2.0, 4.0, 5.0, 2.0, -1.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, -4.0, 8.0, -4.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, -1.0, 2.0, 6.0, 2.0, -1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, -4.0, 8.0, -4.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, -1.0, 2.0, 5.0, 4.0, -2.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -4.0, 8.0, -4.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 8.0],
];

const PRINTED_A_INV: [[f64; 9]; 9] = [
    [8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [4.0, 6.0, 4.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, -4.0, 8.0, -2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.0, -2.0, 4.0, 6.0, 4.0, -1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -2.0, 8.0, -2.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, -1.0, 4.0, 6.0, 4.0, -2.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, -2.0, 8.0, -4.0, 0.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 4.0, 6.0, 4.0],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 8.0],
];

fn eighths(rows: &[[f64; 9]; 9]) -> DenseMatrix {
    let flat: Vec<f64> = rows.iter().flatten().map(|v| v / 8.0).collect();
    DenseMatrix::from_rows(9, &flat)
}

fn to_nalgebra(m: &DenseMatrix) -> DMatrix<f64> {
    let n = m.order();
    DMatrix::from_fn(n, n, |r, c| m.get(r, c))
}

#[test]
fn analysis_matrix_matches_printed_a() {
    let a = analysis_matrix(3).unwrap();
    assert_eq!(a.max_abs_diff(&eighths(&PRINTED_A)), 0.0);
}

#[test]
fn printed_inverse_composes_to_identity() {
    let a = analysis_matrix(3).unwrap();
    let inv = eighths(&PRINTED_A_INV);
    assert!(a.mul(&inv).max_abs_diff(&DenseMatrix::identity(9)) <= 1e-13);
    assert!(inv.mul(&a).max_abs_diff(&DenseMatrix::identity(9)) <= 1e-13);
    assert_eq!(synthesis_matrix(3).unwrap().max_abs_diff(&inv), 0.0);
}

#[test]
fn synthesis_matches_lu_inverse() {
    for j in 1..=7 {
        let a = to_nalgebra(&analysis_matrix(j).unwrap());
        let inv = a.clone().lu().try_inverse().expect("analysis matrix is invertible");
        let s = to_nalgebra(&synthesis_matrix(j).unwrap());
        assert!((inv - s).abs().max() <= 1e-12, "j = {j}");
    }
}

#[test]
fn matrix_rejects_out_of_range_orders() {
    assert!(analysis_matrix(0).is_err());
    assert!(analysis_matrix(11).is_err());
}

#[test]
fn first_column_is_the_boundary_filter() {
    let mut e0 = vec![0.0; 9];
    e0[0] = 1.0;
    let (s, d) = dwt_step_1d(&e0).unwrap();
    let mut block = s.clone();
    block.extend_from_slice(&d);
    assert_eq!(interleave(&block), vec![1.0, -0.5, -0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let v = deinterleave(&[1.0, -0.5, -0.25, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(idwt_step_1d(&v[..5], &v[5..]).unwrap(), e0);
}

#[test]
fn step_matches_dense_product_on_random_signal() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let u: Vec<f64> = (0..17).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let (s, d) = dwt_step_1d(&u).unwrap();
    let mut block = s;
    block.extend_from_slice(&d);
    let expected = analysis_matrix(4).unwrap().mul_vec(&u);
    let got = interleave(&block);
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() <= 1e-13);
    }
}

#[test]
fn printed_inverse_reconstructs_random_vector() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let v: Vec<f64> = (0..9).map(|_| rng.gen_range(-3.0..3.0)).collect();
    let expected = eighths(&PRINTED_A_INV).mul_vec(&v);
    let block = deinterleave(&v);
    let got = idwt_step_1d(&block[..5], &block[5..]).unwrap();
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() <= 1e-14);
    }
}

/// Reference refinement: coarse samples on the even nodes, linear
/// interpolation on the odd ones.
fn interpolate_line(coarse: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * coarse.len() - 1);
    for w in coarse.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(*coarse.last().unwrap());
    out
}

#[test]
fn zero_details_reconstruct_by_linear_interpolation() {
    let plan = WaveletPlan::new(&[9, 9], 1).unwrap();
    let coarse = Field::from_fn(&[5, 5], |i| ((i[0] * 3 + i[1] * 7) % 5) as f64).unwrap();
    let mut values = vec![0.0; 81];
    for i in 0..5 {
        for j in 0..5 {
            values[i * 9 + j] = coarse.get(&[i, j]);
        }
    }
    // With zero details the update step leaves the samples unchanged.
    let coeffs = wavegrid::wavelet::CoefficientSet::from_parts(plan, values).unwrap();
    let out = idwt_nd(&coeffs);
    let rows: Vec<Vec<f64>> = (0..5).map(|i| interpolate_line(&(0..5).map(|j| coarse.get(&[i, j])).collect::<Vec<_>>())).collect();
    for j in 0..9 {
        let col = interpolate_line(&rows.iter().map(|r| r[j]).collect::<Vec<_>>());
        for i in 0..9 {
            assert!((out.get(&[i, j]) - col[i]).abs() <= 1e-14, "({i}, {j})");
        }
    }
}

#[test]
fn three_point_step_keeps_only_endpoints() {
    let (c, d) = dwt_step_1d(&[1.0, 4.0, 1.0]).unwrap();
    assert_eq!(c, vec![1.0, 1.0]);
    assert_eq!(d, vec![3.0]);
    assert_ne!(trapezoid_mass(&c), trapezoid_mass(&[1.0, 4.0, 1.0]) / 2.0);
}

fn dims_strategy() -> impl Strategy<Value = (Vec<usize>, u32)> {
    prop_oneof![
        (1u32..=7).prop_flat_map(|k| (Just(vec![(1 << k) + 1]), 1..=k)),
        (1u32..=5, 1u32..=5).prop_flat_map(|(a, b)| (Just(vec![(1 << a) + 1, (1 << b) + 1]), 1..=a.min(b))),
        (1u32..=3, 1u32..=3, 1u32..=3)
            .prop_flat_map(|(a, b, c)| (Just(vec![(1 << a) + 1, (1 << b) + 1, (1 << c) + 1]), 1..=a.min(b).min(c))),
    ]
}

fn field_strategy() -> impl Strategy<Value = (Field, u32, Traversal)> {
    (dims_strategy(), any::<u64>(), prop::bool::ANY).prop_map(|((dims, levels), seed, pyramid)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let f = Field::from_fn(&dims, |_| rng.gen_range(-100.0..100.0)).unwrap();
        (f, levels, if pyramid { Traversal::Pyramid } else { Traversal::Tensor })
    })
}

fn ulp_distance(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn round_trip_is_within_a_few_ulps((field, levels, traversal) in field_strategy()) {
        let plan = WaveletPlan::with_traversal(field.dims(), levels, traversal).unwrap();
        let back = idwt_nd(&dwt_nd(&field, &plan).unwrap());
        let scale = field.max_abs();
        for (a, b) in field.data().iter().zip(back.data()) {
            prop_assert!((a - b).abs() <= 64.0 * f64::EPSILON * scale.max(1.0));
        }
    }

    #[test]
    fn one_level_line_round_trip_is_close_in_ulps(k in 1u32..=8, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..(1usize << k) + 1).map(|_| rng.gen_range(0.5..2.0)).collect();
        let (c, d) = dwt_step_1d(&s).unwrap();
        let back = idwt_step_1d(&c, &d).unwrap();
        for (a, b) in s.iter().zip(&back) {
            prop_assert!(ulp_distance(*a, *b) <= 4, "{} vs {}", a, b);
        }
    }

    #[test]
    fn affine_fields_have_zero_details((dims, levels) in dims_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let coef = [a, b, c];
        let f = Field::from_fn(&dims, |i| 1.0 + i.iter().zip(&coef).map(|(x, k)| *x as f64 * k).sum::<f64>()).unwrap();
        let plan = WaveletPlan::new(&dims, levels).unwrap();
        let mut coeffs = dwt_nd(&f, &plan).unwrap();
        let scale = f.max_abs();
        coeffs.for_each_detail_mut(|_, d| assert!(d.abs() <= 1e-12 * scale, "detail {d}"));
    }

    #[test]
    fn one_step_halves_the_mass(k in 2u32..=8, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<f64> = (0..(1usize << k) + 1).map(|_| rng.gen_range(0.0..10.0)).collect();
        let (c, _) = dwt_step_1d(&s).unwrap();
        let fine = trapezoid_mass(&s);
        prop_assert!((trapezoid_mass(&c) - fine / 2.0).abs() <= 1e-12 * fine.abs());
    }

    #[test]
    fn zeroing_any_details_keeps_the_mass((field, levels, _t) in field_strategy(), mask_seed in any::<u64>()) {
        let plan = WaveletPlan::new(field.dims(), levels).unwrap();
        prop_assume!(plan.is_mass_conserving());
        let mut coeffs = dwt_nd(&field, &plan).unwrap();
        let mut state = mask_seed | 1;
        coeffs.for_each_detail_mut(|_, d| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            if state & 1 == 1 {
                *d = 0.0;
            }
        });
        let out = idwt_nd(&coeffs);
        let before = trapezoid_mass_nd(field.dims(), field.data());
        let after = trapezoid_mass_nd(out.dims(), out.data());
        let scale = trapezoid_mass_nd(field.dims(), &field.data().iter().map(|v| v.abs()).collect::<Vec<_>>());
        prop_assert!((before - after).abs() <= 1e-12 * scale);
    }
}
