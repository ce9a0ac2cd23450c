use proptest::prelude::*;
use qsot_core::linops::{random_density_matrix, random_unitary};
use qsot_core::{ComplexMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(vec![d], |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (random_matrix(da, &mut rng), random_matrix(db, &mut rng), random_matrix(dc, &mut rng));
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert_eq!(left.dims(), right.dims());
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (random_matrix(da, &mut rng), random_matrix(db, &mut rng));
        let reduced = a.tensor(&b).partial_trace(&[0]).unwrap();
        let expected = a.scale(b.trace());
        prop_assert!(reduced.max_abs_diff(&expected).unwrap() < 1e-13);
    }

    #[test]
    fn hermitian_part_is_a_projection(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(d, &mut rng);
        let h = m.hermitian_part();
        prop_assert_eq!(h.hermitian_part().max_abs_diff(&h).unwrap(), 0.0);
        prop_assert!((h.trace().re - m.trace().re).abs() < 1e-14);
        prop_assert!(h.trace().im.abs() < 1e-14);
    }

    #[test]
    fn permute_matches_index_shuffle(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [2usize, 3, 2];
        let m = ComplexMatrix::from_fn(dims.to_vec(), |_, _| C64::new(rng.random(), rng.random())).unwrap();
        let order = [2usize, 0, 1];
        let p = m.permute(&order).unwrap();
        let split = |mut k: usize| {
            let mut idx = [0usize; 3];
            for s in (0..3).rev() {
                idx[s] = k % dims[s];
                k /= dims[s];
            }
            idx
        };
        let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
        let join = |idx: [usize; 3]| order.iter().enumerate().fold(0, |acc, (s, &o)| acc * new_dims[s] + idx[o]);
        for r in 0..12 {
            for c in 0..12 {
                prop_assert_eq!(p.get(join(split(r)), join(split(c))), m.get(r, c));
            }
        }
    }

    #[test]
    fn random_unitaries_are_unitary(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        prop_assert!(random_unitary(d, &mut rng).unitarity_error() < 1e-12);
    }

    #[test]
    fn random_density_matrices_are_states(seed in any::<u64>(), d in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density_matrix(d, &mut rng);
        prop_assert!(rho.min_eigenvalue() >= -1e-12);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(rho.hermiticity_error() < 1e-12);
    }
}

#[test]
fn json_round_trip_is_bit_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in 1..5 {
        let m = random_matrix(d, &mut rng).tensor(&random_unitary(2, &mut rng));
        let s = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back.dims(), m.dims());
        assert_eq!(back.data(), m.data());
    }
}

#[test]
fn json_length_mismatch_is_rejected() {
    let bad = r#"{"dims":[2],"data":[[1,0],[0,0],[0,0]]}"#;
    assert!(serde_json::from_str::<ComplexMatrix>(bad).is_err());
}
