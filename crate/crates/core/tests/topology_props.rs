use hitchin_core::topology::{build_complex, rank, twisted_cohomology_dims};
use num_bigint::BigInt;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euler_characteristic_ignores_the_local_system(genus in 2usize..7, half_k in 1usize..8, signs in prop::collection::vec(any::<bool>(), 12)) {
        let k = 2 * half_k;
        let c = build_complex(genus, k).unwrap();
        let handles: Vec<i8> = signs[..2 * genus].iter().map(|&s| if s { 1 } else { -1 }).collect();
        let chi = 2 - 2 * genus as i64 - k as i64;
        for cx in [c.clone(), c.untwisted(), c.with_handle_monodromy(&handles).unwrap()] {
            let (h0, h1) = twisted_cohomology_dims(&cx);
            prop_assert_eq!(h0 as i64 - h1 as i64, chi);
        }
        prop_assert_eq!(twisted_cohomology_dims(&c), (0, 2 * genus + k - 2));
    }

    #[test]
    fn rank_is_invariant_under_transpose(rows in prop::collection::vec(prop::collection::vec(-3i64..4, 5), 1..6)) {
        let m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        let t: Vec<Vec<BigInt>> = (0..5).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect();
        prop_assert_eq!(rank(&m), rank(&t));
        prop_assert!(rank(&m) <= m.len().min(5));
    }
}
