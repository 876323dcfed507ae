use bayesel::modelselect::map::{map_down, map_up, Anchors};
use proptest::prelude::*;

fn anchors(k: usize) -> impl Strategy<Value = Anchors> {
    (prop::collection::vec(-2.0..2.0f64, k), prop::collection::vec(-2.0..2.0f64, k + 1), 0.1..2.0f64, 0.1..2.0f64)
        .prop_map(|(ols_small, ols_big, sigma2_hat_small, sigma2_hat_big)| Anchors { ols_small, ols_big, sigma2_hat_small, sigma2_hat_big })
}

proptest! {
    #[test]
    fn down_inverts_up(
        (a, beta, pos) in (0usize..5).prop_flat_map(|k| (anchors(k), prop::collection::vec(-3.0..3.0f64, k), 0..=k)),
        u in -1.0..1.0f64,
        sigma2 in 0.1..3.0f64,
    ) {
        let (big, s_big) = map_up(&beta, u, sigma2, &a, pos).unwrap();
        prop_assert_eq!(big.len(), beta.len() + 1);
        let (small, u_back, s_back) = map_down(&big, s_big, &a, pos).unwrap();
        prop_assert!((u_back - u).abs() < 1e-12);
        prop_assert!((s_back - sigma2).abs() < 1e-12);
        for (x, y) in small.iter().zip(&beta) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn anchors_map_to_anchors((a, pos) in (0usize..5).prop_flat_map(|k| (anchors(k), 0..=k))) {
        let (big, s) = map_up(&a.ols_small, 0.0, a.sigma2_hat_small, &a, pos).unwrap();
        prop_assert!((s - a.sigma2_hat_big).abs() < 1e-12);
        for (x, y) in big.iter().zip(&a.ols_big) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn mismatched_lengths_are_rejected() {
    let a = Anchors { ols_small: vec![1.0], ols_big: vec![1.0, 2.0, 3.0], sigma2_hat_small: 1.0, sigma2_hat_big: 1.0 };
    assert!(map_up(&[0.5], 0.0, 1.0, &a, 0).is_err());
}
