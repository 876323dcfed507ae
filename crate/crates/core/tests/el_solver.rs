use bayesel::elcore::{check_feasibility, solve_el, ConstraintMatrix, SolverOptions};
use proptest::prelude::*;

/// Rows shifted by a strictly positive convex combination of themselves, so
/// the origin is interior to their hull.
fn centred(rows: Vec<Vec<f64>>, mix: Vec<f64>) -> Vec<Vec<f64>> {
    let total: f64 = mix.iter().sum();
    let m = rows[0].len();
    let centre: Vec<f64> = (0..m).map(|j| rows.iter().zip(&mix).map(|(r, w)| r[j] * w).sum::<f64>() / total).collect();
    rows.into_iter().map(|r| r.iter().zip(&centre).map(|(a, c)| a - c).collect()).collect()
}

fn instance() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (4usize..25, 1usize..4).prop_flat_map(|(n, m)| {
        (prop::collection::vec(prop::collection::vec(-3.0..3.0f64, m), n), prop::collection::vec(0.2..1.0f64, n))
            .prop_map(|(rows, mix)| centred(rows, mix))
    })
}

proptest! {
    #[test]
    fn interior_origin_gives_weights_on_the_simplex(rows in instance()) {
        let n = rows.len();
        let c = ConstraintMatrix::from_rows(&rows).unwrap();
        let sol = solve_el(&c, &SolverOptions::default()).unwrap();
        prop_assert!(sol.feasible);
        let w = sol.weights.clone().unwrap();
        prop_assert!(w.iter().all(|&x| x > 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for s in c.weighted_column_sums(&w) {
            prop_assert!(s.abs() < 1e-7);
        }
        prop_assert!(sol.log_el <= -(n as f64) * (n as f64).ln() + 1e-9);
        // stationarity of the dual: w_i = 1 / (n (1 + lambda . g_i))
        for (r, wi) in rows.iter().zip(&w) {
            let dot: f64 = r.iter().zip(&sol.multipliers).map(|(a, b)| a * b).sum();
            prop_assert!((wi * n as f64 * (1.0 + dot) - 1.0).abs() < 1e-6);
        }
        prop_assert!(check_feasibility(&c).unwrap());
    }

    #[test]
    fn one_signed_column_is_infeasible(vals in prop::collection::vec(0.1..5.0f64, 3..20)) {
        let c = ConstraintMatrix::from_column(&vals).unwrap();
        let sol = solve_el(&c, &SolverOptions::default()).unwrap();
        prop_assert!(!sol.feasible);
        prop_assert!(sol.weights.is_none());
        prop_assert_eq!(sol.log_el, f64::NEG_INFINITY);
        prop_assert!(!check_feasibility(&c).unwrap());
    }
}

#[test]
fn two_point_problem_matches_hand_solution() {
    // weights solve w a + (1 - w) b = 0 on two points
    let c = ConstraintMatrix::from_column(&[-1.0, 3.0]).unwrap();
    let sol = solve_el(&c, &SolverOptions::default()).unwrap();
    let w = sol.weights.unwrap();
    assert!((w[0] - 0.75).abs() < 1e-10 && (w[1] - 0.25).abs() < 1e-10);
    assert!((sol.log_el - (0.75f64.ln() + 0.25f64.ln())).abs() < 1e-10);
}

#[test]
fn no_constraints_gives_uniform_weights() {
    let sol = solve_el(&ConstraintMatrix::unconstrained(7).unwrap(), &SolverOptions::default()).unwrap();
    assert!(sol.weights.unwrap().iter().all(|w| (w - 1.0 / 7.0).abs() < 1e-15));
}
