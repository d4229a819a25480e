mod common;

use common::suite;
use polycount::linalg::{dot, norm};
use polycount::maxent::{dual_value_grad_hess, entropy_total};
use polycount::{solve_maxent, SolveOptions};

#[test]
fn suite_solutions_are_stationary_and_feasible() {
    let opts = SolveOptions::default();
    for spec in suite() {
        let sol = solve_maxent(&spec, &opts).unwrap();
        for (j, a) in spec.columns().enumerate() {
            let lhs = ((sol.z[j] + 1.0) / sol.z[j]).ln();
            assert!((lhs - dot(&sol.lambda, a)).abs() <= 1e-8, "{} column {j}", spec.name());
        }
        let az: Vec<f64> = (0..spec.m())
            .map(|i| spec.columns().zip(&sol.z).map(|(a, z)| a[i] * z).sum::<f64>() - spec.b_f64()[i])
            .collect();
        assert!(norm(&az) / norm(spec.b_f64()) <= opts.tol_solve, "{}", spec.name());
        assert!((entropy_total(&sol) - sol.entropy).abs() <= 1e-12 * (1.0 + sol.entropy));
        let g = dual_value_grad_hess(&spec, &sol.lambda).unwrap();
        assert!((g.value - sol.dual_value).abs() <= 1e-12 * (1.0 + g.value.abs()));
    }
}
