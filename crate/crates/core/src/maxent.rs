//! The maximum-entropy product-geometric distribution on `Z^n_{≥0}` with
//! `E[AX] = b`, found by damped Newton on the smooth dual
//!
//! ```text
//! G(λ) = ⟨λ, b⟩ − Σ_j ln(1 − e^{−θ_j}),   θ_j = ⟨λ, a_j⟩ > 0.
//! ```
//!
//! At the minimizer, coordinate `j` is geometric with `q_j = e^{−θ_j}` and
//! mean `z_j = q_j / (1 − q_j)`, and `G(λ*)` equals the entropy `H(X)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::PolytopeSpec;

/// Entropy in nats of a geometric variable with mean `z`:
/// `(z+1) ln(z+1) − z ln z`, with value 0 at `z = 0`.
pub fn entropy_geometric(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidArgument(format!("entropy of negative mean {z}")));
    }
    Ok(entropy_geometric_unchecked(z))
}

pub(crate) fn entropy_geometric_unchecked(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        // (z+1)ln(z+1) − z ln z, without cancellation for large z.
        z.ln_1p() + z * z.recip().ln_1p()
    }
}

/// The mean `z ≥ 0` of the geometric variable whose entropy is `h`.
///
/// Bisection on a bracket grown by doubling; runs until the bracket stops
/// shrinking in floating point, so `|entropy_geometric(z) − h| ≤ 1e-12`.
pub fn entropy_inverse(h: f64) -> Result<f64> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("entropy must be finite and >= 0, got {h}")));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while entropy_geometric_unchecked(hi) < h {
        lo = hi;
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if entropy_geometric_unchecked(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (el, eh) = (entropy_geometric_unchecked(lo), entropy_geometric_unchecked(hi));
    Ok(if (h - el).abs() <= (eh - h).abs() { lo } else { hi })
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol_solve: f64,
    pub max_iter: usize,
    pub init_lambda: Option<Vec<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_solve: 1e-10,
            max_iter: 200,
            init_lambda: None,
        }
    }
}

/// Parameters of the maximum-entropy distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaxEntSolution {
    pub lambda: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
    pub z: Vec<f64>,
    /// `H(X)` in nats, summed from the primal formula.
    pub entropy: f64,
    /// `G(λ)` at the returned multipliers.
    pub dual_value: f64,
    /// `‖Az − b‖ / ‖b‖`.
    pub residual: f64,
    pub iterations: usize,
}

impl MaxEntSolution {
    pub fn n(&self) -> usize {
        self.z.len()
    }

    pub fn m(&self) -> usize {
        self.lambda.len()
    }

    /// Builds a solution directly from multipliers, without optimizing.
    pub fn from_lambda(spec: &PolytopeSpec, lambda: &[f64]) -> Result<Self> {
        let theta = thetas(spec, lambda)?;
        let q: Vec<f64> = theta.iter().map(|t| (-t).exp()).collect();
        let z: Vec<f64> = theta.iter().map(|t| 1.0 / t.exp_m1()).collect();
        let entropy = z.iter().map(|&zj| entropy_geometric_unchecked(zj)).sum();
        let dual_value = dual_value(spec, lambda, &theta);
        let residual = feasibility_residual(spec, &z);
        Ok(Self {
            lambda: lambda.to_vec(),
            theta,
            q,
            z,
            entropy,
            dual_value,
            residual,
            iterations: 0,
        })
    }
}

/// `H(X) = Σ_j entropy_geometric(z_j)`.
pub fn entropy_total(sol: &MaxEntSolution) -> f64 {
    sol.z.iter().map(|&z| entropy_geometric_unchecked(z)).sum()
}

fn thetas(spec: &PolytopeSpec, lambda: &[f64]) -> Result<Vec<f64>> {
    if lambda.len() != spec.m() {
        return Err(Error::Dimension(format!(
            "lambda has {} entries, expected {}",
            lambda.len(),
            spec.m()
        )));
    }
    spec.columns()
        .enumerate()
        .map(|(j, a)| {
            let t: f64 = a.iter().zip(lambda).map(|(x, l)| x * l).sum();
            if t > 0.0 && t.is_finite() {
                Ok(t)
            } else {
                Err(Error::DualDomain { column: j, theta: t })
            }
        })
        .collect()
}

fn dual_value(spec: &PolytopeSpec, lambda: &[f64], theta: &[f64]) -> f64 {
    let lb: f64 = lambda.iter().zip(spec.b_f64()).map(|(l, b)| l * b).sum();
    // ln(1 − e^{−θ}) = ln(−expm1(−θ))
    lb - theta.iter().map(|t| (-(-t).exp_m1()).ln()).sum::<f64>()
}

fn feasibility_residual(spec: &PolytopeSpec, z: &[f64]) -> f64 {
    let mut az = vec![0.0; spec.m()];
    for (a, zj) in spec.columns().zip(z) {
        for (acc, x) in az.iter_mut().zip(a) {
            *acc += x * zj;
        }
    }
    let num: f64 = az
        .iter()
        .zip(spec.b_f64())
        .map(|(x, b)| (x - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let den = spec.b_f64().iter().map(|b| b * b).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Dual objective, gradient `b − A z(λ)` and Hessian `Σ_j a_j a_jᵀ z_j(1+z_j)`.
#[derive(Debug, Clone)]
pub struct DualEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

pub fn dual_value_grad_hess(spec: &PolytopeSpec, lambda: &[f64]) -> Result<DualEval> {
    let theta = thetas(spec, lambda)?;
    let m = spec.m();
    let value = dual_value(spec, lambda, &theta);
    let mut gradient = spec.b_f64().to_vec();
    let mut hessian = vec![vec![0.0; m]; m];
    for (a, t) in spec.columns().zip(&theta) {
        let z = 1.0 / t.exp_m1();
        // q / (1 − q)^2 = z (1 + z)
        let w = z * (1.0 + z);
        for i in 0..m {
            gradient[i] -= a[i] * z;
            if a[i] == 0.0 {
                continue;
            }
            for k in 0..m {
                hessian[i][k] += w * a[i] * a[k];
            }
        }
    }
    Ok(DualEval {
        value,
        gradient,
        hessian,
    })
}

const INIT_ATTEMPTS: usize = 50;

fn matrix_at(spec: &PolytopeSpec) -> DMatrix<f64> {
    DMatrix::from_fn(spec.m(), spec.n(), |i, j| spec.column(j)[i])
}

/// Least-squares solution of `Aᵀ λ ≈ target`, i.e. `(A Aᵀ) λ = A target`.
fn least_squares_dual(a: &DMatrix<f64>, target: &DVector<f64>) -> Option<DVector<f64>> {
    let gram = a * a.transpose();
    gram.cholesky().map(|c| c.solve(&(a * target)))
}

fn admissible(spec: &PolytopeSpec, lambda: &[f64]) -> bool {
    thetas(spec, lambda).is_ok()
}

/// Finds `λ` with `Aᵀλ > 0`: least squares against the all-ones target, then
/// the row-sum direction, then targets re-weighted toward violated columns.
fn initial_lambda(spec: &PolytopeSpec) -> Result<Vec<f64>> {
    if let Some(j) = spec.columns().position(|a| a.iter().all(|&x| x == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    let a = matrix_at(spec);
    let mut target = DVector::from_element(spec.n(), 1.0);
    for attempt in 0..INIT_ATTEMPTS {
        if attempt == 1 {
            let row_sums: Vec<f64> = (0..spec.m()).map(|i| a.row(i).sum()).collect();
            if admissible(spec, &row_sums) {
                return Ok(row_sums);
            }
        }
        let lambda = least_squares_dual(&a, &target).ok_or(Error::SingularHessian)?;
        let theta = a.transpose() * &lambda;
        if theta.iter().all(|&t| t > 0.0) {
            return Ok(lambda.iter().copied().collect());
        }
        for (tj, th) in target.iter_mut().zip(theta.iter()) {
            if *th <= 0.0 {
                *tj = 4.0 * *tj + (-th);
            }
        }
    }
    Err(Error::NoInitialPoint {
        attempts: INIT_ATTEMPTS,
    })
}

const ARMIJO: f64 = 1e-4;

/// Minimizes the dual by damped Newton with backtracking.
pub fn solve_maxent(spec: &PolytopeSpec, opts: &SolveOptions) -> Result<MaxEntSolution> {
    if !(opts.tol_solve > 0.0) {
        return Err(Error::InvalidArgument("tol_solve must be positive".into()));
    }
    let mut lambda = match &opts.init_lambda {
        Some(l) => {
            thetas(spec, l)?;
            l.clone()
        }
        None => initial_lambda(spec)?,
    };
    let m = spec.m();
    let b_norm = {
        let s = spec.b_f64().iter().map(|b| b * b).sum::<f64>().sqrt();
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let mut eval = dual_value_grad_hess(spec, &lambda)?;
    let mut residual = f64::INFINITY;
    for iter in 0..=opts.max_iter {
        let g_norm = eval.gradient.iter().map(|g| g * g).sum::<f64>().sqrt();
        residual = g_norm / b_norm;
        if residual <= opts.tol_solve {
            let mut sol = MaxEntSolution::from_lambda(spec, &lambda)?;
            sol.iterations = iter;
            return Ok(sol);
        }
        if iter == opts.max_iter {
            break;
        }
        let h = DMatrix::from_fn(m, m, |i, k| eval.hessian[i][k]);
        let g = DVector::from_column_slice(&eval.gradient);
        let step = h.cholesky().ok_or(Error::SingularHessian)?.solve(&g);
        let slope = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-30 {
            let cand: Vec<f64> = lambda.iter().zip(step.iter()).map(|(l, s)| l - t * s).collect();
            if let Ok(ce) = dual_value_grad_hess(spec, &cand) {
                let armijo = ce.value <= eval.value - ARMIJO * t * slope;
                // Near the optimum G changes below its rounding level; accept
                // steps that do not raise G measurably but shrink the gradient.
                let cg = ce.gradient.iter().map(|x| x * x).sum::<f64>().sqrt();
                let flat = ce.value <= eval.value + 1e-14 * eval.value.abs().max(1.0)
                    && cg < g_norm;
                if armijo || flat {
                    accepted = Some((cand, ce));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, ce)) => {
                lambda = cand;
                eval = ce;
            }
            None => break,
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_simplex, gen_transportation};
    use approx::assert_abs_diff_eq;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn int(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_geometric(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_geometric(1.0).unwrap(), 2.0 * 2f64.ln(), epsilon = 1e-15);
        // 4 ln 4 − 3 ln 3 = 2.24934057847523...
        assert_abs_diff_eq!(entropy_geometric(3.0).unwrap(), 2.249_340_578_475_233, epsilon = 1e-14);
        assert!(entropy_geometric(-1e-3).is_err());
        assert!(entropy_geometric(f64::NAN).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(entropy_inverse(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy_inverse(1.386_294).unwrap(), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(entropy_inverse(2.0 * 2f64.ln()).unwrap(), 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(entropy_inverse(2.249_340_578_475_233).unwrap(), 3.0, epsilon = 1e-8);
        assert!(entropy_inverse(-0.1).is_err());
    }

    #[test]
    fn inverse_round_trip_on_log_grid() {
        for k in 0..=120 {
            let z = 10f64.powf(-6.0 + k as f64 * 0.1);
            let h = entropy_geometric(z).unwrap();
            let back = entropy_inverse(h).unwrap();
            assert!((back - z).abs() <= 1e-8 * z.max(1.0), "z = {z}, back = {back}");
            assert!((entropy_geometric(back).unwrap() - h).abs() <= 1e-12);
        }
    }

    #[test]
    fn omega_is_midpoint_concave() {
        // ω(t) = (1 − e^t) ln(1 − e^{−t}) + t is the entropy of a geometric
        // variable with mean e^t − 1.
        let omega = |t: f64| -t.exp_m1() * (-(-t).exp()).ln_1p() + t;
        let grid: Vec<f64> = (0..=200).map(|k| 0.01 + k as f64 * (20.0 - 0.01) / 200.0).collect();
        for &t1 in &grid {
            for &t2 in &grid {
                let lhs = 2.0 * omega(0.5 * (t1 + t2));
                assert!(lhs >= omega(t1) + omega(t2) - 1e-12, "t1 = {t1}, t2 = {t2}");
            }
        }
        let t: f64 = 1.3;
        let z = t.exp_m1();
        assert_abs_diff_eq!(omega(t), entropy_geometric(z).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn dual_examples_simplex() {
        let s = gen_simplex(4, int(2)).unwrap();
        let e = dual_value_grad_hess(&s, &[3f64.ln()]).unwrap();
        let expected = 2.0 * 3f64.ln() - 4.0 * (2.0f64 / 3.0).ln();
        assert_abs_diff_eq!(e.value, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 3.819_085_009_768_877, epsilon = 1e-12);
        assert_abs_diff_eq!(e.gradient[0], 0.0, epsilon = 1e-12);
        let e = dual_value_grad_hess(&s, &[1.0]).unwrap();
        let e_const = std::f64::consts::E;
        assert_abs_diff_eq!(e.gradient[0], 2.0 - 4.0 / (e_const - 1.0), epsilon = 1e-12);
        assert_abs_diff_eq!(e.gradient[0], -0.327_906_827_477_305_7, epsilon = 1e-12);
        assert!(matches!(
            dual_value_grad_hess(&s, &[-0.5]),
            Err(Error::DualDomain { column: 0, .. })
        ));
        assert!(matches!(dual_value_grad_hess(&s, &[0.0]), Err(Error::DualDomain { .. })));
    }

    #[test]
    fn solve_simplex_by_symmetry() {
        let s = gen_simplex(4, int(2)).unwrap();
        let sol = solve_maxent(&s, &SolveOptions::default()).unwrap();
        for z in &sol.z {
            assert_abs_diff_eq!(*z, 0.5, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(sol.entropy, 3.819_085_009_768_877, epsilon = 1e-9);
        assert_abs_diff_eq!(entropy_total(&sol), sol.entropy, epsilon = 1e-12);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn entropy_total_large_simplex() {
        let s = gen_simplex(1000, int(10)).unwrap();
        let sol = solve_maxent(&s, &SolveOptions::default()).unwrap();
        // 1000 · H(0.01), evaluated independently at high precision.
        assert_abs_diff_eq!(entropy_total(&sol), 56.101_536_021_580_68, epsilon = 1e-7);
    }

    #[test]
    fn entropy_total_of_degenerate_solution_is_zero() {
        let s = gen_simplex(3, int(1)).unwrap();
        let mut sol = solve_maxent(&s, &SolveOptions::default()).unwrap();
        sol.z = vec![0.0; 3];
        assert_eq!(entropy_total(&sol), 0.0);
    }

    #[test]
    fn rejects_bad_options_and_zero_columns() {
        let s = gen_simplex(4, int(2)).unwrap();
        let opts = SolveOptions {
            tol_solve: 0.0,
            ..Default::default()
        };
        assert!(solve_maxent(&s, &opts).is_err());
        let opts = SolveOptions {
            init_lambda: Some(vec![-1.0]),
            ..Default::default()
        };
        assert!(matches!(solve_maxent(&s, &opts), Err(Error::DualDomain { .. })));
        let z = PolytopeSpec::new(
            "zero",
            vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]],
            vec![int(1), int(1)],
        )
        .unwrap();
        assert!(matches!(solve_maxent(&z, &SolveOptions::default()), Err(Error::ZeroColumn(2))));
    }

    #[test]
    fn max_iter_exhaustion_reports_not_converged() {
        let s = gen_transportation(&[int(5), int(7)], &[int(4), int(8)]).unwrap();
        let opts = SolveOptions {
            max_iter: 1,
            ..Default::default()
        };
        assert!(matches!(solve_maxent(&s, &opts), Err(Error::NotConverged { .. })));
    }

    #[test]
    fn mixed_sign_system_initializes() {
        // x1 − x2 + 2 x3 = 1, x2 + x3 + x4 = 3
        let s = PolytopeSpec::new(
            "mixed",
            vec![
                vec![int(1), int(-1), int(2), int(0)],
                vec![int(0), int(1), int(1), int(1)],
            ],
            vec![int(1), int(3)],
        )
        .unwrap();
        let sol = solve_maxent(&s, &SolveOptions::default()).unwrap();
        assert!(sol.residual <= 1e-10);
        assert!(sol.theta.iter().all(|&t| t > 0.0));
        assert!((sol.dual_value - sol.entropy).abs() <= 1e-8 * (1.0 + sol.entropy));
    }

    fn finite_difference_check(spec: &PolytopeSpec, lambda: &[f64]) {
        let e = dual_value_grad_hess(spec, lambda).unwrap();
        let m = lambda.len();
        for i in 0..m {
            let h = 1e-6 * lambda[i].abs().max(1e-3);
            let mut lp = lambda.to_vec();
            let mut lm = lambda.to_vec();
            lp[i] += h;
            lm[i] -= h;
            let ep = dual_value_grad_hess(spec, &lp).unwrap();
            let em = dual_value_grad_hess(spec, &lm).unwrap();
            let fd = (ep.value - em.value) / (2.0 * h);
            let scale = e.gradient.iter().map(|g| g.abs()).fold(1e-8, f64::max);
            assert!((fd - e.gradient[i]).abs() <= 1e-5 * scale, "grad {i}: {fd} vs {}", e.gradient[i]);
            for k in 0..m {
                let fd = (ep.gradient[k] - em.gradient[k]) / (2.0 * h);
                let scale = e.hessian.iter().flatten().map(|x| x.abs()).fold(1e-8, f64::max);
                assert!((fd - e.hessian[k][i]).abs() <= 1e-5 * scale, "hess {k},{i}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn gradient_and_hessian_match_finite_differences(
            l in proptest::collection::vec(0.05f64..3.0, 4)
        ) {
            let s = gen_transportation(&[int(3), int(5)], &[int(2), int(2), int(4)]).unwrap();
            finite_difference_check(&s, &l[..]);
        }
    }

    proptest! {
        #[test]
        fn entropy_is_increasing(a in 1e-6f64..1e6, b in 1e-6f64..1e6) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi > lo * (1.0 + 1e-9));
            prop_assert!(entropy_geometric(lo).unwrap() < entropy_geometric(hi).unwrap());
        }
    }
}
