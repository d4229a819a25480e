use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::maxent::MaxEntSolution;
use crate::model::PolytopeSpec;

/// Largest point mass of `Σ_j Y_j` for independent geometrics with
/// parameters `qs`. Each pmf is truncated once its tail `q^{K+1}` drops below
/// `tail_eps / n`, so the result is at most `tail_eps` below the true value.
pub fn conc_sum_geometrics(qs: &[f64], tail_eps: f64) -> Result<f64> {
    if qs.is_empty() {
        return Err(Error::InvalidArgument("need at least one parameter".into()));
    }
    if let Some(q) = qs.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(Error::InvalidArgument(format!("parameter {q} outside (0, 1)")));
    }
    if !(tail_eps > 0.0 && tail_eps < 0.1) {
        return Err(Error::InvalidArgument(format!("tail_eps {tail_eps} outside (0, 0.1)")));
    }
    let per = (tail_eps / qs.len() as f64).ln();
    let mut pmf = vec![1.0];
    for &q in qs {
        // Smallest K with q^{K+1} < eps / n.
        let k_max = (per / q.ln()).floor() as usize;
        let factor: Vec<f64> = (0..=k_max).map(|k| (1.0 - q) * q.powi(k as i32)).collect();
        let mut next = vec![0.0; pmf.len() + k_max];
        for (s, &p) in pmf.iter().enumerate() {
            for (k, &f) in factor.iter().enumerate() {
                next[s + k] += p * f;
            }
        }
        pmf = next;
    }
    Ok(pmf.into_iter().fold(0.0, f64::max))
}

/// `(2π)^{−m} ∫_{(−π,π]^m} Π_j (1−q_j)/|1 − q_j e^{i⟨t,a_j⟩}| dt` by the
/// rectangle rule on `t_k = −π + 2πk/K`, an upper bound on `conc(AX)`.
pub fn conc_quadrature(sol: &MaxEntSolution, spec: &PolytopeSpec, grid_points_per_axis: usize) -> Result<f64> {
    let (m, n) = (spec.m(), spec.n());
    if m > 3 {
        return Err(Error::Unsupported(format!("quadrature needs m ≤ 3, got {m}")));
    }
    if !spec.integral_a() {
        return Err(Error::NonIntegral);
    }
    if sol.n() != n {
        return Err(Error::Dimension(format!("solution has {} coordinates, spec has {n}", sol.n())));
    }
    let k = grid_points_per_axis;
    if k == 0 {
        return Err(Error::InvalidArgument("grid must have at least one point".into()));
    }
    let a = spec
        .a_i64()
        .ok_or_else(|| Error::Unsupported("entries of A exceed 64 bits".into()))?;
    let kk = k as i64;
    // ⟨t, a_j⟩ = 2π (Σ_i a_ij k_i)/K − π Σ_i a_ij; cos depends on the phase
    // index Σ a_ij k_i mod K and the parity of Σ_i a_ij.
    let cos_table: Vec<f64> = (0..k).map(|s| (2.0 * PI * s as f64 / k as f64).cos()).collect();
    let cols: Vec<(Vec<i64>, bool)> = (0..n)
        .map(|j| {
            let c: Vec<i64> = (0..m).map(|i| a[i * n + j].rem_euclid(kk)).collect();
            let odd = (0..m).map(|i| a[i * n + j]).sum::<i64>().rem_euclid(2) == 1;
            (c, odd)
        })
        .collect();
    let num: Vec<f64> = sol.q.iter().map(|q| 1.0 - q).collect();

    let total = k.pow(m as u32);
    let mut idx = vec![0i64; m];
    let mut sum = 0.0;
    for _ in 0..total {
        let mut prod = 1.0;
        for (j, (c, odd)) in cols.iter().enumerate() {
            let phase = c.iter().zip(&idx).map(|(a, t)| a * t).sum::<i64>().rem_euclid(kk) as usize;
            let cos = if *odd { -cos_table[phase] } else { cos_table[phase] };
            let q = sol.q[j];
            prod *= num[j] / (1.0 + q * q - 2.0 * q * cos).sqrt();
        }
        sum += prod;
        for d in idx.iter_mut() {
            *d += 1;
            if *d < kk {
                break;
            }
            *d = 0;
        }
    }
    Ok(sum / total as f64)
}
