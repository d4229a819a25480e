//! Gaussian-type bound over a partition of the columns into `p` bases:
//!
//! ```text
//! |P ∩ Z^n| ≤ e^{H(X)} (C p^{−m/2} + (C′)^p)
//! ```
//!
//! with `γ > 0` trading the two terms off. Requires integer `A`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lognum::{log_add, LogNumber};
use crate::matroid::{disjoint_bases, order_by_weight_desc};
use crate::maxent::MaxEntSolution;
use crate::model::PolytopeSpec;
use crate::report::{BoundParams, BoundReport, Method};

/// `p` disjoint ordered bases plus the columns left out of all of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisPartition {
    pub blocks: Vec<Vec<usize>>,
    pub dropped: Vec<usize>,
}

impl BasisPartition {
    pub fn p(&self) -> usize {
        self.blocks.len()
    }
}

/// `α_j = 2 q_j / (1 − q_j)^2 = 2 z_j (1 + z_j)`.
pub fn alphas(sol: &MaxEntSolution) -> Vec<f64> {
    sol.z.iter().map(|z| 2.0 * z * (1.0 + z)).collect()
}

/// Packs disjoint bases (preferring high-`z` columns), then orders each
/// block by `α_j` descending, ties to the lower index.
pub fn partition_into_bases(spec: &PolytopeSpec, sol: &MaxEntSolution) -> Result<BasisPartition> {
    let alpha = alphas(sol);
    let order = order_by_weight_desc(&alpha);
    let (mut blocks, mut dropped) = disjoint_bases(spec, &order);
    if blocks.is_empty() {
        return Err(Error::RankDeficient {
            rank: spec.rank(),
            m: spec.m(),
        });
    }
    for block in &mut blocks {
        block.sort_by(|&a, &b| alpha[b].total_cmp(&alpha[a]).then(a.cmp(&b)));
    }
    dropped.sort_unstable();
    Ok(BasisPartition { blocks, dropped })
}

/// All constants of the bound for one `γ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Thm2Constants {
    pub gamma: f64,
    pub alpha: Vec<f64>,
    pub alpha_vee: Vec<f64>,
    pub q_vee: Vec<f64>,
    pub c: Vec<f64>,
    /// `C = Π_i (2π c_i α∨_i)^{−1/2}`
    pub big_c: LogNumber,
    /// `C′ = max_i e^{−γ² c_i / 2}`
    pub c_prime: f64,
    pub p: usize,
}

/// `(1/γ²) ln[1 + α(1 − cos(γ/√α))]`
pub fn c_first_branch(alpha_vee: f64, gamma: f64) -> f64 {
    let t = gamma / alpha_vee.sqrt();
    // 1 − cos t = 2 sin²(t/2), exact near t = 0
    let one_minus_cos = 2.0 * (0.5 * t).sin().powi(2);
    (alpha_vee * one_minus_cos).ln_1p() / (gamma * gamma)
}

/// `(1/(α π²)) ln(1 + 2α)`
pub fn c_second_branch(alpha_vee: f64) -> f64 {
    (2.0 * alpha_vee).ln_1p() / (alpha_vee * PI * PI)
}

/// `c = max{first branch, second branch}`.
pub fn c_coefficient(alpha_vee: f64, gamma: f64) -> f64 {
    c_first_branch(alpha_vee, gamma).max(c_second_branch(alpha_vee))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")))
    }
}

/// `α∨_i` and `q∨_i`: minima over blocks of each block's `i`-th entry.
fn block_minima(sol: &MaxEntSolution, part: &BasisPartition, alpha: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = sol.m();
    let mut alpha_vee = vec![f64::INFINITY; m];
    let mut q_vee = vec![f64::INFINITY; m];
    for block in &part.blocks {
        for (i, &j) in block.iter().enumerate() {
            alpha_vee[i] = alpha_vee[i].min(alpha[j]);
            q_vee[i] = q_vee[i].min(sol.q[j]);
        }
    }
    (alpha_vee, q_vee)
}

pub fn thm2_constants(
    spec: &PolytopeSpec,
    sol: &MaxEntSolution,
    part: &BasisPartition,
    gamma: f64,
) -> Result<Thm2Constants> {
    if !spec.integral_a() {
        return Err(Error::NonIntegral);
    }
    check_gamma(gamma)?;
    if part.blocks.is_empty() {
        return Err(Error::InvalidArgument("partition has no blocks".into()));
    }
    if let Some(k) = part.blocks.iter().position(|b| b.len() != sol.m()) {
        return Err(Error::InvalidArgument(format!("block {k} does not have m columns")));
    }
    let alpha = alphas(sol);
    let (alpha_vee, q_vee) = block_minima(sol, part, &alpha);
    if let Some(i) = alpha_vee.iter().position(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument(format!("alpha_vee[{i}] is not positive")));
    }
    let c: Vec<f64> = alpha_vee.iter().map(|&a| c_coefficient(a, gamma)).collect();
    let ln_c = -0.5 * c.iter().zip(&alpha_vee).map(|(ci, ai)| (2.0 * PI * ci * ai).ln()).sum::<f64>();
    let c_prime = c.iter().map(|ci| (-gamma * gamma * ci / 2.0).exp()).fold(0.0, f64::max);
    Ok(Thm2Constants {
        gamma,
        alpha,
        alpha_vee,
        q_vee,
        c,
        big_c: LogNumber::from_ln(ln_c),
        c_prime,
        p: part.p(),
    })
}

fn ln_bound_from(consts: &Thm2Constants, entropy: f64, m: usize) -> f64 {
    let p = consts.p as f64;
    let gauss = consts.big_c.ln() - 0.5 * m as f64 * p.ln();
    let tail = p * consts.c_prime.ln();
    entropy + log_add(gauss, tail)
}

fn hypothesis_notes(spec: &PolytopeSpec, part: &BasisPartition) -> Vec<String> {
    let mut notes = vec!["blocks ordered by alpha descending (heuristic)".to_string()];
    if !part.dropped.is_empty() {
        notes.push(format!(
            "{} column(s) dropped from the partition; bound applies to the sub-sum: {:?}",
            part.dropped.len(),
            part.dropped
        ));
    }
    if part.p() == 1 {
        notes.push("p = 1: the Gaussian bound is weak with a single block".into());
    }
    let bad: Vec<usize> = spec
        .columns()
        .enumerate()
        .filter(|(_, a)| a.iter().zip(spec.b_f64()).map(|(x, b)| x * b).sum::<f64>() <= 0.0)
        .map(|(j, _)| j)
        .collect();
    if !bad.is_empty() {
        notes.push(format!("hypothesis <a_j, b> > 0 fails for columns {bad:?}"));
    }
    notes
}

pub fn bound_thm2(
    spec: &PolytopeSpec,
    sol: &MaxEntSolution,
    part: &BasisPartition,
    gamma: f64,
) -> Result<BoundReport> {
    let consts = thm2_constants(spec, sol, part, gamma)?;
    Ok(report_from(spec, sol, part, &consts))
}

fn report_from(spec: &PolytopeSpec, sol: &MaxEntSolution, part: &BasisPartition, consts: &Thm2Constants) -> BoundReport {
    BoundReport {
        method: Method::Thm2,
        bound: LogNumber::from_ln(ln_bound_from(consts, sol.entropy, sol.m())),
        params: BoundParams::Thm2 {
            gamma: consts.gamma,
            ln_c: consts.big_c.ln(),
            c_sci: consts.big_c.to_sci(),
            c_prime: consts.c_prime,
            p: consts.p,
            m: sol.m(),
            c: consts.c.clone(),
            alpha_vee: consts.alpha_vee.clone(),
            q_vee: consts.q_vee.clone(),
            dropped: part.dropped.clone(),
        },
        notes: hypothesis_notes(spec, part),
    }
}

const GRID_POINTS: usize = 64;
const GAMMA_MIN: f64 = 1e-3;
const GAMMA_MAX: f64 = 32.0;
const REFINE_REL_WIDTH: f64 = 1e-4;

/// Minimizes the bound over `γ`: 64 log-spaced grid points on `[1e-3, 32]`,
/// then golden-section search between the neighbours of the best grid point.
pub fn optimize_gamma(
    spec: &PolytopeSpec,
    sol: &MaxEntSolution,
    part: &BasisPartition,
) -> Result<(f64, BoundReport)> {
    // Validates everything except gamma once.
    thm2_constants(spec, sol, part, 1.0)?;
    let eval = |g: f64| -> f64 {
        let consts = thm2_constants(spec, sol, part, g).expect("validated above");
        ln_bound_from(&consts, sol.entropy, sol.m())
    };
    let step = (GAMMA_MAX / GAMMA_MIN).ln() / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS).map(|k| GAMMA_MIN * (step * k as f64).exp()).collect();
    let values: Vec<f64> = grid.iter().map(|&g| eval(g)).collect();
    // Strict `<` keeps the smallest gamma on ties.
    let best = (0..GRID_POINTS).fold(0, |b, k| if values[k] < values[b] { k } else { b });

    let mut lo = grid[best.saturating_sub(1)];
    let mut hi = grid[(best + 1).min(GRID_POINTS - 1)];
    let (mut best_g, mut best_v) = (grid[best], values[best]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while hi - lo > REFINE_REL_WIDTH * best_g.min(lo.max(GAMMA_MIN)) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2);
        }
    }
    for (g, v) in [(x1, f1), (x2, f2)] {
        if v < best_v {
            best_g = g;
            best_v = v;
        }
    }
    let consts = thm2_constants(spec, sol, part, best_g)?;
    let mut report = report_from(spec, sol, part, &consts);
    report.notes.push(format!("gamma optimized: {best_g:.6}"));
    if best == 0 || best == GRID_POINTS - 1 {
        report
            .notes
            .push(format!("optimum at the edge of the search range [{GAMMA_MIN}, {GAMMA_MAX}]"));
    }
    Ok((best_g, report))
}

/// Closed-form upper bounds on `C` and `C′` depending only on `q∨` and `γ`:
///
/// ```text
/// C  ≤ [γ / (2 √(π ln(1 + 2γ²/π²)))]^m Π_i (1 − q∨_i)/√q∨_i
/// C′ ≤ 1/√(1 + 2γ²/π²)
/// ```
pub fn thm2b_closed_forms(q_vee: &[f64], gamma: f64) -> Result<(LogNumber, f64)> {
    check_gamma(gamma)?;
    if let Some(q) = q_vee.iter().find(|&&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::InvalidArgument(format!("q_vee entries must lie in (0, 1), got {q}")));
    }
    let l = (2.0 * gamma * gamma / (PI * PI)).ln_1p();
    let ln_coef = gamma.ln() - (2.0 * (PI * l).sqrt()).ln();
    let m = q_vee.len() as f64;
    let ln_c = m * ln_coef + q_vee.iter().map(|&q| (-q).ln_1p() - 0.5 * q.ln()).sum::<f64>();
    Ok((LogNumber::from_ln(ln_c), (-0.5 * l).exp()))
}
