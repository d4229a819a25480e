//! Concentration of sums of independent variables with `conc(X_j) ≤ 1/N_j`,
//! via the width of the chain product `[N_1] × ⋯ × [N_p]`, and the resulting
//! bound for systems whose columns cycle through a basis.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::IncrementalSpan;
use crate::lognum::LogNumber;
use crate::maxent::MaxEntSolution;
use crate::model::PolytopeSpec;
use crate::report::{BoundParams, BoundReport, Method};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainProductSpec {
    pub ns: Vec<u64>,
}

impl ChainProductSpec {
    pub fn new(ns: Vec<u64>) -> Result<Self> {
        if ns.is_empty() {
            return Err(Error::InvalidArgument("empty chain product".into()));
        }
        if let Some(n) = ns.iter().find(|&&n| n == 0) {
            return Err(Error::InvalidArgument(format!("chain length must be positive, got {n}")));
        }
        Ok(Self { ns })
    }

    /// `N` repeated `p` times.
    pub fn uniform(n: u64, p: usize) -> Result<Self> {
        Self::new(vec![n; p])
    }

    fn rank_span(&self) -> u64 {
        self.ns.iter().map(|n| n - 1).sum()
    }
}

/// Largest mass of a sum of independent uniforms on `{0, …, N_j − 1}`,
/// by floating-point convolution. Equals `width / Π N_j`.
pub fn conc_chain(spec: &ChainProductSpec) -> f64 {
    let mut pmf = vec![1.0];
    for &n in &spec.ns {
        let n = n as usize;
        let w = 1.0 / n as f64;
        // Sliding-window convolution with a box of length n.
        let mut next = vec![0.0; pmf.len() + n - 1];
        let mut window = 0.0f64;
        for (k, slot) in next.iter_mut().enumerate() {
            if k < pmf.len() {
                window += pmf[k];
            }
            if k >= n {
                window -= pmf[k - n];
            }
            *slot = window.max(0.0) * w;
        }
        pmf = next;
    }
    pmf.into_iter().fold(0.0, f64::max)
}

pub const WIDTH_GUARD: u64 = 100_000;

/// Largest coefficient of `Π_j (1 + x + ⋯ + x^{N_j − 1})`, exactly.
pub fn width_exact(spec: &ChainProductSpec) -> Result<BigUint> {
    let span = spec.rank_span();
    if span > WIDTH_GUARD {
        return Err(Error::BudgetExceeded(format!(
            "sum of (N_j - 1) = {span} exceeds {WIDTH_GUARD}"
        )));
    }
    let mut coeffs = vec![BigUint::one()];
    for &n in &spec.ns {
        let n = n as usize;
        let mut next = vec![BigUint::zero(); coeffs.len() + n - 1];
        let mut window = BigUint::zero();
        for k in 0..next.len() {
            if k < coeffs.len() {
                window += &coeffs[k];
            }
            if k >= n {
                window -= &coeffs[k - n];
            }
            next[k] = window.clone();
        }
        coeffs = next;
    }
    Ok(coeffs.into_iter().max().unwrap_or_default())
}

/// `(π/6 · Σ_j (N_j² − 1))^{−1/2}`.
pub fn asymptotic_conc(spec: &ChainProductSpec) -> Result<f64> {
    let s: f64 = spec.ns.iter().map(|&n| (n as f64).powi(2) - 1.0).sum();
    if s <= 0.0 {
        return Err(Error::Vacuous("all chains have length 1".into()));
    }
    Ok((PI / 6.0 * s).powf(-0.5))
}

/// Columns `a_{km+i}` all equal `a_i`, with `a_1, …, a_m` a basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CyclicStructure {
    pub m: usize,
    pub p: usize,
    pub class_of_column: Vec<usize>,
}

pub fn detect_cyclic(spec: &PolytopeSpec) -> Result<CyclicStructure> {
    let (m, n) = (spec.m(), spec.n());
    if n % m != 0 {
        return Err(Error::NotCyclic(format!("n = {n} is not a multiple of m = {m}")));
    }
    for j in m..n {
        let i = j % m;
        if (0..m).any(|r| spec.entry(r, j) != spec.entry(r, i)) {
            return Err(Error::NotCyclic(format!("column {j} differs from column {i}")));
        }
    }
    let mut span = IncrementalSpan::new(m);
    if !(0..m).all(|j| span.try_push(spec.column(j))) {
        return Err(Error::NotCyclic(format!("the first {m} columns are not a basis")));
    }
    Ok(CyclicStructure {
        m,
        p: n / m,
        class_of_column: (0..n).map(|j| j % m).collect(),
    })
}

const SNAP_TOL: f64 = 1e-9;

/// `⌊z + 1⌋`, snapping `z` to a nearby integer first.
pub fn chain_length_for_mean(z: f64) -> u64 {
    let r = z.round();
    let z = if (z - r).abs() <= SNAP_TOL { r } else { z };
    (z + 1.0).floor() as u64
}

/// Rigorous (finite-`p` chain-product) and asymptotic bounds for a cyclic
/// system. Fails when some class has `⌊z_i + 1⌋ = 1`.
pub fn bound_thm3(sol: &MaxEntSolution, cyc: &CyclicStructure) -> Result<(BoundReport, BoundReport)> {
    if sol.n() != cyc.m * cyc.p {
        return Err(Error::Dimension("solution does not match the cyclic structure".into()));
    }
    let mut notes = Vec::new();
    let mut ns = Vec::with_capacity(cyc.m);
    for i in 0..cyc.m {
        let z = sol.z[i];
        let spread = (i..sol.n()).step_by(cyc.m).map(|j| (sol.z[j] - z).abs()).fold(0.0, f64::max);
        if spread > 1e-6 * z.max(1.0) {
            notes.push(format!("class {i}: means differ across repeats by {spread:e}"));
        }
        ns.push(chain_length_for_mean(z));
    }
    if let Some(i) = ns.iter().position(|&n| n == 1) {
        return Err(Error::Vacuous(format!(
            "class {i} has floor(E[X] + 1) = 1 (z = {}); the bound is infinite",
            sol.z[i]
        )));
    }
    let mut ln_rigorous = 0.0;
    let mut ln_asymptotic = 0.0;
    for &n in &ns {
        let chain = ChainProductSpec::uniform(n, cyc.p)?;
        ln_rigorous += conc_chain(&chain).ln();
        ln_asymptotic += asymptotic_conc(&chain)?.ln();
    }
    let make = |method, ln_factor: f64, extra: &str| BoundReport {
        method,
        bound: LogNumber::from_ln(sol.entropy + ln_factor),
        params: BoundParams::Thm3 {
            m: cyc.m,
            p: cyc.p,
            ns: ns.clone(),
            ln_factor,
        },
        notes: notes.iter().cloned().chain(std::iter::once(extra.to_string())).collect(),
    };
    Ok((
        make(Method::Thm3Rigorous, ln_rigorous, "product of exact chain-product concentrations"),
        make(Method::Thm3Asymptotic, ln_asymptotic, "local-limit asymptotic in p; not a finite-p guarantee"),
    ))
}

/// `width / Π N_j` as an exact rational, for cross-checks.
pub fn conc_chain_exact(spec: &ChainProductSpec) -> Result<BigRational> {
    let w = width_exact(spec)?;
    let total: BigUint = spec.ns.iter().map(|&n| BigUint::from(n)).product();
    Ok(BigRational::new(w.into(), total.into()))
}
