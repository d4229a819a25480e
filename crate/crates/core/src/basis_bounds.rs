//! Bounds from linearly independent column subsets.
//!
//! For a basis `a_{j_1}, …, a_{j_m}`, the sub-sum `Σ_i X_{j_i} a_{j_i}` pins
//! down the coordinates `X_{j_i}`, so `conc(AX) ≤ Π_i (1 − q_{j_i}) =
//! Π_i 1/(z_{j_i} + 1)`. [`bound_thm1`] takes the best such basis;
//! [`bound_cor1`] averages the entropy over a cover of the columns by bases.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::IncrementalSpan;
use crate::lognum::LogNumber;
use crate::matroid::{disjoint_bases, greedy_independent, order_by_weight_desc};
use crate::maxent::{entropy_inverse, MaxEntSolution};
use crate::model::PolytopeSpec;
use crate::report::{BoundParams, BoundReport, Method};

/// Maximum-weight basis for weights `ln(z_j + 1)` by matroid greedy.
/// Returns the basis (in selection order) and `−Σ ln(z_{j_i} + 1)`.
pub fn best_basis(spec: &PolytopeSpec, z: &[f64]) -> Result<(Vec<usize>, f64)> {
    if z.len() != spec.n() {
        return Err(Error::Dimension(format!("z has {} entries, expected {}", z.len(), spec.n())));
    }
    let weights: Vec<f64> = z.iter().map(|v| v.ln_1p()).collect();
    let basis = greedy_independent(spec, order_by_weight_desc(&weights));
    if basis.len() < spec.m() {
        return Err(Error::RankDeficient {
            rank: basis.len(),
            m: spec.m(),
        });
    }
    let ln_factor = -basis.iter().map(|&j| weights[j]).sum::<f64>();
    Ok((basis, ln_factor))
}

pub fn bound_thm1(sol: &MaxEntSolution, spec: &PolytopeSpec) -> Result<BoundReport> {
    let (basis, ln_factor) = best_basis(spec, &sol.z)?;
    Ok(BoundReport {
        method: Method::Thm1,
        bound: LogNumber::from_ln(sol.entropy + ln_factor),
        params: BoundParams::Thm1 { basis, ln_factor },
        notes: Vec::new(),
    })
}

/// Blocks of `m` column indices, each a basis, jointly covering every column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BasisCover {
    pub blocks: Vec<Vec<usize>>,
}

impl BasisCover {
    pub fn p(&self) -> usize {
        self.blocks.len()
    }

    /// Checks block sizes, independence and coverage against `spec`.
    pub fn check(&self, spec: &PolytopeSpec) -> Result<()> {
        let mut covered = vec![false; spec.n()];
        for (k, block) in self.blocks.iter().enumerate() {
            if block.len() != spec.m() {
                return Err(Error::InvalidArgument(format!(
                    "block {k} has {} columns, expected {}",
                    block.len(),
                    spec.m()
                )));
            }
            let mut span = IncrementalSpan::new(spec.m());
            for &j in block {
                if j >= spec.n() || !span.try_push(spec.column(j)) {
                    return Err(Error::InvalidArgument(format!("block {k} is not a basis")));
                }
                covered[j] = true;
            }
        }
        match covered.iter().position(|c| !c) {
            Some(j) => Err(Error::InvalidArgument(format!("column {j} is not covered"))),
            None => Ok(()),
        }
    }
}

/// Heuristic cover: as many disjoint bases as can be packed, then one block
/// per still-uncovered column, grown greedily from that column through other
/// uncovered columns first and covered columns after (lower index first).
pub fn cover_by_bases(spec: &PolytopeSpec) -> Result<BasisCover> {
    if let Some(j) = spec.columns().position(|a| a.iter().all(|&x| x == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    let order: Vec<usize> = (0..spec.n()).collect();
    let (mut blocks, mut uncovered) = disjoint_bases(spec, &order);
    if blocks.is_empty() {
        return Err(Error::RankDeficient {
            rank: spec.rank(),
            m: spec.m(),
        });
    }
    uncovered.sort_unstable();
    while let Some(&seed) = uncovered.first() {
        let others = uncovered[1..].iter().copied();
        let covered = (0..spec.n()).filter(|j| !uncovered.contains(j));
        let block = greedy_independent(spec, std::iter::once(seed).chain(others).chain(covered));
        debug_assert_eq!(block.len(), spec.m());
        uncovered.retain(|j| !block.contains(j));
        blocks.push(block);
    }
    Ok(BasisCover { blocks })
}

/// `e^H (1/(z̄+1))^m` with `z̄` the mean of a geometric variable of entropy
/// `H / (p m)`.
pub fn bound_cor1(sol: &MaxEntSolution, cover: &BasisCover) -> Result<BoundReport> {
    let p = cover.p();
    let m = sol.m();
    if p == 0 {
        return Err(Error::InvalidArgument("empty cover".into()));
    }
    let z_bar = entropy_inverse(sol.entropy / (p * m) as f64)?;
    Ok(BoundReport {
        method: Method::Cor1,
        bound: LogNumber::from_ln(sol.entropy - m as f64 * z_bar.ln_1p()),
        params: BoundParams::Cor1 {
            blocks: cover.blocks.clone(),
            p,
            z_bar,
        },
        notes: vec!["cover chosen heuristically; p is not minimized".into()],
    })
}
