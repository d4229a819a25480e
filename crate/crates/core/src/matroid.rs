//! Linear-matroid routines on the columns of `A`: greedy maximum-weight
//! bases and packings of disjoint bases.

use std::collections::VecDeque;

use crate::linalg::{IncrementalSpan, RANK_TOL};
use crate::model::PolytopeSpec;

/// Column order by weight descending; ties go to the lower index.
pub fn order_by_weight_desc(weights: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order
}

/// Scans `order`, keeping every column that enlarges the span, until the span
/// is full. Returns the kept columns in scan order (a maximal independent set
/// of the scanned columns).
pub fn greedy_independent(spec: &PolytopeSpec, order: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut span = IncrementalSpan::new(spec.m());
    let mut picked = Vec::with_capacity(spec.m());
    for j in order {
        if span.is_full() {
            break;
        }
        if span.try_push(spec.column(j)) {
            picked.push(j);
        }
    }
    picked
}

fn span_of(spec: &PolytopeSpec, cols: &[usize]) -> IncrementalSpan {
    let mut span = IncrementalSpan::new(spec.m());
    for &j in cols {
        let added = span.try_push(spec.column(j));
        debug_assert!(added, "set is not independent");
    }
    span
}

fn is_zero_column(spec: &PolytopeSpec, j: usize) -> bool {
    spec.column(j).iter().all(|&x| x == 0.0)
}

/// Tries to place as many columns of `order` as possible into `k` disjoint
/// independent sets (matroid partitioning by shortest augmenting paths).
/// Returns the sets and the columns that could not be placed.
fn pack_independent_sets(spec: &PolytopeSpec, order: &[usize], k: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = spec.n();
    let mut sets: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut left_out = Vec::new();

    for &s in order {
        let spans: Vec<IncrementalSpan> = sets.iter().map(|set| span_of(spec, set)).collect();
        // BFS over the exchange graph. parent[y] = x means x takes y's slot.
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        let mut sink: Option<(usize, usize)> = None;
        'bfs: while let Some(x) = queue.pop_front() {
            for (i, set) in sets.iter().enumerate() {
                if owner[x] == Some(i) {
                    continue;
                }
                if set.len() < spec.m() && spans[i].is_independent(spec.column(x)) {
                    sink = Some((x, i));
                    break 'bfs;
                }
                let Some(coords) = spans[i].coordinates(spec.column(x)) else {
                    continue;
                };
                let scale = coords.iter().fold(0.0f64, |a, c| a.max(c.abs()));
                for (&y, c) in set.iter().zip(&coords) {
                    if !seen[y] && c.abs() > RANK_TOL * scale.max(1.0) {
                        seen[y] = true;
                        parent[y] = Some(x);
                        queue.push_back(y);
                    }
                }
            }
        }
        let Some((mut x, target)) = sink else {
            left_out.push(s);
            continue;
        };
        // Walk the path back: x joins `target`, its predecessor takes x's old slot, ...
        let mut dest = target;
        loop {
            let prev_owner = owner[x];
            if let Some(o) = prev_owner {
                sets[o].retain(|&c| c != x);
            }
            sets[dest].push(x);
            owner[x] = Some(dest);
            match (parent[x], prev_owner) {
                (Some(p), Some(o)) => {
                    x = p;
                    dest = o;
                }
                _ => break,
            }
        }
    }
    for set in &sets {
        debug_assert_eq!(span_of(spec, set).rank(), set.len());
    }
    (sets, left_out)
}

/// Disjoint bases of `R^m` among the columns, as many as can be found.
///
/// Greedy extraction along `order` first; when that leaves fewer than
/// `⌊(nonzero columns) / m⌋` bases, matroid partitioning searches for the
/// largest feasible count. Returns (bases, columns in no basis).
pub fn disjoint_bases(spec: &PolytopeSpec, order: &[usize]) -> (Vec<Vec<usize>>, Vec<usize>) {
    let m = spec.m();
    let nonzero: Vec<usize> = order.iter().copied().filter(|&j| !is_zero_column(spec, j)).collect();
    let zeros: Vec<usize> = order.iter().copied().filter(|&j| is_zero_column(spec, j)).collect();

    if m == 1 {
        let blocks = nonzero.iter().map(|&j| vec![j]).collect();
        return (blocks, zeros);
    }

    let mut remaining = nonzero.clone();
    let mut greedy_blocks = Vec::new();
    loop {
        let basis = greedy_independent(spec, remaining.iter().copied());
        if basis.len() < m {
            break;
        }
        remaining.retain(|j| !basis.contains(j));
        greedy_blocks.push(basis);
    }

    let upper = nonzero.len() / m;
    let (blocks, mut dropped) = if greedy_blocks.len() >= upper {
        (greedy_blocks, remaining)
    } else {
        // k bases exist iff k independent sets cover k·m columns; feasibility
        // is monotone in k, so binary search above the greedy count.
        let mut best = (greedy_blocks, remaining);
        let (mut lo, mut hi) = (best.0.len(), upper);
        while lo < hi {
            let k = (lo + hi).div_ceil(2);
            let (sets, left) = pack_independent_sets(spec, &nonzero, k);
            if sets.iter().all(|s| s.len() == m) {
                best = (sets, left);
                lo = k;
            } else {
                hi = k - 1;
            }
        }
        best
    };
    dropped.extend(zeros);
    (blocks, dropped)
}
