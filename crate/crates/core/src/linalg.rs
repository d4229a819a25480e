//! Small dense helpers: an incremental Gram–Schmidt span used for rank
//! estimation, matroid independence tests and basis coordinates.

/// Relative tolerance for deciding that a vector leaves a span.
pub const RANK_TOL: f64 = 1e-9;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the span of the columns pushed so far, together
/// with the triangular factor relating it to those columns (a thin QR).
#[derive(Debug, Clone)]
pub struct IncrementalSpan {
    dim: usize,
    q: Vec<Vec<f64>>,
    // r[k] holds column k of R (length k + 1).
    r: Vec<Vec<f64>>,
}

impl IncrementalSpan {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            q: Vec::new(),
            r: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    pub fn is_full(&self) -> bool {
        self.q.len() == self.dim
    }

    /// Projects `v` onto the orthogonal complement of the span, with one
    /// re-orthogonalization pass. Returns (coefficients along q, residual).
    fn project(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut res = v.to_vec();
        let mut coef = vec![0.0; self.q.len()];
        for _ in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let c = dot(qk, &res);
                coef[k] += c;
                for (ri, qi) in res.iter_mut().zip(qk) {
                    *ri -= c * qi;
                }
            }
        }
        (coef, res)
    }

    /// Norm of the component of `v` orthogonal to the current span.
    pub fn residual_norm(&self, v: &[f64]) -> f64 {
        norm(&self.project(v).1)
    }

    /// Whether `v` is independent of the span, judged relative to `‖v‖`.
    pub fn is_independent(&self, v: &[f64]) -> bool {
        let nv = norm(v);
        nv > 0.0 && self.residual_norm(v) > RANK_TOL * nv
    }

    /// Adds `v` if it is independent of the current span.
    pub fn try_push(&mut self, v: &[f64]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let nv = norm(v);
        if nv == 0.0 || self.is_full() {
            return false;
        }
        let (mut coef, res) = self.project(v);
        let rn = norm(&res);
        if rn <= RANK_TOL * nv {
            return false;
        }
        self.q.push(res.iter().map(|x| x / rn).collect());
        coef.push(rn);
        self.r.push(coef);
        true
    }

    /// Coordinates of `v` with respect to the pushed columns when `v` lies in
    /// their span, `None` otherwise.
    pub fn coordinates(&self, v: &[f64]) -> Option<Vec<f64>> {
        let nv = norm(v);
        let (coef, res) = self.project(v);
        if nv > 0.0 && norm(&res) > RANK_TOL * nv {
            return None;
        }
        // Back substitution R c = coef.
        let k = self.r.len();
        let mut c = vec![0.0; k];
        for row in (0..k).rev() {
            let mut acc = coef[row];
            for col in row + 1..k {
                acc -= self.r[col][row] * c[col];
            }
            c[row] = acc / self.r[row][row];
        }
        Some(c)
    }
}

/// Numerical rank of a set of columns by column-pivoted Gram–Schmidt,
/// stopping once the largest remaining residual is at most
/// `RANK_TOL × (largest column norm)`.
pub fn rank_estimate(dim: usize, columns: &[&[f64]]) -> usize {
    let max_norm = columns.iter().map(|c| norm(c)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return 0;
    }
    let tol = RANK_TOL * max_norm;
    let mut work: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut used = vec![false; work.len()];
    let mut rank = 0;
    while rank < dim {
        let (best, best_norm) = work
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, norm(w)))
            .fold((usize::MAX, 0.0), |acc, (j, nw)| if nw > acc.1 { (j, nw) } else { acc });
        if best == usize::MAX || best_norm <= tol {
            break;
        }
        used[best] = true;
        let q: Vec<f64> = work[best].iter().map(|x| x / best_norm).collect();
        for (j, w) in work.iter_mut().enumerate() {
            if used[j] {
                continue;
            }
            let c = dot(&q, w);
            for (wi, qi) in w.iter_mut().zip(&q) {
                *wi -= c * qi;
            }
        }
        rank += 1;
    }
    rank
}
