use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maxent::MaxEntSolution;
use crate::model::PolytopeSpec;

/// Trials per RNG stream. Chunk `c` draws from
/// `ChaCha8Rng::seed_from_u64(seed)` with stream number `c`.
pub const TRIALS_PER_STREAM: u64 = 1 << 16;

/// Monte Carlo estimate of `e^H · Pr[AX = b]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub hits: u64,
    /// `H + ln(hits / trials)`; −∞ when there are no hits.
    pub ln_estimate: f64,
    /// Standard error of `ln_estimate` (delta method), `sqrt((1 − p̂)/(trials p̂))`.
    pub ln_stderr: f64,
    pub seed: u64,
    /// With zero hits: ln of the one-sided 95% upper confidence bound `e^H · 3/trials`.
    pub ln_upper_95: Option<f64>,
    pub notes: Vec<String>,
}

impl McEstimate {
    pub fn estimate(&self) -> f64 {
        self.ln_estimate.exp()
    }

    /// Absolute standard error of [`McEstimate::estimate`].
    pub fn stderr(&self) -> f64 {
        self.estimate() * self.ln_stderr
    }
}

/// Samples `X` coordinate-wise by inverse CDF, `k = ⌊ln U / ln q_j⌋`, and
/// counts exact hits of `AX = b`. Every trial consumes exactly `n` uniforms.
pub fn estimate_count_mc(sol: &MaxEntSolution, spec: &PolytopeSpec, trials: u64, seed: u64) -> Result<McEstimate> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if sol.n() != spec.n() {
        return Err(Error::Dimension(format!(
            "solution has {} coordinates, spec has {}",
            sol.n(),
            spec.n()
        )));
    }
    if !spec.integral_a() || !spec.integral_b() {
        return Err(Error::NonIntegral);
    }
    let (m, n) = (spec.m(), spec.n());
    let a = spec
        .a_i64()
        .ok_or_else(|| Error::Unsupported("entries of A exceed 64 bits".into()))?;
    let b: Vec<i128> = spec
        .b_i64()
        .ok_or_else(|| Error::Unsupported("entries of b exceed 64 bits".into()))?
        .into_iter()
        .map(i128::from)
        .collect();
    let cols: Vec<Vec<i128>> = (0..n).map(|j| (0..m).map(|i| a[i * n + j] as i128).collect()).collect();
    let nonnegative = a.iter().all(|&v| v >= 0);
    // (q_j, 1 / ln q_j), or None for a degenerate coordinate that is always 0.
    let params: Vec<Option<(f64, f64)>> = sol
        .q
        .iter()
        .map(|&q| (q > 0.0).then(|| (q, 1.0 / q.ln())))
        .collect();

    let mut hits = 0u64;
    let mut acc = vec![0i128; m];
    let mut u = vec![0f64; n];
    let mut done = 0u64;
    let mut stream = 0u64;
    while done < trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let chunk = TRIALS_PER_STREAM.min(trials - done);
        for _ in 0..chunk {
            for v in u.iter_mut() {
                *v = rng.sample(Open01);
            }
            acc.iter_mut().for_each(|x| *x = 0);
            let mut ok = true;
            for j in 0..n {
                let Some((q, inv)) = params[j] else { continue };
                // ⌊ln U / ln q⌋ = 0 exactly when U > q.
                if u[j] > q {
                    continue;
                }
                let k = (u[j].ln() * inv).floor();
                if k >= 1e15 {
                    ok = false;
                    break;
                }
                let k = k as i128;
                for (x, &c) in acc.iter_mut().zip(&cols[j]) {
                    *x += c * k;
                }
                if nonnegative && acc.iter().zip(&b).any(|(x, bi)| x > bi) {
                    ok = false;
                    break;
                }
            }
            if ok && acc == b {
                hits += 1;
            }
        }
        done += chunk;
        stream += 1;
    }

    let p_hat = hits as f64 / trials as f64;
    let mut notes = Vec::new();
    let (ln_estimate, ln_stderr, ln_upper_95) = if hits == 0 {
        notes.push(format!(
            "no hits in {trials} trials; only an upper confidence bound is reported"
        ));
        (f64::NEG_INFINITY, f64::INFINITY, Some(sol.entropy + (3.0 / trials as f64).ln()))
    } else {
        (
            sol.entropy + p_hat.ln(),
            ((1.0 - p_hat) / (trials as f64 * p_hat)).sqrt(),
            None,
        )
    };
    Ok(McEstimate {
        trials,
        hits,
        ln_estimate,
        ln_stderr,
        seed,
        ln_upper_95,
        notes,
    })
}
