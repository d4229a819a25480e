use std::collections::HashMap;
use std::hash::Hash;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lognum::LogNumber;
use crate::model::PolytopeSpec;

/// Exact number of integer points, with DP statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCount {
    pub count: BigUint,
    pub states_visited: u64,
    pub transitions: u64,
    pub elapsed: Duration,
}

impl ExactCount {
    pub fn ln(&self) -> f64 {
        ln_biguint(&self.count)
    }
}

/// Natural log of a big integer (−∞ for zero).
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("fits").ln() + shift as f64 * std::f64::consts::LN_2
}

impl Serialize for ExactCount {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ExactCount", 5)?;
        s.serialize_field("count", &self.count.to_string())?;
        s.serialize_field("count_sci", &LogNumber::from_ln(self.ln()).to_sci())?;
        s.serialize_field("states_visited", &self.states_visited)?;
        s.serialize_field("transitions", &self.transitions)?;
        s.serialize_field("elapsed_ms", &(self.elapsed.as_secs_f64() * 1e3))?;
        s.end()
    }
}

/// Limits on the counting DP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DpBudget {
    pub max_transitions: u64,
    /// Largest number of live residual states in one layer.
    pub max_states: usize,
}

impl Default for DpBudget {
    fn default() -> Self {
        Self {
            max_transitions: 500_000_000,
            max_states: 10_000_000,
        }
    }
}

/// `C(n + r − 1, r)`, the number of integer points of the dilated simplex.
pub fn count_exact_binomial(n: u64, r: u64) -> BigUint {
    if n == 0 {
        return BigUint::from(u32::from(r == 0));
    }
    binomial(BigUint::from(n + r - 1), BigUint::from(r))
}

/// Residual vectors packed for hashing.
trait ResidualKey: Hash + Eq + Clone + Send {
    type Codec;
    fn codec(b: &[u64]) -> Self::Codec;
    fn encode(codec: &Self::Codec, r: &[u64]) -> Self;
    fn get(&self, codec: &Self::Codec, i: usize) -> u64;
    fn column_delta(codec: &Self::Codec, col: &[u64]) -> Self;
    /// `self − x · delta`; the caller guarantees no component goes negative.
    fn sub_scaled(&self, delta: &Self, x: u64) -> Self;
}

/// Mixed-radix integer with radices `b_i + 1`.
struct RadixCodec {
    weights: Vec<u128>,
    radices: Vec<u128>,
}

impl ResidualKey for u128 {
    type Codec = RadixCodec;

    fn codec(b: &[u64]) -> RadixCodec {
        let mut weights = Vec::with_capacity(b.len());
        let mut w: u128 = 1;
        for &bi in b {
            weights.push(w);
            w = w.saturating_mul(bi as u128 + 1);
        }
        RadixCodec {
            weights,
            radices: b.iter().map(|&v| v as u128 + 1).collect(),
        }
    }

    fn encode(codec: &RadixCodec, r: &[u64]) -> Self {
        r.iter().zip(&codec.weights).map(|(&ri, &w)| ri as u128 * w).sum()
    }

    fn get(&self, codec: &RadixCodec, i: usize) -> u64 {
        ((self / codec.weights[i]) % codec.radices[i]) as u64
    }

    fn column_delta(codec: &RadixCodec, col: &[u64]) -> Self {
        // Components beyond b_i never occur with a nonnegative residual.
        col.iter()
            .zip(&codec.weights)
            .zip(&codec.radices)
            .map(|((&c, &w), &rad)| (c as u128).min(rad) * w)
            .sum()
    }

    fn sub_scaled(&self, delta: &Self, x: u64) -> Self {
        self - delta * x as u128
    }
}

impl ResidualKey for Box<[u64]> {
    type Codec = ();

    fn codec(_: &[u64]) {}

    fn encode(_: &(), r: &[u64]) -> Self {
        r.into()
    }

    fn get(&self, _: &(), i: usize) -> u64 {
        self[i]
    }

    fn column_delta(_: &(), col: &[u64]) -> Self {
        col.into()
    }

    fn sub_scaled(&self, delta: &Self, x: u64) -> Self {
        self.iter().zip(delta.iter()).map(|(r, d)| r - d * x).collect()
    }
}

/// Path counts; `u128` with overflow detection, then `BigUint`.
trait Tally: Clone + Send {
    fn empty() -> Self;
    fn one() -> Self;
    fn add_assign(&mut self, other: &Self) -> bool;
    fn into_big(self) -> BigUint;
}

impl Tally for u128 {
    fn empty() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn add_assign(&mut self, other: &Self) -> bool {
        match self.checked_add(*other) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Tally for BigUint {
    fn empty() -> Self {
        <BigUint as Zero>::zero()
    }
    fn one() -> Self {
        BigUint::from(1u32)
    }
    fn add_assign(&mut self, other: &Self) -> bool {
        *self += other;
        true
    }
    fn into_big(self) -> BigUint {
        self
    }
}

struct Prepared {
    m: usize,
    b: Vec<u64>,
    /// Column entries (nonnegative) in processing order.
    cols: Vec<Vec<u64>>,
    /// For each processed column, the rows it closes (last positive entry).
    closes: Vec<Vec<usize>>,
    /// Some row has no positive entry but a positive right-hand side.
    trivially_empty: bool,
}

fn prepare(spec: &PolytopeSpec, order: &[usize]) -> Result<Prepared> {
    let (m, n) = (spec.m(), spec.n());
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidArgument("column order must be a permutation".into()));
    }
    if !spec.integral_a() || !spec.integral_b() {
        return Err(Error::Unsupported("exact counting needs integer A and b".into()));
    }
    let a = spec
        .a_i64()
        .ok_or_else(|| Error::Unsupported("entries of A exceed 64 bits".into()))?;
    let b = spec
        .b_i64()
        .ok_or_else(|| Error::Unsupported("entries of b exceed 64 bits".into()))?;
    if a.iter().any(|&v| v < 0) {
        return Err(Error::Unsupported("nonnegative A required for exact counting".into()));
    }
    if b.iter().any(|&v| v < 0) {
        return Err(Error::Unsupported("nonnegative b required for exact counting".into()));
    }
    if let Some(j) = (0..n).find(|&j| (0..m).all(|i| a[i * n + j] == 0)) {
        return Err(Error::ZeroColumn(j));
    }
    let cols: Vec<Vec<u64>> = order
        .iter()
        .map(|&j| (0..m).map(|i| a[i * n + j] as u64).collect())
        .collect();
    let mut closes = vec![Vec::new(); n];
    let mut trivially_empty = false;
    for i in 0..m {
        match (0..n).rev().find(|&k| cols[k][i] > 0) {
            Some(k) => closes[k].push(i),
            None => trivially_empty |= b[i] != 0,
        }
    }
    Ok(Prepared {
        m,
        b: b.into_iter().map(|v| v as u64).collect(),
        cols,
        closes,
        trivially_empty,
    })
}

struct DpStats {
    states_visited: u64,
    transitions: u64,
}

/// Returns `Ok(None)` when the tally type overflows.
fn run_dp<K: ResidualKey, T: Tally>(p: &Prepared, budget: &DpBudget) -> Result<Option<(T, DpStats)>> {
    let codec = K::codec(&p.b);
    let mut layer: HashMap<K, T> = HashMap::new();
    layer.insert(K::encode(&codec, &p.b), T::one());
    let mut stats = DpStats {
        states_visited: 1,
        transitions: 0,
    };
    for (col, closes) in p.cols.iter().zip(&p.closes) {
        let delta = K::column_delta(&codec, col);
        let support: Vec<usize> = (0..p.m).filter(|&i| col[i] > 0).collect();
        let mut next: HashMap<K, T> = HashMap::with_capacity(layer.len());
        for (key, tally) in layer.drain() {
            let max_x = support
                .iter()
                .map(|&i| key.get(&codec, i) / col[i])
                .min()
                .expect("nonzero column");
            let (lo, hi) = if closes.is_empty() {
                (0, max_x)
            } else {
                // A closing row must reach exactly zero here.
                let mut forced = None;
                let mut ok = true;
                for &i in closes {
                    let r = key.get(&codec, i);
                    if r % col[i] != 0 || forced.is_some_and(|f| f != r / col[i]) {
                        ok = false;
                        break;
                    }
                    forced = Some(r / col[i]);
                }
                match forced {
                    Some(x) if ok && x <= max_x => (x, x),
                    _ => continue,
                }
            };
            stats.transitions += hi - lo + 1;
            if stats.transitions > budget.max_transitions {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} state transitions",
                    budget.max_transitions
                )));
            }
            for x in lo..=hi {
                let slot = next.entry(key.sub_scaled(&delta, x)).or_insert_with(T::empty);
                if !slot.add_assign(&tally) {
                    return Ok(None);
                }
            }
            if next.len() > budget.max_states {
                return Err(Error::BudgetExceeded(format!(
                    "more than {} live states in one layer",
                    budget.max_states
                )));
            }
        }
        stats.states_visited += next.len() as u64;
        layer = next;
    }
    let zero = K::encode(&codec, &vec![0; p.m]);
    Ok(Some((layer.remove(&zero).unwrap_or_else(T::empty), stats)))
}

fn run_keyed<K: ResidualKey>(p: &Prepared, budget: &DpBudget) -> Result<(BigUint, DpStats)> {
    if let Some((t, s)) = run_dp::<K, u128>(p, budget)? {
        return Ok((t.into_big(), s));
    }
    let (t, s) = run_dp::<K, BigUint>(p, budget)?.expect("BigUint never overflows");
    Ok((t, s))
}

/// `|{x ∈ Z^n_{≥0} : Ax = b}|` by a column-by-column DP over residual vectors
/// `b − A x_{<j}`, for nonnegative integer `A` and `b`.
pub fn count_exact(spec: &PolytopeSpec) -> Result<ExactCount> {
    let order: Vec<usize> = (0..spec.n()).collect();
    count_exact_with(spec, &DpBudget::default(), &order)
}

/// [`count_exact`] with an explicit budget and column processing order.
pub fn count_exact_with(spec: &PolytopeSpec, budget: &DpBudget, order: &[usize]) -> Result<ExactCount> {
    let start = Instant::now();
    let p = prepare(spec, order)?;
    if p.trivially_empty {
        return Ok(ExactCount {
            count: BigUint::zero(),
            states_visited: 0,
            transitions: 0,
            elapsed: start.elapsed(),
        });
    }
    let fits_u128 = p
        .b
        .iter()
        .try_fold(1u128, |acc, &bi| acc.checked_mul(bi as u128 + 1))
        .is_some();
    let (count, stats) = if fits_u128 {
        run_keyed::<u128>(&p, budget)?
    } else {
        run_keyed::<Box<[u64]>>(&p, budget)?
    };
    Ok(ExactCount {
        count,
        states_visited: stats.states_visited,
        transitions: stats.transitions,
        elapsed: start.elapsed(),
    })
}

/// Number of `x ∈ Z^s` with `0 ≤ x ≤ cap` and `Σ x = total`, by
/// inclusion–exclusion over the capped coordinates.
fn bounded_compositions(total: u64, cap: &[u64]) -> BigInt {
    let s = cap.len();
    if s == 0 {
        return BigInt::from(u32::from(total == 0));
    }
    let mut acc = BigInt::zero();
    for mask in 0u64..(1u64 << s) {
        let over: u64 = (0..s).filter(|k| mask >> k & 1 == 1).map(|k| cap[k] + 1).sum();
        if over > total {
            continue;
        }
        let term = binomial(BigInt::from(total - over + s as u64 - 1), BigInt::from(s as u64 - 1));
        if mask.count_ones() % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Tables with row sums `rows` and column sums `cols`.
fn tables(rows: &[u64], cols: &[u64]) -> BigUint {
    let total: u64 = cols.iter().sum();
    if rows.iter().sum::<u64>() != total {
        return BigUint::zero();
    }
    match rows.len() {
        0 => BigUint::from(u32::from(total == 0)),
        1 => BigUint::from(1u32),
        2 => bounded_compositions(rows[0], cols).to_biguint().expect("nonnegative count"),
        _ => {
            let mut acc = BigUint::zero();
            for_each_bounded(rows[0], cols, &mut |x| {
                let rest: Vec<u64> = cols.iter().zip(x).map(|(c, v)| c - v).collect();
                acc += tables(&rows[1..], &rest);
            });
            acc
        }
    }
}

/// Calls `f` on every `x` with `0 ≤ x ≤ cap`, `Σ x = total`.
fn for_each_bounded(total: u64, cap: &[u64], f: &mut dyn FnMut(&[u64])) {
    fn rec(k: usize, left: u64, cap: &[u64], suffix: &[u64], x: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
        if k + 1 == cap.len() {
            if left <= cap[k] {
                x.push(left);
                f(x);
                x.pop();
            }
            return;
        }
        // The remaining coordinates can absorb at most suffix[k + 1].
        let lo = left.saturating_sub(suffix[k + 1]);
        for v in lo..=cap[k].min(left) {
            x.push(v);
            rec(k + 1, left - v, cap, suffix, x, f);
            x.pop();
        }
    }
    if cap.is_empty() {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    let mut suffix = vec![0u64; cap.len() + 1];
    for k in (0..cap.len()).rev() {
        suffix[k] = suffix[k + 1] + cap[k];
    }
    rec(0, total, cap, &suffix, &mut Vec::with_capacity(cap.len()), f);
}

/// Number of nonnegative integer matrices with row sums `rows` and column
/// sums `cols`. Splits the rows in two halves and sums, over the column
/// sums `y` of the lower half, (tables of the upper half with column sums
/// `cols − y`) × (tables of the lower half with column sums `y`).
///
/// Independent of [`count_exact`]; used to certify the contingency benchmark.
pub fn count_transportation(rows: &[u64], cols: &[u64]) -> Result<BigUint> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::InvalidArgument("need at least one row and one column".into()));
    }
    let total: u64 = rows.iter().sum();
    if cols.iter().sum::<u64>() != total {
        return Err(Error::Infeasible(format!(
            "row sums total {total} but column sums total {}",
            cols.iter().sum::<u64>()
        )));
    }
    let (upper, lower) = rows.split_at(rows.len() / 2);
    let lower_total: u64 = lower.iter().sum();
    let mut acc = BigUint::zero();
    for_each_bounded(lower_total, cols, &mut |y| {
        let rest: Vec<u64> = cols.iter().zip(y).map(|(c, v)| c - v).collect();
        let top = tables(upper, &rest);
        if !top.is_zero() {
            acc += top * tables(lower, y);
        }
    });
    Ok(acc)
}
