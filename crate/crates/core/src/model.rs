//! Polytope specifications `P = {x ≥ 0, Ax = b}`: construction, generators,
//! validation and the JSON document format.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{self, rank_estimate};

/// The constraint system of a standard-form polytope.
///
/// Entries are kept as exact rationals; a column-major `f64` copy backs the
/// numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub struct PolytopeSpec {
    name: String,
    m: usize,
    n: usize,
    a: Vec<BigRational>,
    b: Vec<BigRational>,
    integral_a: bool,
    integral_b: bool,
    cols: Vec<f64>,
    b_f64: Vec<f64>,
}

/// Findings of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rank_ok: bool,
    pub rank_estimate: usize,
    pub column_norms: Vec<f64>,
    pub zero_columns: Vec<usize>,
    pub messages: Vec<String>,
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

impl PolytopeSpec {
    /// Builds a spec from rows of `A` and `b`, checking only shapes.
    /// Use [`PolytopeSpec::new`] for the full invariant check.
    pub fn from_rows(
        name: impl Into<String>,
        rows: Vec<Vec<BigRational>>,
        b: Vec<BigRational>,
    ) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Dimension("A has no rows".into()));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::Dimension("A has no columns".into()));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        if b.len() != m {
            return Err(Error::Dimension(format!(
                "b has {} entries but A has {m} rows",
                b.len()
            )));
        }
        let a: Vec<BigRational> = rows.into_iter().flatten().collect();
        let integral_a = a.iter().all(|x| x.is_integer());
        let integral_b = b.iter().all(|x| x.is_integer());
        let mut cols = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                cols[j * m + i] = to_f64(&a[i * n + j]);
            }
        }
        let b_f64 = b.iter().map(to_f64).collect();
        Ok(Self {
            name: name.into(),
            m,
            n,
            a,
            b,
            integral_a,
            integral_b,
            cols,
            b_f64,
        })
    }

    /// Builds a spec and enforces `n > m` and `rank(A) = m`.
    pub fn new(
        name: impl Into<String>,
        rows: Vec<Vec<BigRational>>,
        b: Vec<BigRational>,
    ) -> Result<Self> {
        Self::from_rows(name, rows, b)?.checked()
    }

    fn checked(self) -> Result<Self> {
        if self.n <= self.m {
            return Err(Error::NotWide {
                m: self.m,
                n: self.n,
            });
        }
        let rank = self.rank();
        if rank < self.m {
            return Err(Error::RankDeficient { rank, m: self.m });
        }
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigRational {
        &self.a[i * self.n + j]
    }

    pub fn b(&self) -> &[BigRational] {
        &self.b
    }

    pub fn b_f64(&self) -> &[f64] {
        &self.b_f64
    }

    /// Column `j` of `A` as floats.
    pub fn column(&self, j: usize) -> &[f64] {
        &self.cols[j * self.m..(j + 1) * self.m]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.cols.chunks_exact(self.m)
    }

    pub fn integral_a(&self) -> bool {
        self.integral_a
    }

    pub fn integral_b(&self) -> bool {
        self.integral_b
    }

    pub fn rank(&self) -> usize {
        let cols: Vec<&[f64]> = self.columns().collect();
        rank_estimate(self.m, &cols)
    }

    /// `A` as integers (row-major), when every entry is an integer that fits.
    pub fn a_i64(&self) -> Option<Vec<i64>> {
        self.a
            .iter()
            .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
            .collect()
    }

    pub fn b_i64(&self) -> Option<Vec<i64>> {
        self.b
            .iter()
            .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
            .collect()
    }

    /// Exact product `A x` for an integer point `x`.
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigRational> {
        (0..self.m)
            .map(|i| {
                (0..self.n).fold(BigRational::zero(), |acc, j| {
                    acc + self.entry(i, j) * BigRational::from_integer(x[j].clone())
                })
            })
            .collect()
    }

    /// Serializes to the JSON document format; integers are written as JSON
    /// numbers when they fit in 64 bits, everything else as exact strings.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.m)
            .map(|i| Value::Array((0..self.n).map(|j| rational_to_json(self.entry(i, j))).collect()))
            .collect();
        serde_json::json!({
            "name": self.name,
            "A": rows,
            "b": self.b.iter().map(rational_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("spec serializes")
    }
}

fn rational_to_json(x: &BigRational) -> Value {
    if x.is_integer() {
        if let Some(v) = x.to_integer().to_i64() {
            return Value::from(v);
        }
    }
    Value::String(format_rational(x))
}

pub fn format_rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `"3"`, `"-1/3"`, `"0.25"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Ok(if neg { -value } else { value })
}

fn parse_entry(v: &Value) -> Result<BigRational> {
    match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number or string, got {other}"))),
    }
}

fn parse_vec(v: &Value, what: &str) -> Result<Vec<BigRational>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))?
        .iter()
        .map(parse_entry)
        .collect()
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum GeneratorDoc {
    Simplex {
        n: usize,
        r: Value,
    },
    #[serde(alias = "transport")]
    Transportation {
        #[serde(rename = "R")]
        rows: Vec<Value>,
        #[serde(rename = "C")]
        cols: Vec<Value>,
    },
}

/// Parses a spec document: either explicit `{"name", "A", "b"}` or
/// `{"generator": {...}}`.
pub fn load_spec(source: &str) -> Result<PolytopeSpec> {
    let doc: Value = serde_json::from_str(source).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("top level must be an object".into()))?;
    let name = obj.get("name").and_then(Value::as_str);
    if let Some(gen) = obj.get("generator") {
        let gen: GeneratorDoc =
            serde_json::from_value(gen.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut spec = match gen {
            GeneratorDoc::Simplex { n, r } => gen_simplex(n, parse_entry(&r)?)?,
            GeneratorDoc::Transportation { rows, cols } => gen_transportation(
                &rows.iter().map(parse_entry).collect::<Result<Vec<_>>>()?,
                &cols.iter().map(parse_entry).collect::<Result<Vec<_>>>()?,
            )?,
        };
        if let Some(name) = name {
            spec.name = name.to_string();
        }
        return Ok(spec);
    }
    let a = obj
        .get("A")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing array field \"A\"".into()))?;
    let rows = a
        .iter()
        .enumerate()
        .map(|(i, row)| parse_vec(row, &format!("A[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let b = parse_vec(
        obj.get("b").ok_or_else(|| Error::Parse("missing field \"b\"".into()))?,
        "b",
    )?;
    PolytopeSpec::new(name.unwrap_or("unnamed"), rows, b)
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// The dilated simplex `{x ≥ 0, x_1 + ⋯ + x_n = r}`.
pub fn gen_simplex(n: usize, r: BigRational) -> Result<PolytopeSpec> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("simplex needs n >= 2, got {n}")));
    }
    if !r.is_positive() {
        return Err(Error::InvalidArgument("simplex needs r > 0".into()));
    }
    let name = format!("simplex_n{}_r{}", n, format_rational(&r));
    PolytopeSpec::new(name, vec![vec![BigRational::one(); n]], vec![r])
}

/// The transportation polytope of `r × s` nonnegative matrices with row sums
/// `R` and column sums `C`. Cells are numbered row-major; the constraint rows
/// are the `r` row sums followed by the first `s − 1` column sums.
pub fn gen_transportation(rows: &[BigRational], cols: &[BigRational]) -> Result<PolytopeSpec> {
    let (r, s) = (rows.len(), cols.len());
    if r < 2 || s < 2 {
        return Err(Error::InvalidArgument(format!(
            "transportation polytope needs at least 2 rows and 2 columns, got {r}x{s}"
        )));
    }
    if rows.iter().chain(cols).any(|x| x.is_negative()) {
        return Err(Error::InvalidArgument("margins must be nonnegative".into()));
    }
    let sr: BigRational = rows.iter().cloned().sum();
    let sc: BigRational = cols.iter().cloned().sum();
    if sr != sc {
        return Err(Error::Infeasible(format!(
            "row sums total {} but column sums total {}",
            format_rational(&sr),
            format_rational(&sc)
        )));
    }
    let n = r * s;
    let mut a = vec![vec![int(0); n]; r + s - 1];
    for i in 0..r {
        for j in 0..s {
            a[i][i * s + j] = int(1);
            if j + 1 < s {
                a[r + j][i * s + j] = int(1);
            }
        }
    }
    let b: Vec<BigRational> = rows.iter().chain(&cols[..s - 1]).cloned().collect();
    let fmt = |v: &[BigRational]| v.iter().map(format_rational).collect::<Vec<_>>().join(",");
    let name = format!("transportation_R{}_C{}", fmt(rows), fmt(cols));
    PolytopeSpec::new(name, a, b)
}

/// Numerical health check. Never fails; all findings go in the report.
pub fn validate(spec: &PolytopeSpec) -> ValidationReport {
    let column_norms: Vec<f64> = spec.columns().map(linalg::norm).collect();
    let zero_columns: Vec<usize> = (0..spec.n())
        .filter(|&j| (0..spec.m()).all(|i| spec.entry(i, j).is_zero()))
        .collect();
    let rank_estimate = spec.rank();
    let rank_ok = rank_estimate == spec.m();
    let mut messages = Vec::new();
    if !rank_ok {
        messages.push(format!("rank(A) = {rank_estimate} < m = {}", spec.m()));
    }
    if spec.n() <= spec.m() {
        messages.push(format!("n = {} <= m = {}", spec.n(), spec.m()));
    }
    for &j in &zero_columns {
        messages.push(format!("column {j} is zero; the polytope is unbounded along it"));
    }
    ValidationReport {
        rank_ok,
        rank_estimate,
        column_norms,
        zero_columns,
        messages,
    }
}
