//! Small instances shared by the integration suites: every simplex with
//! n ≤ 8, r ≤ 6 and a fixed list of transportation polytopes up to 3×3
//! with margins ≤ 6.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_rational::BigRational;
use polycount::oracles::count_exact;
use polycount::{gen_simplex, gen_transportation, PolytopeSpec};

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(v.into())
}

pub fn simplices() -> Vec<PolytopeSpec> {
    let mut out = Vec::new();
    for n in 2..=8 {
        for r in 1..=6 {
            out.push(gen_simplex(n, int(r)).unwrap());
        }
    }
    out
}

pub const TRANSPORT_MARGINS: &[(&[i64], &[i64])] = &[
    (&[1, 1], &[1, 1]),
    (&[1, 2], &[2, 1]),
    (&[2, 3], &[4, 1]),
    (&[5, 1], &[3, 3]),
    (&[6, 6], &[6, 6]),
    (&[1, 2], &[1, 1, 1]),
    (&[3, 4], &[2, 2, 3]),
    (&[6, 5], &[4, 4, 3]),
    (&[2, 2, 2], &[3, 3]),
    (&[1, 5, 4], &[6, 4]),
    (&[1, 1, 1], &[1, 1, 1]),
    (&[2, 3, 4], &[3, 3, 3]),
    (&[5, 2, 3], &[4, 4, 2]),
    (&[1, 2, 6], &[3, 3, 3]),
    (&[6, 6, 6], &[6, 6, 6]),
];

pub fn transports() -> Vec<PolytopeSpec> {
    TRANSPORT_MARGINS
        .iter()
        .map(|(r, c)| {
            let r: Vec<_> = r.iter().map(|&v| int(v)).collect();
            let c: Vec<_> = c.iter().map(|&v| int(v)).collect();
            gen_transportation(&r, &c).unwrap()
        })
        .collect()
}

pub fn suite() -> Vec<PolytopeSpec> {
    let mut all = simplices();
    all.extend(transports());
    all
}

pub fn exact(spec: &PolytopeSpec) -> BigUint {
    count_exact(spec).unwrap().count
}

pub fn ln_big(x: &BigUint) -> f64 {
    polycount::oracles::ln_biguint(x)
}

/// Rank of an integer matrix (rows) by exact fraction-free elimination.
pub fn exact_rank(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let (m, n) = (a.len(), a.first().map_or(0, Vec::len));
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..m).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        for i in 0..m {
            if i != rank && a[i][col] != 0 {
                let (f, g) = (a[i][col], a[rank][col]);
                for k in 0..n {
                    a[i][k] = a[i][k] * g - a[rank][k] * f;
                }
            }
        }
        rank += 1;
    }
    rank
}
