//! Bound reports shared by every bounding method.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::lognum::LogNumber;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Thm1,
    Cor1,
    Thm2,
    Thm3Rigorous,
    Thm3Asymptotic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Thm1 => "thm1",
            Method::Cor1 => "cor1",
            Method::Thm2 => "thm2",
            Method::Thm3Rigorous => "thm3_rigorous",
            Method::Thm3Asymptotic => "thm3_asymptotic",
        }
    }
}

/// Method-specific parameters; column indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundParams {
    Thm1 {
        basis: Vec<usize>,
        ln_factor: f64,
    },
    Cor1 {
        blocks: Vec<Vec<usize>>,
        p: usize,
        z_bar: f64,
    },
    Thm2 {
        gamma: f64,
        ln_c: f64,
        c_sci: String,
        c_prime: f64,
        p: usize,
        m: usize,
        c: Vec<f64>,
        alpha_vee: Vec<f64>,
        q_vee: Vec<f64>,
        dropped: Vec<usize>,
    },
    Thm3 {
        m: usize,
        p: usize,
        ns: Vec<u64>,
        ln_factor: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub method: Method,
    pub bound: LogNumber,
    pub params: BoundParams,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn ln_bound(&self) -> f64 {
        self.bound.ln()
    }
}

impl Serialize for BoundReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("BoundReport", 5)?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("ln_bound", &self.bound.ln())?;
        s.serialize_field("bound_sci", &self.bound.to_sci())?;
        s.serialize_field("params", &self.params)?;
        s.serialize_field("notes", &self.notes)?;
        s.end()
    }
}
