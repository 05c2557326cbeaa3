use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Outcome of a numerical check.
///
/// `pass` implies `margin >= 0`. The witness is the point (or box corner)
/// where the margin is attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub claim: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Vec<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
}

impl Certificate {
    pub fn new(claim: impl Into<String>, pass: bool, margin: f64) -> Self {
        Certificate { claim: claim.into(), pass: pass && margin >= 0.0, margin, witness: Vec::new(), values: BTreeMap::new() }
    }

    /// Pass iff `margin >= 0`.
    pub fn from_margin(claim: impl Into<String>, margin: f64) -> Self {
        Self::new(claim, margin >= 0.0, margin)
    }

    pub fn with_witness(mut self, w: Vec<f64>) -> Self {
        self.witness = w;
        self
    }

    pub fn with_values<'a>(mut self, vals: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        for (k, v) in vals {
            self.values.insert(k.to_string(), v);
        }
        self
    }

    pub fn value(&self, key: &str) -> Option<f64> {
        self.values.get(key).copied()
    }
}

pub fn all_pass(certs: &[Certificate]) -> bool {
    certs.iter().all(|c| c.pass)
}
