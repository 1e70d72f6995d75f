//! The hash `h` in its two modes.
//!
//! `ToySum` adds its integer arguments and is the only instantiation that
//! reproduces the small worked example; `Digest256` feeds a length-prefixed
//! encoding through a 256-bit digest for realistic runs.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256, Sha512_256};
use thiserror::Error;

use crate::group::Tally;

pub const SUPPORTED_DIGESTS: &[&str] = &["sha256", "sha512/256"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HashError {
    #[error("unknown digest algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("hash input field of {0} bytes exceeds the 2-byte length prefix")]
    FieldTooLong(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum HashSpec {
    ToySum,
    Digest256 { algorithm: String },
}

impl HashSpec {
    pub fn digest256(algorithm: &str) -> Result<Self, HashError> {
        if SUPPORTED_DIGESTS.contains(&algorithm) {
            Ok(HashSpec::Digest256 {
                algorithm: algorithm.to_owned(),
            })
        } else {
            Err(HashError::UnknownAlgorithm(algorithm.to_owned()))
        }
    }

    pub fn sha256() -> Self {
        HashSpec::Digest256 {
            algorithm: "sha256".into(),
        }
    }

    /// Evaluates `h(inputs...)` and counts it.
    pub fn eval(&self, inputs: &[&BigUint], tally: &mut Tally) -> Result<BigUint, HashError> {
        tally.hash_evals += 1;
        match self {
            HashSpec::ToySum => Ok(toy_sum_hash(inputs.iter().copied())),
            HashSpec::Digest256 { algorithm } => {
                let encoded: Vec<Vec<u8>> = inputs.iter().map(|v| v.to_bytes_be()).collect();
                let fields: Vec<&[u8]> = encoded.iter().map(Vec::as_slice).collect();
                digest_hash(algorithm, &fields)
            }
        }
    }

    /// `h(inputs...) mod q`.
    pub fn eval_mod(
        &self,
        inputs: &[&BigUint],
        modulus: &BigUint,
        tally: &mut Tally,
    ) -> Result<BigUint, HashError> {
        Ok(self.eval(inputs, tally)? % modulus)
    }
}

impl fmt::Display for HashSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HashSpec::ToySum => f.write_str("toy-sum"),
            HashSpec::Digest256 { algorithm } => f.write_str(algorithm),
        }
    }
}

impl FromStr for HashSpec {
    type Err = HashError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "toy-sum" | "toy" => Ok(HashSpec::ToySum),
            other => HashSpec::digest256(other),
        }
    }
}

impl TryFrom<String> for HashSpec {
    type Error = HashError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<HashSpec> for String {
    fn from(h: HashSpec) -> String {
        h.to_string()
    }
}

/// Exact, unreduced sum of the inputs.
pub fn toy_sum_hash<'a>(inputs: impl IntoIterator<Item = &'a BigUint>) -> BigUint {
    inputs.into_iter().sum()
}

/// Digest of `len_be16(field) || field` for each field, read as a big-endian integer.
pub fn digest_hash(algorithm: &str, inputs: &[&[u8]]) -> Result<BigUint, HashError> {
    let mut encoded = Vec::new();
    for field in inputs {
        let len = u16::try_from(field.len()).map_err(|_| HashError::FieldTooLong(field.len()))?;
        encoded.extend_from_slice(&len.to_be_bytes());
        encoded.extend_from_slice(field);
    }
    let digest = match algorithm {
        "sha256" => Sha256::digest(&encoded).to_vec(),
        "sha512/256" => Sha512_256::digest(&encoded).to_vec(),
        other => return Err(HashError::UnknownAlgorithm(other.to_owned())),
    };
    Ok(BigUint::from_bytes_be(&digest))
}
