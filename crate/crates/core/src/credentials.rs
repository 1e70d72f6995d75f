//! Identities, passwords, stored verifiers and session keys.

use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::ProtocolError;
use crate::group::{hash_to_exponent, mod_exp, GroupParams, Tally};
use crate::hash::HashSpec;
use crate::serde_dec;

/// What entity A knows: both identities and the password.
#[derive(Clone, PartialEq, Eq)]
pub struct Credentials {
    id_a: BigUint,
    id_b: BigUint,
    password: BigUint,
}

impl Credentials {
    pub fn new(id_a: BigUint, id_b: BigUint, password: BigUint) -> Result<Self, ProtocolError> {
        if id_a == id_b {
            return Err(ProtocolError::SameIdentity);
        }
        Ok(Credentials { id_a, id_b, password })
    }

    /// `id_A = 9, id_B = 12, P = 10`.
    pub fn example() -> Self {
        Credentials {
            id_a: 9u32.into(),
            id_b: 12u32.into(),
            password: 10u32.into(),
        }
    }

    pub fn id_a(&self) -> &BigUint {
        &self.id_a
    }

    pub fn id_b(&self) -> &BigUint {
        &self.id_b
    }

    pub fn password(&self) -> &BigUint {
        &self.password
    }

    pub fn with_password(&self, password: BigUint) -> Self {
        Credentials {
            password,
            ..self.clone()
        }
    }

    /// `hash_to_exponent(h(id_A, id_B, P))`, the exponent hidden in the verifier.
    pub fn password_exponent(
        &self,
        params: &GroupParams,
        hash: &HashSpec,
        tally: &mut Tally,
    ) -> Result<BigUint, ProtocolError> {
        let h = hash.eval(&[&self.id_a, &self.id_b, &self.password], tally)?;
        Ok(hash_to_exponent(&h, params)?)
    }
}

impl fmt::Debug for Credentials {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Credentials")
            .field("id_a", &self.id_a)
            .field("id_b", &self.id_b)
            .field("password", &"<redacted>")
            .finish()
    }
}

/// The server-side entry `v = g^{h(id_A, id_B, P)}` for an identity pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifierRecord {
    #[serde(with = "serde_dec")]
    pub id_a: BigUint,
    #[serde(with = "serde_dec")]
    pub id_b: BigUint,
    #[serde(with = "serde_dec")]
    pub verifier: BigUint,
}

/// `v = g^{hash_to_exponent(h(id_A, id_B, P))} mod q`. Never 1, since the
/// exponent is nonzero and below the order of `g`.
pub fn derive_verifier(
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
    tally: &mut Tally,
) -> Result<BigUint, ProtocolError> {
    let exponent = creds.password_exponent(params, hash, tally)?;
    Ok(mod_exp(params.g(), &exponent, params, tally)?)
}

/// Registration: the record entity A hands to the server.
pub fn register(
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
) -> Result<VerifierRecord, ProtocolError> {
    let verifier = derive_verifier(creds, params, hash, &mut Tally::default())?;
    Ok(VerifierRecord {
        id_a: creds.id_a.clone(),
        id_b: creds.id_b.clone(),
        verifier,
    })
}

/// Agreed session key: a residue mod `q` and its fixed-width encoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionKey {
    #[serde(with = "serde_dec")]
    value: BigUint,
    #[serde(with = "hex")]
    bytes: Vec<u8>,
}

impl SessionKey {
    pub fn new(value: BigUint, params: &GroupParams) -> Self {
        let value = value % params.q();
        let bytes = params.encode_residue(&value);
        SessionKey { value, bytes }
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }
}

pub(crate) fn check_nonce(nonce: &BigUint, params: &GroupParams) -> Result<(), ProtocolError> {
    if nonce < &BigUint::one() || nonce >= &params.order() {
        return Err(ProtocolError::NonceOutOfRange);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::generate_params;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn example_verifier() {
        let record = register(
            &Credentials::example(),
            &GroupParams::example(),
            &HashSpec::ToySum,
        )
        .unwrap();
        assert_eq!(record.verifier, big(7));
    }

    #[test]
    fn adjusted_exponent_verifier() {
        // sum 6 shares a factor with 12, so the exponent moves to 7 and 6^7 = 7 mod 13
        let creds = Credentials::new(big(1), big(2), big(3)).unwrap();
        let mut t = Tally::default();
        let v = derive_verifier(&creds, &GroupParams::example(), &HashSpec::ToySum, &mut t)
            .unwrap();
        assert_eq!(v, big(7));
        assert_eq!(t.modexp, 1);
        assert_eq!(t.hash_evals, 1);
    }

    #[test]
    fn zero_sum_still_gives_nontrivial_verifier() {
        // 0 + 1 + 11 = 12 = 0 mod 12
        let creds = Credentials::new(big(0), big(1), big(11)).unwrap();
        let v = derive_verifier(
            &creds,
            &GroupParams::example(),
            &HashSpec::ToySum,
            &mut Tally::default(),
        )
        .unwrap();
        assert_eq!(v, big(6));
    }

    #[test]
    fn identities_must_differ() {
        assert_eq!(
            Credentials::new(big(3), big(3), big(1)).unwrap_err(),
            ProtocolError::SameIdentity
        );
    }

    #[test]
    fn debug_hides_password() {
        let text = format!("{:?}", Credentials::example());
        assert!(text.contains("redacted"));
        assert!(!text.contains("password: 10"));
    }

    #[test]
    fn session_key_width() {
        let p = generate_params(20, 1).unwrap();
        let k = SessionKey::new(big(5), &p);
        assert_eq!(k.bytes(), &[0, 0, 5]);
        assert_eq!(k.to_hex(), "000005");
    }

    proptest! {
        #[test]
        fn verifier_never_one(a in 0u64..1000, b in 0u64..1000, pw in any::<u64>(), seed in 0u64..4) {
            prop_assume!(a != b);
            let p = generate_params(10, seed).unwrap();
            let creds = Credentials::new(big(a), big(b), big(pw)).unwrap();
            for hash in [HashSpec::ToySum, HashSpec::sha256()] {
                let v = derive_verifier(&creds, &p, &hash, &mut Tally::default()).unwrap();
                prop_assert!(v != big(1));
            }
        }
    }
}
