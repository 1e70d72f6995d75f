//! The LKY verifier-based scheme.
//!
//! ```text
//!  A (creds)                                   B (record v)
//!  T_A = g^x XOR v      --- id_A, T_A --->
//!                                              T_B = v^y XOR v
//!                                              r_B = (T_A XOR v)^y
//!                       <--- T_B, d_B ---      d_B = h(id_B, T_A, r_B)
//!  r_A = (T_B XOR v)^(x/h)
//!  check d_B, d_A = h(id_A, T_B, r_A)
//!                       ---    d_A    --->     check d_A
//!  key = h(r_A) mod q                          key = h(r_B) mod q
//! ```
//!
//! `T_A` and `T_B` enter the confirmation hashes in their masked, on-the-wire
//! form.

use num_bigint::BigUint;
use num_traits::Zero;
use thiserror::Error;

use crate::credentials::{check_nonce, Credentials, SessionKey, VerifierRecord};
use crate::error::ProtocolError;
use crate::group::{mod_exp, mod_inverse, GroupParams, Tally};
use crate::hash::HashSpec;

/// A group element XOR-ed with the verifier, exactly `q_byte_len` bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskedValue(Vec<u8>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("masked value wider than {0} bytes")]
pub struct MaskWidthError(pub usize);

impl MaskedValue {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_be(&self.0)
    }

    /// Rebuilds the fixed-width form of a masked integer taken off the wire.
    pub fn from_biguint(value: &BigUint, params: &GroupParams) -> Result<Self, MaskWidthError> {
        let raw = value.to_bytes_be();
        let width = params.q_byte_len();
        if value.is_zero() {
            return Ok(MaskedValue(vec![0; width]));
        }
        if raw.len() > width {
            return Err(MaskWidthError(width));
        }
        let mut out = vec![0u8; width - raw.len()];
        out.extend_from_slice(&raw);
        Ok(MaskedValue(out))
    }
}

pub fn xor_mask(
    value: &BigUint,
    verifier: &BigUint,
    params: &GroupParams,
) -> Result<MaskedValue, ProtocolError> {
    if !params.contains(value) || !params.contains(verifier) {
        return Err(ProtocolError::NotInGroup);
    }
    let a = params.encode_residue(value);
    let b = params.encode_residue(verifier);
    Ok(MaskedValue(a.iter().zip(&b).map(|(x, y)| x ^ y).collect()))
}

pub fn xor_unmask(
    masked: &MaskedValue,
    verifier: &BigUint,
    params: &GroupParams,
) -> Result<BigUint, ProtocolError> {
    // an all-zero mask means the element equalled v, which honest parties never send
    if masked.0.len() != params.q_byte_len() || masked.0.iter().all(|&b| b == 0) {
        return Err(ProtocolError::UnmaskOutOfRange);
    }
    let b = params.encode_residue(verifier);
    let bytes: Vec<u8> = masked.0.iter().zip(&b).map(|(x, y)| x ^ y).collect();
    let value = BigUint::from_bytes_be(&bytes);
    if !params.contains(&value) {
        return Err(ProtocolError::UnmaskOutOfRange);
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LkyMsg1 {
    pub id_a: BigUint,
    pub t_a: MaskedValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LkyMsg2 {
    pub t_b: MaskedValue,
    pub d_b: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LkyMsg3 {
    pub d_a: BigUint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientPhase {
    Started,
    Finished,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServerPhase {
    Responded,
    Finished,
    Failed,
}

/// Entity A.
#[derive(Debug, Clone)]
pub struct LkyClient {
    creds: Credentials,
    params: GroupParams,
    hash: HashSpec,
    verifier: BigUint,
    password_exp: BigUint,
    x: BigUint,
    t_a: MaskedValue,
    shared: Option<BigUint>,
    phase: ClientPhase,
    tally: Tally,
    registration: Tally,
}

impl LkyClient {
    pub fn start(
        creds: &Credentials,
        params: &GroupParams,
        hash: &HashSpec,
        x: &BigUint,
    ) -> Result<(LkyMsg1, LkyClient), ProtocolError> {
        check_nonce(x, params)?;
        let mut registration = Tally::default();
        let password_exp = creds.password_exponent(params, hash, &mut registration)?;
        let verifier = mod_exp(params.g(), &password_exp, params, &mut registration)?;

        let mut tally = Tally::default();
        let g_x = mod_exp(params.g(), x, params, &mut tally)?;
        if g_x == verifier {
            return Err(ProtocolError::RetryNonce);
        }
        let t_a = xor_mask(&g_x, &verifier, params)?;
        let msg = LkyMsg1 {
            id_a: creds.id_a().clone(),
            t_a: t_a.clone(),
        };
        let state = LkyClient {
            creds: creds.clone(),
            params: params.clone(),
            hash: hash.clone(),
            verifier,
            password_exp,
            x: x.clone(),
            t_a,
            shared: None,
            phase: ClientPhase::Started,
            tally,
            registration,
        };
        Ok((msg, state))
    }

    /// Checks `d_B`, answers with `d_A` and returns the session key.
    pub fn finish(&mut self, msg: &LkyMsg2) -> Result<(LkyMsg3, SessionKey), ProtocolError> {
        if self.phase != ClientPhase::Started {
            return Err(ProtocolError::WrongPhase("client finish"));
        }
        let result = self.finish_inner(msg);
        self.phase = match result {
            Ok(_) => ClientPhase::Finished,
            Err(_) => ClientPhase::Failed,
        };
        result
    }

    fn finish_inner(&mut self, msg: &LkyMsg2) -> Result<(LkyMsg3, SessionKey), ProtocolError> {
        let p = &self.params;
        let v_y = xor_unmask(&msg.t_b, &self.verifier, p)?;
        let order = p.order();
        let inv = mod_inverse(&self.password_exp, &order)?;
        let exponent = (&self.x * inv) % &order;
        let r_a = mod_exp(&v_y, &exponent, p, &mut self.tally)?;

        let t_a = self.t_a.to_biguint();
        let t_b = msg.t_b.to_biguint();
        let expected_d_b = self
            .hash
            .eval(&[self.creds.id_b(), &t_a, &r_a], &mut self.tally)?;
        if expected_d_b != msg.d_b {
            return Err(ProtocolError::AuthFail);
        }
        let d_a = self
            .hash
            .eval(&[self.creds.id_a(), &t_b, &r_a], &mut self.tally)?;
        let key = self.hash.eval(&[&r_a], &mut self.tally)?;
        self.shared = Some(r_a);
        Ok((LkyMsg3 { d_a }, SessionKey::new(key, p)))
    }

    pub fn phase(&self) -> ClientPhase {
        self.phase
    }

    pub fn verifier(&self) -> &BigUint {
        &self.verifier
    }

    pub fn masked_t_a(&self) -> &MaskedValue {
        &self.t_a
    }

    /// `r_A`, once computed.
    pub fn shared_secret(&self) -> Option<&BigUint> {
        self.shared.as_ref()
    }

    /// Per-session work, registration excluded.
    pub fn tally(&self) -> Tally {
        self.tally
    }

    pub fn registration_tally(&self) -> Tally {
        self.registration
    }
}

/// Entity B.
#[derive(Debug, Clone)]
pub struct LkyServer {
    record: VerifierRecord,
    params: GroupParams,
    hash: HashSpec,
    t_b: MaskedValue,
    r_b: BigUint,
    d_a_expected: BigUint,
    d_b: BigUint,
    phase: ServerPhase,
    tally: Tally,
}

impl LkyServer {
    pub fn respond(
        msg: &LkyMsg1,
        record: &VerifierRecord,
        params: &GroupParams,
        hash: &HashSpec,
        y: &BigUint,
    ) -> Result<(LkyMsg2, LkyServer), ProtocolError> {
        if msg.id_a != record.id_a {
            return Err(ProtocolError::UnknownIdentity);
        }
        check_nonce(y, params)?;
        let v = &record.verifier;
        let mut tally = Tally::default();
        let v_y = mod_exp(v, y, params, &mut tally)?;
        if &v_y == v {
            return Err(ProtocolError::RetryNonce);
        }
        let t_b = xor_mask(&v_y, v, params)?;
        let g_x = xor_unmask(&msg.t_a, v, params)?;
        let r_b = mod_exp(&g_x, y, params, &mut tally)?;

        let t_a_int = msg.t_a.to_biguint();
        let t_b_int = t_b.to_biguint();
        let d_a_expected = hash.eval(&[&record.id_a, &t_b_int, &r_b], &mut tally)?;
        let d_b = hash.eval(&[&record.id_b, &t_a_int, &r_b], &mut tally)?;

        let reply = LkyMsg2 {
            t_b: t_b.clone(),
            d_b: d_b.clone(),
        };
        let state = LkyServer {
            record: record.clone(),
            params: params.clone(),
            hash: hash.clone(),
            t_b,
            r_b,
            d_a_expected,
            d_b,
            phase: ServerPhase::Responded,
            tally,
        };
        Ok((reply, state))
    }

    pub fn finish(&mut self, msg: &LkyMsg3) -> Result<SessionKey, ProtocolError> {
        if self.phase != ServerPhase::Responded {
            return Err(ProtocolError::WrongPhase("server finish"));
        }
        if msg.d_a != self.d_a_expected {
            self.phase = ServerPhase::Failed;
            return Err(ProtocolError::AuthFail);
        }
        let key = self.hash.eval(&[&self.r_b], &mut self.tally);
        match key {
            Ok(k) => {
                self.phase = ServerPhase::Finished;
                Ok(SessionKey::new(k, &self.params))
            }
            Err(e) => {
                self.phase = ServerPhase::Failed;
                Err(e.into())
            }
        }
    }

    pub fn phase(&self) -> ServerPhase {
        self.phase
    }

    pub fn record(&self) -> &VerifierRecord {
        &self.record
    }

    pub fn shared_secret(&self) -> &BigUint {
        &self.r_b
    }

    pub fn expected_d_a(&self) -> &BigUint {
        &self.d_a_expected
    }

    pub fn d_b(&self) -> &BigUint {
        &self.d_b
    }

    pub fn masked_t_b(&self) -> &MaskedValue {
        &self.t_b
    }

    pub fn tally(&self) -> Tally {
        self.tally
    }
}
