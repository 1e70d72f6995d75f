//! Scripted adversaries.
//!
//! None of these functions see the victim's password: impersonation attacks
//! get a (stolen) verifier and the server's public record; MITM experiments
//! only rewrite messages in flight.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::credentials::{check_nonce, derive_verifier, register, Credentials, SessionKey, VerifierRecord};
use crate::error::ProtocolError;
use crate::group::{mod_exp, GroupParams, Tally};
use crate::hash::{HashError, HashSpec};
use crate::lky::{xor_mask, xor_unmask, LkyMsg1, LkyMsg3, LkyServer};
use crate::oracle::{DlogTable, OracleError};
use crate::proposed::{PropMsg1, PropMsg3, PropServer, ServerAuth};
use crate::serde_dec;
use crate::session::{
    error_code, run_lky, run_proposed, Counters, Direction, Scheme, SessionInputs, Tamper,
    TamperField, Transcript,
};
use crate::wire::Frame;

/// Annotation printed beside the measured verdict of the stolen-verifier
/// experiment on the proposed scheme.
pub const PROPOSED_STOLEN_VERIFIER_CLAIM: &str =
    "claimed: resists stolen-verifier impersonation (security theorem)";
pub const LKY_STOLEN_VERIFIER_CLAIM: &str = "claimed: vulnerable to stolen-verifier impersonation";
pub const MITM_CLAIM: &str = "claimed: resists man-in-the-middle without password or verifier";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("field {0} does not exist in the {1} scheme")]
    FieldNotInScheme(TamperField, Scheme),
}

impl From<HashError> for AttackError {
    fn from(e: HashError) -> Self {
        AttackError::Protocol(e.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "stolen-verifier-lky")]
    StolenVerifierLky,
    #[serde(rename = "stolen-verifier-proposed")]
    StolenVerifierProposed,
    #[serde(rename = "mitm")]
    Mitm,
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttackKind::StolenVerifierLky => "stolen-verifier-lky",
            AttackKind::StolenVerifierProposed => "stolen-verifier-proposed",
            AttackKind::Mitm => "mitm",
        })
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stolen-verifier-lky" => Ok(AttackKind::StolenVerifierLky),
            "stolen-verifier-proposed" => Ok(AttackKind::StolenVerifierProposed),
            "mitm" => Ok(AttackKind::Mitm),
            other => Err(format!("unknown attack {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackReport {
    pub scheme: Scheme,
    pub attack: AttackKind,
    /// Impersonation: B accepted the attacker as A. MITM: a value was changed
    /// in flight and both parties still accepted.
    pub succeeded: bool,
    pub server_accepted: bool,
    pub attacker_key: Option<SessionKey>,
    pub victim_key: Option<SessionKey>,
    pub transcript: Transcript,
    pub counters: Counters,
    pub claim: String,
    pub notes: String,
}

impl AttackReport {
    fn new(scheme: Scheme, attack: AttackKind, claim: &str) -> Self {
        AttackReport {
            scheme,
            attack,
            succeeded: false,
            server_accepted: false,
            attacker_key: None,
            victim_key: None,
            transcript: Transcript::default(),
            counters: Counters::default(),
            claim: claim.to_owned(),
            notes: String::new(),
        }
    }

    fn close(mut self, attacker: Tally, server: Tally) -> Self {
        self.counters = Counters::from_parts(attacker, server, &self.transcript);
        self
    }

    fn server_rejects(&mut self, err: &ProtocolError) {
        self.transcript
            .push(Direction::BToA, Frame::error(error_code(err), err.to_string()));
        self.notes = format!("server rejected: {err}");
    }

    pub fn verdict(&self) -> &'static str {
        if self.succeeded {
            "attack succeeded"
        } else {
            "attack failed"
        }
    }
}

fn nonce_error(err: ProtocolError) -> Result<(), AttackError> {
    match err {
        ProtocolError::RetryNonce | ProtocolError::NonceOutOfRange => Err(err.into()),
        _ => Ok(()),
    }
}

/// Impersonates A to an LKY server using only the stolen verifier: the
/// attacker masks `v^x'` instead of `g^x`, so both sides end up with
/// `v^(x' y)`.
pub fn stolen_verifier_attack_lky(
    stolen_v: &BigUint,
    server_record: &VerifierRecord,
    params: &GroupParams,
    hash: &HashSpec,
    x_attacker: &BigUint,
    y_server: &BigUint,
) -> Result<AttackReport, AttackError> {
    let mut report = AttackReport::new(
        Scheme::Lky,
        AttackKind::StolenVerifierLky,
        LKY_STOLEN_VERIFIER_CLAIM,
    );
    check_nonce(x_attacker, params)?;
    let mut tally = Tally::default();
    let base = mod_exp(stolen_v, x_attacker, params, &mut tally).map_err(ProtocolError::from)?;
    if &base == stolen_v {
        return Err(ProtocolError::RetryNonce.into());
    }
    let t_a = xor_mask(&base, stolen_v, params)?;
    let m1 = LkyMsg1 {
        id_a: server_record.id_a.clone(),
        t_a,
    };
    report.transcript.push(
        Direction::AToB,
        Frame::Msg1 {
            q: params.q().clone(),
            g: params.g().clone(),
            id_a: m1.id_a.clone(),
            t_a: m1.t_a.to_biguint(),
        },
    );

    let (m2, mut server) = match LkyServer::respond(&m1, server_record, params, hash, y_server) {
        Ok(v) => v,
        Err(e) => {
            nonce_error(e.clone())?;
            report.server_rejects(&e);
            return Ok(report.close(tally, Tally::default()));
        }
    };
    let t_b_int = m2.t_b.to_biguint();
    report.transcript.push(
        Direction::BToA,
        Frame::LkyMsg2 {
            t_b: t_b_int.clone(),
            d_b: m2.d_b.clone(),
        },
    );

    let shared = match xor_unmask(&m2.t_b, stolen_v, params)
        .and_then(|v_y| Ok(mod_exp(&v_y, x_attacker, params, &mut tally)?))
    {
        Ok(s) => s,
        Err(e) => {
            report.notes = format!("attacker could not unmask T_B: {e}");
            return Ok(report.close(tally, server.tally()));
        }
    };
    let d_a = hash.eval(&[&server_record.id_a, &t_b_int, &shared], &mut tally)?;
    report
        .transcript
        .push(Direction::AToB, Frame::Msg3 { d_a: d_a.clone() });

    match server.finish(&LkyMsg3 { d_a }) {
        Ok(victim_key) => {
            let attacker_key = SessionKey::new(hash.eval(&[&shared], &mut tally)?, params);
            report.succeeded = true;
            report.server_accepted = true;
            report.notes = format!(
                "server accepted the impersonated A; shared secret {} on both sides",
                shared
            );
            report.attacker_key = Some(attacker_key);
            report.victim_key = Some(victim_key);
        }
        Err(e) => report.server_rejects(&e),
    }
    Ok(report.close(tally, server.tally()))
}

/// Impersonates A to a server running the proposed scheme with the stolen
/// verifier: `T_A = v^x'`, `d_A = h(T_B^x') mod q`.
pub fn stolen_verifier_attack_proposed(
    stolen_v: &BigUint,
    server_record: &VerifierRecord,
    params: &GroupParams,
    hash: &HashSpec,
    x_attacker: &BigUint,
    y_server: &BigUint,
) -> Result<AttackReport, AttackError> {
    let mut report = AttackReport::new(
        Scheme::Proposed,
        AttackKind::StolenVerifierProposed,
        PROPOSED_STOLEN_VERIFIER_CLAIM,
    );
    check_nonce(x_attacker, params)?;
    let mut tally = Tally::default();
    let t_a = mod_exp(stolen_v, x_attacker, params, &mut tally).map_err(ProtocolError::from)?;
    let m1 = PropMsg1 {
        id_a: server_record.id_a.clone(),
        t_a,
    };
    report.transcript.push(
        Direction::AToB,
        Frame::Msg1 {
            q: params.q().clone(),
            g: params.g().clone(),
            id_a: m1.id_a.clone(),
            t_a: m1.t_a.clone(),
        },
    );

    let (m2, mut server) = match PropServer::respond(&m1, server_record, params, hash, y_server) {
        Ok(v) => v,
        Err(e) => {
            nonce_error(e.clone())?;
            report.server_rejects(&e);
            return Ok(report.close(tally, Tally::default()));
        }
    };
    report
        .transcript
        .push(Direction::BToA, Frame::Msg2 { t_b: m2.t_b.clone() });

    let shared = mod_exp(&m2.t_b, x_attacker, params, &mut tally).map_err(ProtocolError::from)?;
    let d_a = hash.eval_mod(&[&shared], params.q(), &mut tally)?;
    report
        .transcript
        .push(Direction::AToB, Frame::Msg3 { d_a: d_a.clone() });

    match server.finish(&PropMsg3 { d_a }) {
        Ok((m4, victim_key)) => {
            report
                .transcript
                .push(Direction::BToA, Frame::Msg4 { e_b: m4.e_b });
            let attacker_key = hash.eval(
                &[&server_record.id_a, &server_record.id_b, &shared],
                &mut tally,
            )?;
            report.succeeded = true;
            report.server_accepted = true;
            report.attacker_key = Some(SessionKey::new(attacker_key, params));
            report.victim_key = Some(victim_key);
            report.notes = format!(
                "server accepted: T_A^y = T_B^x' = {shared}, so F_A equals the forged d_A"
            );
        }
        Err(e) => report.server_rejects(&e),
    }
    Ok(report.close(tally, server.tally()))
}

/// Runs an honest session with one field rewritten in flight. The attacker
/// knows neither password nor verifier.
#[allow(clippy::too_many_arguments)]
pub fn mitm_tamper_experiment(
    scheme: Scheme,
    tamper: &Tamper,
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
    x: &BigUint,
    y: &BigUint,
    auth: ServerAuth<'_>,
) -> Result<AttackReport, AttackError> {
    if !tamper.field.in_scheme(scheme) {
        return Err(AttackError::FieldNotInScheme(tamper.field, scheme));
    }
    let record = register(creds, params, hash)?;
    let inputs = SessionInputs {
        creds,
        record: &record,
        params,
        hash,
        x,
        y,
    };
    let outcome = match scheme {
        Scheme::Proposed => run_proposed(inputs, auth, Some(tamper))?,
        Scheme::Lky => run_lky(inputs, Some(tamper))?,
    };
    let mut report = AttackReport::new(scheme, AttackKind::Mitm, MITM_CLAIM);
    report.succeeded = outcome.tampered && outcome.auth_a_ok && outcome.auth_b_ok;
    report.server_accepted = outcome.auth_b_ok;
    report.victim_key = outcome.key_b.clone();
    report.counters = outcome.counters;
    report.notes = match (outcome.tampered, outcome.auth_a_ok, outcome.auth_b_ok) {
        (false, true, true) => format!("identity tamper on {}: session completed normally", tamper.field),
        (true, true, true) => format!(
            "tamper {} -> {} went undetected; keys {}",
            tamper.field,
            tamper.value,
            if outcome.keys_match() { "match" } else { "differ" }
        ),
        (_, a, b) => format!(
            "tamper {} -> {} detected (A accepted: {a}, B accepted: {b}){}",
            tamper.field,
            tamper.value,
            outcome
                .error
                .as_deref()
                .map(|e| format!("; {e}"))
                .unwrap_or_default()
        ),
    };
    report.transcript = outcome.transcript;
    Ok(report)
}

/// Public values of one completed proposed-scheme session, as seen on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservedSession {
    #[serde(with = "serde_dec")]
    pub id_a: BigUint,
    #[serde(with = "serde_dec")]
    pub t_a: BigUint,
    #[serde(with = "serde_dec")]
    pub t_b: BigUint,
    #[serde(with = "serde_dec")]
    pub d_a: BigUint,
    #[serde(with = "serde_dec")]
    pub e_b: BigUint,
}

impl ObservedSession {
    /// Picks MSG1..MSG4 out of a transcript; `None` if the session did not complete.
    pub fn from_transcript(transcript: &Transcript) -> Option<Self> {
        let (mut id_a, mut t_a, mut t_b, mut d_a, mut e_b) = (None, None, None, None, None);
        for frame in transcript.frames() {
            match frame {
                Frame::Msg1 { id_a: i, t_a: t, .. } => {
                    id_a = Some(i.clone());
                    t_a = Some(t.clone());
                }
                Frame::Msg2 { t_b: t } => t_b = Some(t.clone()),
                Frame::Msg3 { d_a: d } => d_a = Some(d.clone()),
                Frame::Msg4 { e_b: e } => e_b = Some(e.clone()),
                _ => {}
            }
        }
        Some(ObservedSession {
            id_a: id_a?,
            t_a: t_a?,
            t_b: t_b?,
            d_a: d_a?,
            e_b: e_b?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryCensus {
    #[serde(with = "serde_dec::vec")]
    pub dictionary: Vec<BigUint>,
    #[serde(with = "serde_dec::vec")]
    pub consistent: Vec<BigUint>,
    /// Size of the `(x', y')` space, `(q - 2)^2`.
    #[serde(with = "serde_dec")]
    pub enumeration_bound: BigUint,
}

/// Offline guessing with unlimited computation: a candidate password is
/// consistent if some `(x', y')` in `[1, q-2]^2` reproduces every observed
/// value under the candidate's verifier.
pub fn dictionary_census(
    observed: &ObservedSession,
    id_b: &BigUint,
    dictionary: &[BigUint],
    params: &GroupParams,
    hash: &HashSpec,
) -> Result<DictionaryCensus, AttackError> {
    let table = DlogTable::new(params).map_err(ProtocolError::from)?;
    let q = params.q();
    let order = params.order();
    let span = &order - 1u32;

    // g generates Z_q^*, so x' is pinned by T_A
    let x_prime = match table.dlog(&observed.t_a) {
        Ok(k) if k != 0 => Some(k),
        Ok(_) | Err(OracleError::NotInGroup(_)) => None,
        Err(e) => return Err(ProtocolError::from(e).into()),
    };

    let mut consistent = Vec::new();
    for candidate in dictionary {
        let Some(_) = x_prime else { break };
        let Ok(creds) = Credentials::new(observed.id_a.clone(), id_b.clone(), candidate.clone())
        else {
            continue;
        };
        let v_guess = derive_verifier(&creds, params, hash, &mut Tally::default())?;
        let mut v_pow = BigUint::from(1u32);
        let mut y = BigUint::zero();
        let mut found = false;
        while y < span {
            y += 1u32;
            v_pow = (v_pow * &v_guess) % q;
            if v_pow != observed.t_b {
                continue;
            }
            let shared = observed.t_a.modpow(&y, q);
            let d_a = hash.eval_mod(&[&shared], q, &mut Tally::default())?;
            let e_b = v_guess.modpow(&((&y * &y) % &order), q);
            if d_a == observed.d_a && e_b == observed.e_b {
                found = true;
                break;
            }
        }
        if found {
            consistent.push(candidate.clone());
        }
    }
    Ok(DictionaryCensus {
        dictionary: dictionary.to_vec(),
        consistent,
        enumeration_bound: &span * &span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::generate_params;
    use crate::session::Tamper;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn example() -> (GroupParams, HashSpec, VerifierRecord) {
        let params = GroupParams::example();
        let hash = HashSpec::ToySum;
        let record = register(&Credentials::example(), &params, &hash).unwrap();
        (params, hash, record)
    }

    #[test]
    fn lky_stolen_verifier_example() {
        let (params, hash, record) = example();
        let r = stolen_verifier_attack_lky(&big(7), &record, &params, &hash, &big(5), &big(4))
            .unwrap();
        assert!(r.succeeded);
        let frames: Vec<_> = r.transcript.frames().cloned().collect();
        assert!(matches!(&frames[0], Frame::Msg1 { t_a, .. } if *t_a == big(12)));
        assert!(matches!(&frames[1], Frame::LkyMsg2 { t_b, .. } if *t_b == big(14)));
        assert_eq!(frames[2], Frame::Msg3 { d_a: big(26) });
        assert_eq!(r.attacker_key.as_ref().unwrap().value(), &big(3));
        assert_eq!(r.attacker_key, r.victim_key);
    }

    #[test]
    fn lky_wrong_verifier_fails() {
        let (params, hash, record) = example();
        let r = stolen_verifier_attack_lky(&big(11), &record, &params, &hash, &big(5), &big(4))
            .unwrap();
        assert!(!r.succeeded);
        assert!(r.attacker_key.is_none());
    }

    #[test]
    fn lky_mask_zero_needs_new_nonce() {
        let (params, hash, record) = example();
        assert_eq!(
            stolen_verifier_attack_lky(&big(7), &record, &params, &hash, &big(1), &big(4))
                .unwrap_err(),
            AttackError::Protocol(ProtocolError::RetryNonce)
        );
    }

    #[test]
    fn proposed_stolen_verifier_example() {
        let (params, hash, record) = example();
        let r = stolen_verifier_attack_proposed(&big(7), &record, &params, &hash, &big(5), &big(4))
            .unwrap();
        let frames: Vec<_> = r.transcript.frames().cloned().collect();
        assert!(matches!(&frames[0], Frame::Msg1 { t_a, .. } if *t_a == big(11)));
        assert_eq!(frames[1], Frame::Msg2 { t_b: big(9) });
        assert_eq!(frames[2], Frame::Msg3 { d_a: big(3) });
        assert!(r.succeeded);
        assert_eq!(r.attacker_key.as_ref().unwrap().value(), &big(11));
        assert_eq!(r.attacker_key, r.victim_key);
        assert_eq!(r.claim, PROPOSED_STOLEN_VERIFIER_CLAIM);
    }

    #[test]
    fn proposed_attacker_without_verifier_fails() {
        // base g instead of v; y = 5 avoids the v^even = g^even coincidence of q = 13
        let (params, hash, record) = example();
        let r = stolen_verifier_attack_proposed(&big(6), &record, &params, &hash, &big(3), &big(5))
            .unwrap();
        assert!(!r.succeeded);
        assert!(matches!(
            r.transcript.0.last().unwrap().frame,
            Frame::Error { .. }
        ));
    }

    #[test]
    fn census_example_transcript() {
        let (params, hash, record) = example();
        let creds = Credentials::example();
        let out = run_proposed(
            SessionInputs {
                creds: &creds,
                record: &record,
                params: &params,
                hash: &hash,
                x: &big(3),
                y: &big(4),
            },
            ServerAuth::Skip,
            None,
        )
        .unwrap();
        let observed = ObservedSession::from_transcript(&out.transcript).unwrap();
        let census =
            dictionary_census(&observed, &big(12), &[big(10), big(11)], &params, &hash).unwrap();
        assert_eq!(census.consistent, vec![big(10)]);
        assert_eq!(census.enumeration_bound, big(121));
        let empty = dictionary_census(&observed, &big(12), &[], &params, &hash).unwrap();
        assert!(empty.consistent.is_empty());
    }

    #[test]
    fn mitm_examples() {
        let params = GroupParams::example();
        let table = DlogTable::new(&params).unwrap();
        let creds = Credentials::example();
        let run = |t: Tamper| {
            mitm_tamper_experiment(
                Scheme::Proposed,
                &t,
                &creds,
                &params,
                &HashSpec::ToySum,
                &big(3),
                &big(4),
                ServerAuth::Pairing(&table),
            )
            .unwrap()
        };
        let r = run(Tamper::new(TamperField::TA, 6u32));
        assert!(!r.succeeded && !r.server_accepted);
        let r = run(Tamper::new(TamperField::EB, 8u32));
        assert!(!r.succeeded && r.server_accepted);
        let r = run(Tamper::new(TamperField::TA, 8u32));
        assert!(!r.succeeded && r.server_accepted);
        assert!(r.notes.contains("completed normally"));
        // dlog(3) = 8 and 8 * dlog(T_A) = 24 = 0 mod 12, so this E_B passes the check
        let r = run(Tamper::new(TamperField::EB, 3u32));
        assert!(r.succeeded);
        assert!(r.notes.contains("keys match"));
    }

    #[test]
    fn mitm_field_must_exist() {
        let params = GroupParams::example();
        let err = mitm_tamper_experiment(
            Scheme::Lky,
            &Tamper::new(TamperField::EB, 1u32),
            &Credentials::example(),
            &params,
            &HashSpec::ToySum,
            &big(3),
            &big(4),
            ServerAuth::Skip,
        )
        .unwrap_err();
        assert_eq!(err, AttackError::FieldNotInScheme(TamperField::EB, Scheme::Lky));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn census_is_monotone(extra in prop::collection::vec(0u64..40, 0..6), seed in 0u64..3) {
            let params = generate_params(8, seed).unwrap();
            let hash = HashSpec::ToySum;
            let creds = Credentials::new(big(9), big(12), big(10)).unwrap();
            let record = register(&creds, &params, &hash).unwrap();
            let out = run_proposed(
                SessionInputs { creds: &creds, record: &record, params: &params, hash: &hash, x: &big(3), y: &big(4) },
                ServerAuth::Skip,
                None,
            ).unwrap();
            let observed = ObservedSession::from_transcript(&out.transcript).unwrap();
            let small: Vec<BigUint> = extra.iter().take(2).map(|&p| big(p)).collect();
            let mut large = small.clone();
            large.extend(extra.iter().skip(2).map(|&p| big(p)));
            large.push(big(10));
            let a = dictionary_census(&observed, &big(12), &small, &params, &hash).unwrap();
            let b = dictionary_census(&observed, &big(12), &large, &params, &hash).unwrap();
            for p in &a.consistent {
                prop_assert!(b.consistent.contains(p));
            }
            prop_assert!(b.consistent.contains(&big(10)));
            prop_assert!(b.consistent.iter().all(|p| b.dictionary.contains(p)));
        }
    }
}
