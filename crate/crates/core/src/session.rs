//! In-memory session driver shared by the harness and the attack experiments.
//!
//! Both schemes are run message by message over a recorded channel. An
//! optional [`Tamper`] rewrites one field in flight. Protocol failures become
//! part of the [`SessionOutcome`]; only problems with the caller's own nonces
//! come back as `Err` so seeded callers can resample.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

use crate::credentials::{Credentials, SessionKey, VerifierRecord};
use crate::error::ProtocolError;
use crate::group::{GroupParams, Tally};
use crate::hash::HashSpec;
use crate::lky::{LkyClient, LkyMsg3, LkyServer, MaskedValue};
use crate::proposed::{PropClient, PropMsg3, PropMsg4, PropServer, ServerAuth};
use crate::serde_dec;
use crate::wire::{decode_frame, encode_frame, ErrorCode, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Lky,
    Proposed,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Lky => "lky",
            Scheme::Proposed => "proposed",
        })
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lky" => Ok(Scheme::Lky),
            "proposed" => Ok(Scheme::Proposed),
            other => Err(format!("unknown scheme {other:?} (expected lky or proposed)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "A->B")]
    AToB,
    #[serde(rename = "B->A")]
    BToA,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub frame: Frame,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    dir: Direction,
    frame: String,
}

impl Serialize for TranscriptEntry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let bytes = encode_frame(&self.frame).map_err(serde::ser::Error::custom)?;
        RawEntry {
            dir: self.direction,
            frame: hex::encode(bytes),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TranscriptEntry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawEntry::deserialize(d)?;
        let bytes = hex::decode(&raw.frame).map_err(D::Error::custom)?;
        let frame = decode_frame(&bytes).map_err(D::Error::custom)?;
        Ok(TranscriptEntry {
            direction: raw.dir,
            frame,
        })
    }
}

/// Ordered record of every frame exchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript(pub Vec<TranscriptEntry>);

impl Transcript {
    pub fn push(&mut self, direction: Direction, frame: Frame) {
        self.0.push(TranscriptEntry { direction, frame });
    }

    pub fn frames(&self) -> impl Iterator<Item = &Frame> {
        self.0.iter().map(|e| &e.frame)
    }

    pub fn messages(&self) -> u64 {
        self.0.len() as u64
    }

    /// One round trip per client-initiated message.
    pub fn round_trips(&self) -> u64 {
        self.0
            .iter()
            .filter(|e| e.direction == Direction::AToB)
            .count() as u64
    }

    pub fn bytes_on_wire(&self) -> u64 {
        self.frames()
            .map(|f| encode_frame(f).map(|b| b.len() as u64).unwrap_or(0))
            .sum()
    }
}

/// Per-session cost accounting. Registration work is never included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub modexp_client: u64,
    pub modexp_server: u64,
    pub messages: u64,
    pub round_trips: u64,
    pub bytes_on_wire: u64,
    pub hash_evals: u64,
}

impl Counters {
    pub fn from_parts(client: Tally, server: Tally, transcript: &Transcript) -> Self {
        Counters {
            modexp_client: client.modexp,
            modexp_server: server.modexp,
            messages: transcript.messages(),
            round_trips: transcript.round_trips(),
            bytes_on_wire: transcript.bytes_on_wire(),
            hash_evals: client.hash_evals + server.hash_evals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TamperField {
    #[serde(rename = "T_A")]
    TA,
    #[serde(rename = "T_B")]
    TB,
    #[serde(rename = "d_A")]
    DA,
    #[serde(rename = "d_B")]
    DB,
    #[serde(rename = "E_B")]
    EB,
}

impl TamperField {
    pub fn in_scheme(self, scheme: Scheme) -> bool {
        match self {
            TamperField::TA | TamperField::TB | TamperField::DA => true,
            TamperField::DB => scheme == Scheme::Lky,
            TamperField::EB => scheme == Scheme::Proposed,
        }
    }
}

impl fmt::Display for TamperField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TamperField::TA => "T_A",
            TamperField::TB => "T_B",
            TamperField::DA => "d_A",
            TamperField::DB => "d_B",
            TamperField::EB => "E_B",
        })
    }
}

impl FromStr for TamperField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "T_A" | "t_a" | "TA" => TamperField::TA,
            "T_B" | "t_b" | "TB" => TamperField::TB,
            "d_A" | "d_a" | "DA" => TamperField::DA,
            "d_B" | "d_b" | "DB" => TamperField::DB,
            "E_B" | "e_b" | "EB" => TamperField::EB,
            other => return Err(format!("unknown message field {other:?}")),
        })
    }
}

/// Replace one message field in flight. For LKY, `T_A`/`T_B` refer to the
/// masked integers on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tamper {
    pub field: TamperField,
    #[serde(with = "serde_dec")]
    pub value: BigUint,
}

impl Tamper {
    pub fn new(field: TamperField, value: impl Into<BigUint>) -> Self {
        Tamper {
            field,
            value: value.into(),
        }
    }

    fn apply(tamper: Option<&Tamper>, field: TamperField, value: &mut BigUint) -> bool {
        match tamper {
            Some(t) if t.field == field => {
                let changed = *value != t.value;
                *value = t.value.clone();
                changed
            }
            _ => false,
        }
    }
}

/// Everything observable about one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SessionOutcome {
    pub scheme: Scheme,
    pub transcript: Transcript,
    pub key_a: Option<SessionKey>,
    pub key_b: Option<SessionKey>,
    /// A accepted B.
    pub auth_a_ok: bool,
    /// B accepted A.
    pub auth_b_ok: bool,
    pub counters: Counters,
    pub flags: Vec<String>,
    /// Named public intermediates (never nonces or the password).
    pub values: BTreeMap<String, String>,
    pub error: Option<String>,
    /// True if a tamper changed a value in flight.
    pub tampered: bool,
}

impl SessionOutcome {
    fn new(scheme: Scheme) -> Self {
        SessionOutcome {
            scheme,
            transcript: Transcript::default(),
            key_a: None,
            key_b: None,
            auth_a_ok: false,
            auth_b_ok: false,
            counters: Counters::default(),
            flags: Vec::new(),
            values: BTreeMap::new(),
            error: None,
            tampered: false,
        }
    }

    fn value(&mut self, name: &str, v: &BigUint) {
        self.values.insert(name.to_owned(), v.to_string());
    }

    fn server_rejects(&mut self, err: &ProtocolError) {
        self.transcript
            .push(Direction::BToA, Frame::error(error_code(err), err.to_string()));
        self.error = Some(format!("server: {err}"));
    }

    fn client_rejects(&mut self, err: &ProtocolError) {
        self.error = Some(format!("client: {err}"));
    }

    fn close(mut self, client: Tally, server: Option<Tally>) -> Self {
        self.counters = Counters::from_parts(client, server.unwrap_or_default(), &self.transcript);
        self
    }

    pub fn keys_match(&self) -> bool {
        matches!((&self.key_a, &self.key_b), (Some(a), Some(b)) if a == b)
    }
}

pub(crate) fn error_code(err: &ProtocolError) -> ErrorCode {
    match err {
        ProtocolError::UnknownIdentity => ErrorCode::UnknownIdentity,
        ProtocolError::AuthFail => ErrorCode::AuthFail,
        _ => ErrorCode::MalformedFrame,
    }
}

fn caller_error(err: &ProtocolError) -> bool {
    matches!(
        err,
        ProtocolError::RetryNonce | ProtocolError::NonceOutOfRange
    )
}

/// Inputs for one in-memory session. `record` is what B has on file; A
/// derives its own verifier from `creds`.
#[derive(Debug, Clone, Copy)]
pub struct SessionInputs<'a> {
    pub creds: &'a Credentials,
    pub record: &'a VerifierRecord,
    pub params: &'a GroupParams,
    pub hash: &'a HashSpec,
    pub x: &'a BigUint,
    pub y: &'a BigUint,
}

pub fn run_proposed(
    inp: SessionInputs<'_>,
    auth: ServerAuth<'_>,
    tamper: Option<&Tamper>,
) -> Result<SessionOutcome, ProtocolError> {
    let p = inp.params;
    let mut out = SessionOutcome::new(Scheme::Proposed);
    out.value("v", &inp.record.verifier);

    let (mut m1, mut client) = PropClient::start(inp.creds, p, inp.hash, inp.x)?;
    out.value("T_A", &m1.t_a);
    out.tampered |= Tamper::apply(tamper, TamperField::TA, &mut m1.t_a);
    out.transcript.push(
        Direction::AToB,
        Frame::Msg1 {
            q: p.q().clone(),
            g: p.g().clone(),
            id_a: m1.id_a.clone(),
            t_a: m1.t_a.clone(),
        },
    );

    let (mut m2, mut server) = match PropServer::respond(&m1, inp.record, p, inp.hash, inp.y) {
        Ok(v) => v,
        Err(e) if caller_error(&e) => return Err(e),
        Err(e) => {
            out.server_rejects(&e);
            return Ok(out.close(client.tally(), None));
        }
    };
    out.value("T_B", &m2.t_b);
    out.value("F_A", server.expected_confirmation());
    out.tampered |= Tamper::apply(tamper, TamperField::TB, &mut m2.t_b);
    out.transcript.push(Direction::BToA, Frame::Msg2 { t_b: m2.t_b.clone() });

    let mut m3 = match client.confirm(&m2) {
        Ok(m) => m,
        Err(e) => {
            out.client_rejects(&e);
            return Ok(out.close(client.tally(), Some(server.tally())));
        }
    };
    if client.saw_degenerate_t_b() {
        out.flags.push("degenerate T_B".into());
    }
    out.value("r", client.shared_secret().expect("confirmed"));
    out.value("d_A", &m3.d_a);
    out.tampered |= Tamper::apply(tamper, TamperField::DA, &mut m3.d_a);
    out.transcript.push(Direction::AToB, Frame::Msg3 { d_a: m3.d_a.clone() });

    let (mut m4, key_b) = match server.finish(&PropMsg3 { d_a: m3.d_a.clone() }) {
        Ok(v) => v,
        Err(e) => {
            out.server_rejects(&e);
            return Ok(out.close(client.tally(), Some(server.tally())));
        }
    };
    out.auth_b_ok = true;
    out.value("E_B", &m4.e_b);
    out.value("key_B", key_b.value());
    out.key_b = Some(key_b);
    out.tampered |= Tamper::apply(tamper, TamperField::EB, &mut m4.e_b);
    out.transcript.push(Direction::BToA, Frame::Msg4 { e_b: m4.e_b.clone() });

    match client.finish(&PropMsg4 { e_b: m4.e_b.clone() }, auth) {
        Ok(key_a) => {
            out.auth_a_ok = true;
            out.value("key_A", key_a.value());
            out.key_a = Some(key_a);
            if !client.server_authenticated() {
                out.flags.push("server unauthenticated".into());
            }
        }
        Err(e) => out.client_rejects(&e),
    }
    Ok(out.close(client.tally(), Some(server.tally())))
}

pub fn run_lky(
    inp: SessionInputs<'_>,
    tamper: Option<&Tamper>,
) -> Result<SessionOutcome, ProtocolError> {
    let p = inp.params;
    let mut out = SessionOutcome::new(Scheme::Lky);
    out.value("v", &inp.record.verifier);

    let (mut m1, mut client) = LkyClient::start(inp.creds, p, inp.hash, inp.x)?;
    let mut t_a = m1.t_a.to_biguint();
    out.value("T_A", &t_a);
    out.tampered |= Tamper::apply(tamper, TamperField::TA, &mut t_a);
    out.transcript.push(
        Direction::AToB,
        Frame::Msg1 {
            q: p.q().clone(),
            g: p.g().clone(),
            id_a: m1.id_a.clone(),
            t_a: t_a.clone(),
        },
    );

    let respond = MaskedValue::from_biguint(&t_a, p)
        .map_err(|_| ProtocolError::UnmaskOutOfRange)
        .and_then(|masked| {
            m1.t_a = masked;
            LkyServer::respond(&m1, inp.record, p, inp.hash, inp.y)
        });
    let (m2, mut server) = match respond {
        Ok(v) => v,
        Err(e) if caller_error(&e) => return Err(e),
        Err(e) => {
            out.server_rejects(&e);
            return Ok(out.close(client.tally(), None));
        }
    };
    let mut t_b = m2.t_b.to_biguint();
    let mut d_b = m2.d_b.clone();
    out.value("T_B", &t_b);
    out.value("d_B", &d_b);
    out.value("r_B", server.shared_secret());
    out.tampered |= Tamper::apply(tamper, TamperField::TB, &mut t_b);
    out.tampered |= Tamper::apply(tamper, TamperField::DB, &mut d_b);
    out.transcript.push(
        Direction::BToA,
        Frame::LkyMsg2 {
            t_b: t_b.clone(),
            d_b: d_b.clone(),
        },
    );

    let finish = MaskedValue::from_biguint(&t_b, p)
        .map_err(|_| ProtocolError::UnmaskOutOfRange)
        .and_then(|t_b| client.finish(&crate::lky::LkyMsg2 { t_b, d_b }));
    let (mut m3, key_a) = match finish {
        Ok(v) => v,
        Err(e) => {
            out.client_rejects(&e);
            return Ok(out.close(client.tally(), Some(server.tally())));
        }
    };
    out.auth_a_ok = true;
    out.value("r", client.shared_secret().expect("finished"));
    out.value("d_A", &m3.d_a);
    out.value("key_A", key_a.value());
    out.key_a = Some(key_a);
    out.tampered |= Tamper::apply(tamper, TamperField::DA, &mut m3.d_a);
    out.transcript.push(Direction::AToB, Frame::Msg3 { d_a: m3.d_a.clone() });

    match server.finish(&LkyMsg3 { d_a: m3.d_a }) {
        Ok(key_b) => {
            out.auth_b_ok = true;
            out.value("key_B", key_b.value());
            out.key_b = Some(key_b);
        }
        Err(e) => out.server_rejects(&e),
    }
    Ok(out.close(client.tally(), Some(server.tally())))
}
