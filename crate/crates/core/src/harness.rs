//! Scenario runner: honest sessions, attack scenarios, efficiency accounting
//! and golden vectors.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::attacks::{
    mitm_tamper_experiment, stolen_verifier_attack_lky, stolen_verifier_attack_proposed,
    AttackError, AttackKind, AttackReport,
};
use crate::credentials::{register, Credentials};
use crate::error::ProtocolError;
use crate::group::{generate_params, sample_nonce, validate_params, GroupError, GroupParams};
use crate::hash::HashSpec;
use crate::oracle::{DlogTable, OracleError};
use crate::proposed::ServerAuth;
use crate::serde_dec;
use crate::session::{
    run_lky, run_proposed, Counters, Scheme, SessionInputs, SessionOutcome, Tamper, Transcript,
};

/// Resampling budget for seeded nonces that hit a degenerate value.
const MAX_NONCE_DRAWS: usize = 64;

const GOLDEN_JSON: &str = include_str!("../golden/vectors.json");

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("unknown attack {0:?}")]
    UnknownAttack(String),
    #[error("scenario is not honest (has a tamper or attack)")]
    NotHonest,
    #[error("scenario names no attack")]
    NoAttack,
    #[error("mitm scenario needs a tamper")]
    MissingTamper,
    #[error("q is too large for the pairing oracle; set skip_server_auth")]
    NeedsSkipServerAuth,
    #[error("no usable nonces after {0} draws")]
    NonceExhausted(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamSpec {
    Explicit(GroupParams),
    Generate { bits: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonceSpec {
    Explicit {
        #[serde(with = "serde_dec")]
        x: BigUint,
        #[serde(with = "serde_dec")]
        y: BigUint,
    },
    Seeded {
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CredSpec {
    #[serde(with = "serde_dec")]
    pub id_a: BigUint,
    #[serde(with = "serde_dec")]
    pub id_b: BigUint,
    #[serde(with = "serde_dec")]
    pub password: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub scheme: Scheme,
    pub params: ParamSpec,
    pub creds: CredSpec,
    /// Password typed by the client if it differs from the registered one.
    #[serde(default, with = "serde_dec::option", skip_serializing_if = "Option::is_none")]
    pub client_password: Option<BigUint>,
    #[serde(default = "default_hash")]
    pub hash: HashSpec,
    pub nonces: NonceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tamper: Option<Tamper>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attack: Option<String>,
    /// Verifier handed to a stolen-verifier attacker; defaults to the real one.
    #[serde(default, with = "serde_dec::option", skip_serializing_if = "Option::is_none")]
    pub attacker_verifier: Option<BigUint>,
    #[serde(default)]
    pub skip_server_auth: bool,
}

fn default_hash() -> HashSpec {
    HashSpec::ToySum
}

impl Scenario {
    /// Honest run of the worked example: q = 13, g = 6, ids 9/12, P = 10.
    pub fn example(scheme: Scheme, x: u64, y: u64) -> Self {
        Scenario {
            scheme,
            params: ParamSpec::Explicit(GroupParams::example()),
            creds: CredSpec {
                id_a: 9u32.into(),
                id_b: 12u32.into(),
                password: 10u32.into(),
            },
            client_password: None,
            hash: HashSpec::ToySum,
            nonces: NonceSpec::Explicit {
                x: x.into(),
                y: y.into(),
            },
            tamper: None,
            attack: None,
            attacker_verifier: None,
            skip_server_auth: false,
        }
    }

    pub fn with_tamper(mut self, tamper: Tamper) -> Self {
        self.tamper = Some(tamper);
        self
    }

    pub fn with_attack(mut self, attack: &str) -> Self {
        self.attack = Some(attack.to_owned());
        self
    }

    pub fn with_client_password(mut self, password: impl Into<BigUint>) -> Self {
        self.client_password = Some(password.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Simulation,
    Client,
    Server,
}

/// One session, in the session-log schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionReport {
    pub scheme: Scheme,
    pub role: Role,
    pub params: GroupParams,
    pub transcript: Transcript,
    #[serde(with = "serde_dec::option")]
    pub key_a: Option<BigUint>,
    #[serde(with = "serde_dec::option")]
    pub key_b: Option<BigUint>,
    pub auth_a_ok: bool,
    pub auth_b_ok: bool,
    pub counters: Counters,
    pub flags: Vec<String>,
    pub values: BTreeMap<String, String>,
    pub error: Option<String>,
}

impl SessionReport {
    pub fn from_outcome(outcome: SessionOutcome, params: &GroupParams) -> Self {
        SessionReport {
            scheme: outcome.scheme,
            role: Role::Simulation,
            params: params.clone(),
            transcript: outcome.transcript,
            key_a: outcome.key_a.map(|k| k.value().clone()),
            key_b: outcome.key_b.map(|k| k.value().clone()),
            auth_a_ok: outcome.auth_a_ok,
            auth_b_ok: outcome.auth_b_ok,
            counters: outcome.counters,
            flags: outcome.flags,
            values: outcome.values,
            error: outcome.error,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }

    /// SHA-256 of the JSON line, hex.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json_line().as_bytes()))
    }

    pub fn accepted(&self) -> bool {
        self.auth_a_ok && self.auth_b_ok
    }

    pub fn value(&self, name: &str) -> Option<&str> {
        self.values.get(name).map(String::as_str)
    }
}

/// Resolved inputs shared by honest and attack runs.
struct Prepared {
    params: GroupParams,
    creds: Credentials,
    client_creds: Credentials,
}

/// Runs scenarios, caching one dlog table per parameter set.
#[derive(Default)]
pub struct Runner {
    tables: HashMap<(BigUint, BigUint), DlogTable>,
}

impl Runner {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&self, sc: &Scenario) -> Result<Prepared, ScenarioError> {
        let params = match &sc.params {
            ParamSpec::Explicit(p) => {
                validate_params(p)?;
                p.clone()
            }
            ParamSpec::Generate { bits, seed } => generate_params(*bits, *seed)?,
        };
        let creds = Credentials::new(
            sc.creds.id_a.clone(),
            sc.creds.id_b.clone(),
            sc.creds.password.clone(),
        )?;
        let client_creds = match &sc.client_password {
            Some(p) => creds.with_password(p.clone()),
            None => creds.clone(),
        };
        Ok(Prepared {
            params,
            creds,
            client_creds,
        })
    }

    fn table(&mut self, params: &GroupParams) -> Result<&DlogTable, ScenarioError> {
        let key = (params.q().clone(), params.g().clone());
        if !self.tables.contains_key(&key) {
            self.tables.insert(key.clone(), DlogTable::new(params)?);
        }
        Ok(&self.tables[&key])
    }

    fn auth(&mut self, params: &GroupParams, skip: bool) -> Result<ServerAuth<'_>, ScenarioError> {
        if skip {
            Ok(ServerAuth::Skip)
        } else if DlogTable::is_desk_scale(params) {
            Ok(ServerAuth::Pairing(self.table(params)?))
        } else {
            Err(ScenarioError::NeedsSkipServerAuth)
        }
    }

    pub fn run_honest_session(&mut self, sc: &Scenario) -> Result<SessionReport, ScenarioError> {
        if sc.tamper.is_some() || sc.attack.is_some() {
            return Err(ScenarioError::NotHonest);
        }
        let prep = self.prepare(sc)?;
        let record = register(&prep.creds, &prep.params, &sc.hash)?;
        let params = prep.params.clone();
        let scheme = sc.scheme;
        let hash = sc.hash.clone();
        let skip = sc.skip_server_auth;
        let outcome = with_nonces(&sc.nonces, &params, |x, y| {
            let inputs = SessionInputs {
                creds: &prep.client_creds,
                record: &record,
                params: &params,
                hash: &hash,
                x,
                y,
            };
            match scheme {
                Scheme::Proposed => {
                    let auth = self.auth(&params, skip)?;
                    Ok(run_proposed(inputs, auth, None)?)
                }
                Scheme::Lky => Ok(run_lky(inputs, None)?),
            }
        })?;
        Ok(SessionReport::from_outcome(outcome, &prep.params))
    }

    pub fn run_attack_scenario(&mut self, sc: &Scenario) -> Result<AttackReport, ScenarioError> {
        let id = sc.attack.as_deref().ok_or(ScenarioError::NoAttack)?;
        let kind: AttackKind = id
            .parse()
            .map_err(|_| ScenarioError::UnknownAttack(id.to_owned()))?;
        let prep = self.prepare(sc)?;
        let params = prep.params.clone();
        let hash = sc.hash.clone();
        let record = register(&prep.creds, &params, &hash)?;
        let stolen = sc
            .attacker_verifier
            .clone()
            .unwrap_or_else(|| record.verifier.clone());
        let skip = sc.skip_server_auth;
        let scheme = sc.scheme;
        with_nonces(&sc.nonces, &params, |x, y| match kind {
            AttackKind::StolenVerifierLky => Ok(stolen_verifier_attack_lky(
                &stolen, &record, &params, &hash, x, y,
            )?),
            AttackKind::StolenVerifierProposed => Ok(stolen_verifier_attack_proposed(
                &stolen, &record, &params, &hash, x, y,
            )?),
            AttackKind::Mitm => {
                let tamper = sc.tamper.as_ref().ok_or(ScenarioError::MissingTamper)?;
                let auth = match scheme {
                    Scheme::Proposed => self.auth(&params, skip)?,
                    Scheme::Lky => ServerAuth::Skip,
                };
                Ok(mitm_tamper_experiment(
                    scheme,
                    tamper,
                    &prep.client_creds,
                    &params,
                    &hash,
                    x,
                    y,
                    auth,
                )?)
            }
        })
    }
}

fn is_retry(err: &ScenarioError) -> bool {
    matches!(
        err,
        ScenarioError::Protocol(ProtocolError::RetryNonce)
            | ScenarioError::Attack(AttackError::Protocol(ProtocolError::RetryNonce))
    )
}

/// Calls `run` with the scenario's nonces; seeded nonces are redrawn while
/// the run asks for a new nonce.
fn with_nonces<T>(
    spec: &NonceSpec,
    params: &GroupParams,
    mut run: impl FnMut(&BigUint, &BigUint) -> Result<T, ScenarioError>,
) -> Result<T, ScenarioError> {
    match spec {
        NonceSpec::Explicit { x, y } => run(x, y),
        NonceSpec::Seeded { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..MAX_NONCE_DRAWS {
                let x = sample_nonce(&mut rng, params);
                let y = sample_nonce(&mut rng, params);
                match run(&x, &y) {
                    Err(e) if is_retry(&e) => continue,
                    other => return other,
                }
            }
            Err(ScenarioError::NonceExhausted(MAX_NONCE_DRAWS))
        }
    }
}

#[derive(Debug, Error)]
pub enum EfficiencyError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("{scheme} trial {trial}: counters drifted on {metric} ({first} vs {now})")]
    CounterDrift {
        scheme: Scheme,
        trial: usize,
        metric: &'static str,
        first: u64,
        now: u64,
    },
    #[error("{scheme} trial {trial}: honest session did not agree on a key")]
    KeyAgreement { scheme: Scheme, trial: usize },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeEfficiency {
    pub scheme: Scheme,
    pub trials: usize,
    /// Counters shared by every trial (bytes_on_wire is the maximum seen).
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfficiencyRow {
    pub scheme: Scheme,
    pub metric: &'static str,
    pub measured: u64,
    pub paper_claim: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EfficiencyTable {
    pub params: GroupParams,
    pub schemes: Vec<SchemeEfficiency>,
}

fn claim(scheme: Scheme, metric: &str) -> &'static str {
    match (scheme, metric) {
        (Scheme::Proposed, "modexp_client" | "modexp_server") => "at most 3 per entity",
        (Scheme::Proposed, "round_trips") => "2 rounds",
        (Scheme::Lky, "modexp_client" | "modexp_server") => "2n (n-party, not checked)",
        (Scheme::Lky, "round_trips") => "n rounds (n-party, not checked)",
        (_, "bytes_on_wire") => "2|e| bits per user (not mapped)",
        _ => "-",
    }
}

impl EfficiencyTable {
    pub fn get(&self, scheme: Scheme) -> Option<&SchemeEfficiency> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    pub fn rows(&self) -> Vec<EfficiencyRow> {
        let mut rows = Vec::new();
        for s in &self.schemes {
            let c = &s.counters;
            for (metric, measured) in [
                ("modexp_client", c.modexp_client),
                ("modexp_server", c.modexp_server),
                ("messages", c.messages),
                ("round_trips", c.round_trips),
                ("hash_evals", c.hash_evals),
                ("bytes_on_wire", c.bytes_on_wire),
            ] {
                rows.push(EfficiencyRow {
                    scheme: s.scheme,
                    metric,
                    measured,
                    paper_claim: claim(s.scheme, metric),
                });
            }
        }
        rows
    }

    pub fn to_text(&self) -> String {
        let rows = self.rows();
        let mut out = String::new();
        let header = ("scheme", "metric", "measured", "paper claim");
        let _ = writeln!(
            out,
            "{:<9} {:<14} {:>9}  {}",
            header.0, header.1, header.2, header.3
        );
        for r in rows {
            let _ = writeln!(
                out,
                "{:<9} {:<14} {:>9}  {}",
                r.scheme.to_string(),
                r.metric,
                r.measured,
                r.paper_claim
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scheme", "metric", "measured", "paper_claim"])
            .expect("in-memory csv");
        for r in self.rows() {
            w.write_record([
                r.scheme.to_string(),
                r.metric.to_owned(),
                r.measured.to_string(),
                r.paper_claim.to_owned(),
            ])
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

fn check_drift(
    scheme: Scheme,
    trial: usize,
    first: &Counters,
    now: &Counters,
) -> Result<(), EfficiencyError> {
    for (metric, a, b) in [
        ("modexp_client", first.modexp_client, now.modexp_client),
        ("modexp_server", first.modexp_server, now.modexp_server),
        ("messages", first.messages, now.messages),
        ("round_trips", first.round_trips, now.round_trips),
        ("hash_evals", first.hash_evals, now.hash_evals),
    ] {
        if a != b {
            return Err(EfficiencyError::CounterDrift {
                scheme,
                trial,
                metric,
                first: a,
                now: b,
            });
        }
    }
    Ok(())
}

/// Runs `trials` honest sessions per scheme with seeded nonces, identities
/// and passwords, and checks that the counters never move.
pub fn compare_efficiency(
    params: &GroupParams,
    hash: &HashSpec,
    trials: usize,
    seed: u64,
) -> Result<EfficiencyTable, EfficiencyError> {
    if trials == 0 {
        return Err(EfficiencyError::NoTrials);
    }
    let mut runner = Runner::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut schemes = Vec::new();
    for scheme in [Scheme::Proposed, Scheme::Lky] {
        let mut agg: Option<Counters> = None;
        for trial in 0..trials {
            let id_a: u64 = rng.gen_range(1..1000);
            let sc = Scenario {
                scheme,
                params: ParamSpec::Explicit(params.clone()),
                creds: CredSpec {
                    id_a: id_a.into(),
                    id_b: (id_a + rng.gen_range(1..1000u64)).into(),
                    password: rng.gen_range(0..1_000_000u64).into(),
                },
                client_password: None,
                hash: hash.clone(),
                nonces: NonceSpec::Seeded { seed: rng.gen() },
                tamper: None,
                attack: None,
                attacker_verifier: None,
                skip_server_auth: !DlogTable::is_desk_scale(params),
            };
            let report = runner.run_honest_session(&sc)?;
            if !report.accepted() || report.key_a != report.key_b {
                return Err(EfficiencyError::KeyAgreement { scheme, trial });
            }
            match &mut agg {
                None => agg = Some(report.counters),
                Some(first) => {
                    check_drift(scheme, trial, first, &report.counters)?;
                    first.bytes_on_wire = first.bytes_on_wire.max(report.counters.bytes_on_wire);
                }
            }
        }
        schemes.push(SchemeEfficiency {
            scheme,
            trials,
            counters: agg.expect("trials >= 1"),
        });
    }
    Ok(EfficiencyTable {
        params: params.clone(),
        schemes,
    })
}

/// A pinned scenario with the report digest and the public values it must
/// reproduce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenVector {
    pub name: String,
    pub scenario: Scenario,
    pub values: BTreeMap<String, String>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldenCheck {
    pub name: String,
    pub expected_digest: String,
    pub actual_digest: String,
    /// (name, expected, actual) for every value that differs.
    pub value_mismatches: Vec<(String, String, Option<String>)>,
}

impl GoldenCheck {
    pub fn ok(&self) -> bool {
        self.expected_digest == self.actual_digest && self.value_mismatches.is_empty()
    }
}

/// The vectors shipped with the crate.
pub fn golden_vectors() -> Vec<GoldenVector> {
    serde_json::from_str(GOLDEN_JSON).expect("embedded golden vectors parse")
}

/// The scenarios behind the golden file, without expectations.
pub fn golden_scenarios() -> Vec<(String, Scenario)> {
    let sha = HashSpec::sha256();
    let mut sha_run = Scenario::example(Scheme::Proposed, 3, 4);
    sha_run.hash = sha;
    vec![
        ("proposed-example".into(), Scenario::example(Scheme::Proposed, 3, 4)),
        ("lky-example".into(), Scenario::example(Scheme::Lky, 3, 4)),
        (
            "proposed-wrong-password".into(),
            Scenario::example(Scheme::Proposed, 5, 7).with_client_password(11u32),
        ),
        ("proposed-example-sha256".into(), sha_run),
    ]
}

pub fn check_golden(runner: &mut Runner) -> Result<Vec<GoldenCheck>, ScenarioError> {
    golden_vectors()
        .into_iter()
        .map(|gv| {
            let report = runner.run_honest_session(&gv.scenario)?;
            let value_mismatches = gv
                .values
                .iter()
                .filter(|(k, v)| report.value(k) != Some(v.as_str()))
                .map(|(k, v)| (k.clone(), v.clone(), report.value(k).map(str::to_owned)))
                .collect();
            Ok(GoldenCheck {
                name: gv.name,
                expected_digest: gv.digest,
                actual_digest: report.digest(),
                value_mismatches,
            })
        })
        .collect()
}

/// Recomputes every golden vector from the current code and writes them.
pub fn bless_golden(runner: &mut Runner, path: &Path) -> Result<Vec<GoldenVector>, BlessError> {
    let mut out = Vec::new();
    for (name, scenario) in golden_scenarios() {
        let report = runner.run_honest_session(&scenario)?;
        out.push(GoldenVector {
            name,
            values: report.values.clone(),
            digest: report.digest(),
            scenario,
        });
    }
    let mut text = serde_json::to_string_pretty(&out).expect("vectors serialize");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(out)
}

#[derive(Debug, Error)]
pub enum BlessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("writing golden file: {0}")]
    Io(#[from] std::io::Error),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::TamperField;

    fn val(r: &SessionReport, k: &str) -> String {
        r.value(k).unwrap_or("-").to_owned()
    }

    #[test]
    fn proposed_example_session() {
        let r = Runner::new()
            .run_honest_session(&Scenario::example(Scheme::Proposed, 3, 4))
            .unwrap();
        for (k, v) in [
            ("v", "7"),
            ("T_A", "8"),
            ("T_B", "9"),
            ("r", "1"),
            ("d_A", "1"),
            ("F_A", "1"),
            ("E_B", "9"),
        ] {
            assert_eq!(val(&r, k), v, "{k}");
        }
        assert_eq!(r.key_a, Some(9u32.into()));
        assert_eq!(r.key_b, Some(9u32.into()));
        assert!(r.accepted());
        let c = r.counters;
        assert_eq!(
            (c.modexp_client, c.modexp_server, c.messages, c.round_trips),
            (2, 3, 4, 2)
        );
    }

    #[test]
    fn lky_example_session() {
        let r = Runner::new()
            .run_honest_session(&Scenario::example(Scheme::Lky, 3, 4))
            .unwrap();
        assert_eq!(r.key_a, Some(1u32.into()));
        assert_eq!(r.key_a, r.key_b);
        assert_eq!(r.counters.messages, 3);
    }

    #[test]
    fn wrong_password_rejected() {
        let sc = Scenario::example(Scheme::Proposed, 5, 7).with_client_password(11u32);
        let r = Runner::new().run_honest_session(&sc).unwrap();
        assert!(!r.auth_b_ok);
        assert!(r.key_a.is_none() && r.key_b.is_none());
    }

    #[test]
    fn honest_runner_refuses_tamper() {
        let sc = Scenario::example(Scheme::Proposed, 3, 4).with_tamper(Tamper::new(TamperField::TA, 6u32));
        assert!(matches!(
            Runner::new().run_honest_session(&sc),
            Err(ScenarioError::NotHonest)
        ));
    }

    #[test]
    fn attack_scenarios() {
        let mut runner = Runner::new();
        let r = runner
            .run_attack_scenario(&Scenario::example(Scheme::Lky, 5, 4).with_attack("stolen-verifier-lky"))
            .unwrap();
        assert!(r.succeeded);
        assert_eq!(r.counters.messages, 3);
        let r = runner
            .run_attack_scenario(
                &Scenario::example(Scheme::Proposed, 3, 4)
                    .with_attack("mitm")
                    .with_tamper(Tamper::new(TamperField::TA, 6u32)),
            )
            .unwrap();
        assert!(!r.succeeded);
        let err = runner
            .run_attack_scenario(&Scenario::example(Scheme::Proposed, 3, 4).with_attack("replay"))
            .unwrap_err();
        assert!(matches!(err, ScenarioError::UnknownAttack(ref s) if s == "replay"));
    }

    #[test]
    fn seeded_scenarios_are_deterministic() {
        let mut sc = Scenario::example(Scheme::Proposed, 1, 1);
        sc.params = ParamSpec::Generate { bits: 16, seed: 4 };
        sc.nonces = NonceSpec::Seeded { seed: 99 };
        let a = Runner::new().run_honest_session(&sc).unwrap();
        let b = Runner::new().run_honest_session(&sc).unwrap();
        assert_eq!(a.digest(), b.digest());
        assert!(a.accepted());
    }

    #[test]
    fn scenario_json_round_trip() {
        let sc = Scenario::example(Scheme::Lky, 3, 4).with_tamper(Tamper::new(TamperField::DB, 2u32));
        let text = serde_json::to_string(&sc).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&text).unwrap(), sc);
        let seeded: Scenario = serde_json::from_str(
            r#"{"scheme":"proposed","params":{"bits":12,"seed":1},
                "creds":{"id_a":"1","id_b":"2","password":"3"},"nonces":{"seed":5}}"#,
        )
        .unwrap();
        assert_eq!(seeded.hash, HashSpec::ToySum);
        assert_eq!(seeded.nonces, NonceSpec::Seeded { seed: 5 });
    }

    #[test]
    fn efficiency_constant_and_annotated() {
        let t = compare_efficiency(&GroupParams::example(), &HashSpec::ToySum, 50, 1).unwrap();
        let p = t.get(Scheme::Proposed).unwrap().counters;
        assert_eq!((p.modexp_client, p.modexp_server, p.messages, p.round_trips), (2, 3, 4, 2));
        assert_eq!(t.get(Scheme::Lky).unwrap().counters.messages, 3);
        let csv = t.to_csv();
        assert!(csv.starts_with("scheme,metric,measured,paper_claim\n"));
        assert!(csv.contains("proposed,modexp_client,2,at most 3 per entity"));
        assert!(t.to_text().contains("2 rounds"));
        assert!(matches!(
            compare_efficiency(&GroupParams::example(), &HashSpec::ToySum, 0, 1),
            Err(EfficiencyError::NoTrials)
        ));
    }

    #[test]
    fn drift_is_reported() {
        let a = Counters::default();
        let b = Counters {
            modexp_server: 4,
            ..a
        };
        assert!(matches!(
            check_drift(Scheme::Proposed, 3, &a, &b),
            Err(EfficiencyError::CounterDrift { metric: "modexp_server", trial: 3, .. })
        ));
        let c = Counters {
            bytes_on_wire: 99,
            ..a
        };
        assert!(check_drift(Scheme::Proposed, 1, &a, &c).is_ok());
    }

    #[test]
    fn golden_vectors_hold() {
        let mut runner = Runner::new();
        let checks = check_golden(&mut runner).unwrap();
        assert_eq!(checks.len(), golden_scenarios().len());
        for c in &checks {
            assert!(c.ok(), "{c:?}");
        }
        let gv = golden_vectors();
        let prop = &gv.iter().find(|g| g.name == "proposed-example").unwrap().values;
        for (k, v) in [("v", "7"), ("T_A", "8"), ("T_B", "9"), ("r", "1"), ("d_A", "1"), ("F_A", "1"), ("E_B", "9"), ("key_A", "9")] {
            assert_eq!(prop[k], v);
        }
        let lky = &gv.iter().find(|g| g.name == "lky-example").unwrap().values;
        for (k, v) in [("T_A", "15"), ("T_B", "14"), ("d_B", "28"), ("d_A", "24"), ("key_A", "1")] {
            assert_eq!(lky[k], v);
        }
        // twice in a row
        let again = check_golden(&mut runner).unwrap();
        assert_eq!(checks, again);
    }

    #[test]
    fn bless_writes_matching_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.json");
        let written = bless_golden(&mut Runner::new(), &path).unwrap();
        let back: Vec<GoldenVector> =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(written, back);
        assert_eq!(back, golden_vectors());
    }
}
