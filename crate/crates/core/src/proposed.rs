//! The improved verifier-typed scheme.
//!
//! ```text
//!  A (creds)                                   B (record v)
//!  T_A = g^x            --- id_A, T_A --->
//!                       <---    T_B    ---     T_B = v^y
//!  r   = T_B^(x/h)
//!  d_A = h(r) mod q     ---    d_A    --->     F_A = h(T_A^y) mod q, check d_A = F_A
//!                       <---    E_B    ---     E_B = v^(y^2)
//!  check e(E_B, T_A) = e(T_B, r)
//!  key = h(id_A, id_B, r)                      key = h(id_A, id_B, T_A^y)
//! ```
//!
//! The server-authentication pairing `e` only exists at desk scale, through
//! [`DlogTable`]; larger groups have to opt out with [`ServerAuth::Skip`].

use num_bigint::BigUint;
use num_traits::One;

use crate::credentials::{check_nonce, Credentials, SessionKey, VerifierRecord};
use crate::error::ProtocolError;
use crate::group::{exponent_reduce, mod_exp, mod_inverse, GroupParams, Tally};
use crate::hash::HashSpec;
use crate::oracle::DlogTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropMsg1 {
    pub id_a: BigUint,
    pub t_a: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropMsg2 {
    pub t_b: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropMsg3 {
    pub d_a: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropMsg4 {
    pub e_b: BigUint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClientPhase {
    Started,
    Confirmed,
    Finished,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServerPhase {
    Responded,
    Finished,
    Failed,
}

/// How entity A checks `E_B`.
#[derive(Debug, Clone, Copy)]
pub enum ServerAuth<'a> {
    Pairing(&'a DlogTable),
    /// Accept without checking; the session is server-unauthenticated.
    Skip,
}

/// Entity A.
#[derive(Debug, Clone)]
pub struct PropClient {
    creds: Credentials,
    params: GroupParams,
    hash: HashSpec,
    verifier: BigUint,
    password_exp: BigUint,
    x: BigUint,
    t_a: BigUint,
    t_b: Option<BigUint>,
    shared: Option<BigUint>,
    degenerate_t_b: bool,
    server_authenticated: bool,
    phase: ClientPhase,
    tally: Tally,
    registration: Tally,
}

impl PropClient {
    pub fn start(
        creds: &Credentials,
        params: &GroupParams,
        hash: &HashSpec,
        x: &BigUint,
    ) -> Result<(PropMsg1, PropClient), ProtocolError> {
        check_nonce(x, params)?;
        let mut registration = Tally::default();
        let password_exp = creds.password_exponent(params, hash, &mut registration)?;
        let verifier = mod_exp(params.g(), &password_exp, params, &mut registration)?;

        let mut tally = Tally::default();
        let t_a = mod_exp(params.g(), x, params, &mut tally)?;
        let msg = PropMsg1 {
            id_a: creds.id_a().clone(),
            t_a: t_a.clone(),
        };
        let state = PropClient {
            creds: creds.clone(),
            params: params.clone(),
            hash: hash.clone(),
            verifier,
            password_exp,
            x: x.clone(),
            t_a,
            t_b: None,
            shared: None,
            degenerate_t_b: false,
            server_authenticated: false,
            phase: ClientPhase::Started,
            tally,
            registration,
        };
        Ok((msg, state))
    }

    /// Derives `r = T_B^(x * h^-1)` and the confirmation `d_A = h(r) mod q`.
    pub fn confirm(&mut self, msg: &PropMsg2) -> Result<PropMsg3, ProtocolError> {
        if self.phase != ClientPhase::Started {
            return Err(ProtocolError::WrongPhase("client confirm"));
        }
        let result = self.confirm_inner(msg);
        self.phase = if result.is_ok() {
            ClientPhase::Confirmed
        } else {
            ClientPhase::Failed
        };
        result
    }

    fn confirm_inner(&mut self, msg: &PropMsg2) -> Result<PropMsg3, ProtocolError> {
        let p = &self.params;
        if !p.contains(&msg.t_b) {
            return Err(ProtocolError::NotInGroup);
        }
        self.degenerate_t_b = msg.t_b.is_one();
        let order = p.order();
        let inv = mod_inverse(&self.password_exp, &order)?;
        let exponent = (&self.x * inv) % &order;
        let r = mod_exp(&msg.t_b, &exponent, p, &mut self.tally)?;
        let d_a = self.hash.eval_mod(&[&r], p.q(), &mut self.tally)?;
        self.t_b = Some(msg.t_b.clone());
        self.shared = Some(r);
        Ok(PropMsg3 { d_a })
    }

    /// Checks `E_B` and derives the session key.
    pub fn finish(
        &mut self,
        msg: &PropMsg4,
        auth: ServerAuth<'_>,
    ) -> Result<SessionKey, ProtocolError> {
        if self.phase != ClientPhase::Confirmed {
            return Err(ProtocolError::WrongPhase("client finish"));
        }
        let result = self.finish_inner(msg, auth);
        self.phase = if result.is_ok() {
            ClientPhase::Finished
        } else {
            ClientPhase::Failed
        };
        result
    }

    fn finish_inner(
        &mut self,
        msg: &PropMsg4,
        auth: ServerAuth<'_>,
    ) -> Result<SessionKey, ProtocolError> {
        let p = &self.params;
        let t_b = self.t_b.as_ref().expect("set in confirm");
        let r = self.shared.as_ref().expect("set in confirm");
        if !p.contains(&msg.e_b) {
            return Err(ProtocolError::NotInGroup);
        }
        match auth {
            ServerAuth::Pairing(table) => {
                if table.params() != p {
                    return Err(ProtocolError::Group(crate::group::GroupError::OutOfRange(
                        "pairing oracle built for different parameters".into(),
                    )));
                }
                if !pairing_check(table, &msg.e_b, &self.t_a, t_b, r)? {
                    return Err(ProtocolError::AuthFail);
                }
                self.server_authenticated = true;
            }
            ServerAuth::Skip => self.server_authenticated = false,
        }
        let key = self
            .hash
            .eval(&[self.creds.id_a(), self.creds.id_b(), r], &mut self.tally)?;
        Ok(SessionKey::new(key, p))
    }

    pub fn phase(&self) -> ClientPhase {
        self.phase
    }

    pub fn verifier(&self) -> &BigUint {
        &self.verifier
    }

    /// The invertible exponent `hash_to_exponent(h(id_A, id_B, P))`.
    pub fn password_exponent(&self) -> &BigUint {
        &self.password_exp
    }

    pub fn t_a(&self) -> &BigUint {
        &self.t_a
    }

    /// `r`, available once confirmed.
    pub fn shared_secret(&self) -> Option<&BigUint> {
        self.shared.as_ref()
    }

    /// True when the received `T_B` was 1, which makes `r` independent of `x`.
    pub fn saw_degenerate_t_b(&self) -> bool {
        self.degenerate_t_b
    }

    pub fn server_authenticated(&self) -> bool {
        self.server_authenticated
    }

    pub fn tally(&self) -> Tally {
        self.tally
    }

    pub fn registration_tally(&self) -> Tally {
        self.registration
    }
}

/// `e(E_B, T_A) == e(T_B, r)`. Both sides carry `h * x * y^2` in the exponent
/// for an honest server.
pub fn pairing_check(
    table: &DlogTable,
    e_b: &BigUint,
    t_a: &BigUint,
    t_b: &BigUint,
    r: &BigUint,
) -> Result<bool, ProtocolError> {
    Ok(table.pairing(e_b, t_a)? == table.pairing(t_b, r)?)
}

/// The two sides of the uncorrected check `e(E_B, g) = e(T_B, r)`. They
/// disagree for honest runs in general; kept for reporting.
pub fn literal_pairing_sides(
    table: &DlogTable,
    e_b: &BigUint,
    t_b: &BigUint,
    r: &BigUint,
) -> Result<(u64, u64), ProtocolError> {
    let g = table.params().g();
    Ok((table.pairing(e_b, g)?, table.pairing(t_b, r)?))
}

/// Entity B.
#[derive(Debug, Clone)]
pub struct PropServer {
    record: VerifierRecord,
    params: GroupParams,
    hash: HashSpec,
    y: BigUint,
    t_a: BigUint,
    t_b: BigUint,
    shared: BigUint,
    f_a: BigUint,
    e_b: Option<BigUint>,
    key: Option<SessionKey>,
    phase: ServerPhase,
    tally: Tally,
}

impl PropServer {
    /// Answers with `T_B = v^y` and precomputes `F_A = h(T_A^y) mod q`.
    pub fn respond(
        msg: &PropMsg1,
        record: &VerifierRecord,
        params: &GroupParams,
        hash: &HashSpec,
        y: &BigUint,
    ) -> Result<(PropMsg2, PropServer), ProtocolError> {
        if msg.id_a != record.id_a {
            return Err(ProtocolError::UnknownIdentity);
        }
        check_nonce(y, params)?;
        if !params.contains(&msg.t_a) {
            return Err(ProtocolError::NotInGroup);
        }
        let mut tally = Tally::default();
        let t_b = mod_exp(&record.verifier, y, params, &mut tally)?;
        let shared = mod_exp(&msg.t_a, y, params, &mut tally)?;
        let f_a = hash.eval_mod(&[&shared], params.q(), &mut tally)?;
        let state = PropServer {
            record: record.clone(),
            params: params.clone(),
            hash: hash.clone(),
            y: y.clone(),
            t_a: msg.t_a.clone(),
            t_b: t_b.clone(),
            shared,
            f_a,
            e_b: None,
            key: None,
            phase: ServerPhase::Responded,
            tally,
        };
        Ok((PropMsg2 { t_b }, state))
    }

    /// Checks `d_A` against `F_A`; on success emits `E_B = v^(y^2)` and the key.
    pub fn finish(&mut self, msg: &PropMsg3) -> Result<(PropMsg4, SessionKey), ProtocolError> {
        if self.phase != ServerPhase::Responded {
            return Err(ProtocolError::WrongPhase("server finish"));
        }
        let result = self.finish_inner(msg);
        self.phase = if result.is_ok() {
            ServerPhase::Finished
        } else {
            ServerPhase::Failed
        };
        result
    }

    fn finish_inner(&mut self, msg: &PropMsg3) -> Result<(PropMsg4, SessionKey), ProtocolError> {
        if msg.d_a != self.f_a {
            return Err(ProtocolError::AuthFail);
        }
        let p = &self.params;
        let y_squared = exponent_reduce(&(&self.y * &self.y), p);
        let e_b = mod_exp(&self.record.verifier, &y_squared, p, &mut self.tally)?;
        let key = self.hash.eval(
            &[&self.record.id_a, &self.record.id_b, &self.shared],
            &mut self.tally,
        )?;
        let key = SessionKey::new(key, p);
        self.e_b = Some(e_b.clone());
        self.key = Some(key.clone());
        Ok((PropMsg4 { e_b }, key))
    }

    pub fn phase(&self) -> ServerPhase {
        self.phase
    }

    pub fn record(&self) -> &VerifierRecord {
        &self.record
    }

    pub fn t_a(&self) -> &BigUint {
        &self.t_a
    }

    pub fn t_b(&self) -> &BigUint {
        &self.t_b
    }

    /// `T_A^y mod q`.
    pub fn shared_secret(&self) -> &BigUint {
        &self.shared
    }

    pub fn expected_confirmation(&self) -> &BigUint {
        &self.f_a
    }

    pub fn e_b(&self) -> Option<&BigUint> {
        self.e_b.as_ref()
    }

    pub fn key(&self) -> Option<&SessionKey> {
        self.key.as_ref()
    }

    pub fn tally(&self) -> Tally {
        self.tally
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credentials::register;
    use crate::group::generate_params;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    struct Run {
        client: PropClient,
        server: PropServer,
        m1: PropMsg1,
        m2: PropMsg2,
        m3: PropMsg3,
    }

    fn run_to_confirm(creds: &Credentials, record: &VerifierRecord, x: u64, y: u64) -> Run {
        let params = GroupParams::example();
        let hash = HashSpec::ToySum;
        let (m1, mut client) = PropClient::start(creds, &params, &hash, &big(x)).unwrap();
        let (m2, server) = PropServer::respond(&m1, record, &params, &hash, &big(y)).unwrap();
        let m3 = client.confirm(&m2).unwrap();
        Run { client, server, m1, m2, m3 }
    }

    fn example_record() -> VerifierRecord {
        register(
            &Credentials::example(),
            &GroupParams::example(),
            &HashSpec::ToySum,
        )
        .unwrap()
    }

    #[test]
    fn example_run() {
        let record = example_record();
        assert_eq!(record.verifier, big(7));
        let mut run = run_to_confirm(&Credentials::example(), &record, 3, 4);
        assert_eq!(run.m1.t_a, big(8));
        assert_eq!(run.client.password_exponent(), &big(7));
        assert_eq!(run.m2.t_b, big(9));
        assert_eq!(run.server.phase(), ServerPhase::Responded);
        assert_eq!(run.client.shared_secret(), Some(&big(1)));
        assert_eq!(run.m3.d_a, big(1));
        assert_eq!(run.server.expected_confirmation(), &big(1));

        let (m4, key_b) = run.server.finish(&run.m3).unwrap();
        assert_eq!(m4.e_b, big(9));
        assert_eq!(key_b.value(), &big(9));

        let table = DlogTable::new(&GroupParams::example()).unwrap();
        let key_a = run.client.finish(&m4, ServerAuth::Pairing(&table)).unwrap();
        assert_eq!(key_a, key_b);
        assert!(run.client.server_authenticated());
        assert_eq!(run.client.tally().modexp, 2);
        assert_eq!(run.server.tally().modexp, 3);
        assert_eq!(run.client.tally().hash_evals + run.server.tally().hash_evals, 4);
    }

    #[test]
    fn example_inverse_reading_agrees() {
        // the worked example's exponent 3 * 8 and the extended-Euclid 3 * 7 both send 9 to 1
        let q = big(13);
        assert_eq!(big(9).modpow(&big(24), &q), big(1));
        assert_eq!(big(9).modpow(&big(21 % 12), &q), big(1));
    }

    #[test]
    fn literal_check_fails_on_example_run() {
        let table = DlogTable::new(&GroupParams::example()).unwrap();
        assert_eq!(
            literal_pairing_sides(&table, &big(9), &big(9), &big(1)).unwrap(),
            (4, 0)
        );
        assert!(pairing_check(&table, &big(9), &big(8), &big(9), &big(1)).unwrap());
    }

    #[test]
    fn tampered_e_b_rejected() {
        let record = example_record();
        let mut run = run_to_confirm(&Credentials::example(), &record, 3, 4);
        run.server.finish(&run.m3).unwrap();
        let table = DlogTable::new(&GroupParams::example()).unwrap();
        assert_eq!(
            run.client
                .finish(&PropMsg4 { e_b: big(8) }, ServerAuth::Pairing(&table))
                .unwrap_err(),
            ProtocolError::AuthFail
        );
        assert_eq!(run.client.phase(), ClientPhase::Failed);
    }

    #[test]
    fn wrong_password_rejected() {
        let record = example_record();
        let creds = Credentials::example().with_password(big(11));
        let mut run = run_to_confirm(&creds, &record, 5, 7);
        assert_eq!(run.m1.t_a, big(2));
        assert_eq!(run.m2.t_b, big(6));
        assert_eq!(run.client.shared_secret(), Some(&big(7)));
        assert_eq!(run.m3.d_a, big(7));
        assert_eq!(run.server.expected_confirmation(), &big(11));
        assert_eq!(run.server.finish(&run.m3).unwrap_err(), ProtocolError::AuthFail);
        assert_eq!(run.server.phase(), ServerPhase::Failed);
        assert_eq!(run.server.key(), None);
    }

    #[test]
    fn wrong_d_a_rejected() {
        let record = example_record();
        let mut run = run_to_confirm(&Credentials::example(), &record, 3, 4);
        assert_eq!(
            run.server.finish(&PropMsg3 { d_a: big(2) }).unwrap_err(),
            ProtocolError::AuthFail
        );
    }

    #[test]
    fn degenerate_t_b_is_flagged() {
        let params = GroupParams::example();
        let (_, mut client) =
            PropClient::start(&Credentials::example(), &params, &HashSpec::ToySum, &big(5))
                .unwrap();
        let m3 = client.confirm(&PropMsg2 { t_b: big(1) }).unwrap();
        assert!(client.saw_degenerate_t_b());
        assert_eq!(client.shared_secret(), Some(&big(1)));
        assert_eq!(m3.d_a, big(1));
    }

    #[test]
    fn precondition_violations() {
        let params = GroupParams::example();
        let creds = Credentials::example();
        assert_eq!(
            PropClient::start(&creds, &params, &HashSpec::ToySum, &big(0)).unwrap_err(),
            ProtocolError::NonceOutOfRange
        );
        let (m1, mut client) =
            PropClient::start(&creds, &params, &HashSpec::ToySum, &big(3)).unwrap();
        assert_eq!(
            PropServer::respond(&m1, &example_record(), &params, &HashSpec::ToySum, &big(12))
                .unwrap_err(),
            ProtocolError::NonceOutOfRange
        );
        assert_eq!(
            client.confirm(&PropMsg2 { t_b: big(0) }).unwrap_err(),
            ProtocolError::NotInGroup
        );
        assert!(matches!(
            client.finish(&PropMsg4 { e_b: big(9) }, ServerAuth::Skip),
            Err(ProtocolError::WrongPhase(_))
        ));
    }

    #[test]
    fn skip_server_auth() {
        let record = example_record();
        let mut run = run_to_confirm(&Credentials::example(), &record, 3, 4);
        let (m4, kb) = run.server.finish(&run.m3).unwrap();
        let ka = run.client.finish(&m4, ServerAuth::Skip).unwrap();
        assert_eq!(ka, kb);
        assert!(!run.client.server_authenticated());
    }

    proptest! {
        #[test]
        fn honest_runs_agree(seed in 0u64..6, x in any::<u64>(), y in any::<u64>(),
                             pw in any::<u64>(), digest in any::<bool>()) {
            let params = generate_params(12, seed).unwrap();
            let table = DlogTable::new(&params).unwrap();
            let span = params.order() - 1u32;
            let x = BigUint::from(x) % &span + 1u32;
            let y = BigUint::from(y) % &span + 1u32;
            let hash = if digest { HashSpec::sha256() } else { HashSpec::ToySum };
            let creds = Credentials::new(big(1), big(2), big(pw)).unwrap();
            let record = register(&creds, &params, &hash).unwrap();

            let (m1, mut client) = PropClient::start(&creds, &params, &hash, &x).unwrap();
            let (m2, mut server) = PropServer::respond(&m1, &record, &params, &hash, &y).unwrap();
            let m3 = client.confirm(&m2).unwrap();
            prop_assert_eq!(client.shared_secret().unwrap(), server.shared_secret());
            let (m4, kb) = server.finish(&m3).unwrap();
            let ka = client.finish(&m4, ServerAuth::Pairing(&table)).unwrap();
            prop_assert_eq!(ka, kb);
            prop_assert!(!client.saw_degenerate_t_b());
        }
    }
}
