//! TCP demo: entity B as a threaded server, entity A as a one-shot client.
//!
//! One session per connection. MSG1 carries `q` and `g`, which the server
//! compares against its own parameters; any failure is answered with an
//! ERROR frame and the connection is closed.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use log::{debug, info, warn};
use num_bigint::BigUint;
use thiserror::Error;

use crate::credentials::{Credentials, SessionKey};
use crate::error::ProtocolError;
use crate::group::{sample_nonce, GroupParams, Tally};
use crate::harness::{Role, SessionReport};
use crate::hash::HashSpec;
use crate::lky::{LkyClient, LkyMsg1, LkyMsg2, LkyMsg3, LkyServer, MaskedValue};
use crate::oracle::{DlogTable, OracleError};
use crate::proposed::{PropClient, PropMsg1, PropMsg2, PropMsg3, PropMsg4, PropServer, ServerAuth};
use crate::session::{Counters, Direction, Scheme, Transcript};
use crate::store::VerifierStore;
use crate::wire::{read_frame, write_frame, ErrorCode, Frame, WireError};

pub const DEFAULT_MAX_FAIL: u32 = 5;
pub const DEFAULT_IO_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Debug, Error)]
pub enum NetError {
    #[error("cannot listen on {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error("cannot open session log {path}: {source}")]
    Log { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone)]
pub struct ServerConfig {
    pub listen: String,
    pub params: GroupParams,
    pub hash: HashSpec,
    pub id_b: BigUint,
    pub store: VerifierStore,
    /// Where enrolled verifiers are persisted.
    pub store_path: Option<PathBuf>,
    pub max_fail: u32,
    /// `Scheme::Lky` only behind the insecure flag.
    pub scheme: Scheme,
    pub enroll: bool,
    pub log_path: Option<PathBuf>,
    /// Pins y for every session (tests).
    pub nonce: Option<BigUint>,
    pub io_timeout: Duration,
}

impl ServerConfig {
    pub fn new(listen: impl Into<String>, params: GroupParams, id_b: BigUint, store: VerifierStore) -> Self {
        ServerConfig {
            listen: listen.into(),
            params,
            hash: HashSpec::ToySum,
            id_b,
            store,
            store_path: None,
            max_fail: DEFAULT_MAX_FAIL,
            scheme: Scheme::Proposed,
            enroll: false,
            log_path: None,
            nonce: None,
            io_timeout: DEFAULT_IO_TIMEOUT,
        }
    }
}

/// Appends JSON lines; one `write_all` per line so concurrent writers
/// (threads or processes, via O_APPEND) never interleave within a line.
#[derive(Debug)]
pub struct SessionLog {
    file: Mutex<File>,
}

impl SessionLog {
    pub fn open(path: &Path) -> Result<Self, NetError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| NetError::Log {
                path: path.to_owned(),
                source,
            })?;
        Ok(SessionLog {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, report: &SessionReport) -> io::Result<()> {
        let mut line = report.to_json_line();
        line.push('\n');
        self.file
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .write_all(line.as_bytes())
    }
}

struct Shared {
    config: ServerConfig,
    store: Mutex<VerifierStore>,
    log: Option<SessionLog>,
}

pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }

    /// Stops accepting and waits for open connections to finish.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // wake the blocking accept
        let _ = TcpStream::connect(self.addr);
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

/// Binds and starts accepting in a background thread.
pub fn spawn(mut config: ServerConfig) -> Result<ServerHandle, NetError> {
    let listener = TcpListener::bind(&config.listen).map_err(|source| NetError::Bind {
        addr: config.listen.clone(),
        source,
    })?;
    let addr = listener.local_addr()?;
    let log = config.log_path.as_deref().map(SessionLog::open).transpose()?;
    if config.enroll {
        warn!("enrollment enabled: REGISTER frames carry verifiers in the clear");
    }
    if config.scheme == Scheme::Lky {
        warn!("serving the LKY scheme, which falls to a stolen verifier");
    }
    let store = std::mem::take(&mut config.store);
    let shared = Arc::new(Shared {
        config,
        store: Mutex::new(store),
        log,
    });
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = stop.clone();
    let thread = thread::spawn(move || {
        let mut workers: Vec<JoinHandle<()>> = Vec::new();
        for conn in listener.incoming() {
            if stop_flag.load(Ordering::SeqCst) {
                break;
            }
            workers.retain(|w| !w.is_finished());
            match conn {
                Ok(stream) => {
                    let shared = shared.clone();
                    workers.push(thread::spawn(move || handle_connection(stream, &shared)));
                }
                Err(e) => warn!("accept failed: {e}"),
            }
        }
        // let in-flight sessions finish and log
        for w in workers {
            let _ = w.join();
        }
    });
    info!("listening on {addr}");
    Ok(ServerHandle {
        addr,
        stop,
        thread: Some(thread),
    })
}

/// Per-connection state on the server side.
struct ServerConn<'a> {
    stream: TcpStream,
    shared: &'a Shared,
    report: SessionReport,
    tally: Tally,
}

impl ServerConn<'_> {
    fn send(&mut self, frame: Frame) -> Result<(), WireError> {
        write_frame(&mut self.stream, &frame)?;
        self.report.transcript.push(Direction::BToA, frame);
        Ok(())
    }

    fn recv(&mut self) -> Result<Frame, WireError> {
        let frame = read_frame(&mut self.stream)?;
        self.report.transcript.push(Direction::AToB, frame.clone());
        Ok(frame)
    }

    fn reject(&mut self, code: ErrorCode, detail: impl Into<String>) {
        let detail = detail.into();
        self.report.error = Some(format!("{code}: {detail}"));
        if let Err(e) = self.send(Frame::error(code, detail)) {
            debug!("could not deliver error frame: {e}");
        }
    }

    fn value(&mut self, name: &str, v: &BigUint) {
        self.report.values.insert(name.to_owned(), v.to_string());
    }

    fn sample_y(&self) -> BigUint {
        self.shared
            .config
            .nonce
            .clone()
            .unwrap_or_else(|| sample_nonce(&mut rand::thread_rng(), &self.shared.config.params))
    }

    fn store(&self) -> std::sync::MutexGuard<'_, VerifierStore> {
        self.shared.store.lock().unwrap_or_else(|e| e.into_inner())
    }
}

fn wire_error_code(e: &WireError) -> Option<ErrorCode> {
    match e {
        WireError::VersionMismatch(_) => Some(ErrorCode::VersionMismatch),
        WireError::Malformed(_) | WireError::TooLarge => Some(ErrorCode::MalformedFrame),
        WireError::Io(_) => None,
    }
}

fn handle_connection(stream: TcpStream, shared: &Shared) {
    let peer = stream
        .peer_addr()
        .map(|a| a.to_string())
        .unwrap_or_else(|_| "?".into());
    let _ = stream.set_read_timeout(Some(shared.config.io_timeout));
    let _ = stream.set_write_timeout(Some(shared.config.io_timeout));
    let cfg = &shared.config;
    let mut conn = ServerConn {
        stream,
        shared,
        report: SessionReport {
            scheme: cfg.scheme,
            role: Role::Server,
            params: cfg.params.clone(),
            transcript: Transcript::default(),
            key_a: None,
            key_b: None,
            auth_a_ok: false,
            auth_b_ok: false,
            counters: Counters::default(),
            flags: Vec::new(),
            values: Default::default(),
            error: None,
        },
        tally: Tally::default(),
    };

    let first = match conn.recv() {
        Ok(f) => f,
        Err(e) => {
            warn!("{peer}: bad first frame: {e}");
            if let Some(code) = wire_error_code(&e) {
                conn.reject(code, e.to_string());
            }
            return;
        }
    };
    match first {
        Frame::Register { id_a, id_b, verifier } => {
            enroll(&mut conn, id_a, id_b, verifier);
            return;
        }
        Frame::Msg1 { q, g, id_a, t_a } => {
            if &q != cfg.params.q() || &g != cfg.params.g() {
                conn.reject(
                    ErrorCode::ParamMismatch,
                    format!("server uses q={} g={}", cfg.params.q(), cfg.params.g()),
                );
            } else {
                session(&mut conn, id_a, t_a);
            }
        }
        other => conn.reject(
            ErrorCode::MalformedFrame,
            format!("expected MSG1, got {}", other.name()),
        ),
    }
    let server_tally = conn.tally;
    conn.report.counters = Counters::from_parts(Tally::default(), server_tally, &conn.report.transcript);
    if let Some(log) = &shared.log {
        if let Err(e) = log.append(&conn.report) {
            warn!("session log write failed: {e}");
        }
    }
    match &conn.report.error {
        None => info!("{peer}: session complete"),
        Some(e) => info!("{peer}: session failed: {e}"),
    }
}

fn enroll(conn: &mut ServerConn<'_>, id_a: BigUint, id_b: BigUint, verifier: BigUint) {
    if !conn.shared.config.enroll {
        conn.reject(ErrorCode::MalformedFrame, "enrollment is disabled on this server");
        return;
    }
    if !conn.shared.config.params.contains(&verifier) {
        conn.reject(ErrorCode::MalformedFrame, "verifier is not in Z_q^*");
        return;
    }
    warn!("enrolling ({id_a}, {id_b}): verifier received in the clear");
    let record = crate::credentials::VerifierRecord { id_a, id_b, verifier };
    let result = {
        let mut store = conn.store();
        store.insert(record).and_then(|_| match &conn.shared.config.store_path {
            Some(p) => store.save(p),
            None => Ok(()),
        })
    };
    match result {
        Ok(()) => {
            let _ = conn.send(Frame::Ok);
        }
        Err(e) => conn.reject(ErrorCode::MalformedFrame, e.to_string()),
    }
}

fn session(conn: &mut ServerConn<'_>, id_a: BigUint, t_a: BigUint) {
    let cfg = &conn.shared.config;
    let record = {
        let store = conn.store();
        if store.failures(&id_a) >= cfg.max_fail {
            drop(store);
            conn.reject(ErrorCode::Throttled, "too many consecutive failures");
            return;
        }
        store.lookup(&id_a, &cfg.id_b)
    };
    let record = match record {
        Ok(r) => r,
        Err(e) => {
            conn.reject(ErrorCode::UnknownIdentity, e.to_string());
            return;
        }
    };
    conn.value("T_A", &t_a);

    let result = match cfg.scheme {
        Scheme::Proposed => proposed_session(conn, &record, t_a),
        Scheme::Lky => lky_session(conn, &record, t_a),
    };
    match result {
        Ok(()) => {
            conn.report.auth_b_ok = true;
            conn.store().clear_failures(&id_a);
        }
        Err(Step::Rejected(ProtocolError::AuthFail)) => {
            let n = conn.store().record_failure(&id_a);
            conn.reject(ErrorCode::AuthFail, format!("confirmation mismatch ({n} consecutive)"));
        }
        Err(Step::Rejected(e)) => conn.reject(ErrorCode::MalformedFrame, e.to_string()),
        Err(Step::Wire(e)) => match wire_error_code(&e) {
            Some(code) => conn.reject(code, e.to_string()),
            None => conn.report.error = Some(format!("connection: {e}")),
        },
        Err(Step::Unexpected(name)) => {
            conn.reject(ErrorCode::MalformedFrame, format!("expected MSG3, got {name}"))
        }
    }
}

enum Step {
    Rejected(ProtocolError),
    Wire(WireError),
    Unexpected(&'static str),
}

impl From<ProtocolError> for Step {
    fn from(e: ProtocolError) -> Self {
        Step::Rejected(e)
    }
}

impl From<WireError> for Step {
    fn from(e: WireError) -> Self {
        Step::Wire(e)
    }
}

fn expect_msg3(conn: &mut ServerConn<'_>) -> Result<BigUint, Step> {
    match conn.recv()? {
        Frame::Msg3 { d_a } => Ok(d_a),
        other => Err(Step::Unexpected(other.name())),
    }
}

fn proposed_session(
    conn: &mut ServerConn<'_>,
    record: &crate::credentials::VerifierRecord,
    t_a: BigUint,
) -> Result<(), Step> {
    let cfg = &conn.shared.config;
    let msg1 = PropMsg1 {
        id_a: record.id_a.clone(),
        t_a,
    };
    let (m2, mut server) = loop {
        let y = conn.sample_y();
        match PropServer::respond(&msg1, record, &cfg.params, &cfg.hash, &y) {
            Err(ProtocolError::RetryNonce) if cfg.nonce.is_none() => continue,
            other => break other?,
        }
    };
    conn.value("T_B", &m2.t_b);
    conn.value("F_A", server.expected_confirmation());
    conn.send(Frame::Msg2 { t_b: m2.t_b })?;
    let d_a = expect_msg3(conn)?;
    let finished = server.finish(&PropMsg3 { d_a });
    conn.tally = server.tally();
    let (m4, key) = finished?;
    conn.value("E_B", &m4.e_b);
    conn.value("key_B", key.value());
    conn.report.key_b = Some(key.value().clone());
    conn.send(Frame::Msg4 { e_b: m4.e_b })?;
    Ok(())
}

fn lky_session(
    conn: &mut ServerConn<'_>,
    record: &crate::credentials::VerifierRecord,
    t_a: BigUint,
) -> Result<(), Step> {
    let cfg = &conn.shared.config;
    let msg1 = LkyMsg1 {
        id_a: record.id_a.clone(),
        t_a: MaskedValue::from_biguint(&t_a, &cfg.params)
            .map_err(|_| ProtocolError::UnmaskOutOfRange)?,
    };
    let (m2, mut server) = loop {
        let y = conn.sample_y();
        match LkyServer::respond(&msg1, record, &cfg.params, &cfg.hash, &y) {
            Err(ProtocolError::RetryNonce) if cfg.nonce.is_none() => continue,
            other => break other?,
        }
    };
    let t_b = m2.t_b.to_biguint();
    conn.value("T_B", &t_b);
    conn.value("d_B", &m2.d_b);
    conn.send(Frame::LkyMsg2 { t_b, d_b: m2.d_b })?;
    let d_a = expect_msg3(conn)?;
    let finished = server.finish(&LkyMsg3 { d_a });
    conn.tally = server.tally();
    let key = finished?;
    conn.value("key_B", key.value());
    conn.report.key_b = Some(key.value().clone());
    conn.send(Frame::Ok)?;
    Ok(())
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot connect to {addr}: {source}")]
    Connect { addr: String, source: io::Error },
    #[error("timed out waiting for the server")]
    Timeout,
    #[error("connection: {0}")]
    Io(io::Error),
    #[error("bad frame from server: {0}")]
    Wire(WireError),
    #[error("server rejected the session: {code}: {detail}")]
    Rejected { code: ErrorCode, detail: String },
    #[error("expected {expected} from server, got {got}")]
    Unexpected { expected: &'static str, got: &'static str },
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("q is too large for the pairing check; pass --skip-server-auth")]
    ServerAuthUnavailable,
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("session log: {0}")]
    Log(#[from] NetError),
}

impl From<WireError> for ClientError {
    fn from(e: WireError) -> Self {
        match e {
            WireError::Io(io) => match io.kind() {
                io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => ClientError::Timeout,
                _ => ClientError::Io(io),
            },
            other => ClientError::Wire(other),
        }
    }
}

impl ClientError {
    /// Authentication outcome (as opposed to transport or configuration).
    pub fn is_auth_failure(&self) -> bool {
        matches!(
            self,
            ClientError::Protocol(ProtocolError::AuthFail)
                | ClientError::Rejected {
                    code: ErrorCode::AuthFail | ErrorCode::Throttled | ErrorCode::UnknownIdentity,
                    ..
                }
        )
    }
}

#[derive(Debug, Clone)]
pub struct ClientOptions {
    pub scheme: Scheme,
    pub skip_server_auth: bool,
    pub timeout: Duration,
    /// Pins x (tests).
    pub nonce: Option<BigUint>,
    pub log_path: Option<PathBuf>,
}

impl Default for ClientOptions {
    fn default() -> Self {
        ClientOptions {
            scheme: Scheme::Proposed,
            skip_server_auth: false,
            timeout: DEFAULT_IO_TIMEOUT,
            nonce: None,
            log_path: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClientSession {
    pub key: SessionKey,
    pub report: SessionReport,
}

struct ClientConn {
    stream: TcpStream,
    transcript: Transcript,
}

impl ClientConn {
    fn send(&mut self, frame: Frame) -> Result<(), ClientError> {
        write_frame(&mut self.stream, &frame)?;
        self.transcript.push(Direction::AToB, frame);
        Ok(())
    }

    fn recv(&mut self) -> Result<Frame, ClientError> {
        let frame = read_frame(&mut self.stream)?;
        self.transcript.push(Direction::BToA, frame.clone());
        match frame {
            Frame::Error { code, detail } => Err(ClientError::Rejected { code, detail }),
            f => Ok(f),
        }
    }
}

fn unexpected(expected: &'static str, got: &Frame) -> ClientError {
    ClientError::Unexpected {
        expected,
        got: got.name(),
    }
}

/// Runs one session as entity A. The report is appended to the session log
/// whether or not the session succeeds.
pub fn client_connect(
    addr: &str,
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
    opts: &ClientOptions,
) -> Result<ClientSession, ClientError> {
    let table = match (opts.scheme, opts.skip_server_auth) {
        (Scheme::Proposed, false) if DlogTable::is_desk_scale(params) => Some(DlogTable::new(params)?),
        (Scheme::Proposed, false) => return Err(ClientError::ServerAuthUnavailable),
        _ => None,
    };
    let log = opts.log_path.as_deref().map(SessionLog::open).transpose()?;

    let sock = addr
        .to_socket_addrs()
        .and_then(|mut a| a.next().ok_or_else(|| io::Error::new(io::ErrorKind::NotFound, "no address")))
        .map_err(|source| ClientError::Connect { addr: addr.to_owned(), source })?;
    let stream = TcpStream::connect_timeout(&sock, opts.timeout)
        .map_err(|source| ClientError::Connect { addr: addr.to_owned(), source })?;
    stream.set_read_timeout(Some(opts.timeout)).map_err(ClientError::Io)?;
    stream.set_write_timeout(Some(opts.timeout)).map_err(ClientError::Io)?;
    let mut conn = ClientConn {
        stream,
        transcript: Transcript::default(),
    };

    let mut report = SessionReport {
        scheme: opts.scheme,
        role: Role::Client,
        params: params.clone(),
        transcript: Transcript::default(),
        key_a: None,
        key_b: None,
        auth_a_ok: false,
        auth_b_ok: false,
        counters: Counters::default(),
        flags: Vec::new(),
        values: Default::default(),
        error: None,
    };
    let mut tally = Tally::default();
    let auth = match &table {
        Some(t) => ServerAuth::Pairing(t),
        None => ServerAuth::Skip,
    };
    let result = match opts.scheme {
        Scheme::Proposed => proposed_client(&mut conn, creds, params, hash, opts, auth, &mut report, &mut tally),
        Scheme::Lky => lky_client(&mut conn, creds, params, hash, opts, &mut report, &mut tally),
    };
    report.transcript = conn.transcript;
    report.counters = Counters::from_parts(tally, Tally::default(), &report.transcript);
    match &result {
        Ok(key) => {
            report.auth_a_ok = true;
            report.auth_b_ok = true;
            report.key_a = Some(key.value().clone());
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    if let Some(log) = &log {
        log.append(&report).map_err(|e| ClientError::Log(NetError::Io(e)))?;
    }
    result.map(|key| ClientSession { key, report })
}

fn put(report: &mut SessionReport, name: &str, v: &BigUint) {
    report.values.insert(name.to_owned(), v.to_string());
}

fn x_nonce(opts: &ClientOptions, params: &GroupParams) -> BigUint {
    opts.nonce
        .clone()
        .unwrap_or_else(|| sample_nonce(&mut rand::thread_rng(), params))
}

#[allow(clippy::too_many_arguments)]
fn proposed_client(
    conn: &mut ClientConn,
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
    opts: &ClientOptions,
    auth: ServerAuth<'_>,
    report: &mut SessionReport,
    tally: &mut Tally,
) -> Result<SessionKey, ClientError> {
    let (m1, mut client) = loop {
        match PropClient::start(creds, params, hash, &x_nonce(opts, params)) {
            Err(ProtocolError::RetryNonce) if opts.nonce.is_none() => continue,
            other => break other?,
        }
    };
    put(report, "T_A", &m1.t_a);
    conn.send(Frame::Msg1 {
        q: params.q().clone(),
        g: params.g().clone(),
        id_a: m1.id_a,
        t_a: m1.t_a,
    })?;
    let t_b = match conn.recv()? {
        Frame::Msg2 { t_b } => t_b,
        other => return Err(unexpected("MSG2", &other)),
    };
    let m3 = client.confirm(&PropMsg2 { t_b });
    *tally = client.tally();
    let m3 = m3?;
    if client.saw_degenerate_t_b() {
        report.flags.push("degenerate T_B".into());
    }
    put(report, "d_A", &m3.d_a);
    conn.send(Frame::Msg3 { d_a: m3.d_a })?;
    let e_b = match conn.recv()? {
        Frame::Msg4 { e_b } => e_b,
        other => return Err(unexpected("MSG4", &other)),
    };
    put(report, "E_B", &e_b);
    let key = client.finish(&PropMsg4 { e_b }, auth)?;
    if !client.server_authenticated() {
        report.flags.push("server unauthenticated".into());
    }
    report.values.insert("key_A".into(), key.value().to_string());
    Ok(key)
}

fn lky_client(
    conn: &mut ClientConn,
    creds: &Credentials,
    params: &GroupParams,
    hash: &HashSpec,
    opts: &ClientOptions,
    report: &mut SessionReport,
    tally: &mut Tally,
) -> Result<SessionKey, ClientError> {
    let (m1, mut client) = loop {
        match LkyClient::start(creds, params, hash, &x_nonce(opts, params)) {
            Err(ProtocolError::RetryNonce) if opts.nonce.is_none() => continue,
            other => break other?,
        }
    };
    let t_a = m1.t_a.to_biguint();
    report.values.insert("T_A".into(), t_a.to_string());
    conn.send(Frame::Msg1 {
        q: params.q().clone(),
        g: params.g().clone(),
        id_a: m1.id_a,
        t_a,
    })?;
    let (t_b, d_b) = match conn.recv()? {
        Frame::LkyMsg2 { t_b, d_b } => (t_b, d_b),
        other => return Err(unexpected("LKY_MSG2", &other)),
    };
    let t_b = MaskedValue::from_biguint(&t_b, params).map_err(|_| ProtocolError::UnmaskOutOfRange)?;
    let done = client.finish(&LkyMsg2 { t_b, d_b });
    *tally = client.tally();
    let (m3, key) = done?;
    conn.send(Frame::Msg3 { d_a: m3.d_a })?;
    match conn.recv()? {
        Frame::Ok => {}
        other => return Err(unexpected("OK", &other)),
    }
    report.values.insert("key_A".into(), key.value().to_string());
    Ok(key)
}
