use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use log::info;
use num_bigint::BigUint;

use pakebench::attacks::{dictionary_census, AttackReport, ObservedSession};
use pakebench::credentials::{register, Credentials};
use pakebench::group::{generate_params, validate_params, GroupParams};
use pakebench::harness::{
    bless_golden, check_golden, compare_efficiency, CredSpec, NonceSpec, ParamSpec, Runner,
    Scenario, SessionReport,
};
use pakebench::hash::{digest_hash, HashSpec};
use pakebench::net::{self, ClientError, ClientOptions, ServerConfig};
use pakebench::session::{Scheme, Tamper, TamperField};
use pakebench::store::VerifierStore;
use pakebench::wire::ErrorCode;

const EXIT_AUTH: u8 = 1;
const EXIT_PROTOCOL: u8 = 2;
const EXIT_CONFIG: u8 = 3;

/// Workbench for verifier-based password-authenticated key agreement.
#[derive(Parser)]
#[command(name = "pakebench", version)]
struct Cli {
    /// Session log (JSON lines).
    #[arg(long, env = "PAKE_LOG", global = true)]
    log: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or check group parameters.
    #[command(subcommand)]
    Params(ParamsCmd),
    /// Add a verifier to a store file.
    Register(RegisterArgs),
    /// Run entity B over TCP.
    Serve(ServeArgs),
    /// Run entity A against a server.
    Connect(ConnectArgs),
    /// Run one in-memory session.
    Simulate(SimulateArgs),
    /// Run a scripted attack.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Count exponentiations, messages and rounds for both schemes.
    Bench(BenchArgs),
    /// Check (or with --bless, rewrite) the golden vectors.
    Golden(GoldenArgs),
}

#[derive(Subcommand)]
enum ParamsCmd {
    /// Print `q` and `g`, one per line.
    Gen {
        #[arg(long)]
        bits: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a params file.
    Check { file: PathBuf },
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Params file (q then g); the 13/6 example group if omitted.
    #[arg(long)]
    params: Option<PathBuf>,
    /// toy-sum, sha256 or sha512/256.
    #[arg(long, default_value = "toy-sum")]
    hash: HashSpec,
}

#[derive(Args, Clone)]
struct CredOpts {
    /// Decimal integer, or any other string (mapped through SHA-256).
    #[arg(long, default_value = "9")]
    id_a: String,
    #[arg(long, default_value = "12")]
    id_b: String,
    #[arg(long, default_value = "10")]
    password: String,
}

#[derive(Args)]
struct RegisterArgs {
    #[arg(long)]
    id_a: String,
    #[arg(long)]
    id_b: String,
    #[arg(long)]
    password: String,
    #[arg(long)]
    store: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:7878")]
    listen: String,
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    params: PathBuf,
    /// This server's identity.
    #[arg(long, default_value = "12")]
    id_b: String,
    /// Consecutive failures before an identity is throttled.
    #[arg(long, default_value_t = net::DEFAULT_MAX_FAIL)]
    max_fail: u32,
    /// Serve the LKY scheme instead (attack demos only).
    #[arg(long)]
    insecure_lky: bool,
    /// Accept REGISTER frames (verifiers travel in the clear).
    #[arg(long)]
    enroll: bool,
    #[arg(long, default_value = "toy-sum")]
    hash: HashSpec,
    #[arg(long, hide = true)]
    nonce: Option<BigUint>,
}

#[derive(Args)]
struct ConnectArgs {
    #[arg(long)]
    addr: String,
    #[arg(long)]
    id_a: String,
    #[arg(long)]
    id_b: String,
    #[arg(long)]
    password: String,
    /// Accept E_B without the pairing check (required above desk scale).
    #[arg(long)]
    skip_server_auth: bool,
    /// Talk to an --insecure-lky server.
    #[arg(long)]
    lky: bool,
    #[arg(long, default_value_t = 10_000)]
    timeout_ms: u64,
    #[arg(long, hide = true)]
    nonce: Option<BigUint>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args, Clone)]
struct NonceOpts {
    #[arg(long, requires = "y", conflicts_with = "seed")]
    x: Option<BigUint>,
    #[arg(long, requires = "x")]
    y: Option<BigUint>,
    /// Seed for sampled nonces.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "proposed")]
    scheme: Scheme,
    #[command(flatten)]
    nonces: NonceOpts,
    #[command(flatten)]
    creds: CredOpts,
    /// Password typed by A, if different from the registered one.
    #[arg(long)]
    client_password: Option<String>,
    #[arg(long)]
    skip_server_auth: bool,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    nonces: NonceOpts,
    #[command(flatten)]
    creds: CredOpts,
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Subcommand)]
enum AttackCmd {
    /// Impersonate A to an LKY server with a stolen verifier.
    StolenVerifierLky {
        /// Verifier the attacker holds (defaults to the real one).
        #[arg(long)]
        verifier: Option<BigUint>,
        #[command(flatten)]
        args: AttackArgs,
    },
    /// Same attack against the proposed scheme.
    StolenVerifierProposed {
        #[arg(long)]
        verifier: Option<BigUint>,
        #[command(flatten)]
        args: AttackArgs,
    },
    /// Rewrite one message field in flight.
    Mitm {
        #[arg(long, default_value = "proposed")]
        scheme: Scheme,
        /// T_A, T_B, d_A, d_B or E_B.
        #[arg(long)]
        field: TamperField,
        #[arg(long)]
        value: BigUint,
        #[command(flatten)]
        args: AttackArgs,
    },
    /// Offline password census over a recorded proposed-scheme session.
    Census {
        /// Comma-separated candidate passwords.
        #[arg(long, value_delimiter = ',')]
        dictionary: Vec<String>,
        #[command(flatten)]
        args: AttackArgs,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print CSV instead of the aligned table.
    #[arg(long)]
    csv: bool,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct GoldenArgs {
    /// Regenerate the vectors file from the current code.
    #[arg(long)]
    bless: bool,
    #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/golden/vectors.json"))]
    path: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl std::fmt::Display) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn config(message: impl std::fmt::Display) -> Failure {
    fail(EXIT_CONFIG, message)
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let log = cli.log.as_deref();
    match cli.command {
        Command::Params(cmd) => params_cmd(cmd),
        Command::Register(a) => register_cmd(a),
        Command::Serve(a) => serve_cmd(a, log),
        Command::Connect(a) => connect_cmd(a, log),
        Command::Simulate(a) => simulate_cmd(a, log),
        Command::Attack(a) => attack_cmd(a, log),
        Command::Bench(a) => bench_cmd(a),
        Command::Golden(a) => golden_cmd(a),
    }
}

/// Decimal integers are taken as-is; anything else is hashed.
fn parse_ident(text: &str, what: &str) -> Result<BigUint, Failure> {
    if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
        return text.parse().map_err(|e| config(format!("{what}: {e}")));
    }
    let n = digest_hash("sha256", &[text.as_bytes()]).map_err(config)?;
    info!("{what} {text:?} mapped to {n}");
    Ok(n)
}

fn parse_secret(text: &str) -> Result<BigUint, Failure> {
    if !text.is_empty() && text.bytes().all(|b| b.is_ascii_digit()) {
        return text.parse().map_err(|e| config(format!("password: {e}")));
    }
    digest_hash("sha256", &[text.as_bytes()]).map_err(config)
}

fn load_params(path: Option<&Path>) -> Result<GroupParams, Failure> {
    let params = match path {
        None => return Ok(GroupParams::example()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| config(format!("{}: {e}", p.display())))?;
            GroupParams::parse_file(&text).map_err(|e| config(format!("{}: {e}", p.display())))?
        }
    };
    validate_params(&params).map_err(|e| config(format!("invalid params: {e}")))?;
    Ok(params)
}

fn creds(c: &CredOpts) -> Result<Credentials, Failure> {
    Credentials::new(
        parse_ident(&c.id_a, "id_a")?,
        parse_ident(&c.id_b, "id_b")?,
        parse_secret(&c.password)?,
    )
    .map_err(config)
}

fn nonce_spec(n: &NonceOpts) -> NonceSpec {
    match (&n.x, &n.y) {
        (Some(x), Some(y)) => NonceSpec::Explicit {
            x: x.clone(),
            y: y.clone(),
        },
        _ => NonceSpec::Seeded {
            seed: n.seed.unwrap_or(0),
        },
    }
}

fn scenario(scheme: Scheme, common: &CommonOpts, c: &CredOpts, n: &NonceOpts) -> Result<Scenario, Failure> {
    let params = load_params(common.params.as_deref())?;
    let cr = creds(c)?;
    Ok(Scenario {
        scheme,
        params: ParamSpec::Explicit(params),
        creds: CredSpec {
            id_a: cr.id_a().clone(),
            id_b: cr.id_b().clone(),
            password: cr.password().clone(),
        },
        client_password: None,
        hash: common.hash.clone(),
        nonces: nonce_spec(n),
        tamper: None,
        attack: None,
        attacker_verifier: None,
        skip_server_auth: false,
    })
}

fn append_log<T: serde::Serialize>(log: Option<&Path>, value: &T) -> CliResult {
    if let Some(path) = log {
        let mut line = serde_json::to_string(value).map_err(|e| fail(EXIT_PROTOCOL, e))?;
        line.push('\n');
        fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| f.write_all(line.as_bytes()))
            .map_err(|e| config(format!("session log {}: {e}", path.display())))?;
    }
    Ok(())
}

fn params_cmd(cmd: ParamsCmd) -> CliResult {
    match cmd {
        ParamsCmd::Gen { bits, seed, out } => {
            let p = generate_params(bits, seed).map_err(config)?;
            match out {
                Some(path) => fs::write(&path, p.to_file_string()).map_err(config)?,
                None => print!("{}", p.to_file_string()),
            }
            Ok(())
        }
        ParamsCmd::Check { file } => {
            let p = load_params(Some(&file))?;
            println!("ok: q={} g={} ({} bits)", p.q(), p.g(), p.q().bits());
            Ok(())
        }
    }
}

fn register_cmd(a: RegisterArgs) -> CliResult {
    let params = load_params(a.common.params.as_deref())?;
    let c = Credentials::new(
        parse_ident(&a.id_a, "id_a")?,
        parse_ident(&a.id_b, "id_b")?,
        parse_secret(&a.password)?,
    )
    .map_err(config)?;
    let mut store = VerifierStore::load_or_default(&a.store).map_err(config)?;
    let record = register(&c, &params, &a.common.hash).map_err(config)?;
    let v = record.verifier.to_str_radix(16);
    store.insert(record).map_err(config)?;
    store.save(&a.store).map_err(config)?;
    println!("registered ({}, {}) v={v}", c.id_a(), c.id_b());
    Ok(())
}

fn serve_cmd(a: ServeArgs, log: Option<&Path>) -> CliResult {
    let params = load_params(Some(&a.params))?;
    let store = VerifierStore::load(&a.store).map_err(config)?;
    let mut cfg = ServerConfig::new(a.listen, params, parse_ident(&a.id_b, "id_b")?, store);
    cfg.hash = a.hash;
    cfg.store_path = Some(a.store);
    cfg.max_fail = a.max_fail;
    cfg.enroll = a.enroll;
    cfg.log_path = log.map(Path::to_owned);
    cfg.nonce = a.nonce;
    if a.insecure_lky {
        cfg.scheme = Scheme::Lky;
    }
    let handle = net::spawn(cfg).map_err(config)?;
    println!("listening on {}", handle.local_addr());
    let _ = std::io::stdout().flush();
    handle.join();
    Ok(())
}

fn client_exit(e: &ClientError) -> u8 {
    match e {
        _ if e.is_auth_failure() => EXIT_AUTH,
        ClientError::Rejected {
            code: ErrorCode::ParamMismatch,
            ..
        }
        | ClientError::ServerAuthUnavailable
        | ClientError::Log(_) => EXIT_CONFIG,
        _ => EXIT_PROTOCOL,
    }
}

fn connect_cmd(a: ConnectArgs, log: Option<&Path>) -> CliResult {
    let params = load_params(a.common.params.as_deref())?;
    let c = Credentials::new(
        parse_ident(&a.id_a, "id_a")?,
        parse_ident(&a.id_b, "id_b")?,
        parse_secret(&a.password)?,
    )
    .map_err(config)?;
    let opts = ClientOptions {
        scheme: if a.lky { Scheme::Lky } else { Scheme::Proposed },
        skip_server_auth: a.skip_server_auth,
        timeout: Duration::from_millis(a.timeout_ms),
        nonce: a.nonce,
        log_path: log.map(Path::to_owned),
    };
    match net::client_connect(&a.addr, &c, &params, &a.common.hash, &opts) {
        Ok(s) => {
            for flag in &s.report.flags {
                println!("flag: {flag}");
            }
            println!("key {}", s.key.to_hex());
            Ok(())
        }
        Err(e) => Err(fail(client_exit(&e), e)),
    }
}

fn print_report(r: &SessionReport) {
    println!("scheme {}  q={} g={}", r.scheme, r.params.q(), r.params.g());
    for entry in &r.transcript.0 {
        println!("  {:<5} {}", serde_json::to_value(entry.direction).unwrap().as_str().unwrap_or("?"), entry.frame.name());
    }
    for (k, v) in &r.values {
        println!("  {k} = {v}");
    }
    let show = |k: &Option<BigUint>| k.as_ref().map_or("-".to_string(), |v| v.to_string());
    println!("key_A {}  key_B {}", show(&r.key_a), show(&r.key_b));
    println!("A accepted B: {}  B accepted A: {}", r.auth_a_ok, r.auth_b_ok);
    let c = &r.counters;
    println!(
        "modexp client {} server {}  messages {}  round trips {}  bytes {}  hashes {}",
        c.modexp_client, c.modexp_server, c.messages, c.round_trips, c.bytes_on_wire, c.hash_evals
    );
    for f in &r.flags {
        println!("flag: {f}");
    }
    if let Some(e) = &r.error {
        println!("error: {e}");
    }
}

fn simulate_cmd(a: SimulateArgs, log: Option<&Path>) -> CliResult {
    let mut sc = scenario(a.scheme, &a.common, &a.creds, &a.nonces)?;
    sc.skip_server_auth = a.skip_server_auth;
    if let Some(p) = &a.client_password {
        sc.client_password = Some(parse_secret(p)?);
    }
    let report = Runner::new().run_honest_session(&sc).map_err(config)?;
    if a.json {
        println!("{}", report.to_json_line());
    } else {
        print_report(&report);
    }
    append_log(log, &report)?;
    if report.accepted() {
        Ok(())
    } else {
        Err(fail(EXIT_AUTH, report.error.as_deref().unwrap_or("session rejected")))
    }
}

fn print_attack(r: &AttackReport) {
    println!("attack {} on {}", r.attack, r.scheme);
    for entry in &r.transcript.0 {
        println!("  {}", entry.frame.name());
    }
    println!("verdict: {}", r.verdict());
    println!("{}", r.claim);
    let show = |k: &Option<pakebench::credentials::SessionKey>| {
        k.as_ref().map_or("-".to_string(), |v| v.value().to_string())
    };
    println!("attacker key {}  victim key {}", show(&r.attacker_key), show(&r.victim_key));
    println!("{}", r.notes);
}

fn attack_cmd(cmd: AttackCmd, log: Option<&Path>) -> CliResult {
    let mut runner = Runner::new();
    let (sc, json) = match cmd {
        AttackCmd::StolenVerifierLky { verifier, args } => {
            let mut sc = scenario(Scheme::Lky, &args.common, &args.creds, &args.nonces)?
                .with_attack("stolen-verifier-lky");
            sc.attacker_verifier = verifier;
            (sc, args.json)
        }
        AttackCmd::StolenVerifierProposed { verifier, args } => {
            let mut sc = scenario(Scheme::Proposed, &args.common, &args.creds, &args.nonces)?
                .with_attack("stolen-verifier-proposed");
            sc.attacker_verifier = verifier;
            (sc, args.json)
        }
        AttackCmd::Mitm {
            scheme,
            field,
            value,
            args,
        } => {
            let sc = scenario(scheme, &args.common, &args.creds, &args.nonces)?
                .with_attack("mitm")
                .with_tamper(Tamper::new(field, value));
            (sc, args.json)
        }
        AttackCmd::Census { dictionary, args } => return census_cmd(dictionary, args, log),
    };
    let report = runner.run_attack_scenario(&sc).map_err(config)?;
    if json {
        println!("{}", serde_json::to_string(&report).map_err(|e| fail(EXIT_PROTOCOL, e))?);
    } else {
        print_attack(&report);
    }
    append_log(log, &report)
}

fn census_cmd(dictionary: Vec<String>, args: AttackArgs, log: Option<&Path>) -> CliResult {
    let sc = scenario(Scheme::Proposed, &args.common, &args.creds, &args.nonces)?;
    let params = load_params(args.common.params.as_deref())?;
    let report = Runner::new().run_honest_session(&sc).map_err(config)?;
    append_log(log, &report)?;
    let observed = ObservedSession::from_transcript(&report.transcript)
        .ok_or_else(|| fail(EXIT_PROTOCOL, "recorded session did not complete"))?;
    let dict = dictionary
        .iter()
        .map(|p| parse_secret(p.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let census = dictionary_census(&observed, &sc.creds.id_b, &dict, &params, &args.common.hash)
        .map_err(config)?;
    if args.json {
        println!("{}", serde_json::to_string(&census).map_err(|e| fail(EXIT_PROTOCOL, e))?);
    } else {
        let list = |v: &[BigUint]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", ");
        println!("dictionary: {{{}}}", list(&census.dictionary));
        println!("consistent: {{{}}}", list(&census.consistent));
        println!("search space: {} (x', y') pairs", census.enumeration_bound);
        println!("claimed: off-line dictionary attack is beaten");
    }
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> CliResult {
    let params = load_params(a.common.params.as_deref())?;
    let table = compare_efficiency(&params, &a.common.hash, a.trials, a.seed)
        .map_err(|e| fail(EXIT_PROTOCOL, e))?;
    if a.csv {
        print!("{}", table.to_csv());
    } else {
        println!("q={} g={}, {} trials per scheme", params.q(), params.g(), a.trials);
        print!("{}", table.to_text());
    }
    Ok(())
}

fn golden_cmd(a: GoldenArgs) -> CliResult {
    let mut runner = Runner::new();
    if a.bless {
        let written = bless_golden(&mut runner, &a.path).map_err(config)?;
        println!("wrote {} vectors to {}", written.len(), a.path.display());
        return Ok(());
    }
    let checks = check_golden(&mut runner).map_err(config)?;
    let mut bad = 0;
    for c in &checks {
        if c.ok() {
            println!("ok       {}", c.name);
        } else {
            bad += 1;
            println!("MISMATCH {} digest {} (expected {})", c.name, c.actual_digest, c.expected_digest);
            for (k, want, got) in &c.value_mismatches {
                println!("         {k}: expected {want}, got {}", got.as_deref().unwrap_or("-"));
            }
        }
    }
    if bad == 0 {
        Ok(())
    } else {
        Err(fail(EXIT_PROTOCOL, format!("{bad} golden vector(s) differ")))
    }
}
