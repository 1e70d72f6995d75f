//! Server-side verifier file plus in-memory failure counters.
//!
//! The file is a `# pake-verifiers v1` header, then one `id_a<TAB>id_b<TAB>v`
//! line per entry: ids in decimal, `v` in lowercase hex, no leading zeros
//! anywhere.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_bigint::BigUint;
use num_traits::Num;
use thiserror::Error;

use crate::credentials::VerifierRecord;

pub const STORE_HEADER: &str = "# pake-verifiers v1";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("duplicate entry for ({id_a}, {id_b})")]
    DuplicateEntry { id_a: BigUint, id_b: BigUint },
    #[error("no verifier for ({id_a}, {id_b})")]
    UnknownIdentity { id_a: BigUint, id_b: BigUint },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl StoreError {
    fn parse(line: usize, reason: impl Into<String>) -> Self {
        StoreError::Parse {
            line,
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifierStore {
    entries: BTreeMap<(BigUint, BigUint), BigUint>,
    failures: HashMap<BigUint, u32>,
}

fn parse_canonical(field: &str, radix: u32) -> Option<BigUint> {
    let digits_ok = match radix {
        10 => field.bytes().all(|b| b.is_ascii_digit()),
        _ => field.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')),
    };
    if field.is_empty() || !digits_ok || (field.len() > 1 && field.starts_with('0')) {
        return None;
    }
    BigUint::from_str_radix(field, radix).ok()
}

impl VerifierStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, StoreError> {
        let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, l)) if l.trim_end_matches('\r') == STORE_HEADER => {}
            _ => return Err(StoreError::parse(1, format!("expected header {STORE_HEADER:?}"))),
        }
        let mut store = VerifierStore::new();
        let mut lines = lines.peekable();
        while let Some((n, raw)) = lines.next() {
            if raw.is_empty() && lines.peek().is_none() {
                break;
            }
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(StoreError::parse(n, format!("expected 3 tab-separated fields, got {}", fields.len())));
            }
            let id_a = parse_canonical(fields[0], 10)
                .ok_or_else(|| StoreError::parse(n, format!("bad id_a {:?}", fields[0])))?;
            let id_b = parse_canonical(fields[1], 10)
                .ok_or_else(|| StoreError::parse(n, format!("bad id_b {:?}", fields[1])))?;
            let v = parse_canonical(fields[2], 16)
                .ok_or_else(|| StoreError::parse(n, format!("bad verifier {:?}", fields[2])))?;
            if store.entries.contains_key(&(id_a.clone(), id_b.clone())) {
                return Err(StoreError::parse(n, format!("duplicate entry ({id_a}, {id_b})")));
            }
            store.entries.insert((id_a, id_b), v);
        }
        Ok(store)
    }

    pub fn load(path: &Path) -> Result<Self, StoreError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Loads `path`, or starts empty if it does not exist yet.
    pub fn load_or_default(path: &Path) -> Result<Self, StoreError> {
        match fs::read_to_string(path) {
            Ok(text) => Self::parse(&text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(e.into()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from(STORE_HEADER);
        out.push('\n');
        for ((a, b), v) in &self.entries {
            out.push_str(&format!("{a}\t{b}\t{}\n", v.to_str_radix(16)));
        }
        out
    }

    /// Writes via a sibling temp file and rename.
    pub fn save(&self, path: &Path) -> Result<(), StoreError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_text().as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn insert(&mut self, record: VerifierRecord) -> Result<(), StoreError> {
        let key = (record.id_a, record.id_b);
        if self.entries.contains_key(&key) {
            return Err(StoreError::DuplicateEntry {
                id_a: key.0,
                id_b: key.1,
            });
        }
        self.entries.insert(key, record.verifier);
        Ok(())
    }

    pub fn lookup(&self, id_a: &BigUint, id_b: &BigUint) -> Result<VerifierRecord, StoreError> {
        self.entries
            .get(&(id_a.clone(), id_b.clone()))
            .map(|v| VerifierRecord {
                id_a: id_a.clone(),
                id_b: id_b.clone(),
                verifier: v.clone(),
            })
            .ok_or_else(|| StoreError::UnknownIdentity {
                id_a: id_a.clone(),
                id_b: id_b.clone(),
            })
    }

    pub fn records(&self) -> impl Iterator<Item = VerifierRecord> + '_ {
        self.entries.iter().map(|((a, b), v)| VerifierRecord {
            id_a: a.clone(),
            id_b: b.clone(),
            verifier: v.clone(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Consecutive failures for `id_a` since its last success.
    pub fn failures(&self, id_a: &BigUint) -> u32 {
        self.failures.get(id_a).copied().unwrap_or(0)
    }

    pub fn record_failure(&mut self, id_a: &BigUint) -> u32 {
        let n = self.failures.entry(id_a.clone()).or_insert(0);
        *n += 1;
        *n
    }

    pub fn clear_failures(&mut self, id_a: &BigUint) {
        self.failures.remove(id_a);
    }
}
