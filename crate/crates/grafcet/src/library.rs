//! On-disk catalog of verified nets: `<name>.gcf` holds the canonical text
//! and `<name>.manifest` its certification and digest.

use std::fs::{self, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use grafcet_core::frontend::{parse_rules, serialize_rules};
use grafcet_core::ir::{is_identifier, GrafcetNet, Violation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::report::{analyze, ReportError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certification {
    pub structure_ok: bool,
    pub conflict_free: bool,
    pub deadlock_free: bool,
    pub no_dead_transitions: bool,
    pub safe: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub digest: String,
    /// Seconds since the Unix epoch.
    pub verified_at: u64,
    pub certification: Certification,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogSummary {
    pub entry: CatalogEntry,
    /// Set when the stored text no longer matches the manifest.
    pub warning: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("catalog {} is locked by another writer ({} exists)", dir.display(), LOCK_FILE)]
    Locked { dir: PathBuf },
    #[error("{name} is already in the catalog with different content")]
    Collision { name: String },
    #[error("{0} is not in catalog")]
    Unknown(String),
    #[error("{name}: stored text does not match its manifest digest")]
    Corrupt { name: String },
    #[error("{name}: malformed manifest: {message}")]
    Manifest { name: String, message: String },
    #[error("library entries must be flat nets; flatten {0} first")]
    NotFlat(String),
    #[error("invalid entry name {0:?}")]
    BadName(String),
    #[error("invalid prefix {0:?}")]
    BadPrefix(String),
    #[error("prefix {0} collides with identifiers of the consuming net")]
    PrefixCollision(String),
    #[error("net is malformed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Analysis(#[from] ReportError),
}

pub const LOCK_FILE: &str = ".lock";

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io { path: path.into(), source }
}

pub fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// `SOURCE_DATE_EPOCH` when set, so catalogs can be built reproducibly.
fn now() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|v| v.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Advisory single-writer lock, released on drop.
struct Lock(PathBuf);

impl Lock {
    fn take(dir: &Path) -> Result<Lock, CatalogError> {
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Lock(path)),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CatalogError::Locked { dir: dir.into() }),
            Err(e) => Err(CatalogError::Io { path, source: e }),
        }
    }
}

impl Drop for Lock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

fn paths(dir: &Path, name: &str) -> (PathBuf, PathBuf) {
    (dir.join(format!("{name}.gcf")), dir.join(format!("{name}.manifest")))
}

/// Certifies `net` by running every analysis, then stores its canonical
/// text and manifest under the net's name.
pub fn catalog_add(dir: &Path, net: &GrafcetNet, state_limit: usize) -> Result<CatalogEntry, CatalogError> {
    if !is_identifier(&net.name) || net.name.contains('.') {
        return Err(CatalogError::BadName(net.name.clone()));
    }
    if !net.is_flat() {
        return Err(CatalogError::NotFlat(net.name.clone()));
    }
    let text = serialize_rules(net).map_err(CatalogError::Invalid)?;
    let digest = digest(&text);
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let _lock = Lock::take(dir)?;
    let (gcf, manifest) = paths(dir, &net.name);
    if manifest.exists() {
        let existing = read_manifest(&manifest, &net.name)?;
        if existing.digest != digest {
            return Err(CatalogError::Collision { name: net.name.clone() });
        }
        if fs::read_to_string(&gcf).map(|t| self::digest(&t)).ok().as_deref() == Some(digest.as_str()) {
            return Ok(existing);
        }
    }
    let report = analyze(net, state_limit)?;
    let certification = Certification {
        structure_ok: true,
        conflict_free: report.conflicts().next().is_none(),
        deadlock_free: report.deadlocks.is_empty(),
        no_dead_transitions: report.dead_transitions.is_empty(),
        safe: report.unsafe_activations.is_empty(),
    };
    let entry = CatalogEntry { name: net.name.clone(), digest, verified_at: now(), certification };
    fs::write(&gcf, &text).map_err(io_err(&gcf))?;
    let mut json = serde_json::to_string_pretty(&entry).expect("manifest serializes");
    json.push('\n');
    fs::write(&manifest, json).map_err(io_err(&manifest))?;
    Ok(entry)
}

fn read_manifest(path: &Path, name: &str) -> Result<CatalogEntry, CatalogError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CatalogError::Manifest { name: name.into(), message: e.to_string() })
}

/// Entries sorted by name; tampered entries carry a warning.
pub fn catalog_list(dir: &Path) -> Result<Vec<CatalogSummary>, CatalogError> {
    let mut names = Vec::new();
    for item in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = item.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("manifest") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                names.push(stem.to_string());
            }
        }
    }
    names.sort();
    let mut out = Vec::new();
    for name in names {
        let (gcf, manifest) = paths(dir, &name);
        let entry = read_manifest(&manifest, &name)?;
        let warning = match fs::read_to_string(&gcf) {
            Ok(text) if digest(&text) == entry.digest => None,
            Ok(_) => Some(String::from("digest mismatch: stored text was modified after certification")),
            Err(e) => Some(format!("stored text unreadable: {e}")),
        };
        out.push(CatalogSummary { entry, warning });
    }
    Ok(out)
}

/// Reads an entry back, refusing tampered text.
pub fn catalog_get(dir: &Path, name: &str) -> Result<(CatalogEntry, GrafcetNet), CatalogError> {
    let (gcf, manifest) = paths(dir, name);
    if !manifest.exists() {
        return Err(CatalogError::Unknown(name.into()));
    }
    let entry = read_manifest(&manifest, name)?;
    let text = fs::read_to_string(&gcf).map_err(io_err(&gcf))?;
    if digest(&text) != entry.digest {
        return Err(CatalogError::Corrupt { name: name.into() });
    }
    let net = parse_rules(name, &text).map_err(|d| CatalogError::Manifest {
        name: name.into(),
        message: d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
    })?;
    Ok((entry, net))
}

/// Prefixes every step and transition identifier with `<prefix>.`.
pub fn prefix_net(net: &GrafcetNet, prefix: &str) -> GrafcetNet {
    let p = |s: &String| format!("{prefix}.{s}");
    let mut out = net.clone();
    for s in &mut out.steps {
        s.id = p(&s.id);
    }
    for t in &mut out.transitions {
        t.id = p(&t.id);
        t.pre = t.pre.iter().map(p).collect();
        t.post = t.post.iter().map(p).collect();
    }
    out.initial = out.initial.iter().map(p).collect();
    out.macrosteps = out.macrosteps.iter().map(|(k, v)| (p(k), v.clone())).collect();
    out
}

/// A private copy of entry `name` for use under `prefix`. With `consumer`
/// given, the prefix must not clash with any of its identifiers.
pub fn catalog_instantiate(
    dir: &Path,
    name: &str,
    prefix: &str,
    consumer: Option<&GrafcetNet>,
) -> Result<GrafcetNet, CatalogError> {
    if !is_identifier(prefix) || prefix.contains('.') {
        return Err(CatalogError::BadPrefix(prefix.into()));
    }
    if let Some(c) = consumer {
        let dotted = format!("{prefix}.");
        let ids = c.steps.iter().map(|s| &s.id).chain(c.transitions.iter().map(|t| &t.id));
        let signals = c.inputs.iter().chain(&c.outputs);
        if ids.chain(signals).any(|id| id == prefix || id.starts_with(&dotted)) {
            return Err(CatalogError::PrefixCollision(prefix.into()));
        }
    }
    let (_, net) = catalog_get(dir, name)?;
    Ok(prefix_net(&net, prefix))
}
