//! Reading and writing net files, with the dialect taken from the extension.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use grafcet_core::frontend::{parse_rules, serialize_rules, Diagnostic};
use grafcet_core::ir::{GrafcetNet, Hierarchy, HierarchyError, Violation};

use crate::graph::{parse_graph, serialize_graph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Rules,
    Graph,
}

impl Dialect {
    pub fn of(path: &Path) -> Option<Dialect> {
        match path.extension()?.to_str()? {
            "gcf" => Some(Dialect::Rules),
            "gcg" => Some(Dialect::Graph),
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: unknown file type (expected .gcf or .gcg)", path.display())]
    Dialect { path: PathBuf },
    #[error("{}: {} error(s)", path.display(), diagnostics.len())]
    Syntax { path: PathBuf, diagnostics: Vec<Diagnostic> },
    #[error("{}: {error}", path.display())]
    Hierarchy { path: PathBuf, error: HierarchyError },
    #[error("{}: cannot serialize an invalid net", path.display())]
    Invalid { path: PathBuf, violations: Vec<Violation> },
}

impl LoadError {
    /// File-level problems (missing or unreadable input) as opposed to
    /// problems with the content.
    pub fn is_io(&self) -> bool {
        matches!(self, LoadError::Io { .. } | LoadError::Dialect { .. })
    }

    /// One line per problem, positioned where possible.
    pub fn render(&self) -> String {
        match self {
            LoadError::Syntax { path, diagnostics } => {
                diagnostics.iter().map(|d| format!("{}:{d}", path.display())).collect::<Vec<_>>().join("\n")
            }
            LoadError::Invalid { path, violations } => {
                violations.iter().map(|v| format!("{}: error: {v}", path.display())).collect::<Vec<_>>().join("\n")
            }
            other => format!("error: {other}"),
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("net").to_string()
}

pub fn parse_net(name: &str, text: &str, dialect: Dialect) -> Result<GrafcetNet, Vec<Diagnostic>> {
    match dialect {
        Dialect::Rules => parse_rules(name, text),
        Dialect::Graph => parse_graph(text),
    }
}

pub fn render_net(net: &GrafcetNet, dialect: Dialect) -> Result<String, Vec<Violation>> {
    match dialect {
        Dialect::Rules => serialize_rules(net),
        Dialect::Graph => {
            let v = grafcet_core::ir::validate_structure(net);
            if v.is_empty() {
                Ok(serialize_graph(net))
            } else {
                Err(v)
            }
        }
    }
}

/// Loads one net. Rules files are named after their file stem.
pub fn load_net(path: &Path) -> Result<GrafcetNet, LoadError> {
    let dialect = Dialect::of(path).ok_or_else(|| LoadError::Dialect { path: path.into() })?;
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    parse_net(&stem(path), &text, dialect).map_err(|diagnostics| LoadError::Syntax { path: path.into(), diagnostics })
}

/// Loads a net and every sub-net its macrosteps link to. Links are paths
/// relative to the directory of the root file.
pub fn load_hierarchy(path: &Path) -> Result<Hierarchy, LoadError> {
    let root = load_net(path)?;
    let dir = path.parent().unwrap_or(Path::new("")).to_path_buf();
    Hierarchy::load(root, |link| load_net(&dir.join(link))).map_err(|e| match e {
        grafcet_core::ir::LoadError::Resolve { error, .. } => error,
        grafcet_core::ir::LoadError::Hierarchy(error) => LoadError::Hierarchy { path: path.into(), error },
    })
}

/// Writes `net` in the dialect `path`'s extension names.
pub fn write_net(path: &Path, net: &GrafcetNet) -> Result<(), LoadError> {
    let dialect = Dialect::of(path).ok_or_else(|| LoadError::Dialect { path: path.into() })?;
    let text = render_net(net, dialect).map_err(|violations| LoadError::Invalid { path: path.into(), violations })?;
    fs::write(path, text).map_err(|source| LoadError::Io { path: path.into(), source })
}
