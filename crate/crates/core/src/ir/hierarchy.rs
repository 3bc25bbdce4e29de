use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::net::GrafcetNet;
use super::validate::{validate_structure, Violation};

/// A tree of nets linked through macrosteps. Sub-nets are keyed by the link
/// text their macrostep carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hierarchy {
    pub root: String,
    pub nets: BTreeMap<String, GrafcetNet>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    MissingRoot(String),
    MissingSubnet { macrostep: String, link: String },
    Cycle { link: String },
    Shared { link: String },
    Entry { net: String, count: usize },
    Exit { net: String, count: usize },
    Structure { net: String, violations: Vec<Violation> },
}

impl fmt::Display for HierarchyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HierarchyError::MissingRoot(r) => write!(f, "root net {r} is missing"),
            HierarchyError::MissingSubnet { macrostep, link } => {
                write!(f, "macrostep {macrostep} refers to missing sub-net {link:?}")
            }
            HierarchyError::Cycle { link } => write!(f, "cyclic macrostep reference through {link:?}"),
            HierarchyError::Shared { link } => {
                write!(f, "sub-net {link:?} is referenced by more than one macrostep; instantiate a copy per use")
            }
            HierarchyError::Entry { net, count } => {
                write!(f, "sub-net {net} must declare exactly one input step, found {count}")
            }
            HierarchyError::Exit { net, count } => {
                write!(f, "sub-net {net} must declare exactly one output step, found {count}")
            }
            HierarchyError::Structure { net, violations } => {
                write!(f, "net {net} is malformed: ")?;
                for (i, v) in violations.iter().enumerate() {
                    if i > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl core::error::Error for HierarchyError {}

/// Error from [`Hierarchy::load`]: either the resolver failed or the
/// assembled tree is malformed.
#[derive(Debug)]
pub enum LoadError<E> {
    Resolve { link: String, error: E },
    Hierarchy(HierarchyError),
}

impl<E: fmt::Display> fmt::Display for LoadError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Resolve { link, error } => write!(f, "cannot load sub-net {link:?}: {error}"),
            LoadError::Hierarchy(e) => e.fmt(f),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for LoadError<E> {}

impl Hierarchy {
    /// The single-level hierarchy holding just `net`.
    pub fn single(net: GrafcetNet) -> Hierarchy {
        let root = net.name.clone();
        let mut nets = BTreeMap::new();
        nets.insert(root.clone(), net);
        Hierarchy { root, nets }
    }

    /// Assembles a hierarchy by following macrostep links from `root`,
    /// fetching each referenced sub-net through `resolve`.
    pub fn load<E>(
        root: GrafcetNet,
        mut resolve: impl FnMut(&str) -> Result<GrafcetNet, E>,
    ) -> Result<Hierarchy, LoadError<E>> {
        let mut h = Hierarchy::single(root);
        let mut pending: Vec<String> = h.nets[&h.root].macrosteps.values().cloned().collect();
        while let Some(link) = pending.pop() {
            if h.nets.contains_key(&link) {
                continue;
            }
            let mut net = resolve(&link).map_err(|error| LoadError::Resolve { link: link.clone(), error })?;
            net.name = link.clone();
            pending.extend(net.macrosteps.values().cloned());
            h.nets.insert(link, net);
        }
        h.validate().map_err(LoadError::Hierarchy)?;
        Ok(h)
    }

    pub fn root_net(&self) -> &GrafcetNet {
        &self.nets[&self.root]
    }

    pub fn is_flat(&self) -> bool {
        self.root_net().is_flat()
    }

    /// Sub-net input and output step, once [`Hierarchy::validate`] passed.
    pub fn io_steps(net: &GrafcetNet) -> Result<(&str, &str), HierarchyError> {
        let entry = net.entry_steps();
        if entry.len() != 1 {
            return Err(HierarchyError::Entry { net: net.name.clone(), count: entry.len() });
        }
        let exit = net.exit_steps();
        if exit.len() != 1 {
            return Err(HierarchyError::Exit { net: net.name.clone(), count: exit.len() });
        }
        Ok((entry[0], exit[0]))
    }

    /// Checks the tree shape, link resolution, sub-net interfaces and the
    /// structure of every net reachable from the root.
    pub fn validate(&self) -> Result<(), HierarchyError> {
        let root = self.nets.get(&self.root).ok_or_else(|| HierarchyError::MissingRoot(self.root.clone()))?;
        let mut used = BTreeSet::new();
        let mut path = Vec::new();
        self.validate_net(&self.root, root, &mut used, &mut path)
    }

    fn validate_net<'a>(
        &'a self,
        key: &'a str,
        net: &'a GrafcetNet,
        used: &mut BTreeSet<&'a str>,
        path: &mut Vec<&'a str>,
    ) -> Result<(), HierarchyError> {
        let violations = validate_structure(net);
        if !violations.is_empty() {
            return Err(HierarchyError::Structure { net: net.name.clone(), violations });
        }
        path.push(key);
        // Visit in step order so the first reported problem is stable.
        for step in &net.steps {
            let Some(link) = net.macrosteps.get(&step.id) else { continue };
            if path.contains(&link.as_str()) {
                return Err(HierarchyError::Cycle { link: link.clone() });
            }
            if !used.insert(link.as_str()) {
                return Err(HierarchyError::Shared { link: link.clone() });
            }
            let sub = self
                .nets
                .get(link)
                .ok_or_else(|| HierarchyError::MissingSubnet { macrostep: step.id.clone(), link: link.clone() })?;
            Hierarchy::io_steps(sub)?;
            self.validate_net(link, sub, used, path)?;
        }
        path.pop();
        Ok(())
    }
}
