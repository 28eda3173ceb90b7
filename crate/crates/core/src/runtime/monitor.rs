//! The well-behavedness monitor.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::config::Configuration;
use super::semantics::{analyze, Marker};
use crate::syntax::{Name, Process};
use crate::{Symbol, Tag};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum MonitorVerdict {
    #[serde(rename = "OK")]
    Ok,
    /// Quiescent with some receive still waiting.
    StuckOK,
    Leak { witness: Vec<Symbol> },
    IsolationViolation { loc: Symbol, leaves: (usize, usize) },
    Fault { description: String },
    CommError { leaf: usize, process: String, tag: Option<Tag> },
}

impl MonitorVerdict {
    /// OK and StuckOK.
    pub fn is_good(&self) -> bool {
        matches!(self, MonitorVerdict::Ok | MonitorVerdict::StuckOK)
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MonitorVerdict::Ok => "OK",
            MonitorVerdict::StuckOK => "StuckOK",
            MonitorVerdict::Leak { .. } => "Leak",
            MonitorVerdict::IsolationViolation { .. } => "IsolationViolation",
            MonitorVerdict::Fault { .. } => "Fault",
            MonitorVerdict::CommError { .. } => "CommError",
        }
    }
}

fn set<T: fmt::Display>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for MonitorVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MonitorVerdict::Ok | MonitorVerdict::StuckOK => f.write_str(self.kind()),
            MonitorVerdict::Leak { witness } => write!(f, "Leak({{{}}})", set(witness)),
            MonitorVerdict::IsolationViolation { loc, leaves: (i, j) } => {
                write!(f, "IsolationViolation({loc}, leaves {i} and {j})")
            }
            MonitorVerdict::Fault { description } => write!(f, "Fault({description})"),
            MonitorVerdict::CommError { leaf, process, tag } => match tag {
                Some(t) => write!(f, "CommError(leaf {leaf} `{process}`, {t})"),
                None => write!(f, "CommError(leaf {leaf} `{process}`)"),
            },
        }
    }
}

fn comm(c: &Configuration, leaf: usize, tag: Option<Tag>) -> MonitorVerdict {
    MonitorVerdict::CommError { leaf, process: c.leaves[leaf].to_string(), tag }
}

/// A leaf with no redex that is not a legitimate final form.
fn stuck_leaf(c: &Configuration, i: usize) -> Option<MonitorVerdict> {
    let head = |a: &Symbol| c.heap.get(a).and_then(|e| e.queue.first()).map(|m| m.tag.clone());
    match &c.leaves[i] {
        Process::Close(Name::Ptr(a)) | Process::Receive { subject: Name::Ptr(a), .. } => {
            head(a).map(|t| comm(c, i, Some(t)))
        }
        Process::Close(_) | Process::Receive { .. } => Some(comm(c, i, None)),
        Process::Send { tag, .. } => Some(comm(c, i, Some(tag.clone()))),
        _ => None,
    }
}

/// Checks the three conditions in the order: faults, unallocated names,
/// communication errors, leaks, isolation.
pub fn monitor(c: &Configuration) -> MonitorVerdict {
    let (rs, ms) = analyze(c);
    for m in &ms {
        if let Marker::Fault { description, .. } = m {
            return MonitorVerdict::Fault { description: description.clone() };
        }
    }
    let fns = c.free_names();
    let reached = c.heap.reach(&fns);
    let dom = c.heap.dom();
    if let Some(a) = reached.difference(&dom).next() {
        return MonitorVerdict::Fault { description: format!("{a} is not allocated") };
    }
    for m in &ms {
        if let Marker::CommError { leaf, tag } = m {
            return comm(c, *leaf, Some(tag.clone()));
        }
    }
    let active: BTreeSet<usize> = rs.iter().map(|r| r.leaf).collect();
    for i in 0..c.leaves.len() {
        if !active.contains(&i) {
            if let Some(v) = stuck_leaf(c, i) {
                return v;
            }
        }
    }
    let deficit: Vec<Symbol> = dom.difference(&reached).cloned().collect();
    if !deficit.is_empty() {
        return MonitorVerdict::Leak { witness: deficit };
    }
    let per_leaf: Vec<BTreeSet<Symbol>> = c.leaves.iter().map(|l| c.heap.reach(&l.free_names())).collect();
    for i in 0..per_leaf.len() {
        for j in i + 1..per_leaf.len() {
            if let Some(a) = per_leaf[i].intersection(&per_leaf[j]).next() {
                return MonitorVerdict::IsolationViolation { loc: a.clone(), leaves: (i, j) };
            }
        }
    }
    if rs.is_empty() && c.leaves.iter().any(|l| matches!(l, Process::Receive { .. })) {
        MonitorVerdict::StuckOK
    } else {
        MonitorVerdict::Ok
    }
}
