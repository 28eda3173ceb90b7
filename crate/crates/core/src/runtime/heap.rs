//! Heap of endpoints and their message queues.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::syntax::{EndpointType, Name};
use crate::{Symbol, Tag};

/// `m<T>(v)`; arguments are values (linear or unrestricted pointers).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Message {
    pub tag: Tag,
    pub tyargs: Vec<EndpointType>,
    pub args: Vec<Name>,
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag)?;
        if !self.tyargs.is_empty() {
            let ts: Vec<String> = self.tyargs.iter().map(|t| t.to_string()).collect();
            write!(f, "<{}>", ts.join(", "))?;
        }
        let vs: Vec<String> = self.args.iter().map(|v| v.to_string()).collect();
        write!(f, "({})", vs.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Endpoint {
    pub peer: Symbol,
    pub queue: Vec<Message>,
}

/// `a ↦ [b, Q]` cells keyed by location.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Heap {
    pub cells: BTreeMap<Symbol, Endpoint>,
}

impl Heap {
    pub fn new() -> Self {
        Heap::default()
    }

    pub fn get(&self, a: &Symbol) -> Option<&Endpoint> {
        self.cells.get(a)
    }

    pub fn contains(&self, a: &Symbol) -> bool {
        self.cells.contains_key(a)
    }

    pub fn dom(&self) -> BTreeSet<Symbol> {
        self.cells.keys().cloned().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Adds `a ↦ [peer, ε]`; false if `a` is already allocated.
    pub fn alloc(&mut self, a: Symbol, peer: Symbol) -> bool {
        if self.cells.contains_key(&a) {
            return false;
        }
        self.cells.insert(a, Endpoint { peer, queue: Vec::new() });
        true
    }

    /// Locations reachable from the linear pointers among `roots`:
    /// reflexive, then through value arguments sitting in queues.
    pub fn reach<'a>(&self, roots: impl IntoIterator<Item = &'a Name>) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        let mut todo: Vec<Symbol> = roots
            .into_iter()
            .filter_map(|n| match n {
                Name::Ptr(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        while let Some(a) = todo.pop() {
            if !out.insert(a.clone()) {
                continue;
            }
            if let Some(ep) = self.cells.get(&a) {
                for m in &ep.queue {
                    for v in &m.args {
                        if let Name::Ptr(c) = v {
                            todo.push(c.clone());
                        }
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Heap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return f.write_str("∅");
        }
        for (i, (a, ep)) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a} ↦ [{}, ", ep.peer)?;
            if ep.queue.is_empty() {
                f.write_str("ε")?;
            } else {
                let ms: Vec<String> = ep.queue.iter().map(|m| m.to_string()).collect();
                f.write_str(&ms.join("::"))?;
            }
            f.write_str("]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Symbol {
        Symbol::new(x)
    }

    fn msg(args: &[&str]) -> Message {
        Message { tag: Tag::new("m"), tyargs: vec![], args: args.iter().map(|a| Name::ptr(a)).collect() }
    }

    #[test]
    fn peer_is_not_reachable() {
        let mut h = Heap::new();
        h.alloc(s("a"), s("b"));
        h.alloc(s("b"), s("a"));
        h.cells.get_mut(&s("b")).unwrap().queue.push(msg(&["b"]));
        assert_eq!(h.reach([&Name::ptr("a")]), [s("a")].into());
        assert_eq!(h.to_string(), "a ↦ [b, ε], b ↦ [a, m(b)]");
    }

    #[test]
    fn chains_are_followed() {
        let mut h = Heap::new();
        for x in ["a", "c", "d"] {
            h.alloc(s(x), s(x));
        }
        h.cells.get_mut(&s("a")).unwrap().queue.push(msg(&["c"]));
        h.cells.get_mut(&s("c")).unwrap().queue.push(msg(&["d"]));
        assert_eq!(h.reach([&Name::ptr("a")]), [s("a"), s("c"), s("d")].into());
        assert!(h.reach([]).is_empty());
    }

    #[test]
    fn nothing_reachable_from_shared() {
        let mut h = Heap::new();
        h.alloc(s("a"), s("a"));
        assert!(h.reach([&Name::shared("a")]).is_empty());
    }

    #[test]
    fn double_alloc_rejected() {
        let mut h = Heap::new();
        assert!(h.alloc(s("a"), s("a")));
        assert!(!h.alloc(s("a"), s("b")));
    }
}
