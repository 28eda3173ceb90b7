//! Configurations `(μ; P)` with `P` kept as a sorted multiset of leaves.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::heap::Heap;
use crate::syntax::{Name, Process};
use crate::Symbol;

/// Flattens `|`, drops `0` and sorts, giving the congruence normal form.
pub fn leaves(p: &Process) -> Vec<Process> {
    fn go(p: &Process, out: &mut Vec<Process>) {
        match p {
            Process::Idle => {}
            Process::Par(a, b) => {
                go(a, out);
                go(b, out);
            }
            other => out.push(other.clone()),
        }
    }
    let mut out = Vec::new();
    go(p, &mut out);
    out.sort();
    out
}

/// `normalize(P)`: the canonical right-nested composition of the leaves.
pub fn normalize(p: &Process) -> Process {
    Process::par_all(leaves(p))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Configuration {
    pub heap: Heap,
    pub leaves: Vec<Process>,
    /// Next stamp for renaming a location that would collide.
    #[serde(skip)]
    pub(crate) next: u32,
}

impl Configuration {
    /// `(∅; P)`.
    pub fn initial(p: &Process) -> Self {
        Configuration { heap: Heap::new(), leaves: leaves(p), next: p.max_stamp() + 1 }
    }

    pub fn new(heap: Heap, p: &Process) -> Self {
        let hi = heap.cells.iter().map(|(a, e)| a.stamp().max(e.peer.stamp())).max().unwrap_or(0);
        Configuration { heap, leaves: leaves(p), next: hi.max(p.max_stamp()) + 1 }
    }

    pub fn process(&self) -> Process {
        Process::par_all(self.leaves.clone())
    }

    /// Free names of all leaves.
    pub fn free_names(&self) -> BTreeSet<Name> {
        self.leaves.iter().flat_map(|l| l.free_names()).collect()
    }

    /// Locations an open in leaf `i` must avoid: the heap, names free in
    /// other leaves and linear names free in leaf `i` itself. A free `*a`
    /// in the opening leaf does not block `a`, so it ends up denoting the
    /// new endpoint.
    pub(crate) fn taken(&self, i: usize) -> BTreeSet<Symbol> {
        let mut s = self.heap.dom();
        for (j, l) in self.leaves.iter().enumerate() {
            for n in l.free_names() {
                if j != i || !n.is_shared() {
                    s.insert(n.symbol().clone());
                }
            }
        }
        s
    }

    pub(crate) fn fresh_loc(&mut self, base: &Symbol, avoid: &BTreeSet<Symbol>) -> Symbol {
        if !avoid.contains(base) {
            return base.clone();
        }
        loop {
            let cand = base.restamp(self.next);
            self.next += 1;
            if !avoid.contains(&cand) {
                return cand;
            }
        }
    }

    /// Key identifying the configuration up to renaming of bound names.
    pub fn key(&self) -> (Heap, Vec<Process>) {
        let mut ls: Vec<Process> = self.leaves.iter().map(|l| l.canonical()).collect();
        ls.sort();
        (self.heap.clone(), ls)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}; {})", self.heap, self.process())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_process;

    fn p(s: &str) -> Process {
        parse_process(s).unwrap()
    }

    #[test]
    fn idle_is_neutral() {
        assert_eq!(normalize(&p("close(a) | 0")), p("close(a)"));
        assert_eq!(normalize(&p("0 | 0")), Process::Idle);
    }

    #[test]
    fn associativity_and_commutativity() {
        let a = normalize(&p("(close(a) | close(b)) | close(c)"));
        let b = normalize(&p("close(c) | (close(b) | close(a))"));
        assert_eq!(a, b);
        assert_eq!(normalize(&a), a);
    }
}
