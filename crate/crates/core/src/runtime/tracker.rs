//! Types of live locations during a run, for checking `Γ0; Γ ⊢ μ`.

use std::collections::BTreeMap;

use super::config::Configuration;
use super::semantics::{advance, Effect};
use crate::algebra::dual;
use crate::checker::{check_heap, HeapVerdict, TypeEnv};
use crate::syntax::{Name, Polarity, Type};

/// Follows opens and communications. Names mentioned by some leaf (plus
/// every live shared endpoint) form `Γ`; other allocated locations form `Γ0`.
#[derive(Clone, Debug, Default)]
pub struct EnvTracker {
    types: BTreeMap<Name, Type>,
}

impl EnvTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, u: &Name) -> Option<&Type> {
        self.types.get(u)
    }

    pub fn apply(&mut self, e: &Effect) {
        match e {
            Effect::OpenLinear { a, ta, b, tb } => {
                self.types.insert(Name::Ptr(a.clone()), Type::lin(ta.clone()));
                self.types.insert(Name::Ptr(b.clone()), Type::lin(tb.clone()));
            }
            Effect::OpenShared { a, ty } => {
                self.types.insert(Name::Ptr(a.clone()), Type::lin(ty.clone()));
                if let Ok(d) = dual(ty) {
                    self.types.insert(Name::Shared(a.clone()), Type::un(d));
                }
            }
            Effect::Send { loc, tag, tyargs } => self.advance(Name::Ptr(loc.clone()), Polarity::Out, tag, tyargs),
            Effect::Receive { loc, tag, tyargs } => self.advance(Name::Ptr(loc.clone()), Polarity::In, tag, tyargs),
            Effect::SendShared | Effect::Silent => {}
        }
    }

    fn advance(&mut self, u: Name, pol: Polarity, tag: &crate::Tag, tyargs: &[crate::syntax::EndpointType]) {
        if let Some(t) = self.types.get(&u) {
            if let Some(n) = advance(t, pol, tag, tyargs) {
                self.types.insert(u, n);
            }
        }
    }

    /// `(Γ0, Γ)` for the current configuration.
    pub fn envs(&self, c: &Configuration) -> (TypeEnv, TypeEnv) {
        let fns = c.free_names();
        let mut g0 = TypeEnv::new();
        let mut g = TypeEnv::new();
        for (u, t) in &self.types {
            if !c.heap.contains(u.symbol()) {
                continue;
            }
            if fns.contains(u) || u.is_shared() {
                g.insert(u.clone(), t.clone());
            } else {
                g0.insert(u.clone(), t.clone());
            }
        }
        (g0, g)
    }

    pub fn check(&self, c: &Configuration) -> HeapVerdict {
        let (g0, g) = self.envs(c);
        check_heap(&g0, &g, &c.heap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_process;
    use crate::runtime::semantics::{redexes, step};

    #[test]
    fn tracks_a_conversation() {
        let p = parse_process(
            "open(a: !m(lin end).end, b: ?m(lin end).end).open(c: end, d: end).(a!m(c).close(a) | b?m(x: lin end).(close(x) | close(b)) | close(d))",
        )
        .unwrap();
        let mut c = Configuration::initial(&p);
        let mut t = EnvTracker::new();
        for _ in 0..20 {
            let rs = redexes(&c);
            let Some(r) = rs.last() else { break };
            let s = step(&c, *r);
            t.apply(&s.effect);
            c = s.config;
            assert!(t.check(&c).is_ok(), "{c}: {:?}", t.check(&c));
        }
        assert!(redexes(&c).is_empty());
        assert_eq!(t.get(&Name::ptr("a")).unwrap().to_string(), "lin end");
    }

    #[test]
    fn leaked_heap_rejected() {
        let p = parse_process("open(a: !m(lin rec x.?m(lin x).end).end, b: rec x.?m(lin x).end).a!m(b).close(a)").unwrap();
        let mut c = Configuration::initial(&p);
        let mut t = EnvTracker::new();
        for _ in 0..2 {
            let s = step(&c, redexes(&c)[0]);
            t.apply(&s.effect);
            c = s.config;
        }
        assert!(!t.check(&c).is_ok());
    }
}
