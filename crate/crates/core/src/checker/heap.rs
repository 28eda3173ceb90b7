//! Well-typedness of a heap against a pair of environments.

use std::collections::BTreeSet;

use serde::Serialize;

use super::env::TypeEnv;
use super::tail::{tail, MessageSpec};
use crate::algebra::{is_dual_pair, weight, TyVarSet};
use crate::runtime::heap::{Heap, Message};
use crate::syntax::{Name, Type};
use crate::Symbol;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum HeapVerdict {
    Ok,
    /// The first violated condition (numbered 1 to 5) and its witnesses.
    Violated { condition: u8, witnesses: Vec<String> },
}

impl HeapVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, HeapVerdict::Ok)
    }
}

fn violated(condition: u8, witnesses: Vec<String>) -> HeapVerdict {
    HeapVerdict::Violated { condition, witnesses }
}

fn lookup<'a>(g0: &'a TypeEnv, g: &'a TypeEnv, u: &Name) -> Option<&'a Type> {
    g0.get(u).or_else(|| g.get(u))
}

/// Message descriptors for a queue, or the offending value.
fn specs(g0: &TypeEnv, g: &TypeEnv, queue: &[Message]) -> Result<Vec<MessageSpec>, String> {
    let empty = TyVarSet::new();
    let mut out = Vec::new();
    for m in queue {
        let mut argtypes = Vec::new();
        for v in &m.args {
            let t = lookup(g0, g, v).ok_or_else(|| format!("{v} untyped"))?;
            if !weight(&empty, &t.body).is_finite() {
                return Err(format!("{v}: {t} has infinite weight"));
            }
            argtypes.push(t.clone());
        }
        if let Some(s) = m.tyargs.iter().find(|s| !weight(&empty, s).is_finite()) {
            return Err(format!("type argument {s} has infinite weight"));
        }
        out.push(MessageSpec { tag: m.tag.clone(), tyargs: m.tyargs.clone(), argtypes });
    }
    Ok(out)
}

/// Checks `Γ0; Γ ⊢ μ`. Structural conditions (1, 4, 5) are checked before
/// the typing conditions (2, 3), so an untyped or unreachable location is
/// reported as condition 4.
pub fn check_heap(g0: &TypeEnv, g: &TypeEnv, mu: &Heap) -> HeapVerdict {
    // 1: peers present, at most one nonempty queue.
    for (a, ep) in &mu.cells {
        match mu.get(&ep.peer) {
            None => return violated(1, vec![a.to_string()]),
            Some(peer) => {
                if peer.peer != *a {
                    return violated(1, vec![a.to_string(), ep.peer.to_string()]);
                }
                if ep.peer != *a && !ep.queue.is_empty() && !peer.queue.is_empty() {
                    return violated(1, vec![a.to_string(), ep.peer.to_string()]);
                }
            }
        }
    }
    // 4: the heap is exactly what the environments describe and can reach.
    let dom = mu.dom();
    let typed: BTreeSet<Symbol> = g0
        .iter()
        .chain(g.iter().filter(|(_, t)| t.is_lin()))
        .filter_map(|(u, _)| match u {
            Name::Ptr(a) => Some(a.clone()),
            _ => None,
        })
        .collect();
    let roots = g.dom();
    let reach = mu.reach(roots.iter());
    if dom != typed || dom != reach {
        let diff: BTreeSet<String> = dom.symmetric_difference(&reach).chain(dom.symmetric_difference(&typed)).map(|x| x.to_string()).collect();
        return violated(4, diff.into_iter().collect());
    }
    // 5: roots own disjoint regions.
    let rs: Vec<&Name> = roots.iter().collect();
    for i in 0..rs.len() {
        let ri = mu.reach([rs[i]]);
        for rj in &rs[i + 1..] {
            if let Some(c) = ri.intersection(&mu.reach([*rj])).next() {
                return violated(5, vec![rs[i].to_string(), rj.to_string(), c.to_string()]);
            }
        }
    }
    // 2 and 3: complementarity modulo queued messages.
    for (a, ep) in &mu.cells {
        let b = &ep.peer;
        let (cond, t_name, s_name, queue) = if b == a {
            (3u8, Name::Shared(a.clone()), Name::Ptr(a.clone()), &ep.queue)
        } else if ep.queue.is_empty() {
            (2u8, Name::Ptr(a.clone()), Name::Ptr(b.clone()), &mu.cells[b].queue)
        } else {
            continue;
        };
        let fail = |why: String| violated(cond, vec![a.to_string(), why]);
        let (Some(t), Some(s)) = (lookup(g0, g, &t_name), lookup(g0, g, &s_name)) else {
            return fail(format!("{t_name} or {s_name} untyped"));
        };
        let want_q = if cond == 3 { crate::syntax::Qualifier::Un } else { crate::syntax::Qualifier::Lin };
        if t.qual != want_q || !s.is_lin() {
            return fail("qualifier".into());
        }
        let sp = match specs(g0, g, queue) {
            Ok(sp) => sp,
            Err(why) => return fail(why),
        };
        match tail(&s.body, &sp) {
            Ok(rest) if is_dual_pair(&t.body, &rest) => {}
            Ok(rest) => return fail(format!("{t_name}: {t} is not dual to {rest}")),
            Err(e) => return fail(e.message),
        }
    }
    HeapVerdict::Ok
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_etype;
    use crate::runtime::heap::Message;
    use crate::Tag;

    fn sym(x: &str) -> Symbol {
        Symbol::new(x)
    }

    fn peers() -> Heap {
        let mut h = Heap::new();
        h.alloc(sym("a"), sym("b"));
        h.alloc(sym("b"), sym("a"));
        h
    }

    #[test]
    fn empty_heap() {
        assert!(check_heap(&TypeEnv::new(), &TypeEnv::new(), &Heap::new()).is_ok());
    }

    #[test]
    fn dual_peers_with_empty_queues() {
        let t = parse_etype("!m(lin end).?n.end").unwrap();
        let g: TypeEnv = [(Name::ptr("a"), Type::lin(t.clone())), (Name::ptr("b"), Type::lin(crate::algebra::dual(&t).unwrap()))]
            .into_iter()
            .collect();
        assert!(check_heap(&TypeEnv::new(), &g, &peers()).is_ok());
    }

    #[test]
    fn leaked_heap_fails_condition_four() {
        let mut h = peers();
        h.cells.get_mut(&sym("b")).unwrap().queue.push(Message { tag: Tag::new("m"), tyargs: vec![], args: vec![Name::ptr("b")] });
        let g: TypeEnv = [(Name::ptr("a"), Type::lin(crate::syntax::EndpointType::End))].into_iter().collect();
        let v = check_heap(&TypeEnv::new(), &g, &h);
        assert!(matches!(v, HeapVerdict::Violated { condition: 4, .. }), "{v:?}");
        let g0: TypeEnv = [(Name::ptr("b"), Type::lin(parse_etype("rec al.?m(lin al).end").unwrap()))].into_iter().collect();
        let v = check_heap(&g0, &g, &h);
        assert!(matches!(v, HeapVerdict::Violated { condition: 4, .. }), "{v:?}");
    }

    #[test]
    fn pending_message_matches_tail() {
        let mut h = peers();
        h.cells.get_mut(&sym("b")).unwrap().queue.push(Message { tag: Tag::new("m"), tyargs: vec![], args: vec![] });
        let g: TypeEnv = [
            (Name::ptr("a"), Type::lin(parse_etype("end").unwrap())),
            (Name::ptr("b"), Type::lin(parse_etype("?m.end").unwrap())),
        ]
        .into_iter()
        .collect();
        assert!(check_heap(&TypeEnv::new(), &g, &h).is_ok());
    }
}
