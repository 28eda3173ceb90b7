//! Duality: the dual operator and the coinductive duality check.

use std::collections::{BTreeMap, HashSet};

use crate::algebra::subtype::equivalent;
use crate::algebra::AlgebraError;
use crate::symbol::{Fresh, TyVar};
use crate::syntax::{Branch, EndpointType};

/// Variables occurring outside every prefix and not bound by an enclosing
/// `rec`. The dual is undefined when this is non-empty.
pub fn top_level_free(t: &EndpointType) -> Vec<TyVar> {
    fn go(t: &EndpointType, recs: &mut Vec<TyVar>, out: &mut Vec<TyVar>) {
        match t {
            EndpointType::End => {}
            EndpointType::Var(a) => {
                if !recs.contains(a) && !out.contains(a) {
                    out.push(a.clone());
                }
            }
            EndpointType::Rec(a, body) => {
                recs.push(a.clone());
                go(body, recs, out);
                recs.pop();
            }
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    let mut r: Vec<TyVar> = recs.iter().filter(|x| !b.params.contains(x)).cloned().collect();
                    go(&b.cont, &mut r, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut out);
    out
}

/// The dual endpoint type.
///
/// For `rec a.T` the body is inner-substituted with the meaning `rec a.T`
/// has at that point, that is with every enclosing recursion variable
/// already replaced by its own meaning. For non-nested recursion this is
/// exactly `rec a.co(T⟦rec a.T/a⟧)`.
pub fn dual(t: &EndpointType) -> Result<EndpointType, AlgebraError> {
    if let Some(a) = top_level_free(t).into_iter().next() {
        return Err(AlgebraError::TopLevelFreeVar(a));
    }
    Ok(dual_unchecked(t))
}

/// The dual without the top-level closure check; top-level free variables
/// are left in place.
pub fn dual_unchecked(t: &EndpointType) -> EndpointType {
    let mut fresh = Fresh::above(t.max_stamp());
    co(t, &BTreeMap::new(), &mut fresh)
}

fn co(t: &EndpointType, rho: &BTreeMap<TyVar, EndpointType>, fresh: &mut Fresh) -> EndpointType {
    match t {
        EndpointType::End | EndpointType::Var(_) => t.clone(),
        EndpointType::Rec(a, body) => {
            let meaning = if rho.is_empty() { t.clone() } else { t.subst_with(rho, fresh) };
            let inner = body.subst_inner(a, &meaning);
            let mut rho2 = rho.clone();
            rho2.insert(a.clone(), meaning);
            EndpointType::rec(a.clone(), co(&inner, &rho2, fresh))
        }
        EndpointType::Choice(pol, bs) => {
            let bs = bs
                .iter()
                .map(|b| {
                    let shadowed = b.params.iter().any(|p| rho.contains_key(p));
                    let cont = if shadowed {
                        let mut r = rho.clone();
                        for p in &b.params {
                            r.remove(p);
                        }
                        co(&b.cont, &r, fresh)
                    } else {
                        co(&b.cont, rho, fresh)
                    };
                    Branch { tag: b.tag.clone(), params: b.params.clone(), args: b.args.clone(), cont }
                })
                .collect();
            EndpointType::Choice(pol.flip(), bs)
        }
    }
}

/// Coinductive duality check, unfolding recursion on demand. Argument
/// types must coincide up to folding; type parameters are matched
/// positionally.
pub fn is_dual_pair(t: &EndpointType, s: &EndpointType) -> bool {
    let mut memo = HashSet::new();
    let hi = t.max_stamp().max(s.max_stamp());
    let mut fresh = Fresh::above(hi);
    dual_go(t, s, &mut memo, &mut fresh)
}

fn dual_go(
    t: &EndpointType,
    s: &EndpointType,
    memo: &mut HashSet<(EndpointType, EndpointType)>,
    fresh: &mut Fresh,
) -> bool {
    let key = (t.canonical(), s.canonical());
    if memo.contains(&key) {
        return true;
    }
    memo.insert(key);
    let t = t.unfold_all();
    let s = s.unfold_all();
    match (&t, &s) {
        (EndpointType::End, EndpointType::End) => true,
        (EndpointType::Choice(p, bs), EndpointType::Choice(q, cs)) if *q == p.flip() => {
            if bs.len() != cs.len() {
                return false;
            }
            for (b, c) in bs.iter().zip(cs) {
                if b.tag != c.tag || b.params.len() != c.params.len() || b.args.len() != c.args.len() {
                    return false;
                }
                // Rename c's parameters to b's.
                let mut m = BTreeMap::new();
                for (pb, pc) in b.params.iter().zip(&c.params) {
                    if pb != pc {
                        m.insert(pc.clone(), EndpointType::Var(pb.clone()));
                    }
                }
                let c_args: Vec<_> = c.args.iter().map(|x| (x.qual, x.body.subst_with(&m, fresh))).collect();
                for (x, (q, y)) in b.args.iter().zip(&c_args) {
                    if x.qual != *q || !equivalent(&x.body, y) {
                        return false;
                    }
                }
                let c_cont = c.cont.subst_with(&m, fresh);
                if !dual_go(&b.cont, &c_cont, memo, fresh) {
                    return false;
                }
            }
            true
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_etype;

    fn t(s: &str) -> EndpointType {
        parse_etype(s).unwrap()
    }

    #[test]
    fn dual_of_mapper() {
        let m = t("rec g.?Arg(lin a).!Res(lin b).g");
        assert!(dual(&m).unwrap().alpha_eq(&t("rec g.!Arg(lin a).?Res(lin b).g")));
    }

    #[test]
    fn dual_of_stream() {
        let s = t("rec g.!{Data(lin a).g, Eos.end}");
        assert!(dual(&s).unwrap().alpha_eq(&t("rec g.?{Data(lin a).g, Eos.end}")));
    }

    #[test]
    fn dual_keeps_inner_occurrences_as_meaning() {
        let s = t("rec a.!m<b>(lin a).end");
        let d = dual(&s).unwrap();
        assert!(d.alpha_eq(&t("rec a.?m<b>(lin rec a.!m<b>(lin a).end).end")), "{d}");
    }

    #[test]
    fn top_level_free_rejected() {
        assert!(matches!(dual(&t("!m.a")), Err(AlgebraError::TopLevelFreeVar(_))));
        assert!(dual(&t("!m(lin a).end")).is_ok());
        assert!(dual(&t("!m<a>.a")).is_err());
    }

    #[test]
    fn nested_recursion() {
        let s = t("rec a.!m(lin a).rec b.?n(lin a, lin b).b");
        let d = dual(&s).unwrap();
        assert!(is_dual_pair(&s, &d));
        assert!(equivalent(&dual(&d).unwrap(), &s));
    }

    #[test]
    fn dual_pair_rejects_mismatch() {
        assert!(!is_dual_pair(&t("!m.end"), &t("!m.end")));
        assert!(!is_dual_pair(&t("!m(lin end).end"), &t("?m(un end).end")));
        assert!(!is_dual_pair(&t("!{a.end, b.end}"), &t("?a.end")));
        assert!(is_dual_pair(&t("!m<x>(lin x).end"), &t("?m<y>(lin y).end")));
    }
}
