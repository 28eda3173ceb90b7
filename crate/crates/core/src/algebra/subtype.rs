//! Algorithmic subtyping with a memoization context.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::symbol::{Fresh, TyVar};
use crate::syntax::{EndpointType, Polarity, Type};

/// Renames every binder of both types to a fresh, distinct variable.
/// The results satisfy the Barendregt convention and share no binder.
pub fn make_independent(t: &EndpointType, s: &EndpointType) -> (EndpointType, EndpointType) {
    let mut fresh = Fresh::above(t.max_stamp().max(s.max_stamp()));
    let t2 = t.rename_binders(&mut fresh);
    let s2 = s.rename_binders(&mut fresh);
    (t2, s2)
}

/// Checks the four independence conditions.
pub fn are_independent(t: &EndpointType, s: &EndpointType) -> bool {
    fn binders(t: &EndpointType) -> Vec<TyVar> {
        let mut out = Vec::new();
        t.visit(&mut |x| match x {
            EndpointType::Rec(a, _) => out.push(a.clone()),
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    out.extend(b.params.iter().cloned());
                }
            }
            _ => {}
        });
        out
    }
    let (bt, bs) = (binders(t), binders(s));
    let (st, ss): (BTreeSet<_>, BTreeSet<_>) = (bt.iter().cloned().collect(), bs.iter().cloned().collect());
    st.is_disjoint(&t.ftv())
        && ss.is_disjoint(&s.ftv())
        && st.len() == bt.len()
        && ss.len() == bs.len()
        && st.is_disjoint(&ss)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Axiom,
    RecLeft,
    RecRight,
    End,
    Var,
    Input,
    Output,
    Fail,
}

/// One judgment visited by the algorithm.
#[derive(Clone, Debug, Serialize)]
pub struct MemoStep {
    pub rule: Rule,
    pub left: EndpointType,
    pub right: EndpointType,
}

/// State of one subtyping query.
pub struct Subtyper {
    memo: HashSet<(EndpointType, EndpointType)>,
    map: BTreeMap<(TyVar, TyVar), TyVar>,
    fresh: Fresh,
    trace: Option<Vec<MemoStep>>,
}

impl Subtyper {
    /// A query on already independent types whose stamps are all `<= hi`.
    pub fn new(hi: u32, record: bool) -> Self {
        Subtyper {
            memo: HashSet::new(),
            map: BTreeMap::new(),
            fresh: Fresh::above(hi),
            trace: if record { Some(Vec::new()) } else { None },
        }
    }

    /// The fresh variable unifying `a` and `b`, created on first use.
    pub fn unify_var(&mut self, a: &TyVar, b: &TyVar) -> TyVar {
        let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
        if let Some(v) = self.map.get(&key) {
            return v.clone();
        }
        let v = self.fresh.named(&format!("{}_{}", key.0.name(), key.1.name()));
        self.map.insert(key, v.clone());
        v
    }

    pub fn memo_size(&self) -> usize {
        self.memo.len()
    }

    pub fn trace(&self) -> &[MemoStep] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn fresh_map(&self) -> &BTreeMap<(TyVar, TyVar), TyVar> {
        &self.map
    }

    fn log(&mut self, rule: Rule, t: &EndpointType, s: &EndpointType) {
        if let Some(tr) = self.trace.as_mut() {
            tr.push(MemoStep { rule, left: t.clone(), right: s.clone() });
        }
    }

    fn inst(&mut self, pairs: &[(TyVar, TyVar)], left: bool) -> BTreeMap<TyVar, EndpointType> {
        pairs
            .iter()
            .map(|(a, b)| {
                let g = self.unify_var(a, b);
                (if left { a.clone() } else { b.clone() }, EndpointType::Var(g))
            })
            .collect()
    }

    pub fn sub(&mut self, t: &EndpointType, s: &EndpointType) -> bool {
        let key = (t.canonical(), s.canonical());
        if self.memo.contains(&key) {
            self.log(Rule::Axiom, t, s);
            return true;
        }
        if let EndpointType::Rec(..) = t {
            self.memo.insert(key);
            self.log(Rule::RecLeft, t, s);
            let u = t.unfold().expect("rec");
            return self.sub(&u, s);
        }
        if let EndpointType::Rec(..) = s {
            self.memo.insert(key);
            self.log(Rule::RecRight, t, s);
            let u = s.unfold().expect("rec");
            return self.sub(t, &u);
        }
        match (t, s) {
            (EndpointType::End, EndpointType::End) => {
                self.log(Rule::End, t, s);
                true
            }
            (EndpointType::Var(a), EndpointType::Var(b)) if a == b => {
                self.log(Rule::Var, t, s);
                true
            }
            (EndpointType::Choice(p, bs), EndpointType::Choice(q, cs)) if p == q => {
                self.memo.insert(key);
                let input = *p == Polarity::In;
                self.log(if input { Rule::Input } else { Rule::Output }, t, s);
                // Input: every left tag on the right. Output: every right tag on the left.
                let (small, large) = if input { (bs, cs) } else { (cs, bs) };
                for x in small {
                    let Some(y) = large.iter().find(|y| y.tag == x.tag) else {
                        self.log(Rule::Fail, t, s);
                        return false;
                    };
                    let (bl, br) = if input { (x, y) } else { (y, x) };
                    if bl.params.len() != br.params.len() || bl.args.len() != br.args.len() {
                        self.log(Rule::Fail, t, s);
                        return false;
                    }
                    let pairs: Vec<(TyVar, TyVar)> =
                        bl.params.iter().cloned().zip(br.params.iter().cloned()).collect();
                    let ml = self.inst(&pairs, true);
                    let mr = self.inst(&pairs, false);
                    for (ta, sa) in bl.args.iter().zip(&br.args) {
                        let ta = Type { qual: ta.qual, body: ta.body.subst_many(&ml) };
                        let sa = Type { qual: sa.qual, body: sa.body.subst_many(&mr) };
                        let ok = if input { self.sub_q(&ta, &sa) } else { self.sub_q(&sa, &ta) };
                        if !ok {
                            return false;
                        }
                    }
                    let tc = bl.cont.subst_many(&ml);
                    let sc = br.cont.subst_many(&mr);
                    if !self.sub(&tc, &sc) {
                        return false;
                    }
                }
                true
            }
            _ => {
                self.log(Rule::Fail, t, s);
                false
            }
        }
    }

    pub fn sub_q(&mut self, t: &Type, s: &Type) -> bool {
        t.qual.le(s.qual) && self.sub(&t.body, &s.body)
    }
}

/// `T <= S`.
pub fn subtype(t: &EndpointType, s: &EndpointType) -> bool {
    if t == s {
        return true;
    }
    let (t, s) = make_independent(t, s);
    let hi = t.max_stamp().max(s.max_stamp());
    Subtyper::new(hi, false).sub(&t, &s)
}

/// `q T <= q' S`.
pub fn subtype_qualified(t: &Type, s: &Type) -> bool {
    t.qual.le(s.qual) && subtype(&t.body, &s.body)
}

/// Equality modulo renaming and folding.
pub fn equivalent(t: &EndpointType, s: &EndpointType) -> bool {
    t.alpha_eq(s) || (subtype(t, s) && subtype(s, t))
}

pub fn equivalent_qualified(t: &Type, s: &Type) -> bool {
    t.qual == s.qual && equivalent(&t.body, &s.body)
}

/// A recorded subtyping query.
pub struct TracedQuery {
    pub result: bool,
    pub left: EndpointType,
    pub right: EndpointType,
    pub trace: Vec<MemoStep>,
    pub memo_size: usize,
    pub subtyper: Subtyper,
}

pub fn subtype_traced(t: &EndpointType, s: &EndpointType) -> TracedQuery {
    let (t, s) = make_independent(t, s);
    let hi = t.max_stamp().max(s.max_stamp());
    let mut st = Subtyper::new(hi, true);
    let result = st.sub(&t, &s);
    TracedQuery {
        result,
        trace: st.trace().to_vec(),
        memo_size: st.memo_size(),
        left: t,
        right: s,
        subtyper: st,
    }
}

/// All subtrees of the infinite unfolding of `t`.
pub fn trees(t: &EndpointType) -> BTreeSet<EndpointType> {
    let mut out = BTreeSet::new();
    let mut todo = vec![t.clone()];
    while let Some(x) = todo.pop() {
        if !out.insert(x.clone()) {
            continue;
        }
        match &x {
            EndpointType::Rec(..) => todo.push(x.unfold().expect("rec")),
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    for a in &b.args {
                        todo.push(a.body.clone());
                    }
                    todo.push(b.cont.clone());
                }
            }
            _ => {}
        }
        if out.len() > 100_000 {
            break;
        }
    }
    out
}

fn binders(t: &EndpointType) -> Vec<TyVar> {
    t.btv().into_iter().collect()
}

/// Injective assignments of `n` elements of `pool`.
fn assignments(n: usize, pool: &[TyVar]) -> Vec<Vec<TyVar>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in assignments(n - 1, pool) {
        for p in pool {
            if !rest.contains(p) {
                let mut v = rest.clone();
                v.push(p.clone());
                out.push(v);
            }
        }
    }
    out
}

/// `instances(m, T, S)` for independent `t` and `s`, using and extending the
/// fresh-variable map of `st`. Results are canonical forms.
pub fn instances(st: &mut Subtyper, t: &EndpointType, s: &EndpointType) -> HashSet<EndpointType> {
    let (bt, bs) = (binders(t), binders(s));
    let mut out = HashSet::new();
    for (side, pool, own) in [(t, &bs, &bt), (s, &bt, &bs)] {
        let own_set: BTreeSet<TyVar> = own.iter().cloned().collect();
        for tree in trees(side) {
            let vars: Vec<TyVar> = tree.ftv().intersection(&own_set).cloned().collect();
            for choice in assignments(vars.len(), pool) {
                let map: BTreeMap<TyVar, EndpointType> = vars
                    .iter()
                    .zip(&choice)
                    .map(|(a, b)| (a.clone(), EndpointType::Var(st.unify_var(a, b))))
                    .collect();
                out.insert(tree.subst_many(&map).canonical());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_etype;

    fn t(s: &str) -> EndpointType {
        parse_etype(s).unwrap()
    }

    const T61: &str = "rec al.!a<al1>(lin !b<al2>(lin al2).al1).al";
    const S61: &str = "rec be.!a<be1>(lin !{b<be2>(lin be2).be1, c<be3>(lin be3).end}).be";

    #[test]
    fn worked_pair_holds_with_trace_in_instances() {
        let (tt, ss) = (t(T61), t(S61));
        assert!(are_independent(&tt, &ss));
        let mut q = subtype_traced(&tt, &ss);
        assert!(q.result);
        let rules: Vec<Rule> = q.trace.iter().map(|s| s.rule).collect();
        assert_eq!(&rules[..2], &[Rule::RecLeft, Rule::RecRight]);
        assert!(rules.contains(&Rule::Axiom));
        let inst = instances(&mut q.subtyper, &q.left, &q.right);
        for step in &q.trace {
            assert!(inst.contains(&step.left.canonical()), "{}", step.left);
            assert!(inst.contains(&step.right.canonical()), "{}", step.right);
        }
        assert!(!subtype(&ss, &tt));
    }

    #[test]
    fn more_methods_is_smaller() {
        let big = t("rec x.!{m1(lin end).x, m2(lin end).x, m3.x}");
        let small = t("rec x.!{m1(lin end).x, m3.x}");
        assert!(subtype(&big, &small));
        assert!(!subtype(&small, &big));
    }

    #[test]
    fn input_is_covariant_in_branches() {
        assert!(subtype(&t("?a.end"), &t("?{a.end, b.end}")));
        assert!(!subtype(&t("?{a.end, b.end}"), &t("?a.end")));
    }

    #[test]
    fn function_encoding_variance() {
        let f = |s: &str, r: &str| t(&format!("rec a.!Invoke(lin ?Arg(lin {s}).!Res(lin {r}).end).a"));
        let (wide, narrow) = ("?{p.end, q.end}", "?p.end");
        assert!(subtype(&f(wide, narrow), &f(narrow, wide)));
        assert!(!subtype(&f(narrow, wide), &f(wide, narrow)));
    }

    #[test]
    fn folding_is_invisible() {
        let a = t("rec x.!m.x");
        let b = t("!m.rec y.!m.!m.y");
        assert!(equivalent(&a, &b));
        assert!(!equivalent(&a, &t("!m.end")));
    }

    #[test]
    fn qualifiers() {
        let e = EndpointType::End;
        assert!(subtype_qualified(&Type::un(e.clone()), &Type::lin(e.clone())));
        assert!(!subtype_qualified(&Type::lin(e.clone()), &Type::un(e)));
    }

    #[test]
    fn free_variables_compare_by_name() {
        assert!(subtype(&t("!m(lin a).end"), &t("!m(lin a).end")));
        assert!(!subtype(&t("!m(lin a).end"), &t("!m(lin b).end")));
    }
}
