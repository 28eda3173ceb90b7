//! Endpoint types and qualified types.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::symbol::{Fresh, Symbol, Tag, TyVar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Qualifier {
    Un,
    Lin,
}

impl Qualifier {
    /// The qualifier preorder: `un <= lin`.
    pub fn le(self, other: Qualifier) -> bool {
        self == Qualifier::Un || other == Qualifier::Lin
    }
}

/// `Out` is the internal choice `!`, `In` the external choice `?`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Polarity {
    Out,
    In,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Out => Polarity::In,
            Polarity::In => Polarity::Out,
        }
    }

    pub fn sigil(self) -> char {
        match self {
            Polarity::Out => '!',
            Polarity::In => '?',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Branch {
    pub tag: Tag,
    pub params: Vec<TyVar>,
    pub args: Vec<Type>,
    pub cont: EndpointType,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EndpointType {
    End,
    Var(TyVar),
    Rec(TyVar, Box<EndpointType>),
    /// Branches are kept sorted by tag; tags are unique.
    Choice(Polarity, Vec<Branch>),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Type {
    pub qual: Qualifier,
    pub body: EndpointType,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SyntaxError {
    #[error("duplicate tag `{0}` in choice")]
    DuplicateTag(Tag),
    #[error("choice with no branches")]
    EmptyChoice,
    #[error("recursion variable `{0}` is not guarded by a prefix")]
    NotContractive(TyVar),
    #[error("unfold expects a recursive type")]
    NotRec,
    #[error("duplicate type parameter `{0}` in branch `{1}`")]
    DuplicateParam(TyVar, Tag),
}

impl Branch {
    pub fn new(tag: &str, params: Vec<TyVar>, args: Vec<Type>, cont: EndpointType) -> Self {
        Branch { tag: Tag::new(tag), params, args, cont }
    }

    /// Nullary message without type parameters.
    pub fn simple(tag: &str, args: Vec<Type>, cont: EndpointType) -> Self {
        Branch::new(tag, Vec::new(), args, cont)
    }
}

impl Type {
    pub fn lin(body: EndpointType) -> Type {
        Type { qual: Qualifier::Lin, body }
    }

    pub fn un(body: EndpointType) -> Type {
        Type { qual: Qualifier::Un, body }
    }

    pub fn is_lin(&self) -> bool {
        self.qual == Qualifier::Lin
    }

    pub fn alpha_eq(&self, other: &Type) -> bool {
        self.qual == other.qual && self.body.alpha_eq(&other.body)
    }

    pub fn subst(&self, a: &TyVar, s: &EndpointType) -> Type {
        Type { qual: self.qual, body: self.body.subst(a, s) }
    }

    pub fn max_stamp(&self) -> u32 {
        self.body.max_stamp()
    }
}

fn sort_branches(mut branches: Vec<Branch>) -> Result<Vec<Branch>, SyntaxError> {
    if branches.is_empty() {
        return Err(SyntaxError::EmptyChoice);
    }
    branches.sort_by(|a, b| a.tag.cmp(&b.tag));
    for w in branches.windows(2) {
        if w[0].tag == w[1].tag {
            return Err(SyntaxError::DuplicateTag(w[0].tag.clone()));
        }
    }
    for b in &branches {
        let mut seen = BTreeSet::new();
        for p in &b.params {
            if !seen.insert(p) {
                return Err(SyntaxError::DuplicateParam(p.clone(), b.tag.clone()));
            }
        }
    }
    Ok(branches)
}

impl EndpointType {
    pub fn var(name: &str) -> Self {
        EndpointType::Var(Symbol::new(name))
    }

    pub fn rec(a: TyVar, body: EndpointType) -> Self {
        EndpointType::Rec(a, Box::new(body))
    }

    /// Builds a choice, sorting branches and rejecting duplicate tags.
    pub fn choice(pol: Polarity, branches: Vec<Branch>) -> Result<Self, SyntaxError> {
        Ok(EndpointType::Choice(pol, sort_branches(branches)?))
    }

    pub fn output(branches: Vec<Branch>) -> Result<Self, SyntaxError> {
        Self::choice(Polarity::Out, branches)
    }

    pub fn input(branches: Vec<Branch>) -> Result<Self, SyntaxError> {
        Self::choice(Polarity::In, branches)
    }

    /// Single-branch choice; cannot fail.
    pub fn prefix(pol: Polarity, b: Branch) -> Self {
        EndpointType::Choice(pol, vec![b])
    }

    pub fn is_choice(&self) -> bool {
        matches!(self, EndpointType::Choice(..))
    }

    /// Free type variables.
    pub fn ftv(&self) -> BTreeSet<TyVar> {
        let mut out = BTreeSet::new();
        self.collect_ftv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_ftv(&self, bound: &mut Vec<TyVar>, out: &mut BTreeSet<TyVar>) {
        match self {
            EndpointType::End => {}
            EndpointType::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            EndpointType::Rec(a, body) => {
                bound.push(a.clone());
                body.collect_ftv(bound, out);
                bound.pop();
            }
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    let n = bound.len();
                    bound.extend(b.params.iter().cloned());
                    for t in &b.args {
                        t.body.collect_ftv(bound, out);
                    }
                    b.cont.collect_ftv(bound, out);
                    bound.truncate(n);
                }
            }
        }
    }

    /// Bound type variables: every binder occurrence of `rec` and `<..>`.
    pub fn btv(&self) -> BTreeSet<TyVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            EndpointType::Rec(a, _) => {
                out.insert(a.clone());
            }
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    out.extend(b.params.iter().cloned());
                }
            }
            _ => {}
        });
        out
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<TyVar> {
        let mut out = self.btv();
        self.visit(&mut |t| {
            if let EndpointType::Var(a) = t {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Pre-order traversal including argument types.
    pub fn visit<F: FnMut(&EndpointType)>(&self, f: &mut F) {
        f(self);
        match self {
            EndpointType::End | EndpointType::Var(_) => {}
            EndpointType::Rec(_, body) => body.visit(f),
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    for t in &b.args {
                        t.body.visit(f);
                    }
                    b.cont.visit(f);
                }
            }
        }
    }

    pub fn max_stamp(&self) -> u32 {
        let mut m = 0;
        self.visit(&mut |t| match t {
            EndpointType::Var(a) | EndpointType::Rec(a, _) => m = m.max(a.stamp()),
            EndpointType::Choice(_, bs) => {
                for b in bs {
                    for p in &b.params {
                        m = m.max(p.stamp());
                    }
                }
            }
            _ => {}
        });
        m
    }

    /// Node count, argument types included.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// Number of message prefixes (branches), argument types included.
    pub fn prefix_count(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |t| {
            if let EndpointType::Choice(_, bs) = t {
                n += bs.len();
            }
        });
        n
    }

    /// Capture-avoiding substitution `self[s/a]`.
    pub fn subst(&self, a: &TyVar, s: &EndpointType) -> EndpointType {
        let mut map = BTreeMap::new();
        map.insert(a.clone(), s.clone());
        self.subst_many(&map)
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn subst_many(&self, map: &BTreeMap<TyVar, EndpointType>) -> EndpointType {
        if map.is_empty() {
            return self.clone();
        }
        let mut hi = self.max_stamp();
        for (k, v) in map {
            hi = hi.max(k.stamp()).max(v.max_stamp());
        }
        let mut fresh = Fresh::above(hi);
        self.subst_with(map, &mut fresh)
    }

    /// Substitution with a caller-supplied stamp supply. The supply must be
    /// above every stamp in `self` and in the range of `map`.
    pub fn subst_with(&self, map: &BTreeMap<TyVar, EndpointType>, fresh: &mut Fresh) -> EndpointType {
        let range_fv: BTreeSet<TyVar> = map.values().flat_map(|v| v.ftv()).collect();
        let mut ctx = SubstCtx { range_fv: &range_fv, fresh };
        ctx.full(self, map)
    }

    /// Inner substitution `self⟦s/a⟧`: only occurrences inside argument
    /// types are replaced.
    pub fn subst_inner(&self, a: &TyVar, s: &EndpointType) -> EndpointType {
        let hi = self.max_stamp().max(a.stamp()).max(s.max_stamp());
        let mut fresh = Fresh::above(hi);
        let mut map = BTreeMap::new();
        map.insert(a.clone(), s.clone());
        let range_fv = s.ftv();
        let mut ctx = SubstCtx { range_fv: &range_fv, fresh: &mut fresh };
        ctx.inner(self, &map)
    }

    /// One-step unfolding of a recursive type.
    pub fn unfold(&self) -> Result<EndpointType, SyntaxError> {
        match self {
            EndpointType::Rec(a, body) => Ok(body.subst(a, self)),
            _ => Err(SyntaxError::NotRec),
        }
    }

    /// Unfolds leading `rec` binders until a choice, `end` or variable.
    pub fn unfold_all(&self) -> EndpointType {
        let mut t = self.clone();
        let mut guard = 0usize;
        while let EndpointType::Rec(..) = t {
            t = t.unfold().expect("rec");
            guard += 1;
            if guard > 10_000 {
                break;
            }
        }
        t
    }

    /// Canonical representative of the alpha class: bound variables are
    /// renamed to `%N` in binding order, free variables are kept.
    pub fn canonical(&self) -> EndpointType {
        let mut next = 0u32;
        self.canon(&mut Vec::new(), &mut next)
    }

    fn canon(&self, env: &mut Vec<(TyVar, TyVar)>, next: &mut u32) -> EndpointType {
        match self {
            EndpointType::End => EndpointType::End,
            EndpointType::Var(a) => match env.iter().rev().find(|(k, _)| k == a) {
                Some((_, v)) => EndpointType::Var(v.clone()),
                None => EndpointType::Var(a.clone()),
            },
            EndpointType::Rec(a, body) => {
                *next += 1;
                let c = Symbol::with_stamp("%", *next);
                env.push((a.clone(), c.clone()));
                let b = body.canon(env, next);
                env.pop();
                EndpointType::rec(c, b)
            }
            EndpointType::Choice(pol, bs) => {
                let bs = bs
                    .iter()
                    .map(|b| {
                        let n = env.len();
                        let params: Vec<TyVar> = b
                            .params
                            .iter()
                            .map(|p| {
                                *next += 1;
                                let c = Symbol::with_stamp("%", *next);
                                env.push((p.clone(), c.clone()));
                                c
                            })
                            .collect();
                        let args = b
                            .args
                            .iter()
                            .map(|t| Type { qual: t.qual, body: t.body.canon(env, next) })
                            .collect();
                        let cont = b.cont.canon(env, next);
                        env.truncate(n);
                        Branch { tag: b.tag.clone(), params, args, cont }
                    })
                    .collect();
                EndpointType::Choice(*pol, bs)
            }
        }
    }

    /// Structural equality modulo renaming of bound variables. Does not
    /// unfold recursion.
    pub fn alpha_eq(&self, other: &EndpointType) -> bool {
        self.canonical() == other.canonical()
    }

    /// Every `rec` binder is guarded by a prefix before it recurs.
    pub fn check_contractive(&self) -> Result<(), SyntaxError> {
        let mut err = None;
        self.visit(&mut |t| {
            if err.is_some() {
                return;
            }
            if let EndpointType::Rec(_, _) = t {
                let mut chain = Vec::new();
                let mut cur = t;
                while let EndpointType::Rec(a, body) = cur {
                    chain.push(a);
                    cur = body;
                }
                if let EndpointType::Var(v) = cur {
                    if chain.contains(&v) {
                        err = Some(SyntaxError::NotContractive(v.clone()));
                    }
                }
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Tag uniqueness, non-empty choices and contractivity.
    pub fn validate(&self) -> Result<(), SyntaxError> {
        let mut err = None;
        self.visit(&mut |t| {
            if err.is_some() {
                return;
            }
            if let EndpointType::Choice(_, bs) = t {
                if let Err(e) = sort_branches(bs.clone()) {
                    err = Some(e);
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        self.check_contractive()
    }

    /// Renames every binder to a stamp from `fresh`, so that no binder
    /// occurs twice and none coincides with a free variable.
    pub fn rename_binders(&self, fresh: &mut Fresh) -> EndpointType {
        self.rb(&mut Vec::new(), fresh)
    }

    fn rb(&self, env: &mut Vec<(TyVar, TyVar)>, fresh: &mut Fresh) -> EndpointType {
        match self {
            EndpointType::End => EndpointType::End,
            EndpointType::Var(a) => match env.iter().rev().find(|(k, _)| k == a) {
                Some((_, v)) => EndpointType::Var(v.clone()),
                None => EndpointType::Var(a.clone()),
            },
            EndpointType::Rec(a, body) => {
                let c = fresh.rename(a);
                env.push((a.clone(), c.clone()));
                let b = body.rb(env, fresh);
                env.pop();
                EndpointType::rec(c, b)
            }
            EndpointType::Choice(pol, bs) => {
                let bs = bs
                    .iter()
                    .map(|b| {
                        let n = env.len();
                        let params: Vec<TyVar> = b
                            .params
                            .iter()
                            .map(|p| {
                                let c = fresh.rename(p);
                                env.push((p.clone(), c.clone()));
                                c
                            })
                            .collect();
                        let args = b
                            .args
                            .iter()
                            .map(|t| Type { qual: t.qual, body: t.body.rb(env, fresh) })
                            .collect();
                        let cont = b.cont.rb(env, fresh);
                        env.truncate(n);
                        Branch { tag: b.tag.clone(), params, args, cont }
                    })
                    .collect();
                EndpointType::Choice(*pol, bs)
            }
        }
    }

    pub fn branch(&self, tag: &Tag) -> Option<&Branch> {
        match self {
            EndpointType::Choice(_, bs) => bs.iter().find(|b| &b.tag == tag),
            _ => None,
        }
    }
}

struct SubstCtx<'a> {
    range_fv: &'a BTreeSet<TyVar>,
    fresh: &'a mut Fresh,
}

impl SubstCtx<'_> {
    /// Enters a binder: drops it from the map and renames it if it would
    /// capture a free variable of the substituted types.
    fn bind(
        &mut self,
        v: &TyVar,
        map: &mut BTreeMap<TyVar, EndpointType>,
    ) -> TyVar {
        map.remove(v);
        if !map.is_empty() && self.range_fv.contains(v) {
            let nv = self.fresh.rename(v);
            map.insert(v.clone(), EndpointType::Var(nv.clone()));
            nv
        } else {
            v.clone()
        }
    }

    fn full(&mut self, t: &EndpointType, map: &BTreeMap<TyVar, EndpointType>) -> EndpointType {
        if map.is_empty() {
            return t.clone();
        }
        match t {
            EndpointType::End => EndpointType::End,
            EndpointType::Var(a) => map.get(a).cloned().unwrap_or_else(|| t.clone()),
            EndpointType::Rec(a, body) => {
                let mut m = map.clone();
                let na = self.bind(a, &mut m);
                EndpointType::rec(na, self.full(body, &m))
            }
            EndpointType::Choice(pol, bs) => {
                let bs = bs
                    .iter()
                    .map(|b| {
                        let mut m = map.clone();
                        let params: Vec<TyVar> = b.params.iter().map(|p| self.bind(p, &mut m)).collect();
                        let args = b
                            .args
                            .iter()
                            .map(|x| Type { qual: x.qual, body: self.full(&x.body, &m) })
                            .collect();
                        let cont = self.full(&b.cont, &m);
                        Branch { tag: b.tag.clone(), params, args, cont }
                    })
                    .collect();
                EndpointType::Choice(*pol, bs)
            }
        }
    }

    fn inner(&mut self, t: &EndpointType, map: &BTreeMap<TyVar, EndpointType>) -> EndpointType {
        if map.is_empty() {
            return t.clone();
        }
        match t {
            EndpointType::End | EndpointType::Var(_) => t.clone(),
            EndpointType::Rec(a, body) => {
                let mut m = map.clone();
                let na = self.bind(a, &mut m);
                // A renamed binder must still be renamed at top level.
                let body = if na != *a {
                    let renamed = self.rename_all(body, a, &na);
                    m.remove(a);
                    self.inner(&renamed, &m)
                } else {
                    self.inner(body, &m)
                };
                EndpointType::rec(na, body)
            }
            EndpointType::Choice(pol, bs) => {
                let bs = bs
                    .iter()
                    .map(|b| {
                        let mut m = map.clone();
                        let mut args: Vec<Type> = b.args.clone();
                        let mut cont = b.cont.clone();
                        let mut params = Vec::with_capacity(b.params.len());
                        for p in &b.params {
                            let np = self.bind(p, &mut m);
                            if np != *p {
                                m.remove(p);
                                for x in args.iter_mut() {
                                    x.body = self.rename_all(&x.body, p, &np);
                                }
                                cont = self.rename_all(&cont, p, &np);
                            }
                            params.push(np);
                        }
                        let args = args
                            .iter()
                            .map(|x| Type { qual: x.qual, body: self.full(&x.body, &m) })
                            .collect();
                        let cont = self.inner(&cont, &m);
                        Branch { tag: b.tag.clone(), params, args, cont }
                    })
                    .collect();
                EndpointType::Choice(*pol, bs)
            }
        }
    }

    /// Renames free `from` to the fresh `to`; no capture is possible.
    fn rename_all(&mut self, t: &EndpointType, from: &TyVar, to: &TyVar) -> EndpointType {
        let mut m = BTreeMap::new();
        m.insert(from.clone(), EndpointType::Var(to.clone()));
        let fv = BTreeSet::new();
        let mut ctx = SubstCtx { range_fv: &fv, fresh: self.fresh };
        ctx.full(t, &m)
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qualifier::Lin => f.write_str("lin"),
            Qualifier::Un => f.write_str("un"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.qual, self.body)
    }
}

fn fmt_branch(b: &Branch, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", b.tag)?;
    if !b.params.is_empty() {
        f.write_str("<")?;
        for (i, p) in b.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(">")?;
    }
    if !b.args.is_empty() {
        f.write_str("(")?;
        for (i, t) in b.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")?;
    }
    write!(f, ".{}", b.cont)
}

impl fmt::Display for EndpointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EndpointType::End => f.write_str("end"),
            EndpointType::Var(a) => write!(f, "{a}"),
            EndpointType::Rec(a, body) => write!(f, "rec {a}.{body}"),
            EndpointType::Choice(pol, bs) if bs.len() == 1 => {
                write!(f, "{}", pol.sigil())?;
                fmt_branch(&bs[0], f)
            }
            EndpointType::Choice(pol, bs) => {
                write!(f, "{}{{", pol.sigil())?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    fmt_branch(b, f)?;
                }
                f.write_str("}")
            }
        }
    }
}

impl Serialize for EndpointType {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for Type {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> TyVar {
        Symbol::new(n)
    }
    fn var(n: &str) -> EndpointType {
        EndpointType::var(n)
    }
    fn out1(tag: &str, params: &[&str], args: Vec<Type>, cont: EndpointType) -> EndpointType {
        EndpointType::prefix(
            Polarity::Out,
            Branch::new(tag, params.iter().map(|p| v(p)).collect(), args, cont),
        )
    }
    fn in1(tag: &str, params: &[&str], args: Vec<Type>, cont: EndpointType) -> EndpointType {
        EndpointType::prefix(
            Polarity::In,
            Branch::new(tag, params.iter().map(|p| v(p)).collect(), args, cont),
        )
    }

    #[test]
    fn ftv_btv_end() {
        assert!(EndpointType::End.ftv().is_empty());
        assert!(EndpointType::End.btv().is_empty());
    }

    #[test]
    fn ftv_btv_prefix_binders() {
        // !m<a>(lin ?m'<b>(lin g).a).end
        let inner = in1("m'", &["b"], vec![Type::lin(var("g"))], var("a"));
        let t = out1("m", &["a"], vec![Type::lin(inner)], EndpointType::End);
        assert_eq!(t.ftv(), [v("g")].into_iter().collect());
        assert!(t.btv().contains(&v("a")) && t.btv().contains(&v("b")));
    }

    #[test]
    fn ftv_btv_rec() {
        // rec a.!m<b>(lin a).a
        let t = EndpointType::rec(v("a"), out1("m", &["b"], vec![Type::lin(var("a"))], var("a")));
        assert!(t.ftv().is_empty());
        assert_eq!(t.btv(), [v("a"), v("b")].into_iter().collect());
    }

    #[test]
    fn subst_full_and_inner() {
        let s = out1("z", &[], vec![], EndpointType::End);
        let t = out1("m", &["b"], vec![Type::lin(var("a"))], var("a"));
        assert_eq!(t.subst(&v("a"), &s), out1("m", &["b"], vec![Type::lin(s.clone())], s.clone()));
        assert_eq!(t.subst_inner(&v("a"), &s), out1("m", &["b"], vec![Type::lin(s.clone())], var("a")));
        assert_eq!(var("a").subst(&v("a"), &EndpointType::End), EndpointType::End);
        assert_eq!(EndpointType::End.subst_inner(&v("a"), &s), EndpointType::End);
    }

    #[test]
    fn subst_inner_two_prefixes() {
        let s = EndpointType::End;
        let t = in1("m", &[], vec![Type::lin(var("a"))], in1("n", &[], vec![Type::lin(var("a"))], var("a")));
        let want = in1("m", &[], vec![Type::lin(s.clone())], in1("n", &[], vec![Type::lin(s.clone())], var("a")));
        assert_eq!(t.subst_inner(&v("a"), &s), want);
    }

    #[test]
    fn subst_bound_unchanged() {
        let t = EndpointType::rec(v("a"), out1("m", &[], vec![Type::lin(EndpointType::End)], var("a")));
        assert_eq!(t.subst(&v("a"), &var("q")), t);
    }

    #[test]
    fn subst_avoids_capture() {
        // (rec b.!m(lin a).b)[b/a] must not capture
        let t = EndpointType::rec(v("b"), out1("m", &[], vec![Type::lin(var("a"))], var("b")));
        let r = t.subst(&v("a"), &var("b"));
        assert_eq!(r.ftv(), [v("b")].into_iter().collect());
        // params too
        let t = out1("m", &["b"], vec![Type::lin(var("a"))], var("b"));
        let r = t.subst(&v("a"), &var("b"));
        assert_eq!(r.ftv(), [v("b")].into_iter().collect());
    }

    #[test]
    fn inner_subst_renames_rec_binder() {
        // (rec b.?m(lin a).b)⟦b/a⟧ : top-level b must stay bound
        let t = EndpointType::rec(v("b"), in1("m", &[], vec![Type::lin(var("a"))], var("b")));
        let r = t.subst_inner(&v("a"), &var("b"));
        assert_eq!(r.ftv(), [v("b")].into_iter().collect());
        if let EndpointType::Rec(nb, body) = &r {
            if let EndpointType::Choice(_, bs) = &**body {
                assert_eq!(bs[0].cont, EndpointType::Var(nb.clone()));
                assert_eq!(bs[0].args[0].body, var("b"));
                return;
            }
        }
        panic!("unexpected shape {r}");
    }

    #[test]
    fn unfold_examples() {
        let t = EndpointType::rec(v("a"), out1("m", &[], vec![Type::lin(EndpointType::End)], var("a")));
        assert_eq!(t.unfold().unwrap(), out1("m", &[], vec![Type::lin(EndpointType::End)], t.clone()));
        let t = EndpointType::rec(v("a"), in1("m", &["b"], vec![Type::lin(var("b"))], var("a")));
        assert_eq!(t.unfold().unwrap(), in1("m", &["b"], vec![Type::lin(var("b"))], t.clone()));
        assert_eq!(EndpointType::End.unfold(), Err(SyntaxError::NotRec));
    }

    #[test]
    fn alpha_equal_examples() {
        let t = EndpointType::rec(v("a"), out1("m", &[], vec![Type::lin(EndpointType::End)], var("a")));
        let s = EndpointType::rec(v("b"), out1("m", &[], vec![Type::lin(EndpointType::End)], var("b")));
        assert!(t.alpha_eq(&s));
        assert!(!t.alpha_eq(&t.unfold().unwrap()));
        assert!(!EndpointType::End.alpha_eq(&var("a")));
    }

    #[test]
    fn contractivity() {
        assert!(EndpointType::rec(v("a"), var("a")).check_contractive().is_err());
        let t = EndpointType::rec(v("a"), EndpointType::rec(v("b"), var("a")));
        assert!(t.check_contractive().is_err());
        let t = EndpointType::rec(v("a"), in1("m", &[], vec![Type::lin(var("a"))], EndpointType::End));
        assert!(t.check_contractive().is_ok());
    }

    #[test]
    fn duplicate_tags_rejected() {
        let b = || Branch::simple("m", vec![], EndpointType::End);
        assert!(EndpointType::output(vec![b(), b()]).is_err());
    }

    #[test]
    fn qualifier_order() {
        assert!(Qualifier::Un.le(Qualifier::Lin));
        assert!(!Qualifier::Lin.le(Qualifier::Un));
        assert!(Qualifier::Lin.le(Qualifier::Lin));
    }

    #[test]
    fn display_forms() {
        let t = EndpointType::output(vec![
            Branch::simple("a", vec![], EndpointType::End),
            Branch::simple("b", vec![Type::lin(EndpointType::End)], EndpointType::End),
            Branch::new("c", vec![v("x")], vec![Type::un(var("x"))], EndpointType::End),
        ])
        .unwrap();
        assert_eq!(t.to_string(), "!{a.end, b(lin end).end, c<x>(un x).end}");
        assert_eq!(EndpointType::End.to_string(), "end");
    }
}
