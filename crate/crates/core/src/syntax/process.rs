//! Processes, names and process-level substitution.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::symbol::{Fresh, Symbol, Tag, TyVar};
use crate::syntax::types::{EndpointType, SyntaxError, Type};

/// A value or subject name. `Shared(a)` is the unrestricted pointer `*a`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Name {
    Ptr(Symbol),
    Shared(Symbol),
    Var(Symbol),
}

impl Name {
    pub fn ptr(s: &str) -> Name {
        Name::Ptr(Symbol::new(s))
    }

    pub fn shared(s: &str) -> Name {
        Name::Shared(Symbol::new(s))
    }

    pub fn var(s: &str) -> Name {
        Name::Var(Symbol::new(s))
    }

    pub fn symbol(&self) -> &Symbol {
        match self {
            Name::Ptr(s) | Name::Shared(s) | Name::Var(s) => s,
        }
    }

    pub fn is_shared(&self) -> bool {
        matches!(self, Name::Shared(_))
    }

    fn with_symbol(&self, s: Symbol) -> Name {
        match self {
            Name::Ptr(_) => Name::Ptr(s),
            Name::Shared(_) => Name::Shared(s),
            Name::Var(_) => Name::Var(s),
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Ptr(s) | Name::Var(s) => write!(f, "{s}"),
            Name::Shared(s) => write!(f, "*{s}"),
        }
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct RecvBranch {
    pub tag: Tag,
    pub params: Vec<TyVar>,
    pub vars: Vec<(Symbol, Type)>,
    pub body: Process,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Process {
    Idle,
    Close(Name),
    OpenLinear {
        a: Symbol,
        ta: EndpointType,
        b: Symbol,
        tb: EndpointType,
        body: Box<Process>,
    },
    OpenShared {
        a: Symbol,
        ty: EndpointType,
        body: Box<Process>,
    },
    Send {
        subject: Name,
        tag: Tag,
        tyargs: Vec<EndpointType>,
        args: Vec<Name>,
        body: Box<Process>,
    },
    /// Branches sorted by tag, tags unique.
    Receive {
        subject: Name,
        branches: Vec<RecvBranch>,
    },
    Choice(Box<Process>, Box<Process>),
    Par(Box<Process>, Box<Process>),
    Var(Symbol),
    Rec(Symbol, Box<Process>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NameAnalysis {
    #[serde(rename = "fn")]
    pub fn_: BTreeSet<Name>,
    pub bn: BTreeSet<Name>,
    pub ftv: BTreeSet<TyVar>,
    pub btv: BTreeSet<TyVar>,
}

/// The three substitution sorts, plus plain name renaming.
#[derive(Clone, Debug)]
pub enum Subst {
    /// `P[to/from]` for any name sort (values for variables, pointer renaming).
    Name { from: Name, to: Name },
    /// `P[ty/var]`.
    Type { var: TyVar, ty: EndpointType },
    /// `P[proc/var]`.
    Proc { var: Symbol, proc: Process },
}

impl RecvBranch {
    pub fn new(tag: &str, params: Vec<TyVar>, vars: Vec<(Symbol, Type)>, body: Process) -> Self {
        RecvBranch { tag: Tag::new(tag), params, vars, body }
    }
}

impl Process {
    pub fn close(n: Name) -> Process {
        Process::Close(n)
    }

    pub fn par(p: Process, q: Process) -> Process {
        Process::Par(Box::new(p), Box::new(q))
    }

    pub fn choice(p: Process, q: Process) -> Process {
        Process::Choice(Box::new(p), Box::new(q))
    }

    pub fn rec(x: Symbol, p: Process) -> Process {
        Process::Rec(x, Box::new(p))
    }

    pub fn send(subject: Name, tag: &str, tyargs: Vec<EndpointType>, args: Vec<Name>, body: Process) -> Process {
        Process::Send { subject, tag: Tag::new(tag), tyargs, args, body: Box::new(body) }
    }

    pub fn open_linear(a: &str, ta: EndpointType, b: &str, tb: EndpointType, body: Process) -> Process {
        Process::OpenLinear { a: Symbol::new(a), ta, b: Symbol::new(b), tb, body: Box::new(body) }
    }

    pub fn open_shared(a: &str, ty: EndpointType, body: Process) -> Process {
        Process::OpenShared { a: Symbol::new(a), ty, body: Box::new(body) }
    }

    /// Builds a receive, sorting branches and rejecting duplicate tags.
    pub fn receive(subject: Name, mut branches: Vec<RecvBranch>) -> Result<Process, SyntaxError> {
        if branches.is_empty() {
            return Err(SyntaxError::EmptyChoice);
        }
        branches.sort_by(|a, b| a.tag.cmp(&b.tag));
        for w in branches.windows(2) {
            if w[0].tag == w[1].tag {
                return Err(SyntaxError::DuplicateTag(w[0].tag.clone()));
            }
        }
        Ok(Process::Receive { subject, branches })
    }

    /// Right-nested parallel composition of `ps`; `0` when empty.
    pub fn par_all(ps: Vec<Process>) -> Process {
        let mut it = ps.into_iter().rev();
        match it.next() {
            None => Process::Idle,
            Some(last) => it.fold(last, |acc, p| Process::par(p, acc)),
        }
    }

    pub fn analyze(&self) -> NameAnalysis {
        let mut na = NameAnalysis::default();
        self.analyze_into(&mut na);
        na
    }

    fn analyze_into(&self, na: &mut NameAnalysis) {
        match self {
            Process::Idle | Process::Var(_) => {}
            Process::Close(u) => {
                na.fn_.insert(u.clone());
            }
            Process::OpenLinear { a, ta, b, tb, body } => {
                let inner = body.analyze();
                let bound = [Name::Ptr(a.clone()), Name::Ptr(b.clone())];
                na.fn_.extend(inner.fn_.into_iter().filter(|n| !bound.contains(n)));
                na.bn.extend(bound);
                na.bn.extend(inner.bn);
                na.ftv.extend(ta.ftv());
                na.ftv.extend(tb.ftv());
                na.ftv.extend(inner.ftv);
                na.btv.extend(inner.btv);
            }
            Process::OpenShared { a, ty, body } => {
                let inner = body.analyze();
                let bound = [Name::Ptr(a.clone()), Name::Shared(a.clone())];
                na.fn_.extend(inner.fn_.into_iter().filter(|n| !bound.contains(n)));
                na.bn.extend(bound);
                na.bn.extend(inner.bn);
                na.ftv.extend(ty.ftv());
                na.ftv.extend(inner.ftv);
                na.btv.extend(inner.btv);
            }
            Process::Send { subject, tyargs, args, body, .. } => {
                na.fn_.insert(subject.clone());
                na.fn_.extend(args.iter().cloned());
                for t in tyargs {
                    na.ftv.extend(t.ftv());
                }
                body.analyze_into(na);
            }
            Process::Receive { subject, branches } => {
                na.fn_.insert(subject.clone());
                for br in branches {
                    let inner = br.body.analyze();
                    let xs: Vec<Name> = br.vars.iter().map(|(x, _)| Name::Var(x.clone())).collect();
                    na.fn_.extend(inner.fn_.into_iter().filter(|n| !xs.contains(n)));
                    na.bn.extend(xs);
                    na.bn.extend(inner.bn);
                    let mut ftv = inner.ftv;
                    for (_, t) in &br.vars {
                        ftv.extend(t.body.ftv());
                    }
                    na.ftv.extend(ftv.into_iter().filter(|a| !br.params.contains(a)));
                    na.btv.extend(br.params.iter().cloned());
                    na.btv.extend(inner.btv);
                }
            }
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.analyze_into(na);
                q.analyze_into(na);
            }
            Process::Rec(_, p) => p.analyze_into(na),
        }
    }

    pub fn free_names(&self) -> BTreeSet<Name> {
        self.analyze().fn_
    }

    /// Free process variables.
    pub fn fpv(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_fpv(&mut Vec::new(), &mut out);
        out
    }

    fn collect_fpv(&self, bound: &mut Vec<Symbol>, out: &mut BTreeSet<Symbol>) {
        match self {
            Process::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Process::Rec(x, p) => {
                bound.push(x.clone());
                p.collect_fpv(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_fpv(bound, out);
                }
            }
        }
    }

    /// Immediate sub-processes.
    pub fn children(&self) -> Vec<&Process> {
        match self {
            Process::Idle | Process::Close(_) | Process::Var(_) => vec![],
            Process::OpenLinear { body, .. } | Process::OpenShared { body, .. } | Process::Send { body, .. } => {
                vec![body]
            }
            Process::Receive { branches, .. } => branches.iter().map(|b| &b.body).collect(),
            Process::Choice(p, q) | Process::Par(p, q) => vec![p, q],
            Process::Rec(_, p) => vec![p],
        }
    }

    /// Highest stamp of any symbol in the term, types included.
    pub fn max_stamp(&self) -> u32 {
        let mut a = 0u32;
        let mut b = 0u32;
        self.visit_symbols(&mut |s| a = a.max(s.stamp()), &mut |t| b = b.max(t.max_stamp()));
        a.max(b)
    }

    fn visit_symbols<F: FnMut(&Symbol), G: FnMut(&EndpointType)>(&self, f: &mut F, g: &mut G) {
        match self {
            Process::Idle => {}
            Process::Close(u) => f(u.symbol()),
            Process::OpenLinear { a, ta, b, tb, body } => {
                f(a);
                f(b);
                g(ta);
                g(tb);
                body.visit_symbols(f, g);
            }
            Process::OpenShared { a, ty, body } => {
                f(a);
                g(ty);
                body.visit_symbols(f, g);
            }
            Process::Send { subject, tyargs, args, body, .. } => {
                f(subject.symbol());
                tyargs.iter().for_each(&mut *g);
                args.iter().for_each(|n| f(n.symbol()));
                body.visit_symbols(f, g);
            }
            Process::Receive { subject, branches } => {
                f(subject.symbol());
                for br in branches {
                    br.params.iter().for_each(&mut *f);
                    for (x, t) in &br.vars {
                        f(x);
                        g(&t.body);
                    }
                    br.body.visit_symbols(f, g);
                }
            }
            Process::Choice(p, q) | Process::Par(p, q) => {
                p.visit_symbols(f, g);
                q.visit_symbols(f, g);
            }
            Process::Var(x) => f(x),
            Process::Rec(x, p) => {
                f(x);
                p.visit_symbols(f, g);
            }
        }
    }

    /// Capture-avoiding substitution of one sort.
    pub fn substitute(&self, s: &Subst) -> Process {
        let hi = self.max_stamp().max(match s {
            Subst::Name { from, to } => from.symbol().stamp().max(to.symbol().stamp()),
            Subst::Type { var, ty } => var.stamp().max(ty.max_stamp()),
            Subst::Proc { var, proc } => var.stamp().max(proc.max_stamp()),
        });
        let mut fresh = Fresh::above(hi);
        self.substitute_with(s, &mut fresh)
    }

    /// Substitution with a caller-supplied stamp supply, which must lie above
    /// every stamp in `self` and `s`.
    pub fn substitute_with(&self, s: &Subst, fresh: &mut Fresh) -> Process {
        let avoid = Avoid::of(s);
        SubstRun { s, avoid: &avoid, fresh }.go(self)
    }

    /// Applies a sequence of substitutions left to right.
    pub fn substitute_all(&self, subs: &[Subst]) -> Process {
        subs.iter().fold(self.clone(), |p, s| p.substitute(s))
    }

    /// Canonical representative of the alpha class of a process.
    pub fn canonical(&self) -> Process {
        let mut c = Canon::default();
        c.go(self)
    }

    pub fn alpha_eq(&self, other: &Process) -> bool {
        self.canonical() == other.canonical()
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Checks every type annotation for tag uniqueness and contractivity,
    /// and every receive for tag uniqueness.
    pub fn validate(&self) -> Result<(), SyntaxError> {
        let mut err: Option<SyntaxError> = None;
        self.visit_symbols(&mut |_| {}, &mut |t| {
            if err.is_none() {
                if let Err(e) = t.validate() {
                    err = Some(e);
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        self.validate_receives()
    }

    fn validate_receives(&self) -> Result<(), SyntaxError> {
        if let Process::Receive { branches, .. } = self {
            for w in branches.windows(2) {
                if w[0].tag == w[1].tag {
                    return Err(SyntaxError::DuplicateTag(w[0].tag.clone()));
                }
            }
        }
        for c in self.children() {
            c.validate_receives()?;
        }
        Ok(())
    }
}

/// Free symbols of the replacement, which binders must avoid.
struct Avoid {
    names: BTreeSet<Name>,
    tyvars: BTreeSet<TyVar>,
    pvars: BTreeSet<Symbol>,
}

impl Avoid {
    fn of(s: &Subst) -> Avoid {
        match s {
            Subst::Name { to, .. } => Avoid {
                names: [to.clone()].into_iter().collect(),
                tyvars: BTreeSet::new(),
                pvars: BTreeSet::new(),
            },
            Subst::Type { ty, .. } => Avoid { names: BTreeSet::new(), tyvars: ty.ftv(), pvars: BTreeSet::new() },
            Subst::Proc { proc, .. } => {
                let na = proc.analyze();
                Avoid { names: na.fn_, tyvars: na.ftv, pvars: proc.fpv() }
            }
        }
    }
}

struct SubstRun<'a> {
    s: &'a Subst,
    avoid: &'a Avoid,
    fresh: &'a mut Fresh,
}

impl SubstRun<'_> {
    fn name(&self, n: &Name) -> Name {
        match self.s {
            Subst::Name { from, to } if from == n => to.clone(),
            _ => n.clone(),
        }
    }

    fn ty(&mut self, t: &EndpointType) -> EndpointType {
        match self.s {
            Subst::Type { var, ty } => {
                let mut m = BTreeMap::new();
                m.insert(var.clone(), ty.clone());
                t.subst_with(&m, self.fresh)
            }
            _ => t.clone(),
        }
    }

    fn qty(&mut self, t: &Type) -> Type {
        Type { qual: t.qual, body: self.ty(&t.body) }
    }

    /// Does substitution stop at a binder for these names?
    fn binds_target_name(&self, bound: &[Name]) -> bool {
        matches!(self.s, Subst::Name { from, .. } if bound.contains(from))
    }

    /// Renames `old` (of the given name sort) to a fresh symbol in `p`.
    fn rename_name(&mut self, p: &Process, old: &Name) -> (Symbol, Process) {
        let nsym = self.fresh.rename(old.symbol());
        let r = Subst::Name { from: old.clone(), to: old.with_symbol(nsym.clone()) };
        let avoid = Avoid::of(&r);
        let out = SubstRun { s: &r, avoid: &avoid, fresh: self.fresh }.go(p);
        (nsym, out)
    }

    fn go(&mut self, p: &Process) -> Process {
        match p {
            Process::Idle => Process::Idle,
            Process::Close(u) => Process::Close(self.name(u)),
            Process::OpenLinear { a, ta, b, tb, body } => {
                let (ta, tb) = (self.ty(ta), self.ty(tb));
                let bound = [Name::Ptr(a.clone()), Name::Ptr(b.clone())];
                if self.binds_target_name(&bound) {
                    return Process::OpenLinear { a: a.clone(), ta, b: b.clone(), tb, body: body.clone() };
                }
                let mut body = (**body).clone();
                let mut a = a.clone();
                let mut b = b.clone();
                if self.avoid.names.contains(&Name::Ptr(a.clone())) {
                    let (na, nb) = self.rename_name(&body, &Name::Ptr(a.clone()));
                    a = na;
                    body = nb;
                }
                if self.avoid.names.contains(&Name::Ptr(b.clone())) {
                    let (na, nb) = self.rename_name(&body, &Name::Ptr(b.clone()));
                    b = na;
                    body = nb;
                }
                Process::OpenLinear { a, ta, b, tb, body: Box::new(self.go(&body)) }
            }
            Process::OpenShared { a, ty, body } => {
                let ty = self.ty(ty);
                let bound = [Name::Ptr(a.clone()), Name::Shared(a.clone())];
                if self.binds_target_name(&bound) {
                    return Process::OpenShared { a: a.clone(), ty, body: body.clone() };
                }
                let mut body = (**body).clone();
                let mut a = a.clone();
                if bound.iter().any(|n| self.avoid.names.contains(n)) {
                    let na = self.fresh.rename(&a);
                    for n in &bound {
                        let r = Subst::Name { from: n.clone(), to: n.with_symbol(na.clone()) };
                        let avoid = Avoid::of(&r);
                        body = SubstRun { s: &r, avoid: &avoid, fresh: self.fresh }.go(&body);
                    }
                    a = na;
                }
                Process::OpenShared { a, ty, body: Box::new(self.go(&body)) }
            }
            Process::Send { subject, tag, tyargs, args, body } => Process::Send {
                subject: self.name(subject),
                tag: tag.clone(),
                tyargs: tyargs.iter().map(|t| self.ty(t)).collect(),
                args: args.iter().map(|n| self.name(n)).collect(),
                body: Box::new(self.go(body)),
            },
            Process::Receive { subject, branches } => {
                let subject = self.name(subject);
                let branches = branches.iter().map(|br| self.branch(br)).collect();
                Process::Receive { subject, branches }
            }
            Process::Choice(p, q) => Process::choice(self.go(p), self.go(q)),
            Process::Par(p, q) => Process::par(self.go(p), self.go(q)),
            Process::Var(x) => match self.s {
                Subst::Proc { var, proc } if var == x => proc.clone(),
                _ => p.clone(),
            },
            Process::Rec(x, body) => {
                if matches!(self.s, Subst::Proc { var, .. } if var == x) {
                    return p.clone();
                }
                if self.avoid.pvars.contains(x) {
                    let nx = self.fresh.rename(x);
                    let r = Subst::Proc { var: x.clone(), proc: Process::Var(nx.clone()) };
                    let avoid = Avoid::of(&r);
                    let b = SubstRun { s: &r, avoid: &avoid, fresh: self.fresh }.go(body);
                    return Process::rec(nx, self.go(&b));
                }
                Process::rec(x.clone(), self.go(body))
            }
        }
    }

    fn branch(&mut self, br: &RecvBranch) -> RecvBranch {
        let xs: Vec<Name> = br.vars.iter().map(|(x, _)| Name::Var(x.clone())).collect();
        let mut params = br.params.clone();
        let mut vars = br.vars.clone();
        let mut body = br.body.clone();

        // Type parameters scope over the declared types and the body.
        let ty_stopped = matches!(self.s, Subst::Type { var, .. } if params.contains(var));
        if ty_stopped {
            return RecvBranch { tag: br.tag.clone(), params, vars, body };
        }
        for p in params.iter_mut() {
            if self.avoid.tyvars.contains(p) {
                let np = self.fresh.rename(p);
                let r = Subst::Type { var: p.clone(), ty: EndpointType::Var(np.clone()) };
                let avoid = Avoid::of(&r);
                let mut run = SubstRun { s: &r, avoid: &avoid, fresh: self.fresh };
                for v in vars.iter_mut() {
                    v.1 = run.qty(&v.1);
                }
                body = run.go(&body);
                *p = np;
            }
        }
        for v in vars.iter_mut() {
            v.1 = self.qty(&v.1);
        }
        // Value variables scope over the body only.
        if self.binds_target_name(&xs) {
            return RecvBranch { tag: br.tag.clone(), params, vars, body };
        }
        for v in vars.iter_mut() {
            let n = Name::Var(v.0.clone());
            if self.avoid.names.contains(&n) {
                let (nx, nb) = self.rename_name(&body, &n);
                v.0 = nx;
                body = nb;
            }
        }
        RecvBranch { tag: br.tag.clone(), params, vars, body: self.go(&body) }
    }
}

#[derive(Default)]
struct Canon {
    next: u32,
    names: Vec<(Name, Name)>,
    tyvars: BTreeMap<TyVar, Vec<TyVar>>,
    pvars: Vec<(Symbol, Symbol)>,
}

impl Canon {
    fn fresh(&mut self, base: &str) -> Symbol {
        self.next += 1;
        Symbol::with_stamp(base, self.next)
    }

    fn name(&self, n: &Name) -> Name {
        self.names.iter().rev().find(|(k, _)| k == n).map(|(_, v)| v.clone()).unwrap_or_else(|| n.clone())
    }

    fn ty(&self, t: &EndpointType) -> EndpointType {
        let m: BTreeMap<TyVar, EndpointType> = self
            .tyvars
            .iter()
            .filter_map(|(k, v)| v.last().map(|x| (k.clone(), EndpointType::Var(x.clone()))))
            .collect();
        t.subst_many(&m).canonical()
    }

    fn go(&mut self, p: &Process) -> Process {
        match p {
            Process::Idle => Process::Idle,
            Process::Close(u) => Process::Close(self.name(u)),
            Process::OpenLinear { a, ta, b, tb, body } => {
                let (ta, tb) = (self.ty(ta), self.ty(tb));
                let (na, nb) = (self.fresh("%a"), self.fresh("%a"));
                let n = self.names.len();
                self.names.push((Name::Ptr(a.clone()), Name::Ptr(na.clone())));
                self.names.push((Name::Ptr(b.clone()), Name::Ptr(nb.clone())));
                let body = self.go(body);
                self.names.truncate(n);
                Process::OpenLinear { a: na, ta, b: nb, tb, body: Box::new(body) }
            }
            Process::OpenShared { a, ty, body } => {
                let ty = self.ty(ty);
                let na = self.fresh("%a");
                let n = self.names.len();
                self.names.push((Name::Ptr(a.clone()), Name::Ptr(na.clone())));
                self.names.push((Name::Shared(a.clone()), Name::Shared(na.clone())));
                let body = self.go(body);
                self.names.truncate(n);
                Process::OpenShared { a: na, ty, body: Box::new(body) }
            }
            Process::Send { subject, tag, tyargs, args, body } => Process::Send {
                subject: self.name(subject),
                tag: tag.clone(),
                tyargs: tyargs.iter().map(|t| self.ty(t)).collect(),
                args: args.iter().map(|n| self.name(n)).collect(),
                body: Box::new(self.go(body)),
            },
            Process::Receive { subject, branches } => {
                let subject = self.name(subject);
                let branches = branches
                    .iter()
                    .map(|br| {
                        let params: Vec<TyVar> = br
                            .params
                            .iter()
                            .map(|a| {
                                let na = self.fresh("%t");
                                self.tyvars.entry(a.clone()).or_default().push(na.clone());
                                na
                            })
                            .collect();
                        let n = self.names.len();
                        let vars = br
                            .vars
                            .iter()
                            .map(|(x, t)| {
                                let t = Type { qual: t.qual, body: self.ty(&t.body) };
                                let nx = self.fresh("%x");
                                self.names.push((Name::Var(x.clone()), Name::Var(nx.clone())));
                                (nx, t)
                            })
                            .collect();
                        let body = self.go(&br.body);
                        self.names.truncate(n);
                        for a in &br.params {
                            self.tyvars.get_mut(a).map(|v| v.pop());
                        }
                        RecvBranch { tag: br.tag.clone(), params, vars, body }
                    })
                    .collect();
                Process::Receive { subject, branches }
            }
            Process::Choice(p, q) => Process::choice(self.go(p), self.go(q)),
            Process::Par(p, q) => Process::par(self.go(p), self.go(q)),
            Process::Var(x) => {
                Process::Var(self.pvars.iter().rev().find(|(k, _)| k == x).map(|(_, v)| v.clone()).unwrap_or_else(|| x.clone()))
            }
            Process::Rec(x, body) => {
                let nx = self.fresh("%X");
                self.pvars.push((x.clone(), nx.clone()));
                let b = self.go(body);
                self.pvars.pop();
                Process::rec(nx, b)
            }
        }
    }
}

fn needs_parens(p: &Process) -> bool {
    matches!(p, Process::Par(..) | Process::Choice(..))
}

fn fmt_cont(p: &Process, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if needs_parens(p) {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

fn fmt_list<T: fmt::Display>(xs: &[T], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

fn fmt_recv_branch(br: &RecvBranch, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}", br.tag)?;
    if !br.params.is_empty() {
        f.write_str("<")?;
        fmt_list(&br.params, f)?;
        f.write_str(">")?;
    }
    if !br.vars.is_empty() {
        f.write_str("(")?;
        for (i, (x, t)) in br.vars.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}: {t}")?;
        }
        f.write_str(")")?;
    }
    f.write_str(".")?;
    fmt_cont(&br.body, f)
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Idle => f.write_str("0"),
            Process::Close(u) => write!(f, "close({u})"),
            Process::OpenLinear { a, ta, b, tb, body } => {
                write!(f, "open({a}: {ta}, {b}: {tb}).")?;
                fmt_cont(body, f)
            }
            Process::OpenShared { a, ty, body } => {
                write!(f, "open({a}: {ty}).")?;
                fmt_cont(body, f)
            }
            Process::Send { subject, tag, tyargs, args, body } => {
                write!(f, "{subject}!{tag}")?;
                if !tyargs.is_empty() {
                    f.write_str("<")?;
                    fmt_list(tyargs, f)?;
                    f.write_str(">")?;
                }
                if !args.is_empty() {
                    f.write_str("(")?;
                    fmt_list(args, f)?;
                    f.write_str(")")?;
                }
                f.write_str(".")?;
                fmt_cont(body, f)
            }
            Process::Receive { subject, branches } if branches.len() == 1 => {
                write!(f, "{subject}?")?;
                fmt_recv_branch(&branches[0], f)
            }
            Process::Receive { subject, branches } => {
                write!(f, "{subject}?{{")?;
                for (i, br) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    fmt_recv_branch(br, f)?;
                }
                f.write_str("}")
            }
            Process::Choice(p, q) => {
                // (+) binds tighter than |, and is right-nested.
                let wrap_l = needs_parens(p);
                let wrap_r = matches!(**q, Process::Par(..));
                if wrap_l {
                    write!(f, "({p})")?;
                } else {
                    write!(f, "{p}")?;
                }
                f.write_str(" (+) ")?;
                if wrap_r {
                    write!(f, "({q})")
                } else {
                    write!(f, "{q}")
                }
            }
            Process::Par(p, q) => {
                if matches!(**p, Process::Par(..)) {
                    write!(f, "({p})")?;
                } else {
                    write!(f, "{p}")?;
                }
                write!(f, " | {q}")
            }
            Process::Var(x) => write!(f, "{x}"),
            Process::Rec(x, body) => {
                write!(f, "rec {x}.")?;
                fmt_cont(body, f)
            }
        }
    }
}

impl Serialize for Process {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::types::{Branch, Polarity};

    fn sym(s: &str) -> Symbol {
        Symbol::new(s)
    }

    #[test]
    fn names_close_and_idle() {
        let na = Process::close(Name::ptr("a")).analyze();
        assert_eq!(na.fn_, [Name::ptr("a")].into_iter().collect());
        assert_eq!(Process::Idle.analyze(), NameAnalysis::default());
    }

    #[test]
    fn open_shared_binds_both() {
        let body = Process::par(
            Process::close(Name::ptr("a")),
            Process::send(Name::shared("a"), "m", vec![], vec![Name::ptr("c")], Process::Idle),
        );
        let p = Process::open_shared("a", EndpointType::End, body);
        let na = p.analyze();
        assert_eq!(na.fn_, [Name::ptr("c")].into_iter().collect());
        assert!(na.bn.contains(&Name::shared("a")) && na.bn.contains(&Name::ptr("a")));
    }

    #[test]
    fn open_linear_leaves_shared_free() {
        let p = Process::open_linear(
            "a",
            EndpointType::End,
            "b",
            EndpointType::End,
            Process::send(Name::shared("a"), "m", vec![], vec![], Process::Idle),
        );
        assert_eq!(p.analyze().fn_, [Name::shared("a")].into_iter().collect());
    }

    #[test]
    fn value_substitution() {
        let p = Process::send(Name::var("x"), "m", vec![], vec![], Process::Idle);
        let q = p.substitute(&Subst::Name { from: Name::var("x"), to: Name::ptr("a") });
        assert_eq!(q, Process::send(Name::ptr("a"), "m", vec![], vec![], Process::Idle));
    }

    #[test]
    fn type_substitution_instantiates_tyarg() {
        let p = Process::send(
            Name::var("y"),
            "m",
            vec![EndpointType::var("al")],
            vec![Name::var("z")],
            Process::Var(sym("X")),
        );
        let q = p.substitute(&Subst::Type { var: sym("al"), ty: EndpointType::End });
        assert_eq!(
            q,
            Process::send(Name::var("y"), "m", vec![EndpointType::End], vec![Name::var("z")], Process::Var(sym("X")))
        );
    }

    #[test]
    fn proc_substitution() {
        let body = Process::close(Name::ptr("a"));
        let r = Process::rec(sym("X"), body);
        assert_eq!(Process::Var(sym("X")).substitute(&Subst::Proc { var: sym("X"), proc: r.clone() }), r);
    }

    #[test]
    fn value_substitution_avoids_capture() {
        // a?m(y: lin end).x!n(y).0 [y/x]
        let p = Process::receive(
            Name::ptr("a"),
            vec![RecvBranch::new(
                "m",
                vec![],
                vec![(sym("y"), Type::lin(EndpointType::End))],
                Process::send(Name::var("x"), "n", vec![], vec![Name::var("y")], Process::Idle),
            )],
        )
        .unwrap();
        let q = p.substitute(&Subst::Name { from: Name::var("x"), to: Name::var("y") });
        if let Process::Receive { branches, .. } = &q {
            let bound = &branches[0].vars[0].0;
            assert_ne!(bound, &sym("y"));
            if let Process::Send { subject, args, .. } = &branches[0].body {
                assert_eq!(subject, &Name::var("y"));
                assert_eq!(args[0], Name::Var(bound.clone()));
                return;
            }
        }
        panic!("shape {q}");
    }

    #[test]
    fn type_substitution_avoids_capture() {
        // a?m<b>(x: lin b).y!k<al>(x).0  [b/al]
        let p = Process::receive(
            Name::ptr("a"),
            vec![RecvBranch::new(
                "m",
                vec![sym("b")],
                vec![(sym("x"), Type::lin(EndpointType::var("b")))],
                Process::send(Name::ptr("y"), "k", vec![EndpointType::var("al")], vec![Name::var("x")], Process::Idle),
            )],
        )
        .unwrap();
        let q = p.substitute(&Subst::Type { var: sym("al"), ty: EndpointType::var("b") });
        assert_eq!(q.analyze().ftv, [sym("b")].into_iter().collect());
    }

    #[test]
    fn alpha_equality() {
        let mk = |a: &str, b: &str| {
            Process::open_linear(
                a,
                EndpointType::End,
                b,
                EndpointType::End,
                Process::par(Process::close(Name::ptr(a)), Process::close(Name::ptr(b))),
            )
        };
        assert!(mk("a", "b").alpha_eq(&mk("c", "d")));
        assert!(!mk("a", "b").alpha_eq(&Process::Idle));
    }

    #[test]
    fn render_forms() {
        let t = EndpointType::prefix(Polarity::Out, Branch::simple("m", vec![], EndpointType::End));
        let p = Process::open_linear(
            "a",
            t.clone(),
            "b",
            EndpointType::End,
            Process::par(
                Process::send(Name::ptr("a"), "m", vec![], vec![], Process::close(Name::ptr("a"))),
                Process::choice(Process::Idle, Process::close(Name::shared("b"))),
            ),
        );
        assert_eq!(p.to_string(), "open(a: !m.end, b: end).(a!m.close(a) | 0 (+) close(*b))");
    }
}
