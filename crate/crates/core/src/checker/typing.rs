//! Syntax-directed typing of processes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::env::{env_add, split_env, TypeEnv};
use super::error::{ErrorKind, TypeError};
use super::tail::instantiate;
use crate::algebra::subtype::equivalent_qualified;
use crate::algebra::{check_qualified, dual, is_dual_pair, is_wf, subtype_qualified, weight, TyVarSet};
use crate::syntax::{EndpointType, Name, Polarity, Process, RecvBranch, Subst, Type};
use crate::{Fresh, Symbol};

/// `Σ`: process variables to the environments captured at their `rec`.
pub type ProcVarEnv = BTreeMap<Symbol, (TyVarSet, TypeEnv)>;

/// Non-fatal finding, such as a receive branch the type never selects.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Warning {
    pub path: String,
    pub message: String,
}

struct Checker {
    fresh: Fresh,
    path: Vec<String>,
    warnings: Vec<Warning>,
}

type R = Result<(), TypeError>;

fn err(kind: ErrorKind, msg: impl Into<String>) -> TypeError {
    TypeError::new(kind, msg)
}

/// `Σ; Δ; Γ ⊢ P`. On success returns the warnings collected.
pub fn typecheck(sigma: &ProcVarEnv, delta: &TyVarSet, gamma: &TypeEnv, p: &Process) -> Result<Vec<Warning>, TypeError> {
    for (u, t) in gamma.iter() {
        if !check_qualified(delta, t) {
            return Err(err(ErrorKind::NotWellFormed, format!("{u}: {t} is not well formed")));
        }
    }
    let mut hi = p.max_stamp();
    for (u, t) in gamma.iter() {
        hi = hi.max(u.symbol().stamp()).max(t.max_stamp());
    }
    for a in delta {
        hi = hi.max(a.stamp());
    }
    for (x, (d, g)) in sigma {
        hi = hi.max(x.stamp());
        for a in d {
            hi = hi.max(a.stamp());
        }
        for (u, t) in g.iter() {
            hi = hi.max(u.symbol().stamp()).max(t.max_stamp());
        }
    }
    let mut c = Checker { fresh: Fresh::above(hi), path: Vec::new(), warnings: Vec::new() };
    match c.go(sigma, delta, gamma, p) {
        Ok(()) => Ok(c.warnings),
        Err(mut e) => {
            if e.path.is_empty() {
                e.path = c.path.join("/");
            }
            Err(e)
        }
    }
}

/// `⊢ P` under empty contexts.
pub fn typecheck_closed(p: &Process) -> Result<Vec<Warning>, TypeError> {
    typecheck(&ProcVarEnv::new(), &TyVarSet::new(), &TypeEnv::new(), p)
}

/// `fn(P)` plus the linear names a free process variable stands for.
pub fn effective_fn(sigma: &ProcVarEnv, p: &Process) -> BTreeSet<Name> {
    let mut out = p.free_names();
    for x in p.fpv() {
        if let Some((_, g)) = sigma.get(&x) {
            out.extend(g.lin_dom());
        }
    }
    out
}

fn lookup<'a>(gamma: &'a TypeEnv, u: &Name) -> Result<&'a Type, TypeError> {
    gamma.get(u).ok_or_else(|| err(ErrorKind::UnknownName, format!("{u} is not in the environment")))
}

fn require_un(gamma: &TypeEnv, what: &str) -> R {
    let lin: Vec<String> = gamma.iter().filter(|(_, t)| t.is_lin()).map(|(u, t)| format!("{u}: {t}")).collect();
    if lin.is_empty() {
        Ok(())
    } else {
        Err(err(ErrorKind::LinearUnused, format!("{what} leaves linear {} unused", lin.join(", "))))
    }
}

impl Checker {
    fn with<T>(&mut self, seg: String, f: impl FnOnce(&mut Self) -> Result<T, TypeError>) -> Result<T, TypeError> {
        self.path.push(seg);
        let r = f(self);
        match r {
            Ok(v) => {
                self.path.pop();
                Ok(v)
            }
            // Keep the path of the failing subterm.
            Err(mut e) => {
                if e.path.is_empty() {
                    e.path = self.path.join("/");
                }
                self.path.pop();
                Err(e)
            }
        }
    }

    fn rename_name(&mut self, p: &Process, from: Name, to: Name) -> Process {
        p.substitute_with(&Subst::Name { from, to }, &mut self.fresh)
    }

    fn go(&mut self, sigma: &ProcVarEnv, delta: &TyVarSet, gamma: &TypeEnv, p: &Process) -> R {
        match p {
            Process::Idle => require_un(gamma, "0"),
            Process::Close(u) => {
                let t = lookup(gamma, u)?;
                if !t.is_lin() {
                    return Err(err(ErrorKind::QualifierMismatch, format!("close({u}) needs a linear endpoint, found {t}")));
                }
                if t.body.unfold_all() != EndpointType::End {
                    return Err(err(ErrorKind::LinearUnused, format!("close({u}) with protocol {t} still pending")));
                }
                let mut rest = gamma.clone();
                rest.remove(u);
                require_un(&rest, &format!("close({u})"))
            }
            Process::OpenLinear { a, ta, b, tb, body } => self.with(format!("open({a},{b})"), |c| {
                for t in [ta, tb] {
                    if !is_wf(delta, t) {
                        return Err(err(ErrorKind::NotWellFormed, format!("{t} is not well formed")));
                    }
                }
                if let Err(e) = dual(ta) {
                    return Err(err(ErrorKind::NotWellFormed, format!("{ta} has no dual: {e}")));
                }
                if !is_dual_pair(ta, tb) {
                    return Err(err(ErrorKind::DualMismatch, format!("{ta} and {tb} are not dual")));
                }
                if a == b {
                    return Err(err(ErrorKind::EnvConflict, format!("both endpoints are named {a}")));
                }
                let mut body = (**body).clone();
                let (mut a2, mut b2) = (a.clone(), b.clone());
                if gamma.contains(&Name::Ptr(a.clone())) {
                    a2 = c.fresh.rename(a);
                    body = c.rename_name(&body, Name::Ptr(a.clone()), Name::Ptr(a2.clone()));
                }
                if gamma.contains(&Name::Ptr(b.clone())) {
                    b2 = c.fresh.rename(b);
                    body = c.rename_name(&body, Name::Ptr(b.clone()), Name::Ptr(b2.clone()));
                }
                let mut g = gamma.clone();
                g.insert(Name::Ptr(a2), Type::lin(ta.clone()));
                g.insert(Name::Ptr(b2), Type::lin(tb.clone()));
                c.go(sigma, delta, &g, &body)
            }),
            Process::OpenShared { a, ty, body } => self.with(format!("open({a})"), |c| {
                if !is_wf(delta, ty) {
                    return Err(err(ErrorKind::NotWellFormed, format!("{ty} is not well formed")));
                }
                let d = dual(ty).map_err(|e| err(ErrorKind::NotWellFormed, format!("{ty} has no dual: {e}")))?;
                let shared = Type::un(d);
                if !check_qualified(delta, &shared) {
                    return Err(err(
                        ErrorKind::QualifierMismatch,
                        format!("the shared end {shared} is not of the form rec a.!{{..a}}"),
                    ));
                }
                let mut body = (**body).clone();
                let mut a2 = a.clone();
                if gamma.contains(&Name::Ptr(a.clone())) || gamma.contains(&Name::Shared(a.clone())) {
                    a2 = c.fresh.rename(a);
                    body = c.rename_name(&body, Name::Ptr(a.clone()), Name::Ptr(a2.clone()));
                    body = c.rename_name(&body, Name::Shared(a.clone()), Name::Shared(a2.clone()));
                }
                let mut g = gamma.clone();
                g.insert(Name::Ptr(a2.clone()), Type::lin(ty.clone()));
                g.insert(Name::Shared(a2), shared);
                c.go(sigma, delta, &g, &body)
            }),
            Process::Send { subject, tag, tyargs, args, body } => {
                self.with(format!("{subject}!{tag}"), |c| c.send(sigma, delta, gamma, subject, tag, tyargs, args, body))
            }
            Process::Receive { subject, branches } => self.receive(sigma, delta, gamma, subject, branches),
            Process::Choice(l, r) => {
                self.with("choice.L".into(), |c| c.go(sigma, delta, gamma, l))?;
                self.with("choice.R".into(), |c| c.go(sigma, delta, gamma, r))
            }
            Process::Par(l, r) => {
                let (fl, fr) = (effective_fn(sigma, l), effective_fn(sigma, r));
                let (gl, gr) = split_env(gamma, &fl, &fr)?;
                self.with("par.L".into(), |c| c.go(sigma, delta, &gl, l))?;
                self.with("par.R".into(), |c| c.go(sigma, delta, &gr, r))
            }
            Process::Rec(x, body) => self.with(format!("rec {x}"), |c| {
                let mut others = sigma.clone();
                others.remove(x);
                let used = effective_fn(&others, body);
                let unused: Vec<String> = gamma.lin_dom().into_iter().filter(|u| !used.contains(u)).map(|u| u.to_string()).collect();
                if !unused.is_empty() {
                    return Err(err(ErrorKind::LinearUnused, format!("rec {x} never uses linear {}", unused.join(", "))));
                }
                let mut s = sigma.clone();
                s.insert(x.clone(), (delta.clone(), gamma.clone()));
                c.go(&s, delta, gamma, body)
            }),
            Process::Var(x) => {
                let Some((dx, gx)) = sigma.get(x) else {
                    return Err(err(ErrorKind::UnknownName, format!("process variable {x} is unbound")));
                };
                if let Some(a) = dx.iter().find(|a| !delta.contains(*a)) {
                    return Err(err(ErrorKind::RecVarMismatch, format!("{x}: type variable {a} is no longer in scope")));
                }
                for (u, t) in gx.iter() {
                    match gamma.get(u) {
                        Some(s) if equivalent_qualified(s, t) => {}
                        Some(s) => {
                            return Err(err(ErrorKind::RecVarMismatch, format!("{x}: {u} has type {s}, expected {t}")));
                        }
                        None => return Err(err(ErrorKind::RecVarMismatch, format!("{x}: {u}: {t} is missing"))),
                    }
                }
                let extra: Vec<String> = gamma
                    .iter()
                    .filter(|(u, t)| t.is_lin() && !gx.contains(u))
                    .map(|(u, t)| format!("{u}: {t}"))
                    .collect();
                if !extra.is_empty() {
                    return Err(err(ErrorKind::RecVarMismatch, format!("{x}: extra linear {}", extra.join(", "))));
                }
                Ok(())
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn send(
        &mut self,
        sigma: &ProcVarEnv,
        delta: &TyVarSet,
        gamma: &TypeEnv,
        u: &Name,
        tag: &crate::Tag,
        tyargs: &[EndpointType],
        args: &[Name],
        body: &Process,
    ) -> R {
        let tu = lookup(gamma, u)?.clone();
        let (expected, cont) = instantiate(&tu.body, Polarity::Out, tag, tyargs)?;
        for s in tyargs {
            if !is_wf(delta, s) {
                return Err(err(ErrorKind::NotWellFormed, format!("type argument {s} is not well formed")));
            }
        }
        if expected.len() != args.len() {
            return Err(err(ErrorKind::NoSuchTag, format!("{tag} expects {} argument(s), got {}", expected.len(), args.len())));
        }
        let mut actual = Vec::new();
        for (v, t) in args.iter().zip(&expected) {
            let s = lookup(gamma, v)?;
            if !subtype_qualified(s, t) {
                return Err(err(ErrorKind::ArgSubtypeFail, format!("{v}: {s} is not a subtype of {t}")));
            }
            actual.push(s.clone());
        }
        for s in tyargs {
            if !weight(delta, s).is_finite() {
                return Err(err(ErrorKind::WeightInfinite, format!("type argument {s} has infinite weight")));
            }
        }
        for (v, s) in args.iter().zip(&actual) {
            if !weight(delta, &s.body).is_finite() {
                return Err(err(ErrorKind::WeightInfinite, format!("argument {v}: {s} has infinite weight")));
            }
        }
        let mut g = gamma.clone();
        for (v, s) in args.iter().zip(&actual) {
            if !s.is_lin() {
                continue;
            }
            if v == u {
                return Err(err(ErrorKind::EnvConflict, format!("{v} is sent over itself")));
            }
            if g.remove(v).is_none() {
                return Err(err(ErrorKind::EnvConflict, format!("linear {v} is sent twice")));
            }
        }
        if tu.is_lin() {
            g.insert(u.clone(), Type::lin(cont));
        } else if !crate::algebra::equivalent(&cont, &tu.body) {
            return Err(err(
                ErrorKind::QualifierMismatch,
                format!("unrestricted {u}: {tu} would change to {cont} after sending"),
            ));
        }
        self.go(sigma, delta, &g, body)
    }

    fn receive(&mut self, sigma: &ProcVarEnv, delta: &TyVarSet, gamma: &TypeEnv, u: &Name, branches: &[RecvBranch]) -> R {
        let tu = lookup(gamma, u)?.clone();
        if !tu.is_lin() {
            return Err(err(ErrorKind::QualifierMismatch, format!("cannot receive from unrestricted {u}: {tu}")));
        }
        let unfolded = tu.body.unfold_all();
        let EndpointType::Choice(Polarity::In, tbs) = &unfolded else {
            return Err(err(ErrorKind::NoSuchTag, format!("{u}: {tu} offers no input")));
        };
        for pb in branches {
            if !tbs.iter().any(|b| b.tag == pb.tag) {
                self.warnings.push(Warning {
                    path: {
                        let mut p = self.path.clone();
                        p.push(format!("{u}?{}", pb.tag));
                        p.join("/")
                    },
                    message: format!("branch {} is never selected by {u}: {tu}", pb.tag),
                });
            }
        }
        for tb in tbs {
            let Some(pb) = branches.iter().find(|b| b.tag == tb.tag) else {
                return Err(err(ErrorKind::NoSuchTag, format!("{u}: {tu} may deliver {} which is not handled", tb.tag)));
            };
            self.with(format!("{u}?{}", tb.tag), |c| {
                if pb.params.len() != tb.params.len() || pb.vars.len() != tb.args.len() {
                    return Err(err(
                        ErrorKind::NoSuchTag,
                        format!(
                            "{} carries <{}>({}) but the branch binds <{}>({})",
                            tb.tag,
                            tb.params.len(),
                            tb.args.len(),
                            pb.params.len(),
                            pb.vars.len()
                        ),
                    ));
                }
                // Align parameter names, renaming apart from everything in scope.
                let mut in_scope: BTreeSet<Symbol> = delta.clone();
                for (_, t) in gamma.iter() {
                    in_scope.extend(t.body.ftv());
                }
                let mut vars = pb.vars.clone();
                let mut body = pb.body.clone();
                let mut tmap = BTreeMap::new();
                let mut new_params = Vec::new();
                let branch_ftv: BTreeSet<Symbol> = {
                    let mut s = tb.cont.ftv();
                    for a in &tb.args {
                        s.extend(a.body.ftv());
                    }
                    s
                };
                for (alpha, beta) in tb.params.iter().zip(&pb.params) {
                    let clash = in_scope.contains(beta) || (branch_ftv.contains(beta) && beta != alpha) || new_params.contains(beta);
                    let target = if clash { c.fresh.rename(beta) } else { beta.clone() };
                    if target != *beta {
                        let sub = Subst::Type { var: beta.clone(), ty: EndpointType::Var(target.clone()) };
                        body = body.substitute_with(&sub, &mut c.fresh);
                        for (_, t) in vars.iter_mut() {
                            *t = t.subst(beta, &EndpointType::Var(target.clone()));
                        }
                    }
                    if target != *alpha {
                        tmap.insert(alpha.clone(), EndpointType::Var(target.clone()));
                    }
                    new_params.push(target);
                }
                let targs: Vec<Type> = tb.args.iter().map(|a| Type { qual: a.qual, body: a.body.subst_many(&tmap) }).collect();
                let tcont = tb.cont.subst_many(&tmap);
                let mut d = delta.clone();
                d.extend(new_params.iter().cloned());
                let mut g = gamma.clone();
                g.insert(u.clone(), Type::lin(tcont));
                for ((x, t), s) in vars.iter().zip(&targs) {
                    if !check_qualified(&d, t) {
                        return Err(err(ErrorKind::NotWellFormed, format!("{x}: {t} is not well formed")));
                    }
                    if !subtype_qualified(s, t) {
                        return Err(err(ErrorKind::ArgSubtypeFail, format!("{} carries {s}, not a subtype of {x}: {t}", tb.tag)));
                    }
                    let mut xn = Name::Var(x.clone());
                    if g.contains(&xn) {
                        let x2 = c.fresh.rename(x);
                        body = c.rename_name(&body, xn, Name::Var(x2.clone()));
                        xn = Name::Var(x2);
                    }
                    g = env_add(&g, &xn, t)?;
                }
                c.go(sigma, &d, &g, &body)
            })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_etype, parse_process, parse_program};

    fn env(entries: &[(&str, &str)]) -> TypeEnv {
        entries
            .iter()
            .map(|(n, t)| {
                let name = match n.strip_prefix('*') {
                    Some(s) => Name::shared(s),
                    None => Name::ptr(n),
                };
                (name, crate::frontend::parse_type(t).unwrap())
            })
            .collect()
    }

    fn check(g: &TypeEnv, p: &str) -> Result<Vec<Warning>, TypeError> {
        typecheck(&ProcVarEnv::new(), &TyVarSet::new(), g, &parse_process(p).unwrap())
    }

    #[test]
    fn close_accepted() {
        assert!(check(&env(&[("a", "lin end")]), "close(a)").is_ok());
    }

    #[test]
    fn idle_with_linear_rejected() {
        assert_eq!(check(&env(&[("a", "lin end")]), "0").unwrap_err().kind, ErrorKind::LinearUnused);
    }

    #[test]
    fn forwarder() {
        let t = "rec b.?m<al>(lin al).b";
        let src = format!("env a : lin ?Src(lin {t}).?Dest(lin dual({t})).end;\nmain a?Src(x: lin {t}).a?Dest(y: lin dual({t})).(close(a) | rec X.x?m<al>(z: lin al).y!m<al>(z).X);");
        let prog = parse_program(&src).unwrap();
        let g: TypeEnv = prog.env.iter().cloned().collect();
        typecheck(&ProcVarEnv::new(), &TyVarSet::new(), &g, prog.main.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn leak_counterexample_rejected_on_weight() {
        let p = "open(a: !m(lin rec al.?m(lin al).end).end, b: rec al.?m(lin al).end).a!m(b).close(a)";
        let e = check(&TypeEnv::new(), p).unwrap_err();
        assert_eq!(e.kind, ErrorKind::WeightInfinite);
        assert_eq!(e.path, "open(a,b)/a!m");
    }

    #[test]
    fn polymorphic_counterexample_rejected_on_type_argument() {
        let s2 = "?m<al>(lin al).end";
        let p = format!("open(a: !m<al>(lin al).end, b: {s2}).a!m<{s2}>(b).close(a)");
        let e = check(&TypeEnv::new(), &p).unwrap_err();
        assert_eq!(e.kind, ErrorKind::WeightInfinite);
        assert!(e.message.contains("type argument"), "{e}");
    }

    #[test]
    fn par_needs_disjoint_linear() {
        let p = "open(a: end, b: end).(close(a) | close(a) | close(b))";
        assert_eq!(check(&TypeEnv::new(), p).unwrap_err().kind, ErrorKind::SplitFail);
    }

    #[test]
    fn unhandled_tag_and_extra_branch() {
        let g = env(&[("a", "lin ?{m.end, n.end}")]);
        assert_eq!(check(&g, "a?m.close(a)").unwrap_err().kind, ErrorKind::NoSuchTag);
        let g = env(&[("a", "lin ?m.end")]);
        let w = check(&g, "a?{m.close(a), z.0}").unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn shared_send_keeps_type() {
        let p = "open(a: rec x.?m.x).(*a!m.0 | rec X.a?m.X)";
        check(&TypeEnv::new(), p).unwrap();
    }

    #[test]
    fn shared_send_on_linear_rejected() {
        let p = "open(a: !m.end, b: ?m.end).*a!m.b?m.(close(a) | close(b))";
        assert_eq!(check(&TypeEnv::new(), p).unwrap_err().kind, ErrorKind::UnknownName);
    }

    #[test]
    fn rec_must_use_linear_names() {
        let p = "open(a: end, b: end).rec X.X";
        assert_eq!(check(&TypeEnv::new(), p).unwrap_err().kind, ErrorKind::LinearUnused);
    }

    #[test]
    fn dual_mismatch() {
        let p = "open(a: !m.end, b: !m.end).0";
        assert_eq!(check(&TypeEnv::new(), p).unwrap_err().kind, ErrorKind::DualMismatch);
    }

    #[test]
    fn var_discharges_extra_tyvars() {
        let t = parse_etype("rec b.?m<al>(lin al).b").unwrap();
        let g: TypeEnv = [(Name::ptr("x"), Type::lin(t.clone())), (Name::ptr("y"), Type::lin(dual(&t).unwrap()))].into_iter().collect();
        check(&g, "rec X.x?m<al>(z: lin al).y!m<al>(z).X").unwrap();
    }

    #[test]
    fn error_display() {
        let e = check(&TypeEnv::new(), "close(a)").unwrap_err();
        assert_eq!(e.to_string(), "UnknownName @ . : a is not in the environment");
    }
}
