//! Seeded random terms for property tests: closed, well-formed,
//! contractive endpoint types and syntactically valid processes.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::syntax::{Branch, EndpointType, Name, Polarity, Process, RecvBranch, Type};
use crate::{Symbol, TyVar};

const TAGS: &[&str] = &["a", "b", "c", "m", "n"];

#[derive(Clone, Default)]
struct Cx {
    /// Variables allowed as a continuation.
    usable: Vec<TyVar>,
    /// Recursion variables not yet under a prefix.
    pending: Vec<TyVar>,
    /// Type parameters, usable only inside message arguments.
    hidden: Vec<TyVar>,
}

struct TypeGen<'r, R: Rng> {
    rng: &'r mut R,
    budget: usize,
    next: u32,
}

impl<R: Rng> TypeGen<'_, R> {
    fn var(&mut self, prefix: &str) -> TyVar {
        self.next += 1;
        Symbol::new(&format!("{prefix}{}", self.next))
    }

    fn leaf(&mut self, cx: &Cx) -> EndpointType {
        if !cx.usable.is_empty() && self.rng.gen_bool(0.5) {
            EndpointType::Var(cx.usable.choose(self.rng).expect("nonempty").clone())
        } else {
            EndpointType::End
        }
    }

    fn ty(&mut self, cx: &Cx) -> EndpointType {
        debug_assert!(self.budget >= 1);
        self.budget -= 1;
        if self.budget == 0 {
            return self.leaf(cx);
        }
        let roll: f64 = self.rng.gen();
        if roll < 0.25 {
            self.leaf(cx)
        } else if roll < 0.4 && self.budget >= 2 {
            let a = self.var("r");
            let mut inner = cx.clone();
            inner.pending.push(a.clone());
            self.budget -= 1;
            EndpointType::rec(a, self.choice(&inner))
        } else {
            self.choice(cx)
        }
    }

    /// A choice node whose own node was already paid for.
    fn choice(&mut self, cx: &Cx) -> EndpointType {
        let pol = if self.rng.gen_bool(0.5) { Polarity::Out } else { Polarity::In };
        let mut guarded = cx.clone();
        guarded.usable.append(&mut guarded.pending);
        let k = self.rng.gen_range(1..=self.budget.clamp(1, 3));
        let mut tags: Vec<&str> = TAGS.to_vec();
        tags.shuffle(self.rng);
        let mut branches = Vec::new();
        for (i, tag) in tags.into_iter().take(k).enumerate() {
            // keep one node per remaining continuation
            let reserve = k - i;
            let params: Vec<TyVar> =
                if self.rng.gen_bool(0.25) { vec![self.var("p")] } else { Vec::new() };
            let mut arg_cx = Cx { usable: guarded.usable.clone(), pending: Vec::new(), hidden: Vec::new() };
            arg_cx.usable.extend(guarded.hidden.iter().cloned());
            arg_cx.usable.extend(params.iter().cloned());
            let mut args = Vec::new();
            let nargs = self.rng.gen_range(0..=2);
            for _ in 0..nargs {
                if self.budget <= reserve {
                    break;
                }
                let spare = self.budget - reserve;
                if spare >= 3 && self.rng.gen_bool(0.1) {
                    self.budget -= 3;
                    let g = self.var("u");
                    let b = Branch::simple(TAGS[self.rng.gen_range(0..TAGS.len())], vec![], EndpointType::Var(g.clone()));
                    args.push(Type::un(EndpointType::rec(g, EndpointType::prefix(Polarity::Out, b))));
                } else {
                    let saved = self.budget;
                    self.budget = self.rng.gen_range(1..=spare);
                    let left = saved - self.budget;
                    let t = self.ty(&arg_cx);
                    self.budget += left;
                    args.push(Type::lin(t));
                }
            }
            let mut cont_cx = guarded.clone();
            cont_cx.hidden.extend(params.iter().cloned());
            let cont = if self.budget > reserve {
                let spare = self.budget - (reserve - 1);
                let saved = self.budget;
                self.budget = if reserve == 1 { spare } else { self.rng.gen_range(1..=spare) };
                let left = saved - self.budget;
                let t = self.ty(&cont_cx);
                self.budget += left;
                t
            } else {
                self.budget -= 1;
                self.leaf(&cont_cx)
            };
            branches.push(Branch { tag: crate::Tag::new(tag), params, args, cont });
        }
        EndpointType::choice(pol, branches).expect("distinct tags")
    }
}

/// A closed, well-formed, contractive endpoint type with at most
/// `max_size` nodes.
pub fn endpoint_type<R: Rng>(rng: &mut R, max_size: usize) -> EndpointType {
    let budget = rng.gen_range(1..=max_size.max(1));
    let mut g = TypeGen { rng, budget, next: 0 };
    g.ty(&Cx::default())
}

/// A qualified type: `un` when the generated type has the required shape.
pub fn qualified_type<R: Rng>(rng: &mut R, max_size: usize) -> Type {
    let t = endpoint_type(rng, max_size);
    if crate::algebra::wf::is_invariant_output(&t) && rng.gen_bool(0.5) {
        Type::un(t)
    } else {
        Type::lin(t)
    }
}

struct ProcGen<'r, R: Rng> {
    rng: &'r mut R,
    next: u32,
}

const LOCS: &[&str] = &["a", "b", "c", "d"];

#[derive(Clone, Default)]
struct PCx {
    vars: Vec<Symbol>,
    pvars: Vec<Symbol>,
}

impl<R: Rng> ProcGen<'_, R> {
    fn fresh(&mut self, prefix: &str) -> Symbol {
        self.next += 1;
        Symbol::new(&format!("{prefix}{}", self.next))
    }

    fn name(&mut self, cx: &PCx) -> Name {
        if !cx.vars.is_empty() && self.rng.gen_bool(0.4) {
            return Name::Var(cx.vars.choose(self.rng).expect("nonempty").clone());
        }
        let l = Symbol::new(LOCS[self.rng.gen_range(0..LOCS.len())]);
        if self.rng.gen_bool(0.2) {
            Name::Shared(l)
        } else {
            Name::Ptr(l)
        }
    }

    fn proc(&mut self, depth: usize, cx: &PCx) -> Process {
        let k = if depth == 0 { self.rng.gen_range(0..3) } else { self.rng.gen_range(0..10) };
        match k {
            0 => Process::Idle,
            1 => Process::close(self.name(cx)),
            2 if !cx.pvars.is_empty() => Process::Var(cx.pvars.choose(self.rng).expect("nonempty").clone()),
            2 => Process::Idle,
            3 => {
                let (a, b) = (LOCS[self.rng.gen_range(0..2)], LOCS[self.rng.gen_range(2..4)]);
                let ta = endpoint_type(self.rng, 5);
                let tb = endpoint_type(self.rng, 5);
                Process::open_linear(a, ta, b, tb, self.proc(depth - 1, cx))
            }
            4 => {
                let a = LOCS[self.rng.gen_range(0..LOCS.len())];
                let t = endpoint_type(self.rng, 5);
                Process::open_shared(a, t, self.proc(depth - 1, cx))
            }
            5 => {
                let tag = TAGS[self.rng.gen_range(0..TAGS.len())];
                let ntys = self.rng.gen_range(0..=1);
                let tyargs = (0..ntys).map(|_| endpoint_type(self.rng, 4)).collect();
                let nargs = self.rng.gen_range(0..=2);
                let args = (0..nargs).map(|_| self.name(cx)).collect();
                let subject = self.name(cx);
                Process::send(subject, tag, tyargs, args, self.proc(depth - 1, cx))
            }
            6 => {
                let subject = self.name(cx);
                let mut tags: Vec<&str> = TAGS.to_vec();
                tags.shuffle(self.rng);
                let n = self.rng.gen_range(1..=2);
                let branches = tags
                    .into_iter()
                    .take(n)
                    .map(|tag| {
                        let params = if self.rng.gen_bool(0.3) { vec![self.fresh("t")] } else { vec![] };
                        let nv = self.rng.gen_range(0..=2);
                        let vars: Vec<(Symbol, Type)> =
                            (0..nv).map(|_| (self.fresh("x"), qualified_type(self.rng, 4))).collect();
                        let mut inner = cx.clone();
                        inner.vars.extend(vars.iter().map(|(x, _)| x.clone()));
                        let body = self.proc(depth - 1, &inner);
                        RecvBranch { tag: crate::Tag::new(tag), params, vars, body }
                    })
                    .collect();
                Process::receive(subject, branches).expect("distinct tags")
            }
            7 => Process::choice(self.proc(depth - 1, cx), self.proc(depth - 1, cx)),
            8 => Process::par(self.proc(depth - 1, cx), self.proc(depth - 1, cx)),
            _ => {
                let x = self.fresh("X");
                let mut inner = cx.clone();
                inner.pvars.push(x.clone());
                Process::rec(x, self.proc(depth - 1, &inner))
            }
        }
    }
}

/// A syntactically valid process of nesting depth at most `depth`.
/// Receive-bound names are referenced as variables, everything else as
/// locations, matching how the parser resolves identifiers.
pub fn process<R: Rng>(rng: &mut R, depth: usize) -> Process {
    let mut g = ProcGen { rng, next: 0 };
    g.proc(depth, &PCx::default())
}
