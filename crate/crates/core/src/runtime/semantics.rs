//! Redex enumeration and the reduction step.

use std::fmt;

use serde::Serialize;

use super::config::{leaves, Configuration};
use super::heap::Message;
use crate::syntax::{EndpointType, Name, Process, Subst, Type};
use crate::{Symbol, Tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Rule {
    #[serde(rename = "R-Open Linear Channel")]
    OpenLinear,
    #[serde(rename = "R-Open Unrestricted Channel")]
    OpenShared,
    #[serde(rename = "R-Choice Left")]
    ChoiceLeft,
    #[serde(rename = "R-Choice Right")]
    ChoiceRight,
    #[serde(rename = "R-Send Linear")]
    SendLinear,
    #[serde(rename = "R-Send Unrestricted")]
    SendShared,
    #[serde(rename = "R-Receive")]
    Receive,
    #[serde(rename = "R-Rec")]
    Rec,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::OpenLinear => "R-Open Linear Channel",
            Rule::OpenShared => "R-Open Unrestricted Channel",
            Rule::ChoiceLeft => "R-Choice Left",
            Rule::ChoiceRight => "R-Choice Right",
            Rule::SendLinear => "R-Send Linear",
            Rule::SendShared => "R-Send Unrestricted",
            Rule::Receive => "R-Receive",
            Rule::Rec => "R-Rec",
        })
    }
}

/// A rule applicable to one leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Redex {
    pub leaf: usize,
    pub rule: Rule,
}

/// Evidence of misbehavior found while enumerating redexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Marker {
    /// Use of an absent endpoint or an unbound name.
    Fault { leaf: usize, description: String },
    /// A queued message no branch accepts.
    CommError { leaf: usize, tag: Tag },
}

/// What a step did to typed resources, for environment tracking.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Effect {
    OpenLinear { a: Symbol, ta: EndpointType, b: Symbol, tb: EndpointType },
    OpenShared { a: Symbol, ty: EndpointType },
    Send { loc: Symbol, tag: Tag, tyargs: Vec<EndpointType> },
    SendShared,
    Receive { loc: Symbol, tag: Tag, tyargs: Vec<EndpointType> },
    Silent,
}

fn value(n: &Name) -> bool {
    matches!(n, Name::Ptr(_) | Name::Shared(_))
}

/// All enabled steps, in leaf order, plus error markers.
pub fn analyze(c: &Configuration) -> (Vec<Redex>, Vec<Marker>) {
    let mut rs = Vec::new();
    let mut ms = Vec::new();
    for (i, leaf) in c.leaves.iter().enumerate() {
        let fault = |d: String| Marker::Fault { leaf: i, description: d };
        match leaf {
            Process::Idle | Process::Close(_) => {}
            Process::Par(..) => unreachable!("leaves are normalized"),
            Process::OpenLinear { .. } => rs.push(Redex { leaf: i, rule: Rule::OpenLinear }),
            Process::OpenShared { .. } => rs.push(Redex { leaf: i, rule: Rule::OpenShared }),
            Process::Choice(..) => {
                rs.push(Redex { leaf: i, rule: Rule::ChoiceLeft });
                rs.push(Redex { leaf: i, rule: Rule::ChoiceRight });
            }
            Process::Rec(..) => rs.push(Redex { leaf: i, rule: Rule::Rec }),
            Process::Var(x) => ms.push(fault(format!("unbound process variable {x}"))),
            Process::Send { subject, args, .. } => {
                if let Some(v) = args.iter().find(|v| !value(v)) {
                    ms.push(fault(format!("unbound variable {v}")));
                    continue;
                }
                match subject {
                    Name::Var(x) => ms.push(fault(format!("unbound variable {x}"))),
                    Name::Ptr(a) => match c.heap.get(a) {
                        None => ms.push(fault(format!("send on unallocated {a}"))),
                        Some(ep) if ep.peer == *a => {}
                        Some(ep) if c.heap.contains(&ep.peer) => rs.push(Redex { leaf: i, rule: Rule::SendLinear }),
                        Some(ep) => ms.push(fault(format!("peer {} of {a} is unallocated", ep.peer))),
                    },
                    Name::Shared(a) => match c.heap.get(a) {
                        None => ms.push(fault(format!("send on unallocated {subject}"))),
                        Some(ep) if ep.peer == *a => rs.push(Redex { leaf: i, rule: Rule::SendShared }),
                        Some(_) => {}
                    },
                }
            }
            Process::Receive { subject, branches } => match subject {
                Name::Var(x) => ms.push(fault(format!("unbound variable {x}"))),
                Name::Shared(_) => {}
                Name::Ptr(a) => match c.heap.get(a) {
                    None => ms.push(fault(format!("receive on unallocated {a}"))),
                    Some(ep) => {
                        if let Some(m) = ep.queue.first() {
                            match branches.iter().find(|b| b.tag == m.tag) {
                                Some(b) if b.params.len() == m.tyargs.len() && b.vars.len() == m.args.len() => {
                                    rs.push(Redex { leaf: i, rule: Rule::Receive })
                                }
                                _ => ms.push(Marker::CommError { leaf: i, tag: m.tag.clone() }),
                            }
                        }
                    }
                },
            },
        }
    }
    (rs, ms)
}

pub fn redexes(c: &Configuration) -> Vec<Redex> {
    analyze(c).0
}

/// Result of one step.
#[derive(Clone, Debug)]
pub struct Stepped {
    pub config: Configuration,
    pub description: String,
    pub effect: Effect,
}

/// Applies `r`, which must be one of `redexes(c)`.
pub fn step(c: &Configuration, r: Redex) -> Stepped {
    let mut next = c.clone();
    let leaf = next.leaves.remove(r.leaf);
    let (result, description, effect) = match (&leaf, r.rule) {
        (Process::OpenLinear { a, ta, b, tb, body }, Rule::OpenLinear) => {
            let mut avoid = c.taken(r.leaf);
            let a2 = next.fresh_loc(a, &avoid);
            avoid.insert(a2.clone());
            let b2 = next.fresh_loc(b, &avoid);
            let mut p = (**body).clone();
            if a2 != *a {
                p = p.substitute(&Subst::Name { from: Name::Ptr(a.clone()), to: Name::Ptr(a2.clone()) });
            }
            if b2 != *b {
                p = p.substitute(&Subst::Name { from: Name::Ptr(b.clone()), to: Name::Ptr(b2.clone()) });
            }
            next.heap.alloc(a2.clone(), b2.clone());
            next.heap.alloc(b2.clone(), a2.clone());
            let d = format!("open({a2}, {b2})");
            (p, d, Effect::OpenLinear { a: a2, ta: ta.clone(), b: b2, tb: tb.clone() })
        }
        (Process::OpenShared { a, ty, body }, Rule::OpenShared) => {
            let avoid = c.taken(r.leaf);
            let a2 = next.fresh_loc(a, &avoid);
            let mut p = (**body).clone();
            if a2 != *a {
                p = p.substitute_all(&[
                    Subst::Name { from: Name::Ptr(a.clone()), to: Name::Ptr(a2.clone()) },
                    Subst::Name { from: Name::Shared(a.clone()), to: Name::Shared(a2.clone()) },
                ]);
            }
            next.heap.alloc(a2.clone(), a2.clone());
            let d = format!("open({a2})");
            (p, d, Effect::OpenShared { a: a2, ty: ty.clone() })
        }
        (Process::Choice(p, _), Rule::ChoiceLeft) => ((**p).clone(), "choice left".into(), Effect::Silent),
        (Process::Choice(_, q), Rule::ChoiceRight) => ((**q).clone(), "choice right".into(), Effect::Silent),
        (Process::Rec(x, body), Rule::Rec) => {
            let p = body.substitute(&Subst::Proc { var: x.clone(), proc: leaf.clone() });
            (p, format!("unfold {x}"), Effect::Silent)
        }
        (Process::Send { subject, tag, tyargs, args, body }, Rule::SendLinear | Rule::SendShared) => {
            let a = subject.symbol().clone();
            let target = if r.rule == Rule::SendLinear { next.heap.cells[&a].peer.clone() } else { a.clone() };
            let m = Message { tag: tag.clone(), tyargs: tyargs.clone(), args: args.clone() };
            let d = format!("{subject} sends {m} to {target}");
            next.heap.cells.get_mut(&target).expect("enabled").queue.push(m);
            let eff = if r.rule == Rule::SendLinear {
                Effect::Send { loc: a, tag: tag.clone(), tyargs: tyargs.clone() }
            } else {
                Effect::SendShared
            };
            ((**body).clone(), d, eff)
        }
        (Process::Receive { subject, branches }, Rule::Receive) => {
            let a = subject.symbol().clone();
            let m = next.heap.cells.get_mut(&a).expect("enabled").queue.remove(0);
            let b = branches.iter().find(|b| b.tag == m.tag).expect("enabled");
            let mut subs = Vec::new();
            for (alpha, s) in b.params.iter().zip(&m.tyargs) {
                subs.push(Subst::Type { var: alpha.clone(), ty: s.clone() });
            }
            for ((x, _), v) in b.vars.iter().zip(&m.args) {
                subs.push(Subst::Name { from: Name::Var(x.clone()), to: v.clone() });
            }
            let d = format!("{a} receives {m}");
            (b.body.substitute_all(&subs), d, Effect::Receive { loc: a, tag: m.tag, tyargs: m.tyargs })
        }
        _ => panic!("redex {r:?} does not match leaf {leaf}"),
    };
    next.leaves.extend(leaves(&result));
    next.leaves.sort();
    Stepped { config: next, description, effect }
}

/// Type of the continuation a tracked endpoint moves to.
pub(crate) fn advance(t: &Type, pol: crate::syntax::Polarity, tag: &Tag, tyargs: &[EndpointType]) -> Option<Type> {
    crate::checker::tail::instantiate(&t.body, pol, tag, tyargs).ok().map(|(_, cont)| Type { qual: t.qual, body: cont })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_process;

    fn cfg(s: &str) -> Configuration {
        Configuration::initial(&parse_process(s).unwrap())
    }

    #[test]
    fn close_has_no_redex() {
        assert!(redexes(&cfg("close(a)")).is_empty());
    }

    #[test]
    fn leak_counterexample_reduction() {
        let c = cfg("open(a: !m(lin rec x.?m(lin x).end).end, b: rec x.?m(lin x).end).a!m(b).close(a)");
        let rs = redexes(&c);
        assert_eq!(rs, vec![Redex { leaf: 0, rule: Rule::OpenLinear }]);
        let c = step(&c, rs[0]).config;
        let rs = redexes(&c);
        assert_eq!(rs.len(), 1);
        let c = step(&c, rs[0]).config;
        assert_eq!(c.heap.to_string(), "a ↦ [b, ε], b ↦ [a, m(b)]");
        assert_eq!(c.process().to_string(), "close(a)");
    }

    #[test]
    fn receive_substitutes() {
        let c = cfg("open(a: !m<x>(lin x).end, b: ?m<x>(lin x).end).open(c: end, d: end).(a!m<end>(c).close(a) | b?m<x>(y: lin x).(close(y) | close(b)) | close(d))");
        let mut c = c;
        let r = loop {
            let rs = redexes(&c);
            if let Some(r) = rs.iter().find(|r| r.rule == Rule::Receive) {
                break *r;
            }
            c = step(&c, rs[0]).config;
        };
        let c = step(&c, r).config;
        assert!(c.leaves.contains(&Process::close(Name::ptr("c"))));
    }

    #[test]
    fn empty_queue_receive_is_quiet() {
        let c = cfg("open(a: end, b: ?m.end).(close(a) | b?m.close(b))");
        let c = step(&c, redexes(&c)[0]).config;
        let (rs, ms) = analyze(&c);
        assert!(rs.is_empty() && ms.is_empty());
    }

    #[test]
    fn fresh_locations_avoid_heap() {
        let c = cfg("open(a: end, b: end).open(a: end, b: end).0");
        let c = step(&c, redexes(&c)[0]).config;
        let c = step(&c, redexes(&c)[0]).config;
        assert_eq!(c.heap.cells.len(), 4);
    }

    #[test]
    fn choice_has_two_redexes() {
        assert_eq!(redexes(&cfg("close(a) (+) close(b)")).len(), 2);
    }
}
