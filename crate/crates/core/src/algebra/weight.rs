//! Weights: bounds on the length of pointer chains reachable from an
//! endpoint's queue.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::algebra::wf::TyVarSet;
use crate::syntax::{EndpointType, Polarity, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weight {
    Finite(u64),
    Infinite,
}

impl Weight {
    pub const ZERO: Weight = Weight::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Weight::Finite(_))
    }

    /// `1 + w`, saturating at infinity.
    pub fn succ(self) -> Weight {
        match self {
            Weight::Finite(n) => Weight::Finite(n.saturating_add(1)),
            Weight::Infinite => Weight::Infinite,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Finite(n) => write!(f, "{n}"),
            Weight::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Weight::Finite(n) => s.serialize_u64(*n),
            Weight::Infinite => s.serialize_str("inf"),
        }
    }
}

/// `W(Δ0, ∅, t)`.
pub fn weight(delta0: &TyVarSet, t: &EndpointType) -> Weight {
    w(delta0, &TyVarSet::new(), t)
}

pub fn weight_qualified(delta0: &TyVarSet, t: &Type) -> Weight {
    weight(delta0, &t.body)
}

/// `W(Δ0, Δ, t)`. A binder removes its variable from `Δ0`, so shadowing
/// behaves as if bound names were renamed apart.
pub fn w(delta0: &TyVarSet, delta: &TyVarSet, t: &EndpointType) -> Weight {
    match t {
        EndpointType::End => Weight::ZERO,
        EndpointType::Var(a) => {
            if delta0.contains(a) || delta.contains(a) {
                Weight::ZERO
            } else {
                Weight::Infinite
            }
        }
        EndpointType::Rec(a, body) => {
            let mut d = delta.clone();
            d.insert(a.clone());
            if delta0.contains(a) {
                let mut d0 = delta0.clone();
                d0.remove(a);
                w(&d0, &d, body)
            } else {
                w(delta0, &d, body)
            }
        }
        EndpointType::Choice(Polarity::Out, _) => Weight::ZERO,
        EndpointType::Choice(Polarity::In, bs) => {
            let mut best = Weight::ZERO;
            for b in bs {
                let shadow = b.params.iter().any(|p| delta0.contains(p));
                let d0_owned;
                let d0 = if shadow {
                    let mut x = delta0.clone();
                    for p in &b.params {
                        x.remove(p);
                    }
                    d0_owned = x;
                    &d0_owned
                } else {
                    delta0
                };
                let empty = TyVarSet::new();
                for s in &b.args {
                    best = best.max(w(d0, &empty, &s.body).succ());
                    if best == Weight::Infinite {
                        return best;
                    }
                }
                let mut d = delta.clone();
                for p in &b.params {
                    d.remove(p);
                }
                best = best.max(w(d0, &d, &b.cont));
                if best == Weight::Infinite {
                    return best;
                }
            }
            best
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Symbol;
    use crate::syntax::Branch;

    fn inp(params: &[&str], arg: EndpointType, cont: EndpointType) -> EndpointType {
        EndpointType::prefix(
            Polarity::In,
            Branch::new("m", params.iter().map(|p| Symbol::new(p)).collect(), vec![Type::lin(arg)], cont),
        )
    }
    fn set(xs: &[&str]) -> TyVarSet {
        xs.iter().map(|x| Symbol::new(x)).collect()
    }

    #[test]
    fn worked_examples() {
        let e = EndpointType::End;
        let a = EndpointType::var("a");
        let none = set(&[]);
        assert_eq!(weight(&none, &inp(&["a"], e.clone(), e.clone())), Weight::Finite(1));
        assert_eq!(weight(&none, &inp(&["a"], a.clone(), e.clone())), Weight::Infinite);
        let r = EndpointType::rec(Symbol::new("a"), inp(&[], a.clone(), e.clone()));
        assert_eq!(weight(&none, &r), Weight::Infinite);
        let r = EndpointType::rec(Symbol::new("a"), inp(&[], e.clone(), a.clone()));
        assert_eq!(weight(&none, &r), Weight::Finite(1));
    }

    #[test]
    fn basic_values() {
        let e = EndpointType::End;
        assert_eq!(weight(&set(&[]), &e), Weight::ZERO);
        let two = inp(&[], inp(&[], e.clone(), e.clone()), e.clone());
        assert_eq!(weight(&set(&[]), &two), Weight::Finite(2));
        assert_eq!(weight(&set(&["a"]), &EndpointType::var("a")), Weight::ZERO);
        assert_eq!(weight(&set(&[]), &EndpointType::var("a")), Weight::Infinite);
    }

    #[test]
    fn order_and_saturation() {
        assert!(Weight::Finite(u64::MAX) < Weight::Infinite);
        assert_eq!(Weight::Finite(u64::MAX).succ(), Weight::Finite(u64::MAX));
        assert_eq!(Weight::Infinite.succ(), Weight::Infinite);
        assert_eq!(Weight::Infinite.max(Weight::Finite(3)), Weight::Infinite);
    }

    #[test]
    fn shadowed_free_variable_counts_as_bound() {
        // ?m<a>(lin a).end with a free outside: the inner a is the bound one
        let t = inp(&["a"], EndpointType::var("a"), EndpointType::End);
        assert_eq!(weight(&set(&["a"]), &t), Weight::Infinite);
    }
}
