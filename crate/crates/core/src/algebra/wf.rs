//! Well-formedness of endpoint types.

use std::collections::BTreeSet;

use crate::algebra::AlgebraError;
use crate::symbol::TyVar;
use crate::syntax::{EndpointType, Qualifier, Type};

pub type TyVarSet = BTreeSet<TyVar>;

/// `outer; inner ⊩ t`. Binders that shadow an enclosing variable are
/// treated as renamed apart.
pub fn check_wf(outer: &TyVarSet, inner: &TyVarSet, t: &EndpointType) -> Result<bool, AlgebraError> {
    if let Some(a) = outer.intersection(inner).next() {
        return Err(AlgebraError::OverlappingContexts(a.clone()));
    }
    Ok(wf(outer, inner, t))
}

fn wf(outer: &TyVarSet, inner: &TyVarSet, t: &EndpointType) -> bool {
    match t {
        EndpointType::End => true,
        EndpointType::Var(a) => outer.contains(a) && !inner.contains(a),
        EndpointType::Rec(a, body) => {
            let mut o = outer.clone();
            o.insert(a.clone());
            let mut i = inner.clone();
            i.remove(a);
            wf(&o, &i, body)
        }
        EndpointType::Choice(_, bs) => bs.iter().all(|b| {
            let mut arg_outer: TyVarSet = outer.union(inner).cloned().collect();
            arg_outer.extend(b.params.iter().cloned());
            let empty = TyVarSet::new();
            let args_ok = b.args.iter().all(|s| wf(&arg_outer, &empty, &s.body));
            let mut o = outer.clone();
            let mut i = inner.clone();
            for p in &b.params {
                o.remove(p);
                i.insert(p.clone());
            }
            args_ok && wf(&o, &i, &b.cont)
        }),
    }
}

/// `Δ ⊩ T`, i.e. `Δ; ∅ ⊩ T`.
pub fn is_wf(delta: &TyVarSet, t: &EndpointType) -> bool {
    wf(delta, &TyVarSet::new(), t)
}

/// Shape required of unrestricted types: `rec a.!{m_i<..>(..).a}`.
pub fn is_invariant_output(t: &EndpointType) -> bool {
    match t {
        EndpointType::Rec(a, body) => match &**body {
            EndpointType::Choice(crate::syntax::Polarity::Out, bs) => {
                bs.iter().all(|b| matches!(&b.cont, EndpointType::Var(v) if v == a) && !b.params.contains(a))
            }
            _ => false,
        },
        _ => false,
    }
}

/// Well-formedness of a qualified type plus the unrestricted shape rule.
pub fn check_qualified(delta: &TyVarSet, t: &Type) -> bool {
    is_wf(delta, &t.body) && (t.qual == Qualifier::Lin || is_invariant_output(&t.body))
}
