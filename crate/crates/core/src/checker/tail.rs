//! Residual type of a receiving endpoint after queued messages.

use std::collections::BTreeMap;

use serde::Serialize;

use super::error::{ErrorKind, TypeError};
use crate::algebra::subtype_qualified;
use crate::syntax::{Branch, EndpointType, Polarity, Type};
use crate::Tag;

/// `m<S>(s)`: a message described by its type arguments and argument types.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MessageSpec {
    pub tag: Tag,
    pub tyargs: Vec<EndpointType>,
    pub argtypes: Vec<Type>,
}

/// The branch `tag` of `t` (after unfolding) with its parameters
/// instantiated by `tyargs`: returns the argument types and continuation.
pub fn instantiate(t: &EndpointType, pol: Polarity, tag: &Tag, tyargs: &[EndpointType]) -> Result<(Vec<Type>, EndpointType), TypeError> {
    let u = t.unfold_all();
    let EndpointType::Choice(p, _) = &u else {
        return Err(TypeError::new(ErrorKind::NoSuchTag, format!("{t} offers no {} prefix", pol.sigil())));
    };
    if *p != pol {
        return Err(TypeError::new(ErrorKind::NoSuchTag, format!("{t} offers no {} prefix", pol.sigil())));
    }
    let Some(b) = u.branch(tag) else {
        return Err(TypeError::new(ErrorKind::NoSuchTag, format!("{t} has no branch {tag}")));
    };
    instantiate_branch(b, tyargs)
}

pub fn instantiate_branch(b: &Branch, tyargs: &[EndpointType]) -> Result<(Vec<Type>, EndpointType), TypeError> {
    if b.params.len() != tyargs.len() {
        return Err(TypeError::new(
            ErrorKind::NoSuchTag,
            format!("{} expects {} type argument(s), got {}", b.tag, b.params.len(), tyargs.len()),
        ));
    }
    if b.params.is_empty() {
        return Ok((b.args.clone(), b.cont.clone()));
    }
    let map: BTreeMap<_, _> = b.params.iter().cloned().zip(tyargs.iter().cloned()).collect();
    let args = b.args.iter().map(|a| Type { qual: a.qual, body: a.body.subst_many(&map) }).collect();
    Ok((args, b.cont.subst_many(&map)))
}

/// One step of `tail`.
pub fn tail1(t: &EndpointType, m: &MessageSpec) -> Result<EndpointType, TypeError> {
    let (args, cont) = instantiate(t, Polarity::In, &m.tag, &m.tyargs)?;
    if args.len() != m.argtypes.len() {
        return Err(TypeError::new(
            ErrorKind::NoSuchTag,
            format!("{} expects {} argument(s), got {}", m.tag, args.len(), m.argtypes.len()),
        ));
    }
    for (s, t) in m.argtypes.iter().zip(&args) {
        if !subtype_qualified(s, t) {
            return Err(TypeError::new(ErrorKind::ArgSubtypeFail, format!("{s} is not a subtype of {t}")));
        }
    }
    Ok(cont)
}

/// `tail(T, m1 ... mn)`.
pub fn tail(t: &EndpointType, specs: &[MessageSpec]) -> Result<EndpointType, TypeError> {
    specs.iter().try_fold(t.clone(), |acc, m| tail1(&acc, m))
}
