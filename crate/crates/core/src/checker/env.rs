//! Type environments and the `+` operation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use super::error::{ErrorKind, TypeError};
use crate::algebra::subtype::equivalent_qualified;
use crate::syntax::{Name, Qualifier, Type};

/// Finite map from names to qualified types.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeEnv {
    map: BTreeMap<Name, Type>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv::default()
    }

    pub fn get(&self, u: &Name) -> Option<&Type> {
        self.map.get(u)
    }

    pub fn contains(&self, u: &Name) -> bool {
        self.map.contains_key(u)
    }

    pub fn dom(&self) -> BTreeSet<Name> {
        self.map.keys().cloned().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Type)> {
        self.map.iter()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Unconditional update; callers are responsible for linearity.
    pub fn insert(&mut self, u: Name, t: Type) {
        self.map.insert(u, t);
    }

    pub fn remove(&mut self, u: &Name) -> Option<Type> {
        self.map.remove(u)
    }

    /// `Γ|q`.
    pub fn restrict(&self, q: Qualifier) -> TypeEnv {
        TypeEnv { map: self.map.iter().filter(|(_, t)| t.qual == q).map(|(u, t)| (u.clone(), t.clone())).collect() }
    }

    pub fn lin_dom(&self) -> BTreeSet<Name> {
        self.map.iter().filter(|(_, t)| t.is_lin()).map(|(u, _)| u.clone()).collect()
    }

    pub fn is_un(&self) -> bool {
        self.map.values().all(|t| !t.is_lin())
    }

    /// Same domain and pointwise equivalent types.
    pub fn equivalent(&self, other: &TypeEnv) -> bool {
        self.map.len() == other.map.len()
            && self.map.iter().all(|(u, t)| other.get(u).is_some_and(|s| equivalent_qualified(t, s)))
    }
}

impl FromIterator<(Name, Type)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Name, Type)>>(iter: I) -> Self {
        TypeEnv { map: iter.into_iter().collect() }
    }
}

impl fmt::Display for TypeEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (u, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{u}: {t}")?;
        }
        f.write_str("}")
    }
}

impl Serialize for TypeEnv {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_map(self.map.iter().map(|(u, t)| (u.to_string(), t.to_string())))
    }
}

/// `Γ + u : t`.
pub fn env_add(env: &TypeEnv, u: &Name, t: &Type) -> Result<TypeEnv, TypeError> {
    match env.get(u) {
        None => {
            let mut out = env.clone();
            out.insert(u.clone(), t.clone());
            Ok(out)
        }
        Some(old) if !t.is_lin() && !old.is_lin() && equivalent_qualified(old, t) => Ok(env.clone()),
        Some(old) => Err(TypeError::new(ErrorKind::EnvConflict, format!("cannot add {u}: {t}, already bound to {old}"))),
    }
}

/// `Γ1 + Γ2`, pointwise.
pub fn env_merge(a: &TypeEnv, b: &TypeEnv) -> Result<TypeEnv, TypeError> {
    let mut out = a.clone();
    for (u, t) in b.iter() {
        out = env_add(&out, u, t)?;
    }
    Ok(out)
}

/// Splits `Γ` for `P | Q`: linear bindings follow the free names, and
/// unrestricted bindings go to both halves.
pub fn split_env(env: &TypeEnv, fn_p: &BTreeSet<Name>, fn_q: &BTreeSet<Name>) -> Result<(TypeEnv, TypeEnv), TypeError> {
    let (mut l, mut r) = (TypeEnv::new(), TypeEnv::new());
    for (u, t) in env.iter() {
        if !t.is_lin() {
            l.insert(u.clone(), t.clone());
            r.insert(u.clone(), t.clone());
            continue;
        }
        match (fn_p.contains(u), fn_q.contains(u)) {
            (true, true) => return Err(TypeError::new(ErrorKind::SplitFail, format!("linear {u} is used on both sides of |"))),
            (false, false) => return Err(TypeError::new(ErrorKind::SplitFail, format!("linear {u} is used on neither side of |"))),
            (true, false) => l.insert(u.clone(), t.clone()),
            (false, true) => r.insert(u.clone(), t.clone()),
        }
    }
    Ok((l, r))
}
