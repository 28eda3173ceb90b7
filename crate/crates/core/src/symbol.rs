//! Identifiers shared by every syntactic sort.
//!
//! A [`Symbol`] is a textual name plus a numeric stamp. Stamp `0` is what the
//! user wrote; renaming a binder apart keeps the name and picks a stamp that
//! is larger than every stamp in the terms involved, so freshness never
//! depends on global state and every run is reproducible.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    name: Arc<str>,
    stamp: u32,
}

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol { name: Arc::from(name), stamp: 0 }
    }

    pub fn with_stamp(name: &str, stamp: u32) -> Self {
        Symbol { name: Arc::from(name), stamp }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stamp(&self) -> u32 {
        self.stamp
    }

    /// Same name, different stamp.
    pub fn restamp(&self, stamp: u32) -> Self {
        Symbol { name: self.name.clone(), stamp }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.stamp == 0 {
            write!(f, "{}", self.name)
        } else {
            write!(f, "{}'{}", self.name, self.stamp)
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Symbol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Type variables are plain symbols.
pub type TyVar = Symbol;

/// Message tags. Tags are never bound, so they carry no stamp.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag(Arc<str>);

impl Tag {
    pub fn new(name: &str) -> Self {
        Tag(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Tag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

/// Supply of fresh stamps strictly above a known bound.
#[derive(Debug, Clone)]
pub struct Fresh {
    next: u32,
}

impl Fresh {
    /// Every symbol produced has a stamp greater than `max_seen`.
    pub fn above(max_seen: u32) -> Self {
        Fresh { next: max_seen + 1 }
    }

    pub fn rename(&mut self, base: &Symbol) -> Symbol {
        let s = base.restamp(self.next);
        self.next += 1;
        s
    }

    pub fn named(&mut self, name: &str) -> Symbol {
        let s = Symbol::with_stamp(name, self.next);
        self.next += 1;
        s
    }

    pub fn watermark(&self) -> u32 {
        self.next
    }
}
