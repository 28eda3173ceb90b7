use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ErrorKind {
    UnknownName,
    QualifierMismatch,
    NotWellFormed,
    NoSuchTag,
    ArgSubtypeFail,
    WeightInfinite,
    EnvConflict,
    LinearUnused,
    SplitFail,
    DualMismatch,
    RecVarMismatch,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A rejection: one kind, the path of constructors leading to the
/// offending subterm, and a message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct TypeError {
    pub kind: ErrorKind,
    pub path: String,
    pub message: String,
}

impl TypeError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        TypeError { kind, path: String::new(), message: message.into() }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "." } else { &self.path };
        write!(f, "{} @ {} : {}", self.kind, path, self.message)
    }
}
