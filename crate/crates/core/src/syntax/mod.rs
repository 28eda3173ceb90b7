//! Abstract syntax of types and processes.

pub mod process;
pub mod types;

pub use process::{Name, NameAnalysis, Process, RecvBranch, Subst};
pub use types::{Branch, EndpointType, Polarity, Qualifier, SyntaxError, Type};
