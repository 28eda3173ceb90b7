//! Type checker and heap-faithful simulator for a calculus of copyless
//! message passing with polymorphic endpoint types.

pub mod symbol;
pub mod algebra;
pub mod checker;
pub mod cli;
pub mod frontend;
pub mod generate;
pub mod runtime;
pub mod syntax;

pub use symbol::{Fresh, Symbol, Tag, TyVar};
