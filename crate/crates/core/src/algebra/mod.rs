//! Type algebra: well-formedness, duality, subtyping and weights.

pub mod dual;
pub mod oracle;
pub mod subtype;
pub mod weight;
pub mod wf;

pub use dual::{dual, is_dual_pair};
pub use oracle::{subtype_oracle, weight_oracle};
pub use subtype::{equivalent, make_independent, subtype, subtype_qualified};
pub use weight::{weight, Weight};
pub use wf::{check_qualified, check_wf, is_wf, TyVarSet};

use crate::symbol::TyVar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("outer and inner contexts overlap on `{0}`")]
    OverlappingContexts(TyVar),
    #[error("dual undefined: `{0}` occurs free outside every prefix")]
    TopLevelFreeVar(TyVar),
}
