//! Environments, `tail`, heap typing and process typing.

pub mod env;
pub mod error;
pub mod heap;
pub mod tail;
pub mod typing;

pub use env::{env_add, env_merge, split_env, TypeEnv};
pub use error::{ErrorKind, TypeError};
pub use heap::{check_heap, HeapVerdict};
pub use tail::{tail, MessageSpec};
pub use typing::{effective_fn, typecheck, typecheck_closed, ProcVarEnv, Warning};
