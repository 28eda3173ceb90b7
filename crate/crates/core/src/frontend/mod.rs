//! Concrete syntax: lexer, parser and program assembly.

pub mod lexer;
pub mod parser;

pub use lexer::ParseError;
pub use parser::{parse_etype, parse_process, parse_program, parse_type, parse_type_opt_qual, SourceProgram, TypeDef};

/// `// expect-KEY: VALUE` annotations in a source file, in order.
pub fn expectations(src: &str) -> Vec<(String, String)> {
    src.lines()
        .filter_map(|l| l.trim().strip_prefix("// expect-"))
        .filter_map(|rest| rest.split_once(':'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
