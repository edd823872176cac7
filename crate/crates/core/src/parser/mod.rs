//! Text formats: the expression language and system definition files.

mod expr;
mod format;
mod lexer;
mod system_file;

pub use expr::{is_reserved, parse_expression, ContextError, ParseContext, ParseError, ParseErrorKind};
pub use format::format_expression;
pub use system_file::{
    format_system_file, parse_system_file, IntegralEntry, RelationEntry, SymmetryEntry, SystemFileError,
    SystemSpec,
};
