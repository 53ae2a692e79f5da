use std::fmt;

use thiserror::Error;

use crate::ast::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Lex,
    Syntax,
    Unbound,
    Arity,
    Type,
    Duplicate,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Lex => "lexical error",
            Kind::Syntax => "syntax error",
            Kind::Unbound => "unbound identifier",
            Kind::Arity => "arity mismatch",
            Kind::Type => "type mismatch",
            Kind::Duplicate => "duplicate definition",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {kind}: {message}")]
pub struct FrontendError {
    pub kind: Kind,
    pub span: Span,
    pub message: String,
}

impl FrontendError {
    pub fn new(kind: Kind, span: Span, message: impl Into<String>) -> Self {
        FrontendError { kind, span, message: message.into() }
    }
}
