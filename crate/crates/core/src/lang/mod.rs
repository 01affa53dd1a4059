// SPDX-License-Identifier: Apache-2.0

//! SCL: an Eiffel-flavoured language of routines with contracts.

pub mod ast;
mod lexer;
mod parser;
mod printer;
mod typecheck;

use thiserror::Error;

pub use ast::*;
pub use parser::{parse_expr, parse_program};
pub use printer::{pretty_print, print_block, print_expr, print_routine};
pub use typecheck::{check_routine, typecheck, Diagnostic, Severity};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: duplicate name `{name}`")]
    DuplicateName { span: Span, name: String },
    #[error("{span}: undeclared identifier `{name}`")]
    Undeclared { span: Span, name: String },
}

impl ParseError {
    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::DuplicateName { span, .. }
            | ParseError::Undeclared { span, .. } => *span,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let message = match self {
            ParseError::Syntax { message, .. } => message.clone(),
            ParseError::DuplicateName { name, .. } => format!("duplicate name `{name}`"),
            ParseError::Undeclared { name, .. } => format!("undeclared identifier `{name}`"),
        };
        Diagnostic::error(self.span(), message)
    }
}
