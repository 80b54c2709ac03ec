//! Crate-wide error type.
//!
//! Two failure families matter to callers: rejected inputs (bad scenario
//! values, malformed files) and numerical/runtime failures (degenerate
//! constraint geometry, event cascades, I/O). The CLI maps the former to
//! exit code 2 and the latter to exit code 1.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input value violated a named constraint.
    #[error("validation: {0}")]
    Validation(String),

    /// A structured input file could not be parsed. `line` is 1-based.
    #[error("parse error in {path}{}: {msg}", fmt_line(*.line))]
    Parse {
        path: PathBuf,
        line: Option<usize>,
        msg: String,
    },

    /// The math gave up: singular solve, event cascade, non-finite state.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn fmt_line(line: Option<usize>) -> String {
    match line {
        Some(n) => format!(":{n}"),
        None => String::new(),
    }
}

impl Error {
    /// True for errors the CLI reports as invalid input (exit code 2).
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Validation(_) | Error::Parse { .. })
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
