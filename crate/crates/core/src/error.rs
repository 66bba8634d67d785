use thiserror::Error;

use crate::grid_model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid diagram: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{what}: {count} exceeds the ceiling {ceiling} (set LENSGRID_CEILING to raise it)")]
    Ceiling {
        what: &'static str,
        count: u128,
        ceiling: u128,
    },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("sign constraints are inconsistent: {0}")]
    Unsolvable(String),
    #[error("{0}")]
    Format(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
