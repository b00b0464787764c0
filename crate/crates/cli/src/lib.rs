//! Support code for the `hyperforge` command-line tool.

pub mod export;
pub mod expr;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hyperforge::Error),
    #[error(transparent)]
    Parse(#[from] expr::ParseError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// Machine-readable code; each code has its own exit status.
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Parse(expr::ParseError::Syntax { .. }) => "element_syntax",
            CliError::Parse(expr::ParseError::ConstantTerm { .. }) => "constant_term",
            CliError::Parse(expr::ParseError::Element(e)) => e.code(),
            CliError::Csv(_) => "csv_error",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_status(&self) -> i32 {
        exit_status(self.code())
    }

    /// Character offset for syntax errors.
    pub fn position(&self) -> Option<usize> {
        match self {
            CliError::Parse(
                expr::ParseError::Syntax { pos, .. } | expr::ParseError::ConstantTerm { pos },
            ) => Some(*pos),
            _ => None,
        }
    }
}

/// Exit status per error code; 1 is reserved for reports that ran but failed.
pub fn exit_status(code: &str) -> i32 {
    match code {
        "usage" => 2,
        "invalid_input" => 3,
        "search_exhausted" => 4,
        "no_witness" => 5,
        "property_b_condition_i" => 6,
        "missing_prerequisite" => 7,
        "degenerate_element" => 8,
        "io_error" => 9,
        "json_error" => 10,
        "element_syntax" => 11,
        "constant_term" => 12,
        "csv_error" => 13,
        _ => 70,
    }
}
