use std::fmt;

use l0stable_core::{Error, Event};
use serde_json::{json, Value};

/// Exit code for malformed or inconsistent input.
pub const EXIT_INVALID: i32 = 2;
/// Exit code for a well-formed input on which the mathematics fails.
pub const EXIT_MATH: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Unreadable file or JSON that does not match the schema.
    Parse { path: String, message: String },
    /// Parsed input that violates an invariant.
    Validation { path: String, message: String },
    Math(Error),
}

impl CliError {
    pub fn parse(path: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Parse { path: path.into(), message: message.to_string() }
    }

    pub fn invalid(path: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Validation { path: path.into(), message: message.to_string() }
    }

    /// Routes a core error: input problems keep the field path, the rest
    /// are mathematical failures.
    pub fn at(path: impl Into<String>, e: Error) -> Self {
        if is_input_error(&e) {
            CliError::invalid(path, e)
        } else {
            CliError::Math(e)
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Validation { .. } => EXIT_INVALID,
            CliError::Math(_) => EXIT_MATH,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Parse { path, message } => {
                json!({"kind": "ParseError", "path": path, "message": message})
            }
            CliError::Validation { path, message } => {
                json!({"kind": "ValidationError", "path": path, "message": message})
            }
            CliError::Math(e) => math_json(e),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { path, message } => write!(f, "parse error at {path}: {message}"),
            CliError::Validation { path, message } => write!(f, "validation error at {path}: {message}"),
            CliError::Math(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::at("$", e)
    }
}

fn is_input_error(e: &Error) -> bool {
    matches!(
        e,
        Error::AlgebraMismatch
            | Error::ArityError { .. }
            | Error::InvalidAlgebra(_)
            | Error::InvalidPartition(_)
            | Error::InvalidInput(_)
            | Error::GridMismatch(_)
            | Error::DimensionUnsupported { .. }
            | Error::RadiusNotStrictlyPositive { .. }
    )
}

fn atoms_of(ev: &Event) -> Vec<usize> {
    ev.atoms().collect()
}

fn math_json(e: &Error) -> Value {
    let message = e.to_string();
    match e {
        Error::NotDisjoint(ev) => json!({"kind": "NotDisjoint", "event": atoms_of(ev), "message": message}),
        Error::NotInSpan(ev) => json!({"kind": "NotInSpan", "event": atoms_of(ev), "message": message}),
        Error::MaxIterations { cap, unconverged } => json!({
            "kind": "MaxIterations", "cap": cap, "event": atoms_of(unconverged), "message": message
        }),
        Error::ConstructionImpossible { prefix } => {
            json!({"kind": "ConstructionImpossible", "prefix": prefix, "message": message})
        }
        Error::DimensionOverflow { dim, limit } => {
            json!({"kind": "DimensionOverflow", "dim": dim, "limit": limit, "message": message})
        }
        Error::NotEnumerable { atom }
        | Error::DominationViolated { atom }
        | Error::NotSublinear { atom }
        | Error::RateNotContractive { atom }
        | Error::TranslatorInvalid { atom }
        | Error::RadiusNotStrictlyPositive { atom } => {
            json!({"kind": kind_name(e), "atom": atom, "message": message})
        }
        _ => json!({"kind": kind_name(e), "message": message}),
    }
}

fn kind_name(e: &Error) -> &'static str {
    match e {
        Error::AlgebraMismatch => "AlgebraMismatch",
        Error::ArityError { .. } => "ArityError",
        Error::InvalidAlgebra(_) => "InvalidAlgebra",
        Error::InvalidPartition(_) => "InvalidPartition",
        Error::InvalidInput(_) => "InvalidInput",
        Error::NotEnumerable { .. } => "NotEnumerable",
        Error::NotStable => "NotStable",
        Error::DimensionUnsupported { .. } => "DimensionUnsupported",
        Error::DimensionOverflow { .. } => "DimensionOverflow",
        Error::NotInSpan(_) => "NotInSpan",
        Error::DominationViolated { .. } => "DominationViolated",
        Error::NotSublinear { .. } => "NotSublinear",
        Error::NonLocal => "NonLocal",
        Error::RadiusNotStrictlyPositive { .. } => "RadiusNotStrictlyPositive",
        Error::ConstructionImpossible { .. } => "ConstructionImpossible",
        Error::GridMismatch(_) => "GridMismatch",
        Error::RateNotContractive { .. } => "RateNotContractive",
        Error::MaxIterations { .. } => "MaxIterations",
        Error::NotDisjoint(_) => "NotDisjoint",
        Error::TranslatorInvalid { .. } => "TranslatorInvalid",
    }
}

pub type CliResult<T> = Result<T, CliError>;
