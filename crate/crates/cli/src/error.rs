use std::path::PathBuf;

use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("malformed CSV in {path}: {message}")]
    MalformedCsv { path: PathBuf, message: String },

    #[error("non-numeric value {value:?} in {path} at row {row}, column {column}")]
    NonNumeric {
        path: PathBuf,
        row: usize,
        column: usize,
        value: String,
    },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("invalid config file {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] sdib::Error),

    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    /// 2 for bad input, 3 for strict-mode numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Write { .. } => 1,
            Self::NotConverged(_) => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Read { .. } => "read_error",
            Self::Write { .. } => "write_error",
            Self::MalformedCsv { .. } => "malformed_csv",
            Self::NonNumeric { .. } => "non_numeric",
            Self::Invalid(_) => "invalid_argument",
            Self::Config { .. } => "invalid_config",
            Self::Core(e) => match e {
                sdib::Error::DimensionMismatch { .. } => "dimension_mismatch",
                sdib::Error::LengthMismatch { .. } => "length_mismatch",
                sdib::Error::InfeasibleSpec(_) => "infeasible_spec",
                sdib::Error::ConstantFeature(_) => "constant_feature",
                sdib::Error::DegenerateMi => "degenerate_mi",
                sdib::Error::InsufficientPoints { .. } => "insufficient_points",
                sdib::Error::InvalidConfig(_) => "invalid_config",
                _ => "numerical_error",
            },
            Self::NotConverged(_) => "not_converged",
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        let mut obj = json!({ "error": self.kind(), "message": self.to_string() });
        if let Self::NonNumeric { row, column, .. } = self {
            obj["row"] = json!(row);
            obj["column"] = json!(column);
        }
        obj.to_string()
    }
}

pub type CliResult<T> = Result<T, CliError>;
