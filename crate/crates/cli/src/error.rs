use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable file, malformed JSON, unknown or missing keys (exit 2).
    Parse(String),
    /// Well-formed input that fails a unit or physics check (exit 3).
    Validation { field: String, reason: String },
    /// Failure during computation or while writing results (exit 4).
    Runtime(String),
}

impl CliError {
    pub fn validation(field: impl Into<String>, reason: impl fmt::Display) -> Self {
        CliError::Validation { field: field.into(), reason: reason.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation { .. } => 3,
            CliError::Runtime(_) => 4,
        }
    }

    /// One JSON line for the error stream.
    pub fn machine_line(&self) -> String {
        let value = match self {
            CliError::Parse(reason) => serde_json::json!({ "error": "parse", "reason": reason }),
            CliError::Validation { field, reason } => {
                serde_json::json!({ "error": "validation", "field": field, "reason": reason })
            }
            CliError::Runtime(reason) => serde_json::json!({ "error": "runtime", "reason": reason }),
        };
        value.to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.machine_line())
    }
}

impl std::error::Error for CliError {}

/// Errors from the library raised while building a model are validation
/// failures; the same errors during a run are runtime failures.
pub fn building(field: &str) -> impl FnOnce(sigrav::Error) -> CliError + '_ {
    move |e| CliError::validation(field, e)
}

pub fn running(e: sigrav::Error) -> CliError {
    CliError::Runtime(e.to_string())
}
