use serde_json::json;

/// CLI-layer errors; everything is rendered as machine-readable JSON on
/// stderr.
#[derive(Debug)]
pub enum CliError {
    Core(tomopoly::Error),
    Schema { path: String, message: String },
    Io { path: String, message: String },
    Usage(String),
}

impl From<tomopoly::Error> for CliError {
    fn from(e: tomopoly::Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Schema { path, message } => write!(f, "schema error at '{path}': {message}"),
            CliError::Io { path, message } => write!(f, "io error on '{path}': {message}"),
            CliError::Usage(m) => write!(f, "usage error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn kind(&self) -> String {
        match self {
            CliError::Core(e) => e.kind().to_string(),
            CliError::Schema { .. } => "SchemaError".to_string(),
            CliError::Io { .. } => "IoError".to_string(),
            CliError::Usage(_) => "UsageError".to_string(),
        }
    }

    /// Exit code: 2 for usage problems, 1 for domain errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            CliError::Schema { path, message } => json!({
                "error": self.kind(),
                "path": path,
                "message": message,
            }),
            other => json!({
                "error": other.kind(),
                "message": other.to_string(),
            }),
        }
    }
}
