use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("usage: {0}")]
    Usage(String),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: kawlab_core::Error,
    },
    #[error("{} claim(s) failed: {}", .0.len(), .0.join("; "))]
    Check(Vec<String>),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn config(line: usize, msg: impl Into<String>) -> Self {
        HarnessError::Config {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures, 4 for failed checks and 1 for i/o.
    pub fn exit_code(&self) -> i32 {
        use kawlab_core::Error as E;
        match self {
            HarnessError::Config { .. } | HarnessError::Usage(_) => 2,
            HarnessError::Stage { source, .. } => match source {
                E::Argument(_) | E::Parse { .. } => 2,
                E::Io(_) => 1,
                _ => 3,
            },
            HarnessError::Check(_) => 4,
            HarnessError::Io { .. } => 1,
        }
    }
}

/// Attaches a stage name to a core error.
pub fn stage<T>(name: &str, r: kawlab_core::Result<T>) -> Result<T> {
    r.map_err(|source| HarnessError::Stage {
        stage: name.to_string(),
        source,
    })
}
