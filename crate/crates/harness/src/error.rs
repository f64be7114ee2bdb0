use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    /// Invalid configuration; `path` is the offending field, empty for the
    /// document root.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{file}: {source}")]
    InFile {
        file: PathBuf,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("check failed to run: {0}")]
    Check(#[from] evidence_duality::Error),
    #[error("csv error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("check `{check}` belongs to subcommand `{expected}`, not `{given}`")]
    WrongSubcommand {
        check: String,
        expected: &'static str,
        given: &'static str,
    },
}

impl HarnessError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn in_file(self, file: &Path) -> Self {
        HarnessError::InFile {
            file: file.to_path_buf(),
            source: Box::new(self),
        }
    }

    /// Every error the harness raises is a configuration or environment
    /// error; violations are reported, not raised.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
