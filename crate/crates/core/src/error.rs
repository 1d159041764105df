use std::fmt;

use thiserror::Error;

/// One failed check on an input document or value, with the path of the
/// offending field (e.g. `f.a` or `mu.shape`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub path: String,
    pub reason: String,
}

impl Issue {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation failed: {}", join(.0))]
    Validation(Vec<Issue>),

    #[error("unknown interaction function `{0}`")]
    UnknownFunction(String),

    #[error("arity mismatch: {0}")]
    Arity(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("parse error at {location}: {reason}")]
    Parse { location: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn join(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    pub fn invalid(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation(vec![Issue::new(path, reason)])
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::UnknownFunction(_) | Error::Arity(_) => 2,
            Error::Parse { .. } => 2,
            Error::Divergent(_) | Error::Numeric(_) | Error::NotConverged(_) => 3,
            Error::Io { .. } => 4,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Validation(_) => "validation",
            Error::UnknownFunction(_) => "unknown_function",
            Error::Arity(_) => "arity",
            Error::Divergent(_) => "divergent",
            Error::Numeric(_) => "numeric",
            Error::NotConverged(_) => "not_converged",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub fn issues(&self) -> Vec<Issue> {
        match self {
            Error::Validation(v) => v.clone(),
            _ => Vec::new(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Collects validation issues and turns them into a single error.
#[derive(Debug, Default)]
pub(crate) struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn check(&mut self, ok: bool, path: impl Into<String>, reason: impl Into<String>) {
        if !ok {
            self.issues.push(Issue::new(path, reason));
        }
    }

    pub fn push(&mut self, issue: Issue) {
        self.issues.push(issue);
    }

    pub fn absorb(&mut self, prefix: &str, err: Error) {
        match err {
            Error::Validation(v) => {
                for i in v {
                    let path = if prefix.is_empty() {
                        i.path
                    } else if i.path.is_empty() {
                        prefix.to_string()
                    } else {
                        format!("{prefix}.{}", i.path)
                    };
                    self.issues.push(Issue::new(path, i.reason));
                }
            }
            other => self.issues.push(Issue::new(prefix, other.to_string())),
        }
    }

    pub fn finish(self) -> Result<()> {
        if self.issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self.issues))
        }
    }
}
