use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] dimmsb_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: weight {value} is not 0 or 1")]
    NonBinaryWeight { line: usize, value: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown experiment id {0} (expected 1..=7)")]
    UnknownId(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, message: message.into() }
    }

    /// Process exit code for this error.
    ///
    /// 2 configuration, 3 degree precondition, 4 rank, 5 I/O and parsing,
    /// 6 numerical failure, 7 graph structure.
    pub fn exit_code(&self) -> i32 {
        use dimmsb_core::Error as E;
        match self {
            Error::Core(e) => match e {
                E::ZeroDegreeNode { .. } | E::AllNodesRemoved => 3,
                E::RankDeficient { .. } | E::RankCollapse { .. } => 4,
                E::ConvergenceFailure { .. } | E::SingularCornerMatrix { .. } => 6,
                E::NotSquare | E::EmptyIntersection => 7,
                _ => 2,
            },
            Error::Config(_) | Error::UnknownId(_) => 2,
            Error::Io { .. } | Error::Parse { .. } | Error::NonBinaryWeight { .. } | Error::Json(_) | Error::Csv(_) => {
                5
            }
        }
    }
}
