//! Error categories shared by every module.
//!
//! Each module has its own error enum; all of them report an [`ErrorKind`]
//! so that the command-line front end can map failures to exit codes.

use std::fmt;

/// Coarse failure category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    /// Malformed input text (KB line, query text, TSV line).
    Parse,
    /// Well-formed input that names something outside the known schema.
    Schema,
    /// Input files that disagree with each other (line counts, ids).
    Alignment,
    /// Reading or writing failed.
    Io,
    /// Invalid configuration or a violated precondition.
    Config,
}

impl ErrorKind {
    /// Process exit code used by the `kgqa` binary for this category.
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Parse => 3,
            ErrorKind::Schema => 4,
            ErrorKind::Alignment => 5,
            ErrorKind::Io => 6,
            ErrorKind::Config => 7,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ErrorKind::Parse => "parse",
            ErrorKind::Schema => "schema",
            ErrorKind::Alignment => "alignment",
            ErrorKind::Io => "io",
            ErrorKind::Config => "config",
        };
        f.write_str(name)
    }
}
