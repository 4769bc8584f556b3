//! MetaQA directory layout.
//!
//! ```text
//! <root>/kb.txt
//! <root>/{1,2,3}-hop/vanilla/qa_{train,dev,test}.txt
//! <root>/{1,2,3}-hop/qa_{train,dev,test}_qtype.txt
//! ```
//!
//! Question files are also found directly under `<root>/{k}-hop/`, and
//! label files under `vanilla/`.

use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::annotate::{load_questions, AnnotateError, QAExample};
use crate::error::ErrorKind;

pub const HOPS: [u8; 3] = [1, 2, 3];

/// Deduplicated base facts in the MetaQA KB.
pub const KB_BASE_FACTS: usize = 134_741;

/// Hop-1/2/3 question counts of each split.
pub const TRAIN_COUNTS: [usize; 3] = [96_106, 118_980, 114_196];
pub const DEV_COUNTS: [usize; 3] = [9_992, 14_872, 14_274];
pub const TEST_COUNTS: [usize; 3] = [9_947, 14_872, 14_274];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Dev, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Dev => "dev",
            Split::Test => "test",
        }
    }

    /// Published per-hop question counts.
    pub fn expected_counts(self) -> [usize; 3] {
        match self {
            Split::Train => TRAIN_COUNTS,
            Split::Dev => DEV_COUNTS,
            Split::Test => TEST_COUNTS,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}` (expected train, dev or test)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {}", .0.display())]
    Missing(PathBuf),
    #[error("{}: {source}", path.display())]
    Annotate {
        path: PathBuf,
        #[source]
        source: AnnotateError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DatasetError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            DatasetError::Missing(_) | DatasetError::Io { .. } => ErrorKind::Io,
            DatasetError::Annotate { source, .. } => source.kind(),
        }
    }
}

pub fn kb_path(root: &Path) -> PathBuf {
    root.join("kb.txt")
}

fn first_existing(candidates: [PathBuf; 2]) -> Result<PathBuf, DatasetError> {
    for path in &candidates {
        if path.is_file() {
            return Ok(path.clone());
        }
    }
    let [primary, _] = candidates;
    Err(DatasetError::Missing(primary))
}

pub fn qa_path(root: &Path, hop: u8, split: Split) -> Result<PathBuf, DatasetError> {
    let dir = root.join(format!("{hop}-hop"));
    let file = format!("qa_{split}.txt");
    first_existing([dir.join("vanilla").join(&file), dir.join(&file)])
}

pub fn qtype_path(root: &Path, hop: u8, split: Split) -> Result<PathBuf, DatasetError> {
    let dir = root.join(format!("{hop}-hop"));
    let file = format!("qa_{split}_qtype.txt");
    first_existing([dir.join(&file), dir.join("vanilla").join(&file)])
}

fn open(path: &Path) -> Result<BufReader<File>, DatasetError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|source| DatasetError::Io {
            path: path.to_owned(),
            source,
        })
}

/// Loads one hop of a split.
pub fn load_hop(root: &Path, hop: u8, split: Split) -> Result<Vec<QAExample>, DatasetError> {
    let qa = qa_path(root, hop, split)?;
    let qtype = qtype_path(root, hop, split)?;
    load_questions(open(&qa)?, open(&qtype)?, hop)
        .map_err(|source| DatasetError::Annotate { path: qa, source })
}

/// Loads hops 1, 2 and 3 of a split.
pub fn load_split(root: &Path, split: Split) -> Result<[Vec<QAExample>; 3], DatasetError> {
    Ok([
        load_hop(root, 1, split)?,
        load_hop(root, 2, split)?,
        load_hop(root, 3, split)?,
    ])
}
