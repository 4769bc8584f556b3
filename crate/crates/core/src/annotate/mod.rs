//! Question annotation: masked question text paired with a gold query
//! compiled from the dataset's inference-path label.

mod mapping;
mod sample;
mod tsv;

use std::collections::BTreeSet;
use std::fmt;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::error::ErrorKind;
use crate::kb::{EntityId, IdError};
use crate::query::{canonical_variable, Atom, Query, Term, ENT};

pub use mapping::{pair_predicate, PAIR_MAPPING};
pub use sample::{sample_training_set, stratum_sizes};
pub use tsv::{read_meta, write_annotated, write_meta, write_pairs};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("question `{question}`: {message}")]
    Format { question: String, message: String },
    #[error("inference path `{label}`: {message}")]
    Path { label: String, message: String },
    #[error("no predicate for inference pair `{0}`")]
    UnmappedPair(String),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{qa} question lines but {qtype} path labels")]
    Misaligned { qa: usize, qtype: usize },
    #[error("need {needed} {hop}-hop examples, only {available} available")]
    Capacity {
        hop: u8,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AnnotateError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            AnnotateError::Format { .. } | AnnotateError::Path { .. } | AnnotateError::Line { .. } => {
                ErrorKind::Parse
            }
            AnnotateError::UnmappedPair(_) => ErrorKind::Schema,
            AnnotateError::Misaligned { .. } => ErrorKind::Alignment,
            AnnotateError::Capacity { .. } => ErrorKind::Config,
            AnnotateError::Io(_) => ErrorKind::Io,
        }
    }

    /// Attaches a line number to errors raised while parsing one line.
    fn at_line(self, line: usize) -> AnnotateError {
        match self {
            AnnotateError::Line { line: 0, message } => AnnotateError::Line { line, message },
            AnnotateError::Io(_) | AnnotateError::Line { .. } => self,
            other => AnnotateError::Line {
                line,
                message: other.to_string(),
            },
        }
    }
}

/// Sequence of node types from question entity to answer, such as
/// `writer -> movie -> director`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct InferencePath {
    nodes: Vec<String>,
}

impl InferencePath {
    /// Parses a path label. Both `writer_movie_director` and the
    /// dataset's `writer_to_movie_to_director` spellings are accepted.
    pub fn parse(label: &str) -> Result<InferencePath, AnnotateError> {
        let label = label.trim();
        let nodes: Vec<String> = if label.contains("_to_") {
            label.split("_to_").map(str::to_owned).collect()
        } else {
            label.split('_').map(str::to_owned).collect()
        };
        let err = |message: &str| AnnotateError::Path {
            label: label.to_owned(),
            message: message.to_owned(),
        };
        if nodes.iter().any(|n| n.is_empty() || n.contains('_')) {
            return Err(err("empty or malformed node type"));
        }
        if !(2..=4).contains(&nodes.len()) {
            return Err(err("expected 1 to 3 hops"));
        }
        let path = InferencePath { nodes };
        for (from, to) in path.pairs() {
            if pair_predicate(from, to).is_none() {
                return Err(AnnotateError::UnmappedPair(format!("{from}_{to}")));
            }
        }
        Ok(path)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn hop_count(&self) -> u8 {
        (self.nodes.len() - 1) as u8
    }

    /// Adjacent node-type pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.nodes.windows(2).map(|w| (w[0].as_str(), w[1].as_str()))
    }

    /// Compiles the path to a chain query starting from `ENT`; atom `i`
    /// uses the predicate mapped from pair `i`.
    pub fn to_query(&self) -> Result<Query, AnnotateError> {
        let mut atoms = Vec::with_capacity(self.nodes.len() - 1);
        let mut subject = Term::Ent;
        for (i, (from, to)) in self.pairs().enumerate() {
            let predicate = pair_predicate(from, to)
                .ok_or_else(|| AnnotateError::UnmappedPair(format!("{from}_{to}")))?;
            let object = Term::Variable(canonical_variable(i));
            atoms.push(Atom::new(predicate, subject, object.clone()));
            subject = object;
        }
        Ok(Query::new(atoms).expect("compiled paths are chains"))
    }
}

impl fmt::Display for InferencePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.nodes.join("_"))
    }
}

/// Replaces the single bracketed entity mention with `ENT`.
///
/// Returns the masked question and the trimmed bracket content.
pub fn mask_question(raw: &str) -> Result<(String, EntityId), AnnotateError> {
    let fail = |message: &str| AnnotateError::Format {
        question: raw.to_owned(),
        message: message.to_owned(),
    };
    let opens = raw.matches('[').count();
    let closes = raw.matches(']').count();
    if opens != 1 || closes != 1 {
        return Err(fail("expected exactly one [bracketed] entity"));
    }
    let open = raw.find('[').expect("counted");
    let close = raw.find(']').expect("counted");
    if close < open {
        return Err(fail("']' before '['"));
    }
    let entity = EntityId::new(raw[open + 1..close].trim()).map_err(|e: IdError| fail(&e.to_string()))?;
    let masked = format!("{}{ENT}{}", &raw[..open], &raw[close + 1..]);
    if masked.matches(ENT).count() != 1 {
        return Err(fail("question already contains the ENT token"));
    }
    Ok((masked, entity))
}

/// One dataset question with its path label and gold answers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QAExample {
    pub id: String,
    pub raw_question: String,
    pub masked_question: String,
    pub entity: EntityId,
    pub path: InferencePath,
    pub gold_answers: BTreeSet<EntityId>,
}

impl QAExample {
    pub fn hop(&self) -> u8 {
        self.path.hop_count()
    }

    /// Example ids are `"{hop}hop-{line index}"`, unique across the three
    /// hop files of a split.
    pub fn make_id(hop: u8, ordinal: usize) -> String {
        format!("{hop}hop-{ordinal}")
    }
}

/// Masked question with its canonical gold query text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedPair {
    pub masked_question: String,
    pub gold_query_text: String,
}

pub fn annotate(example: &QAExample) -> Result<AnnotatedPair, AnnotateError> {
    let (masked_question, _) = mask_question(&example.raw_question)?;
    Ok(AnnotatedPair {
        masked_question,
        gold_query_text: example.path.to_query()?.to_string(),
    })
}

fn parse_answers(field: &str) -> Result<BTreeSet<EntityId>, AnnotateError> {
    let answers = field
        .split('|')
        .map(|a| EntityId::new(a.trim()))
        .collect::<Result<BTreeSet<_>, _>>()
        .map_err(|e| AnnotateError::Line {
            line: 0,
            message: format!("bad answer: {e}"),
        })?;
    Ok(answers)
}

/// Reads a `question<TAB>ans1|ans2|...` file together with its line-aligned
/// path-label file.
pub fn load_questions<Q: BufRead, T: BufRead>(
    qa: Q,
    qtype: T,
    hop: u8,
) -> Result<Vec<QAExample>, AnnotateError> {
    let qa_lines = non_trailing_lines(qa)?;
    let qtype_lines = non_trailing_lines(qtype)?;
    if qa_lines.len() != qtype_lines.len() {
        return Err(AnnotateError::Misaligned {
            qa: qa_lines.len(),
            qtype: qtype_lines.len(),
        });
    }
    qa_lines
        .iter()
        .zip(&qtype_lines)
        .enumerate()
        .map(|(ordinal, (qa_line, label))| {
            parse_example(qa_line, label, hop, ordinal).map_err(|e| e.at_line(ordinal + 1))
        })
        .collect()
}

fn parse_example(qa_line: &str, label: &str, hop: u8, ordinal: usize) -> Result<QAExample, AnnotateError> {
    let (question, answers) = qa_line.split_once('\t').ok_or_else(|| AnnotateError::Line {
        line: 0,
        message: "expected `question<TAB>answers`".into(),
    })?;
    let raw_question = question.trim().to_owned();
    let (masked_question, entity) = mask_question(&raw_question)?;
    let path = InferencePath::parse(label)?;
    if path.hop_count() != hop {
        return Err(AnnotateError::Path {
            label: label.to_owned(),
            message: format!("has {} hops, expected {hop}", path.hop_count()),
        });
    }
    Ok(QAExample {
        id: QAExample::make_id(hop, ordinal),
        raw_question,
        masked_question,
        entity,
        path,
        gold_answers: parse_answers(answers)?,
    })
}

/// All lines, minus a trailing run of empty lines.
fn non_trailing_lines<R: BufRead>(reader: R) -> Result<Vec<String>, AnnotateError> {
    let mut lines = reader
        .lines()
        .map(|l| l.map(|s| s.trim_end_matches('\r').to_owned()))
        .collect::<Result<Vec<_>, _>>()?;
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }
    Ok(lines)
}
