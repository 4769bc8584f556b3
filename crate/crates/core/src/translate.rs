//! Question to query translation.
//!
//! Two translators ship with the crate: [`GoldTranslator`] compiles the
//! dataset path label, and [`FileTranslator`] replays query text produced by
//! an external model, read from a predictions TSV
//! (`example_id<TAB>predicted_query_text`).

use std::collections::BTreeMap;
use std::io::BufRead;

use thiserror::Error;

use crate::annotate::{AnnotateError, QAExample};
use crate::error::ErrorKind;
use crate::query::{parse_query_with, Query, QueryError, RelationSchema};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Parsed(Query),
    ParseFailure(QueryError),
    /// The translator had nothing for this example.
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationResult {
    pub raw_text: String,
    pub outcome: Outcome,
}

impl TranslationResult {
    pub fn from_text(raw_text: impl Into<String>, schema: &RelationSchema) -> Self {
        let raw_text = raw_text.into();
        let outcome = match parse_query_with(&raw_text, schema) {
            Ok(q) => Outcome::Parsed(q),
            Err(e) => Outcome::ParseFailure(e),
        };
        TranslationResult { raw_text, outcome }
    }

    pub fn absent() -> Self {
        TranslationResult {
            raw_text: String::new(),
            outcome: Outcome::Absent,
        }
    }

    pub fn query(&self) -> Option<&Query> {
        match &self.outcome {
            Outcome::Parsed(q) => Some(q),
            _ => None,
        }
    }

    pub fn parse_ok(&self) -> bool {
        matches!(self.outcome, Outcome::Parsed(_))
    }
}

pub trait Translator: Sync {
    /// Label used in reports.
    fn name(&self) -> &str;

    fn translate(&self, example: &QAExample) -> TranslationResult;
}

/// Oracle translator: compiles the example's inference path.
#[derive(Debug, Clone, Copy, Default)]
pub struct GoldTranslator;

impl GoldTranslator {
    pub fn try_translate(&self, example: &QAExample) -> Result<TranslationResult, AnnotateError> {
        let query = example.path.to_query()?;
        Ok(TranslationResult {
            raw_text: query.to_string(),
            outcome: Outcome::Parsed(query),
        })
    }
}

impl Translator for GoldTranslator {
    fn name(&self) -> &str {
        "gold"
    }

    fn translate(&self, example: &QAExample) -> TranslationResult {
        // A parsed InferencePath always has mapped pairs.
        self.try_translate(example)
            .expect("inference paths are validated on construction")
    }
}

#[derive(Debug, Error)]
pub enum PredictionsError {
    #[error("line {line}: expected `example_id<TAB>query_text`")]
    Malformed { line: usize },
    #[error("line {line}: duplicate example id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PredictionsError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            PredictionsError::Malformed { .. } => ErrorKind::Parse,
            PredictionsError::DuplicateId { .. } => ErrorKind::Alignment,
            PredictionsError::Io(_) => ErrorKind::Io,
        }
    }
}

/// Predicted query text keyed by example id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PredictionsFile {
    predictions: BTreeMap<String, String>,
}

impl PredictionsFile {
    /// Reads `example_id<TAB>predicted_query_text` lines. An empty text is
    /// kept (it scores as a parse failure); blank lines are skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<PredictionsFile, PredictionsError> {
        let mut predictions = BTreeMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let (id, text) = line
                .split_once('\t')
                .ok_or(PredictionsError::Malformed { line: idx + 1 })?;
            let id = id.trim();
            if id.is_empty() {
                return Err(PredictionsError::Malformed { line: idx + 1 });
            }
            if predictions.insert(id.to_owned(), text.to_owned()).is_some() {
                return Err(PredictionsError::DuplicateId {
                    line: idx + 1,
                    id: id.to_owned(),
                });
            }
        }
        Ok(PredictionsFile { predictions })
    }

    pub fn get(&self, id: &str) -> Option<&str> {
        self.predictions.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.predictions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

impl FromIterator<(String, String)> for PredictionsFile {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        PredictionsFile {
            predictions: iter.into_iter().collect(),
        }
    }
}

pub struct FileTranslator {
    name: String,
    predictions: PredictionsFile,
    schema: RelationSchema,
}

impl FileTranslator {
    pub fn new(name: impl Into<String>, predictions: PredictionsFile) -> Self {
        FileTranslator {
            name: name.into(),
            predictions,
            schema: RelationSchema::metaqa(),
        }
    }

    pub fn with_schema(mut self, schema: RelationSchema) -> Self {
        self.schema = schema;
        self
    }

    pub fn translate_id(&self, id: &str) -> TranslationResult {
        match self.predictions.get(id) {
            Some(text) => TranslationResult::from_text(text, &self.schema),
            None => TranslationResult::absent(),
        }
    }
}

impl Translator for FileTranslator {
    fn name(&self) -> &str {
        &self.name
    }

    fn translate(&self, example: &QAExample) -> TranslationResult {
        self.translate_id(&example.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatchMode {
    /// Compare after variable renaming and whitespace normalization.
    #[default]
    Canonical,
    /// Byte-for-byte string comparison.
    Raw,
}

/// Whether a predicted query equals the gold query.
///
/// In canonical mode both texts are parsed, variables are renamed in order
/// of first occurrence, and the structures are compared. Unparseable text
/// never matches.
pub fn exact_match(predicted: &str, gold: &str, mode: MatchMode) -> bool {
    match mode {
        MatchMode::Raw => predicted == gold,
        MatchMode::Canonical => {
            let schema = RelationSchema::open();
            match (
                parse_query_with(predicted, &schema),
                parse_query_with(gold, &schema),
            ) {
                (Ok(p), Ok(g)) => p.canonical_variables() == g.canonical_variables(),
                _ => false,
            }
        }
    }
}
