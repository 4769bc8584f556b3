//! Triple store for the movie knowledge base.
//!
//! The KB file holds one `subject|relation|object` fact per line. Loading
//! deduplicates facts and builds a `(relation, subject) -> objects` index.
//! Reverse traversal is served by materialized `<relation>_reverse` facts
//! (see [`FactBase::augment_reverse`]) rather than by a second index.

use std::borrow::Borrow;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::error::ErrorKind;

/// Suffix marking a materialized reverse relation.
pub const REVERSE_SUFFIX: &str = "_reverse";

/// The nine base relations of the MetaQA movie KB.
pub const BASE_RELATIONS: [&str; 9] = [
    "directed_by",
    "written_by",
    "starred_actors",
    "release_year",
    "in_language",
    "has_tags",
    "has_genre",
    "has_imdb_rating",
    "has_imdb_votes",
];

#[derive(Debug, Error)]
pub enum KbError {
    #[error("line {line}: expected 3 '|'-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {source}")]
    InvalidField {
        line: usize,
        #[source]
        source: IdError,
    },
    #[error("line {line}: unknown relation `{relation}`")]
    UnknownRelation { line: usize, relation: String },
    #[error("fact base already contains reverse relation `{0}`")]
    AlreadyAugmented(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl KbError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            KbError::FieldCount { .. } | KbError::InvalidField { .. } => ErrorKind::Parse,
            KbError::UnknownRelation { .. } => ErrorKind::Schema,
            KbError::AlreadyAugmented(_) => ErrorKind::Config,
            KbError::Io(_) => ErrorKind::Io,
        }
    }
}

/// Rejected identifier text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("identifier is empty")]
    Empty,
    #[error("identifier `{0}` has surrounding whitespace")]
    Untrimmed(String),
    #[error("identifier `{0}` contains a reserved character ('|', tab or line break)")]
    ReservedChar(String),
    #[error("relation `{0}` is not a valid relation name")]
    BadRelation(String),
}

fn check_text(text: &str) -> Result<(), IdError> {
    if text.is_empty() {
        return Err(IdError::Empty);
    }
    if text.trim() != text {
        return Err(IdError::Untrimmed(text.to_owned()));
    }
    if text.contains(['|', '\t', '\n', '\r']) {
        return Err(IdError::ReservedChar(text.to_owned()));
    }
    Ok(())
}

/// An entity symbol: movie title, person, year, tag, rating, language...
///
/// Names are case-sensitive and compared byte-wise. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(Arc<str>);

impl EntityId {
    pub fn new(text: &str) -> Result<Self, IdError> {
        check_text(text)?;
        Ok(EntityId(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for EntityId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl TryFrom<&str> for EntityId {
    type Error = IdError;
    fn try_from(value: &str) -> Result<Self, Self::Error> {
        EntityId::new(value)
    }
}

impl Serialize for EntityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for EntityId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        EntityId::new(&text).map_err(serde::de::Error::custom)
    }
}

/// A binary relation name, either a base relation or `<base>_reverse`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(Arc<str>);

impl RelationId {
    /// Accepts `[A-Za-z_][A-Za-z0-9_]*`. A name may carry the reverse suffix
    /// at most once.
    pub fn new(text: &str) -> Result<Self, IdError> {
        let mut chars = text.chars();
        let valid = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(IdError::BadRelation(text.to_owned()));
        }
        if let Some(base) = text.strip_suffix(REVERSE_SUFFIX) {
            if base.is_empty() || base.ends_with(REVERSE_SUFFIX) {
                return Err(IdError::BadRelation(text.to_owned()));
            }
        }
        Ok(RelationId(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reverse(&self) -> bool {
        self.0.ends_with(REVERSE_SUFFIX)
    }

    /// The base relation this one was derived from (itself for a base relation).
    pub fn base(&self) -> RelationId {
        match self.0.strip_suffix(REVERSE_SUFFIX) {
            Some(base) => RelationId(Arc::from(base)),
            None => self.clone(),
        }
    }

    /// `r` becomes `r_reverse` and `r_reverse` becomes `r`.
    pub fn inverse(&self) -> RelationId {
        match self.0.strip_suffix(REVERSE_SUFFIX) {
            Some(base) => RelationId(Arc::from(base)),
            None => RelationId(Arc::from(format!("{}{}", self.0, REVERSE_SUFFIX))),
        }
    }

    /// Whether this is one of the 9 MetaQA relations or their reverses.
    pub fn is_metaqa(&self) -> bool {
        BASE_RELATIONS.contains(&self.base().as_str())
    }
}

impl Borrow<str> for RelationId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&*self.0, f)
    }
}

impl Serialize for RelationId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

/// The 18 relation names of an augmented MetaQA KB.
pub fn metaqa_relations() -> BTreeSet<RelationId> {
    BASE_RELATIONS
        .iter()
        .flat_map(|name| {
            let base = RelationId::new(name).expect("static relation name");
            [base.inverse(), base]
        })
        .collect()
}

/// A single `(subject, relation, object)` fact.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: EntityId,
    pub relation: RelationId,
    pub object: EntityId,
}

impl Triple {
    pub fn new(subject: EntityId, relation: RelationId, object: EntityId) -> Self {
        Triple {
            subject,
            relation,
            object,
        }
    }

    /// Parses `subject|relation|object`, trimming each field. `line` is
    /// only used in error messages.
    pub fn parse_line(text: &str, line: usize) -> Result<Triple, KbError> {
        let fields: Vec<&str> = text.split('|').map(str::trim).collect();
        let [subject, relation, object] = fields[..] else {
            return Err(KbError::FieldCount {
                line,
                found: fields.len(),
            });
        };
        let invalid = |source| KbError::InvalidField { line, source };
        Ok(Triple::new(
            EntityId::new(subject).map_err(invalid)?,
            RelationId::new(relation).map_err(invalid)?,
            EntityId::new(object).map_err(invalid)?,
        ))
    }

    /// The same fact seen from the other end.
    pub fn reversed(&self) -> Triple {
        Triple::new(self.object.clone(), self.relation.inverse(), self.subject.clone())
    }

    pub fn to_line(&self) -> String {
        format!("{}|{}|{}", self.subject, self.relation, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.relation, self.subject, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// What to do with relations outside the MetaQA base set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownRelations {
    #[default]
    Reject,
    /// Log a warning once per relation and keep the facts.
    Warn,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub unknown_relations: UnknownRelations,
}

/// Deduplicated, indexed set of facts. Immutable once built.
#[derive(Debug, Clone, Default)]
pub struct FactBase {
    facts: BTreeSet<Triple>,
    index: HashMap<RelationId, HashMap<EntityId, Vec<EntityId>>>,
    relations: BTreeSet<RelationId>,
    entities: BTreeSet<EntityId>,
}

impl PartialEq for FactBase {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for FactBase {}

impl FromIterator<Triple> for FactBase {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        FactBase::from_facts(iter.into_iter().collect())
    }
}

impl FactBase {
    fn from_facts(facts: BTreeSet<Triple>) -> Self {
        let mut index: HashMap<RelationId, HashMap<EntityId, Vec<EntityId>>> = HashMap::new();
        let mut relations = BTreeSet::new();
        let mut entities = BTreeSet::new();
        // BTreeSet iteration order is (subject, relation, object), so each
        // object list is filled in sorted order.
        for fact in &facts {
            index
                .entry(fact.relation.clone())
                .or_default()
                .entry(fact.subject.clone())
                .or_default()
                .push(fact.object.clone());
            relations.insert(fact.relation.clone());
            entities.insert(fact.subject.clone());
            entities.insert(fact.object.clone());
        }
        FactBase {
            facts,
            index,
            relations,
            entities,
        }
    }

    /// Reads a KB with the default options (MetaQA relations only).
    pub fn load<R: BufRead>(reader: R) -> Result<FactBase, KbError> {
        FactBase::load_with(reader, LoadOptions::default())
    }

    /// Reads a pipe-delimited KB. Blank lines are skipped and CRLF endings
    /// are accepted. MetaQA relations and their `_reverse` forms are known;
    /// others follow `options.unknown_relations`. The result only contains the facts as written; call
    /// [`FactBase::augment_reverse`] to add reverse relations.
    pub fn load_with<R: BufRead>(reader: R, options: LoadOptions) -> Result<FactBase, KbError> {
        let mut facts = BTreeSet::new();
        let mut warned = BTreeSet::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let triple = Triple::parse_line(&line, line_no)?;
            if !triple.relation.is_metaqa() {
                match options.unknown_relations {
                    UnknownRelations::Reject => {
                        return Err(KbError::UnknownRelation {
                            line: line_no,
                            relation: triple.relation.to_string(),
                        })
                    }
                    UnknownRelations::Warn => {
                        if warned.insert(triple.relation.clone()) {
                            tracing::warn!(
                                line = line_no,
                                relation = %triple.relation,
                                "accepting relation outside the MetaQA schema"
                            );
                        }
                    }
                }
            }
            facts.insert(triple);
        }
        Ok(FactBase::from_facts(facts))
    }

    /// Adds `(o, r_reverse, s)` for every fact `(s, r, o)`.
    ///
    /// Fails if the base already holds a reverse relation, so a base cannot
    /// be augmented twice.
    pub fn augment_reverse(&self) -> Result<FactBase, KbError> {
        if let Some(rel) = self.relations.iter().find(|r| r.is_reverse()) {
            return Err(KbError::AlreadyAugmented(rel.to_string()));
        }
        let mut facts = self.facts.clone();
        facts.extend(self.facts.iter().map(Triple::reversed));
        Ok(FactBase::from_facts(facts))
    }

    /// Drops every reverse fact, undoing [`FactBase::augment_reverse`].
    pub fn strip_reverse(&self) -> FactBase {
        self.facts
            .iter()
            .filter(|t| !t.relation.is_reverse())
            .cloned()
            .collect()
    }

    /// Objects `o` with `(subject, relation, o)` in the base, sorted.
    pub fn lookup(&self, relation: &str, subject: &str) -> &[EntityId] {
        self.index
            .get(relation)
            .and_then(|by_subject| by_subject.get(subject))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn contains(&self, fact: &Triple) -> bool {
        self.facts.contains(fact)
    }

    /// Writes one `s|r|o` line per fact, lines sorted byte-wise.
    pub fn dump<W: Write>(&self, mut out: W) -> Result<usize, KbError> {
        let mut lines: Vec<String> = self.facts.iter().map(Triple::to_line).collect();
        lines.sort_unstable();
        for line in &lines {
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(lines.len())
    }

    pub fn facts(&self) -> impl Iterator<Item = &Triple> + '_ {
        self.facts.iter()
    }

    pub fn fact_set(&self) -> &BTreeSet<Triple> {
        &self.facts
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn relations(&self) -> &BTreeSet<RelationId> {
        &self.relations
    }

    pub fn entities(&self) -> &BTreeSet<EntityId> {
        &self.entities
    }

    pub fn is_augmented(&self) -> bool {
        self.relations.iter().any(RelationId::is_reverse)
    }
}
