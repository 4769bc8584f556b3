//! Chain-shaped conjunctive queries.
//!
//! A query is a conjunction of binary atoms where each atom starts from the
//! previous atom's second argument:
//!
//! ```text
//! written_by_reverse(ENT, X), directed_by(X, Y)
//! ```
//!
//! The first argument of the first atom is the question entity, either the
//! `ENT` placeholder or a constant. The last variable is the answer variable.

mod parser;
mod printer;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::error::ErrorKind;
use crate::kb::{metaqa_relations, EntityId, FactBase, RelationId};

pub use parser::parse_query_with;

/// Printed form of the entity placeholder.
pub const ENT: &str = "ENT";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("atom {index}: {message}")]
    Shape { index: usize, message: String },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("query contains no ENT placeholder to ground")]
    NothingToGround,
    #[error("query is not grounded: atom 0 still starts from ENT")]
    NotGrounded,
}

impl QueryError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            QueryError::Syntax { .. } | QueryError::Shape { .. } => ErrorKind::Parse,
            QueryError::UnknownPredicate(_) => ErrorKind::Schema,
            QueryError::NothingToGround | QueryError::NotGrounded => ErrorKind::Config,
        }
    }

    fn shape(index: usize, message: impl Into<String>) -> Self {
        QueryError::Shape {
            index,
            message: message.into(),
        }
    }
}

/// A logic variable; names match `[A-Z][A-Za-z0-9_]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(String);

impl Variable {
    pub fn new(name: &str) -> Option<Variable> {
        is_variable_name(name).then(|| Variable(name.to_owned()))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_variable_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != ENT
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Constant(EntityId),
    Variable(Variable),
    Ent,
}

impl Term {
    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub predicate: RelationId,
    pub arg1: Term,
    pub arg2: Term,
}

impl Atom {
    pub fn new(predicate: RelationId, arg1: Term, arg2: Term) -> Self {
        Atom {
            predicate,
            arg1,
            arg2,
        }
    }
}

/// Which predicate names a parser accepts.
#[derive(Debug, Clone)]
pub struct RelationSchema {
    known: Option<BTreeSet<RelationId>>,
}

impl RelationSchema {
    /// The 18 relations of the augmented MetaQA KB.
    pub fn metaqa() -> Self {
        RelationSchema {
            known: Some(metaqa_relations()),
        }
    }

    /// Accepts any syntactically valid predicate name.
    pub fn open() -> Self {
        RelationSchema { known: None }
    }

    pub fn from_relations(relations: impl IntoIterator<Item = RelationId>) -> Self {
        RelationSchema {
            known: Some(relations.into_iter().collect()),
        }
    }

    /// The relations present in `fb`.
    pub fn from_fact_base(fb: &FactBase) -> Self {
        RelationSchema::from_relations(fb.relations().iter().cloned())
    }

    pub fn accepts(&self, relation: &RelationId) -> bool {
        self.known.as_ref().is_none_or(|known| known.contains(relation))
    }
}

/// A validated chain query.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    atoms: Vec<Atom>,
}

impl Query {
    /// Checks the chain shape:
    /// - atom 0 starts from `ENT` or a constant;
    /// - every later atom starts from the previous atom's second argument;
    /// - every second argument is a variable, and no variable repeats.
    pub fn new(atoms: Vec<Atom>) -> Result<Query, QueryError> {
        let Some(first) = atoms.first() else {
            return Err(QueryError::shape(0, "query has no atoms"));
        };
        if first.arg1.as_variable().is_some() {
            return Err(QueryError::shape(
                0,
                "first argument must be ENT or an entity, not a variable",
            ));
        }
        let mut seen = HashSet::new();
        for (index, atom) in atoms.iter().enumerate() {
            if index > 0 {
                if atom.arg1 != atoms[index - 1].arg2 {
                    return Err(QueryError::shape(
                        index,
                        "first argument must equal the previous atom's second argument",
                    ));
                }
                if atom.arg1.as_variable().is_none() {
                    return Err(QueryError::shape(index, "first argument must be a variable"));
                }
            }
            let Some(var) = atom.arg2.as_variable() else {
                return Err(QueryError::shape(index, "second argument must be a variable"));
            };
            if !seen.insert(var.clone()) {
                return Err(QueryError::shape(
                    index,
                    format!("variable {var} is already bound earlier in the chain"),
                ));
            }
        }
        Ok(Query { atoms })
    }

    /// Parses canonical query text, accepting only MetaQA predicates.
    pub fn parse(text: &str) -> Result<Query, QueryError> {
        parse_query_with(text, &RelationSchema::metaqa())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn answer_var(&self) -> &Variable {
        self.atoms
            .last()
            .and_then(|a| a.arg2.as_variable())
            .expect("validated chain ends in a variable")
    }

    /// The term the chain starts from.
    pub fn start(&self) -> &Term {
        &self.atoms[0].arg1
    }

    /// Replaces the `ENT` placeholder with `entity`.
    pub fn ground(&self, entity: &EntityId) -> Result<GroundedQuery, QueryError> {
        if self.start() != &Term::Ent {
            return Err(QueryError::NothingToGround);
        }
        let mut atoms = self.atoms.clone();
        atoms[0].arg1 = Term::Constant(entity.clone());
        Ok(GroundedQuery {
            seed: entity.clone(),
            query: Query { atoms },
        })
    }

    /// Renames variables to `X, Y, Z, V3, V4, ...` in order of first
    /// occurrence.
    pub fn canonical_variables(&self) -> Query {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, atom)| {
                let rename = |term: &Term, slot: usize| match term {
                    Term::Variable(_) => Term::Variable(canonical_variable(slot)),
                    other => other.clone(),
                };
                // In a chain the variable introduced by atom i is its arg2,
                // so atom i's arg1 (for i > 0) is variable i - 1.
                Atom::new(
                    atom.predicate.clone(),
                    rename(&atom.arg1, i.saturating_sub(1)),
                    rename(&atom.arg2, i),
                )
            })
            .collect();
        Query { atoms }
    }
}

/// Canonical name of the `index`-th chain variable.
pub fn canonical_variable(index: usize) -> Variable {
    const NAMES: [&str; 3] = ["X", "Y", "Z"];
    match NAMES.get(index) {
        Some(name) => Variable((*name).to_owned()),
        None => Variable(format!("V{index}")),
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&printer::print_query(self))
    }
}

/// A query whose chain starts from a constant entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundedQuery {
    seed: EntityId,
    query: Query,
}

impl GroundedQuery {
    pub fn seed(&self) -> &EntityId {
        &self.seed
    }

    pub fn query(&self) -> &Query {
        &self.query
    }

    pub fn atoms(&self) -> &[Atom] {
        self.query.atoms()
    }
}

impl TryFrom<Query> for GroundedQuery {
    type Error = QueryError;

    fn try_from(query: Query) -> Result<Self, Self::Error> {
        match query.start() {
            Term::Constant(seed) => Ok(GroundedQuery {
                seed: seed.clone(),
                query,
            }),
            _ => Err(QueryError::NotGrounded),
        }
    }
}

impl fmt::Display for GroundedQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.query, f)
    }
}
