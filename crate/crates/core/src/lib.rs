//! Logic-query engine and evaluation harness for question answering over
//! knowledge graphs.
//!
//! The pipeline:
//!
//! 1. [`kb`] loads `subject|relation|object` facts and materializes
//!    `<relation>_reverse` facts.
//! 2. [`annotate`] masks the question entity as `ENT` and compiles the
//!    dataset's inference-path label into a chain query such as
//!    `written_by_reverse(ENT, X), directed_by(X, Y)`.
//! 3. A [`translate::Translator`] produces query text for a question.
//! 4. [`query`] parses and grounds the text; [`engine`] executes it and
//!    returns the answer set with proof paths.
//! 5. [`eval`] scores answers (hit@1, set metrics) and translations
//!    (exact match).

pub mod annotate;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod eval;
pub mod kb;
pub mod query;
pub mod translate;

pub use engine::{execute, AnswerResult, ExecOptions, ProofPath};
pub use error::ErrorKind;
pub use kb::{EntityId, FactBase, RelationId, Triple};
pub use query::{GroundedQuery, Query};
