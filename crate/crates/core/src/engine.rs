//! Query execution over a [`FactBase`].
//!
//! Evaluation walks the chain left to right with a frontier of entities.
//! Each atom maps every frontier entity `e` to `lookup(predicate, e)`, and
//! the proof paths reaching `e` are extended by the matching fact. The
//! frontier is deduplicated after every hop, so the work per hop is linear
//! in the number of facts touched.

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::kb::{EntityId, FactBase, Triple};
use crate::query::GroundedQuery;

pub const DEFAULT_PROOF_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    /// Drop the question entity from the final answer set.
    pub exclude_seed: bool,
    /// Maximum number of proof paths kept per entity.
    pub proof_cap: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            exclude_seed: true,
            proof_cap: DEFAULT_PROOF_CAP,
        }
    }
}

/// Grounded facts linking the seed entity to an answer, in chain order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ProofPath {
    pub steps: Vec<Triple>,
}

impl ProofPath {
    /// The entity the path ends at, if it has any steps.
    pub fn last_entity(&self) -> Option<&EntityId> {
        self.steps.last().map(|t| &t.object)
    }

    fn extended(&self, step: Triple) -> ProofPath {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(step);
        ProofPath { steps }
    }
}

impl Serialize for ProofPath {
    /// `[["pred", "s", "o"], ...]`
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.steps.len()))?;
        for step in &self.steps {
            seq.serialize_element(&[
                step.relation.as_str(),
                step.subject.as_str(),
                step.object.as_str(),
            ])?;
        }
        seq.end()
    }
}

/// Answer entities of a query, each with the proofs that reach it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnswerResult {
    proofs: BTreeMap<EntityId, Vec<ProofPath>>,
    excluded_seed: Option<EntityId>,
}

impl AnswerResult {
    /// Answers in sorted order.
    pub fn answers(&self) -> impl ExactSizeIterator<Item = &EntityId> + '_ {
        self.proofs.keys()
    }

    pub fn len(&self) -> usize {
        self.proofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proofs.is_empty()
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.proofs.contains_key(entity)
    }

    pub fn proofs(&self, answer: &str) -> &[ProofPath] {
        self.proofs.get(answer).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&EntityId, &[ProofPath])> + '_ {
        self.proofs.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// The seed entity, when it was reached and then removed.
    pub fn excluded_seed(&self) -> Option<&EntityId> {
        self.excluded_seed.as_ref()
    }
}

impl Serialize for AnswerResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        struct Proofs<'a>(&'a BTreeMap<EntityId, Vec<ProofPath>>);
        impl Serialize for Proofs<'_> {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                let mut map = serializer.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    map.serialize_entry(k.as_str(), v)?;
                }
                map.end()
            }
        }
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("answers", &self.proofs.keys().collect::<Vec<_>>())?;
        map.serialize_entry("proofs", &Proofs(&self.proofs))?;
        map.serialize_entry("excluded_seed", &self.excluded_seed)?;
        map.end()
    }
}

/// Runs `query` against `fb`.
///
/// `fb` should be augmented when the query uses reverse relations; missing
/// facts simply produce no answers.
pub fn execute(query: &GroundedQuery, fb: &FactBase, options: ExecOptions) -> AnswerResult {
    let cap = options.proof_cap.max(1);
    let mut frontier: BTreeMap<EntityId, Vec<ProofPath>> = BTreeMap::new();
    frontier.insert(query.seed().clone(), vec![ProofPath::default()]);

    for atom in query.atoms() {
        let mut next: BTreeMap<EntityId, Vec<ProofPath>> = BTreeMap::new();
        for (entity, paths) in &frontier {
            for object in fb.lookup(atom.predicate.as_str(), entity.as_str()) {
                let slot = next.entry(object.clone()).or_default();
                let room = cap.saturating_sub(slot.len());
                let step = Triple::new(entity.clone(), atom.predicate.clone(), object.clone());
                slot.extend(paths.iter().take(room).map(|p| p.extended(step.clone())));
            }
        }
        if next.is_empty() {
            return AnswerResult::default();
        }
        frontier = next;
    }

    let excluded_seed = if options.exclude_seed {
        frontier.remove_entry(query.seed()).map(|(seed, _)| seed)
    } else {
        None
    };
    AnswerResult {
        proofs: frontier,
        excluded_seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::query::Query;

    fn toy(text: &str) -> FactBase {
        FactBase::load(text.as_bytes())
            .unwrap()
            .augment_reverse()
            .unwrap()
    }

    fn run(fb: &FactBase, query: &str, seed: &str, exclude_seed: bool) -> AnswerResult {
        let q = Query::parse(query)
            .unwrap()
            .ground(&EntityId::new(seed).unwrap())
            .unwrap();
        execute(
            &q,
            fb,
            ExecOptions {
                exclude_seed,
                ..ExecOptions::default()
            },
        )
    }

    fn names(result: &AnswerResult) -> Vec<&str> {
        result.answers().map(EntityId::as_str).collect()
    }

    const WRITERS: &str = "m1|written_by|w1\nm2|written_by|w1\nm1|directed_by|d1\nm2|directed_by|d2\n";

    #[test]
    fn two_hop_join_with_proof() {
        let fb = toy(WRITERS);
        let result = run(&fb, "written_by_reverse(ENT,X), directed_by(X,Y)", "w1", true);
        assert_eq!(names(&result), ["d1", "d2"]);
        let proof = &result.proofs("d1")[0];
        let printed: Vec<String> = proof.steps.iter().map(ToString::to_string).collect();
        assert_eq!(printed, ["written_by_reverse(w1, m1)", "directed_by(m1, d1)"]);
        assert_eq!(result.proofs("d1").len(), 1);
        assert_eq!(result.excluded_seed(), None);
    }

    #[test]
    fn empty_base_gives_empty_result() {
        let fb = FactBase::default();
        let result = run(&fb, "written_by(ENT, X)", "m1", true);
        assert!(result.is_empty());
        assert_eq!(result, AnswerResult::default());
    }

    #[test]
    fn cyclic_path_seed_exclusion() {
        let fb = toy("m1|starred_actors|a1\nm2|starred_actors|a1\n");
        let q = "starred_actors(ENT,X), starred_actors_reverse(X,Y)";
        let on = run(&fb, q, "m1", true);
        assert_eq!(names(&on), ["m2"]);
        assert_eq!(on.excluded_seed().map(EntityId::as_str), Some("m1"));
        let off = run(&fb, q, "m1", false);
        assert_eq!(names(&off), ["m1", "m2"]);
        assert_eq!(off.excluded_seed(), None);
    }

    #[test]
    fn seed_may_appear_mid_chain() {
        // m1 -> a1 -> m1 -> d1: the seed is revisited at hop 2 but only
        // excluded from the final answer set.
        let fb = toy("m1|starred_actors|a1\nm1|directed_by|d1\n");
        let result = run(
            &fb,
            "starred_actors(ENT,X), starred_actors_reverse(X,Y), directed_by(Y,Z)",
            "m1",
            true,
        );
        assert_eq!(names(&result), ["d1"]);
    }

    #[test]
    fn proofs_are_capped() {
        let mut text = String::new();
        for i in 0..40 {
            text.push_str(&format!("m{i}|written_by|w\nm{i}|directed_by|d\n"));
        }
        let fb = toy(&text);
        let q = Query::parse("written_by_reverse(ENT,X), directed_by(X,Y)")
            .unwrap()
            .ground(&EntityId::new("w").unwrap())
            .unwrap();
        let capped = execute(&q, &fb, ExecOptions::default());
        assert_eq!(capped.proofs("d").len(), DEFAULT_PROOF_CAP);
        let one = execute(
            &q,
            &fb,
            ExecOptions {
                proof_cap: 1,
                ..ExecOptions::default()
            },
        );
        assert_eq!(one.proofs("d").len(), 1);
        assert_eq!(one.proofs("d")[0].steps[0].object.as_str(), "m0");
    }

    #[test]
    fn json_shape() {
        let fb = toy(WRITERS);
        let result = run(&fb, "written_by_reverse(ENT,X), directed_by(X,Y)", "w1", true);
        let json = serde_json::to_string(&result).unwrap();
        assert_eq!(
            json,
            r#"{"answers":["d1","d2"],"proofs":{"d1":[[["written_by_reverse","w1","m1"],["directed_by","m1","d1"]]],"d2":[[["written_by_reverse","w1","m2"],["directed_by","m2","d2"]]]},"excluded_seed":null}"#
        );
    }
}
