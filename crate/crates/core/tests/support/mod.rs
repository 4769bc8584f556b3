//! Shared test helpers: the brute-force query oracle and random toy
//! instances.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

use kgqa_core::kb::BASE_RELATIONS;
use kgqa_core::query::{Atom, Term, Variable};
use kgqa_core::{EntityId, FactBase, GroundedQuery, Query, RelationId, Triple};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Answers by enumerating every fact for every atom and checking that the
/// variable assignment is consistent. Uses neither the index nor the
/// frontier evaluation.
pub fn brute_force_execute(query: &GroundedQuery, fb: &FactBase, exclude_seed: bool) -> BTreeSet<EntityId> {
    let facts: Vec<&Triple> = fb.facts().collect();
    let atoms = query.atoms();
    let answer_var = query.query().answer_var().clone();
    let mut answers = BTreeSet::new();
    let mut binding: HashMap<Variable, EntityId> = HashMap::new();
    enumerate(atoms, &facts, &mut binding, &answer_var, &mut answers);
    if exclude_seed {
        answers.remove(query.seed());
    }
    answers
}

fn enumerate(
    atoms: &[Atom],
    facts: &[&Triple],
    binding: &mut HashMap<Variable, EntityId>,
    answer_var: &Variable,
    answers: &mut BTreeSet<EntityId>,
) {
    let Some((atom, rest)) = atoms.split_first() else {
        answers.insert(binding[answer_var].clone());
        return;
    };
    for fact in facts {
        if fact.relation != atom.predicate {
            continue;
        }
        let mut added = Vec::new();
        let ok = unify(&atom.arg1, &fact.subject, binding, &mut added)
            && unify(&atom.arg2, &fact.object, binding, &mut added);
        if ok {
            enumerate(rest, facts, binding, answer_var, answers);
        }
        for var in added {
            binding.remove(&var);
        }
    }
}

fn unify(
    term: &Term,
    value: &EntityId,
    binding: &mut HashMap<Variable, EntityId>,
    added: &mut Vec<Variable>,
) -> bool {
    match term {
        Term::Constant(c) => c == value,
        Term::Ent => panic!("brute force needs a grounded query"),
        Term::Variable(v) => match binding.get(v) {
            Some(bound) => bound == value,
            None => {
                binding.insert(v.clone(), value.clone());
                added.push(v.clone());
                true
            }
        },
    }
}

pub fn entity(name: &str) -> EntityId {
    EntityId::new(name).unwrap()
}

pub fn relation(name: &str) -> RelationId {
    RelationId::new(name).unwrap()
}

/// A random base-only KB over at most `max_entities` entities and
/// `relation_count` MetaQA relations.
pub fn random_kb<R: Rng>(
    rng: &mut R,
    max_entities: usize,
    relation_count: usize,
    max_facts: usize,
) -> FactBase {
    let entities = rng.random_range(1..=max_entities);
    let relations: Vec<&str> = BASE_RELATIONS
        .choose_multiple(rng, relation_count)
        .copied()
        .collect();
    let facts = rng.random_range(0..=max_facts);
    (0..facts)
        .map(|_| {
            Triple::new(
                entity(&format!("e{}", rng.random_range(0..entities))),
                relation(relations.choose(rng).unwrap()),
                entity(&format!("e{}", rng.random_range(0..entities))),
            )
        })
        .collect()
}

/// A random chain query of 1..=max_len atoms over the relations of `fb`
/// and their reverses, grounded at a random entity of `fb` (or `e0`).
pub fn random_query<R: Rng>(rng: &mut R, fb: &FactBase, max_len: usize) -> GroundedQuery {
    let mut predicates: Vec<RelationId> = fb.relations().iter().map(RelationId::base).collect();
    predicates.sort();
    predicates.dedup();
    if predicates.is_empty() {
        predicates.push(relation("written_by"));
    }
    let len = rng.random_range(1..=max_len);
    let entities: Vec<&EntityId> = fb.entities().iter().collect();
    let seed = entities
        .choose(rng)
        .map(|e| (*e).clone())
        .unwrap_or_else(|| entity("e0"));
    let mut atoms = Vec::new();
    let mut subject = Term::Ent;
    for i in 0..len {
        let base = predicates.choose(rng).unwrap();
        let predicate = if rng.random_bool(0.5) {
            base.inverse()
        } else {
            base.clone()
        };
        let object = Term::Variable(Variable::new(&format!("V{i}")).unwrap());
        atoms.push(Atom::new(predicate, subject, object.clone()));
        subject = object;
    }
    Query::new(atoms).unwrap().ground(&seed).unwrap()
}

pub fn fixture_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/toy_metaqa")
}

pub fn load_fixture_kb() -> FactBase {
    let text = std::fs::read_to_string(fixture_root().join("kb.txt")).unwrap();
    FactBase::load(text.as_bytes())
        .unwrap()
        .augment_reverse()
        .unwrap()
}
