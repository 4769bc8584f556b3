mod support;

use std::collections::BTreeSet;

use kgqa_core::annotate::{mask_question, InferencePath, PAIR_MAPPING};
use kgqa_core::engine::{execute, ExecOptions};
use kgqa_core::query::{parse_query_with, Atom, RelationSchema, Term, Variable};
use kgqa_core::translate::{exact_match, MatchMode};
use kgqa_core::{EntityId, FactBase, Query, Triple};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use support::{brute_force_execute, random_kb, random_query};

fn toy(seed: u64) -> (ChaCha8Rng, FactBase) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fb = random_kb(&mut rng, 50, 3, 120);
    (rng, fb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn augmentation_is_an_involution(seed in any::<u64>()) {
        let (_, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        prop_assert_eq!(aug.len(), 2 * fb.len());
        prop_assert_eq!(aug.strip_reverse(), fb);
    }

    #[test]
    fn reverse_lookup_mirrors_forward(seed in any::<u64>()) {
        let (_, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        for fact in fb.facts() {
            let inverse = fact.relation.inverse();
            prop_assert!(aug.lookup(inverse.as_str(), fact.object.as_str()).contains(&fact.subject));
            prop_assert!(aug.lookup(fact.relation.as_str(), fact.subject.as_str()).contains(&fact.object));
        }
        for fact in aug.facts().filter(|t| t.relation.is_reverse()) {
            let forward = fact.relation.base();
            prop_assert!(aug.lookup(forward.as_str(), fact.object.as_str()).contains(&fact.subject));
        }
    }

    #[test]
    fn lookups_are_sorted_and_exact(seed in any::<u64>()) {
        let (_, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        for rel in aug.relations() {
            for subject in aug.entities() {
                let got = aug.lookup(rel.as_str(), subject.as_str());
                prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
                let expected: Vec<&EntityId> = aug
                    .facts()
                    .filter(|t| &t.relation == rel && &t.subject == subject)
                    .map(|t| &t.object)
                    .collect();
                prop_assert_eq!(got.iter().collect::<Vec<_>>(), expected);
            }
        }
    }

    #[test]
    fn dump_then_load_is_identity(seed in any::<u64>()) {
        let (_, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        let mut buf = Vec::new();
        aug.dump(&mut buf).unwrap();
        let back = FactBase::load(&buf[..]).unwrap();
        prop_assert_eq!(back.fact_set(), aug.fact_set());
        let mut again = Vec::new();
        back.dump(&mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn execute_matches_brute_force(seed in any::<u64>(), exclude_seed in any::<bool>()) {
        let (mut rng, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        let query = random_query(&mut rng, &aug, 3);
        let result = execute(&query, &aug, ExecOptions { exclude_seed, ..ExecOptions::default() });
        let answers: BTreeSet<EntityId> = result.answers().cloned().collect();
        prop_assert_eq!(answers, brute_force_execute(&query, &aug, exclude_seed));
    }

    #[test]
    fn proofs_are_sound(seed in any::<u64>(), exclude_seed in any::<bool>()) {
        let (mut rng, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        let query = random_query(&mut rng, &aug, 3);
        let result = execute(&query, &aug, ExecOptions { exclude_seed, proof_cap: 4 });
        for (answer, proofs) in result.iter() {
            prop_assert!(!proofs.is_empty() && proofs.len() <= 4);
            for proof in proofs {
                prop_assert_eq!(proof.steps.len(), query.atoms().len());
                prop_assert_eq!(&proof.steps[0].subject, query.seed());
                prop_assert_eq!(proof.last_entity(), Some(answer));
                for (step, atom) in proof.steps.iter().zip(query.atoms()) {
                    prop_assert!(aug.contains(step));
                    prop_assert_eq!(&step.relation, &atom.predicate);
                }
                for pair in proof.steps.windows(2) {
                    prop_assert_eq!(&pair[0].object, &pair[1].subject);
                }
            }
        }
    }

    #[test]
    fn adding_facts_never_removes_answers(seed in any::<u64>(), extra in 1usize..20) {
        let (mut rng, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        let query = random_query(&mut rng, &aug, 3);
        let opts = ExecOptions { exclude_seed: false, ..ExecOptions::default() };
        let before: BTreeSet<EntityId> = execute(&query, &aug, opts).answers().cloned().collect();

        let more = random_kb(&mut rng, 50, 3, extra);
        let bigger: FactBase = fb.facts().chain(more.facts()).cloned().collect::<FactBase>()
            .augment_reverse().unwrap();
        let after: BTreeSet<EntityId> = execute(&query, &bigger, opts).answers().cloned().collect();
        prop_assert!(before.is_subset(&after));
    }

    #[test]
    fn execution_is_deterministic(seed in any::<u64>()) {
        let (mut rng, fb) = toy(seed);
        let aug = fb.augment_reverse().unwrap();
        let query = random_query(&mut rng, &aug, 3);
        let a = serde_json::to_string(&execute(&query, &aug, ExecOptions::default())).unwrap();
        let b = serde_json::to_string(&execute(&query, &aug, ExecOptions::default())).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// Entity names including the characters that force quoting.
fn entity_name() -> impl Strategy<Value = String> {
    "[A-Za-z0-9 ,()\"\\\\.'-]{1,16}"
        .prop_map(|s| s.trim().to_owned())
        .prop_filter("non-empty", |s| !s.is_empty())
}

fn predicate() -> impl Strategy<Value = String> {
    prop::sample::select(kgqa_core::kb::BASE_RELATIONS.to_vec()).prop_flat_map(|base| {
        prop::bool::ANY.prop_map(move |rev| {
            if rev {
                format!("{base}_reverse")
            } else {
                base.to_owned()
            }
        })
    })
}

fn variable_name() -> impl Strategy<Value = String> {
    "[A-Z][A-Za-z0-9_]{0,4}".prop_filter("not ENT", |s| s != "ENT")
}

/// Valid chain queries, ungrounded or grounded at a random entity.
fn chain_query() -> impl Strategy<Value = Query> {
    (
        prop::collection::vec(predicate(), 1..=4),
        prop::collection::hash_set(variable_name(), 4),
        prop::option::of(entity_name()),
    )
        .prop_map(|(preds, vars, seed)| {
            let vars: Vec<String> = vars.into_iter().collect();
            let mut subject = match seed {
                Some(name) => Term::Constant(EntityId::new(&name).unwrap()),
                None => Term::Ent,
            };
            let atoms = preds
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let object = Term::Variable(Variable::new(&vars[i]).unwrap());
                    let atom = Atom::new(
                        kgqa_core::RelationId::new(p).unwrap(),
                        subject.clone(),
                        object.clone(),
                    );
                    subject = object;
                    atom
                })
                .collect();
            Query::new(atoms).unwrap()
        })
}

/// Inserts random whitespace after structural characters.
fn respace(text: &str, spaces: &[u8]) -> String {
    let mut out = String::new();
    let mut in_quotes = false;
    let mut escaped = false;
    let mut k = 0;
    for c in text.chars() {
        out.push(c);
        if in_quotes {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_quotes = false;
            }
            continue;
        }
        if c == '"' {
            in_quotes = true;
            continue;
        }
        if matches!(c, ',' | '(') {
            let n = spaces.get(k % spaces.len().max(1)).copied().unwrap_or(0) % 3;
            k += 1;
            for _ in 0..n {
                out.push(' ');
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_parse_round_trip(q in chain_query()) {
        let text = q.to_string();
        let parsed = Query::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &q);
        prop_assert_eq!(parsed.to_string(), text);
    }

    #[test]
    fn exact_match_is_alpha_and_space_invariant(
        q in chain_query(),
        spaces in prop::collection::vec(any::<u8>(), 1..8),
    ) {
        let gold = q.canonical_variables().to_string();
        let renamed = q.to_string();
        let spaced = respace(&renamed, &spaces);
        prop_assert!(exact_match(&gold, &gold, MatchMode::Canonical));
        prop_assert!(exact_match(&renamed, &gold, MatchMode::Canonical));
        prop_assert!(exact_match(&gold, &renamed, MatchMode::Canonical));
        prop_assert!(exact_match(&spaced, &gold, MatchMode::Canonical));
    }

    #[test]
    fn exact_match_is_symmetric(a in chain_query(), b in chain_query()) {
        let (a, b) = (a.to_string(), b.to_string());
        prop_assert_eq!(
            exact_match(&a, &b, MatchMode::Canonical),
            exact_match(&b, &a, MatchMode::Canonical)
        );
    }

    #[test]
    fn masking_is_reversible(
        before in "[a-z ]{0,20}",
        name in "[A-Za-z0-9][A-Za-z0-9 .'-]{0,10}[A-Za-z0-9]",
        after in "[a-z ?]{0,20}",
    ) {
        let raw = format!("{before}[{name}]{after}");
        let (masked, entity) = mask_question(&raw).unwrap();
        prop_assert_eq!(entity.as_str(), name.as_str());
        prop_assert_eq!(masked.matches("ENT").count(), 1);
        prop_assert!(!masked.contains(['[', ']']));
        prop_assert_eq!(masked.replacen("ENT", entity.as_str(), 1), raw.replace(['[', ']'], ""));
    }
}

#[test]
fn every_mapped_path_compiles_to_a_chain() {
    // All 1..=3-pair compositions of the mapping table that connect.
    let mut paths: Vec<Vec<&str>> = PAIR_MAPPING.iter().map(|(f, t, _)| vec![*f, *t]).collect();
    let mut frontier = paths.clone();
    for _ in 0..2 {
        let mut next = Vec::new();
        for path in &frontier {
            for (f, t, _) in PAIR_MAPPING {
                if path.last() == Some(&f) {
                    let mut longer = path.clone();
                    longer.push(t);
                    next.push(longer);
                }
            }
        }
        paths.extend(next.iter().cloned());
        frontier = next;
    }
    // 13 single pairs; 4*9 + 3*1 = 39 two-pair chains; 3*9 + 12*1 = 39 three-pair chains.
    assert_eq!(paths.len(), 91);
    for nodes in paths {
        let path = InferencePath::parse(&nodes.join("_")).unwrap();
        let query = path.to_query().unwrap();
        assert_eq!(query.len(), usize::from(path.hop_count()));
        let reparsed = parse_query_with(&query.to_string(), &RelationSchema::metaqa()).unwrap();
        assert_eq!(reparsed, query);
        assert_eq!(query.answer_var().name(), ["X", "Y", "Z"][query.len() - 1]);
    }
}

#[test]
fn fixture_facts_parse() {
    let fb = support::load_fixture_kb();
    assert_eq!(fb.len(), 40);
    assert!(fb.contains(&Triple::new(
        support::entity("Eric Bana"),
        support::relation("starred_actors_reverse"),
        support::entity("Chopper"),
    )));
}
