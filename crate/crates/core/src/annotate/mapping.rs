use crate::kb::RelationId;

/// Node-type pair to predicate, one row per pair occurring in MetaQA paths.
pub const PAIR_MAPPING: [(&str, &str, &str); 13] = [
    ("actor", "movie", "starred_actors_reverse"),
    ("director", "movie", "directed_by_reverse"),
    ("movie", "actor", "starred_actors"),
    ("movie", "director", "directed_by"),
    ("movie", "genre", "has_genre"),
    ("movie", "imdbrating", "has_imdb_rating"),
    ("movie", "imdbvotes", "has_imdb_votes"),
    ("movie", "language", "in_language"),
    ("movie", "tags", "has_tags"),
    ("movie", "writer", "written_by"),
    ("movie", "year", "release_year"),
    ("tag", "movie", "has_tags_reverse"),
    ("writer", "movie", "written_by_reverse"),
];

pub fn pair_predicate(from: &str, to: &str) -> Option<RelationId> {
    PAIR_MAPPING
        .iter()
        .find(|(f, t, _)| *f == from && *t == to)
        .map(|(_, _, rel)| RelationId::new(rel).expect("static relation name"))
}
