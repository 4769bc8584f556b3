use super::{is_variable_name, Query, Term, ENT};
use crate::kb::EntityId;

/// Canonical text: `pred(a, b)` atoms joined by `", "`.
pub(super) fn print_query(query: &Query) -> String {
    let mut out = String::new();
    for (i, atom) in query.atoms().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(atom.predicate.as_str());
        out.push('(');
        push_term(&mut out, &atom.arg1, i == 0);
        out.push_str(", ");
        push_term(&mut out, &atom.arg2, false);
        out.push(')');
    }
    out
}

fn push_term(out: &mut String, term: &Term, seed_position: bool) {
    match term {
        Term::Ent => out.push_str(ENT),
        Term::Variable(v) => out.push_str(v.name()),
        Term::Constant(e) => push_entity(out, e, seed_position),
    }
}

/// Entities that the parser would otherwise read as something else.
fn needs_quotes(text: &str, seed_position: bool) -> bool {
    text == ENT || (!seed_position && is_variable_name(text)) || text.contains([',', '(', ')', '"', '\\'])
}

fn push_entity(out: &mut String, entity: &EntityId, seed_position: bool) {
    let text = entity.as_str();
    if !needs_quotes(text, seed_position) {
        out.push_str(text);
        return;
    }
    out.push('"');
    for c in text.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}
