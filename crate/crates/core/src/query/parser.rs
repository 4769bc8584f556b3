//! Recursive-descent parser for query text.
//!
//! ```text
//! query := atom ("," atom)*
//! atom  := predicate "(" term "," term ")"
//! term  := "ENT" | VARIABLE | '"' quoted-entity '"' | bare-entity
//! ```
//!
//! Whitespace between tokens is ignored. Bare entities run up to the next
//! `,` or `)` and may contain spaces; entities containing `,`, `(`, `)` or
//! `"` must be quoted. Inside quotes `\"` and `\\` are the only escapes.
//!
//! The first argument of the first atom is never a variable in a chain
//! query, so a bare token there is read as an entity even when it is
//! capitalized like a variable (`written_by(Innocence, X)`).

use super::{is_variable_name, Atom, Query, QueryError, RelationSchema, Term, Variable, ENT};
use crate::kb::{EntityId, RelationId};

/// Parses query text, accepting the predicate names allowed by `schema`.
pub fn parse_query_with(text: &str, schema: &RelationSchema) -> Result<Query, QueryError> {
    let mut parser = Parser { text, pos: 0 };
    let mut atoms = Vec::new();
    loop {
        let first = atoms.is_empty();
        atoms.push(parser.atom(schema, first)?);
        parser.skip_ws();
        match parser.peek() {
            None => break,
            Some(',') => parser.pos += 1,
            Some(c) => return Err(parser.error(format!("expected ',' or end of query, found '{c}'"))),
        }
    }
    Query::new(atoms)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let rest = self.rest();
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn error(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax {
            position: self.pos,
            message: message.into(),
        }
    }

    fn expect(&mut self, wanted: char) -> Result<(), QueryError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == wanted => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected '{wanted}', found '{c}'"))),
            None => Err(self.error(format!("expected '{wanted}', found end of input"))),
        }
    }

    fn atom(&mut self, schema: &RelationSchema, first: bool) -> Result<Atom, QueryError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.error("expected predicate name"));
        }
        let name = &self.text[start..start + len];
        let predicate = RelationId::new(name).map_err(|e| self.error(e.to_string()))?;
        if !schema.accepts(&predicate) {
            return Err(QueryError::UnknownPredicate(name.to_owned()));
        }
        self.pos += len;
        self.expect('(')?;
        let arg1 = self.term(first)?;
        self.expect(',')?;
        let arg2 = self.term(false)?;
        self.expect(')')?;
        Ok(Atom::new(predicate, arg1, arg2))
    }

    fn term(&mut self, seed_position: bool) -> Result<Term, QueryError> {
        self.skip_ws();
        if self.peek() == Some('"') {
            return self.quoted();
        }
        let start = self.pos;
        let len = self
            .rest()
            .find([',', ')', '(', '"'])
            .unwrap_or(self.rest().len());
        let raw = self.text[start..start + len].trim_end();
        if raw.is_empty() {
            return Err(self.error("expected a term"));
        }
        self.pos += len;
        if matches!(self.peek(), Some('(') | Some('"')) {
            return Err(self.error("entities containing '(' or '\"' must be quoted"));
        }
        if raw == ENT {
            return Ok(Term::Ent);
        }
        if !seed_position && is_variable_name(raw) {
            return Ok(Term::Variable(Variable(raw.to_owned())));
        }
        EntityId::new(raw)
            .map(Term::Constant)
            .map_err(|e| QueryError::Syntax {
                position: start,
                message: e.to_string(),
            })
    }

    fn quoted(&mut self) -> Result<Term, QueryError> {
        let start = self.pos;
        self.pos += 1;
        let mut value = String::new();
        let mut chars = self.rest().char_indices();
        loop {
            match chars.next() {
                None => {
                    return Err(QueryError::Syntax {
                        position: start,
                        message: "unterminated quoted entity".into(),
                    })
                }
                Some((i, '"')) => {
                    self.pos += i + 1;
                    break;
                }
                Some((i, '\\')) => match chars.next() {
                    Some((_, c @ ('"' | '\\'))) => value.push(c),
                    _ => {
                        return Err(QueryError::Syntax {
                            position: self.pos + i,
                            message: "invalid escape in quoted entity".into(),
                        })
                    }
                },
                Some((_, c)) => value.push(c),
            }
        }
        EntityId::new(&value)
            .map(Term::Constant)
            .map_err(|e| QueryError::Syntax {
                position: start,
                message: e.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Query, QueryError> {
        parse_query_with(text, &RelationSchema::metaqa())
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("written_by_reverse(ENT,X),directed_by(X,Y)").unwrap();
        let b = parse("  written_by_reverse ( ENT ,  X ) ,\tdirected_by(X , Y )  ").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bare_entity_with_spaces() {
        let q = parse("written_by_reverse(Hilary Brougher, X)").unwrap();
        assert_eq!(
            q.start(),
            &Term::Constant(EntityId::new("Hilary Brougher").unwrap())
        );
    }

    #[test]
    fn quoted_entities() {
        let q = parse(r#"directed_by("Dracula (1931)", X)"#).unwrap();
        assert_eq!(
            q.start(),
            &Term::Constant(EntityId::new("Dracula (1931)").unwrap())
        );
        let q = parse(r#"directed_by("X", Y)"#).unwrap();
        assert_eq!(q.start(), &Term::Constant(EntityId::new("X").unwrap()));
        let q = parse(r#"directed_by("say \"hi\", \\o/", Y)"#).unwrap();
        assert_eq!(
            q.start(),
            &Term::Constant(EntityId::new(r#"say "hi", \o/"#).unwrap())
        );
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse("writtenby(ENT X").unwrap_err();
        assert!(matches!(err, QueryError::UnknownPredicate(_)), "{err}");

        let err = parse_query_with("writtenby(ENT X", &RelationSchema::open()).unwrap_err();
        assert_eq!(
            err,
            QueryError::Syntax {
                position: 15,
                message: "expected ',', found end of input".into()
            }
        );

        let err = parse("written_by(ENT, X) directed_by(X, Y)").unwrap_err();
        assert!(matches!(err, QueryError::Syntax { position: 19, .. }), "{err}");

        let err = parse("").unwrap_err();
        assert!(matches!(err, QueryError::Syntax { position: 0, .. }));

        let err = parse("written_by(, X)").unwrap_err();
        assert!(matches!(err, QueryError::Syntax { position: 11, .. }), "{err}");

        let err = parse(r#"written_by("abc, X)"#).unwrap_err();
        assert!(matches!(err, QueryError::Syntax { position: 11, .. }), "{err}");

        let err = parse("written_by(Dracula (1931), X)").unwrap_err();
        assert!(matches!(err, QueryError::Syntax { .. }), "{err}");
    }

    #[test]
    fn trailing_comma_is_error() {
        assert!(matches!(
            parse("written_by(ENT, X),"),
            Err(QueryError::Syntax { .. })
        ));
    }

    #[test]
    fn unknown_predicate_is_schema_error() {
        let err = parse("wrote(ENT, X)").unwrap_err();
        assert_eq!(err, QueryError::UnknownPredicate("wrote".into()));
        assert!(parse_query_with("wrote(ENT, X)", &RelationSchema::open()).is_ok());
    }
}
