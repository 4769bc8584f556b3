//! Annotation file formats.
//!
//! - annotated: `masked_question<TAB>gold_query_text`
//! - meta: `id<TAB>hop<TAB>entity<TAB>gold_answers<TAB>path<TAB>masked_question`,
//!   answers joined with `|`. The last two columns make a meta file
//!   self-contained for evaluation and for producing predictions.

use std::io::{BufRead, Write};

use super::{annotate, mask_question, parse_answers, AnnotateError, AnnotatedPair, InferencePath, QAExample};
use crate::kb::EntityId;
use crate::query::ENT;

/// Writes `masked_question<TAB>gold_query_text` lines.
pub fn write_pairs<W: Write>(pairs: &[AnnotatedPair], mut out: W) -> Result<usize, AnnotateError> {
    for pair in pairs {
        writeln!(out, "{}\t{}", pair.masked_question, pair.gold_query_text)?;
    }
    out.flush()?;
    Ok(pairs.len())
}

/// Annotates every example and writes the pairs.
pub fn write_annotated<W: Write>(examples: &[QAExample], out: W) -> Result<usize, AnnotateError> {
    let pairs = examples.iter().map(annotate).collect::<Result<Vec<_>, _>>()?;
    write_pairs(&pairs, out)
}

pub fn write_meta<W: Write>(examples: &[QAExample], mut out: W) -> Result<usize, AnnotateError> {
    for ex in examples {
        let answers: Vec<&str> = ex.gold_answers.iter().map(EntityId::as_str).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            ex.id,
            ex.hop(),
            ex.entity,
            answers.join("|"),
            ex.path,
            ex.masked_question
        )?;
    }
    out.flush()?;
    Ok(examples.len())
}

/// Reads a meta file back into examples. Blank lines are skipped.
pub fn read_meta<R: BufRead>(reader: R) -> Result<Vec<QAExample>, AnnotateError> {
    let mut examples = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        examples.push(parse_meta_line(line).map_err(|e| e.at_line(idx + 1))?);
    }
    Ok(examples)
}

fn parse_meta_line(line: &str) -> Result<QAExample, AnnotateError> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [id, hop, entity, answers, path, masked] = fields[..] else {
        return Err(AnnotateError::Line {
            line: 0,
            message: format!("expected 6 tab-separated fields, found {}", fields.len()),
        });
    };
    let bad = |message: String| AnnotateError::Line { line: 0, message };
    let hop: u8 = hop.parse().map_err(|_| bad(format!("bad hop `{hop}`")))?;
    let entity = EntityId::new(entity).map_err(|e| bad(e.to_string()))?;
    let path = InferencePath::parse(path)?;
    if path.hop_count() != hop {
        return Err(bad(format!("path `{path}` does not have {hop} hops")));
    }
    let raw_question = masked.replacen(ENT, &format!("[{entity}]"), 1);
    let (masked_question, _) = mask_question(&raw_question)?;
    Ok(QAExample {
        id: id.to_owned(),
        raw_question,
        masked_question,
        entity,
        path,
        gold_answers: parse_answers(answers)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::load_questions;

    const QA: &str =
        "the movies written by [Hilary Brougher] were directed by who\tStephen Frears|Jane Doe\n\
                      what movies are about [ginger rogers]\tTop Hat|Kitty Foyle\n";
    const QTYPE: &str = "writer_to_movie_to_director\ntag_to_movie_to_director\n";

    #[test]
    fn meta_round_trip() {
        let examples = load_questions(QA.as_bytes(), QTYPE.as_bytes(), 2).unwrap();
        let mut buf = Vec::new();
        write_meta(&examples, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "2hop-0\t2\tHilary Brougher\tJane Doe|Stephen Frears\twriter_movie_director\tthe movies written by ENT were directed by who"
        );
        let back = read_meta(&buf[..]).unwrap();
        assert_eq!(back, examples);
    }

    #[test]
    fn annotated_lines() {
        let examples = load_questions(QA.as_bytes(), QTYPE.as_bytes(), 2).unwrap();
        let mut buf = Vec::new();
        assert_eq!(write_annotated(&examples, &mut buf).unwrap(), 2);
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "the movies written by ENT were directed by who\twritten_by_reverse(ENT, X), directed_by(X, Y)\n\
             what movies are about ENT\thas_tags_reverse(ENT, X), directed_by(X, Y)\n"
        );
    }

    #[test]
    fn meta_errors_have_line_numbers() {
        let err = read_meta("a\tb\n".as_bytes()).unwrap_err();
        assert!(matches!(err, AnnotateError::Line { line: 1, .. }), "{err}");
        let err = read_meta("\nid\t1\te\tx\tmovie_actor_movie\tq ENT\n".as_bytes()).unwrap_err();
        assert!(matches!(err, AnnotateError::Line { line: 2, .. }), "{err}");
    }
}
