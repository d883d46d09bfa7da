//! Recursive-descent parsers for the sentence and logical-form languages.
//! Neither needs the lexicon: word classes follow from position, closed
//! terminals and capitalization.

use super::labels::*;
use super::lexicon::{DETERMINERS, PREPOSITIONS};
use super::GrammarError;
use crate::tree::ParseTree;

struct Cursor<'a> {
    toks: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            toks: text.split_whitespace().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<&'a str> {
        self.toks.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<&'a str> {
        self.toks.get(self.pos + offset).copied()
    }

    fn next(&mut self) -> Result<&'a str, GrammarError> {
        let t = self
            .peek()
            .ok_or_else(|| self.err("unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect(&mut self, tok: &str) -> Result<(), GrammarError> {
        let t = self.next()?;
        if t != tok {
            self.pos -= 1;
            return Err(self.err(&format!("expected {tok:?}, found {t:?}")));
        }
        Ok(())
    }

    fn err(&self, msg: &str) -> GrammarError {
        GrammarError::Parse {
            position: self.pos,
            msg: msg.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn leaf(s: &str) -> ParseTree {
    ParseTree::leaf(s)
}

/// Parses a sentence into its source tree.
pub fn parse_sentence(text: &str) -> Result<ParseTree, GrammarError> {
    let mut c = Cursor::new(text);
    let tree = sentence(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing tokens"));
    }
    Ok(tree)
}

fn sentence(c: &mut Cursor) -> Result<ParseTree, GrammarError> {
    let subject = ParseTree::node(SUBJECT, role_body(c)?);
    if c.peek() == Some(AUX) {
        c.next()?;
        let verb = word(c, "verb")?;
        return Ok(ParseTree::node(
            SENTENCE,
            vec![
                subject,
                ParseTree::node(PASSIVE_VERB, vec![leaf(AUX), leaf(verb)]),
            ],
        ));
    }
    let verb = ParseTree::node(ACTIVE_VERB, vec![leaf(word(c, "verb")?)]);
    match c.peek() {
        None => Ok(ParseTree::node(SENTENCE, vec![subject, verb])),
        Some(THAT) => {
            c.next()?;
            let head = ParseTree::node(SENTENCE, vec![subject, verb]);
            let rest = sentence(c)?;
            Ok(ParseTree::node(
                SENTENCE,
                vec![head, ParseTree::node(CONJ, vec![leaf(THAT)]), rest],
            ))
        }
        Some(_) => {
            let first = role_body(c)?;
            if c.at_end() {
                Ok(ParseTree::node(
                    SENTENCE,
                    vec![subject, verb, ParseTree::node(DIRECT_OBJECT, first)],
                ))
            } else {
                let second = role_body(c)?;
                Ok(ParseTree::node(
                    SENTENCE,
                    vec![
                        subject,
                        verb,
                        ParseTree::node(INDIRECT_OBJECT, first),
                        ParseTree::node(DIRECT_OBJECT, second),
                    ],
                ))
            }
        }
    }
}

fn word<'a>(c: &mut Cursor<'a>, what: &str) -> Result<&'a str, GrammarError> {
    let t = c.next()?;
    let closed = DETERMINERS.contains(&t) || PREPOSITIONS.contains(&t) || t == THAT || t == AUX;
    if closed || !t.chars().all(|ch| ch.is_ascii_alphabetic()) {
        c.pos -= 1;
        return Err(c.err(&format!("expected {what}, found {t:?}")));
    }
    Ok(t)
}

/// `det noun` or `Proper`, as leaf children.
fn base_np(c: &mut Cursor) -> Result<Vec<ParseTree>, GrammarError> {
    match c.peek() {
        Some(d) if DETERMINERS.contains(&d) => {
            c.next()?;
            let n = word(c, "noun")?;
            Ok(vec![leaf(d), leaf(n)])
        }
        Some(p) if p.starts_with(|ch: char| ch.is_ascii_uppercase()) => {
            let p = word(c, "proper noun")?;
            Ok(vec![leaf(p)])
        }
        Some(t) => Err(c.err(&format!("expected a noun phrase, found {t:?}"))),
        None => Err(c.err("expected a noun phrase, found end of input")),
    }
}

fn role_body(c: &mut Cursor) -> Result<Vec<ParseTree>, GrammarError> {
    let np = base_np(c)?;
    if c.peek().is_some_and(|t| PREPOSITIONS.contains(&t)) {
        Ok(vec![pp_chain(c, np)?])
    } else {
        Ok(np)
    }
}

/// Right-branching `pp-s prep pp-mod` chain, the head noun phrase already read.
fn pp_chain(c: &mut Cursor, head: Vec<ParseTree>) -> Result<ParseTree, GrammarError> {
    let prep = c.next()?;
    let next = base_np(c)?;
    let tail = if c.peek().is_some_and(|t| PREPOSITIONS.contains(&t)) {
        pp_chain(c, next)?
    } else {
        ParseTree::node(PP_MOD, next)
    };
    Ok(ParseTree::node(
        PP_MOD,
        vec![
            ParseTree::node(PP_S, head),
            ParseTree::node(PREP, vec![leaf(prep)]),
            tail,
        ],
    ))
}

/// Parses a logical form into its target tree.
pub fn parse_lf(text: &str) -> Result<ParseTree, GrammarError> {
    let mut c = Cursor::new(text);
    let tree = chain(&mut c)?;
    if !c.at_end() {
        return Err(c.err("trailing tokens"));
    }
    Ok(tree)
}

fn chain(c: &mut Cursor) -> Result<ParseTree, GrammarError> {
    let head = lf_clause(c)?;
    if c.peek() == Some(CCOMP) {
        c.next()?;
        let rest = chain(c)?;
        return Ok(ParseTree::node(
            CLAUSE,
            vec![head, ParseTree::node(CP_CONCAT, vec![leaf(CCOMP)]), rest],
        ));
    }
    Ok(head)
}

fn lf_word<'a>(c: &mut Cursor<'a>) -> Result<&'a str, GrammarError> {
    let t = c.next()?;
    if [LPAREN, RPAREN, COMMA, CCOMP, NONE].contains(&t) {
        c.pos -= 1;
        return Err(c.err(&format!("expected a word, found {t:?}")));
    }
    Ok(t)
}

fn lf_clause(c: &mut Cursor) -> Result<ParseTree, GrammarError> {
    let pred = lf_word(c)?;
    c.expect(LPAREN)?;
    let mut children = vec![ParseTree::node(PRED_FUNC, vec![leaf(pred)]), leaf(LPAREN)];
    for (i, role) in [AGENT, THEME, RECIPIENT].into_iter().enumerate() {
        if i > 0 {
            c.expect(COMMA)?;
            children.push(leaf(COMMA));
        }
        if c.peek() == Some(NONE) {
            c.next()?;
            children.push(leaf(NONE));
        } else {
            children.push(ParseTree::node(role, vec![lf_argument(c)?]));
        }
    }
    c.expect(RPAREN)?;
    children.push(leaf(RPAREN));
    Ok(ParseTree::node(CLAUSE, children))
}

/// A noun, or a prepositional function when the word is followed by `(`.
fn lf_argument(c: &mut Cursor) -> Result<ParseTree, GrammarError> {
    if c.peek_at(1) == Some(LPAREN) {
        let prep = lf_word(c)?;
        c.expect(LPAREN)?;
        let pps = lf_word(c)?;
        c.expect(COMMA)?;
        let inner = if c.peek_at(1) == Some(LPAREN) {
            lf_argument(c)?
        } else {
            ParseTree::node(PP_FUNC, vec![leaf(lf_word(c)?)])
        };
        c.expect(RPAREN)?;
        Ok(ParseTree::node(
            PP_FUNC,
            vec![
                ParseTree::node(PP_CONCAT, vec![leaf(prep)]),
                leaf(LPAREN),
                ParseTree::node(PP_S_T, vec![leaf(pps)]),
                leaf(COMMA),
                inner,
                leaf(RPAREN),
            ],
        ))
    } else {
        Ok(leaf(lf_word(c)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{Grammar, Lexicon};

    fn grammar() -> Grammar {
        let lex = Lexicon::parse(
            "noun\tbaby\nnoun\troom\nnoun\ttable\nnoun\tcake\nnoun\tgirl\nproper\tJackson\nproper\tEmma\n\
             verb\tobserved\tobserve\ttransitive,passive-capable\nverb\tslept\tsleep\tintransitive\n\
             verb\tsaid\tsay\tclause-embedding\nverb\tgave\tgive\tditransitive\n",
        )
        .unwrap();
        Grammar::new(lex)
    }

    fn lf(text: &str) -> String {
        let g = grammar();
        g.derive_target(&parse_sentence(text).unwrap())
            .unwrap()
            .text()
    }

    #[test]
    fn derives_transitive() {
        assert_eq!(
            lf("Jackson observed a baby"),
            "OBSERVE ( JACKSON , BABY , NONE )"
        );
    }

    #[test]
    fn derives_intransitive() {
        assert_eq!(lf("a baby slept"), "SLEEP ( BABY , NONE , NONE )");
    }

    #[test]
    fn derives_subject_pp() {
        assert_eq!(
            lf("Jackson in a room observed a baby"),
            "OBSERVE ( IN ( JACKSON , ROOM ) , BABY , NONE )"
        );
    }

    #[test]
    fn derives_nested_pp_ccomp_passive_ditransitive() {
        assert_eq!(
            lf("Emma observed a baby in a room on the table"),
            "OBSERVE ( EMMA , IN ( BABY , ON ( ROOM , TABLE ) ) , NONE )"
        );
        assert_eq!(
            lf("Emma said that a baby slept"),
            "SAY ( EMMA , NONE , NONE ) CCOMP SLEEP ( BABY , NONE , NONE )"
        );
        assert_eq!(lf("a cake was observed"), "OBSERVE ( NONE , CAKE , NONE )");
        assert_eq!(lf("Emma gave a girl a cake"), "GIVE ( EMMA , CAKE , GIRL )");
    }

    #[test]
    fn lf_round_trip() {
        let g = grammar();
        for s in [
            "Emma said that Jackson said that a baby in a room on a table slept",
            "Emma gave a girl beside Jackson the cake",
            "the cake was observed",
        ] {
            let t = g.derive_target(&parse_sentence(s).unwrap()).unwrap();
            assert_eq!(parse_lf(&t.text()).unwrap(), t, "{s}");
            assert_eq!(parse_sentence(s).unwrap().text(), s);
        }
    }

    #[test]
    fn unknown_word_fails_derivation() {
        let g = grammar();
        let t = parse_sentence("Jackson devoured a baby").unwrap();
        let err = g.derive_target(&t).unwrap_err();
        assert!(matches!(err, GrammarError::Derivation { .. }), "{err}");
        assert!(err.to_string().contains("devoured"), "{err}");
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse_sentence("a").is_err());
        assert!(parse_sentence("Jackson observed a baby baby baby").is_err());
        assert!(parse_lf("OBSERVE ( JACKSON , BABY )").is_err());
        assert!(parse_lf("OBSERVE ( JACKSON , BABY , NONE ) CCOMP").is_err());
    }
}
