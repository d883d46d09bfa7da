use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GrammarError;

pub const DETERMINERS: [&str; 2] = ["a", "the"];
pub const PREPOSITIONS: [&str; 3] = ["in", "on", "beside"];
pub const COMPLEMENTIZER: &str = "that";
pub const AUXILIARY: &str = "was";

/// Words whose lowercase or uppercase form is already a grammar terminal.
const RESERVED: [&str; 9] = [
    "a", "the", "in", "on", "beside", "that", "was", "none", "ccomp",
];

/// The built-in lexicon shipped with the crate.
pub const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    Intransitive,
    Transitive,
    Ditransitive,
    ClauseEmbedding,
    PassiveCapable,
}

impl Frame {
    pub const ALL: [Frame; 5] = [
        Frame::Intransitive,
        Frame::Transitive,
        Frame::Ditransitive,
        Frame::ClauseEmbedding,
        Frame::PassiveCapable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Intransitive => "intransitive",
            Frame::Transitive => "transitive",
            Frame::Ditransitive => "ditransitive",
            Frame::ClauseEmbedding => "clause-embedding",
            Frame::PassiveCapable => "passive-capable",
        }
    }
}

impl FromStr for Frame {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Frame::ALL.into_iter().find(|f| f.as_str() == s).ok_or(())
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verb {
    pub word: String,
    pub lemma: String,
    pub frames: BTreeSet<Frame>,
}

impl Verb {
    pub fn has(&self, frame: Frame) -> bool {
        self.frames.contains(&frame)
    }
}

/// Open word classes of the grammar. Determiners, prepositions and the
/// complementizer are closed and not stored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    pub common_nouns: Vec<String>,
    pub proper_nouns: Vec<String>,
    pub verbs: Vec<Verb>,
}

impl Lexicon {
    pub fn builtin() -> Lexicon {
        Lexicon::parse(DEFAULT_LEXICON).expect("built-in lexicon is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Lexicon, GrammarError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GrammarError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Lexicon::parse(&text)
    }

    /// Parses the line format `category<TAB>word[<TAB>lemma][<TAB>frames]`.
    pub fn parse(text: &str) -> Result<Lexicon, GrammarError> {
        let mut common: Vec<String> = Vec::new();
        let mut proper: Vec<String> = Vec::new();
        let mut verbs: Vec<Verb> = Vec::new();
        // lowercase form -> category that claimed it
        let mut claimed: BTreeMap<String, &'static str> = BTreeMap::new();

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            let format_err = |msg: String| GrammarError::Format { line: line_no, msg };
            if fields.len() < 2 || fields[1].is_empty() {
                return Err(format_err("expected category<TAB>word".into()));
            }
            let (category, word) = (fields[0], fields[1]);
            match category {
                "noun" | "common" | "proper" => {
                    if fields.len() > 2 {
                        return Err(format_err(format!(
                            "unexpected columns after noun {word:?}"
                        )));
                    }
                    let proper_noun = category == "proper";
                    check_word(word, line_no)?;
                    let shape_ok = if proper_noun {
                        is_capitalized(word)
                    } else {
                        word.chars().all(|c| c.is_ascii_lowercase())
                    };
                    if !shape_ok {
                        return Err(format_err(format!(
                            "{word:?} must be {}",
                            if proper_noun {
                                "capitalized"
                            } else {
                                "lowercase"
                            }
                        )));
                    }
                    let cat = if proper_noun { "proper" } else { "noun" };
                    if claim(&mut claimed, word, cat)? {
                        if proper_noun {
                            proper.push(word.to_string());
                        } else {
                            common.push(word.to_string());
                        }
                    }
                }
                "verb" => {
                    check_word(word, line_no)?;
                    if !word.chars().all(|c| c.is_ascii_lowercase()) {
                        return Err(format_err(format!("verb {word:?} must be lowercase")));
                    }
                    let (lemma, frames_col) = match fields.len() {
                        2 => (word, None),
                        3 if parse_frames(fields[2]).is_some() => (word, Some(fields[2])),
                        3 => (fields[2], None),
                        4 => (fields[2], Some(fields[3])),
                        _ => return Err(format_err("too many columns".into())),
                    };
                    check_word(lemma, line_no)?;
                    if RESERVED.contains(&lemma.to_ascii_lowercase().as_str()) {
                        return Err(GrammarError::Validation(format!(
                            "lemma {lemma:?} collides with a grammar terminal"
                        )));
                    }
                    let frames = match frames_col {
                        None => BTreeSet::from([Frame::Transitive]),
                        Some(col) => parse_frames(col)
                            .ok_or_else(|| format_err(format!("unknown frame in {col:?}")))?,
                    };
                    if frames.is_empty() {
                        return Err(format_err(format!("verb {word:?} has no frames")));
                    }
                    let verb = Verb {
                        word: word.to_string(),
                        lemma: lemma.to_string(),
                        frames,
                    };
                    if let Some(prev) = verbs.iter().find(|v| v.word == verb.word) {
                        if *prev != verb {
                            return Err(GrammarError::Validation(format!(
                                "duplicate word {word:?} with conflicting entries"
                            )));
                        }
                        continue;
                    }
                    claim(&mut claimed, word, "verb")?;
                    verbs.push(verb);
                }
                "prep" => {
                    if !PREPOSITIONS.contains(&word) {
                        return Err(GrammarError::Validation(format!(
                            "preposition {word:?} is not in the closed set {PREPOSITIONS:?}"
                        )));
                    }
                }
                "det" => {
                    if !DETERMINERS.contains(&word) {
                        return Err(GrammarError::Validation(format!(
                            "determiner {word:?} is not in the closed set {DETERMINERS:?}"
                        )));
                    }
                }
                "conj" => {
                    if word != COMPLEMENTIZER {
                        return Err(GrammarError::Validation(format!(
                            "complementizer must be {COMPLEMENTIZER:?}, got {word:?}"
                        )));
                    }
                }
                other => return Err(format_err(format!("unknown category {other:?}"))),
            }
        }

        let lex = Lexicon {
            common_nouns: common,
            proper_nouns: proper,
            verbs,
        };
        lex.validate()?;
        Ok(lex)
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        if self.common_nouns.is_empty() {
            return Err(GrammarError::Validation("common noun list is empty".into()));
        }
        if self.verbs.is_empty() {
            return Err(GrammarError::Validation("verb list is empty".into()));
        }
        let mut seen = BTreeSet::new();
        let all = self
            .common_nouns
            .iter()
            .chain(&self.proper_nouns)
            .chain(self.verbs.iter().map(|v| &v.word));
        for w in all {
            if w.is_empty() || !w.chars().all(|c| c.is_ascii_alphabetic()) {
                return Err(GrammarError::Validation(format!("invalid word {w:?}")));
            }
            if RESERVED.contains(&w.to_ascii_lowercase().as_str()) {
                return Err(GrammarError::Validation(format!(
                    "word {w:?} collides with a grammar terminal"
                )));
            }
            if !seen.insert(w.to_ascii_lowercase()) {
                return Err(GrammarError::Validation(format!("duplicate word {w:?}")));
            }
        }
        Ok(())
    }

    pub fn verb(&self, word: &str) -> Option<&Verb> {
        self.verbs.iter().find(|v| v.word == word)
    }

    pub fn is_common(&self, word: &str) -> bool {
        self.common_nouns.iter().any(|w| w == word)
    }

    pub fn is_proper(&self, word: &str) -> bool {
        self.proper_nouns.iter().any(|w| w == word)
    }

    pub fn nouns(&self) -> impl Iterator<Item = &String> {
        self.common_nouns.iter().chain(&self.proper_nouns)
    }

    /// Serializes back to the line format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for w in &self.common_nouns {
            out.push_str(&format!("noun\t{w}\n"));
        }
        for w in &self.proper_nouns {
            out.push_str(&format!("proper\t{w}\n"));
        }
        for v in &self.verbs {
            let frames: Vec<&str> = v.frames.iter().map(|f| f.as_str()).collect();
            out.push_str(&format!(
                "verb\t{}\t{}\t{}\n",
                v.word,
                v.lemma,
                frames.join(",")
            ));
        }
        out
    }
}

fn check_word(word: &str, line: usize) -> Result<(), GrammarError> {
    if word.is_empty() || !word.chars().all(|c| c.is_ascii_alphabetic()) {
        return Err(GrammarError::Format {
            line,
            msg: format!("{word:?} is not an ASCII-alphabetic word"),
        });
    }
    Ok(())
}

fn is_capitalized(word: &str) -> bool {
    let mut cs = word.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_uppercase()) && cs.all(|c| c.is_ascii_lowercase())
}

fn parse_frames(col: &str) -> Option<BTreeSet<Frame>> {
    col.split(',')
        .map(|f| f.trim().parse::<Frame>().ok())
        .collect()
}

/// Returns Ok(false) for an exact repeat within the same category.
fn claim(
    claimed: &mut BTreeMap<String, &'static str>,
    word: &str,
    category: &'static str,
) -> Result<bool, GrammarError> {
    let key = word.to_ascii_lowercase();
    if RESERVED.contains(&key.as_str()) {
        return Err(GrammarError::Validation(format!(
            "word {word:?} collides with a grammar terminal"
        )));
    }
    match claimed.get(&key) {
        Some(&c) if c == category && category != "verb" => Ok(false),
        Some(_) => Err(GrammarError::Validation(format!("duplicate word {word:?}"))),
        None => {
            claimed.insert(key, category);
            Ok(true)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_small_file() {
        let text = "# tiny\nnoun\tbaby\nnoun\troom\nproper\tJackson\nverb\tobserved\ttransitive\n";
        let lex = Lexicon::parse(text).unwrap();
        assert_eq!(lex.common_nouns.len(), 2);
        assert_eq!(lex.proper_nouns, vec!["Jackson"]);
        assert_eq!(lex.verbs[0].lemma, "observed");
        assert!(lex.verbs[0].has(Frame::Transitive));
    }

    #[test]
    fn lemma_and_frames_columns() {
        let lex =
            Lexicon::parse("noun\tcake\nverb\tbaked\tbake\ttransitive,passive-capable\n").unwrap();
        let v = lex.verb("baked").unwrap();
        assert_eq!(v.lemma, "bake");
        assert_eq!(v.frames.len(), 2);
        let lex = Lexicon::parse("noun\tcake\nverb\tate\teat\n").unwrap();
        assert_eq!(lex.verb("ate").unwrap().lemma, "eat");
    }

    #[test]
    fn closed_preposition_set() {
        let err = Lexicon::parse("noun\tbaby\nverb\tsaw\nprep\tunder\n").unwrap_err();
        assert!(matches!(err, GrammarError::Validation(_)));
        assert!(Lexicon::parse("noun\tbaby\nverb\tsaw\nprep\tbeside\n").is_ok());
    }

    #[test]
    fn empty_noun_list_rejected() {
        let err = Lexicon::parse("proper\tEmma\nverb\tsaw\n").unwrap_err();
        assert!(matches!(err, GrammarError::Validation(_)));
    }

    #[test]
    fn duplicates() {
        let lex = Lexicon::parse("noun\tbaby\nnoun\tbaby\nverb\tsaw\n").unwrap();
        assert_eq!(lex.common_nouns.len(), 1);
        let err = Lexicon::parse("noun\tbaby\nverb\tbaby\n").unwrap_err();
        assert!(err.to_string().contains("baby"), "{err}");
        let err = Lexicon::parse("noun\trose\nproper\tRose\nverb\tsaw\n").unwrap_err();
        assert!(err.to_string().contains("Rose"), "{err}");
    }

    #[test]
    fn format_error_has_line_number() {
        let err = Lexicon::parse("noun\tbaby\nnoun\n").unwrap_err();
        assert!(
            matches!(err, GrammarError::Format { line: 2, .. }),
            "{err:?}"
        );
        let err = Lexicon::parse("noun\tbaby\nverb\tsaw\tsee\tflying\n").unwrap_err();
        assert!(
            matches!(err, GrammarError::Format { line: 2, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn reserved_words_rejected() {
        assert!(Lexicon::parse("noun\tnone\nverb\tsaw\n").is_err());
        assert!(Lexicon::parse("noun\tbaby\nverb\tsaw\tccomp\n").is_err());
    }

    #[test]
    fn builtin_round_trips() {
        let lex = Lexicon::builtin();
        assert_eq!(Lexicon::parse(&lex.to_tsv()).unwrap(), lex);
    }
}
