//! Paired sentence / logical-form grammar: lexicon, rules, parsers and the
//! sampling driver for example banks.

mod example;
mod generate;
mod lexicon;
mod parse;
mod rules;

pub use example::Example;
pub use generate::{
    bank_capacity, generate_bank, generate_example, GenerationConfig, Restrictions, Role, Sampler,
    Template, TemplateWeights,
};
pub use lexicon::{
    Frame, Lexicon, Verb, AUXILIARY, COMPLEMENTIZER, DEFAULT_LEXICON, DETERMINERS, PREPOSITIONS,
};
pub use parse::{parse_lf, parse_sentence};
pub use rules::{
    cofe_rules, rule_kind, Grammar, LexForm, ProductionRule, RuleKind, SrcSym, TgtSym,
};

use thiserror::Error;

/// Node labels and fixed terminals of both grammars.
pub mod labels {
    pub const SENTENCE: &str = "sentence";
    pub const SUBJECT: &str = "subject";
    pub const DIRECT_OBJECT: &str = "direct-object";
    pub const INDIRECT_OBJECT: &str = "indirect-object";
    pub const ACTIVE_VERB: &str = "active-verb";
    pub const PASSIVE_VERB: &str = "passive-verb";
    pub const PP_MOD: &str = "pp-mod";
    pub const PP_S: &str = "pp-s";
    pub const PREP: &str = "prep";
    pub const CONJ: &str = "conj";

    pub const CLAUSE: &str = "CLAUSE";
    pub const PRED_FUNC: &str = "PRED-FUNC";
    pub const AGENT: &str = "AGENT";
    pub const THEME: &str = "THEME";
    pub const RECIPIENT: &str = "RECIPIENT";
    pub const PP_FUNC: &str = "PP-FUNC";
    pub const PP_S_T: &str = "PP-S";
    pub const PP_CONCAT: &str = "PP-CONCAT";
    pub const CP_CONCAT: &str = "CP-CONCAT";

    pub const THAT: &str = "that";
    pub const AUX: &str = "was";
    pub const NONE: &str = "NONE";
    pub const CCOMP: &str = "CCOMP";
    pub const LPAREN: &str = "(";
    pub const RPAREN: &str = ")";
    pub const COMMA: &str = ",";

    /// Target tokens that are never content words.
    pub const STRUCTURAL_TARGET_TOKENS: [&str; 8] =
        ["(", ")", ",", "NONE", "CCOMP", "IN", "ON", "BESIDE"];
}

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("lexicon line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("invalid lexicon: {0}")]
    Validation(String),
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no rule derives node {node} at {path}")]
    Derivation { path: String, node: String },
    #[error("parse error at token {position}: {msg}")]
    Parse { position: usize, msg: String },
    #[error(
        "requested {requested} distinct sentences but the grammar admits at most {achievable}"
    )]
    Capacity { requested: usize, achievable: u128 },
    #[error("invalid generation config: {0}")]
    Config(String),
}
