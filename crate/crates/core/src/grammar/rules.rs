//! Paired source/target production rules and target derivation.

use std::collections::{BTreeMap, BTreeSet};

use super::labels::*;
use super::lexicon::{Lexicon, DETERMINERS, PREPOSITIONS};
use super::GrammarError;
use crate::tree::ParseTree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    /// Right-hand side is terminals only.
    T,
    /// Non-recursive rule with variable slots.
    N,
    /// The left-hand side reappears in its own expansion chain.
    R,
}

/// A source right-hand-side symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SrcSym {
    Nt(&'static str),
    Det,
    Noun,
    Proper,
    Verb,
    Prep,
    Word(&'static str),
}

impl SrcSym {
    fn is_variable(self) -> bool {
        !matches!(self, SrcSym::Det | SrcSym::Word(_))
    }

    fn is_terminal(self) -> bool {
        !matches!(self, SrcSym::Nt(_))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LexForm {
    Upper,
    Lemma,
}

/// A target right-hand-side symbol. `slot` indexes the source right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgtSym {
    Nt { label: &'static str, slot: usize },
    Lex { slot: usize, form: LexForm },
    Word(&'static str),
}

#[derive(Clone, Debug)]
pub struct ProductionRule {
    pub name: &'static str,
    pub source_lhs: &'static [&'static str],
    pub source_rhs: Vec<SrcSym>,
    /// `None` means the target label is chosen by the parent slot (role rules).
    pub target_lhs: Option<&'static str>,
    pub target_rhs: Vec<TgtSym>,
}

impl ProductionRule {
    /// Source slot -> target position, one entry per variable source slot.
    pub fn pairing(&self) -> BTreeMap<usize, usize> {
        self.target_rhs
            .iter()
            .enumerate()
            .filter_map(|(pos, s)| match *s {
                TgtSym::Nt { slot, .. } | TgtSym::Lex { slot, .. } => Some((slot, pos)),
                TgtSym::Word(_) => None,
            })
            .collect()
    }

    /// True when every variable source slot is used exactly once in the target.
    pub fn pairing_is_bijective(&self) -> bool {
        let variables: BTreeSet<usize> = self
            .source_rhs
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_variable())
            .map(|(i, _)| i)
            .collect();
        let refs: Vec<usize> = self
            .target_rhs
            .iter()
            .filter_map(|s| match *s {
                TgtSym::Nt { slot, .. } | TgtSym::Lex { slot, .. } => Some(slot),
                TgtSym::Word(_) => None,
            })
            .collect();
        let unique: BTreeSet<usize> = refs.iter().copied().collect();
        unique.len() == refs.len() && unique == variables
    }

    fn matches(&self, node: &ParseTree, lex: &Lexicon) -> bool {
        if !self.source_lhs.contains(&node.label())
            || node.children().len() != self.source_rhs.len()
        {
            return false;
        }
        node.children()
            .iter()
            .zip(&self.source_rhs)
            .all(|(child, sym)| match *sym {
                SrcSym::Nt(l) => !child.is_leaf() && child.label() == l,
                _ if !child.is_leaf() => false,
                SrcSym::Det => DETERMINERS.contains(&child.label()),
                SrcSym::Noun => lex.is_common(child.label()),
                SrcSym::Proper => lex.is_proper(child.label()),
                SrcSym::Verb => lex.verb(child.label()).is_some(),
                SrcSym::Prep => PREPOSITIONS.contains(&child.label()),
                SrcSym::Word(w) => child.label() == w,
            })
    }
}

const ROLES: &[&str] = &[SUBJECT, DIRECT_OBJECT, INDIRECT_OBJECT];

fn clause(args: [TgtSym; 3], verb_slot: usize) -> Vec<TgtSym> {
    let [a, t, r] = args;
    vec![
        TgtSym::Nt {
            label: PRED_FUNC,
            slot: verb_slot,
        },
        TgtSym::Word(LPAREN),
        a,
        TgtSym::Word(COMMA),
        t,
        TgtSym::Word(COMMA),
        r,
        TgtSym::Word(RPAREN),
    ]
}

const NONE_ARG: TgtSym = TgtSym::Word(NONE);

/// The paired grammar.
pub fn cofe_rules() -> Vec<ProductionRule> {
    use SrcSym::*;
    let upper = |slot| TgtSym::Lex {
        slot,
        form: LexForm::Upper,
    };
    vec![
        ProductionRule {
            name: "sentence-intransitive",
            source_lhs: &[SENTENCE],
            source_rhs: vec![Nt(SUBJECT), Nt(ACTIVE_VERB)],
            target_lhs: Some(CLAUSE),
            target_rhs: clause(
                [
                    TgtSym::Nt {
                        label: AGENT,
                        slot: 0,
                    },
                    NONE_ARG,
                    NONE_ARG,
                ],
                1,
            ),
        },
        ProductionRule {
            name: "sentence-transitive",
            source_lhs: &[SENTENCE],
            source_rhs: vec![Nt(SUBJECT), Nt(ACTIVE_VERB), Nt(DIRECT_OBJECT)],
            target_lhs: Some(CLAUSE),
            target_rhs: clause(
                [
                    TgtSym::Nt {
                        label: AGENT,
                        slot: 0,
                    },
                    TgtSym::Nt {
                        label: THEME,
                        slot: 2,
                    },
                    NONE_ARG,
                ],
                1,
            ),
        },
        ProductionRule {
            name: "sentence-ditransitive",
            source_lhs: &[SENTENCE],
            source_rhs: vec![
                Nt(SUBJECT),
                Nt(ACTIVE_VERB),
                Nt(INDIRECT_OBJECT),
                Nt(DIRECT_OBJECT),
            ],
            target_lhs: Some(CLAUSE),
            target_rhs: clause(
                [
                    TgtSym::Nt {
                        label: AGENT,
                        slot: 0,
                    },
                    TgtSym::Nt {
                        label: THEME,
                        slot: 3,
                    },
                    TgtSym::Nt {
                        label: RECIPIENT,
                        slot: 2,
                    },
                ],
                1,
            ),
        },
        ProductionRule {
            name: "sentence-passive",
            source_lhs: &[SENTENCE],
            source_rhs: vec![Nt(SUBJECT), Nt(PASSIVE_VERB)],
            target_lhs: Some(CLAUSE),
            target_rhs: clause(
                [
                    NONE_ARG,
                    TgtSym::Nt {
                        label: THEME,
                        slot: 0,
                    },
                    NONE_ARG,
                ],
                1,
            ),
        },
        ProductionRule {
            name: "sentence-ccomp",
            source_lhs: &[SENTENCE],
            source_rhs: vec![Nt(SENTENCE), Nt(CONJ), Nt(SENTENCE)],
            target_lhs: Some(CLAUSE),
            target_rhs: vec![
                TgtSym::Nt {
                    label: CLAUSE,
                    slot: 0,
                },
                TgtSym::Nt {
                    label: CP_CONCAT,
                    slot: 1,
                },
                TgtSym::Nt {
                    label: CLAUSE,
                    slot: 2,
                },
            ],
        },
        ProductionRule {
            name: "role-common",
            source_lhs: ROLES,
            source_rhs: vec![Det, Noun],
            target_lhs: None,
            target_rhs: vec![upper(1)],
        },
        ProductionRule {
            name: "role-proper",
            source_lhs: ROLES,
            source_rhs: vec![Proper],
            target_lhs: None,
            target_rhs: vec![upper(0)],
        },
        ProductionRule {
            name: "role-pp",
            source_lhs: ROLES,
            source_rhs: vec![Nt(PP_MOD)],
            target_lhs: None,
            target_rhs: vec![TgtSym::Nt {
                label: PP_FUNC,
                slot: 0,
            }],
        },
        ProductionRule {
            name: "pp-recursive",
            source_lhs: &[PP_MOD],
            source_rhs: vec![Nt(PP_S), Nt(PREP), Nt(PP_MOD)],
            target_lhs: Some(PP_FUNC),
            target_rhs: vec![
                TgtSym::Nt {
                    label: PP_CONCAT,
                    slot: 1,
                },
                TgtSym::Word(LPAREN),
                TgtSym::Nt {
                    label: PP_S_T,
                    slot: 0,
                },
                TgtSym::Word(COMMA),
                TgtSym::Nt {
                    label: PP_FUNC,
                    slot: 2,
                },
                TgtSym::Word(RPAREN),
            ],
        },
        ProductionRule {
            name: "pp-common",
            source_lhs: &[PP_MOD],
            source_rhs: vec![Det, Noun],
            target_lhs: Some(PP_FUNC),
            target_rhs: vec![upper(1)],
        },
        ProductionRule {
            name: "pp-proper",
            source_lhs: &[PP_MOD],
            source_rhs: vec![Proper],
            target_lhs: Some(PP_FUNC),
            target_rhs: vec![upper(0)],
        },
        ProductionRule {
            name: "pps-common",
            source_lhs: &[PP_S],
            source_rhs: vec![Det, Noun],
            target_lhs: Some(PP_S_T),
            target_rhs: vec![upper(1)],
        },
        ProductionRule {
            name: "pps-proper",
            source_lhs: &[PP_S],
            source_rhs: vec![Proper],
            target_lhs: Some(PP_S_T),
            target_rhs: vec![upper(0)],
        },
        ProductionRule {
            name: "active-verb",
            source_lhs: &[ACTIVE_VERB],
            source_rhs: vec![Verb],
            target_lhs: Some(PRED_FUNC),
            target_rhs: vec![TgtSym::Lex {
                slot: 0,
                form: LexForm::Lemma,
            }],
        },
        ProductionRule {
            name: "passive-verb",
            source_lhs: &[PASSIVE_VERB],
            source_rhs: vec![Word(AUX), Verb],
            target_lhs: Some(PRED_FUNC),
            target_rhs: vec![TgtSym::Lex {
                slot: 1,
                form: LexForm::Lemma,
            }],
        },
        ProductionRule {
            name: "prep",
            source_lhs: &[PREP],
            source_rhs: vec![Prep],
            target_lhs: Some(PP_CONCAT),
            target_rhs: vec![upper(0)],
        },
        ProductionRule {
            name: "conj",
            source_lhs: &[CONJ],
            source_rhs: vec![Word(THAT)],
            target_lhs: Some(CP_CONCAT),
            target_rhs: vec![TgtSym::Word(CCOMP)],
        },
    ]
}

/// Classifies a rule against the whole rule set.
pub fn rule_kind(rule: &ProductionRule, rules: &[ProductionRule]) -> RuleKind {
    if rule.source_rhs.iter().all(|s| s.is_terminal()) {
        return RuleKind::T;
    }
    // non-terminals reachable from this rule's right-hand side
    let mut frontier: Vec<&str> = rule
        .source_rhs
        .iter()
        .filter_map(|s| match s {
            SrcSym::Nt(l) => Some(*l),
            _ => None,
        })
        .collect();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    while let Some(nt) = frontier.pop() {
        if rule.source_lhs.contains(&nt) {
            return RuleKind::R;
        }
        if !seen.insert(nt) {
            continue;
        }
        for r in rules.iter().filter(|r| r.source_lhs.contains(&nt)) {
            for s in &r.source_rhs {
                if let SrcSym::Nt(l) = s {
                    frontier.push(l);
                }
            }
        }
    }
    RuleKind::N
}

/// Lexicon plus paired rules.
#[derive(Clone, Debug)]
pub struct Grammar {
    pub lexicon: Lexicon,
    pub rules: Vec<ProductionRule>,
}

impl Grammar {
    pub fn new(lexicon: Lexicon) -> Self {
        Grammar {
            lexicon,
            rules: cofe_rules(),
        }
    }

    pub fn rule_for(&self, node: &ParseTree) -> Option<&ProductionRule> {
        self.rules.iter().find(|r| r.matches(node, &self.lexicon))
    }

    /// Maps a source tree onto its logical-form tree through the paired rules.
    pub fn derive_target(&self, source: &ParseTree) -> Result<ParseTree, GrammarError> {
        let mut path = Vec::new();
        self.derive(source, None, &mut path)
    }

    fn derive(
        &self,
        node: &ParseTree,
        requested: Option<&'static str>,
        path: &mut Vec<usize>,
    ) -> Result<ParseTree, GrammarError> {
        let rule = self
            .rule_for(node)
            .ok_or_else(|| GrammarError::Derivation {
                path: path_string(path),
                node: node.to_string(),
            })?;
        let label = match (rule.target_lhs, requested) {
            (Some(fixed), Some(req)) if fixed != req => {
                return Err(GrammarError::Derivation {
                    path: path_string(path),
                    node: format!("{node} (expected {req}, rule yields {fixed})"),
                })
            }
            (Some(fixed), _) => fixed,
            (None, Some(req)) => req,
            (None, None) => {
                return Err(GrammarError::Derivation {
                    path: path_string(path),
                    node: format!("{node} (role phrase outside a clause)"),
                })
            }
        };
        let mut children = Vec::with_capacity(rule.target_rhs.len());
        for sym in &rule.target_rhs {
            match *sym {
                TgtSym::Word(w) => children.push(ParseTree::leaf(w)),
                TgtSym::Lex { slot, form } => {
                    let word = node.children()[slot].label();
                    let out = match form {
                        LexForm::Upper => word.to_ascii_uppercase(),
                        LexForm::Lemma => self
                            .lexicon
                            .verb(word)
                            .map(|v| v.lemma.to_ascii_uppercase())
                            .unwrap_or_else(|| word.to_ascii_uppercase()),
                    };
                    children.push(ParseTree::leaf(out));
                }
                TgtSym::Nt { label, slot } => {
                    path.push(slot);
                    let child = self.derive(&node.children()[slot], Some(label), path)?;
                    path.pop();
                    children.push(child);
                }
            }
        }
        Ok(ParseTree::node(label, children))
    }
}

fn path_string(path: &[usize]) -> String {
    if path.is_empty() {
        return "root".into();
    }
    path.iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(".")
}
