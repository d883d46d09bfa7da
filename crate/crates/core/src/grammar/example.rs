use serde::{Deserialize, Serialize};

use super::rules::Grammar;
use super::GrammarError;
use crate::tree::ParseTree;

/// A paired sentence / logical form with both trees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: u32,
    pub source: String,
    pub target: String,
    pub source_tree: ParseTree,
    pub target_tree: ParseTree,
    pub depth: usize,
}

impl Example {
    pub fn from_source_tree(
        id: u32,
        source_tree: ParseTree,
        grammar: &Grammar,
    ) -> Result<Example, GrammarError> {
        let target_tree = grammar.derive_target(&source_tree)?;
        debug_assert_eq!(source_tree.depth(), target_tree.depth());
        Ok(Example {
            id,
            source: source_tree.text(),
            target: target_tree.text(),
            depth: source_tree.depth(),
            source_tree,
            target_tree,
        })
    }

    pub fn source_len(&self) -> usize {
        self.source.split_whitespace().count()
    }

    pub fn target_len(&self) -> usize {
        self.target.split_whitespace().count()
    }
}
