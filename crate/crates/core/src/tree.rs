//! Ordered labeled parse trees and the sub-structure family used for
//! structural matching: leaves, internal nodes, one-depth sub-structures
//! and composed complete sub-structures (CSS).

use std::collections::BTreeSet;
use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Default height cap for composed sub-structures used in scoring.
pub const DEFAULT_COMPOSE_DEPTH: usize = 2;

/// An ordered, labeled tree. A node with no children is a leaf.
///
/// Serializes as the nested array `[label, [children...]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParseTree {
    label: String,
    children: Vec<ParseTree>,
}

impl ParseTree {
    pub fn leaf(label: impl Into<String>) -> Self {
        ParseTree {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<ParseTree>) -> Self {
        ParseTree {
            label: label.into(),
            children,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn children(&self) -> &[ParseTree] {
        &self.children
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Leaf labels in left-to-right order (the yield of the tree).
    pub fn tokens(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_tokens(&mut out);
        out
    }

    fn collect_tokens<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_leaf() {
            out.push(&self.label);
        } else {
            for c in &self.children {
                c.collect_tokens(out);
            }
        }
    }

    /// Space-joined yield.
    pub fn text(&self) -> String {
        self.tokens().join(" ")
    }

    /// Pre-order iterator over all nodes.
    pub fn nodes(&self) -> Nodes<'_> {
        Nodes { stack: vec![self] }
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    /// The primitives of the tree: its distinct leaf labels.
    pub fn leaves(&self) -> BTreeSet<String> {
        self.nodes()
            .filter(|n| n.is_leaf())
            .map(|n| n.label.clone())
            .collect()
    }

    /// Distinct labels of internal nodes.
    pub fn internal_labels(&self) -> BTreeSet<String> {
        self.nodes()
            .filter(|n| !n.is_leaf())
            .map(|n| n.label.clone())
            .collect()
    }

    /// Number of edges on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.height())
            .max()
            .unwrap_or(0)
    }

    /// Nesting depth: 0 for a bare leaf, otherwise one plus the largest
    /// number of self-embedding nodes found on a single root-to-leaf path.
    ///
    /// A node is self-embedding on a path when its label reappears further
    /// down that path, so every application of a recursive rule adds exactly
    /// one level regardless of how many edges the rule spans. Paired source
    /// and target derivations therefore have equal depth.
    pub fn depth(&self) -> usize {
        if self.is_leaf() {
            return 0;
        }
        let mut path = Vec::new();
        1 + self.max_self_embedding(&mut path)
    }

    fn max_self_embedding<'a>(&'a self, path: &mut Vec<&'a str>) -> usize {
        path.push(&self.label);
        let best = if self.is_leaf() {
            // occurrences - 1, summed per distinct label
            let mut sorted: Vec<&str> = path.clone();
            sorted.sort_unstable();
            let distinct = {
                let mut d = sorted.clone();
                d.dedup();
                d.len()
            };
            sorted.len() - distinct
        } else {
            self.children
                .iter()
                .map(|c| c.max_self_embedding(path))
                .max()
                .unwrap_or(0)
        };
        path.pop();
        best
    }

    /// One sub-structure per internal node: the node label with the labels
    /// of all of its children.
    pub fn one_depth_substructures(&self) -> BTreeSet<SubStructure> {
        self.nodes()
            .filter(|n| !n.is_leaf())
            .map(|n| SubStructure::new(n.truncated(1)))
            .collect()
    }

    /// Complete sub-structures of height `2..=max_depth`, built by gluing a
    /// node's one-depth sub-structure with expansions of a subset of its
    /// internal children.
    pub fn composed_substructures(&self, max_depth: usize) -> BTreeSet<SubStructure> {
        let mut out = BTreeSet::new();
        if max_depth < 2 {
            return out;
        }
        for n in self.nodes().filter(|n| !n.is_leaf()) {
            for frag in n.fragments(max_depth) {
                if frag.height() >= 2 {
                    out.insert(SubStructure::new(frag));
                }
            }
        }
        out
    }

    /// All partial structures: one-depth plus composed (height cap 2).
    pub fn structure_set(&self) -> BTreeSet<SubStructure> {
        let mut s = self.one_depth_substructures();
        s.extend(self.composed_substructures(DEFAULT_COMPOSE_DEPTH));
        s
    }

    /// Exact membership test, with no height cap on the fragment.
    pub fn contains(&self, fragment: &SubStructure) -> bool {
        let shape = fragment.shape();
        !shape.is_leaf() && self.nodes().any(|n| n.matches(shape))
    }

    fn matches(&self, shape: &ParseTree) -> bool {
        if self.label != shape.label {
            return false;
        }
        if shape.is_leaf() {
            return true;
        }
        self.children.len() == shape.children.len()
            && self
                .children
                .iter()
                .zip(&shape.children)
                .all(|(c, s)| c.matches(s))
    }

    /// Copy of this node cut off `levels` edges below it.
    pub fn truncated(&self, levels: usize) -> ParseTree {
        if levels == 0 {
            return ParseTree::leaf(self.label.clone());
        }
        ParseTree::node(
            self.label.clone(),
            self.children
                .iter()
                .map(|c| c.truncated(levels - 1))
                .collect(),
        )
    }

    /// Every complete fragment rooted here with height `1..=max_height`.
    /// Requires an internal node.
    fn fragments(&self, max_height: usize) -> Vec<ParseTree> {
        debug_assert!(!self.is_leaf() && max_height >= 1);
        let mut partial: Vec<Vec<ParseTree>> = vec![Vec::with_capacity(self.children.len())];
        for child in &self.children {
            let mut options = vec![ParseTree::leaf(child.label.clone())];
            if !child.is_leaf() && max_height >= 2 {
                options.extend(child.fragments(max_height - 1));
            }
            let mut next = Vec::with_capacity(partial.len() * options.len());
            for prefix in &partial {
                for opt in &options {
                    let mut p = prefix.clone();
                    p.push(opt.clone());
                    next.push(p);
                }
            }
            partial = next;
        }
        partial
            .into_iter()
            .map(|children| ParseTree::node(self.label.clone(), children))
            .collect()
    }
}

impl fmt::Display for ParseTree {
    /// Bracketed form, e.g. `(sentence (subject Jackson) ...)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_leaf() {
            return f.write_str(&self.label);
        }
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

pub struct Nodes<'a> {
    stack: Vec<&'a ParseTree>,
}

impl<'a> Iterator for Nodes<'a> {
    type Item = &'a ParseTree;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.stack.pop()?;
        self.stack.extend(n.children.iter().rev());
        Some(n)
    }
}

impl Serialize for ParseTree {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.label)?;
        t.serialize_element(&self.children)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for ParseTree {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct TreeVisitor;

        impl<'de> Visitor<'de> for TreeVisitor {
            type Value = ParseTree;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a [label, [children...]] array")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ParseTree, A::Error> {
                let label: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let children: Vec<ParseTree> = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(ParseTree { label, children })
            }
        }

        deserializer.deserialize_tuple(2, TreeVisitor)
    }
}

/// A complete tree fragment together with its canonical encoding.
///
/// Fragments carry labels only; a fragment leaf stands for a node whose
/// expansion is not part of the fragment. Equality, ordering and hashing go
/// through the encoding.
#[derive(Clone, Debug)]
pub struct SubStructure {
    shape: ParseTree,
    encoding: String,
}

impl SubStructure {
    pub fn new(shape: ParseTree) -> Self {
        let encoding = encode(&shape);
        SubStructure { shape, encoding }
    }

    pub fn shape(&self) -> &ParseTree {
        &self.shape
    }

    pub fn encoding(&self) -> &str {
        &self.encoding
    }

    pub fn height(&self) -> usize {
        self.shape.height()
    }

    /// The one-depth element at the top of this fragment.
    pub fn top(&self) -> SubStructure {
        SubStructure::new(self.shape.truncated(1))
    }
}

impl PartialEq for SubStructure {
    fn eq(&self, other: &Self) -> bool {
        self.encoding == other.encoding
    }
}

impl Eq for SubStructure {}

impl std::hash::Hash for SubStructure {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.encoding.hash(state)
    }
}

impl PartialOrd for SubStructure {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubStructure {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.encoding.cmp(&other.encoding)
    }
}

impl fmt::Display for SubStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.shape.fmt(f)
    }
}

impl Serialize for SubStructure {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.shape.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SubStructure {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        ParseTree::deserialize(deserializer).map(SubStructure::new)
    }
}

/// Pre-order serialization; each node is `<byte length>:<label>/<arity>`.
pub fn encode(shape: &ParseTree) -> String {
    let mut out = String::new();
    encode_into(shape, &mut out);
    out
}

fn encode_into(node: &ParseTree, out: &mut String) {
    use std::fmt::Write;
    if !out.is_empty() {
        out.push(' ');
    }
    let _ = write!(
        out,
        "{}:{}/{}",
        node.label.len(),
        node.label,
        node.children.len()
    );
    for c in &node.children {
        encode_into(c, out);
    }
}
