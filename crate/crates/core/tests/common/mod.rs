#![allow(dead_code)]

use std::collections::BTreeSet;

use cofe::grammar::{generate_bank, Example, GenerationConfig, Grammar, Lexicon};
use cofe::selector::{build_index, check_coverage, CandidateIndex, SelectionQuery};
use cofe::suite::{HoldoutConfig, HoldoutPlan, Suite, SuiteContext};
use cofe::tree::{ParseTree, SubStructure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a tree from a parent array: node `i > 0` hangs under
/// `parents[i - 1] % i`, children ordered by index.
pub fn tree_from_parents(labels: &[u8], parents: &[usize]) -> ParseTree {
    let n = labels.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        children[parents[i - 1] % i].push(i);
    }
    fn build(i: usize, labels: &[u8], children: &[Vec<usize>]) -> ParseTree {
        let label = format!("{}", (b'a' + labels[i]) as char);
        if children[i].is_empty() {
            ParseTree::leaf(label)
        } else {
            ParseTree::node(
                label,
                children[i]
                    .iter()
                    .map(|&c| build(c, labels, children))
                    .collect(),
            )
        }
    }
    build(0, labels, &children)
}

pub fn random_tree<R: Rng>(rng: &mut R, max_nodes: usize, alphabet: u8) -> ParseTree {
    let n = rng.gen_range(1..=max_nodes);
    let labels: Vec<u8> = (0..n).map(|_| rng.gen_range(0..alphabet)).collect();
    let parents: Vec<usize> = (1..n).map(|_| rng.gen_range(0..usize::MAX / 2)).collect();
    tree_from_parents(&labels, &parents)
}

/// Bracketed rendering used as the oracle's canonical form.
pub fn render(t: &ParseTree) -> String {
    if t.children().is_empty() {
        return t.label().to_string();
    }
    let inner: Vec<String> = t.children().iter().map(render).collect();
    format!("[{} {}]", t.label(), inner.join(" "))
}

struct Flat {
    labels: Vec<String>,
    children: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
}

fn flatten(t: &ParseTree) -> Flat {
    let mut f = Flat {
        labels: Vec::new(),
        children: Vec::new(),
        parent: Vec::new(),
    };
    fn go(t: &ParseTree, parent: Option<usize>, f: &mut Flat) -> usize {
        let id = f.labels.len();
        f.labels.push(t.label().to_string());
        f.children.push(Vec::new());
        f.parent.push(parent);
        for c in t.children() {
            let cid = go(c, Some(id), f);
            f.children[id].push(cid);
        }
        id
    }
    go(t, None, &mut f);
    f
}

/// Every complete sub-structure of height `2..=max_height`, by enumerating
/// the sets of expanded internal nodes below each root.
pub fn brute_force_css(tree: &ParseTree, max_height: usize) -> BTreeSet<String> {
    let f = flatten(tree);
    let mut out = BTreeSet::new();
    for root in 0..f.labels.len() {
        if f.children[root].is_empty() {
            continue;
        }
        let mut below = Vec::new();
        let mut stack = f.children[root].clone();
        while let Some(x) = stack.pop() {
            if !f.children[x].is_empty() {
                below.push(x);
            }
            stack.extend(f.children[x].iter().copied());
        }
        for mask in 0u32..(1 << below.len()) {
            let expanded: BTreeSet<usize> = below
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &x)| x)
                .chain([root])
                .collect();
            let closed = expanded
                .iter()
                .all(|&x| x == root || expanded.contains(&f.parent[x].unwrap()));
            if !closed {
                continue;
            }
            fn shape(x: usize, f: &Flat, expanded: &BTreeSet<usize>) -> (String, usize) {
                if !expanded.contains(&x) {
                    return (f.labels[x].clone(), 0);
                }
                let kids: Vec<(String, usize)> = f.children[x]
                    .iter()
                    .map(|&c| shape(c, f, expanded))
                    .collect();
                let h = 1 + kids.iter().map(|k| k.1).max().unwrap_or(0);
                let inner: Vec<String> = kids.into_iter().map(|k| k.0).collect();
                (format!("[{} {}]", f.labels[x], inner.join(" ")), h)
            }
            let (s, h) = shape(root, &f, &expanded);
            if (2..=max_height).contains(&h) {
                out.insert(s);
            }
        }
    }
    out
}

pub fn rendered(set: &BTreeSet<SubStructure>) -> BTreeSet<String> {
    set.iter().map(|s| render(s.shape())).collect()
}

/// Whether `fragment` occurs at some node of `tree`, by direct recursion.
pub fn occurs(tree: &ParseTree, fragment: &ParseTree) -> bool {
    fn at(node: &ParseTree, frag: &ParseTree) -> bool {
        node.label() == frag.label()
            && (frag.children().is_empty()
                || (node.children().len() == frag.children().len()
                    && node
                        .children()
                        .iter()
                        .zip(frag.children())
                        .all(|(n, f)| at(n, f))))
    }
    fn walk(node: &ParseTree, frag: &ParseTree) -> bool {
        at(node, frag) || node.children().iter().any(|c| walk(c, frag))
    }
    !frag_is_leaf(fragment) && walk(tree, fragment)
}

fn frag_is_leaf(t: &ParseTree) -> bool {
    t.children().is_empty()
}

/// A default-sized world: holdout plan, bank and index for one seed.
pub struct World {
    pub grammar: Grammar,
    pub generation: GenerationConfig,
    pub plan: HoldoutPlan,
    pub bank: Vec<Example>,
    pub index: CandidateIndex,
}

impl World {
    pub fn new(seed: u64, bank_size: usize) -> World {
        let lexicon = Lexicon::builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plan = HoldoutPlan::sample(&lexicon, &HoldoutConfig::default(), &mut rng).unwrap();
        let generation = GenerationConfig {
            bank_size,
            seed,
            restrictions: plan.restrictions(),
            ..GenerationConfig::default()
        };
        let bank = generate_bank(&generation, &lexicon, &mut rng).unwrap();
        let index = build_index(&bank).unwrap();
        World {
            grammar: Grammar::new(lexicon),
            generation,
            plan,
            bank,
            index,
        }
    }

    pub fn ctx(&self) -> SuiteContext<'_> {
        SuiteContext {
            grammar: &self.grammar,
            generation: &self.generation,
            plan: &self.plan,
            bank: &self.bank,
            index: &self.index,
        }
    }
}

/// Number of chosen examples that contain their case's aiming combination,
/// found by a direct scan of the bank trees.
pub fn held_out_violations(suite: &Suite, bank: &[Example]) -> usize {
    let by_id: std::collections::HashMap<u32, &Example> = bank.iter().map(|e| (e.id, e)).collect();
    suite
        .cases
        .iter()
        .map(|c| {
            c.example_ids
                .iter()
                .filter(|id| {
                    let e = by_id[id];
                    occurs(&e.source_tree, c.case.aiming_source.shape())
                        || occurs(&e.target_tree, c.case.aiming_target.shape())
                })
                .count()
        })
        .sum()
}

/// Randomized selection problem: a small bank and a test pair drawn from a
/// separate sample, aiming at one of the test's fragments.
pub struct Trial {
    pub bank: Vec<Example>,
    pub test: Example,
    pub aiming_source: SubStructure,
    pub aiming_target: SubStructure,
}

pub fn random_trial(seed: u64) -> Trial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lexicon = Lexicon::builtin();
    let generation = GenerationConfig {
        bank_size: rng.gen_range(20..=200),
        ..GenerationConfig::default()
    };
    let bank = generate_bank(&generation, &lexicon, &mut rng).unwrap();
    let extra = GenerationConfig {
        bank_size: 1,
        ..generation.clone()
    };
    let index = build_index(&bank).unwrap();
    let pick = |t: &ParseTree, rng: &mut ChaCha8Rng| {
        let subs: Vec<SubStructure> = t.one_depth_substructures().into_iter().collect();
        subs[rng.gen_range(0..subs.len())].clone()
    };
    let mut attempt = 0;
    let (test, aiming_source, aiming_target) = loop {
        let test = generate_bank(&extra, &lexicon, &mut rng).unwrap().remove(0);
        let aiming_source = pick(&test.source_tree, &mut rng);
        let aiming_target = pick(&test.target_tree, &mut rng);
        let query = SelectionQuery {
            source_tree: &test.source_tree,
            target_tree: &test.target_tree,
            aiming_source: &aiming_source,
            aiming_target: &aiming_target,
            excluded_source: &[],
            stream: 0,
        };
        attempt += 1;
        if attempt >= 200 || check_coverage(&query, &index).is_ok() {
            break (test, aiming_source, aiming_target);
        }
    };
    Trial {
        bank,
        test,
        aiming_source,
        aiming_target,
    }
}
