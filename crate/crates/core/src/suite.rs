//! Held-out test categories, suite construction and suite statistics.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::labels::*;
use crate::grammar::{
    Example, Frame, GenerationConfig, Grammar, GrammarError, Lexicon, Restrictions, Role, Sampler,
    Template,
};
use crate::scoring::TreeFeatures;
use crate::selector::{
    check_coverage, select, CandidateIndex, ChosenExample, Preset, SelectionConfig, SelectionError,
    SelectionQuery,
};
use crate::tree::{ParseTree, SubStructure};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("{category}: could only build {built} of {requested} distinct cases")]
    Capacity {
        category: Category,
        requested: usize,
        built: usize,
    },
    #[error("selection failed for case {case_id}")]
    Selection {
        case_id: u32,
        #[source]
        source: SelectionError,
    },
    #[error(transparent)]
    Grammar(#[from] GrammarError),
    #[error("invalid holdout plan: {0}")]
    Plan(String),
    #[error("could not find a fresh fictional word for {0:?}")]
    WordMap(String),
    #[error(transparent)]
    Config(#[from] SelectionError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    PrimSubs,
    PrimAlte,
    PhraReco,
    LongChain,
    DeepNest,
}

impl Category {
    pub const ALL: [Category; 5] = [
        Category::PrimSubs,
        Category::PrimAlte,
        Category::PhraReco,
        Category::LongChain,
        Category::DeepNest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::PrimSubs => "PrimSubs",
            Category::PrimAlte => "PrimAlte",
            Category::PhraReco => "PhraReco",
            Category::LongChain => "LongChain",
            Category::DeepNest => "DeepNest",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown category {s:?}"))
    }
}

/// Held-out combinations baked into the bank at generation time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoldoutPlan {
    /// Nouns the bank only shows as plain direct objects.
    pub subject_nouns: BTreeSet<String>,
    /// Verb -> sentence templates the bank never pairs it with.
    pub alternations: BTreeMap<String, BTreeSet<Template>>,
    /// Roles the bank lets prepositional phrases modify.
    pub pp_roles: BTreeSet<Role>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoldoutConfig {
    pub subject_nouns: usize,
    pub alternation_verbs: usize,
}

impl Default for HoldoutConfig {
    fn default() -> Self {
        HoldoutConfig {
            subject_nouns: 6,
            alternation_verbs: 6,
        }
    }
}

impl HoldoutPlan {
    /// Samples held-out nouns and verb alternations from the lexicon.
    pub fn sample<R: Rng>(
        lexicon: &Lexicon,
        config: &HoldoutConfig,
        rng: &mut R,
    ) -> Result<HoldoutPlan, SuiteError> {
        if config.subject_nouns >= lexicon.common_nouns.len() {
            return Err(SuiteError::Plan(format!(
                "cannot hold out {} of {} common nouns",
                config.subject_nouns,
                lexicon.common_nouns.len()
            )));
        }
        let subject_nouns = lexicon
            .common_nouns
            .choose_multiple(rng, config.subject_nouns)
            .cloned()
            .collect();

        let alternating: Vec<_> = lexicon
            .verbs
            .iter()
            .filter(|v| !v.has(Frame::ClauseEmbedding))
            .filter(|v| Template::ALL.iter().filter(|t| v.has(t.frame())).count() >= 2)
            .collect();
        if config.alternation_verbs > alternating.len() {
            return Err(SuiteError::Plan(format!(
                "only {} verbs support two sentence templates, {} requested",
                alternating.len(),
                config.alternation_verbs
            )));
        }
        let mut alternations = BTreeMap::new();
        for verb in alternating.choose_multiple(rng, config.alternation_verbs) {
            let templates: Vec<Template> = Template::ALL
                .into_iter()
                .filter(|t| verb.has(t.frame()))
                .collect();
            let withheld = *templates.choose(rng).expect("two templates");
            alternations.insert(verb.word.clone(), BTreeSet::from([withheld]));
        }
        let plan = HoldoutPlan {
            subject_nouns,
            alternations,
            pp_roles: BTreeSet::from([Role::DirectObject]),
        };
        plan.check(lexicon)?;
        Ok(plan)
    }

    /// Every sentence template must keep at least one verb in the bank.
    pub fn check(&self, lexicon: &Lexicon) -> Result<(), SuiteError> {
        let restrictions = self.restrictions();
        let weights = Default::default();
        let sampler = Sampler {
            lexicon,
            restrictions: &restrictions,
            weights: &weights,
            recursion_prob: 0.0,
        };
        for t in Template::ALL {
            let supported = lexicon.verbs.iter().any(|v| v.has(t.frame()));
            if supported && sampler.verbs_for(t).is_empty() {
                return Err(SuiteError::Plan(format!(
                    "no verb left for the {t:?} template"
                )));
            }
        }
        Ok(())
    }

    pub fn restrictions(&self) -> Restrictions {
        Restrictions {
            object_only_nouns: self.subject_nouns.clone(),
            withheld_templates: self.alternations.clone(),
            pp_roles: self.pp_roles.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CategoryCounts {
    pub prim_subs: usize,
    pub prim_alte: usize,
    pub phra_reco: usize,
    pub long_chain: usize,
    pub deep_nest: usize,
}

impl Default for CategoryCounts {
    fn default() -> Self {
        CategoryCounts {
            prim_subs: 1100,
            prim_alte: 700,
            phra_reco: 1000,
            long_chain: 1000,
            deep_nest: 985,
        }
    }
}

impl CategoryCounts {
    pub fn get(&self, c: Category) -> usize {
        match c {
            Category::PrimSubs => self.prim_subs,
            Category::PrimAlte => self.prim_alte,
            Category::PhraReco => self.phra_reco,
            Category::LongChain => self.long_chain,
            Category::DeepNest => self.deep_nest,
        }
    }

    pub fn only(c: Category, count: usize) -> Self {
        let mut counts = CategoryCounts {
            prim_subs: 0,
            prim_alte: 0,
            phra_reco: 0,
            long_chain: 0,
            deep_nest: 0,
        };
        match c {
            Category::PrimSubs => counts.prim_subs = count,
            Category::PrimAlte => counts.prim_alte = count,
            Category::PhraReco => counts.phra_reco = count,
            Category::LongChain => counts.long_chain = count,
            Category::DeepNest => counts.deep_nest = count,
        }
        counts
    }

    pub fn total(&self) -> usize {
        Category::ALL.iter().map(|c| self.get(*c)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub counts: CategoryCounts,
    pub preset: Preset,
    pub n: usize,
    pub fictional_words: bool,
    pub nl_exclusion: bool,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            counts: CategoryCounts::default(),
            preset: Preset::FullSimilarity,
            n: 10,
            fictional_words: false,
            nl_exclusion: false,
            seed: 0,
        }
    }
}

impl SuiteConfig {
    pub fn selection(&self) -> SelectionConfig {
        SelectionConfig::preset(self.preset, self.seed).with_n(self.n)
    }
}

/// A test expression with the combination it holds out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub case_id: u32,
    pub category: Category,
    pub source: String,
    pub target: String,
    pub source_tree: ParseTree,
    pub target_tree: ParseTree,
    pub aiming_source: SubStructure,
    pub aiming_target: SubStructure,
    pub depth: usize,
}

impl TestCase {
    pub fn query<'a>(&'a self, excluded_source: &'a [SubStructure]) -> SelectionQuery<'a> {
        SelectionQuery {
            source_tree: &self.source_tree,
            target_tree: &self.target_tree,
            aiming_source: &self.aiming_source,
            aiming_target: &self.aiming_target,
            excluded_source,
            stream: self.case_id as u64,
        }
    }

    /// One-depth fragments of the test sentence rooted in `sentence`.
    pub fn sentence_rules(&self) -> Vec<SubStructure> {
        self.source_tree
            .one_depth_substructures()
            .into_iter()
            .filter(|s| s.shape().label() == SENTENCE)
            .collect()
    }
}

/// Per-case coverage by the chosen examples and prompt lengths.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseStats {
    pub t_l: f64,
    pub t_n: f64,
    pub t_s1: f64,
    pub t_s_gt1: f64,
    /// Coverage of the union of one-depth and composed sub-structures.
    pub t_s: f64,
    pub context_len: usize,
    pub input_len: usize,
    pub output_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteCase {
    #[serde(flatten)]
    pub case: TestCase,
    pub preset: Preset,
    pub example_ids: Vec<u32>,
    pub selection: Vec<ChosenExample>,
    pub stats: CaseStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub config: SuiteConfig,
    pub cases: Vec<SuiteCase>,
    /// Original -> fictional target word, when the transform was applied.
    pub word_map: Option<BTreeMap<String, String>>,
}

/// Everything a suite build reads.
pub struct SuiteContext<'a> {
    pub grammar: &'a Grammar,
    pub generation: &'a GenerationConfig,
    pub plan: &'a HoldoutPlan,
    pub bank: &'a [Example],
    pub index: &'a CandidateIndex,
}

fn label_only(node: &ParseTree) -> ParseTree {
    ParseTree::leaf(node.label())
}

/// `node` with its children as labels, expanding the child at `expand`.
fn glue(node: &ParseTree, expand: usize) -> ParseTree {
    let children = node
        .children()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == expand {
                c.truncated(1)
            } else {
                label_only(c)
            }
        })
        .collect();
    ParseTree::node(node.label(), children)
}

/// Height-`levels` fragment following the child at `child` downwards.
fn spine(node: &ParseTree, child: usize, levels: usize) -> ParseTree {
    let children = node
        .children()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            if i == child && levels > 1 && !c.is_leaf() {
                spine(c, child, levels - 1)
            } else {
                label_only(c)
            }
        })
        .collect();
    ParseTree::node(node.label(), children)
}

fn find<'t>(tree: &'t ParseTree, label: &str) -> Option<&'t ParseTree> {
    tree.nodes().find(|n| n.label() == label)
}

/// Height of the aiming chain for the recursive categories: one level
/// beyond what the bank can contain.
fn chain_aim_height(generation: &GenerationConfig) -> usize {
    generation.max_recursion_bank + 1
}

struct Draft {
    source_tree: ParseTree,
    aiming_source: ParseTree,
    aiming_target: fn(&ParseTree, usize) -> Option<ParseTree>,
    levels: usize,
}

fn pick_template<R: Rng>(sampler: &Sampler, rng: &mut R, allowed: &[Template]) -> Option<Template> {
    let usable: Vec<Template> = allowed
        .iter()
        .copied()
        .filter(|t| sampler.weights.get(*t) > 0.0 && !sampler.verbs_for(*t).is_empty())
        .collect();
    let total: f64 = usable.iter().map(|t| sampler.weights.get(*t)).sum();
    if usable.is_empty() || total <= 0.0 {
        return None;
    }
    let mut x = rng.gen::<f64>() * total;
    for t in &usable {
        let w = sampler.weights.get(*t);
        if x < w {
            return Some(*t);
        }
        x -= w;
    }
    usable.last().copied()
}

const ACTIVE: [Template; 3] = [
    Template::Intransitive,
    Template::Transitive,
    Template::Ditransitive,
];
const WITH_OBJECT: [Template; 2] = [Template::Transitive, Template::Ditransitive];

fn draft<R: Rng>(
    category: Category,
    ctx: &SuiteContext,
    restrictions: &Restrictions,
    rng: &mut R,
    forced_k: Option<usize>,
) -> Option<Draft> {
    let lexicon = &ctx.grammar.lexicon;
    let g = ctx.generation;
    let sampler = Sampler {
        lexicon,
        restrictions,
        weights: &g.template_weights,
        recursion_prob: g.recursion_prob,
    };
    let bank_budget = g.max_recursion_bank;
    let recursion_k = |rng: &mut R| {
        forced_k.unwrap_or_else(|| rng.gen_range(bank_budget + 1..=g.max_recursion_test))
    };
    match category {
        Category::PrimSubs => {
            let nouns: Vec<&String> = ctx.plan.subject_nouns.iter().collect();
            let noun = *nouns.choose(rng)?;
            let template = pick_template(&sampler, rng, &ACTIVE)?;
            let verb = *sampler.verbs_for(template).choose(rng)?;
            let subject = sampler.role_with_noun(rng, Role::Subject, noun);
            let aiming_source = subject.truncated(1);
            let mut budget = bank_budget;
            let fixed = BTreeMap::from([(Role::Subject, subject)]);
            let tree = sampler.clause_with(rng, template, verb, &mut budget, &fixed);
            Some(Draft {
                source_tree: tree,
                aiming_source,
                aiming_target: |t, _| find(t, AGENT).map(|n| n.truncated(1)),
                levels: 1,
            })
        }
        Category::PrimAlte => {
            let pairs: Vec<(&String, &Template)> = ctx
                .plan
                .alternations
                .iter()
                .flat_map(|(v, ts)| ts.iter().map(move |t| (v, t)))
                .collect();
            let (word, template) = *pairs.choose(rng)?;
            let verb = lexicon.verb(word)?;
            let mut budget = bank_budget;
            let tree = sampler.clause_with(rng, *template, verb, &mut budget, &BTreeMap::new());
            let aiming_source = glue(&tree, 1);
            Some(Draft {
                source_tree: tree,
                aiming_source,
                aiming_target: |t, _| Some(glue(t, 0)),
                levels: 2,
            })
        }
        Category::PhraReco => {
            let template = pick_template(&sampler, rng, &ACTIVE)?;
            let verb = *sampler.verbs_for(template).choose(rng)?;
            let k = rng.gen_range(1..=bank_budget.max(1));
            let mut budget = bank_budget.saturating_sub(k);
            let subject =
                ParseTree::node(SUBJECT, vec![sampler.pp_chain(rng, &mut budget, Some(k))]);
            let aiming_source = subject.truncated(1);
            let fixed = BTreeMap::from([(Role::Subject, subject)]);
            let tree = sampler.clause_with(rng, template, verb, &mut budget, &fixed);
            Some(Draft {
                source_tree: tree,
                aiming_source,
                aiming_target: |t, _| find(t, AGENT).map(|n| n.truncated(1)),
                levels: 1,
            })
        }
        Category::LongChain => {
            let k = recursion_k(rng);
            let mut budget = 0;
            let heads = (0..k)
                .map(|_| sampler.embedding_head(rng, &mut budget))
                .collect();
            let last = sampler.clause(rng, &mut budget);
            let tree = Sampler::chain(heads, last);
            let levels = chain_aim_height(g);
            let aiming_source = spine(&tree, 2, levels);
            Some(Draft {
                source_tree: tree,
                aiming_source,
                aiming_target: |t, levels| Some(spine(t, 2, levels)),
                levels,
            })
        }
        Category::DeepNest => {
            let k = recursion_k(rng);
            let template = pick_template(&sampler, rng, &WITH_OBJECT)?;
            let verb = *sampler.verbs_for(template).choose(rng)?;
            let mut budget = 0;
            let object = ParseTree::node(
                DIRECT_OBJECT,
                vec![sampler.pp_chain(rng, &mut budget, Some(k))],
            );
            let levels = chain_aim_height(g);
            let aiming_source = spine(&object.children()[0], 2, levels);
            let fixed = BTreeMap::from([(Role::DirectObject, object)]);
            let tree = sampler.clause_with(rng, template, verb, &mut budget, &fixed);
            Some(Draft {
                source_tree: tree,
                aiming_source,
                aiming_target: |t, levels| {
                    let theme = find(t, THEME)?;
                    Some(spine(theme.children().first()?, 4, levels))
                },
                levels,
            })
        }
    }
}

fn category_rng(seed: u64, category: Category) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + category as u64);
    rng
}

/// Builds `count` distinct cases of one category whose primitives are all
/// available in admissible bank examples. Case ids start at `first_id`.
pub fn build_category<R: Rng>(
    category: Category,
    count: usize,
    ctx: &SuiteContext,
    first_id: u32,
    rng: &mut R,
) -> Result<Vec<TestCase>, SuiteError> {
    let restrictions = ctx.plan.restrictions();
    let mut seen = HashSet::new();
    let mut cases = Vec::with_capacity(count);
    let max_attempts = 1000 * count + 10_000;
    let recursive = matches!(category, Category::LongChain | Category::DeepNest);
    for _ in 0..max_attempts {
        if cases.len() == count {
            break;
        }
        let forced = (recursive && cases.is_empty()).then_some(ctx.generation.max_recursion_test);
        let Some(d) = draft(category, ctx, &restrictions, rng, forced) else {
            break;
        };
        let source = d.source_tree.text();
        if seen.contains(&source) {
            continue;
        }
        let target_tree = ctx.grammar.derive_target(&d.source_tree)?;
        let Some(aim_t) = (d.aiming_target)(&target_tree, d.levels) else {
            continue;
        };
        let case = TestCase {
            case_id: first_id + cases.len() as u32,
            category,
            target: target_tree.text(),
            source,
            depth: d.source_tree.depth(),
            source_tree: d.source_tree,
            target_tree,
            aiming_source: SubStructure::new(d.aiming_source),
            aiming_target: SubStructure::new(aim_t),
        };
        if check_coverage(&case.query(&[]), ctx.index).is_err() {
            continue;
        }
        seen.insert(case.source.clone());
        cases.push(case);
    }
    if cases.len() < count {
        return Err(SuiteError::Capacity {
            category,
            requested: count,
            built: cases.len(),
        });
    }
    Ok(cases)
}

/// Builds every category, selects in-context examples for each case and
/// records per-case statistics.
pub fn build_suite(ctx: &SuiteContext, config: &SuiteConfig) -> Result<Suite, SuiteError> {
    let selection = config.selection();
    selection.validate()?;
    selection.check_dominance(ctx.index)?;

    let mut first_ids = Vec::new();
    let mut next = 0u32;
    for c in Category::ALL {
        first_ids.push(next);
        next += config.counts.get(c) as u32;
    }
    let per_category: Vec<Vec<TestCase>> = Category::ALL
        .par_iter()
        .zip(first_ids.par_iter())
        .map(|(&c, &first)| {
            let mut rng = category_rng(config.seed, c);
            build_category(c, config.counts.get(c), ctx, first, &mut rng)
        })
        .collect::<Result<_, _>>()?;
    let cases: Vec<TestCase> = per_category.into_iter().flatten().collect();

    let by_id = bank_lookup(ctx.bank);
    let built: Vec<Option<SuiteCase>> = cases
        .into_par_iter()
        .map(|case| {
            let excluded = if config.nl_exclusion {
                case.sentence_rules()
            } else {
                Vec::new()
            };
            let result = match select(&case.query(&excluded), ctx.index, &selection) {
                Ok(r) => r,
                Err(SelectionError::Coverage { .. } | SelectionError::Exhausted { .. })
                    if config.nl_exclusion =>
                {
                    return Ok(None)
                }
                Err(e) => {
                    return Err(SuiteError::Selection {
                        case_id: case.case_id,
                        source: e,
                    })
                }
            };
            let example_ids = result.ids();
            let examples: Vec<&Example> = example_ids.iter().map(|id| by_id[id]).collect();
            let stats = case_stats(&case, &examples);
            Ok(Some(SuiteCase {
                case,
                preset: config.preset,
                example_ids,
                selection: result.chosen,
                stats,
            }))
        })
        .collect::<Result<_, SuiteError>>()?;

    let suite = Suite {
        config: config.clone(),
        cases: built.into_iter().flatten().collect(),
        word_map: None,
    };
    if config.fictional_words {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(0xF1C7);
        return apply_fictional_words(&suite, ctx.bank, &mut rng);
    }
    Ok(suite)
}

pub fn bank_lookup(bank: &[Example]) -> HashMap<u32, &Example> {
    bank.iter().map(|e| (e.id, e)).collect()
}

fn fraction<T: Ord>(want: &BTreeSet<T>, have: &BTreeSet<T>) -> (usize, usize) {
    (want.intersection(have).count(), want.len())
}

fn ratio((hit, total): (usize, usize)) -> f64 {
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

fn add((a, b): (usize, usize), (c, d): (usize, usize)) -> (usize, usize) {
    (a + c, b + d)
}

/// Coverage of the test case by its examples, per notation family, both
/// sides pooled.
pub fn case_stats(case: &TestCase, examples: &[&Example]) -> CaseStats {
    let test_s = TreeFeatures::of(&case.source_tree).with_fragment(&case.aiming_source);
    let test_t = TreeFeatures::of(&case.target_tree).with_fragment(&case.aiming_target);
    let mut leaves = (BTreeSet::new(), BTreeSet::new());
    let mut internal = (BTreeSet::new(), BTreeSet::new());
    let mut structures = (BTreeSet::new(), BTreeSet::new());
    for e in examples {
        leaves.0.extend(e.source_tree.leaves());
        leaves.1.extend(e.target_tree.leaves());
        internal.0.extend(e.source_tree.internal_labels());
        internal.1.extend(e.target_tree.internal_labels());
        structures.0.extend(e.source_tree.structure_set());
        structures.1.extend(e.target_tree.structure_set());
    }
    let t_l = add(
        fraction(&case.source_tree.leaves(), &leaves.0),
        fraction(&case.target_tree.leaves(), &leaves.1),
    );
    let t_n = add(
        fraction(&case.source_tree.internal_labels(), &internal.0),
        fraction(&case.target_tree.internal_labels(), &internal.1),
    );
    let t_s1 = add(
        fraction(&test_s.one_depth, &structures.0),
        fraction(&test_t.one_depth, &structures.1),
    );
    let t_s_gt1 = add(
        fraction(&test_s.composed, &structures.0),
        fraction(&test_t.composed, &structures.1),
    );
    CaseStats {
        t_l: ratio(t_l),
        t_n: ratio(t_n),
        t_s1: ratio(t_s1),
        t_s_gt1: ratio(t_s_gt1),
        t_s: ratio(add(t_s1, t_s_gt1)),
        context_len: examples
            .iter()
            .map(|e| e.source_len() + e.target_len())
            .sum(),
        input_len: case.source.split_whitespace().count(),
        output_len: case.target.split_whitespace().count(),
    }
}

/// One row of the statistics table; `category` is `None` for the overall row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub category: Option<Category>,
    pub cases: usize,
    pub t_l: f64,
    pub t_n: f64,
    pub t_s1: f64,
    pub t_s_gt1: f64,
    pub context_len: f64,
    pub input_len: f64,
    pub output_len: f64,
}

impl StatRow {
    fn mean<'a>(category: Option<Category>, stats: impl Iterator<Item = &'a CaseStats>) -> StatRow {
        let stats: Vec<&CaseStats> = stats.collect();
        let n = stats.len();
        let avg = |f: &dyn Fn(&CaseStats) -> f64| {
            if n == 0 {
                0.0
            } else {
                stats.iter().map(|s| f(s)).sum::<f64>() / n as f64
            }
        };
        StatRow {
            category,
            cases: n,
            t_l: avg(&|s| s.t_l),
            t_n: avg(&|s| s.t_n),
            t_s1: avg(&|s| s.t_s1),
            t_s_gt1: avg(&|s| s.t_s_gt1),
            context_len: avg(&|s| s.context_len as f64),
            input_len: avg(&|s| s.input_len as f64),
            output_len: avg(&|s| s.output_len as f64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteStatistics {
    pub rows: Vec<StatRow>,
}

impl SuiteStatistics {
    /// Aggregates the per-case statistics stored in the suite.
    pub fn of(suite: &Suite) -> SuiteStatistics {
        let mut rows: Vec<StatRow> = Category::ALL
            .iter()
            .filter(|c| suite.cases.iter().any(|s| s.case.category == **c))
            .map(|&c| {
                StatRow::mean(
                    Some(c),
                    suite
                        .cases
                        .iter()
                        .filter(|s| s.case.category == c)
                        .map(|s| &s.stats),
                )
            })
            .collect();
        rows.push(StatRow::mean(None, suite.cases.iter().map(|s| &s.stats)));
        SuiteStatistics { rows }
    }

    pub fn row(&self, category: Option<Category>) -> Option<&StatRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(
            "category\tcases\tT_L\tT_N\tT_S1\tT_S>1\tcontext_len\tinput_len\toutput_len\n",
        );
        for r in &self.rows {
            let name = r.category.map_or("Overall", |c| c.name());
            let _ = writeln!(
                out,
                "{name}\t{}\t{:.1}%\t{:.1}%\t{:.1}%\t{:.1}%\t{:.1}\t{:.1}\t{:.1}",
                r.cases,
                100.0 * r.t_l,
                100.0 * r.t_n,
                100.0 * r.t_s1,
                100.0 * r.t_s_gt1,
                r.context_len,
                r.input_len,
                r.output_len
            );
        }
        out
    }
}

/// Recomputes every case's statistics from the bank trees and aggregates.
pub fn compute_statistics(suite: &Suite, bank: &[Example]) -> SuiteStatistics {
    let by_id = bank_lookup(bank);
    let cases: Vec<SuiteCase> = suite
        .cases
        .par_iter()
        .map(|s| {
            let examples: Vec<&Example> = s
                .example_ids
                .iter()
                .filter_map(|id| by_id.get(id).copied())
                .collect();
            let mut s = s.clone();
            let original = match &suite.word_map {
                Some(map) => rename_case(&s.case, &invert(map)),
                None => s.case.clone(),
            };
            s.stats = case_stats(&original, &examples);
            s
        })
        .collect();
    SuiteStatistics::of(&Suite {
        config: suite.config.clone(),
        cases,
        word_map: None,
    })
}

fn is_content_token(t: &str) -> bool {
    !STRUCTURAL_TARGET_TOKENS.contains(&t)
}

fn rename_tree(tree: &ParseTree, map: &BTreeMap<String, String>) -> ParseTree {
    if tree.is_leaf() {
        return ParseTree::leaf(map.get(tree.label()).map_or(tree.label(), String::as_str));
    }
    ParseTree::node(
        tree.label(),
        tree.children()
            .iter()
            .map(|c| rename_tree(c, map))
            .collect(),
    )
}

/// Replaces target-side words token by token.
pub fn rename_target(text: &str, map: &BTreeMap<String, String>) -> String {
    text.split_whitespace()
        .map(|t| map.get(t).map_or(t, String::as_str))
        .collect::<Vec<_>>()
        .join(" ")
}

fn rename_case(case: &TestCase, map: &BTreeMap<String, String>) -> TestCase {
    TestCase {
        target: rename_target(&case.target, map),
        target_tree: rename_tree(&case.target_tree, map),
        aiming_target: SubStructure::new(rename_tree(case.aiming_target.shape(), map)),
        ..case.clone()
    }
}

pub fn invert(map: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    map.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
}

/// Maps every target content word of the suite and its examples to a
/// random uppercase word of the same length.
pub fn apply_fictional_words<R: Rng>(
    suite: &Suite,
    bank: &[Example],
    rng: &mut R,
) -> Result<Suite, SuiteError> {
    let by_id = bank_lookup(bank);
    let mut words = BTreeSet::new();
    for s in &suite.cases {
        words.extend(
            s.case
                .target
                .split_whitespace()
                .filter(|t| is_content_token(t))
                .map(String::from),
        );
        for id in &s.example_ids {
            if let Some(e) = by_id.get(id) {
                words.extend(
                    e.target
                        .split_whitespace()
                        .filter(|t| is_content_token(t))
                        .map(String::from),
                );
            }
        }
    }
    let mut taken: HashSet<String> = words.iter().cloned().collect();
    taken.extend(STRUCTURAL_TARGET_TOKENS.iter().map(|t| t.to_string()));
    let mut map = BTreeMap::new();
    for w in &words {
        let mut image = None;
        for _ in 0..1000 {
            let candidate: String = (0..w.chars().count())
                .map(|_| rng.gen_range(b'A'..=b'Z') as char)
                .collect();
            if taken.insert(candidate.clone()) {
                image = Some(candidate);
                break;
            }
        }
        map.insert(
            w.clone(),
            image.ok_or_else(|| SuiteError::WordMap(w.clone()))?,
        );
    }
    Ok(Suite {
        config: suite.config.clone(),
        cases: suite
            .cases
            .iter()
            .map(|s| SuiteCase {
                case: rename_case(&s.case, &map),
                ..s.clone()
            })
            .collect(),
        word_map: Some(map),
    })
}

/// Undoes [`apply_fictional_words`].
pub fn remove_fictional_words(suite: &Suite) -> Suite {
    let Some(map) = &suite.word_map else {
        return suite.clone();
    };
    let inverse = invert(map);
    Suite {
        config: suite.config.clone(),
        cases: suite
            .cases
            .iter()
            .map(|s| SuiteCase {
                case: rename_case(&s.case, &inverse),
                ..s.clone()
            })
            .collect(),
        word_map: None,
    }
}
