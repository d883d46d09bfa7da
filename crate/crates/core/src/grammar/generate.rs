//! Sampling driver over the paired grammar.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::example::Example;
use super::labels::*;
use super::lexicon::{Frame, Lexicon, Verb, DETERMINERS, PREPOSITIONS};
use super::rules::Grammar;
use super::GrammarError;
use crate::tree::ParseTree;

/// Sentence-level N-rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    Intransitive,
    Transitive,
    Ditransitive,
    Passive,
}

impl Template {
    pub const ALL: [Template; 4] = [
        Template::Intransitive,
        Template::Transitive,
        Template::Ditransitive,
        Template::Passive,
    ];

    pub fn frame(self) -> Frame {
        match self {
            Template::Intransitive => Frame::Intransitive,
            Template::Transitive => Frame::Transitive,
            Template::Ditransitive => Frame::Ditransitive,
            Template::Passive => Frame::PassiveCapable,
        }
    }

    /// Surface roles in sentence order, excluding the verb.
    pub fn roles(self) -> &'static [Role] {
        match self {
            Template::Intransitive | Template::Passive => &[Role::Subject],
            Template::Transitive => &[Role::Subject, Role::DirectObject],
            Template::Ditransitive => &[Role::Subject, Role::IndirectObject, Role::DirectObject],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Subject,
    DirectObject,
    IndirectObject,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Subject, Role::DirectObject, Role::IndirectObject];

    pub fn label(self) -> &'static str {
        match self {
            Role::Subject => SUBJECT,
            Role::DirectObject => DIRECT_OBJECT,
            Role::IndirectObject => INDIRECT_OBJECT,
        }
    }
}

/// Noun positions, used for held-out noun placement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NounSlot {
    Role(Role),
    PpHead,
    PpTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateWeights {
    pub intransitive: f64,
    pub transitive: f64,
    pub ditransitive: f64,
    pub passive: f64,
}

impl Default for TemplateWeights {
    fn default() -> Self {
        TemplateWeights {
            intransitive: 1.0,
            transitive: 1.0,
            ditransitive: 1.0,
            passive: 1.0,
        }
    }
}

impl TemplateWeights {
    pub fn get(&self, t: Template) -> f64 {
        match t {
            Template::Intransitive => self.intransitive,
            Template::Transitive => self.transitive,
            Template::Ditransitive => self.ditransitive,
            Template::Passive => self.passive,
        }
    }
}

/// Usage restrictions applied to bank sentences so that held-out
/// combinations never occur there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Restrictions {
    /// Nouns that may only head a plain direct object.
    pub object_only_nouns: BTreeSet<String>,
    /// Verb word -> templates the verb is never used with.
    pub withheld_templates: BTreeMap<String, BTreeSet<Template>>,
    /// Roles that may be modified by a prepositional phrase.
    pub pp_roles: BTreeSet<Role>,
}

impl Default for Restrictions {
    fn default() -> Self {
        Restrictions {
            object_only_nouns: BTreeSet::new(),
            withheld_templates: BTreeMap::new(),
            pp_roles: Role::ALL.into_iter().collect(),
        }
    }
}

impl Restrictions {
    fn noun_allowed(&self, noun: &str, slot: NounSlot) -> bool {
        !self.object_only_nouns.contains(noun) || slot == NounSlot::Role(Role::DirectObject)
    }

    fn verb_allowed(&self, verb: &Verb, template: Template) -> bool {
        verb.has(template.frame())
            && !self
                .withheld_templates
                .get(&verb.word)
                .is_some_and(|w| w.contains(&template))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub max_recursion_bank: usize,
    pub max_recursion_test: usize,
    pub seed: u64,
    pub bank_size: usize,
    pub template_weights: TemplateWeights,
    /// Probability of applying a recursive rule at each opportunity.
    pub recursion_prob: f64,
    /// Accepted range for the bank's mean sentence length in tokens.
    pub source_length_band: [f64; 2],
    pub restrictions: Restrictions,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            max_recursion_bank: 2,
            max_recursion_test: 12,
            seed: 0,
            bank_size: 24_155,
            template_weights: TemplateWeights::default(),
            recursion_prob: 0.2,
            source_length_band: [3.0, 12.0],
            restrictions: Restrictions::default(),
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<(), GrammarError> {
        if self.max_recursion_bank >= self.max_recursion_test {
            return Err(GrammarError::Config(format!(
                "max_recursion_bank ({}) must be below max_recursion_test ({})",
                self.max_recursion_bank, self.max_recursion_test
            )));
        }
        if !(0.0..=1.0).contains(&self.recursion_prob) {
            return Err(GrammarError::Config(
                "recursion_prob must lie in [0, 1]".into(),
            ));
        }
        let weights: Vec<f64> = Template::ALL
            .iter()
            .map(|t| self.template_weights.get(*t))
            .collect();
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().all(|w| *w == 0.0) {
            return Err(GrammarError::Config(
                "template weights must be non-negative and not all zero".into(),
            ));
        }
        Ok(())
    }
}

fn leaf(s: &str) -> ParseTree {
    ParseTree::leaf(s)
}

/// Builds source trees from the lexicon under a set of restrictions.
#[derive(Clone, Copy)]
pub struct Sampler<'a> {
    pub lexicon: &'a Lexicon,
    pub restrictions: &'a Restrictions,
    pub weights: &'a TemplateWeights,
    pub recursion_prob: f64,
}

impl<'a> Sampler<'a> {
    pub fn new(lexicon: &'a Lexicon, config: &'a GenerationConfig) -> Self {
        Sampler {
            lexicon,
            restrictions: &config.restrictions,
            weights: &config.template_weights,
            recursion_prob: config.recursion_prob,
        }
    }

    pub fn verbs_for(&self, template: Template) -> Vec<&'a Verb> {
        self.lexicon
            .verbs
            .iter()
            .filter(|v| self.restrictions.verb_allowed(v, template))
            .collect()
    }

    pub fn embedding_verbs(&self) -> Vec<&'a Verb> {
        self.lexicon
            .verbs
            .iter()
            .filter(|v| v.has(Frame::ClauseEmbedding))
            .collect()
    }

    fn usable_templates(&self) -> Vec<(Template, f64)> {
        Template::ALL
            .into_iter()
            .filter(|t| self.weights.get(*t) > 0.0 && !self.verbs_for(*t).is_empty())
            .map(|t| (t, self.weights.get(t)))
            .collect()
    }

    fn recurse<R: Rng>(&self, rng: &mut R, budget: usize) -> bool {
        budget > 0 && self.recursion_prob > 0.0 && rng.gen_bool(self.recursion_prob)
    }

    fn nouns(&self, slot: NounSlot) -> (Vec<&'a str>, Vec<&'a str>) {
        let keep = |w: &&'a String| self.restrictions.noun_allowed(w, slot);
        (
            self.lexicon
                .common_nouns
                .iter()
                .filter(keep)
                .map(String::as_str)
                .collect(),
            self.lexicon
                .proper_nouns
                .iter()
                .filter(keep)
                .map(String::as_str)
                .collect(),
        )
    }

    /// Uniform over the distinct `det noun` / `Proper` strings allowed in the slot.
    fn base_np<R: Rng>(&self, rng: &mut R, slot: NounSlot) -> Vec<ParseTree> {
        let (common, proper) = self.nouns(slot);
        let total = common.len() * DETERMINERS.len() + proper.len();
        assert!(total > 0, "no noun usable in slot {slot:?}");
        let k = rng.gen_range(0..total);
        if k < proper.len() {
            vec![leaf(proper[k])]
        } else {
            let k = k - proper.len();
            vec![
                leaf(DETERMINERS[k % DETERMINERS.len()]),
                leaf(common[k / DETERMINERS.len()]),
            ]
        }
    }

    /// A role phrase with an optional prepositional chain.
    pub fn role<R: Rng>(&self, rng: &mut R, role: Role, budget: &mut usize) -> ParseTree {
        if self.restrictions.pp_roles.contains(&role) && self.recurse(rng, *budget) {
            ParseTree::node(role.label(), vec![self.pp_chain(rng, budget, None)])
        } else {
            ParseTree::node(role.label(), self.base_np(rng, NounSlot::Role(role)))
        }
    }

    /// A plain role phrase headed by `noun`, with a random determiner when common.
    pub fn role_with_noun<R: Rng>(&self, rng: &mut R, role: Role, noun: &str) -> ParseTree {
        let children = if self.lexicon.is_proper(noun) {
            vec![leaf(noun)]
        } else {
            vec![
                leaf(DETERMINERS[rng.gen_range(0..DETERMINERS.len())]),
                leaf(noun),
            ]
        };
        ParseTree::node(role.label(), children)
    }

    /// A `pp-mod` chain. With `exact = Some(k)` exactly k prepositions are
    /// used and the budget is ignored; otherwise at least one is used and
    /// each further one is sampled while budget remains.
    pub fn pp_chain<R: Rng>(
        &self,
        rng: &mut R,
        budget: &mut usize,
        exact: Option<usize>,
    ) -> ParseTree {
        let mut remaining = exact.unwrap_or(0);
        let mut heads = Vec::new();
        loop {
            let head = self.base_np(rng, NounSlot::PpHead);
            let prep = PREPOSITIONS[rng.gen_range(0..PREPOSITIONS.len())];
            heads.push((head, prep));
            let more = match exact {
                Some(_) => {
                    remaining -= 1;
                    remaining > 0
                }
                None => {
                    *budget = budget.saturating_sub(1);
                    self.recurse(rng, *budget)
                }
            };
            if !more {
                break;
            }
        }
        let mut tail = ParseTree::node(PP_MOD, self.base_np(rng, NounSlot::PpTail));
        for (head, prep) in heads.into_iter().rev() {
            tail = ParseTree::node(
                PP_MOD,
                vec![
                    ParseTree::node(PP_S, head),
                    ParseTree::node(PREP, vec![leaf(prep)]),
                    tail,
                ],
            );
        }
        tail
    }

    pub fn verb_node(verb: &Verb, template: Template) -> ParseTree {
        if template == Template::Passive {
            ParseTree::node(PASSIVE_VERB, vec![leaf(AUX), leaf(&verb.word)])
        } else {
            ParseTree::node(ACTIVE_VERB, vec![leaf(&verb.word)])
        }
    }

    /// Assembles a clause from pre-built role phrases in surface order.
    pub fn assemble(verb: &Verb, template: Template, roles: Vec<ParseTree>) -> ParseTree {
        let mut children = Vec::with_capacity(roles.len() + 1);
        let mut it = roles.into_iter();
        children.push(it.next().expect("subject"));
        children.push(Self::verb_node(verb, template));
        children.extend(it);
        ParseTree::node(SENTENCE, children)
    }

    /// A single clause. `fixed` overrides individual role phrases.
    pub fn clause_with<R: Rng>(
        &self,
        rng: &mut R,
        template: Template,
        verb: &Verb,
        budget: &mut usize,
        fixed: &BTreeMap<Role, ParseTree>,
    ) -> ParseTree {
        let roles = template
            .roles()
            .iter()
            .map(|r| match fixed.get(r) {
                Some(t) => t.clone(),
                None => self.role(rng, *r, budget),
            })
            .collect();
        Self::assemble(verb, template, roles)
    }

    pub fn pick_template<R: Rng>(&self, rng: &mut R) -> Template {
        let usable = self.usable_templates();
        assert!(!usable.is_empty(), "no verb supports any sentence template");
        let total: f64 = usable.iter().map(|(_, w)| w).sum();
        let mut x = rng.gen::<f64>() * total;
        for (t, w) in &usable {
            if x < *w {
                return *t;
            }
            x -= w;
        }
        usable.last().unwrap().0
    }

    pub fn clause<R: Rng>(&self, rng: &mut R, budget: &mut usize) -> ParseTree {
        let template = self.pick_template(rng);
        let verbs = self.verbs_for(template);
        let verb = verbs[rng.gen_range(0..verbs.len())];
        self.clause_with(rng, template, verb, budget, &BTreeMap::new())
    }

    /// `subject embedding-verb` head of a complement chain.
    pub fn embedding_head<R: Rng>(&self, rng: &mut R, budget: &mut usize) -> ParseTree {
        let verbs = self.embedding_verbs();
        let verb = verbs[rng.gen_range(0..verbs.len())];
        let subject = self.role(rng, Role::Subject, budget);
        ParseTree::node(
            SENTENCE,
            vec![subject, Self::verb_node(verb, Template::Intransitive)],
        )
    }

    /// Right-nested `sentence that sentence` over the given heads.
    pub fn chain(heads: Vec<ParseTree>, last: ParseTree) -> ParseTree {
        heads.into_iter().rev().fold(last, |rest, head| {
            ParseTree::node(
                SENTENCE,
                vec![head, ParseTree::node(CONJ, vec![leaf(THAT)]), rest],
            )
        })
    }

    pub fn sentence<R: Rng>(&self, rng: &mut R, budget: &mut usize) -> ParseTree {
        if !self.embedding_verbs().is_empty() && self.recurse(rng, *budget) {
            *budget -= 1;
            let head = self.embedding_head(rng, budget);
            let rest = self.sentence(rng, budget);
            return Self::chain(vec![head], rest);
        }
        self.clause(rng, budget)
    }
}

/// Samples one bank-style example (id 0).
pub fn generate_example<R: Rng>(
    config: &GenerationConfig,
    lexicon: &Lexicon,
    rng: &mut R,
) -> Result<Example, GrammarError> {
    config.validate()?;
    let grammar = Grammar::new(lexicon.clone());
    sample_example(&grammar, config, rng, 0)
}

fn sample_example<R: Rng>(
    grammar: &Grammar,
    config: &GenerationConfig,
    rng: &mut R,
    id: u32,
) -> Result<Example, GrammarError> {
    let sampler = Sampler::new(&grammar.lexicon, config);
    let mut budget = config.max_recursion_bank;
    let tree = sampler.sentence(rng, &mut budget);
    Example::from_source_tree(id, tree, grammar)
}

/// Samples `bank_size` examples with distinct sentences.
pub fn generate_bank<R: Rng>(
    config: &GenerationConfig,
    lexicon: &Lexicon,
    rng: &mut R,
) -> Result<Vec<Example>, GrammarError> {
    config.validate()?;
    if config.bank_size == 0 {
        return Err(GrammarError::Config("bank_size must be at least 1".into()));
    }
    let achievable = bank_capacity(config, lexicon);
    if achievable < config.bank_size as u128 {
        return Err(GrammarError::Capacity {
            requested: config.bank_size,
            achievable,
        });
    }
    let grammar = Grammar::new(lexicon.clone());
    let mut seen: HashSet<String> = HashSet::with_capacity(config.bank_size);
    let mut bank = Vec::with_capacity(config.bank_size);
    let max_attempts = 200 * config.bank_size + 100_000;
    let mut attempts = 0;
    while bank.len() < config.bank_size {
        attempts += 1;
        if attempts > max_attempts {
            return Err(GrammarError::Capacity {
                requested: config.bank_size,
                achievable: bank.len() as u128,
            });
        }
        let ex = sample_example(&grammar, config, rng, bank.len() as u32)?;
        if seen.insert(ex.source.clone()) {
            bank.push(ex);
        }
    }
    Ok(bank)
}

/// Number of distinct bank sentences the sampler can produce.
pub fn bank_capacity(config: &GenerationConfig, lexicon: &Lexicon) -> u128 {
    let sampler = Sampler::new(lexicon, config);
    let max_r = if config.recursion_prob > 0.0 {
        config.max_recursion_bank
    } else {
        0
    };
    let base = |slot: NounSlot| -> u128 {
        let (c, p) = sampler.nouns(slot);
        (c.len() * DETERMINERS.len() + p.len()) as u128
    };
    let pp_head = base(NounSlot::PpHead);
    let pp_tail = base(NounSlot::PpTail);
    let preps = PREPOSITIONS.len() as u128;

    // role -> count of distinct phrases using exactly r recursions
    let role_counts = |role: Role| -> Vec<u128> {
        let mut v = vec![0u128; max_r + 1];
        v[0] = base(NounSlot::Role(role));
        if config.restrictions.pp_roles.contains(&role) {
            for (r, slot) in v.iter_mut().enumerate().skip(1) {
                let mut c = pp_tail;
                for _ in 0..r {
                    c = c.saturating_mul(pp_head).saturating_mul(preps);
                }
                *slot = c;
            }
        }
        v
    };
    let convolve = |a: &[u128], b: &[u128]| -> Vec<u128> {
        let mut out = vec![0u128; max_r + 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if i + j <= max_r {
                    out[i + j] = out[i + j].saturating_add(x.saturating_mul(*y));
                }
            }
        }
        out
    };

    let mut simple = vec![0u128; max_r + 1];
    for (template, _) in sampler.usable_templates() {
        let n_verbs = sampler.verbs_for(template).len() as u128;
        let mut acc = {
            let mut unit = vec![0u128; max_r + 1];
            unit[0] = 1;
            unit
        };
        for role in template.roles() {
            acc = convolve(&acc, &role_counts(*role));
        }
        for (s, a) in simple.iter_mut().zip(acc) {
            *s = s.saturating_add(a.saturating_mul(n_verbs));
        }
    }

    let n_embed = sampler.embedding_verbs().len() as u128;
    let subject = role_counts(Role::Subject);
    let mut sentence = vec![0u128; max_r + 1];
    for r in 0..=max_r {
        let mut total = simple[r];
        if r >= 1 && n_embed > 0 {
            for r1 in 0..r {
                let heads = subject[r1].saturating_mul(n_embed);
                total = total.saturating_add(heads.saturating_mul(sentence[r - 1 - r1]));
            }
        }
        sentence[r] = total;
    }
    sentence.iter().fold(0u128, |a, b| a.saturating_add(*b))
}
