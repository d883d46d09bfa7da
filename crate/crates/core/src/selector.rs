//! Greedy in-context example selection over an inverted index of the bank,
//! with held-out filtering and an exhaustive reference implementation.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::Example;
use crate::scoring::{
    rank_score, CoverageState, MatchFlags, PairFeatures, Score, ScoreBreakdown, ScoringError,
    TreeFeatures, Weights,
};
use crate::tree::{ParseTree, SubStructure};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SelectionError {
    #[error("the example bank is empty")]
    EmptyBank,
    #[error("primitive {primitive:?} occurs in no admissible example")]
    Coverage { primitive: String },
    #[error("no admissible example left at step {step}")]
    Exhausted { step: usize },
    #[error("invalid selection config: {0}")]
    Config(String),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// The selection regimes of the experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PrimitiveOnly,
    FullSimilarity,
    RoughSimilarity,
    HighDiversity,
    LowComplexity,
    HighComplexity,
    SourceExcluded,
    TargetExcluded,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::PrimitiveOnly,
        Preset::FullSimilarity,
        Preset::RoughSimilarity,
        Preset::HighDiversity,
        Preset::LowComplexity,
        Preset::HighComplexity,
        Preset::SourceExcluded,
        Preset::TargetExcluded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PrimitiveOnly => "primitive-only",
            Preset::FullSimilarity => "full-similarity",
            Preset::RoughSimilarity => "rough-similarity",
            Preset::HighDiversity => "high-diversity",
            Preset::LowComplexity => "low-complexity",
            Preset::HighComplexity => "high-complexity",
            Preset::SourceExcluded => "source-excluded",
            Preset::TargetExcluded => "target-excluded",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = SelectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| SelectionError::Config(format!("unknown preset {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    LowestId,
    SeededRandom(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub preset: Option<Preset>,
    pub weights: Weights,
    pub n: usize,
    pub flags: MatchFlags,
    pub tie_break: TieBreak,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig::preset(Preset::FullSimilarity, 0)
    }
}

impl SelectionConfig {
    /// The configuration of a named regime. `seed` only matters for
    /// regimes that break ties at random.
    pub fn preset(preset: Preset, seed: u64) -> Self {
        let full = MatchFlags::default();
        let (weights, flags, tie_break) = match preset {
            Preset::PrimitiveOnly => (
                Weights::new(100.0, 0.0, 0.0),
                full,
                TieBreak::SeededRandom(seed),
            ),
            Preset::FullSimilarity => (Weights::new(100.0, 1.0, 0.0), full, TieBreak::LowestId),
            Preset::RoughSimilarity => (
                Weights::new(100.0, 1.0, 0.0),
                MatchFlags {
                    rough_only: true,
                    ..full
                },
                TieBreak::LowestId,
            ),
            Preset::HighDiversity => (
                Weights::new(100.0, 1.0, 0.0),
                MatchFlags {
                    diversity: true,
                    ..full
                },
                TieBreak::LowestId,
            ),
            Preset::LowComplexity => (Weights::new(100.0, 1.0, 0.01), full, TieBreak::LowestId),
            Preset::HighComplexity => (Weights::new(100.0, 1.0, -0.01), full, TieBreak::LowestId),
            Preset::SourceExcluded => (
                Weights::new(100.0, 1.0, 0.0),
                MatchFlags {
                    use_source: false,
                    ..full
                },
                TieBreak::LowestId,
            ),
            Preset::TargetExcluded => (
                Weights::new(100.0, 1.0, 0.0),
                MatchFlags {
                    use_target: false,
                    ..full
                },
                TieBreak::LowestId,
            ),
        };
        SelectionConfig {
            preset: Some(preset),
            weights,
            n: 10,
            flags,
            tie_break,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<(), SelectionError> {
        if self.n == 0 {
            return Err(SelectionError::Config("n must be at least 1".into()));
        }
        if !self.flags.use_source && !self.flags.use_target {
            return Err(ScoringError::NoSide.into());
        }
        Ok(())
    }

    /// Checks that no structural and complexity contribution on this bank
    /// can outweigh one primitive.
    pub fn check_dominance(&self, index: &CandidateIndex) -> Result<(), SelectionError> {
        let w = &self.weights;
        w.check(index.max_depth)
            .map_err(|e| SelectionError::Config(e.to_string()))?;
        if w.w_p.0 > 0 {
            let worst = w.w_s * index.max_structures + w.w_c.abs() * (2 * index.max_depth);
            if worst >= w.w_p {
                return Err(SelectionError::Config(format!(
                    "primitive weight {} does not dominate the largest structural score {worst} on this bank",
                    w.w_p
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Side {
    Source,
    Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Primitive,
    Structure,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct ElementKey {
    side: Side,
    kind: Kind,
    key: String,
}

/// Inverted index from primitives and sub-structures to bank examples.
/// Positions are example slots in ascending id order.
#[derive(Clone, Debug)]
pub struct CandidateIndex {
    ids: Vec<u32>,
    trees: Vec<(ParseTree, ParseTree)>,
    features: Vec<PairFeatures>,
    elements: HashMap<ElementKey, u32>,
    postings: Vec<Vec<u32>>,
    max_structures: usize,
    max_depth: usize,
}

pub fn build_index(bank: &[Example]) -> Result<CandidateIndex, SelectionError> {
    if bank.is_empty() {
        return Err(SelectionError::EmptyBank);
    }
    let mut order: Vec<&Example> = bank.iter().collect();
    order.sort_by_key(|e| e.id);
    let features: Vec<PairFeatures> = order
        .par_iter()
        .map(|e| PairFeatures::of(&e.source_tree, &e.target_tree))
        .collect();
    let mut index = CandidateIndex {
        ids: order.iter().map(|e| e.id).collect(),
        trees: order
            .iter()
            .map(|e| (e.source_tree.clone(), e.target_tree.clone()))
            .collect(),
        features: Vec::new(),
        elements: HashMap::new(),
        postings: Vec::new(),
        max_structures: 0,
        max_depth: 0,
    };
    for (pos, f) in features.iter().enumerate() {
        for (side, tf) in [(Side::Source, &f.source), (Side::Target, &f.target)] {
            for p in &tf.primitives {
                index.post(side, Kind::Primitive, p, pos as u32);
            }
            for s in tf.structures() {
                index.post(side, Kind::Structure, s.encoding(), pos as u32);
            }
        }
        let structures = f.source.one_depth.len()
            + f.source.composed.len()
            + f.target.one_depth.len()
            + f.target.composed.len();
        index.max_structures = index.max_structures.max(structures);
        index.max_depth = index.max_depth.max(f.source.depth).max(f.target.depth);
    }
    index.features = features;
    Ok(index)
}

impl CandidateIndex {
    fn post(&mut self, side: Side, kind: Kind, key: &str, pos: u32) {
        let key = ElementKey {
            side,
            kind,
            key: key.to_string(),
        };
        let next = self.postings.len() as u32;
        let id = *self.elements.entry(key).or_insert(next);
        if id == next {
            self.postings.push(Vec::new());
        }
        self.postings[id as usize].push(pos);
    }

    fn lookup(&self, side: Side, kind: Kind, key: &str) -> Option<u32> {
        self.elements
            .get(&ElementKey {
                side,
                kind,
                key: key.to_string(),
            })
            .copied()
    }

    fn postings_of(&self, side: Side, kind: Kind, key: &str) -> &[u32] {
        self.lookup(side, kind, key)
            .map(|id| self.postings[id as usize].as_slice())
            .unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    /// Largest number of sub-structures of a single example, both sides.
    pub fn max_structures(&self) -> usize {
        self.max_structures
    }

    pub fn features_of(&self, id: u32) -> Option<&PairFeatures> {
        self.position(id).map(|p| &self.features[p])
    }

    fn position(&self, id: u32) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    /// Ids of examples whose source side contains the primitive.
    pub fn source_primitive_postings(&self, word: &str) -> Vec<u32> {
        self.to_ids(self.postings_of(Side::Source, Kind::Primitive, word))
    }

    /// Ids of examples whose target side contains the primitive.
    pub fn target_primitive_postings(&self, word: &str) -> Vec<u32> {
        self.to_ids(self.postings_of(Side::Target, Kind::Primitive, word))
    }

    /// Ids of examples containing the (depth ≤ 2) fragment on the given side.
    pub fn structure_postings(&self, fragment: &SubStructure, target_side: bool) -> Vec<u32> {
        let side = if target_side {
            Side::Target
        } else {
            Side::Source
        };
        self.to_ids(self.postings_of(side, Kind::Structure, fragment.encoding()))
    }

    fn to_ids(&self, positions: &[u32]) -> Vec<u32> {
        positions.iter().map(|p| self.ids[*p as usize]).collect()
    }

    /// Positions of examples that may contain `fragment` (share its top element).
    fn may_contain(&self, side: Side, fragment: &SubStructure) -> &[u32] {
        self.postings_of(side, Kind::Structure, fragment.top().encoding())
    }
}

/// A test case as seen by the selector.
#[derive(Clone, Debug)]
pub struct SelectionQuery<'a> {
    pub source_tree: &'a ParseTree,
    pub target_tree: &'a ParseTree,
    pub aiming_source: &'a SubStructure,
    pub aiming_target: &'a SubStructure,
    /// Further source fragments no chosen example may contain.
    pub excluded_source: &'a [SubStructure],
    /// Independent random stream for seeded tie-breaking.
    pub stream: u64,
}

impl SelectionQuery<'_> {
    /// Test-side features; the aiming combinations always belong to the
    /// partial structures of the test case.
    pub fn features(&self) -> PairFeatures {
        PairFeatures {
            source: TreeFeatures::of(self.source_tree).with_fragment(self.aiming_source),
            target: TreeFeatures::of(self.target_tree).with_fragment(self.aiming_target),
        }
    }

    /// True when neither aiming combination occurs in the pair.
    pub fn holds_out(&self, ex_source: &ParseTree, ex_target: &ParseTree) -> bool {
        !ex_source.contains(self.aiming_source) && !ex_target.contains(self.aiming_target)
    }

    fn admissible(&self, ex_source: &ParseTree, ex_target: &ParseTree) -> bool {
        self.holds_out(ex_source, ex_target)
            && !self.excluded_source.iter().any(|f| ex_source.contains(f))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChosenExample {
    pub id: u32,
    pub step: usize,
    pub prim_score: Score,
    pub stru_score: Score,
    pub comp_penalty: Score,
    /// Set when the best available score was not positive.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub nonpositive: bool,
}

impl ChosenExample {
    pub fn breakdown(&self) -> ScoreBreakdown {
        ScoreBreakdown::new(self.prim_score, self.stru_score, self.comp_penalty)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipleReport {
    pub held_out_ok: bool,
    pub primitive_coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen: Vec<ChosenExample>,
    pub principle_report: PrincipleReport,
}

impl SelectionResult {
    pub fn ids(&self) -> Vec<u32> {
        self.chosen.iter().map(|c| c.id).collect()
    }
}

/// Persisted form of one selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub case_id: u32,
    pub preset: Option<Preset>,
    pub chosen: Vec<ChosenExample>,
    pub coverage: f64,
}

impl SelectionRecord {
    pub fn new(case_id: u32, config: &SelectionConfig, result: &SelectionResult) -> Self {
        SelectionRecord {
            case_id,
            preset: config.preset,
            chosen: result.chosen.clone(),
            coverage: result.principle_report.primitive_coverage,
        }
    }
}

/// Picks among tied candidates (given in ascending id order).
fn break_tie(tied: &[u32], rng: &mut Option<ChaCha8Rng>) -> u32 {
    match rng {
        Some(rng) if tied.len() > 1 => tied[rng.gen_range(0..tied.len())],
        _ => tied[0],
    }
}

fn tie_rng(config: &SelectionConfig, stream: u64) -> Option<ChaCha8Rng> {
    match config.tie_break {
        TieBreak::LowestId => None,
        TieBreak::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            Some(rng)
        }
    }
}

fn admissible_positions(query: &SelectionQuery, index: &CandidateIndex) -> Vec<bool> {
    let mut admissible = vec![true; index.len()];
    for &pos in index.may_contain(Side::Source, query.aiming_source) {
        if index.trees[pos as usize].0.contains(query.aiming_source) {
            admissible[pos as usize] = false;
        }
    }
    for &pos in index.may_contain(Side::Target, query.aiming_target) {
        if index.trees[pos as usize].1.contains(query.aiming_target) {
            admissible[pos as usize] = false;
        }
    }
    for frag in query.excluded_source {
        for &pos in index.may_contain(Side::Source, frag) {
            if index.trees[pos as usize].0.contains(frag) {
                admissible[pos as usize] = false;
            }
        }
    }
    admissible
}

fn coverage_check(
    query: &SelectionQuery,
    index: &CandidateIndex,
    admissible: &[bool],
) -> Result<(), SelectionError> {
    for (side, tree) in [
        (Side::Source, query.source_tree),
        (Side::Target, query.target_tree),
    ] {
        for p in tree.leaves() {
            let found = index
                .postings_of(side, Kind::Primitive, &p)
                .iter()
                .any(|&pos| admissible[pos as usize]);
            if !found {
                return Err(SelectionError::Coverage { primitive: p });
            }
        }
    }
    Ok(())
}

/// Fails when some test primitive occurs in no admissible bank example.
pub fn check_coverage(
    query: &SelectionQuery,
    index: &CandidateIndex,
) -> Result<(), SelectionError> {
    coverage_check(query, index, &admissible_positions(query, index))
}

fn side_features(f: &PairFeatures, side: Side) -> &TreeFeatures {
    match side {
        Side::Source => &f.source,
        Side::Target => &f.target,
    }
}

fn enabled_sides(flags: MatchFlags) -> Vec<Side> {
    let mut sides = Vec::with_capacity(2);
    if flags.use_source {
        sides.push(Side::Source);
    }
    if flags.use_target {
        sides.push(Side::Target);
    }
    sides
}

fn used_structures(f: &TreeFeatures, rough_only: bool) -> Vec<&SubStructure> {
    if rough_only {
        f.one_depth.iter().collect()
    } else {
        f.structures().collect()
    }
}

/// Greedy selection of `config.n` examples, driven by the index.
///
/// Scores are kept per candidate and only adjusted along the postings of
/// elements that become covered, so each step is one linear argmax.
pub fn select(
    query: &SelectionQuery,
    index: &CandidateIndex,
    config: &SelectionConfig,
) -> Result<SelectionResult, SelectionError> {
    config.validate()?;
    let test = query.features();
    let admissible = admissible_positions(query, index);
    coverage_check(query, index, &admissible)?;

    let w = config.weights;
    let flags = config.flags;
    let sides = enabled_sides(flags);
    let n_bank = index.len();
    let mut prim = vec![Score::ZERO; n_bank];
    let mut stru = vec![Score::ZERO; n_bank];
    let comp: Vec<Score> = index
        .features
        .iter()
        .map(|f| {
            sides
                .iter()
                .map(|s| w.w_c * side_features(f, *s).depth)
                .fold(Score::ZERO, |a, b| a + b)
        })
        .collect();

    let mut test_prims = Vec::new();
    let mut test_strus = Vec::new();
    for &side in &sides {
        let tf = side_features(&test, side);
        test_prims.extend(
            tf.primitives
                .iter()
                .filter_map(|p| index.lookup(side, Kind::Primitive, p)),
        );
        test_strus.extend(
            used_structures(tf, flags.rough_only)
                .into_iter()
                .filter_map(|s| index.lookup(side, Kind::Structure, s.encoding())),
        );
    }
    for &e in &test_prims {
        for &pos in &index.postings[e as usize] {
            prim[pos as usize] += w.w_p;
        }
    }
    for &e in &test_strus {
        for &pos in &index.postings[e as usize] {
            stru[pos as usize] += w.w_s;
        }
    }

    let mut rng = tie_rng(config, query.stream);
    let mut taken = vec![false; n_bank];
    let mut covered_prims = vec![false; test_prims.len()];
    let mut covered_strus = vec![false; test_strus.len()];
    let mut chosen = Vec::with_capacity(config.n);
    let mut tied = Vec::new();
    for step in 0..config.n {
        let mut best: Option<Score> = None;
        tied.clear();
        for pos in 0..n_bank {
            if !admissible[pos] || taken[pos] {
                continue;
            }
            let total = prim[pos] + stru[pos] - comp[pos];
            match best {
                Some(b) if total < b => {}
                Some(b) if total == b => tied.push(pos as u32),
                _ => {
                    best = Some(total);
                    tied.clear();
                    tied.push(pos as u32);
                }
            }
        }
        let Some(best) = best else {
            return Err(SelectionError::Exhausted { step });
        };
        let pick = break_tie(&tied, &mut rng) as usize;
        taken[pick] = true;
        chosen.push(ChosenExample {
            id: index.ids[pick],
            step,
            prim_score: prim[pick],
            stru_score: stru[pick],
            comp_penalty: comp[pick],
            nonpositive: best <= Score::ZERO,
        });

        for (k, &e) in test_prims.iter().enumerate() {
            let postings = &index.postings[e as usize];
            if !covered_prims[k] && postings.binary_search(&(pick as u32)).is_ok() {
                covered_prims[k] = true;
                for &pos in postings {
                    prim[pos as usize] -= w.w_p;
                }
            }
        }
        if flags.diversity {
            for (k, &e) in test_strus.iter().enumerate() {
                let postings = &index.postings[e as usize];
                if !covered_strus[k] && postings.binary_search(&(pick as u32)).is_ok() {
                    covered_strus[k] = true;
                    for &pos in postings {
                        stru[pos as usize] -= w.w_s;
                    }
                }
            }
        }
    }

    let principle_report = principles(
        query,
        chosen.iter().map(|c| {
            let (s, t) = &index.trees[index.position(c.id).expect("chosen id is indexed")];
            (s, t)
        }),
    );
    Ok(SelectionResult {
        chosen,
        principle_report,
    })
}

/// Reference implementation: rescores every admissible example at every
/// step with [`rank_score`], straight from the trees.
pub fn select_exhaustive(
    query: &SelectionQuery,
    bank: &[Example],
    config: &SelectionConfig,
) -> Result<SelectionResult, SelectionError> {
    config.validate()?;
    if bank.is_empty() {
        return Err(SelectionError::EmptyBank);
    }
    let mut order: Vec<&Example> = bank.iter().collect();
    order.sort_by_key(|e| e.id);
    let admissible: Vec<&Example> = order
        .into_iter()
        .filter(|e| query.admissible(&e.source_tree, &e.target_tree))
        .collect();
    let features: Vec<PairFeatures> = admissible
        .iter()
        .map(|e| PairFeatures::of(&e.source_tree, &e.target_tree))
        .collect();
    let test = query.features();

    for p in query.source_tree.leaves() {
        if !admissible
            .iter()
            .any(|e| e.source_tree.leaves().contains(&p))
        {
            return Err(SelectionError::Coverage { primitive: p });
        }
    }
    for p in query.target_tree.leaves() {
        if !admissible
            .iter()
            .any(|e| e.target_tree.leaves().contains(&p))
        {
            return Err(SelectionError::Coverage { primitive: p });
        }
    }

    let mut rng = tie_rng(config, query.stream);
    let mut state = CoverageState::empty();
    let mut taken = BTreeSet::new();
    let mut chosen = Vec::new();
    for step in 0..config.n {
        let mut best: Option<(Score, Vec<usize>, Vec<ScoreBreakdown>)> = None;
        for (k, f) in features.iter().enumerate() {
            if taken.contains(&k) {
                continue;
            }
            let b = rank_score(&test, f, &config.weights, &state, config.flags)?;
            match &mut best {
                Some((s, _, _)) if b.total < *s => {}
                Some((s, ks, bs)) if b.total == *s => {
                    ks.push(k);
                    bs.push(b);
                }
                _ => best = Some((b.total, vec![k], vec![b])),
            }
        }
        let Some((total, ks, bs)) = best else {
            return Err(SelectionError::Exhausted { step });
        };
        let ids: Vec<u32> = ks.iter().map(|&k| k as u32).collect();
        let k = break_tie(&ids, &mut rng) as usize;
        let b = bs[ks.iter().position(|&x| x == k).unwrap()];
        taken.insert(k);
        state = state.with(&features[k]);
        chosen.push(ChosenExample {
            id: admissible[k].id,
            step,
            prim_score: b.prim_score,
            stru_score: b.stru_score,
            comp_penalty: b.comp_penalty,
            nonpositive: total <= Score::ZERO,
        });
    }
    let principle_report = principles(
        query,
        chosen.iter().map(|c| {
            let e = admissible.iter().find(|e| e.id == c.id).unwrap();
            (&e.source_tree, &e.target_tree)
        }),
    );
    Ok(SelectionResult {
        chosen,
        principle_report,
    })
}

fn principles<'a>(
    query: &SelectionQuery,
    chosen: impl Iterator<Item = (&'a ParseTree, &'a ParseTree)>,
) -> PrincipleReport {
    let mut held_out_ok = true;
    let mut src = BTreeSet::new();
    let mut tgt = BTreeSet::new();
    for (s, t) in chosen {
        held_out_ok &= query.holds_out(s, t);
        src.extend(s.leaves());
        tgt.extend(t.leaves());
    }
    let want_s = query.source_tree.leaves();
    let want_t = query.target_tree.leaves();
    let total = want_s.len() + want_t.len();
    let hit = want_s.intersection(&src).count() + want_t.intersection(&tgt).count();
    PrincipleReport {
        held_out_ok,
        primitive_coverage: if total == 0 {
            1.0
        } else {
            hit as f64 / total as f64
        },
    }
}

/// Recomputes the held-out and coverage principles for a selection from
/// the bank trees alone.
pub fn verify_principles(
    query: &SelectionQuery,
    chosen_ids: &[u32],
    bank: &[Example],
) -> PrincipleReport {
    let by_id: HashMap<u32, &Example> = bank.iter().map(|e| (e.id, e)).collect();
    principles(
        query,
        chosen_ids
            .iter()
            .filter_map(|id| by_id.get(id))
            .map(|e| (&e.source_tree, &e.target_tree)),
    )
}
