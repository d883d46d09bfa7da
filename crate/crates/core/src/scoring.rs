//! Matching score between parse trees and the two-sided ranking score.
//!
//! All arithmetic is fixed point in hundredths so greedy argmax never
//! depends on floating-point ties.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::tree::{ParseTree, SubStructure, DEFAULT_COMPOSE_DEPTH};

/// A score in hundredths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Score(pub i64);

impl Score {
    pub const ZERO: Score = Score(0);

    pub fn from_f64(x: f64) -> Score {
        Score((x * 100.0).round() as i64)
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn abs(self) -> Score {
        Score(self.0.abs())
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let a = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", a / 100, a % 100)
    }
}

impl Add for Score {
    type Output = Score;
    fn add(self, o: Score) -> Score {
        Score(self.0 + o.0)
    }
}

impl Sub for Score {
    type Output = Score;
    fn sub(self, o: Score) -> Score {
        Score(self.0 - o.0)
    }
}

impl Neg for Score {
    type Output = Score;
    fn neg(self) -> Score {
        Score(-self.0)
    }
}

impl AddAssign for Score {
    fn add_assign(&mut self, o: Score) {
        self.0 += o.0
    }
}

impl SubAssign for Score {
    fn sub_assign(&mut self, o: Score) {
        self.0 -= o.0
    }
}

impl Mul<usize> for Score {
    type Output = Score;
    fn mul(self, k: usize) -> Score {
        Score(self.0 * k as i64)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Score::from_f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    pub w_p: Score,
    pub w_s: Score,
    pub w_c: Score,
}

impl Default for Weights {
    fn default() -> Self {
        Weights::new(100.0, 1.0, 0.0)
    }
}

impl Weights {
    pub fn new(w_p: f64, w_s: f64, w_c: f64) -> Self {
        Weights {
            w_p: Score::from_f64(w_p),
            w_s: Score::from_f64(w_s),
            w_c: Score::from_f64(w_c),
        }
    }

    /// Checks the preset invariants for banks whose deepest tree has depth
    /// `max_depth`: primitives dominate, and the complexity term never
    /// outweighs a single structural match.
    pub fn check(&self, max_depth: usize) -> Result<(), ScoringError> {
        if self.w_p.0 > 0 && (self.w_p.0 <= self.w_s.0 || self.w_p.0 <= self.w_c.abs().0) {
            return Err(ScoringError::Weights(format!(
                "w_p ({}) must dominate w_s ({}) and |w_c| ({})",
                self.w_p, self.w_s, self.w_c
            )));
        }
        if self.w_s.0 > 0 && self.w_c.abs().0 * max_depth as i64 >= self.w_s.0 {
            return Err(ScoringError::Weights(format!(
                "|w_c| * {max_depth} must stay below w_s ({})",
                self.w_s
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoringError {
    #[error("at least one of the source and target sides must be matched")]
    NoSide,
    #[error("invalid weights: {0}")]
    Weights(String),
}

/// Components of a ranking score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub prim_score: Score,
    pub stru_score: Score,
    pub comp_penalty: Score,
    pub total: Score,
}

impl ScoreBreakdown {
    pub fn new(prim_score: Score, stru_score: Score, comp_penalty: Score) -> Self {
        ScoreBreakdown {
            prim_score,
            stru_score,
            comp_penalty,
            total: prim_score + stru_score - comp_penalty,
        }
    }
}

impl Add for ScoreBreakdown {
    type Output = ScoreBreakdown;
    fn add(self, o: ScoreBreakdown) -> ScoreBreakdown {
        ScoreBreakdown::new(
            self.prim_score + o.prim_score,
            self.stru_score + o.stru_score,
            self.comp_penalty + o.comp_penalty,
        )
    }
}

/// Everything the score needs from one tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeFeatures {
    pub primitives: BTreeSet<String>,
    pub one_depth: BTreeSet<SubStructure>,
    pub composed: BTreeSet<SubStructure>,
    pub depth: usize,
}

impl TreeFeatures {
    pub fn of(tree: &ParseTree) -> Self {
        TreeFeatures {
            primitives: tree.leaves(),
            one_depth: tree.one_depth_substructures(),
            composed: tree.composed_substructures(DEFAULT_COMPOSE_DEPTH),
            depth: tree.depth(),
        }
    }

    /// Adds a held-out fragment to the partial structures. Fragments of
    /// height one go to the one-depth set.
    pub fn with_fragment(mut self, fragment: &SubStructure) -> Self {
        if fragment.height() <= 1 {
            self.one_depth.insert(fragment.clone());
        } else {
            self.composed.insert(fragment.clone());
        }
        self
    }

    pub fn structures(&self) -> impl Iterator<Item = &SubStructure> {
        self.one_depth.iter().chain(&self.composed)
    }

    pub fn contains_structure(&self, s: &SubStructure) -> bool {
        self.one_depth.contains(s) || self.composed.contains(s)
    }
}

/// Features of a (source, target) pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFeatures {
    pub source: TreeFeatures,
    pub target: TreeFeatures,
}

impl PairFeatures {
    pub fn of(source: &ParseTree, target: &ParseTree) -> Self {
        PairFeatures {
            source: TreeFeatures::of(source),
            target: TreeFeatures::of(target),
        }
    }
}

/// What previously selected examples already cover on one side.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SideCoverage {
    pub primitives: BTreeSet<String>,
    pub structures: BTreeSet<SubStructure>,
}

impl SideCoverage {
    fn with(&self, f: &TreeFeatures) -> SideCoverage {
        let mut next = self.clone();
        next.primitives.extend(f.primitives.iter().cloned());
        next.structures.extend(f.structures().cloned());
        next
    }
}

/// Coverage accumulated over the selected examples, both sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverageState {
    pub source: SideCoverage,
    pub target: SideCoverage,
}

impl CoverageState {
    pub fn empty() -> Self {
        CoverageState::default()
    }

    /// Successor state after selecting `example`.
    pub fn with(&self, example: &PairFeatures) -> CoverageState {
        CoverageState {
            source: self.source.with(&example.source),
            target: self.target.with(&example.target),
        }
    }

    pub fn from_examples<'a>(examples: impl IntoIterator<Item = &'a PairFeatures>) -> Self {
        examples
            .into_iter()
            .fold(CoverageState::empty(), |s, e| s.with(e))
    }
}

/// Switches of the ranking score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchFlags {
    pub diversity: bool,
    pub rough_only: bool,
    pub use_source: bool,
    pub use_target: bool,
}

impl Default for MatchFlags {
    fn default() -> Self {
        MatchFlags {
            diversity: false,
            rough_only: false,
            use_source: true,
            use_target: true,
        }
    }
}

/// Matching score of one side.
///
/// Primitives count when shared with the test tree and not yet covered;
/// structures count when shared with the test tree (one-depth only when
/// `rough_only`) and, with `diversity_on`, not yet covered.
pub fn match_score(
    test: &TreeFeatures,
    cand: &TreeFeatures,
    weights: &Weights,
    covered: &SideCoverage,
    diversity_on: bool,
    rough_only: bool,
) -> ScoreBreakdown {
    let prims = test
        .primitives
        .iter()
        .filter(|p| cand.primitives.contains(*p) && !covered.primitives.contains(*p))
        .count();
    let used: Box<dyn Iterator<Item = &SubStructure>> = if rough_only {
        Box::new(test.one_depth.iter())
    } else {
        Box::new(test.structures())
    };
    let strus = used
        .filter(|s| cand.contains_structure(s))
        .filter(|s| !(diversity_on && covered.structures.contains(*s)))
        .count();
    ScoreBreakdown::new(
        weights.w_p * prims,
        weights.w_s * strus,
        weights.w_c * cand.depth,
    )
}

/// Sum of the per-side matching scores over the enabled sides.
pub fn rank_score(
    test: &PairFeatures,
    cand: &PairFeatures,
    weights: &Weights,
    state: &CoverageState,
    flags: MatchFlags,
) -> Result<ScoreBreakdown, ScoringError> {
    if !flags.use_source && !flags.use_target {
        return Err(ScoringError::NoSide);
    }
    let mut out = ScoreBreakdown::default();
    if flags.use_source {
        out = out
            + match_score(
                &test.source,
                &cand.source,
                weights,
                &state.source,
                flags.diversity,
                flags.rough_only,
            );
    }
    if flags.use_target {
        out = out
            + match_score(
                &test.target,
                &cand.target,
                weights,
                &state.target,
                flags.diversity,
                flags.rough_only,
            );
    }
    Ok(out)
}

/// Structures of the test side found in the candidate, for inspection.
pub fn matched_structures<'a>(
    test: &'a TreeFeatures,
    cand: &TreeFeatures,
    rough_only: bool,
) -> Vec<&'a SubStructure> {
    test.structures()
        .filter(|s| !rough_only || test.one_depth.contains(*s))
        .filter(|s| cand.contains_structure(s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{parse_sentence, Grammar, Lexicon};

    fn pair(sentence: &str) -> PairFeatures {
        let g = Grammar::new(Lexicon::builtin());
        let s = parse_sentence(sentence).unwrap();
        let t = g.derive_target(&s).unwrap();
        PairFeatures::of(&s, &t)
    }

    #[test]
    fn self_match_counts_primitives() {
        let p = pair("Jackson observed a baby");
        let w = Weights::new(1.0, 0.0, 0.0);
        let b = match_score(
            &p.source,
            &p.source,
            &w,
            &SideCoverage::default(),
            false,
            false,
        );
        assert_eq!(b.total, Score::from_f64(4.0));
    }

    #[test]
    fn complexity_only() {
        let a = pair("Jackson observed a baby");
        let b = pair("Emma said that a baby in a room slept");
        let w = Weights::new(0.0, 0.0, 1.0);
        let s = match_score(
            &a.source,
            &b.source,
            &w,
            &SideCoverage::default(),
            false,
            false,
        );
        assert_eq!(s.total, Score::from_f64(-(b.source.depth as f64)));
        assert_eq!(b.source.depth, 3);
    }

    #[test]
    fn covered_structure_is_not_rewarded_again() {
        let p = pair("Jackson observed a baby");
        let sigma = p.source.one_depth.iter().next().unwrap().clone();
        let test = TreeFeatures {
            primitives: BTreeSet::new(),
            one_depth: BTreeSet::from([sigma.clone()]),
            composed: BTreeSet::new(),
            depth: 1,
        };
        let covered = SideCoverage {
            primitives: BTreeSet::new(),
            structures: BTreeSet::from([sigma]),
        };
        let w = Weights::default();
        let on = match_score(&test, &p.source, &w, &covered, true, false);
        assert_eq!(on.stru_score, Score::ZERO);
        let off = match_score(&test, &p.source, &w, &covered, false, false);
        assert_eq!(off.stru_score, Score::from_f64(1.0));
    }

    #[test]
    fn two_sided_identical() {
        let p = pair("Jackson observed a baby");
        let w = Weights::new(1.0, 0.0, 0.0);
        let b = rank_score(&p, &p, &w, &CoverageState::empty(), MatchFlags::default()).unwrap();
        let expected = p.source.primitives.len() + p.target.primitives.len();
        assert_eq!(b.total, Score::from_f64(expected as f64));
    }

    #[test]
    fn no_side_is_an_error() {
        let p = pair("Jackson observed a baby");
        let flags = MatchFlags {
            use_source: false,
            use_target: false,
            ..Default::default()
        };
        assert_eq!(
            rank_score(&p, &p, &Weights::default(), &CoverageState::empty(), flags),
            Err(ScoringError::NoSide)
        );
    }

    #[test]
    fn target_only_ignores_source_tree() {
        let test = pair("Jackson observed a baby");
        let mut cand = pair("Emma observed the baby");
        let flags = MatchFlags {
            use_source: false,
            ..Default::default()
        };
        let w = Weights::default();
        let a = rank_score(&test, &cand, &w, &CoverageState::empty(), flags).unwrap();
        cand.source = pair("a girl slept").source;
        let b = rank_score(&test, &cand, &w, &CoverageState::empty(), flags).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn score_formatting() {
        assert_eq!(Score(-1).to_string(), "-0.01");
        assert_eq!(Score(10_050).to_string(), "100.50");
    }

    #[test]
    fn weight_invariants() {
        assert!(Weights::new(100.0, 1.0, 0.01).check(13).is_ok());
        assert!(Weights::new(100.0, 1.0, -0.01).check(13).is_ok());
        assert!(Weights::new(100.0, 1.0, 0.1).check(13).is_err());
        assert!(Weights::new(1.0, 1.0, 0.0).check(3).is_err());
    }
}
