use cofe::grammar::{generate_bank, GenerationConfig, Lexicon};
use cofe::scoring::{
    match_score, rank_score, CoverageState, MatchFlags, PairFeatures, Score, SideCoverage, Weights,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pairs(seed: u64, n: usize) -> Vec<PairFeatures> {
    let config = GenerationConfig {
        bank_size: n,
        ..GenerationConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_bank(&config, &Lexicon::builtin(), &mut rng)
        .unwrap()
        .iter()
        .map(|e| PairFeatures::of(&e.source_tree, &e.target_tree))
        .collect()
}

fn weights() -> impl Strategy<Value = Weights> {
    (0u8..=20, -5i8..=5).prop_map(|(s, c)| Weights::new(100.0, s as f64 / 10.0, c as f64 / 100.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_decomposes(seed in 0u64..1000, w in weights(), covered in 0usize..4) {
        let p = pairs(seed, 6);
        let state = CoverageState::from_examples(&p[2..2 + covered]);
        for diversity in [false, true] {
            let flags = MatchFlags { diversity, ..MatchFlags::default() };
            let b = rank_score(&p[0], &p[1], &w, &state, flags).unwrap();
            prop_assert_eq!(b.total, b.prim_score + b.stru_score - b.comp_penalty);
        }
    }

    #[test]
    fn diversity_never_increases_structure_score(seed in 0u64..1000, covered in 0usize..4) {
        let p = pairs(seed, 6);
        let w = Weights::default();
        let state = CoverageState::from_examples(&p[2..2 + covered]);
        let plain = rank_score(&p[0], &p[1], &w, &state, MatchFlags::default()).unwrap();
        let div = rank_score(&p[0], &p[1], &w, &state, MatchFlags { diversity: true, ..MatchFlags::default() }).unwrap();
        prop_assert!(div.stru_score <= plain.stru_score);
        prop_assert_eq!(div.prim_score, plain.prim_score);
        if covered == 0 {
            prop_assert_eq!(div.stru_score, plain.stru_score);
        }
    }

    #[test]
    fn complexity_sign(seed in 0u64..1000, c in 1i8..=5) {
        let p = pairs(seed, 2);
        let base = Weights::new(100.0, 1.0, 0.0);
        let low = Weights::new(100.0, 1.0, c as f64 / 100.0);
        let high = Weights::new(100.0, 1.0, -(c as f64) / 100.0);
        let s = |w: &Weights| rank_score(&p[0], &p[1], w, &CoverageState::empty(), MatchFlags::default()).unwrap();
        let depth = p[1].source.depth + p[1].target.depth;
        prop_assert_eq!(s(&low).total, s(&base).total - Score(c as i64) * depth);
        prop_assert_eq!(s(&high).total, s(&base).total + Score(c as i64) * depth);
    }

    #[test]
    fn rough_only_counts_a_subset(seed in 0u64..1000) {
        let p = pairs(seed, 2);
        let w = Weights::default();
        let full = match_score(&p[0].source, &p[1].source, &w, &SideCoverage::default(), false, false);
        let rough = match_score(&p[0].source, &p[1].source, &w, &SideCoverage::default(), false, true);
        prop_assert!(rough.stru_score <= full.stru_score);
        let expected = p[0].source.one_depth.iter().filter(|s| p[1].source.contains_structure(s)).count();
        prop_assert_eq!(rough.stru_score, Score(100) * expected);
    }

    #[test]
    fn sides_add_up(seed in 0u64..1000) {
        let p = pairs(seed, 2);
        let w = Weights::default();
        let s = |use_source, use_target| {
            rank_score(&p[0], &p[1], &w, &CoverageState::empty(), MatchFlags { use_source, use_target, ..MatchFlags::default() })
        };
        let both = s(true, true).unwrap();
        let src = s(true, false).unwrap();
        let tgt = s(false, true).unwrap();
        prop_assert_eq!(both.total, src.total + tgt.total);
        prop_assert!(s(false, false).is_err());
    }
}

#[test]
fn hand_computed_pair() {
    // "Jackson observed a baby" against "Emma observed a baby": shared
    // source primitives {observed, a, baby}; shared one-depth fragments
    // (active-verb observed), (direct-object a baby) and the sentence rule;
    // composed fragments differ only where the subject is expanded.
    let grammar = cofe::grammar::Grammar::new(Lexicon::builtin());
    let feat = |s: &str| {
        let t = cofe::grammar::parse_sentence(s).unwrap();
        let y = grammar.derive_target(&t).unwrap();
        PairFeatures::of(&t, &y)
    };
    let a = feat("Jackson observed a baby");
    let b = feat("Emma observed a baby");
    let w = Weights::new(100.0, 1.0, 0.0);
    let r = match_score(
        &a.source,
        &b.source,
        &w,
        &SideCoverage::default(),
        false,
        false,
    );
    assert_eq!(r.prim_score, Score::from_f64(300.0));
    let shared = a
        .source
        .structures()
        .filter(|s| b.source.contains_structure(s))
        .count();
    // one-depth: sentence, active-verb, direct-object (subject differs)
    // composed: sentence with verb / object / verb+object expanded
    assert_eq!(shared, 6);
    assert_eq!(r.stru_score, Score::from_f64(6.0));
}
