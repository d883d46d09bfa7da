//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero when any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use cofe::cli::{cmd_build_suite, cmd_gen_bank, read_bank, read_suite, PipelineConfig};
use cofe::grammar::{Example, Grammar, Lexicon};
use cofe::harness::{
    evaluate_exact, order_examples, run_suite, structural_accuracy, EvalReport, ModelClient,
    NearestCopy, OrderStrategy, PerfectOracle, PromptTemplate, RunOptions,
};
use cofe::selector::{build_index, select, select_exhaustive, Preset, SelectionQuery};
use cofe::suite::{
    apply_fictional_words, build_suite, remove_fictional_words, Category, CategoryCounts, Suite,
    SuiteConfig, SuiteStatistics,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Shared {
    config: PipelineConfig,
    bank: Vec<Example>,
    suite: Suite,
    build_secs: f64,
    _dir: tempfile::TempDir,
}

fn pipeline_config(dir: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::default();
    c.paths.bank = dir.join("bank.jsonl");
    c.paths.suite = dir.join("suite.jsonl");
    c.paths.results = dir.join("results.jsonl");
    c.paths.report = dir.join("report.tsv");
    c
}

fn setup() -> Shared {
    let dir = tempfile::tempdir().unwrap();
    let config = pipeline_config(dir.path());
    cmd_gen_bank(&config).unwrap();
    let start = Instant::now();
    cmd_build_suite(&config).unwrap();
    let build_secs = start.elapsed().as_secs_f64();
    let bank = read_bank(&config.paths.bank).unwrap().examples;
    let (_, suite) = read_suite(&config.paths.suite).unwrap();
    Shared {
        config,
        bank,
        suite,
        build_secs,
        _dir: dir,
    }
}

fn oracle(word_map: Option<std::collections::BTreeMap<String, String>>) -> PerfectOracle {
    PerfectOracle::new(
        Grammar::new(Lexicon::builtin()),
        PromptTemplate::default(),
        word_map,
    )
}

fn run(
    suite: &Suite,
    bank: &[Example],
    client: &dyn ModelClient,
    strategy: OrderStrategy,
) -> EvalReport {
    let options = RunOptions {
        strategy,
        ..RunOptions::default()
    };
    run_suite(suite, bank, client, &options, None).unwrap()
}

fn metric_chain_holds(report: &EvalReport) -> bool {
    report
        .records
        .iter()
        .all(|r| (!r.exact || r.structural) && (!r.exact || r.coverage == 1.0))
}

fn c1_held_out(s: &Shared) -> Outcome {
    let start = Instant::now();
    let violations = common::held_out_violations(&s.suite, &s.bank);
    let secs = s.build_secs + start.elapsed().as_secs_f64();
    let chosen: usize = s.suite.cases.iter().map(|c| c.example_ids.len()).sum();
    let detail = format!(
        "{violations} violations among {chosen} chosen examples of {} cases, {secs:.1} s",
        s.suite.cases.len()
    );
    if s.suite.cases.len() == 4785 && violations == 0 && secs < 300.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c2_coverage(s: &Shared) -> Outcome {
    let stats = SuiteStatistics::of(&s.suite);
    let all = stats.row(None).unwrap();
    let saturated = s.suite.cases.iter().filter(|c| c.stats.t_s >= 1.0).count();
    let detail = format!(
        "T_L {:.2}%, T_N {:.2}%, cases with full T_S coverage {saturated}",
        100.0 * all.t_l,
        100.0 * all.t_n
    );
    if all.t_l >= 0.98 && all.t_n == 1.0 && saturated == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c3_oracle_equivalence() -> Outcome {
    let mut trials = 0;
    let mut agree = 0;
    let mut selected = 0;
    for seed in 0..100u64 {
        let trial = common::random_trial(seed);
        let index = build_index(&trial.bank).unwrap();
        let query = SelectionQuery {
            source_tree: &trial.test.source_tree,
            target_tree: &trial.test.target_tree,
            aiming_source: &trial.aiming_source,
            aiming_target: &trial.aiming_target,
            excluded_source: &[],
            stream: seed,
        };
        for preset in Preset::ALL {
            let config = cofe::selector::SelectionConfig::preset(preset, seed);
            trials += 1;
            let same = match (
                select(&query, &index, &config),
                select_exhaustive(&query, &trial.bank, &config),
            ) {
                (Ok(a), Ok(b)) => {
                    selected += 1;
                    a.chosen == b.chosen
                }
                (Err(a), Err(b)) => a.to_string() == b.to_string(),
                _ => false,
            };
            agree += same as usize;
        }
    }
    let detail = format!("{agree}/{trials} trials agree ({selected} with a full selection)");
    if agree == trials && selected * 10 >= trials * 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c4_setting_invariance(world: &common::World) -> Outcome {
    let phra = |preset| {
        let config = SuiteConfig {
            counts: CategoryCounts::only(Category::PhraReco, 1000),
            preset,
            ..SuiteConfig::default()
        };
        let suite = build_suite(&world.ctx(), &config).unwrap();
        SuiteStatistics::of(&suite)
            .row(Some(Category::PhraReco))
            .unwrap()
            .clone()
    };
    let base = phra(Preset::FullSimilarity);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for preset in [
        Preset::HighDiversity,
        Preset::LowComplexity,
        Preset::HighComplexity,
    ] {
        let r = phra(preset);
        let diffs = [
            r.t_l - base.t_l,
            r.t_n - base.t_n,
            r.t_s1 - base.t_s1,
            r.t_s_gt1 - base.t_s_gt1,
        ];
        let max = diffs.iter().fold(0.0f64, |m, d| m.max(100.0 * d.abs()));
        worst = worst.max(max);
        parts.push(format!(
            "{preset} T_S1 {:.1} T_S>1 {:.1} (max diff {max:.2}pp)",
            100.0 * r.t_s1,
            100.0 * r.t_s_gt1
        ));
    }
    let detail = format!(
        "default T_S1 {:.1} T_S>1 {:.1}; {}",
        100.0 * base.t_s1,
        100.0 * base.t_s_gt1,
        parts.join("; ")
    );
    if worst <= 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c5_depth_laws(s: &Shared) -> Outcome {
    let bank_max = s.bank.iter().map(|e| e.depth).max().unwrap_or(0);
    let mut parts = vec![format!("bank max depth {bank_max}")];
    let mut ok = bank_max <= 3;
    for cat in [Category::LongChain, Category::DeepNest] {
        let depths: Vec<usize> = s
            .suite
            .cases
            .iter()
            .filter(|c| c.case.category == cat)
            .map(|c| c.case.depth)
            .collect();
        let max = depths.iter().copied().max().unwrap_or(0);
        let at13 = depths.iter().filter(|d| **d == 13).count();
        ok &= max == 13 && at13 >= 1;
        parts.push(format!("{cat} max depth {max} ({at13} at 13)"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn mean_chosen_depth(suite: &Suite, bank: &[Example]) -> f64 {
    let by_id: HashMap<u32, &Example> = bank.iter().map(|e| (e.id, e)).collect();
    let depths: Vec<usize> = suite
        .cases
        .iter()
        .flat_map(|c| c.example_ids.iter().map(|id| by_id[id].depth))
        .collect();
    depths.iter().sum::<usize>() as f64 / depths.len() as f64
}

fn c6_complexity_sign(default_world: &common::World) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for seed in 0..3u64 {
        let owned;
        let world = if seed == 0 {
            default_world
        } else {
            owned = common::World::new(seed, 24_155);
            &owned
        };
        let depth = |preset| {
            let config = SuiteConfig {
                counts: CategoryCounts {
                    prim_subs: 100,
                    prim_alte: 100,
                    phra_reco: 100,
                    long_chain: 100,
                    deep_nest: 100,
                },
                preset,
                seed,
                ..SuiteConfig::default()
            };
            mean_chosen_depth(&build_suite(&world.ctx(), &config).unwrap(), &world.bank)
        };
        let low = depth(Preset::LowComplexity);
        let high = depth(Preset::HighComplexity);
        ok &= low < high;
        parts.push(format!("seed {seed}: low {low:.3} < high {high:.3}"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c7_oracle_run(s: &Shared) -> Outcome {
    let start = Instant::now();
    let perfect = run(
        &s.suite,
        &s.bank,
        &oracle(None),
        OrderStrategy::StructureCloser,
    );
    let secs = start.elapsed().as_secs_f64();
    let near = run(
        &s.suite,
        &s.bank,
        &NearestCopy::new(PromptTemplate::default()),
        OrderStrategy::StructureCloser,
    );
    let all = perfect.row(None).unwrap();
    let chain = metric_chain_holds(&perfect) && metric_chain_holds(&near);
    let near_long = near.row(Some(Category::LongChain)).unwrap().exact;
    let detail = format!(
        "perfect oracle exact {:.1} structural {:.1} coverage {:.3} in {secs:.1} s; nearest-copy LongChain exact {:.1}; metric chain {}",
        100.0 * all.exact,
        100.0 * all.structural,
        all.coverage,
        100.0 * near_long,
        if chain { "holds" } else { "broken" }
    );
    if all.exact == 1.0
        && all.structural == 1.0
        && all.coverage == 1.0
        && all.failed == 0
        && chain
        && secs < 600.0
        && near_long == 0.0
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c8_fictional(s: &Shared) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let fictional = apply_fictional_words(&s.suite, &s.bank, &mut rng).unwrap();
    let restored = remove_fictional_words(&fictional);
    let round_trip =
        serde_json::to_string(&restored).unwrap() == serde_json::to_string(&s.suite).unwrap();
    let projection = s.suite.cases.iter().zip(&fictional.cases).all(|(a, b)| {
        structural_accuracy(&b.case.target, &a.case.target) && a.case.target != b.case.target
    });
    let report = run(
        &fictional,
        &s.bank,
        &oracle(fictional.word_map.clone()),
        OrderStrategy::StructureCloser,
    );
    let exact = report.row(None).unwrap().exact;
    let words = fictional.word_map.as_ref().map_or(0, |m| m.len());
    let detail = format!(
        "{words} words mapped, round trip {}, projections {}, oracle exact {:.1}",
        if round_trip { "exact" } else { "differs" },
        if projection { "unchanged" } else { "changed" },
        100.0 * exact
    );
    if round_trip && projection && exact == 1.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c9_order_robustness(s: &Shared) -> Outcome {
    let strategies = [
        OrderStrategy::StructureCloser,
        OrderStrategy::AtomCloser,
        OrderStrategy::Random(17),
    ];
    let same_sets = s.suite.cases.iter().all(|c| {
        let sets: Vec<BTreeSet<u32>> = strategies
            .iter()
            .map(|st| {
                order_examples(&c.selection, *st, c.case.case_id as u64)
                    .iter()
                    .map(|x| x.id)
                    .collect()
            })
            .collect();
        sets.windows(2).all(|w| w[0] == w[1]) && sets[0] == c.example_ids.iter().copied().collect()
    });
    let reports: Vec<EvalReport> = strategies
        .iter()
        .map(|st| run(&s.suite, &s.bank, &oracle(None), *st))
        .collect();
    let identical = reports.windows(2).all(|w| w[0].rows == w[1].rows);
    let exact_everywhere = reports[0].records.iter().all(|r| {
        evaluate_exact(
            &r.prediction,
            &s.suite.cases[r.case_id as usize].case.target,
        )
    });
    let detail = format!(
        "example sets {}, reports {}",
        if same_sets {
            "equal on every case"
        } else {
            "differ"
        },
        if identical && exact_everywhere {
            "identical"
        } else {
            "differ"
        }
    );
    if same_sets && identical && exact_everywhere {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c10_determinism(s: &Shared) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = pipeline_config(dir.path());
    cmd_gen_bank(&config).unwrap();
    cmd_build_suite(&config).unwrap();
    let mut parts = Vec::new();
    let mut ok = config.hash() == s.config.hash();
    for (a, b) in [
        (&s.config.paths.bank, &config.paths.bank),
        (&s.config.paths.suite, &config.paths.suite),
    ] {
        let same = fs::read(a).unwrap() == fs::read(b).unwrap();
        ok &= same;
        parts.push(format!(
            "{} {}",
            a.file_name().unwrap().to_string_lossy(),
            if same { "identical" } else { "differs" }
        ));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c11_css_enumeration() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut agree = 0;
    for _ in 0..1000 {
        let t = common::random_tree(&mut rng, 12, 3);
        let capped =
            common::rendered(&t.composed_substructures(2)) == common::brute_force_css(&t, 2);
        let full =
            common::rendered(&t.composed_substructures(12)) == common::brute_force_css(&t, 12);
        agree += (capped && full) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("{agree}/1000 trees agree in {secs:.2} s");
    if agree == 1000 && secs < 30.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn check(results: &mut Vec<bool>, number: usize, name: &str, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    let (status, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!(
        "criterion {number:>2} {name:<28} {status}  {detail} [{:.1} s]",
        start.elapsed().as_secs_f64()
    );
    results.push(outcome.is_ok());
}

fn main() {
    let mut results = Vec::new();
    let shared = setup();
    let world = common::World::new(0, 24_155);
    check(&mut results, 1, "held-out soundness", || {
        c1_held_out(&shared)
    });
    check(&mut results, 2, "primitive coverage", || {
        c2_coverage(&shared)
    });
    check(
        &mut results,
        3,
        "greedy oracle equivalence",
        c3_oracle_equivalence,
    );
    check(&mut results, 4, "setting-invariant coverage", || {
        c4_setting_invariance(&world)
    });
    check(&mut results, 5, "depth laws", || c5_depth_laws(&shared));
    check(&mut results, 6, "complexity sign", || {
        c6_complexity_sign(&world)
    });
    check(&mut results, 7, "end-to-end oracle run", || {
        c7_oracle_run(&shared)
    });
    check(&mut results, 8, "fictional-word transform", || {
        c8_fictional(&shared)
    });
    check(&mut results, 9, "order robustness", || {
        c9_order_robustness(&shared)
    });
    check(&mut results, 10, "determinism", || c10_determinism(&shared));
    check(
        &mut results,
        11,
        "CSS brute-force equivalence",
        c11_css_enumeration,
    );
    let passed = results.iter().filter(|r| **r).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
