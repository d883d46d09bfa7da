//! Command-line front end: pipeline configuration, artifact files with
//! provenance headers, and the subcommands.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grammar::{generate_bank, Example, GenerationConfig, Grammar, Lexicon};
use crate::harness::{
    read_results, run_suite, ClientError, EvalReport, ModelClient, NearestCopy, OrderStrategy,
    PerfectOracle, RemoteClient, ResultsSink, RunOptions,
};
use crate::scoring::{matched_structures, rank_score, CoverageState, PairFeatures};
use crate::selector::{build_index, Preset};
use crate::suite::{
    build_suite, compute_statistics, HoldoutConfig, HoldoutPlan, Suite, SuiteCase, SuiteConfig,
    SuiteContext, SuiteStatistics,
};

pub const TOOL: &str = "cofe";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An error caused by how the tool was invoked rather than by data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClientKind {
    Remote,
    #[default]
    PerfectOracle,
    NearestCopy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub lexicon: Option<PathBuf>,
    pub bank: PathBuf,
    pub suite: PathBuf,
    pub results: PathBuf,
    pub report: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            lexicon: None,
            bank: "bank.jsonl".into(),
            suite: "suite.jsonl".into(),
            results: "results.jsonl".into(),
            report: "report.tsv".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub client: ClientKind,
    pub timeout_secs: u64,
    #[serde(flatten)]
    pub run: RunOptions,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            client: ClientKind::default(),
            timeout_secs: 120,
            run: RunOptions::default(),
        }
    }
}

/// Everything a pipeline run reads. Paths are not part of the provenance
/// record, so moving artifacts does not change their hashes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Root seed; every stage derives its randomness from it.
    pub seed: u64,
    #[serde(skip_serializing)]
    pub paths: Paths,
    pub generation: GenerationConfig,
    pub holdout: HoldoutConfig,
    pub suite: SuiteConfig,
    pub harness: HarnessConfig,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Propagates the root seed into the stage configs.
    pub fn resolved(mut self) -> PipelineConfig {
        self.generation.seed = self.seed;
        self.suite.seed = self.seed;
        self
    }

    pub fn hash(&self) -> String {
        config_hash(&serde_json::to_value(self).expect("config serializes"))
    }

    fn stage_rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    pub fn lexicon(&self) -> Result<Lexicon> {
        match &self.paths.lexicon {
            Some(p) => Lexicon::load(p).map_err(Into::into),
            None => Ok(Lexicon::builtin()),
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn config_hash(config: &serde_json::Value) -> String {
    sha256_hex(config.to_string().as_bytes())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    Bank,
    Suite,
    Results,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankSummary {
    pub size: usize,
    pub mean_source_len: f64,
    pub mean_target_len: f64,
    pub max_depth: usize,
}

impl BankSummary {
    pub fn of(bank: &[Example]) -> BankSummary {
        let n = bank.len().max(1) as f64;
        BankSummary {
            size: bank.len(),
            mean_source_len: bank.iter().map(|e| e.source_len()).sum::<usize>() as f64 / n,
            mean_target_len: bank.iter().map(|e| e.target_len()).sum::<usize>() as f64 / n,
            max_depth: bank.iter().map(|e| e.depth).max().unwrap_or(0),
        }
    }
}

/// First line of every artifact file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub kind: ArtifactKind,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    /// Hash of the lines after the header; absent for append-only files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
    /// Hashes of the artifacts this one was derived from.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub inputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<HoldoutPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<BankSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub word_map: Option<BTreeMap<String, String>>,
}

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    provenance: Provenance,
}

impl Provenance {
    pub fn new(kind: ArtifactKind, config: &PipelineConfig) -> Provenance {
        Provenance {
            tool: TOOL.into(),
            version: VERSION.into(),
            kind,
            seed: config.seed,
            config_hash: config.hash(),
            config: serde_json::to_value(config).expect("config serializes"),
            content_hash: None,
            inputs: BTreeMap::new(),
            plan: None,
            summary: None,
            word_map: None,
        }
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(&HeaderLine {
            provenance: self.clone(),
        })
        .expect("header serializes")
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        serde_json::from_value(self.config.clone())
            .context("artifact header holds an invalid config")
    }
}

/// An artifact file split into its header and body lines.
pub struct Artifact {
    pub header: Provenance,
    pub body: String,
}

impl Artifact {
    pub fn read(path: &Path) -> Result<Artifact> {
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let (first, body) = text.split_once('\n').unwrap_or((&text, ""));
        let header: HeaderLine = serde_json::from_str(first)
            .with_context(|| format!("{} has no provenance header", path.display()))?;
        Ok(Artifact {
            header: header.provenance,
            body: body.to_string(),
        })
    }

    pub fn records<T: DeserializeOwned + Send>(&self) -> Result<Vec<T>> {
        self.body
            .par_lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(anyhow::Error::from))
            .collect()
    }

    pub fn content_hash(&self) -> String {
        sha256_hex(self.body.as_bytes())
    }
}

fn body_of<T: Serialize + Sync>(records: &[T]) -> String {
    let lines: Vec<String> = records
        .par_iter()
        .map(|r| serde_json::to_string(r).expect("records serialize"))
        .collect();
    let mut body = lines.join("\n");
    if !body.is_empty() {
        body.push('\n');
    }
    body
}

/// Writes `header` (with the body hash filled in) followed by `body`.
fn write_artifact(path: &Path, mut header: Provenance, body: &str) -> Result<String> {
    let hash = sha256_hex(body.as_bytes());
    header.content_hash = Some(hash.clone());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let mut file =
        fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    writeln!(file, "{}", header.to_line())?;
    file.write_all(body.as_bytes())?;
    Ok(hash)
}

fn lexicon_hash(lexicon: &Lexicon) -> String {
    sha256_hex(lexicon.to_tsv().as_bytes())
}

/// A loaded bank with its holdout plan and the configuration it was built with.
pub struct BankFile {
    pub header: Provenance,
    pub config: PipelineConfig,
    pub plan: HoldoutPlan,
    pub examples: Vec<Example>,
}

pub fn read_bank(path: &Path) -> Result<BankFile> {
    let artifact = Artifact::read(path)?;
    if artifact.header.kind != ArtifactKind::Bank {
        bail!("{} is not a bank file", path.display());
    }
    let plan = artifact
        .header
        .plan
        .clone()
        .ok_or_else(|| anyhow!("{} does not record its holdout plan", path.display()))?;
    Ok(BankFile {
        config: artifact.header.pipeline_config()?,
        examples: artifact.records()?,
        header: artifact.header,
        plan,
    })
}

pub fn read_suite(path: &Path) -> Result<(Provenance, Suite)> {
    let artifact = Artifact::read(path)?;
    if artifact.header.kind != ArtifactKind::Suite {
        bail!("{} is not a suite file", path.display());
    }
    let config = artifact.header.pipeline_config()?;
    let cases: Vec<SuiteCase> = artifact.records()?;
    let suite = Suite {
        config: config.suite,
        cases,
        word_map: artifact.header.word_map.clone(),
    };
    Ok((artifact.header, suite))
}

/// Samples the holdout plan and the bank, and writes the bank file.
pub fn cmd_gen_bank(config: &PipelineConfig) -> Result<BankSummary> {
    let config = config.clone().resolved();
    let lexicon = config.lexicon()?;
    let plan = HoldoutPlan::sample(&lexicon, &config.holdout, &mut config.stage_rng(1))?;
    let mut generation = config.generation.clone();
    generation.restrictions = plan.restrictions();
    let bank = generate_bank(&generation, &lexicon, &mut config.stage_rng(2))?;
    let summary = BankSummary::of(&bank);

    let [lo, hi] = generation.source_length_band;
    if !(lo..=hi).contains(&summary.mean_source_len) {
        bail!(
            "mean sentence length {:.2} is outside the configured band [{lo}, {hi}]",
            summary.mean_source_len
        );
    }

    let mut header = Provenance::new(ArtifactKind::Bank, &config);
    header
        .inputs
        .insert("lexicon".into(), lexicon_hash(&lexicon));
    header.plan = Some(plan);
    header.summary = Some(summary.clone());
    write_artifact(&config.paths.bank, header, &body_of(&bank))?;
    Ok(summary)
}

/// Builds a suite against an existing bank and writes the suite file.
pub fn cmd_build_suite(config: &PipelineConfig) -> Result<Suite> {
    let config = config.clone().resolved();
    let bank = read_bank(&config.paths.bank)?;
    let lexicon = config.lexicon()?;
    if bank.header.inputs.get("lexicon") != Some(&lexicon_hash(&lexicon)) {
        bail!("the bank was generated from a different lexicon");
    }
    let mut generation = bank.config.generation.clone();
    generation.restrictions = bank.plan.restrictions();
    let grammar = Grammar::new(lexicon);
    let index = build_index(&bank.examples)?;
    let ctx = SuiteContext {
        grammar: &grammar,
        generation: &generation,
        plan: &bank.plan,
        bank: &bank.examples,
        index: &index,
    };
    let suite = build_suite(&ctx, &config.suite)?;

    let mut header = Provenance::new(ArtifactKind::Suite, &config);
    let bank_hash = bank
        .header
        .content_hash
        .clone()
        .ok_or_else(|| anyhow!("bank header lacks a content hash"))?;
    header.inputs.insert("bank".into(), bank_hash);
    header.word_map = suite.word_map.clone();
    write_artifact(&config.paths.suite, header, &body_of(&suite.cases))?;
    Ok(suite)
}

/// Recomputes the statistics of a persisted suite and checks them against
/// the stored per-case values.
pub fn cmd_stats(config: &PipelineConfig) -> Result<SuiteStatistics> {
    let (_, suite) = read_suite(&config.paths.suite)?;
    let bank = read_bank(&config.paths.bank)?;
    let recomputed = compute_statistics(&suite, &bank.examples);
    if recomputed != SuiteStatistics::of(&suite) {
        bail!("recomputed statistics differ from the ones stored in the suite");
    }
    Ok(recomputed)
}

/// Term-by-term score of one bank example for one test case.
pub fn cmd_score(config: &PipelineConfig, case_id: u32, example_id: u32) -> Result<String> {
    let (_, suite) = read_suite(&config.paths.suite)?;
    let bank = read_bank(&config.paths.bank)?;
    let case = suite
        .cases
        .iter()
        .find(|c| c.case.case_id == case_id)
        .ok_or_else(|| anyhow!("no case with id {case_id}"))?;
    let example = bank
        .examples
        .iter()
        .find(|e| e.id == example_id)
        .ok_or_else(|| anyhow!("no bank example with id {example_id}"))?;
    let original = match &suite.word_map {
        Some(_) => {
            crate::suite::remove_fictional_words(&Suite {
                config: suite.config.clone(),
                cases: vec![case.clone()],
                word_map: suite.word_map.clone(),
            })
            .cases
            .remove(0)
            .case
        }
        None => case.case.clone(),
    };
    let selection = suite.config.selection();
    let test = original.query(&[]).features();
    let cand = PairFeatures::of(&example.source_tree, &example.target_tree);
    let b = rank_score(
        &test,
        &cand,
        &selection.weights,
        &CoverageState::empty(),
        selection.flags,
    )?;

    let mut out = String::new();
    out.push_str(&format!(
        "case {case_id}: {}\nexample {example_id}: {}\n",
        original.source, example.source
    ));
    out.push_str(&format!(
        "prim_score\t{}\nstru_score\t{}\ncomp_penalty\t{}\ntotal\t{}\n",
        b.prim_score, b.stru_score, b.comp_penalty, b.total
    ));
    let sides = [
        (
            "source",
            &test.source,
            &cand.source,
            selection.flags.use_source,
        ),
        (
            "target",
            &test.target,
            &cand.target,
            selection.flags.use_target,
        ),
    ];
    for (side, t, c, enabled) in sides {
        if !enabled {
            continue;
        }
        for s in matched_structures(t, c, selection.flags.rough_only) {
            out.push_str(&format!("matched {side}\t{s}\n"));
        }
    }
    Ok(out)
}

fn make_client(config: &PipelineConfig, suite: &Suite) -> Result<Box<dyn ModelClient>> {
    let h = &config.harness;
    Ok(match h.client {
        ClientKind::Remote => {
            Box::new(RemoteClient::from_env(Duration::from_secs(h.timeout_secs))?)
        }
        ClientKind::PerfectOracle => Box::new(PerfectOracle::new(
            Grammar::new(config.lexicon()?),
            h.run.template.clone(),
            suite.word_map.clone(),
        )),
        ClientKind::NearestCopy => Box::new(NearestCopy::new(h.run.template.clone())),
    })
}

/// Evaluates the suite with the configured client and writes the results
/// and report files.
pub fn cmd_run(config: &PipelineConfig, resume: bool) -> Result<EvalReport> {
    let config = config.clone().resolved();
    let (suite_header, suite) = read_suite(&config.paths.suite)?;
    let client = make_client(&config, &suite)?;
    let bank = read_bank(&config.paths.bank)?;

    let mut header = Provenance::new(ArtifactKind::Results, &config);
    if let Some(h) = suite_header.content_hash {
        header.inputs.insert("suite".into(), h);
    }
    let sink = ResultsSink {
        path: &config.paths.results,
        resume,
        header: Some(header.to_line()),
    };
    let report = run_suite(
        &suite,
        &bank.examples,
        client.as_ref(),
        &config.harness.run,
        Some(sink),
    )?;
    write_report(&config.paths.report, &report)?;
    Ok(report)
}

fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    fs::write(path, report.to_tsv()).with_context(|| format!("cannot write {}", path.display()))
}

/// Aggregates an existing results file.
pub fn cmd_report(config: &PipelineConfig) -> Result<EvalReport> {
    let (_, suite) = read_suite(&config.paths.suite)?;
    let records = read_results(&config.paths.results)?;
    let report = EvalReport::from_records(&suite, &records);
    write_report(&config.paths.report, &report)?;
    Ok(report)
}

/// Checks the header hashes of an artifact; returns one line per check.
pub fn verify_artifact(path: &Path, config: &PipelineConfig) -> Result<Vec<(String, bool)>> {
    let artifact = Artifact::read(path)?;
    let h = &artifact.header;
    let mut checks = vec![(
        "config hash".to_string(),
        config_hash(&h.config) == h.config_hash,
    )];
    if let Some(expected) = &h.content_hash {
        checks.push(("content hash".into(), *expected == artifact.content_hash()));
    }
    for (name, expected) in &h.inputs {
        let actual = match name.as_str() {
            "lexicon" => Some(lexicon_hash(&config.lexicon()?)),
            "bank" | "suite" => {
                let p = if name == "bank" {
                    &config.paths.bank
                } else {
                    &config.paths.suite
                };
                p.exists()
                    .then(|| Artifact::read(p))
                    .transpose()?
                    .and_then(|a| a.header.content_hash)
            }
            _ => None,
        };
        if let Some(actual) = actual {
            checks.push((format!("input {name}"), actual == *expected));
        }
    }
    Ok(checks)
}

#[derive(Debug, Parser)]
#[command(
    name = "cofe",
    version,
    about = "Compositional generalization suites for in-context learning"
)]
pub struct Cli {
    /// TOML pipeline configuration; flags override its values.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Root seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, global = true)]
    pub bank: Option<PathBuf>,
    #[arg(long, global = true)]
    pub suite: Option<PathBuf>,
    #[arg(long, global = true)]
    pub results: Option<PathBuf>,
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the example bank.
    GenBank {
        #[arg(long)]
        size: Option<usize>,
    },
    /// Build a test suite and select in-context examples for every case.
    BuildSuite {
        #[arg(long)]
        preset: Option<Preset>,
        /// Number of in-context examples per case.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        fictional_words: bool,
        #[arg(long)]
        nl_exclusion: bool,
    },
    /// Recompute and print the suite statistics.
    Stats,
    /// Print the score breakdown of one bank example for one case.
    Score {
        #[arg(long = "case")]
        case_id: u32,
        #[arg(long = "example")]
        example_id: u32,
    },
    /// Evaluate a suite with a completion client.
    Run {
        #[arg(long, value_enum)]
        client: Option<ClientKind>,
        /// structure-closer, atom-closer, random or random:<seed>.
        #[arg(long)]
        strategy: Option<OrderStrategy>,
        #[arg(long)]
        concurrency: Option<usize>,
        /// Skip cases already recorded in the results file.
        #[arg(long)]
        resume: bool,
    },
    /// Aggregate a results file into the accuracy report.
    Report,
    /// Check the provenance hashes of artifact files.
    Verify { files: Vec<PathBuf> },
}

impl Cli {
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let mut config = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        let paths = &mut config.paths;
        if let Some(p) = &self.lexicon {
            paths.lexicon = Some(p.clone());
        }
        for (flag, slot) in [
            (&self.bank, &mut paths.bank),
            (&self.suite, &mut paths.suite),
            (&self.results, &mut paths.results),
            (&self.report, &mut paths.report),
        ] {
            if let Some(p) = flag {
                *slot = p.clone();
            }
        }
        match &self.command {
            Command::GenBank { size: Some(size) } => config.generation.bank_size = *size,
            Command::BuildSuite {
                preset,
                n,
                fictional_words,
                nl_exclusion,
            } => {
                if let Some(p) = preset {
                    config.suite.preset = *p;
                }
                if let Some(n) = n {
                    config.suite.n = *n;
                }
                config.suite.fictional_words |= fictional_words;
                config.suite.nl_exclusion |= nl_exclusion;
            }
            Command::Run {
                client,
                strategy,
                concurrency,
                ..
            } => {
                if let Some(c) = client {
                    config.harness.client = *c;
                }
                if let Some(s) = strategy {
                    config.harness.run.strategy = *s;
                }
                if let Some(c) = concurrency {
                    config.harness.run.concurrency = *c;
                }
            }
            _ => {}
        }
        Ok(config)
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let config = cli.pipeline_config()?;
    match &cli.command {
        Command::GenBank { .. } => {
            let s = cmd_gen_bank(&config)?;
            println!(
                "bank\t{}\nexamples\t{}\nmean_source_len\t{:.2}\nmean_target_len\t{:.2}\nmax_depth\t{}",
                config.paths.bank.display(),
                s.size,
                s.mean_source_len,
                s.mean_target_len,
                s.max_depth
            );
        }
        Command::BuildSuite { .. } => {
            let suite = cmd_build_suite(&config)?;
            print!("{}", SuiteStatistics::of(&suite).to_tsv());
        }
        Command::Stats => print!("{}", cmd_stats(&config)?.to_tsv()),
        Command::Score {
            case_id,
            example_id,
        } => print!("{}", cmd_score(&config, *case_id, *example_id)?),
        Command::Run { resume, .. } => print!("{}", cmd_run(&config, *resume)?.to_tsv()),
        Command::Report => print!("{}", cmd_report(&config)?.to_tsv()),
        Command::Verify { files } => {
            let files = if files.is_empty() {
                [
                    &config.paths.bank,
                    &config.paths.suite,
                    &config.paths.results,
                ]
                .into_iter()
                .filter(|p| p.exists())
                .cloned()
                .collect()
            } else {
                files.clone()
            };
            if files.is_empty() {
                return Err(UsageError("no artifact files to verify".into()).into());
            }
            let mut ok = true;
            for f in &files {
                for (check, passed) in verify_artifact(f, &config)? {
                    println!(
                        "{}\t{check}\t{}",
                        f.display(),
                        if passed { "ok" } else { "MISMATCH" }
                    );
                    ok &= passed;
                }
            }
            if !ok {
                bail!("artifact verification failed");
            }
        }
    }
    Ok(())
}

/// Exit status for a failed command: 1 usage, 3 endpoint, 2 everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<ClientError>()) {
        3
    } else if err.chain().any(|e| e.is::<UsageError>()) {
        1
    } else {
        2
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
