//! Prompt assembly, completion clients, evaluation metrics and the batch
//! runner.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::labels::STRUCTURAL_TARGET_TOKENS;
use crate::grammar::{parse_sentence, Example, Grammar};
use crate::selector::ChosenExample;
use crate::suite::{bank_lookup, rename_target, Category, Suite, SuiteCase};

/// Decoding settings used for every completion request.
pub const TEMPERATURE: f32 = 0.0;
pub const MAX_TOKENS: u32 = 500;

pub const ENDPOINT_VAR: &str = "COFE_ENDPOINT";
pub const API_KEY_VAR: &str = "COFE_API_KEY";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid prompt template: {0}")]
    Template(String),
    #[error("case {case_id} references example {example_id}, which is not in the bank")]
    MissingExample { case_id: u32, example_id: u32 },
    #[error("results file {path}: {msg}")]
    Results { path: String, msg: String },
    #[error("i/o error on {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid run options: {0}")]
    Options(String),
    #[error(transparent)]
    Client(#[from] ClientError),
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("endpoint returned HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed completion response: {0}")]
    Response(String),
    #[error("cannot answer prompt: {0}")]
    Prompt(String),
}

impl ClientError {
    /// Whether retrying the same request may succeed.
    pub fn is_transient(&self) -> bool {
        match self {
            ClientError::Transport(_) => true,
            ClientError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

/// Placement of the chosen examples relative to the test input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderStrategy {
    /// Higher structural score sits closer to the test input.
    #[default]
    StructureCloser,
    /// Higher primitive score sits closer to the test input.
    AtomCloser,
    /// Seeded shuffle.
    Random(u64),
}

impl fmt::Display for OrderStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderStrategy::StructureCloser => f.write_str("structure-closer"),
            OrderStrategy::AtomCloser => f.write_str("atom-closer"),
            OrderStrategy::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

impl FromStr for OrderStrategy {
    type Err = String;

    /// Accepts `structure-closer`, `atom-closer`, `random` or `random:<seed>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structure-closer" => Ok(OrderStrategy::StructureCloser),
            "atom-closer" => Ok(OrderStrategy::AtomCloser),
            "random" => Ok(OrderStrategy::Random(0)),
            _ => s
                .strip_prefix("random:")
                .and_then(|seed| seed.parse().ok())
                .map(OrderStrategy::Random)
                .ok_or_else(|| format!("unknown order strategy {s:?}")),
        }
    }
}

/// Orders a selection for the prompt; the last element is placed next to
/// the test input. `stream` decorrelates random orders across cases.
pub fn order_examples(
    selection: &[ChosenExample],
    strategy: OrderStrategy,
    stream: u64,
) -> Vec<ChosenExample> {
    let mut ordered = selection.to_vec();
    match strategy {
        OrderStrategy::StructureCloser => ordered.sort_by_key(|c| (c.stru_score, c.id)),
        OrderStrategy::AtomCloser => ordered.sort_by_key(|c| (c.prim_score, c.id)),
        OrderStrategy::Random(seed) => {
            ordered.sort_by_key(|c| c.id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(stream);
            ordered.shuffle(&mut rng);
        }
    }
    ordered
}

/// Rendering conventions of a prompt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PromptTemplate {
    /// Token between an input and its output on one line.
    pub separator: String,
    /// Text between consecutive blocks; must contain a blank line.
    pub block_separator: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            separator: "=>".into(),
            block_separator: "\n\n".into(),
        }
    }
}

impl PromptTemplate {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.separator.trim().is_empty() || self.separator.contains('\n') {
            return Err(HarnessError::Template(
                "the input/output separator must be visible text on one line".into(),
            ));
        }
        if !self.block_separator.contains("\n\n") {
            return Err(HarnessError::Template(
                "the block separator must contain a blank line".into(),
            ));
        }
        Ok(())
    }

    pub fn example_line(&self, source: &str, target: &str) -> String {
        format!("{source} {} {target}", self.separator)
    }

    pub fn query_line(&self, source: &str) -> String {
        format!("{source} {}", self.separator)
    }

    /// Splits a rendered example line back into input and output.
    pub fn split_line<'a>(&self, line: &'a str) -> Option<(&'a str, &'a str)> {
        let (source, target) = line.split_once(&format!(" {} ", self.separator))?;
        Some((source, target))
    }

    /// Input of a rendered query line.
    pub fn query_input<'a>(&self, line: &'a str) -> Option<&'a str> {
        line.trim_end()
            .strip_suffix(self.separator.as_str())
            .map(str::trim_end)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptExample {
    pub id: u32,
    pub source: String,
    pub target: String,
}

/// An ordered in-context prompt.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub examples: Vec<PromptExample>,
    pub input: String,
    pub template: PromptTemplate,
    pub text: String,
}

impl Prompt {
    pub fn new(
        examples: Vec<PromptExample>,
        input: String,
        template: PromptTemplate,
    ) -> Result<Prompt, HarnessError> {
        template.validate()?;
        let mut prompt = Prompt {
            examples,
            input,
            template,
            text: String::new(),
        };
        prompt.text = prompt.render();
        Ok(prompt)
    }

    pub fn render(&self) -> String {
        let mut blocks: Vec<String> = self
            .examples
            .iter()
            .map(|e| self.template.example_line(&e.source, &e.target))
            .collect();
        blocks.push(self.template.query_line(&self.input));
        blocks.join(&self.template.block_separator)
    }
}

/// Renders a case's selection in the given order. Example targets are
/// passed through the suite's word map when one is present.
pub fn assemble_prompt(
    case: &SuiteCase,
    bank: &HashMap<u32, &Example>,
    word_map: Option<&BTreeMap<String, String>>,
    strategy: OrderStrategy,
    template: &PromptTemplate,
) -> Result<Prompt, HarnessError> {
    let examples = order_examples(&case.selection, strategy, case.case.case_id as u64)
        .into_iter()
        .map(|c| {
            let e = bank.get(&c.id).ok_or(HarnessError::MissingExample {
                case_id: case.case.case_id,
                example_id: c.id,
            })?;
            Ok(PromptExample {
                id: e.id,
                source: e.source.clone(),
                target: match word_map {
                    Some(map) => rename_target(&e.target, map),
                    None => e.target.clone(),
                },
            })
        })
        .collect::<Result<_, HarnessError>>()?;
    Prompt::new(examples, case.case.source.clone(), template.clone())
}

/// The completion up to its first blank line, whitespace collapsed.
pub fn normalize_prediction(prediction: &str) -> String {
    prediction
        .trim_start()
        .lines()
        .take_while(|l| !l.trim().is_empty())
        .flat_map(str::split_whitespace)
        .collect::<Vec<_>>()
        .join(" ")
}

fn normalize_gold(gold: &str) -> String {
    gold.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn evaluate_exact(prediction: &str, gold: &str) -> bool {
    normalize_prediction(prediction) == normalize_gold(gold)
}

fn project_structure(text: &str) -> String {
    text.chars()
        .filter(|c| matches!(c, '(' | ')' | ','))
        .collect()
}

/// Equality after keeping only parentheses and commas.
pub fn structural_accuracy(prediction: &str, gold: &str) -> bool {
    project_structure(&normalize_prediction(prediction)) == project_structure(gold)
}

/// Fraction of distinct gold content tokens present in the prediction.
pub fn word_coverage(prediction: &str, gold: &str) -> f64 {
    let gold: BTreeSet<&str> = gold
        .split_whitespace()
        .filter(|t| !STRUCTURAL_TARGET_TOKENS.contains(t))
        .collect();
    if gold.is_empty() {
        return 1.0;
    }
    let normalized = normalize_prediction(prediction);
    let predicted: BTreeSet<&str> = normalized.split_whitespace().collect();
    gold.iter().filter(|t| predicted.contains(*t)).count() as f64 / gold.len() as f64
}

/// A text-completion backend. Implementations must tolerate concurrent calls.
pub trait ModelClient: Sync {
    fn complete(
        &self,
        prompt: &str,
        max_tokens: u32,
        temperature: f32,
    ) -> Result<String, ClientError>;
}

/// A generic HTTP completion endpoint taking `{prompt, max_tokens, temperature}`.
pub struct RemoteClient {
    endpoint: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    max_tokens: u32,
    temperature: f32,
}

impl RemoteClient {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>, timeout: Duration) -> Self {
        RemoteClient {
            endpoint: endpoint.into(),
            api_key,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }

    /// Reads the endpoint and optional key from the environment.
    pub fn from_env(timeout: Duration) -> Result<Self, ClientError> {
        let endpoint =
            std::env::var(ENDPOINT_VAR).map_err(|_| ClientError::MissingEnv(ENDPOINT_VAR))?;
        let api_key = std::env::var(API_KEY_VAR).ok().filter(|k| !k.is_empty());
        Ok(RemoteClient::new(endpoint, api_key, timeout))
    }
}

/// Pulls the completion text out of the common response shapes.
fn completion_text(body: &serde_json::Value) -> Option<String> {
    let direct = ["completion", "text", "output"]
        .iter()
        .find_map(|k| body.get(k).and_then(|v| v.as_str()));
    let choice = || {
        let first = body.get("choices")?.get(0)?;
        first
            .get("text")
            .or_else(|| first.get("message")?.get("content"))?
            .as_str()
    };
    direct.or_else(choice).map(String::from)
}

impl ModelClient for RemoteClient {
    fn complete(
        &self,
        prompt: &str,
        max_tokens: u32,
        temperature: f32,
    ) -> Result<String, ClientError> {
        let mut request = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = request.send_json(CompletionRequest {
            prompt,
            max_tokens,
            temperature,
        });
        let body: serde_json::Value = match response {
            Ok(r) => r
                .into_json()
                .map_err(|e| ClientError::Response(e.to_string()))?,
            Err(ureq::Error::Status(status, r)) => {
                return Err(ClientError::Status {
                    status,
                    body: r.into_string().unwrap_or_default(),
                })
            }
            Err(e) => return Err(ClientError::Transport(e.to_string())),
        };
        completion_text(&body).ok_or_else(|| ClientError::Response(body.to_string()))
    }
}

/// Parses the test input of the prompt and emits its gold logical form.
pub struct PerfectOracle {
    grammar: Grammar,
    template: PromptTemplate,
    word_map: Option<BTreeMap<String, String>>,
}

impl PerfectOracle {
    pub fn new(
        grammar: Grammar,
        template: PromptTemplate,
        word_map: Option<BTreeMap<String, String>>,
    ) -> Self {
        PerfectOracle {
            grammar,
            template,
            word_map,
        }
    }
}

impl ModelClient for PerfectOracle {
    fn complete(&self, prompt: &str, _: u32, _: f32) -> Result<String, ClientError> {
        let line = prompt.lines().last().unwrap_or_default();
        let input = self
            .template
            .query_input(line)
            .ok_or_else(|| ClientError::Prompt("last line is not a query".into()))?;
        let source = parse_sentence(input).map_err(|e| ClientError::Prompt(e.to_string()))?;
        let target = self
            .grammar
            .derive_target(&source)
            .map_err(|e| ClientError::Prompt(e.to_string()))?;
        let text = target.text();
        Ok(match &self.word_map {
            Some(map) => rename_target(&text, map),
            None => text,
        })
    }
}

/// Echoes the output of the example placed next to the test input.
pub struct NearestCopy {
    template: PromptTemplate,
}

impl NearestCopy {
    pub fn new(template: PromptTemplate) -> Self {
        NearestCopy { template }
    }
}

impl ModelClient for NearestCopy {
    fn complete(&self, prompt: &str, _: u32, _: f32) -> Result<String, ClientError> {
        let nearest = prompt
            .lines()
            .rev()
            .skip(1)
            .find_map(|l| self.template.split_line(l));
        Ok(nearest
            .map(|(_, target)| target.to_string())
            .unwrap_or_default())
    }
}

/// Outcome of one case; `error` is set when no completion was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub case_id: u32,
    pub prediction: String,
    pub exact: bool,
    pub structural: bool,
    pub coverage: f64,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CaseResult {
    pub fn scored(case_id: u32, prediction: String, gold: &str, latency_ms: u64) -> Self {
        CaseResult {
            case_id,
            exact: evaluate_exact(&prediction, gold),
            structural: structural_accuracy(&prediction, gold),
            coverage: word_coverage(&prediction, gold),
            prediction,
            latency_ms,
            error: None,
        }
    }

    pub fn failed(case_id: u32, error: String, latency_ms: u64) -> Self {
        CaseResult {
            case_id,
            prediction: String::new(),
            exact: false,
            structural: false,
            coverage: 0.0,
            latency_ms,
            error: Some(error),
        }
    }

    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Aggregates over the successfully evaluated cases of one category
/// (`None` for all categories).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub category: Option<Category>,
    pub cases: usize,
    pub failed: usize,
    pub exact: f64,
    pub structural: f64,
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub records: Vec<CaseResult>,
}

impl EvalReport {
    /// Aggregates per-case records; the latest record of a case wins and
    /// records of unknown cases are ignored.
    pub fn from_records(suite: &Suite, records: &[CaseResult]) -> EvalReport {
        let category: HashMap<u32, Category> = suite
            .cases
            .iter()
            .map(|c| (c.case.case_id, c.case.category))
            .collect();
        let mut latest: BTreeMap<u32, &CaseResult> = BTreeMap::new();
        for r in records.iter().filter(|r| category.contains_key(&r.case_id)) {
            latest.insert(r.case_id, r);
        }
        let records: Vec<CaseResult> = latest.into_values().cloned().collect();
        let row = |cat: Option<Category>| {
            let in_cat: Vec<&CaseResult> = records
                .iter()
                .filter(|r| cat.is_none() || cat == category.get(&r.case_id).copied())
                .collect();
            let ok: Vec<&&CaseResult> = in_cat.iter().filter(|r| !r.is_failed()).collect();
            let mean = |f: &dyn Fn(&CaseResult) -> f64| {
                if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            EvalRow {
                category: cat,
                cases: ok.len(),
                failed: in_cat.len() - ok.len(),
                exact: mean(&|r| r.exact as u8 as f64),
                structural: mean(&|r| r.structural as u8 as f64),
                coverage: mean(&|r| r.coverage),
            }
        };
        let mut rows: Vec<EvalRow> = Category::ALL
            .into_iter()
            .filter(|c| suite.cases.iter().any(|s| s.case.category == *c))
            .map(|c| row(Some(c)))
            .collect();
        rows.push(row(None));
        EvalReport { rows, records }
    }

    pub fn row(&self, category: Option<Category>) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("category\tcases\tfailed\texact\tstructural\tword_coverage\n");
        for r in &self.rows {
            let name = r.category.map_or("Overall", |c| c.name());
            let _ = writeln!(
                out,
                "{name}\t{}\t{}\t{:.1}\t{:.1}\t{:.3}",
                r.cases,
                r.failed,
                100.0 * r.exact,
                100.0 * r.structural,
                r.coverage
            );
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    pub strategy: OrderStrategy,
    pub concurrency: usize,
    pub template: PromptTemplate,
    /// Attempts per case for transient client errors.
    pub retries: u32,
    pub backoff_ms: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            strategy: OrderStrategy::StructureCloser,
            concurrency: 4,
            template: PromptTemplate::default(),
            retries: 3,
            backoff_ms: 500,
        }
    }
}

/// Where per-case records go while a run progresses.
pub struct ResultsSink<'a> {
    pub path: &'a Path,
    /// Skip cases already recorded without error.
    pub resume: bool,
    /// First line written to a fresh file.
    pub header: Option<String>,
}

/// Reads the records of a results file, skipping header lines.
pub fn read_results(path: &Path) -> Result<Vec<CaseResult>, HarnessError> {
    let file = File::open(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| HarnessError::Results {
                path: path.display().to_string(),
                msg: format!("line {}: {e}", i + 1),
            })?;
        if value.get("case_id").is_none() {
            continue;
        }
        out.push(
            serde_json::from_value(value).map_err(|e| HarnessError::Results {
                path: path.display().to_string(),
                msg: format!("line {}: {e}", i + 1),
            })?,
        );
    }
    Ok(out)
}

fn call_with_retry(
    client: &dyn ModelClient,
    prompt: &str,
    options: &RunOptions,
) -> Result<String, ClientError> {
    let mut attempt = 0;
    loop {
        match client.complete(prompt, MAX_TOKENS, TEMPERATURE) {
            Err(e) if e.is_transient() && attempt + 1 < options.retries.max(1) => {
                std::thread::sleep(Duration::from_millis(options.backoff_ms << attempt));
                attempt += 1;
            }
            other => return other,
        }
    }
}

fn evaluate_case(
    case: &SuiteCase,
    bank: &HashMap<u32, &Example>,
    word_map: Option<&BTreeMap<String, String>>,
    client: &dyn ModelClient,
    options: &RunOptions,
) -> Result<CaseResult, HarnessError> {
    let prompt = assemble_prompt(case, bank, word_map, options.strategy, &options.template)?;
    let start = Instant::now();
    let outcome = call_with_retry(client, &prompt.text, options);
    let latency_ms = start.elapsed().as_millis() as u64;
    Ok(match outcome {
        Ok(prediction) => {
            CaseResult::scored(case.case.case_id, prediction, &case.case.target, latency_ms)
        }
        Err(e) => CaseResult::failed(case.case.case_id, e.to_string(), latency_ms),
    })
}

/// Evaluates every case with at most `concurrency` requests in flight.
/// Records are appended to the sink in case-id order, batch by batch, so an
/// interrupted run can be resumed.
pub fn run_suite(
    suite: &Suite,
    bank: &[Example],
    client: &dyn ModelClient,
    options: &RunOptions,
    sink: Option<ResultsSink>,
) -> Result<EvalReport, HarnessError> {
    options.template.validate()?;
    if options.concurrency == 0 {
        return Err(HarnessError::Options(
            "concurrency must be at least 1".into(),
        ));
    }
    let by_id = bank_lookup(bank);
    let word_map = suite.word_map.as_ref();

    let mut records = Vec::new();
    let mut writer = None;
    if let Some(sink) = &sink {
        let io = |source| HarnessError::Io {
            path: sink.path.display().to_string(),
            source,
        };
        let existing = sink.resume && sink.path.exists();
        if existing {
            records = read_results(sink.path)?;
        }
        let mut file = OpenOptions::new()
            .create(true)
            .write(true)
            .append(existing)
            .truncate(!existing)
            .open(sink.path)
            .map_err(io)?;
        if !existing {
            if let Some(header) = &sink.header {
                writeln!(file, "{header}").map_err(io)?;
            }
        }
        writer = Some((file, sink.path.to_path_buf()));
    }

    let done: BTreeSet<u32> = records
        .iter()
        .filter(|r| !r.is_failed())
        .map(|r| r.case_id)
        .collect();
    let mut pending: Vec<&SuiteCase> = suite
        .cases
        .iter()
        .filter(|c| !done.contains(&c.case.case_id))
        .collect();
    pending.sort_by_key(|c| c.case.case_id);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.concurrency)
        .build()
        .map_err(|e| HarnessError::Options(e.to_string()))?;
    for batch in pending.chunks(options.concurrency * 8) {
        let results: Vec<CaseResult> = pool.install(|| {
            batch
                .par_iter()
                .map(|c| evaluate_case(c, &by_id, word_map, client, options))
                .collect::<Result<_, _>>()
        })?;
        if let Some((file, path)) = &mut writer {
            write_records(file, path, &results)?;
        }
        records.extend(results);
    }
    Ok(EvalReport::from_records(suite, &records))
}

fn write_records(file: &mut File, path: &Path, records: &[CaseResult]) -> Result<(), HarnessError> {
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(r).expect("records serialize"));
        buf.push('\n');
    }
    file.write_all(buf.as_bytes())
        .and_then(|_| file.flush())
        .map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::Score;

    fn chosen(id: u32, prim: f64, stru: f64) -> ChosenExample {
        ChosenExample {
            id,
            step: 0,
            prim_score: Score::from_f64(prim),
            stru_score: Score::from_f64(stru),
            comp_penalty: Score::ZERO,
            nonpositive: false,
        }
    }

    fn ids(v: &[ChosenExample]) -> Vec<u32> {
        v.iter().map(|c| c.id).collect()
    }

    #[test]
    fn equal_scores_keep_id_order() {
        let sel = vec![
            chosen(7, 1.0, 1.0),
            chosen(2, 1.0, 1.0),
            chosen(5, 1.0, 1.0),
        ];
        for s in [OrderStrategy::StructureCloser, OrderStrategy::AtomCloser] {
            assert_eq!(ids(&order_examples(&sel, s, 0)), vec![2, 5, 7]);
        }
    }

    #[test]
    fn structure_closer_puts_best_last() {
        let sel = vec![
            chosen(1, 0.0, 5.0),
            chosen(2, 0.0, 1.0),
            chosen(3, 0.0, 3.0),
        ];
        let ordered = order_examples(&sel, OrderStrategy::StructureCloser, 0);
        assert_eq!(ids(&ordered), vec![2, 3, 1]);
        let atom = vec![
            chosen(1, 2.0, 0.0),
            chosen(2, 9.0, 0.0),
            chosen(3, 4.0, 0.0),
        ];
        assert_eq!(
            ids(&order_examples(&atom, OrderStrategy::AtomCloser, 0)),
            vec![1, 3, 2]
        );
    }

    #[test]
    fn random_order_is_reproducible_permutation() {
        let sel: Vec<_> = (0..10).map(|i| chosen(i, i as f64, 0.0)).collect();
        let a = order_examples(&sel, OrderStrategy::Random(3), 11);
        let b = order_examples(&sel, OrderStrategy::Random(3), 11);
        assert_eq!(a, b);
        let mut sorted = ids(&a);
        sorted.sort();
        assert_eq!(sorted, ids(&sel));
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in [
            OrderStrategy::StructureCloser,
            OrderStrategy::AtomCloser,
            OrderStrategy::Random(42),
        ] {
            assert_eq!(s.to_string().parse::<OrderStrategy>().unwrap(), s);
        }
        assert!("closest".parse::<OrderStrategy>().is_err());
    }

    fn example(id: u32, source: &str, target: &str) -> PromptExample {
        PromptExample {
            id,
            source: source.into(),
            target: target.into(),
        }
    }

    #[test]
    fn prompt_layout() {
        let empty =
            Prompt::new(vec![], "the baby slept".into(), PromptTemplate::default()).unwrap();
        assert_eq!(empty.text, "the baby slept =>");

        let examples: Vec<_> = (0..10)
            .map(|i| example(i, &format!("s{i}"), &format!("T{i}")))
            .collect();
        let p = Prompt::new(examples, "x".into(), PromptTemplate::default()).unwrap();
        let blocks: Vec<&str> = p.text.split("\n\n").collect();
        assert_eq!(blocks.len(), 11);
        assert_eq!(blocks[0], "s0 => T0");
        assert_eq!(blocks[10], "x =>");
        assert_eq!(p.text.matches("x =>").count(), 1);

        let json = serde_json::to_string(&p).unwrap();
        let back: Prompt = serde_json::from_str(&json).unwrap();
        assert_eq!(back.render(), p.text);
    }

    #[test]
    fn template_without_separators_is_rejected() {
        let no_sep = PromptTemplate {
            separator: " ".into(),
            ..PromptTemplate::default()
        };
        assert!(matches!(no_sep.validate(), Err(HarnessError::Template(_))));
        let no_block = PromptTemplate {
            block_separator: "\n".into(),
            ..PromptTemplate::default()
        };
        assert!(Prompt::new(vec![], "x".into(), no_block).is_err());
    }

    const GOLD: &str = "OBSERVE ( JACKSON , BABY , NONE )";

    #[test]
    fn exact_match() {
        assert!(evaluate_exact(GOLD, GOLD));
        assert!(evaluate_exact("OBSERVE  (  JACKSON ,  BABY , NONE )", GOLD));
        assert!(evaluate_exact(
            &format!(" {GOLD}\n\nthe boy slept => SLEEP ( BOY , NONE , NONE )"),
            GOLD
        ));
        assert!(!evaluate_exact(&format!("{GOLD} {GOLD}"), GOLD));
        assert!(!evaluate_exact(&format!("{GOLD}\nthe boy slept =>"), GOLD));
    }

    #[test]
    fn structural_projection() {
        assert!(structural_accuracy("A ( B , C )", "X ( Y , Z )"));
        assert!(!structural_accuracy("A ( B , C", "X ( Y , Z )"));
    }

    #[test]
    fn coverage_of_gold_words() {
        assert_eq!(word_coverage(GOLD, GOLD), 1.0);
        assert_eq!(word_coverage("", GOLD), 0.0);
        assert_eq!(word_coverage("A B C", "A ( B , C , D )"), 0.75);
        assert_eq!(word_coverage("A A B", "A ( A , B )"), 1.0);
    }

    #[test]
    fn local_clients() {
        let template = PromptTemplate::default();
        let p = Prompt::new(
            vec![
                example(1, "Emma slept", "SLEEP ( EMMA , NONE , NONE )"),
                example(2, "the boy slept", "SLEEP ( BOY , NONE , NONE )"),
            ],
            "Jackson observed a baby".into(),
            template.clone(),
        )
        .unwrap();
        let near = NearestCopy::new(template.clone());
        assert_eq!(
            near.complete(&p.text, MAX_TOKENS, TEMPERATURE).unwrap(),
            "SLEEP ( BOY , NONE , NONE )"
        );
        let oracle = PerfectOracle::new(
            Grammar::new(crate::grammar::Lexicon::builtin()),
            template.clone(),
            None,
        );
        assert_eq!(
            oracle.complete(&p.text, MAX_TOKENS, TEMPERATURE).unwrap(),
            GOLD
        );
        let map = BTreeMap::from([("BABY".to_string(), "QOXZ".to_string())]);
        let renamed = PerfectOracle::new(
            Grammar::new(crate::grammar::Lexicon::builtin()),
            template,
            Some(map),
        );
        assert_eq!(
            renamed.complete(&p.text, MAX_TOKENS, TEMPERATURE).unwrap(),
            "OBSERVE ( JACKSON , QOXZ , NONE )"
        );
    }

    #[test]
    fn response_shapes() {
        let shapes = [
            serde_json::json!({"completion": "A"}),
            serde_json::json!({"text": "A"}),
            serde_json::json!({"choices": [{"text": "A"}]}),
            serde_json::json!({"choices": [{"message": {"content": "A"}}]}),
        ];
        for s in shapes {
            assert_eq!(completion_text(&s).as_deref(), Some("A"));
        }
        assert_eq!(completion_text(&serde_json::json!({"data": 1})), None);
    }

    #[test]
    fn transient_errors() {
        assert!(ClientError::Transport("reset".into()).is_transient());
        assert!(ClientError::Status {
            status: 503,
            body: String::new()
        }
        .is_transient());
        assert!(!ClientError::Status {
            status: 401,
            body: String::new()
        }
        .is_transient());
        assert!(!ClientError::MissingEnv(ENDPOINT_VAR).is_transient());
    }
}
