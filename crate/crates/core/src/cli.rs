//! Batch workflows behind the `discotrace` binary.
//!
//! Exit codes: 0 success (including degraded runs, which also write a
//! diagnostics file), 1 input or usage error, 2 backend failure.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::community;
use crate::config::{ConfigError, PipelineConfig};
use crate::corpus::{
    filter::check_post, filter_comments, read_bodies, read_corpus, sample_questions, write_bodies,
    write_corpus, AnswerRecord, CorpusError, FilterRule, QuestionRecord, RawPost, Record, SegmentRecord,
};
use crate::gateway::{build_mimic_prompt, ChatBackend, GatewayError};
use crate::interpretation::{deduplicate, generate_raw, InterpretationError, InterpretationSpace};
use crate::ontology::Ontology;
use crate::pipeline::{trace_answer, DiscoTrace, TraceInput};
use crate::segmentation::segment_answer;
use crate::stats::{self, LabelSpace, Smoothing, StatsError, Vocabulary};

const SCHEMAS: &str = "\
JSONL inputs, one object per line, optional \"schema_version\": 1:
  raw posts   {post_id, title, score, created_at, community, profanity_prob?, comments:[{comment_id, body, score, parent_id?}]}
  questions   {post_id, title, community}
  answers     {answer_id, question_id, text, rst_tree}
              rst_tree node: {relation, nuclearity: NN|NS|SN, left, right} or leaf {edu}
  spaces      {question_id, threshold, members:[{id, text, sources}]}
  traces      {answer_id, question_id, steps:[{act_id, interpretation_id?, edu_indices}], diagnostics}
Unknown fields are carried through unchanged.";

#[derive(Debug, Parser)]
#[command(name = "discotrace", version, about = "Discourse-act traces of long-form answers", after_help = SCHEMAS)]
pub struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Use this backend profile for every model role.
    #[arg(long, global = true)]
    pub backend_profile: Option<String>,
    #[arg(long, global = true)]
    pub max_in_flight: Option<usize>,
    /// mle | add_lambda | add_lambda:<lambda>
    #[arg(long, global = true)]
    pub smoothing: Option<Smoothing>,
    #[arg(long, global = true)]
    pub dedup_threshold: Option<f64>,
    /// Model act families instead of individual acts.
    #[arg(long, global = true)]
    pub family_level: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the title and comment filters to raw posts.
    Filter {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Rejection tally as JSON; printed to stderr when absent.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Uniformly sample records without replacement.
    Sample {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(short = 'n', long)]
        n: usize,
    },
    /// Split answers into action segments.
    Segment {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build interpretation spaces for questions.
    Interp {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Tag answers with acts and pair them with interpretations.
    Trace {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        questions: PathBuf,
        #[arg(long)]
        spaces: Option<PathBuf>,
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Fit a bigram model on traces; optionally report perplexities.
    Model {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, num_args = 1..)]
        eval: Vec<PathBuf>,
    },
    /// Cross-perplexity matrix between trace corpora.
    Compare {
        #[arg(long, num_args = 1.., required = true)]
        corpora: Vec<PathBuf>,
        /// Evaluation corpora; defaults to the training corpora.
        #[arg(long, num_args = 1..)]
        eval: Vec<PathBuf>,
        /// `.json` for JSON, anything else for CSV; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit train,eval,perplexity rows instead of a grid.
        #[arg(long)]
        long: bool,
    },
    /// Interpretation coverage, dedication and comparisons.
    Metrics {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        spaces: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Model traces of the same questions, for overanswering bins.
        #[arg(long)]
        model_traces: Option<PathBuf>,
        /// Second corpus for per-act proportion tests.
        #[arg(long)]
        proportions_against: Option<PathBuf>,
        /// Second annotation of the same answers, for EDU-level kappa.
        #[arg(long)]
        agreement_with: Option<PathBuf>,
    },
    /// Generate answers written as a community member would.
    MimicAnswer {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Backend(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Input(_) => 1,
            Failure::Backend(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Backend(m) => write!(f, "backend failure: {m}"),
        }
    }
}

macro_rules! input_error {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Input(e.to_string())
            }
        }
    )*};
}
input_error!(CorpusError, ConfigError, StatsError, std::io::Error, serde_json::Error);

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => {
                    eprintln!("\n{SCHEMAS}");
                    1
                }
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("discotrace: {f}");
            f.exit_code()
        }
    }
}

/// Loads the configuration and applies flag overrides; flags win.
pub fn resolve_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(p) = &cli.backend_profile {
        config.use_profile(p)?;
    }
    if let Some(m) = cli.max_in_flight {
        config.max_in_flight = m;
    }
    if let Some(s) = cli.smoothing {
        config.smoothing = s;
    }
    if let Some(t) = cli.dedup_threshold {
        config.dedup_threshold = t;
    }
    if cli.family_level {
        config.family_level = true;
    }
    config.validate()?;
    Ok(config)
}

pub fn execute(cli: Cli) -> Outcome {
    let config = resolve_config(&cli)?;
    match cli.command {
        Command::Filter { input, out, report } => cmd_filter(&config, &input, &out, report.as_deref()),
        Command::Sample { input, out, n } => cmd_sample(&config, &input, &out, n),
        Command::Segment { input, out } => cmd_segment(&config, &input, &out),
        Command::Interp { input, out, diagnostics } => cmd_interp(&config, &input, &out, diagnostics.as_deref()),
        Command::Trace {
            input,
            out,
            questions,
            spaces,
            diagnostics,
        } => cmd_trace(&config, &input, &out, &questions, spaces.as_deref(), diagnostics.as_deref()),
        Command::Model { input, out, eval } => cmd_model(&config, &input, &out, &eval),
        Command::Compare { corpora, eval, out, long } => cmd_compare(&config, &corpora, &eval, out.as_deref(), long),
        Command::Metrics {
            input,
            spaces,
            out,
            model_traces,
            proportions_against,
            agreement_with,
        } => cmd_metrics(
            &config,
            &input,
            &spaces,
            &out,
            model_traces.as_deref(),
            proportions_against.as_deref(),
            agreement_with.as_deref(),
        ),
        Command::MimicAnswer { input, out } => cmd_mimic(&config, &input, &out),
    }
}

/// Applies `f` to every item on at most `workers` threads; results keep
/// input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<R>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                *slots[i].lock().expect("slot lock") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}

fn write_json(path: &Path, value: &impl Serialize) -> Outcome {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn default_diagnostics_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".diagnostics.jsonl");
    out.with_file_name(name)
}

fn write_diagnostics(path: &Path, rows: &[Value]) -> Outcome {
    let records: Vec<Record<Value>> = rows.iter().cloned().map(Record::new).collect();
    write_corpus(path, &records)?;
    eprintln!("discotrace: {} degradations recorded in {}", rows.len(), path.display());
    Ok(())
}

fn cmd_filter(config: &PipelineConfig, input: &Path, out: &Path, report: Option<&Path>) -> Outcome {
    let records: Vec<Record<RawPost>> = read_corpus(input)?;
    let cfg = &config.filter;
    let mut tally: BTreeMap<FilterRule, usize> = FilterRule::TITLE_RULES
        .iter()
        .chain(&[FilterRule::TooFewComments, FilterRule::TooManyComments])
        .map(|r| (*r, 0))
        .collect();
    let mut kept = Vec::new();
    let mut unscored = Vec::new();
    for record in &records {
        let verdict = match check_post(&record.body, cfg) {
            Some(rule) => Err(rule),
            None => filter_comments(&record.body, cfg)?,
        };
        match verdict {
            Ok(post) => {
                if post.profanity_prob.is_none() {
                    unscored.push(post.post_id.clone());
                }
                kept.push(Record {
                    body: post,
                    ..record.clone()
                });
            }
            Err(rule) => *tally.entry(rule).or_default() += 1,
        }
    }
    write_corpus(out, &kept)?;
    let summary = json!({
        "input": records.len(),
        "kept": kept.len(),
        "rejected": tally,
        "unscored_kept": unscored,
    });
    match report {
        Some(p) => write_json(p, &summary)?,
        None => eprintln!("{}", serde_json::to_string_pretty(&summary)?),
    }
    Ok(())
}

fn cmd_sample(config: &PipelineConfig, input: &Path, out: &Path, n: usize) -> Outcome {
    let records: Vec<Record<Map<String, Value>>> = read_corpus(input)?;
    let picked = sample_questions(&records, n, config.seed)?;
    write_corpus(out, &picked)?;
    Ok(())
}

fn cmd_segment(config: &PipelineConfig, input: &Path, out: &Path) -> Outcome {
    let answers: Vec<AnswerRecord> = read_bodies(input)?;
    let records: Vec<SegmentRecord> = answers
        .iter()
        .map(|a| SegmentRecord {
            answer_id: a.answer_id.clone(),
            question_id: a.question_id.clone(),
            segments: segment_answer(&a.answer_id, &a.rst_tree, &config.boundaries),
        })
        .collect();
    write_bodies(out, &records)?;
    Ok(())
}

fn backend_failure(e: impl std::fmt::Display) -> Failure {
    Failure::Backend(e.to_string())
}

fn cmd_interp(config: &PipelineConfig, input: &Path, out: &Path, diagnostics: Option<&Path>) -> Outcome {
    let questions: Vec<QuestionRecord> = read_bodies(input)?;
    let generators = config.generator_backends()?;
    let embedder = config.role_backend("embedder")?;
    let gens: Vec<&dyn ChatBackend> = generators.iter().map(|b| b as &dyn ChatBackend).collect();
    let results = parallel_map(&questions, config.max_in_flight, |q| {
        let context = community::description(&q.community).unwrap_or("");
        let (raw, warnings) = generate_raw(&q.title, context, &gens)?;
        let space = deduplicate(&q.post_id, &raw, &embedder, config.dedup_threshold)?;
        Ok::<_, InterpretationError>((space, warnings))
    });
    let mut spaces = Vec::with_capacity(questions.len());
    let mut diag = Vec::new();
    for (q, r) in questions.iter().zip(results) {
        let (space, warnings) = r.map_err(|e| backend_failure(format!("question {}: {e}", q.post_id)))?;
        diag.extend(warnings.into_iter().map(|w| {
            json!({"question_id": q.post_id, "generator": w.generator, "message": w.message})
        }));
        spaces.push(space);
    }
    write_bodies(out, &spaces)?;
    if !diag.is_empty() {
        let path = diagnostics.map(Path::to_path_buf).unwrap_or_else(|| default_diagnostics_path(out));
        write_diagnostics(&path, &diag)?;
    }
    Ok(())
}

fn load_spaces(path: &Path) -> Result<BTreeMap<String, InterpretationSpace>, Failure> {
    let spaces: Vec<InterpretationSpace> = read_bodies(path)?;
    Ok(spaces.into_iter().map(|s| (s.question_id.clone(), s)).collect())
}

/// Traces answers with the configured labelers; output order follows input.
pub fn trace_corpus(
    config: &PipelineConfig,
    ontology: &Ontology,
    answers: &[AnswerRecord],
    questions: &HashMap<String, String>,
    spaces: Option<&BTreeMap<String, InterpretationSpace>>,
    act_backend: &dyn ChatBackend,
    label_backend: &dyn ChatBackend,
) -> Result<Vec<DiscoTrace>, Failure> {
    for a in answers {
        if !questions.contains_key(&a.question_id) {
            return Err(Failure::Input(format!(
                "answer {} refers to unknown question {}",
                a.answer_id, a.question_id
            )));
        }
    }
    Ok(parallel_map(answers, config.max_in_flight, |a| {
        let space = spaces.and_then(|s| {
            let found = s.get(&a.question_id);
            if found.is_none() {
                log::warn!("no interpretation space for question {}", a.question_id);
            }
            found
        });
        let input = TraceInput {
            answer_id: &a.answer_id,
            question_id: &a.question_id,
            question: &questions[&a.question_id],
            answer_text: &a.text,
            tree: &a.rst_tree,
        };
        trace_answer(&input, space, ontology, &config.boundaries, act_backend, label_backend)
    }))
}

fn cmd_trace(
    config: &PipelineConfig,
    input: &Path,
    out: &Path,
    questions: &Path,
    spaces: Option<&Path>,
    diagnostics: Option<&Path>,
) -> Outcome {
    let ontology = config.load_ontology()?;
    let answers: Vec<AnswerRecord> = read_bodies(input)?;
    let questions: HashMap<String, String> = read_bodies::<QuestionRecord>(questions)?
        .into_iter()
        .map(|q| (q.post_id, q.title))
        .collect();
    let spaces = spaces.map(load_spaces).transpose()?;
    let act = config.role_backend("act_labeler")?;
    let label = match config.roles.interpretation_labeler {
        Some(_) => Some(config.role_backend("interpretation_labeler")?),
        None => None,
    };
    if spaces.is_some() && label.is_none() {
        return Err(Failure::Input("--spaces given but no interpretation_labeler configured".into()));
    }
    let label_ref: &dyn ChatBackend = label.as_ref().map(|b| b as &dyn ChatBackend).unwrap_or(&act);
    let traces = trace_corpus(config, &ontology, &answers, &questions, spaces.as_ref(), &act, label_ref)?;
    write_bodies(out, &traces)?;
    let diag: Vec<Value> = traces
        .iter()
        .flat_map(|t| {
            t.diagnostics.iter().map(move |d| {
                let mut v = serde_json::to_value(d).expect("diagnostic serializes");
                v.as_object_mut()
                    .expect("object")
                    .insert("answer_id".into(), Value::String(t.answer_id.clone()));
                v
            })
        })
        .collect();
    if !diag.is_empty() {
        let path = diagnostics.map(Path::to_path_buf).unwrap_or_else(|| default_diagnostics_path(out));
        write_diagnostics(&path, &diag)?;
    }
    Ok(())
}

fn corpus_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn load_sequences(config: &PipelineConfig, ontology: &Ontology, path: &Path) -> Result<(String, Vec<Vec<String>>), Failure> {
    let traces: Vec<DiscoTrace> = read_bodies(path)?;
    Ok((corpus_name(path), stats::corpus_sequences(&traces, ontology, config.family_level)))
}

fn cmd_model(config: &PipelineConfig, input: &Path, out: &Path, eval: &[PathBuf]) -> Outcome {
    let ontology = config.load_ontology()?;
    let (_, seqs) = load_sequences(config, &ontology, input)?;
    let vocab = Vocabulary::from_ontology(&ontology, config.family_level);
    let model = stats::BigramModel::fit(&seqs, vocab, config.smoothing)?;
    write_json(out, &model)?;
    for path in eval {
        let (name, seqs) = load_sequences(config, &ontology, path)?;
        let pp = stats::perplexity(&model, &seqs, config.pooling)?;
        println!("{name}\t{pp}");
    }
    Ok(())
}

fn cmd_compare(config: &PipelineConfig, corpora: &[PathBuf], eval: &[PathBuf], out: Option<&Path>, long: bool) -> Outcome {
    let ontology = config.load_ontology()?;
    let load = |paths: &[PathBuf]| {
        paths
            .iter()
            .map(|p| load_sequences(config, &ontology, p))
            .collect::<Result<Vec<_>, _>>()
    };
    let train = load(corpora)?;
    let vocab = Vocabulary::from_ontology(&ontology, config.family_level);
    let matrix = if eval.is_empty() {
        stats::cross_perplexity_matrix(&train, &vocab, config.smoothing, config.pooling)?
    } else {
        stats::train_eval_matrix(&train, &load(eval)?, &vocab, config.smoothing, config.pooling)?
    };
    let is_json = out.is_some_and(|p| p.extension().is_some_and(|e| e == "json"));
    let text = if is_json {
        matrix.to_json() + "\n"
    } else if long {
        matrix.to_long_csv()
    } else {
        matrix.to_csv()
    };
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Per-EDU labels of matching answers in two annotations.
fn edu_labels(a: &[DiscoTrace], b: &[DiscoTrace], ontology: &Ontology, family: bool) -> Result<(Vec<String>, Vec<String>), Failure> {
    let expand = |t: &DiscoTrace| {
        let mut labels: BTreeMap<usize, String> = BTreeMap::new();
        for s in &t.steps {
            let l = if family { ontology.family_token(&s.act_id) } else { s.act_id.clone() };
            for &i in &s.edu_indices {
                labels.insert(i, l.clone());
            }
        }
        labels
    };
    let other: HashMap<&str, &DiscoTrace> = b.iter().map(|t| (t.answer_id.as_str(), t)).collect();
    let (mut la, mut lb) = (Vec::new(), Vec::new());
    for t in a {
        let Some(u) = other.get(t.answer_id.as_str()) else { continue };
        let (ea, eb) = (expand(t), expand(u));
        if ea.keys().ne(eb.keys()) {
            return Err(Failure::Input(format!("answer {} covers different EDUs in the two annotations", t.answer_id)));
        }
        la.extend(ea.into_values());
        lb.extend(eb.into_values());
    }
    Ok((la, lb))
}

fn cmd_metrics(
    config: &PipelineConfig,
    input: &Path,
    spaces: &Path,
    out: &Path,
    model_traces: Option<&Path>,
    proportions_against: Option<&Path>,
    agreement_with: Option<&Path>,
) -> Outcome {
    let ontology = config.load_ontology()?;
    let traces: Vec<DiscoTrace> = read_bodies(input)?;
    let spaces = load_spaces(spaces)?;
    let options = config.metrics_options();
    let mut report = Map::new();
    let m = stats::interpretation_metrics(&traces, &spaces, &ontology, &options)?;
    report.insert("interpretation".into(), serde_json::to_value(m)?);
    if let Some(p) = model_traces {
        let model: Vec<DiscoTrace> = read_bodies(p)?;
        let bins = stats::overanswering_bins(&traces, &model, &spaces, &ontology, &options, config.n_bins)?;
        report.insert("overanswering".into(), serde_json::to_value(bins)?);
    }
    if let Some(p) = proportions_against {
        let other: Vec<DiscoTrace> = read_bodies(p)?;
        let rows = stats::act_proportion_test(&traces, &other, &ontology, config.alpha)?;
        report.insert("act_proportions".into(), serde_json::to_value(rows)?);
    }
    if let Some(p) = agreement_with {
        let other: Vec<DiscoTrace> = read_bodies(p)?;
        let (a, b) = edu_labels(&traces, &other, &ontology, config.family_level)?;
        let space = if config.family_level { LabelSpace::Family } else { LabelSpace::Act };
        let k = stats::cohens_kappa(&a, &b, space)?;
        report.insert("agreement".into(), serde_json::to_value(k)?);
    }
    write_json(out, &Value::Object(report))
}

/// An answer produced by a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedAnswer {
    pub answer_id: String,
    pub question_id: String,
    pub community: String,
    pub generator: String,
    pub text: String,
}

fn cmd_mimic(config: &PipelineConfig, input: &Path, out: &Path) -> Outcome {
    let questions: Vec<QuestionRecord> = read_bodies(input)?;
    let answerer = config.role_backend("answerer")?;
    let mut prompts = Vec::with_capacity(questions.len());
    for q in &questions {
        let guidelines = match config
            .guidelines
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(q.community.trim_start_matches("r/")))
        {
            Some((_, p)) => std::fs::read_to_string(p).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
            None => community::guidelines(&q.community)
                .ok_or_else(|| Failure::Input(format!("no guidelines for community {}", q.community)))?
                .to_string(),
        };
        let explanation = community::explanation(&q.community)
            .ok_or_else(|| Failure::Input(format!("no description for community {}", q.community)))?;
        let request = build_mimic_prompt(&q.title, &q.community, &explanation, &guidelines)
            .map_err(|e| Failure::Input(format!("question {}: {e}", q.post_id)))?;
        prompts.push(request);
    }
    let replies = parallel_map(&prompts, config.max_in_flight, |r| answerer.complete(r));
    let mut answers = Vec::with_capacity(questions.len());
    for (q, reply) in questions.iter().zip(replies) {
        let text = reply.map_err(|e: GatewayError| backend_failure(format!("question {}: {e}", q.post_id)))?;
        answers.push(GeneratedAnswer {
            answer_id: format!("{}-mimic", q.post_id),
            question_id: q.post_id.clone(),
            community: q.community.clone(),
            generator: answerer.name().to_string(),
            text: text.trim().to_string(),
        });
    }
    write_bodies(out, &answers)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let xs: Vec<u64> = (0..100).collect();
        let ys = parallel_map(&xs, 7, |x| {
            std::thread::sleep(std::time::Duration::from_micros(100 - x));
            x * 2
        });
        assert_eq!(ys, xs.iter().map(|x| x * 2).collect::<Vec<_>>());
        assert!(parallel_map(&Vec::<u8>::new(), 4, |x| *x).is_empty());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["discotrace", "bogus"]), 1);
        assert_eq!(run(["discotrace", "segment", "--in", "x.jsonl"]), 1);
        assert_eq!(run(["discotrace", "--help"]), 0);
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "discotrace",
            "compare",
            "--corpora",
            "a.jsonl",
            "--seed",
            "9",
            "--smoothing",
            "mle",
            "--family-level",
            "--dedup-threshold",
            "0.5",
        ])
        .unwrap();
        let c = resolve_config(&cli).unwrap();
        assert_eq!((c.seed, c.smoothing, c.family_level, c.dedup_threshold), (9, Smoothing::Mle, true, 0.5));
        let cli = Cli::try_parse_from(["discotrace", "segment", "--in", "a", "--out", "b", "--dedup-threshold", "2"]).unwrap();
        assert!(matches!(resolve_config(&cli), Err(Failure::Input(_))));
    }

    #[test]
    fn diagnostics_path() {
        assert_eq!(
            default_diagnostics_path(Path::new("/tmp/t/traces.jsonl")),
            PathBuf::from("/tmp/t/traces.jsonl.diagnostics.jsonl")
        );
    }
}
