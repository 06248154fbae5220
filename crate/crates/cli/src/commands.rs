use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tempqa_core::config::{input_ref, RunConfig};
use tempqa_core::corpus::{self, AnnotatedDocument, RenderOptions, SentinelPattern, Setting};
use tempqa_core::eval::{self, Breakdown, EvalConfig, MissingPolicy, Prediction, Scorer, UnparseablePolicy};
use tempqa_core::facts::{self, FactGroup, FactStats, FactStore, GroupConfig, SplitSpec, Splits, Strictness};
use tempqa_core::jsonl::{self, ArtifactHeader, JsonlFile};
use tempqa_core::questions::{self, file_name, GenContext, L1Config, L3Mode, Level, Question, Split};
use tempqa_core::reasoner::{self, Solution};
use tempqa_core::templates::{L1Form, TemplateTable};
use tempqa_core::time::{parse_time, Granularity, TimePoint};

use crate::cli::*;
use crate::error::CliError;

/// Settings shared by every subcommand.
pub struct Env {
    pub seed: u64,
    pub strict: bool,
    pub snapshot: TimePoint,
    pub templates_path: Option<PathBuf>,
    pub templates: TemplateTable,
}

impl Env {
    fn config(&self, command: &str) -> RunConfig {
        let mut cfg = RunConfig::new(command, self.seed).param("snapshot", self.snapshot);
        cfg.templates = self.templates_path.clone();
        cfg.strict = self.strict;
        cfg
    }

    fn strictness(&self) -> Strictness {
        if self.strict {
            Strictness::FailFast
        } else {
            Strictness::Lenient
        }
    }
}

pub fn run(env: &Env, command: Command) -> Result<(), CliError> {
    match command {
        Command::GenL1(a) => gen_l1(env, a),
        Command::GenL1Future(a) => gen_l1_future(env, a),
        Command::GenL2(a) => gen_facts(env, &a, Level::L2, L3Mode::default()),
        Command::GenL3(a) => {
            let mode = if a.one_per_pair {
                L3Mode::OnePerPair
            } else {
                L3Mode::BothDirections
            };
            gen_facts(env, &a.base, Level::L3, mode)
        }
        Command::Render(a) => render(env, a),
        Command::Mask(a) => mask(env, a),
        Command::Solve(a) => solve(env, a),
        Command::Eval(a) => evaluate(env, a),
        Command::Reward(a) => reward(env, a),
        Command::Stats(a) => stats(env, a),
    }
}

fn forms(set: FormSet) -> Vec<L1Form> {
    match set {
        FormSet::Month => L1Form::MONTH_LEVEL.to_vec(),
        FormSet::All => L1Form::ALL.to_vec(),
    }
}

/// A bare year means its first month as a start and its last as an end.
fn range_bound(text: &str, is_end: bool) -> Result<TimePoint, CliError> {
    let expr = parse_time(text).map_err(|e| CliError::usage("time", e.to_string()))?;
    Ok(match expr.granularity {
        Granularity::Year if is_end => TimePoint::new(expr.point.year(), 12).expect("valid month"),
        _ => expr.point,
    })
}

fn write_questions(dir: &Path, level: Level, split: Split, header: &ArtifactHeader, qs: &[Question]) -> Result<(), CliError> {
    let path = dir.join(file_name(level, split));
    jsonl::write_jsonl(&path, Some(header), qs)?;
    eprintln!("wrote {} questions to {}", qs.len(), path.display());
    Ok(())
}

fn gen_l1(env: &Env, a: GenL1Args) -> Result<(), CliError> {
    let config = L1Config {
        start: range_bound(&a.start, false)?,
        end: range_bound(&a.end, true)?,
        forms: forms(a.forms),
    };
    let counts: [usize; 3] = a.counts.as_slice().try_into().map_err(|_| CliError::usage("counts", "--counts takes three values"))?;
    let run = env
        .config("gen-l1")
        .param("start", config.start)
        .param("end", config.end)
        .param("forms", &config.forms)
        .param("counts", counts);
    let splits = questions::gen_l1_splits(&config, counts, env.seed, &env.templates)?;
    let header = run.header("questions");
    for (split, qs) in [Split::Train, Split::Dev, Split::Test].into_iter().zip(&splits) {
        write_questions(&a.out, Level::L1, split, &header, qs)?;
    }
    Ok(())
}

fn gen_l1_future(env: &Env, a: GenL1FutureArgs) -> Result<(), CliError> {
    let forms = forms(a.forms);
    let run = env.config("gen-l1-future").param("count", a.count).param("forms", &forms);
    let qs = questions::gen_l1_future(a.count, env.seed, &forms, &env.templates)?;
    write_questions(&a.out, Level::L1, Split::Future, &run.header("questions"), &qs)
}

fn load_store(env: &Env, path: &Path) -> Result<FactStore, CliError> {
    let file = File::open(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
    let ingested = facts::ingest(BufReader::new(file), env.strictness()).map_err(|e| CliError::data("facts", format!("{}: {e}", path.display())))?;
    for d in &ingested.diagnostics {
        eprintln!("warning: {}: {d}", path.display());
    }
    if !ingested.diagnostics.is_empty() {
        eprintln!("skipped {} malformed rows", ingested.diagnostics.len());
    }
    Ok(ingested.store)
}

fn split_spec(a: &GroupArgs) -> Result<SplitSpec, CliError> {
    let three = |n: usize| if n == 3 { Ok(()) } else { Err(CliError::usage("split", "split sizes take three values")) };
    Ok(match &a.split_counts {
        Some(c) => {
            three(c.len())?;
            SplitSpec::Counts([c[0], c[1], c[2]])
        }
        None => {
            three(a.split_ratios.len())?;
            let r = &a.split_ratios;
            SplitSpec::Ratios([r[0], r[1], r[2]])
        }
    })
}

fn group_config(env: &Env, a: &GroupArgs) -> GroupConfig {
    GroupConfig {
        min_facts: a.min_facts,
        max_subjects_per_relation: (a.max_subjects > 0).then_some(a.max_subjects),
        seed: env.seed,
    }
}

fn grouped(env: &Env, a: &GroupArgs, run: RunConfig) -> Result<(Vec<FactGroup>, Splits, RunConfig), CliError> {
    let store = load_store(env, &a.facts)?;
    let gcfg = group_config(env, a);
    let spec = split_spec(a)?;
    let groups = facts::build_groups(&store, &gcfg);
    let splits = facts::split_subjects(&groups, spec, env.seed)?;
    let mut run = run.param("groups", gcfg).param("splits", spec);
    run.facts = Some(a.facts.clone());
    Ok((groups, splits, run))
}

fn gen_facts(env: &Env, a: &FactArgs, level: Level, mode: L3Mode) -> Result<(), CliError> {
    let command = if level == Level::L2 { "gen-l2" } else { "gen-l3" };
    let mut run = env.config(command);
    if level == Level::L3 {
        run = run.param("l3_mode", mode);
    }
    let (_, splits, run) = grouped(env, &a.groups, run)?;
    let header = run.header("questions");
    for (split, groups) in splits.parts() {
        let ctx = GenContext {
            templates: &env.templates,
            snapshot: env.snapshot,
            split,
        };
        let qs = match level {
            Level::L2 => questions::gen_l2_all(groups, env.seed, ctx),
            _ => questions::gen_l3_all(groups, env.seed, ctx, mode),
        };
        write_questions(&a.out, level, split, &header, &qs)?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct ArticleRecord {
    subject_id: String,
    article: String,
}

fn render(env: &Env, a: RenderArgs) -> Result<(), CliError> {
    let setting = match a.setting {
        SettingArg::Cbqa => Setting::Cbqa,
        SettingArg::Obqa => Setting::Obqa,
        SettingArg::Reasonqa => Setting::ReasonQa,
    };
    let input: JsonlFile<Question> = jsonl::read_jsonl(&a.questions)?;
    let index = match (&a.facts, setting) {
        (Some(path), _) => Some(load_store(env, path)?.index()),
        (None, Setting::ReasonQa) => return Err(CliError::usage("render", "ReasonQA rendering needs --facts")),
        (None, _) => None,
    };
    let articles: HashMap<String, String> = match (&a.articles, setting) {
        (Some(path), _) => jsonl::read_jsonl::<ArticleRecord>(path)?
            .records
            .into_iter()
            .map(|r| (r.subject_id, r.article))
            .collect(),
        (None, Setting::Obqa) => return Err(CliError::usage("render", "OBQA rendering needs --articles")),
        (None, _) => HashMap::new(),
    };

    let opts = RenderOptions {
        templates: &env.templates,
        snapshot: env.snapshot,
    };
    let mut out = Vec::with_capacity(input.records.len());
    for q in &input.records {
        let group = match (&index, q.relation, q.subject_id.as_deref()) {
            (Some(ix), Some(rel), Some(sid)) => ix.get(sid, rel),
            _ => None,
        };
        let article = q.subject_id.as_deref().and_then(|s| articles.get(s)).map(String::as_str);
        out.push(corpus::render(q, group, article, setting, env.seed, opts)?);
    }
    let mut run = env.config("render").param("setting", setting).param("questions", input_ref(&a.questions)?);
    if let Some(path) = &a.articles {
        run = run.param("articles", input_ref(path)?);
    }
    run.facts = a.facts.clone();
    jsonl::write_jsonl(&a.out, Some(&run.header("rendered")), &out)?;
    eprintln!("wrote {} {setting} examples to {}", out.len(), a.out.display());
    Ok(())
}

fn mask(env: &Env, a: MaskArgs) -> Result<(), CliError> {
    let pattern = SentinelPattern::new(&a.sentinel_pattern)?;
    if !(a.ratio > 0.0 && a.ratio <= 1.0) {
        return Err(CliError::usage("mask", format!("--ratio {} is outside (0, 1]", a.ratio)));
    }
    let docs: JsonlFile<AnnotatedDocument> = jsonl::read_jsonl(&a.docs)?;
    let (masked, skipped) = corpus::mask_corpus(&docs.records, a.ratio, env.seed, &pattern);
    if let Some(first) = skipped.first() {
        if env.strict {
            return Err(first.clone().into());
        }
        for e in &skipped {
            eprintln!("warning: {e}");
        }
    }
    let run = env
        .config("mask")
        .param("ratio", a.ratio)
        .param("sentinel_pattern", &a.sentinel_pattern)
        .param("docs", input_ref(&a.docs)?);
    jsonl::write_jsonl(&a.out, Some(&run.header("masked")), &masked)?;
    eprintln!("masked {} documents ({} skipped) into {}", masked.len(), skipped.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct SolutionRecord<'a> {
    id: &'a str,
    #[serde(flatten)]
    solution: &'a Solution,
}

fn solve(env: &Env, a: SolveArgs) -> Result<(), CliError> {
    let input: JsonlFile<Question> = jsonl::read_jsonl(&a.questions)?;
    let index = match &a.facts {
        Some(path) => load_store(env, path)?.index(),
        None if input.records.iter().all(|q| q.level == Level::L1) => Default::default(),
        None => return Err(CliError::usage("solve", "L2 and L3 questions need --facts")),
    };
    let solutions: Vec<Solution> = input
        .records
        .iter()
        .map(|q| reasoner::solve(q, &index, env.snapshot))
        .collect::<Result<_, _>>()?;
    let mut unanswered = 0;
    let predictions: Vec<Prediction> = input
        .records
        .iter()
        .zip(&solutions)
        .map(|(q, s)| {
            unanswered += s.best().is_none() as usize;
            Prediction {
                id: q.id.clone(),
                prediction: s.best().unwrap_or_default().to_string(),
            }
        })
        .collect();
    let mut run = env.config("solve").param("questions", input_ref(&a.questions)?);
    run.facts = a.facts.clone();
    jsonl::write_jsonl(&a.out, Some(&run.header("predictions")), &predictions)?;
    if let Some(path) = &a.rationale {
        let records: Vec<SolutionRecord> = input
            .records
            .iter()
            .zip(&solutions)
            .map(|(q, s)| SolutionRecord { id: &q.id, solution: s })
            .collect();
        jsonl::write_jsonl(path, Some(&run.header("solutions")), &records)?;
    }
    if unanswered > 0 {
        eprintln!("warning: {unanswered} questions have no valid answer");
    }
    eprintln!("wrote {} predictions to {}", predictions.len(), a.out.display());
    Ok(())
}

/// Refuses to score files produced under different prompt layouts.
fn check_render_versions(questions: &Option<ArtifactHeader>, predictions: &Option<ArtifactHeader>, force: bool) -> Result<(), CliError> {
    if let (Some(q), Some(p)) = (questions, predictions) {
        if q.render_version != p.render_version {
            let message = format!(
                "render version mismatch: questions {} vs predictions {} (use --force to score anyway)",
                q.render_version, p.render_version
            );
            if !force {
                return Err(CliError::data("render-version", message));
            }
            eprintln!("warning: {message}");
        }
    }
    Ok(())
}

fn evaluate(env: &Env, a: EvalArgs) -> Result<(), CliError> {
    let qs: JsonlFile<Question> = jsonl::read_jsonl(&a.questions)?;
    let preds: JsonlFile<Prediction> = jsonl::read_jsonl(&a.predictions)?;
    check_render_versions(&qs.header, &preds.header, a.force)?;
    let breakdowns = if a.breakdown.is_empty() {
        vec![Breakdown::Period, Breakdown::Relation]
    } else {
        a.breakdown
            .iter()
            .map(|b| match b {
                BreakdownArg::Period => Breakdown::Period,
                BreakdownArg::Relation => Breakdown::Relation,
            })
            .collect()
    };
    let cfg = EvalConfig {
        breakdowns,
        period_edges: a.period_edges.clone(),
        missing: match a.missing {
            MissingArg::Zero => MissingPolicy::ScoreZero,
            MissingArg::Skip => MissingPolicy::Skip,
        },
        unparseable: a.unparseable_penalty.map_or(UnparseablePolicy::Exclude, UnparseablePolicy::Penalty),
    };
    let report = eval::evaluate(&qs.records, &preds.records, &cfg)?;
    print!("{}", eval::format_table(&report));
    if let Some(path) = &a.json {
        let run = env
            .config("eval")
            .param("questions", input_ref(&a.questions)?)
            .param("predictions", input_ref(&a.predictions)?)
            .param("eval", &cfg);
        let doc = serde_json::json!({ "_meta": run.header("report"), "report": report });
        write_json(path, &doc)?;
    }
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = File::create(path).map_err(|e| CliError::data("io", format!("{}: {e}", path.display())))?;
    serde_json::to_writer_pretty(&mut f, value).map_err(|e| CliError::Internal(e.to_string()))?;
    f.write_all(b"\n")?;
    Ok(())
}

fn reward(env: &Env, a: RewardArgs) -> Result<(), CliError> {
    let qs: JsonlFile<Question> = jsonl::read_jsonl(&a.questions)?;
    let preds: JsonlFile<Prediction> = jsonl::read_jsonl(&a.predictions)?;
    check_render_versions(&qs.header, &preds.header, a.force)?;
    let scorer = match a.scorer {
        ScorerArg::Em => Scorer::Em,
        ScorerArg::F1 => Scorer::F1,
    };
    let by_id: HashMap<&str, &Question> = qs.records.iter().map(|q| (q.id.as_str(), q)).collect();
    let mut records = Vec::with_capacity(preds.records.len());
    for p in &preds.records {
        let q = by_id
            .get(p.id.as_str())
            .ok_or_else(|| CliError::data("predictions", format!("prediction id '{}' does not match any question", p.id)))?;
        let r = eval::reward(&p.id, &p.prediction, &q.answers, &q.negatives, scorer)
            .map_err(|e| CliError::data("overlap", format!("question {}: {e}", q.id)))?;
        records.push(r);
    }
    let run = env
        .config("reward")
        .param("scorer", scorer)
        .param("questions", input_ref(&a.questions)?)
        .param("predictions", input_ref(&a.predictions)?);
    jsonl::write_jsonl(&a.out, Some(&run.header("rewards")), &records)?;
    let mean = records.iter().map(|r| r.reward).sum::<f64>() / records.len().max(1) as f64;
    eprintln!("wrote {} rewards to {} (mean {mean:.4})", records.len(), a.out.display());
    Ok(())
}

#[derive(Serialize)]
struct StatsReport {
    all: FactStats,
    splits: BTreeMap<String, FactStats>,
    questions: BTreeMap<String, BTreeMap<String, usize>>,
}

fn stats(env: &Env, a: StatsArgs) -> Result<(), CliError> {
    let (groups, splits, _) = grouped(env, &a.groups, env.config("stats"))?;
    let mut report = StatsReport {
        all: FactStats::of(&groups, env.snapshot),
        splits: splits
            .parts()
            .iter()
            .map(|(s, g)| (s.to_string(), FactStats::of(g, env.snapshot)))
            .collect(),
        questions: BTreeMap::new(),
    };
    for path in &a.questions {
        let file: JsonlFile<Question> = jsonl::read_jsonl(path)?;
        for q in &file.records {
            *report
                .questions
                .entry(q.level.to_string())
                .or_default()
                .entry(q.split.to_string())
                .or_default() += 1;
        }
    }

    if a.json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let order = ["train", "dev", "test"];
    println!("{:<16} {:>10} {:>10} {:>10}", "", order[0], order[1], order[2]);
    let row = |label: &str, f: &dyn Fn(&FactStats) -> String| {
        let cells: Vec<String> = order.iter().map(|s| f(&report.splits[*s])).collect();
        println!("{:<16} {:>10} {:>10} {:>10}", label, cells[0], cells[1], cells[2]);
    };
    let span = |s: &FactStats| match (s.earliest_year, s.latest_year) {
        (Some(a), Some(b)) => format!("{a}-{b}"),
        _ => "-".to_string(),
    };
    row("Time range", &span);
    for (level, by_split) in &report.questions {
        let cells: Vec<String> = order
            .iter()
            .map(|s| by_split.get(*s).copied().unwrap_or(0).to_string())
            .collect();
        println!("{:<16} {:>10} {:>10} {:>10}", format!("{}-Questions", level.to_uppercase()), cells[0], cells[1], cells[2]);
        if let Some(n) = by_split.get("future") {
            println!("{:<16} {:>10}", format!("{}-future", level.to_uppercase()), n);
        }
    }
    row("Subjects", &|s| s.subjects.to_string());
    row("Facts", &|s| s.facts.to_string());
    row("Facts/subjects", &|s| format!("{:.2}", s.facts_per_subject));
    println!(
        "all: {} subjects, {} groups, {} facts, {:.2} facts/subject",
        report.all.subjects, report.all.groups, report.all.facts, report.all.facts_per_subject
    );
    Ok(())
}
