//! Acceptance checks run against the built `tempqa` binary. Prints one
//! PASS/FAIL/NOT RUN line per criterion and exits non-zero on any FAIL.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use tempqa_core::corpus::{MaskedDocument, RenderedExample};
use tempqa_core::eval::{self, Prediction, RewardRecord, Scorer, UnparseablePolicy};
use tempqa_core::facts::{FactGroup, FactRow, Relation};
use tempqa_core::jsonl::{read_jsonl, write_jsonl};
use tempqa_core::questions::{l2_question, GenContext, Question, Split};
use tempqa_core::synth::{synthetic_documents, synthetic_facts, SynthConfig};
use tempqa_core::templates::TemplateTable;
use tempqa_core::time::{default_snapshot, TimeInterval, TimePoint};

const ORACLE_MAX: Duration = Duration::from_secs(30);
const L1_MAX: Duration = Duration::from_secs(120);
const L1_TRAIN: usize = 400_000;
const REWARD_CASES: usize = 10_000;
const F1_TOL: f64 = 1e-9;
const FACTS_PER_SUBJECT: (f64, f64) = (5.2, 5.6);
const MASK_DOCS: usize = 1_000;
const MASK_RATIO: f64 = 0.5;
/// Path to the paper's released fact file; the released-data check runs only when set.
const RELEASED_FACTS_ENV: &str = "TEMPQA_RELEASED_FACTS";

type Check = Result<String, String>;

enum Status {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn tempqa(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tempqa"))
        .args(args)
        .env_remove("TEMPQA_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "tempqa {} exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn write_rows<T: serde::Serialize>(path: &Path, rows: &[T]) {
    write_jsonl(path, None, rows).unwrap();
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    read_jsonl(path).map(|f| f.records).map_err(|e| e.to_string())
}

fn synth_facts(dir: &Path, subjects_per_relation: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("facts_{subjects_per_relation}_{seed}.jsonl"));
    let cfg = SynthConfig {
        subjects_per_relation,
        ..SynthConfig::default()
    };
    write_rows(&path, &synthetic_facts(&cfg, seed));
    path
}

fn read_splits(dir: &Path, level: &str) -> Result<Vec<Question>, String> {
    let mut all = Vec::new();
    for split in ["train", "dev", "test"] {
        all.extend(read::<Question>(&dir.join(format!("{level}_{split}.jsonl")))?);
    }
    Ok(all)
}

// ---- independent helpers ----

const MONTHS: [&str; 12] = ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"];

fn abs_month(text: &str) -> (i64, bool) {
    match text.split(' ').collect::<Vec<_>>().as_slice() {
        [y] => (y.parse::<i64>().unwrap() * 12, false),
        [m, y] => (y.parse::<i64>().unwrap() * 12 + MONTHS.iter().position(|x| x == m).unwrap() as i64, true),
        _ => panic!("bad time {text}"),
    }
}

fn show_month(n: i64, with_month: bool) -> String {
    if with_month {
        format!("{} {}", MONTHS[n.rem_euclid(12) as usize], n.div_euclid(12))
    } else {
        n.div_euclid(12).to_string()
    }
}

/// Answer implied by the wording of a time-time question.
fn l1_from_text(q: &str) -> Option<String> {
    let body = q
        .strip_prefix("What is the time ")
        .or_else(|| q.strip_prefix("What is the year "))?
        .strip_suffix('?')?;
    let words: Vec<&str> = body.split(' ').collect();
    let at = words.iter().position(|w| *w == "before" || *w == "after")?;
    let mut months = 0;
    for w in words[..at].windows(2) {
        if let Ok(n) = w[0].parse::<i64>() {
            months += if w[1].starts_with("year") { 12 * n } else if w[1].starts_with("month") { n } else { 0 };
        }
    }
    if months == 0 {
        months = 12;
    }
    let sign = if words[at] == "before" { -1 } else { 1 };
    let (t, monthly) = abs_month(&words[at + 1..].join(" "));
    Some(show_month(t + sign * months, monthly))
}

fn norm(s: &str) -> String {
    s.to_lowercase()
        .chars()
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect::<String>()
        .split_whitespace()
        .filter(|w| !matches!(*w, "a" | "an" | "the"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn brute_reward(pred: &str, gold: &str, negatives: &[String]) -> (f64, f64, f64) {
    let p = if norm(pred) == norm(gold) { 1.0 } else { 0.0 };
    let n = if negatives.iter().any(|x| norm(x) == norm(pred)) { 1.0 } else { 0.0 };
    (p, n, if p >= n { p } else { -n })
}

// ---- criteria ----

fn oracle_round_trip(dir: &Path) -> Check {
    let facts = synth_facts(dir, 200, 21);
    let started = Instant::now();
    let mut em = Vec::new();
    for level in ["l2", "l3"] {
        let out = dir.join(format!("c1_{level}"));
        tempqa(&["--seed", "3", &format!("gen-{level}"), "--facts", p(&facts), "--out", p(&out)])?;
        let all = read_splits(&out, level)?;
        ensure(all.len() >= 5_000, || format!("only {} {level} questions generated", all.len()))?;
        let header = read_jsonl::<Question>(&out.join(format!("{level}_train.jsonl"))).unwrap().header;
        let qpath = out.join("five_thousand.jsonl");
        write_jsonl(&qpath, header.as_ref(), &all[..5_000]).unwrap();
        let preds = out.join("predictions.jsonl");
        let report = out.join("report.json");
        tempqa(&["solve", "--questions", p(&qpath), "--facts", p(&facts), "--out", p(&preds)])?;
        tempqa(&["eval", "--questions", p(&qpath), "--predictions", p(&preds), "--json", p(&report)])?;
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
        let overall = &doc["report"]["overall"];
        ensure(overall["count"] == 5_000, || format!("{level}: scored {} questions", overall["count"]))?;
        em.push((level, overall["em"].as_f64().unwrap()));
    }
    let elapsed = started.elapsed();
    ensure(em.iter().all(|(_, v)| *v == 100.0), || format!("EM {em:?}"))?;
    ensure(elapsed < ORACLE_MAX, || format!("took {elapsed:.1?} (limit {ORACLE_MAX:?})"))?;
    Ok(format!("L2 EM {:.1}, L3 EM {:.1} on 5,000 each in {elapsed:.1?}", em[0].1, em[1].1))
}

fn l1_scale(dir: &Path) -> Check {
    let out = dir.join("c2");
    let started = Instant::now();
    tempqa(&["--seed", "7", "gen-l1", "--out", p(&out), "--start", "Jan 1014", "--end", "Dec 2022", "--counts", "400000,4000,4000"])?;
    let gen_time = started.elapsed();
    let all = read_splits(&out, "l1")?;
    let train = all.iter().filter(|q| q.split == Split::Train).count();
    ensure(train == L1_TRAIN, || format!("{train} train questions"))?;
    let ids: HashSet<&str> = all.iter().map(|q| q.id.as_str()).collect();
    let texts: HashSet<&str> = all.iter().map(|q| q.question.as_str()).collect();
    ensure(ids.len() == all.len() && texts.len() == all.len(), || {
        format!("{} duplicate ids, {} duplicate texts", all.len() - ids.len(), all.len() - texts.len())
    })?;
    let (lo, hi) = (abs_month("Jan 1014").0, abs_month("Dec 2022").0);
    let mut wrong = 0;
    for q in &all {
        let t = abs_month(&q.t_ref.unwrap().to_string()).0;
        if l1_from_text(&q.question).as_deref() != Some(q.answers[0].as_str()) || !(lo..=hi).contains(&t) {
            wrong += 1;
        }
    }
    ensure(wrong == 0, || format!("{wrong} answers disagree with the month-index oracle"))?;
    ensure(gen_time < L1_MAX, || format!("generation took {gen_time:.1?} (limit {L1_MAX:?})"))?;
    Ok(format!(
        "{} unique questions ({train} train), all verified, generated in {gen_time:.1?}",
        all.len()
    ))
}

fn reward_truth_table() -> Check {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let vocab = ["Osaka", "Mayor", "of", "Governor", "Prefecture", "FC", "Barcelona", "Real", "Madrid", "Japan", "House", "2019"];
    let phrase = |rng: &mut rand_chacha::ChaCha8Rng| -> String {
        let n = rng.random_range(1..=4);
        (0..n).map(|_| *vocab.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
    };
    let disguise = |rng: &mut rand_chacha::ChaCha8Rng, s: &str| -> String {
        match rng.random_range(0..4) {
            0 => s.to_uppercase(),
            1 => format!("The {s}"),
            2 => format!("{s}."),
            _ => s.to_string(),
        }
    };
    let (mut agree, mut branches) = (0, [0usize; 3]);
    for i in 0..REWARD_CASES {
        let gold = phrase(&mut rng);
        let negs: Vec<String> = (0..rng.random_range(0..=4))
            .map(|_| phrase(&mut rng))
            .filter(|n| norm(n) != norm(&gold))
            .collect();
        let pred = match (rng.random_range(0..3), negs.is_empty()) {
            (0, _) | (1, true) => disguise(&mut rng, &gold),
            (1, false) => {
                let n = negs.choose(&mut rng).unwrap().clone();
                disguise(&mut rng, &n)
            }
            _ => phrase(&mut rng),
        };
        let got = eval::reward(&i.to_string(), &pred, &[&gold], &negs, Scorer::Em).map_err(|e| e.to_string())?;
        let (bp, bn, br) = brute_reward(&pred, &gold, &negs);
        if (got.p, got.n, got.reward) == (bp, bn, br) && [-1.0, 0.0, 1.0].contains(&got.reward) {
            agree += 1;
        }
        branches[(br + 1.0) as usize] += 1;
        let on_gold = eval::reward("g", &gold, &[&gold], &negs, Scorer::Em).unwrap().reward;
        let on_negs = negs.iter().all(|n| eval::reward("n", n, &[&gold], &negs, Scorer::Em).unwrap().reward == -1.0);
        ensure(on_gold == 1.0 && on_negs, || format!("case {i}: gold {on_gold}, negatives ok {on_negs}"))?;
    }
    ensure(agree == REWARD_CASES, || format!("{agree}/{REWARD_CASES} agree with brute force"))?;
    ensure(branches.iter().all(|&b| b > 0), || format!("branch coverage {branches:?}"))?;
    Ok(format!(
        "{agree}/{REWARD_CASES} agree; R=-1/0/+1 seen {}/{}/{} times",
        branches[0], branches[1], branches[2]
    ))
}

fn metric_fixtures(dir: &Path) -> Check {
    let f1 = eval::token_f1("Mayor of Osaka", "Governor of Osaka Prefecture");
    ensure((f1 - 4.0 / 7.0).abs() <= F1_TOL, || format!("F1 {f1}"))?;
    let g = ["Governor of Osaka Prefecture"];
    for (pred, em) in [
        ("governor of osaka prefecture", 1.0),
        ("The Governor of Osaka Prefecture.", 1.0),
        ("GOVERNOR OF OSAKA, PREFECTURE", 1.0),
        ("Governor of Osaka", 0.0),
    ] {
        ensure(eval::score_em(pred, &g) == em, || format!("EM({pred}) != {em}"))?;
        ensure(eval::score_f1(pred, &g) >= eval::score_em(pred, &g), || format!("F1 < EM for {pred}"))?;
    }
    ensure(eval::score_f1("Paris", &["FC Barcelona"]) == 0.0, || "F1(Paris)".into())?;
    ensure(eval::normalize("FC Barcelona.") == ["fc", "barcelona"], || "normalize".into())?;
    for (pred, err, trend) in [("2009", 0, true), ("2005", 4, true), ("2012", 3, false)] {
        let s = eval::score_numeric(pred, 2009, 2010, UnparseablePolicy::Exclude);
        ensure(s.abs_err == Some(err) && s.trend_correct == trend, || format!("numeric {pred}: {s:?}"))?;
    }

    // the same fixtures scored through the CLI as "the year before 2010"
    let mk = |id: &str| -> serde_json::Value {
        serde_json::json!({
            "id": id, "level": "L1", "relation": null, "subject": null, "subject_id": null,
            "template_id": 4, "question": "What is the year before 2010?", "answers": ["2009"],
            "negatives": [], "t_ref": "Jan 2010", "offset": {"years": 1, "months": 0, "direction": "before"},
            "direction": "before", "neighbor_object": null, "split": "test"
        })
    };
    let qpath = dir.join("c4_questions.jsonl");
    let ppath = dir.join("c4_predictions.jsonl");
    let rpath = dir.join("c4_report.json");
    write_rows(&qpath, &[mk("a"), mk("b"), mk("c"), mk("d")]);
    let preds = [("a", "2009"), ("b", "2005"), ("c", "2012"), ("d", "around then")];
    write_rows(&ppath, &preds.map(|(id, p)| Prediction { id: id.into(), prediction: p.into() }));
    tempqa(&["eval", "--questions", p(&qpath), "--predictions", p(&ppath), "--json", p(&rpath)])?;
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&rpath).unwrap()).unwrap();
    let o = &doc["report"]["overall"];
    let mae = o["mae"].as_f64().unwrap();
    let trend = o["trend_acc"].as_f64().unwrap();
    ensure((mae - 7.0 / 3.0).abs() < 1e-9, || format!("MAE {mae}"))?;
    ensure((trend - 50.0).abs() < 1e-9, || format!("trend {trend}"))?;
    ensure(o["unparseable"] == 1 && o["em"].as_f64() == Some(25.0), || format!("{o}"))?;
    Ok(format!("F1 = {f1:.12} (4/7); EM/F1/MAE/trend fixtures exact; CLI MAE {mae:.4}, trend {trend:.1}%"))
}

fn construction_rules(dir: &Path) -> Check {
    let facts = synth_facts(dir, 2_600, 5);
    let out = dir.join("c5");
    tempqa(&["--seed", "9", "gen-l2", "--facts", p(&facts), "--out", p(&out)])?;
    let mut per_split: Vec<BTreeSet<String>> = Vec::new();
    let mut per_relation: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut per_group: BTreeMap<(String, String), usize> = BTreeMap::new();
    for split in ["train", "dev", "test"] {
        let qs: Vec<Question> = read(&out.join(format!("l2_{split}.jsonl")))?;
        let mut subjects = BTreeSet::new();
        for q in qs {
            let (rel, sid) = (q.relation.unwrap().to_string(), q.subject_id.unwrap());
            subjects.insert(sid.clone());
            per_relation.entry(rel.clone()).or_default().insert(sid.clone());
            *per_group.entry((rel, sid)).or_default() += 1;
        }
        per_split.push(subjects);
    }
    let smallest = per_group.values().min().copied().unwrap_or(0);
    let largest_rel = per_relation.values().map(BTreeSet::len).max().unwrap_or(0);
    ensure(smallest >= 3, || format!("a group has only {smallest} facts"))?;
    ensure(largest_rel <= 2_000, || format!("a relation keeps {largest_rel} subjects"))?;
    let disjoint = per_split[0].is_disjoint(&per_split[1])
        && per_split[0].is_disjoint(&per_split[2])
        && per_split[1].is_disjoint(&per_split[2]);
    ensure(disjoint, || "splits share subjects".into())?;
    let stats: serde_json::Value = serde_json::from_str(&tempqa(&["--seed", "9", "stats", "--facts", p(&facts), "--json"])?).unwrap();
    Ok(format!(
        "min group {smallest} facts, max {largest_rel} subjects/relation, splits disjoint ({}/{}/{} subjects); synthetic facts/subject {:.2}",
        per_split[0].len(),
        per_split[1].len(),
        per_split[2].len(),
        stats["splits"]["train"]["facts_per_subject"].as_f64().unwrap()
    ))
}

fn released_facts_ratio() -> Status {
    let Ok(path) = std::env::var(RELEASED_FACTS_ENV) else {
        return Status::NotRun(format!("released fact file not available; set {RELEASED_FACTS_ENV} to run"));
    };
    let run = || -> Check {
        let out = tempqa(&["stats", "--facts", &path, "--split-counts", "3000,1000,1000", "--json"])?;
        let stats: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
        let mut ratios = Vec::new();
        for split in ["train", "dev", "test"] {
            let r = stats["splits"][split]["facts_per_subject"].as_f64().unwrap_or(0.0);
            ensure((FACTS_PER_SUBJECT.0..=FACTS_PER_SUBJECT.1).contains(&r), || format!("{split} facts/subject {r:.2}"))?;
            ratios.push(format!("{split} {r:.2}"));
        }
        Ok(format!("facts/subject {}", ratios.join(", ")))
    };
    match run() {
        Ok(d) => Status::Pass(d),
        Err(e) => Status::Fail(e),
    }
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn determinism(dir: &Path) -> Check {
    let facts = synth_facts(dir, 30, 8);
    let docs = dir.join("c6_docs.jsonl");
    write_rows(&docs, &synthetic_documents(200, 3));
    let articles = dir.join("c6_articles.jsonl");
    let arts: Vec<serde_json::Value> = (0..30)
        .flat_map(|s| Relation::ALL.map(|r| (r, s)))
        .map(|(r, s)| serde_json::json!({"subject_id": format!("Q{}{:06}", r.index() + 1, s), "article": format!("Article about subject {s}.")}))
        .collect();
    write_rows(&articles, &arts);

    let run_all = |out: &Path, seed: &str| -> Result<(), String> {
        let s = |rest: &[&str]| -> Result<String, String> {
            let mut args = vec!["--seed", seed];
            args.extend_from_slice(rest);
            tempqa(&args)
        };
        s(&["gen-l1", "--out", p(out), "--counts", "500,50,50", "--forms", "all"])?;
        s(&["gen-l1-future", "--out", p(out), "--count", "400"])?;
        s(&["gen-l2", "--facts", p(&facts), "--out", p(out)])?;
        s(&["gen-l3", "--facts", p(&facts), "--out", p(out)])?;
        let q = out.join("l2_train.jsonl");
        for (setting, extra) in [("cbqa", vec![]), ("obqa", vec!["--articles", p(&articles)]), ("reasonqa", vec!["--facts", p(&facts)])] {
            let target = out.join(format!("render_{setting}.jsonl"));
            let mut args = vec!["render", "--questions", p(&q), "--setting", setting, "--out", p(&target)];
            args.extend(extra);
            s(&args)?;
        }
        s(&["mask", "--docs", p(&docs), "--out", p(&out.join("masked.jsonl"))])?;
        Ok(())
    };
    let (a, b) = (dir.join("c6_a"), dir.join("c6_b"));
    run_all(&a, "5")?;
    run_all(&b, "5")?;
    let fa = files_in(&a);
    for f in &fa {
        let other = b.join(f.file_name().unwrap());
        ensure(fs::read(f).unwrap() == fs::read(&other).unwrap(), || format!("{} differs between runs", f.display()))?;
    }

    // same questions, rendered under another seed
    let reseeded = dir.join("c6_reseeded.jsonl");
    let q = a.join("l2_train.jsonl");
    tempqa(&["--seed", "6", "render", "--questions", p(&q), "--setting", "reasonqa", "--facts", p(&facts), "--out", p(&reseeded)])?;
    let r5: Vec<RenderedExample> = read(&a.join("render_reasonqa.jsonl"))?;
    let r6: Vec<RenderedExample> = read(&reseeded)?;
    ensure(r5.len() == r6.len(), || "render sizes differ".into())?;
    let mut reordered = 0;
    for (x, y) in r5.iter().zip(&r6) {
        let mut lx: Vec<&str> = x.prompt.lines().collect();
        let mut ly: Vec<&str> = y.prompt.lines().collect();
        reordered += (lx != ly) as usize;
        lx.sort_unstable();
        ly.sort_unstable();
        ensure(x.id == y.id && lx == ly, || format!("{}: line multisets differ across seeds", x.id))?;
    }
    ensure(reordered > 0, || "a new seed did not reorder any ReasonQA context".into())?;
    Ok(format!(
        "{} artifacts byte-identical across runs; new seed reorders {reordered}/{} ReasonQA contexts with equal line multisets",
        fa.len(),
        r5.len()
    ))
}

/// Restores a document from its masked text and target without the library.
fn restore(masked: &str, target: &str, k: usize) -> String {
    let mut fills = Vec::new();
    let mut rest = target;
    for j in 0..k {
        rest = rest.strip_prefix(&format!("<mask_{j}> ")).unwrap_or("");
        let end = rest.find(&format!(" <mask_{}>", j + 1)).unwrap_or(rest.len());
        fills.push(&rest[..end]);
        rest = rest.get(end + 1..).unwrap_or("");
    }
    let mut out = masked.to_string();
    for (j, f) in fills.iter().enumerate() {
        out = out.replacen(&format!("<mask_{j}>"), f, 1);
    }
    out
}

fn masking(dir: &Path) -> Check {
    let docs_path = dir.join("c7_docs.jsonl");
    let docs = synthetic_documents(MASK_DOCS, 17);
    write_rows(&docs_path, &docs);
    let out = dir.join("c7_masked.jsonl");
    tempqa(&["--seed", "4", "mask", "--docs", p(&docs_path), "--ratio", &MASK_RATIO.to_string(), "--out", p(&out)])?;
    let masked: Vec<MaskedDocument> = read(&out)?;
    ensure(masked.len() == docs.len(), || format!("{} of {} documents masked", masked.len(), docs.len()))?;
    let (mut exact, mut restored) = (0, 0);
    for (d, m) in docs.iter().zip(&masked) {
        let n = d.spans.len();
        let k = (MASK_RATIO * n as f64).ceil() as usize;
        let sentinels = (0..n).filter(|j| m.masked.contains(&format!("<mask_{j}>"))).count();
        exact += (m.masked_spans == k && m.total_spans == n && sentinels == k) as usize;
        restored += (restore(&m.masked, &m.target, k) == d.text) as usize;
    }
    ensure(exact == docs.len(), || format!("masked fraction exact on {exact}/{}", docs.len()))?;
    ensure(restored == docs.len(), || format!("reconstruction on {restored}/{}", docs.len()))?;
    Ok(format!("{exact}/{MASK_DOCS} exact ceil(0.5*n)/n fractions, {restored}/{MASK_DOCS} reconstructed"))
}

fn yoshimura(dir: &Path) -> Check {
    let tp = |y, m| TimePoint::new(y, m).unwrap();
    let row = |o: &str, s: TimePoint, e: TimePoint| FactRow {
        subject: "Hirofumi Yoshimura".into(),
        subject_id: "Q11612484".into(),
        relation: "P39".into(),
        object: o.into(),
        object_id: String::new(),
        start: s.to_string(),
        end: Some(e.to_string()),
    };
    let rows = vec![
        row("Member of the House of Representatives of Japan", tp(2014, 12), tp(2015, 10)),
        row("Mayor of Osaka", tp(2015, 12), tp(2019, 3)),
        row("Governor of Osaka Prefecture", tp(2019, 4), tp(2022, 12)),
    ];
    let facts = dir.join("c8_facts.jsonl");
    write_rows(&facts, &rows);

    let group = FactGroup::new(rows.iter().map(|r| r.validate().unwrap()).collect()).map_err(|e| e.to_string())?;
    let t = TemplateTable::default();
    let ctx = GenContext {
        templates: &t,
        snapshot: default_snapshot(),
        split: Split::Test,
    };
    let governor = group.facts().iter().position(|f| f.object.starts_with("Governor")).unwrap();
    let q = l2_question(&group, governor, tp(2019, 7), ctx);
    ensure(q.question == "Which position did Hirofumi Yoshimura hold in Jul 2019?", || q.question.clone())?;
    ensure(q.answers == ["Governor of Osaka Prefecture"], || format!("golds {:?}", q.answers))?;
    ensure(q.negatives.iter().any(|n| n == "Mayor of Osaka"), || format!("negatives {:?}", q.negatives))?;
    ensure(TimeInterval::closed(tp(2019, 4), tp(2022, 12)).unwrap().contains(tp(2019, 7)), || "interval".into())?;

    let qpath = dir.join("c8_questions.jsonl");
    write_rows(&qpath, std::slice::from_ref(&q));
    let solved = dir.join("c8_solved.jsonl");
    tempqa(&["solve", "--questions", p(&qpath), "--facts", p(&facts), "--out", p(&solved)])?;
    let oracle: Vec<Prediction> = read(&solved)?;
    ensure(oracle[0].prediction == "Governor of Osaka Prefecture", || format!("oracle said {}", oracle[0].prediction))?;

    let rendered = dir.join("c8_render.jsonl");
    tempqa(&["render", "--questions", p(&qpath), "--facts", p(&facts), "--setting", "reasonqa", "--out", p(&rendered)])?;
    let ex: Vec<RenderedExample> = read(&rendered)?;
    ensure(ex[0].prompt.contains("Governor of Osaka Prefecture from Apr 2019 to Dec 2022."), || ex[0].prompt.clone())?;

    let wrong = dir.join("c8_wrong.jsonl");
    write_rows(&wrong, &[Prediction { id: q.id.clone(), prediction: "Mayor of Osaka".into() }]);
    let rewards = dir.join("c8_rewards.jsonl");
    tempqa(&["reward", "--questions", p(&qpath), "--predictions", p(&wrong), "--out", p(&rewards)])?;
    let r: Vec<RewardRecord> = read(&rewards)?;
    ensure(r[0].reward == -1.0, || format!("reward {}", r[0].reward))?;
    Ok("gold Governor of Osaka Prefecture, oracle agrees, reward(Mayor of Osaka) = -1".into())
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let to_status = |c: Check| match c {
        Ok(d) => Status::Pass(d),
        Err(e) => Status::Fail(e),
    };
    let results: Vec<(&str, Status)> = vec![
        ("1 oracle correctness (L2+L3 solve/eval EM = 100)", to_status(oracle_round_trip(dir))),
        ("2 L1 scale and correctness (400k unique, oracle-verified)", to_status(l1_scale(dir))),
        ("3 reward truth table (10k randomized cases)", to_status(reward_truth_table())),
        ("4 metric fidelity fixtures", to_status(metric_fixtures(dir))),
        ("5a construction rules (>=3 facts, <=2000 subjects, disjoint splits)", to_status(construction_rules(dir))),
        ("5b released facts facts/subject in 5.2-5.6", released_facts_ratio()),
        ("6 determinism and seed-only reordering", to_status(determinism(dir))),
        ("7 span masking on 1,000 documents", to_status(masking(dir))),
        ("8 Yoshimura end-to-end fixture", to_status(yoshimura(dir))),
    ];
    let mut failed = 0;
    println!();
    for (name, status) in &results {
        match status {
            Status::Pass(d) => println!("PASS     {name}: {d}"),
            Status::Fail(d) => {
                failed += 1;
                println!("FAIL     {name}: {d}")
            }
            Status::NotRun(d) => println!("NOT RUN  {name}: {d}"),
        }
    }
    println!();
    if failed > 0 {
        std::process::exit(1);
    }
}
