mod output;
mod plot;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use randpad_core::config::Config;
use randpad_core::corpus::{self, AnswerLaw, Dataset, LengthLaw, Split, SyntheticSpec};
use randpad_core::encoding::{self, Vocab};
use randpad_core::evaluation::{self, BucketKey, BucketRow, EvalReport, EvalSet, Improvement, Prediction};
use randpad_core::experiments::{self, ExperimentPlan, PlanResult};
use randpad_core::model::{checkpoint, ModelParams};
use randpad_core::padshift::ShiftMode;
use randpad_core::training::{self, census_report, CensusReport, Validation};
use serde::Serialize;

use output::OutDir;
use plot::Series;

#[derive(Parser)]
#[command(name = "randpad", version, about = "Random Padding extractive-QA lab")]
struct Cli {
    /// TOML file with model.*, train.* and padshift.* keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides train.seed and padshift.seed; also seeds data generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset.
    GenData(GenData),
    /// Truncate contexts to a fixed length or a seeded random length.
    Truncate(Truncate),
    /// Keep one uniformly chosen answer mention per example.
    Reannotate(Reannotate),
    /// Train a model and write its checkpoint, run log and update census.
    Train(Train),
    /// Predict and score a dataset with a checkpoint.
    Eval(Eval),
    /// Count per-position updates a training run would make, without a model.
    Census(Census),
    /// Split an evaluation set at demarcations and score each segment.
    Segments(Segments),
    /// Classify improvements between baseline and treated predictions.
    Categorize(Categorize),
    /// Run a paired baseline-versus-treatment plan.
    Plan(PlanCmd),
    /// Low-resource sweep over training fractions and shift caps.
    Sweep(Sweep),
}

#[derive(Args)]
struct GenData {
    #[arg(long, default_value = "train")]
    split: Split,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Number of distinct content words.
    #[arg(long, default_value_t = 40)]
    vocab_size: usize,
    /// `fixed:L` or `range:L1:L2`, in words.
    #[arg(long, default_value = "fixed:25")]
    length: LengthLaw,
    /// `uniform`, `front` or `rear`.
    #[arg(long, default_value = "uniform")]
    answer: AnswerLaw,
    #[arg(long, default_value_t = 0.1)]
    distractor_rate: f64,
}

#[derive(Args)]
struct Truncate {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "train")]
    split: Split,
    /// `fixed:L` or `range:L1:L2`, in words.
    #[arg(long)]
    length: LengthLaw,
}

#[derive(Args)]
struct Reannotate {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "train")]
    split: Split,
}

#[derive(Args)]
struct Train {
    #[arg(long)]
    train: PathBuf,
    /// Validation set for checkpoint selection.
    #[arg(long)]
    val: Option<PathBuf>,
}

#[derive(Args)]
struct Eval {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    /// Bucket width in tokens; a quarter of the capacity by default.
    #[arg(long)]
    bucket_width: Option<usize>,
    /// Bucket by `predicted` start or earliest `gold` start.
    #[arg(long, default_value = "predicted")]
    bucket_key: String,
}

#[derive(Args)]
struct Census {
    #[arg(long)]
    train: PathBuf,
}

#[derive(Args)]
struct Segments {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    /// Prediction files, as `PATH` or `LABEL=PATH`.
    #[arg(long, num_args = 1.., required = true)]
    predictions: Vec<String>,
    /// Demarcations in token positions.
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<usize>,
}

#[derive(Args)]
struct Categorize {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "test")]
    split: Split,
    #[arg(long)]
    baseline: PathBuf,
    #[arg(long)]
    improved: PathBuf,
}

#[derive(Args)]
struct PlanCmd {
    /// TOML plan; its `config` table is replaced by `--config` when given.
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Args)]
struct Sweep {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.25,0.5")]
    fractions: Vec<f64>,
    /// `0` for the baseline, `full`, or a cap K.
    #[arg(long, value_delimiter = ',', default_value = "0,64,128,192,256,full")]
    caps: Vec<String>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    let manifest = match &cli.command {
        Command::GenData(a) => gen_data(&cli, &config, a)?,
        Command::Truncate(a) => truncate(&cli, &config, a)?,
        Command::Reannotate(a) => reannotate(&cli, &config, a)?,
        Command::Train(a) => train(&cli, &config, a)?,
        Command::Eval(a) => eval(&cli, config, a)?,
        Command::Census(a) => census(&cli, &config, a)?,
        Command::Segments(a) => segments(&cli, &config, a)?,
        Command::Categorize(a) => categorize(&cli, &config, a)?,
        Command::Plan(a) => plan(&cli, &config, a)?,
        Command::Sweep(a) => sweep(&cli, &config, a)?,
    };
    println!("wrote {}", manifest.display());
    Ok(())
}

fn open(cli: &Cli, command: &str, config: &Config) -> Result<OutDir> {
    let mut out = OutDir::create(&cli.out, command, config)?;
    if let Some(p) = &cli.config {
        out.input(p)?;
    }
    if let Some(seed) = cli.seed {
        out.arg("seed", seed);
    }
    Ok(out)
}

fn load(out: &mut OutDir, path: &Path, split: Split) -> Result<Dataset> {
    out.input(path)?;
    Ok(corpus::load_dataset(path, split)?)
}

fn save(out: &mut OutDir, d: &Dataset) -> Result<()> {
    let name = format!("{}.jsonl", d.split);
    corpus::save_dataset(d, &out.path(&name))?;
    out.written(&name)
}

fn gen_data(cli: &Cli, config: &Config, a: &GenData) -> Result<PathBuf> {
    let mut out = open(cli, "gen-data", config)?;
    let spec = SyntheticSpec {
        vocab_size: a.vocab_size,
        length: a.length,
        answer: a.answer,
        distractor_rate: a.distractor_rate,
        count: a.count,
        seed: cli.seed.unwrap_or(0),
    };
    out.arg("spec", serde_json::to_string(&spec)?);
    out.arg("split", a.split);
    let d = corpus::generate_synthetic(&spec, a.split)?;
    save(&mut out, &d)?;
    out.finish()
}

fn truncate(cli: &Cli, config: &Config, a: &Truncate) -> Result<PathBuf> {
    let mut out = open(cli, "truncate", config)?;
    out.arg("length", a.length);
    out.arg("split", a.split);
    let d = load(&mut out, &a.input, a.split)?;
    let t = match a.length {
        LengthLaw::Fixed { len } => corpus::truncate_fixed(&d, len)?,
        LengthLaw::Range { lo, hi } => corpus::truncate_range(&d, lo, hi, cli.seed.unwrap_or(0))?,
    };
    save(&mut out, &t)?;
    out.finish()
}

fn reannotate(cli: &Cli, config: &Config, a: &Reannotate) -> Result<PathBuf> {
    let mut out = open(cli, "reannotate", config)?;
    out.arg("split", a.split);
    let d = load(&mut out, &a.input, a.split)?;
    save(&mut out, &corpus::reannotate_answers(&d, cli.seed.unwrap_or(0))?)?;
    out.finish()
}

fn census_outputs(out: &mut OutDir, report: &CensusReport) -> Result<()> {
    out.csv("census.csv", &report.rows)?;
    out.json("census.json", report)?;
    let labels: Vec<String> = report.rows.iter().map(|r| r.position.to_string()).collect();
    let values = report.rows.iter().map(|r| Some(100.0 * r.fraction)).collect();
    let svg = plot::bar_chart(
        "Steps updating each position embedding (%)",
        &labels,
        &[Series {
            name: "updated".into(),
            values,
        }],
        100.0,
    );
    out.write("census.svg", svg.as_bytes())
}

fn train(cli: &Cli, config: &Config, a: &Train) -> Result<PathBuf> {
    let mut out = open(cli, "train", config)?;
    let data = load(&mut out, &a.train, Split::Train)?;
    let model_cfg = config.model_config()?;
    let windowing = config.windowing();
    let vocab = encoding::build_vocab(&data, model_cfg.vocab_size)?;
    let windows = encoding::encode_dataset(&data, &vocab, &windowing)?;
    let val = match &a.val {
        Some(p) => Some(EvalSet::new(load(&mut out, p, Split::Val)?, &vocab, windowing)?),
        None => None,
    };
    let init = ModelParams::init(model_cfg, config.model.init_std, config.train.seed)?;
    let outcome = training::train(
        &config.train_config()?,
        init,
        &windows,
        val.as_ref().map(|set| Validation { set, vocab: &vocab }),
    )?;
    vocab.save(&out.path("vocab.txt"))?;
    out.written("vocab.txt")?;
    out.write("model.ckpt", &checkpoint::to_bytes(&outcome.params))?;
    out.jsonl("runlog.jsonl", &outcome.log.records)?;
    out.json(
        "run.json",
        &serde_json::json!({
            "best_step": outcome.log.best_step,
            "order_hashes": outcome.log.order_hashes,
            "windows": windows.len(),
        }),
    )?;
    census_outputs(&mut out, &census_report(&outcome.census)?)?;
    out.finish()
}

fn bucket_key(s: &str) -> Result<BucketKey> {
    match s {
        "predicted" => Ok(BucketKey::Predicted),
        "gold" => Ok(BucketKey::Gold),
        other => bail!("unknown bucket key `{other}` (predicted or gold)"),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".to_string(), |x| format!("{x:.2}"))
}

fn bucket_table(rows: &[BucketRow]) -> String {
    let mut t = format!("{:>12} {:>8} {:>8}\n", "positions", "count", "F1");
    for r in rows {
        writeln!(t, "{:>12} {:>8} {:>8}", format!("{}-{}", r.lo, r.hi - 1), r.count, fmt_opt(r.mean_f1)).unwrap();
    }
    t
}

fn bucket_chart(title: &str, series: Vec<(String, &[BucketRow])>) -> String {
    let labels: Vec<String> = series[0].1.iter().map(|r| format!("{}-{}", r.lo, r.hi - 1)).collect();
    let series: Vec<Series> = series
        .into_iter()
        .map(|(name, rows)| Series {
            name,
            values: rows.iter().map(|r| r.mean_f1).collect(),
        })
        .collect();
    plot::bar_chart(title, &labels, &series, 100.0)
}

/// Model dimensions come from the checkpoint; the rest from the config.
fn with_checkpoint_model(mut config: Config, p: &ModelParams) -> Config {
    let m = &p.config;
    config.model.vocab_size = m.vocab_size;
    config.model.capacity = m.capacity;
    config.model.hidden = m.hidden;
    config.model.layers = m.layers;
    config.model.heads = m.heads;
    config.model.ff = m.ff;
    config
}

fn eval(cli: &Cli, config: Config, a: &Eval) -> Result<PathBuf> {
    let params = checkpoint::load(&a.checkpoint)?;
    let config = with_checkpoint_model(config, &params);
    let mut out = open(cli, "eval", &config)?;
    out.input(&a.checkpoint)?;
    out.input(&a.vocab)?;
    let vocab = Vocab::load(&a.vocab)?;
    let data = load(&mut out, &a.data, a.split)?;
    let key = bucket_key(&a.bucket_key)?;
    let width = a.bucket_width.unwrap_or((params.config.capacity / 4).max(1));
    out.arg("bucket_width", width);
    out.arg("bucket_key", &a.bucket_key);
    let set = EvalSet::new(data, &vocab, config.windowing())?;
    let (preds, report) = evaluation::evaluate(&params, &set, &vocab, config.train.max_answer_len)?;
    out.jsonl("predictions.jsonl", &preds)?;
    let buckets = evaluation::bucket_by_position(&report.instances, width, params.config.capacity, key);
    out.csv("buckets.csv", &buckets)?;
    out.json("report.json", &serde_json::json!({ "f1": report.f1, "em": report.em, "count": report.count, "buckets": buckets }))?;
    out.jsonl("instances.jsonl", &report.instances)?;
    let mut text = format!("examples {}\nF1 {:.2}\nEM {:.2}\n\n", report.count, report.f1, report.em);
    text.push_str(&bucket_table(&buckets));
    out.write("report.txt", text.as_bytes())?;
    let svg = bucket_chart("F1 by answer start position", vec![("F1".into(), &buckets)]);
    out.write("buckets.svg", svg.as_bytes())?;
    out.finish()
}

fn census(cli: &Cli, config: &Config, a: &Census) -> Result<PathBuf> {
    let mut out = open(cli, "census", config)?;
    let data = load(&mut out, &a.train, Split::Train)?;
    let windowing = config.windowing();
    let vocab = encoding::build_vocab(&data, config.model.vocab_size)?;
    let windows = encoding::encode_dataset(&data, &vocab, &windowing)?;
    let c = training::simulate_census(&config.train_config()?, &windows, windowing.capacity)?;
    census_outputs(&mut out, &census_report(&c)?)?;
    out.finish()
}

fn labelled(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((label, path)) => (label.to_string(), PathBuf::from(path)),
        None => {
            let p = PathBuf::from(spec);
            let label = p.parent().and_then(|d| d.file_name()).map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            (label, p)
        }
    }
}

#[derive(Serialize)]
struct SegmentRow {
    label: String,
    x: usize,
    segment: &'static str,
    count: usize,
    f1: Option<f64>,
}

fn segments(cli: &Cli, config: &Config, a: &Segments) -> Result<PathBuf> {
    let mut out = open(cli, "segments", config)?;
    out.input(&a.vocab)?;
    out.arg("x", format!("{:?}", a.x));
    let vocab = Vocab::load(&a.vocab)?;
    let data = load(&mut out, &a.data, a.split)?;
    let windowing = config.windowing();
    let mut reports: Vec<(String, EvalReport)> = Vec::new();
    for spec in &a.predictions {
        let (label, path) = labelled(spec);
        out.input(&path)?;
        let preds = evaluation::load_predictions(&path)?;
        reports.push((label, evaluation::score(&preds, &data, &vocab, &windowing)?));
    }
    let mut rows = Vec::new();
    for &x in &a.x {
        let pair = evaluation::split_segments(&data, x, &vocab, &windowing)?;
        for (label, report) in &reports {
            for (segment, ids) in [("first", &pair.first), ("second", &pair.second)] {
                rows.push(SegmentRow {
                    label: label.clone(),
                    x,
                    segment,
                    count: ids.len(),
                    f1: evaluation::subset_f1(&report.instances, ids),
                });
            }
        }
    }
    out.csv("segments.csv", &rows)?;
    out.json("segments.json", &rows)?;
    let mut text = format!("{:>12} {:>6} {:>8} {:>8} {:>8}\n", "label", "x", "segment", "count", "F1");
    for r in &rows {
        writeln!(text, "{:>12} {:>6} {:>8} {:>8} {:>8}", r.label, r.x, r.segment, r.count, fmt_opt(r.f1)).unwrap();
    }
    out.write("segments.txt", text.as_bytes())?;
    let categories: Vec<String> = a.x.iter().flat_map(|x| [format!("≤{x}"), format!(">{x}")]).collect();
    let series: Vec<Series> = reports
        .iter()
        .map(|(label, _)| Series {
            name: label.clone(),
            values: rows.iter().filter(|r| &r.label == label).map(|r| r.f1).collect(),
        })
        .collect();
    out.write("segments.svg", plot::bar_chart("F1 by segment", &categories, &series, 100.0).as_bytes())?;
    out.finish()
}

#[derive(Serialize)]
struct CategoryRow {
    id: String,
    category: Improvement,
    baseline: String,
    improved: String,
    baseline_f1: f64,
    improved_f1: f64,
}

fn categorize(cli: &Cli, config: &Config, a: &Categorize) -> Result<PathBuf> {
    let mut out = open(cli, "categorize", config)?;
    let data = load(&mut out, &a.data, a.split)?;
    out.input(&a.baseline)?;
    out.input(&a.improved)?;
    let by_id = |p: Vec<Prediction>| p.into_iter().map(|x| (x.id.clone(), x)).collect::<BTreeMap<_, _>>();
    let base = by_id(evaluation::load_predictions(&a.baseline)?);
    let better = by_id(evaluation::load_predictions(&a.improved)?);
    let mut rows = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for ex in &data.examples {
        let (Some(b), Some(i)) = (base.get(&ex.id), better.get(&ex.id)) else {
            bail!("example `{}` is missing from a prediction file", ex.id);
        };
        let golds: Vec<String> = ex.answers.iter().map(|m| m.text.clone()).collect();
        let category = evaluation::categorize_improvement(&b.text, &i.text, &golds);
        *counts.entry(serde_json::to_value(category)?.as_str().unwrap_or_default().to_string()).or_default() += 1;
        rows.push(CategoryRow {
            id: ex.id.clone(),
            category,
            baseline: b.text.clone(),
            improved: i.text.clone(),
            baseline_f1: evaluation::squad_f1(&b.text, &golds),
            improved_f1: evaluation::squad_f1(&i.text, &golds),
        });
    }
    out.csv("categories.csv", &rows)?;
    out.json("categories.json", &counts)?;
    out.finish()
}

fn load_plan(out: &mut OutDir, cli: &Cli, config: &Config, path: &Path) -> Result<ExperimentPlan> {
    out.input(path)?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut plan: ExperimentPlan = toml::from_str(&text).with_context(|| format!("parsing plan {}", path.display()))?;
    if cli.config.is_some() {
        plan.config = config.clone();
    }
    plan.config.validate()?;
    Ok(plan)
}

#[derive(Serialize)]
struct RunRow {
    policy: String,
    seed: u64,
    f1: f64,
    em: f64,
    best_step: Option<u64>,
    census_first: f64,
    census_last: f64,
}

#[derive(Serialize)]
struct PairedRow {
    metric: String,
    treatment: String,
    pairs: usize,
    mean_delta: Option<f64>,
    std_delta: Option<f64>,
}

fn plan_outputs(out: &mut OutDir, plan: &ExperimentPlan, r: &PlanResult) -> Result<()> {
    out.json("plan_result.json", r)?;
    let runs: Vec<RunRow> = r
        .runs
        .iter()
        .map(|x| RunRow {
            policy: x.policy.to_string(),
            seed: x.seed,
            f1: x.f1,
            em: x.em,
            best_step: x.best_step,
            census_first: x.census_first,
            census_last: x.census_last,
        })
        .collect();
    out.csv("runs.csv", &runs)?;
    let paired: Vec<PairedRow> = r
        .paired
        .iter()
        .map(|p| PairedRow {
            metric: p.metric.clone(),
            treatment: p.treatment.to_string(),
            pairs: p.pairs.len(),
            mean_delta: p.mean_delta,
            std_delta: p.std_delta,
        })
        .collect();
    out.csv("paired.csv", &paired)?;
    let mut text = format!("plan {}\n{:>24} {:>14} {:>6} {:>10} {:>10}\n", r.name, "metric", "treatment", "pairs", "delta", "std");
    for p in &paired {
        writeln!(text, "{:>24} {:>14} {:>6} {:>10} {:>10}", p.metric, p.treatment, p.pairs, fmt_opt(p.mean_delta), fmt_opt(p.std_delta)).unwrap();
    }
    out.write("report.txt", text.as_bytes())?;

    // per-policy means over seeds for the charts
    let mean = |policy: ShiftMode, f: &dyn Fn(&experiments::RunResult) -> Option<f64>| {
        let v: Vec<f64> = r.runs.iter().filter(|x| x.policy == policy).filter_map(f).collect();
        experiments::mean_std(&v).0
    };
    let mut categories = Vec::new();
    for &x in &plan.segments {
        categories.push(format!("≤{x}"));
        categories.push(format!(">{x}"));
    }
    if !categories.is_empty() {
        let series: Vec<Series> = plan
            .policies
            .iter()
            .map(|&policy| Series {
                name: policy.to_string(),
                values: (0..plan.segments.len())
                    .flat_map(|i| {
                        [
                            mean(policy, &|x| x.segments[i].1),
                            mean(policy, &|x| x.segments[i].2),
                        ]
                    })
                    .collect(),
            })
            .collect();
        out.write("segments.svg", plot::bar_chart("Mean F1 by segment", &categories, &series, 100.0).as_bytes())?;
    }
    if let Some(first) = r.runs.first() {
        let labels: Vec<String> = first.buckets.iter().map(|b| format!("{}-{}", b.lo, b.hi - 1)).collect();
        let series: Vec<Series> = plan
            .policies
            .iter()
            .map(|&policy| Series {
                name: policy.to_string(),
                values: (0..labels.len()).map(|i| mean(policy, &|x| x.buckets[i].mean_f1)).collect(),
            })
            .collect();
        out.write("buckets.svg", plot::bar_chart("Mean F1 by start position", &labels, &series, 100.0).as_bytes())?;
    }
    Ok(())
}

fn plan(cli: &Cli, config: &Config, a: &PlanCmd) -> Result<PathBuf> {
    let mut out = open(cli, "plan", config)?;
    let plan = load_plan(&mut out, cli, config, &a.plan)?;
    let r = experiments::run_plan(&plan)?;
    plan_outputs(&mut out, &plan, &r)?;
    out.finish()
}

fn parse_cap(s: &str) -> Result<ShiftMode> {
    match s {
        "0" | "off" => Ok(ShiftMode::Off),
        "full" => Ok(ShiftMode::Full),
        k => Ok(ShiftMode::Capped {
            cap: k.parse().with_context(|| format!("bad cap `{k}`"))?,
        }),
    }
}

#[derive(Serialize)]
struct SweepRow {
    fraction: f64,
    cap: String,
    train_sizes: String,
    f1: f64,
    delta: Option<f64>,
    delta_std: Option<f64>,
}

fn sweep(cli: &Cli, config: &Config, a: &Sweep) -> Result<PathBuf> {
    let mut out = open(cli, "sweep", config)?;
    out.arg("fractions", format!("{:?}", a.fractions));
    out.arg("caps", a.caps.join(","));
    let plan = load_plan(&mut out, cli, config, &a.plan)?;
    let caps = a.caps.iter().map(|c| parse_cap(c)).collect::<Result<Vec<_>>>()?;
    let r = experiments::lowresource_sweep(&plan, &a.fractions, &caps)?;
    out.json("sweep.json", &r)?;
    let rows: Vec<SweepRow> = r
        .cells
        .iter()
        .map(|c| SweepRow {
            fraction: c.fraction,
            cap: c.cap.to_string(),
            train_sizes: c.train_size.iter().map(|n| n.to_string()).collect::<Vec<_>>().join("/"),
            f1: c.f1,
            delta: c.delta,
            delta_std: c.delta_std,
        })
        .collect();
    out.csv("sweep.csv", &rows)?;
    let mut text = format!("{:>9} {:>12} {:>8} {:>8} {:>8}\n", "fraction", "cap", "F1", "delta", "std");
    for c in &rows {
        writeln!(text, "{:>9} {:>12} {:>8.2} {:>8} {:>8}", c.fraction, c.cap, c.f1, fmt_opt(c.delta), fmt_opt(c.delta_std)).unwrap();
    }
    out.write("report.txt", text.as_bytes())?;
    out.finish()
}
