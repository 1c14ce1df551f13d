//! Paired baseline-versus-treatment studies: every shift policy is trained
//! with the same seeds, data and instance order, then scored on shared sets.

use std::collections::{BTreeMap, HashSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::corpus::{self, Dataset, LengthLaw, Split, SyntheticSpec};
use crate::encoding;
use crate::error::{Error, Result};
use crate::evaluation::{self, BucketKey, BucketRow, EvalSet};
use crate::model::ModelParams;
use crate::padshift::ShiftMode;
use crate::rng;
use crate::training::{self, census_report, Validation};

/// Synthetic generation followed by an optional truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRecipe {
    pub spec: SyntheticSpec,
    #[serde(default)]
    pub truncate: Option<LengthLaw>,
    /// Keep one uniformly chosen mention per example.
    #[serde(default)]
    pub reannotate: bool,
}

impl DataRecipe {
    pub fn build(&self, split: Split) -> Result<Dataset> {
        let mut d = corpus::generate_synthetic(&self.spec, split)?;
        match self.truncate {
            Some(LengthLaw::Fixed { len }) => d = corpus::truncate_fixed(&d, len)?,
            Some(LengthLaw::Range { lo, hi }) => d = corpus::truncate_range(&d, lo, hi, self.spec.seed)?,
            None => {}
        }
        if self.reannotate {
            d = corpus::reannotate_answers(&d, self.spec.seed)?;
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub name: String,
    pub train: DataRecipe,
    pub val: DataRecipe,
    pub test: DataRecipe,
    /// The first entry is the baseline and must be `off`.
    pub policies: Vec<ShiftMode>,
    pub seeds: Vec<u64>,
    /// Segment demarcations, in token positions.
    #[serde(default)]
    pub segments: Vec<usize>,
    pub bucket_width: usize,
    #[serde(default)]
    pub bucket_key: BucketKey,
    #[serde(default)]
    pub config: Config,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| {
            Err(Error::Experiment {
                plan: self.name.clone(),
                seed: None,
                message: m.to_string(),
            })
        };
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        if self.policies.first() != Some(&ShiftMode::Off) {
            return bad("the first policy must be the `off` baseline");
        }
        if self.bucket_width == 0 {
            return bad("bucket width must be positive");
        }
        self.config.validate()
    }
}

/// Everything measured for one (policy, seed) run on the test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub policy: ShiftMode,
    pub seed: u64,
    pub f1: f64,
    pub em: f64,
    /// `(x, first-segment F1, second-segment F1)`.
    pub segments: Vec<(usize, Option<f64>, Option<f64>)>,
    pub buckets: Vec<BucketRow>,
    pub best_step: Option<u64>,
    pub order_hashes: Vec<String>,
    pub census_first: f64,
    pub census_last: f64,
}

impl RunResult {
    /// Named scalar metrics used for pairing.
    pub fn metrics(&self) -> BTreeMap<String, Option<f64>> {
        let mut m = BTreeMap::new();
        m.insert("f1".to_string(), Some(self.f1));
        m.insert("em".to_string(), Some(self.em));
        for &(x, first, second) in &self.segments {
            m.insert(format!("segment{x}.first"), first);
            m.insert(format!("segment{x}.second"), second);
        }
        for (i, b) in self.buckets.iter().enumerate() {
            m.insert(format!("bucket{}", i + 1), b.mean_f1);
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedResult {
    pub metric: String,
    pub treatment: ShiftMode,
    /// `(seed, baseline, treated)`; seeds where either side is undefined are left out.
    pub pairs: Vec<(u64, f64, f64)>,
    pub mean_delta: Option<f64>,
    /// Sample standard deviation of the deltas.
    pub std_delta: Option<f64>,
}

pub fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(mean), std)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub name: String,
    pub runs: Vec<RunResult>,
    pub paired: Vec<PairedResult>,
}

impl PlanResult {
    pub fn paired(&self, metric: &str, treatment: ShiftMode) -> Option<&PairedResult> {
        self.paired.iter().find(|p| p.metric == metric && p.treatment == treatment)
    }
}

/// Data shared by every run of a plan.
pub struct PlanData {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

impl PlanData {
    pub fn build(plan: &ExperimentPlan) -> Result<Self> {
        Ok(PlanData {
            train: plan.train.build(Split::Train)?,
            val: plan.val.build(Split::Val)?,
            test: plan.test.build(Split::Test)?,
        })
    }
}

/// Train one policy at one seed and score it on the test set.
pub fn run_single(plan: &ExperimentPlan, data: &PlanData, policy: ShiftMode, seed: u64) -> Result<(ModelParams, RunResult)> {
    let mut cfg = plan.config.clone().with_seed(seed);
    cfg.padshift.set_mode(policy);
    let model_cfg = cfg.model_config()?;
    let windowing = cfg.windowing();
    let vocab = encoding::build_vocab(&data.train, model_cfg.vocab_size)?;
    let windows = encoding::encode_dataset(&data.train, &vocab, &windowing)?;
    let val = EvalSet::new(data.val.clone(), &vocab, windowing)?;
    let test = EvalSet::new(data.test.clone(), &vocab, windowing)?;
    let init = ModelParams::init(model_cfg, cfg.model.init_std, seed)?;
    let train_cfg = cfg.train_config()?;
    let outcome = training::train(&train_cfg, init, &windows, Some(Validation { set: &val, vocab: &vocab }))?;
    let (_, report) = evaluation::evaluate(&outcome.params, &test, &vocab, train_cfg.max_answer_len)?;
    let segments = plan
        .segments
        .iter()
        .map(|&x| {
            let pair = evaluation::split_segments(&data.test, x, &vocab, &windowing)?;
            Ok((
                x,
                evaluation::subset_f1(&report.instances, &pair.first),
                evaluation::subset_f1(&report.instances, &pair.second),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let buckets = evaluation::bucket_by_position(&report.instances, plan.bucket_width, model_cfg.capacity, plan.bucket_key);
    let census = census_report(&outcome.census)?;
    let result = RunResult {
        policy,
        seed,
        f1: report.f1,
        em: report.em,
        segments,
        buckets,
        best_step: outcome.log.best_step,
        order_hashes: outcome.log.order_hashes.clone(),
        census_first: census.first.fraction,
        census_last: census.last.fraction,
    };
    Ok((outcome.params, result))
}

/// Pair every treatment with the baseline run of the same seed.
pub fn pair_runs(name: &str, policies: &[ShiftMode], seeds: &[u64], runs: &[RunResult]) -> Result<Vec<PairedResult>> {
    let find = |policy: ShiftMode, seed: u64| {
        runs.iter().find(|r| r.policy == policy && r.seed == seed).ok_or_else(|| Error::Experiment {
            plan: name.to_string(),
            seed: Some(seed),
            message: format!("missing result for policy {policy}"),
        })
    };
    let baseline = policies[0];
    let mut out = Vec::new();
    for &treatment in policies {
        let mut per_metric: BTreeMap<String, Vec<(u64, f64, f64)>> = BTreeMap::new();
        for &seed in seeds {
            let base = find(baseline, seed)?;
            let treated = find(treatment, seed)?;
            if base.order_hashes != treated.order_hashes {
                return Err(Error::Experiment {
                    plan: name.to_string(),
                    seed: Some(seed),
                    message: format!("instance order of {treatment} differs from the baseline"),
                });
            }
            let bm = base.metrics();
            for (metric, t) in treated.metrics() {
                let entry = per_metric.entry(metric.clone()).or_default();
                if let (Some(Some(b)), Some(t)) = (bm.get(&metric), t) {
                    entry.push((seed, *b, t));
                }
            }
        }
        for (metric, pairs) in per_metric {
            let deltas: Vec<f64> = pairs.iter().map(|(_, b, t)| t - b).collect();
            let (mean_delta, std_delta) = mean_std(&deltas);
            out.push(PairedResult {
                metric,
                treatment,
                pairs,
                mean_delta,
                std_delta,
            });
        }
    }
    Ok(out)
}

/// Run every (policy, seed) cell of the plan and pair them by seed.
pub fn run_plan(plan: &ExperimentPlan) -> Result<PlanResult> {
    plan.validate()?;
    let data = PlanData::build(plan)?;
    run_plan_on(plan, &data)
}

pub fn run_plan_on(plan: &ExperimentPlan, data: &PlanData) -> Result<PlanResult> {
    plan.validate()?;
    let mut runs = Vec::new();
    for &seed in &plan.seeds {
        for &policy in &plan.policies {
            let (_, r) = run_single(plan, data, policy, seed).map_err(|e| Error::Experiment {
                plan: plan.name.clone(),
                seed: Some(seed),
                message: format!("{policy}: {e}"),
            })?;
            runs.push(r);
        }
    }
    let paired = pair_runs(&plan.name, &plan.policies, &plan.seeds, &runs)?;
    Ok(PlanResult {
        name: plan.name.clone(),
        runs,
        paired,
    })
}

/// A uniformly drawn `fraction` of `d`, in the original order.
pub fn subsample(d: &Dataset, fraction: f64, sampling_seed: u64) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Invalid(format!("fraction {fraction} not in (0, 1]")));
    }
    let keep = (fraction * d.len() as f64).floor() as usize;
    if keep == 0 {
        return Err(Error::Invalid(format!(
            "fraction {fraction} of {} examples leaves no training instances",
            d.len()
        )));
    }
    let mut s = rng::stream(sampling_seed, "subsample", &fraction.to_string(), 0);
    let ids: HashSet<String> = index::sample(&mut s, d.len(), keep)
        .into_iter()
        .map(|i| d.examples[i].id.clone())
        .collect();
    Ok(d.retain_ids(&ids))
}

pub const SAMPLING_SEEDS: [u64; 3] = [0, 1, 2];

pub fn default_caps() -> Vec<ShiftMode> {
    let mut caps = vec![ShiftMode::Off];
    caps.extend([64, 128, 192, 256].map(|cap| ShiftMode::Capped { cap }));
    caps.push(ShiftMode::Full);
    caps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub fraction: f64,
    pub cap: ShiftMode,
    pub train_size: Vec<usize>,
    /// Mean test F1 over sampling seeds and training seeds.
    pub f1: f64,
    /// Mean paired delta against `off`.
    pub delta: Option<f64>,
    pub delta_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub name: String,
    pub cells: Vec<SweepCell>,
    /// `(fraction, sampling seed, plan result)` for every subsample.
    pub plans: Vec<(f64, u64, PlanResult)>,
}

/// Re-run `base` on subsampled training sets for every fraction and cap.
pub fn lowresource_sweep(base: &ExperimentPlan, fractions: &[f64], caps: &[ShiftMode]) -> Result<SweepResult> {
    if !caps.contains(&ShiftMode::Off) || !caps.contains(&ShiftMode::Full) {
        return Err(Error::Invalid("caps must include 0 (off) and full".into()));
    }
    let mut policies = vec![ShiftMode::Off];
    policies.extend(caps.iter().copied().filter(|&c| c != ShiftMode::Off));
    let plan = ExperimentPlan {
        policies: policies.clone(),
        ..base.clone()
    };
    plan.validate()?;
    let full = PlanData::build(&plan)?;
    let mut plans = Vec::new();
    let mut cells = Vec::new();
    for &fraction in fractions {
        let mut sizes = Vec::new();
        let mut results = Vec::new();
        for &sampling_seed in &SAMPLING_SEEDS {
            let data = PlanData {
                train: subsample(&full.train, fraction, sampling_seed)?,
                val: full.val.clone(),
                test: full.test.clone(),
            };
            sizes.push(data.train.len());
            let named = ExperimentPlan {
                name: format!("{}@{fraction}#{sampling_seed}", plan.name),
                ..plan.clone()
            };
            results.push(run_plan_on(&named, &data)?);
        }
        for &cap in &policies {
            let f1s: Vec<f64> = results
                .iter()
                .flat_map(|r| r.runs.iter().filter(|x| x.policy == cap).map(|x| x.f1))
                .collect();
            let deltas: Vec<f64> = results
                .iter()
                .filter_map(|r| r.paired("f1", cap))
                .flat_map(|p| p.pairs.iter().map(|(_, b, t)| t - b))
                .collect();
            let (delta, delta_std) = mean_std(&deltas);
            cells.push(SweepCell {
                fraction,
                cap,
                train_size: sizes.clone(),
                f1: mean_std(&f1s).0.unwrap_or(0.0),
                delta,
                delta_std,
            });
        }
        for (seed, r) in SAMPLING_SEEDS.iter().zip(results) {
            plans.push((fraction, *seed, r));
        }
    }
    Ok(SweepResult {
        name: plan.name.clone(),
        cells,
        plans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerLaw;

    fn recipe(len: LengthLaw, count: usize, seed: u64) -> DataRecipe {
        DataRecipe {
            spec: SyntheticSpec {
                vocab_size: 20,
                length: len,
                answer: AnswerLaw::Uniform,
                distractor_rate: 0.1,
                count,
                seed,
            },
            truncate: None,
            reannotate: false,
        }
    }

    fn tiny_plan(policies: Vec<ShiftMode>) -> ExperimentPlan {
        let mut config = Config::default();
        config.model = crate::config::ModelSection {
            vocab_size: 32,
            capacity: 16,
            hidden: 8,
            layers: 1,
            heads: 2,
            ff: 8,
            init_std: 0.1,
            stride: None,
        };
        config.train.epochs = 1;
        config.train.eval_every = 0;
        config.train.lr = 1e-2;
        ExperimentPlan {
            name: "tiny".into(),
            train: recipe(LengthLaw::Fixed { len: 5 }, 24, 1),
            val: recipe(LengthLaw::Range { lo: 5, hi: 10 }, 8, 2),
            test: recipe(LengthLaw::Range { lo: 5, hi: 10 }, 8, 3),
            policies,
            seeds: vec![0, 1],
            segments: vec![8],
            bucket_width: 4,
            bucket_key: BucketKey::Predicted,
            config,
        }
    }

    #[test]
    fn self_comparison_has_zero_deltas() {
        let r = run_plan(&tiny_plan(vec![ShiftMode::Off])).unwrap();
        assert_eq!(r.runs.len(), 2);
        for p in &r.paired {
            assert!(p.pairs.iter().all(|(_, b, t)| b == t), "{}", p.metric);
        }
        assert_eq!(r.paired("f1", ShiftMode::Off).unwrap().mean_delta, Some(0.0));
    }

    #[test]
    fn treatment_shares_order_and_is_deterministic() {
        let plan = tiny_plan(vec![ShiftMode::Off, ShiftMode::Full]);
        let a = run_plan(&plan).unwrap();
        assert_eq!(a.runs[0].order_hashes, a.runs[1].order_hashes);
        assert_eq!(a.paired("f1", ShiftMode::Full).unwrap().pairs.len(), 2);
        assert_eq!(a, run_plan(&plan).unwrap());
    }

    #[test]
    fn mismatched_order_is_rejected() {
        let plan = tiny_plan(vec![ShiftMode::Off, ShiftMode::Full]);
        let mut r = run_plan(&plan).unwrap().runs;
        r[1].order_hashes[0] = "x".into();
        let err = pair_runs("tiny", &plan.policies, &plan.seeds, &r).unwrap_err();
        assert!(matches!(err, Error::Experiment { seed: Some(0), .. }));
    }

    #[test]
    fn plan_needs_baseline_and_seeds() {
        assert!(tiny_plan(vec![ShiftMode::Full]).validate().is_err());
        let mut p = tiny_plan(vec![ShiftMode::Off]);
        p.seeds.clear();
        assert!(p.validate().is_err());
    }

    #[test]
    fn subsample_is_deterministic() {
        let d = recipe(LengthLaw::Fixed { len: 5 }, 40, 0).build(Split::Train).unwrap();
        let a = subsample(&d, 0.25, 1).unwrap();
        assert_eq!(a.len(), 10);
        assert_eq!(a, subsample(&d, 0.25, 1).unwrap());
        assert_ne!(a, subsample(&d, 0.25, 2).unwrap());
        assert!(subsample(&d, 0.01, 1).is_err());
        assert_eq!(subsample(&d, 1.0, 5).unwrap(), d);
    }

    #[test]
    fn caps_default() {
        let caps = default_caps();
        assert_eq!(caps.len(), 6);
        assert_eq!(caps[0], ShiftMode::Off);
        assert_eq!(caps[5], ShiftMode::Full);
    }

    #[test]
    fn mean_and_sample_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, Some(2.0));
        assert!((s.unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[]), (None, None));
    }
}
