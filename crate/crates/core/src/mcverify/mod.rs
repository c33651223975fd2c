//! Monte Carlo harness: linearity residuals, efficiency gaps, adaptivity
//! probes, the bootstrap for the mean and the smoothness check.
//!
//! Every replication draws from its own stream keyed by (experiment, n, rep),
//! and reductions run serially in replication order, so results are identical
//! under serial and parallel execution.

mod bootstrap;
mod output;
mod smoothness;

pub use bootstrap::{bootstrap_centered_mean, MIN_BOOTSTRAP};
pub use output::{write_records, write_summaries, RunMeta};
pub use smoothness::{check_smoothness, SmoothnessRow, MIN_SMOOTHNESS_REPS, SMOOTHNESS_EPS};

use std::sync::Arc;

use crate::combine::{
    direct_substitute, discretized_substitute, split_sample_combine, Estimate, SplitScheme,
    SubmodelEstimator, Substitution, ThetaEstimator,
};
use crate::error::{Error, Result};
use crate::influence::InfluenceEvaluator;
use crate::models::ModelTruth;
use crate::par::{self, Execution};
use crate::rng::StreamKey;
use crate::stats::{self, McEstimate, Moments};

/// Reduces an estimate to the reported real number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// Component of a vector estimate.
    Component(usize),
    /// Distribution estimate evaluated at t.
    CdfAt(f64),
}

impl Functional {
    pub fn apply(&self, est: &Estimate) -> Result<f64> {
        match *self {
            Functional::Component(i) => {
                est.as_vector()?.get(i).copied().ok_or(Error::EstimateShape)
            }
            Functional::CdfAt(t) => Ok(est.as_distribution()?.cdf_at(t)),
        }
    }
}

/// How θ̂ and the submodel estimate are combined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Combiner {
    Direct,
    Split,
    DiscretizedDirect { zeta: f64 },
}

impl Combiner {
    pub fn name(&self) -> &'static str {
        match self {
            Combiner::Direct => "direct",
            Combiner::Split => "split",
            Combiner::DiscretizedDirect { .. } => "discretized-direct",
        }
    }

    pub fn apply(
        &self,
        data: &crate::models::Dataset,
        th: &dyn ThetaEstimator,
        sub: &dyn SubmodelEstimator,
    ) -> Result<Substitution> {
        match *self {
            Combiner::Direct => direct_substitute(data, th, sub),
            Combiner::Split => split_sample_combine(data, th, sub, SplitScheme::default()),
            Combiner::DiscretizedDirect { zeta } => discretized_substitute(data, th, sub, zeta),
        }
    }
}

/// Everything needed to simulate one estimator of one functional.
#[derive(Clone)]
pub struct Pipeline {
    pub name: String,
    pub truth: Arc<ModelTruth>,
    pub theta: Arc<dyn ThetaEstimator>,
    pub sub: Arc<dyn SubmodelEstimator>,
    /// Scalar influence function ψ̃ of the functional.
    pub influence: Arc<dyn InfluenceEvaluator>,
    pub functional: Functional,
    pub truth_value: f64,
    pub combiner: Combiner,
}

impl Pipeline {
    pub fn with_combiner(&self, combiner: Combiner) -> Pipeline {
        Pipeline {
            combiner,
            ..self.clone()
        }
    }

    pub fn with_theta(&self, theta: Arc<dyn ThetaEstimator>) -> Pipeline {
        Pipeline {
            theta,
            ..self.clone()
        }
    }

    pub fn model_name(&self) -> &'static str {
        self.truth.model().name()
    }
}

/// One simulated replication.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationRecord {
    pub rep_id: usize,
    pub n: usize,
    /// Stream id the replication drew from.
    pub seed: u64,
    pub theta_hat: Vec<f64>,
    pub functional_value: f64,
    pub truth_value: f64,
    pub influence_mean: f64,
    /// √n |estimate − truth − influence mean|.
    pub residual: f64,
}

/// Aggregate over the successful replications at one n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SummaryStats {
    pub n: usize,
    pub reps: usize,
    pub failures: usize,
    /// Mean of √n(estimate − truth).
    pub mean: f64,
    /// Sample variance of √n(estimate − truth).
    pub variance: f64,
    pub median_residual: f64,
    /// Standard error of `variance`.
    pub mc_se: f64,
}

impl SummaryStats {
    /// Summarizes records; they are sorted by `rep_id` first so the result
    /// does not depend on their order.
    pub fn from_records(n: usize, records: &[ReplicationRecord], failures: usize) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::SampleTooSmall {
                got: records.len(),
                need: 2,
            });
        }
        let mut sorted: Vec<&ReplicationRecord> = records.iter().collect();
        sorted.sort_by_key(|r| r.rep_id);
        let scaled: Vec<f64> = sorted
            .iter()
            .map(|r| (r.n as f64).sqrt() * (r.functional_value - r.truth_value))
            .collect();
        let residuals: Vec<f64> = sorted.iter().map(|r| r.residual).collect();
        let var = stats::variance_se(&scaled);
        Ok(SummaryStats {
            n,
            reps: records.len(),
            failures,
            mean: stats::mean(&scaled),
            variance: var.value,
            median_residual: stats::median(&residuals),
            mc_se: var.se,
        })
    }

    pub fn variance_estimate(&self) -> McEstimate {
        McEstimate {
            value: self.variance,
            se: self.mc_se,
        }
    }
}

/// Replication settings shared by the experiments.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub drift_t: f64,
    pub seed: u64,
    pub exec: Execution,
}

pub const MIN_LINEARITY_REPS: usize = 100;
pub const MIN_LINEARITY_N: usize = 20;
pub const MIN_EFFICIENCY_REPS: usize = 1000;
/// Largest tolerated share of failed replications.
pub const MAX_FAILURE_SHARE: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub records: Vec<ReplicationRecord>,
    pub summaries: Vec<SummaryStats>,
}

impl ExperimentOutput {
    pub fn summary(&self, n: usize) -> Option<&SummaryStats> {
        self.summaries.iter().find(|s| s.n == n)
    }
}

pub fn replication_key(seed: u64, experiment: &str, n: usize, rep: usize) -> StreamKey {
    StreamKey::root(seed)
        .child(experiment)
        .index(n as u64)
        .index(rep as u64)
}

fn drifted(theta0: &[f64], drift_t: f64, n: usize) -> Vec<f64> {
    let step = drift_t / (n as f64).sqrt();
    theta0.iter().map(|t| t + step).collect()
}

fn one_replication(
    p: &Pipeline,
    truth_n: &ModelTruth,
    theta_n: &[f64],
    key: StreamKey,
    n: usize,
    rep: usize,
    with_influence: bool,
) -> Result<ReplicationRecord> {
    let data = p.truth.model().sample_at(theta_n, n, &mut key.rng())?;
    let sub = p.combiner.apply(&data, p.theta.as_ref(), p.sub.as_ref())?;
    let value = p.functional.apply(&sub.estimate)?;
    let influence_mean = if with_influence {
        let mut acc = 0.0;
        for obs in data.iter() {
            acc += p.influence.eval_scalar(obs, theta_n, truth_n)?;
        }
        acc / n as f64
    } else {
        0.0
    };
    let fields = [value, influence_mean];
    if fields.iter().chain(&sub.theta_hat).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(ReplicationRecord {
        rep_id: rep,
        n,
        seed: key.id(),
        theta_hat: sub.theta_hat,
        functional_value: value,
        truth_value: p.truth_value,
        influence_mean,
        residual: (n as f64).sqrt() * (value - p.truth_value - influence_mean).abs(),
    })
}

/// Runs `reps` replications at one n; failed replications are counted.
fn run_at_n(
    p: &Pipeline,
    spec: &ExperimentSpec,
    n: usize,
    with_influence: bool,
) -> Result<(Vec<ReplicationRecord>, SummaryStats)> {
    let theta_n = drifted(&p.truth.model().theta0(), spec.drift_t, n);
    let shifted;
    let truth_n: &ModelTruth = if spec.drift_t == 0.0 {
        &p.truth
    } else {
        shifted = p.truth.at_theta(&theta_n)?;
        &shifted
    };
    let results = par::map_indexed(spec.reps, spec.exec, |rep| {
        let key = replication_key(spec.seed, &spec.name, n, rep);
        one_replication(p, truth_n, &theta_n, key, n, rep, with_influence)
    });
    let mut records = Vec::with_capacity(spec.reps);
    let mut failures = 0;
    let mut first_error = None;
    for r in results {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => {
                failures += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if failures as f64 > MAX_FAILURE_SHARE * spec.reps as f64 {
        return Err(Error::TooManyFailures {
            failed: failures,
            total: spec.reps,
        });
    }
    let summary = SummaryStats::from_records(n, &records, failures)?;
    Ok((records, summary))
}

fn validate(spec: &ExperimentSpec, min_reps: usize) -> Result<()> {
    if spec.reps < min_reps {
        return Err(Error::SampleTooSmall {
            got: spec.reps,
            need: min_reps,
        });
    }
    if spec.n_list.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&n) = spec.n_list.iter().find(|&&n| n < MIN_LINEARITY_N) {
        return Err(Error::SampleTooSmall {
            got: n,
            need: MIN_LINEARITY_N,
        });
    }
    if !spec.drift_t.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Simulates the pipeline at θₙ = θ₀ + t/√n for every n and records the
/// linearity residual √n|κ̂ − κ − n⁻¹Σψ̃(Xᵢ; θₙ)|.
pub fn run_linearity_experiment(p: &Pipeline, spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    validate(spec, MIN_LINEARITY_REPS)?;
    if p.influence.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: p.influence.dim(),
        });
    }
    let mut records = Vec::new();
    let mut summaries = Vec::new();
    for &n in &spec.n_list {
        let (r, s) = run_at_n(p, spec, n, true)?;
        records.extend(r);
        summaries.push(s);
    }
    Ok(ExperimentOutput { records, summaries })
}

/// Simulated variance against the variance predicted by the influence
/// function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EfficiencyGap {
    /// Var √n(κ̂ − κ) over the replications.
    pub empirical: McEstimate,
    /// Monte Carlo E ψ̃².
    pub predicted: McEstimate,
    pub ratio: f64,
    pub ratio_se: f64,
}

/// Monte Carlo E ψ̃² at θ₀ from `mc_n` fresh draws.
pub fn predicted_variance(
    p: &Pipeline,
    mc_n: usize,
    key: StreamKey,
    exec: Execution,
) -> Result<McEstimate> {
    const CHUNK: usize = 8192;
    let model = p.truth.model();
    let theta0 = model.theta0();
    let parts = par::map_chunks(mc_n, CHUNK, exec, |c, range| -> Result<Moments> {
        let data = model.sample_at(&theta0, range.len().max(2), &mut key.index(c as u64).rng())?;
        let mut m = Moments::default();
        for obs in data.iter().take(range.len()) {
            m.push(p.influence.eval_scalar(obs, &theta0, &p.truth)?.powi(2));
        }
        Ok(m)
    });
    let mut total = Moments::default();
    for part in parts {
        total.merge(&part?);
    }
    Ok(total.mean_se())
}

/// Draws used for the predicted variance unless stated otherwise.
pub const DEFAULT_PREDICTION_DRAWS: usize = 1_000_000;

pub fn efficiency_gap(
    p: &Pipeline,
    n: usize,
    reps: usize,
    mc_n: usize,
    seed: u64,
    exec: Execution,
) -> Result<EfficiencyGap> {
    let spec = ExperimentSpec {
        name: format!("{}/efficiency", p.name),
        n_list: vec![n],
        reps,
        drift_t: 0.0,
        seed,
        exec,
    };
    validate(&spec, MIN_EFFICIENCY_REPS)?;
    let (_, summary) = run_at_n(p, &spec, n, false)?;
    let predicted = predicted_variance(
        p,
        mc_n,
        StreamKey::root(seed).child(&p.name).child("prediction"),
        exec,
    )?;
    let empirical = summary.variance_estimate();
    let ratio = empirical.value / predicted.value;
    let rel = |e: &McEstimate| if e.value == 0.0 { 0.0 } else { e.se / e.value };
    let ratio_se = ratio.abs() * (rel(&empirical).powi(2) + rel(&predicted).powi(2)).sqrt();
    Ok(EfficiencyGap {
        empirical,
        predicted,
        ratio,
        ratio_se,
    })
}

/// One θ-estimator variant in an adaptivity comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct AdaptivityRow {
    pub label: String,
    pub empirical: McEstimate,
    /// Variance relative to the first variant, with a paired standard error.
    pub ratio: f64,
    pub ratio_se: f64,
}

/// Runs the pipeline once per θ-variant on common random numbers.
pub fn adaptivity_probe(
    p: &Pipeline,
    variants: &[(String, Arc<dyn ThetaEstimator>)],
    n: usize,
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<AdaptivityRow>> {
    if variants.len() < 2 {
        return Err(Error::SampleTooSmall {
            got: variants.len(),
            need: 2,
        });
    }
    let spec = ExperimentSpec {
        name: format!("{}/adaptivity", p.name),
        n_list: vec![n],
        reps,
        drift_t: 0.0,
        seed,
        exec,
    };
    validate(&spec, MIN_EFFICIENCY_REPS)?;
    let mut runs = Vec::with_capacity(variants.len());
    for (_, th) in variants {
        let (records, summary) = run_at_n(&p.with_theta(th.clone()), &spec, n, false)?;
        runs.push((records, summary));
    }
    let squared = |records: &[ReplicationRecord], mean: f64| -> Vec<(usize, f64)> {
        records
            .iter()
            .map(|r| {
                let v = (r.n as f64).sqrt() * (r.functional_value - r.truth_value) - mean;
                (r.rep_id, v * v)
            })
            .collect()
    };
    let base = squared(&runs[0].0, runs[0].1.mean);
    let mut rows = Vec::with_capacity(variants.len());
    for ((label, _), (records, summary)) in variants.iter().zip(&runs) {
        let other = squared(records, summary.mean);
        // pair on replications that succeeded in both runs
        let mut pairs = Vec::new();
        let mut j = 0;
        for (rep, a) in &base {
            while j < other.len() && other[j].0 < *rep {
                j += 1;
            }
            if j < other.len() && other[j].0 == *rep {
                pairs.push((*a, other[j].1));
            }
        }
        let ma = pairs.iter().map(|p| p.0).sum::<f64>() / pairs.len() as f64;
        let mb = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
        let ratio = mb / ma;
        let infl: Vec<f64> = pairs.iter().map(|(a, b)| (b - ratio * a) / ma).collect();
        rows.push(AdaptivityRow {
            label: label.clone(),
            empirical: summary.variance_estimate(),
            ratio,
            ratio_se: stats::mean_se(&infl).se,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::{Estimate, KnownTheta};
    use crate::estimators::{SimpleSub, SimpleTheta};
    use crate::influence::{VarianceInfluence, ZeroInfluence};
    use crate::models::{ErrorLaw, LocationModel, Model};

    fn location_truth() -> Arc<ModelTruth> {
        Arc::new(ModelTruth::new(Model::Location(LocationModel {
            theta0: 0.5,
            law: ErrorLaw::normal(1.0).unwrap(),
        })))
    }

    fn spec(n_list: Vec<usize>, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            name: "test".into(),
            n_list,
            reps,
            drift_t: 0.0,
            seed: 11,
            exec: Execution::Parallel,
        }
    }

    #[test]
    fn constant_pipeline_has_zero_residual() {
        let constant = |_: &crate::models::Dataset, _: &[f64]| Ok(Estimate::scalar(2.0));
        let p = Pipeline {
            name: "constant".into(),
            truth: location_truth(),
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(constant),
            influence: Arc::new(ZeroInfluence(1)),
            functional: Functional::Component(0),
            truth_value: 2.0,
            combiner: Combiner::Direct,
        };
        let out = run_linearity_experiment(&p, &spec(vec![20, 40], 100)).unwrap();
        assert!(out.records.iter().all(|r| r.residual == 0.0));
        assert_eq!(out.summaries[0].variance, 0.0);
    }

    #[test]
    fn known_theta_variance_is_exactly_linear() {
        let truth = location_truth();
        let p = Pipeline {
            name: "known-variance".into(),
            truth: truth.clone(),
            theta: Arc::new(KnownTheta(vec![0.5])),
            sub: Arc::new(SimpleSub::Variance),
            influence: Arc::new(VarianceInfluence),
            functional: Functional::Component(0),
            truth_value: 1.0,
            combiner: Combiner::Direct,
        };
        let out = run_linearity_experiment(&p, &spec(vec![50, 400], 100)).unwrap();
        for r in &out.records {
            assert!(r.residual <= 1e-10 * (r.n as f64).sqrt(), "{}", r.residual);
        }
    }

    #[test]
    fn serial_and_parallel_agree_and_order_is_irrelevant() {
        let p = Pipeline {
            name: "variance".into(),
            truth: location_truth(),
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(SimpleSub::Variance),
            influence: Arc::new(VarianceInfluence),
            functional: Functional::Component(0),
            truth_value: 1.0,
            combiner: Combiner::Split,
        };
        let mut s = spec(vec![30], 120);
        s.drift_t = 1.0;
        let a = run_linearity_experiment(&p, &s).unwrap();
        s.exec = Execution::Serial;
        let b = run_linearity_experiment(&p, &s).unwrap();
        assert_eq!(a, b);
        let mut reversed = a.records.clone();
        reversed.reverse();
        assert_eq!(
            SummaryStats::from_records(30, &reversed, 0).unwrap(),
            a.summaries[0]
        );
    }

    #[test]
    fn preconditions() {
        let p = Pipeline {
            name: "variance".into(),
            truth: location_truth(),
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(SimpleSub::Variance),
            influence: Arc::new(VarianceInfluence),
            functional: Functional::Component(0),
            truth_value: 1.0,
            combiner: Combiner::Direct,
        };
        assert!(run_linearity_experiment(&p, &spec(vec![50], 99)).is_err());
        assert!(run_linearity_experiment(&p, &spec(vec![19], 100)).is_err());
        assert!(efficiency_gap(&p, 50, 999, 10_000, 1, Execution::Serial).is_err());

        let failing =
            |_: &crate::models::Dataset, _: &[f64]| -> Result<Estimate> { Err(Error::Empty) };
        let bad = Pipeline {
            sub: Arc::new(failing),
            ..p.clone()
        };
        assert!(matches!(
            run_linearity_experiment(&bad, &spec(vec![20], 100)),
            Err(Error::TooManyFailures {
                failed: 100,
                total: 100
            })
        ));
    }

    #[test]
    fn constant_functional_has_zero_empirical_variance() {
        let constant = |_: &crate::models::Dataset, _: &[f64]| Ok(Estimate::scalar(1.0));
        let p = Pipeline {
            name: "constant".into(),
            truth: location_truth(),
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(constant),
            influence: Arc::new(ZeroInfluence(1)),
            functional: Functional::Component(0),
            truth_value: 1.0,
            combiner: Combiner::Direct,
        };
        let gap = efficiency_gap(&p, 20, 1000, 10_000, 3, Execution::Parallel).unwrap();
        assert_eq!(gap.empirical.value, 0.0);
        assert_eq!(gap.predicted.value, 0.0);
    }

    #[test]
    fn identical_variants_give_unit_ratio() {
        let p = Pipeline {
            name: "variance".into(),
            truth: location_truth(),
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(SimpleSub::Variance),
            influence: Arc::new(VarianceInfluence),
            functional: Functional::Component(0),
            truth_value: 1.0,
            combiner: Combiner::Direct,
        };
        let v: Vec<(String, Arc<dyn ThetaEstimator>)> = vec![
            ("a".into(), Arc::new(SimpleTheta::Mean)),
            ("b".into(), Arc::new(SimpleTheta::Mean)),
        ];
        let rows = adaptivity_probe(&p, &v, 30, 1000, 5, Execution::Parallel).unwrap();
        assert_eq!(rows[1].ratio, 1.0);
        assert_eq!(rows[0].empirical, rows[1].empirical);
        assert!(adaptivity_probe(&p, &v[..1], 30, 1000, 5, Execution::Parallel).is_err());
    }
}
