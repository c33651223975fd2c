//! Ready-made pipelines pairing a model with the estimators and the composed
//! influence function of one functional.

use std::sync::Arc;

use crate::combine::{
    compose_full_influence, estimate_c_matrix, KnownTheta, SubmodelEstimator, ThetaEstimator,
};
use crate::error::{Error, Result};
use crate::estimators::{
    BaselineKind, CoxBaselineSub, HMomentSub, Link, PartialLikelihoodTheta, SimpleSub, SimpleTheta,
};
use crate::influence::{
    law_moment, CoxBaselineInfluence, CoxEfficientBaselineInfluence, HMomentInfluence,
    InfluenceEvaluator, LeastSquaresInfluence, LocationErrorDistInfluence, MeanInfluence,
    ResidualIndicatorInfluence, StdRegressionThetaInfluence, SymErrorDistInfluence,
    TwoSampleDistInfluence, TwoSampleThetaInfluence, VarianceInfluence, ZeroInfluence,
};
use crate::linalg::Matrix;
use crate::mcverify::{Combiner, Functional, Pipeline};
use crate::models::{cox_efficient_information, Model, ModelTruth};
use crate::par::Execution;
use crate::rng::StreamKey;

/// Test function h for the h-moment functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HFunction {
    Identity,
    Square,
    Cube,
}

impl HFunction {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "identity" => Ok(HFunction::Identity),
            "square" => Ok(HFunction::Square),
            "cube" => Ok(HFunction::Cube),
            other => Err(Error::InvalidParameter(format!(
                "unknown h function '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HFunction::Identity => "identity",
            HFunction::Square => "square",
            HFunction::Cube => "cube",
        }
    }

    pub fn as_fn(&self) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
        match self {
            HFunction::Identity => Arc::new(|x| x),
            HFunction::Square => Arc::new(|x| x * x),
            HFunction::Cube => Arc::new(|x| x * x * x),
        }
    }
}

/// The target functional of a pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionalSpec {
    /// Error cdf at t; for the Cox model, the baseline cdf at t.
    CdfAt(f64),
    /// Error variance (location model).
    Variance,
    /// E h(ε) (location or standardized regression model).
    HMoment(HFunction),
}

impl FunctionalSpec {
    pub fn name(&self) -> String {
        match self {
            FunctionalSpec::CdfAt(t) => format!("cdf-at-{t}"),
            FunctionalSpec::Variance => "variance".into(),
            FunctionalSpec::HMoment(h) => format!("h-moment-{}", h.name()),
        }
    }
}

/// Which submodel estimator a distribution functional uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubChoice {
    /// The weighted, symmetrized or pooled estimator the model admits.
    #[default]
    Efficient,
    /// The plain residual empirical distribution.
    Plain,
}

#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    pub combiner: Combiner,
    pub sub: SubChoice,
    pub baseline: BaselineKind,
    /// Monte Carlo draws for c and, in the Cox model, for I*.
    pub mc_draws: usize,
    pub key: StreamKey,
    pub exec: Execution,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            combiner: Combiner::Direct,
            sub: SubChoice::Efficient,
            baseline: BaselineKind::Npmle,
            mc_draws: 200_000,
            key: StreamKey::root(0).child("pipeline"),
            exec: Execution::default(),
        }
    }
}

struct Parts {
    theta: Arc<dyn ThetaEstimator>,
    sub: Arc<dyn SubmodelEstimator>,
    psi_kappa: Arc<dyn InfluenceEvaluator>,
    psi_theta: Arc<dyn InfluenceEvaluator>,
    functional: Functional,
    truth_value: f64,
    /// c is known to vanish, so no Monte Carlo is needed.
    c_vanishes: bool,
}

fn unsupported(model: &Model, f: &FunctionalSpec) -> Error {
    Error::InvalidParameter(format!(
        "functional {} is not available for the {} model",
        f.name(),
        model.name()
    ))
}

fn parts(model: &Model, f: &FunctionalSpec, opts: &PipelineOptions) -> Result<Parts> {
    let law = model.law().copied();
    let plain = opts.sub == SubChoice::Plain;
    let residual_cdf = |t: f64,
                        link: Link,
                        theta: Arc<dyn ThetaEstimator>,
                        psi_theta: Arc<dyn InfluenceEvaluator>|
     -> Result<Parts> {
        let law = law.ok_or_else(|| unsupported(model, f))?;
        Ok(Parts {
            theta,
            sub: Arc::new(SimpleSub::Residual(link)),
            psi_kappa: Arc::new(ResidualIndicatorInfluence { t, link }),
            psi_theta,
            functional: Functional::CdfAt(t),
            truth_value: law.cdf(t),
            c_vanishes: false,
        })
    };
    match (model, *f) {
        (Model::Location(m), FunctionalSpec::Variance) => Ok(Parts {
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(SimpleSub::Variance),
            psi_kappa: Arc::new(VarianceInfluence),
            psi_theta: Arc::new(MeanInfluence),
            functional: Functional::Component(0),
            truth_value: m.law.variance(),
            // E ε³ = 0 for every symmetric law
            c_vanishes: true,
        }),
        (Model::Location(_), FunctionalSpec::CdfAt(t)) if plain => residual_cdf(
            t,
            Link::Location,
            Arc::new(SimpleTheta::Mean),
            Arc::new(MeanInfluence),
        ),
        (Model::Location(m), FunctionalSpec::CdfAt(t)) => Ok(Parts {
            theta: Arc::new(SimpleTheta::Mean),
            sub: Arc::new(SimpleSub::LocationWeighted),
            psi_kappa: Arc::new(LocationErrorDistInfluence { t }),
            psi_theta: Arc::new(MeanInfluence),
            functional: Functional::CdfAt(t),
            truth_value: m.law.cdf(t),
            c_vanishes: false,
        }),
        (Model::Location(m), FunctionalSpec::HMoment(h)) => {
            let psi = HMomentInfluence::new(h.as_fn(), &m.law, Link::Location);
            Ok(Parts {
                theta: Arc::new(SimpleTheta::Mean),
                sub: Arc::new(HMomentSub {
                    h: h.as_fn(),
                    link: Link::Location,
                }),
                truth_value: psi.mean_h(),
                psi_kappa: Arc::new(psi),
                psi_theta: Arc::new(MeanInfluence),
                functional: Functional::Component(0),
                c_vanishes: false,
            })
        }
        (Model::SymRegression(m), FunctionalSpec::CdfAt(t)) => {
            let dim = m.theta0.len();
            let theta: Arc<dyn ThetaEstimator> = Arc::new(SimpleTheta::LeastSquares { dim });
            let psi_theta: Arc<dyn InfluenceEvaluator> =
                Arc::new(LeastSquaresInfluence::for_model(model)?);
            if plain {
                return residual_cdf(t, Link::Regression, theta, psi_theta);
            }
            Ok(Parts {
                theta,
                sub: Arc::new(SimpleSub::Symmetrized),
                psi_kappa: Arc::new(SymErrorDistInfluence { t }),
                psi_theta,
                functional: Functional::CdfAt(t),
                truth_value: m.law.cdf(t),
                c_vanishes: false,
            })
        }
        (Model::StdRegression(m), FunctionalSpec::HMoment(h)) => {
            let psi = HMomentInfluence::new(h.as_fn(), &m.law, Link::Standardized);
            Ok(Parts {
                theta: Arc::new(SimpleTheta::StdLeastSquares { dim: m.nu0.len() }),
                sub: Arc::new(HMomentSub {
                    h: h.as_fn(),
                    link: Link::Standardized,
                }),
                truth_value: psi.mean_h(),
                psi_kappa: Arc::new(psi),
                psi_theta: Arc::new(StdRegressionThetaInfluence::for_model(model)?),
                functional: Functional::Component(0),
                c_vanishes: false,
            })
        }
        (Model::StdRegression(m), FunctionalSpec::CdfAt(t)) => residual_cdf(
            t,
            Link::Standardized,
            Arc::new(SimpleTheta::StdLeastSquares { dim: m.nu0.len() }),
            Arc::new(StdRegressionThetaInfluence::for_model(model)?),
        ),
        (Model::TwoSample(m), FunctionalSpec::CdfAt(t)) if !plain => Ok(Parts {
            theta: Arc::new(SimpleTheta::TwoSample),
            sub: Arc::new(SimpleSub::TwoSample),
            psi_kappa: Arc::new(TwoSampleDistInfluence { t }),
            psi_theta: Arc::new(TwoSampleThetaInfluence),
            functional: Functional::CdfAt(t),
            truth_value: m.law.cdf(t),
            c_vanishes: false,
        }),
        _ => Err(unsupported(model, f)),
    }
}

/// Builds the pipeline for `functional` under `model`. The coupling c is
/// estimated by Monte Carlo at θ₀ unless it is known to vanish; in the Cox
/// model I* is computed first and the efficient baseline influence is used.
pub fn build_pipeline(
    model: Model,
    functional: FunctionalSpec,
    opts: &PipelineOptions,
) -> Result<Pipeline> {
    let name = format!(
        "{}/{}/{}",
        model.name(),
        functional.name(),
        opts.combiner.name()
    );
    if let Model::Cox(_) = model {
        let FunctionalSpec::CdfAt(s) = functional else {
            return Err(unsupported(&model, &functional));
        };
        return cox_baseline_pipeline(model, s, opts, name);
    }
    let p = parts(&model, &functional, opts)?;
    let truth = ModelTruth::new(model);
    let theta0 = truth.model().theta0();
    let (m, k) = (p.psi_kappa.dim(), theta0.len());
    let c = if p.c_vanishes {
        Matrix::zeros(m, k)
    } else {
        estimate_c_matrix(
            &truth,
            p.psi_kappa.as_ref(),
            &theta0,
            opts.mc_draws,
            opts.key.child("c"),
            opts.exec,
        )?
        .value
    };
    let influence = compose_full_influence(p.psi_kappa, p.psi_theta, &Matrix::zeros(m, k), &c)?;
    Ok(Pipeline {
        name,
        truth: Arc::new(truth),
        theta: p.theta,
        sub: p.sub,
        influence: Arc::new(influence),
        functional: p.functional,
        truth_value: p.truth_value,
        combiner: opts.combiner,
    })
}

fn cox_baseline_pipeline(
    model: Model,
    s: f64,
    opts: &PipelineOptions,
    name: String,
) -> Result<Pipeline> {
    let Model::Cox(cox) = model else {
        return Err(Error::SchemaMismatch {
            expected: "survival",
        });
    };
    let bare = ModelTruth::new(model);
    let istar =
        cox_efficient_information(&bare, opts.mc_draws, opts.key.child("istar"), opts.exec)?;
    let truth = bare.with_istar(istar);
    let c = estimate_c_matrix(
        &truth,
        &CoxBaselineInfluence { s },
        &[cox.theta0],
        opts.mc_draws,
        opts.key.child("c"),
        opts.exec,
    )?;
    let influence = CoxEfficientBaselineInfluence::new(&truth, s, c.value.get(0, 0))?;
    Ok(Pipeline {
        name,
        truth: Arc::new(truth),
        theta: Arc::new(PartialLikelihoodTheta::default()),
        sub: Arc::new(CoxBaselineSub {
            kind: opts.baseline,
            t0: cox.t0,
        }),
        influence: Arc::new(influence),
        functional: Functional::CdfAt(s),
        truth_value: cox.baseline_cdf(s),
        combiner: opts.combiner,
    })
}

/// Location model, plain empirical cdf of xᵢ − θ₀ at t with θ known. Its
/// influence 1[ε≤t] − G(t) ignores the moment constraint.
pub fn naive_known_theta_pipeline(model: Model, t: f64, combiner: Combiner) -> Result<Pipeline> {
    let Model::Location(m) = model else {
        return Err(Error::SchemaMismatch {
            expected: "location",
        });
    };
    Ok(Pipeline {
        name: format!("location/known-theta-plain-cdf-at-{t}/{}", combiner.name()),
        truth: Arc::new(ModelTruth::new(model)),
        theta: Arc::new(KnownTheta(vec![m.theta0])),
        sub: Arc::new(SimpleSub::Residual(Link::Location)),
        influence: Arc::new(ResidualIndicatorInfluence {
            t,
            link: Link::Location,
        }),
        functional: Functional::CdfAt(t),
        truth_value: m.law.cdf(t),
        combiner,
    })
}

/// A pipeline whose influence is identically zero, for harness checks.
pub fn without_influence(p: &Pipeline) -> Pipeline {
    Pipeline {
        influence: Arc::new(ZeroInfluence(1)),
        ..p.clone()
    }
}

/// E h(ε) under the error law of a model, by quadrature.
pub fn h_moment_truth(model: &Model, h: HFunction) -> Result<f64> {
    let law = model.law().ok_or(Error::SchemaMismatch {
        expected: "error-law model",
    })?;
    let f = h.as_fn();
    Ok(law_moment(law, |x| f(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        CovariateLaw, CoxModel, ErrorLaw, LocationModel, StdRegressionModel, SymRegressionModel,
    };

    fn location() -> Model {
        Model::Location(LocationModel {
            theta0: 1.0,
            law: ErrorLaw::normal(1.0).unwrap(),
        })
    }

    fn quick() -> PipelineOptions {
        PipelineOptions {
            mc_draws: 20_000,
            ..PipelineOptions::default()
        }
    }

    #[test]
    fn truth_values() {
        let p = build_pipeline(location(), FunctionalSpec::CdfAt(0.0), &quick()).unwrap();
        assert_eq!(p.truth_value, 0.5);
        let p = build_pipeline(location(), FunctionalSpec::Variance, &quick()).unwrap();
        assert_eq!(p.truth_value, 1.0);
        let p = build_pipeline(
            location(),
            FunctionalSpec::HMoment(HFunction::Square),
            &quick(),
        )
        .unwrap();
        assert!((p.truth_value - 1.0).abs() < 1e-9);
        let cox = Model::Cox(CoxModel::new(0.5, 1.0, 10f64.ln()).unwrap());
        let p = build_pipeline(cox, FunctionalSpec::CdfAt(2f64.ln()), &quick()).unwrap();
        assert!((p.truth_value - 0.5).abs() < 1e-12);
        assert!(p.truth.istar().is_some());
    }

    #[test]
    fn every_model_builds_and_mismatches_fail() {
        let law = ErrorLaw::logistic(1.0).unwrap();
        let sym = Model::SymRegression(
            SymRegressionModel::new(
                vec![1.0, -1.0],
                law,
                CovariateLaw::StandardNormal { dim: 2 },
            )
            .unwrap(),
        );
        let std = Model::StdRegression(
            StdRegressionModel::new(vec![0.5, 1.0], 2.0, law, CovariateLaw::Bernoulli { dim: 1 })
                .unwrap(),
        );
        for (m, f) in [
            (sym.clone(), FunctionalSpec::CdfAt(0.3)),
            (std.clone(), FunctionalSpec::HMoment(HFunction::Cube)),
            (std, FunctionalSpec::CdfAt(0.0)),
        ] {
            build_pipeline(m, f, &quick()).unwrap();
        }
        assert!(build_pipeline(sym, FunctionalSpec::Variance, &quick()).is_err());
        let uniform = Model::Location(LocationModel {
            theta0: 0.0,
            law: ErrorLaw::uniform(1.0).unwrap(),
        });
        assert!(matches!(
            build_pipeline(uniform, FunctionalSpec::CdfAt(0.0), &quick()),
            Err(Error::NoScore(_))
        ));
        assert!(naive_known_theta_pipeline(location(), 0.0, Combiner::Direct).is_ok());
    }
}
