//! Closed-form influence functions.
//!
//! Each evaluator maps one observation, a parameter value and the model truth
//! to a real vector with mean zero under the model at that parameter.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimators::Link;
use crate::linalg::Matrix;
use crate::models::{CoxModel, ErrorLaw, Model, ModelTruth, Observation};
use crate::quad::{self, CumulativeIntegral};

pub trait InfluenceEvaluator: Send + Sync {
    fn dim(&self) -> usize;
    fn label(&self) -> &str;
    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>>;

    /// Scalar shortcut for one-dimensional evaluators.
    fn eval_scalar(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<f64> {
        Ok(self.eval(obs, theta, truth)?[0])
    }
}

fn location_x(obs: Observation<'_>) -> Result<f64> {
    match obs {
        Observation::Location(x) => Ok(x),
        _ => Err(Error::SchemaMismatch {
            expected: "location",
        }),
    }
}

fn regression_parts<'a>(obs: Observation<'a>, theta: &[f64]) -> Result<(f64, &'a [f64])> {
    match obs {
        Observation::Regression { y, z } => {
            if z.len() != theta.len() {
                return Err(Error::DimensionMismatch {
                    expected: theta.len(),
                    got: z.len(),
                });
            }
            Ok((y - theta.iter().zip(z).map(|(a, b)| a * b).sum::<f64>(), z))
        }
        _ => Err(Error::SchemaMismatch {
            expected: "regression",
        }),
    }
}

fn survival_parts(obs: Observation<'_>) -> Result<(f64, f64)> {
    match obs {
        Observation::Survival { z, t } => Ok((z, t)),
        _ => Err(Error::SchemaMismatch {
            expected: "survival",
        }),
    }
}

fn indicator(cond: bool) -> f64 {
    if cond {
        1.0
    } else {
        0.0
    }
}

/// Identically zero, of dimension `dim`.
#[derive(Clone, Copy, Debug)]
pub struct ZeroInfluence(pub usize);

impl InfluenceEvaluator for ZeroInfluence {
    fn dim(&self) -> usize {
        self.0
    }

    fn label(&self) -> &str {
        "zero"
    }

    fn eval(&self, _obs: Observation<'_>, _theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        Ok(vec![0.0; self.0])
    }
}

/// Sample variance with θ known: (x − θ)² − σ².
#[derive(Clone, Copy, Debug, Default)]
pub struct VarianceInfluence;

pub fn psi_variance(x: f64, theta: f64, truth: &ModelTruth) -> f64 {
    (x - theta).powi(2) - truth.sigma2()
}

impl InfluenceEvaluator for VarianceInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "variance"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        Ok(vec![psi_variance(location_x(obs)?, theta[0], truth)])
    }
}

/// Sample mean: x − θ.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanInfluence;

pub fn psi_theta_mean(x: f64, theta: f64) -> f64 {
    x - theta
}

impl InfluenceEvaluator for MeanInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "mean"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        Ok(vec![psi_theta_mean(location_x(obs)?, theta[0])])
    }
}

/// Symmetrized residual indicator ½(1[ε≤t] + 1[−ε≤t]) − G(t), ε = y − θᵀz.
#[derive(Clone, Copy, Debug)]
pub struct SymErrorDistInfluence {
    pub t: f64,
}

pub fn psi_sym_errordist(eps: f64, law: &ErrorLaw, t: f64) -> f64 {
    0.5 * (indicator(eps <= t) + indicator(-eps <= t)) - law.cdf(t)
}

impl InfluenceEvaluator for SymErrorDistInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "symmetrized residual cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let (eps, _) = regression_parts(obs, theta)?;
        Ok(vec![psi_sym_errordist(eps, truth.law()?, self.t)])
    }
}

/// Error cdf at t with the moment constraint ∫x dG = 0 and θ known:
/// 1[x−θ≤t] − G(t) − (E[ε1[ε≤t]]/σ²)(x − θ).
#[derive(Clone, Copy, Debug)]
pub struct LocationErrorDistInfluence {
    pub t: f64,
}

pub fn psi_location_errordist(x: f64, theta: f64, law: &ErrorLaw, t: f64) -> f64 {
    let e = x - theta;
    indicator(e <= t) - law.cdf(t) - law.partial_first_moment(t) / law.variance() * e
}

impl InfluenceEvaluator for LocationErrorDistInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "weighted residual cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        Ok(vec![psi_location_errordist(
            location_x(obs)?,
            theta[0],
            truth.law()?,
            self.t,
        )])
    }
}

/// Plain residual indicator 1[t_θ(x) ≤ t] − G(t).
#[derive(Clone, Copy, Debug)]
pub struct ResidualIndicatorInfluence {
    pub t: f64,
    pub link: Link,
}

impl InfluenceEvaluator for ResidualIndicatorInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "residual cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let eps = self.link.residual(obs, theta)?;
        Ok(vec![indicator(eps <= self.t) - truth.law()?.cdf(self.t)])
    }
}

/// Pooled two-sample cdf ½(1[y≤t] + 1[z−θ≤t]) − G(t).
#[derive(Clone, Copy, Debug)]
pub struct TwoSampleDistInfluence {
    pub t: f64,
}

impl InfluenceEvaluator for TwoSampleDistInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "pooled two-sample cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        match obs {
            Observation::TwoSample { y, z } => Ok(vec![
                0.5 * (indicator(y <= self.t) + indicator(z - theta[0] <= self.t))
                    - truth.law()?.cdf(self.t),
            ]),
            _ => Err(Error::SchemaMismatch {
                expected: "two-sample",
            }),
        }
    }
}

/// Mean difference Z̄ − Ȳ: (z − θ) − y.
#[derive(Clone, Copy, Debug, Default)]
pub struct TwoSampleThetaInfluence;

impl InfluenceEvaluator for TwoSampleThetaInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "mean difference"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        match obs {
            Observation::TwoSample { y, z } => Ok(vec![z - theta[0] - y]),
            _ => Err(Error::SchemaMismatch {
                expected: "two-sample",
            }),
        }
    }
}

/// Least squares: (E zzᵀ)⁻¹ z ε.
#[derive(Clone, Debug)]
pub struct LeastSquaresInfluence {
    inv_gram: Matrix,
}

impl LeastSquaresInfluence {
    /// Uses the design second moment of a regression model.
    pub fn for_model(model: &Model) -> Result<Self> {
        let gram = match model {
            Model::SymRegression(m) => m.covariate.second_moment(),
            Model::StdRegression(m) => m.design_second_moment(),
            _ => {
                return Err(Error::SchemaMismatch {
                    expected: "regression",
                })
            }
        };
        Ok(LeastSquaresInfluence {
            inv_gram: gram.inverse()?,
        })
    }

    fn beta_part(&self, eps: f64, z: &[f64]) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = z.iter().map(|v| v * eps).collect();
        self.inv_gram.mul_vec(&scaled)
    }
}

impl InfluenceEvaluator for LeastSquaresInfluence {
    fn dim(&self) -> usize {
        self.inv_gram.rows()
    }

    fn label(&self) -> &str {
        "least squares"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        let (eps, z) = regression_parts(obs, theta)?;
        self.beta_part(eps, z)
    }
}

/// Least squares for ν plus the root mean squared residual for σ, in the
/// standardized regression parametrization θ = (ν, σ).
#[derive(Clone, Debug)]
pub struct StdRegressionThetaInfluence {
    ls: LeastSquaresInfluence,
    /// E ε⁴ of the standardized law.
    kurtosis: f64,
}

impl StdRegressionThetaInfluence {
    pub fn for_model(model: &Model) -> Result<Self> {
        let law = match model {
            Model::StdRegression(m) => m.law,
            _ => {
                return Err(Error::SchemaMismatch {
                    expected: "standardized regression",
                })
            }
        };
        Ok(StdRegressionThetaInfluence {
            ls: LeastSquaresInfluence::for_model(model)?,
            kurtosis: law_moment(&law, |x| x.powi(4)),
        })
    }

    /// E ε⁴ of the standardized error law.
    pub fn kurtosis(&self) -> f64 {
        self.kurtosis
    }
}

impl InfluenceEvaluator for StdRegressionThetaInfluence {
    fn dim(&self) -> usize {
        self.ls.dim() + 1
    }

    fn label(&self) -> &str {
        "least squares with rms scale"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        let k = theta.len() - 1;
        let sigma = theta[k];
        let (resid, z) = regression_parts(obs, &theta[..k])?;
        let mut out = self.ls.beta_part(resid, z)?;
        let eps = resid / sigma;
        // σ̂² − σ² ≈ n⁻¹Σ σ²(ε² − 1) and σ̂ − σ ≈ (σ̂² − σ²)/(2σ)
        out.push(0.5 * sigma * (eps * eps - 1.0));
        Ok(out)
    }
}

/// ∫ f dG by quadrature between far quantiles.
pub fn law_moment<F: Fn(f64) -> f64>(law: &ErrorLaw, f: F) -> f64 {
    let lo = law.quantile(1e-15).unwrap_or(-40.0);
    let hi = law.quantile(1.0 - 1e-15).unwrap_or(40.0);
    quad::integrate_with_breaks(|x| f(x) * law.pdf(x), lo, hi, &[0.0], 1e-12)
}

/// h-moment of residuals: h(t_θ(x)) − E h(ε).
pub struct HMomentInfluence {
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    mean_h: f64,
    link: Link,
}

impl HMomentInfluence {
    pub fn new(h: Arc<dyn Fn(f64) -> f64 + Send + Sync>, law: &ErrorLaw, link: Link) -> Self {
        let mean_h = law_moment(law, |x| h(x));
        HMomentInfluence { h, mean_h, link }
    }

    pub fn mean_h(&self) -> f64 {
        self.mean_h
    }
}

impl InfluenceEvaluator for HMomentInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "h-moment"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        Ok(vec![
            (self.h)(self.link.residual(obs, theta)?) - self.mean_h,
        ])
    }
}

fn cox_model(truth: &ModelTruth) -> Result<&CoxModel> {
    Ok(truth.cox()?.model())
}

/// Efficient score l₁* of the proportional hazards model.
#[derive(Clone, Copy, Debug, Default)]
pub struct CoxEfficientScore;

pub fn cox_efficient_score(z: f64, t: f64, theta: f64, truth: &ModelTruth) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!("time {t} is negative")));
    }
    Ok(cox_model(truth)?.efficient_score(z, t, theta))
}

impl InfluenceEvaluator for CoxEfficientScore {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "efficient score"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let (z, t) = survival_parts(obs)?;
        Ok(vec![cox_efficient_score(z, t, theta[0], truth)?])
    }
}

/// Efficient influence of an efficient θ̂: I*⁻¹ l₁*.
#[derive(Clone, Copy, Debug)]
pub struct CoxThetaInfluence {
    pub istar: f64,
}

impl InfluenceEvaluator for CoxThetaInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "partial likelihood"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let (z, t) = survival_parts(obs)?;
        Ok(vec![
            cox_efficient_score(z, t, theta[0], truth)? / self.istar,
        ])
    }
}

fn check_window(s: f64, model: &CoxModel) -> Result<()> {
    if !(0.0..=model.t0).contains(&s) {
        return Err(Error::OutsideWindow { t: s, t0: model.t0 });
    }
    Ok(())
}

/// Baseline cdf at s with θ known:
/// Ḡ(s){1[t≤s]/S₀(t) − e^{θz}∫₀^{s∧t} dΛ/S₀}.
pub fn psi_cox_baseline(z: f64, t: f64, theta: f64, truth: &ModelTruth, s: f64) -> Result<f64> {
    let cox = truth.cox()?;
    let model = cox.model();
    check_window(s, model)?;
    let survivor = 1.0 - model.baseline_cdf(s);
    let jump = if t <= s {
        1.0 / model.s(0, t, theta)
    } else {
        0.0
    };
    Ok(survivor * (jump - (theta * z).exp() * cox.inv_s0_integral(s.min(t), theta)))
}

#[derive(Clone, Copy, Debug)]
pub struct CoxBaselineInfluence {
    pub s: f64,
}

impl InfluenceEvaluator for CoxBaselineInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "baseline cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let (z, t) = survival_parts(obs)?;
        Ok(vec![psi_cox_baseline(z, t, theta[0], truth, self.s)?])
    }
}

/// A function h of the baseline time with ∫h dG = 0, constant beyond the
/// window.
pub trait BaselineContrast: Send + Sync {
    /// h(t) for 0 ≤ t ≤ T0.
    fn value(&self, t: f64) -> f64;
    /// The constant value of h on (T0, ∞).
    fn beyond_window(&self) -> f64 {
        0.0
    }
    /// Points in [0, T0] where h may jump.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// h = 1[0,s] − G(s).
#[derive(Clone, Copy, Debug)]
pub struct IndicatorContrast {
    pub s: f64,
    pub g_s: f64,
}

impl IndicatorContrast {
    pub fn new(s: f64, model: &CoxModel) -> Self {
        IndicatorContrast {
            s,
            g_s: model.baseline_cdf(s),
        }
    }
}

impl BaselineContrast for IndicatorContrast {
    fn value(&self, t: f64) -> f64 {
        indicator(t <= self.s) - self.g_s
    }

    fn beyond_window(&self) -> f64 {
        -self.g_s
    }

    fn breaks(&self) -> Vec<f64> {
        vec![self.s]
    }
}

/// Wraps a closure supported in [0, T0].
pub struct FnContrast<F>(pub F);

impl<F: Fn(f64) -> f64 + Send + Sync> BaselineContrast for FnContrast<F> {
    fn value(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

const CENTRING_TOL: f64 = 1e-6;
const SUBMODEL_TOL: f64 = 1e-12;
const SUBMODEL_KNOTS: usize = 2048;

type Tabulated = CumulativeIntegral<Box<dyn Fn(f64) -> f64 + Send + Sync>>;

/// Influence of the baseline functional h ↦ ∫h dG with θ known:
/// A(t)/S₀(t) − e^{θz}∫₀ᵗ A/S₀ dΛ, where A(u) = Ḡ(u)h(u) − ∫ᵤ^∞ h dG.
pub struct CoxSubmodelInfluence {
    model: CoxModel,
    contrast: Arc<dyn BaselineContrast>,
    /// u ↦ ∫₀ᵘ h dG on [0, T0].
    lower: Arc<Tabulated>,
    /// u ↦ ∫₀ᵘ A/S₀ dΛ at θ₀.
    outer: Tabulated,
    total: f64,
    breaks: Vec<f64>,
}

/// ∫ᵤ^∞ h dG, given `mean` = ∫₀^∞ h dG.
fn tail_integral(
    model: &CoxModel,
    contrast: &dyn BaselineContrast,
    lower: &Tabulated,
    mean: f64,
    u: f64,
) -> f64 {
    if u <= model.t0 {
        mean - lower.at(u)
    } else {
        contrast.beyond_window() * (1.0 - model.baseline_cdf(u))
    }
}

impl CoxSubmodelInfluence {
    pub fn new(truth: &ModelTruth, contrast: Arc<dyn BaselineContrast>) -> Result<Self> {
        let model = *truth.cox()?.model();
        let breaks: Vec<f64> = contrast
            .breaks()
            .into_iter()
            .filter(|b| *b > 0.0 && *b < model.t0)
            .collect();
        let (m, c) = (model, contrast.clone());
        let hg: Box<dyn Fn(f64) -> f64 + Send + Sync> =
            Box::new(move |u| c.value(u) * m.baseline_pdf(u));
        let lower = Arc::new(CumulativeIntegral::new(
            hg,
            model.t0,
            SUBMODEL_KNOTS,
            SUBMODEL_TOL,
        ));
        let within = quad::integrate_with_breaks(
            |u| contrast.value(u) * model.baseline_pdf(u),
            0.0,
            model.t0,
            &breaks,
            SUBMODEL_TOL,
        );
        let mean = within + contrast.beyond_window() * (1.0 - model.baseline_cdf(model.t0));
        if mean.abs() > CENTRING_TOL {
            return Err(Error::NotCentred(mean));
        }
        let total = mean;
        let (m, c, l) = (model, contrast.clone(), lower.clone());
        let theta0 = model.theta0;
        let integrand: Box<dyn Fn(f64) -> f64 + Send + Sync> = Box::new(move |u| {
            let a = (1.0 - m.baseline_cdf(u)) * c.value(u)
                - tail_integral(&m, c.as_ref(), &l, total, u);
            a / m.s(0, u, theta0) * m.lambda0
        });
        let outer = CumulativeIntegral::new(integrand, model.t0, SUBMODEL_KNOTS, SUBMODEL_TOL);
        Ok(CoxSubmodelInfluence {
            model,
            contrast,
            lower,
            outer,
            total,
            breaks,
        })
    }

    fn a(&self, u: f64) -> f64 {
        let h = if u > self.model.t0 {
            self.contrast.beyond_window()
        } else {
            self.contrast.value(u)
        };
        (1.0 - self.model.baseline_cdf(u)) * h
            - tail_integral(
                &self.model,
                self.contrast.as_ref(),
                &self.lower,
                self.total,
                u,
            )
    }

    pub fn value(&self, z: f64, t: f64, theta: f64) -> f64 {
        let m = &self.model;
        let outer = if theta.to_bits() == m.theta0.to_bits() && t <= m.t0 {
            self.outer.at(t)
        } else {
            quad::integrate_with_breaks(
                |u| self.a(u) / m.s(0, u, theta) * m.lambda0,
                0.0,
                t,
                &self.breaks,
                SUBMODEL_TOL,
            )
        };
        self.a(t) / m.s(0, t, theta) - (theta * z).exp() * outer
    }
}

/// Evaluates ψ_h for the contrast h; fails if h is not centred under G.
pub fn psi_cox_submodel_h(
    obs: Observation<'_>,
    theta: f64,
    truth: &ModelTruth,
    contrast: Arc<dyn BaselineContrast>,
) -> Result<f64> {
    let (z, t) = survival_parts(obs)?;
    Ok(CoxSubmodelInfluence::new(truth, contrast)?.value(z, t, theta))
}

impl InfluenceEvaluator for CoxSubmodelInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "baseline contrast"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], _truth: &ModelTruth) -> Result<Vec<f64>> {
        let (z, t) = survival_parts(obs)?;
        Ok(vec![self.value(z, t, theta[0])])
    }
}

/// ψ + c·I*⁻¹·l₁*: the efficient influence of the baseline cdf at s when θ is
/// estimated efficiently.
#[derive(Clone, Copy, Debug)]
pub struct CoxEfficientBaselineInfluence {
    pub s: f64,
    pub c: f64,
    pub istar: f64,
}

impl CoxEfficientBaselineInfluence {
    /// Takes I* from the truth; fails if it has not been computed.
    pub fn new(truth: &ModelTruth, s: f64, c: f64) -> Result<Self> {
        let istar = truth
            .istar()
            .ok_or_else(|| Error::InvalidParameter("efficient information not computed".into()))?;
        check_window(s, truth.cox()?.model())?;
        Ok(CoxEfficientBaselineInfluence {
            s,
            c,
            istar: istar.value,
        })
    }
}

pub fn efficient_full_influence_cox(
    z: f64,
    t: f64,
    theta: f64,
    truth: &ModelTruth,
    s: f64,
    c: f64,
    istar: f64,
) -> Result<f64> {
    Ok(psi_cox_baseline(z, t, theta, truth, s)?
        + c / istar * cox_efficient_score(z, t, theta, truth)?)
}

impl InfluenceEvaluator for CoxEfficientBaselineInfluence {
    fn dim(&self) -> usize {
        1
    }

    fn label(&self) -> &str {
        "efficient baseline cdf"
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let (z, t) = survival_parts(obs)?;
        Ok(vec![efficient_full_influence_cox(
            z, t, theta[0], truth, self.s, self.c, self.istar,
        )?])
    }
}
