//! θ-estimators and θ-given nuisance estimators for the worked models.

use crate::combine::{Estimate, SubmodelEstimator, ThetaEstimator};
use crate::distkit::{EvalGrid, SignedStepDistribution};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::models::{Dataset, Observation};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn nonempty(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Empty)
    } else {
        Ok(())
    }
}

fn scalar_theta(theta: &[f64]) -> Result<f64> {
    match theta {
        [t] => Ok(*t),
        _ => Err(Error::DimensionMismatch {
            expected: 1,
            got: theta.len(),
        }),
    }
}

pub fn theta_mean(data: &Dataset) -> Result<f64> {
    let x = data.location()?;
    nonempty(x.len())?;
    Ok(x.iter().sum::<f64>() / x.len() as f64)
}

/// Z̄ − Ȳ.
pub fn theta_two_sample(data: &Dataset) -> Result<f64> {
    let (y, z) = data.two_sample_parts()?;
    nonempty(y.len())?;
    let n = y.len() as f64;
    Ok(z.iter().sum::<f64>() / n - y.iter().sum::<f64>() / n)
}

/// (ΣzᵢzᵢᵀY)⁻¹ΣzᵢYᵢ.
pub fn theta_least_squares(data: &Dataset) -> Result<Vec<f64>> {
    let (y, z, k) = data.regression_parts()?;
    nonempty(y.len())?;
    let mut gram = Matrix::zeros(k, k);
    let mut rhs = vec![0.0; k];
    for (i, yi) in y.iter().enumerate() {
        let row = &z[i * k..(i + 1) * k];
        for a in 0..k {
            rhs[a] += row[a] * yi;
            for b in 0..k {
                gram.set(a, b, gram.get(a, b) + row[a] * row[b]);
            }
        }
    }
    gram.solve(&rhs)
}

/// Result of maximizing the Cox log partial likelihood.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartialLikelihoodResult {
    pub theta_hat: f64,
    pub iterations: usize,
    pub final_gradient: f64,
    pub converged: bool,
}

pub const PARTIAL_LIKELIHOOD_TOL: f64 = 1e-10;
pub const PARTIAL_LIKELIHOOD_MAX_ITER: usize = 50;
const MAX_HALVINGS: usize = 60;

/// Observations sorted by time (ties in input order) with, for each sorted
/// position, the start of its inclusive risk set {j : Tⱼ ≥ Tᵢ}.
struct RiskSets {
    z: Vec<f64>,
    start: Vec<usize>,
}

impl RiskSets {
    fn new(zs: &[f64], ts: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..ts.len()).collect();
        order.sort_by(|&a, &b| ts[a].total_cmp(&ts[b]));
        let t_sorted: Vec<f64> = order.iter().map(|&i| ts[i]).collect();
        let z = order.iter().map(|&i| zs[i]).collect();
        let mut start = vec![0; ts.len()];
        for i in 1..ts.len() {
            start[i] = if t_sorted[i] == t_sorted[i - 1] {
                start[i - 1]
            } else {
                i
            };
        }
        RiskSets { z, start }
    }

    /// Log partial likelihood, score and information at θ.
    fn evaluate(&self, theta: f64) -> (f64, f64, f64) {
        let n = self.z.len();
        let shift = self
            .z
            .iter()
            .fold(f64::NEG_INFINITY, |m, z| m.max(theta * z));
        // suffix sums of e^{θz−shift}, z e^{θz−shift}, z² e^{θz−shift}
        let mut s0 = vec![0.0; n + 1];
        let mut s1 = vec![0.0; n + 1];
        let mut s2 = vec![0.0; n + 1];
        for i in (0..n).rev() {
            let z = self.z[i];
            let w = (theta * z - shift).exp();
            s0[i] = s0[i + 1] + w;
            s1[i] = s1[i + 1] + w * z;
            s2[i] = s2[i + 1] + w * z * z;
        }
        let (mut ll, mut score, mut info) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let r = self.start[i];
            let mean = s1[r] / s0[r];
            ll += theta * self.z[i] - shift - s0[r].ln();
            score += self.z[i] - mean;
            info += s2[r] / s0[r] - mean * mean;
        }
        (ll, score, info)
    }

    /// Detects covariate configurations whose likelihood has no maximizer.
    fn check_identifiable(&self) -> Result<()> {
        let n = self.z.len();
        let first = self.z[0];
        if self.z.iter().all(|z| *z == first) {
            return Err(Error::NoCovariateVariation);
        }
        // suffix max/min over risk sets
        let mut hi = vec![f64::NEG_INFINITY; n + 1];
        let mut lo = vec![f64::INFINITY; n + 1];
        for i in (0..n).rev() {
            hi[i] = hi[i + 1].max(self.z[i]);
            lo[i] = lo[i + 1].min(self.z[i]);
        }
        let all_top = (0..n).all(|i| self.z[i] >= hi[self.start[i]]);
        let all_bottom = (0..n).all(|i| self.z[i] <= lo[self.start[i]]);
        if all_top {
            return Err(Error::MonotoneLikelihood {
                direction: "+infinity",
            });
        }
        if all_bottom {
            return Err(Error::MonotoneLikelihood {
                direction: "-infinity",
            });
        }
        Ok(())
    }
}

/// Log partial likelihood Σᵢ[θZᵢ − log Σ_{Tⱼ≥Tᵢ} e^{θZⱼ}].
pub fn cox_log_partial_likelihood(data: &Dataset, theta: f64) -> Result<f64> {
    let (z, t) = data.survival_parts()?;
    nonempty(t.len())?;
    Ok(RiskSets::new(z, t).evaluate(theta).0)
}

/// Newton–Raphson from θ = 0 with step halving.
pub fn theta_cox_partial_likelihood(
    data: &Dataset,
    tol: f64,
    max_iter: usize,
) -> Result<PartialLikelihoodResult> {
    let (z, t) = data.survival_parts()?;
    nonempty(t.len())?;
    let sets = RiskSets::new(z, t);
    sets.check_identifiable()?;
    let mut theta = 0.0;
    let (mut ll, mut score, mut info) = sets.evaluate(theta);
    for iter in 0..=max_iter {
        if score.abs() <= tol {
            return Ok(PartialLikelihoodResult {
                theta_hat: theta,
                iterations: iter,
                final_gradient: score,
                converged: true,
            });
        }
        if iter == max_iter || !(info > 0.0) {
            break;
        }
        let mut step = score / info;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand = theta + step;
            let (cl, cs, ci) = sets.evaluate(cand);
            // near the maximum the likelihood gain drops below its roundoff, so a
            // smaller score also counts as progress
            if cl >= ll || cs.abs() < score.abs() {
                (theta, ll, score, info) = (cand, cl, cs, ci);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        score,
    })
}

/// The Cox partial likelihood estimator, optionally restricted to the first
/// half of the sample.
#[derive(Clone, Copy, Debug)]
pub struct PartialLikelihoodTheta {
    pub tol: f64,
    pub max_iter: usize,
    pub half_sample: bool,
}

impl Default for PartialLikelihoodTheta {
    fn default() -> Self {
        PartialLikelihoodTheta {
            tol: PARTIAL_LIKELIHOOD_TOL,
            max_iter: PARTIAL_LIKELIHOOD_MAX_ITER,
            half_sample: false,
        }
    }
}

impl ThetaEstimator for PartialLikelihoodTheta {
    fn dim(&self) -> usize {
        1
    }

    fn estimate(&self, data: &Dataset) -> Result<Vec<f64>> {
        let r = if self.half_sample {
            theta_cox_partial_likelihood(&data.subset(0..data.len() / 2), self.tol, self.max_iter)?
        } else {
            theta_cox_partial_likelihood(data, self.tol, self.max_iter)?
        };
        Ok(vec![r.theta_hat])
    }
}

/// Named θ-estimators for the non-Cox models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleTheta {
    Mean,
    TwoSample,
    LeastSquares {
        dim: usize,
    },
    /// Least squares on the first ⌊n/2⌋ observations.
    HalfLeastSquares {
        dim: usize,
    },
    /// Least squares for ν and the root mean squared residual for σ.
    StdLeastSquares {
        dim: usize,
    },
}

impl ThetaEstimator for SimpleTheta {
    fn dim(&self) -> usize {
        match *self {
            SimpleTheta::Mean | SimpleTheta::TwoSample => 1,
            SimpleTheta::LeastSquares { dim } | SimpleTheta::HalfLeastSquares { dim } => dim,
            SimpleTheta::StdLeastSquares { dim } => dim + 1,
        }
    }

    fn estimate(&self, data: &Dataset) -> Result<Vec<f64>> {
        match self {
            SimpleTheta::Mean => Ok(vec![theta_mean(data)?]),
            SimpleTheta::TwoSample => Ok(vec![theta_two_sample(data)?]),
            SimpleTheta::LeastSquares { .. } => theta_least_squares(data),
            SimpleTheta::HalfLeastSquares { .. } => {
                theta_least_squares(&data.subset(0..data.len() / 2))
            }
            SimpleTheta::StdLeastSquares { .. } => {
                let nu = theta_least_squares(data)?;
                let (y, z, k) = data.regression_parts()?;
                let ss: f64 = y
                    .iter()
                    .enumerate()
                    .map(|(i, yi)| (yi - dot(&nu, &z[i * k..(i + 1) * k])).powi(2))
                    .sum();
                let mut out = nu;
                out.push((ss / y.len() as f64).sqrt());
                Ok(out)
            }
        }
    }
}

/// n⁻¹Σ(xᵢ − θ)².
pub fn sub_variance(data: &Dataset, theta: f64) -> Result<f64> {
    let x = data.location()?;
    nonempty(x.len())?;
    Ok(x.iter().map(|v| (v - theta).powi(2)).sum::<f64>() / x.len() as f64)
}

/// Residual map t_θ relating an observation to the error variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// x − θ.
    Location,
    /// y − θᵀz.
    Regression,
    /// (y − νᵀz)/σ with θ = (ν, σ).
    Standardized,
    /// e^{−θᵀz}y, for regression or survival data.
    AcceleratedFailure,
}

impl Link {
    pub fn residuals(&self, data: &Dataset, theta: &[f64]) -> Result<Vec<f64>> {
        match (self, data) {
            (Link::Location, Dataset::Location(x)) => {
                let t = scalar_theta(theta)?;
                Ok(x.iter().map(|v| v - t).collect())
            }
            (Link::Regression, Dataset::Regression { y, z, k }) => {
                check_dim(theta.len(), *k)?;
                Ok(rows(y, z, *k).map(|(yi, zi)| yi - dot(theta, zi)).collect())
            }
            (Link::Standardized, Dataset::Regression { y, z, k }) => {
                check_dim(theta.len(), k + 1)?;
                let sigma = theta[*k];
                if !(sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "scale must be positive, got {sigma}"
                    )));
                }
                let nu = &theta[..*k];
                Ok(rows(y, z, *k)
                    .map(|(yi, zi)| (yi - dot(nu, zi)) / sigma)
                    .collect())
            }
            (Link::AcceleratedFailure, Dataset::Regression { y, z, k }) => {
                check_dim(theta.len(), *k)?;
                Ok(rows(y, z, *k)
                    .map(|(yi, zi)| (-dot(theta, zi)).exp() * yi)
                    .collect())
            }
            (Link::AcceleratedFailure, Dataset::Survival { z, t }) => {
                let th = scalar_theta(theta)?;
                Ok(z.iter()
                    .zip(t)
                    .map(|(zi, ti)| (-th * zi).exp() * ti)
                    .collect())
            }
            (link, _) => Err(Error::SchemaMismatch {
                expected: link.schema(),
            }),
        }
    }

    /// t_θ of a single observation.
    pub fn residual(&self, obs: Observation<'_>, theta: &[f64]) -> Result<f64> {
        match (self, obs) {
            (Link::Location, Observation::Location(x)) => Ok(x - scalar_theta(theta)?),
            (Link::Regression, Observation::Regression { y, z }) => {
                check_dim(theta.len(), z.len())?;
                Ok(y - dot(theta, z))
            }
            (Link::Standardized, Observation::Regression { y, z }) => {
                check_dim(theta.len(), z.len() + 1)?;
                let sigma = theta[z.len()];
                if !(sigma > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "scale must be positive, got {sigma}"
                    )));
                }
                Ok((y - dot(&theta[..z.len()], z)) / sigma)
            }
            (Link::AcceleratedFailure, Observation::Regression { y, z }) => {
                check_dim(theta.len(), z.len())?;
                Ok((-dot(theta, z)).exp() * y)
            }
            (Link::AcceleratedFailure, Observation::Survival { z, t }) => {
                Ok((-scalar_theta(theta)? * z).exp() * t)
            }
            (link, _) => Err(Error::SchemaMismatch {
                expected: link.schema(),
            }),
        }
    }

    fn schema(&self) -> &'static str {
        match self {
            Link::Location => "location",
            Link::Regression | Link::Standardized => "regression",
            Link::AcceleratedFailure => "regression or survival",
        }
    }
}

fn check_dim(got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn rows<'a>(y: &'a [f64], z: &'a [f64], k: usize) -> impl Iterator<Item = (f64, &'a [f64])> + 'a {
    y.iter()
        .enumerate()
        .map(move |(i, yi)| (*yi, &z[i * k..(i + 1) * k]))
}

/// n⁻¹Σ h(t_θ(Xᵢ)).
pub fn sub_h_moment(
    data: &Dataset,
    theta: &[f64],
    h: &dyn Fn(f64) -> f64,
    link: Link,
) -> Result<f64> {
    let r = link.residuals(data, theta)?;
    nonempty(r.len())?;
    Ok(r.iter().map(|e| h(*e)).sum::<f64>() / r.len() as f64)
}

/// Symmetrized residual empirical: the empirical distribution of {±εᵢ}.
pub fn sub_sym_empirical(data: &Dataset, theta: &[f64]) -> Result<SignedStepDistribution> {
    let eps = Link::Regression.residuals(data, theta)?;
    let plain = SignedStepDistribution::empirical(&eps)?;
    SignedStepDistribution::mixture(&[(0.5, &plain), (0.5, &plain.reflected())])
}

/// Plain empirical distribution of the residuals t_θ(Xᵢ).
pub fn sub_residual_empirical(
    data: &Dataset,
    theta: &[f64],
    link: Link,
) -> Result<SignedStepDistribution> {
    SignedStepDistribution::empirical(&link.residuals(data, theta)?)
}

/// Residual empirical reweighted to satisfy ∫x dG = 0: atoms at xᵢ − θ with
/// weights n⁻¹{1 − (xᵢ−θ)(x̄−θ)/S²ₙ(θ)}.
pub fn sub_location_weighted_empirical(
    data: &Dataset,
    theta: f64,
) -> Result<SignedStepDistribution> {
    let x = data.location()?;
    nonempty(x.len())?;
    let n = x.len() as f64;
    let e: Vec<f64> = x.iter().map(|v| v - theta).collect();
    let s2 = e.iter().map(|v| v * v).sum::<f64>() / n;
    if s2 == 0.0 {
        return Err(Error::ZeroScale);
    }
    let shift = theta_mean(data)? - theta;
    let w: Vec<f64> = e.iter().map(|v| (1.0 - v * shift / s2) / n).collect();
    SignedStepDistribution::from_points(&e, &w)
}

/// Tolerance on the total mass 1 − γ̄ᵀM⁻¹γ̄ below which the constrained
/// reweighting is degenerate.
pub const CONSTRAINT_MASS_TOL: f64 = 1e-12;

/// Residual empirical projected onto {∫γ dG = 0}: weights
/// n⁻¹{1 − γ̄ᵀ(n⁻¹Σγγᵀ)⁻¹γ(εᵢ)}.
pub fn sub_constrained_empirical(
    data: &Dataset,
    theta: &[f64],
    gamma: &dyn Fn(f64) -> Vec<f64>,
    link: Link,
) -> Result<SignedStepDistribution> {
    let e = link.residuals(data, theta)?;
    nonempty(e.len())?;
    let n = e.len() as f64;
    let g: Vec<Vec<f64>> = e.iter().map(|v| gamma(*v)).collect();
    let l = g[0].len();
    if l == 0 || g.iter().any(|row| row.len() != l) {
        return Err(Error::DimensionMismatch {
            expected: l.max(1),
            got: g.iter().map(Vec::len).find(|len| *len != l).unwrap_or(0),
        });
    }
    let mut gram = Matrix::zeros(l, l);
    let mut gbar = vec![0.0; l];
    for row in &g {
        for a in 0..l {
            gbar[a] += row[a] / n;
            for b in 0..l {
                gram.set(a, b, gram.get(a, b) + row[a] * row[b] / n);
            }
        }
    }
    let coef = gram.solve(&gbar)?;
    if 1.0 - dot(&coef, &gbar) <= CONSTRAINT_MASS_TOL {
        return Err(Error::InfeasibleConstraint);
    }
    let w: Vec<f64> = g.iter().map(|row| (1.0 - dot(&coef, row)) / n).collect();
    SignedStepDistribution::from_points(&e, &w)
}

/// Pooled empirical of {Yᵢ} and {Zᵢ − θ}.
pub fn sub_two_sample_empirical(data: &Dataset, theta: f64) -> Result<SignedStepDistribution> {
    let (y, z) = data.two_sample_parts()?;
    nonempty(y.len())?;
    let pooled: Vec<f64> = y
        .iter()
        .copied()
        .chain(z.iter().map(|v| v - theta))
        .collect();
    SignedStepDistribution::empirical(&pooled)
}

/// Per sorted event: time and the inverse of its θ-weighted risk set size.
fn risk_increments(data: &Dataset, theta: f64) -> Result<Vec<(f64, f64)>> {
    let (z, t) = data.survival_parts()?;
    nonempty(t.len())?;
    let mut order: Vec<usize> = (0..t.len()).collect();
    order.sort_by(|&a, &b| t[a].total_cmp(&t[b]));
    let n = t.len();
    let mut suffix = vec![0.0; n + 1];
    for pos in (0..n).rev() {
        suffix[pos] = suffix[pos + 1] + (theta * z[order[pos]]).exp();
    }
    let mut out = Vec::with_capacity(n);
    let mut start = 0;
    for pos in 0..n {
        if pos > 0 && t[order[pos]] != t[order[pos - 1]] {
            start = pos;
        }
        out.push((t[order[pos]], 1.0 / suffix[start]));
    }
    Ok(out)
}

/// Converts cumulative values at sorted event times into jump atoms.
fn steps_to_distribution(times: &[f64], values: &[f64]) -> Result<SignedStepDistribution> {
    if times.is_empty() {
        // no event in the window: the zero measure, represented by a null atom
        return SignedStepDistribution::from_points(&[0.0], &[0.0]);
    }
    let mut prev = 0.0;
    let weights: Vec<f64> = values
        .iter()
        .map(|v| {
            let w = v - prev;
            prev = *v;
            w
        })
        .collect();
    SignedStepDistribution::from_points(times, &weights)
}

fn check_window(t0: f64) -> Result<()> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "window must be positive, got {t0}"
        )));
    }
    Ok(())
}

/// 1 − exp{−Σ_{Tᵢ≤s}(Σ_{Tⱼ≥Tᵢ} e^{θZⱼ})⁻¹} for s in [0, T0].
pub fn sub_cox_npmle_baseline(
    data: &Dataset,
    theta: f64,
    t0: f64,
) -> Result<SignedStepDistribution> {
    check_window(t0)?;
    let inc = risk_increments(data, theta)?;
    let mut acc = 0.0;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (t, d) in inc.into_iter().take_while(|(t, _)| *t <= t0) {
        acc += d;
        times.push(t);
        values.push(-(-acc).exp_m1());
    }
    steps_to_distribution(&times, &values)
}

/// 1 − Π_{Tᵢ≤s}{1 − (Σ_{Tⱼ≥Tᵢ} e^{θZⱼ})⁻¹} for s in [0, T0].
pub fn sub_cox_breslow_baseline(
    data: &Dataset,
    theta: f64,
    t0: f64,
) -> Result<SignedStepDistribution> {
    check_window(t0)?;
    let inc = risk_increments(data, theta)?;
    let mut prod = 1.0;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (t, d) in inc.into_iter().take_while(|(t, _)| *t <= t0) {
        prod *= 1.0 - d;
        times.push(t);
        values.push(1.0 - prod);
    }
    steps_to_distribution(&times, &values)
}

/// Evaluates a window-restricted baseline estimate on a grid inside [0, T0].
pub fn baseline_on_grid(
    dist: &SignedStepDistribution,
    grid: &EvalGrid,
    t0: f64,
) -> Result<Vec<f64>> {
    if grid.min() < 0.0 || grid.max() > t0 {
        let t = if grid.min() < 0.0 {
            grid.min()
        } else {
            grid.max()
        };
        return Err(Error::OutsideWindow { t, t0 });
    }
    Ok(dist.cdf_on(grid))
}

/// Vₙ(s) = Σ_{Tᵢ≤s}(#{j : Tⱼ ≥ Tᵢ})⁻¹.
pub fn v_n_statistic(data: &Dataset, s: f64) -> Result<f64> {
    Ok(risk_increments(data, 0.0)?
        .into_iter()
        .take_while(|(t, _)| *t <= s)
        .map(|(_, d)| d)
        .sum())
}

/// Which baseline estimator a [`CoxBaselineSub`] uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Npmle,
    Breslow,
}

/// Submodel estimator wrapper for the Cox baseline estimators.
#[derive(Clone, Copy, Debug)]
pub struct CoxBaselineSub {
    pub kind: BaselineKind,
    pub t0: f64,
}

impl SubmodelEstimator for CoxBaselineSub {
    fn estimate(&self, data: &Dataset, theta: &[f64]) -> Result<Estimate> {
        let th = scalar_theta(theta)?;
        let d = match self.kind {
            BaselineKind::Npmle => sub_cox_npmle_baseline(data, th, self.t0)?,
            BaselineKind::Breslow => sub_cox_breslow_baseline(data, th, self.t0)?,
        };
        Ok(Estimate::Distribution(d))
    }
}

/// Named submodel estimators for the non-Cox models.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimpleSub {
    Variance,
    LocationWeighted,
    /// Residual empirical under a link.
    Residual(Link),
    Symmetrized,
    TwoSample,
}

impl SubmodelEstimator for SimpleSub {
    fn estimate(&self, data: &Dataset, theta: &[f64]) -> Result<Estimate> {
        Ok(match self {
            SimpleSub::Variance => Estimate::scalar(sub_variance(data, scalar_theta(theta)?)?),
            SimpleSub::LocationWeighted => {
                Estimate::Distribution(sub_location_weighted_empirical(data, scalar_theta(theta)?)?)
            }
            SimpleSub::Residual(link) => {
                Estimate::Distribution(sub_residual_empirical(data, theta, *link)?)
            }
            SimpleSub::Symmetrized => Estimate::Distribution(sub_sym_empirical(data, theta)?),
            SimpleSub::TwoSample => {
                Estimate::Distribution(sub_two_sample_empirical(data, scalar_theta(theta)?)?)
            }
        })
    }
}

/// h-moment submodel estimator.
pub struct HMomentSub {
    pub h: std::sync::Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub link: Link,
}

impl SubmodelEstimator for HMomentSub {
    fn estimate(&self, data: &Dataset, theta: &[f64]) -> Result<Estimate> {
        Ok(Estimate::scalar(sub_h_moment(
            data,
            theta,
            self.h.as_ref(),
            self.link,
        )?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(xs: &[f64]) -> Dataset {
        Dataset::Location(xs.to_vec())
    }

    fn surv(z: &[f64], t: &[f64]) -> Dataset {
        Dataset::survival(z.to_vec(), t.to_vec()).unwrap()
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta_mean(&loc(&[1.0, 2.0, 3.0])).unwrap(), 2.0);
        assert_eq!(theta_mean(&loc(&[4.5; 7])).unwrap(), 4.5);
        assert_eq!(theta_mean(&loc(&[-1.0, 3.0])).unwrap(), 1.0);
        assert!(theta_mean(&loc(&[])).is_err());

        let ts = |y: &[f64], z: &[f64]| {
            theta_two_sample(&Dataset::two_sample(y.to_vec(), z.to_vec()).unwrap()).unwrap()
        };
        assert_eq!(ts(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert_eq!(ts(&[0.3, 0.9], &[0.3, 0.9]), 0.0);
        assert_eq!(ts(&[0.0, 2.0], &[3.0, 5.0]), 3.0);

        let ls = |y: &[f64], z: &[f64]| {
            let rows: Vec<Vec<f64>> = z.iter().map(|v| vec![*v]).collect();
            theta_least_squares(&Dataset::regression(y.to_vec(), &rows).unwrap())
        };
        assert!((ls(&[2.0, 4.0], &[1.0, 1.0]).unwrap()[0] - 3.0).abs() < 1e-15);
        assert!((ls(&[2.0, -1.0, 6.0], &[1.0, -0.5, 3.0]).unwrap()[0] - 2.0).abs() < 1e-14);
        assert!((ls(&[1.0, 2.0], &[1.0, 2.0]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!(matches!(
            ls(&[1.0, 2.0], &[0.0, 0.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn partial_likelihood_examples() {
        assert!(matches!(
            theta_cox_partial_likelihood(&surv(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 1e-10, 50),
            Err(Error::NoCovariateVariation)
        ));
        // (0,1),(1,2): the z = 1 subject outlives the z = 0 one, so the
        // likelihood −log(1 + e^θ) + 0 increases without bound as θ → −∞
        assert!(matches!(
            theta_cox_partial_likelihood(&surv(&[0.0, 1.0], &[1.0, 2.0]), 1e-10, 50),
            Err(Error::MonotoneLikelihood {
                direction: "-infinity"
            })
        ));
        let data = surv(&[0.0, 1.0, 0.0, 1.0, 1.0], &[1.0, 0.5, 3.0, 2.0, 0.7]);
        let r = theta_cox_partial_likelihood(&data, 1e-10, 50).unwrap();
        assert!(r.converged && r.final_gradient.abs() <= 1e-10);
        let best = (-100_000..=100_000)
            .map(|k| k as f64 * 1e-4)
            .map(|th| (th, cox_log_partial_likelihood(&data, th).unwrap()))
            .fold(
                (0.0, f64::NEG_INFINITY),
                |b, c| if c.1 > b.1 { c } else { b },
            );
        assert!((r.theta_hat - best.0).abs() < 1e-3);

        let perm = surv(&[1.0, 1.0, 0.0, 0.0, 1.0], &[0.7, 2.0, 3.0, 1.0, 0.5]);
        let p = theta_cox_partial_likelihood(&perm, 1e-10, 50).unwrap();
        assert!((p.theta_hat - r.theta_hat).abs() < 1e-12);
    }

    #[test]
    fn variance_and_h_moment_examples() {
        assert!((sub_variance(&loc(&[1.0, 2.0, 3.0]), 2.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(sub_variance(&loc(&[1.5]), 1.5).unwrap(), 0.0);
        assert_eq!(sub_variance(&loc(&[0.0, 4.0]), 1.0).unwrap(), 5.0);

        let sq = |x: f64| x * x;
        let v = sub_h_moment(&loc(&[1.0, 2.0, 3.0]), &[2.0], &sq, Link::Location).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        let rows = vec![vec![1.0, 0.3], vec![1.0, -2.0]];
        // y = z·(1, 1) exactly; θ = (ν, σ) = (1, 1, 1)
        let data = Dataset::regression(vec![1.3, -1.0], &rows).unwrap();
        let cube = |x: f64| x * x * x;
        assert_eq!(
            sub_h_moment(&data, &[1.0, 1.0, 1.0], &cube, Link::Standardized).unwrap(),
            0.0
        );
        assert!(sub_h_moment(&data, &[1.0, 1.0, 0.0], &cube, Link::Standardized).is_err());
        assert_eq!(
            sub_h_moment(&loc(&[0.0, 4.0]), &[1.0], &|x| x, Link::Location).unwrap(),
            1.0
        );
        let aft = sub_h_moment(
            &surv(&[1.0], &[2.0]),
            &[2f64.ln()],
            &|x| x,
            Link::AcceleratedFailure,
        )
        .unwrap();
        assert!((aft - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sym_empirical_examples() {
        let rows = vec![vec![1.0], vec![1.0]];
        let data = Dataset::regression(vec![-1.0, 2.0], &rows).unwrap();
        let g = sub_sym_empirical(&data, &[0.0]).unwrap();
        assert_eq!(g.cdf_at(1.0), 0.75);
        assert_eq!(g.cdf_at(-1.0), 0.5);
        let sym = Dataset::regression(vec![-0.7, 0.7], &rows).unwrap();
        assert_eq!(
            sub_sym_empirical(&sym, &[0.0]).unwrap(),
            SignedStepDistribution::empirical(&[-0.7, 0.7]).unwrap()
        );
    }

    #[test]
    fn weighted_empirical_examples() {
        let d = loc(&[0.2, 1.7, -0.4]);
        let xbar = theta_mean(&d).unwrap();
        let w = sub_location_weighted_empirical(&d, xbar).unwrap();
        let shifted: Vec<f64> = [0.2, 1.7, -0.4].iter().map(|x| x - xbar).collect();
        assert_eq!(w, SignedStepDistribution::empirical(&shifted).unwrap());

        let w = sub_location_weighted_empirical(&loc(&[-1.0, 3.0]), 0.0).unwrap();
        let a = w.atoms();
        assert_eq!(a[0].location, -1.0);
        assert!((a[0].weight - 0.6).abs() < 1e-15);
        assert!((a[1].weight - 0.2).abs() < 1e-15);
        assert!((w.cdf_at(0.0) - 0.6).abs() < 1e-15);
        assert!((w.total_mass() - 0.8).abs() < 1e-15);
        assert!(w.first_moment().abs() < 1e-15);

        let w = sub_location_weighted_empirical(&loc(&[-2.5, 2.5]), 0.0).unwrap();
        assert_eq!(w.cdf_at(0.0), 0.5);
        assert!(matches!(
            sub_location_weighted_empirical(&loc(&[1.0, 1.0]), 1.0),
            Err(Error::ZeroScale)
        ));
    }

    #[test]
    fn constrained_empirical_examples() {
        let d = loc(&[-1.0, 3.0, 0.5]);
        let direct = sub_location_weighted_empirical(&d, 0.2).unwrap();
        let proj = sub_constrained_empirical(&d, &[0.2], &|e| vec![e], Link::Location).unwrap();
        for (a, b) in direct.atoms().iter().zip(proj.atoms()) {
            assert_eq!(a.location, b.location);
            assert!((a.weight - b.weight).abs() < 1e-15);
        }
        let centred =
            sub_constrained_empirical(&loc(&[-1.0, 1.0]), &[0.0], &|e| vec![e], Link::Location)
                .unwrap();
        assert_eq!(
            centred,
            SignedStepDistribution::empirical(&[-1.0, 1.0]).unwrap()
        );
        assert!(matches!(
            sub_constrained_empirical(&d, &[0.0], &|_| vec![1.0], Link::Location),
            Err(Error::InfeasibleConstraint)
        ));
        assert!(matches!(
            sub_constrained_empirical(&d, &[0.0], &|e| vec![e, 2.0 * e], Link::Location),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn two_sample_examples() {
        let d = Dataset::two_sample(vec![0.0], vec![1.0]).unwrap();
        let g = sub_two_sample_empirical(&d, 1.0).unwrap();
        assert_eq!(g.atoms().len(), 1);
        assert_eq!(g.atoms()[0].weight, 1.0);
        let d = Dataset::two_sample(vec![0.0], vec![2.0]).unwrap();
        assert_eq!(sub_two_sample_empirical(&d, 1.0).unwrap().cdf_at(0.5), 0.5);
        let d = Dataset::two_sample(vec![0.0, 5.0], vec![2.0, 3.0]).unwrap();
        let a = sub_two_sample_empirical(&d, 1.0).unwrap();
        let b = sub_two_sample_empirical(&d, 1.25).unwrap();
        let locs =
            |x: &SignedStepDistribution| x.atoms().iter().map(|a| a.location).collect::<Vec<_>>();
        assert_eq!(locs(&a), vec![0.0, 1.0, 2.0, 5.0]);
        assert_eq!(locs(&b), vec![0.0, 0.75, 1.75, 5.0]);
    }

    #[test]
    fn baseline_examples() {
        let d = surv(&[0.0, 1.0], &[1.0, 2.0]);
        let np = sub_cox_npmle_baseline(&d, 0.0, 3.0).unwrap();
        assert!((np.cdf_at(1.5) - (1.0 - (-0.5f64).exp())).abs() < 1e-15);
        assert!((np.cdf_at(2.0) - (1.0 - (-1.5f64).exp())).abs() < 1e-15);
        assert_eq!(np.cdf_at(0.9), 0.0);
        let br = sub_cox_breslow_baseline(&d, 0.0, 3.0).unwrap();
        assert_eq!(br.cdf_at(1.5), 0.5);
        assert_eq!(br.cdf_at(2.5), 1.0);
        assert_eq!(br.cdf_at(0.9), 0.0);

        let trunc = sub_cox_npmle_baseline(&d, 0.0, 1.5).unwrap();
        assert_eq!(trunc.atoms().len(), 1);
        let grid = EvalGrid::new(vec![0.5, 1.6]).unwrap();
        assert!(matches!(
            baseline_on_grid(&trunc, &grid, 1.5),
            Err(Error::OutsideWindow { .. })
        ));
        let grid = EvalGrid::new(vec![0.5, 1.5]).unwrap();
        assert_eq!(baseline_on_grid(&trunc, &grid, 1.5).unwrap()[0], 0.0);
    }

    #[test]
    fn v_n_examples() {
        let d = surv(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]);
        let v = v_n_statistic(&d, 2.0).unwrap();
        assert!((v - 5.0 / 6.0).abs() < 1e-15);
        assert!(v <= 3f64.ln());
        assert_eq!(v_n_statistic(&d, 0.5).unwrap(), 0.0);
        assert_eq!(v_n_statistic(&surv(&[0.0], &[4.0]), 4.0).unwrap(), 1.0);
        // tied times share the inclusive risk set
        let tied = surv(&[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(v_n_statistic(&tied, 1.0).unwrap(), 1.0);
    }
}
