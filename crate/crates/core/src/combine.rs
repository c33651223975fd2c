//! Generic combiners: direct and split-sample substitution, lattice
//! discretization of θ̂, and composition of influence functions.

use std::fmt;
use std::sync::Arc;

use crate::distkit::SignedStepDistribution;
use crate::error::{Error, Result};
use crate::influence::InfluenceEvaluator;
use crate::linalg::Matrix;
use crate::models::{Dataset, ModelTruth, Observation};
use crate::par::{self, Execution};
use crate::rng::StreamKey;

/// Output of a submodel estimator.
#[derive(Clone, Debug, PartialEq)]
pub enum Estimate {
    Vector(Vec<f64>),
    Distribution(SignedStepDistribution),
}

impl Estimate {
    pub fn scalar(v: f64) -> Self {
        Estimate::Vector(vec![v])
    }

    pub fn as_vector(&self) -> Result<&[f64]> {
        match self {
            Estimate::Vector(v) => Ok(v),
            Estimate::Distribution(_) => Err(Error::EstimateShape),
        }
    }

    pub fn as_distribution(&self) -> Result<&SignedStepDistribution> {
        match self {
            Estimate::Distribution(d) => Ok(d),
            Estimate::Vector(_) => Err(Error::EstimateShape),
        }
    }

    /// `a·self + b·other`; both must have the same shape.
    pub fn convex(a: f64, first: &Estimate, b: f64, second: &Estimate) -> Result<Estimate> {
        match (first, second) {
            (Estimate::Vector(x), Estimate::Vector(y)) => {
                if x.len() != y.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: y.len(),
                    });
                }
                Ok(Estimate::Vector(
                    x.iter().zip(y).map(|(u, v)| a * u + b * v).collect(),
                ))
            }
            (Estimate::Distribution(x), Estimate::Distribution(y)) => {
                Ok(Estimate::Distribution(SignedStepDistribution::mixture(&[
                    (a, x),
                    (b, y),
                ])?))
            }
            _ => Err(Error::EstimateShape),
        }
    }
}

/// A θ-estimator `Dataset → ℝᵏ`.
pub trait ThetaEstimator: Send + Sync {
    fn dim(&self) -> usize;
    fn estimate(&self, data: &Dataset) -> Result<Vec<f64>>;
}

/// A θ-given nuisance estimator `(Dataset, θ) → Estimate`.
pub trait SubmodelEstimator: Send + Sync {
    fn estimate(&self, data: &Dataset, theta: &[f64]) -> Result<Estimate>;
}

impl<F> SubmodelEstimator for F
where
    F: Fn(&Dataset, &[f64]) -> Result<Estimate> + Send + Sync,
{
    fn estimate(&self, data: &Dataset, theta: &[f64]) -> Result<Estimate> {
        self(data, theta)
    }
}

/// Wraps a closure as a [`ThetaEstimator`] of declared dimension.
pub struct ThetaFn<F> {
    dim: usize,
    f: F,
}

impl<F> ThetaFn<F>
where
    F: Fn(&Dataset) -> Result<Vec<f64>> + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        ThetaFn { dim, f }
    }
}

impl<F> ThetaEstimator for ThetaFn<F>
where
    F: Fn(&Dataset) -> Result<Vec<f64>> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn estimate(&self, data: &Dataset) -> Result<Vec<f64>> {
        let v = (self.f)(data)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(v)
    }
}

/// Always returns the same θ; models a known parameter.
#[derive(Clone, Debug)]
pub struct KnownTheta(pub Vec<f64>);

impl ThetaEstimator for KnownTheta {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn estimate(&self, _data: &Dataset) -> Result<Vec<f64>> {
        Ok(self.0.clone())
    }
}

/// Size λₙ of the first block in a two-way split.
#[derive(Clone, Copy)]
pub struct SplitScheme {
    lambda_of: fn(usize) -> usize,
}

impl fmt::Debug for SplitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SplitScheme").finish_non_exhaustive()
    }
}

/// Largest n checked by [`SplitScheme::new`].
pub const SPLIT_CHECK_LIMIT: usize = 1_000_000;

fn half(n: usize) -> usize {
    n / 2
}

impl Default for SplitScheme {
    fn default() -> Self {
        SplitScheme { lambda_of: half }
    }
}

impl SplitScheme {
    /// Accepts `lambda_of` only if `1 ≤ λₙ ≤ n−1` and `|λₙ/n − ½| ≤ 1/n` for
    /// every `2 ≤ n ≤ 10⁶`.
    pub fn new(lambda_of: fn(usize) -> usize) -> Result<Self> {
        for n in 2..=SPLIT_CHECK_LIMIT {
            let l = lambda_of(n);
            let nf = n as f64;
            if l < 1 || l > n - 1 || (l as f64 / nf - 0.5).abs() > 1.0 / nf {
                return Err(Error::InvalidParameter(format!(
                    "split size {l} invalid for n = {n}"
                )));
            }
        }
        Ok(SplitScheme { lambda_of })
    }

    pub fn lambda(&self, n: usize) -> usize {
        (self.lambda_of)(n)
    }
}

/// A combined estimate together with the θ̂ that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Substitution {
    /// For split-sample estimates, the λ-weighted average of the two
    /// half-sample θ̂.
    pub theta_hat: Vec<f64>,
    pub estimate: Estimate,
}

/// κ̂ at θ̂ computed on the same data.
pub fn direct_substitute(
    data: &Dataset,
    th: &dyn ThetaEstimator,
    sub: &dyn SubmodelEstimator,
) -> Result<Substitution> {
    let theta_hat = th.estimate(data)?;
    let estimate = sub.estimate(data, &theta_hat)?;
    Ok(Substitution {
        theta_hat,
        estimate,
    })
}

/// Direct substitution with θ̂ rounded to the lattice of [`discretize_theta`].
pub fn discretized_substitute(
    data: &Dataset,
    th: &dyn ThetaEstimator,
    sub: &dyn SubmodelEstimator,
    zeta: f64,
) -> Result<Substitution> {
    let raw = th.estimate(data)?;
    let theta_hat = discretize_theta(&raw, zeta, data.len())?;
    let estimate = sub.estimate(data, &theta_hat)?;
    Ok(Substitution {
        theta_hat,
        estimate,
    })
}

/// Cross-fitted substitution: each block's nuisance estimate uses θ̂ from the
/// other block, and the two are mixed with weights λ/n and (n−λ)/n.
pub fn split_sample_combine(
    data: &Dataset,
    th: &dyn ThetaEstimator,
    sub: &dyn SubmodelEstimator,
    scheme: SplitScheme,
) -> Result<Substitution> {
    let n = data.len();
    if n < 4 {
        return Err(Error::SampleTooSmall { got: n, need: 4 });
    }
    let lambda = scheme.lambda(n);
    let first = data.subset(0..lambda);
    let last = data.subset(lambda..n);
    let theta_first = th.estimate(&first)?;
    let theta_last = th.estimate(&last)?;
    let est_first = sub.estimate(&first, &theta_last)?;
    let est_last = sub.estimate(&last, &theta_first)?;
    let a = lambda as f64 / n as f64;
    let b = (n - lambda) as f64 / n as f64;
    let theta_hat = theta_first
        .iter()
        .zip(&theta_last)
        .map(|(f, l)| a * f + b * l)
        .collect();
    Ok(Substitution {
        theta_hat,
        estimate: Estimate::convex(a, &est_first, b, &est_last)?,
    })
}

/// Rounds each component of θ̂ to the lattice with mesh `2ζ/√(kn)`, ties to
/// even, so that `√n‖θ̂(ζ) − θ̂‖ ≤ ζ`.
pub fn discretize_theta(theta_hat: &[f64], zeta: f64, n: usize) -> Result<Vec<f64>> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "zeta must be positive, got {zeta}"
        )));
    }
    if n == 0 {
        return Err(Error::SampleTooSmall { got: 0, need: 1 });
    }
    let k = theta_hat.len().max(1) as f64;
    let mesh = 2.0 * zeta / (k * n as f64).sqrt();
    Ok(theta_hat
        .iter()
        .map(|&t| (t / mesh).round_ties_even() * mesh)
        .collect())
}

/// ψ̃ = ψκ + (κ′ + c)·ψθ evaluated pointwise.
pub struct ComposedInfluence {
    psi_kappa: Arc<dyn InfluenceEvaluator>,
    psi_theta: Arc<dyn InfluenceEvaluator>,
    coupling: Matrix,
    label: String,
}

impl ComposedInfluence {
    /// The combined m×k matrix κ′ + c.
    pub fn coupling(&self) -> &Matrix {
        &self.coupling
    }
}

impl InfluenceEvaluator for ComposedInfluence {
    fn dim(&self) -> usize {
        self.psi_kappa.dim()
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn eval(&self, obs: Observation<'_>, theta: &[f64], truth: &ModelTruth) -> Result<Vec<f64>> {
        let mut out = self.psi_kappa.eval(obs, theta, truth)?;
        let pt = self.psi_theta.eval(obs, theta, truth)?;
        let shift = self.coupling.mul_vec(&pt)?;
        for (o, s) in out.iter_mut().zip(shift) {
            *o += s;
        }
        Ok(out)
    }
}

pub fn compose_full_influence(
    psi_kappa: Arc<dyn InfluenceEvaluator>,
    psi_theta: Arc<dyn InfluenceEvaluator>,
    kappa_prime: &Matrix,
    c: &Matrix,
) -> Result<ComposedInfluence> {
    let (m, k) = (psi_kappa.dim(), psi_theta.dim());
    for mat in [kappa_prime, c] {
        if mat.rows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: mat.rows(),
            });
        }
        if mat.cols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: mat.cols(),
            });
        }
    }
    let label = format!("{} + (k'+c)·{}", psi_kappa.label(), psi_theta.label());
    Ok(ComposedInfluence {
        coupling: kappa_prime.add(c)?,
        psi_kappa,
        psi_theta,
        label,
    })
}

/// Monte Carlo estimate of c(θ) = −E ψκ l̇₁ᵀ with entrywise standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub value: Matrix,
    pub se: Matrix,
}

/// Minimum Monte Carlo size for [`estimate_c_matrix`].
pub const MIN_C_DRAWS: usize = 10_000;

const MC_CHUNK: usize = 8192;

/// Draws `mc_n` fresh observations at θ and averages −ψκ l̇₁ᵀ.
pub fn estimate_c_matrix(
    truth: &ModelTruth,
    psi_kappa: &dyn InfluenceEvaluator,
    theta: &[f64],
    mc_n: usize,
    key: StreamKey,
    exec: Execution,
) -> Result<CMatrix> {
    if mc_n < MIN_C_DRAWS {
        return Err(Error::SampleTooSmall {
            got: mc_n,
            need: MIN_C_DRAWS,
        });
    }
    let model = truth.model();
    let (m, k) = (psi_kappa.dim(), model.theta_dim());
    let parts = par::map_chunks(
        mc_n,
        MC_CHUNK,
        exec,
        |c, range| -> Result<(Vec<f64>, Vec<f64>)> {
            let data =
                model.sample_at(theta, range.len().max(2), &mut key.index(c as u64).rng())?;
            let mut sum = vec![0.0; m * k];
            let mut sum_sq = vec![0.0; m * k];
            for obs in data.iter().take(range.len()) {
                let psi = psi_kappa.eval(obs, theta, truth)?;
                let score = model.score_theta(obs, theta)?;
                for i in 0..m {
                    for j in 0..k {
                        let v = psi[i] * score[j];
                        sum[i * k + j] += v;
                        sum_sq[i * k + j] += v * v;
                    }
                }
            }
            Ok((sum, sum_sq))
        },
    );
    let mut sum = vec![0.0; m * k];
    let mut sum_sq = vec![0.0; m * k];
    for part in parts {
        let (s, q) = part?;
        for idx in 0..m * k {
            sum[idx] += s[idx];
            sum_sq[idx] += q[idx];
        }
    }
    let n = mc_n as f64;
    let mut value = Matrix::zeros(m, k);
    let mut se = Matrix::zeros(m, k);
    for i in 0..m {
        for j in 0..k {
            let mean = sum[i * k + j] / n;
            let var = ((sum_sq[i * k + j] - n * mean * mean) / (n - 1.0)).max(0.0);
            value.set(i, j, if mean == 0.0 { 0.0 } else { -mean });
            se.set(i, j, (var / n).sqrt());
        }
    }
    Ok(CMatrix { value, se })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(xs: &[f64]) -> Dataset {
        Dataset::Location(xs.to_vec())
    }

    fn mean_theta() -> ThetaFn<impl Fn(&Dataset) -> Result<Vec<f64>> + Send + Sync> {
        ThetaFn::new(1, |d: &Dataset| {
            let x = d.location()?;
            Ok(vec![x.iter().sum::<f64>() / x.len() as f64])
        })
    }

    #[test]
    fn direct_examples() {
        let sub = |d: &Dataset, th: &[f64]| -> Result<Estimate> {
            let x = d.location()?;
            Ok(Estimate::scalar(
                x.iter().map(|v| (v - th[0]).powi(2)).sum::<f64>() / x.len() as f64,
            ))
        };
        let r = direct_substitute(&loc(&[1.0, 2.0, 3.0]), &mean_theta(), &sub).unwrap();
        assert!((r.estimate.as_vector().unwrap()[0] - 2.0 / 3.0).abs() < 1e-15);

        let constant = |_: &Dataset, _: &[f64]| Ok(Estimate::scalar(7.0));
        let r = direct_substitute(&loc(&[1.0, 5.0]), &mean_theta(), &constant).unwrap();
        assert_eq!(r.estimate, Estimate::scalar(7.0));

        let ecdf = |d: &Dataset, th: &[f64]| -> Result<Estimate> {
            let shifted: Vec<f64> = d.location()?.iter().map(|x| x - th[0]).collect();
            Ok(Estimate::Distribution(SignedStepDistribution::empirical(
                &shifted,
            )?))
        };
        let r = direct_substitute(&loc(&[-1.0, 3.0]), &mean_theta(), &ecdf).unwrap();
        assert_eq!(r.estimate.as_distribution().unwrap().cdf_at(0.0), 0.5);
    }

    #[test]
    fn split_examples() {
        let s = SplitScheme::default();
        let constant = |_: &Dataset, _: &[f64]| Ok(Estimate::scalar(3.5));
        let r = split_sample_combine(
            &loc(&[1.0, 2.0, 3.0, 4.0, 5.0]),
            &mean_theta(),
            &constant,
            s,
        )
        .unwrap();
        assert!((r.estimate.as_vector().unwrap()[0] - 3.5).abs() < 1e-15);

        let diff = |d: &Dataset, th: &[f64]| -> Result<Estimate> {
            let x = d.location()?;
            Ok(Estimate::scalar(
                x.iter().sum::<f64>() / x.len() as f64 - th[0],
            ))
        };
        let r = split_sample_combine(&loc(&[1.0, 2.0, 3.0, 4.0]), &mean_theta(), &diff, s).unwrap();
        assert_eq!(r.estimate, Estimate::scalar(0.0));

        let ident = |_: &Dataset, th: &[f64]| Ok(Estimate::scalar(th[0]));
        let r =
            split_sample_combine(&loc(&[0.0, 0.0, 2.0, 2.0]), &mean_theta(), &ident, s).unwrap();
        assert_eq!(r.estimate, Estimate::scalar(1.0));
        assert_eq!(r.theta_hat, vec![1.0]);

        assert!(matches!(
            split_sample_combine(&loc(&[1.0, 2.0, 3.0]), &mean_theta(), &ident, s),
            Err(Error::SampleTooSmall { .. })
        ));
    }

    #[test]
    fn split_mixes_distributions() {
        let ecdf = |d: &Dataset, _: &[f64]| -> Result<Estimate> {
            Ok(Estimate::Distribution(SignedStepDistribution::empirical(
                d.location()?,
            )?))
        };
        let data = loc(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let r = split_sample_combine(&data, &mean_theta(), &ecdf, SplitScheme::default()).unwrap();
        let d = r.estimate.as_distribution().unwrap();
        // λ = 2: ⅖·ECDF{0,1} + ⅗·ECDF{2,3,4} is the full ECDF
        for a in d.atoms() {
            assert!((a.weight - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn split_scheme_validation() {
        assert!(SplitScheme::new(half).is_ok());
        fn third(n: usize) -> usize {
            (n / 3).max(1)
        }
        assert!(SplitScheme::new(third).is_err());
        assert_eq!(SplitScheme::default().lambda(7), 3);
    }

    #[test]
    fn discretize_examples() {
        let d = discretize_theta(&[0.337], 0.1, 100).unwrap();
        assert!((d[0] - 0.34).abs() < 1e-12);
        assert!(10.0 * (d[0] - 0.337).abs() <= 0.1);
        let on = discretize_theta(&[0.34], 0.1, 100).unwrap();
        assert_eq!(discretize_theta(&on, 0.1, 100).unwrap(), on);
        assert_eq!(
            discretize_theta(&[0.0, 0.0], 0.3, 50).unwrap(),
            vec![0.0, 0.0]
        );
        // half-way between 0 and one mesh step rounds to the even multiple
        // mesh 2·0.5/√4 = ½
        assert_eq!(
            discretize_theta(&[0.25, 0.75], 0.5, 2).unwrap(),
            vec![0.0, 1.0]
        );
        assert!(discretize_theta(&[1.0], 0.0, 10).is_err());
    }
}
