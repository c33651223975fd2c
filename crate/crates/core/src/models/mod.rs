//! Observation schemas, samplers and ground truth.

mod cox;
mod law;

pub use cox::{CoxModel, CoxTruth, MAX_WINDOW_PROB};
pub use law::ErrorLaw;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par::{self, Execution};
use crate::rng::StreamKey;
use crate::stats::{McEstimate, Moments};

/// Distribution of the regression covariate vector; components are i.i.d.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CovariateLaw {
    StandardNormal {
        dim: usize,
    },
    /// Bernoulli(½) on {0, 1}.
    Bernoulli {
        dim: usize,
    },
}

impl CovariateLaw {
    pub fn dim(&self) -> usize {
        match *self {
            CovariateLaw::StandardNormal { dim } | CovariateLaw::Bernoulli { dim } => dim,
        }
    }

    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter(
                "covariate dimension must be positive".into(),
            ));
        }
        match name {
            "normal" => Ok(CovariateLaw::StandardNormal { dim }),
            "bernoulli" => Ok(CovariateLaw::Bernoulli { dim }),
            other => Err(Error::InvalidParameter(format!(
                "unknown covariate law {other:?}"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CovariateLaw::StandardNormal { .. } => "normal",
            CovariateLaw::Bernoulli { .. } => "bernoulli",
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match *self {
            CovariateLaw::StandardNormal { dim } => vec![0.0; dim],
            CovariateLaw::Bernoulli { dim } => vec![0.5; dim],
        }
    }

    /// E ZZᵀ in closed form.
    pub fn second_moment(&self) -> Matrix {
        let k = self.dim();
        let mut m = Matrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let v = match (self, i == j) {
                    (CovariateLaw::StandardNormal { .. }, true) => 1.0,
                    (CovariateLaw::StandardNormal { .. }, false) => 0.0,
                    (CovariateLaw::Bernoulli { .. }, true) => 0.5,
                    (CovariateLaw::Bernoulli { .. }, false) => 0.25,
                };
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = match self {
                CovariateLaw::StandardNormal { .. } => StandardNormal.sample(rng),
                CovariateLaw::Bernoulli { .. } => {
                    if rng.random::<bool>() {
                        1.0
                    } else {
                        0.0
                    }
                }
            };
        }
    }
}

/// X = θ + ε.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocationModel {
    pub theta0: f64,
    pub law: ErrorLaw,
}

/// Y = θᵀZ + ε with ε symmetric and independent of Z.
#[derive(Clone, Debug, PartialEq)]
pub struct SymRegressionModel {
    pub theta0: Vec<f64>,
    pub law: ErrorLaw,
    pub covariate: CovariateLaw,
}

/// Y = α + βᵀZ + σε with standardized ε. Observations carry z = (1, Z) and
/// θ = (α, β, σ).
#[derive(Clone, Debug, PartialEq)]
pub struct StdRegressionModel {
    pub nu0: Vec<f64>,
    pub sigma0: f64,
    pub law: ErrorLaw,
    pub covariate: CovariateLaw,
}

/// Y and Z − θ i.i.d. from the error law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSampleModel {
    pub theta0: f64,
    pub law: ErrorLaw,
}

impl SymRegressionModel {
    pub fn new(theta0: Vec<f64>, law: ErrorLaw, covariate: CovariateLaw) -> Result<Self> {
        if theta0.len() != covariate.dim() {
            return Err(Error::DimensionMismatch {
                expected: covariate.dim(),
                got: theta0.len(),
            });
        }
        // nonsingularity of E ZZᵀ
        covariate.second_moment().inverse()?;
        Ok(SymRegressionModel {
            theta0,
            law,
            covariate,
        })
    }
}

impl StdRegressionModel {
    /// `nu0 = (α, β…)` with `β` matching the covariate dimension. The law is
    /// rescaled to unit variance.
    pub fn new(nu0: Vec<f64>, sigma0: f64, law: ErrorLaw, covariate: CovariateLaw) -> Result<Self> {
        if nu0.len() != covariate.dim() + 1 {
            return Err(Error::DimensionMismatch {
                expected: covariate.dim() + 1,
                got: nu0.len(),
            });
        }
        if !(sigma0 > 0.0) {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        let m = StdRegressionModel {
            nu0,
            sigma0,
            law: law.standardized(),
            covariate,
        };
        m.design_second_moment().inverse()?;
        Ok(m)
    }

    /// E zzᵀ for the design row z = (1, Z).
    pub fn design_second_moment(&self) -> Matrix {
        let k = self.covariate.dim();
        let inner = self.covariate.second_moment();
        let mean = self.covariate.mean();
        let mut m = Matrix::zeros(k + 1, k + 1);
        m.set(0, 0, 1.0);
        for (i, &mi) in mean.iter().enumerate().take(k) {
            m.set(0, i + 1, mi);
            m.set(i + 1, 0, mi);
            for j in 0..k {
                m.set(i + 1, j + 1, inner.get(i, j));
            }
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Location(LocationModel),
    SymRegression(SymRegressionModel),
    StdRegression(StdRegressionModel),
    TwoSample(TwoSampleModel),
    Cox(CoxModel),
}

/// One observation, borrowed from a [`Dataset`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observation<'a> {
    Location(f64),
    Regression { y: f64, z: &'a [f64] },
    TwoSample { y: f64, z: f64 },
    Survival { z: f64, t: f64 },
}

/// An i.i.d. sample for one observation schema.
#[derive(Clone, Debug, PartialEq)]
pub enum Dataset {
    Location(Vec<f64>),
    /// `z` is row-major with `k` columns.
    Regression {
        y: Vec<f64>,
        z: Vec<f64>,
        k: usize,
    },
    TwoSample {
        y: Vec<f64>,
        z: Vec<f64>,
    },
    Survival {
        z: Vec<f64>,
        t: Vec<f64>,
    },
}

impl Dataset {
    pub fn regression(y: Vec<f64>, z_rows: &[Vec<f64>]) -> Result<Self> {
        if y.len() != z_rows.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: z_rows.len(),
            });
        }
        let k = z_rows.first().map_or(0, Vec::len);
        let mut z = Vec::with_capacity(k * y.len());
        for row in z_rows {
            if row.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    got: row.len(),
                });
            }
            z.extend_from_slice(row);
        }
        Ok(Dataset::Regression { y, z, k })
    }

    pub fn two_sample(y: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if y.len() != z.len() {
            return Err(Error::LengthMismatch {
                left: y.len(),
                right: z.len(),
            });
        }
        Ok(Dataset::TwoSample { y, z })
    }

    pub fn survival(z: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if z.len() != t.len() {
            return Err(Error::LengthMismatch {
                left: z.len(),
                right: t.len(),
            });
        }
        if t.iter().chain(&z).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Dataset::Survival { z, t })
    }

    pub fn len(&self) -> usize {
        match self {
            Dataset::Location(x) => x.len(),
            Dataset::Regression { y, .. } | Dataset::TwoSample { y, .. } => y.len(),
            Dataset::Survival { t, .. } => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn schema(&self) -> &'static str {
        match self {
            Dataset::Location(_) => "location",
            Dataset::Regression { .. } => "regression",
            Dataset::TwoSample { .. } => "two-sample",
            Dataset::Survival { .. } => "survival",
        }
    }

    pub fn obs(&self, i: usize) -> Observation<'_> {
        match self {
            Dataset::Location(x) => Observation::Location(x[i]),
            Dataset::Regression { y, z, k } => Observation::Regression {
                y: y[i],
                z: &z[i * k..(i + 1) * k],
            },
            Dataset::TwoSample { y, z } => Observation::TwoSample { y: y[i], z: z[i] },
            Dataset::Survival { z, t } => Observation::Survival { z: z[i], t: t[i] },
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = Observation<'_>> + '_ {
        (0..self.len()).map(move |i| self.obs(i))
    }

    /// Observations `range`, as a new dataset.
    pub fn subset(&self, range: std::ops::Range<usize>) -> Dataset {
        match self {
            Dataset::Location(x) => Dataset::Location(x[range].to_vec()),
            Dataset::Regression { y, z, k } => Dataset::Regression {
                y: y[range.clone()].to_vec(),
                z: z[range.start * k..range.end * k].to_vec(),
                k: *k,
            },
            Dataset::TwoSample { y, z } => Dataset::TwoSample {
                y: y[range.clone()].to_vec(),
                z: z[range].to_vec(),
            },
            Dataset::Survival { z, t } => Dataset::Survival {
                z: z[range.clone()].to_vec(),
                t: t[range].to_vec(),
            },
        }
    }

    pub fn location(&self) -> Result<&[f64]> {
        match self {
            Dataset::Location(x) => Ok(x),
            _ => Err(Error::SchemaMismatch {
                expected: "location",
            }),
        }
    }

    pub fn survival_parts(&self) -> Result<(&[f64], &[f64])> {
        match self {
            Dataset::Survival { z, t } => Ok((z, t)),
            _ => Err(Error::SchemaMismatch {
                expected: "survival",
            }),
        }
    }

    pub fn two_sample_parts(&self) -> Result<(&[f64], &[f64])> {
        match self {
            Dataset::TwoSample { y, z } => Ok((y, z)),
            _ => Err(Error::SchemaMismatch {
                expected: "two-sample",
            }),
        }
    }

    pub fn regression_parts(&self) -> Result<(&[f64], &[f64], usize)> {
        match self {
            Dataset::Regression { y, z, k } => Ok((y, z, *k)),
            _ => Err(Error::SchemaMismatch {
                expected: "regression",
            }),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_theta(theta: &[f64], k: usize) -> Result<()> {
    if theta.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: theta.len(),
        });
    }
    Ok(())
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Location(_) => "location",
            Model::SymRegression(_) => "sym-regression",
            Model::StdRegression(_) => "std-regression",
            Model::TwoSample(_) => "two-sample",
            Model::Cox(_) => "cox",
        }
    }

    pub fn theta0(&self) -> Vec<f64> {
        match self {
            Model::Location(m) => vec![m.theta0],
            Model::SymRegression(m) => m.theta0.clone(),
            Model::StdRegression(m) => {
                let mut v = m.nu0.clone();
                v.push(m.sigma0);
                v
            }
            Model::TwoSample(m) => vec![m.theta0],
            Model::Cox(m) => vec![m.theta0],
        }
    }

    pub fn theta_dim(&self) -> usize {
        match self {
            Model::SymRegression(m) => m.theta0.len(),
            Model::StdRegression(m) => m.nu0.len() + 1,
            _ => 1,
        }
    }

    /// `n` i.i.d. draws at the model's own θ₀.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.sample_at(&self.theta0(), n, rng)
    }

    /// `n` i.i.d. draws at parameter `theta` (same nuisance law).
    pub fn sample_at<R: Rng + ?Sized>(
        &self,
        theta: &[f64],
        n: usize,
        rng: &mut R,
    ) -> Result<Dataset> {
        if n < 2 {
            return Err(Error::SampleTooSmall { got: n, need: 2 });
        }
        check_theta(theta, self.theta_dim())?;
        Ok(match self {
            Model::Location(m) => {
                Dataset::Location((0..n).map(|_| theta[0] + m.law.sample(rng)).collect())
            }
            Model::SymRegression(m) => {
                let k = m.covariate.dim();
                let mut z = vec![0.0; n * k];
                let mut y = Vec::with_capacity(n);
                for row in z.chunks_mut(k) {
                    m.covariate.sample_into(rng, row);
                    y.push(dot(theta, row) + m.law.sample(rng));
                }
                Dataset::Regression { y, z, k }
            }
            Model::StdRegression(m) => {
                let k = m.covariate.dim() + 1;
                let (nu, sigma) = theta.split_at(k);
                let mut z = vec![0.0; n * k];
                let mut y = Vec::with_capacity(n);
                for row in z.chunks_mut(k) {
                    row[0] = 1.0;
                    m.covariate.sample_into(rng, &mut row[1..]);
                    y.push(dot(nu, row) + sigma[0] * m.law.sample(rng));
                }
                Dataset::Regression { y, z, k }
            }
            Model::TwoSample(m) => {
                let mut y = Vec::with_capacity(n);
                let mut z = Vec::with_capacity(n);
                for _ in 0..n {
                    y.push(m.law.sample(rng));
                    z.push(theta[0] + m.law.sample(rng));
                }
                Dataset::TwoSample { y, z }
            }
            Model::Cox(m) => {
                let (z, t) = (0..n).map(|_| m.sample_at(theta[0], rng)).unzip();
                Dataset::Survival { z, t }
            }
        })
    }

    /// Score of the Euclidean parameter, l̇₁(obs; θ).
    pub fn score_theta(&self, obs: Observation<'_>, theta: &[f64]) -> Result<Vec<f64>> {
        check_theta(theta, self.theta_dim())?;
        match (self, obs) {
            (Model::Location(m), Observation::Location(x)) => {
                Ok(vec![m.law.score(x - theta[0])?])
            }
            (Model::SymRegression(m), Observation::Regression { y, z }) => {
                check_theta(z, theta.len())?;
                let rho = m.law.score(y - dot(theta, z))?;
                Ok(z.iter().map(|zi| zi * rho).collect())
            }
            (Model::StdRegression(m), Observation::Regression { y, z }) => {
                let k = theta.len() - 1;
                check_theta(z, k)?;
                let sigma = theta[k];
                let eps = (y - dot(&theta[..k], z)) / sigma;
                let rho = m.law.score(eps)?;
                let mut out: Vec<f64> = z.iter().map(|zi| zi * rho / sigma).collect();
                out.push((eps * rho - 1.0) / sigma);
                Ok(out)
            }
            (Model::TwoSample(m), Observation::TwoSample { z, .. }) => {
                Ok(vec![m.law.score(z - theta[0])?])
            }
            (Model::Cox(m), Observation::Survival { z, t }) => Ok(vec![m.score(z, t, theta[0])]),
            (model, _) => Err(Error::SchemaMismatch {
                expected: model.schema(),
            }),
        }
    }

    pub fn schema(&self) -> &'static str {
        match self {
            Model::Location(_) => "location",
            Model::SymRegression(_) | Model::StdRegression(_) => "regression",
            Model::TwoSample(_) => "two-sample",
            Model::Cox(_) => "survival",
        }
    }

    /// Error law of the non-Cox models.
    pub fn law(&self) -> Option<&ErrorLaw> {
        match self {
            Model::Location(m) => Some(&m.law),
            Model::SymRegression(m) => Some(&m.law),
            Model::StdRegression(m) => Some(&m.law),
            Model::TwoSample(m) => Some(&m.law),
            Model::Cox(_) => None,
        }
    }
}

/// A model plus derived analytic quantities. Immutable after construction.
#[derive(Debug)]
pub struct ModelTruth {
    model: Model,
    sigma2: f64,
    cox: Option<CoxTruth>,
    istar: Option<McEstimate>,
}

impl ModelTruth {
    pub fn new(model: Model) -> Self {
        let sigma2 = match &model {
            Model::Cox(m) => 1.0 / (m.lambda0 * m.lambda0),
            other => other.law().map_or(f64::NAN, ErrorLaw::variance),
        };
        let cox = match &model {
            Model::Cox(m) => Some(CoxTruth::new(*m)),
            _ => None,
        };
        ModelTruth {
            model,
            sigma2,
            cox,
            istar: None,
        }
    }

    /// The same truth with the model's θ₀ replaced by `theta`. The attached
    /// efficient information is kept.
    pub fn at_theta(&self, theta: &[f64]) -> Result<ModelTruth> {
        check_theta(theta, self.model.theta_dim())?;
        let mut model = self.model.clone();
        match &mut model {
            Model::Location(m) => m.theta0 = theta[0],
            Model::SymRegression(m) => m.theta0 = theta.to_vec(),
            Model::StdRegression(m) => {
                let k = theta.len() - 1;
                m.nu0 = theta[..k].to_vec();
                m.sigma0 = theta[k];
            }
            Model::TwoSample(m) => m.theta0 = theta[0],
            Model::Cox(m) => m.theta0 = theta[0],
        }
        let mut out = ModelTruth::new(model);
        out.istar = self.istar;
        Ok(out)
    }

    /// Attaches a precomputed efficient information.
    pub fn with_istar(mut self, istar: McEstimate) -> Self {
        self.istar = Some(istar);
        self
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// Error variance ∫x² dG (baseline variance for the Cox model).
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn law(&self) -> Result<&ErrorLaw> {
        self.model.law().ok_or(Error::SchemaMismatch {
            expected: "error-law model",
        })
    }

    pub fn cox(&self) -> Result<&CoxTruth> {
        self.cox.as_ref().ok_or(Error::SchemaMismatch {
            expected: "survival",
        })
    }

    pub fn istar(&self) -> Option<McEstimate> {
        self.istar
    }

    /// S_{i,θ}(t) for the Cox model.
    pub fn cox_s(&self, i: u8, t: f64, theta: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::InvalidParameter(format!("time {t} is negative")));
        }
        Ok(self.cox()?.model().s(i, t, theta))
    }

    /// Λ(t) = −log(1 − G(t)) for the Cox baseline.
    pub fn cumulative_hazard(&self, t: f64) -> Result<f64> {
        Ok(self.cox()?.model().cumulative_hazard(t))
    }
}

/// Minimum Monte Carlo size for [`cox_efficient_information`].
pub const MIN_INFORMATION_DRAWS: usize = 10_000;

const INFORMATION_CHUNK: usize = 8192;

/// Monte Carlo estimate of I* = E (l₁*)² at θ₀ with its standard error.
pub fn cox_efficient_information(
    truth: &ModelTruth,
    mc_n: usize,
    key: StreamKey,
    exec: Execution,
) -> Result<McEstimate> {
    if mc_n < MIN_INFORMATION_DRAWS {
        return Err(Error::SampleTooSmall {
            got: mc_n,
            need: MIN_INFORMATION_DRAWS,
        });
    }
    let model = *truth.cox()?.model();
    let parts = par::map_chunks(mc_n, INFORMATION_CHUNK, exec, |c, range| {
        let mut rng = key.index(c as u64).rng();
        let mut m = Moments::default();
        for _ in range {
            let (z, t) = model.sample_at(model.theta0, &mut rng);
            m.push(model.efficient_score(z, t, model.theta0).powi(2));
        }
        m
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    let est = total.mean_se();
    if !(est.value > 1e-12) {
        return Err(Error::DegenerateInformation(est.value));
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal() -> ErrorLaw {
        ErrorLaw::normal(1.0).unwrap()
    }

    #[test]
    fn sampling_is_deterministic_and_shaped() {
        let m = Model::Location(LocationModel {
            theta0: 0.0,
            law: normal(),
        });
        let key = StreamKey::root(1).child("x");
        let a = m.sample(3, &mut key.rng()).unwrap();
        let b = m.sample(3, &mut key.rng()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert!(matches!(
            m.sample(1, &mut key.rng()),
            Err(Error::SampleTooSmall { .. })
        ));

        let cox = Model::Cox(CoxModel::new(0.5, 1.0, 2.0).unwrap());
        let d = cox.sample(5, &mut key.rng()).unwrap();
        for obs in d.iter() {
            let Observation::Survival { z, t } = obs else {
                panic!()
            };
            assert!(z == 0.0 || z == 1.0);
            assert!(t > 0.0);
        }

        let reg = Model::SymRegression(
            SymRegressionModel::new(
                vec![1.0, -1.0],
                normal(),
                CovariateLaw::StandardNormal { dim: 2 },
            )
            .unwrap(),
        );
        let d = reg.sample(4, &mut key.rng()).unwrap();
        assert_eq!(d.len(), 4);
        let Observation::Regression { z, .. } = d.obs(3) else {
            panic!()
        };
        assert_eq!(z.len(), 2);
    }

    #[test]
    fn score_examples() {
        let cox = Model::Cox(CoxModel::new(0.0, 1.0, 2.0).unwrap());
        assert_eq!(
            cox.score_theta(Observation::Survival { z: 0.0, t: 1.7 }, &[0.3])
                .unwrap(),
            vec![0.0]
        );
        // Λ(t) = t for λ₀ = 1
        assert_eq!(
            cox.score_theta(Observation::Survival { z: 1.0, t: 1.0 }, &[0.0])
                .unwrap(),
            vec![0.0]
        );
        let reg = Model::SymRegression(
            SymRegressionModel::new(vec![0.0], normal(), CovariateLaw::StandardNormal { dim: 1 })
                .unwrap(),
        );
        let s = reg
            .score_theta(Observation::Regression { y: 2.0, z: &[1.0] }, &[0.0])
            .unwrap();
        assert_eq!(s, vec![2.0]);
        assert!(matches!(
            reg.score_theta(Observation::Location(1.0), &[0.0]),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn score_has_mean_zero() {
        let law = ErrorLaw::logistic(0.8).unwrap();
        let models = [
            Model::Location(LocationModel { theta0: 1.0, law }),
            Model::SymRegression(
                SymRegressionModel::new(vec![0.5, 2.0], law, CovariateLaw::Bernoulli { dim: 2 })
                    .unwrap(),
            ),
            Model::StdRegression(
                StdRegressionModel::new(
                    vec![1.0, -0.5],
                    2.0,
                    ErrorLaw::laplace(1.0).unwrap(),
                    CovariateLaw::Bernoulli { dim: 1 },
                )
                .unwrap(),
            ),
            Model::TwoSample(TwoSampleModel { theta0: -1.0, law }),
            Model::Cox(CoxModel::new(0.5, 2.0, 1.0).unwrap()),
        ];
        let n = 100_000;
        for (idx, model) in models.iter().enumerate() {
            let data = model
                .sample(n, &mut StreamKey::root(99).index(idx as u64).rng())
                .unwrap();
            let theta = model.theta0();
            let k = model.theta_dim();
            let mut sums = vec![0.0; k];
            let mut sq = vec![0.0; k];
            for obs in data.iter() {
                for (j, s) in model
                    .score_theta(obs, &theta)
                    .unwrap()
                    .into_iter()
                    .enumerate()
                {
                    sums[j] += s;
                    sq[j] += s * s;
                }
            }
            for j in 0..k {
                let mean = sums[j] / n as f64;
                let sd = (sq[j] / n as f64 - mean * mean).sqrt();
                assert!(
                    mean.abs() <= 4.0 * sd / (n as f64).sqrt(),
                    "{} component {j}: {mean}",
                    model.name()
                );
            }
        }
    }

    #[test]
    fn covariate_second_moment_nonsingular() {
        let b = CovariateLaw::Bernoulli { dim: 3 }.second_moment();
        assert!(b.inverse().is_ok());
        assert_eq!(b.get(0, 1), 0.25);
        assert!(
            SymRegressionModel::new(vec![1.0], normal(), CovariateLaw::Bernoulli { dim: 2 })
                .is_err()
        );
    }

    #[test]
    fn truth_accessors() {
        let t = ModelTruth::new(Model::Cox(CoxModel::new(0.0, 1.0, 2.0).unwrap()));
        assert_eq!(t.cox_s(0, 0.0, 0.0).unwrap(), 1.0);
        assert_eq!(t.cumulative_hazard(1.5).unwrap(), 1.5);
        assert!(t.law().is_err());
        let l = ModelTruth::new(Model::Location(LocationModel {
            theta0: 0.0,
            law: ErrorLaw::laplace(2.0).unwrap(),
        }));
        assert_eq!(l.sigma2(), 8.0);
        assert!(l.cox().is_err());
    }

    #[test]
    fn efficient_information() {
        let model = CoxModel::new(0.0, 1.0, CoxModel::window_for_prob(1.0, 0.9)).unwrap();
        let truth = ModelTruth::new(Model::Cox(model));
        let key = StreamKey::root(3);
        let a = cox_efficient_information(&truth, 200_000, key.child("a"), Execution::Parallel)
            .unwrap();
        let again =
            cox_efficient_information(&truth, 200_000, key.child("a"), Execution::Serial).unwrap();
        assert_eq!(a, again);
        assert!(a.value > 0.0);
        let b = cox_efficient_information(&truth, 200_000, key.child("b"), Execution::Parallel)
            .unwrap();
        let combined = (a.se * a.se + b.se * b.se).sqrt();
        assert!((a.value - b.value).abs() <= 4.0 * combined);

        let flat = CoxModel::with_covariate(0.0, 1.0, 1.0, 0.0).unwrap();
        let flat = ModelTruth::new(Model::Cox(flat));
        assert!(matches!(
            cox_efficient_information(&flat, 10_000, key, Execution::Serial),
            Err(Error::DegenerateInformation(v)) if v == 0.0
        ));
        assert!(cox_efficient_information(&truth, 9_999, key, Execution::Serial).is_err());
    }
}
