//! Centred symmetric error laws with closed-form distribution functions.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorLaw {
    Normal { sigma: f64 },
    Logistic { scale: f64 },
    Laplace { scale: f64 },
    Uniform { half_width: f64 },
}

impl ErrorLaw {
    pub fn normal(sigma: f64) -> Result<Self> {
        positive("sigma", sigma).map(|sigma| ErrorLaw::Normal { sigma })
    }

    pub fn logistic(scale: f64) -> Result<Self> {
        positive("scale", scale).map(|scale| ErrorLaw::Logistic { scale })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        positive("scale", scale).map(|scale| ErrorLaw::Laplace { scale })
    }

    pub fn uniform(half_width: f64) -> Result<Self> {
        positive("half_width", half_width).map(|half_width| ErrorLaw::Uniform { half_width })
    }

    /// Parses a family name with its scale parameter.
    pub fn from_name(name: &str, scale: f64) -> Result<Self> {
        match name {
            "normal" => Self::normal(scale),
            "logistic" => Self::logistic(scale),
            "laplace" => Self::laplace(scale),
            "uniform" => Self::uniform(scale),
            other => Err(Error::InvalidParameter(format!(
                "unknown error law {other:?}"
            ))),
        }
    }

    /// Same family rescaled to unit variance.
    pub fn standardized(&self) -> Self {
        let sd = self.variance().sqrt();
        match *self {
            ErrorLaw::Normal { sigma } => ErrorLaw::Normal { sigma: sigma / sd },
            ErrorLaw::Logistic { scale } => ErrorLaw::Logistic { scale: scale / sd },
            ErrorLaw::Laplace { scale } => ErrorLaw::Laplace { scale: scale / sd },
            ErrorLaw::Uniform { half_width } => ErrorLaw::Uniform {
                half_width: half_width / sd,
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ErrorLaw::Normal { .. } => "normal",
            ErrorLaw::Logistic { .. } => "logistic",
            ErrorLaw::Laplace { .. } => "laplace",
            ErrorLaw::Uniform { .. } => "uniform",
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match *self {
            ErrorLaw::Normal { sigma } => 0.5 * erfc(-t / (sigma * SQRT_2)),
            ErrorLaw::Logistic { scale } => logistic_cdf(t / scale),
            ErrorLaw::Laplace { scale } => {
                if t < 0.0 {
                    0.5 * (t / scale).exp()
                } else {
                    1.0 - 0.5 * (-t / scale).exp()
                }
            }
            ErrorLaw::Uniform { half_width: a } => ((t + a) / (2.0 * a)).clamp(0.0, 1.0),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match *self {
            ErrorLaw::Normal { sigma } => {
                let z = t / sigma;
                INV_SQRT_2PI / sigma * (-0.5 * z * z).exp()
            }
            ErrorLaw::Logistic { scale } => {
                let p = logistic_cdf(t / scale);
                p * (1.0 - p) / scale
            }
            ErrorLaw::Laplace { scale } => (-t.abs() / scale).exp() / (2.0 * scale),
            ErrorLaw::Uniform { half_width: a } => {
                if t.abs() <= a {
                    0.5 / a
                } else {
                    0.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "quantile level {p} not in (0,1)"
            )));
        }
        Ok(match *self {
            ErrorLaw::Normal { sigma } => -sigma * SQRT_2 * erfc_inv(2.0 * p),
            ErrorLaw::Logistic { scale } => scale * (p / (1.0 - p)).ln(),
            ErrorLaw::Laplace { scale } => {
                if p < 0.5 {
                    scale * (2.0 * p).ln()
                } else {
                    -scale * (2.0 * (1.0 - p)).ln()
                }
            }
            ErrorLaw::Uniform { half_width: a } => a * (2.0 * p - 1.0),
        })
    }

    pub fn variance(&self) -> f64 {
        match *self {
            ErrorLaw::Normal { sigma } => sigma * sigma,
            ErrorLaw::Logistic { scale } => scale * scale * std::f64::consts::PI.powi(2) / 3.0,
            ErrorLaw::Laplace { scale } => 2.0 * scale * scale,
            ErrorLaw::Uniform { half_width: a } => a * a / 3.0,
        }
    }

    /// E[ε·1{ε ≤ t}].
    pub fn partial_first_moment(&self, t: f64) -> f64 {
        match *self {
            ErrorLaw::Normal { sigma } => -sigma * sigma * self.pdf(t),
            ErrorLaw::Logistic { scale: s } => {
                if t >= 0.0 {
                    -t * logistic_cdf(-t / s) - s * (-t / s).exp().ln_1p()
                } else {
                    t * logistic_cdf(t / s) - s * (t / s).exp().ln_1p()
                }
            }
            ErrorLaw::Laplace { scale: b } => {
                if t <= 0.0 {
                    0.5 * (t / b).exp() * (t - b)
                } else {
                    -0.5 * (-t / b).exp() * (t + b)
                }
            }
            ErrorLaw::Uniform { half_width: a } => {
                if t.abs() >= a {
                    0.0
                } else {
                    (t * t - a * a) / (4.0 * a)
                }
            }
        }
    }

    /// Location score −g′/g.
    pub fn score(&self, x: f64) -> Result<f64> {
        match *self {
            ErrorLaw::Normal { sigma } => Ok(x / (sigma * sigma)),
            ErrorLaw::Logistic { scale } => Ok((x / (2.0 * scale)).tanh() / scale),
            ErrorLaw::Laplace { scale } => Ok(if x > 0.0 {
                1.0 / scale
            } else if x < 0.0 {
                -1.0 / scale
            } else {
                0.0
            }),
            ErrorLaw::Uniform { .. } => Err(Error::NoScore("uniform")),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ErrorLaw::Normal { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                sigma * z
            }
            ErrorLaw::Logistic { scale } => {
                let u = open_unit(rng);
                scale * (u / (1.0 - u)).ln()
            }
            ErrorLaw::Laplace { scale } => {
                let u = open_unit(rng) - 0.5;
                -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            ErrorLaw::Uniform { half_width: a } => rng.random_range(-a..a),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

fn logistic_cdf(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Uniform draw on the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;

    fn all_laws() -> Vec<ErrorLaw> {
        vec![
            ErrorLaw::normal(1.3).unwrap(),
            ErrorLaw::logistic(0.7).unwrap(),
            ErrorLaw::laplace(0.9).unwrap(),
            ErrorLaw::uniform(2.0).unwrap(),
        ]
    }

    #[test]
    fn symmetry_of_cdf() {
        for law in all_laws() {
            for k in -60..=60 {
                let t = k as f64 * 0.1;
                assert!(
                    (law.cdf(t) + law.cdf(-t) - 1.0).abs() <= 1e-12,
                    "{law:?} t={t}"
                );
            }
        }
    }

    #[test]
    fn moments_by_quadrature() {
        for law in all_laws() {
            let lim = 40.0 * law.variance().sqrt();
            let mean = quad::integrate_with_breaks(
                |x| x * law.pdf(x),
                -lim,
                lim,
                &[0.0, -2.0, 2.0],
                1e-11,
            );
            assert!(mean.abs() < 1e-9, "{law:?}");
            let var = quad::integrate_with_breaks(
                |x| x * x * law.pdf(x),
                -lim,
                lim,
                &[0.0, -2.0, 2.0],
                1e-11,
            );
            assert!((var - law.variance()).abs() < 1e-7, "{law:?} {var}");
            for &t in &[-1.5, -0.2, 0.0, 0.4, 1.7] {
                let m =
                    quad::integrate_with_breaks(|x| x * law.pdf(x), -lim, t, &[0.0, -2.0], 1e-11);
                assert!(
                    (m - law.partial_first_moment(t)).abs() < 1e-8,
                    "{law:?} t={t}"
                );
                let c = quad::integrate_with_breaks(|x| law.pdf(x), -lim, t, &[0.0, -2.0], 1e-12);
                assert!((c - law.cdf(t)).abs() < 1e-9, "{law:?} t={t}");
            }
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for law in all_laws() {
            for &p in &[0.01, 0.25, 0.5, 0.75, 0.99] {
                let q = law.quantile(p).unwrap();
                assert!((law.cdf(q) - p).abs() < 1e-12, "{law:?} p={p}");
            }
        }
        assert!(ErrorLaw::normal(1.0).unwrap().quantile(1.0).is_err());
    }

    #[test]
    fn score_is_log_density_derivative() {
        for law in all_laws().into_iter().take(3) {
            for &x in &[-1.1, -0.3, 0.45, 2.0] {
                let h = 1e-6;
                let fd = -((law.pdf(x + h)).ln() - (law.pdf(x - h)).ln()) / (2.0 * h);
                assert!((fd - law.score(x).unwrap()).abs() < 1e-6, "{law:?} x={x}");
            }
        }
        assert_eq!(
            ErrorLaw::uniform(1.0).unwrap().score(0.1),
            Err(Error::NoScore("uniform"))
        );
    }

    #[test]
    fn standardized_has_unit_variance() {
        for law in all_laws() {
            assert!((law.standardized().variance() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_scale() {
        assert!(ErrorLaw::normal(0.0).is_err());
        assert!(ErrorLaw::from_name("cauchy", 1.0).is_err());
    }
}
