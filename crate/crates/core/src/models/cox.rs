//! Proportional hazards with an exponential baseline and a binary covariate.
//!
//! Hazard of an individual with covariate z is `e^{θz} λ₀`. Everything the
//! influence functions need (S₀, S₁, the risk-weighted integrals) has a closed
//! form except ∫ dΛ/S₀, which is tabulated by adaptive quadrature.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::quad::{self, CumulativeIntegral};

/// Largest admissible baseline probability of the window: G(T0) ≤ 0.95.
pub const MAX_WINDOW_PROB: f64 = 0.95;

const QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoxModel {
    pub theta0: f64,
    /// Baseline exponential rate λ₀.
    pub lambda0: f64,
    /// Estimation window [0, T0].
    pub t0: f64,
    /// P(Z = 1); Z ∈ {0, 1}.
    pub covariate_p: f64,
}

impl CoxModel {
    pub fn new(theta0: f64, lambda0: f64, t0: f64) -> Result<Self> {
        Self::with_covariate(theta0, lambda0, t0, 0.5)
    }

    pub fn with_covariate(theta0: f64, lambda0: f64, t0: f64, covariate_p: f64) -> Result<Self> {
        if !theta0.is_finite() {
            return Err(Error::NonFinite);
        }
        if !(lambda0.is_finite() && lambda0 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda0 must be positive, got {lambda0}"
            )));
        }
        if !(0.0..=1.0).contains(&covariate_p) {
            return Err(Error::InvalidParameter(format!(
                "covariate probability {covariate_p} not in [0,1]"
            )));
        }
        let max_t0 = -(1.0 - MAX_WINDOW_PROB).ln() / lambda0;
        if !(t0 > 0.0 && t0 <= max_t0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "window T0 = {t0} must lie in (0, {max_t0}] so that G(T0) <= {MAX_WINDOW_PROB}"
            )));
        }
        Ok(CoxModel {
            theta0,
            lambda0,
            t0,
            covariate_p,
        })
    }

    /// Window chosen so that G(T0) = `prob`.
    pub fn window_for_prob(lambda0: f64, prob: f64) -> f64 {
        -(1.0 - prob).ln() / lambda0
    }

    /// Baseline distribution function G(t) = 1 − e^{−λ₀t}.
    pub fn baseline_cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            -(-self.lambda0 * t).exp_m1()
        }
    }

    pub fn baseline_pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            self.lambda0 * (-self.lambda0 * t).exp()
        }
    }

    /// Baseline time with G(t) = p.
    pub fn baseline_quantile(&self, p: f64) -> f64 {
        -(-p).ln_1p() / self.lambda0
    }

    /// Cumulative hazard Λ(t) = −log(1 − G(t)) = λ₀t.
    pub fn cumulative_hazard(&self, t: f64) -> f64 {
        self.lambda0 * t.max(0.0)
    }

    /// S_{i,θ}(t) = E_θ Zⁱ e^{θZ} 1{T ≥ t}, i ∈ {0, 1}.
    pub fn s(&self, i: u8, t: f64, theta: f64) -> f64 {
        let u = self.cumulative_hazard(t);
        let a = theta.exp();
        let p = self.covariate_p;
        let s1 = p * a * (-a * u).exp();
        match i {
            0 => (1.0 - p) * (-u).exp() + s1,
            _ => s1,
        }
    }

    /// ∫₀ᵗ (S₁/S₀) dΛ in closed form.
    pub fn ratio_integral(&self, t: f64, theta: f64) -> f64 {
        let u = self.cumulative_hazard(t);
        let p = self.covariate_p;
        let q = 1.0 - p;
        let a = theta.exp();
        let b = a - 1.0;
        if p == 0.0 {
            return 0.0;
        }
        if b.abs() < 1e-8 {
            // expansion of the general form around b = 0 (a = 1)
            return p * u + p * q * b * (u - 0.5 * u * u);
        }
        // u − (1/b) log((q e^{bu} + pa)/(q + pa)), written to avoid overflow
        let log_num = if b * u > 0.0 {
            b * u + (q + p * a * (-b * u).exp()).ln()
        } else {
            (q * (b * u).exp() + p * a).ln()
        };
        u - (log_num - (q + p * a).ln()) / b
    }

    pub fn sample_at<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> (f64, f64) {
        let z = if rng.random::<f64>() < self.covariate_p {
            1.0
        } else {
            0.0
        };
        let rate = self.lambda0 * (theta * z).exp();
        let t = Exp::new(rate).expect("positive rate").sample(rng);
        (z, t)
    }

    /// θ-score z(1 − e^{θz} Λ(t)).
    pub fn score(&self, z: f64, t: f64, theta: f64) -> f64 {
        z * (1.0 - (theta * z).exp() * self.cumulative_hazard(t))
    }

    /// Efficient score l̇₁ − (S₁/S₀(t) − e^{θz}∫₀ᵗ (S₁/S₀) dΛ).
    pub fn efficient_score(&self, z: f64, t: f64, theta: f64) -> f64 {
        let correction = self.s(1, t, theta) / self.s(0, t, theta)
            - (theta * z).exp() * self.ratio_integral(t, theta);
        self.score(z, t, theta) - correction
    }
}

/// Precomputed truth-side integrals for a Cox model at its true θ.
pub struct CoxTruth {
    model: CoxModel,
    inv_s0: CumulativeIntegral<Box<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl std::fmt::Debug for CoxTruth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoxTruth")
            .field("model", &self.model)
            .finish()
    }
}

impl CoxTruth {
    pub fn new(model: CoxModel) -> Self {
        let (m, theta) = (model, model.theta0);
        let f: Box<dyn Fn(f64) -> f64 + Send + Sync> =
            Box::new(move |t| m.lambda0 / m.s(0, t, theta));
        let inv_s0 = CumulativeIntegral::new(f, model.t0, 2048, QUAD_TOL);
        CoxTruth { model, inv_s0 }
    }

    pub fn model(&self) -> &CoxModel {
        &self.model
    }

    /// ∫₀ᵗ dΛ/S_{0,θ}.
    pub fn inv_s0_integral(&self, t: f64, theta: f64) -> f64 {
        if theta.to_bits() == self.model.theta0.to_bits() {
            self.inv_s0.at(t)
        } else {
            let m = self.model;
            quad::integrate(|u| m.lambda0 / m.s(0, u, theta), 0.0, t.max(0.0), QUAD_TOL)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn model(theta: f64) -> CoxModel {
        CoxModel::new(theta, 1.0, CoxModel::window_for_prob(1.0, 0.9)).unwrap()
    }

    #[test]
    fn s_closed_form_examples() {
        let m = model(0.0);
        assert!((m.s(0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((m.s(1, 0.0, 0.0) - 0.5).abs() < 1e-15);
        let e1 = (-1f64).exp();
        assert!((m.s(0, 1.0, 0.0) - e1).abs() < 1e-15);
        assert!((m.s(1, 1.0, 0.0) - 0.5 * e1).abs() < 1e-15);
        let expected = 0.5 * (e1 + 2.0 * (-2f64).exp());
        assert!((m.s(0, 1.0, 2f64.ln()) - expected).abs() < 1e-15);
    }

    #[test]
    fn s0_matches_monte_carlo() {
        let m = model(2f64.ln());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let draws = 1_000_000;
        let mut acc = 0.0;
        let mut acc_sq = 0.0;
        for _ in 0..draws {
            let (z, t) = m.sample_at(m.theta0, &mut rng);
            let v = if t >= 1.0 { (m.theta0 * z).exp() } else { 0.0 };
            acc += v;
            acc_sq += v * v;
        }
        let mean = acc / draws as f64;
        let se = ((acc_sq / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - m.s(0, 1.0, m.theta0)).abs() < 4.0 * se);
    }

    #[test]
    fn hazard_identities() {
        let m = model(0.5);
        let mut prev = f64::INFINITY;
        for k in 0..100 {
            let t = k as f64 * 0.05;
            let lam = -(1.0 - m.baseline_cdf(t)).ln();
            assert!((lam - m.cumulative_hazard(t)).abs() < 1e-12);
            let s0 = m.s(0, t, 0.5);
            assert!(s0 <= prev);
            prev = s0;
        }
        assert_eq!(m.s(0, 0.0, 0.0), 1.0);
        assert!((m.s(0, 0.0, 0.5) - 0.5 * (1.0 + 0.5f64.exp())).abs() < 1e-15);
    }

    #[test]
    fn ratio_integral_matches_quadrature() {
        for &theta in &[-1.0, 0.0, 1e-10, 0.5, 1.5] {
            let m = model(theta);
            for &t in &[0.0, 0.3, 1.0, 2.2] {
                let q = quad::integrate(
                    |u| m.lambda0 * m.s(1, u, theta) / m.s(0, u, theta),
                    0.0,
                    t,
                    1e-12,
                );
                assert!(
                    (q - m.ratio_integral(t, theta)).abs() < 1e-9,
                    "theta={theta} t={t}"
                );
            }
        }
    }

    #[test]
    fn inv_s0_table_matches_direct() {
        let truth = CoxTruth::new(model(0.5));
        for &t in &[0.0, 0.1, 0.69, 1.7, 2.3] {
            let direct = quad::integrate(|u| 1.0 / truth.model().s(0, u, 0.5), 0.0, t, 1e-12);
            assert!((truth.inv_s0_integral(t, 0.5) - direct).abs() < 1e-8);
            assert!((truth.inv_s0_integral(t, 0.5 + 1e-3) - direct).abs() < 1e-2);
        }
        // θ = 0 has ∫dΛ/S₀ = e^{Λ} − 1
        let t0 = CoxTruth::new(model(0.0));
        assert!((t0.inv_s0_integral(1.3, 0.0) - (1.3f64.exp() - 1.0)).abs() < 1e-8);
    }

    #[test]
    fn window_validation() {
        assert!(CoxModel::new(0.0, 1.0, 3.5).is_err());
        assert!(CoxModel::new(0.0, 1.0, CoxModel::window_for_prob(1.0, 0.95)).is_ok());
        assert!(CoxModel::new(0.0, -1.0, 1.0).is_err());
        assert!(CoxModel::with_covariate(0.0, 1.0, 1.0, 1.5).is_err());
    }
}
