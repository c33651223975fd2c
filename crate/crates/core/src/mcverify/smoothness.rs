use crate::error::{Error, Result};
use crate::models::{Model, ModelTruth};
use crate::par::{self, Execution};
use crate::rng::StreamKey;

/// Thresholds ε at which exceedance frequencies are reported.
pub const SMOOTHNESS_EPS: [f64; 3] = [0.05, 0.1, 0.2];
pub const MIN_SMOOTHNESS_REPS: usize = 500;

/// Exceedance frequencies for one mesh ζ, one per entry of [`SMOOTHNESS_EPS`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothnessRow {
    pub zeta: f64,
    pub frequencies: [f64; 3],
    pub std_errors: [f64; 3],
}

/// sup √n|Ĝθ,n(t) − Ĝθ̃,n(t)| over θ, θ̃ ∈ θ₀ ± c/√n with |θ − θ̃| ≤ ζ/√n, where
/// Ĝθ,n is the empirical law of xᵢ − θ. The sup is taken over the continuum: it
/// is the largest count of points in a half-open window (a, b] of width at
/// most ζ/√n inside [θ₀ + t − c/√n, θ₀ + t + c/√n].
pub fn sup_increment(sorted: &[f64], theta0: f64, t: f64, c: f64, zeta: f64) -> f64 {
    let n = sorted.len() as f64;
    let lo = theta0 + t - c / n.sqrt();
    let hi = theta0 + t + c / n.sqrt();
    let w = zeta / n.sqrt();
    let mut best = 0usize;
    let mut left = 0usize;
    for (j, &y) in sorted.iter().enumerate() {
        if y <= lo || y > hi {
            continue;
        }
        let a = (y - w).max(lo);
        while sorted[left] <= a {
            left += 1;
        }
        best = best.max(j + 1 - left);
    }
    best as f64 / n.sqrt()
}

/// Monte Carlo exceedance frequencies of [`sup_increment`] under the location
/// model, one row per ζ.
#[allow(clippy::too_many_arguments)]
pub fn check_smoothness(
    truth: &ModelTruth,
    n: usize,
    c: f64,
    t: f64,
    zetas: &[f64],
    reps: usize,
    key: StreamKey,
    exec: Execution,
) -> Result<Vec<SmoothnessRow>> {
    if reps < MIN_SMOOTHNESS_REPS {
        return Err(Error::SampleTooSmall {
            got: reps,
            need: MIN_SMOOTHNESS_REPS,
        });
    }
    let Model::Location(m) = truth.model() else {
        return Err(Error::SchemaMismatch {
            expected: "location",
        });
    };
    if n < 2 {
        return Err(Error::SampleTooSmall { got: n, need: 2 });
    }
    if !(c >= 0.0 && c.is_finite() && t.is_finite())
        || zetas.iter().any(|z| !(*z >= 0.0 && z.is_finite()))
    {
        return Err(Error::InvalidParameter(
            "smoothness range and meshes must be finite and nonnegative".into(),
        ));
    }
    let model = truth.model();
    let sups = par::map_indexed(reps, exec, |rep| -> Result<Vec<f64>> {
        let data = model.sample(n, &mut key.index(rep as u64).rng())?;
        let mut x = data.location()?.to_vec();
        x.sort_by(f64::total_cmp);
        Ok(zetas
            .iter()
            .map(|&z| sup_increment(&x, m.theta0, t, c, z))
            .collect())
    });
    let sups = sups.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(zetas
        .iter()
        .enumerate()
        .map(|(k, &zeta)| {
            let mut frequencies = [0.0; 3];
            let mut std_errors = [0.0; 3];
            for (e, eps) in SMOOTHNESS_EPS.iter().enumerate() {
                let hits = sups.iter().filter(|s| s[k] >= *eps).count() as f64;
                let f = hits / reps as f64;
                frequencies[e] = f;
                std_errors[e] = (f * (1.0 - f) / reps as f64).sqrt();
            }
            SmoothnessRow {
                zeta,
                frequencies,
                std_errors,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ErrorLaw, LocationModel};

    fn brute_force(sorted: &[f64], theta0: f64, t: f64, c: f64, zeta: f64) -> f64 {
        let n = sorted.len() as f64;
        let lo = theta0 + t - c / n.sqrt();
        let hi = theta0 + t + c / n.sqrt();
        let w = zeta / n.sqrt();
        let steps = 4000;
        let mut best = 0usize;
        for i in 0..=steps {
            let a = lo + (hi - lo) * i as f64 / steps as f64;
            let b = (a + w).min(hi);
            best = best.max(sorted.iter().filter(|&&y| y > a && y <= b).count());
        }
        best as f64 / n.sqrt()
    }

    #[test]
    fn matches_grid_search() {
        let law = ErrorLaw::normal(1.0).unwrap();
        let model = Model::Location(LocationModel { theta0: 0.0, law });
        for seed in 0..20 {
            let data = model.sample(200, &mut StreamKey::root(seed).rng()).unwrap();
            let mut x = data.location().unwrap().to_vec();
            x.sort_by(f64::total_cmp);
            for zeta in [0.0, 0.1, 0.5, 2.0] {
                let exact = sup_increment(&x, 0.0, 0.0, 2.0, zeta);
                let grid = brute_force(&x, 0.0, 0.0, 2.0, zeta);
                assert!(grid <= exact + 1e-15);
                assert!(
                    exact - grid <= 1.0 / 200f64.sqrt() + 1e-15,
                    "{exact} {grid}"
                );
            }
        }
    }

    #[test]
    fn zero_mesh_never_exceeds_and_eps_nesting() {
        let truth = ModelTruth::new(Model::Location(LocationModel {
            theta0: 0.3,
            law: ErrorLaw::normal(1.0).unwrap(),
        }));
        let rows = check_smoothness(
            &truth,
            400,
            2.0,
            0.0,
            &[0.0, 0.25, 0.5],
            500,
            StreamKey::root(4),
            Execution::Parallel,
        )
        .unwrap();
        assert_eq!(rows[0].frequencies, [0.0; 3]);
        for r in &rows {
            assert!(r.frequencies.windows(2).all(|w| w[0] >= w[1]));
        }
        assert!(check_smoothness(
            &truth,
            400,
            2.0,
            0.0,
            &[0.1],
            499,
            StreamKey::root(4),
            Execution::Parallel
        )
        .is_err());
    }
}
