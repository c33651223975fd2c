use rand::Rng;

use crate::distkit::SignedStepDistribution;
use crate::error::{Error, Result};
use crate::models::Dataset;
use crate::rng::StreamKey;

pub const MIN_BOOTSTRAP: usize = 100;

/// Empirical law of √n(X̄* − X̄ₙ) over `b` resamples drawn with replacement.
pub fn bootstrap_centered_mean(
    data: &Dataset,
    b: usize,
    key: StreamKey,
) -> Result<SignedStepDistribution> {
    if b < MIN_BOOTSTRAP {
        return Err(Error::SampleTooSmall {
            got: b,
            need: MIN_BOOTSTRAP,
        });
    }
    let x = data.location()?;
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let n = x.len();
    let xbar = x.iter().sum::<f64>() / n as f64;
    let root_n = (n as f64).sqrt();
    let mut rng = key.rng();
    let draws: Vec<f64> = (0..b)
        .map(|_| {
            let total: f64 = (0..n).map(|_| x[rng.random_range(0..n)]).sum();
            root_n * (total / n as f64 - xbar)
        })
        .collect();
    SignedStepDistribution::empirical(&draws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_gives_point_mass_at_zero() {
        let data = Dataset::Location(vec![3.25; 40]);
        let d = bootstrap_centered_mean(&data, 200, StreamKey::root(1)).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.atoms()[0].location, 0.0);
        assert!((d.atoms()[0].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_and_validated() {
        let data = Dataset::Location((0..30).map(|i| (i as f64).sin()).collect());
        let a = bootstrap_centered_mean(&data, 100, StreamKey::root(9)).unwrap();
        let b = bootstrap_centered_mean(&data, 100, StreamKey::root(9)).unwrap();
        assert_eq!(a, b);
        assert!(bootstrap_centered_mean(&data, 99, StreamKey::root(9)).is_err());
        assert!(
            bootstrap_centered_mean(&Dataset::Location(vec![]), 100, StreamKey::root(9)).is_err()
        );
    }
}
