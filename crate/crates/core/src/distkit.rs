//! Finite signed step measures on the real line.
//!
//! Every distribution-function estimate in the crate is a
//! [`SignedStepDistribution`]: sorted atoms with real (possibly negative)
//! weights. Its CDF is the right-continuous step function
//! `t ↦ Σ{w : x ≤ t}`.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignedStepDistribution {
    atoms: Vec<Atom>,
    /// prefix[i] = Σ_{j<i} weight_j, so prefix[len] is the total mass.
    prefix: Vec<f64>,
}

impl SignedStepDistribution {
    /// Builds a measure from paired locations and weights. Duplicate
    /// locations are merged by summing their weights.
    pub fn from_points(xs: &[f64], weights: &[f64]) -> Result<Self> {
        if xs.len() != weights.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: weights.len(),
            });
        }
        if xs.is_empty() {
            return Err(Error::Empty);
        }
        if xs.iter().chain(weights).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let mut order: Vec<usize> = (0..xs.len()).collect();
        // stable: equal locations keep input order, so merged sums are deterministic
        order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut atoms: Vec<Atom> = Vec::with_capacity(xs.len());
        for i in order {
            // -0.0 and 0.0 are one location
            let loc = if xs[i] == 0.0 { 0.0 } else { xs[i] };
            match atoms.last_mut() {
                Some(last) if last.location == loc => last.weight += weights[i],
                _ => atoms.push(Atom {
                    location: loc,
                    weight: weights[i],
                }),
            }
        }
        Ok(Self::from_sorted_atoms(atoms))
    }

    /// Equal weights 1/n: the classical empirical distribution.
    pub fn empirical(xs: &[f64]) -> Result<Self> {
        let w = 1.0 / xs.len() as f64;
        Self::from_points(xs, &vec![w; xs.len()])
    }

    fn from_sorted_atoms(atoms: Vec<Atom>) -> Self {
        let mut prefix = Vec::with_capacity(atoms.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for a in &atoms {
            acc += a.weight;
            prefix.push(acc);
        }
        SignedStepDistribution { atoms, prefix }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.prefix[self.atoms.len()]
    }

    /// Σ{weight : location ≤ t}.
    pub fn cdf_at(&self, t: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.location <= t);
        self.prefix[k]
    }

    /// Left limit Σ{weight : location < t}.
    pub fn cdf_left_at(&self, t: f64) -> f64 {
        let k = self.atoms.partition_point(|a| a.location < t);
        self.prefix[k]
    }

    pub fn cdf_on(&self, grid: &EvalGrid) -> Vec<f64> {
        grid.points().iter().map(|&t| self.cdf_at(t)).collect()
    }

    pub fn first_moment(&self) -> f64 {
        self.atoms.iter().map(|a| a.location * a.weight).sum()
    }

    /// Σ f(location)·weight.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|a| f(a.location) * a.weight).sum()
    }

    /// Weighted sum `Σ coef_k · d_k` of measures, merging atoms.
    pub fn mixture(parts: &[(f64, &SignedStepDistribution)]) -> Result<Self> {
        let xs: Vec<f64> = parts
            .iter()
            .flat_map(|(_, d)| d.atoms.iter().map(|a| a.location))
            .collect();
        let ws: Vec<f64> = parts
            .iter()
            .flat_map(|(c, d)| d.atoms.iter().map(move |a| c * a.weight))
            .collect();
        Self::from_points(&xs, &ws)
    }

    /// Image measure under x ↦ −x.
    pub fn reflected(&self) -> Self {
        let atoms = self
            .atoms
            .iter()
            .rev()
            .map(|a| Atom {
                location: if a.location == 0.0 { 0.0 } else { -a.location },
                weight: a.weight,
            })
            .collect();
        Self::from_sorted_atoms(atoms)
    }

    /// Keeps only atoms with location ≤ `upper`.
    pub fn truncated_above(&self, upper: f64) -> Self {
        let k = self.atoms.partition_point(|a| a.location <= upper);
        Self::from_sorted_atoms(self.atoms[..k].to_vec())
    }

    /// Writes `location,weight` rows with a header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["location", "weight"])?;
        for a in &self.atoms {
            w.write_record([format!("{:.16e}", a.location), format!("{:.16e}", a.weight)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Sorted evaluation abscissae.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalGrid {
    points: Vec<f64>,
}

impl EvalGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty()
            || points.iter().any(|p| !p.is_finite())
            || points.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidGrid);
        }
        Ok(EvalGrid { points })
    }

    pub fn single(t: f64) -> Result<Self> {
        Self::new(vec![t])
    }

    /// `count` equally spaced points on [lo, hi].
    pub fn linspace(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let h = (hi - lo) / (count - 1) as f64;
        Self::new((0..count).map(|i| lo + h * i as f64).collect())
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn max(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(xs: &[f64], ws: &[f64]) -> SignedStepDistribution {
        SignedStepDistribution::from_points(xs, ws).unwrap()
    }

    #[test]
    fn cdf_examples() {
        let two = d(&[-1.0, 2.0], &[0.5, 0.5]);
        assert_eq!(two.cdf_at(0.0), 0.5);
        assert_eq!(two.cdf_at(-1.0000001), 0.0);
        assert_eq!(two.cdf_at(-1.0), 0.5);
        assert_eq!(two.cdf_left_at(-1.0), 0.0);
        let signed = d(&[-1.0, 3.0], &[0.6, 0.2]);
        assert!((signed.cdf_at(0.0) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn from_points_examples() {
        let m = d(&[1.0, 1.0, 2.0], &[0.25, 0.25, 0.5]);
        assert_eq!(
            m.atoms(),
            &[
                Atom {
                    location: 1.0,
                    weight: 0.5
                },
                Atom {
                    location: 2.0,
                    weight: 0.5
                }
            ]
        );
        assert_eq!(
            SignedStepDistribution::from_points(&[], &[]),
            Err(Error::Empty)
        );
        let s = d(&[3.0, -1.0], &[0.4, 0.6]);
        assert_eq!(
            s.atoms()[0],
            Atom {
                location: -1.0,
                weight: 0.6
            }
        );
        assert_eq!(
            s.atoms()[1],
            Atom {
                location: 3.0,
                weight: 0.4
            }
        );
        assert!((s.total_mass() - 1.0).abs() < 1e-15);
        assert!(matches!(
            SignedStepDistribution::from_points(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(
            SignedStepDistribution::from_points(&[f64::NAN], &[1.0]),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn first_moment_examples() {
        assert_eq!(d(&[-1.0, 1.0], &[0.5, 0.5]).first_moment(), 0.0);
        assert!(d(&[-1.0, 3.0], &[0.6, 0.2]).first_moment().abs() < 1e-15);
        assert_eq!(d(&[2.0], &[1.0]).first_moment(), 2.0);
    }

    #[test]
    fn signed_zero_merges() {
        let m = d(&[0.0, -0.0], &[0.5, 0.5]);
        assert_eq!(m.len(), 1);
        assert_eq!(
            m.reflected().atoms()[0].location.to_bits(),
            0.0f64.to_bits()
        );
    }

    #[test]
    fn grid_validation() {
        assert_eq!(EvalGrid::new(vec![]), Err(Error::InvalidGrid));
        assert_eq!(EvalGrid::new(vec![1.0, 1.0]), Err(Error::InvalidGrid));
        let g = EvalGrid::linspace(-1.0, 1.0, 101).unwrap();
        assert_eq!(g.points().len(), 101);
        assert_eq!(g.min(), -1.0);
    }

    #[test]
    fn csv_rows() {
        let mut buf = Vec::new();
        d(&[2.0, -1.0], &[0.25, 0.75]).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "location,weight");
        assert_eq!(lines[1], "-1.0000000000000000e0,7.5000000000000000e-1");
        assert_eq!(lines.len(), 3);
    }

    fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec(
            ((-5i32..5).prop_map(|k| k as f64 * 0.5), -1.0f64..1.0),
            1..30,
        )
    }

    proptest! {
        #[test]
        fn mass_at_infinity_is_total(pts in points()) {
            let (xs, ws): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let m = SignedStepDistribution::from_points(&xs, &ws).unwrap();
            prop_assert_eq!(m.cdf_at(f64::INFINITY), m.total_mass());
            prop_assert!((m.total_mass() - ws.iter().sum::<f64>()).abs() <= 1e-12);
            prop_assert!(m.atoms().windows(2).all(|w| w[0].location < w[1].location));
            if ws.iter().all(|w| *w >= 0.0) {
                let vals: Vec<f64> = (-12..12).map(|k| m.cdf_at(k as f64 * 0.25)).collect();
                prop_assert!(vals.windows(2).all(|v| v[0] <= v[1] + 1e-15));
            }
        }

        #[test]
        fn equal_weights_give_classical_ecdf(xs in prop::collection::vec(-3.0f64..3.0, 1..40), t in -3.5f64..3.5) {
            let m = SignedStepDistribution::empirical(&xs).unwrap();
            let count = xs.iter().filter(|x| **x <= t).count() as f64 / xs.len() as f64;
            prop_assert!((m.cdf_at(t) - count).abs() <= 1e-12);
        }

        #[test]
        fn merging_is_associative(a in points(), b in points(), t in -3.0f64..3.0) {
            let (xa, wa): (Vec<f64>, Vec<f64>) = a.into_iter().unzip();
            let (xb, wb): (Vec<f64>, Vec<f64>) = b.into_iter().unzip();
            let ma = SignedStepDistribution::from_points(&xa, &wa).unwrap();
            let mb = SignedStepDistribution::from_points(&xb, &wb).unwrap();
            let joint = SignedStepDistribution::from_points(
                &[xa.clone(), xb.clone()].concat(), &[wa.clone(), wb.clone()].concat()).unwrap();
            let mixed = SignedStepDistribution::mixture(&[(1.0, &ma), (1.0, &mb)]).unwrap();
            prop_assert_eq!(joint.len(), mixed.len());
            for (p, q) in joint.atoms().iter().zip(mixed.atoms()) {
                prop_assert_eq!(p.location, q.location);
                prop_assert!((p.weight - q.weight).abs() <= 1e-12);
            }
            prop_assert!((joint.cdf_at(t) - ma.cdf_at(t) - mb.cdf_at(t)).abs() <= 1e-12);
        }
    }
}
