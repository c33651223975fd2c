//! Adaptive Simpson quadrature.

const INITIAL_PANELS: usize = 64;
const MAX_DEPTH: u32 = 40;

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn simpson_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// ∫ₐᵇ f with absolute tolerance `tol`, starting from 64 equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_panels(&f, a, b, tol, INITIAL_PANELS)
}

/// Same as [`integrate`] with a caller-chosen number of starting panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, panels: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    if b < a {
        return -integrate_panels(f, b, a, tol, panels);
    }
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let tol_panel = tol / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == panels {
                b
            } else {
                a + h * (i + 1) as f64
            };
            simpson_panel(f, lo, hi, tol_panel)
        })
        .sum()
}

/// ∫ₐᵇ f where f may have kinks or jumps at `breaks`; each smooth piece is
/// integrated separately.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: f64,
) -> f64 {
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut pts = Vec::with_capacity(cuts.len() + 2);
    pts.push(a);
    pts.extend(cuts);
    pts.push(b);
    let pieces = (pts.len() - 1) as f64;
    pts.windows(2)
        .map(|w| integrate_panels(&f, w[0], w[1], tol / pieces, 8))
        .sum()
}

/// Running integral x ↦ ∫₀ˣ f on [0, upper], tabulated at equally spaced
/// knots; evaluation adds an adaptive Simpson piece from the nearest knot.
#[derive(Clone, Debug)]
pub struct CumulativeIntegral<F> {
    f: F,
    step: f64,
    upper: f64,
    values: Vec<f64>,
    tol: f64,
}

impl<F: Fn(f64) -> f64> CumulativeIntegral<F> {
    pub fn new(f: F, upper: f64, knots: usize, tol: f64) -> Self {
        let knots = knots.max(1);
        let step = upper / knots as f64;
        let mut values = Vec::with_capacity(knots + 1);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 0..knots {
            acc += integrate_panels(
                &f,
                step * i as f64,
                step * (i + 1) as f64,
                tol / knots as f64,
                2,
            );
            values.push(acc);
        }
        CumulativeIntegral {
            f,
            step,
            upper,
            values,
            tol,
        }
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    /// ∫₀ˣ f; falls back to direct quadrature outside the table.
    pub fn at(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x > self.upper {
            return self.values[self.values.len() - 1]
                + integrate_panels(&self.f, self.upper, x, self.tol, 16);
        }
        let k = ((x / self.step) as usize).min(self.values.len() - 1);
        let knot = self.step * k as f64;
        self.values[k] + integrate_panels(&self.f, knot, x, self.tol * 1e-2, 1)
    }
}
