use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Base point count on `[0, π]`.
pub const DEFAULT_HALF_POINTS: usize = 4096;
/// Base point count on `[-π, π]`; spacing `π/4096`, so `±π/2` are nodes.
pub const DEFAULT_FULL_POINTS: usize = 8193;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// `[0, π]`
    Half,
    /// `[-π, π]`
    Full,
}

impl Domain {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Domain::Half => (0.0, PI),
            Domain::Full => (-PI, PI),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        let (a, b) = self.bounds();
        (a..=b).contains(&x)
    }
}

/// Uniform base points plus forced extra abscissae.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub domain: Domain,
    pub base_points: usize,
    pub extra_points: Vec<f64>,
}

impl GridSpec {
    pub fn new(domain: Domain, base_points: usize) -> Result<Self> {
        if base_points < 2 {
            return Err(Error::param(format!("a grid needs at least 2 base points, got {base_points}")));
        }
        Ok(Self {
            domain,
            base_points,
            extra_points: Vec::new(),
        })
    }

    pub fn half(base_points: usize) -> Result<Self> {
        Self::new(Domain::Half, base_points)
    }

    pub fn full(base_points: usize) -> Result<Self> {
        Self::new(Domain::Full, base_points)
    }

    /// Adds points to force into the grid. On the full domain each point is
    /// mirrored as well.
    pub fn with_extra<I: IntoIterator<Item = f64>>(mut self, points: I) -> Result<Self> {
        for x in points {
            if !x.is_finite() || !self.domain.contains(x) {
                return Err(Error::param(format!("extra grid point {x} lies outside {:?}", self.domain.bounds())));
            }
            self.extra_points.push(x);
            if self.domain == Domain::Full && x != 0.0 {
                self.extra_points.push(-x);
            }
        }
        Ok(self)
    }

    /// The default grid for a sweep over `ns`: the base points plus
    /// `π/(8n)`, `π/n` and `1/n` for every active `n`.
    pub fn default_for(domain: Domain, ns: &[u64]) -> Self {
        let base = match domain {
            Domain::Half => DEFAULT_HALF_POINTS,
            Domain::Full => DEFAULT_FULL_POINTS,
        };
        Self::new(domain, base)
            .and_then(|g| g.with_extra(ns.iter().filter(|&&n| n > 0).flat_map(|&n| critical_points(n))))
            .expect("critical points lie in [0, π]")
    }

    /// Sorted, duplicate-free abscissae.
    pub fn realize(&self) -> Grid {
        let (a, b) = self.domain.bounds();
        let last = self.base_points - 1;
        let base: Vec<f64> = (0..self.base_points)
            .map(|i| if i == last { b } else { a + (b - a) * i as f64 / last as f64 })
            .collect();
        let mut tagged: Vec<(f64, bool)> = base.iter().enumerate().map(|(i, &x)| (x, i % 2 == 0 || i == last)).collect();
        tagged.extend(self.extra_points.iter().map(|&x| (x, false)));
        // coarse-grid members win over plain duplicates
        tagged.sort_by(|p, q| p.0.total_cmp(&q.0).then(q.1.cmp(&p.1)));
        tagged.dedup_by(|later, earlier| later.0 == earlier.0);
        let coarse = tagged.iter().enumerate().filter(|(_, t)| t.1).map(|(i, _)| i).collect();
        Grid {
            domain: self.domain,
            points: tagged.into_iter().map(|t| t.0).collect(),
            coarse,
        }
    }
}

/// `π/(8n)`, `π/n` and `1/n`, clipped to `[0, π]`.
pub fn critical_points(n: u64) -> impl Iterator<Item = f64> {
    let nf = n as f64;
    [PI / (8.0 * nf), PI / nf, 1.0 / nf].into_iter().filter(|&x| x <= PI)
}

/// Realized abscissae. `coarse` indexes the sub-grid (every other base
/// point plus the right endpoint) used to estimate the quadrature error.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub domain: Domain,
    pub points: Vec<f64>,
    coarse: Vec<usize>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Composite trapezoid rule over the realized (possibly nonuniform) grid.
    pub fn trapezoid(&self, f: &[f64]) -> f64 {
        trapezoid_on(&self.points, f, 0..self.points.len())
    }

    /// The same rule on the coarse sub-grid.
    pub fn coarse_trapezoid(&self, f: &[f64]) -> f64 {
        trapezoid_on(&self.points, f, self.coarse.iter().copied())
    }
}

fn trapezoid_on<I: Iterator<Item = usize>>(x: &[f64], f: &[f64], mut idx: I) -> f64 {
    let mut acc = CompensatedSum::new();
    let Some(mut prev) = idx.next() else {
        return 0.0;
    };
    for i in idx {
        acc += 0.5 * (x[i] - x[prev]) * (f[i] + f[prev]);
        prev = i;
    }
    acc.value()
}

/// Sup and L¹ norms of sampled moduli.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Norms {
    pub sup: f64,
    /// Over `[-π, π]`: doubled from `[0, π]` when `even` was declared.
    pub l1: f64,
    /// `|T_h - T_2h|` on the coarse sub-grid (same doubling); a heuristic
    /// estimate, not a certified bound.
    pub quadrature_error: f64,
}

/// Sup and trapezoid L¹ norm of `abs_values` on `grid`. With `even`, the
/// integrand is declared even and a half-domain integral is doubled.
pub fn norms(grid: &Grid, abs_values: &[f64], even: bool) -> Norms {
    assert_eq!(grid.len(), abs_values.len(), "one value per grid point");
    let factor = if even && grid.domain == Domain::Half { 2.0 } else { 1.0 };
    let fine = grid.trapezoid(abs_values);
    let coarse = grid.coarse_trapezoid(abs_values);
    Norms {
        sup: abs_values.iter().copied().fold(0.0, f64::max),
        l1: factor * fine,
        quadrature_error: factor * (fine - coarse).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(grid: &Grid, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid.points.iter().map(|&x| f(x)).collect()
    }

    #[test]
    fn realized_grid_is_sorted_and_unique() {
        let g = GridSpec::half(5).unwrap().with_extra([PI / 4.0, 0.1, 0.1, PI]).unwrap().realize();
        assert_eq!(g.points.len(), 6);
        assert!(g.points.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.points[0], 0.0);
        assert_eq!(*g.points.last().unwrap(), PI);
    }

    #[test]
    fn extra_points_outside_domain_rejected() {
        assert!(GridSpec::half(8).unwrap().with_extra([-0.1]).is_err());
        assert!(GridSpec::half(1).is_err());
        let g = GridSpec::full(8).unwrap().with_extra([0.3]).unwrap();
        assert_eq!(g.extra_points, vec![0.3, -0.3]);
    }

    #[test]
    fn cosine_norms_on_full_grid() {
        let g = GridSpec::full(8193).unwrap().realize();
        let n = norms(&g, &values(&g, |x| x.cos().abs()), false);
        assert!((n.sup - 1.0).abs() < 1e-15);
        assert!((n.l1 - 4.0).abs() < 1e-6, "{}", n.l1);
    }

    #[test]
    fn constant_norms() {
        let g = GridSpec::default_for(Domain::Full, &[16]).realize();
        let n = norms(&g, &vec![1.0; g.len()], false);
        assert!((n.l1 - 2.0 * PI).abs() < 1e-12);
        assert_eq!(n.sup, 1.0);
    }

    #[test]
    fn even_extension_doubles() {
        let g = GridSpec::half(DEFAULT_HALF_POINTS).unwrap().realize();
        let n = norms(&g, &values(&g, f64::sin), true);
        assert!((n.l1 - 4.0).abs() < 1e-6);
        assert!(n.quadrature_error < 1e-5);
    }

    #[test]
    fn default_grid_cos_within_tolerance() {
        for domain in [Domain::Half, Domain::Full] {
            let g = GridSpec::default_for(domain, &[64]).realize();
            let n = norms(&g, &values(&g, |x| x.cos().abs()), true);
            assert!((n.l1 - 4.0).abs() < 1e-6, "{domain:?}: {}", n.l1);
        }
    }

    #[test]
    fn smooth_integrands_against_antiderivatives() {
        let g = GridSpec::default_for(Domain::Half, &[8, 32]).realize();
        // ∫_0^π x² dx, ∫_0^π e^x dx, ∫_0^π (1 + cos 5x)... all exact
        let cases: [(Box<dyn Fn(f64) -> f64>, f64); 3] = [
            (Box::new(|x| x * x), PI.powi(3) / 3.0),
            (Box::new(f64::exp), PI.exp() - 1.0),
            (Box::new(|x| 2.0 + (5.0 * x).cos()), 2.0 * PI),
        ];
        for (f, exact) in cases {
            let v = values(&g, f);
            assert!((g.trapezoid(&v) - exact).abs() < 1e-5);
        }
    }
}
