//! Partial sums, tails and grid evaluations of `Σ c_k e^{ikx}`.
//!
//! `f - S_n` is never formed by subtraction: the tail `Σ_{n<|k|≤N}` is
//! accumulated from the top index down, and everything past the reference
//! order `N` is covered by a pointwise majorant.

use std::f64::consts::PI;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{norms, Domain, Grid};
use super::kernel::sin_sum;
use crate::error::{Error, Result};
use crate::json::ext_real;
use crate::seq::{SequenceRule, TwoSidedSeq};
use crate::sum::{CompensatedSum, ComplexSum};

/// A measured quantity with an enclosing interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "ext_real")]
    pub value: f64,
    #[serde(serialize_with = "ext_real")]
    pub lo: f64,
    #[serde(serialize_with = "ext_real")]
    pub hi: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, lo: value, hi: value }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Values of a series on a grid with per-point truncation bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesEval {
    pub domain: Domain,
    #[serde(skip)]
    pub points: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<Complex64>,
    /// Bound on the neglected tail at each point.
    #[serde(skip)]
    pub bounds: Vec<f64>,
    pub sup_norm: Estimate,
    pub l1_norm: Estimate,
    /// Largest pointwise truncation bound.
    #[serde(serialize_with = "ext_real")]
    pub truncation_bound: f64,
    /// Heuristic quadrature error folded into `l1_norm`.
    pub quadrature_error: f64,
}

impl SeriesEval {
    fn assemble(grid: &Grid, values: Vec<Complex64>, bounds: Vec<f64>, even: bool) -> Self {
        let abs: Vec<f64> = values.iter().map(|v| v.norm()).collect();
        let n = norms(grid, &abs, even);
        let sup_lo = abs.iter().zip(&bounds).map(|(a, b)| (a - b).max(0.0)).fold(0.0, f64::max);
        let sup_hi = abs.iter().zip(&bounds).map(|(a, b)| a + b).fold(0.0, f64::max);
        let tb = norms(grid, &bounds, even);
        let slack = tb.l1 + n.quadrature_error;
        Self {
            domain: grid.domain,
            points: grid.points.clone(),
            sup_norm: Estimate {
                value: n.sup,
                lo: sup_lo,
                hi: sup_hi,
            },
            l1_norm: Estimate {
                value: n.l1,
                lo: (n.l1 - slack).max(0.0),
                hi: n.l1 + slack,
            },
            truncation_bound: tb.sup,
            quadrature_error: n.quadrature_error,
            values,
            bounds,
        }
    }

    /// `x,re,im,bound` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,re,im,bound")?;
        for ((x, v), b) in self.points.iter().zip(&self.values).zip(&self.bounds) {
            writeln!(w, "{x:e},{:e},{:e},{b:e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Whether `|Σ c_k e^{ikx}|` is even in `x` — true for mirror factors
/// `±1` and for real coefficients — so that half-period grids suffice.
pub fn modulus_is_even(seq: &TwoSidedSeq) -> bool {
    match seq.mirror() {
        Some(l) if l == Complex64::new(1.0, 0.0) || l == Complex64::new(-1.0, 0.0) => true,
        _ => seq.pos().is_real() && seq.neg().is_real(),
    }
}

/// `[0, π]` when the modulus is even, `[-π, π]` otherwise.
pub fn natural_domain(seq: &TwoSidedSeq) -> Domain {
    if modulus_is_even(seq) {
        Domain::Half
    } else {
        Domain::Full
    }
}

/// Reference order for "the function itself" in a sweep up to `n_max`.
pub fn reference_order(n_max: u64) -> u64 {
    (16 * n_max).max(4096)
}

fn check_grid(seq: &TwoSidedSeq, grid: &Grid) -> Result<bool> {
    let even = modulus_is_even(seq);
    if grid.domain == Domain::Half && !even {
        return Err(Error::param(format!("|f| is not even for `{seq}`; evaluate on the full period")));
    }
    Ok(even)
}

/// `S_n(f, x) = Σ_{|k|≤n} c_k e^{ikx}`.
pub fn partial_sum(seq: &TwoSidedSeq, n: u64, x: f64) -> Complex64 {
    let mut acc = ComplexSum::new();
    acc.add(seq.zeroth());
    for k in 1..=n {
        let e = Complex64::cis(k as f64 * x);
        acc.add(seq.pos().coeff(k) * e);
        acc.add(seq.neg().coeff(k) * e.conj());
    }
    acc.value()
}

/// `Σ_{k=1}^{n} b_k sin kx` for a real rule.
pub fn sine_partial(b: &SequenceRule, n: u64, x: f64) -> Result<f64> {
    if !b.is_real() {
        return Err(Error::domain(format!("sine coefficients `{b}` are not real")));
    }
    if n == 0 {
        return Err(Error::param("sine partial sums start at n = 1"));
    }
    Ok((1..=n).map(|k| b.coeff(k).re * (k as f64 * x).sin()).sum::<CompensatedSum>().value())
}

/// Bound on `|Σ_{|k|≥m} c_k e^{ikx}|` from the rule majorants: the absolute
/// tail, or the Dirichlet-test bound `Σ_{k≥m}|Δc_k| / |sin(x/2)|`.
pub fn tail_bound(seq: &TwoSidedSeq, m: u64, x: f64) -> f64 {
    let s = (0.5 * x).sin().abs();
    let side = |rule: &SequenceRule| {
        let abs = rule.tail_abs_majorant(m);
        if s == 0.0 {
            abs
        } else {
            abs.min(rule.tail_variation_majorant(m) / s)
        }
    };
    match seq.mirror() {
        // pairs c_k (e^{ikx} + λ e^{-ikx}); at x = 0 the pair is (1 + λ) c_k
        Some(l) if s == 0.0 => {
            let f = (l + 1.0).norm();
            if f == 0.0 {
                0.0
            } else {
                f * seq.pos().tail_abs_majorant(m)
            }
        }
        Some(l) => (1.0 + l.norm()) * side(seq.pos()),
        None => side(seq.pos()) + side(seq.neg()),
    }
}

/// `f - S_n` on `grid` for every `n` in `ns`, truncated at `n_ref` with the
/// remainder covered by [`tail_bound`]. Results follow the order of `ns`.
pub fn tail_evals(seq: &TwoSidedSeq, ns: &[u64], grid: &Grid, n_ref: u64) -> Result<Vec<SeriesEval>> {
    let even = check_grid(seq, grid)?;
    let Some(&n_max) = ns.iter().max() else {
        return Err(Error::param("empty n list"));
    };
    if n_ref < n_max {
        return Err(Error::param(format!("reference order {n_ref} below n = {n_max}")));
    }
    let mut uniq = ns.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    let pos: Vec<Complex64> = (1..=n_ref).map(|k| seq.pos().coeff(k)).collect();
    let neg: Vec<Complex64> = (1..=n_ref).map(|k| seq.neg().coeff(k)).collect();

    let columns: Vec<Vec<Complex64>> = grid
        .points
        .par_iter()
        .map(|&x| {
            let mut out = vec![Complex64::default(); uniq.len()];
            let mut idx = uniq.len();
            while idx > 0 && uniq[idx - 1] >= n_ref {
                idx -= 1;
            }
            let mut acc = ComplexSum::new();
            for k in (1..=n_ref).rev() {
                if idx == 0 {
                    break;
                }
                let e = Complex64::cis(k as f64 * x);
                let i = (k - 1) as usize;
                acc.add(pos[i] * e + neg[i] * e.conj());
                while idx > 0 && uniq[idx - 1] == k - 1 {
                    out[idx - 1] = acc.value();
                    idx -= 1;
                }
            }
            out
        })
        .collect();
    let bounds: Vec<f64> = grid.points.iter().map(|&x| tail_bound(seq, n_ref + 1, x)).collect();

    let by_n: Vec<SeriesEval> = (0..uniq.len())
        .map(|j| {
            let values = columns.iter().map(|c| c[j]).collect();
            SeriesEval::assemble(grid, values, bounds.clone(), even)
        })
        .collect();
    Ok(ns.iter().map(|n| by_n[uniq.binary_search(n).expect("present")].clone()).collect())
}

/// `f` itself: `S_{n_ref}` plus the truncation bound.
pub fn function_eval(seq: &TwoSidedSeq, grid: &Grid, n_ref: u64) -> Result<SeriesEval> {
    let mut eval = tail_evals(seq, &[0], grid, n_ref)?.remove(0);
    let c0 = seq.zeroth();
    if c0 != Complex64::default() {
        let values = eval.values.iter().map(|v| v + c0).collect();
        eval = SeriesEval::assemble(grid, values, eval.bounds, modulus_is_even(seq));
    }
    Ok(eval)
}

/// `S_n` on `grid` (exact, no truncation).
pub fn partial_sum_eval(seq: &TwoSidedSeq, n: u64, grid: &Grid) -> Result<SeriesEval> {
    let even = check_grid(seq, grid)?;
    let values = grid.points.par_iter().map(|&x| partial_sum(seq, n, x)).collect();
    Ok(SeriesEval::assemble(grid, values, vec![0.0; grid.len()], even))
}

/// `τ_{2n,n}(f, x) = (1/n) Σ_{k=n}^{2n-1} S_k(f, x)`, summed with the
/// equivalent weights `1` for `|k| ≤ n` and `(2n - |k|)/n` beyond.
pub fn delayed_mean(seq: &TwoSidedSeq, n: u64, x: f64) -> Complex64 {
    assert!(n >= 1, "delayed means start at n = 1");
    partial_sum(seq, n, x) + delayed_gap(seq, n, x)
}

/// `τ_{2n,n}(f, x) - S_n(f, x) = Σ_{n<|k|<2n} ((2n - |k|)/n) c_k e^{ikx}`.
pub fn delayed_gap(seq: &TwoSidedSeq, n: u64, x: f64) -> Complex64 {
    let mut acc = ComplexSum::new();
    let nf = n as f64;
    for k in n + 1..2 * n {
        let w = (2 * n - k) as f64 / nf;
        let e = Complex64::cis(k as f64 * x);
        acc.add(w * (seq.pos().coeff(k) * e + seq.neg().coeff(k) * e.conj()));
    }
    acc.value()
}

/// `τ_{2n,n}(f) - S_n(f)` on `grid`.
pub fn delayed_gap_eval(seq: &TwoSidedSeq, n: u64, grid: &Grid) -> Result<SeriesEval> {
    let even = check_grid(seq, grid)?;
    if n == 0 {
        return Err(Error::param("delayed means start at n = 1"));
    }
    let values = grid.points.par_iter().map(|&x| delayed_gap(seq, n, x)).collect();
    Ok(SeriesEval::assemble(grid, values, vec![0.0; grid.len()], even))
}

/// `Σ_{k≥N} c_k sin kx` by summation by parts, with its remainder bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelTail {
    #[serde(skip)]
    pub value: Complex64,
    pub bound: f64,
    pub horizon: u64,
}

/// `Σ_{k=N}^{H} Δc_k s_k(x) - c_N s_{N-1}(x)` with `s_k = Σ_{ν≤k} sin νx`;
/// the neglected `Σ_{k>H} Δc_k s_k` is at most `(π/x)·Σ_{k>H}|Δc_k|`.
pub fn abel_tail(seq: &SequenceRule, n: u64, x: f64, horizon: u64) -> Result<AbelTail> {
    if !(x > 0.0 && x < PI) {
        return Err(Error::param(format!("abel_tail needs 0 < x < π, got {x}")));
    }
    if n == 0 || horizon < n {
        return Err(Error::param(format!("abel_tail needs 1 ≤ N ≤ H, got N = {n}, H = {horizon}")));
    }
    let var = seq.tail_variation_majorant(horizon + 1);
    if !var.is_finite() {
        return Err(Error::MissingMajorant {
            rule: seq.to_string(),
            what: "tail variation",
        });
    }
    let mut acc = ComplexSum::new();
    let mut cur = seq.coeff(n);
    acc.add(-cur * sin_sum(n - 1, x));
    for k in n..=horizon {
        let next = seq.coeff(k + 1);
        acc.add((cur - next) * sin_sum(k, x));
        cur = next;
    }
    let bound = if var == 0.0 { 0.0 } else { var * PI / x };
    Ok(AbelTail {
        value: acc.value(),
        bound,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::super::grid::GridSpec;
    use super::*;

    const CATALAN: f64 = 0.915_965_594_177_219;

    fn power(p: f64) -> SequenceRule {
        SequenceRule::power(p).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partial_sum_examples() {
        let cos = TwoSidedSeq::mirrored(SequenceRule::table([0.5]).unwrap(), 1.0);
        for x in [0.0, 0.3, 2.0] {
            assert!((partial_sum(&cos, 3, x) - c(x.cos(), 0.0)).norm() < 1e-15);
        }
        let one = TwoSidedSeq::one_sided(SequenceRule::table_with_zeroth(Vec::<f64>::new(), Some(c(1.0, 0.0))).unwrap());
        assert_eq!(partial_sum(&one, 5, 1.3), c(1.0, 0.0));
        let sq = TwoSidedSeq::one_sided(power(2.0));
        assert!((partial_sum(&sq, 2, PI) - c(-0.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn sine_partial_examples() {
        assert!((sine_partial(&power(1.0), 1, PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sine_partial(&power(1.0), 9, 0.0).unwrap(), 0.0);
        let delta = SequenceRule::harmonic(2, c(1.0, 0.0)).unwrap();
        assert!((sine_partial(&delta, 5, PI / 4.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(sine_partial(&power(1.0).scaled(c(0.0, 1.0)), 3, 1.0).is_err());
    }

    #[test]
    fn sine_series_matches_sine_partial() {
        let b = power(1.5);
        let f = TwoSidedSeq::sine_series(b.clone());
        for x in [0.2, 1.0, 3.0] {
            let z = partial_sum(&f, 40, x);
            assert!(z.im.abs() < 1e-15);
            assert!((z.re - sine_partial(&b, 40, x).unwrap()).abs() < 1e-13);
        }
    }

    #[test]
    fn delayed_mean_examples() {
        let one = TwoSidedSeq::one_sided(SequenceRule::table_with_zeroth(Vec::<f64>::new(), Some(c(1.0, 0.0))).unwrap());
        assert!((delayed_mean(&one, 3, 0.7) - c(1.0, 0.0)).norm() < 1e-15);
        let e1 = TwoSidedSeq::one_sided(SequenceRule::table([1.0]).unwrap());
        assert!((delayed_mean(&e1, 1, 0.4) - Complex64::cis(0.4)).norm() < 1e-15);
        let sq = TwoSidedSeq::one_sided(power(2.0));
        let expected = (1.25 + 1.25 + 1.0 / 9.0) / 2.0;
        assert!((delayed_mean(&sq, 2, 0.0).re - expected).abs() < 1e-15);
    }

    #[test]
    fn delayed_mean_equals_mean_of_partial_sums() {
        let f = TwoSidedSeq::new(power(1.0), power(2.0).scaled(c(0.3, -1.0)));
        for n in [1, 2, 5, 17] {
            for x in [-2.0, 0.0, 0.5, 3.1] {
                let mean = (n..2 * n).map(|k| partial_sum(&f, k, x)).sum::<Complex64>() / n as f64;
                assert!((delayed_mean(&f, n, x) - mean).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn abel_tail_catalan() {
        let t = abel_tail(&power(2.0), 1, PI / 2.0, 10_000).unwrap();
        let brute: f64 = (1..=1_000_000u64).map(|k| (k as f64 * PI / 2.0).sin() / (k * k) as f64).sum::<CompensatedSum>().value();
        assert!((t.value.re - CATALAN).abs() <= t.bound + 1e-12, "{} vs {}", t.value.re, CATALAN);
        assert!((brute - CATALAN).abs() < 1e-6);
        assert!(t.bound < 1e-7);
    }

    #[test]
    fn abel_tail_harmonic() {
        // Σ_{k≥1} sin(k)/k = (π - 1)/2
        let exact = (PI - 1.0) / 2.0 - 1f64.sin() - 2f64.sin() / 2.0;
        let t = abel_tail(&power(1.0), 3, 1.0, 5_000).unwrap();
        assert!((t.value.re - exact).abs() <= t.bound);
        assert!(t.bound < 1e-3);
    }

    #[test]
    fn abel_tail_zero_table() {
        let t = abel_tail(&SequenceRule::table([1.0, 2.0]).unwrap(), 3, 0.4, 10).unwrap();
        assert_eq!(t.value, Complex64::default());
        assert_eq!(t.bound, 0.0);
        assert!(abel_tail(&power(1.0), 0, 1.0, 10).is_err());
        assert!(abel_tail(&power(1.0), 1, 0.0, 10).is_err());
    }

    #[test]
    fn abel_tail_on_builtin_decreasing_rules() {
        let rules = [
            power(0.7),
            power(2.0),
            SequenceRule::log_power(1.0, 1.0).unwrap(),
            SequenceRule::geometric(0.9).unwrap(),
        ];
        for rule in rules {
            for x in [0.3, 1.7] {
                let t = abel_tail(&rule, 5, x, 2000).unwrap();
                let direct = (5..=400_000u64).map(|k| rule.coeff(k).re * (k as f64 * x).sin()).sum::<CompensatedSum>().value();
                // brute force itself is only good to its own Dirichlet bound
                let slack = rule.tail_variation_majorant(400_001) * PI / x;
                assert!((t.value.re - direct).abs() <= t.bound + slack + 1e-12, "{rule} x={x}");
            }
        }
    }

    #[test]
    fn tail_of_square_sine_series() {
        let f = TwoSidedSeq::sine_series(power(2.0));
        let ns = [8u64, 64, 256];
        let grid = GridSpec::default_for(Domain::Half, &ns).realize();
        let evals = tail_evals(&f, &ns, &grid, reference_order(256)).unwrap();
        for (n, e) in ns.iter().zip(&evals) {
            assert!(e.sup_norm.hi <= 1.0 / *n as f64 + e.truncation_bound);
        }
        // pointwise oracle at one grid point
        let i = grid.points.len() / 3;
        let x = grid.points[i];
        let brute: f64 = (9..=2_000_000u64).map(|k| (k as f64 * x).sin() / (k * k) as f64).sum::<CompensatedSum>().value();
        let v = evals[0].values[i];
        assert!((v.re - brute).abs() <= evals[0].bounds[i] + 1e-9);
        assert!(v.im.abs() < 1e-15);
    }

    #[test]
    fn tail_of_harmonic_sine_series_at_injected_point() {
        let f = TwoSidedSeq::sine_series(power(1.0));
        let n = 64u64;
        let x0 = PI / (2.0 * n as f64);
        let grid = GridSpec::half(1025).unwrap().with_extra([x0]).unwrap().realize();
        let e = tail_evals(&f, &[n], &grid, 8192).unwrap().remove(0);
        let i = grid.points.iter().position(|&x| x == x0).unwrap();
        // Σ_{k>n} sin(kx)/k = (π - x)/2 - S_n(x)
        let exact = (PI - x0) / 2.0 - sine_partial(&power(1.0), n, x0).unwrap();
        assert!((e.values[i].re - exact).abs() <= e.bounds[i]);
        assert!(e.bounds[i] < 0.1);
    }

    #[test]
    fn single_harmonic_tail_vanishes() {
        let f = TwoSidedSeq::one_sided(SequenceRule::harmonic(5, c(1.0, 0.0)).unwrap());
        let grid = GridSpec::full(257).unwrap().realize();
        let evals = tail_evals(&f, &[3, 5, 9], &grid, 4096).unwrap();
        assert!(evals[0].sup_norm.value > 0.99);
        assert_eq!(evals[1].sup_norm.hi, 0.0);
        assert_eq!(evals[2].l1_norm.hi, 0.0);
    }

    #[test]
    fn half_grid_rejected_for_uneven_modulus() {
        let f = TwoSidedSeq::one_sided(power(2.0).scaled(c(1.0, 1.0)));
        let grid = GridSpec::half(16).unwrap().realize();
        assert!(tail_evals(&f, &[1], &grid, 64).is_err());
        assert_eq!(natural_domain(&f), Domain::Full);
    }

    #[test]
    fn function_eval_of_cosine_series() {
        // Σ_{k≥1} cos(kx)/k² = π²/6 - πx/2 + x²/4 on [0, 2π]
        let f = TwoSidedSeq::cosine_series(power(2.0));
        let grid = GridSpec::half(65).unwrap().realize();
        let e = function_eval(&f, &grid, 1 << 14).unwrap();
        for (x, v) in grid.points.iter().zip(&e.values) {
            let exact = PI * PI / 6.0 - PI * x / 2.0 + x * x / 4.0;
            assert!((v.re - exact).abs() <= 1e-4);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = TwoSidedSeq::one_sided(power(2.0));
        let grid = GridSpec::full(5).unwrap().realize();
        let e = partial_sum_eval(&f, 3, &grid).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.starts_with("x,re,im,bound\n"));
    }

    proptest! {
        #[test]
        fn partial_sum_is_linear(p in 0.5..3.0f64, r in 0.05..0.95f64, n in 0u64..60, x in -PI..PI) {
            let a = power(p);
            let b = SequenceRule::geometric(r).unwrap();
            let f = TwoSidedSeq::mirrored(a.clone().plus(b.clone()), c(0.5, 0.5));
            let fa = TwoSidedSeq::mirrored(a, c(0.5, 0.5));
            let fb = TwoSidedSeq::mirrored(b, c(0.5, 0.5));
            let lhs = partial_sum(&f, n, x);
            let rhs = partial_sum(&fa, n, x) + partial_sum(&fb, n, x);
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn tail_bound_covers_truncation(p in 1.2..3.0f64, m in 4u64..64, x in 0.05..PI) {
            // the neglected tail Σ_{k≥m} k^{-p} sin kx, summed far out
            let f = TwoSidedSeq::sine_series(power(p));
            let bound = tail_bound(&f, m, x);
            let far = (m..200_000).map(|k| (k as f64).powf(-p) * (k as f64 * x).sin()).sum::<CompensatedSum>().value();
            prop_assert!(far.abs() <= bound + 1e-9);
        }
    }
}
