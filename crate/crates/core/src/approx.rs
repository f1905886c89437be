//! Brackets for the best approximation `E_n(f)` by trigonometric polynomials
//! of degree `n`, the equivalent quantity `Q_n`, and the bound checks that
//! lead up to it.
//!
//! `E_n(f)` is never computed. It is enclosed by `[lower, upper]`: the lower
//! end comes from test kernels with only frequencies above `n` (they
//! annihilate every polynomial of degree `n`), the upper end is the sup norm
//! of `f - S_n`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::convergence::{default_grid, Sign};
use crate::error::{Error, Result};
use crate::fit::FittedConstant;
use crate::json::ext_real_opt;
use crate::seq::{SectorAngle, SequenceRule, TwoSidedSeq};
use crate::sum::{CompensatedSum, ComplexSum};
use crate::trig::{abel_tail, reference_order, tail_evals, Estimate, GridSpec};

/// Horizon for the finite parts of `Q_n`.
pub const DEFAULT_Q_HORIZON: u64 = 1 << 16;

/// `Q_n = T₁ + T₂ + T₃` with
/// `T₁ = max_{1≤k≤n} k(|c_{n+k}| + |c_{-n-k}|)`,
/// `T₂ = max_{k>2n} k|c_k - c_{-k}|`, `T₃ = Σ_{k>2n} |c_k + c_{-k}|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QValue {
    pub term1: f64,
    pub term2: Estimate,
    pub term3: Estimate,
    pub total: Estimate,
}

/// `Q_n` with finite parts up to `horizon` and tail majorants beyond.
pub fn q_value(seq: &TwoSidedSeq, n: u64, horizon: u64) -> Result<QValue> {
    if n == 0 {
        return Err(Error::param("Q_n is defined for n ≥ 1"));
    }
    let h = horizon.max(2 * n + 1);
    let term1 = (1..=n)
        .map(|k| k as f64 * (seq.pos().coeff(n + k).norm() + seq.neg().coeff(n + k).norm()))
        .fold(0.0, f64::max);

    let anti = seq.antisymmetric_rule();
    let finite2 = (2 * n + 1..=h).map(|k| k as f64 * anti.coeff(k).norm()).fold(0.0, f64::max);
    let tail2 = anti.tail_weighted_majorant(h + 1);
    if !tail2.is_finite() {
        return Err(Error::MissingMajorant {
            rule: anti.to_string(),
            what: "weighted sup",
        });
    }
    let term2 = Estimate {
        value: finite2,
        lo: finite2,
        hi: finite2.max(tail2),
    };

    let sym = seq.symmetric_rule();
    let finite3 = (2 * n + 1..=h).map(|k| sym.coeff(k).norm()).sum::<CompensatedSum>().value();
    let tail3 = sym.tail_abs_majorant(h + 1);
    if !tail3.is_finite() {
        return Err(Error::MissingMajorant {
            rule: sym.to_string(),
            what: "absolute tail",
        });
    }
    let term3 = Estimate {
        value: finite3,
        lo: finite3,
        hi: finite3 + tail3,
    };
    let lo = term1 + term2.lo + term3.lo;
    Ok(QValue {
        term1,
        term2,
        term3,
        total: Estimate {
            value: lo,
            lo,
            hi: term1 + term2.hi + term3.hi,
        },
    })
}

/// `(1/N)|Σ_{k=1}^{N} (k c_{∓(n+k)} + (N-k) c_{∓(n+N+k)})|`, a lower bound
/// for `E_n(f)`. `Plus` pairs with the kernel `e^{i(n+1)x}(Σ_{k<N} e^{ikx})²`
/// and so reads the negative frequencies; `Minus` reads the positive ones.
pub fn en_lower_dual(seq: &TwoSidedSeq, n: u64, big_n: u64, sign: Sign) -> Result<f64> {
    if big_n == 0 {
        return Err(Error::param("the dual kernel needs N ≥ 1"));
    }
    let c = |j: u64| match sign {
        Sign::Plus => seq.neg().coeff(j),
        Sign::Minus => seq.pos().coeff(j),
    };
    Ok(dual_sum(big_n, |j| c(n + j)) / big_n as f64)
}

fn dual_sum(big_n: u64, c: impl Fn(u64) -> num_complex::Complex64) -> f64 {
    let mut acc = ComplexSum::new();
    for k in 1..=big_n {
        acc.add(k as f64 * c(k));
        if k < big_n {
            acc.add((big_n - k) as f64 * c(big_n + k));
        }
    }
    acc.value().norm()
}

/// The symmetric variant with `s_j = c_j + c_{-j}` against the sum of both
/// kernels (norm at most `2N`). It never beats the better one-sided bound
/// but is kept for completeness.
pub fn en_lower_symmetric(seq: &TwoSidedSeq, n: u64, big_n: u64) -> Result<f64> {
    if big_n == 0 {
        return Err(Error::param("the dual kernel needs N ≥ 1"));
    }
    Ok(dual_sum(big_n, |j| seq.symmetric_sum(n + j)) / (2 * big_n) as f64)
}

/// `1, 2, 4, …, 2n`.
pub fn default_n_list(n: u64) -> Vec<u64> {
    (0..64).map(|j| 1u64 << j).take_while(|&k| k <= 2 * n.max(1)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxBracket {
    pub n: u64,
    pub lower: f64,
    /// `"N=<N>,<sign>"` of the best dual kernel.
    pub lower_from: String,
    /// `‖f - S_n‖`; `upper.hi` is the bracket's upper end.
    pub upper: Estimate,
    pub q: QValue,
    /// `Q/upper`; `None` when both vanish.
    #[serde(serialize_with = "ext_real_opt")]
    pub q_over_upper: Option<f64>,
    /// `lower/Q`; `None` when both vanish.
    #[serde(serialize_with = "ext_real_opt")]
    pub lower_over_q: Option<f64>,
    /// `max_{k≥1} k |c_{±(n+k)}|`
    pub weighted_max: f64,
}

impl ApproxBracket {
    pub fn is_ordered(&self) -> bool {
        0.0 <= self.lower && self.lower <= self.upper.hi * (1.0 + 1e-12) + 1e-300
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    match (num == 0.0, den == 0.0) {
        (true, true) => None,
        (_, true) => Some(f64::INFINITY),
        _ => Some(num / den),
    }
}

fn best_lower(seq: &TwoSidedSeq, n: u64, big_ns: &[u64]) -> Result<(f64, String)> {
    let mut best = (0.0, "none".to_string());
    for &big_n in big_ns {
        for s in Sign::BOTH {
            let v = en_lower_dual(seq, n, big_n, s)?;
            if v > best.0 {
                best = (v, format!("N={big_n},{}", if s == Sign::Plus { "plus" } else { "minus" }));
            }
        }
        let v = en_lower_symmetric(seq, n, big_n)?;
        if v > best.0 {
            best = (v, format!("N={big_n},symmetric"));
        }
    }
    Ok(best)
}

/// `max_{k≥1} k|c_{±(n+k)}|` from a finite scan plus the weighted majorants.
fn weighted_max(seq: &TwoSidedSeq, n: u64, horizon: u64) -> f64 {
    let h = horizon.max(n + 1);
    let scan = (n + 1..=h)
        .map(|j| (j - n) as f64 * seq.pos().coeff(j).norm().max(seq.neg().coeff(j).norm()))
        .fold(0.0, f64::max);
    let tail = seq.pos().tail_weighted_majorant(h + 1).max(seq.neg().tail_weighted_majorant(h + 1));
    scan.max(tail)
}

/// Brackets for every `n` in `ns`; the lower end maximizes over `N` in
/// `big_ns` (default `1, 2, 4, …, 2n`) and both kernel signs.
pub fn en_brackets(
    seq: &TwoSidedSeq,
    ns: &[u64],
    big_ns: Option<&[u64]>,
    grid: Option<&GridSpec>,
) -> Result<Vec<ApproxBracket>> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::param("n list must be nonempty and positive"));
    }
    let spec = grid.cloned().unwrap_or_else(|| default_grid(seq, ns));
    let grid = spec.realize();
    let n_max = *ns.iter().max().expect("nonempty");
    let evals = tail_evals(seq, ns, &grid, reference_order(n_max))?;
    ns.par_iter()
        .zip(evals)
        .map(|(&n, e)| {
            let owned;
            let list = match big_ns {
                Some(l) => l,
                None => {
                    owned = default_n_list(n);
                    &owned
                }
            };
            let (lower, lower_from) = best_lower(seq, n, list)?;
            let q = q_value(seq, n, DEFAULT_Q_HORIZON)?;
            Ok(ApproxBracket {
                n,
                lower,
                lower_from,
                upper: e.sup_norm,
                q_over_upper: ratio(q.total.value, e.sup_norm.hi),
                lower_over_q: ratio(lower, q.total.value),
                q,
                weighted_max: weighted_max(seq, n, DEFAULT_Q_HORIZON),
            })
        })
        .collect()
}

pub fn en_bracket(seq: &TwoSidedSeq, n: u64, big_ns: Option<&[u64]>, grid: Option<&GridSpec>) -> Result<ApproxBracket> {
    Ok(en_brackets(seq, &[n], big_ns, grid)?.remove(0))
}

/// A bound check `lhs ≤ C·rhs` over a range of indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(serialize_with = "ext_real_opt")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTable {
    pub rows: Vec<BoundRow>,
    pub fitted: FittedConstant,
}

impl BoundTable {
    fn new(rows: Vec<BoundRow>) -> Self {
        let samples: Vec<(u64, f64)> = rows.iter().filter_map(|r| r.ratio.map(|q| (r.n, q))).collect();
        Self {
            fitted: FittedConstant::fit(&samples),
            rows,
        }
    }

    fn from_pairs(pairs: Vec<(u64, f64, f64)>) -> Self {
        Self::new(
            pairs
                .into_iter()
                .map(|(n, lhs, rhs)| BoundRow {
                    n,
                    lhs,
                    rhs,
                    ratio: ratio(lhs, rhs),
                })
                .collect(),
        )
    }
}

/// `Σ_{k>2n} |c_k + c_{-k}|` (finite part plus majorant) against the lower
/// end of the `E_n` bracket; bounded ratios are evidence for the tail being
/// `O(E_n(f))`. Requires `c_n + c_{-n}` in a sector.
pub fn tail_vs_lower_check(seq: &TwoSidedSeq, brackets: &[ApproxBracket]) -> Result<BoundTable> {
    let top = brackets.iter().map(|b| b.n).max().unwrap_or(1);
    let h = DEFAULT_Q_HORIZON.max(2 * top + 1);
    if SectorAngle::enclosing((1..=h).map(|k| seq.symmetric_sum(k))).is_none() {
        return Err(Error::domain("c_n + c_-n leaves every sector |arg z| ≤ θ < π/2"));
    }
    Ok(BoundTable::from_pairs(brackets.iter().map(|b| (b.n, b.q.term3.hi, b.lower)).collect()))
}

/// `sup_x |Σ_{k=1}^{n} c_{±(n+k)} sin kx|` over the grid against
/// `max_{1≤k≤n} k(|c_{n+k}| + |c_{-n-k}|)`.
pub fn block_sine_check(seq: &TwoSidedSeq, ns: &[u64], grid: &GridSpec) -> Result<BoundTable> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::param("n list must be nonempty and positive"));
    }
    let pts = half_points(grid);
    let pairs = ns
        .iter()
        .map(|&n| {
            let pos: Vec<_> = (1..=n).map(|k| seq.pos().coeff(n + k)).collect();
            let neg: Vec<_> = (1..=n).map(|k| seq.neg().coeff(n + k)).collect();
            let lhs = pts
                .par_iter()
                .map(|&x| {
                    let mut p = ComplexSum::new();
                    let mut q = ComplexSum::new();
                    for k in 1..=n as usize {
                        let s = (k as f64 * x).sin();
                        p.add(pos[k - 1] * s);
                        q.add(neg[k - 1] * s);
                    }
                    p.value().norm().max(q.value().norm())
                })
                .reduce(|| 0.0, f64::max);
            let rhs = (1..=n as usize)
                .map(|k| k as f64 * (pos[k - 1].norm() + neg[k - 1].norm()))
                .fold(0.0, f64::max);
            (n, lhs, rhs)
        })
        .collect();
    Ok(BoundTable::from_pairs(pairs))
}

fn half_points(grid: &GridSpec) -> Vec<f64> {
    grid.realize().points.into_iter().filter(|&x| (0.0..=PI).contains(&x)).collect()
}

/// `sup_x |Σ_{k≥m} c_{±k} sin kx|` (summation by parts up to `horizon`, plus
/// its remainder bound) against `ε_m = max_{k≥m} k(|c_k| + |c_{-k}|)`.
pub fn abel_tail_check(seq: &TwoSidedSeq, ms: &[u64], grid: &GridSpec, horizon: u64) -> Result<BoundTable> {
    if ms.is_empty() || ms.contains(&0) {
        return Err(Error::param("m list must be nonempty and positive"));
    }
    let pts: Vec<f64> = half_points(grid).into_iter().filter(|&x| x > 0.0 && x < PI).collect();
    let pairs = ms
        .iter()
        .map(|&m| {
            let h = horizon.max(m);
            let lhs = pts
                .par_iter()
                .map(|&x| {
                    let mut worst: f64 = 0.0;
                    for side in [seq.pos(), seq.neg()] {
                        let t = abel_tail(side, m, x, h)?;
                        worst = worst.max(t.value.norm() + t.bound);
                    }
                    Ok(worst)
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let scan = (m..=h)
                .map(|k| k as f64 * (seq.pos().coeff(k).norm() + seq.neg().coeff(k).norm()))
                .fold(0.0, f64::max);
            let tail = seq.pos().tail_weighted_majorant(h + 1) + seq.neg().tail_weighted_majorant(h + 1);
            Ok((m, lhs, scan.max(tail)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundTable::from_pairs(pairs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosineSeriesReport {
    /// `|Σ_{k=n+1}^{2n} c_k| / max_{1≤k≤n} k c_{n+k}`
    pub side_condition: BoundTable,
    pub hypothesis_holds: bool,
    /// `‖f - S_n‖` (upper end) against the lower end of the `E_n` bracket;
    /// absent when the side condition fails.
    pub conclusion: Option<BoundTable>,
}

/// For `f = Σ c_n cos nx` with real NBVS `c`: checks the side condition
/// and then `‖f - S_n‖ = O(E_n(f))` against the bracket.
pub fn cosine_series_check(cos_coeffs: &SequenceRule, ns: &[u64], grid: Option<&GridSpec>) -> Result<CosineSeriesReport> {
    if !cos_coeffs.is_real() {
        return Err(Error::domain(format!("cosine coefficients `{cos_coeffs}` are not real")));
    }
    if ns.is_empty() || ns.contains(&0) {
        return Err(Error::param("n list must be nonempty and positive"));
    }
    let side_pairs = ns
        .iter()
        .map(|&n| {
            let lhs = (n + 1..=2 * n).map(|k| cos_coeffs.coeff(k).re).sum::<CompensatedSum>().value().abs();
            let rhs = (1..=n).map(|k| k as f64 * cos_coeffs.coeff(n + k).re).fold(0.0, f64::max);
            (n, lhs, rhs)
        })
        .collect();
    let side_condition = BoundTable::from_pairs(side_pairs);
    let hypothesis_holds = side_condition.fitted.bounded();
    let conclusion = if hypothesis_holds {
        let f = TwoSidedSeq::cosine_series(cos_coeffs.clone());
        let brackets = en_brackets(&f, ns, None, grid)?;
        Some(BoundTable::from_pairs(brackets.iter().map(|b| (b.n, b.upper.hi, b.lower)).collect()))
    } else {
        None
    };
    Ok(CosineSeriesReport {
        side_condition,
        hypothesis_holds,
        conclusion,
    })
}
