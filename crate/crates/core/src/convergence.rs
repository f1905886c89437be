//! Uniform and L¹ convergence criteria, their decay experiments, the dual
//! functionals `φ_{±n}`, and rate matching against a reference sequence `ψ`.
//!
//! A criterion is only reported *satisfied* when a rule majorant certifies
//! the limit: either the majorant at the horizon is below
//! [`CERTIFY_THRESHOLD`], or its closed form provably tends to zero.
//! *Violated* needs a concrete witness: the sampled (finite, hence lower
//! bound) quantity shows no decay over the top two dyadic decades.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::class::{check_class, ClassId};
use crate::error::{Error, Result};
use crate::fit::{top_decade_slope, FittedConstant, TREND_SLOPE_CAP};
use crate::json::{ext_real, ext_real_opt};
use crate::seq::{SectorAngle, SequenceRule, TwoSidedSeq, Weight};
use crate::sum::CompensatedSum;
use crate::trig::{
    delayed_gap_eval, natural_domain, reference_order, tail_evals, Domain, Estimate, GridSpec,
};

/// A majorant below this at the horizon certifies a limit of zero.
pub const CERTIFY_THRESHOLD: f64 = 1e-10;

/// Horizon used for class hypotheses inside criterion checks.
const HYPOTHESIS_HORIZON: u64 = 1 << 14;

/// `6√π`, the uniform bound on `|φ_{±n}|`.
pub fn phi_sup_bound() -> f64 {
    6.0 * PI.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    fn apply(self, k: u64) -> i64 {
        match self {
            Sign::Plus => k as i64,
            Sign::Minus => -(k as i64),
        }
    }
}

/// One condition of a criterion (`n c_n → 0`, `Σ|c_n + c_{-n}| < ∞`, ...).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    pub witness: Option<u64>,
    /// Majorant of the limiting quantity at the horizon.
    #[serde(serialize_with = "ext_real")]
    pub majorant: f64,
    pub closed_form_vanishes: bool,
    /// Finite-range samples `(n, value)`; lower bounds of the true quantity.
    pub samples: Vec<(u64, f64)>,
    #[serde(serialize_with = "ext_real_opt")]
    pub slope: Option<f64>,
    pub reason: String,
}

/// A standing hypothesis of the theorem behind a criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub sequence: String,
    pub horizon: u64,
    pub verdict: Verdict,
    pub witness: Option<u64>,
    /// Samples of the first condition.
    pub decay_samples: Vec<(u64, f64)>,
    pub conditions: Vec<Condition>,
    pub hypotheses: Vec<Hypothesis>,
}

impl CriterionReport {
    fn new(criterion: &str, sequence: String, horizon: u64, conditions: Vec<Condition>, hypotheses: Vec<Hypothesis>) -> Self {
        let violated = conditions.iter().find(|c| c.verdict == Verdict::Violated);
        let (verdict, witness) = if let Some(c) = violated {
            (Verdict::Violated, c.witness)
        } else if conditions.iter().all(|c| c.verdict == Verdict::Satisfied) {
            (Verdict::Satisfied, None)
        } else {
            (Verdict::Inconclusive, None)
        };
        Self {
            criterion: criterion.to_string(),
            sequence,
            horizon,
            verdict,
            witness,
            decay_samples: conditions.first().map(|c| c.samples.clone()).unwrap_or_default(),
            conditions,
            hypotheses,
        }
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypotheses.iter().all(|h| h.holds)
    }
}

fn check_horizon(horizon: u64) -> Result<()> {
    if horizon < 4 {
        Err(Error::param(format!("criterion horizon must be at least 4, got {horizon}")))
    } else {
        Ok(())
    }
}

fn dyadic_upto(h: u64) -> impl Iterator<Item = u64> {
    (0..64).map(|j| 1u64 << j).take_while(move |&n| n <= h)
}

/// `sup_{k≥n} w(k)|c_k| → 0`.
fn null_condition(name: &str, rule: &SequenceRule, weight: Weight, horizon: u64) -> Condition {
    let w = |k: u64| match weight {
        Weight::Linear => k as f64,
        Weight::Log => (k as f64).ln(),
    };
    let h = horizon as usize;
    // suffix maxima of w(k)|c_k| over 1..=H, with the attaining index
    let mut suffix = vec![(0.0f64, horizon); h + 2];
    for k in (1..=h).rev() {
        let v = w(k as u64) * rule.coeff(k as u64).norm();
        suffix[k] = if v >= suffix[k + 1].0 { (v, k as u64) } else { suffix[k + 1] };
    }
    let samples: Vec<(u64, f64)> = dyadic_upto(horizon).map(|n| (n, suffix[n as usize].0)).collect();
    let majorant = rule.sup_majorant(weight, horizon);
    let vanishes = rule.sup_majorant_vanishes(weight);
    let slope = top_decade_slope(&samples);
    let (verdict, witness, reason) = if majorant < CERTIFY_THRESHOLD {
        (Verdict::Satisfied, None, format!("majorant {majorant:e} at the horizon"))
    } else if vanishes {
        (Verdict::Satisfied, None, "closed-form majorant tends to zero".to_string())
    } else if slope.map_or(false, |s| s >= -TREND_SLOPE_CAP) {
        let top = samples.last().expect("horizon ≥ 1").0 as usize;
        let (value, at) = suffix[top.max(h / 4).max(1)];
        (Verdict::Violated, Some(at), format!("no decay: value {value:e} at k = {at}"))
    } else if !majorant.is_finite() {
        (Verdict::Inconclusive, None, "no finite majorant for the tail".to_string())
    } else {
        (Verdict::Inconclusive, None, format!("decaying samples but majorant {majorant:e} not certified"))
    };
    Condition {
        name: name.to_string(),
        verdict,
        witness,
        majorant,
        closed_form_vanishes: vanishes,
        samples,
        slope,
        reason,
    }
}

/// `Σ_k |c_k| < ∞`.
fn summable_condition(name: &str, rule: &SequenceRule, horizon: u64) -> Condition {
    let majorant = rule.tail_abs_majorant(horizon + 1);
    let finite = (1..=horizon).map(|k| rule.coeff(k).norm()).sum::<CompensatedSum>().value();
    // dyadic block sums Σ_{2^j ≤ k < 2^{j+1}} |c_k|
    let samples: Vec<(u64, f64)> = dyadic_upto(horizon)
        .filter(|&n| 2 * n - 1 <= horizon)
        .map(|n| (n, (n..2 * n).map(|k| rule.coeff(k).norm()).sum::<CompensatedSum>().value()))
        .collect();
    let slope = top_decade_slope(&samples);
    let (verdict, witness, reason) = if majorant.is_finite() {
        (Verdict::Satisfied, None, format!("sum ≤ {:e} (finite part + majorant)", finite + majorant))
    } else if slope.map_or(false, |s| s >= -TREND_SLOPE_CAP) {
        let at = samples.last().expect("horizon ≥ 1").0;
        (Verdict::Violated, Some(at), format!("dyadic block sums do not decay; partial sum {finite:e}"))
    } else {
        (Verdict::Inconclusive, None, "no finite majorant for the tail".to_string())
    };
    Condition {
        name: name.to_string(),
        verdict,
        witness,
        majorant,
        closed_form_vanishes: majorant.is_finite(),
        samples,
        slope,
        reason,
    }
}

fn nbvs_hypothesis(name: &str, rule: &SequenceRule) -> Result<Hypothesis> {
    let v = check_class(rule, ClassId::Nbvs, HYPOTHESIS_HORIZON)?;
    Ok(Hypothesis {
        name: name.to_string(),
        holds: v.member,
        detail: format!("K = {:.6} at horizon {}", v.k_hat, v.horizon),
    })
}

fn sector_hypothesis(seq: &TwoSidedSeq, horizon: u64) -> Hypothesis {
    let sums = (1..=horizon).map(|k| seq.symmetric_sum(k));
    match SectorAngle::enclosing(sums) {
        Some(s) => Hypothesis {
            name: "c_n + c_-n in a sector".into(),
            holds: true,
            detail: format!("half-angle {:.6} rad", s.radians()),
        },
        None => Hypothesis {
            name: "c_n + c_-n in a sector".into(),
            holds: false,
            detail: "values leave every sector |arg z| ≤ θ < π/2".into(),
        },
    }
}

/// Uniform convergence of `Σ c_k e^{ikx}`: `n c_n → 0` and
/// `Σ |c_n + c_{-n}| < ∞`, under the sector and NBVS hypotheses (the latter
/// on `{c_n}_{n≥0}` only).
pub fn criterion_uniform(seq: &TwoSidedSeq, horizon: u64) -> Result<CriterionReport> {
    check_horizon(horizon)?;
    let conditions = vec![
        null_condition("n c_n -> 0", seq.pos(), Weight::Linear, horizon),
        summable_condition("sum |c_n + c_-n| < inf", &seq.symmetric_rule(), horizon),
    ];
    let hypotheses = vec![sector_hypothesis(seq, horizon), nbvs_hypothesis("{c_n} in NBVS", seq.pos())?];
    Ok(CriterionReport::new("uniform", seq.to_string(), horizon, conditions, hypotheses))
}

/// Uniform convergence of `Σ b_n sin nx` for nonnegative NBVS `b`:
/// `n b_n → 0`.
pub fn criterion_sine(b: &SequenceRule, horizon: u64) -> Result<CriterionReport> {
    check_horizon(horizon)?;
    if !b.is_real() {
        return Err(Error::domain(format!("sine coefficients `{b}` are not real")));
    }
    if let Some(k) = (1..=horizon).find(|&k| b.coeff(k).re < 0.0) {
        return Err(Error::domain(format!("sine coefficients `{b}` are negative at k = {k}")));
    }
    let conditions = vec![null_condition("n b_n -> 0", b, Weight::Linear, horizon)];
    let hypotheses = vec![nbvs_hypothesis("{b_n} in NBVS", b)?];
    Ok(CriterionReport::new("sine", b.to_string(), horizon, conditions, hypotheses))
}

/// L¹ convergence: `f̂(±n) log n → 0`, under NBVS on both halves.
pub fn criterion_l1(fhat: &TwoSidedSeq, horizon: u64) -> Result<CriterionReport> {
    check_horizon(horizon)?;
    let conditions = vec![
        null_condition("f(n) log n -> 0", fhat.pos(), Weight::Log, horizon),
        null_condition("f(-n) log n -> 0", fhat.neg(), Weight::Log, horizon),
    ];
    let hypotheses = vec![
        nbvs_hypothesis("{f(n)} in NBVS", fhat.pos())?,
        nbvs_hypothesis("{f(-n)} in NBVS", fhat.neg())?,
    ];
    Ok(CriterionReport::new("l1", fhat.to_string(), horizon, conditions, hypotheses))
}

fn check_n_list(ns: &[u64]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::param("empty n list"));
    }
    if ns[0] == 0 || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("n list must be positive and strictly increasing"));
    }
    Ok(())
}

/// The default evaluation grid for a sweep over `ns`.
pub fn default_grid(seq: &TwoSidedSeq, ns: &[u64]) -> GridSpec {
    GridSpec::default_for(natural_domain(seq), ns)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: u64,
    /// `‖f - S_n‖`
    pub sup: Estimate,
    /// `‖f - S_n‖_L`
    pub l1: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub reference_order: u64,
    pub domain: Domain,
    pub grid_points: usize,
    pub rows: Vec<DecayRow>,
    /// Sup-norm estimates nonincreasing in `n` (reported, not enforced).
    pub monotone: bool,
    #[serde(serialize_with = "ext_real_opt")]
    pub slope: Option<f64>,
}

/// `‖f - S_n‖` intervals for each `n` in `ns`.
pub fn uniform_decay_experiment(seq: &TwoSidedSeq, ns: &[u64], grid: Option<&GridSpec>) -> Result<DecayTable> {
    check_n_list(ns)?;
    let spec = grid.cloned().unwrap_or_else(|| default_grid(seq, ns));
    let grid = spec.realize();
    let n_ref = reference_order(*ns.last().expect("nonempty"));
    let evals = tail_evals(seq, ns, &grid, n_ref)?;
    let rows: Vec<DecayRow> = ns
        .iter()
        .zip(evals)
        .map(|(&n, e)| DecayRow {
            n,
            sup: e.sup_norm,
            l1: e.l1_norm,
        })
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].sup.value <= w[0].sup.value);
    let samples: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.sup.value)).collect();
    Ok(DecayTable {
        reference_order: n_ref,
        domain: grid.domain,
        grid_points: grid.len(),
        monotone,
        slope: top_decade_slope(&samples),
        rows,
    })
}

/// `Σ_{k=1}^{n} f̂(±(n+k)) / k`, the coefficient side of
/// `(1/2π)∫(f - S_n) φ_{±n}` (up to sign).
pub fn phi_functional(fhat: &TwoSidedSeq, n: u64, sign: Sign) -> Complex64 {
    (1..=n)
        .map(|k| fhat.eval(sign.apply(n + k)) / k as f64)
        .fold(crate::sum::ComplexSum::new(), |mut acc, z| {
            acc.add(z);
            acc
        })
        .value()
}

/// `2π |phi_functional| / (6√π)`, a lower bound for `‖f - S_n‖_L`; the max
/// over both signs.
pub fn phi_lower_bound(fhat: &TwoSidedSeq, n: u64) -> f64 {
    Sign::BOTH
        .iter()
        .map(|&s| 2.0 * PI * phi_functional(fhat, n, s).norm() / phi_sup_bound())
        .fold(0.0, f64::max)
}

/// `φ_{±n}(x) = Σ_{k=1}^{n} (e^{i(k∓n)x} - e^{-i(k±n)x}) / k`.
pub fn phi_value(n: u64, sign: Sign, x: f64) -> Complex64 {
    let nn = n as f64;
    let mut acc = crate::sum::ComplexSum::new();
    for k in 1..=n {
        let kf = k as f64;
        let z = match sign {
            Sign::Plus => Complex64::cis((kf - nn) * x) - Complex64::cis(-(kf + nn) * x),
            Sign::Minus => Complex64::cis((kf + nn) * x) - Complex64::cis(-(kf - nn) * x),
        };
        acc.add(z / kf);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhiBound {
    pub n: u64,
    pub max_abs: f64,
    pub argmax_x: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `max_x |φ_{±n}(x)|` over `points` for every `n ≤ n_max`.
///
/// Uses `|φ_{±n}(x)| = 2|Σ_{k≤n} sin(kx)/k|` in one incremental sweep, and
/// cross-checks that identity against the direct formula for a few `n`; a
/// mismatch means the formula is wrong and is reported as an error.
pub fn phi_bound_sweep(n_max: u64, points: &[f64]) -> Result<Vec<PhiBound>> {
    if n_max == 0 || points.is_empty() {
        return Err(Error::param("phi sweep needs n_max ≥ 1 and a nonempty grid"));
    }
    let per_point: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&x| {
            let mut acc = CompensatedSum::new();
            (1..=n_max)
                .map(|k| {
                    acc += (k as f64 * x).sin() / k as f64;
                    2.0 * acc.value().abs()
                })
                .collect()
        })
        .collect();
    let mut out: Vec<PhiBound> = (1..=n_max)
        .map(|n| PhiBound {
            n,
            max_abs: 0.0,
            argmax_x: points[0],
            bound: phi_sup_bound(),
            holds: true,
        })
        .collect();
    for (x, row) in points.iter().zip(&per_point) {
        for (b, &v) in out.iter_mut().zip(row) {
            if v > b.max_abs {
                b.max_abs = v;
                b.argmax_x = *x;
            }
        }
    }
    for b in &mut out {
        b.holds = b.max_abs <= b.bound;
    }
    let probes = [1, 2, 8, n_max.min(64), n_max];
    for &n in &probes {
        let stride = (points.len() / 257).max(1);
        for (i, &x) in points.iter().enumerate().step_by(stride) {
            for s in Sign::BOTH {
                let direct = phi_value(n, s, x).norm();
                let fast = per_point[i][n as usize - 1];
                if (direct - fast).abs() > 1e-9 * (1.0 + fast) {
                    return Err(Error::Inconsistent(format!(
                        "|phi_{n}({x})|: direct {direct} vs sine-sum form {fast}"
                    )));
                }
            }
        }
    }
    Ok(out)
}

/// `max_x |φ_{±n}(x)|` over `points` via the direct formula.
pub fn phi_bound_check(n: u64, points: &[f64]) -> PhiBound {
    let (max_abs, argmax_x) = points
        .par_iter()
        .map(|&x| {
            let m = Sign::BOTH.iter().map(|&s| phi_value(n, s, x).norm()).fold(0.0, f64::max);
            (m, x)
        })
        .reduce(|| (0.0, 0.0), |a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    PhiBound {
        n,
        max_abs,
        argmax_x,
        bound: phi_sup_bound(),
        holds: max_abs <= phi_sup_bound(),
    }
}

/// `2π |Σ_{k=1}^{n} f̂(±(n+k))/k| / H_n` over both signs, a lower bound for
/// `E_n(f)_L`: the test function `Σ e^{∓i(n+k)x}/k` has sup norm `H_n`
/// and only frequencies above `n`, so it annihilates every polynomial of
/// degree `n`.
pub fn en_l1_lower(fhat: &TwoSidedSeq, n: u64) -> f64 {
    let harmonic: f64 = (1..=n).map(|k| 1.0 / k as f64).sum::<CompensatedSum>().value();
    Sign::BOTH
        .iter()
        .map(|&s| 2.0 * PI * phi_functional(fhat, n, s).norm() / harmonic)
        .fold(0.0, f64::max)
}

/// `max_{n≤|k|≤2n} |f̂(k)| log k`.
pub fn block_log_max(fhat: &TwoSidedSeq, n: u64) -> f64 {
    (n..=2 * n)
        .map(|k| (fhat.pos().coeff(k).norm().max(fhat.neg().coeff(k).norm())) * (k as f64).ln())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Row {
    pub n: u64,
    /// `‖f - S_n‖_L`
    pub distance: Estimate,
    pub phi_plus: f64,
    pub phi_minus: f64,
    /// `max(phi_plus, phi_minus)`
    pub phi_lower: f64,
    /// `max_{n≤|k|≤2n} |f̂(k)| log k`
    pub block_log_max: f64,
    /// `‖τ_{2n,n}(f) - S_n(f)‖_L`
    pub tau_gap: Estimate,
    pub dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Table {
    pub reference_order: u64,
    pub domain: Domain,
    pub grid_points: usize,
    pub rows: Vec<L1Row>,
    /// Both the estimate and the upper end of `‖f - S_n‖_L` decrease.
    pub decreasing: bool,
    /// All rows have `phi_lower ≤ distance.hi`.
    pub dominated: bool,
    /// `‖τ - S_n‖_L / block_log_max` over the rows.
    pub tau_fit: FittedConstant,
}

/// Per `n`: the `‖f - S_n‖_L` interval, the φ-functional lower bounds and
/// the delayed-mean comparison.
pub fn l1_decay_experiment(fhat: &TwoSidedSeq, ns: &[u64], grid: Option<&GridSpec>) -> Result<L1Table> {
    check_n_list(ns)?;
    let spec = grid.cloned().unwrap_or_else(|| default_grid(fhat, ns));
    let grid = spec.realize();
    let n_ref = reference_order(*ns.last().expect("nonempty"));
    let evals = tail_evals(fhat, ns, &grid, n_ref)?;
    let rows = ns
        .iter()
        .zip(evals)
        .map(|(&n, e)| {
            let tau = delayed_gap_eval(fhat, n, &grid)?;
            let phi_plus = 2.0 * PI * phi_functional(fhat, n, Sign::Plus).norm() / phi_sup_bound();
            let phi_minus = 2.0 * PI * phi_functional(fhat, n, Sign::Minus).norm() / phi_sup_bound();
            let phi_lower = phi_plus.max(phi_minus);
            Ok(L1Row {
                n,
                distance: e.l1_norm,
                phi_plus,
                phi_minus,
                phi_lower,
                block_log_max: block_log_max(fhat, n),
                tau_gap: tau.l1_norm,
                dominates: phi_lower <= e.l1_norm.hi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows
        .windows(2)
        .all(|w| w[1].distance.value < w[0].distance.value && w[1].distance.hi < w[0].distance.hi);
    let ratios: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, ext_ratio(r.tau_gap.hi, r.block_log_max))).collect();
    Ok(L1Table {
        reference_order: n_ref,
        domain: grid.domain,
        grid_points: grid.len(),
        dominated: rows.iter().all(|r| r.dominates),
        decreasing,
        tau_fit: FittedConstant::fit(&ratios),
        rows,
    })
}

fn ext_ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogVariationRow {
    pub n: u64,
    /// `Σ_{k=n}^{2n} |Δc_k| log k`
    pub lhs: f64,
    /// `max_{n≤k≤2n} |c_k| log k`
    pub rhs: f64,
    #[serde(serialize_with = "ext_real")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogVariationTable {
    pub rows: Vec<LogVariationRow>,
    pub fitted: FittedConstant,
}

/// `Σ_{k=n}^{2n} |Δc_k| log k` against `max_{n≤k≤2n} |c_k| log k`.
pub fn log_variation_check(seq: &SequenceRule, ns: &[u64]) -> Result<LogVariationTable> {
    check_n_list(ns)?;
    let rows: Vec<LogVariationRow> = ns
        .iter()
        .map(|&n| {
            let lhs = (n..=2 * n)
                .map(|k| (seq.coeff(k) - seq.coeff(k + 1)).norm() * (k as f64).ln())
                .sum::<CompensatedSum>()
                .value();
            let rhs = (n..=2 * n).map(|k| seq.coeff(k).norm() * (k as f64).ln()).fold(0.0, f64::max);
            LogVariationRow {
                n,
                lhs,
                rhs,
                ratio: ext_ratio(lhs, rhs),
            }
        })
        .collect();
    let samples: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, r.ratio)).collect();
    Ok(LogVariationTable {
        fitted: FittedConstant::fit(&samples),
        rows,
    })
}

/// A reference rate `ψ_n`: decreasing, null, with `ψ_n = O(ψ_{2n})`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSpec {
    #[serde(serialize_with = "serialize_display")]
    pub psi: SequenceRule,
    /// `max ψ_n / ψ_{2n}` over the checked range.
    pub doubling_constant: f64,
    pub checked_to: u64,
}

fn serialize_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl RateSpec {
    /// Checks `ψ` on `1 ≤ n ≤ 2·n_max`: real, positive and nonincreasing.
    /// Every rule is a null sequence by construction.
    pub fn new(psi: SequenceRule, n_max: u64) -> Result<Self> {
        if !psi.is_real() {
            return Err(Error::domain(format!("rate `{psi}` is not real")));
        }
        let top = 2 * n_max.max(1);
        let values: Vec<f64> = (1..=top).map(|n| psi.coeff(n).re).collect();
        if let Some(i) = values.iter().position(|&v| v <= 0.0) {
            return Err(Error::domain(format!("rate `{psi}` is not positive at n = {}", i + 1)));
        }
        if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::domain(format!("rate `{psi}` increases at n = {}", i + 1)));
        }
        let doubling_constant = (1..=n_max.max(1))
            .map(|n| values[n as usize - 1] / values[2 * n as usize - 1])
            .fold(0.0, f64::max);
        Ok(Self {
            psi,
            doubling_constant,
            checked_to: top,
        })
    }

    pub fn at(&self, n: u64) -> f64 {
        self.psi.coeff(n).re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateRow {
    pub n: u64,
    pub psi: f64,
    /// `‖f - S_n‖_L`
    pub distance: Estimate,
    pub phi_lower: f64,
    /// `[en_lower, distance.hi]` encloses `E_n(f)_L`.
    pub en_lower: f64,
    /// `max(|f̂(n)|, |f̂(-n)|) log n`
    pub coefficient_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub rate: RateSpec,
    pub rows: Vec<RateRow>,
    /// `sup ‖f - S_n‖_L / ψ_n` (upper interval end)
    pub c1: FittedConstant,
    /// `sup φ-lower / ψ_n`
    pub c2: FittedConstant,
    /// `sup |f̂(±n)| log n / ψ_n`
    pub c3: FittedConstant,
    pub consistent: bool,
}

/// Fits `‖f - S_n‖_L`, its dual lower bound and `|f̂(±n)| log n` against
/// `ψ_n`. Consistent with `O(ψ)` when all three fitted constants are finite
/// with no upward trend.
pub fn rate_match(fhat: &TwoSidedSeq, psi: SequenceRule, ns: &[u64], grid: Option<&GridSpec>) -> Result<RateReport> {
    check_n_list(ns)?;
    let rate = RateSpec::new(psi, *ns.last().expect("nonempty"))?;
    let spec = grid.cloned().unwrap_or_else(|| default_grid(fhat, ns));
    let grid = spec.realize();
    let n_ref = reference_order(*ns.last().expect("nonempty"));
    let evals = tail_evals(fhat, ns, &grid, n_ref)?;
    let rows: Vec<RateRow> = ns
        .iter()
        .zip(evals)
        .map(|(&n, e)| RateRow {
            n,
            psi: rate.at(n),
            distance: e.l1_norm,
            phi_lower: phi_lower_bound(fhat, n),
            en_lower: en_l1_lower(fhat, n),
            coefficient_term: fhat.pos().coeff(n).norm().max(fhat.neg().coeff(n).norm()) * (n as f64).ln(),
        })
        .collect();
    let fit = |f: &dyn Fn(&RateRow) -> f64| {
        let s: Vec<(u64, f64)> = rows.iter().map(|r| (r.n, f(r) / r.psi)).collect();
        FittedConstant::fit(&s)
    };
    let c1 = fit(&|r| r.distance.hi);
    let c2 = fit(&|r| r.phi_lower);
    let c3 = fit(&|r| r.coefficient_term);
    let consistent = c1.bounded() && c2.bounded() && c3.bounded();
    Ok(RateReport {
        rate,
        rows,
        c1,
        c2,
        c3,
        consistent,
    })
}
