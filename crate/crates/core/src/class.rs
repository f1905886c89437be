//! Finite-horizon membership checks for the sequence classes
//!
//! | class | ratio at `m` |
//! |-------|--------------|
//! | MS    | `(c_{m+1} - c_m)₊ / c_m` (zero iff nonincreasing) |
//! | CQMS  | least `α ≥ 0` with `c_{m+1}/(m+1)^α ≤ c_m/m^α` |
//! | RBVS  | `Σ_{n≥m} |Δc_n| / |c_m|` |
//! | GBVS(N₀) | `Σ_{n=m}^{2m} |Δc_n| / max_{m≤n<m+N₀} |c_n|` |
//! | NBVS  | `Σ_{n=m}^{2m} |Δc_n| / (|c_m| + |c_{2m}|)` |
//!
//! Ratios are extended reals: `0/0 = 0` and `x/0 = +∞` for `x > 0`.
//! Membership is only ever reported up to the tested horizon.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fit::{top_decade_slope, TREND_SLOPE_CAP};
use crate::json::{ext_real, ext_real_opt};
use crate::seq::{block_variation, SequenceRule, VariationTable};

/// Default sweep horizon for class checks.
pub const DEFAULT_HORIZON: u64 = 1 << 16;

/// A least quasi-monotonicity exponent above this is reported as `+∞`.
pub const CQMS_ALPHA_CAP: f64 = 64.0;

/// Relative slack allowed in the monotonicity test.
const MS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassId {
    Ms,
    Cqms,
    Rbvs,
    Gbvs(u64),
    Nbvs,
}

impl ClassId {
    pub const ALL: [ClassId; 5] = [ClassId::Ms, ClassId::Cqms, ClassId::Rbvs, ClassId::Gbvs(1), ClassId::Nbvs];
}

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassId::Ms => write!(f, "MS"),
            ClassId::Cqms => write!(f, "CQMS"),
            ClassId::Rbvs => write!(f, "RBVS"),
            ClassId::Gbvs(1) => write!(f, "GBVS"),
            ClassId::Gbvs(n0) => write!(f, "GBVS({n0})"),
            ClassId::Nbvs => write!(f, "NBVS"),
        }
    }
}

impl FromStr for ClassId {
    type Err = Error;

    /// `ms`, `cqms`, `rbvs`, `gbvs`, `gbvs:<N0>`, `nbvs` (case-insensitive).
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "ms" => Ok(ClassId::Ms),
            "cqms" => Ok(ClassId::Cqms),
            "rbvs" => Ok(ClassId::Rbvs),
            "gbvs" => Ok(ClassId::Gbvs(1)),
            "nbvs" => Ok(ClassId::Nbvs),
            other => other
                .strip_prefix("gbvs:")
                .and_then(|n| n.parse::<u64>().ok())
                .filter(|&n| n >= 1)
                .map(ClassId::Gbvs)
                .ok_or_else(|| Error::param(format!("unknown class `{s}`"))),
        }
    }
}

impl Serialize for ClassId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Outcome of sweeping a class ratio over `m ∈ [1, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassVerdict {
    pub class: ClassId,
    pub horizon: u64,
    /// Sup of the ratio over the tested `m` (the empirical `K(C)`).
    #[serde(serialize_with = "ext_real")]
    pub k_hat: f64,
    /// Smallest `m` attaining `k_hat`.
    pub witness_m: u64,
    pub member: bool,
    /// Log-log slope of the ratio over the top two dyadic decades.
    #[serde(serialize_with = "ext_real_opt")]
    pub growth_slope: Option<f64>,
    /// `ratios[m - 1]` is the ratio at `m`.
    #[serde(skip)]
    pub ratios: Vec<f64>,
}

#[inline]
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

/// `Σ_{n=m}^{2m} |Δc_n| / (|c_m| + |c_{2m}|)`.
pub fn nbvs_ratio(seq: &SequenceRule, m: u64) -> Result<f64> {
    check_index(m)?;
    let num = block_variation(seq, m, 2 * m)?;
    Ok(ext_ratio(num, seq.coeff(m).norm() + seq.coeff(2 * m).norm()))
}

/// `Σ_{n=m}^{2m} |Δc_n| / max_{m≤n<m+N₀} |c_n|`.
pub fn gbvs_ratio(seq: &SequenceRule, m: u64, n0: u64) -> Result<f64> {
    check_index(m)?;
    if n0 == 0 {
        return Err(Error::param("N0 must be at least 1"));
    }
    let num = block_variation(seq, m, 2 * m)?;
    let den = (m..m + n0).map(|n| seq.coeff(n).norm()).fold(0.0, f64::max);
    Ok(ext_ratio(num, den))
}

/// Upper estimate of `Σ_{n≥m} |Δc_n| / |c_m|`: exact variation up to
/// `max(horizon, m)` plus the rule's tail majorant.
pub fn rbvs_ratio(seq: &SequenceRule, m: u64, horizon: u64) -> Result<f64> {
    check_index(m)?;
    let upper = horizon.max(m);
    let tail = finite_variation_majorant(seq, upper + 1)?;
    let num = block_variation(seq, m, upper)? + tail;
    Ok(ext_ratio(num, seq.coeff(m).norm()))
}

/// Least `α ≥ 0` making `c_n / n^α` nonincreasing on `1 ≤ n ≤ horizon`;
/// `+∞` past [`CQMS_ALPHA_CAP`] or when a zero term is followed by a
/// positive one.
pub fn cqms_min_alpha(seq: &SequenceRule, horizon: u64) -> Result<f64> {
    if horizon < 2 {
        return Err(Error::param("cqms_min_alpha needs horizon ≥ 2"));
    }
    let values = real_nonnegative(seq, horizon)?;
    let alpha = (1..horizon as usize)
        .map(|n| local_exponent(values[n], values[n + 1], n as u64))
        .fold(0.0, f64::max);
    Ok(cap_alpha(alpha))
}

fn cap_alpha(alpha: f64) -> f64 {
    if alpha > CQMS_ALPHA_CAP {
        f64::INFINITY
    } else {
        alpha
    }
}

fn local_exponent(cur: f64, next: f64, n: u64) -> f64 {
    if next <= cur {
        // ratio ≤ 1 already; also covers next = 0
        0.0
    } else if cur == 0.0 {
        f64::INFINITY
    } else {
        let nf = n as f64;
        ((next / cur).ln() / (1.0 / nf).ln_1p()).max(0.0)
    }
}

fn check_index(m: u64) -> Result<()> {
    if m == 0 {
        Err(Error::param("class ratios are indexed from m = 1"))
    } else {
        Ok(())
    }
}

fn finite_variation_majorant(seq: &SequenceRule, from: u64) -> Result<f64> {
    let tail = seq.tail_variation_majorant(from);
    if tail.is_finite() {
        Ok(tail)
    } else {
        Err(Error::MissingMajorant {
            rule: seq.to_string(),
            what: "tail variation",
        })
    }
}

/// Real parts `c_0..=c_len` after checking the sequence is real and
/// nonnegative on `1..=len`.
fn real_nonnegative(seq: &SequenceRule, len: u64) -> Result<Vec<f64>> {
    if !seq.is_real() {
        return Err(Error::domain(format!("`{seq}` is not real; MS and CQMS need real sequences")));
    }
    let values: Vec<f64> = seq.coeffs(len).into_iter().map(|z| z.re).collect();
    if let Some(n) = (1..=len as usize).find(|&n| values[n] < 0.0) {
        return Err(Error::domain(format!("`{seq}` has a negative term at n = {n}")));
    }
    Ok(values)
}

/// Sweeps the class ratio over `m ∈ [1, horizon]` and assembles a verdict.
///
/// Range sums come from a [`VariationTable`] built once up to `2·horizon`,
/// so the sweep costs `O(horizon · log horizon)`. RBVS tails run to
/// `2·horizon` before the majorant takes over.
pub fn check_class(seq: &SequenceRule, class: ClassId, horizon: u64) -> Result<ClassVerdict> {
    if horizon < 4 {
        return Err(Error::param(format!("class sweeps need horizon ≥ 4, got {horizon}")));
    }
    let ratios: Vec<f64> = match class {
        ClassId::Ms => {
            let values = real_nonnegative(seq, horizon + 1)?;
            (1..=horizon as usize)
                .map(|m| {
                    let rise = values[m + 1] - values[m];
                    if rise <= MS_TOLERANCE * values[m] {
                        0.0
                    } else {
                        ext_ratio(rise, values[m])
                    }
                })
                .collect()
        }
        ClassId::Cqms => {
            let values = real_nonnegative(seq, horizon + 1)?;
            (1..=horizon as usize)
                .map(|m| cap_alpha(local_exponent(values[m], values[m + 1], m as u64)))
                .collect()
        }
        ClassId::Rbvs | ClassId::Gbvs(_) | ClassId::Nbvs => {
            let len = 2 * horizon;
            let table = VariationTable::new(seq, len);
            let tail = match class {
                ClassId::Rbvs => finite_variation_majorant(seq, len + 1)?,
                _ => 0.0,
            };
            (1..=horizon)
                .map(|m| {
                    let cm = table.coeff(m).norm();
                    match class {
                        ClassId::Rbvs => ext_ratio(table.range(m, len) + tail, cm),
                        ClassId::Gbvs(n0) => {
                            let den = (m..m + n0)
                                .map(|n| if n <= len + 1 { table.coeff(n).norm() } else { seq.coeff(n).norm() })
                                .fold(0.0, f64::max);
                            ext_ratio(table.range(m, 2 * m), den)
                        }
                        _ => ext_ratio(table.range(m, 2 * m), cm + table.coeff(2 * m).norm()),
                    }
                })
                .collect()
        }
    };
    Ok(assemble(class, horizon, ratios))
}

fn assemble(class: ClassId, horizon: u64, ratios: Vec<f64>) -> ClassVerdict {
    let mut k_hat = 0.0;
    let mut witness_m = 1;
    for (i, &r) in ratios.iter().enumerate() {
        if r > k_hat {
            k_hat = r;
            witness_m = i as u64 + 1;
        }
    }
    let growth_slope = match class {
        ClassId::Ms | ClassId::Cqms => None,
        _ => {
            let samples: Vec<(u64, f64)> = ratios.iter().enumerate().map(|(i, &r)| (i as u64 + 1, r)).collect();
            top_decade_slope(&samples)
        }
    };
    let member = match class {
        ClassId::Ms => k_hat == 0.0,
        ClassId::Cqms => k_hat.is_finite(),
        _ => k_hat.is_finite() && growth_slope.map_or(true, |s| s < TREND_SLOPE_CAP),
    };
    ClassVerdict {
        class,
        horizon,
        k_hat,
        witness_m,
        member,
        growth_slope,
        ratios,
    }
}

/// Result of checking the inclusion chain
/// `MS ⇒ RBVS ∧ CQMS`, `RBVS ∨ CQMS ⇒ GBVS`, `GBVS ⇒ NBVS` on one sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub horizon: u64,
    pub verdicts: Vec<ClassVerdict>,
    /// Classes whose checker rejected the input (e.g. MS on a complex
    /// sequence); these count as non-members.
    pub out_of_domain: Vec<(ClassId, String)>,
    /// Any broken implication. Always a checker bug, never a finding.
    pub violations: Vec<String>,
}

impl InclusionReport {
    pub fn member(&self, class: ClassId) -> bool {
        self.verdicts.iter().any(|v| v.class == class && v.member)
    }

    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn verify_inclusions(seq: &SequenceRule, horizon: u64) -> Result<InclusionReport> {
    let mut verdicts = Vec::new();
    let mut out_of_domain = Vec::new();
    for class in ClassId::ALL {
        match check_class(seq, class, horizon) {
            Ok(v) => verdicts.push(v),
            Err(Error::Domain(msg)) => out_of_domain.push((class, msg)),
            Err(e) => return Err(e),
        }
    }
    let mut report = InclusionReport {
        horizon,
        verdicts,
        out_of_domain,
        violations: Vec::new(),
    };
    let ms = report.member(ClassId::Ms);
    let cqms = report.member(ClassId::Cqms);
    let rbvs = report.member(ClassId::Rbvs);
    let gbvs = report.member(ClassId::Gbvs(1));
    let nbvs = report.member(ClassId::Nbvs);
    if ms && !(rbvs && cqms) {
        report.violations.push(format!("MS member but RBVS={rbvs}, CQMS={cqms}"));
    }
    if (rbvs || cqms) && !gbvs {
        report.violations.push(format!("RBVS={rbvs} or CQMS={cqms} but not GBVS"));
    }
    if gbvs && !nbvs {
        report.violations.push("GBVS member but not NBVS".to_string());
    }
    Ok(report)
}

/// One exact non-GBVS witness `m = 2^(2j+1)` of the dyadic-block sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockWitness {
    pub m: u64,
    pub gbvs_ratio: f64,
    /// `m / 8`
    pub lower_bound: f64,
    pub holds: bool,
}

/// Reproduction of the NBVS-but-not-GBVS dyadic-block sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub horizon: u64,
    pub nbvs: ClassVerdict,
    pub gbvs: ClassVerdict,
    /// `max_m nbvs_ratio(m)` over the horizon.
    pub nbvs_max: f64,
    pub nbvs_at_most_one: bool,
    pub witnesses: Vec<BlockWitness>,
    pub reproduced: bool,
}

pub fn counterexample(horizon: u64) -> Result<CounterexampleReport> {
    let seq = SequenceRule::dyadic_block();
    let nbvs = check_class(&seq, ClassId::Nbvs, horizon)?;
    let gbvs = check_class(&seq, ClassId::Gbvs(1), horizon)?;
    let nbvs_max = nbvs.k_hat;
    let witnesses: Vec<BlockWitness> = (1..)
        .map(|j| 1u64 << (2 * j + 1))
        .take_while(|&m| m <= horizon)
        .map(|m| {
            let ratio = gbvs.ratios[m as usize - 1];
            let bound = m as f64 / 8.0;
            BlockWitness {
                m,
                gbvs_ratio: ratio,
                lower_bound: bound,
                holds: ratio >= bound,
            }
        })
        .collect();
    let nbvs_at_most_one = nbvs_max <= 1.0;
    let reproduced = nbvs.member && nbvs_at_most_one && !gbvs.member && witnesses.iter().all(|w| w.holds);
    Ok(CounterexampleReport {
        horizon,
        nbvs,
        gbvs,
        nbvs_max,
        nbvs_at_most_one,
        witnesses,
        reproduced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(p: f64) -> SequenceRule {
        SequenceRule::power(p).unwrap()
    }

    #[test]
    fn nbvs_ratio_examples() {
        let d = SequenceRule::dyadic_block();
        assert!((nbvs_ratio(&d, 32).unwrap() - 7.0 / 9.0).abs() < 1e-15);
        assert!((nbvs_ratio(&power(1.0), 4).unwrap() - 10.0 / 27.0).abs() < 1e-15);
        let zero = SequenceRule::table(vec![0.0; 8]).unwrap();
        assert_eq!(nbvs_ratio(&zero, 3).unwrap(), 0.0);
        assert!(nbvs_ratio(&d, 0).is_err());
    }

    #[test]
    fn extended_ratio_convention() {
        // |Δc_1| = 1 while |c_1| + |c_2| = 0
        let t = SequenceRule::table([0.0, 0.0, 1.0]).unwrap();
        assert_eq!(nbvs_ratio(&t, 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gbvs_ratio_examples() {
        let d = SequenceRule::dyadic_block();
        let r = gbvs_ratio(&d, 32, 1).unwrap();
        assert_eq!(r, 7.0);
        assert!(r >= 32.0 / 8.0);
        assert!((gbvs_ratio(&power(1.0), 4, 1).unwrap() - 5.0 / 9.0).abs() < 1e-15);
        assert!(gbvs_ratio(&d, 4, 0).is_err());
        // a wider window can only shrink the ratio
        assert!(gbvs_ratio(&d, 31, 4).unwrap() <= gbvs_ratio(&d, 31, 1).unwrap());
    }

    #[test]
    fn gbvs_ratio_of_decreasing_rule_at_most_one() {
        for p in [0.3, 1.0, 2.5] {
            for m in 1..300 {
                assert!(gbvs_ratio(&power(p), m, 1).unwrap() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn rbvs_ratio_examples() {
        assert!((rbvs_ratio(&power(1.0), 10, 1000).unwrap() - 1.0).abs() < 1e-12);
        let t = SequenceRule::table([1.0, 0.5, 0.25]).unwrap();
        assert!((rbvs_ratio(&t, 1, 100).unwrap() - 1.0).abs() < 1e-15);
        let d = SequenceRule::dyadic_block();
        let mut last = 0.0;
        for n in 1..7 {
            let m = 1u64 << (2 * n + 1);
            let r = rbvs_ratio(&d, m, 1 << 16).unwrap();
            assert!(r >= m as f64 / 8.0);
            assert!(r > last);
            last = r;
        }
    }

    #[test]
    fn cqms_examples() {
        assert_eq!(cqms_min_alpha(&power(1.0), 1000).unwrap(), 0.0);
        let ramp = SequenceRule::table((1..=200).map(|n| n as f64)).unwrap();
        assert!((cqms_min_alpha(&ramp, 150).unwrap() - 1.0).abs() < 1e-12);
        // the upward jump at n = 15 → 16 already needs α ≈ 11; by 2^12 it
        // has passed the cap
        let d = SequenceRule::dyadic_block();
        let early = cqms_min_alpha(&d, 16).unwrap();
        assert!(early > 10.0 && early.is_finite());
        assert_eq!(cqms_min_alpha(&d, 1 << 12).unwrap(), f64::INFINITY);
        let complex = power(1.0).scaled(crate::Complex64::new(0.0, 1.0));
        assert!(matches!(cqms_min_alpha(&complex, 10), Err(Error::Domain(_))));
        let negative = SequenceRule::table([1.0, -1.0]).unwrap();
        assert!(matches!(cqms_min_alpha(&negative, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn dyadic_block_verdicts() {
        let d = SequenceRule::dyadic_block();
        let nbvs = check_class(&d, ClassId::Nbvs, DEFAULT_HORIZON).unwrap();
        assert!(nbvs.member);
        assert!(nbvs.k_hat <= 1.0);
        let gbvs = check_class(&d, ClassId::Gbvs(1), DEFAULT_HORIZON).unwrap();
        assert!(!gbvs.member);
        assert_eq!(gbvs.witness_m, 1 << 15);
        assert!(gbvs.k_hat >= 4096.0);
        assert_eq!(gbvs.k_hat, 8191.0);
    }

    #[test]
    fn power_two_in_every_class() {
        let c = power(2.0);
        for class in ClassId::ALL {
            let v = check_class(&c, class, 1 << 12).unwrap();
            assert!(v.member, "{class}: {v:?}");
        }
    }

    #[test]
    fn inclusion_examples() {
        let r = verify_inclusions(&power(1.0), 1 << 12).unwrap();
        assert!(r.consistent());
        assert!(ClassId::ALL.iter().all(|&c| r.member(c)));

        let d = verify_inclusions(&SequenceRule::dyadic_block(), 1 << 14).unwrap();
        assert!(d.consistent());
        assert!(d.member(ClassId::Nbvs));
        for c in [ClassId::Ms, ClassId::Cqms, ClassId::Rbvs, ClassId::Gbvs(1)] {
            assert!(!d.member(c), "{c}");
        }

        let t = verify_inclusions(&SequenceRule::table([3.0, 1.0, 2.0]).unwrap(), 64).unwrap();
        assert!(t.consistent());
        assert!(!t.member(ClassId::Ms));
    }

    #[test]
    fn complex_input_is_out_of_domain_for_ms() {
        let c = power(2.0).scaled(crate::Complex64::new(1.0, 1.0));
        let r = verify_inclusions(&c, 256).unwrap();
        assert_eq!(r.out_of_domain.len(), 2);
        assert!(r.consistent());
    }

    #[test]
    fn class_id_round_trip() {
        for s in ["ms", "cqms", "rbvs", "gbvs", "nbvs", "gbvs:3"] {
            let id: ClassId = s.parse().unwrap();
            let again: ClassId = id.to_string().to_ascii_lowercase().replace('(', ":").replace(')', "").parse().unwrap();
            assert_eq!(id, again);
        }
        assert!("gbvs:0".parse::<ClassId>().is_err());
    }

    #[test]
    fn counterexample_reproduces() {
        let r = counterexample(DEFAULT_HORIZON).unwrap();
        assert!(r.reproduced, "{r:?}");
        assert_eq!(r.witnesses.len(), 7);
        assert_eq!(r.witnesses[0].m, 8);
    }

    #[test]
    fn short_horizon_rejected() {
        assert!(check_class(&power(1.0), ClassId::Nbvs, 3).is_err());
    }
}
