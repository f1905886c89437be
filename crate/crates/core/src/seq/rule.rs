use std::f64::consts::LN_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Longest stretch a majorant is allowed to scan before the closed form
/// takes over. Past this the majorant is reported as infinite.
const SCAN_LIMIT: u64 = 1 << 22;

/// A one-sided coefficient sequence `c_1, c_2, ...` given by a closed-form
/// rule.
///
/// Every rule is a null sequence and carries closed-form tail majorants, so
/// infinite sums downstream split into an exact finite part plus a bound.
/// Construct rules through the checked constructors; an invalid rule cannot
/// be built.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceRule {
    kind: RuleKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleKind {
    /// `c_n = 0` for all `n ≥ 0`.
    Zero,
    /// `c_k = values[k - 1]` for `1 ≤ k ≤ len`, zero afterwards.
    Table {
        values: Vec<Complex64>,
        zeroth: Option<Complex64>,
    },
    /// `c_n = n^(-p)`.
    Power { p: f64 },
    /// `c_n = n^(-a) · ln(n+1)^(-b)`.
    LogPower { a: f64, b: f64 },
    /// `c_n = r^n`.
    Geometric { ratio: f64 },
    /// `c_n = 2^(-2j)` for even `j`, `2^(-3j)` for odd `j`, where
    /// `2^j ≤ n < 2^(j+1)`; in particular `c_1 = 1`.
    DyadicBlock,
    Scaled {
        factor: Complex64,
        inner: Box<SequenceRule>,
    },
    Sum(Box<SequenceRule>, Box<SequenceRule>),
}

/// Which weight a sup-majorant is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// `sup_{k≥m} k |c_k|`
    Linear,
    /// `sup_{k≥m} |c_k| ln k`
    Log,
}

impl SequenceRule {
    pub fn zero() -> Self {
        Self { kind: RuleKind::Zero }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::param(format!("power exponent must be positive, got {p}")));
        }
        Ok(Self { kind: RuleKind::Power { p } })
    }

    pub fn log_power(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a < 0.0 {
            return Err(Error::param(format!("logpower needs a ≥ 0 and finite b, got a={a}, b={b}")));
        }
        if a == 0.0 && b <= 0.0 {
            return Err(Error::param("logpower with a = 0 needs b > 0 to be a null sequence"));
        }
        Ok(Self { kind: RuleKind::LogPower { a, b } })
    }

    pub fn geometric(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::param(format!("geometric ratio must lie in (0, 1), got {ratio}")));
        }
        Ok(Self { kind: RuleKind::Geometric { ratio } })
    }

    pub fn dyadic_block() -> Self {
        Self { kind: RuleKind::DyadicBlock }
    }

    /// Finite table `c_1..c_len` followed by zeros.
    pub fn table<I, T>(values: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Complex64>,
    {
        Self::table_with_zeroth(values, None)
    }

    pub fn table_with_zeroth<I, T>(values: I, zeroth: Option<Complex64>) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<Complex64>,
    {
        let values: Vec<Complex64> = values.into_iter().map(Into::into).collect();
        if values.iter().chain(zeroth.iter()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::param("table entries must be finite"));
        }
        Ok(Self {
            kind: RuleKind::Table { values, zeroth },
        })
    }

    /// A single coefficient `value` at index `index ≥ 1`, zero elsewhere.
    pub fn harmonic(index: u64, value: Complex64) -> Result<Self> {
        if index == 0 {
            return Err(Error::param("harmonic index must be at least 1"));
        }
        let len = usize::try_from(index).map_err(|_| Error::param("harmonic index too large"))?;
        let mut values = vec![Complex64::new(0.0, 0.0); len];
        values[len - 1] = value;
        Self::table(values)
    }

    pub fn scaled(self, factor: impl Into<Complex64>) -> Self {
        Self {
            kind: RuleKind::Scaled {
                factor: factor.into(),
                inner: Box::new(self),
            },
        }
    }

    pub fn plus(self, other: SequenceRule) -> Self {
        Self {
            kind: RuleKind::Sum(Box::new(self), Box::new(other)),
        }
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    /// `c_n` for `n ≥ 1`, or `c_0` where the rule defines one.
    pub fn eval(&self, n: u64) -> Result<Complex64> {
        if n == 0 {
            return self
                .zeroth()
                .ok_or_else(|| Error::domain(format!("rule `{self}` has no c_0")));
        }
        Ok(self.coeff(n))
    }

    /// `c_0` if the rule defines it.
    pub fn zeroth(&self) -> Option<Complex64> {
        match &self.kind {
            RuleKind::Zero => Some(Complex64::new(0.0, 0.0)),
            RuleKind::Table { zeroth, .. } => *zeroth,
            RuleKind::Scaled { factor, inner } => inner.zeroth().map(|z| factor * z),
            RuleKind::Sum(a, b) => Some(a.zeroth()? + b.zeroth()?),
            _ => None,
        }
    }

    /// `c_n` for `n ≥ 1`. Infallible; index 0 yields `c_0` or zero.
    #[inline]
    pub fn coeff(&self, n: u64) -> Complex64 {
        if n == 0 {
            return self.zeroth().unwrap_or_default();
        }
        match &self.kind {
            RuleKind::Zero => Complex64::new(0.0, 0.0),
            RuleKind::Table { values, .. } => usize::try_from(n - 1)
                .ok()
                .and_then(|i| values.get(i).copied())
                .unwrap_or_default(),
            RuleKind::Power { p } => Complex64::new((n as f64).powf(-p), 0.0),
            RuleKind::LogPower { a, b } => Complex64::new(log_power(*a, *b, n as f64), 0.0),
            RuleKind::Geometric { ratio } => Complex64::new(ratio.powf(n as f64), 0.0),
            RuleKind::DyadicBlock => Complex64::new(dyadic_block(n), 0.0),
            RuleKind::Scaled { factor, inner } => factor * inner.coeff(n),
            RuleKind::Sum(a, b) => a.coeff(n) + b.coeff(n),
        }
    }

    /// Coefficients `c_1..=c_len` as a vector indexed from 1 (slot 0 holds
    /// `c_0` or zero).
    pub fn coeffs(&self, len: u64) -> Vec<Complex64> {
        (0..=len).map(|n| self.coeff(n)).collect()
    }

    pub fn is_real(&self) -> bool {
        match &self.kind {
            RuleKind::Table { values, zeroth } => {
                values.iter().chain(zeroth.iter()).all(|z| z.im == 0.0)
            }
            RuleKind::Scaled { factor, inner } => factor.im == 0.0 && inner.is_real(),
            RuleKind::Sum(a, b) => a.is_real() && b.is_real(),
            _ => true,
        }
    }

    /// Index past which every coefficient is zero, if the rule is finite.
    pub fn support_end(&self) -> Option<u64> {
        match &self.kind {
            RuleKind::Zero => Some(0),
            RuleKind::Table { values, .. } => Some(values.len() as u64),
            RuleKind::Scaled { factor, inner } => {
                if *factor == Complex64::new(0.0, 0.0) {
                    Some(0)
                } else {
                    inner.support_end()
                }
            }
            RuleKind::Sum(a, b) => Some(a.support_end()?.max(b.support_end()?)),
            _ => None,
        }
    }

    /// Upper bound for `Σ_{k≥m} |Δc_k|`. Infinite when no bound is known.
    pub fn tail_variation_majorant(&self, m: u64) -> f64 {
        let m = m.max(1);
        match &self.kind {
            RuleKind::Zero => 0.0,
            RuleKind::Table { values, .. } => {
                let len = values.len() as u64;
                if m > len {
                    return 0.0;
                }
                let mut acc = CompensatedSum::new();
                for k in m..=len {
                    acc += (self.coeff(k) - self.coeff(k + 1)).norm();
                }
                acc.value()
            }
            RuleKind::Power { p } => (m as f64).powf(-p),
            RuleKind::LogPower { a, b } => {
                let (a, b) = (*a, *b);
                let mono = if b >= 0.0 {
                    1
                } else {
                    match ceil_index((-b / a).exp()) {
                        Some(k) => k,
                        None => return f64::INFINITY,
                    }
                };
                let start = m.max(mono);
                if mono > m && mono - m > SCAN_LIMIT {
                    return f64::INFINITY;
                }
                let mut acc = CompensatedSum::new();
                for k in m..mono {
                    acc += (log_power(a, b, k as f64) - log_power(a, b, (k + 1) as f64)).abs();
                }
                acc += log_power(a, b, start as f64);
                acc.value()
            }
            RuleKind::Geometric { ratio } => ratio.powf(m as f64),
            RuleKind::DyadicBlock => {
                // Jumps sit at n = 2^(j+1) - 1; each is at most a_j + a_{j+1}
                // with a_j ≤ 4^(-j), so the tail from block J on is ≤ (8/3)·4^(-J).
                let first = first_boundary_block(m);
                8.0 / 3.0 * 4f64.powi(-(first as i32))
            }
            RuleKind::Scaled { factor, inner } => scale_bound(factor.norm(), inner.tail_variation_majorant(m)),
            RuleKind::Sum(a, b) => a.tail_variation_majorant(m) + b.tail_variation_majorant(m),
        }
    }

    /// Upper bound for `sup_{k≥m} k |c_k|`.
    pub fn tail_weighted_majorant(&self, m: u64) -> f64 {
        self.sup_majorant(Weight::Linear, m)
    }

    /// Upper bound for `sup_{k≥m} |c_k| ln k`.
    pub fn tail_log_weighted_majorant(&self, m: u64) -> f64 {
        self.sup_majorant(Weight::Log, m)
    }

    pub fn sup_majorant(&self, weight: Weight, m: u64) -> f64 {
        let m = m.max(1);
        let w = |k: u64| match weight {
            Weight::Linear => k as f64,
            Weight::Log => (k as f64).ln(),
        };
        match &self.kind {
            RuleKind::Zero => 0.0,
            RuleKind::Table { values, .. } => (m..=values.len() as u64)
                .map(|k| w(k) * self.coeff(k).norm())
                .fold(0.0, f64::max),
            RuleKind::Power { p } => {
                let p = *p;
                match weight {
                    Weight::Linear if p > 1.0 => (m as f64).powf(1.0 - p),
                    Weight::Linear if p == 1.0 => 1.0,
                    Weight::Linear => f64::INFINITY,
                    Weight::Log => {
                        let mono = ceil_index((1.0 / p).exp());
                        sup_from(m, mono, |k| (k as f64).powf(-p) * (k as f64).ln())
                    }
                }
            }
            RuleKind::LogPower { a, b } => log_power_sup(*a, *b, weight, m),
            RuleKind::Geometric { ratio } => {
                let r = *ratio;
                let mono = ceil_index((-1.0 / r.ln()).max(3.0));
                sup_from(m, mono, |k| w(k) * r.powf(k as f64))
            }
            RuleKind::DyadicBlock => {
                let block = (63 - m.leading_zeros()) as i32;
                match weight {
                    // k·c_k < 2^(j+1)·4^(-j) = 2^(1-j) inside block j
                    Weight::Linear => 2f64.powi(1 - block),
                    // c_k ln k ≤ (j+1) ln 2 · 4^(-j), decreasing in j
                    Weight::Log => (block + 1) as f64 * LN_2 * 4f64.powi(-block),
                }
            }
            RuleKind::Scaled { factor, inner } => scale_bound(factor.norm(), inner.sup_majorant(weight, m)),
            RuleKind::Sum(a, b) => a.sup_majorant(weight, m) + b.sup_majorant(weight, m),
        }
    }

    /// Upper bound for `Σ_{k≥m} |c_k|`. Infinite for non-summable rules.
    pub fn tail_abs_majorant(&self, m: u64) -> f64 {
        let m = m.max(1);
        match &self.kind {
            RuleKind::Zero => 0.0,
            RuleKind::Table { values, .. } => {
                let len = values.len() as u64;
                (m..=len).map(|k| self.coeff(k).norm()).sum::<CompensatedSum>().value()
            }
            RuleKind::Power { p } => {
                let (p, mf) = (*p, m as f64);
                if p > 1.0 {
                    mf.powf(-p) + mf.powf(1.0 - p) / (p - 1.0)
                } else {
                    f64::INFINITY
                }
            }
            RuleKind::LogPower { a, b } => log_power_abs_tail(*a, *b, m),
            RuleKind::Geometric { ratio } => ratio.powf(m as f64) / (1.0 - ratio),
            RuleKind::DyadicBlock => {
                // block j holds 2^j terms of size ≤ 4^(-j)
                let block = (63 - m.leading_zeros()) as i32;
                2f64.powi(1 - block)
            }
            RuleKind::Scaled { factor, inner } => scale_bound(factor.norm(), inner.tail_abs_majorant(m)),
            RuleKind::Sum(a, b) => a.tail_abs_majorant(m) + b.tail_abs_majorant(m),
        }
    }

    /// Whether the closed form of the `weight` sup-majorant tends to zero.
    ///
    /// This is what certifies limits such as `k c_k → 0` when the majorant
    /// decays too slowly to drop below a numeric threshold at any
    /// representable index (e.g. `1/ln² k`).
    pub fn sup_majorant_vanishes(&self, weight: Weight) -> bool {
        match &self.kind {
            RuleKind::Zero | RuleKind::Table { .. } | RuleKind::Geometric { .. } | RuleKind::DyadicBlock => true,
            RuleKind::Power { p } => match weight {
                Weight::Linear => *p > 1.0,
                Weight::Log => true,
            },
            RuleKind::LogPower { a, b } => match weight {
                Weight::Linear => *a > 1.0 || (*a == 1.0 && *b > 0.0),
                Weight::Log => *a > 0.0 || *b > 1.0,
            },
            RuleKind::Scaled { factor, inner } => {
                *factor == Complex64::new(0.0, 0.0) || inner.sup_majorant_vanishes(weight)
            }
            RuleKind::Sum(a, b) => a.sup_majorant_vanishes(weight) && b.sup_majorant_vanishes(weight),
        }
    }
}

#[inline]
fn log_power(a: f64, b: f64, x: f64) -> f64 {
    x.powf(-a) * (x + 1.0).ln().powf(-b)
}

#[inline]
fn dyadic_block(n: u64) -> f64 {
    let j = (63 - n.leading_zeros()) as i32;
    if j % 2 == 0 {
        2f64.powi(-2 * j)
    } else {
        2f64.powi(-3 * j)
    }
}

/// First block `j` whose right boundary `2^(j+1) - 1` is at or after `m`.
fn first_boundary_block(m: u64) -> u32 {
    // smallest j with 2^(j+1) ≥ m + 1
    let target = m + 1;
    let bits = 64 - (target - 1).leading_zeros();
    bits.saturating_sub(1)
}

fn scale_bound(factor: f64, bound: f64) -> f64 {
    if factor == 0.0 {
        0.0
    } else {
        factor * bound
    }
}

fn ceil_index(x: f64) -> Option<u64> {
    if x.is_finite() && x < 1e18 {
        Some((x.ceil() as u64).max(1))
    } else {
        None
    }
}

/// `sup_{k≥m} f(k)` for an `f` that is nonincreasing from index `mono` on.
fn sup_from(m: u64, mono: Option<u64>, f: impl Fn(u64) -> f64) -> f64 {
    let Some(mono) = mono else {
        return f64::INFINITY;
    };
    if mono <= m {
        return f(m);
    }
    if mono - m > SCAN_LIMIT {
        return f64::INFINITY;
    }
    (m..=mono).map(f).fold(0.0, f64::max)
}

fn log_power_sup(a: f64, b: f64, weight: Weight, m: u64) -> f64 {
    let neg_b = (-b).max(0.0);
    match weight {
        Weight::Linear => {
            let g = |k: u64| (k as f64).powf(1.0 - a) * ((k + 1) as f64).ln().powf(-b);
            if a > 1.0 {
                let mono = if b >= 0.0 { Some(1) } else { ceil_index((neg_b / (a - 1.0)).exp()) };
                sup_from(m, mono, g)
            } else if a == 1.0 {
                if b > 0.0 {
                    g(m)
                } else if b == 0.0 {
                    1.0
                } else {
                    f64::INFINITY
                }
            } else {
                f64::INFINITY
            }
        }
        Weight::Log => {
            let h = |k: u64| log_power(a, b, k as f64) * (k as f64).ln();
            if a > 0.0 {
                sup_from(m, ceil_index(((1.0 + neg_b) / a).exp()), h)
            } else if b > 1.0 {
                // decreasing once (k+1) ln(k+1) ≤ b k ln k
                let ok = |k: u64| {
                    let (kf, k1) = (k as f64, (k + 1) as f64);
                    k1 * k1.ln() <= b * kf * kf.ln()
                };
                let mut hi = 2u64;
                while !ok(hi) {
                    hi = hi.saturating_mul(2);
                    if hi > 1 << 40 {
                        return f64::INFINITY;
                    }
                }
                sup_from(m, Some(hi), h)
            } else if b == 1.0 {
                1.0
            } else {
                f64::INFINITY
            }
        }
    }
}

fn log_power_abs_tail(a: f64, b: f64, m: u64) -> f64 {
    let mf = m as f64;
    if a > 1.0 {
        if b >= 0.0 {
            (mf + 1.0).ln().powf(-b) * (mf.powf(-a) + mf.powf(1.0 - a) / (a - 1.0))
        } else {
            // k^(-a) ln(k+1)^|b| = k^(-s) · [k^(-(a-1)/2) ln(k+1)^|b|], s = (a+1)/2
            let s = (a + 1.0) / 2.0;
            let half = (a - 1.0) / 2.0;
            let mono = ceil_index((-b / half).exp());
            let bracket = sup_from(m, mono, |k| (k as f64).powf(-half) * ((k + 1) as f64).ln().powf(-b));
            bracket * (mf.powf(-s) + mf.powf(1.0 - s) / (s - 1.0))
        }
    } else if a == 1.0 && b > 1.0 {
        // Σ_{k≥m} c_k ≤ c_m + ∫_m^∞ dx / (x ln^b x) for m ≥ 2
        let from = |m: u64| {
            let mf = m as f64;
            log_power(a, b, mf) + mf.ln().powf(1.0 - b) / (b - 1.0)
        };
        if m >= 2 {
            from(m)
        } else {
            log_power(a, b, 1.0) + from(2)
        }
    } else {
        f64::INFINITY
    }
}

impl fmt::Display for SequenceRule {
    /// Canonical rule-spec form, parseable by [`crate::seq::parse_rule`]
    /// (tables are written inline).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            RuleKind::Zero => write!(f, "zero"),
            RuleKind::Table { values, zeroth } => {
                write!(f, "table:")?;
                if let Some(z) = zeroth {
                    write!(f, "0={}|", fmt_complex(*z))?;
                }
                let parts: Vec<String> = values.iter().map(|z| fmt_complex(*z)).collect();
                write!(f, "{}", parts.join("|"))
            }
            RuleKind::Power { p } => write!(f, "power:p={p}"),
            RuleKind::LogPower { a, b } => write!(f, "logpower:a={a},b={b}"),
            RuleKind::Geometric { ratio } => write!(f, "geometric:r={ratio}"),
            RuleKind::DyadicBlock => write!(f, "dyadicblock"),
            RuleKind::Scaled { factor, inner } => {
                write!(f, "scale({},{};{inner})", factor.re, factor.im)
            }
            RuleKind::Sum(a, b) => write!(f, "sum({a};{b})"),
        }
    }
}

fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{},{}", z.re, z.im)
    }
}
