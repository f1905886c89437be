use std::fmt;

use num_complex::Complex64;

use super::SequenceRule;

/// Coefficients `c_k` for all integer `k`: `pos` covers `k ≥ 0` (it owns
/// `c_0`), `neg` covers `k = -1, -2, ...`.
///
/// When the negative side is a fixed multiple of the positive side
/// (`c_{-k} = λ c_k`, as for sine and cosine series) the pair remembers `λ`
/// so that `c_k ± c_{-k}` are exact scalings of `pos`, with matching
/// majorants.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedSeq {
    pos: SequenceRule,
    neg: SequenceRule,
    mirror: Option<Complex64>,
}

impl TwoSidedSeq {
    pub fn new(pos: SequenceRule, neg: SequenceRule) -> Self {
        Self { pos, neg, mirror: None }
    }

    /// `c_{-k} = factor · c_k` for `k ≥ 1`.
    pub fn mirrored(pos: SequenceRule, factor: impl Into<Complex64>) -> Self {
        let factor = factor.into();
        let neg = pos.clone().scaled(factor);
        Self {
            pos,
            neg,
            mirror: Some(factor),
        }
    }

    /// Only nonnegative frequencies.
    pub fn one_sided(pos: SequenceRule) -> Self {
        Self {
            pos,
            neg: SequenceRule::zero(),
            mirror: Some(Complex64::new(0.0, 0.0)),
        }
    }

    /// `Σ b_k sin kx`, i.e. `c_k = b_k / (2i)` and `c_{-k} = -c_k`.
    pub fn sine_series(b: SequenceRule) -> Self {
        Self::mirrored(b.scaled(Complex64::new(0.0, -0.5)), -1.0)
    }

    /// `a_0 + Σ a_k cos kx`, i.e. `c_{±k} = a_k / 2`; `c_0 = a_0` when the rule
    /// defines it.
    pub fn cosine_series(a: SequenceRule) -> Self {
        let zeroth = a.zeroth();
        let half = match zeroth {
            // keep c_0 = a_0 rather than a_0 / 2
            Some(z) if z != Complex64::new(0.0, 0.0) => {
                let halved = a.clone().scaled(0.5);
                halved.plus(zeroth_only(z * 0.5))
            }
            _ => a.scaled(0.5),
        };
        Self::mirrored(half, 1.0)
    }

    pub fn pos(&self) -> &SequenceRule {
        &self.pos
    }

    pub fn neg(&self) -> &SequenceRule {
        &self.neg
    }

    pub fn mirror(&self) -> Option<Complex64> {
        self.mirror
    }

    /// `c_0`; rules without one contribute no constant term.
    pub fn zeroth(&self) -> Complex64 {
        self.pos.zeroth().unwrap_or_default()
    }

    /// `c_n` for any integer `n`.
    #[inline]
    pub fn eval(&self, n: i64) -> Complex64 {
        if n > 0 {
            self.pos.coeff(n as u64)
        } else if n < 0 {
            self.neg.coeff(n.unsigned_abs())
        } else {
            self.zeroth()
        }
    }

    /// `c_n + c_{-n}` for `n ≥ 1`.
    pub fn symmetric_sum(&self, n: u64) -> Complex64 {
        self.pos.coeff(n) + self.neg.coeff(n)
    }

    /// `{c_n + c_{-n}}` as a rule (index 0 is `2 c_0`).
    pub fn symmetric_rule(&self) -> SequenceRule {
        match self.mirror {
            Some(l) => self.pos.clone().scaled(l + 1.0),
            None => self.pos.clone().plus(self.neg.clone()),
        }
    }

    /// `{c_n - c_{-n}}` as a rule.
    pub fn antisymmetric_rule(&self) -> SequenceRule {
        match self.mirror {
            Some(l) => self.pos.clone().scaled(Complex64::new(1.0, 0.0) - l),
            None => self.pos.clone().plus(self.neg.clone().scaled(-1.0)),
        }
    }

    /// Index past which both sides vanish, if finite.
    pub fn support_end(&self) -> Option<u64> {
        Some(self.pos.support_end()?.max(self.neg.support_end()?))
    }
}

/// A rule that is zero for `n ≥ 1` with the given `c_0`.
fn zeroth_only(c0: Complex64) -> SequenceRule {
    SequenceRule::table_with_zeroth(std::iter::empty::<Complex64>(), Some(c0))
        .expect("finite c_0")
}

impl fmt::Display for TwoSidedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mirror {
            Some(l) if l == Complex64::new(0.0, 0.0) => write!(f, "pos={} neg=zero", self.pos),
            Some(l) => write!(f, "pos={} neg=mirror:{},{}", self.pos, l.re, l.im),
            None => write!(f, "pos={} neg={}", self.pos, self.neg),
        }
    }
}
