//! The sequence model: closed-form coefficient rules with tail majorants,
//! two-sided sequences, forward differences and sector membership.

mod rule;
mod spec;
mod two_sided;
mod variation;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

pub use rule::{RuleKind, SequenceRule, Weight};
pub use spec::{parse_neg_rule, parse_rule, NegSpec};
pub use two_sided::TwoSidedSeq;
pub use variation::VariationTable;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

/// Slack added to the sector half-angle when testing membership.
pub const SECTOR_TOLERANCE: f64 = 1e-12;

/// Half-angle `θ₀ ∈ [0, π/2)` of the closed sector `{z : |arg z| ≤ θ₀}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct SectorAngle(f64);

impl SectorAngle {
    pub fn new(theta0: f64) -> Result<Self> {
        if (0.0..FRAC_PI_2).contains(&theta0) {
            Ok(Self(theta0))
        } else {
            Err(Error::param(format!("sector angle must lie in [0, π/2), got {theta0}")))
        }
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// `1 / cos θ₀`: every `z` in the sector has `|z| ≤ Re z / cos θ₀`.
    pub fn sector_constant(self) -> f64 {
        1.0 / self.0.cos()
    }

    /// Smallest sector holding every listed value, if one exists.
    pub fn enclosing<I: IntoIterator<Item = Complex64>>(values: I) -> Option<Self> {
        let widest = values
            .into_iter()
            .filter(|z| *z != Complex64::new(0.0, 0.0))
            .map(|z| z.arg().abs())
            .fold(0.0, f64::max);
        Self::new(widest).ok()
    }
}

/// `z = 0` or `|arg z| ≤ θ₀` (up to [`SECTOR_TOLERANCE`]).
pub fn in_sector(z: Complex64, sector: SectorAngle) -> bool {
    z == Complex64::new(0.0, 0.0) || z.arg().abs() <= sector.0 + SECTOR_TOLERANCE
}

/// Forward difference `Δc_n = c_n - c_{n+1}`.
pub fn delta(seq: &SequenceRule, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::domain("differences are indexed from n = 1"));
    }
    Ok(seq.coeff(n) - seq.coeff(n + 1))
}

/// `Σ_{n=m}^{upper} |Δc_n|`, compensated. `c_0` never enters.
pub fn block_variation(seq: &SequenceRule, m: u64, upper: u64) -> Result<f64> {
    if m == 0 || upper < m {
        return Err(Error::param(format!("block_variation needs 1 ≤ m ≤ M, got m={m}, M={upper}")));
    }
    let mut acc = CompensatedSum::new();
    let mut prev = seq.coeff(m);
    for n in m..=upper {
        let next = seq.coeff(n + 1);
        acc += (prev - next).norm();
        prev = next;
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use proptest::prelude::*;

    use super::*;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn delta_examples() {
        let p1 = SequenceRule::power(1.0).unwrap();
        assert!((delta(&p1, 4).unwrap() - re(1.0 / 20.0)).norm() < 1e-16);

        let d = SequenceRule::dyadic_block();
        assert_eq!(delta(&d, 63).unwrap(), re(-7.0 / 32768.0));

        let flat = SequenceRule::table(vec![5.0; 10]).unwrap();
        assert_eq!(delta(&flat, 3).unwrap(), re(0.0));
        assert!(delta(&flat, 0).is_err());
    }

    #[test]
    fn block_variation_examples() {
        let p1 = SequenceRule::power(1.0).unwrap();
        let v = block_variation(&p1, 4, 8).unwrap();
        assert!((v - 5.0 / 36.0).abs() < 1e-15);

        let d = SequenceRule::dyadic_block();
        assert_eq!(block_variation(&d, 32, 64).unwrap(), 7.0 / 32768.0);

        let single = block_variation(&p1, 6, 6).unwrap();
        assert_eq!(single, delta(&p1, 6).unwrap().norm());

        assert!(block_variation(&p1, 5, 4).is_err());
        assert!(block_variation(&p1, 0, 4).is_err());
    }

    #[test]
    fn sector_examples() {
        assert!(in_sector(re(1.0), SectorAngle::new(0.0).unwrap()));
        assert!(!in_sector(Complex64::new(0.0, 1.0), SectorAngle::new(FRAC_PI_4).unwrap()));
        assert!(in_sector(Complex64::new(1.0, 1.0), SectorAngle::new(FRAC_PI_4).unwrap()));
        assert!(in_sector(re(0.0), SectorAngle::new(0.0).unwrap()));
        assert!(SectorAngle::new(FRAC_PI_2).is_err());
        assert!(SectorAngle::new(-0.1).is_err());
        assert!(SectorAngle::enclosing([re(-1.0)]).is_none());
    }

    fn sector_point() -> impl Strategy<Value = (f64, Complex64)> {
        (0.0..1.5f64, -1.0..1.0f64, 0.0..10.0f64).prop_map(|(theta, t, r)| {
            let arg = theta * t;
            (theta, Complex64::from_polar(r, arg))
        })
    }

    proptest! {
        #[test]
        fn sector_closed_under_addition((theta, a) in sector_point(), s in -1.0..1.0f64, r in 0.0..10.0f64) {
            let sector = SectorAngle::new(theta).unwrap();
            let b = Complex64::from_polar(r, theta * s);
            prop_assert!(in_sector(a, sector));
            prop_assert!(in_sector(a + b, sector));
        }

        #[test]
        fn sector_modulus_dominated_by_real_part((theta, z) in sector_point()) {
            let sector = SectorAngle::new(theta).unwrap();
            prop_assert!(z.norm() <= z.re * sector.sector_constant() * (1.0 + 1e-12) + 1e-300);
        }

        #[test]
        fn telescoping_for_decreasing_rules(p in 0.2..4.0f64, m in 1u64..2000, len in 0u64..2000) {
            let rule = SequenceRule::power(p).unwrap();
            let upper = m + len;
            let v = block_variation(&rule, m, upper).unwrap();
            let exact = rule.coeff(m).re - rule.coeff(upper + 1).re;
            prop_assert!((v - exact).abs() <= 1e-12 * exact.abs().max(1e-300));
        }
    }

    #[test]
    fn sector_angle_pi_boundary() {
        // arg(-1) = π is outside every admissible sector
        let widest = SectorAngle::new(FRAC_PI_2 - 1e-9).unwrap();
        assert!(!in_sector(re(-1.0), widest));
        assert!(in_sector(Complex64::from_polar(1.0, PI / 3.0), widest));
    }
}
