use num_complex::Complex64;

use super::SequenceRule;
use crate::sum::CompensatedSum;

/// Precomputed `|c_n|` and `|Δc_n|` up to a fixed index, with range sums of
/// `|Δc_n|` answered by a segment tree.
///
/// All stored partial sums are sums of nonnegative terms, so a range query
/// never subtracts: a block of exact zeros comes back as exactly zero and
/// the relative error stays at a few ulps regardless of how small the block
/// is compared to the head of the sequence. Prefix-sum differences would
/// not have that property.
#[derive(Debug, Clone)]
pub struct VariationTable {
    /// `coeffs[n] = c_n` for `0 ≤ n ≤ len + 1`.
    coeffs: Vec<Complex64>,
    len: u64,
    size: usize,
    tree: Vec<f64>,
}

impl VariationTable {
    /// Table covering `|Δc_n|` for `1 ≤ n ≤ len` (so `c_n` up to `len + 1`).
    pub fn new(seq: &SequenceRule, len: u64) -> Self {
        let coeffs = seq.coeffs(len + 1);
        let size = (len as usize + 1).next_power_of_two();
        let mut tree = vec![0.0; 2 * size];
        for n in 1..=len as usize {
            tree[size + n] = (coeffs[n] - coeffs[n + 1]).norm();
        }
        for i in (1..size).rev() {
            tree[i] = tree[2 * i] + tree[2 * i + 1];
        }
        Self { coeffs, len, size, tree }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `c_n` for `n ≤ len + 1`.
    #[inline]
    pub fn coeff(&self, n: u64) -> Complex64 {
        self.coeffs[n as usize]
    }

    #[inline]
    pub fn abs_delta(&self, n: u64) -> f64 {
        self.tree[self.size + n as usize]
    }

    /// `Σ_{n=lo}^{hi} |Δc_n|` for `1 ≤ lo ≤ hi ≤ len`.
    pub fn range(&self, lo: u64, hi: u64) -> f64 {
        assert!(lo >= 1 && lo <= hi && hi <= self.len, "range [{lo}, {hi}] outside table");
        let mut acc = CompensatedSum::new();
        let mut l = lo as usize + self.size;
        let mut r = hi as usize + self.size + 1;
        while l < r {
            if l & 1 == 1 {
                acc += self.tree[l];
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                acc += self.tree[r];
            }
            l >>= 1;
            r >>= 1;
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::block_variation;

    #[test]
    fn tree_matches_direct_sums() {
        let rules = [
            SequenceRule::dyadic_block(),
            SequenceRule::power(1.5).unwrap(),
            SequenceRule::table([3.0, 1.0, 2.0, 0.0, 0.5]).unwrap(),
        ];
        for rule in &rules {
            let table = VariationTable::new(rule, 700);
            for lo in (1..=350u64).step_by(7) {
                for hi in [lo, lo + 1, 2 * lo, 700] {
                    let direct = block_variation(rule, lo, hi).unwrap();
                    let fast = table.range(lo, hi);
                    assert!(
                        (direct - fast).abs() <= 1e-14 * direct.max(1e-300),
                        "{rule} [{lo},{hi}]: {direct} vs {fast}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_blocks_are_exactly_zero() {
        let table = VariationTable::new(&SequenceRule::dyadic_block(), 1 << 10);
        assert_eq!(table.range(64, 126), 0.0);
        assert_eq!(table.range(32, 64), 7.0 / 32768.0);
    }
}
