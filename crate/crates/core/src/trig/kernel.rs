//! Dirichlet-type kernels and the conjugate sine sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::grid::{norms, GridSpec};
use crate::fit::FittedConstant;

/// Below this `|x|` the kernels switch to their limit/series forms.
pub const X_TINY: f64 = 1e-8;

/// `Σ_{k=1}^{n} sin kx` via `sin(nx/2)·sin((n+1)x/2)/sin(x/2)`; zero where
/// `sin(x/2)` vanishes. For `0 < |x| ≤ π` the value is bounded by `π/|x|`.
pub fn sin_sum(n: u64, x: f64) -> f64 {
    let s = (0.5 * x).sin();
    if s == 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    (0.5 * nf * x).sin() * (0.5 * (nf + 1.0) * x).sin() / s
}

/// `π/|x|`, the uniform bound on `|sin_sum(n, x)|` for `0 < |x| ≤ π`.
pub fn sin_sum_bound(x: f64) -> f64 {
    PI / x.abs()
}

/// `D_k(x) = sin((2k+1)x/2) / (2 sin(x/2))`, with the limit `k + 1/2`
/// near zero.
pub fn dirichlet(k: u64, x: f64) -> f64 {
    if x.abs() < X_TINY {
        return k as f64 + 0.5;
    }
    let kf = k as f64;
    ((kf + 0.5) * x).sin() / (2.0 * (0.5 * x).sin())
}

/// The modified conjugate kernel `D_k*`, with branch cut at
/// `|x| = 1/n_threshold` (the tie goes to the outer branch):
///
/// * `|x| < 1/n`: `(cos(x/2) - cos((2k+1)x/2)) / (2 sin(x/2))`, evaluated as
///   `sin((k+1)x/2)·sin(kx/2)/sin(x/2)` to avoid cancellation;
/// * `|x| ≥ 1/n`: `-cos((2k+1)x/2) / (2 sin(x/2))`.
pub fn dirichlet_star(k: u64, x: f64, n_threshold: u64) -> f64 {
    let kf = k as f64;
    let inner = x.abs() < 1.0 / n_threshold.max(1) as f64;
    if inner {
        if x.abs() < X_TINY {
            return 0.5 * kf * (kf + 1.0) * x;
        }
        (0.5 * (kf + 1.0) * x).sin() * (0.5 * kf * x).sin() / (0.5 * x).sin()
    } else {
        -((kf + 0.5) * x).cos() / (2.0 * (0.5 * x).sin())
    }
}

/// `E_k = D_k + i D_k*`.
pub fn complex_kernel(k: u64, x: f64, n_threshold: u64) -> Complex64 {
    Complex64::new(dirichlet(k, x), dirichlet_star(k, x, n_threshold))
}

/// Largest residuals of `E_k(±x) - E_{k-1}(±x) = e^{±ikx}` and
/// `E_k(x) + E_k(-x) = 2 D_k(x)` over `1 ≤ k ≤ kmax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub kmax: u64,
    pub n_threshold: u64,
    pub points: usize,
    pub difference: f64,
    pub symmetry: f64,
}

/// Checks the kernel identities on `points` (only `|x| > 1/n_threshold`
/// is used, away from the branch cut).
pub fn identity_residuals(kmax: u64, points: &[f64], n_threshold: u64) -> IdentityResiduals {
    let cut = 1.0 / n_threshold.max(1) as f64;
    let xs: Vec<f64> = points.iter().copied().filter(|x| x.abs() > cut).collect();
    let (difference, symmetry) = xs
        .par_iter()
        .map(|&x| {
            let mut diff: f64 = 0.0;
            let mut sym: f64 = 0.0;
            for sx in [x, -x] {
                let mut prev = complex_kernel(0, sx, n_threshold);
                for k in 1..=kmax {
                    let cur = complex_kernel(k, sx, n_threshold);
                    let expected = Complex64::cis(k as f64 * sx);
                    diff = diff.max((cur - prev - expected).norm());
                    prev = cur;
                }
            }
            for k in 0..=kmax {
                let lhs = complex_kernel(k, x, n_threshold) + complex_kernel(k, -x, n_threshold);
                sym = sym.max((lhs - 2.0 * dirichlet(k, x)).norm());
            }
            (diff, sym)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    IdentityResiduals {
        kmax,
        n_threshold,
        points: xs.len(),
        difference,
        symmetry,
    }
}

/// `‖E_k‖_L` and `‖D_k‖_L` over `[-π, π]` with branch cut at `1/k`.
///
/// Both moduli are even, so the integral is taken on `[0, π]` with at least
/// 32 points per oscillation of `D_k`.
pub fn kernel_l1_norms(k: u64) -> (f64, f64) {
    let base = (64 * k as usize).max(4096) + 1;
    let grid = GridSpec::half(base)
        .and_then(|g| g.with_extra([1.0 / k.max(1) as f64]))
        .expect("valid grid")
        .realize();
    let n = k.max(1);
    let e: Vec<f64> = grid.points.iter().map(|&x| complex_kernel(k, x, n).norm()).collect();
    let d: Vec<f64> = grid.points.iter().map(|&x| dirichlet(k, x).abs()).collect();
    (norms(&grid, &e, true).l1, norms(&grid, &d, true).l1)
}

/// `(‖E_k‖_L + ‖D_k‖_L) / ln k` over `ks`, with its fitted constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelLogFit {
    pub samples: Vec<(u64, f64)>,
    pub fitted: FittedConstant,
}

pub fn kernel_log_fit(ks: &[u64]) -> KernelLogFit {
    let samples: Vec<(u64, f64)> = ks
        .par_iter()
        .filter(|&&k| k >= 2)
        .map(|&k| {
            let (e, d) = kernel_l1_norms(k);
            (k, (e + d) / (k as f64).ln())
        })
        .collect();
    let fitted = FittedConstant::fit(&samples);
    KernelLogFit { samples, fitted }
}
