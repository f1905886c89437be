//! Evaluation of trigonometric series, Dirichlet-type kernels and grid
//! norms.

pub mod grid;
pub mod kernel;
pub mod series;

pub use grid::{critical_points, norms, Domain, Grid, GridSpec, Norms, DEFAULT_FULL_POINTS, DEFAULT_HALF_POINTS};
pub use kernel::{
    complex_kernel, dirichlet, dirichlet_star, identity_residuals, kernel_l1_norms, kernel_log_fit, sin_sum, sin_sum_bound,
    IdentityResiduals, KernelLogFit, X_TINY,
};
pub use series::{
    abel_tail, delayed_gap, delayed_gap_eval, delayed_mean, function_eval, modulus_is_even, natural_domain,
    partial_sum, partial_sum_eval, reference_order, sine_partial, tail_bound, tail_evals, AbelTail, Estimate,
    SeriesEval,
};
