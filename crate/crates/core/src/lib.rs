//! Saddlepoint approximations for sign-flip resampling tests.
//!
//! Replaces resampling with conditional saddlepoint tail approximations:
//! solve `K_n'(s) = w` on the pooled conditional CGF, form the standardized
//! saddlepoint `lambda` and signed likelihood root `r`, and evaluate the
//! Lugannani-Rice and Robinson tail formulas. Exact-enumeration and seeded
//! Monte Carlo oracles validate every approximation.
//!
//! With the default `parallel` feature, enumeration blocks and Monte Carlo
//! replicates run on rayon; results are bit-identical to the sequential
//! build because all randomness is derived counter-style per replicate.

pub mod cgf;
pub mod oracle;
pub mod rng;
pub mod saddle;
pub mod signflip;
pub mod special;
pub mod tail;
pub mod util;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaError {
    #[error("probability out of range or NaN: {0}")]
    InvalidProbability(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("data contain non-finite values")]
    NonFiniteData,
    #[error("degenerate sample: all observations are zero")]
    DegenerateSample,
    #[error("tilt s={s} outside CGF domain (-{epsilon}, {epsilon})")]
    OutsideDomain { s: f64, epsilon: f64 },
    #[error("adaptive quadrature failed for lambda={lambda}, tol={tol}")]
    QuadratureFailed { lambda: f64, tol: f64 },
    #[error("saddle iteration budget exhausted; best bracket midpoint {best}")]
    IterationBudget { best: f64 },
    #[error("inconsistent tail signs: lambda={lambda}, r={r}")]
    SignMismatch { lambda: f64, r: f64 },
    #[error("exact enumeration capped at n={max}, got n={n}")]
    EnumerationTooLarge { n: usize, max: usize },
}

pub use cgf::{
    logcosh, tilted_moments, CgfEval, FiniteSupportCgf, PooledCgf, Sample, SignFlipCgf, SummandCgf,
};
pub use oracle::{
    compare, exact_enumeration, mc_pvalue, ComparisonRow, ExactResult, McResult, OracleValue,
};
pub use saddle::{solve_saddlepoint, SaddleConfig, SaddleSolution, SaddleStatus};
pub use signflip::{clt_pvalue, diagnostics, spa_pvalue, Diagnostics, SignFlipReport};
pub use special::{gauss_tail_integral, mills_scaled, normal_pdf, normal_sf, MillsValue, Probability};
pub use tail::{compute_lambda_r, lugannani_rice, robinson, spa_tail, RBranch, SpaInputs, SpaResult};

/// Caps the global rayon pool at `threads` workers. Call once at startup;
/// later calls after the pool exists are ignored. No-op in sequential builds.
#[cfg(feature = "parallel")]
pub fn init_threads(threads: Option<usize>) {
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn init_threads(_threads: Option<usize>) {}
