//! End-to-end sign-flipping test: data in, saddlepoint-approximated p-value
//! out, alongside the CLT baseline and moment diagnostics.

use crate::cgf::{PooledCgf, Sample};
use crate::saddle::{solve_saddlepoint, SaddleConfig, SaddleStatus};
use crate::special::{normal_sf, Probability};
use crate::tail::{spa_tail, RBranch, SpaInputs};
use crate::util::compensated_mean;
use crate::SpaError;

/// Sample moment summaries mirroring the theorem's population conditions.
/// Purely informational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// (1/n) sum X^2
    pub m2: f64,
    /// (1/n) sum X^4
    pub m4: f64,
    /// All observations exactly zero.
    pub degenerate: bool,
    /// max |X|; the support radius of the flipped summands.
    pub nu_max: f64,
}

#[derive(Debug, Clone)]
pub struct SignFlipReport {
    pub n: usize,
    /// Observed statistic: the compensated-summation sample mean.
    pub w: f64,
    pub s_hat: f64,
    pub lambda: f64,
    pub r: f64,
    pub p_lr: Probability,
    pub p_rob: Probability,
    pub p_clt: Probability,
    pub saddle_status: SaddleStatus,
    pub r_branch: RBranch,
    pub clamped: bool,
    pub diag: Diagnostics,
}

/// Moment summaries for a sample; never fails.
pub fn diagnostics(sample: &Sample) -> Diagnostics {
    let n = sample.len() as f64;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut nu_max = 0.0_f64;
    for &x in sample.values() {
        let x2 = x * x;
        m2 += x2;
        m4 += x2 * x2;
        nu_max = nu_max.max(x.abs());
    }
    Diagnostics {
        m2: m2 / n,
        m4: m4 / n,
        degenerate: sample.is_degenerate(),
        nu_max,
    }
}

/// Conditional-CLT baseline: `1 - Phi(sqrt(n / m2) * w)`.
pub fn clt_pvalue(sample: &Sample) -> Result<Probability, SpaError> {
    if sample.is_degenerate() {
        return Err(SpaError::DegenerateSample);
    }
    let d = diagnostics(sample);
    let w = sample.mean();
    let z = (sample.len() as f64 / d.m2).sqrt() * w;
    Ok(normal_sf(z))
}

/// The saddlepoint-approximated one-sided p-value
/// `P[ (1/n) sum pi_i X_i >= (1/n) sum X_i | data ]`.
pub fn spa_pvalue(sample: &Sample, cfg: &SaddleConfig) -> Result<SignFlipReport, SpaError> {
    if sample.is_degenerate() {
        return Err(SpaError::DegenerateSample);
    }
    let diag = diagnostics(sample);
    let n = sample.len();
    let w = compensated_mean(sample.values());
    let pool = PooledCgf::from_signflip_sample(sample)?;
    let sol = solve_saddlepoint(&pool, w, cfg)?;
    let at_s = pool.eval(sol.s_hat)?;
    let inputs = SpaInputs {
        s_hat: sol.s_hat,
        w,
        k_at_s: at_s.k,
        k2_at_s: at_s.k2,
        n,
    };
    let tail = spa_tail(&inputs)?;
    let p_clt = clt_pvalue(sample)?;
    Ok(SignFlipReport {
        n,
        w,
        s_hat: sol.s_hat,
        lambda: tail.lambda,
        r: tail.r,
        p_lr: tail.p_lr,
        p_rob: tail.p_rob,
        p_clt,
        saddle_status: sol.status,
        r_branch: tail.r_branch,
        clamped: tail.clamped,
        diag,
    })
}
