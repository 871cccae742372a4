//! Ground truth for the approximations: exact enumeration of all 2^n sign
//! patterns via a Gray-code subset-sum walk, and a seeded Monte Carlo
//! estimator whose replicates are derived counter-style so the result is
//! independent of thread count and execution order.
//!
//! The flip condition `mean(pi X) >= mean(X)` is equivalent to
//! `sum of flipped entries <= 0`, so enumeration walks subset sums. Subset
//! sums are held in an exact (Shewchuk-expansion) accumulator, which makes
//! the `>=`-with-ties count bit-exact and independent of the walk order.

use crate::cgf::Sample;
use crate::rng::SplitMix64;
use crate::signflip::SignFlipReport;
use crate::util::ExactSum;
use crate::SpaError;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Hard cap on exact enumeration: 2^30 patterns.
pub const MAX_EXACT_N: usize = 30;

/// z for a two-sided 99% Wilson interval.
const WILSON_Z99: f64 = 2.5758293035489004;

/// Exact enumeration result: `favorable / 2^n` as an exact rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactResult {
    pub favorable: u64,
    pub total: u64,
    /// Patterns with `sum(pi X) == sum(X)` exactly; counted as favorable.
    pub ties: u64,
}

impl ExactResult {
    pub fn p(&self) -> f64 {
        self.favorable as f64 / self.total as f64
    }
}

/// Seeded Monte Carlo estimate with a Wilson 99% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub p_hat: f64,
    pub hits: u64,
    pub b: u64,
    pub seed: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// SPA-versus-oracle comparison; `rel_err_* = p / p_oracle - 1`,
/// undefined (None) when the oracle p-value is zero.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonRow {
    pub n: usize,
    pub w: f64,
    pub p_lr: f64,
    pub p_rob: f64,
    pub p_oracle: f64,
    pub rel_err_lr: Option<f64>,
    pub rel_err_rob: Option<f64>,
    /// MC oracle CI wider than 10% of its point estimate.
    pub noisy_oracle: bool,
}

#[derive(Debug, Clone)]
pub enum OracleValue {
    Exact(ExactResult),
    Mc(McResult),
}

impl OracleValue {
    pub fn p(&self) -> f64 {
        match self {
            OracleValue::Exact(e) => e.p(),
            OracleValue::Mc(m) => m.p_hat,
        }
    }
}

/// Walks one Gray-code block: the membership of the top `xs.len() - m`
/// elements is fixed by `prefix`, the low `m` elements are enumerated.
fn enumerate_block(xs: &[f64], prefix: u64, m: usize) -> (u64, u64) {
    let mut acc = ExactSum::new();
    for (j, &x) in xs[m..].iter().enumerate() {
        if prefix >> j & 1 == 1 {
            acc.add(x);
        }
    }
    let mut favorable = 0u64;
    let mut ties = 0u64;
    let sign = acc.sign();
    if sign <= 0 {
        favorable += 1;
        if sign == 0 {
            ties += 1;
        }
    }
    let mut gray_prev = 0u64;
    for i in 1u64..(1u64 << m) {
        let gray = i ^ (i >> 1);
        let flipped_bit = (gray ^ gray_prev).trailing_zeros() as usize;
        gray_prev = gray;
        let x = xs[flipped_bit];
        if gray >> flipped_bit & 1 == 1 {
            acc.add(x);
        } else {
            acc.sub(x);
        }
        let sign = acc.sign();
        if sign <= 0 {
            favorable += 1;
            if sign == 0 {
                ties += 1;
            }
        }
    }
    (favorable, ties)
}

fn enumeration_split(n: usize) -> (usize, usize) {
    // low bits walked per block, high bits spread across blocks
    let m = n.min(14);
    (m, n - m)
}

/// Exact p-value by full enumeration of all 2^n sign patterns; n <= 30.
pub fn exact_enumeration(sample: &Sample) -> Result<ExactResult, SpaError> {
    let n = sample.len();
    if n > MAX_EXACT_N {
        return Err(SpaError::EnumerationTooLarge { n, max: MAX_EXACT_N });
    }
    let xs = sample.values();
    let (m, k) = enumeration_split(n);
    let blocks = 1u64 << k;

    #[cfg(feature = "parallel")]
    let (favorable, ties) = (0..blocks)
        .into_par_iter()
        .map(|prefix| enumerate_block(xs, prefix, m))
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    #[cfg(not(feature = "parallel"))]
    let (favorable, ties) = (0..blocks)
        .map(|prefix| enumerate_block(xs, prefix, m))
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    Ok(ExactResult {
        favorable,
        total: 1u64 << n,
        ties,
    })
}

/// Sequential variant, kept public for benchmarking the parallel split.
/// Produces identical counts by construction.
pub fn exact_enumeration_seq(sample: &Sample) -> Result<ExactResult, SpaError> {
    let n = sample.len();
    if n > MAX_EXACT_N {
        return Err(SpaError::EnumerationTooLarge { n, max: MAX_EXACT_N });
    }
    let xs = sample.values();
    let (m, k) = enumeration_split(n);
    let (mut favorable, mut ties) = (0u64, 0u64);
    for prefix in 0..(1u64 << k) {
        let (f, t) = enumerate_block(xs, prefix, m);
        favorable += f;
        ties += t;
    }
    Ok(ExactResult {
        favorable,
        total: 1u64 << n,
        ties,
    })
}

/// One Monte Carlo replicate: signs derived from `(seed, k)`, flip-sum
/// accumulated with Neumaier compensation.
fn replicate_hit(xs: &[f64], seed: u64, k: u64) -> bool {
    let mut rng = SplitMix64::derive(seed, &[0x6d63, k]);
    let mut word = 0u64;
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        if i % 64 == 0 {
            word = rng.next_u64();
        }
        if word >> (i % 64) & 1 == 1 {
            let t = sum + x;
            if sum.abs() >= x.abs() {
                comp += (sum - t) + x;
            } else {
                comp += (x - t) + sum;
            }
            sum = t;
        }
    }
    sum + comp <= 0.0
}

fn wilson_interval(hits: u64, b: u64, z: f64) -> (f64, f64) {
    let n = b as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Seeded Monte Carlo p-value over `b` sign-flip replicates.
pub fn mc_pvalue(sample: &Sample, b: u64, seed: u64) -> Result<McResult, SpaError> {
    if b == 0 {
        return Err(SpaError::InvalidArgument("b must be >= 1".into()));
    }
    let xs = sample.values();

    #[cfg(feature = "parallel")]
    let hits: u64 = (0..b)
        .into_par_iter()
        .map(|k| replicate_hit(xs, seed, k) as u64)
        .sum();

    #[cfg(not(feature = "parallel"))]
    let hits: u64 = (0..b).map(|k| replicate_hit(xs, seed, k) as u64).sum();

    let (ci_low, ci_high) = wilson_interval(hits, b, WILSON_Z99);
    Ok(McResult {
        p_hat: hits as f64 / b as f64,
        hits,
        b,
        seed,
        ci_low,
        ci_high,
    })
}

/// Sequential variant for benchmarking; bit-identical to `mc_pvalue`.
pub fn mc_pvalue_seq(sample: &Sample, b: u64, seed: u64) -> Result<McResult, SpaError> {
    if b == 0 {
        return Err(SpaError::InvalidArgument("b must be >= 1".into()));
    }
    let xs = sample.values();
    let hits: u64 = (0..b).map(|k| replicate_hit(xs, seed, k) as u64).sum();
    let (ci_low, ci_high) = wilson_interval(hits, b, WILSON_Z99);
    Ok(McResult {
        p_hat: hits as f64 / b as f64,
        hits,
        b,
        seed,
        ci_low,
        ci_high,
    })
}

/// Assembles an SPA-versus-oracle comparison row.
pub fn compare(report: &SignFlipReport, oracle: &OracleValue) -> ComparisonRow {
    let p_oracle = oracle.p();
    let rel = |p: f64| {
        if p_oracle > 0.0 {
            Some(p / p_oracle - 1.0)
        } else {
            None
        }
    };
    let noisy_oracle = match oracle {
        OracleValue::Mc(m) => m.ci_high - m.ci_low > 0.1 * m.p_hat,
        OracleValue::Exact(_) => false,
    };
    ComparisonRow {
        n: report.n,
        w: report.w,
        p_lr: report.p_lr.value(),
        p_rob: report.p_rob.value(),
        p_oracle,
        rel_err_lr: rel(report.p_lr.value()),
        rel_err_rob: rel(report.p_rob.value()),
        noisy_oracle,
    }
}
