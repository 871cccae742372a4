//! Conditional cumulant generating functions with derivatives, pooling, and
//! exponential-tilting moments.
//!
//! Two summand families are provided: the sign-flip family
//! `K(s) = log cosh(s x)` and a generic mean-zero finite-support family.
//! Pooling averages per-summand CGFs: `K_n(s) = (1/n) sum K_i(s)`.
//!
//! All sign-flip evaluations are routed through `|s x|` so that K is exactly
//! even and K' exactly odd in floating point, which the saddle solver relies
//! on for its exact odd-symmetry guarantee.

use crate::util::{compensated_mean, compensated_sum};
use crate::SpaError;

const LN_2: f64 = std::f64::consts::LN_2;

/// The observed data; plays the role of the conditioning information.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
}

impl Sample {
    pub fn new(x: Vec<f64>) -> Result<Self, SpaError> {
        if x.is_empty() {
            return Err(SpaError::InvalidArgument("sample must be nonempty".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SpaError::NonFiniteData);
        }
        Ok(Sample { x })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        false // constructor rejects empty samples
    }

    /// Compensated-summation mean; the observed statistic of the test.
    pub fn mean(&self) -> f64 {
        compensated_mean(&self.x)
    }

    pub fn is_degenerate(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0)
    }

    pub fn negated(&self) -> Sample {
        Sample {
            x: self.x.iter().map(|&v| -v).collect(),
        }
    }
}

/// Values of K, K', K'' at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfEval {
    pub k: f64,
    pub k1: f64,
    /// Variance of the tilted law; nonnegative.
    pub k2: f64,
}

/// `K(s) = log cosh(s x)` for a single sign-flipped observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignFlipCgf {
    pub x: f64,
    pub epsilon: f64,
}

impl SignFlipCgf {
    pub fn new(x: f64) -> Result<Self, SpaError> {
        if !x.is_finite() {
            return Err(SpaError::NonFiniteData);
        }
        Ok(SignFlipCgf { x, epsilon: 2.0 })
    }

    pub fn eval(&self, s: f64) -> Result<CgfEval, SpaError> {
        check_domain(s, self.epsilon)?;
        let y = s * self.x;
        let a = y.abs();
        let k = logcosh(y);
        // tanh and sech^2 from exp(-2|y|); the naive exp(2 s x) form
        // overflows once 2 s x > 709.
        let e = (-2.0 * a).exp();
        let t_abs = -(-2.0 * a).exp_m1() / (1.0 + e);
        let t = if y < 0.0 { -t_abs } else { t_abs };
        let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
        Ok(CgfEval {
            k,
            k1: self.x * t,
            k2: self.x * self.x * sech2,
        })
    }

    /// Third and fourth cumulants at 0: (0, -2 x^4). The two-point law
    /// +-x is symmetric (zero skew) with excess kurtosis -2.
    pub fn higher_at_zero(&self) -> (f64, f64) {
        let x2 = self.x * self.x;
        (0.0, -2.0 * x2 * x2)
    }
}

/// A mean-zero law on finitely many atoms, with a user-chosen CGF
/// domain half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSupportCgf {
    atoms: Vec<(f64, f64)>,
    pub epsilon: f64,
}

impl FiniteSupportCgf {
    /// Validates: probabilities positive and summing to 1 (1e-12), atom
    /// values finite, mean zero within 1e-10 absolute.
    pub fn new(atoms: Vec<(f64, f64)>, epsilon: f64) -> Result<Self, SpaError> {
        if atoms.is_empty() || !(epsilon > 0.0) {
            return Err(SpaError::InvalidArgument(
                "finite-support CGF needs atoms and epsilon > 0".into(),
            ));
        }
        if atoms.iter().any(|&(v, p)| !v.is_finite() || !(p > 0.0)) {
            return Err(SpaError::InvalidArgument(
                "atom values must be finite with positive probabilities".into(),
            ));
        }
        let total = compensated_sum(atoms.iter().map(|&(_, p)| p));
        if (total - 1.0).abs() > 1e-12 {
            return Err(SpaError::InvalidArgument(format!(
                "atom probabilities sum to {total}, not 1"
            )));
        }
        let mean = compensated_sum(atoms.iter().map(|&(v, p)| v * p));
        if mean.abs() > 1e-10 {
            return Err(SpaError::InvalidArgument(format!(
                "atom law has mean {mean}, not 0"
            )));
        }
        Ok(FiniteSupportCgf { atoms, epsilon })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Largest absolute atom value.
    pub fn support_radius(&self) -> f64 {
        self.atoms.iter().map(|&(v, _)| v.abs()).fold(0.0, f64::max)
    }

    pub fn eval(&self, s: f64) -> Result<CgfEval, SpaError> {
        check_domain(s, self.epsilon)?;
        // Max-shifted log-sum-exp; tilted weights reused for the moments.
        let m = self
            .atoms
            .iter()
            .map(|&(v, _)| s * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = self.atoms.iter().map(|&(v, p)| p * (s * v - m).exp()).sum();
        let k = m + z.ln();
        let mean: f64 = self
            .atoms
            .iter()
            .map(|&(v, p)| v * p * (s * v - m).exp())
            .sum::<f64>()
            / z;
        let var: f64 = self
            .atoms
            .iter()
            .map(|&(v, p)| {
                let d = v - mean;
                d * d * p * (s * v - m).exp()
            })
            .sum::<f64>()
            / z;
        Ok(CgfEval { k, k1: mean, k2: var })
    }
}

/// A per-summand conditional CGF of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum SummandCgf {
    SignFlip(SignFlipCgf),
    FiniteSupport(FiniteSupportCgf),
}

impl SummandCgf {
    pub fn eval(&self, s: f64) -> Result<CgfEval, SpaError> {
        match self {
            SummandCgf::SignFlip(c) => c.eval(s),
            SummandCgf::FiniteSupport(c) => c.eval(s),
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            SummandCgf::SignFlip(c) => c.epsilon,
            SummandCgf::FiniteSupport(c) => c.epsilon,
        }
    }
}

/// Mean and variance of the exponentially tilted summand law: (K'(s), K''(s)).
pub fn tilted_moments(c: &SummandCgf, s: f64) -> Result<(f64, f64), SpaError> {
    let e = c.eval(s)?;
    Ok((e.k1, e.k2))
}

/// The pooled CGF `K_n(s) = (1/n) sum K_i(s)` over summands with a
/// common domain half-width.
#[derive(Debug, Clone)]
pub struct PooledCgf {
    summands: Vec<SummandCgf>,
    pub epsilon: f64,
}

impl PooledCgf {
    pub fn new(summands: Vec<SummandCgf>) -> Result<Self, SpaError> {
        let epsilon = match summands.first() {
            None => {
                return Err(SpaError::InvalidArgument(
                    "pooled CGF needs at least one summand".into(),
                ))
            }
            Some(c) => c.epsilon(),
        };
        if summands.iter().any(|c| c.epsilon() != epsilon) {
            return Err(SpaError::InvalidArgument(
                "pooled summands must share a common epsilon".into(),
            ));
        }
        Ok(PooledCgf { summands, epsilon })
    }

    /// Sign-flip pool for an observed sample.
    pub fn from_signflip_sample(sample: &Sample) -> Result<Self, SpaError> {
        let summands = sample
            .values()
            .iter()
            .map(|&x| SignFlipCgf::new(x).map(SummandCgf::SignFlip))
            .collect::<Result<Vec<_>, _>>()?;
        PooledCgf::new(summands)
    }

    pub fn n(&self) -> usize {
        self.summands.len()
    }

    pub fn summands(&self) -> &[SummandCgf] {
        &self.summands
    }

    pub fn eval(&self, s: f64) -> Result<CgfEval, SpaError> {
        check_domain(s, self.epsilon)?;
        let mut ks = Vec::with_capacity(self.summands.len());
        let mut k1s = Vec::with_capacity(self.summands.len());
        let mut k2s = Vec::with_capacity(self.summands.len());
        for c in &self.summands {
            let e = c.eval(s)?;
            ks.push(e.k);
            k1s.push(e.k1);
            k2s.push(e.k2);
        }
        Ok(CgfEval {
            k: compensated_mean(&ks),
            k1: compensated_mean(&k1s),
            k2: compensated_mean(&k2s),
        })
    }
}

fn check_domain(s: f64, epsilon: f64) -> Result<(), SpaError> {
    if !s.is_finite() || s.abs() >= epsilon {
        return Err(SpaError::OutsideDomain { s, epsilon });
    }
    Ok(())
}

/// `log cosh(y)`, overflow-free and accurate for all finite y.
///
/// Small |y| uses `log1p(2 sinh^2(y/2))` (no cancellation); large |y| the
/// asymptote `|y| - log 2 + log1p(exp(-2|y|))`.
pub fn logcosh(y: f64) -> f64 {
    let a = y.abs();
    if a < 1.0 {
        let sh = (0.5 * y).sinh();
        (2.0 * sh * sh).ln_1p()
    } else {
        a - LN_2 + (-2.0 * a).exp().ln_1p()
    }
}
