//! The standardized saddlepoint `lambda`, the signed likelihood root `r`,
//! and the two tail formulas (Lugannani-Rice and Robinson) with
//! cancellation-safe evaluation and the exact zero conventions.

use crate::special::{mills_scaled, normal_pdf, normal_sf, Probability};
use crate::SpaError;

/// Below this |r| the Lugannani-Rice value is blended toward 1/2; the
/// formula is continuous in the limit but its floating-point evaluation
/// is not.
const R_BLEND: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RBranch {
    /// `s w - K(s) >= 0`: the square root applies.
    Normal,
    /// `s w - K(s) < 0`: r falls back to sgn(s).
    DegenerateSign,
}

impl RBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            RBranch::Normal => "normal",
            RBranch::DegenerateSign => "degenerate_sign",
        }
    }
}

/// Pooled quantities at the saddlepoint, ready for the tail formulas.
#[derive(Debug, Clone, Copy)]
pub struct SpaInputs {
    pub s_hat: f64,
    pub w: f64,
    /// K_n(s_hat)
    pub k_at_s: f64,
    /// K_n''(s_hat), nonnegative
    pub k2_at_s: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct SpaResult {
    pub lambda: f64,
    pub r: f64,
    pub p_lr: Probability,
    pub p_rob: Probability,
    pub r_branch: RBranch,
    /// The w = 0 convention fired (lambda = r = 0, both p-values 1/2).
    pub zero_branch: bool,
    /// Either formula had to be clamped into [0, 1].
    pub clamped: bool,
}

/// `lambda = s sqrt(n K''(s))`; `r = sgn(s) sqrt(2n(s w - K(s)))` when the
/// radicand is nonnegative, else `r = sgn(s)`.
pub fn compute_lambda_r(inputs: &SpaInputs) -> Result<(f64, f64, RBranch), SpaError> {
    let SpaInputs { s_hat, w, k_at_s, k2_at_s, n } = *inputs;
    if !s_hat.is_finite() || !w.is_finite() || !k_at_s.is_finite() || !k2_at_s.is_finite() {
        return Err(SpaError::InvalidArgument("non-finite SPA inputs".into()));
    }
    if n == 0 || k2_at_s < 0.0 {
        return Err(SpaError::InvalidArgument(
            "SPA inputs need n >= 1 and K'' >= 0".into(),
        ));
    }
    if s_hat == 0.0 {
        return Ok((0.0, 0.0, RBranch::Normal));
    }
    let nf = n as f64;
    let lambda = s_hat * (nf * k2_at_s).sqrt();
    let radicand = s_hat * w - k_at_s;
    let sign = if s_hat > 0.0 { 1.0 } else { -1.0 };
    if radicand >= 0.0 {
        Ok((lambda, sign * (2.0 * nf * radicand).sqrt(), RBranch::Normal))
    } else {
        Ok((lambda, sign, RBranch::DegenerateSign))
    }
}

fn check_signs(lambda: f64, r: f64, zero: bool) -> Result<(), SpaError> {
    if zero {
        return Ok(());
    }
    // lambda r < 0 (or exactly one of them vanishing) signals an upstream
    // inconsistency; the paper's sign lemma excludes it.
    if lambda * r < 0.0 || (lambda == 0.0) != (r == 0.0) {
        return Err(SpaError::SignMismatch { lambda, r });
    }
    Ok(())
}

/// Lugannani-Rice tail formula `1 - Phi(r) + phi(r)(1/lambda - 1/r)`.
///
/// `zero` selects the w = 0 convention (exactly 1/2). The difference of
/// reciprocals is evaluated as `(r - lambda)/(lambda r)`, and for
/// `0 < |r| < 1e-4` the value is interpolated linearly in r between 1/2 and
/// the formula at |r| = 1e-4 (lambda rescaled proportionally).
pub fn lugannani_rice(lambda: f64, r: f64, zero: bool) -> Result<(Probability, bool), SpaError> {
    check_signs(lambda, r, zero)?;
    if zero || (lambda == 0.0 && r == 0.0) {
        return Ok((Probability::new(0.5).unwrap(), false));
    }
    if r.abs() < R_BLEND {
        let scale = R_BLEND / r.abs();
        let (anchor, clamped) = lr_formula(lambda * scale, r * scale)?;
        let t = r.abs() / R_BLEND;
        let v = 0.5 + t * (anchor.value() - 0.5);
        let (p, c2) = Probability::new_clamped(v)?;
        return Ok((p, clamped || c2));
    }
    lr_formula(lambda, r)
}

fn lr_formula(lambda: f64, r: f64) -> Result<(Probability, bool), SpaError> {
    let correction = normal_pdf(r) * ((r - lambda) / (lambda * r));
    Probability::new_clamped(normal_sf(r).value() + correction)
}

/// Robinson's tail formula `exp((lambda^2 - r^2)/2) (1 - Phi(lambda))`,
/// evaluated as `exp(-r^2/2) * h(lambda)` so nothing overflows.
pub fn robinson(lambda: f64, r: f64, zero: bool) -> Result<(Probability, bool), SpaError> {
    check_signs(lambda, r, zero)?;
    if zero || (lambda == 0.0 && r == 0.0) {
        return Ok((Probability::new(0.5).unwrap(), false));
    }
    if lambda == r {
        // The exponent cancels algebraically; take the identical route the
        // Lugannani-Rice formula takes so the two agree bit-for-bit.
        return lugannani_rice(lambda, r, false);
    }
    let v = (-0.5 * r * r).exp() * mills_scaled(lambda).value();
    Probability::new_clamped(v)
}

/// Convenience wrapper producing the full result from pooled inputs.
pub fn spa_tail(inputs: &SpaInputs) -> Result<SpaResult, SpaError> {
    let (lambda, r, r_branch) = compute_lambda_r(inputs)?;
    let zero = inputs.s_hat == 0.0;
    let (p_lr, c1) = lugannani_rice(lambda, r, zero)?;
    let (p_rob, c2) = robinson(lambda, r, zero)?;
    Ok(SpaResult {
        lambda,
        r,
        p_lr,
        p_rob,
        r_branch,
        zero_branch: zero,
        clamped: c1 || c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn lambda_r_zero_saddle() {
        let inputs = SpaInputs { s_hat: 0.0, w: 0.0, k_at_s: 0.0, k2_at_s: 1.0, n: 10 };
        assert_eq!(compute_lambda_r(&inputs).unwrap(), (0.0, 0.0, RBranch::Normal));
    }

    #[test]
    fn lambda_r_arithmetic() {
        let inputs = SpaInputs { s_hat: 0.2, w: 0.1, k_at_s: 0.008, k2_at_s: 1.0, n: 100 };
        let (lambda, r, branch) = compute_lambda_r(&inputs).unwrap();
        assert_eq!(lambda, 2.0);
        assert!(rel_err(r, 1.5491933384829668) < 1e-14);
        assert_eq!(branch, RBranch::Normal);
    }

    #[test]
    fn r_degenerate_sign_branch() {
        let inputs = SpaInputs { s_hat: 0.5, w: 0.1, k_at_s: 0.2, k2_at_s: 3.0, n: 7 };
        let (_, r, branch) = compute_lambda_r(&inputs).unwrap();
        assert_eq!(r, 1.0);
        assert_eq!(branch, RBranch::DegenerateSign);
    }

    #[test]
    fn zero_convention_exact_half() {
        let (p, _) = lugannani_rice(0.0, 0.0, true).unwrap();
        assert_eq!(p.value(), 0.5);
        let (p, _) = robinson(0.0, 0.0, true).unwrap();
        assert_eq!(p.value(), 0.5);
    }

    #[test]
    fn equal_lambda_r_collapses_to_sf() {
        let (lr, _) = lugannani_rice(1.0, 1.0, false).unwrap();
        assert!(rel_err(lr.value(), 0.15865525393145705) < 1e-12);
        let (rob, _) = robinson(1.0, 1.0, false).unwrap();
        assert_eq!(lr.value(), rob.value());
        // and on the negative diagonal
        let (a, _) = lugannani_rice(-2.5, -2.5, false).unwrap();
        let (b, _) = robinson(-2.5, -2.5, false).unwrap();
        assert_eq!(a.value(), b.value());
    }

    #[test]
    fn frozen_lr_and_robinson_values() {
        // lambda = 2, r = sqrt(2.4)
        let r = 1.5491933384829668;
        let (lr, _) = lugannani_rice(2.0, r, false).unwrap();
        assert!(rel_err(lr.value(), 0.04318480881096465) < 1e-12);
        let (rob, _) = robinson(2.0, r, false).unwrap();
        assert!(rel_err(rob.value(), 0.05063134977927690) < 1e-12);
    }

    #[test]
    fn complement_identity() {
        for &(lambda, r) in &[(0.5, 0.4), (1.0, 1.2), (2.0, 1.55), (3.5, 3.0)] {
            let (p, _) = lugannani_rice(lambda, r, false).unwrap();
            let (q, _) = lugannani_rice(-lambda, -r, false).unwrap();
            assert!((p.value() + q.value() - 1.0).abs() < 1e-12, "({lambda},{r})");
        }
    }

    #[test]
    fn sign_mismatch_rejected() {
        assert!(lugannani_rice(1.0, -1.0, false).is_err());
        assert!(lugannani_rice(0.0, 1.0, false).is_err());
        assert!(lugannani_rice(1.0, 0.0, false).is_err());
        assert!(robinson(-1.0, 2.0, false).is_err());
    }

    #[test]
    fn small_r_blend_is_continuous_and_bounded() {
        // approach r -> 0+ along lambda = r: values must drift to 1/2
        let mut prev = 0.5;
        for &r in &[1e-9, 1e-7, 1e-5, 5e-5, 1e-4, 1e-3] {
            let (p, _) = lugannani_rice(r, r, false).unwrap();
            let v = p.value();
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-12, "not approaching 1/2 from below: r={r}");
            prev = v;
        }
        // continuity at the blend boundary, along a coherent path where
        // lambda - r = O(r^2) as for genuine saddle outputs
        let path = |r: f64| lugannani_rice(r * (1.0 + r), r, false).unwrap().0.value();
        let lo = path(0.99999e-4);
        let hi = path(1.00001e-4);
        assert!((lo - hi).abs() < 1e-4, "lo={lo} hi={hi}");
    }

    #[test]
    fn spa_tail_zero_branch() {
        let inputs = SpaInputs { s_hat: 0.0, w: 0.0, k_at_s: 0.0, k2_at_s: 2.0, n: 4 };
        let out = spa_tail(&inputs).unwrap();
        assert!(out.zero_branch);
        assert_eq!(out.p_lr.value(), 0.5);
        assert_eq!(out.p_rob.value(), 0.5);
    }
}
