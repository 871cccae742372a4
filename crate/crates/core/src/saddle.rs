//! Safeguarded-Newton solver for the saddlepoint equation `K_n'(s) = w`
//! on `[-eps/2, eps/2]`, with explicit fallback semantics when the solution
//! set is empty (w outside the attainable range of K') or not a singleton
//! (K' flat at the root).
//!
//! The solve runs on `|w|` over `[0, eps/2]` and the sign is applied at the
//! end, so `solve(p, -w).s_hat == -solve(p, w).s_hat` holds exactly for
//! even pooled CGFs.

use crate::cgf::PooledCgf;
use crate::SpaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleStatus {
    /// w = 0, so s_hat = 0 exactly (K'(0) = 0).
    Zero,
    /// Unique interior root, converged to tolerance.
    InteriorUnique,
    /// w outside [K'(-eps/2), K'(eps/2)]: empty solution set,
    /// s_hat = sgn(w) * eps/2.
    BoundaryFallback,
    /// K'' below the flatness threshold at the root: non-singleton solution
    /// set, s_hat = sgn(w) * eps/2.
    FlatFallback,
}

impl SaddleStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SaddleStatus::Zero => "zero",
            SaddleStatus::InteriorUnique => "interior_unique",
            SaddleStatus::BoundaryFallback => "boundary_fallback",
            SaddleStatus::FlatFallback => "flat_fallback",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SaddleConfig {
    /// Residual tolerance, scaled by max(1, |w|).
    pub tol_residual: f64,
    /// Bracket-width tolerance.
    pub tol_s: f64,
    pub max_iter: usize,
    /// Flatness threshold on K'' at the root.
    pub eta_flat: f64,
}

impl Default for SaddleConfig {
    fn default() -> Self {
        SaddleConfig {
            tol_residual: 1e-12,
            tol_s: 1e-13,
            max_iter: 200,
            eta_flat: 1e-12,
        }
    }
}

impl SaddleConfig {
    fn validate(&self) -> Result<(), SpaError> {
        if self.tol_residual > 0.0 && self.tol_s > 0.0 && self.eta_flat > 0.0 && self.max_iter > 0 {
            Ok(())
        } else {
            Err(SpaError::InvalidArgument(
                "saddle tolerances must be positive".into(),
            ))
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SaddleSolution {
    pub s_hat: f64,
    pub status: SaddleStatus,
    /// |K'(s_hat) - w| at the returned point.
    pub residual: f64,
    pub iterations: usize,
    /// K'' vanished identically on the interval (all-zero pool) while w != 0.
    pub degenerate: bool,
}

/// Solves `K_n'(s) = w` on `[-eps/2, eps/2]`.
pub fn solve_saddlepoint(
    pool: &PooledCgf,
    w: f64,
    cfg: &SaddleConfig,
) -> Result<SaddleSolution, SpaError> {
    cfg.validate()?;
    if !w.is_finite() {
        return Err(SpaError::InvalidArgument("w must be finite".into()));
    }
    let half = 0.5 * pool.epsilon;

    // The w = 0 branch is exact: K'(0) = 0 by construction.
    if w == 0.0 {
        let e0 = pool.eval(0.0)?;
        return Ok(SaddleSolution {
            s_hat: 0.0,
            status: SaddleStatus::Zero,
            residual: e0.k1.abs(),
            iterations: 0,
            degenerate: false,
        });
    }

    let sign = if w > 0.0 { 1.0 } else { -1.0 };
    let aw = w.abs();
    let e0 = pool.eval(0.0)?;
    let eh = pool.eval(half)?;
    let degenerate = e0.k2 == 0.0 && eh.k2 == 0.0 && eh.k1 == 0.0;

    // Empty solution set: w beyond the attainable range of K'.
    if aw > eh.k1 {
        return Ok(SaddleSolution {
            s_hat: sign * half,
            status: SaddleStatus::BoundaryFallback,
            residual: (eh.k1 - aw).abs(),
            iterations: 0,
            degenerate,
        });
    }

    // Bracket [a, b] with K'(a) - aw <= 0 <= K'(b) - aw, invariant throughout.
    let mut a = 0.0_f64;
    let mut b = half;
    let tol_res = cfg.tol_residual * aw.max(1.0);

    // Newton start from the small-tilt linearization when usable.
    let mut s = if e0.k2 > cfg.eta_flat {
        (aw / e0.k2).clamp(0.0, half)
    } else {
        0.5 * half
    };
    if s <= a || s >= b {
        s = 0.5 * (a + b);
    }

    let mut iterations = 0usize;
    let mut last = pool.eval(s)?;
    loop {
        iterations += 1;
        let f = last.k1 - aw;
        if f.abs() <= tol_res {
            break;
        }
        if f < 0.0 {
            a = s;
        } else {
            b = s;
        }
        if b - a <= cfg.tol_s {
            break;
        }
        if iterations >= cfg.max_iter {
            return Err(SpaError::IterationBudget {
                best: sign * 0.5 * (a + b),
            });
        }
        // Newton step, accepted only strictly inside the bracket and only
        // where K'' carries signal; otherwise bisect.
        let newton = if last.k2 >= cfg.eta_flat {
            s - f / last.k2
        } else {
            f64::NAN
        };
        s = if newton.is_finite() && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        last = pool.eval(s)?;
    }

    // Non-singleton solution set: the root sits in a flat segment of K'.
    if last.k2 < cfg.eta_flat {
        let ehr = pool.eval(half)?;
        return Ok(SaddleSolution {
            s_hat: sign * half,
            status: SaddleStatus::FlatFallback,
            residual: (ehr.k1 - aw).abs(),
            iterations,
            degenerate,
        });
    }

    Ok(SaddleSolution {
        s_hat: sign * s,
        status: SaddleStatus::InteriorUnique,
        residual: (last.k1 - aw).abs(),
        iterations,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgf::Sample;

    fn pool(xs: &[f64]) -> PooledCgf {
        PooledCgf::from_signflip_sample(&Sample::new(xs.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn zero_threshold() {
        let p = pool(&[1.0, -1.0, 2.0, -2.0]);
        let sol = solve_saddlepoint(&p, 0.0, &SaddleConfig::default()).unwrap();
        assert_eq!(sol.s_hat, 0.0);
        assert_eq!(sol.status, SaddleStatus::Zero);
    }

    #[test]
    fn boundary_fallback_when_w_unattainable() {
        // sup K' on [-1, 1] = (3 tanh 3 + 3 tanh 1)/4 ~ 1.3175 < 1.5
        let p = pool(&[3.0, 1.0, 1.0, 1.0]);
        let sol = solve_saddlepoint(&p, 1.5, &SaddleConfig::default()).unwrap();
        assert_eq!(sol.s_hat, 1.0);
        assert_eq!(sol.status, SaddleStatus::BoundaryFallback);
        let neg = solve_saddlepoint(&p, -1.5, &SaddleConfig::default()).unwrap();
        assert_eq!(neg.s_hat, -1.0);
    }

    #[test]
    fn interior_root_hits_residual_tolerance() {
        let xs = [1.5, -1.0, 0.5, -0.5, 1.0, -1.2];
        let p = pool(&xs);
        let w = 0.05; // = mean(xs)
        let sol = solve_saddlepoint(&p, w, &SaddleConfig::default()).unwrap();
        assert_eq!(sol.status, SaddleStatus::InteriorUnique);
        assert!(sol.residual <= 1e-12);
        // independent high-iteration bisection oracle on the same K'
        let mut a = 0.0;
        let mut b = 1.0;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if p.eval(m).unwrap().k1 < w {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((sol.s_hat - 0.5 * (a + b)).abs() <= 1e-10);
    }

    #[test]
    fn sign_law_and_odd_symmetry() {
        let p = pool(&[0.7, 1.3, -0.4, 2.2, 0.1]);
        for &w in &[0.05, 0.3, 0.8, 1.2, 5.0] {
            let plus = solve_saddlepoint(&p, w, &SaddleConfig::default()).unwrap();
            let minus = solve_saddlepoint(&p, -w, &SaddleConfig::default()).unwrap();
            assert!(plus.s_hat >= 0.0 && minus.s_hat <= 0.0);
            assert_eq!(minus.s_hat, -plus.s_hat, "w={w}");
            assert_eq!(minus.status, plus.status);
        }
    }

    #[test]
    fn flat_fallback_on_vanishing_curvature() {
        // K'' ~ 1e-14 everywhere, below the default flatness threshold,
        // with w inside the attainable range.
        let p = pool(&[1e-7, 1e-7]);
        let sup = p.eval(1.0).unwrap().k1;
        let sol = solve_saddlepoint(&p, 0.5 * sup, &SaddleConfig::default()).unwrap();
        assert_eq!(sol.status, SaddleStatus::FlatFallback);
        assert_eq!(sol.s_hat, 1.0);
    }

    #[test]
    fn degenerate_pool_flagged() {
        let p = pool(&[0.0, 0.0, 0.0]);
        let sol = solve_saddlepoint(&p, 0.1, &SaddleConfig::default()).unwrap();
        assert_eq!(sol.status, SaddleStatus::BoundaryFallback);
        assert!(sol.degenerate);
        assert_eq!(sol.s_hat, 1.0);
    }

    #[test]
    fn rejects_non_finite_w() {
        let p = pool(&[1.0]);
        assert!(solve_saddlepoint(&p, f64::NAN, &SaddleConfig::default()).is_err());
        assert!(solve_saddlepoint(&p, f64::INFINITY, &SaddleConfig::default()).is_err());
    }
}
