//! Adaptive Simpson quadrature and a bracketing bisection.

use crate::error::{Error, Result};

/// Absolute tolerance used by every quadrature in the crate unless overridden.
pub const QUAD_TOL: f64 = 1e-10;
/// Maximum recursion depth of the adaptive Simpson rule.
pub const MAX_DEPTH: u32 = 40;

#[derive(Debug, Clone, Copy)]
pub struct Simpson {
    pub abs_tol: f64,
    pub max_depth: u32,
}

impl Default for Simpson {
    fn default() -> Self {
        Simpson {
            abs_tol: QUAD_TOL,
            max_depth: MAX_DEPTH,
        }
    }
}

impl Simpson {
    /// Integrates `f` over `[a, b]`. A reversed interval yields the negated value.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let fa = f(a);
        let fb = f(b);
        let m = 0.5 * (a + b);
        let fm = f(m);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let v = step(&mut f, a, b, fa, fm, fb, whole, self.abs_tol, self.max_depth);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteQuadrature)
        }
    }

    /// Integrates over consecutive intervals between `breaks`, summing the pieces.
    pub fn integrate_pieces<F: FnMut(f64) -> f64>(&self, mut f: F, breaks: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            total += self.integrate(&mut f, w[0], w[1])?;
        }
        Ok(total)
    }
}

#[allow(clippy::too_many_arguments)]
fn step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Below a few ulps of the running value the tolerance cannot be met anyway.
    let floor = 8.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) || !delta.is_finite() || lm == a || rm == b
    {
        return left + right + delta / 15.0;
    }
    step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates with the default rule.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    Simpson::default().integrate(f, a, b)
}

/// Bisection on a bracket with `f(lo)` and `f(hi)` of opposite sign (or one of
/// them zero), until the bracket is narrower than `width`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, width: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || !flo.is_finite() || !fhi.is_finite() {
        return Err(Error::BracketNotFound);
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_and_transcendentals() {
        assert!((integrate(|x| x * x, 0.0, 3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((integrate(f64::sin, 0.0, PI).unwrap() - 2.0).abs() < 1e-10);
        assert!((integrate(f64::exp, 0.0, 10.0).unwrap() - (10f64.exp() - 1.0)).abs() < 1e-8);
        assert!((integrate(|x| x, 2.0, 0.0).unwrap() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn kinked_integrand() {
        let v = integrate(|x: f64| x.abs(), -1.0, 2.0).unwrap();
        assert!((v - 2.5).abs() < 1e-9);
    }

    #[test]
    fn non_finite_is_reported() {
        assert!(integrate(|_| f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn bisection_finds_root() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
