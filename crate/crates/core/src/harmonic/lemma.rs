use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::curve::{PiecewiseCurve, Segment};
use crate::error::{Error, Result};
use crate::quad::{bisect, Simpson};

/// Angles of the coarse scan for `θ_R`.
pub const SCAN_ANGLES: usize = 256;
/// Angles of the refined scan.
pub const REFINED_ANGLES: usize = 4096;
/// Bracket width at which the bisection stops.
pub const ANGLE_WIDTH: f64 = 1e-12;
/// `|θ₀ − θ_R|` below which the three-piece curve is used.
pub const SAME_ANGLE: f64 = 1e-9;
/// Parameter at which the loop sits at `p`.
pub const T0: f64 = 0.5;

/// `|(1/n) Σ F(c + R e^{2πik/n}) − F(c)|`.
pub fn mean_value_defect<F: Fn(f64, f64) -> f64>(f: &F, center: [f64; 2], r: f64, n: usize) -> f64 {
    let mean = (0..n)
        .map(|k| {
            let t = TAU * k as f64 / n as f64;
            f(center[0] + r * t.cos(), center[1] + r * t.sin())
        })
        .sum::<f64>()
        / n as f64;
    (mean - f(center[0], center[1])).abs()
}

/// `I_R(θ) = ∫₀^R F(r e^{iθ}) dr`.
pub fn radial_integral<F: Fn(f64, f64) -> f64>(f: &F, r: f64, theta: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    Simpson::default().integrate(|t| f(t * c, t * s), 0.0, r)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThetaR {
    pub theta: f64,
    /// `I_R(θ_R)`.
    pub residual: f64,
    /// Max `|I_R|` over the scan.
    pub max_sampled: f64,
    /// True when `I_R` vanished at every scanned angle.
    pub degenerate: bool,
}

fn scan<F: Fn(f64, f64) -> f64 + Sync>(f: &F, r: f64, n: usize) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|k| radial_integral(f, r, TAU * k as f64 / n as f64))
        .collect()
}

/// Scale of `F` on the disc, from samples on two circles.
fn disc_scale<F: Fn(f64, f64) -> f64>(f: &F, r: f64) -> f64 {
    let mut m: f64 = f(0.0, 0.0).abs();
    for k in 0..64 {
        let t = TAU * k as f64 / 64.0;
        for rr in [0.5 * r, r] {
            m = m.max(f(rr * t.cos(), rr * t.sin()).abs());
        }
    }
    m
}

/// Angle with `I_R(θ_R) = 0`: first sign change of a 256-angle scan refined by
/// bisection, or 0 when `I_R` vanishes on the whole scan.
pub fn find_theta_r<F: Fn(f64, f64) -> f64 + Sync>(f: &F, r: f64) -> Result<ThetaR> {
    let zero = 1e-10 * r * (1.0 + disc_scale(f, r));
    for n in [SCAN_ANGLES, REFINED_ANGLES] {
        let vals = scan(f, r, n)?;
        let max_sampled = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if max_sampled <= zero {
            return Ok(ThetaR {
                theta: 0.0,
                residual: vals[0],
                max_sampled,
                degenerate: true,
            });
        }
        let step = TAU / n as f64;
        for k in 0..n {
            let a = vals[k];
            let b = vals[(k + 1) % n];
            let lo = k as f64 * step;
            let theta = if a == 0.0 {
                lo
            } else if a.signum() != b.signum() {
                bisect(
                    |t| radial_integral(f, r, t).unwrap_or(f64::NAN),
                    lo,
                    lo + step,
                    ANGLE_WIDTH,
                )?
            } else {
                continue;
            };
            let theta = theta.rem_euclid(TAU);
            return Ok(ThetaR {
                theta,
                residual: radial_integral(f, r, theta)?,
                max_sampled,
                degenerate: false,
            });
        }
        if n == REFINED_ANGLES {
            let (k, v) = vals
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("nonempty scan");
            if v.abs() <= zero {
                return Ok(ThetaR {
                    theta: k as f64 * step,
                    residual: *v,
                    max_sampled,
                    degenerate: false,
                });
            }
        }
    }
    Err(Error::BracketNotFound)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `θ₀ = θ_R`: out along the ray, hold, back.
    SameAngle,
    /// Counter-clockwise arc from `θ_R` to `θ₀`.
    ArcForward,
    /// Clockwise arc from `θ_R + 2π` down to `θ₀`.
    ArcBackward,
}

/// Loop through `p` built from `θ_R`.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCurve {
    pub curve: PiecewiseCurve,
    pub theta_r: ThetaR,
    /// Angle of `p`, lifted into `(θ_R, θ_R + 2π)` on the arc branches.
    pub theta0: f64,
    pub branch: Branch,
    pub t0: f64,
    pub radius: f64,
    pub p: [f64; 2],
    /// `∫ F(γ)` over the arc used (zero on the same-angle branch).
    pub arc_integral: f64,
}

/// Builds the loop `z` with `z(0) = z(1) = 0`, `z(1/2) = p`,
/// `∫F(z) ≥ F(p)/5` and `∫‖ż‖² ≤ 50π²R²`, for `F` harmonic with `F(0) = 0`.
pub fn build_lemma_curve<F: Fn(f64, f64) -> f64 + Sync>(f: &F, r: f64, p: [f64; 2]) -> Result<LemmaCurve> {
    let norm = p[0].hypot(p[1]);
    if !(r > 0.0) || (norm - r).abs() > 1e-12 * r {
        return Err(Error::Invalid(format!("p must lie on the circle of radius {r}, has norm {norm}")));
    }
    let theta_r = find_theta_r(f, r)?;
    let tr = theta_r.theta;
    let theta_p = p[1].atan2(p[0]).rem_euclid(TAU);
    let gap = (theta_p - tr + PI).rem_euclid(TAU) - PI;
    if gap.abs() <= SAME_ANGLE {
        let curve = PiecewiseCurve::new(vec![
            Segment::Radial { t: [0.0, 0.4], theta: theta_p, r: [0.0, r] },
            Segment::Hold { t: [0.4, 0.6], point: p },
            Segment::Radial { t: [0.6, 1.0], theta: theta_p, r: [r, 0.0] },
        ]);
        return Ok(LemmaCurve {
            curve,
            theta_r,
            theta0: theta_p,
            branch: Branch::SameAngle,
            t0: T0,
            radius: r,
            p,
            arc_integral: 0.0,
        });
    }
    let theta0 = tr + (theta_p - tr).rem_euclid(TAU);
    let on_circle = |t: f64| f(r * t.cos(), r * t.sin());
    let quad = Simpson::default();
    let forward = quad.integrate(on_circle, tr, theta0)?;
    let (branch, start, arc_integral) = if forward >= 0.0 {
        (Branch::ArcForward, tr, forward)
    } else {
        let backward = quad.integrate(on_circle, theta0, tr + TAU)?;
        (Branch::ArcBackward, tr + TAU, backward)
    };
    let curve = PiecewiseCurve::new(vec![
        Segment::Radial { t: [0.0, 0.2], theta: tr, r: [0.0, r] },
        Segment::Arc { t: [0.2, 0.4], radius: r, phi: [start, theta0] },
        Segment::Hold { t: [0.4, 0.6], point: p },
        Segment::Arc { t: [0.6, 0.8], radius: r, phi: [theta0, start] },
        Segment::Radial { t: [0.8, 1.0], theta: tr, r: [r, 0.0] },
    ]);
    Ok(LemmaCurve {
        curve,
        theta_r,
        theta0,
        branch,
        t0: T0,
        radius: r,
        p,
        arc_integral,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurveReport {
    /// Endpoints at the origin, passage through `p` and continuity.
    pub i: bool,
    /// `∫F(z) − F(p)/5`.
    pub ii_margin: f64,
    /// `50π²R² − ∫‖ż‖²`.
    pub iii_margin: f64,
    pub integral_f: f64,
    pub energy: f64,
    pub energy_quadrature: f64,
}

pub fn verify_curve_properties<F: Fn(f64, f64) -> f64>(lc: &LemmaCurve, f: &F) -> Result<CurveReport> {
    let c = &lc.curve;
    let r = lc.radius;
    let i = c.position(0.0) == [0.0, 0.0]
        && c.position(1.0) == [0.0, 0.0]
        && c.position(lc.t0) == lc.p
        && c.continuity_defect() <= 1e-12 * (1.0 + r);
    let quad = Simpson::default();
    let integral_f = c.integrate(&quad, |_, z, _| f(z[0], z[1]))?;
    let energy = c.energy();
    let energy_quadrature = c.integrate(&quad, |_, _, v| v[0] * v[0] + v[1] * v[1])?;
    Ok(CurveReport {
        i,
        ii_margin: integral_f - f(lc.p[0], lc.p[1]) / 5.0,
        iii_margin: 50.0 * PI * PI * r * r - energy,
        integral_f,
        energy,
        energy_quadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn mean_value_examples() {
        assert!(mean_value_defect(&|x, _| x, [0.0, 0.0], 3.0, 64) < 1e-14);
        assert!(mean_value_defect(&|x, y| x * x - y * y, [0.0, 0.0], 1.0, 64) < 1e-14);
        assert!((mean_value_defect(&|x, y| x * x + y * y, [0.0, 0.0], 1.0, 64) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_integral_examples() {
        assert!((radial_integral(&|x, _| x, 2.0, 0.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(radial_integral(&|x, _| x, 2.0, FRAC_PI_2).unwrap().abs() < 1e-14);
        assert_eq!(radial_integral(&|_, _| 0.0, 2.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn theta_r_examples() {
        let t = find_theta_r(&|x, _| x, 1.0).unwrap();
        assert!((t.theta - FRAC_PI_2).abs() < 1e-11 || (t.theta - 3.0 * FRAC_PI_2).abs() < 1e-11);
        let t = find_theta_r(&|x, y| x * y, 1.0).unwrap();
        let q = (t.theta / FRAC_PI_2).round() * FRAC_PI_2;
        assert!((t.theta - q).abs() < 1e-11);
        let t = find_theta_r(&|_, _| 0.0, 1.0).unwrap();
        assert!(t.degenerate && t.theta == 0.0);
    }

    #[test]
    fn positive_function_has_no_bracket() {
        assert_eq!(find_theta_r(&|x, y| 1.0 + x * x + y * y, 1.0).unwrap_err(), Error::BracketNotFound);
    }

    #[test]
    fn same_angle_branch() {
        let f = |x: f64, _: f64| x;
        let lc = build_lemma_curve(&f, 1.0, [0.0, 1.0]).unwrap();
        assert_eq!(lc.branch, Branch::SameAngle);
        let rep = verify_curve_properties(&lc, &f).unwrap();
        assert!(rep.i);
        assert!(rep.ii_margin.abs() < 1e-12);
        assert!((rep.energy - 5.0).abs() < 1e-14);
        assert!((rep.iii_margin - (50.0 * PI * PI - 5.0)).abs() < 1e-12);
    }

    #[test]
    fn mirrored_case() {
        let f = |x: f64, _: f64| x;
        let lc = build_lemma_curve(&f, 1.0, [1.0, 0.0]).unwrap();
        assert_ne!(lc.branch, Branch::SameAngle);
        let rep = verify_curve_properties(&lc, &f).unwrap();
        assert!(rep.i);
        assert!(rep.ii_margin >= -1e-10);
        assert!(rep.iii_margin >= 0.0);
        let expect = 10.0 + 10.0 * match lc.branch {
            Branch::ArcForward => (lc.theta0 - lc.theta_r.theta).powi(2),
            _ => (lc.theta_r.theta + TAU - lc.theta0).powi(2),
        };
        assert!((rep.energy - expect).abs() < 1e-12);
    }

    #[test]
    fn zero_function() {
        let f = |_: f64, _: f64| 0.0;
        let lc = build_lemma_curve(&f, 2.0, [0.0, -2.0]).unwrap();
        let rep = verify_curve_properties(&lc, &f).unwrap();
        assert!(rep.i);
        assert_eq!(rep.ii_margin, 0.0);
    }

    #[test]
    fn off_circle_point_is_invalid() {
        assert_eq!(build_lemma_curve(&|x, _| x, 1.0, [2.0, 0.0]).unwrap_err().kind(), "invalid_input");
    }
}
