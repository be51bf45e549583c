//! Timelike curves `Γ(t) = (U, V, X, Y) = (Δt, V(t), Z(t))` in the pp-wave
//! `2dU(dV + H̃dU) + dX² + dY²` of an autonomous profile that leave a ball of
//! radius `R₀` and return to the segment `{X = Y = 0, V = 0}`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expression};
use crate::harmonic::{build_lemma_curve, Branch, LemmaCurve, PiecewiseCurve, Witness, WitnessGrid};
use crate::harmonic::quadratic::WITNESS_GRID;
use crate::normalize::normalize_unchecked;
use crate::quad::{bisect, Simpson};
use crate::tensor::{BrinkmannMetric, GridSpec};

/// Minimum number of curve samples in a certificate.
pub const MIN_SAMPLES: usize = 1001;

/// `Ĥ(x, y)` compiled, with `Ĥ(0)`.
#[derive(Debug, Clone)]
pub struct Profile {
    pub expr: Expression,
    compiled: CompiledExpr,
}

impl Profile {
    pub fn new(expr: Expression) -> Result<Self> {
        let compiled = expr.compile(&["x", "y"])?;
        Ok(Profile { expr, compiled })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::new(crate::expr::parse(text)?)
    }

    pub fn at(&self, x: f64, y: f64) -> f64 {
        self.compiled.eval_or_nan(&[x, y])
    }

    /// Max of `|ΔĤ| / (1 + |Ĥ|)` on an `n × n` grid of `[−r, r]²`.
    pub fn harmonic_defect(&self, r: f64, n: usize) -> Result<f64> {
        let e = &self.expr;
        let lap = Expression::add(
            e.differentiate("x").differentiate("x"),
            e.differentiate("y").differentiate("y"),
        )
        .compile(&["x", "y"])?;
        let mut worst: f64 = 0.0;
        for [x, y] in crate::harmonic::box_samples(-r, r, n) {
            let d = lap.eval(&[x, y])?.abs() / (1.0 + self.at(x, y).abs());
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// `Z(t) = e^{−iαΔt} z(t)`: the lemma curve seen in the rotated chart, so that
/// `H̃(Δt, Z(t)) = Ĥ(z(t))`.
#[derive(Debug, Clone)]
pub struct RotatedCurve {
    pub z: PiecewiseCurve,
    pub alpha: f64,
    pub delta: f64,
}

impl RotatedCurve {
    fn phase(&self, t: f64) -> (f64, f64) {
        (-self.alpha * self.delta * t).sin_cos()
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        let [x, y] = self.z.position(t);
        let (s, c) = self.phase(t);
        [c * x - s * y, s * x + c * y]
    }

    /// `Ż = e^{−iαΔt} (ż − iαΔ z)` on the piece containing `t` (or the one
    /// ending at `t` when `left`).
    pub fn velocity_on(&self, seg: usize, t: f64) -> [f64; 2] {
        let s = &self.z.segments[seg];
        let [x, y] = s.position(t);
        let [vx, vy] = s.velocity(t);
        let w = self.alpha * self.delta;
        let (dx, dy) = (vx + w * y, vy - w * x);
        let (sn, c) = self.phase(t);
        [c * dx - sn * dy, sn * dx + c * dy]
    }

    pub fn velocity(&self, t: f64) -> [f64; 2] {
        self.velocity_on(self.z.segment_index(t), t)
    }

    /// `∫₀¹ ‖Ż‖²`, segment by segment.
    pub fn energy(&self, quad: &Simpson) -> Result<f64> {
        let mut total = 0.0;
        for (i, s) in self.z.segments.iter().enumerate() {
            let [a, b] = s.interval();
            total += quad.integrate(|t| norm2(self.velocity_on(i, t)), a, b)?;
        }
        Ok(total)
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

pub fn build_zk(z: &PiecewiseCurve, alpha: f64, delta: f64) -> RotatedCurve {
    RotatedCurve {
        z: z.clone(),
        alpha,
        delta,
    }
}

/// `V^E(t) = −Δ∫₀ᵗ Ĥ(z) − (1/2Δ)∫₀ᵗ ‖Ż‖² − Et/(2Δ)`.
#[derive(Debug, Clone)]
pub struct VFunction {
    pub zc: RotatedCurve,
    pub hhat: Profile,
    pub delta: f64,
    pub energy: f64,
    /// `V⁰` at each breakpoint.
    cumulative: Vec<f64>,
    quad: Simpson,
}

impl VFunction {
    /// `dV⁰/dt` on piece `seg`.
    fn integrand(&self, seg: usize, t: f64) -> f64 {
        let [x, y] = self.zc.z.segments[seg].position(t);
        -self.delta * self.hhat.at(x, y) - norm2(self.zc.velocity_on(seg, t)) / (2.0 * self.delta)
    }

    /// `V⁰(t)`.
    pub fn v0(&self, t: f64) -> Result<f64> {
        let seg = self.zc.z.segment_index(t);
        let a = self.zc.z.segments[seg].interval()[0];
        Ok(self.cumulative[seg] + self.quad.integrate(|s| self.integrand(seg, s), a, t)?)
    }

    /// `V⁰(1) = h(0)`.
    pub fn v0_end(&self) -> f64 {
        *self.cumulative.last().expect("at least one breakpoint")
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.v0(t)? - self.energy * t / (2.0 * self.delta))
    }

    /// `V̇^E` on piece `seg`.
    pub fn rate_on(&self, seg: usize, t: f64) -> f64 {
        self.integrand(seg, t) - self.energy / (2.0 * self.delta)
    }

    pub fn with_energy(&self, energy: f64) -> Self {
        VFunction {
            energy,
            ..self.clone()
        }
    }
}

pub fn build_vk(hhat: &Profile, zc: &RotatedCurve, delta: f64, energy: f64) -> Result<VFunction> {
    let mut v = VFunction {
        zc: zc.clone(),
        hhat: hhat.clone(),
        delta,
        energy,
        cumulative: vec![0.0],
        quad: Simpson::default(),
    };
    let mut acc = 0.0;
    for (i, s) in zc.z.segments.iter().enumerate() {
        let [a, b] = s.interval();
        acc += v.quad.integrate(|t| v.integrand(i, t), a, b)?;
        v.cumulative.push(acc);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveSample {
    pub t: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    /// `g(Γ̇, Γ̇)`.
    pub g_dot_dot: f64,
}

/// Assembled curve `Γ^E`.
#[derive(Debug, Clone)]
pub struct SpacetimeCurve {
    pub v: VFunction,
    pub alpha: f64,
}

impl SpacetimeCurve {
    /// `H̃(U, X, Y) = Ĥ(e^{iαU}(X + iY))`, through the inverse of the rotation.
    pub fn h_tilde(&self, uu: f64, xx: f64, yy: f64) -> f64 {
        let (s, c) = (self.alpha * uu).sin_cos();
        self.v.hhat.at(c * xx - s * yy, s * xx + c * yy)
    }

    fn tangent_norm_on(&self, seg: usize, t: f64) -> f64 {
        let d = self.v.delta;
        let [xx, yy] = self.v.zc.position(t);
        let zdot = self.v.zc.velocity_on(seg, t);
        // 2 U̇ V̇ + 2 H̃ U̇² + ‖Ż‖², U̇ = Δ
        2.0 * d * self.v.rate_on(seg, t) + 2.0 * d * d * self.h_tilde(d * t, xx, yy) + norm2(zdot)
    }

    pub fn tangent_norm(&self, t: f64) -> f64 {
        self.tangent_norm_on(self.v.zc.z.segment_index(t), t)
    }

    pub fn sample(&self, t: f64) -> Result<CurveSample> {
        let [x, y] = self.v.zc.position(t);
        Ok(CurveSample {
            t,
            u: self.v.delta * t,
            v: self.v.value(t)?,
            x,
            y,
            g_dot_dot: self.tangent_norm(t),
        })
    }

    /// Max `|g(Γ̇, Γ̇) + E|` over the samples and both one-sided values at
    /// each interior breakpoint.
    pub fn timelike_residual(&self, samples: &[CurveSample]) -> f64 {
        let e = self.v.energy;
        let mut worst = samples
            .iter()
            .fold(0.0f64, |m, s| m.max((s.g_dot_dot + e).abs()));
        let segs = &self.v.zc.z.segments;
        for i in 1..segs.len() {
            let t = segs[i].interval()[0];
            for seg in [i - 1, i] {
                worst = worst.max((self.tangent_norm_on(seg, t) + e).abs());
            }
        }
        worst
    }
}

/// Builds `Γ^E` and checks `g(Γ̇, Γ̇) = −E` at `n ≥ 1001` samples.
pub fn assemble_gamma(
    hhat: &Profile,
    z: &PiecewiseCurve,
    alpha: f64,
    delta: f64,
    energy: f64,
    n: usize,
) -> Result<(SpacetimeCurve, Vec<CurveSample>)> {
    let zc = build_zk(z, alpha, delta);
    let v = build_vk(hhat, &zc, delta, energy)?;
    let curve = SpacetimeCurve { v, alpha };
    let samples = sample_curve(&curve, n)?;
    let residual = curve.timelike_residual(&samples);
    let tol = 1e-8 * (1.0 + energy.abs());
    if !(residual <= tol) {
        return Err(Error::TimelikeResidual { residual, tol });
    }
    Ok((curve, samples))
}

fn sample_curve(curve: &SpacetimeCurve, n: usize) -> Result<Vec<CurveSample>> {
    let n = n.max(MIN_SAMPLES);
    (0..n).map(|i| curve.sample(i as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergySolution {
    /// `2Δ V⁰(1)`.
    pub e0: f64,
    /// Root of `E ↦ V^E(1)` by bisection.
    pub e0_bisection: f64,
    pub h0: f64,
}

/// `E₀` with `V^{E₀}(1) = 0`, in closed form and by bisection.
pub fn solve_e0(v: &VFunction) -> Result<EnergySolution> {
    let h0 = v.v0_end();
    if !(h0 > 0.0) {
        return Err(Error::WitnessTooWeak { h0 });
    }
    let d = v.delta;
    let e0 = 2.0 * d * h0;
    let h = |e: f64| h0 - e / (2.0 * d);
    let e0_bisection = bisect(h, 0.0, 2.0 * e0 + 1.0, 1e-12 * (1.0 + e0))?;
    Ok(EnergySolution { e0, e0_bisection, h0 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CausalityParams {
    pub alpha: f64,
    pub r0: f64,
    pub delta: f64,
    pub k_max: u32,
    /// Half-width of the witness search box.
    pub search_radius: f64,
    pub samples: usize,
}

impl CausalityParams {
    pub fn new(alpha: f64, r0: f64, delta: f64, k_max: u32) -> Self {
        CausalityParams {
            alpha,
            r0,
            delta,
            k_max,
            search_radius: 4.0 * r0,
            samples: MIN_SAMPLES,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.delta > 0.0
            && self.delta < self.r0
            && self.alpha.is_finite()
            && self.search_radius > self.r0
            && self.k_max >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!(
                "need 0 < delta < r0 < search_radius and k_max >= 1 (delta={}, r0={}, search_radius={}, k_max={})",
                self.delta, self.r0, self.search_radius, self.k_max
            )))
        }
    }
}

/// Terms of the chain of estimates behind `h_k(1) > 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateLedger {
    pub hhat_origin: f64,
    /// `∫ F(z)` with `F = −Ĥ + Ĥ(0)`.
    pub integral_f: f64,
    /// `F(p)/5`.
    pub f_p_fifth: f64,
    pub lemma_slack: f64,
    /// `∫ Ĥ(z)`.
    pub integral_hhat: f64,
    /// `∫ ‖ż‖²`.
    pub energy_z: f64,
    /// `∫ ‖Ż‖²`.
    pub energy_zc: f64,
    /// `3α²Δ²R² + 3∫‖ż‖² − ∫‖Ż‖²`.
    pub rotation_slack: f64,
    /// `C(α, Δ) = 3α²Δ² + 150π²`.
    pub c: f64,
    /// `C R² − ∫‖Ż‖²`.
    pub energy_slack: f64,
    /// `h_k(1) = h_k(0) − 1/(2Δ)`.
    pub h1: f64,
    /// `(kΔ/5 − C/(2Δ))R² + kΔ/5 − 1/(2Δ) − (4Δ/5)Ĥ(0)`.
    pub h1_lower_bound: f64,
    pub bound_slack: f64,
}

impl EstimateLedger {
    pub fn holds(&self) -> bool {
        self.lemma_slack >= -1e-8 && self.rotation_slack >= -1e-8 && self.energy_slack >= 0.0 && self.bound_slack > 0.0
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Attempt {
    pub k: u32,
    pub witness: [f64; 2],
    pub radius: f64,
    pub h0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaSummary {
    pub theta_r: f64,
    pub theta0: f64,
    pub branch: Branch,
    pub t0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationCertificate {
    pub hhat: String,
    pub params: CausalityParams,
    pub k0: u32,
    pub witness: Witness,
    pub radius: f64,
    pub energy: EnergySolution,
    pub lemma: LemmaSummary,
    pub start: CurveSample,
    pub end: CurveSample,
    pub excursion: CurveSample,
    pub excursion_norm: f64,
    pub max_timelike_residual: f64,
    pub ledger: EstimateLedger,
    pub attempts: Vec<Attempt>,
    #[serde(skip)]
    pub samples: Vec<CurveSample>,
    #[serde(skip)]
    pub curve: PiecewiseCurve,
}

struct Built {
    lc: LemmaCurve,
    v: VFunction,
}

fn build_for(hhat: &Profile, w: &Witness, p: &CausalityParams) -> Result<Built> {
    let h00 = hhat.at(0.0, 0.0);
    let f = |x: f64, y: f64| -hhat.at(x, y) + h00;
    let r = w.norm();
    // Put the witness exactly on the circle of radius `r`.
    let lc = build_lemma_curve(&f, r, w.point)?;
    let zc = build_zk(&lc.curve, p.alpha, p.delta);
    let v = build_vk(hhat, &zc, p.delta, 0.0)?;
    Ok(Built { lc, v })
}

fn ledger(hhat: &Profile, b: &Built, k: u32, p: &CausalityParams) -> Result<EstimateLedger> {
    let quad = Simpson::default();
    let h00 = hhat.at(0.0, 0.0);
    let z = &b.lc.curve;
    let r = b.lc.radius;
    let d = p.delta;
    let integral_hhat = z.integrate(&quad, |_, q, _| hhat.at(q[0], q[1]))?;
    let integral_f = z.integrate(&quad, |_, q, _| -hhat.at(q[0], q[1]) + h00)?;
    let f_p_fifth = (-hhat.at(b.lc.p[0], b.lc.p[1]) + h00) / 5.0;
    let energy_z = z.integrate(&quad, |_, _, v| norm2(v))?;
    let energy_zc = b.v.zc.energy(&quad)?;
    let c = 3.0 * p.alpha * p.alpha * d * d + 150.0 * PI * PI;
    let h1 = b.v.v0_end() - 1.0 / (2.0 * d);
    let kf = k as f64;
    let h1_lower_bound =
        (kf * d / 5.0 - c / (2.0 * d)) * r * r + kf * d / 5.0 - 1.0 / (2.0 * d) - 0.8 * d * h00;
    Ok(EstimateLedger {
        hhat_origin: h00,
        integral_f,
        f_p_fifth,
        lemma_slack: integral_f - f_p_fifth,
        integral_hhat,
        energy_z,
        energy_zc,
        rotation_slack: 3.0 * p.alpha * p.alpha * d * d * r * r + 3.0 * energy_z - energy_zc,
        c,
        energy_slack: c * r * r - energy_zc,
        h1,
        h1_lower_bound,
        bound_slack: h1 - h1_lower_bound,
    })
}

/// Searches `k = 1, …, k_max` for a witness of `−Ĥ` outside the ball of radius
/// `R₀` whose loop has `h_k(0) > 0`, then assembles the timelike curve.
pub fn violation_certificate(hhat: &Profile, params: &CausalityParams) -> Result<ViolationCertificate> {
    params.validate()?;
    let defect = hhat.harmonic_defect(params.search_radius, 21)?;
    if defect > 1e-8 {
        return Err(Error::NotHarmonic { defect });
    }
    let neg = |x: f64, y: f64| -hhat.at(x, y);
    let grid = WitnessGrid::new(&neg, params.search_radius, WITNESS_GRID);
    let mut attempts = Vec::new();
    for k in 1..=params.k_max {
        let Some(w) = grid.find(&neg, k, params.r0) else {
            return Err(Error::NoWitness { min_norm: params.r0 });
        };
        let b = build_for(hhat, &w, params)?;
        let h0 = b.v.v0_end();
        attempts.push(Attempt {
            k,
            witness: w.point,
            radius: w.norm(),
            h0,
        });
        if h0 > 0.0 {
            return finish(hhat, params, k, w, b, attempts);
        }
    }
    Err(Error::KMaxExhausted { k_max: params.k_max })
}

fn finish(
    hhat: &Profile,
    params: &CausalityParams,
    k: u32,
    w: Witness,
    b: Built,
    attempts: Vec<Attempt>,
) -> Result<ViolationCertificate> {
    let energy = solve_e0(&b.v)?;
    let (curve, samples) = assemble_gamma(hhat, &b.lc.curve, params.alpha, params.delta, energy.e0, params.samples)?;
    let max_timelike_residual = curve.timelike_residual(&samples);
    // V^{E₀}(t) = V⁰(t) − t V⁰(1) makes the endpoint exact.
    let samples: Vec<CurveSample> = samples
        .into_iter()
        .map(|s| -> Result<CurveSample> {
            Ok(CurveSample {
                v: curve.v.v0(s.t)? - s.t * energy.h0,
                ..s
            })
        })
        .collect::<Result<_>>()?;
    let start = samples[0];
    let end = *samples.last().expect("samples");
    let excursion = CurveSample {
        v: curve.v.v0(b.lc.t0)? - b.lc.t0 * energy.h0,
        ..curve.sample(b.lc.t0)?
    };
    let ledger = ledger(hhat, &b, k, params)?;
    Ok(ViolationCertificate {
        hhat: hhat.expr.to_string(),
        params: *params,
        k0: k,
        witness: w,
        radius: b.lc.radius,
        energy,
        lemma: LemmaSummary {
            theta_r: b.lc.theta_r.theta,
            theta0: b.lc.theta0,
            branch: b.lc.branch,
            t0: b.lc.t0,
        },
        start,
        end,
        excursion_norm: excursion.x.hypot(excursion.y),
        excursion,
        max_timelike_residual,
        ledger,
        attempts,
        samples,
        curve: b.lc.curve.clone(),
    })
}

/// `Ĥ = H − (α²/2)(x² + y²)` and the constant `α` of an autonomous metric.
pub fn hhat_from_metric(m: &BrinkmannMetric, grid: &GridSpec) -> Result<(Profile, f64)> {
    if !m.is_autonomous() {
        return Err(Error::NonAutonomous(m.u_dependence(grid)?));
    }
    let form = normalize_unchecked(m, grid)?;
    let alpha = form.alpha.as_constant().ok_or(Error::AlphaNotConstant)?;
    let h = form.h_hat.ok_or(Error::AlphaNotConstant)?;
    Ok((Profile::new(h)?, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::Segment;

    fn still() -> PiecewiseCurve {
        PiecewiseCurve::new(vec![Segment::Hold {
            t: [0.0, 1.0],
            point: [0.0, 0.0],
        }])
    }

    #[test]
    fn flat_profile_straight_curve() {
        let h = Profile::parse("0").unwrap();
        let (c, s) = assemble_gamma(&h, &still(), 0.0, 2.0, 1.0, 1001).unwrap();
        assert_eq!(s.len(), 1001);
        let last = s.last().unwrap();
        assert!((last.v + 1.0 / 4.0).abs() < 1e-15);
        assert_eq!(last.u, 2.0);
        assert!((c.tangent_norm(0.3) + 1.0).abs() < 1e-15);
        let (_, s) = assemble_gamma(&h, &still(), 0.0, 2.0, 0.0, 1001).unwrap();
        assert!(s.iter().all(|q| q.g_dot_dot == 0.0));
    }

    #[test]
    fn rotating_a_constant_sweeps_a_circle() {
        let z = PiecewiseCurve::new(vec![Segment::Hold {
            t: [0.0, 1.0],
            point: [2.0, 0.0],
        }]);
        let zc = build_zk(&z, 1.0, PI);
        let end = zc.position(1.0);
        assert!((end[0] + 2.0).abs() < 1e-14 && end[1].abs() < 1e-14);
        let mid = zc.position(0.5);
        assert!((mid[0].hypot(mid[1]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_endpoint() {
        let h = Profile::parse("-1").unwrap();
        let z = PiecewiseCurve::new(vec![Segment::Radial {
            t: [0.0, 1.0],
            theta: 0.3,
            r: [0.0, 2.0],
        }]);
        let zc = build_zk(&z, 0.0, 0.5);
        let q = zc.energy(&Simpson::default()).unwrap();
        assert!((q - 4.0).abs() < 1e-12);
        let v = build_vk(&h, &zc, 0.5, 0.7).unwrap();
        let expect = 0.5 - q / 1.0 - 0.7 / 1.0;
        assert!((v.value(1.0).unwrap() - expect).abs() < 1e-12);
        let v0 = build_vk(&h, &zc, 0.5, 0.0).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let d = v0.value(t).unwrap() - v.value(t).unwrap();
            assert!((d - 0.7 * t / 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn e0_examples() {
        let h = Profile::parse("-6").unwrap();
        let zc = build_zk(&still(), 0.0, 0.5);
        let v = build_vk(&h, &zc, 0.5, 0.0).unwrap();
        assert!((v.v0_end() - 3.0).abs() < 1e-14);
        let e = solve_e0(&v).unwrap();
        assert!((e.e0 - 3.0).abs() < 1e-14);
        assert!((e.e0_bisection - 3.0).abs() < 1e-11);
        let flat = build_vk(&Profile::parse("0").unwrap(), &zc, 0.5, 0.0).unwrap();
        assert_eq!(solve_e0(&flat).unwrap_err().kind(), "witness_too_weak");
    }

    #[test]
    fn bad_params() {
        let h = Profile::parse("-exp(x)*cos(y)").unwrap();
        let e = violation_certificate(&h, &CausalityParams::new(0.0, 1.0, 2.0, 5)).unwrap_err();
        assert_eq!(e.kind(), "invalid_input");
        let e = violation_certificate(&Profile::parse("x^2 + y^2").unwrap(), &CausalityParams::new(0.0, 3.0, 1.0, 5))
            .unwrap_err();
        assert_eq!(e.kind(), "not_harmonic");
    }

    #[test]
    fn quadratic_profile_has_no_witness() {
        let h = Profile::parse("x^2 - y^2").unwrap();
        let e = violation_certificate(&h, &CausalityParams::new(0.0, 3.0, 1.0, 50)).unwrap_err();
        assert_eq!(e.kind(), "no_witness");
    }
}
