use serde::Serialize;

use crate::error::Result;
use crate::quad::Simpson;

/// One closed-form piece of a planar curve on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// `r(t) e^{iθ}` with `r` linear from `r[0]` to `r[1]`.
    Radial { t: [f64; 2], theta: f64, r: [f64; 2] },
    /// `R e^{iφ(t)}` with `φ` linear from `phi[0]` to `phi[1]`.
    Arc { t: [f64; 2], radius: f64, phi: [f64; 2] },
    /// Constant point.
    Hold { t: [f64; 2], point: [f64; 2] },
}

impl Segment {
    pub fn interval(&self) -> [f64; 2] {
        match *self {
            Segment::Radial { t, .. } | Segment::Arc { t, .. } | Segment::Hold { t, .. } => t,
        }
    }

    fn frac(&self, t: f64) -> f64 {
        let [a, b] = self.interval();
        (t - a) / (b - a)
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        match *self {
            Segment::Radial { theta, r, .. } => {
                let rr = r[0] + (r[1] - r[0]) * self.frac(t);
                [rr * theta.cos(), rr * theta.sin()]
            }
            Segment::Arc { radius, phi, .. } => {
                let a = phi[0] + (phi[1] - phi[0]) * self.frac(t);
                [radius * a.cos(), radius * a.sin()]
            }
            Segment::Hold { point, .. } => point,
        }
    }

    pub fn velocity(&self, t: f64) -> [f64; 2] {
        let [a, b] = self.interval();
        let dt = b - a;
        match *self {
            Segment::Radial { theta, r, .. } => {
                let s = (r[1] - r[0]) / dt;
                [s * theta.cos(), s * theta.sin()]
            }
            Segment::Arc { radius, phi, .. } => {
                let w = (phi[1] - phi[0]) / dt;
                let ang = phi[0] + (phi[1] - phi[0]) * self.frac(t);
                [-radius * w * ang.sin(), radius * w * ang.cos()]
            }
            Segment::Hold { .. } => [0.0, 0.0],
        }
    }

    /// `∫ ‖ż‖² dt` over the segment.
    pub fn energy(&self) -> f64 {
        let [a, b] = self.interval();
        let dt = b - a;
        match *self {
            Segment::Radial { r, .. } => (r[1] - r[0]).powi(2) / dt,
            Segment::Arc { radius, phi, .. } => (radius * (phi[1] - phi[0])).powi(2) / dt,
            Segment::Hold { .. } => 0.0,
        }
    }
}

/// Piecewise-smooth planar curve on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseCurve {
    pub segments: Vec<Segment>,
}

impl PiecewiseCurve {
    pub fn new(segments: Vec<Segment>) -> Self {
        PiecewiseCurve { segments }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.interval()[0]).collect();
        if let Some(s) = self.segments.last() {
            out.push(s.interval()[1]);
        }
        out
    }

    /// Index of the segment containing `t`; breakpoints belong to the right piece.
    pub fn segment_index(&self, t: f64) -> usize {
        self.segments
            .iter()
            .position(|s| t < s.interval()[1])
            .unwrap_or(self.segments.len() - 1)
    }

    pub fn position(&self, t: f64) -> [f64; 2] {
        self.segments[self.segment_index(t)].position(t)
    }

    pub fn velocity(&self, t: f64) -> [f64; 2] {
        self.segments[self.segment_index(t)].velocity(t)
    }

    /// Largest jump of the position across interior breakpoints.
    pub fn continuity_defect(&self) -> f64 {
        self.segments
            .windows(2)
            .map(|w| {
                let t = w[0].interval()[1];
                let a = w[0].position(t);
                let b = w[1].position(t);
                (a[0] - b[0]).hypot(a[1] - b[1])
            })
            .fold(0.0, f64::max)
    }

    /// `∫₀¹ g(t, z, ż) dt`, segment by segment.
    pub fn integrate<G>(&self, quad: &Simpson, g: G) -> Result<f64>
    where
        G: Fn(f64, [f64; 2], [f64; 2]) -> f64,
    {
        let mut total = 0.0;
        for s in &self.segments {
            let [a, b] = s.interval();
            total += quad.integrate(|t| g(t, s.position(t), s.velocity(t)), a, b)?;
        }
        Ok(total)
    }

    /// `∫₀¹ ‖ż‖² dt` in closed form.
    pub fn energy(&self) -> f64 {
        self.segments.iter().map(Segment::energy).sum()
    }

    pub fn max_norm(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match *s {
                Segment::Radial { r, .. } => r[0].abs().max(r[1].abs()),
                Segment::Arc { radius, .. } => radius.abs(),
                Segment::Hold { point, .. } => point[0].hypot(point[1]),
            })
            .fold(0.0, f64::max)
    }
}
