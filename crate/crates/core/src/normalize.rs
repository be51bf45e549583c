//! Reduction of a Ricci-flat standard Brinkmann metric with `γ = δ` to a
//! pp-wave `2 dU (dV + H̃ dU) + dX² + dY²`.
//!
//! The chain is: `α = ½(∂_y Ω₁ − ∂_x Ω₂)`, a potential `f` of the closed form
//! `Ω̃ = (Ω₁ − αy) dx + (Ω₂ + αx) dy`, the shift `V = v + f`, and the rotation
//! `X + iY = e^{−iβ(u)} (x + iy)` with `β' = α`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expression};
use crate::quad::Simpson;
use crate::tensor::metric::interior;
use crate::tensor::{is_ricci_flat, BrinkmannMetric, DomainBox, GridSpec, Matrix4, Point};

const UXY: [&str; 3] = ["u", "x", "y"];

/// Step of the five-point Laplacian; with one Richardson level the truncation
/// error is `O(h⁴)` and roundoff stays near `1e-8 |F|`.
pub const LAPLACIAN_STEP: f64 = 1e-3;

/// `α` as a function of `u`.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    /// Pointwise `½(∂_y Ω₁ − ∂_x Ω₂)`.
    pub pointwise: Expression,
    /// Stencil average; depends on `u` only.
    pub expr: Expression,
    /// Max `|α(p) − ᾱ(u)|` over the check grid.
    pub u_only_defect: f64,
    compiled: CompiledExpr,
}

impl AlphaProfile {
    fn from_expr(pointwise: Expression, expr: Expression, u_only_defect: f64) -> Result<Self> {
        let compiled = expr.compile(&["u"])?;
        Ok(AlphaProfile {
            pointwise,
            expr,
            u_only_defect,
            compiled,
        })
    }

    /// Constant profile, used by the causality construction.
    pub fn constant(alpha: f64) -> Self {
        let e = Expression::constant(alpha);
        Self::from_expr(e.clone(), e, 0.0).expect("constant")
    }

    pub fn at(&self, u: f64) -> Result<f64> {
        Ok(self.compiled.eval(&[u])?)
    }

    /// `Some(α)` when the profile has no `u` dependence.
    pub fn as_constant(&self) -> Option<f64> {
        if self.expr.depends_on("u") {
            None
        } else {
            self.compiled.eval(&[0.0]).ok()
        }
    }

    /// Max minus min of `α` over `n` interior samples of `[u0, u1]`.
    pub fn variation(&self, u: [f64; 2], n: usize) -> Result<f64> {
        let vals: Vec<f64> = interior(u, n)
            .into_iter()
            .map(|s| self.at(s))
            .collect::<Result<_>>()?;
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(if vals.is_empty() { 0.0 } else { hi - lo })
    }
}

/// `α` averaged over a 5×5 `(x, y)` stencil per `u`, with the deviation of the
/// pointwise value from that average.
pub fn extract_alpha(m: &BrinkmannMetric, grid: &GridSpec) -> Result<AlphaProfile> {
    m.require_identity_gamma()?;
    let om = m.omega();
    let pointwise = Expression::scale(
        0.5,
        Expression::sub(om[0].differentiate("y"), om[1].differentiate("x")),
    );
    let expr = if pointwise.depends_on("x") || pointwise.depends_on("y") {
        let xs = interior(m.domain().x, 5);
        let ys = interior(m.domain().y, 5);
        let mut terms = Vec::with_capacity(25);
        for &x in &xs {
            for &y in &ys {
                terms.push(pointwise.fix("x", x).fix("y", y));
            }
        }
        Expression::scale(1.0 / 25.0, Expression::sum(terms))
    } else {
        pointwise.clone()
    };
    let pc = pointwise.compile(&UXY)?;
    let ac = expr.compile(&["u"])?;
    let mut defect: f64 = 0.0;
    for p in grid.points(m.domain()) {
        let d = pc.eval(&[p[0], p[2], p[3]])? - ac.eval(&[p[0]])?;
        defect = defect.max(d.abs());
    }
    let tol = m.tol().derivative;
    if defect > tol {
        return Err(Error::AlphaNotUOnly { defect, tol });
    }
    AlphaProfile::from_expr(pointwise, expr, defect)
}

/// Potential of `Ω̃` along the axis path `(x0, y0) → (x, y0) → (x, y)`.
#[derive(Debug, Clone)]
pub struct PotentialField {
    pub omega_tilde: [Expression; 2],
    pub base: [f64; 2],
    pub closedness_defect: f64,
    w: [CompiledExpr; 2],
    /// `∂_u Ω̃_i`.
    w_u: [CompiledExpr; 2],
    /// `∂_x Ω̃₂`.
    w2_x: CompiledExpr,
    quad: Simpson,
}

impl PotentialField {
    /// Replaces the quadrature rule.
    pub fn with_quadrature(mut self, quad: Simpson) -> Self {
        self.quad = quad;
        self
    }

    fn integral(&self, f: &CompiledExpr, fixed: [f64; 2], along_x: bool, a: f64, b: f64) -> Result<f64> {
        let [u, c] = fixed;
        if along_x {
            self.quad.integrate(|s| f.eval_or_nan(&[u, s, c]), a, b)
        } else {
            self.quad.integrate(|s| f.eval_or_nan(&[u, c, s]), a, b)
        }
    }

    pub fn value(&self, u: f64, x: f64, y: f64) -> Result<f64> {
        let [x0, y0] = self.base;
        Ok(self.integral(&self.w[0], [u, y0], true, x0, x)?
            + self.integral(&self.w[1], [u, x], false, y0, y)?)
    }

    /// Same potential along `(x0, y0) → (x0, y) → (x, y)`.
    pub fn value_reversed(&self, u: f64, x: f64, y: f64) -> Result<f64> {
        let [x0, y0] = self.base;
        Ok(self.integral(&self.w[1], [u, x0], false, y0, y)?
            + self.integral(&self.w[0], [u, y], true, x0, x)?)
    }

    /// `(∂_u f, ∂_x f, ∂_y f)`, differentiated under the integral sign.
    pub fn gradient(&self, u: f64, x: f64, y: f64) -> Result<[f64; 3]> {
        let [x0, y0] = self.base;
        let fu = self.integral(&self.w_u[0], [u, y0], true, x0, x)?
            + self.integral(&self.w_u[1], [u, x], false, y0, y)?;
        let fx = self.w[0].eval(&[u, x, y0])? + self.integral(&self.w2_x, [u, x], false, y0, y)?;
        let fy = self.w[1].eval(&[u, x, y])?;
        Ok([fu, fx, fy])
    }

    pub fn f_u(&self, u: f64, x: f64, y: f64) -> Result<f64> {
        let [x0, y0] = self.base;
        Ok(self.integral(&self.w_u[0], [u, y0], true, x0, x)?
            + self.integral(&self.w_u[1], [u, x], false, y0, y)?)
    }

    /// Max `|df − Ω̃|` over the grid.
    pub fn exactness_defect(&self, domain: &DomainBox, grid: &GridSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in grid.points(domain) {
            let [_, fx, fy] = self.gradient(p[0], p[2], p[3])?;
            worst = worst
                .max((fx - self.w[0].eval(&[p[0], p[2], p[3]])?).abs())
                .max((fy - self.w[1].eval(&[p[0], p[2], p[3]])?).abs());
        }
        Ok(worst)
    }
}

/// Builds the potential of `Ω̃ = (Ω₁ − αy, Ω₂ + αx)` after checking closedness
/// on the grid.
pub fn potential_f(
    m: &BrinkmannMetric,
    alpha: &AlphaProfile,
    base: [f64; 2],
    grid: &GridSpec,
) -> Result<PotentialField> {
    let om = m.omega();
    let x = Expression::var("x");
    let y = Expression::var("y");
    let omega_tilde = [
        Expression::sub(om[0].clone(), Expression::mul(alpha.expr.clone(), y)),
        Expression::add(om[1].clone(), Expression::mul(alpha.expr.clone(), x)),
    ];
    let curl = Expression::sub(omega_tilde[0].differentiate("y"), omega_tilde[1].differentiate("x"))
        .compile(&UXY)?;
    let mut defect: f64 = 0.0;
    for p in grid.points(m.domain()) {
        defect = defect.max(curl.eval(&[p[0], p[2], p[3]])?.abs());
    }
    let tol = m.tol().derivative;
    if defect > tol {
        return Err(Error::NotClosed { defect, tol });
    }
    let c = |e: &Expression| e.compile(&UXY);
    Ok(PotentialField {
        w: [c(&omega_tilde[0])?, c(&omega_tilde[1])?],
        w_u: [
            c(&omega_tilde[0].differentiate("u"))?,
            c(&omega_tilde[1].differentiate("u"))?,
        ],
        w2_x: c(&omega_tilde[1].differentiate("x"))?,
        omega_tilde,
        base,
        closedness_defect: defect,
        quad: Simpson {
            abs_tol: m.tol().quadrature,
            ..Simpson::default()
        },
    })
}

/// Result of the shift `V = v + f`.
#[derive(Debug, Clone)]
pub struct VShift {
    h: CompiledExpr,
    /// Max entry-wise residual of the pulled-back metric against
    /// `2du(dV + Ȟdu + α(ydx − xdy)) + dx² + dy²`.
    pub pullback_residual: f64,
}

impl VShift {
    /// `Ȟ = H − ∂_u f`.
    pub fn h_check(&self, f: &PotentialField, u: f64, x: f64, y: f64) -> Result<f64> {
        Ok(self.h.eval(&[u, x, y])? - f.f_u(u, x, y)?)
    }
}

/// Metric of the shifted chart in `(u, V, x, y)` order.
fn shifted_matrix(h_check: f64, alpha: f64, x: f64, y: f64) -> Matrix4 {
    let mut g = [[0.0; 4]; 4];
    g[0][1] = 1.0;
    g[1][0] = 1.0;
    g[0][0] = 2.0 * h_check;
    g[0][2] = alpha * y;
    g[2][0] = alpha * y;
    g[0][3] = -alpha * x;
    g[3][0] = -alpha * x;
    g[2][2] = 1.0;
    g[3][3] = 1.0;
    g
}

/// `Jᵀ G J`.
fn pullback(g: &Matrix4, j: &Matrix4) -> Matrix4 {
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                for d in 0..4 {
                    s += j[c][a] * g[c][d] * j[d][b];
                }
            }
            out[a][b] = s;
        }
    }
    out
}

fn max_diff(a: &Matrix4, b: &Matrix4) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            m = m.max((a[i][k] - b[i][k]).abs());
        }
    }
    m
}

/// Performs the shift `v = V − f(u, x, y)` and checks the pulled-back metric.
pub fn v_shift(
    m: &BrinkmannMetric,
    alpha: &AlphaProfile,
    f: &PotentialField,
    grid: &GridSpec,
) -> Result<VShift> {
    let shift = VShift {
        h: m.h().compile(&UXY)?,
        pullback_residual: 0.0,
    };
    let residual = grid
        .points(m.domain())
        .par_iter()
        .map(|p| -> Result<f64> {
            let (u, x, y) = (p[0], p[2], p[3]);
            let g = m.metric_components(p)?;
            let [fu, fx, fy] = f.gradient(u, x, y)?;
            // Jacobian of (u, V, x, y) ↦ (u, v, x, y), indexed [old][new].
            let mut j = [[0.0; 4]; 4];
            j[0][0] = 1.0;
            j[1] = [-fu, 1.0, -fx, -fy];
            j[2][2] = 1.0;
            j[3][3] = 1.0;
            let expect = shifted_matrix(shift.h_check(f, u, x, y)?, alpha.at(u)?, x, y);
            Ok(max_diff(&pullback(&g, &j), &expect))
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))?;
    let tol = m.tol().derivative;
    if residual > tol {
        return Err(Error::PullbackResidual { residual, tol });
    }
    Ok(VShift {
        pullback_residual: residual,
        ..shift
    })
}

/// `β(u) = ∫₀^u α` and the rotation `X + iY = e^{−iβ} (x + iy)`.
#[derive(Debug, Clone)]
pub struct Rotation {
    alpha: AlphaProfile,
    constant: Option<f64>,
    quad: Simpson,
}

impl Rotation {
    pub fn beta(&self, u: f64) -> Result<f64> {
        match self.constant {
            Some(a) => Ok(a * u),
            None => self.quad.integrate(|s| self.alpha.compiled.eval_or_nan(&[s]), 0.0, u),
        }
    }

    pub fn alpha(&self, u: f64) -> Result<f64> {
        self.alpha.at(u)
    }

    /// `(u, x, y) ↦ (U, X, Y)`.
    pub fn forward(&self, u: f64, x: f64, y: f64) -> Result<[f64; 3]> {
        let (s, c) = self.beta(u)?.sin_cos();
        Ok([u, c * x + s * y, -s * x + c * y])
    }

    /// `(U, X, Y) ↦ (u, x, y)`.
    pub fn inverse(&self, uu: f64, xx: f64, yy: f64) -> Result<[f64; 3]> {
        let (s, c) = self.beta(uu)?.sin_cos();
        Ok([uu, c * xx - s * yy, s * xx + c * yy])
    }
}

pub fn rotation(alpha: &AlphaProfile) -> Rotation {
    Rotation {
        constant: alpha.as_constant(),
        alpha: alpha.clone(),
        quad: Simpson::default(),
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HarmonicReport {
    pub harmonic: bool,
    pub max_defect: f64,
}

/// Five-point Laplacian with one Richardson level.
pub fn laplacian<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, h: f64) -> f64 {
    let l = |h: f64| (f(x + h, y) + f(x - h, y) + f(x, y + h) + f(x, y - h) - 4.0 * f(x, y)) / (h * h);
    (4.0 * l(0.5 * h) - l(h)) / 3.0
}

/// Max `|ΔF|` over `points`; harmonic iff that is at most `tol`.
pub fn check_harmonic<F>(f: F, points: &[[f64; 2]], tol: f64) -> HarmonicReport
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let max_defect = points
        .par_iter()
        .map(|p| laplacian(&f, p[0], p[1], LAPLACIAN_STEP).abs())
        .reduce(|| 0.0, |a, b| if b > a || b.is_nan() { b } else { a });
    HarmonicReport {
        harmonic: max_defect <= tol,
        max_defect,
    }
}

/// Record of the input and of each stage.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub h: String,
    pub omega: [String; 2],
    pub autonomous: bool,
    pub stages: Vec<String>,
}

/// The pp-wave form `2 dU (dV + H̃ dU) + dX² + dY²`.
#[derive(Debug, Clone)]
pub struct PpWaveForm {
    pub alpha: AlphaProfile,
    pub potential: PotentialField,
    pub shift: VShift,
    pub rotation: Rotation,
    /// `Ĥ = H − (α²/2)(x² + y²)` for autonomous input.
    pub h_hat: Option<Expression>,
    pub source_domain: DomainBox,
    /// Bounding box of the image of the source box.
    pub mapped_domain: DomainBox,
    pub provenance: Provenance,
}

impl PpWaveForm {
    /// `H̃` at source coordinates: `Ȟ(u,x,y) − (α²(u)/2)(x² + y²)`.
    pub fn h_tilde_source(&self, u: f64, x: f64, y: f64) -> Result<f64> {
        let a = self.alpha.at(u)?;
        Ok(self.shift.h_check(&self.potential, u, x, y)? - 0.5 * a * a * (x * x + y * y))
    }

    /// `H̃(U, X, Y)`.
    pub fn h_tilde(&self, uu: f64, xx: f64, yy: f64) -> Result<f64> {
        let [u, x, y] = self.rotation.inverse(uu, xx, yy)?;
        self.h_tilde_source(u, x, y)
    }

    pub fn h_tilde_or_nan(&self, uu: f64, xx: f64, yy: f64) -> f64 {
        self.h_tilde(uu, xx, yy).unwrap_or(f64::NAN)
    }

    /// pp-wave components at `(U, V, X, Y)`.
    pub fn pp_matrix(&self, p: &Point) -> Result<Matrix4> {
        let mut g = [[0.0; 4]; 4];
        g[0][1] = 1.0;
        g[1][0] = 1.0;
        g[0][0] = 2.0 * self.h_tilde(p[0], p[2], p[3])?;
        g[2][2] = 1.0;
        g[3][3] = 1.0;
        Ok(g)
    }

    /// Max over the source grid of `|Jᵀ G_in J − G_pp|`, where `J` is the
    /// Jacobian of `(U, V, X, Y) ↦ (u, v, x, y)`.
    pub fn pipeline_residual(&self, m: &BrinkmannMetric, grid: &GridSpec) -> Result<f64> {
        grid.points(m.domain())
            .par_iter()
            .map(|p| -> Result<f64> {
                let (u, x, y) = (p[0], p[2], p[3]);
                let g_in = m.metric_components(p)?;
                let a = self.alpha.at(u)?;
                let (s, c) = self.rotation.beta(u)?.sin_cos();
                let [fu, fx, fy] = self.potential.gradient(u, x, y)?;
                let xu = -a * y;
                let yu = a * x;
                let mut j = [[0.0; 4]; 4];
                j[0][0] = 1.0;
                j[2] = [xu, 0.0, c, -s];
                j[3] = [yu, 0.0, s, c];
                j[1] = [-fu - fx * xu - fy * yu, 1.0, -fx * c - fy * s, fx * s - fy * c];
                let [uu, xx, yy] = self.rotation.forward(u, x, y)?;
                let pp = self.pp_matrix(&[uu, 0.0, xx, yy])?;
                Ok(max_diff(&pullback(&g_in, &j), &pp))
            })
            .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
    }

    /// Finite-difference `ΔH̃` in `(X, Y)` at the images of the source grid.
    pub fn harmonic_defect(&self, grid: &GridSpec, tol: f64) -> Result<HarmonicReport> {
        // Quadrature noise in ∂_u f is amplified by 1/h², so tighten it here.
        let tight = PpWaveForm {
            potential: self.potential.clone().with_quadrature(Simpson {
                abs_tol: 1e-14,
                ..Simpson::default()
            }),
            ..self.clone()
        };
        let mut worst = HarmonicReport {
            harmonic: true,
            max_defect: 0.0,
        };
        for &u in &interior(self.source_domain.u, grid.nu) {
            let pts: Vec<[f64; 2]> = grid
                .points(&self.source_domain)
                .into_iter()
                .filter(|p| p[0] == u)
                .map(|p| self.rotation.forward(u, p[2], p[3]).map(|q| [q[1], q[2]]))
                .collect::<Result<_>>()?;
            let uu = u;
            let r = check_harmonic(|xx, yy| tight.h_tilde_or_nan(uu, xx, yy), &pts, tol);
            if !(r.max_defect <= worst.max_defect) {
                worst.max_defect = r.max_defect;
            }
        }
        worst.harmonic = worst.max_defect <= tol;
        Ok(worst)
    }
}

/// `ΔH̃ = ΔH − ∂_u(∂_x Ω₁ + ∂_y Ω₂) − 2α²`, exact for `γ = δ`.
pub fn symbolic_laplacian(m: &BrinkmannMetric, alpha: &Expression) -> Expression {
    let h = m.h();
    let om = m.omega();
    let lap = Expression::add(
        h.differentiate("x").differentiate("x"),
        h.differentiate("y").differentiate("y"),
    );
    let div = Expression::add(om[0].differentiate("x"), om[1].differentiate("y"));
    Expression::sub(
        Expression::sub(lap, div.differentiate("u")),
        Expression::scale(2.0, Expression::powi(alpha.clone(), 2)),
    )
}

/// Max of `|symbolic_laplacian|` over the grid.
pub fn symbolic_harmonic_defect(m: &BrinkmannMetric, alpha: &AlphaProfile, grid: &GridSpec) -> Result<f64> {
    let e = symbolic_laplacian(m, &alpha.expr).compile(&UXY)?;
    let mut worst: f64 = 0.0;
    for p in grid.points(m.domain()) {
        worst = worst.max(e.eval(&[p[0], p[2], p[3]])?.abs());
    }
    Ok(worst)
}

/// Bounding box of the rotated `(x, y)` box for `β` over the `u` range,
/// with `β` sampled at 257 points.
fn mapped_domain(d: &DomainBox, rot: &Rotation) -> Result<DomainBox> {
    let n = 256;
    let mut b_lo = f64::INFINITY;
    let mut b_hi = f64::NEG_INFINITY;
    for i in 0..=n {
        let u = d.u[0] + (d.u[1] - d.u[0]) * i as f64 / n as f64;
        let b = rot.beta(u)?;
        b_lo = b_lo.min(b);
        b_hi = b_hi.max(b);
    }
    let corners = [
        [d.x[0], d.y[0]],
        [d.x[0], d.y[1]],
        [d.x[1], d.y[0]],
        [d.x[1], d.y[1]],
    ];
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for [x, y] in corners {
        let r = x.hypot(y);
        let phi = y.atan2(x);
        // X = r cos(φ − β), Y = r sin(φ − β): extremes at the ends of the
        // β range or where φ − β hits a multiple of π/2.
        let mut angles = vec![b_lo, b_hi];
        let q = std::f64::consts::FRAC_PI_2;
        let k0 = ((phi - b_hi) / q).ceil() as i64;
        let k1 = ((phi - b_lo) / q).floor() as i64;
        if k1 - k0 < 8 {
            for k in k0..=k1 {
                angles.push(phi - k as f64 * q);
            }
        } else {
            angles.extend((0..4).map(|k| phi - k as f64 * q));
        }
        for b in angles {
            let (xx, yy) = (r * (phi - b).cos(), r * (phi - b).sin());
            xl = xl.min(xx);
            xh = xh.max(xx);
            yl = yl.min(yy);
            yh = yh.max(yy);
        }
    }
    Ok(DomainBox::new(d.u, [xl, xh], [yl, yh]))
}

/// Full pipeline with every stage checked, without the Ricci-flat gate.
pub fn normalize_unchecked(m: &BrinkmannMetric, grid: &GridSpec) -> Result<PpWaveForm> {
    let alpha = extract_alpha(m, grid)?;
    let potential = potential_f(m, &alpha, [0.0, 0.0], grid)?;
    let shift = v_shift(m, &alpha, &potential, grid)?;
    let rot = rotation(&alpha);
    let autonomous = m.is_autonomous();
    let h_hat = match (autonomous, alpha.as_constant()) {
        (true, Some(a)) => {
            let r2 = Expression::add(
                Expression::powi(Expression::var("x"), 2),
                Expression::powi(Expression::var("y"), 2),
            );
            Some(Expression::sub(m.h().clone(), Expression::scale(0.5 * a * a, r2)))
        }
        _ => None,
    };
    let mapped = mapped_domain(m.domain(), &rot)?;
    let form = PpWaveForm {
        provenance: Provenance {
            h: m.h().to_string(),
            omega: [m.omega()[0].to_string(), m.omega()[1].to_string()],
            autonomous,
            stages: vec![
                format!("alpha = {}", alpha.expr),
                format!("omega_tilde = ({}, {})", potential.omega_tilde[0], potential.omega_tilde[1]),
                "V = v + f(u,x,y)".to_string(),
                "X + iY = exp(-i beta(u)) (x + iy)".to_string(),
            ],
        },
        alpha,
        potential,
        shift,
        rotation: rot,
        h_hat,
        source_domain: *m.domain(),
        mapped_domain: mapped,
    };
    let residual = form.pipeline_residual(m, grid)?;
    let tol = m.tol().derivative;
    if residual > tol {
        return Err(Error::PullbackResidual { residual, tol });
    }
    Ok(form)
}

/// Checks `γ = δ` and Ricci-flatness, then runs the pipeline and confirms
/// that `H̃` is harmonic.
pub fn to_pp_wave(m: &BrinkmannMetric, grid: &GridSpec) -> Result<PpWaveForm> {
    m.require_identity_gamma()?;
    let flat = is_ricci_flat(m, grid)?;
    if !flat.flat {
        return Err(Error::NotRicciFlat {
            max_violation: flat.max_violation,
        });
    }
    let form = normalize_unchecked(m, grid)?;
    let h = form.harmonic_defect(grid, m.tol().derivative)?;
    if !h.harmonic {
        return Err(Error::NotHarmonic { defect: h.max_defect });
    }
    Ok(form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn dom() -> DomainBox {
        DomainBox::new([-1.0, 1.0], [-1.5, 1.5], [-1.5, 1.5])
    }

    fn metric(h: &str, o1: &str, o2: &str) -> BrinkmannMetric {
        BrinkmannMetric::from_strs(h, o1, o2, dom()).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let g = GridSpec::default();
        let a = extract_alpha(&metric("0", "y", "-x"), &g).unwrap();
        assert_eq!(a.as_constant(), Some(1.0));
        assert_eq!(a.u_only_defect, 0.0);
        let a = extract_alpha(&metric("0", "2*x*y", "x^2"), &g).unwrap();
        assert_eq!(a.as_constant(), Some(0.0));
        let a = extract_alpha(&metric("0", "u*y", "-u*x"), &g).unwrap();
        assert_eq!(a.at(0.5).unwrap(), 0.5);
        assert!(a.as_constant().is_none());
    }

    #[test]
    fn alpha_depending_on_x_is_rejected() {
        let e = extract_alpha(&metric("0", "x*y", "0"), &GridSpec::default()).unwrap_err();
        assert_eq!(e.kind(), "alpha_not_u_only");
    }

    #[test]
    fn potential_examples() {
        let g = GridSpec::default();
        let m = metric("0", "y", "-x");
        let a = extract_alpha(&m, &g).unwrap();
        let f = potential_f(&m, &a, [0.0, 0.0], &g).unwrap();
        assert_eq!(f.value(0.3, 1.0, -1.2).unwrap(), 0.0);

        let m = metric("0", "2*x", "2*y");
        let a = extract_alpha(&m, &g).unwrap();
        let f = potential_f(&m, &a, [0.0, 0.0], &g).unwrap();
        assert!((f.value(0.0, 0.7, -1.1).unwrap() - (0.49 + 1.21)).abs() < 1e-12);

        let m = metric("0", "y", "x");
        let a = extract_alpha(&m, &g).unwrap();
        let f = potential_f(&m, &a, [0.0, 0.0], &g).unwrap();
        assert!((f.value(0.0, 0.7, -1.1).unwrap() + 0.77).abs() < 1e-12);
    }

    #[test]
    fn rotation_examples() {
        let r = rotation(&AlphaProfile::constant(1.0));
        let [_, x, y] = r.forward(FRAC_PI_2, 1.0, 0.0).unwrap();
        assert!(x.abs() < 1e-15 && (y + 1.0).abs() < 1e-15);
        let r = rotation(&AlphaProfile::constant(0.0));
        assert_eq!(r.forward(0.4, 0.3, 0.2).unwrap(), [0.4, 0.3, 0.2]);
    }

    #[test]
    fn laplacian_examples() {
        let pts = [[0.3, -0.2], [1.0, 1.0], [-1.2, 0.5]];
        let r = check_harmonic(|x, y| x * x - y * y, &pts, 1e-5);
        assert!(r.harmonic && r.max_defect < 1e-8);
        let r = check_harmonic(|x, y| x * x + y * y, &pts, 1e-5);
        assert!(!r.harmonic && (r.max_defect - 4.0).abs() < 1e-6);
        let r = check_harmonic(|x: f64, y: f64| x.exp() * y.cos(), &pts, 1e-5);
        assert!(r.harmonic, "{}", r.max_defect);
    }

    #[test]
    fn non_flat_input_is_rejected() {
        let e = to_pp_wave(&metric("0", "y", "-x"), &GridSpec::default()).unwrap_err();
        assert_eq!(e.kind(), "not_ricci_flat");
        let form = normalize_unchecked(&metric("0", "y", "-x"), &GridSpec::default()).unwrap();
        let h = form.harmonic_defect(&GridSpec::default(), 1e-5).unwrap();
        assert!((h.max_defect - 2.0).abs() < 1e-5);
    }

    #[test]
    fn pp_wave_is_fixed() {
        let m = metric("x^2 - y^2", "0", "0");
        let form = to_pp_wave(&m, &GridSpec::default()).unwrap();
        assert_eq!(form.alpha.as_constant(), Some(0.0));
        for p in GridSpec::default().points(m.domain()) {
            let v = form.h_tilde(p[0], p[2], p[3]).unwrap();
            assert_eq!(v, p[2] * p[2] - p[3] * p[3]);
        }
    }

    #[test]
    fn mapped_domain_covers_rotated_box() {
        let r = rotation(&AlphaProfile::constant(1.0));
        let d = DomainBox::new([0.0, 0.3], [-1.0, 1.0], [-1.0, 1.0]);
        let md = mapped_domain(&d, &r).unwrap();
        for p in GridSpec::new(7, 7, 7).points(&d) {
            let [uu, xx, yy] = r.forward(p[0], p[2], p[3]).unwrap();
            assert!(md.contains(&[uu, 0.0, xx, yy]));
        }
        assert!(md.x[1] > 1.0 && md.x[1] <= 2f64.sqrt() + 1e-12);
    }
}
