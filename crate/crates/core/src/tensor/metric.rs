use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expression};

/// Coordinate names in index order.
pub const COORDS: [&str; 4] = ["u", "v", "x", "y"];
pub const U: usize = 0;
pub const V: usize = 1;
pub const X: usize = 2;
pub const Y: usize = 3;

/// A spacetime point `(u, v, x, y)`.
pub type Point = [f64; 4];
pub type Matrix4 = [[f64; 4]; 4];

/// Tolerances shared by the checks of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Derivative and curvature checks.
    pub derivative: f64,
    /// Absolute tolerance of adaptive quadrature.
    pub quadrature: f64,
    /// Residual threshold for quadratic classification.
    pub classification: f64,
    /// `|g(w,w)|` at or below this is classified null.
    pub null_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            derivative: 1e-5,
            quadrature: 1e-10,
            classification: 1e-8,
            null_band: 1e-9,
        }
    }
}

/// Coordinate box `[u-, u+] x [x-, x+] x [y-, y+]`; `v` is unrestricted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    pub u: [f64; 2],
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Default for DomainBox {
    fn default() -> Self {
        DomainBox {
            u: [-1.0, 1.0],
            x: [-2.0, 2.0],
            y: [-2.0, 2.0],
        }
    }
}

impl DomainBox {
    pub fn new(u: [f64; 2], x: [f64; 2], y: [f64; 2]) -> Self {
        DomainBox { u, x, y }
    }

    pub fn contains(&self, p: &Point) -> bool {
        let inside = |r: [f64; 2], t: f64| r[0] <= t && t <= r[1];
        inside(self.u, p[U]) && inside(self.x, p[X]) && inside(self.y, p[Y])
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("u", self.u), ("x", self.x), ("y", self.y)] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
                return Err(Error::Invalid(format!("empty or non-finite {name}-range {r:?}")));
            }
        }
        Ok(())
    }
}

/// Sampling of the interior of a domain box: `n` points per axis at
/// `lo + (i + 1) (hi - lo) / (n + 1)`, with `v = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nu: usize,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { nu: 3, nx: 5, ny: 5 }
    }
}

pub(crate) fn interior(r: [f64; 2], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| r[0] + (i + 1) as f64 * (r[1] - r[0]) / (n + 1) as f64)
        .collect()
}

impl GridSpec {
    pub fn new(nu: usize, nx: usize, ny: usize) -> Self {
        GridSpec { nu, nx, ny }
    }

    /// Grid points in lexicographic `(u, x, y)` order.
    pub fn points(&self, domain: &DomainBox) -> Vec<Point> {
        let us = interior(domain.u, self.nu);
        let xs = interior(domain.x, self.nx);
        let ys = interior(domain.y, self.ny);
        let mut out = Vec::with_capacity(us.len() * xs.len() * ys.len());
        for &u in &us {
            for &x in &xs {
                for &y in &ys {
                    out.push([u, 0.0, x, y]);
                }
            }
        }
        out
    }
}

/// The data `(H, Ω, γ)` of a standard Brinkmann metric
/// `g = 2 du (dv + H du + Ω_i dx^i) + γ_ij dx^i dx^j` on a coordinate box.
#[derive(Debug, Clone)]
pub struct BrinkmannMetric {
    h: Expression,
    omega: [Expression; 2],
    gamma: [[Expression; 2]; 2],
    domain: DomainBox,
    tol: Tolerances,
    /// Symbolic components `g_ab`.
    components: [[Expression; 4]; 4],
    compiled: [[CompiledExpr; 4]; 4],
    /// `d_c g_ab`, indexed `[c][a][b]`.
    dg: [[[CompiledExpr; 4]; 4]; 4],
}

fn compile4(e: &Expression) -> CompiledExpr {
    e.compile(&COORDS)
        .expect("fields were checked to use only u, x, y")
}

impl BrinkmannMetric {
    /// Validates that no field depends on `v`, only `u, x, y` occur, and that `γ`
    /// is positive definite on a sample of the domain.
    pub fn new(
        h: Expression,
        omega: [Expression; 2],
        gamma: [[Expression; 2]; 2],
        domain: DomainBox,
        tol: Tolerances,
    ) -> Result<Self> {
        domain.validate()?;
        let named = [
            ("H", &h),
            ("Omega1", &omega[0]),
            ("Omega2", &omega[1]),
            ("gamma11", &gamma[0][0]),
            ("gamma12", &gamma[0][1]),
            ("gamma21", &gamma[1][0]),
            ("gamma22", &gamma[1][1]),
        ];
        for (name, e) in named {
            if e.depends_on("v") {
                return Err(Error::VDependence(name.to_string()));
            }
            if let Some(bad) = e.free_vars().into_iter().find(|v| !["u", "x", "y"].contains(&v.as_str())) {
                return Err(Error::Invalid(format!("field {name} uses unknown coordinate '{bad}'")));
            }
        }
        let components = build_components(&h, &omega, &gamma);
        let compiled = components.clone().map(|row| row.map(|e| compile4(&e)));
        let dg = std::array::from_fn(|c| {
            std::array::from_fn(|a| {
                std::array::from_fn(|b| compile4(&components[a][b].differentiate(COORDS[c])))
            })
        });
        let metric = BrinkmannMetric {
            h,
            omega,
            gamma,
            domain,
            tol,
            components,
            compiled,
            dg,
        };
        metric.check_gamma()?;
        Ok(metric)
    }

    /// Metric with `γ = δ`.
    pub fn flat_fiber(h: Expression, omega: [Expression; 2], domain: DomainBox) -> Result<Self> {
        Self::new(h, omega, identity_gamma(), domain, Tolerances::default())
    }

    /// pp-wave `2 du (dv + H du) + dx^2 + dy^2`.
    pub fn pp_wave(h: Expression, domain: DomainBox) -> Result<Self> {
        Self::flat_fiber(h, [Expression::zero(), Expression::zero()], domain)
    }

    /// Parses the fields from strings, with `γ = δ`.
    pub fn from_strs(h: &str, omega1: &str, omega2: &str, domain: DomainBox) -> Result<Self> {
        Self::flat_fiber(
            crate::expr::parse(h)?,
            [crate::expr::parse(omega1)?, crate::expr::parse(omega2)?],
            domain,
        )
    }

    pub fn minkowski(domain: DomainBox) -> Self {
        Self::pp_wave(Expression::zero(), domain).expect("Minkowski data is valid")
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    fn check_gamma(&self) -> Result<()> {
        let grid = GridSpec::new(3, 3, 3);
        let mut pts = grid.points(&self.domain);
        pts.push([self.domain.u[0], 0.0, self.domain.x[0], self.domain.y[0]]);
        pts.push([self.domain.u[1], 0.0, self.domain.x[1], self.domain.y[1]]);
        for p in pts {
            let g = self.gamma_at(&p)?;
            if (g[0][1] - g[1][0]).abs() > 1e-12 * (1.0 + g[0][1].abs()) {
                return Err(Error::Invalid(format!("gamma is not symmetric at {p:?}")));
            }
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            if !(g[0][0] > 0.0 && det > 0.0) {
                return Err(Error::GammaNotPositive(p));
            }
        }
        Ok(())
    }

    pub fn h(&self) -> &Expression {
        &self.h
    }

    pub fn omega(&self) -> &[Expression; 2] {
        &self.omega
    }

    pub fn gamma(&self) -> &[[Expression; 2]; 2] {
        &self.gamma
    }

    pub fn domain(&self) -> &DomainBox {
        &self.domain
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Symbolic components `g_ab` in `(u, v, x, y)` order.
    pub fn components(&self) -> &[[Expression; 4]; 4] {
        &self.components
    }

    /// Structural check: `γ` is the constant identity matrix.
    pub fn gamma_is_identity(&self) -> bool {
        let c = |e: &Expression| e.as_const();
        c(&self.gamma[0][0]) == Some(1.0)
            && c(&self.gamma[1][1]) == Some(1.0)
            && c(&self.gamma[0][1]) == Some(0.0)
            && c(&self.gamma[1][0]) == Some(0.0)
    }

    /// Max deviation of `γ` from the identity over a grid (zero for structural identity).
    pub fn gamma_identity_defect(&self, grid: &GridSpec) -> Result<f64> {
        if self.gamma_is_identity() {
            return Ok(0.0);
        }
        let mut worst: f64 = 0.0;
        for p in grid.points(&self.domain) {
            let g = self.gamma_at(&p)?;
            worst = worst
                .max((g[0][0] - 1.0).abs())
                .max((g[1][1] - 1.0).abs())
                .max(g[0][1].abs())
                .max(g[1][0].abs());
        }
        Ok(worst)
    }

    /// Requires `γ = δ`, as needed by the normalization pipeline.
    pub fn require_identity_gamma(&self) -> Result<()> {
        let defect = self.gamma_identity_defect(&GridSpec::new(3, 5, 5))?;
        if defect > self.tol.derivative {
            return Err(Error::GammaNotIdentity(defect));
        }
        Ok(())
    }

    fn gamma_at(&self, p: &Point) -> Result<[[f64; 2]; 2]> {
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                g[i][j] = self.compiled[X + i][X + j].eval(p)?;
            }
        }
        Ok(g)
    }

    /// True when no field depends on `u` syntactically.
    pub fn is_autonomous(&self) -> bool {
        !self.h.depends_on("u")
            && self.omega.iter().all(|e| !e.depends_on("u"))
            && self.gamma.iter().flatten().all(|e| !e.depends_on("u"))
    }

    /// Max over a grid of `|d/du|` of all metric components.
    pub fn u_dependence(&self, grid: &GridSpec) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in grid.points(&self.domain) {
            for row in &self.dg[U] {
                for c in row {
                    worst = worst.max(c.eval(&p)?.abs());
                }
            }
        }
        Ok(worst)
    }

    /// `g_ab(p)` without the domain check; used by the finite-difference oracle.
    pub(crate) fn components_raw(&self, p: &Point) -> Result<Matrix4> {
        let mut g = [[0.0; 4]; 4];
        for a in 0..4 {
            for b in a..4 {
                let v = self.compiled[a][b].eval(p)?;
                g[a][b] = v;
                g[b][a] = v;
            }
        }
        Ok(g)
    }

    /// `d_c g_ab(p)` from the symbolic derivatives, indexed `[c][a][b]`.
    pub(crate) fn metric_derivatives(&self, p: &Point) -> Result<[Matrix4; 4]> {
        let mut out = [[[0.0; 4]; 4]; 4];
        for c in 0..4 {
            for a in 0..4 {
                for b in a..4 {
                    let v = self.dg[c][a][b].eval(p)?;
                    out[c][a][b] = v;
                    out[c][b][a] = v;
                }
            }
        }
        Ok(out)
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        if p.iter().all(|c| c.is_finite()) && self.domain.contains(p) {
            Ok(())
        } else {
            Err(Error::OutsideDomain(*p))
        }
    }

    /// Symmetric matrix of components in `(u, v, x, y)` order:
    /// `g_uv = 1`, `g_uu = 2H`, `g_ui = Ω_i`, `g_ij = γ_ij`, `g_vv = g_vi = 0`.
    pub fn metric_components(&self, p: &Point) -> Result<Matrix4> {
        self.check_point(p)?;
        self.components_raw(p)
    }

    /// `g_p(a, b)`.
    pub fn inner(&self, p: &Point, a: &[f64; 4], b: &[f64; 4]) -> Result<f64> {
        let g = self.metric_components(p)?;
        Ok(quadratic_form(&g, a, b))
    }
}

pub fn quadratic_form(g: &Matrix4, a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += g[i][j] * a[i] * b[j];
        }
    }
    s
}

pub fn identity_gamma() -> [[Expression; 2]; 2] {
    [
        [Expression::one(), Expression::zero()],
        [Expression::zero(), Expression::one()],
    ]
}

fn build_components(
    h: &Expression,
    omega: &[Expression; 2],
    gamma: &[[Expression; 2]; 2],
) -> [[Expression; 4]; 4] {
    let z = Expression::zero;
    let mut g: [[Expression; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| z()));
    g[U][V] = Expression::one();
    g[V][U] = Expression::one();
    g[U][U] = Expression::scale(2.0, h.clone());
    for i in 0..2 {
        g[U][X + i] = omega[i].clone();
        g[X + i][U] = omega[i].clone();
        for j in 0..2 {
            g[X + i][X + j] = gamma[i][j].clone();
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn dom() -> DomainBox {
        DomainBox::new([-3.0, 3.0], [-3.0, 3.0], [-3.0, 3.0])
    }

    #[test]
    fn minkowski_components() {
        let m = BrinkmannMetric::minkowski(dom());
        let g = m.metric_components(&[0.3, 5.0, -1.0, 2.0]).unwrap();
        let mut expect = [[0.0; 4]; 4];
        expect[U][V] = 1.0;
        expect[V][U] = 1.0;
        expect[X][X] = 1.0;
        expect[Y][Y] = 1.0;
        assert_eq!(g, expect);
    }

    #[test]
    fn saddle_profile_components() {
        let m = BrinkmannMetric::from_strs("x^2 - y^2", "0", "0", dom()).unwrap();
        let g = m.metric_components(&[0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(g[U][U], -6.0);
        assert_eq!(g[U][V], 1.0);
        assert_eq!(g[X][X], 1.0);
        assert_eq!(g[Y][Y], 1.0);
    }

    #[test]
    fn rotational_omega_components() {
        let m = BrinkmannMetric::from_strs("0", "y", "-x", dom()).unwrap();
        let g = m.metric_components(&[0.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(g[U][X], 2.0);
        assert_eq!(g[U][Y], -1.0);
        assert_eq!(g[X][U], 2.0);
    }

    #[test]
    fn rejects_v_dependence_and_bad_gamma() {
        let d = dom();
        assert!(matches!(
            BrinkmannMetric::from_strs("v*x", "0", "0", d),
            Err(Error::VDependence(_))
        ));
        assert!(matches!(
            BrinkmannMetric::from_strs("z", "0", "0", d),
            Err(Error::Invalid(_))
        ));
        let gamma = [
            [parse("1").unwrap(), parse("0").unwrap()],
            [parse("0").unwrap(), parse("-1").unwrap()],
        ];
        assert!(matches!(
            BrinkmannMetric::new(parse("0").unwrap(), identity_gamma()[0].clone(), gamma, d, Tolerances::default()),
            Err(Error::GammaNotPositive(_))
        ));
    }

    #[test]
    fn outside_domain_is_an_error() {
        let m = BrinkmannMetric::minkowski(dom());
        assert!(matches!(
            m.metric_components(&[0.0, 0.0, 4.0, 0.0]),
            Err(Error::OutsideDomain(_))
        ));
        // v is unrestricted.
        assert!(m.metric_components(&[0.0, 1e6, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn grid_is_interior_and_lexicographic() {
        let pts = GridSpec::new(2, 2, 3).points(&dom());
        assert_eq!(pts.len(), 12);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts.iter().all(|p| p[U] > -3.0 && p[U] < 3.0));
    }
}
