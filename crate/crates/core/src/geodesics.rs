//! Geodesics by an embedded Dormand–Prince 5(4) pair, classification of
//! pp-wave profiles, and the integrability test for `span{∂v, ∂u}^⊥`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::harmonic::{box_samples, quadratic_fit};
use crate::normalize::{extract_alpha, PpWaveForm};
use crate::tensor::metric::interior;
use crate::tensor::{quadratic_form, BrinkmannMetric, Connection, DomainBox, GridSpec, Point};

/// Position/velocity norm treated as blowup.
pub const BLOWUP_NORM: f64 = 1e12;
/// Step size treated as underflow.
pub const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeodesicState {
    pub s: f64,
    pub x: Point,
    pub dx: [f64; 4],
}

impl GeodesicState {
    pub fn new(x: Point, dx: [f64; 4]) -> Self {
        GeodesicState { s: 0.0, x, dx }
    }
}

/// `(ẋ, −Γ^a_{bc} ẋ^b ẋ^c)`.
pub fn geodesic_rhs(conn: &Connection, m: &BrinkmannMetric, x: &Point, dx: &[f64; 4]) -> Result<([f64; 4], [f64; 4])> {
    m.check_point(x)?;
    let t = conn.table(x)?;
    let mut acc = [0.0; 4];
    for a in 0..4 {
        let mut s = 0.0;
        for b in 0..4 {
            for c in 0..4 {
                s += t.gamma[a][b][c] * dx[b] * dx[c];
            }
        }
        acc[a] = -s;
    }
    Ok((*dx, acc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    /// Reached `s_max`; no blowup detected up to there.
    Completed,
    LeftDomain,
    Blowup,
    StepUnderflow,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-12,
            atol: 1e-12,
            initial_step: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub states: Vec<GeodesicState>,
    /// `g(ẋ, ẋ)` at each state.
    pub norms: Vec<f64>,
    pub exit: ExitReason,
    pub completed: bool,
    /// Max `|g(ẋ,ẋ)(s) − g(ẋ,ẋ)(0)|`.
    pub max_drift: f64,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("initial state")
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

type Y8 = [f64; 8];

fn pack(x: &Point, dx: &[f64; 4]) -> Y8 {
    [x[0], x[1], x[2], x[3], dx[0], dx[1], dx[2], dx[3]]
}

fn unpack(y: &Y8) -> (Point, [f64; 4]) {
    ([y[0], y[1], y[2], y[3]], [y[4], y[5], y[6], y[7]])
}

/// Integrates from `init` to `s_max`, stopping early on domain exit or blowup.
pub fn integrate_geodesic(
    m: &BrinkmannMetric,
    init: GeodesicState,
    s_max: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    m.check_point(&init.x)?;
    let conn = Connection::new(m);
    let f = |y: &Y8| -> Result<Y8> {
        let (x, dx) = unpack(y);
        let (a, b) = geodesic_rhs(&conn, m, &x, &dx)?;
        Ok([a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]])
    };
    let norm_at = |st: &GeodesicState| -> Result<f64> { Ok(quadratic_form(&m.metric_components(&st.x)?, &st.dx, &st.dx)) };
    let g0 = norm_at(&init)?;
    let mut states = vec![init];
    let mut norms = vec![g0];
    let mut y = pack(&init.x, &init.dx);
    let mut s = init.s;
    let mut h = opts.initial_step.min(s_max - s);
    let mut k1 = f(&y)?;
    let mut rejected = 0;
    let mut exit = ExitReason::Completed;
    let mut steps = 0;
    while s < s_max {
        if steps >= opts.max_steps || h < MIN_STEP {
            exit = ExitReason::StepUnderflow;
            break;
        }
        steps += 1;
        let last = s + h >= s_max;
        if last {
            h = s_max - s;
        }
        let mut k = [[0.0; 8]; 7];
        k[0] = k1;
        let mut stage_err = None;
        for i in 1..7 {
            let mut yi = y;
            for j in 0..i {
                for n in 0..8 {
                    yi[n] += h * A[i][j] * k[j][n];
                }
            }
            match f(&yi) {
                Ok(v) => k[i] = v,
                Err(e) => {
                    stage_err = Some((e, yi));
                    break;
                }
            }
        }
        if let Some((e, yi)) = stage_err {
            // A stage left the domain: shrink, or stop if the state itself is at the edge.
            let (x, _) = unpack(&yi);
            if !matches!(e, Error::OutsideDomain(_)) {
                return Err(e);
            }
            if x.iter().chain(y.iter()).any(|v| v.abs() > BLOWUP_NORM) {
                exit = ExitReason::Blowup;
                break;
            }
            h *= 0.5;
            rejected += 1;
            if h < MIN_STEP {
                exit = ExitReason::LeftDomain;
                break;
            }
            continue;
        }
        let mut y5 = y;
        let mut err: f64 = 0.0;
        for n in 0..8 {
            let mut d5 = 0.0;
            let mut d4 = 0.0;
            for i in 0..7 {
                d5 += B5[i] * k[i][n];
                d4 += B4[i] * k[i][n];
            }
            y5[n] += h * d5;
            let sc = opts.atol + opts.rtol * y[n].abs().max(y5[n].abs());
            err = err.max((h * (d5 - d4) / sc).abs());
        }
        if !err.is_finite() {
            h *= 0.25;
            rejected += 1;
            continue;
        }
        if err <= 1.0 {
            s = if last { s_max } else { s + h };
            y = y5;
            k1 = k[6];
            let (x, dx) = unpack(&y);
            let st = GeodesicState { s, x, dx };
            if y.iter().any(|v| !(v.abs() <= BLOWUP_NORM)) {
                states.push(st);
                norms.push(f64::NAN);
                exit = ExitReason::Blowup;
                break;
            }
            norms.push(norm_at(&st).unwrap_or(f64::NAN));
            states.push(st);
        } else {
            rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
    }
    let max_drift = norms
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0f64, |a, v| a.max((v - g0).abs()));
    Ok(Trajectory {
        completed: exit == ExitReason::Completed,
        states,
        norms,
        exit,
        max_drift,
        rejected_steps: rejected,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    PlaneWave,
    CahenWallach,
    GeneralPpWave,
}

/// Quadratic coefficients of `H(u, ·)` at one `u`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceCoefficients {
    pub u: f64,
    /// `(a11, a12, a22, b1, b2, c)`, `H = a11x² + 2a12xy + a22y² + b1x + b2y + c`.
    pub coefficients: [f64; 6],
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub kind: ClassKind,
    /// Eigenvalues of `2[[a11, a12], [a12, a22]]`, descending.
    pub eigenvalues: Option<[f64; 2]>,
    /// Symbolic `a11, a12, a22` when read from the expression.
    pub coefficient_functions: Option<[String; 3]>,
    pub slices: Vec<SliceCoefficients>,
    pub method: &'static str,
    pub u_variation: f64,
    pub tol: f64,
}

/// Eigenvalues of a symmetric 2×2 matrix, descending.
pub fn sym2_eigenvalues(a: f64, b: f64, d: f64) -> [f64; 2] {
    let m = 0.5 * (a + d);
    let r = (0.5 * (a - d)).hypot(b);
    [m + r, m - r]
}

const CLASSIFY_SLICES: usize = 5;
const CLASSIFY_SAMPLES: usize = 11;

fn finish_classification(
    slices: Vec<SliceCoefficients>,
    quadratic: bool,
    u_variation: f64,
    coefficient_functions: Option<[String; 3]>,
    method: &'static str,
    tol: f64,
) -> Classification {
    if !quadratic {
        return Classification {
            kind: ClassKind::GeneralPpWave,
            eigenvalues: None,
            coefficient_functions: None,
            slices,
            method,
            u_variation,
            tol,
        };
    }
    let c = slices[0].coefficients;
    let lam = sym2_eigenvalues(2.0 * c[0], 2.0 * c[1], 2.0 * c[2]);
    let cw = u_variation <= tol && lam.iter().all(|l| l.abs() > tol);
    Classification {
        kind: if cw { ClassKind::CahenWallach } else { ClassKind::PlaneWave },
        eigenvalues: cw.then_some(lam),
        coefficient_functions,
        slices,
        method,
        u_variation,
        tol,
    }
}

fn variation(slices: &[SliceCoefficients]) -> f64 {
    let mut v: f64 = 0.0;
    for s in slices {
        for (a, b) in s.coefficients.iter().zip(slices[0].coefficients.iter()) {
            v = v.max((a - b).abs());
        }
    }
    v
}

/// Classifies a profile `H(u, x, y)` on `domain`.
pub fn classify_h(h: &Expression, domain: &DomainBox, tol: f64) -> Result<Classification> {
    let us = interior(domain.u, CLASSIFY_SLICES);
    if h.polynomial_degree(&["x", "y"]).is_some_and(|d| d <= 2) {
        let at0 = |e: Expression| e.fix("x", 0.0).fix("y", 0.0);
        let hx = h.differentiate("x");
        let hy = h.differentiate("y");
        let exprs = [
            at0(Expression::scale(0.5, hx.differentiate("x"))),
            at0(Expression::scale(0.5, hx.differentiate("y"))),
            at0(Expression::scale(0.5, hy.differentiate("y"))),
            at0(hx),
            at0(hy),
            at0(h.clone()),
        ];
        let compiled = exprs
            .iter()
            .map(|e| e.compile(&["u"]))
            .collect::<Result<Vec<_>, _>>()?;
        let mut slices = Vec::new();
        for &u in &us {
            let mut c = [0.0; 6];
            for (ci, e) in c.iter_mut().zip(&compiled) {
                *ci = e.eval(&[u])?;
            }
            slices.push(SliceCoefficients { u, coefficients: c, residual: 0.0 });
        }
        let u_independent = exprs.iter().all(|e| !e.depends_on("u"));
        let u_variation = if u_independent { 0.0 } else { variation(&slices) };
        let funcs = [exprs[0].to_string(), exprs[1].to_string(), exprs[2].to_string()];
        return Ok(finish_classification(slices, true, u_variation, Some(funcs), "polynomial", tol));
    }
    let c = h.compile(&["u", "x", "y"])?;
    classify_fn(|u, x, y| c.eval_or_nan(&[u, x, y]), domain, tol)
}

/// Classifies by least-squares fits at `u`-slices.
pub fn classify_fn<F: Fn(f64, f64, f64) -> f64>(h: F, domain: &DomainBox, tol: f64) -> Result<Classification> {
    let us = interior(domain.u, CLASSIFY_SLICES);
    let mut slices = Vec::new();
    let mut quadratic = true;
    for &u in &us {
        let pts: Vec<[f64; 2]> = box_samples(0.0, 1.0, CLASSIFY_SAMPLES)
            .into_iter()
            .map(|[a, b]| {
                [
                    domain.x[0] + (domain.x[1] - domain.x[0]) * a,
                    domain.y[0] + (domain.y[1] - domain.y[0]) * b,
                ]
            })
            .collect();
        let fit = quadratic_fit(&|x, y| h(u, x, y), &pts)?;
        quadratic &= fit.is_quadratic(tol);
        slices.push(SliceCoefficients {
            u,
            coefficients: fit.coefficients(),
            residual: fit.residual,
        });
    }
    let u_variation = variation(&slices);
    Ok(finish_classification(slices, quadratic, u_variation, None, "fit", tol))
}

/// Classifies the pp-wave `H̃` on the mapped domain.
pub fn classify_pp(form: &PpWaveForm, tol: f64) -> Result<Classification> {
    classify_fn(|u, x, y| form.h_tilde_or_nan(u, x, y), &form.mapped_domain, tol)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IntegrabilityReport {
    pub integrable: bool,
    pub alpha: f64,
    /// Max `|∂_y Ω₁ − ∂_x Ω₂|` over the grid.
    pub closedness_defect: f64,
}

/// `span{∂v, ∂u}^⊥` is integrable iff `α = 0`.
pub fn transversal_integrability(m: &BrinkmannMetric, grid: &GridSpec) -> Result<IntegrabilityReport> {
    if !m.is_autonomous() {
        return Err(Error::NonAutonomous(m.u_dependence(grid)?));
    }
    let a = extract_alpha(m, grid)?;
    let alpha = a.at(0.0)?;
    let curl = Expression::sub(m.omega()[0].differentiate("y"), m.omega()[1].differentiate("x"))
        .compile(&["u", "v", "x", "y"])?;
    let mut closedness_defect: f64 = 0.0;
    for p in grid.points(m.domain()) {
        closedness_defect = closedness_defect.max(curl.eval(&p)?.abs());
    }
    Ok(IntegrabilityReport {
        integrable: alpha.abs() <= m.tol().derivative,
        alpha,
        closedness_defect,
    })
}
