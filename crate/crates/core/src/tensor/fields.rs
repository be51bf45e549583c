use rayon::prelude::*;
use serde::Serialize;

use super::connection::{check_gamma_invertible, sup_norm, Connection};
use super::metric::{quadratic_form, BrinkmannMetric, GridSpec, Matrix4, Point, COORDS, V};
use crate::error::Result;
use crate::expr::{parse, CompiledExpr, Expression};

/// Vector field with components along `∂u, ∂v, ∂x, ∂y`.
#[derive(Debug, Clone)]
pub struct VectorField {
    comps: [Expression; 4],
    compiled: [CompiledExpr; 4],
    /// `∂_b Y^a` indexed `[b][a]`.
    jac: [[CompiledExpr; 4]; 4],
}

impl VectorField {
    pub fn new(comps: [Expression; 4]) -> Result<Self> {
        let compiled = comps
            .iter()
            .map(|e| e.compile(&COORDS))
            .collect::<Result<Vec<_>, _>>()?
            .try_into()
            .expect("four components");
        let mut jac: Vec<[CompiledExpr; 4]> = Vec::with_capacity(4);
        for name in COORDS {
            let row: Vec<CompiledExpr> = comps
                .iter()
                .map(|e| e.differentiate(name).compile(&COORDS))
                .collect::<Result<_, _>>()?;
            jac.push(row.try_into().expect("four components"));
        }
        Ok(VectorField {
            comps,
            compiled,
            jac: jac.try_into().expect("four rows"),
        })
    }

    pub fn parse(comps: [&str; 4]) -> Result<Self> {
        Self::new([parse(comps[0])?, parse(comps[1])?, parse(comps[2])?, parse(comps[3])?])
    }

    /// Coordinate field `∂_index`.
    pub fn coordinate(index: usize) -> Self {
        let comps = std::array::from_fn(|i| {
            if i == index {
                Expression::one()
            } else {
                Expression::zero()
            }
        });
        Self::new(comps).expect("constant field")
    }

    pub fn components(&self) -> &[Expression; 4] {
        &self.comps
    }

    pub fn at(&self, p: &Point) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, c) in out.iter_mut().zip(&self.compiled) {
            *o = c.eval(p)?;
        }
        Ok(out)
    }

    fn jacobian(&self, p: &Point) -> Result<Matrix4> {
        let mut out = [[0.0; 4]; 4];
        for b in 0..4 {
            for a in 0..4 {
                out[b][a] = self.jac[b][a].eval(p)?;
            }
        }
        Ok(out)
    }
}

/// `(L_Y g)_ab = Y^c ∂_c g_ab + g_cb ∂_a Y^c + g_ac ∂_b Y^c` at `p`.
pub fn killing_defect(m: &BrinkmannMetric, y: &VectorField, p: &Point) -> Result<Matrix4> {
    m.check_point(p)?;
    let g = m.components_raw(p)?;
    let dg = m.metric_derivatives(p)?;
    let yv = y.at(p)?;
    let dy = y.jacobian(p)?;
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            let mut s = 0.0;
            for c in 0..4 {
                s += yv[c] * dg[c][a][b] + g[c][b] * dy[a][c] + g[a][c] * dy[b][c];
            }
            out[a][b] = s;
        }
    }
    Ok(out)
}

/// `[X, Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a` at `p`.
pub fn bracket(x: &VectorField, y: &VectorField, p: &Point) -> Result<[f64; 4]> {
    let xv = x.at(p)?;
    let yv = y.at(p)?;
    let dx = x.jacobian(p)?;
    let dy = y.jacobian(p)?;
    let mut out = [0.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a] += xv[b] * dy[b][a] - yv[b] * dx[b][a];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityReport {
    /// `max − min` of `g(X, Y)` over the grid.
    pub inner_variation: f64,
    /// Max sup-norm of `[X, Y]` over the grid.
    pub max_bracket: f64,
    pub max_killing_defect_x: f64,
    pub max_killing_defect_y: f64,
    /// Variation of `g(X, X)` over the grid.
    pub x_norm_variation: f64,
    pub x_parallel: bool,
    pub y_killing: bool,
    /// `variation <= tol` iff `bracket <= tol`.
    pub consistent: bool,
    /// Both preconditions of the constancy/commutation equivalence hold.
    pub applicable: bool,
    pub tol: f64,
}

/// Numerically witnesses that, for `X` parallel and `Y` Killing, `[X, Y] = 0`
/// exactly when `g(X, Y)` is constant.
pub fn verify_transversality(
    m: &BrinkmannMetric,
    x: &VectorField,
    y: &VectorField,
    grid: &GridSpec,
) -> Result<TransversalityReport> {
    let tol = m.tol().derivative;
    let pts = grid.points(m.domain());
    let rows: Vec<[f64; 5]> = pts
        .par_iter()
        .map(|p| -> Result<[f64; 5]> {
            let g = m.components_raw(p)?;
            let xv = x.at(p)?;
            let yv = y.at(p)?;
            let br = bracket(x, y, p)?;
            Ok([
                quadratic_form(&g, &xv, &yv),
                br.iter().fold(0.0f64, |a, v| a.max(v.abs())),
                sup_norm(&killing_defect(m, x, p)?),
                sup_norm(&killing_defect(m, y, p)?),
                quadratic_form(&g, &xv, &xv),
            ])
        })
        .collect::<Result<_>>()?;
    let spread = |k: usize| {
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r[k]), hi.max(r[k])));
        if rows.is_empty() {
            0.0
        } else {
            hi - lo
        }
    };
    let max = |k: usize| rows.iter().fold(0.0f64, |a, r| a.max(r[k]));
    let inner_variation = spread(0);
    let max_bracket = max(1);
    let max_killing_defect_x = max(2);
    let max_killing_defect_y = max(3);
    let x_norm_variation = spread(4);
    let x_parallel = max_killing_defect_x <= tol && x_norm_variation <= tol;
    let y_killing = max_killing_defect_y <= tol;
    Ok(TransversalityReport {
        inner_variation,
        max_bracket,
        max_killing_defect_x,
        max_killing_defect_y,
        x_norm_variation,
        x_parallel,
        y_killing,
        consistent: (inner_variation <= tol) == (max_bracket <= tol),
        applicable: x_parallel && y_killing,
        tol,
    })
}

/// Max `|Γ^a_{bv}|` over a grid; zero means `∂v` is parallel.
pub fn dv_parallel_defect(m: &BrinkmannMetric, grid: &GridSpec) -> Result<f64> {
    let conn = Connection::new(m);
    let mut worst: f64 = 0.0;
    for p in grid.points(m.domain()) {
        let t = conn.table(&p)?;
        for a in 0..4 {
            for b in 0..4 {
                worst = worst.max(t.get(a, b, V).abs());
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CausalCharacter {
    Timelike,
    Null,
    Spacelike,
}

/// Sign of `g_p(w, w)` with a null band of width `tol.null_band`.
pub fn causal_character(
    m: &BrinkmannMetric,
    p: &Point,
    w: &[f64; 4],
) -> Result<(CausalCharacter, f64)> {
    let n = m.inner(p, w, w)?;
    let band = m.tol().null_band;
    let c = if n.abs() <= band {
        CausalCharacter::Null
    } else if n < 0.0 {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Spacelike
    };
    Ok((c, n))
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciFlatReport {
    pub flat: bool,
    pub max_violation: f64,
    pub worst_point: Point,
    pub tol: f64,
}

/// Max over the grid of the sup-norm of the Ricci tensor. Ties in the argmax go
/// to the lexicographically smallest point.
pub fn is_ricci_flat(m: &BrinkmannMetric, grid: &GridSpec) -> Result<RicciFlatReport> {
    let conn = Connection::new(m);
    let pts = grid.points(m.domain());
    let best = pts
        .par_iter()
        .map(|p| -> Result<(f64, Point)> {
            check_gamma_invertible(m, p)?;
            Ok((sup_norm(&conn.ricci(p)?), *p))
        })
        .try_reduce(
            || (0.0, [f64::INFINITY; 4]),
            |a, b| Ok(if prefer(&b, &a) { b } else { a }),
        )?;
    let tol = m.tol().derivative;
    Ok(RicciFlatReport {
        flat: best.0 <= tol,
        max_violation: best.0,
        worst_point: best.1,
        tol,
    })
}

/// Larger violation wins; ties go to the smaller point.
fn prefer(a: &(f64, Point), b: &(f64, Point)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}
