//! Closed-form Levi-Civita connection of a standard Brinkmann metric and the
//! curvature derived from it.
//!
//! Only `Γ^i_{uu}`, `Γ^i_{uk}`, `Γ^i_{jk}`, `Γ^v_{uu}`, `Γ^v_{uk}` and `Γ^v_{kl}`
//! can be nonzero; every symbol with an upper `u` or a lower `v` vanishes.

use serde::Serialize;

use super::metric::{BrinkmannMetric, Matrix4, Point, COORDS, U, V, X};
use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expression};

/// `Γ^a_{bc}` at a point, indexed `[a][b][c]` in `(u, v, x, y)` order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChristoffelTable {
    pub point: Point,
    pub gamma: [[[f64; 4]; 4]; 4],
}

impl ChristoffelTable {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.gamma[a][b][c]
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry-wise difference to another table.
    pub fn max_diff(&self, other: &ChristoffelTable) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    m = m.max((self.gamma[a][b][c] - other.gamma[a][b][c]).abs());
                }
            }
        }
        m
    }
}

type Sym3 = [[[Expression; 4]; 4]; 4];

fn zeros3() -> Sym3 {
    std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| Expression::zero())))
}

/// Symbolic Christoffel symbols plus their first derivatives, compiled for
/// fast evaluation.
#[derive(Debug, Clone)]
pub struct Connection {
    symbols: Sym3,
    compiled: Vec<(usize, usize, usize, CompiledExpr)>,
    /// `(d, a, b, c, ∂_d Γ^a_{bc})` for the nonzero derivatives, `b <= c`.
    derivatives: Vec<(usize, usize, usize, usize, CompiledExpr)>,
}

impl Connection {
    pub fn new(m: &BrinkmannMetric) -> Self {
        let symbols = christoffel_symbolic(m);
        let mut compiled = Vec::new();
        let mut derivatives = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                for c in b..4 {
                    let e = &symbols[a][b][c];
                    if e.is_zero() {
                        continue;
                    }
                    compiled.push((a, b, c, e.compile(&COORDS).expect("coordinates only")));
                    for (d, name) in COORDS.iter().enumerate() {
                        let de = e.differentiate(name);
                        if !de.is_zero() {
                            derivatives.push((d, a, b, c, de.compile(&COORDS).expect("coordinates only")));
                        }
                    }
                }
            }
        }
        Connection {
            symbols,
            compiled,
            derivatives,
        }
    }

    /// The symbolic expression of `Γ^a_{bc}`.
    pub fn symbol(&self, a: usize, b: usize, c: usize) -> &Expression {
        &self.symbols[a][b][c]
    }

    pub fn table(&self, p: &Point) -> Result<ChristoffelTable> {
        let mut gamma = [[[0.0; 4]; 4]; 4];
        for (a, b, c, e) in &self.compiled {
            let v = e.eval(p)?;
            gamma[*a][*b][*c] = v;
            gamma[*a][*c][*b] = v;
        }
        Ok(ChristoffelTable { point: *p, gamma })
    }

    /// `∂_d Γ^a_{bc}` indexed `[d][a][b][c]`.
    pub fn derivative_table(&self, p: &Point) -> Result<[[[[f64; 4]; 4]; 4]; 4]> {
        let mut out = [[[[0.0; 4]; 4]; 4]; 4];
        for (d, a, b, c, e) in &self.derivatives {
            let v = e.eval(p)?;
            out[*d][*a][*b][*c] = v;
            out[*d][*a][*c][*b] = v;
        }
        Ok(out)
    }

    /// Riemann tensor `R^ρ_{σμν}` indexed `[ρ][σ][μ][ν]`.
    pub fn riemann(&self, p: &Point) -> Result<Riemann> {
        let g = self.table(p)?;
        let dg = self.derivative_table(p)?;
        Ok(riemann_from(&g.gamma, &dg))
    }

    pub fn ricci(&self, p: &Point) -> Result<Matrix4> {
        Ok(ricci_from(&self.riemann(p)?))
    }
}

pub type Riemann = [[[[f64; 4]; 4]; 4]; 4];

/// `R^ρ_{σμν} = ∂_μ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{μσ} + Γ^ρ_{μλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{μσ}`,
/// with `dgamma[d][a][b][c] = ∂_d Γ^a_{bc}`.
pub fn riemann_from(gamma: &[[[f64; 4]; 4]; 4], dgamma: &[[[[f64; 4]; 4]; 4]; 4]) -> Riemann {
    let mut r = [[[[0.0; 4]; 4]; 4]; 4];
    for rho in 0..4 {
        for sigma in 0..4 {
            for mu in 0..4 {
                for nu in 0..4 {
                    let mut s = dgamma[mu][rho][nu][sigma] - dgamma[nu][rho][mu][sigma];
                    for lam in 0..4 {
                        s += gamma[rho][mu][lam] * gamma[lam][nu][sigma]
                            - gamma[rho][nu][lam] * gamma[lam][mu][sigma];
                    }
                    r[rho][sigma][mu][nu] = s;
                }
            }
        }
    }
    r
}

/// `Ric_{σν} = R^ρ_{σρν}`, symmetrized.
pub fn ricci_from(r: &Riemann) -> Matrix4 {
    let mut ric = [[0.0; 4]; 4];
    for sigma in 0..4 {
        for nu in 0..4 {
            ric[sigma][nu] = (0..4).map(|rho| r[rho][sigma][rho][nu]).sum();
        }
    }
    let mut out = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            out[a][b] = 0.5 * (ric[a][b] + ric[b][a]);
        }
    }
    out
}

fn christoffel_symbolic(m: &BrinkmannMetric) -> Sym3 {
    let h = m.h();
    let om = m.omega();
    let gm = m.gamma();
    let d = |e: &Expression, var: &str| e.differentiate(var);
    let sp = ["x", "y"];

    // Inverse of the 2x2 fiber metric.
    let det = Expression::sub(
        Expression::mul(gm[0][0].clone(), gm[1][1].clone()),
        Expression::mul(gm[0][1].clone(), gm[1][0].clone()),
    );
    let ginv = [
        [
            Expression::div(gm[1][1].clone(), det.clone()),
            Expression::div(Expression::neg(gm[0][1].clone()), det.clone()),
        ],
        [
            Expression::div(Expression::neg(gm[1][0].clone()), det.clone()),
            Expression::div(gm[0][0].clone(), det.clone()),
        ],
    ];

    // Lowered fiber symbols Γ^Q_{i,jk} = ½(∂_j γ_ik + ∂_k γ_ij − ∂_i γ_jk).
    let q_low: [[[Expression; 2]; 2]; 2] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                Expression::scale(
                    0.5,
                    Expression::sub(
                        Expression::add(d(&gm[i][k], sp[j]), d(&gm[i][j], sp[k])),
                        d(&gm[j][k], sp[i]),
                    ),
                )
            })
        })
    });
    // (dΩ)_jk = ∂_j Ω_k − ∂_k Ω_j
    let d_omega: [[Expression; 2]; 2] = std::array::from_fn(|j| {
        std::array::from_fn(|k| Expression::sub(d(&om[k], sp[j]), d(&om[j], sp[k])))
    });
    // Lowered Γ_{j,uu} = ∂_u Ω_j − ∂_j H and Γ_{j,uk} = ½(∂_u γ_jk − (dΩ)_jk).
    let low_uu: [Expression; 2] = std::array::from_fn(|j| Expression::sub(d(&om[j], "u"), d(h, sp[j])));
    let low_uk: [[Expression; 2]; 2] = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            Expression::scale(0.5, Expression::sub(d(&gm[j][k], "u"), d_omega[j][k].clone()))
        })
    });
    let raise = |low: &dyn Fn(usize) -> Expression, i: usize| {
        Expression::sum((0..2).map(|j| Expression::mul(ginv[i][j].clone(), low(j))))
    };
    // γ^{ij} Ω_j, the vector contracted into the v-row.
    let omega_up: [Expression; 2] = std::array::from_fn(|i| raise(&|j| om[j].clone(), i));

    let mut g = zeros3();
    for i in 0..2 {
        let gi = X + i;
        g[gi][U][U] = raise(&|j| low_uu[j].clone(), i);
        for k in 0..2 {
            let e = raise(&|j| low_uk[j][k].clone(), i);
            g[gi][U][X + k] = e.clone();
            g[gi][X + k][U] = e;
            for l in 0..2 {
                g[gi][X + k][X + l] = raise(&|j| q_low[j][k][l].clone(), i);
            }
        }
    }
    // Γ^v_{uu} = ∂_u H − γ^{ij} Ω_j Γ_{i,uu}
    g[V][U][U] = Expression::sub(
        d(h, "u"),
        Expression::sum((0..2).map(|i| Expression::mul(omega_up[i].clone(), low_uu[i].clone()))),
    );
    for k in 0..2 {
        // Γ^v_{uk} = ∂_k H − γ^{ij} Ω_j Γ_{i,uk}
        let e = Expression::sub(
            d(h, sp[k]),
            Expression::sum((0..2).map(|i| Expression::mul(omega_up[i].clone(), low_uk[i][k].clone()))),
        );
        g[V][U][X + k] = e.clone();
        g[V][X + k][U] = e;
        for l in 0..2 {
            // Γ^v_{kl} = ½(∂_k Ω_l + ∂_l Ω_k − ∂_u γ_kl) − γ^{ij} Ω_j Γ^Q_{i,kl}
            let sym = Expression::scale(
                0.5,
                Expression::sub(
                    Expression::add(d(&om[l], sp[k]), d(&om[k], sp[l])),
                    d(&gm[k][l], "u"),
                ),
            );
            g[V][X + k][X + l] = Expression::sub(
                sym,
                Expression::sum((0..2).map(|i| Expression::mul(omega_up[i].clone(), q_low[i][k][l].clone()))),
            );
        }
    }
    g
}

/// Christoffel table at an interior point.
pub fn christoffel(m: &BrinkmannMetric, p: &Point) -> Result<ChristoffelTable> {
    m.check_point(p)?;
    check_gamma_invertible(m, p)?;
    Connection::new(m).table(p)
}

/// Ricci tensor at a point under the convention of [`riemann_from`].
pub fn ricci(m: &BrinkmannMetric, p: &Point) -> Result<Matrix4> {
    m.check_point(p)?;
    check_gamma_invertible(m, p)?;
    Connection::new(m).ricci(p)
}

pub(crate) fn check_gamma_invertible(m: &BrinkmannMetric, p: &Point) -> Result<()> {
    let g = m.components_raw(p)?;
    let det = g[X][X] * g[X + 1][X + 1] - g[X][X + 1] * g[X + 1][X];
    if det.abs() <= f64::EPSILON * (g[X][X].abs() + g[X + 1][X + 1].abs()).powi(2) {
        return Err(Error::GammaSingular(*p));
    }
    Ok(())
}

pub fn sup_norm(m: &Matrix4) -> f64 {
    m.iter().flatten().fold(0.0, |acc, v| acc.max(v.abs()))
}
