//! Finite-difference route to the connection and curvature.
//!
//! Everything here is computed from numeric values of `g_ab` only: central
//! differences with step `h` and one level of Richardson extrapolation
//! (`(4 D(h/2) − D(h)) / 3`), a numeric matrix inverse and the generic
//! Levi-Civita formula. It shares no code with the closed-form connection.

use nalgebra::Matrix4 as NaMatrix4;

use super::connection::ChristoffelTable;
use super::metric::{BrinkmannMetric, Matrix4, Point};
use crate::error::{Error, Result};

/// Default step of the oracle.
pub const FD_STEP: f64 = 1e-4;

fn richardson<T, F>(p: &Point, dir: usize, h: f64, f: &F) -> Result<T>
where
    T: Lin,
    F: Fn(&Point) -> Result<T>,
{
    let central = |step: f64| -> Result<T> {
        let mut plus = *p;
        let mut minus = *p;
        plus[dir] += step;
        minus[dir] -= step;
        Ok(f(&plus)?.axpy(-1.0, &f(&minus)?).scaled(1.0 / (2.0 * step)))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(fine.scaled(4.0 / 3.0).axpy(-1.0 / 3.0, &coarse))
}

/// Minimal linear-space operations for fixed-size arrays.
trait Lin: Sized {
    fn scaled(self, s: f64) -> Self;
    fn axpy(self, s: f64, other: &Self) -> Self;
}

impl Lin for Matrix4 {
    fn scaled(mut self, s: f64) -> Self {
        self.iter_mut().flatten().for_each(|v| *v *= s);
        self
    }
    fn axpy(mut self, s: f64, o: &Self) -> Self {
        for a in 0..4 {
            for b in 0..4 {
                self[a][b] += s * o[a][b];
            }
        }
        self
    }
}

impl Lin for [[[f64; 4]; 4]; 4] {
    fn scaled(mut self, s: f64) -> Self {
        self.iter_mut().flatten().flatten().for_each(|v| *v *= s);
        self
    }
    fn axpy(mut self, s: f64, o: &Self) -> Self {
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    self[a][b][c] += s * o[a][b][c];
                }
            }
        }
        self
    }
}

/// Numeric `∂_c g_ab` indexed `[c][a][b]`.
pub fn metric_derivatives_fd(m: &BrinkmannMetric, p: &Point, h: f64) -> Result<[Matrix4; 4]> {
    let f = |q: &Point| m.components_raw(q);
    Ok([
        richardson(p, 0, h, &f)?,
        richardson(p, 1, h, &f)?,
        richardson(p, 2, h, &f)?,
        richardson(p, 3, h, &f)?,
    ])
}

fn inverse(g: &Matrix4, p: &Point) -> Result<Matrix4> {
    let na = NaMatrix4::from_fn(|i, j| g[i][j]);
    let inv = na.try_inverse().ok_or(Error::GammaSingular(*p))?;
    Ok(std::array::from_fn(|i| std::array::from_fn(|j| inv[(i, j)])))
}

fn levi_civita(ginv: &Matrix4, dg: &[Matrix4; 4]) -> [[[f64; 4]; 4]; 4] {
    let mut out = [[[0.0; 4]; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                let mut s = 0.0;
                for d in 0..4 {
                    s += ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                }
                out[a][b][c] = 0.5 * s;
            }
        }
    }
    out
}

fn christoffel_raw(m: &BrinkmannMetric, p: &Point, h: f64) -> Result<[[[f64; 4]; 4]; 4]> {
    let g = m.components_raw(p)?;
    let ginv = inverse(&g, p)?;
    let dg = metric_derivatives_fd(m, p, h)?;
    Ok(levi_civita(&ginv, &dg))
}

/// Christoffel symbols from finite differences of the metric components.
pub fn christoffel_fd(m: &BrinkmannMetric, p: &Point, h: f64) -> Result<ChristoffelTable> {
    Ok(ChristoffelTable {
        point: *p,
        gamma: christoffel_raw(m, p, h)?,
    })
}

/// Ricci tensor with both derivative levels taken by finite differences,
/// contracted directly as
/// `Ric_{σν} = ∂_ρ Γ^ρ_{νσ} − ∂_ν Γ^ρ_{ρσ} + Γ^ρ_{ρλ} Γ^λ_{νσ} − Γ^ρ_{νλ} Γ^λ_{ρσ}`.
pub fn ricci_fd(m: &BrinkmannMetric, p: &Point, h: f64) -> Result<Matrix4> {
    let gamma = christoffel_raw(m, p, h)?;
    let f = |q: &Point| christoffel_raw(m, q, h);
    let dgamma: Vec<[[[f64; 4]; 4]; 4]> = (0..4)
        .map(|d| richardson(p, d, h, &f))
        .collect::<Result<_>>()?;
    let trace: [f64; 4] = std::array::from_fn(|lam| (0..4).map(|rho| gamma[rho][rho][lam]).sum());
    let mut ric = [[0.0; 4]; 4];
    for sigma in 0..4 {
        for nu in 0..4 {
            let mut s = 0.0;
            for rho in 0..4 {
                s += dgamma[rho][rho][nu][sigma] - dgamma[nu][rho][rho][sigma];
                for lam in 0..4 {
                    s -= gamma[rho][nu][lam] * gamma[lam][rho][sigma];
                }
            }
            for lam in 0..4 {
                s += trace[lam] * gamma[lam][nu][sigma];
            }
            ric[sigma][nu] = s;
        }
    }
    Ok(ric)
}
