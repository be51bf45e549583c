use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// `F ≈ a11 x² + 2 a12 xy + a22 y² + b1 x + b2 y + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadraticModel {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
    pub b1: f64,
    pub b2: f64,
    pub c: f64,
    /// Max `|F − model|` over the samples.
    pub residual: f64,
    /// Max `|F|` over the samples.
    pub max_abs: f64,
}

impl QuadraticModel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.a11 * x * x + 2.0 * self.a12 * x * y + self.a22 * y * y + self.b1 * x + self.b2 * y + self.c
    }

    pub fn coefficients(&self) -> [f64; 6] {
        [self.a11, self.a12, self.a22, self.b1, self.b2, self.c]
    }

    /// `residual ≤ tol (1 + max|F|)`.
    pub fn is_quadratic(&self, tol: f64) -> bool {
        self.residual <= tol * (1.0 + self.max_abs)
    }
}

/// Least-squares quadratic through `(points[i], values[i])`.
pub fn fit_samples(points: &[[f64; 2]], values: &[f64]) -> Result<QuadraticModel> {
    let n = points.len();
    if n < 6 || values.len() != n {
        return Err(Error::RankDeficient);
    }
    let a = DMatrix::from_fn(n, 6, |i, j| {
        let [x, y] = points[i];
        match j {
            0 => x * x,
            1 => 2.0 * x * y,
            2 => y * y,
            3 => x,
            4 => y,
            _ => 1.0,
        }
    });
    let b = DVector::from_column_slice(values);
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::RankDeficient);
    }
    let coef = svd.solve(&b, 0.0).map_err(|_| Error::RankDeficient)?;
    let fitted = &a * &coef;
    let residual = (0..n).fold(0.0f64, |m, i| m.max((fitted[i] - values[i]).abs()));
    let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(QuadraticModel {
        a11: coef[0],
        a12: coef[1],
        a22: coef[2],
        b1: coef[3],
        b2: coef[4],
        c: coef[5],
        residual,
        max_abs,
    })
}

/// Evaluates `F` at `samples` and fits.
pub fn quadratic_fit<F: Fn(f64, f64) -> f64>(f: &F, samples: &[[f64; 2]]) -> Result<QuadraticModel> {
    let values: Vec<f64> = samples.iter().map(|p| f(p[0], p[1])).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("non-finite sample value".into()));
    }
    fit_samples(samples, &values)
}

/// `n × n` equispaced samples of `[lo, hi]²`, endpoints included.
pub fn box_samples(lo: f64, hi: f64, n: usize) -> Vec<[f64; 2]> {
    let s = |i: usize| lo + (hi - lo) * i as f64 / (n - 1) as f64;
    (0..n).flat_map(|i| (0..n).map(move |j| [s(i), s(j)])).collect()
}

/// Point with `F(p) > k‖p‖² + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub k: u32,
    pub point: [f64; 2],
    pub value: f64,
    /// `F(p) − k‖p‖² − k`.
    pub margin: f64,
}

impl Witness {
    pub fn norm(&self) -> f64 {
        self.point[0].hypot(self.point[1])
    }
}

/// Grid points per axis of the witness scan.
pub const WITNESS_GRID: usize = 512;
/// Coordinate-ascent steps when the grid has no valid point.
pub const ASCENT_STEPS: usize = 20;

/// `F` tabulated once on a square grid, queried per `k`.
#[derive(Debug, Clone)]
pub struct WitnessGrid {
    pub radius: f64,
    pub n: usize,
    values: Vec<f64>,
}

impl WitnessGrid {
    pub fn new<F: Fn(f64, f64) -> f64 + Sync>(f: &F, radius: f64, n: usize) -> Self {
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let [x, y] = Self::coord(radius, n, idx);
                f(x, y)
            })
            .collect();
        WitnessGrid { radius, n, values }
    }

    fn coord(radius: f64, n: usize, idx: usize) -> [f64; 2] {
        let s = |i: usize| -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
        [s(idx / n), s(idx % n)]
    }

    fn point(&self, idx: usize) -> [f64; 2] {
        Self::coord(self.radius, self.n, idx)
    }

    /// Smallest-norm grid point with positive margin and norm above
    /// `min_norm`; ties go to the lexicographically smallest point. Without
    /// one, coordinate ascent from the best grid point.
    pub fn find<F: Fn(f64, f64) -> f64>(&self, f: &F, k: u32, min_norm: f64) -> Option<Witness> {
        let kf = k as f64;
        let margin = |p: [f64; 2], v: f64| v - kf * (p[0] * p[0] + p[1] * p[1]) - kf;
        let mut best: Option<(f64, usize)> = None;
        let mut fallback: Option<(f64, usize)> = None;
        for (idx, &v) in self.values.iter().enumerate() {
            let p = self.point(idx);
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2.sqrt() <= min_norm || !v.is_finite() {
                continue;
            }
            let m = margin(p, v);
            if m > 0.0 {
                if best.is_none_or(|(b, _)| r2 < b) {
                    best = Some((r2, idx));
                }
            } else if fallback.is_none_or(|(b, _)| m > b) {
                fallback = Some((m, idx));
            }
        }
        if let Some((_, idx)) = best {
            let p = self.point(idx);
            let v = self.values[idx];
            return Some(Witness { k, point: p, value: v, margin: margin(p, v) });
        }
        let (mut m, idx) = fallback?;
        let mut p = self.point(idx);
        let mut h = 2.0 * self.radius / (self.n - 1) as f64;
        let inside = |q: [f64; 2]| {
            q[0].abs() <= self.radius && q[1].abs() <= self.radius && q[0].hypot(q[1]) > min_norm
        };
        for _ in 0..ASCENT_STEPS {
            let mut moved = false;
            for d in [[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]] {
                let q = [p[0] + d[0], p[1] + d[1]];
                if !inside(q) {
                    continue;
                }
                let mq = margin(q, f(q[0], q[1]));
                if mq > m {
                    m = mq;
                    p = q;
                    moved = true;
                }
            }
            if !moved {
                h *= 0.5;
            }
        }
        (m > 0.0).then(|| Witness { k, point: p, value: f(p[0], p[1]), margin: m })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessSearch {
    pub witnesses: Vec<Witness>,
    /// First `k` without a witness, if any.
    pub first_failed: Option<u32>,
    pub radius: f64,
    pub min_norm: f64,
}

/// Witnesses for `k = 1, …, k_max` in `‖p‖∞ ≤ radius` with `‖p‖ > min_norm`,
/// stopping at the first `k` without one.
pub fn superquadratic_witnesses<F: Fn(f64, f64) -> f64 + Sync>(
    f: &F,
    k_max: u32,
    radius: f64,
    min_norm: f64,
) -> WitnessSearch {
    let grid = WitnessGrid::new(f, radius, WITNESS_GRID);
    let mut witnesses = Vec::new();
    let mut first_failed = None;
    for k in 1..=k_max {
        match grid.find(f, k, min_norm) {
            Some(w) => witnesses.push(w),
            None => {
                first_failed = Some(k);
                break;
            }
        }
    }
    WitnessSearch { witnesses, first_failed, radius, min_norm }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_fit_is_exact() {
        let m = quadratic_fit(&|x, y| x * x - y * y, &box_samples(-2.0, 2.0, 9)).unwrap();
        let expect = [1.0, 0.0, -1.0, 0.0, 0.0, 0.0];
        for (a, b) in m.coefficients().iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.residual < 1e-12);
        assert!(m.is_quadratic(1e-8));
    }

    #[test]
    fn non_quadratic_fits() {
        let s = box_samples(-2.0, 2.0, 21);
        let m = quadratic_fit(&|x: f64, y: f64| x.exp() * y.cos(), &s).unwrap();
        assert!(m.residual > 1.0, "{}", m.residual);
        let m = quadratic_fit(&|x: f64, y: f64| x.powi(3) - 3.0 * x * y * y, &box_samples(-1.0, 1.0, 11)).unwrap();
        assert!(m.residual > 0.1);
    }

    #[test]
    fn collinear_samples_are_rank_deficient() {
        let s: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, 2.0 * i as f64]).collect();
        assert_eq!(quadratic_fit(&|x, _| x, &s).unwrap_err(), Error::RankDeficient);
        assert_eq!(quadratic_fit(&|x, _| x, &s[..5]).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn exponential_has_witnesses() {
        let f = |x: f64, y: f64| x.exp() * y.cos();
        assert!(f(2.0, 0.0) > 5.0);
        let s = superquadratic_witnesses(&f, 5, 10.0, 0.0);
        assert_eq!(s.witnesses.len(), 5);
        assert!(s.first_failed.is_none());
        for w in &s.witnesses {
            assert!(w.margin > 0.0);
        }
    }

    #[test]
    fn square_has_no_witness_beyond_one() {
        let s = superquadratic_witnesses(&|x, _| x * x, 4, 10.0, 0.0);
        assert!(s.witnesses.is_empty());
        assert_eq!(s.first_failed, Some(1));
    }

    #[test]
    fn cubic_witnesses_escape() {
        let s = superquadratic_witnesses(&|x: f64, y: f64| x.powi(3) - 3.0 * x * y * y, 3, 10.0, 0.0);
        assert_eq!(s.witnesses.len(), 3);
        // r³ cos 3φ > 3r² + 3 needs r > 3.2 in every growth direction.
        assert!(s.witnesses[2].norm() > 3.2);
    }
}
