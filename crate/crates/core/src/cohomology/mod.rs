//! The cohomological equation `∂_θ a + ½ I ∂_z a = b` on the `ζ = 1` slice.
//!
//! A symbol is expanded in angular modes,
//! `b(z, w) = Σ_{n≥0} b_n(z, I) wⁿ + Σ_{n≥1} c_n(z, I) w̄ⁿ` with `I = |w|²`.
//! Since `∂_θ wⁿ = in wⁿ` and `∂_θ w̄ⁿ = −in w̄ⁿ`, each mode solves the ODE
//! `±in a_n + ½ I ∂_z a_n = b_n`; the solution vanishing as `z → −∞` is
//!
//! ```text
//! a_n(z, I) = (2/I) ∫_{−∞}^z b_n(u, I) e^{±i(2n/I)(u − z)} du,   a_n(z, 0) = b_n(z, 0)/(±in),
//! ```
//!
//! and, writing `b₀ = I c₀`, `a₀ = 2 ∫_{−∞}^z c₀(u, I) du`.
//!
//! # Interchange format
//!
//! A [`ModeSymbol`] serializes to JSON as
//!
//! ```text
//! {
//!   "n_max": 2,
//!   "z": {"min": -8.0, "max": 8.0, "count": 801},
//!   "i": {"min": 0.0, "max": 1.0, "count": 11},
//!   "mode0_factored": true,
//!   "mode0": [[re, im], ...],
//!   "pos": [[[re, im], ...], ...],
//!   "neg": [[[re, im], ...], ...]
//! }
//! ```
//!
//! Every mode array is row-major with `I` as the slow index: entry
//! `j * z.count + k` holds the value at `(z_k, I_j)`. `pos[n-1]` and
//! `neg[n-1]` hold the `wⁿ` and `w̄ⁿ` coefficients. When `mode0_factored`
//! is true, `mode0` stores `c₀` and the zero mode is `I·c₀`.

pub mod flat;
pub mod manufactured;
pub mod spline;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use spline::CubicSpline;

pub use flat::{flat_solver, FlatSolution, FlatSymbol};

/// A uniform grid `min, min + h, …, max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let g = Self { min, max, count };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::domain(format!(
                "grid bounds must be finite with min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.count < 2 {
            return Err(Error::domain("a grid needs at least two points"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.max
        } else {
            self.min + k as f64 * self.step()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }
}

/// Angular-mode representation of a symbol on a `(z, I)` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSymbol {
    pub n_max: usize,
    pub z: Grid,
    pub i: Grid,
    /// Whether the zero mode is stored as `c₀` with `b₀ = I·c₀`.
    pub mode0_factored: bool,
    pub mode0: Vec<Complex64>,
    /// `wⁿ` coefficients for `n = 1..=n_max`.
    pub pos: Vec<Vec<Complex64>>,
    /// `w̄ⁿ` coefficients for `n = 1..=n_max`.
    pub neg: Vec<Vec<Complex64>>,
}

/// Largest endpoint value, relative to the mode's maximum, that still counts
/// as compactly supported.
const SUPPORT_TOL: f64 = 1e-10;

impl ModeSymbol {
    /// The zero symbol.
    pub fn zeros(n_max: usize, z: Grid, i: Grid) -> Self {
        let len = z.count * i.count;
        Self {
            n_max,
            z,
            i,
            mode0_factored: true,
            mode0: vec![Complex64::default(); len],
            pos: vec![vec![Complex64::default(); len]; n_max],
            neg: vec![vec![Complex64::default(); len]; n_max],
        }
    }

    /// Fills every mode from closures of `(z, I)`; `c0` is the factor of the
    /// zero mode and `pos(n, ·)`, `neg(n, ·)` the oscillating modes.
    pub fn from_fn(
        n_max: usize,
        z: Grid,
        i: Grid,
        c0: impl Fn(f64, f64) -> Complex64,
        pos: impl Fn(usize, f64, f64) -> Complex64,
        neg: impl Fn(usize, f64, f64) -> Complex64,
    ) -> Self {
        let sample = |f: &dyn Fn(f64, f64) -> Complex64| -> Vec<Complex64> {
            let mut v = Vec::with_capacity(z.count * i.count);
            for j in 0..i.count {
                for k in 0..z.count {
                    v.push(f(z.point(k), i.point(j)));
                }
            }
            v
        };
        Self {
            n_max,
            z,
            i,
            mode0_factored: true,
            mode0: sample(&c0),
            pos: (1..=n_max)
                .map(|n| sample(&|zz, ii| pos(n, zz, ii)))
                .collect(),
            neg: (1..=n_max)
                .map(|n| sample(&|zz, ii| neg(n, zz, ii)))
                .collect(),
        }
    }

    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.z.count + k
    }

    /// Value of the zero mode itself, undoing the factorization.
    pub fn mode0_value(&self, j: usize, k: usize) -> Complex64 {
        let v = self.mode0[self.index(j, k)];
        if self.mode0_factored {
            v * self.i.point(j)
        } else {
            v
        }
    }

    /// Checks array shapes, grids and compact support in `z`.
    pub fn validate(&self) -> Result<()> {
        self.z.validate()?;
        self.i.validate()?;
        if self.i.min < 0.0 {
            return Err(Error::domain("the I grid must lie in [0, ∞)"));
        }
        if self.z.count < 5 {
            return Err(Error::domain("the z grid needs at least 5 points"));
        }
        let len = self.z.count * self.i.count;
        if self.pos.len() != self.n_max || self.neg.len() != self.n_max {
            return Err(Error::domain("mode count does not match n_max"));
        }
        for mode in std::iter::once(&self.mode0)
            .chain(&self.pos)
            .chain(&self.neg)
        {
            if mode.len() != len {
                return Err(Error::domain(format!(
                    "mode array has {} entries, expected {len}",
                    mode.len()
                )));
            }
            if mode.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::domain("mode values must be finite"));
            }
            let scale = mode.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for j in 0..self.i.count {
                let ends = [
                    mode[self.index(j, 0)],
                    mode[self.index(j, self.z.count - 1)],
                ];
                if ends.iter().any(|v| v.norm() > SUPPORT_TOL * scale.max(1.0)) {
                    return Err(Error::domain(
                        "symbol must vanish at both ends of the z grid (compact support)",
                    ));
                }
            }
        }
        Ok(())
    }

    fn same_grids(&self, other: &Self) -> bool {
        self.n_max == other.n_max && self.z == other.z && self.i == other.i
    }

    /// `self + s·other` on identical grids.
    pub fn axpy(&self, s: Complex64, other: &Self) -> Result<Self> {
        if !self.same_grids(other) || self.mode0_factored != other.mode0_factored {
            return Err(Error::domain("symbols live on different grids"));
        }
        let add = |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + s * y).collect()
        };
        Ok(Self {
            mode0: add(&self.mode0, &other.mode0),
            pos: self
                .pos
                .iter()
                .zip(&other.pos)
                .map(|(a, b)| add(a, b))
                .collect(),
            neg: self
                .neg
                .iter()
                .zip(&other.neg)
                .map(|(a, b)| add(a, b))
                .collect(),
            ..self.clone()
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mul = |a: &[Complex64]| -> Vec<Complex64> { a.iter().map(|x| s * x).collect() };
        Self {
            mode0: mul(&self.mode0),
            pos: self.pos.iter().map(|a| mul(a)).collect(),
            neg: self.neg.iter().map(|a| mul(a)).collect(),
            ..self.clone()
        }
    }

    /// `max |self − other|` over all modes and grid points.
    pub fn max_difference(&self, other: &Self) -> Result<f64> {
        if !self.same_grids(other) {
            return Err(Error::domain("symbols live on different grids"));
        }
        let mut m: f64 = 0.0;
        for j in 0..self.i.count {
            for k in 0..self.z.count {
                m = m.max((self.mode0_value(j, k) - other.mode0_value(j, k)).norm());
            }
        }
        for (a, b) in self
            .pos
            .iter()
            .chain(&self.neg)
            .zip(other.pos.iter().chain(&other.neg))
        {
            for (x, y) in a.iter().zip(b) {
                m = m.max((x - y).norm());
            }
        }
        Ok(m)
    }
}

/// Solution of one oscillating mode along one `I` row.
fn solve_row(values: &[Complex64], z: &Grid, i: f64, signed_n: f64) -> Vec<Complex64> {
    if i == 0.0 {
        let d = Complex64::new(0.0, signed_n);
        return values.iter().map(|b| b / d).collect();
    }
    let spline = CubicSpline::natural(z.step(), values);
    let omega = 2.0 * signed_n / i;
    let h = z.step();
    let rot = Complex64::from_polar(1.0, -omega * h);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = Complex64::default();
    out.push(acc);
    for cell in 0..values.len() - 1 {
        acc = acc * rot + spline.oscillatory_cell(cell, omega);
        out.push(acc * (2.0 / i));
    }
    out
}

/// Solves every mode of the cohomological equation.
///
/// Oscillating modes use Filon-type quadrature: the oscillation is integrated
/// exactly against the natural cubic spline of `b_n` on each cell and the
/// cells are accumulated by the recurrence
/// `A(z_k) = e^{−iωh} A(z_{k−1}) + ∫_{z_{k−1}}^{z_k} b e^{iω(u − z_k)} du`.
/// The zero mode is the exact integral of the spline of `c₀`. Modes and rows
/// are solved in parallel and assembled in a fixed order.
pub fn solve_modes(b: &ModeSymbol) -> Result<ModeSymbol> {
    b.validate()?;
    if b.n_max < 1 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    let (z, ig) = (b.z, b.i);
    let rows = |mode: &[Complex64], f: &(dyn Fn(&[Complex64], f64) -> Vec<Complex64> + Sync)| {
        (0..ig.count)
            .into_par_iter()
            .map(|j| f(&mode[j * z.count..(j + 1) * z.count], ig.point(j)))
            .collect::<Vec<_>>()
            .concat()
    };
    let factored = b.mode0_factored;
    let mode0 = rows(&b.mode0, &|row, i| {
        if factored {
            CubicSpline::natural(z.step(), row)
                .cumulative_integral()
                .into_iter()
                .map(|v| 2.0 * v)
                .collect()
        } else if i == 0.0 {
            // b₀(·, 0) must vanish for a solution to exist.
            vec![Complex64::default(); row.len()]
        } else {
            CubicSpline::natural(z.step(), row)
                .cumulative_integral()
                .into_iter()
                .map(|v| v * (2.0 / i))
                .collect()
        }
    });
    let jobs: Vec<(bool, usize)> = (1..=b.n_max)
        .flat_map(|n| [(true, n), (false, n)])
        .collect();
    let solved: Vec<Vec<Complex64>> = jobs
        .par_iter()
        .map(|&(positive, n)| {
            let src = if positive {
                &b.pos[n - 1]
            } else {
                &b.neg[n - 1]
            };
            let sn = if positive { n as f64 } else { -(n as f64) };
            rows(src, &|row, i| solve_row(row, &z, i, sn))
        })
        .collect();
    let mut pos = Vec::with_capacity(b.n_max);
    let mut neg = Vec::with_capacity(b.n_max);
    for ((positive, _), v) in jobs.iter().zip(solved) {
        if *positive {
            pos.push(v);
        } else {
            neg.push(v);
        }
    }
    Ok(ModeSymbol {
        n_max: b.n_max,
        z,
        i: ig,
        mode0_factored: false,
        mode0,
        pos,
        neg,
    })
}

/// Fourth-order central first derivative at interior index `k`.
fn d4(row: &[Complex64], k: usize, h: f64) -> Complex64 {
    (row[k - 2] - 8.0 * row[k - 1] + 8.0 * row[k + 1] - row[k + 2]) / (12.0 * h)
}

/// Applies the bracket `±in a_n + ½ I ∂_z a_n` mode by mode, with fourth-order
/// differences at interior points and zero in the two outer columns on each
/// side. The result carries an unfactored zero mode.
pub fn apply_bracket(a: &ModeSymbol) -> Result<ModeSymbol> {
    a.z.validate()?;
    a.i.validate()?;
    if a.z.count < 5 {
        return Err(Error::domain("the z grid needs at least 5 points"));
    }
    let (z, ig) = (a.z, a.i);
    let h = z.step();
    let apply = |mode: &dyn Fn(usize, usize) -> Complex64, signed_n: f64| -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); z.count * ig.count];
        for j in 0..ig.count {
            let i = ig.point(j);
            let row: Vec<Complex64> = (0..z.count).map(|k| mode(j, k)).collect();
            for k in 2..z.count - 2 {
                out[j * z.count + k] =
                    Complex64::new(0.0, signed_n) * row[k] + 0.5 * i * d4(&row, k, h);
            }
        }
        out
    };
    Ok(ModeSymbol {
        n_max: a.n_max,
        z,
        i: ig,
        mode0_factored: false,
        mode0: apply(&|j, k| a.mode0_value(j, k), 0.0),
        pos: (1..=a.n_max)
            .map(|n| apply(&|j, k| a.pos[n - 1][a.index(j, k)], n as f64))
            .collect(),
        neg: (1..=a.n_max)
            .map(|n| apply(&|j, k| a.neg[n - 1][a.index(j, k)], -(n as f64)))
            .collect(),
    })
}

/// `sup |±in a_n + ½ I ∂_z a_n − b_n|` over modes and interior grid points.
pub fn bracket_residual(a: &ModeSymbol, b: &ModeSymbol) -> Result<f64> {
    if !a.same_grids(b) {
        return Err(Error::domain("a and b must live on identical grids"));
    }
    let lhs = apply_bracket(a)?;
    let mut sup: f64 = 0.0;
    for j in 0..a.i.count {
        for k in 2..a.z.count - 2 {
            let idx = a.index(j, k);
            sup = sup.max((lhs.mode0[idx] - b.mode0_value(j, k)).norm());
            for n in 0..a.n_max {
                sup = sup.max((lhs.pos[n][idx] - b.pos[n][idx]).norm());
                sup = sup.max((lhs.neg[n][idx] - b.neg[n][idx]).norm());
            }
        }
    }
    Ok(sup)
}
