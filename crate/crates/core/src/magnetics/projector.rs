//! Diagonal of the lowest Landau projector for `ζ = 1`, summed from explicit
//! eigenfunctions.
//!
//! The lowest level of `H_1` is spanned by `ψ_k = (x + iy)^k e^{−r²/4} / √N_k`,
//! `k ≥ 0`. The norms `N_k = ∫ |w|^{2k} e^{−r²/2}` are computed by radial
//! quadrature, and `Σ_k |ψ_k(q)|²` is summed at the requested points until the
//! remaining terms are below rounding.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_real, NeumaierSum, QuadOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorDiagonal {
    pub points: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub terms_used: Vec<usize>,
    /// `max_q |Σ_k |ψ_k(q)|² − 1/(2π)|`.
    pub max_deviation: f64,
}

/// Radial quadrature for `N_k = 2π ∫_0^∞ r^{2k+1} e^{−r²/2} dr`.
///
/// The integrand is evaluated as `exp((2k+1) ln r − r²/2)` and the range is
/// cut where it has fallen by `e^{−60}` from its peak at `r² = 2k + 1`.
fn norm_by_quadrature(k: usize) -> Result<f64> {
    let p = (2 * k + 1) as f64;
    let peak = p.sqrt();
    let log_peak = p * peak.ln() - 0.5 * p;
    let f = |r: f64| {
        if r <= 0.0 {
            0.0
        } else {
            (p * r.ln() - 0.5 * r * r - log_peak).exp()
        }
    };
    let upper = peak + 12.0;
    let opts = QuadOptions {
        abs_tol: 0.0,
        rel_tol: 1e-14,
        initial_panels: 16,
        ..QuadOptions::default()
    };
    let (v, _) = integrate_real(f, 0.0, upper, opts)?;
    Ok(2.0 * PI * v * log_peak.exp())
}

/// Largest number of eigenfunctions summed at one point.
const MAX_TERMS: usize = 400;

/// `Σ_k |ψ_k(x, y)|²` at each point, against the constant `1/(2π)`.
pub fn lowest_level_diagonal(points: &[(f64, f64)]) -> Result<ProjectorDiagonal> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::domain("points must be finite"));
    }
    let r_max = points.iter().map(|(x, y)| x.hypot(*y)).fold(0.0, f64::max);
    if r_max > 20.0 {
        return Err(Error::domain("points must lie within radius 20"));
    }
    let mut norms: Vec<f64> = Vec::new();
    let mut values = Vec::with_capacity(points.len());
    let mut terms_used = Vec::with_capacity(points.len());
    for &(x, y) in points {
        let r2 = x * x + y * y;
        let mut acc = NeumaierSum::default();
        let mut k = 0;
        loop {
            if k == norms.len() {
                norms.push(norm_by_quadrature(k)?);
            }
            let w = Complex64::new(x, y).powu(k as u32);
            let term = w.norm_sqr() * (-0.5 * r2).exp() / norms[k];
            acc.add(term);
            k += 1;
            // Past the peak at k ≈ r²/2 the terms decay faster than geometrically.
            if (k as f64) > r2 && term <= 1e-18 * acc.total() {
                break;
            }
            if k >= MAX_TERMS {
                return Err(Error::precision(
                    format!("projector series at ({x}, {y}) did not settle in {MAX_TERMS} terms"),
                    term,
                ));
            }
        }
        values.push(acc.total());
        terms_used.push(k);
    }
    let target = 1.0 / (2.0 * PI);
    Ok(ProjectorDiagonal {
        max_deviation: values
            .iter()
            .map(|v| (v - target).abs())
            .fold(0.0, f64::max),
        points: points.to_vec(),
        values,
        terms_used,
    })
}

/// Default sample points for the projector oracle.
pub fn default_points() -> Vec<(f64, f64)> {
    vec![(0.0, 0.0), (0.5, -0.2), (1.3, 0.4), (-2.0, 1.9), (0.1, 3.9)]
}
