//! Landau levels of the magnetic Schrödinger operator
//! `H_ζ = −((∂x + iζy/2)² + (∂y − iζx/2)²)` and the diagonal constants of its
//! spectral projectors.

pub mod hermite;
pub mod projector;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::NeumaierSum;

pub use hermite::{hermite_spectrum, HermiteTruncation};
pub use projector::{lowest_level_diagonal, ProjectorDiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauLevel {
    pub l: u64,
    pub zeta: f64,
    pub energy: f64,
}

impl LandauLevel {
    pub fn new(l: u64, zeta: f64) -> Result<Self> {
        Ok(Self {
            l,
            zeta,
            energy: landau_energy(l, zeta)?,
        })
    }
}

fn check_zeta(zeta: f64) -> Result<()> {
    if zeta == 0.0 || !zeta.is_finite() {
        return Err(Error::domain(format!(
            "zeta must be finite and nonzero, got {zeta}"
        )));
    }
    Ok(())
}

/// `(2l+1)|ζ|`.
pub fn landau_energy(l: u64, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok((2 * l + 1) as f64 * zeta.abs())
}

/// Diagonal of the projector onto the `l`-th Landau level, `|ζ|/(2π)`.
///
/// It does not depend on the base point or on `l`.
pub fn landau_kernel_diag(_l: u64, zeta: f64) -> Result<f64> {
    check_zeta(zeta)?;
    Ok(zeta.abs() / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MehlerCheck {
    pub t: f64,
    pub l_max: u64,
    /// `Σ_{l ≤ l_max} e^{−(2l+1)t} / (2π)`.
    pub lhs: f64,
    /// `1 / (4π sinh t)`.
    pub rhs: f64,
    /// `e^{−(2l_max+3)t} / (2π(1 − e^{−2t}))`.
    pub tail_bound: f64,
    /// Allowance for rounding in the two evaluations.
    pub rounding: f64,
    pub passed: bool,
}

/// Compares the Landau-level expansion of the unit-field heat kernel
/// diagonal with its Mehler closed form.
pub fn mehler_diag_check(t: f64, l_max: u64) -> Result<MehlerCheck> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    let k = landau_kernel_diag(0, 1.0)?;
    let mut acc = NeumaierSum::default();
    for l in (0..=l_max).rev() {
        acc.add((-((2 * l + 1) as f64) * t).exp() * k);
    }
    let lhs = acc.total();
    let rhs = 1.0 / (4.0 * PI * t.sinh());
    let tail_bound = (-((2 * l_max + 3) as f64) * t).exp() / (2.0 * PI * -(-2.0 * t).exp_m1());
    let rounding = 4.0 * f64::EPSILON * rhs;
    Ok(MehlerCheck {
        t,
        l_max,
        lhs,
        rhs,
        tail_bound,
        rounding,
        passed: (lhs - rhs).abs() <= tail_bound + rounding,
    })
}
