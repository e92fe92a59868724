//! The local wave trace of `H3` and the regularized transform of `u³`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_composite;

/// Partial sum `S(L) = Σ_{l=0}^{L} (2l+1)^{−2}` with a bound on the tail.
///
/// The tail is dominated by `∫_L^∞ (2x+1)^{−2} dx = 1/(2(2L+1))`, which is
/// at most `1/(4L)` for `L ≥ 1`. Terms are added smallest first.
pub fn odd_square_partial_sum(l_max: u64) -> (f64, f64) {
    let mut s = 0.0;
    for l in (0..=l_max).rev() {
        let d = (2 * l + 1) as f64;
        s += 1.0 / (d * d);
    }
    (s, 1.0 / (2.0 * (2 * l_max + 1) as f64))
}

/// `(6/(π t⁴)) · S(l_max) · ∫f`, the leading singularity of the local trace.
pub fn local_h3_trace(t: f64, f_integral: f64, l_max: u64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::Singularity {
            at: 0.0,
            message: "the local trace is singular at t = 0".into(),
        });
    }
    if !t.is_finite() || !f_integral.is_finite() {
        return Err(Error::domain("t and f_integral must be finite"));
    }
    let (s, _) = odd_square_partial_sum(l_max);
    Ok(6.0 / (PI * t.powi(4)) * s * f_integral)
}

/// Bound on `|local_h3_trace(t, f, ∞) − local_h3_trace(t, f, l_max)|`.
pub fn local_h3_trace_tail(t: f64, f_integral: f64, l_max: u64) -> f64 {
    let (_, tail) = odd_square_partial_sum(l_max);
    6.0 / (PI * t.powi(4)) * tail * f_integral.abs()
}

/// `6 (τ + iε)^{−4}`.
pub fn fourier_u3_exact(tau: f64, epsilon: f64) -> Complex64 {
    6.0 * Complex64::new(tau, epsilon).powi(-4)
}

fn u3_tail(u: f64, eps: f64) -> f64 {
    (-eps * u).exp()
        * (u.powi(3) / eps + 3.0 * u * u / eps.powi(2) + 6.0 * u / eps.powi(3) + 6.0 / eps.powi(4))
}

/// `∫₀^∞ e^{iτu − εu} u³ du` by composite Gauss–Kronrod quadrature on a
/// truncated range.
///
/// The range `[0, U]` is chosen so the exact tail `∫_U^∞ e^{−εu}u³ du` is
/// below `1e−13`.
pub fn regularized_fourier_u3(tau: f64, epsilon: f64) -> Result<Complex64> {
    Ok(regularized_fourier_u3_with_bound(tau, epsilon)?.0)
}

/// As [`regularized_fourier_u3`], also returning the certified error bound.
pub fn regularized_fourier_u3_with_bound(tau: f64, epsilon: f64) -> Result<(Complex64, f64)> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !tau.is_finite() {
        return Err(Error::domain("tau must be finite"));
    }
    let tail_target = 1e-13;
    let mut u_max = 4.0 / epsilon;
    while u3_tail(u_max, epsilon) > tail_target {
        u_max *= 1.25;
    }
    let tail = u3_tail(u_max, epsilon);
    let scale = tau.abs().max(epsilon);
    // Each panel spans at most a quarter oscillation or decay length, where
    // the 15-point rule is exact to rounding; the result on twice as many
    // panels measures the discretization and rounding error.
    let panels = ((u_max * scale / (0.5 * PI)).ceil() as usize).max(8);
    let rate = Complex64::new(-epsilon, tau);
    let f = |u: f64| (rate * u).exp() * u.powi(3);
    let coarse = integrate_composite(f, 0.0, u_max, panels);
    let fine = integrate_composite(f, 0.0, u_max, 2 * panels);
    let error = (fine - coarse).norm();
    // Rounding of the oscillating sum is of order ε_mach ∫|f| = ε_mach·6/ε⁴.
    let rounding = f64::EPSILON * 6.0 / epsilon.powi(4);
    let target = 1e-11_f64.max(1e-13 * fine.norm()).max(100.0 * rounding);
    if error > target {
        return Err(Error::precision(
            format!("regularized transform at tau = {tau}, epsilon = {epsilon} did not converge"),
            error + tail,
        ));
    }
    Ok((fine, error + tail))
}

/// One step of an `ε ↓ 0` scan of the regularized transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct U3ScanPoint {
    pub epsilon: f64,
    pub value: Complex64,
    pub exact: Complex64,
    /// `|value − 6τ^{−4}|`, the distance to the boundary value.
    pub distance_to_limit: f64,
}

/// Evaluates the transform at `ε, ε/2, …, ε/2^halvings`.
pub fn fourier_u3_scan(tau: f64, epsilon: f64, halvings: u32) -> Result<Vec<U3ScanPoint>> {
    if tau == 0.0 {
        return Err(Error::Singularity {
            at: 0.0,
            message: "the boundary value 6τ^{−4} is singular at τ = 0".into(),
        });
    }
    let limit = Complex64::new(6.0 / tau.powi(4), 0.0);
    (0..=halvings)
        .map(|k| {
            let eps = epsilon / f64::from(1u32 << k);
            let value = regularized_fourier_u3(tau, eps)?;
            Ok(U3ScanPoint {
                epsilon: eps,
                value,
                exact: fourier_u3_exact(tau, eps),
                distance_to_limit: (value - limit).norm(),
            })
        })
        .collect()
}
