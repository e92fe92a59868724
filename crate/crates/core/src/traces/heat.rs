//! Heat trace of the Heisenberg sector,
//! `Z(z) = Σ_{m≥1} 2m Σ_{l≥0} exp(-2m(2l+1) z)`, `Re z > 0`.
//!
//! Three independent evaluations are provided:
//!
//! * [`heat_trace_direct`]: the `l`-sum done in closed form,
//!   `Z(z) = Σ_m m / sinh(2mz)`;
//! * [`heat_trace_double_sum`]: the raw double sum in the opposite order of
//!   work;
//! * [`heat_trace_closed`]: the Poisson-dual series
//!   `π²/(16z²) − 1/(4z) + (π²/(4z²)) Σ_{n≥1} 1 / (1 + cosh(π² n / z))`.
//!
//! Every sample carries a rigorous bound on the discarded tail obtained by
//! dominating it with a geometric series.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, NeumaierSum, QuadOptions};

const MAX_TERMS: usize = 10_000_000;

/// A trace value at one complex parameter together with its certified tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub parameter: Complex64,
    pub value: Complex64,
    pub truncation_bound: f64,
    pub terms_used: usize,
}

fn check_heat_parameter(z: Complex64) -> Result<()> {
    if !(z.re > 0.0) || !z.im.is_finite() || !z.re.is_finite() {
        return Err(Error::domain(format!(
            "heat parameter needs Re z > 0, got {z}"
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// Bound on `Σ_{m ≥ n} m q^m`, for `0 < q < 1`.
fn weighted_geometric_tail(q: f64, n: usize) -> f64 {
    let n = n as f64;
    q.powf(n) * (n - (n - 1.0) * q) / ((1.0 - q) * (1.0 - q))
}

/// Bound on `Σ_{m > terms} |m / sinh(2mz)|` for `Re z = x`.
///
/// Uses `|sinh(2mz)| ≥ sinh(2mx)` and `m / sinh(2mx) ≤ 2m q^m / (1 − q^{2(terms+1)})`
/// with `q = exp(−2x)`.
pub fn direct_tail_bound(x: f64, terms: usize) -> f64 {
    let q = (-2.0 * x).exp();
    let first = terms + 1;
    2.0 * weighted_geometric_tail(q, first) / (1.0 - q.powf(2.0 * first as f64))
}

/// `m / sinh(2mz)` written without overflow as `2m e^{−2mz} / (1 − e^{−4mz})`.
fn direct_term(m: usize, z: Complex64) -> Complex64 {
    let e = (-2.0 * m as f64 * z).exp();
    2.0 * m as f64 * e / (1.0 - e * e)
}

/// Heat trace from `Σ m / sinh(2mz)`, truncated once the certified tail is
/// below `tol`.
pub fn heat_trace_direct(z: Complex64, tol: f64) -> Result<TraceSample> {
    check_heat_parameter(z)?;
    check_tol(tol)?;
    let mut terms = 1;
    while direct_tail_bound(z.re, terms) > tol {
        terms += 1;
        if terms > MAX_TERMS {
            return Err(Error::precision(
                format!("direct heat trace at z = {z} needs more than {MAX_TERMS} terms"),
                direct_tail_bound(z.re, MAX_TERMS),
            ));
        }
    }
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    // Smallest terms first.
    for m in (1..=terms).rev() {
        let t = direct_term(m, z);
        re.add(t.re);
        im.add(t.im);
    }
    let value = Complex64::new(re.total(), im.total());
    // Half an ulp of the result is the finest tolerance that can be certified.
    let floor = 0.5 * f64::EPSILON * value.norm();
    if tol < floor {
        return Err(Error::precision(
            format!("tail tolerance {tol:e} is below the resolution of the trace value at z = {z}"),
            floor,
        ));
    }
    Ok(TraceSample {
        parameter: z,
        value,
        truncation_bound: direct_tail_bound(z.re, terms),
        terms_used: terms,
    })
}

/// Direct heat trace with the tail pushed to the rounding level of the value.
pub fn heat_trace_full_precision(z: Complex64) -> Result<TraceSample> {
    check_heat_parameter(z)?;
    let first = direct_term(1, z).norm().max(f64::MIN_POSITIVE);
    let rough = heat_trace_direct(z, 1e-3 * first)?;
    heat_trace_direct(z, f64::EPSILON * rough.value.norm().max(f64::MIN_POSITIVE))
}

/// Heat trace as the raw double sum over `(m, l)`.
///
/// Half of `tol` is spent on the outer `m`-tail and half is shared between
/// the inner `l`-tails.
pub fn heat_trace_double_sum(z: Complex64, tol: f64) -> Result<TraceSample> {
    check_heat_parameter(z)?;
    check_tol(tol)?;
    let x = z.re;
    let q = (-2.0 * x).exp();
    let mut outer = 1;
    while direct_tail_bound(x, outer) > 0.5 * tol {
        outer += 1;
        if outer > MAX_TERMS {
            return Err(Error::precision(
                format!("double-sum heat trace at z = {z} needs more than {MAX_TERMS} terms"),
                direct_tail_bound(x, MAX_TERMS),
            ));
        }
    }
    let budget = 0.5 * tol / outer as f64;
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    let mut bound = direct_tail_bound(x, outer);
    let mut terms = 0;
    for m in (1..=outer).rev() {
        let mf = m as f64;
        let qm = q.powf(mf);
        // |Σ_{l > L} e^{−2m(2l+1)z}| ≤ qm^{2L+3} / (1 − qm²)
        let inner_tail = |l: usize| qm.powf(2.0 * l as f64 + 3.0) / (1.0 - qm * qm);
        let mut lmax = 0;
        while 2.0 * mf * inner_tail(lmax) > budget {
            lmax += 1;
        }
        bound += 2.0 * mf * inner_tail(lmax);
        for l in (0..=lmax).rev() {
            let t = 2.0 * mf * (-2.0 * mf * (2.0 * l as f64 + 1.0) * z).exp();
            re.add(t.re);
            im.add(t.im);
            terms += 1;
        }
    }
    Ok(TraceSample {
        parameter: z,
        value: Complex64::new(re.total(), im.total()),
        truncation_bound: bound,
        terms_used: terms,
    })
}

/// The two non-oscillatory terms `π²/(16z²) − 1/(4z)` of the Poisson-dual
/// expansion. The first term carries the Weyl law.
pub fn heat_trace_smooth_part(z: Complex64) -> Complex64 {
    PI * PI / (16.0 * z * z) - 1.0 / (4.0 * z)
}

/// `1 / (1 + cosh w)` written as `2e^{−w} / (1 + e^{−w})²` (stable for `Re w > 0`).
fn dual_term(w: Complex64) -> Complex64 {
    let e = (-w).exp();
    2.0 * e / ((1.0 + e) * (1.0 + e))
}

/// Bound on the discarded part of the dual sum beyond `n_max` terms.
pub fn closed_tail_bound(z: Complex64, n_max: usize) -> f64 {
    let alpha = PI * PI * (1.0 / z).re;
    let first = (n_max + 1) as f64;
    let e = (-alpha * first).exp();
    let prefactor = (PI * PI / (4.0 * z * z)).norm();
    prefactor * 2.0 * e / ((1.0 - (-alpha).exp()) * (1.0 - e) * (1.0 - e))
}

/// The oscillatory part `(π²/(4z²)) Σ_{n=1}^{n_max} 1 / (1 + cosh(π² n / z))`,
/// i.e. the contribution of the closed geodesics.
pub fn dual_correction(z: Complex64, n_max: usize) -> Result<Complex64> {
    check_heat_parameter(z)?;
    let mut re = NeumaierSum::default();
    let mut im = NeumaierSum::default();
    for n in (1..=n_max).rev() {
        let t = dual_term(PI * PI * n as f64 / z);
        re.add(t.re);
        im.add(t.im);
    }
    Ok(Complex64::new(re.total(), im.total()) * (PI * PI / (4.0 * z * z)))
}

/// Heat trace from the Poisson-dual closed form truncated at `n_max`.
pub fn heat_trace_closed(z: Complex64, n_max: usize) -> Result<TraceSample> {
    let dual = dual_correction(z, n_max)?;
    Ok(TraceSample {
        parameter: z,
        value: heat_trace_smooth_part(z) + dual,
        truncation_bound: closed_tail_bound(z, n_max),
        terms_used: n_max,
    })
}

/// Smallest `n_max` whose certified tail is below `tol`.
pub fn closed_terms_for(z: Complex64, tol: f64) -> Result<usize> {
    check_heat_parameter(z)?;
    check_tol(tol)?;
    let mut n = 0;
    while closed_tail_bound(z, n) > tol {
        n += 1;
        if n > MAX_TERMS {
            return Err(Error::precision(
                format!("closed heat trace at z = {z} needs more than {MAX_TERMS} terms"),
                closed_tail_bound(z, MAX_TERMS),
            ));
        }
    }
    Ok(n)
}

/// Result of [`verify_fourier_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierPair {
    pub xi: f64,
    /// Quadrature value of `∫_ℝ (x / sinh x) e^{−iξx} dx`.
    pub lhs: f64,
    /// `π² / (1 + cosh πξ)`.
    pub rhs: f64,
    /// Quadrature error estimate plus the truncated-range bound.
    pub error_bound: f64,
}

fn x_over_sinh(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-4 {
        1.0 - ax * ax / 6.0
    } else if ax < 20.0 {
        ax / ax.sinh()
    } else {
        2.0 * ax * (-ax).exp()
    }
}

/// Checks the Fourier pair `x / sinh x  ↔  π² / (1 + cosh πξ)` numerically.
///
/// The convention is `ĝ(ξ) = ∫ g(x) e^{−iξx} dx` (no `2π` in the exponent,
/// no normalizing factor); at `ξ = 0` both sides equal `π²/2`, which pins it.
/// The integrand is even, so only `2 ∫_0^X cos(ξx) x / sinh x dx` is computed,
/// with `X` chosen so that the neglected range contributes less than
/// `quad_tol / 4`.
pub fn verify_fourier_pair(xi: f64, quad_tol: f64) -> Result<FourierPair> {
    if !(quad_tol > 0.0) {
        return Err(Error::domain(format!(
            "quadrature tolerance must be positive, got {quad_tol}"
        )));
    }
    if !xi.is_finite() {
        return Err(Error::domain("frequency must be finite"));
    }
    // ∫_X^∞ 2 x / sinh x dx ≤ 4 (X + 1) e^{−X} / (1 − e^{−2X})
    let range_tail = |x: f64| 4.0 * (x + 1.0) * (-x).exp() / (1.0 - (-2.0 * x).exp());
    let mut cutoff = 1.0;
    while range_tail(cutoff) > 0.25 * quad_tol {
        cutoff += 1.0;
    }
    let opts = QuadOptions::abs(0.25 * quad_tol)
        .with_initial_panels(1 + (xi.abs() * cutoff / PI) as usize);
    let (half, err) = quad::integrate_real(|x| x_over_sinh(x) * (xi * x).cos(), 0.0, cutoff, opts)?;
    Ok(FourierPair {
        xi,
        lhs: 2.0 * half,
        rhs: PI * PI / (1.0 + (PI * xi).cosh()),
        error_bound: 2.0 * err + range_tail(cutoff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn large_parameter_is_lowest_level() {
        let z = c(10.0, 0.3);
        let s = heat_trace_direct(z, 1e-24).unwrap();
        let lead = 2.0 * (-2.0 * z).exp();
        let rel = ((s.value - lead) / lead).norm();
        assert!(rel < (-2.0 * z.re).exp() * 10.0, "rel = {rel:e}");
    }

    #[test]
    fn direct_matches_closed_at_half() {
        let z = c(0.5, 0.0);
        let d = heat_trace_direct(z, 1e-14).unwrap();
        let k = heat_trace_closed(z, closed_terms_for(z, 1e-16).unwrap()).unwrap();
        assert!((d.value - k.value).norm() < 1e-12);
        assert!(d.truncation_bound <= 1e-14);
    }

    #[test]
    fn summation_orders_agree() {
        for z in [c(0.2, 0.0), c(0.7, -0.4), c(1.5, 2.0)] {
            let a = heat_trace_direct(z, 1e-13).unwrap();
            let b = heat_trace_double_sum(z, 1e-13).unwrap();
            let slack = a.truncation_bound + b.truncation_bound + 1e-13 * a.value.norm();
            assert!((a.value - b.value).norm() <= slack, "z = {z}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            heat_trace_direct(c(0.0, 1.0), 1e-10).unwrap_err().kind(),
            "domain"
        );
        assert_eq!(
            heat_trace_direct(c(-1.0, 0.0), 1e-10).unwrap_err().kind(),
            "domain"
        );
        assert_eq!(
            heat_trace_closed(c(0.0, 0.0), 3).unwrap_err().kind(),
            "domain"
        );
        assert_eq!(
            heat_trace_direct(c(1.0, 0.0), 0.0).unwrap_err().kind(),
            "domain"
        );
    }

    #[test]
    fn unreachable_tolerance_is_a_precision_error() {
        let err = heat_trace_direct(c(0.01, 0.0), 1e-16).unwrap_err();
        assert_eq!(err.kind(), "precision");
        match err {
            Error::Precision { best_bound, .. } => assert!(best_bound > 1e-16),
            _ => unreachable!(),
        }
    }

    #[test]
    fn dual_correction_size() {
        let z = c(0.1, 0.0);
        assert_eq!(dual_correction(z, 0).unwrap(), c(0.0, 0.0));
        let corr = dual_correction(z, 10).unwrap();
        let predicted = PI * PI / (2.0 * 0.01) * (-PI * PI / 0.1).exp();
        assert!((corr.re / predicted - 1.0).abs() < 1e-12);
        assert_eq!(corr.im, 0.0);
    }

    #[test]
    fn closed_form_tends_to_lowest_level() {
        let mut prev = f64::INFINITY;
        for x in [5.0, 8.0, 10.0] {
            let z = c(x, 0.0);
            let k = heat_trace_closed(z, closed_terms_for(z, 1e-300).unwrap()).unwrap();
            let rel = (k.value.re / (2.0 * (-2.0 * x).exp()) - 1.0).abs();
            assert!(rel < prev);
            prev = rel;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn fourier_pair_at_zero_pins_convention() {
        let p = verify_fourier_pair(0.0, 1e-11).unwrap();
        assert!((p.rhs - PI * PI / 2.0).abs() < 1e-15);
        assert!((p.lhs - p.rhs).abs() < 1e-11);
    }

    #[test]
    fn fourier_pair_at_one() {
        let tol = 1e-10;
        let p = verify_fourier_pair(1.0, tol).unwrap();
        assert!((p.lhs - p.rhs).abs() < tol);
        assert!(p.error_bound < tol);
    }

    #[test]
    fn fourier_rhs_decreases() {
        let vals: Vec<f64> = (0..20)
            .map(|k| verify_fourier_pair(k as f64 * 0.5, 1e-8).unwrap().rhs)
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(*vals.last().unwrap() < 1e-10);
    }
}
