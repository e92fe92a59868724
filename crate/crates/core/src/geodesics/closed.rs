//! Shooting search for closed geodesics of the quotient.
//!
//! A unit-speed geodesic with `ζ ≠ 0` projects to a circle of radius
//! `r = 1/|ζ|`; rotations about the `z`-axis act transitively on the initial
//! horizontal directions, so one representative per radius is enough. The
//! search shoots from the origin with `(u, v) = (1, 0)` for one full turn
//! `T = 2πr` and root-finds the radii at which the vertical advance is a
//! multiple of `π`. Each one-turn orbit is evaluated with the extrapolated
//! midpoint map, so the closure residual is fourth order in the step.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::flow::{flow_map_extrapolated, lattice_distance, PhasePoint, LATTICE_HEIGHT};
use crate::traces::LengthSpectrum;

/// Midpoint steps per turn for the coarse member of the extrapolated pair.
pub const STEPS_PER_TURN: usize = 2000;

/// Scan points per unit of `r²` when bracketing the closures.
const SCAN_DENSITY: f64 = 8.0;

fn shoot(r: f64) -> Result<PhasePoint> {
    let p0 = PhasePoint::from_frame(0.0, 0.0, 0.0, 1.0, 0.0, 1.0 / r);
    flow_map_extrapolated(&p0, 2.0 * PI * r, STEPS_PER_TURN)
}

/// Vertical advance after one turn of radius `r`, minus `kπ`.
fn mismatch(r: f64, k: u64) -> Result<f64> {
    Ok(shoot(r)?.z - k as f64 * LATTICE_HEIGHT)
}

fn origin() -> PhasePoint {
    PhasePoint::default()
}

/// A closed unit-speed geodesic found by the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedOrbit {
    /// Radius of the projected circle.
    pub radius: f64,
    /// The orbit closes up to the central lattice element `(0, 0, kπ)`.
    pub lattice_index: u64,
    pub length: f64,
    pub closest_return: f64,
}

/// Refines a sign change of `mismatch(·, k)` on `[lo, hi]` by the Illinois
/// variant of regula falsi.
fn refine(mut lo: f64, mut hi: f64, k: u64) -> Result<f64> {
    let mut f_lo = mismatch(lo, k)?;
    let mut f_hi = mismatch(hi, k)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let mut side = 0;
    let mut r = 0.5 * (lo + hi);
    for _ in 0..100 {
        r = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(r >= lo && r <= hi) {
            r = 0.5 * (lo + hi);
        }
        let f = mismatch(r, k)?;
        if f == 0.0 || (hi - lo) <= 4.0 * f64::EPSILON * hi {
            return Ok(r);
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = r;
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = r;
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if f.abs() <= 4.0 * f64::EPSILON * k as f64 * LATTICE_HEIGHT {
            return Ok(r);
        }
    }
    Ok(r)
}

/// Closed geodesics with lengths in `[2π/zeta0, lengths_up_to]`, one per
/// length.
pub fn find_closed_orbits(lengths_up_to: f64, zeta0: f64, tol: f64) -> Result<Vec<ClosedOrbit>> {
    if !(lengths_up_to >= 2.0 * PI) || !lengths_up_to.is_finite() {
        return Err(Error::domain(format!(
            "lengths_up_to must be at least 2π, got {lengths_up_to}"
        )));
    }
    if !(zeta0 > 0.0) || !zeta0.is_finite() {
        return Err(Error::domain(format!(
            "zeta0 must be positive, got {zeta0}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tol must be positive, got {tol}")));
    }
    let r_min = 1.0 / zeta0;
    let r_max = lengths_up_to / (2.0 * PI);
    if r_min > r_max {
        return Err(Error::SearchFailure {
            message: format!(
                "zeta0 = {zeta0} only admits loops longer than {:.6}",
                2.0 * PI / zeta0
            ),
            closest_return: f64::INFINITY,
        });
    }
    // Bracket each closure on a grid uniform in r², slightly wider than
    // [r_min, r_max] so orbits sitting exactly on either end are bracketed.
    let s_lo = r_min * r_min * (1.0 - 1e-3);
    let s_hi = r_max * r_max * (1.0 + 1e-3) + 1e-3;
    let cells = ((s_hi - s_lo) * SCAN_DENSITY).ceil().max(1.0) as usize;
    let radii: Vec<f64> = (0..=cells)
        .map(|i| (s_lo + (s_hi - s_lo) * i as f64 / cells as f64).sqrt())
        .collect();
    let heights: Vec<f64> = radii
        .par_iter()
        .map(|&r| shoot(r).map(|p| p.z / LATTICE_HEIGHT))
        .collect::<Result<_>>()?;
    let mut brackets = Vec::new();
    for i in 0..cells {
        let (a, b) = (heights[i], heights[i + 1]);
        let k_lo = a.min(b).ceil() as i64;
        let k_hi = a.max(b).floor() as i64;
        for k in k_lo.max(1)..=k_hi {
            brackets.push((radii[i], radii[i + 1], k as u64));
        }
    }
    let mut orbits: Vec<ClosedOrbit> = brackets
        .par_iter()
        .map(|&(lo, hi, k)| {
            let r = refine(lo, hi, k)?;
            let end = shoot(r)?;
            Ok(ClosedOrbit {
                radius: r,
                lattice_index: k,
                length: 2.0 * PI * r,
                closest_return: lattice_distance(&origin(), &end),
            })
        })
        .collect::<Result<_>>()?;
    let shortest = 2.0 * PI * r_min;
    orbits.retain(|o| {
        o.length <= lengths_up_to + tol && o.length >= shortest - tol && o.closest_return <= tol
    });
    orbits.sort_by(|a, b| a.length.total_cmp(&b.length));
    orbits.dedup_by(|b, a| (b.length - a.length).abs() <= tol);
    Ok(orbits)
}

/// Lengths of closed geodesics up to `lengths_up_to`, shooting over radii
/// `r ≥ 1/zeta0`.
///
/// Every `2π√n ≤ lengths_up_to` with `√n ≥ 1/zeta0` must be found; a missing
/// one is reported as a search failure with the closest return seen near it.
/// Amplitudes hold the vertical lattice index `k` of each closure, and the
/// confidence column holds the closure residual.
pub fn find_closed(lengths_up_to: f64, zeta0: f64, tol: f64) -> Result<LengthSpectrum> {
    let orbits = find_closed_orbits(lengths_up_to, zeta0, tol)?;
    let n_max = ((lengths_up_to / (2.0 * PI)).powi(2) + 1e-9).floor() as u64;
    let n_min = ((1.0 / zeta0).powi(2) - 1e-9).ceil().max(1.0) as u64;
    for n in n_min..=n_max {
        let expected = 2.0 * PI * (n as f64).sqrt();
        if !orbits.iter().any(|o| (o.length - expected).abs() <= tol) {
            let r = (n as f64).sqrt();
            let end = shoot(r)?;
            return Err(Error::SearchFailure {
                message: format!("no closed geodesic found near length {expected:.12}"),
                closest_return: lattice_distance(&origin(), &end),
            });
        }
    }
    Ok(LengthSpectrum {
        lengths: orbits.iter().map(|o| o.length).collect(),
        amplitudes: orbits.iter().map(|o| o.lattice_index as f64).collect(),
        confidence: orbits.iter().map(|o| o.closest_return).collect(),
        reference: LengthSpectrum::references_up_to(n_max as usize),
    })
}
