//! Numerical test that thin cones around the characteristic set stay thin
//! under the geodesic flow.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesics::flow::{g_star, lattice_side, midpoint_step, PhasePoint};

/// Integration step used for every sampled trajectory.
pub const CONFINEMENT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfinementReport {
    pub c: f64,
    pub t_max: f64,
    pub samples: usize,
    pub seed: u64,
    /// `max` over samples and `t ∈ [−T, T]` of `g*(t) / ζ(t)²`.
    pub c_prime: f64,
    /// Largest initial ratio actually drawn.
    pub max_initial_ratio: f64,
    /// Number of trajectories along which `ζ` changed sign.
    pub zeta_sign_changes: usize,
    pub max_energy_drift: f64,
    pub passed: bool,
}

struct Sample {
    start: PhasePoint,
}

fn draw(rng: &mut ChaCha8Rng, c: f64) -> Sample {
    let side = lattice_side();
    let x = rng.gen::<f64>() * side;
    let y = rng.gen::<f64>() * side;
    let z = rng.gen::<f64>() * PI;
    let magnitude = 0.5 + 1.5 * rng.gen::<f64>();
    let zeta = if rng.gen::<bool>() {
        magnitude
    } else {
        -magnitude
    };
    // Uniform in the cone: g* = c ζ² s with s ∈ [0, 1).
    let speed = (c * zeta * zeta * rng.gen::<f64>()).sqrt();
    let angle = 2.0 * PI * rng.gen::<f64>();
    Sample {
        start: PhasePoint::from_frame(x, y, z, speed * angle.cos(), speed * angle.sin(), zeta),
    }
}

struct Track {
    max_ratio: f64,
    sign_changed: bool,
    drift: f64,
}

fn track(p0: PhasePoint, t_max: f64) -> Result<Track> {
    let n = (t_max / CONFINEMENT_STEP).ceil() as usize;
    let h = t_max / n as f64;
    let e0 = g_star(&p0);
    let sign = p0.zeta.signum();
    let mut out = Track {
        max_ratio: e0 / (p0.zeta * p0.zeta),
        sign_changed: false,
        drift: 0.0,
    };
    for dir in [1.0, -1.0] {
        let mut p = p0;
        for k in 1..=n {
            p = midpoint_step(&p, dir * h).map_err(|message| Error::Integration {
                step: k,
                t: dir * (k - 1) as f64 * h,
                message,
            })?;
            let g = g_star(&p);
            out.max_ratio = out.max_ratio.max(g / (p.zeta * p.zeta));
            out.sign_changed |= p.zeta.signum() != sign;
            out.drift = out.drift.max((g - e0).abs());
        }
    }
    Ok(out)
}

/// Samples `samples` initial points in `{g* < c ζ²}` and reports the widest
/// cone reached over `t ∈ [−T, T]`.
///
/// Base points are uniform in the fundamental domain, `|ζ|` is uniform in
/// `[0.5, 2]` with a random sign, and `g*/ζ²` is uniform in `[0, c)`. The
/// draws come from a ChaCha8 stream seeded with `seed`, so a report is
/// reproducible; trajectories are integrated in parallel and combined in
/// sample order. The check passes when `c'` is finite and `ζ` never changes
/// sign.
pub fn confinement_check(
    c: f64,
    t_max: f64,
    samples: usize,
    seed: u64,
) -> Result<ConfinementReport> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::domain(format!("c must be nonnegative, got {c}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::domain(format!("T must be positive, got {t_max}")));
    }
    if samples == 0 {
        return Err(Error::domain("at least one sample is required"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<PhasePoint> = (0..samples).map(|_| draw(&mut rng, c).start).collect();
    let tracks: Vec<Track> = starts
        .par_iter()
        .map(|p| track(*p, t_max))
        .collect::<Result<_>>()?;
    let c_prime = tracks.iter().map(|t| t.max_ratio).fold(0.0, f64::max);
    let zeta_sign_changes = tracks.iter().filter(|t| t.sign_changed).count();
    Ok(ConfinementReport {
        c,
        t_max,
        samples,
        seed,
        c_prime,
        max_initial_ratio: starts
            .iter()
            .map(|p| g_star(p) / (p.zeta * p.zeta))
            .fold(0.0, f64::max),
        zeta_sign_changes,
        max_energy_drift: tracks.iter().map(|t| t.drift).fold(0.0, f64::max),
        passed: c_prime.is_finite() && zeta_sign_changes == 0,
    })
}
