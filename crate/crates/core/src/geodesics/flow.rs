//! Phase space, the Hamiltonian field of `½g*`, and the implicit midpoint
//! integrator.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Side of the square fundamental domain of the horizontal lattice.
pub fn lattice_side() -> f64 {
    (2.0 * PI).sqrt()
}

/// Vertical period of the lattice.
pub const LATTICE_HEIGHT: f64 = PI;

/// A point of `T*H3` in the chart `(x, y, z; p_x, p_y, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p_x: f64,
    pub p_y: f64,
    pub zeta: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64, z: f64, p_x: f64, p_y: f64, zeta: f64) -> Self {
        Self {
            x,
            y,
            z,
            p_x,
            p_y,
            zeta,
        }
    }

    /// Point with base `(x, y, z)` and frame momenta `u = ⟨p, X⟩`, `v = ⟨p, Y⟩`.
    pub fn from_frame(x: f64, y: f64, z: f64, u: f64, v: f64, zeta: f64) -> Self {
        Self {
            x,
            y,
            z,
            p_x: u - 0.5 * y * zeta,
            p_y: v + 0.5 * x * zeta,
            zeta,
        }
    }

    /// `(⟨p, X⟩, ⟨p, Y⟩)`.
    pub fn frame_momenta(&self) -> (f64, f64) {
        (
            self.p_x + 0.5 * self.y * self.zeta,
            self.p_y - 0.5 * self.x * self.zeta,
        )
    }

    pub fn g_star(&self) -> f64 {
        g_star(self)
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.x, self.y, self.z, self.p_x, self.p_y, self.zeta]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Right translation `q ↦ q ⋆ (a, b, c)`, the action under which the frame
    /// `X = ∂x + ½y∂z`, `Y = ∂y − ½x∂z` is invariant.
    pub fn translate(&self, a: f64, b: f64, c: f64) -> Self {
        // The frame momenta (u, v, ζ) are invariant and carried along unchanged.
        let (u, v) = self.frame_momenta();
        let x = self.x + a;
        let y = self.y + b;
        let z = self.z + c + 0.5 * (self.x * b - self.y * a);
        Self::from_frame(x, y, z, u, v, self.zeta)
    }
}

/// `g*(p) = (p_x + yζ/2)² + (p_y − xζ/2)²`.
pub fn g_star(p: &PhasePoint) -> f64 {
    let (u, v) = p.frame_momenta();
    u * u + v * v
}

/// Hamiltonian vector field of `H = ½g*`, ordered as
/// `(ẋ, ẏ, ż, ṗ_x, ṗ_y, ζ̇)`.
pub fn hamiltonian_field(p: &PhasePoint) -> [f64; 6] {
    let (u, v) = p.frame_momenta();
    [
        u,
        v,
        0.5 * (u * p.y - v * p.x),
        0.5 * v * p.zeta,
        -0.5 * u * p.zeta,
        0.0,
    ]
}

const MAX_SOLVE_ITERATIONS: usize = 100;

/// One implicit midpoint step `y₁ = y₀ + h F((y₀ + y₁)/2)`, solved by
/// fixed-point iteration until the iterate stops changing.
pub fn midpoint_step(p: &PhasePoint, h: f64) -> std::result::Result<PhasePoint, String> {
    let y0 = p.to_array();
    let f0 = hamiltonian_field(p);
    let mut y1 = [0.0; 6];
    for i in 0..6 {
        y1[i] = y0[i] + h * f0[i];
    }
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_SOLVE_ITERATIONS {
        let mut mid = [0.0; 6];
        for i in 0..6 {
            mid[i] = 0.5 * (y0[i] + y1[i]);
        }
        let f = hamiltonian_field(&PhasePoint::from_array(mid));
        let mut change: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for i in 0..6 {
            let next = y0[i] + h * f[i];
            change = change.max((next - y1[i]).abs());
            scale = scale.max(next.abs());
            y1[i] = next;
        }
        if !change.is_finite() {
            return Err("implicit solve produced a non-finite iterate".into());
        }
        if change <= 2.0 * f64::EPSILON * scale
            || (change >= last_change && change <= 1e-12 * scale)
        {
            return Ok(PhasePoint::from_array(y1));
        }
        last_change = change;
    }
    Err(format!(
        "implicit solve did not converge in {MAX_SOLVE_ITERATIONS} iterations (last change {last_change:e})"
    ))
}

/// Integrated geodesic with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicResult {
    pub trajectory: Vec<(f64, PhasePoint)>,
    /// `|t_final| · √g*(start)`.
    pub length: f64,
    /// Whether the end point agrees with the start modulo the lattice.
    pub closed_mod_lattice: bool,
    /// `|t_final|` when the trajectory closes.
    pub period: Option<f64>,
    /// `max_t |g*(t) − g*(0)|`.
    pub max_energy_drift: f64,
    /// Distance in the chart from the end point to the nearest lattice
    /// translate of the start.
    pub closest_return: f64,
}

/// Tolerance used for [`GeodesicResult::closed_mod_lattice`].
pub const CLOSURE_TOL: f64 = 1e-6;

fn validate_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    Ok(())
}

/// Fixed-step implicit midpoint integration from `t = 0` to `t_final`.
///
/// `t_final` may be negative. The step is shrunk so that a whole number of
/// steps lands on `t_final`.
pub fn integrate(p0: PhasePoint, t_final: f64, step: f64) -> Result<GeodesicResult> {
    integrate_recording(p0, t_final, step, 1)
}

/// As [`integrate`], keeping every `record_every`-th point of the trajectory.
pub fn integrate_recording(
    p0: PhasePoint,
    t_final: f64,
    step: f64,
    record_every: usize,
) -> Result<GeodesicResult> {
    validate_step(step)?;
    if !p0.is_finite() || !t_final.is_finite() {
        return Err(Error::domain("initial point and final time must be finite"));
    }
    let n = (t_final.abs() / step).ceil() as usize;
    let h = if n == 0 { 0.0 } else { t_final / n as f64 };
    let every = record_every.max(1);
    let e0 = g_star(&p0);
    let mut trajectory = Vec::with_capacity(n / every + 2);
    trajectory.push((0.0, p0));
    let mut p = p0;
    let mut drift: f64 = 0.0;
    for k in 1..=n {
        p = midpoint_step(&p, h).map_err(|message| Error::Integration {
            step: k,
            t: (k - 1) as f64 * h,
            message,
        })?;
        drift = drift.max((g_star(&p) - e0).abs());
        if k % every == 0 || k == n {
            trajectory.push((k as f64 * h, p));
        }
    }
    let closest_return = lattice_distance(&p0, &p);
    let closed = n > 0 && closest_return <= CLOSURE_TOL;
    Ok(GeodesicResult {
        trajectory,
        length: t_final.abs() * e0.sqrt(),
        closed_mod_lattice: closed,
        period: closed.then_some(t_final.abs()),
        max_energy_drift: drift,
        closest_return,
    })
}

/// End point of the midpoint flow after `steps` steps of size `t / steps`.
pub fn flow_map(p0: &PhasePoint, t: f64, steps: usize) -> Result<PhasePoint> {
    let n = steps.max(1);
    let h = t / n as f64;
    let mut p = *p0;
    for k in 1..=n {
        p = midpoint_step(&p, h).map_err(|message| Error::Integration {
            step: k,
            t: (k - 1) as f64 * h,
            message,
        })?;
    }
    Ok(p)
}

/// Richardson combination `(4Φ_{h/2} − Φ_h)/3` of the midpoint flow map,
/// which removes the `h²` term of its symmetric error expansion.
pub fn flow_map_extrapolated(p0: &PhasePoint, t: f64, steps: usize) -> Result<PhasePoint> {
    let coarse = flow_map(p0, t, steps)?.to_array();
    let fine = flow_map(p0, t, 2 * steps)?.to_array();
    let mut out = [0.0; 6];
    for i in 0..6 {
        out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    }
    Ok(PhasePoint::from_array(out))
}

/// Base-point distance from `q` to the nearest lattice translate `p ⋆ γ`.
///
/// Horizontal offsets are searched over the nearest lattice cell and its
/// neighbours; the vertical offset is then reduced modulo `π`.
pub fn lattice_distance(p: &PhasePoint, q: &PhasePoint) -> f64 {
    let side = lattice_side();
    let ia = ((q.x - p.x) / side).round();
    let ib = ((q.y - p.y) / side).round();
    let mut best = f64::INFINITY;
    for da in -1..=1 {
        for db in -1..=1 {
            let a = (ia + da as f64) * side;
            let b = (ib + db as f64) * side;
            let t = p.translate(a, b, 0.0);
            let dz = q.z - t.z;
            let dz = dz - LATTICE_HEIGHT * (dz / LATTICE_HEIGHT).round();
            let d = ((q.x - t.x).powi(2) + (q.y - t.y).powi(2) + dz * dz).sqrt();
            best = best.min(d);
        }
    }
    best
}

/// `sin(θ)/θ`, with the removable singularity filled in.
fn sinc(theta: f64) -> f64 {
    if theta.abs() < 1e-4 {
        1.0 - theta * theta / 6.0
    } else {
        theta.sin() / theta
    }
}

/// `(θ − sin θ)/θ²`.
fn cubic_defect(theta: f64) -> f64 {
    if theta.abs() < 1e-2 {
        let t2 = theta * theta;
        theta / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)))
    } else {
        (theta - theta.sin()) / (theta * theta)
    }
}

/// Exact flow of `½g*` after time `t`.
///
/// With `W = u + iv` and `w = x + iy` the equations are `Ẇ = −iζW`, `ẇ = W`
/// and `ż = ½ Im(W̄w)`, which integrate in closed form; for `ζ > 0` the
/// projection turns clockwise and `z` increases by `π r²` per turn.
pub fn exact_flow(p0: &PhasePoint, t: f64) -> PhasePoint {
    let zeta = p0.zeta;
    let (u0, v0) = p0.frame_momenta();
    let big_w0 = Complex64::new(u0, v0);
    let w0 = Complex64::new(p0.x, p0.y);
    let theta = zeta * t;
    let half = Complex64::from_polar(1.0, -0.5 * theta);
    // (1 − e^{−iθ})/(iζ) = t e^{−iθ/2} sinc(θ/2)
    let drift = t * sinc(0.5 * theta) * half;
    let w = w0 + big_w0 * drift;
    let big_w = big_w0 * Complex64::from_polar(1.0, -theta);
    // (e^{iθ} − 1)/(iζ) = t e^{iθ/2} sinc(θ/2)
    let a = big_w0.conj() * w0;
    let swept = a * (t * sinc(0.5 * theta) * half.conj());
    let z = p0.z + 0.5 * (swept.im + big_w0.norm_sqr() * t * t * cubic_defect(theta));
    PhasePoint::from_frame(w.re, w.im, z, big_w.re, big_w.im, zeta)
}
