//! Mollified wave trace `W_ε(t) = Σ_j mult_j cos(t √λ_j) ρ_ε(√λ_j)`.
//!
//! The sum runs over the exactly enumerated spectrum. With the default Abel
//! mollifier `ρ_ε(s) = exp(−εs)` we have `W_ε(t) = Re Σ_j exp(i(t + iε)√λ_j)`,
//! the real part of the half-wave trace continued into the upper half-plane,
//! so the singularities at the closed-geodesic lengths become peaks of width
//! about `ε`.
//!
//! Evaluation on uniform grids rotates `exp(i t s_j)` by a fixed phasor per
//! grid step, reseeding from `sin_cos` every [`RESEED_EVERY`] steps. Eigenvalues
//! are split into fixed chunks evaluated in parallel; chunk partial sums are
//! combined with a fixed pairwise tree, so the output does not depend on the
//! number of threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectrum::{self, Sectors, SpectrumQuery};
use crate::traces::TraceSample;

/// Largest tolerated mollifier weight at the spectral cutoff.
pub const CUTOFF_WEIGHT: f64 = 1e-12;

const CHUNK: usize = 16_384;
const RESEED_EVERY: usize = 64;
const LANES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mollifier {
    /// `exp(−ε √λ)`
    #[default]
    Abel,
    /// `exp(−ε² λ)`
    Gaussian,
}

impl Mollifier {
    fn weight(self, epsilon: f64, s: f64) -> f64 {
        match self {
            Mollifier::Abel => (-epsilon * s).exp(),
            Mollifier::Gaussian => (-(epsilon * s).powi(2)).exp(),
        }
    }

    /// Smallest `lambda_max` whose cutoff weight is below [`CUTOFF_WEIGHT`].
    pub fn required_lambda_max(self, epsilon: f64) -> f64 {
        let log = -CUTOFF_WEIGHT.ln();
        match self {
            Mollifier::Abel => (log / epsilon).powi(2),
            Mollifier::Gaussian => log / (epsilon * epsilon),
        }
    }

    /// Bound on `Σ_{λ_j > Λ} mult_j ρ_ε(√λ_j)`.
    ///
    /// Uses `N(λ) ≤ λ²` (valid for `λ ≥ 16` in every sector) and summation by
    /// parts: the tail is at most `∫_Λ^∞ N(λ) |dρ/dλ| dλ`.
    fn tail_bound(self, epsilon: f64, lambda_max: f64) -> f64 {
        let s = lambda_max.sqrt();
        match self {
            // ε ∫_S^∞ s⁴ e^{−εs} ds
            Mollifier::Abel => {
                let e = epsilon;
                (-e * s).exp()
                    * (s.powi(4)
                        + 4.0 * s.powi(3) / e
                        + 12.0 * s * s / (e * e)
                        + 24.0 * s / e.powi(3)
                        + 24.0 / e.powi(4))
            }
            // ε² ∫_Λ^∞ λ² e^{−ε²λ} dλ
            Mollifier::Gaussian => {
                let a = epsilon * epsilon;
                let l = lambda_max;
                (-a * l).exp() * (l * l + 2.0 * l / a + 2.0 / (a * a))
            }
        }
    }
}

/// Spectral data `(√λ_j, mult_j)` of the selected sectors up to `lambda_max`.
fn spectral_roots(lambda_max: f64, sectors: Sectors) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    if sectors.torus {
        let q = SpectrumQuery::new(lambda_max, Sectors::TORUS, true)?;
        for e in spectrum::enumerate_torus(&q)? {
            out.push((e.value.sqrt(), e.multiplicity as f64));
        }
    }
    if sectors.heisenberg {
        for (v, m) in spectrum::heisenberg_levels(lambda_max)? {
            out.push(((v as f64).sqrt(), m as f64));
        }
    }
    Ok(out)
}

/// Mollified wave trace over `t_grid` with the Abel mollifier.
pub fn wave_trace_mollified(
    t_grid: &[f64],
    epsilon: f64,
    lambda_max: f64,
    sectors: Sectors,
) -> Result<Vec<TraceSample>> {
    wave_trace_with(t_grid, epsilon, lambda_max, sectors, Mollifier::Abel)
}

pub fn wave_trace_with(
    t_grid: &[f64],
    epsilon: f64,
    lambda_max: f64,
    sectors: Sectors,
    mollifier: Mollifier,
) -> Result<Vec<TraceSample>> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::domain(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if sectors.is_empty() {
        return Err(Error::domain("sector selection is empty"));
    }
    if t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("time grid contains non-finite values"));
    }
    let required = mollifier.required_lambda_max(epsilon);
    if !(lambda_max >= required.max(16.0)) {
        return Err(Error::precision(
            format!(
                "lambda_max = {lambda_max} leaves a mollified tail above {CUTOFF_WEIGHT:e}; \
                 epsilon = {epsilon} requires lambda_max ≥ {required:.6e}"
            ),
            mollifier.weight(epsilon, lambda_max.max(0.0).sqrt()),
        ));
    }
    let roots = spectral_roots(lambda_max, sectors)?;
    let amps: Vec<f64> = roots
        .iter()
        .map(|&(s, m)| m * mollifier.weight(epsilon, s))
        .collect();
    let freqs: Vec<f64> = roots.iter().map(|&(s, _)| s).collect();
    let values = cosine_sum(t_grid, &freqs, &amps);
    let bound = mollifier.tail_bound(epsilon, lambda_max);
    Ok(t_grid
        .iter()
        .zip(values)
        .map(|(&t, v)| TraceSample {
            parameter: Complex64::new(t, 0.0),
            value: Complex64::new(v, 0.0),
            truncation_bound: bound,
            terms_used: freqs.len(),
        })
        .collect())
}

/// `Σ_j amps[j] cos(t freqs[j])` for every `t` in the grid.
pub(crate) fn cosine_sum(t_grid: &[f64], freqs: &[f64], amps: &[f64]) -> Vec<f64> {
    let uniform = uniform_step(t_grid);
    let partials: Vec<Vec<f64>> = freqs
        .par_chunks(CHUNK)
        .zip(amps.par_chunks(CHUNK))
        .map(|(f, a)| match uniform {
            Some(dt) => chunk_uniform(t_grid[0], dt, t_grid.len(), f, a),
            None => chunk_direct(t_grid, f, a),
        })
        .collect();
    tree_reduce(partials, t_grid.len())
}

/// Grid step if the grid is uniform to within rounding.
pub(crate) fn uniform_step(t_grid: &[f64]) -> Option<f64> {
    if t_grid.len() < 2 {
        return None;
    }
    let n = t_grid.len() - 1;
    let dt = (t_grid[n] - t_grid[0]) / n as f64;
    if dt == 0.0 {
        return None;
    }
    let ok = t_grid
        .iter()
        .enumerate()
        .all(|(i, &t)| (t - (t_grid[0] + i as f64 * dt)).abs() <= 1e-9 * dt.abs());
    ok.then_some(dt)
}

fn chunk_direct(t_grid: &[f64], freqs: &[f64], amps: &[f64]) -> Vec<f64> {
    t_grid
        .iter()
        .map(|&t| {
            let terms: Vec<f64> = freqs
                .iter()
                .zip(amps)
                .map(|(s, a)| a * (t * s).cos())
                .collect();
            crate::quad::pairwise_sum(&terms)
        })
        .collect()
}

#[allow(clippy::needless_range_loop)]
fn chunk_uniform(t0: f64, dt: f64, steps: usize, freqs: &[f64], amps: &[f64]) -> Vec<f64> {
    let n = freqs.len();
    let mut out = vec![0.0; steps];
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    let (rot_s, rot_c): (Vec<f64>, Vec<f64>) = freqs.iter().map(|s| (dt * s).sin_cos()).unzip();
    let mut k = 0;
    while k < steps {
        let t = t0 + k as f64 * dt;
        for j in 0..n {
            let (sn, cs) = (t * freqs[j]).sin_cos();
            re[j] = cs;
            im[j] = sn;
        }
        let block_end = (k + RESEED_EVERY).min(steps);
        for slot in out.iter_mut().take(block_end).skip(k) {
            let mut acc = [0.0f64; LANES];
            let mut j = 0;
            while j + LANES <= n {
                for lane in 0..LANES {
                    let idx = j + lane;
                    acc[lane] += amps[idx] * re[idx];
                    let r = re[idx] * rot_c[idx] - im[idx] * rot_s[idx];
                    im[idx] = re[idx] * rot_s[idx] + im[idx] * rot_c[idx];
                    re[idx] = r;
                }
                j += LANES;
            }
            for idx in j..n {
                acc[idx % LANES] += amps[idx] * re[idx];
                let r = re[idx] * rot_c[idx] - im[idx] * rot_s[idx];
                im[idx] = re[idx] * rot_s[idx] + im[idx] * rot_c[idx];
                re[idx] = r;
            }
            *slot = crate::quad::pairwise_sum(&acc);
        }
        k = block_end;
    }
    out
}

fn tree_reduce(mut parts: Vec<Vec<f64>>, len: usize) -> Vec<f64> {
    if parts.is_empty() {
        return vec![0.0; len];
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap()
}

/// Uniform grid of `steps` points on `[t_min, t_max]`.
pub fn uniform_grid(t_min: f64, t_max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![t_min],
        n => {
            let dt = (t_max - t_min) / (n - 1) as f64;
            (0..n).map(|i| t_min + i as f64 * dt).collect()
        }
    }
}

/// Reference closed-geodesic lengths `2π√n` up to `max_length`.
pub fn reference_lengths(max_length: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut n = 1u64;
    loop {
        let l = 2.0 * PI * (n as f64).sqrt();
        if l > max_length {
            break;
        }
        out.push(l);
        n += 1;
    }
    out
}
