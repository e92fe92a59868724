//! Length-spectrum extraction from heat-trace and wave-trace data.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::traces::heat::{heat_trace_full_precision, heat_trace_smooth_part};
use crate::traces::wave::uniform_step;
use crate::traces::TraceSample;

/// At most this many lengths are ever claimed from heat data; deeper
/// corrections sit below double-precision noise.
pub const MAX_HEAT_LENGTHS: usize = 3;

/// Minimum signal-to-noise ratio for a heat sample to enter a fit.
const HEAT_SNR: f64 = 100.0;

/// Largest accepted relative standard deviation of a fitted exponent.
const MAX_EXPONENT_RSD: f64 = 0.05;

/// Detected closed-geodesic lengths with their reference values `2π√n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSpectrum {
    pub lengths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// Absolute uncertainty of each length as reported by the detector.
    pub confidence: Vec<f64>,
    pub reference: Vec<f64>,
}

impl LengthSpectrum {
    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Closest reference length `2π√n` to `length`, as `(n, 2π√n)`.
    pub fn nearest_reference(length: f64) -> (u64, f64) {
        let n = ((length / (2.0 * PI)).powi(2)).round().max(1.0) as u64;
        (n, 2.0 * PI * (n as f64).sqrt())
    }

    pub fn references_up_to(count: usize) -> Vec<f64> {
        (1..=count).map(|n| 2.0 * PI * (n as f64).sqrt()).collect()
    }
}

/// One fitted correction `A z^{−2} exp(−E / z)` of the heat trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub exponent_sd: f64,
    /// Signed amplitude `A`.
    pub amplitude: f64,
    pub points_used: usize,
    pub z_min: f64,
    pub z_max: f64,
    log_amplitude: f64,
    cov: [[f64; 2]; 2],
}

impl ExponentFit {
    /// Length `L` with `L² / 4 = E`.
    pub fn length(&self) -> f64 {
        2.0 * self.exponent.sqrt()
    }

    fn model(&self, z: f64) -> f64 {
        self.amplitude.signum() * (self.log_amplitude - self.exponent / z).exp() / (z * z)
    }

    /// Standard deviation of `ln|model(z)|` propagated from the fit.
    fn log_sd(&self, z: f64) -> f64 {
        let g = [1.0, -1.0 / z];
        let mut v = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                v += g[i] * self.cov[i][j] * g[j];
            }
        }
        v.max(0.0).sqrt()
    }
}

fn validate_heat_grid(z_grid: &[f64]) -> Result<()> {
    if z_grid.len() < 8 {
        return Err(Error::domain(format!(
            "heat length extraction needs at least 8 grid points, got {}",
            z_grid.len()
        )));
    }
    if z_grid.iter().any(|z| !(*z > 0.0) || !z.is_finite()) {
        return Err(Error::domain("heat grid must be positive and finite"));
    }
    if z_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain("heat grid must be strictly decreasing"));
    }
    Ok(())
}

/// Default decreasing logarithmic grid, `48` points from `z = 3` to `z = 0.25`.
///
/// Below `z ≈ 0.3` the first correction `exp(−π²/z)` is under the rounding
/// level of the trace itself, so smaller parameters carry no length
/// information in double precision.
pub fn default_heat_grid() -> Vec<f64> {
    log_grid(3.0, 0.25, 48)
}

pub fn log_grid(from: f64, to: f64, count: usize) -> Vec<f64> {
    let r = (to / from).ln();
    (0..count)
        .map(|i| from * (r * i as f64 / (count - 1).max(1) as f64).exp())
        .collect()
}

/// Weighted least squares for `y = a − E x`; returns `(a, E, covariance)`.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64, [[f64; 2]; 2])> {
    let (mut s, mut sx, mut sxx, mut sy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..x.len() {
        s += w[i];
        sx += w[i] * x[i];
        sxx += w[i] * x[i] * x[i];
        sy += w[i] * y[i];
        sxy += w[i] * x[i] * y[i];
    }
    let det = s * sxx - sx * sx;
    if !(det > 0.0) || !det.is_finite() {
        return None;
    }
    let slope = (s * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    // Covariance of (a, E): E = −slope flips the sign of the cross term.
    let cov = [[sxx / det, sx / det], [sx / det, s / det]];
    Some((intercept, -slope, cov))
}

/// Fits the exponential corrections `exp(−E_n / z)` hidden in the heat trace.
///
/// The smooth part `π²/(16z²) − 1/(4z)` is subtracted from the direct trace
/// and the remainder is fitted term by term: each fit is a weighted straight
/// line of `ln|R| + 2 ln z` against `1/z`, whose slope is `−E_n`, and is then
/// stripped before the next one. Weights combine rounding noise, the
/// propagated uncertainty of previously stripped terms and the expected
/// contamination by the next correction.
pub fn fit_heat_exponents(z_grid: &[f64], n_detect: usize) -> Result<Vec<ExponentFit>> {
    validate_heat_grid(z_grid)?;
    if n_detect == 0 {
        return Err(Error::domain("n_detect must be at least 1"));
    }
    let mut remainder = Vec::with_capacity(z_grid.len());
    let mut noise = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let zc = Complex64::new(z, 0.0);
        let smooth = heat_trace_smooth_part(zc).re;
        let sample = heat_trace_full_precision(zc)?;
        remainder.push(sample.value.re - smooth);
        noise.push(
            8.0 * f64::EPSILON * (sample.value.re.abs() + smooth.abs()) + sample.truncation_bound,
        );
    }

    let mut fits: Vec<ExponentFit> = Vec::new();
    let achieved = |fits: &[ExponentFit]| fits.iter().map(|f| f.exponent).collect::<Vec<_>>();
    for k in 1..=n_detect {
        if k > MAX_HEAT_LENGTHS {
            return Err(Error::Detection {
                message: format!(
                    "heat data resolves at most {MAX_HEAT_LENGTHS} corrections, {n_detect} requested"
                ),
                achieved: achieved(&fits),
            });
        }
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut sds = Vec::new();
        let mut zs = Vec::new();
        let mut signs = Vec::new();
        for (i, &z) in z_grid.iter().enumerate() {
            let mut s = remainder[i];
            let mut unc = noise[i];
            for f in &fits {
                let m = f.model(z);
                s -= m;
                unc += m.abs() * f.log_sd(z);
            }
            let snr = s.abs() / unc;
            if snr >= HEAT_SNR {
                xs.push(1.0 / z);
                ys.push(s.abs().ln() + 2.0 * z.ln());
                sds.push(1.0 / snr);
                zs.push(z);
                signs.push(s.signum());
            }
        }
        if xs.len() < 4 {
            return Err(Error::Detection {
                message: format!(
                    "correction {k}: only {} grid points rise above the noise floor",
                    xs.len()
                ),
                achieved: achieved(&fits),
            });
        }
        if signs.iter().any(|&s| s != signs[0]) {
            return Err(Error::Detection {
                message: format!("correction {k}: remainder changes sign across the fit window"),
                achieved: achieved(&fits),
            });
        }
        // The next correction is at least one fundamental exponent further
        // out; before the first fit its size is estimated from a provisional
        // line through the same points.
        let first_exponent = match fits.first() {
            Some(f) => f.exponent,
            None => {
                let w: Vec<f64> = sds.iter().map(|s| 1.0 / (s * s)).collect();
                match weighted_line(&xs, &ys, &w) {
                    Some((_, e, _)) => e,
                    None => 0.0,
                }
            }
        };
        let weights: Vec<f64> = xs
            .iter()
            .zip(&sds)
            .map(|(x, sd)| {
                let contamination = 3.0 * (-first_exponent.max(0.0) * x).exp();
                let s = sd + contamination;
                1.0 / (s * s)
            })
            .collect();
        let Some((log_amp, exponent, cov)) = weighted_line(&xs, &ys, &weights) else {
            return Err(Error::Detection {
                message: format!("correction {k}: singular fit"),
                achieved: achieved(&fits),
            });
        };
        let exponent_sd = cov[1][1].sqrt();
        if !(exponent > 0.0) || exponent_sd > MAX_EXPONENT_RSD * exponent {
            return Err(Error::Detection {
                message: format!(
                    "correction {k}: ill-conditioned fit (exponent {exponent:.6e} ± {exponent_sd:.2e})"
                ),
                achieved: achieved(&fits),
            });
        }
        if let Some(prev) = fits.last() {
            if exponent < prev.exponent + 0.5 * first_exponent {
                return Err(Error::Detection {
                    message: format!(
                        "correction {k}: exponent {exponent:.6e} is not separated from the previous one \
                         ({:.6e}); the stripped remainder is fit residue",
                        prev.exponent
                    ),
                    achieved: achieved(&fits),
                });
            }
        }
        fits.push(ExponentFit {
            exponent,
            exponent_sd,
            amplitude: signs[0] * log_amp.exp(),
            points_used: xs.len(),
            z_min: zs.iter().cloned().fold(f64::INFINITY, f64::min),
            z_max: zs.iter().cloned().fold(0.0, f64::max),
            log_amplitude: log_amp,
            cov,
        });
    }
    Ok(fits)
}

/// Recovers closed-geodesic lengths `L_n = 2√E_n` from the heat trace.
pub fn extract_lengths_heat(z_grid: &[f64], n_detect: usize) -> Result<LengthSpectrum> {
    let fits = fit_heat_exponents(z_grid, n_detect)?;
    Ok(LengthSpectrum {
        lengths: fits.iter().map(ExponentFit::length).collect(),
        amplitudes: fits.iter().map(|f| f.amplitude).collect(),
        // Three standard deviations, pushed through L = 2√E.
        confidence: fits
            .iter()
            .map(|f| 3.0 * f.exponent_sd / f.exponent.sqrt())
            .collect(),
        reference: LengthSpectrum::references_up_to(n_detect),
    })
}

/// A local maximum of `|W|` on a uniform grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Location refined by a parabola through the three top samples.
    pub t: f64,
    pub index: usize,
    /// Signed trace value at the grid maximum.
    pub value: f64,
    pub height: f64,
    pub prominence: f64,
}

/// All local maxima of `|value|` with their topographic prominence.
///
/// The maximum at `t = 0` (and its mirror images on the negative axis) is
/// excluded: only peaks with `t > 0` are reported.
pub fn find_peaks(samples: &[TraceSample]) -> Result<Vec<Peak>> {
    if samples.len() < 3 {
        return Err(Error::domain(format!(
            "peak detection needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.parameter.re).collect();
    let dt = uniform_step(&t)
        .filter(|d| *d > 0.0)
        .ok_or_else(|| Error::domain("peak detection needs an increasing uniform grid"))?;
    let a: Vec<f64> = samples.iter().map(|s| s.value.norm()).collect();
    let n = a.len();
    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        if !(a[i] > a[i - 1] && a[i] >= a[i + 1]) || t[i] <= 0.5 * dt {
            continue;
        }
        let mut left_min = a[i];
        for j in (0..i).rev() {
            if a[j] > a[i] {
                break;
            }
            left_min = left_min.min(a[j]);
        }
        let mut right_min = a[i];
        for &aj in &a[i + 1..] {
            if aj > a[i] {
                break;
            }
            right_min = right_min.min(aj);
        }
        let curvature = a[i - 1] - 2.0 * a[i] + a[i + 1];
        let shift = if curvature < 0.0 {
            (0.5 * (a[i - 1] - a[i + 1]) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        peaks.push(Peak {
            t: t[i] + shift * dt,
            index: i,
            value: samples[i].value.re,
            height: a[i],
            prominence: a[i] - left_min.max(right_min),
        });
    }
    Ok(peaks)
}

/// Peaks of `|W|` with prominence at least `min_prominence`, as lengths.
pub fn detect_peaks(samples: &[TraceSample], min_prominence: f64) -> Result<LengthSpectrum> {
    let peaks = find_peaks(samples)?;
    let dt = samples[1].parameter.re - samples[0].parameter.re;
    let kept: Vec<Peak> = peaks
        .into_iter()
        .filter(|p| p.prominence >= min_prominence)
        .collect();
    let t_max = samples.last().map(|s| s.parameter.re).unwrap_or(0.0);
    let count = ((t_max / (2.0 * PI)).powi(2)).floor().max(1.0) as usize;
    Ok(LengthSpectrum {
        lengths: kept.iter().map(|p| p.t).collect(),
        amplitudes: kept.iter().map(|p| p.value).collect(),
        confidence: vec![0.5 * dt; kept.len()],
        reference: LengthSpectrum::references_up_to(count),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traces::wave::uniform_grid;

    fn synthetic(f: impl Fn(f64) -> f64, grid: &[f64]) -> Vec<TraceSample> {
        grid.iter()
            .map(|&t| TraceSample {
                parameter: Complex64::new(t, 0.0),
                value: Complex64::new(f(t), 0.0),
                truncation_bound: 0.0,
                terms_used: 0,
            })
            .collect()
    }

    #[test]
    fn single_frequency_gives_its_period() {
        let period = 2.5;
        let grid = uniform_grid(0.0, 3.5, 3501);
        let s = synthetic(|t| 0.5 * (1.0 + (2.0 * PI * t / period).cos()), &grid);
        let spec = detect_peaks(&s, 0.05).unwrap();
        assert_eq!(spec.len(), 1);
        assert!((spec.lengths[0] - period).abs() < 2e-3);
    }

    #[test]
    fn lengths_are_strictly_increasing() {
        let grid = uniform_grid(0.0, 20.0, 2001);
        let s = synthetic(|t| (3.0 * t).sin() + 0.3 * (7.1 * t).cos(), &grid);
        let spec = detect_peaks(&s, 0.01).unwrap();
        assert!(spec.lengths.windows(2).all(|w| w[0] < w[1]));
        assert!(spec.lengths.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn short_grid_is_rejected() {
        assert_eq!(detect_peaks(&[], 0.1).unwrap_err().kind(), "domain");
    }

    #[test]
    fn nearest_reference_rounds_in_n() {
        assert_eq!(LengthSpectrum::nearest_reference(6.3).0, 1);
        assert_eq!(LengthSpectrum::nearest_reference(12.5).0, 4);
    }

    #[test]
    fn heat_grid_validation() {
        assert!(fit_heat_exponents(&[1.0; 3], 1).is_err());
        let increasing = log_grid(0.3, 3.0, 10);
        assert_eq!(
            fit_heat_exponents(&increasing, 1).unwrap_err().kind(),
            "domain"
        );
        assert_eq!(
            fit_heat_exponents(&default_heat_grid(), 0)
                .unwrap_err()
                .kind(),
            "domain"
        );
    }

    #[test]
    fn first_length_from_heat_data() {
        let spec = extract_lengths_heat(&default_heat_grid(), 1).unwrap();
        let l = spec.lengths[0];
        assert!((l / (2.0 * PI) - 1.0).abs() < 1e-2);
        assert!((l - 2.0 * PI).abs() <= spec.confidence[0].max(1e-6));
    }

    #[test]
    fn second_length_from_heat_data() {
        let fits = fit_heat_exponents(&default_heat_grid(), 2).unwrap();
        assert!(fits[1].amplitude < 0.0);
        let l2 = fits[1].length();
        assert!((l2 / (2.0 * PI * 2f64.sqrt()) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn unresolvable_depth_is_a_detection_error() {
        let err = extract_lengths_heat(&default_heat_grid(), 4).unwrap_err();
        assert_eq!(err.kind(), "detection");
    }

    #[test]
    fn small_parameters_carry_no_length_information() {
        // exp(−π²/z) is below 1e−21 of the trace on [0.05, 0.2].
        let grid = log_grid(0.2, 0.05, 16);
        let err = extract_lengths_heat(&grid, 1).unwrap_err();
        assert_eq!(err.kind(), "detection");
    }
}
