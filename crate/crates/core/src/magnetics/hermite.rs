//! Truncated Hermite-basis matrix of `H_ζ`.
//!
//! In the symmetric gauge `H_ζ = −Δ + (ζ²/4)(x² + y²) + iζ(x∂y − y∂x)`. The
//! basis is the tensor product of Hermite functions of length scale `s`,
//! truncated to total degree `n_x + n_y ≤ N`. Position and derivative act by
//! ladder operators, `x = s(a + a†)/√2` and `∂x = (a − a†)/(√2 s)`. The
//! Hermitian matrix `S + iB` is diagonalized through its real symmetric form
//! `[[S, −B], [B, S]]`, whose spectrum is that of `S + iB` with every
//! eigenvalue doubled.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteTruncation {
    /// Largest total degree `n_x + n_y`.
    pub degree: usize,
    /// Length scale of the Hermite functions.
    pub scale: f64,
}

impl HermiteTruncation {
    /// Scale at which the basis diagonalizes the oscillator part exactly.
    pub fn matched(degree: usize, zeta: f64) -> Self {
        Self {
            degree,
            scale: (2.0 / zeta.abs()).sqrt(),
        }
    }

    pub fn dimension(&self) -> usize {
        (self.degree + 1) * (self.degree + 2) / 2
    }
}

/// One-dimensional matrices of `x`, `∂x`, `x²` and `∂x²` on Hermite
/// functions `0..=n`.
fn one_dimensional(n: usize, s: f64) -> [DMatrix<f64>; 4] {
    // One extra level keeps the products exact inside the truncation.
    let m = n + 2;
    let mut x = DMatrix::zeros(m, m);
    let mut d = DMatrix::zeros(m, m);
    for k in 0..m - 1 {
        let r = ((k + 1) as f64).sqrt();
        x[(k, k + 1)] = s * r / 2f64.sqrt();
        x[(k + 1, k)] = s * r / 2f64.sqrt();
        d[(k, k + 1)] = r / (2f64.sqrt() * s);
        d[(k + 1, k)] = -r / (2f64.sqrt() * s);
    }
    let x2 = &x * &x;
    let d2 = &d * &d;
    let cut = |a: &DMatrix<f64>| a.view((0, 0), (n + 1, n + 1)).into_owned();
    [cut(&x), cut(&d), cut(&x2), cut(&d2)]
}

/// Sorted eigenvalues of the truncated `H_ζ`.
pub fn hermite_spectrum(zeta: f64, trunc: HermiteTruncation) -> Result<Vec<f64>> {
    if zeta == 0.0 || !zeta.is_finite() {
        return Err(Error::domain(format!(
            "zeta must be finite and nonzero, got {zeta}"
        )));
    }
    if !(trunc.scale > 0.0) || !trunc.scale.is_finite() {
        return Err(Error::domain("Hermite scale must be positive"));
    }
    let n = trunc.degree;
    let [x, d, x2, d2] = one_dimensional(n, trunc.scale);
    let states: Vec<(usize, usize)> = (0..=n)
        .flat_map(|total| (0..=total).map(move |a| (a, total - a)))
        .collect();
    let dim = states.len();
    let mut s_mat = DMatrix::<f64>::zeros(dim, dim);
    let mut b_mat = DMatrix::<f64>::zeros(dim, dim);
    let w2 = 0.25 * zeta * zeta;
    for (i, &(ax, ay)) in states.iter().enumerate() {
        for (j, &(bx, by)) in states.iter().enumerate() {
            let dx = if ay == by { 1.0 } else { 0.0 };
            let dy = if ax == bx { 1.0 } else { 0.0 };
            s_mat[(i, j)] =
                dx * (-d2[(ax, bx)] + w2 * x2[(ax, bx)]) + dy * (-d2[(ay, by)] + w2 * x2[(ay, by)]);
            // x∂y − y∂x
            let rot = x[(ax, bx)] * d[(ay, by)] - d[(ax, bx)] * x[(ay, by)];
            b_mat[(i, j)] = zeta * rot;
        }
    }
    let mut real = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
    real.view_mut((0, 0), (dim, dim)).copy_from(&s_mat);
    real.view_mut((dim, dim), (dim, dim)).copy_from(&s_mat);
    real.view_mut((0, dim), (dim, dim)).copy_from(&(-&b_mat));
    real.view_mut((dim, 0), (dim, dim)).copy_from(&b_mat);
    let eig = SymmetricEigen::new(real);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values.into_iter().step_by(2).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_basis_is_exact() {
        for zeta in [1.0, -2.0, 0.7] {
            let spec = hermite_spectrum(zeta, HermiteTruncation::matched(12, zeta)).unwrap();
            assert_eq!(spec.len(), HermiteTruncation::matched(12, zeta).dimension());
            for v in &spec {
                let l = ((v / zeta.abs() - 1.0) / 2.0).round();
                assert!(
                    (v - (2.0 * l + 1.0) * zeta.abs()).abs() < 1e-8,
                    "{zeta}: {v}"
                );
            }
            for l in 0..5 {
                let level = (2 * l + 1) as f64 * zeta.abs();
                assert!(spec.iter().any(|v| (v - level).abs() < 1e-8));
            }
        }
    }

    #[test]
    fn mismatched_basis_converges_monotonically() {
        let zeta: f64 = 1.5;
        let scale = 1.3 * (2.0 / zeta).sqrt();
        let errors: Vec<f64> = [8usize, 16, 24]
            .iter()
            .map(|&degree| {
                let spec = hermite_spectrum(zeta, HermiteTruncation { degree, scale }).unwrap();
                spec[..5]
                    .iter()
                    .map(|v| (v - zeta).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
    }
}
