//! A manufactured solution with its exact right-hand side.
//!
//! The modes of `a*` are `a₀ = e^{−z²}(1 + I)`, `a_n = e^{−(z−n/4)²} e^{−I}`
//! and `ā_n = i e^{−(z+n/4)²} I` for `n = 1, 2`, on `z ∈ [−8, 8]` and
//! `I ∈ [0, 1]`. The bracket is applied analytically, so `b` carries no
//! discretization error.

use num_complex::Complex64;

use crate::cohomology::{Grid, ModeSymbol};
use crate::error::Result;

pub fn gauss(z: f64) -> f64 {
    (-z * z).exp()
}

fn gauss_prime(z: f64) -> f64 {
    -2.0 * z * gauss(z)
}

/// `(a*, b)` with `b = {a*}` on a `z`-grid of `z_count` points and an
/// `I`-grid of 11 points.
pub fn manufactured_pair(z_count: usize) -> Result<(ModeSymbol, ModeSymbol)> {
    let z = Grid::new(-8.0, 8.0, z_count)?;
    let i = Grid::new(0.0, 1.0, 11)?;
    let mut exact = ModeSymbol::from_fn(
        2,
        z,
        i,
        |z, i| Complex64::new(gauss(z) * (1.0 + i), 0.0),
        |n, z, i| Complex64::new(gauss(z - n as f64 / 4.0) * (-i).exp(), 0.0),
        |n, z, i| Complex64::new(0.0, gauss(z + n as f64 / 4.0) * i),
    );
    exact.mode0_factored = false;
    let b = ModeSymbol::from_fn(
        2,
        z,
        i,
        // b₀ = ½ I ∂_z a₀, so c₀ = ½ ∂_z a₀.
        |z, i| Complex64::new(0.5 * gauss_prime(z) * (1.0 + i), 0.0),
        |n, z, i| {
            let s = z - n as f64 / 4.0;
            let a = gauss(s) * (-i).exp();
            Complex64::new(0.5 * i * gauss_prime(s) * (-i).exp(), n as f64 * a)
        },
        |n, z, i| {
            let s = z + n as f64 / 4.0;
            let a = Complex64::new(0.0, gauss(s) * i);
            Complex64::new(0.0, -(n as f64)) * a + Complex64::new(0.0, 0.5 * i * gauss_prime(s) * i)
        },
    );
    Ok((exact, b))
}
