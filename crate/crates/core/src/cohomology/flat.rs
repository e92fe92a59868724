//! Direct solution `a(z, w) = ∫_{−∞}^0 b(z + It/2, e^{it}w) dt` for symbols
//! that are flat at `I = 0`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};

/// A symbol `b(z, I, θ)`, with `w = √I e^{iθ}`, supported in a bounded
/// `z`-interval and negligible (at most `1e−12`) for `I ≤ i_flat()`.
pub trait FlatSymbol: Sync {
    /// Closed `z`-interval outside of which `b` vanishes.
    fn support(&self) -> (f64, f64);
    fn i_flat(&self) -> f64;
    fn eval(&self, z: f64, i: f64, theta: f64) -> Complex64;
}

/// Evaluator of the solution for a fixed symbol.
pub struct FlatSolution<'a, S: FlatSymbol + ?Sized> {
    symbol: &'a S,
    lo: f64,
    tol: f64,
}

/// Checks the symbol's support and returns its solution operator.
pub fn flat_solver<S: FlatSymbol + ?Sized>(b: &S) -> Result<FlatSolution<'_, S>> {
    let (lo, hi) = b.support();
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::domain(
            "flat symbol support must be a bounded z-interval; the t-range would be unbounded",
        ));
    }
    if !(b.i_flat() >= 0.0) {
        return Err(Error::domain("i_flat must be nonnegative"));
    }
    Ok(FlatSolution {
        symbol: b,
        lo,
        tol: 1e-12,
    })
}

impl<S: FlatSymbol + ?Sized> FlatSolution<'_, S> {
    /// Absolute quadrature tolerance.
    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// `a(z, I, θ)`.
    ///
    /// The integrand vanishes once `z + It/2` drops below the support, so the
    /// `t`-range is `[2(lo − z)/I, 0]`. For `I ≤ i_flat` the symbol is below
    /// `1e−12` and the solution is returned as zero.
    pub fn eval(&self, z: f64, i: f64, theta: f64) -> Result<Complex64> {
        if !(i >= 0.0) || !z.is_finite() || !theta.is_finite() {
            return Err(Error::domain("need I ≥ 0 and finite z, θ"));
        }
        if i <= self.symbol.i_flat() || z <= self.lo {
            return Ok(Complex64::default());
        }
        let t_min = 2.0 * (self.lo - z) / i;
        // Quarter turns of θ per initial panel.
        let panels = ((-t_min) / (0.5 * std::f64::consts::PI)).ceil().max(1.0) as usize;
        let opts = QuadOptions {
            abs_tol: self.tol,
            rel_tol: 0.0,
            max_panels: 50 * panels + 1000,
            initial_panels: panels,
        };
        let r = integrate(
            |t| self.symbol.eval(z + 0.5 * i * t, i, theta + t),
            t_min,
            0.0,
            opts,
        )?;
        Ok(r.value)
    }

    /// `∂_θ a + ½ I ∂_z a − b` at a point, by fourth-order central
    /// differences with step `h`.
    pub fn residual(&self, z: f64, i: f64, theta: f64, h: f64) -> Result<Complex64> {
        let d = |f: &dyn Fn(f64) -> Result<Complex64>, x: f64| -> Result<Complex64> {
            Ok(
                (f(x - 2.0 * h)? - 8.0 * f(x - h)? + 8.0 * f(x + h)? - f(x + 2.0 * h)?)
                    / (12.0 * h),
            )
        };
        let d_theta = d(&|th| self.eval(z, i, th), theta)?;
        let d_z = d(&|zz| self.eval(zz, i, theta), z)?;
        Ok(d_theta + 0.5 * i * d_z - self.symbol.eval(z, i, theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `e^{−1/I} ψ(z) cos(θ + phase)` with the standard bump `ψ` on `[−1, 1]`.
    struct Bump {
        phase: f64,
    }

    fn psi(z: f64) -> f64 {
        if z.abs() < 1.0 {
            (-1.0 / (1.0 - z * z)).exp()
        } else {
            0.0
        }
    }

    impl FlatSymbol for Bump {
        fn support(&self) -> (f64, f64) {
            (-1.0, 1.0)
        }
        fn i_flat(&self) -> f64 {
            // e^{−1/I} ≤ 1e−12 below this.
            1.0 / (12.0 * 10f64.ln())
        }
        fn eval(&self, z: f64, i: f64, theta: f64) -> Complex64 {
            if i <= 0.0 {
                return Complex64::default();
            }
            Complex64::new((-1.0 / i).exp() * psi(z) * (theta + self.phase).cos(), 0.0)
        }
    }

    struct Zero;
    impl FlatSymbol for Zero {
        fn support(&self) -> (f64, f64) {
            (0.0, 0.0)
        }
        fn i_flat(&self) -> f64 {
            0.0
        }
        fn eval(&self, _: f64, _: f64, _: f64) -> Complex64 {
            Complex64::default()
        }
    }

    struct Unbounded;
    impl FlatSymbol for Unbounded {
        fn support(&self) -> (f64, f64) {
            (f64::NEG_INFINITY, 0.0)
        }
        fn i_flat(&self) -> f64 {
            0.0
        }
        fn eval(&self, _: f64, _: f64, _: f64) -> Complex64 {
            Complex64::new(1.0, 0.0)
        }
    }

    #[test]
    fn zero_symbol() {
        let s = flat_solver(&Zero).unwrap();
        assert_eq!(s.eval(0.3, 0.5, 1.0).unwrap(), Complex64::default());
    }

    #[test]
    fn unbounded_support_is_rejected() {
        assert!(flat_solver(&Unbounded).err().unwrap().is_domain());
    }

    #[test]
    fn residual_is_small() {
        let b = Bump { phase: 0.0 };
        let s = flat_solver(&b).unwrap();
        for &(z, i, th) in &[
            (0.2, 0.5, 0.3),
            (-0.4, 1.0, 2.0),
            (0.9, 0.2, -1.0),
            (1.5, 0.8, 0.0),
        ] {
            let r = s.residual(z, i, th, 1e-3).unwrap();
            assert!(r.norm() <= 1e-6, "({z}, {i}, {th}): {r}");
        }
    }

    #[test]
    fn rotation_equivariance() {
        let alpha = 0.7;
        let b = Bump { phase: 0.0 };
        let rotated = Bump { phase: alpha };
        let s = flat_solver(&b).unwrap();
        let sr = flat_solver(&rotated).unwrap();
        for &(z, i, th) in &[(0.2, 0.5, 0.3), (0.6, 0.3, -2.0)] {
            let lhs = sr.eval(z, i, th).unwrap();
            let rhs = s.eval(z, i, th + alpha).unwrap();
            assert!((lhs - rhs).norm() < 1e-11);
        }
    }
}
