//! Natural cubic splines on uniform grids, with exact integrals against
//! `e^{iωu}`.

use num_complex::Complex64;

use crate::quad::{GL8_NODES, GL8_WEIGHTS};

pub struct CubicSpline {
    h: f64,
    y: Vec<Complex64>,
    /// Second derivatives at the knots; zero at both ends.
    m: Vec<Complex64>,
}

impl CubicSpline {
    pub fn natural(h: f64, values: &[Complex64]) -> Self {
        let n = values.len();
        let mut m = vec![Complex64::default(); n];
        if n >= 3 {
            // m_{k−1} + 4 m_k + m_{k+1} = 6 (y_{k−1} − 2 y_k + y_{k+1}) / h²
            let inner = n - 2;
            let mut diag = vec![4.0; inner];
            let mut rhs: Vec<Complex64> = (1..n - 1)
                .map(|k| 6.0 * (values[k - 1] - 2.0 * values[k] + values[k + 1]) / (h * h))
                .collect();
            for k in 1..inner {
                let w = 1.0 / diag[k - 1];
                diag[k] -= w;
                let prev = rhs[k - 1];
                rhs[k] -= w * prev;
            }
            m[inner] = rhs[inner - 1] / diag[inner - 1];
            for k in (0..inner - 1).rev() {
                m[k + 1] = (rhs[k] - m[k + 2]) / diag[k];
            }
        }
        Self {
            h,
            y: values.to_vec(),
            m,
        }
    }

    /// Coefficients of the cell polynomial in the local variable `τ ∈ [0, h]`.
    fn cell(&self, k: usize) -> [Complex64; 4] {
        let h = self.h;
        let (y0, y1, m0, m1) = (self.y[k], self.y[k + 1], self.m[k], self.m[k + 1]);
        [
            y0,
            (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0,
            m0 / 2.0,
            (m1 - m0) / (6.0 * h),
        ]
    }

    fn eval_cell(c: &[Complex64; 4], t: f64) -> Complex64 {
        c[0] + t * (c[1] + t * (c[2] + t * c[3]))
    }

    /// `∫_0^h p(τ) e^{iω(τ − h)} dτ` for the cubic `p` of cell `k`.
    ///
    /// Repeated integration by parts terminates after four terms for a cubic;
    /// when `|ω|h < 1` its cancellation is avoided with an eight-point
    /// Gauss–Legendre rule, which is exact to rounding there.
    pub fn oscillatory_cell(&self, k: usize, omega: f64) -> Complex64 {
        let h = self.h;
        let c = self.cell(k);
        if omega.abs() * h < 1.0 {
            let mut s = Complex64::default();
            for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                let t = 0.5 * h * (1.0 + x);
                s += w * Self::eval_cell(&c, t) * Complex64::from_polar(1.0, omega * (t - h));
            }
            return 0.5 * h * s;
        }
        // Derivatives of p at τ = 0 and τ = h.
        let at0 = [c[0], c[1], 2.0 * c[2], 6.0 * c[3]];
        let at_h = [
            Self::eval_cell(&c, h),
            c[1] + h * (2.0 * c[2] + 3.0 * h * c[3]),
            2.0 * c[2] + 6.0 * h * c[3],
            6.0 * c[3],
        ];
        let back = Complex64::from_polar(1.0, -omega * h);
        let iw = Complex64::new(0.0, omega);
        let mut s = Complex64::default();
        let mut denom = iw;
        let mut sign = 1.0;
        for d in 0..4 {
            s += sign * (at_h[d] - at0[d] * back) / denom;
            denom *= iw;
            sign = -sign;
        }
        s
    }

    /// `∫_{z_0}^{z_k}` of the spline at every knot.
    pub fn cumulative_integral(&self) -> Vec<Complex64> {
        let h = self.h;
        let mut out = Vec::with_capacity(self.y.len());
        let mut acc = Complex64::default();
        out.push(acc);
        for k in 0..self.y.len() - 1 {
            acc += 0.5 * h * (self.y[k] + self.y[k + 1])
                - h * h * h * (self.m[k] + self.m[k + 1]) / 24.0;
            out.push(acc);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn reproduces_linear_data() {
        let ys: Vec<Complex64> = (0..10).map(|k| c(2.0 + 0.5 * k as f64)).collect();
        let s = CubicSpline::natural(0.1, &ys);
        assert!(s.m.iter().all(|m| m.norm() < 1e-12));
        let integ = s.cumulative_integral();
        // ∫_0^{0.9} (2 + 5u) du
        assert!((integ[9] - c(2.0 * 0.9 + 2.5 * 0.81)).norm() < 1e-13);
    }

    #[test]
    fn filon_branches_agree() {
        let ys: Vec<Complex64> = (0..6).map(|k| c((k as f64 * 0.3).sin())).collect();
        let s = CubicSpline::natural(0.3, &ys);
        for omega in [3.4, 5.0, -6.0] {
            // At |ω|h just above 1 both formulas are accurate.
            let h = 0.3;
            let cell = s.cell(2);
            let mut gl = Complex64::default();
            for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS) {
                let t = 0.5 * h * (1.0 + x);
                gl += w
                    * CubicSpline::eval_cell(&cell, t)
                    * Complex64::from_polar(1.0, omega * (t - h));
            }
            gl *= 0.5 * h;
            let filon = s.oscillatory_cell(2, omega);
            assert!((gl - filon).norm() < 1e-13, "{omega}");
        }
    }
}
