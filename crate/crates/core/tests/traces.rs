use std::f64::consts::PI;

use heisenberg_trace::spectrum::Sectors;
use heisenberg_trace::traces::heat::{
    closed_terms_for, direct_tail_bound, heat_trace_closed, heat_trace_direct,
    heat_trace_full_precision,
};
use heisenberg_trace::traces::lengths::find_peaks;
use heisenberg_trace::traces::wave::uniform_grid;
use heisenberg_trace::traces::{wave_trace_mollified, Mollifier};
use num_complex::Complex64;
use proptest::prelude::*;

fn z_strategy() -> impl Strategy<Value = Complex64> {
    (0.05f64..4.0, -1.0f64..1.0).prop_map(|(x, s)| Complex64::new(x, s * x))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn poisson_identity(z in z_strategy()) {
        let d = heat_trace_full_precision(z).unwrap();
        let tol = 1e-16 * (1.0 + d.value.norm());
        let c = heat_trace_closed(z, closed_terms_for(z, tol).unwrap()).unwrap();
        prop_assert!((d.value - c.value).norm() <= 1e-12 * (1.0 + d.value.norm()));
    }

    #[test]
    fn conjugate_symmetry(z in z_strategy()) {
        let a = heat_trace_full_precision(z).unwrap().value;
        let b = heat_trace_full_precision(z.conj()).unwrap().value;
        prop_assert!((a.conj() - b).norm() <= 4.0 * f64::EPSILON * a.norm());
    }

    #[test]
    fn truncation_bound_is_honest(x in 0.1f64..3.0, exp in 2i32..10) {
        let z = Complex64::new(x, 0.0);
        let tol = 10f64.powi(-exp);
        let coarse = heat_trace_direct(z, tol).unwrap();
        let fine = heat_trace_full_precision(z).unwrap();
        let err = (coarse.value - fine.value).norm();
        prop_assert!(coarse.truncation_bound <= tol);
        prop_assert!(err <= coarse.truncation_bound + 8.0 * f64::EPSILON * fine.value.norm());
    }

    #[test]
    fn tail_bound_decreases_with_terms(x in 0.05f64..3.0, n in 1usize..200) {
        let (a, b) = (direct_tail_bound(x, n), direct_tail_bound(x, 2 * n));
        prop_assert!(b <= a);
        if b > 0.0 {
            prop_assert!(b < a);
        }
    }
}

#[test]
fn doubling_terms_shrinks_the_tail_geometrically() {
    // The tail behaves like n q^n with q = e^{−2x}, so going from n to 2n
    // gains a factor of about 2 q^n.
    let x: f64 = 0.5;
    let q = (-2.0 * x).exp();
    for n in [5, 10, 20, 40] {
        let a = direct_tail_bound(x, n);
        let b = direct_tail_bound(x, 2 * n);
        let gain = b / (a * q.powi(n as i32));
        assert!(gain > 1.5 && gain < 2.5, "n = {n}: {gain}");
    }
}

/// Offset of the highest peak near `2π` for mollifier width `eps`.
fn first_peak_offset(eps: f64) -> f64 {
    let lambda_max = Mollifier::Abel.required_lambda_max(eps);
    let (a, b) = (5.5, 7.0);
    let steps = ((b - a) / (0.25 * eps)).round() as usize + 1;
    let samples = wave_trace_mollified(
        &uniform_grid(a, b, steps),
        eps,
        lambda_max,
        Sectors::HEISENBERG,
    )
    .unwrap();
    let peaks = find_peaks(&samples).unwrap();
    let p = peaks
        .iter()
        .max_by(|x, y| x.prominence.total_cmp(&y.prominence))
        .unwrap();
    (p.t - 2.0 * PI).abs()
}

#[test]
fn wave_peak_sharpens_as_epsilon_shrinks() {
    let offsets: Vec<f64> = [0.05, 0.02, 0.01]
        .iter()
        .map(|&e| first_peak_offset(e))
        .collect();
    for (o, e) in offsets.iter().zip([0.05, 0.02, 0.01]) {
        assert!(*o <= 2.0 * e, "offset {o} at epsilon {e}");
    }
    assert!(offsets[2] <= offsets[0], "{offsets:?}");
}
