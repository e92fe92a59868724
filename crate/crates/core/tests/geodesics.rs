use std::f64::consts::PI;

use heisenberg_trace::geodesics::flow::{flow_map, flow_map_extrapolated, lattice_side};
use heisenberg_trace::geodesics::{exact_flow, find_closed, g_star, integrate, PhasePoint};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = PhasePoint> {
    (
        -3.0f64..3.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_map(|(x, y, z, px, py, zeta)| PhasePoint::new(x, y, z, px, py, zeta))
}

fn dist(a: &PhasePoint, b: &PhasePoint) -> f64 {
    a.to_array()
        .iter()
        .zip(b.to_array())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_conserved(p in point(), t in -5.0f64..5.0) {
        let r = integrate(p, t, 1e-2).unwrap();
        prop_assert!(r.max_energy_drift <= 1e-11 * (1.0 + g_star(&p)));
    }

    #[test]
    fn midpoint_matches_exact_flow(p in point(), t in -2.0f64..2.0) {
        let num = flow_map_extrapolated(&p, t, 400).unwrap();
        let ex = exact_flow(&p, t);
        prop_assert!(dist(&num, &ex) <= 1e-7, "{:?} vs {:?}", num, ex);
    }

    #[test]
    fn flow_commutes_with_lattice_translation(p in point(), t in -3.0f64..3.0, i in -2i32..3, j in -2i32..3, k in -2i32..3) {
        let s = lattice_side();
        let (a, b, c) = (i as f64 * s, j as f64 * s, k as f64 * PI);
        let lhs = exact_flow(&p.translate(a, b, c), t);
        let rhs = exact_flow(&p, t).translate(a, b, c);
        prop_assert!(dist(&lhs, &rhs) <= 1e-9 * (1.0 + lhs.to_array().iter().fold(0.0f64, |m, v| m.max(v.abs()))));
    }

    #[test]
    fn momentum_scaling_reparametrizes_time(p in point(), t in -2.0f64..2.0, lambda in 0.25f64..4.0) {
        let scaled = PhasePoint::new(p.x, p.y, p.z, lambda * p.p_x, lambda * p.p_y, lambda * p.zeta);
        let a = exact_flow(&scaled, t);
        let b = exact_flow(&p, lambda * t);
        prop_assert!((a.x - b.x).abs() + (a.y - b.y).abs() + (a.z - b.z).abs() <= 1e-9 * (1.0 + b.z.abs()));
        prop_assert!((a.g_star() - lambda * lambda * b.g_star()).abs() <= 1e-9 * (1.0 + a.g_star()));
    }

    #[test]
    fn reversibility(p in point(), t in 0.1f64..3.0) {
        let q = flow_map(&p, t, 300).unwrap();
        let back = flow_map(&q, -t, 300).unwrap();
        prop_assert!(dist(&back, &p) <= 1e-10);
    }
}

#[test]
fn straight_line_without_fibre_momentum() {
    let p = PhasePoint::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    let r = integrate(p, 2.0, 1e-2).unwrap();
    let end = r.trajectory.last().unwrap().1;
    assert!((end.x - 2.0).abs() < 1e-12 && end.y.abs() < 1e-12 && end.z.abs() < 1e-12);
    assert_eq!((end.p_x, end.p_y), (1.0, 0.0));
}

#[test]
fn energy_over_forty_time_units() {
    let p = PhasePoint::new(0.3, -1.1, 0.7, 0.4, 0.9, 1.3);
    let e = g_star(&p);
    for t in [20.0, -20.0] {
        let r = integrate(p, t, 1e-3).unwrap();
        assert!(r.max_energy_drift <= 1e-9 * (1.0 + e));
    }
}

#[test]
fn closed_lengths_up_to_sixteen() {
    let s = find_closed(16.0, 1.0, 1e-6).unwrap();
    assert_eq!(s.len(), 6);
    for (n, l) in s.lengths.iter().enumerate() {
        assert!((l - 2.0 * PI * ((n + 1) as f64).sqrt()).abs() < 1e-6);
        assert_eq!(s.amplitudes[n], (n + 1) as f64);
    }
}
