use heisenberg_trace::cohomology::manufactured::manufactured_pair;
use heisenberg_trace::cohomology::{
    apply_bracket, bracket_residual, flat_solver, solve_modes, FlatSymbol, Grid, ModeSymbol,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn psi(z: f64) -> f64 {
    if z.abs() < 1.0 {
        (-1.0 / (1.0 - z * z)).exp()
    } else {
        0.0
    }
}

fn flat(i: f64) -> f64 {
    if i > 0.0 {
        (-1.0 / i).exp()
    } else {
        0.0
    }
}

/// `b = e^{−1/I} ψ(z) w` with `w = √I e^{iθ}`.
struct OneMode;

impl FlatSymbol for OneMode {
    fn support(&self) -> (f64, f64) {
        (-1.0, 1.0)
    }
    fn i_flat(&self) -> f64 {
        1.0 / (12.0 * 10f64.ln())
    }
    fn eval(&self, z: f64, i: f64, theta: f64) -> Complex64 {
        flat(i) * psi(z) * i.sqrt() * Complex64::from_polar(1.0, theta)
    }
}

#[test]
fn flat_solver_agrees_with_mode_solver() {
    let z = Grid::new(-1.5, 2.5, 1601).unwrap();
    let i = Grid::new(0.0, 1.0, 5).unwrap();
    let b = ModeSymbol::from_fn(
        1,
        z,
        i,
        |_, _| Complex64::default(),
        |_, zz, ii| Complex64::new(flat(ii) * psi(zz), 0.0),
        |_, _, _| Complex64::default(),
    );
    let modes = solve_modes(&b).unwrap();
    let direct = flat_solver(&OneMode).unwrap();
    let theta = 0.4;
    let mut worst: f64 = 0.0;
    for j in 1..i.count {
        let ii = i.point(j);
        for k in (0..z.count).step_by(40) {
            let zz = z.point(k);
            let from_modes =
                modes.pos[0][modes.index(j, k)] * ii.sqrt() * Complex64::from_polar(1.0, theta);
            let d = direct.eval(zz, ii, theta).unwrap();
            worst = worst.max((from_modes - d).norm());
        }
    }
    assert!(worst <= 1e-7, "{worst}");
}

#[test]
fn manufactured_solution_and_convergence() {
    let (exact, b) = manufactured_pair(801).unwrap();
    assert!(solve_modes(&b).unwrap().max_difference(&exact).unwrap() <= 1e-6);
    let r: Vec<f64> = [201usize, 401]
        .iter()
        .map(|&n| {
            let (_, b) = manufactured_pair(n).unwrap();
            bracket_residual(&solve_modes(&b).unwrap(), &b).unwrap()
        })
        .collect();
    assert!((r[0] / r[1]).log2() >= 3.5, "{r:?}");
}

#[test]
fn bracket_of_exact_solution_is_the_right_hand_side() {
    let (exact, b) = manufactured_pair(801).unwrap();
    // The discrete bracket differentiates in z to fourth order.
    assert!(apply_bracket(&exact).unwrap().max_difference(&b).unwrap() <= 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solver_is_linear(ar in -2.0f64..2.0, ai in -2.0f64..2.0, shift in -1.0f64..1.0) {
        let (_, b1) = manufactured_pair(161).unwrap();
        let z = b1.z;
        let i = b1.i;
        let bump = |zz: f64| (-(zz - shift).powi(2)).exp();
        let b2 = ModeSymbol::from_fn(
            2,
            z,
            i,
            |zz, _| Complex64::new(0.0, zz * bump(zz)),
            |n, zz, ii| Complex64::new(bump(zz) * ii, n as f64 * bump(zz)),
            |_, zz, ii| Complex64::new(bump(zz), -ii * bump(zz)),
        );
        let alpha = Complex64::new(ar, ai);
        let lhs = solve_modes(&b1.axpy(alpha, &b2).unwrap()).unwrap();
        let rhs = solve_modes(&b1).unwrap().axpy(alpha, &solve_modes(&b2).unwrap()).unwrap();
        prop_assert!(lhs.max_difference(&rhs).unwrap() <= 1e-12);
    }
}
