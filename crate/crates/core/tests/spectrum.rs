use heisenberg_trace::spectrum::{
    counting_function, enumerate, heisenberg_weyl_constant, Indices, Sector, Sectors, SpectrumQuery,
};
use proptest::prelude::*;

fn total(q: &SpectrumQuery) -> u64 {
    enumerate(q).unwrap().iter().map(|e| e.multiplicity).sum()
}

#[test]
fn merged_lowest_levels() {
    let q = SpectrumQuery::new(6.0, Sectors::HEISENBERG, true).unwrap();
    let rows: Vec<(f64, u64)> = enumerate(&q)
        .unwrap()
        .iter()
        .map(|e| (e.value, e.multiplicity))
        .collect();
    assert_eq!(rows, vec![(2.0, 2), (4.0, 4), (6.0, 8)]);
}

#[test]
fn weyl_constant() {
    assert_eq!(
        heisenberg_weyl_constant(),
        std::f64::consts::PI.powi(2) / 32.0
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merging_preserves_total_multiplicity(lambda in 0.5f64..400.0, which in 0usize..3) {
        let s = [Sectors::HEISENBERG, Sectors::TORUS, Sectors::ALL][which];
        let merged = SpectrumQuery::new(lambda, s, true).unwrap();
        let split = SpectrumQuery::new(lambda, s, false).unwrap();
        prop_assert_eq!(total(&merged), total(&split));
        prop_assert_eq!(total(&merged), counting_function(lambda, s).unwrap());
    }

    #[test]
    fn heisenberg_entries_are_consistent(lambda in 1.0f64..300.0) {
        let q = SpectrumQuery::new(lambda, Sectors::HEISENBERG, false).unwrap();
        for e in enumerate(&q).unwrap() {
            prop_assert!(e.value <= lambda);
            match e.indices {
                Some(Indices::Heisenberg { m, l }) => {
                    prop_assert_eq!(e.value, (2 * m * (2 * l + 1)) as f64);
                    prop_assert_eq!(e.multiplicity, 2 * m);
                }
                other => prop_assert!(false, "unexpected indices {:?}", other),
            }
        }
    }

    #[test]
    fn merged_lists_are_strictly_increasing(lambda in 1.0f64..300.0) {
        let q = SpectrumQuery::new(lambda, Sectors::ALL, true).unwrap();
        let v = enumerate(&q).unwrap();
        for w in v.windows(2) {
            prop_assert!(w[0].value < w[1].value);
        }
    }

    #[test]
    fn torus_multiplicities_match_lattice_symmetry(lambda in 1.0f64..200.0) {
        let q = SpectrumQuery::new(lambda, Sectors::TORUS, true).unwrap();
        for e in enumerate(&q).unwrap() {
            prop_assert_eq!(e.sector, Sector::Torus);
            // Every nonzero value is shared by the orbit of the dihedral group.
            if e.value > 0.0 {
                prop_assert_eq!(e.multiplicity % 4, 0);
            } else {
                prop_assert_eq!(e.multiplicity, 1);
            }
        }
    }

    #[test]
    fn counting_is_monotone(a in 0.0f64..500.0, b in 0.0f64..500.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        for s in [Sectors::HEISENBERG, Sectors::TORUS] {
            prop_assert!(counting_function(lo, s).unwrap() <= counting_function(hi, s).unwrap());
        }
    }
}
