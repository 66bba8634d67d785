//! Randomized invariants over seeded diagrams.

use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use lensgrid::algebra::{build_complex, smith_normal_form_with_transforms, Ring};
use lensgrid::corpus::random_diagrams;
use lensgrid::moves::{canonical_form, verify_grading_laws};
use lensgrid::signs::solve_sign_assignment;
use lensgrid::{Generator, GeneratorSpace, GridDiagram};

fn diagram(n: usize, seed: u64) -> GridDiagram {
    random_diagrams(n, 5, 1, seed).remove(0)
}

fn mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn differential_squares_to_zero(n in 1usize..=3, seed in any::<u64>()) {
        let d = diagram(n, seed);
        let f2 = build_complex(&d, Ring::F2, None).unwrap();
        prop_assert!(f2.verify_d_squared().is_ok());
        let signs = solve_sign_assignment(&d).unwrap();
        let z = build_complex(&d, Ring::Z, Some(&signs)).unwrap();
        prop_assert!(z.verify_d_squared().is_ok());
    }

    #[test]
    fn grading_laws_hold(n in 1usize..=3, seed in any::<u64>()) {
        let d = diagram(n, seed);
        for c in verify_grading_laws(&d).unwrap() {
            prop_assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn diagram_text_round_trips(n in 1usize..=4, seed in any::<u64>()) {
        let d = diagram(n, seed);
        prop_assert_eq!(GridDiagram::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn generator_text_and_index_round_trip(n in 1usize..=4, p in 1usize..=5, idx in any::<u64>()) {
        let space = GeneratorSpace::new(n, p).unwrap();
        let i = idx as usize % space.len();
        let g = space.generator(i);
        prop_assert!(g.is_valid(p));
        prop_assert_eq!(space.index(&g), i);
        prop_assert_eq!(Generator::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn shifts_compose(n in 1usize..=3, seed in any::<u64>(),
                      a in -7i64..=7, b in -7i64..=7, c in -7i64..=7, e in -7i64..=7) {
        let d = diagram(n, seed);
        let two = d.shifted(a, b).shifted(c, e);
        let one = d.shifted(a + c, b + e);
        prop_assert_eq!(&two, &one);
        prop_assert_eq!(canonical_form(&one), canonical_form(&d));
    }

    #[test]
    fn smith_transforms_reconstruct(rows in 1usize..=6, cols in 1usize..=6,
                                    entries in prop::collection::vec(-9i64..=9, 36)) {
        let m: Vec<Vec<i64>> = (0..rows).map(|i| entries[i * 6..i * 6 + cols].to_vec()).collect();
        let sf = smith_normal_form_with_transforms(&m);
        let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| x.into()).collect()).collect();
        prop_assert_eq!(mul(&mul(&sf.u, &big), &sf.v), sf.d.clone());
        let f = sf.invariant_factors();
        prop_assert!(f.iter().all(|x| *x > BigInt::zero()));
        prop_assert!(f.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
        prop_assert!(f.len() <= rows.min(cols));
    }
}
