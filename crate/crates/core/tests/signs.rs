//! Sign assignments: solving, axiom checking, gauge freedom and restriction.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lensgrid::algebra::{build_complex, homology, Ring, Window};
use lensgrid::corpus::{exhaustive_upto, random_diagrams};
use lensgrid::generators::GeneratorSpace;
use lensgrid::moves::{restrict_signs, solve_restrictable_signs, stabilize_with_data, ALL_KINDS};
use lensgrid::signs::*;
use lensgrid::GridDiagram;

use common::l52_knot;

fn sample() -> Vec<GridDiagram> {
    let mut v = exhaustive_upto(2, 5)
        .into_iter()
        .step_by(9)
        .collect::<Vec<_>>();
    v.extend(random_diagrams(3, 4, 6, 11));
    v
}

#[test]
fn single_flips_are_detected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in sample() {
        let sys = build_constraints(&d).unwrap();
        let s = solve(&sys, Fixing::Plus).unwrap();
        assert!(verify_axioms(&sys, &s).is_empty());
        let keys: Vec<_> = (0..sys.key_space as u32)
            .filter(|&k| s.epsilon_of_key(k).is_some())
            .collect();
        if keys.is_empty() {
            continue;
        }
        let mut bad = s.clone();
        bad.flip(keys[rng.gen_range(0..keys.len())]);
        assert!(!verify_axioms(&sys, &bad).is_empty(), "{}", d.to_text());
    }
}

#[test]
fn gauge_changes_keep_axioms_and_homology() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in sample() {
        let sys = build_constraints(&d).unwrap();
        let s = solve(&sys, Fixing::Plus).unwrap();
        let gens = GeneratorSpace::for_diagram(&d).unwrap().len();
        let g: Vec<u8> = (0..gens).map(|_| rng.gen_range(0..2)).collect();
        let t = s.gauge(&sys, &g);
        assert!(verify_axioms(&sys, &t).is_empty());
        let table = |s: &SignAssignment| {
            let c = build_complex(&d, Ring::Z, Some(s)).unwrap().tilde();
            homology(&c, &Window::AllFinite).unwrap()
        };
        assert_eq!(table(&s), table(&t));
    }
}

#[test]
fn sphere_two_by_two_signs() {
    let d = GridDiagram::from_rows(1, 0, &[0, 1], &[1, 0]).unwrap();
    let sys = build_constraints(&d).unwrap();
    assert_eq!(sys.variable_count(), 4);
    assert!(sys.count(Relation::S2) > 0 && sys.count(Relation::S3) > 0);
    assert_eq!(sys.count(Relation::S1), 0);
    let s = solve_sign_assignment(&d).unwrap();
    assert_eq!(s.defined_count(), 4);
}

#[test]
fn n1_has_nothing_to_sign() {
    for d in exhaustive_upto(1, 5) {
        let s = solve_sign_assignment(&d).unwrap();
        assert_eq!(s.defined_count(), 0);
    }
}

#[test]
fn export_import_round_trip() {
    let d = l52_knot();
    let s = solve_sign_assignment(&d).unwrap();
    let text = s.export().unwrap();
    assert_eq!(SignAssignment::import(&d, &text).unwrap(), s);
    let other = GridDiagram::from_rows(5, 1, &[10, 2, 0], &[9, 13, 8]).unwrap();
    assert!(SignAssignment::import(&other, &text).is_err());
    let truncated: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
    assert!(SignAssignment::import(&d, &truncated).is_err());
}

#[test]
fn restricted_signs_are_sign_assignments() {
    let mut diagrams = exhaustive_upto(1, 5);
    diagrams.extend(exhaustive_upto(2, 3).into_iter().step_by(4));
    for d in &diagrams {
        for kind in ALL_KINDS
            .into_iter()
            .filter(|k| k.to_string().starts_with('X'))
        {
            let st = stabilize_with_data(d, kind, 0).unwrap();
            let big = solve_restrictable_signs(&st).unwrap();
            assert!(verify_axioms(&build_constraints(&st.after).unwrap(), &big).is_empty());
            let small = restrict_signs(&st, &big).unwrap();
            let sys = build_constraints(d).unwrap();
            assert!(
                verify_axioms(&sys, &small).is_empty(),
                "{kind} on {}",
                d.to_text()
            );
            let c = build_complex(d, Ring::Z, Some(&small)).unwrap();
            assert!(c.verify_d_squared().is_ok());
        }
    }
}

#[test]
fn arbitrary_solutions_need_not_restrict() {
    // thin annuli through the split row become thick annuli, which S2 and S3 leave free
    let d = GridDiagram::from_rows(1, 0, &[0, 1], &[1, 0]).unwrap();
    let st = stabilize_with_data(&d, "X:SW".parse().unwrap(), 0).unwrap();
    let arbitrary = solve_sign_assignment(&st.after).unwrap();
    let small = restrict_signs(&st, &arbitrary).unwrap();
    assert!(!verify_axioms(&build_constraints(&d).unwrap(), &small).is_empty());
}
