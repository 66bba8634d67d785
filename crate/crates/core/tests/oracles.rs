//! Independent brute-force computations compared against the library.

mod common;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle::{classical_maslov2, cover_parallelograms, determinantal_divisors, Summary};
use lensgrid::algebra::smith_normal_form;
use lensgrid::corpus::{exhaustive, exhaustive_upto, lens_spaces};
use lensgrid::generators::{empty_parallelograms_from, GeneratorSpace};
use lensgrid::gradings::{gradings, rat};
use lensgrid::{Generator, GridDiagram};

fn library_parallelograms(d: &GridDiagram, x: &Generator) -> Vec<Summary> {
    let mut out: Vec<Summary> = empty_parallelograms_from(d, x)
        .into_iter()
        .map(|r| {
            let widen = |v: &[u8]| v.iter().map(|&e| e as u32).collect();
            (r.terminal.clone(), widen(&r.n_o), widen(&r.n_x))
        })
        .collect();
    out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    out
}

#[test]
fn empty_parallelograms_match_cover_rectangles() {
    let mut checked = 0;
    for (p, q) in lens_spaces(18) {
        for n in 1..=3usize {
            if p as usize * n * n > 18 {
                continue;
            }
            for d in exhaustive(n, p, q).into_iter().step_by(5) {
                let space = GeneratorSpace::for_diagram(&d).unwrap();
                for x in space.iter() {
                    assert_eq!(
                        library_parallelograms(&d, &x),
                        cover_parallelograms(&d, &x),
                        "{} from {x}",
                        d.to_text()
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000, "only {checked} generators checked");
}

#[test]
fn smith_form_matches_minor_gcds() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let mut expected = Vec::new();
        let mut prev = 1i128;
        for dk in determinantal_divisors(&m) {
            expected.push(BigInt::from(dk / prev));
            prev = dk;
        }
        let got: Vec<BigInt> = smith_normal_form(&m).into_iter().map(|f| f.abs()).collect();
        assert_eq!(got, expected, "case {case}: {m:?}");
    }
}

#[test]
fn sphere_gradings_match_classical_formulas() {
    let mut diagrams = exhaustive_upto(2, 1);
    diagrams.extend(exhaustive(3, 1, 0));
    diagrams.extend(exhaustive(4, 1, 0).into_iter().step_by(37));
    for d in &diagrams {
        let n = d.n();
        let cell = |c1: usize, r: usize| (2 * c1 as i64 + 1, 2 * r as i64 + 1);
        let os: Vec<_> = (0..n).map(|r| cell(d.o_c1(r), r)).collect();
        let xs: Vec<_> = (0..n).map(|r| cell(d.x_c1(r), r)).collect();
        let ell = d.link_components().len() as i64;
        for g in GeneratorSpace::for_diagram(d).unwrap().iter() {
            let pts: Vec<_> = g
                .points()
                .iter()
                .map(|&(a, b)| (2 * a as i64, 2 * b as i64))
                .collect();
            let (mo, mx) = (classical_maslov2(&pts, &os), classical_maslov2(&pts, &xs));
            let t = gradings(d, &g);
            assert_eq!(t.s, 0);
            assert_eq!(t.m, rat(mo, 1), "{} at {g}", d.to_text());
            assert_eq!(
                t.a,
                rat(mo - mx - (n as i64 - ell), 2),
                "{} at {g}",
                d.to_text()
            );
        }
    }
}
