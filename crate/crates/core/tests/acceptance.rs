//! Acceptance suite: one PASS/FAIL line per criterion, all checks exact.
//!
//! Known failures are listed in `KNOWN_FAILURES`; the test fails if the set
//! of failing criteria differs from it in either direction.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::oracle::determinantal_divisors;
use common::{corpus, l52_knot};
use lensgrid::algebra::complex::connector_variables;
use lensgrid::algebra::{build_complex, homology, smith_normal_form, Ring, Window};
use lensgrid::corpus::{scan_log, scan_torsion};
use lensgrid::generators::special_generator_xo;
use lensgrid::gradings::{d_invariant, rat, spin_c, spin_c_tilde, Grader};
use lensgrid::moves::{
    build_combined, solve_restrictable_signs, stabilization_split, stabilize_with_data,
    verify_commutation, verify_grading_laws, verify_marker_homotopy, verify_shift_invariance,
    verify_stabilization, Check,
};
use lensgrid::signs::{build_constraints, solve, verify_axioms, Fixing};
use lensgrid::{Generator, GridDiagram};

/// d(2,1,0) comes out as -1/4 from the recursion; the expected +1/4 is kept.
const KNOWN_FAILURES: &[u32] = &[2];

type Outcome = Result<(), String>;

fn expect<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Outcome {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn all_pass(context: &str, checks: Vec<Check>) -> Outcome {
    match checks.into_iter().find(|c| !c.passed) {
        None => Ok(()),
        Some(c) => Err(format!("{context}: {} ({})", c.name, c.detail)),
    }
}

fn l52_knot_anchors() -> Outcome {
    let d = l52_knot();
    let z = Generator::new(vec![1, 2, 0], vec![4, 0, 3]);
    expect("W(z)", z.points(), vec![(13, 0), (2, 1), (9, 2)])?;
    let mut lift: Vec<(usize, usize)> = z
        .points()
        .iter()
        .flat_map(|&(c1, c2)| (0..5).map(move |k| (c1, c2, k)))
        .map(|(c1, c2, k)| d.cover_point(c1, c2, k))
        .collect();
    lift.sort_by_key(|&(a, b)| (b, a));
    let listed = vec![
        (13, 0),
        (2, 1),
        (9, 2),
        (4, 3),
        (8, 4),
        (0, 5),
        (10, 6),
        (14, 7),
        (6, 8),
        (1, 9),
        (5, 10),
        (12, 11),
        (7, 12),
        (11, 13),
        (3, 14),
    ];
    expect("cover lift of W(z)", lift, listed)?;
    expect("S~(z)", spin_c_tilde(&d, &z), 3)?;
    expect("S(z)", spin_c(&d, &z), 4)?;
    let g = Grader::new(&d);
    expect("O quadruple", g.quadruple(&z, false), [52, 55, 40, 42])?;
    expect("M(z)", g.maslov(&z), rat(2, 5))?;
    expect("X quadruple", g.quadruple(&z, true), [52, 67, 52, 62])?;
    expect("M_X(z)", g.maslov_x(&z), rat(-2, 5))?;
    expect("A~(z)", g.maslov(&z) - g.maslov_x(&z), rat(4, 5))?;
    expect("A(z)", g.alexander(&z), rat(-3, 5))?;
    expect(
        "x_O p-coordinates",
        special_generator_xo(&d).pcoords,
        vec![3, 4, 2],
    )
}

fn correction_terms() -> Outcome {
    let d = |p, q, i| d_invariant(p, q, i).map_err(|e| e.to_string());
    let mut bad = Vec::new();
    for (args, want) in [
        ((1, 0, 0), rat(0, 1)),
        ((2, 1, 0), rat(1, 4)),
        ((5, 2, 1), rat(-2, 5)),
    ] {
        let got = d(args.0, args.1, args.2)?;
        if got != want {
            bad.push(format!("d{args:?} = {got}, expected {want}"));
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad.join("; "))
    }
}

fn d_squared(all: &[GridDiagram]) -> Outcome {
    for d in all {
        let c = build_complex(d, Ring::F2, None).map_err(|e| e.to_string())?;
        c.verify_d_squared()
            .map_err(|w| format!("F2 {}: {w:?}", d.to_text()))?;
        let signs = lensgrid::signs::solve_sign_assignment(d).map_err(|e| e.to_string())?;
        let c = build_complex(d, Ring::Z, Some(&signs)).map_err(|e| e.to_string())?;
        c.verify_d_squared()
            .map_err(|w| format!("Z {}: {w:?}", d.to_text()))?;
    }
    Ok(())
}

fn grading_laws(all: &[GridDiagram]) -> Outcome {
    for d in all {
        all_pass(
            &d.to_text(),
            verify_grading_laws(d).map_err(|e| e.to_string())?,
        )?;
    }
    Ok(())
}

fn shift_invariance(all: &[GridDiagram]) -> Outcome {
    let sample: Vec<_> = all.iter().step_by(all.len() / 24).collect();
    expect("enough diagrams", sample.len() >= 20, true)?;
    for d in sample {
        for dx in 0..d.np() as i64 {
            for dy in 0..d.n() as i64 {
                all_pass(
                    &d.to_text(),
                    verify_shift_invariance(d, dx, dy).map_err(|e| e.to_string())?,
                )?;
            }
        }
    }
    Ok(())
}

fn sign_solver(all: &[GridDiagram]) -> Outcome {
    for (k, d) in all.iter().enumerate() {
        let sys = build_constraints(d).map_err(|e| e.to_string())?;
        let plus = solve(&sys, Fixing::Plus).map_err(|e| e.to_string())?;
        let minus = solve(&sys, Fixing::Minus).map_err(|e| e.to_string())?;
        for s in [&plus, &minus] {
            let v = verify_axioms(&sys, s);
            expect(&format!("axiom violations on {}", d.to_text()), v.len(), 0)?;
        }
        // homology comparison on every fourth diagram keeps the suite short
        if k % 4 != 0 {
            continue;
        }
        let a = build_complex(d, Ring::Z, Some(&plus)).map_err(|e| e.to_string())?;
        let b = build_complex(d, Ring::Z, Some(&minus)).map_err(|e| e.to_string())?;
        let ht = |c: &lensgrid::algebra::TrigradedComplex, w: &Window| {
            homology(c, w).map_err(|e| e.to_string())
        };
        expect(
            "tilde tables",
            ht(&a.tilde(), &Window::AllFinite)?,
            ht(&b.tilde(), &Window::AllFinite)?,
        )?;
        let amin = a.gradings.iter().map(|g| g.a.clone()).min().unwrap();
        let w = Window::Alexander {
            min: amin.clone(),
            max: Some(amin + rat(1, 1)),
        };
        expect("minus tables", ht(&a, &w)?, ht(&b, &w)?)?;
    }
    Ok(())
}

fn marker_homotopies(all: &[GridDiagram]) -> Outcome {
    let multi: Vec<_> = all
        .iter()
        .filter(|d| (0..d.n()).any(|a| connector_variables(d, a).is_ok_and(|(i, j)| i != j)))
        .take(30)
        .collect();
    expect("enough diagrams", multi.len() >= 10, true)?;
    for d in multi {
        let signs = lensgrid::signs::solve_sign_assignment(d).map_err(|e| e.to_string())?;
        all_pass(
            &d.to_text(),
            verify_marker_homotopy(d, Ring::F2, None).map_err(|e| e.to_string())?,
        )?;
        all_pass(
            &d.to_text(),
            verify_marker_homotopy(d, Ring::Z, Some(&signs)).map_err(|e| e.to_string())?,
        )?;
    }
    Ok(())
}

fn commutations(all: &[GridDiagram]) -> Outcome {
    let (mut commutes, mut switches) = (0, 0);
    let mut candidates: Vec<GridDiagram> = vec![l52_knot()];
    candidates.extend(all.iter().filter(|d| d.n() == 3).take(20).cloned());
    for d in &candidates {
        let signs = lensgrid::signs::solve_sign_assignment(d).map_err(|e| e.to_string())?;
        for j in 0..d.n() {
            let Ok(c) = build_combined(d, j) else {
                continue;
            };
            if c.switch {
                switches += 1;
            } else {
                commutes += 1;
            }
            let context = format!("{} column {j}", d.to_text());
            all_pass(
                &context,
                verify_commutation(&c, Ring::F2, None).map_err(|e| e.to_string())?,
            )?;
            all_pass(
                &context,
                verify_commutation(&c, Ring::Z, Some(&signs)).map_err(|e| e.to_string())?,
            )?;
        }
    }
    expect("commutation instances >= 10", commutes >= 10, true)?;
    expect("switch instances >= 5", switches >= 5, true)
}

fn stabilizations() -> Outcome {
    let cases: [(i64, i64, &[usize], &[usize]); 7] = [
        (1, 0, &[0], &[0]),
        (1, 0, &[0, 1], &[1, 0]),
        (2, 1, &[0], &[1]),
        (5, 2, &[0], &[3]),
        (3, 1, &[0, 3], &[1, 2]),
        (3, 2, &[2, 1], &[5, 0]),
        (5, 2, &[0, 5], &[3, 8]),
    ];
    let mut instances = 0;
    for (p, q, x, o) in cases {
        let d = GridDiagram::from_rows(p, q, x, o).map_err(|e| e.to_string())?;
        for kind in ["X:SW", "X:NE"] {
            let st =
                stabilize_with_data(&d, kind.parse().unwrap(), 0).map_err(|e| e.to_string())?;
            let split = stabilization_split(&st).map_err(|e| e.to_string())?;
            let signs = solve_restrictable_signs(&st).map_err(|e| e.to_string())?;
            let context = format!("{kind} on {}", d.to_text());
            all_pass(
                &context,
                verify_stabilization(&split, Ring::F2, None).map_err(|e| e.to_string())?,
            )?;
            all_pass(
                &context,
                verify_stabilization(&split, Ring::Z, Some(&signs)).map_err(|e| e.to_string())?,
            )?;
            instances += 1;
        }
    }
    expect("instances >= 5", instances >= 5, true)
}

fn smith_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a17);
    for case in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let m: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let mut want = Vec::new();
        let mut prev = 1i128;
        for dk in determinantal_divisors(&m) {
            want.push(BigInt::from(dk / prev));
            prev = dk;
        }
        let got: Vec<BigInt> = smith_normal_form(&m).into_iter().map(|f| f.abs()).collect();
        expect(&format!("matrix {case}"), got, want)?;
    }
    Ok(())
}

fn torsion_scan(all: &[GridDiagram]) -> Outcome {
    let first = scan_torsion(all).map_err(|e| e.to_string())?;
    let again = scan_torsion(all).map_err(|e| e.to_string())?;
    let log = scan_log(&first);
    expect("log is deterministic", &log, &scan_log(&again))?;
    expect(
        "one line per diagram plus summary",
        log.lines().count(),
        all.len() + 1,
    )?;
    let with_torsion = first.iter().filter(|r| !r.torsion.is_empty()).count();
    println!(
        "    torsion scan: {} diagrams, {with_torsion} with torsion",
        all.len()
    );
    Ok(())
}

type Criterion<'a> = (u32, &'static str, Box<dyn Fn() -> Outcome + 'a>);

// plain binary so the per-criterion lines always reach the output
fn main() {
    let all = corpus();
    let criteria: Vec<Criterion> = vec![
        (1, "l52-knot anchors", Box::new(l52_knot_anchors)),
        (2, "correction terms d(p,q,i)", Box::new(correction_terms)),
        (
            3,
            "d^2 = 0 over F2 and Z on the corpus",
            Box::new(|| d_squared(&all)),
        ),
        (
            4,
            "grading laws along empty parallelograms",
            Box::new(|| grading_laws(&all)),
        ),
        (
            5,
            "fundamental-domain invariance",
            Box::new(|| shift_invariance(&all)),
        ),
        (
            6,
            "sign solver and choice independence",
            Box::new(|| sign_solver(&all)),
        ),
        (
            7,
            "V_i ~ V_j homotopies",
            Box::new(|| marker_homotopies(&all)),
        ),
        (
            8,
            "commutation and switch maps",
            Box::new(|| commutations(&all)),
        ),
        (
            9,
            "stabilization splitting and maps",
            Box::new(stabilizations),
        ),
        (
            10,
            "Smith normal form against minor gcds",
            Box::new(smith_forms),
        ),
        (11, "torsion scan log", Box::new(|| torsion_scan(&all))),
    ];
    let mut failing = BTreeSet::new();
    for (id, name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match &outcome {
            Ok(()) => println!("[PASS] {id:>2} {name} ({secs:.1}s)"),
            Err(why) => {
                println!("[FAIL] {id:>2} {name} ({secs:.1}s): {why}");
                failing.insert(*id);
            }
        }
    }
    let known: BTreeSet<u32> = KNOWN_FAILURES.iter().copied().collect();
    assert_eq!(failing, known, "failing criteria differ from the known set");
}
