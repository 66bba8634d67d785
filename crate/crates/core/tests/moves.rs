//! Diagram-level behaviour of the grid moves.

mod common;

use lensgrid::corpus::{exhaustive_upto, random_diagrams};
use lensgrid::moves::*;
use lensgrid::GridDiagram;

use common::l52_knot;

#[test]
fn script_parsing_reports_line_numbers() {
    let ok = parse_script(
        "# warm up\ncommute-cols 1\nstab X:NE 2  # trailing\nswitch-rows 0\ndestab 3\n",
    )
    .unwrap();
    assert_eq!(
        ok,
        vec![
            Move::CommuteColumns(1),
            Move::Stabilize("X:NE".parse().unwrap(), 2),
            Move::SwitchRows(0),
            Move::Destabilize(3),
        ]
    );
    let text: String = ok.iter().map(|m| format!("{m}\n")).collect();
    assert_eq!(parse_script(&text).unwrap(), ok);
    for (bad, line) in [
        ("commute-cols\n", 1),
        ("\n\nstab Y:SW 0\n", 3),
        ("twist 1\n", 1),
        ("destab 1 2\n", 1),
    ] {
        let err = parse_script(bad).unwrap_err().to_string();
        assert!(err.starts_with(&format!("line {line},")), "{bad:?}: {err}");
    }
}

#[test]
fn commutations_undo_in_one_move() {
    for d in exhaustive_upto(2, 4)
        .iter()
        .chain(&random_diagrams(3, 5, 30, 4))
    {
        for j in 0..d.n() {
            for mv in [
                Move::CommuteColumns(j),
                Move::SwitchColumns(j),
                Move::CommuteRows(j),
                Move::SwitchRows(j),
            ] {
                let Ok(once) = apply_move(d, &mv) else {
                    continue;
                };
                let back = commutation_path(&once, d, 1)
                    .unwrap_or_else(|| panic!("{mv} on {}", d.to_text()));
                assert!(back.len() <= 1);
            }
        }
    }
}

#[test]
fn commute_and_switch_partition_column_pairs() {
    // every adjacent column pair is exactly one of: commutable, switchable, interleaved
    for d in exhaustive_upto(2, 5) {
        for j in 0..d.n() {
            let c = commute_columns(&d, j).is_ok();
            let s = switch_columns(&d, j).is_ok();
            assert!(!(c && s), "{}", d.to_text());
            assert_eq!(build_combined(&d, j).is_ok(), c || s);
        }
    }
}

#[test]
fn stabilization_round_trips() {
    let mut diagrams = exhaustive_upto(1, 5);
    diagrams.extend(exhaustive_upto(2, 3));
    diagrams.push(l52_knot());
    for d in &diagrams {
        for kind in ALL_KINDS {
            for row in 0..d.n() {
                let st = stabilize_with_data(d, kind, row).unwrap();
                assert_eq!(st.after.n(), d.n() + 1);
                assert_eq!(st.after.link_components().len(), d.link_components().len());
                let back = destabilize(&st.after, st.row, Some(kind)).unwrap();
                assert_eq!(
                    canonical_form(&back),
                    canonical_form(d),
                    "{kind} at {row} on {}",
                    d.to_text()
                );
            }
        }
    }
}

#[test]
fn stabilization_types_are_related_by_commutations() {
    let mut diagrams = exhaustive_upto(1, 4);
    diagrams.extend(exhaustive_upto(2, 3).into_iter().step_by(3));
    for d in &diagrams {
        let sw = stabilize(d, "X:SW".parse().unwrap(), 0).unwrap();
        for kind in ALL_KINDS {
            let other = stabilize(d, kind, 0).unwrap();
            let path = commutation_path(&sw, &other, 4);
            assert!(path.is_some(), "{kind} on {}", d.to_text());
        }
        let se = stabilize(d, "X:SE".parse().unwrap(), 0).unwrap();
        assert!(commutation_path(&sw, &se, 3).unwrap().len() <= 1);
    }
}

#[test]
fn scripts_return_every_intermediate() {
    let d = l52_knot();
    let script = parse_script("switch-cols 0\ncommute-cols 1\nstab O:SE 1\ndestab 1\n").unwrap();
    let states = apply_script(&d, &script).unwrap();
    assert_eq!(states.len(), 5);
    assert_eq!(states[3].n(), 4);
    assert_eq!(canonical_form(&states[4]), canonical_form(&states[2]));
}

#[test]
fn destabilization_needs_a_block() {
    let d = GridDiagram::from_rows(1, 0, &[0, 2, 1], &[2, 1, 0]).unwrap();
    assert!(destabilize(&d, 2, None).is_err());
    assert!(destabilize(&l52_knot(), 0, Some("X:SW".parse().unwrap())).is_err());
}
