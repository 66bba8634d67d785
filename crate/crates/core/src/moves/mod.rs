//! Grid moves and the maps relating the complexes they connect.

pub mod commutation;
pub mod stabilization;
pub mod verify;

use std::collections::{HashSet, VecDeque};
use std::fmt;

pub use commutation::{
    build_combined, commute_columns, commute_rows, enumerate_hexagons, enumerate_pentagons,
    h_beta_gamma_beta, phi_beta_gamma, phi_gamma_beta, switch_columns, switch_rows, Axis,
    CombinedDiagram, Direction, Polygon, Side,
};
pub use stabilization::{
    destabilize, restrict_signs, solve_restrictable_signs, stabilization_split, stabilize,
    stabilize_with_data, Corner, StabKind, Stabilization, StabilizationSplit, ALL_KINDS,
};
pub use verify::{
    verify_commutation, verify_grading_laws, verify_marker_homotopy, verify_shift_invariance,
    verify_stabilization, Check,
};

use crate::error::{Error, Result};
use crate::grid_model::GridDiagram;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    CommuteColumns(usize),
    CommuteRows(usize),
    SwitchColumns(usize),
    SwitchRows(usize),
    Stabilize(StabKind, usize),
    Destabilize(usize),
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::CommuteColumns(j) => write!(f, "commute-cols {j}"),
            Move::CommuteRows(i) => write!(f, "commute-rows {i}"),
            Move::SwitchColumns(j) => write!(f, "switch-cols {j}"),
            Move::SwitchRows(i) => write!(f, "switch-rows {i}"),
            Move::Stabilize(k, m) => write!(f, "stab {k} {m}"),
            Move::Destabilize(r) => write!(f, "destab {r}"),
        }
    }
}

/// Parses a move script: one move per line, `#` starts a comment.
pub fn parse_script(text: &str) -> Result<Vec<Move>> {
    let mut moves = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: k + 1,
            column: 1,
            message,
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let index = |w: Option<&&str>| -> Result<usize> {
            let w = w.ok_or_else(|| err("missing index".into()))?;
            w.parse().map_err(|_| err(format!("bad index {w:?}")))
        };
        let mv = match words[0] {
            "commute-cols" => Move::CommuteColumns(index(words.get(1))?),
            "commute-rows" => Move::CommuteRows(index(words.get(1))?),
            "switch-cols" => Move::SwitchColumns(index(words.get(1))?),
            "switch-rows" => Move::SwitchRows(index(words.get(1))?),
            "destab" => Move::Destabilize(index(words.get(1))?),
            "stab" => {
                let kind = words
                    .get(1)
                    .ok_or_else(|| err("missing stabilization kind".into()))?;
                let kind: StabKind = kind.parse().map_err(err)?;
                Move::Stabilize(kind, index(words.get(2))?)
            }
            other => return Err(err(format!("unknown move {other:?}"))),
        };
        let expected = if matches!(mv, Move::Stabilize(..)) {
            3
        } else {
            2
        };
        if words.len() != expected {
            return Err(err(format!(
                "expected {expected} fields, found {}",
                words.len()
            )));
        }
        moves.push(mv);
    }
    Ok(moves)
}

pub fn apply_move(d: &GridDiagram, mv: &Move) -> Result<GridDiagram> {
    match *mv {
        Move::CommuteColumns(j) => commute_columns(d, j),
        Move::CommuteRows(i) => commute_rows(d, i),
        Move::SwitchColumns(j) => switch_columns(d, j),
        Move::SwitchRows(i) => switch_rows(d, i),
        Move::Stabilize(k, m) => stabilize(d, k, m),
        Move::Destabilize(r) => destabilize(d, r, None),
    }
}

/// Every intermediate diagram, starting with `d`.
pub fn apply_script(d: &GridDiagram, moves: &[Move]) -> Result<Vec<GridDiagram>> {
    let mut out = vec![d.clone()];
    for mv in moves {
        let next = apply_move(out.last().unwrap(), mv)?;
        out.push(next);
    }
    Ok(out)
}

/// Representative of the diagram up to moving the fundamental domain.
pub fn canonical_form(d: &GridDiagram) -> GridDiagram {
    let key = |g: &GridDiagram| -> Vec<usize> {
        (0..g.n()).flat_map(|r| [g.x_c1(r), g.o_c1(r)]).collect()
    };
    let mut best = d.clone();
    let mut best_key = key(d);
    for dx in 0..d.np() as i64 {
        for dy in 0..d.n() as i64 {
            let s = d.shifted(dx, dy);
            let k = key(&s);
            if k < best_key {
                best_key = k;
                best = s;
            }
        }
    }
    best
}

/// A shortest sequence of commutations and switches taking `from` to a
/// translate of `to`, searching at most `max_depth` moves.
pub fn commutation_path(
    from: &GridDiagram,
    to: &GridDiagram,
    max_depth: usize,
) -> Option<Vec<Move>> {
    let target = canonical_form(to);
    let mut seen = HashSet::from([canonical_form(from)]);
    let mut queue = VecDeque::from([(from.clone(), Vec::new())]);
    while let Some((d, path)) = queue.pop_front() {
        if canonical_form(&d) == target {
            return Some(path);
        }
        if path.len() == max_depth {
            continue;
        }
        for k in 0..d.n() {
            let candidates = [
                Move::CommuteColumns(k),
                Move::SwitchColumns(k),
                Move::CommuteRows(k),
                Move::SwitchRows(k),
            ];
            for mv in candidates {
                let Ok(next) = apply_move(&d, &mv) else {
                    continue;
                };
                if seen.insert(canonical_form(&next)) {
                    let mut p = path.clone();
                    p.push(mv);
                    queue.push_back((next, p));
                }
            }
        }
    }
    None
}
