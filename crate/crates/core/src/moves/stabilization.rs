//! The eight stabilizations, destabilization, and the maps comparing a
//! complex with its stabilization.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::algebra::complex::monomial_of;
use crate::algebra::{parallelogram_map, PolyMap, Ring, Term};
use crate::error::{Error, Result};
use crate::generators::{shared_lattice, Generator, GeneratorSpace};
use crate::gradings::{floor_parity, Grader};
use crate::grid_model::{GridDiagram, MarkKind};
use crate::signs::{
    assignment_from, build_constraints, solve, Constraint, Fixing, Relation, SignAssignment,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Corner {
    NW,
    NE,
    SW,
    SE,
}

impl Corner {
    /// Offset of the corner cell inside the 2x2 block.
    pub fn offset(self) -> (usize, usize) {
        match self {
            Corner::NW => (0, 1),
            Corner::NE => (1, 1),
            Corner::SW => (0, 0),
            Corner::SE => (1, 0),
        }
    }

    fn from_offset(offset: (usize, usize)) -> Corner {
        match offset {
            (0, 1) => Corner::NW,
            (1, 1) => Corner::NE,
            (0, 0) => Corner::SW,
            _ => Corner::SE,
        }
    }

    pub fn opposite(self) -> Corner {
        match self {
            Corner::NW => Corner::SE,
            Corner::NE => Corner::SW,
            Corner::SW => Corner::NE,
            Corner::SE => Corner::NW,
        }
    }
}

/// `T:D`: the block holds two `T` markings on a diagonal, the other kind of
/// marking opposite the empty corner `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StabKind {
    pub mark: MarkKind,
    pub empty: Corner,
}

pub const ALL_KINDS: [StabKind; 8] = {
    use Corner::*;
    use MarkKind::*;
    [
        StabKind { mark: X, empty: NW },
        StabKind { mark: X, empty: NE },
        StabKind { mark: X, empty: SW },
        StabKind { mark: X, empty: SE },
        StabKind { mark: O, empty: NW },
        StabKind { mark: O, empty: NE },
        StabKind { mark: O, empty: SW },
        StabKind { mark: O, empty: SE },
    ]
};

impl fmt::Display for StabKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:?}", self.mark, self.empty)
    }
}

impl FromStr for StabKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (m, c) = s
            .split_once(':')
            .ok_or_else(|| format!("expected <X|O>:<corner>, got {s:?}"))?;
        let mark = match m {
            "X" => MarkKind::X,
            "O" => MarkKind::O,
            _ => return Err(format!("unknown marking {m:?}")),
        };
        let empty = match c {
            "NW" => Corner::NW,
            "NE" => Corner::NE,
            "SW" => Corner::SW,
            "SE" => Corner::SE,
            _ => return Err(format!("unknown corner {c:?}")),
        };
        Ok(StabKind { mark, empty })
    }
}

fn other(k: MarkKind) -> MarkKind {
    match k {
        MarkKind::X => MarkKind::O,
        MarkKind::O => MarkKind::X,
    }
}

fn c1_of(d: &GridDiagram, kind: MarkKind, row: usize) -> usize {
    match kind {
        MarkKind::X => d.x_c1(row),
        MarkKind::O => d.o_c1(row),
    }
}

/// A stabilization together with the bookkeeping relating old and new rows.
#[derive(Clone, Debug)]
pub struct Stabilization {
    pub before: GridDiagram,
    pub after: GridDiagram,
    pub kind: StabKind,
    /// Row of the stabilized marking in `before`; the block occupies rows `row`, `row + 1` of `after`.
    pub row: usize,
    /// Column of the stabilized marking in `before`; the block occupies columns `column`, `column + 1`.
    pub column: usize,
    pub sheet: usize,
    /// Row in `before` of the X marking now in each row of `after`, `None` for the new one.
    pub x_origin: Vec<Option<usize>>,
    pub o_origin: Vec<Option<usize>>,
}

impl Stabilization {
    /// The lattice point at the centre of the new block, as a generator component
    /// `(row, column, sheet)` of `after`.
    pub fn center(&self) -> (usize, usize, usize) {
        (self.row + 1, self.column + 1, self.sheet)
    }

    /// `x \ c` for a generator of `after` containing the centre.
    pub fn remove_center(&self, x: &Generator) -> Generator {
        let (cr, cc, _) = self.center();
        let mut perm = Vec::with_capacity(x.n() - 1);
        let mut pcoords = Vec::with_capacity(x.n() - 1);
        for r in 0..x.n() {
            if r == cr {
                continue;
            }
            let s = x.perm[r];
            perm.push(if s > cc { s - 1 } else { s });
            pcoords.push(x.pcoords[r]);
        }
        Generator::new(perm, pcoords)
    }

    /// `x ∪ c` for a generator of `before`.
    pub fn add_center(&self, x: &Generator) -> Generator {
        let (cr, cc, cs) = self.center();
        let mut perm = Vec::with_capacity(x.n() + 1);
        let mut pcoords = Vec::with_capacity(x.n() + 1);
        for r in 0..x.n() {
            if r == cr {
                perm.push(cc);
                pcoords.push(cs);
            }
            let s = x.perm[r];
            perm.push(if s >= cc { s + 1 } else { s });
            pcoords.push(x.pcoords[r]);
        }
        if cr == x.n() {
            perm.push(cc);
            pcoords.push(cs);
        }
        Generator::new(perm, pcoords)
    }

    pub fn row_in_after(&self, before_row: usize) -> usize {
        if before_row > self.row {
            before_row + 1
        } else {
            before_row
        }
    }

    fn corner_row(&self, c: Corner) -> usize {
        self.row + c.offset().1
    }

    /// After-row of the new marking of the stabilized kind: the one sharing
    /// a column with the new marking of the other kind.
    pub fn new_marking_row(&self) -> usize {
        let opp = self.kind.empty.opposite();
        let (ox, _) = opp.offset();
        let pick = [Corner::NW, Corner::NE, Corner::SW, Corner::SE]
            .into_iter()
            .find(|&c| c != opp && c != self.kind.empty && c.offset().0 == ox)
            .unwrap();
        self.corner_row(pick)
    }

    /// After-row of the old marking of the stabilized kind.
    pub fn old_marking_row(&self) -> usize {
        let opp = self.kind.empty.opposite();
        let (_, oy) = opp.offset();
        let pick = [Corner::NW, Corner::NE, Corner::SW, Corner::SE]
            .into_iter()
            .find(|&c| c != opp && c != self.kind.empty && c.offset().1 == oy)
            .unwrap();
        self.corner_row(pick)
    }

    /// After-row of the new marking of the other kind.
    pub fn new_other_row(&self) -> usize {
        self.corner_row(self.kind.empty.opposite())
    }
}

/// Stabilizes at the marking of kind `kind.mark` in `row`.
pub fn stabilize(d: &GridDiagram, kind: StabKind, row: usize) -> Result<GridDiagram> {
    Ok(stabilize_with_data(d, kind, row)?.after)
}

pub fn stabilize_with_data(d: &GridDiagram, kind: StabKind, row: usize) -> Result<Stabilization> {
    let n = d.n();
    if row >= n {
        return Err(Error::Precondition(format!(
            "no marking in row {row} (n = {n})"
        )));
    }
    let n2 = n + 1;
    let t = kind.mark;
    let tc = c1_of(d, t, row);
    let (k0, s0) = (tc % n, tc / n);
    let opp = kind.empty.opposite();
    let (ox, oy) = opp.offset();
    let col = |c1: usize, split: usize| -> usize {
        let (s, k) = (c1 / n, c1 % n);
        s * n2
            + match k.cmp(&k0) {
                std::cmp::Ordering::Less => k,
                std::cmp::Ordering::Greater => k + 1,
                std::cmp::Ordering::Equal => k0 + split,
            }
    };
    let row_map = |r: usize, split: usize| -> usize {
        match r.cmp(&row) {
            std::cmp::Ordering::Less => r,
            std::cmp::Ordering::Greater => r + 1,
            std::cmp::Ordering::Equal => row + split,
        }
    };
    // (kind, after c1, after row, before row)
    let mut placed: Vec<(MarkKind, usize, usize, Option<usize>)> = Vec::with_capacity(2 * n2);
    for r in 0..n {
        for k in [MarkKind::X, MarkKind::O] {
            if k == t && r == row {
                continue;
            }
            let c1 = c1_of(d, k, r);
            // partners of the stabilized marking move to the split row/column
            // not already served by the block
            placed.push((k, col(c1, 1 - ox), row_map(r, 1 - oy), Some(r)));
        }
    }
    for c in [Corner::NW, Corner::NE, Corner::SW, Corner::SE] {
        if c == kind.empty {
            continue;
        }
        let (dx, dy) = c.offset();
        let c1 = s0 * n2 + k0 + dx;
        let r = row + dy;
        if c == opp {
            placed.push((other(t), c1, r, None));
        } else {
            placed.push((t, c1, r, None));
        }
    }
    let mut x = vec![usize::MAX; n2];
    let mut o = vec![usize::MAX; n2];
    let mut x_origin = vec![None; n2];
    let mut o_origin = vec![None; n2];
    for (k, c1, r, origin) in placed {
        let (cells, origins) = match k {
            MarkKind::X => (&mut x, &mut x_origin),
            MarkKind::O => (&mut o, &mut o_origin),
        };
        if cells[r] != usize::MAX {
            return Err(Error::Precondition(format!(
                "stabilization placed two {k} markings in row {r}"
            )));
        }
        cells[r] = c1;
        origins[r] = origin;
    }
    let after = GridDiagram::from_rows(d.p() as i64, d.q(), &x, &o)?;
    let mut st = Stabilization {
        before: d.clone(),
        after,
        kind,
        row,
        column: k0,
        sheet: s0,
        x_origin,
        o_origin,
    };
    // the old marking sits in the row of the new marking of the other kind
    let (new_row, old_row) = (st.new_marking_row(), st.old_marking_row());
    let origins = match t {
        MarkKind::X => &mut st.x_origin,
        MarkKind::O => &mut st.o_origin,
    };
    origins[new_row] = None;
    origins[old_row] = Some(row);
    Ok(st)
}

/// Undoes a stabilization whose block has bottom row `row`. With `kind`
/// given, only that pattern is accepted.
pub fn destabilize(d: &GridDiagram, row: usize, kind: Option<StabKind>) -> Result<GridDiagram> {
    let n2 = d.n();
    if n2 < 2 || row + 1 >= n2 {
        return Err(Error::Precondition(format!(
            "rows {row} and {} do not both lie inside the fundamental domain",
            row + 1
        )));
    }
    let n = n2 - 1;
    let cell_kind = |c1: usize, r: usize| -> Option<MarkKind> {
        if d.x_c1(r) == c1 {
            Some(MarkKind::X)
        } else if d.o_c1(r) == c1 {
            Some(MarkKind::O)
        } else {
            None
        }
    };
    for sheet in 0..d.p() {
        for k in 0..n2 - 1 {
            for cand in ALL_KINDS {
                if kind.is_some_and(|want| want != cand) {
                    continue;
                }
                let opp = cand.empty.opposite();
                let matches = [Corner::NW, Corner::NE, Corner::SW, Corner::SE]
                    .into_iter()
                    .all(|c| {
                        let (dx, dy) = c.offset();
                        let got = cell_kind(sheet * n2 + k + dx, row + dy);
                        // the empty corner may still hold a partner when n = 1
                        let want = if c == cand.empty {
                            return true;
                        } else if c == opp {
                            Some(other(cand.mark))
                        } else {
                            Some(cand.mark)
                        };
                        got == want
                    });
                if !matches {
                    continue;
                }
                let col = |c1: usize| -> usize {
                    let (s, kk) = (c1 / n2, c1 % n2);
                    s * n + if kk <= k { kk } else { kk - 1 }
                };
                let row_map = |r: usize| if r <= row { r } else { r - 1 };
                let mut x = vec![usize::MAX; n];
                let mut o = vec![usize::MAX; n];
                let in_block = |c1: usize, r: usize| {
                    let inside = (r == row || r == row + 1)
                        && c1 / n2 == sheet
                        && (c1 % n2 == k || c1 % n2 == k + 1);
                    inside && Corner::from_offset((c1 % n2 - k, r - row)) != cand.empty
                };
                let mut clash = false;
                for r in 0..n2 {
                    for mk in [MarkKind::X, MarkKind::O] {
                        let c1 = c1_of(d, mk, r);
                        if in_block(c1, r) {
                            continue;
                        }
                        let cells = if mk == MarkKind::X { &mut x } else { &mut o };
                        let nr = row_map(r);
                        clash |= cells[nr] != usize::MAX;
                        cells[nr] = col(c1);
                    }
                }
                let merged = if cand.mark == MarkKind::X {
                    &mut x
                } else {
                    &mut o
                };
                clash |= merged[row] != usize::MAX;
                merged[row] = sheet * n + k;
                if clash || x.contains(&usize::MAX) || o.contains(&usize::MAX) {
                    continue;
                }
                let Ok(small) = GridDiagram::from_rows(d.p() as i64, d.q(), &x, &o) else {
                    continue;
                };
                if stabilize(&small, cand, row).is_ok_and(|back| &back == d) {
                    return Ok(small);
                }
            }
        }
    }
    Err(Error::Precondition(match kind {
        Some(k) => format!("no {k} block with bottom row {row}"),
        None => format!("no destabilizable block with bottom row {row}"),
    }))
}

/// The basis of the stabilized complex split by whether a generator contains
/// the block centre `c`.
#[derive(Clone, Debug)]
pub struct StabilizationSplit {
    pub stab: Stabilization,
    /// Indices (in the after-diagram's generator space) of generators containing `c`.
    pub i_set: Vec<usize>,
    pub n_set: Vec<usize>,
    /// For each member of `i_set`, the before-index of `x \ c`.
    pub e_target: Vec<usize>,
    /// After-rows of `X_n`, `X_{n-1}` and `O_n`.
    pub x_new: usize,
    pub x_old: usize,
    pub o_new: usize,
    /// Before-row of the O marking sharing a row with `X_n`.
    pub v_prev: usize,
}

pub fn stabilization_split(st: &Stabilization) -> Result<StabilizationSplit> {
    use Corner::*;
    if st.kind.mark != MarkKind::X || !matches!(st.kind.empty, SW | NE) {
        return Err(Error::Precondition(format!(
            "the comparison maps are defined for X:SW and X:NE stabilizations, not {}",
            st.kind
        )));
    }
    let space = GeneratorSpace::for_diagram(&st.after)?;
    let small = GeneratorSpace::for_diagram(&st.before)?;
    let (cr, cc, cs) = st.center();
    let mut i_set = Vec::new();
    let mut n_set = Vec::new();
    let mut e_target = Vec::new();
    for (k, g) in space.iter().enumerate() {
        if g.perm[cr] == cc && g.pcoords[cr] == cs {
            i_set.push(k);
            e_target.push(small.index(&st.remove_center(&g)));
        } else {
            n_set.push(k);
        }
    }
    let x_new = st.new_marking_row();
    Ok(StabilizationSplit {
        x_new,
        x_old: st.old_marking_row(),
        o_new: st.new_other_row(),
        v_prev: st.o_origin[x_new].expect("the O beside X_n is an old marking"),
        stab: st.clone(),
        i_set,
        n_set,
        e_target,
    })
}

impl StabilizationSplit {
    /// Renames after-variables to before-variables, with `V_n` last.
    pub fn var_rename(&self) -> Vec<usize> {
        let n = self.stab.before.n();
        self.stab.o_origin.iter().map(|o| o.unwrap_or(n)).collect()
    }

    fn full_map(
        &self,
        ring: Ring,
        signs: Option<&SignAssignment>,
        weight: &crate::algebra::complex::Weight,
    ) -> Result<PolyMap> {
        parallelogram_map(&self.stab.after, ring, signs, true, weight)
    }

    /// Counts parallelograms whose only X is `X_n`; from N to I.
    pub fn phi_xn(&self, ring: Ring, signs: Option<&SignAssignment>) -> Result<PolyMap> {
        let a = self.x_new;
        let m = self.full_map(ring, signs, &|r| {
            (r.x_total() == 1 && r.n_x[a] == 1).then(|| monomial_of(&r.n_o))
        })?;
        Ok(m.block(&self.n_set, &self.i_set))
    }

    /// Counts X-free parallelograms containing `O_n`, without its variable; from I to N.
    pub fn phi_on(&self, ring: Ring, signs: Option<&SignAssignment>) -> Result<PolyMap> {
        let o = self.o_new;
        let m = self.full_map(ring, signs, &|r| {
            (r.x_total() == 0 && r.n_o[o] > 0).then(|| {
                let mut e = r.n_o.clone();
                e[o] = 0;
                monomial_of(&e)
            })
        })?;
        Ok(m.block(&self.i_set, &self.n_set))
    }

    /// Counts parallelograms containing `O_n` whose only X is `X_n`; from N to N.
    pub fn phi_on_xn(&self, ring: Ring, signs: Option<&SignAssignment>) -> Result<PolyMap> {
        let (o, a) = (self.o_new, self.x_new);
        let m = self.full_map(ring, signs, &|r| {
            (r.x_total() == 1 && r.n_x[a] == 1 && r.n_o[o] > 0).then(|| {
                let mut e = r.n_o.clone();
                e[o] = 0;
                monomial_of(&e)
            })
        })?;
        Ok(m.block(&self.n_set, &self.n_set))
    }

    /// `x ↦ x \ c` from I to the before-space; with `signed`, weighted by
    /// `(-1)^M(x)` (integer part of the Maslov grading).
    pub fn e_map(&self, ring: Ring, signed: bool) -> Result<PolyMap> {
        let space = GeneratorSpace::for_diagram(&self.stab.after)?;
        let small = GeneratorSpace::for_diagram(&self.stab.before)?;
        let grader = Grader::new(&self.stab.after);
        let cols: Vec<Vec<Term>> = self
            .i_set
            .par_iter()
            .zip(&self.e_target)
            .map(|(&xi, &yi)| {
                let coeff = if signed && floor_parity(&grader.maslov(&space.generator(xi))) == 1 {
                    -1
                } else {
                    1
                };
                vec![Term {
                    tgt: yi as u32,
                    mono: crate::algebra::Monomial::one(),
                    coeff,
                }]
            })
            .collect();
        let mut m = PolyMap {
            ring,
            tgt_dim: small.len(),
            cols,
        };
        m.normalize();
        Ok(m)
    }
}

/// For every parallelogram of the destabilized grid, the key of the
/// parallelogram of the stabilized grid with the same support from `x ∪ c`
/// to `y ∪ c`, indexed by the small key.
fn counterpart_keys(st: &Stabilization) -> Result<Vec<Option<u32>>> {
    let d = &st.before;
    let small = GeneratorSpace::for_diagram(d)?;
    let big = GeneratorSpace::for_diagram(&st.after)?;
    let lat = shared_lattice(d.n(), d.p(), d.q());
    let big_lat = shared_lattice(st.after.n(), st.after.p(), st.after.q());
    let (n, p) = (d.n(), d.p());
    let (bn, bp) = (st.after.n(), st.after.p());
    let found: Vec<std::result::Result<(u32, u32), String>> = (0..small.len())
        .into_par_iter()
        .flat_map_iter(|xi| {
            let x = small.generator(xi);
            let xc = st.add_center(&x);
            let xc_index = big.index(&xc);
            let big_raw = big_lat.parallelograms_from(&xc, false);
            lat.parallelograms_from(&x, false)
                .into_iter()
                .map(move |raw| {
                    let (i, j) = (st.row_in_after(raw.rows.0), st.row_in_after(raw.rows.1));
                    let target = st.add_center(&raw.terminal);
                    big_raw
                        .iter()
                        .find(|b| b.rows == (i, j) && b.lift == raw.lift && b.terminal == target)
                        .map(|b| {
                            (
                                key_of(n, p, xi, raw.rows.0, raw.rows.1, raw.lift),
                                key_of(bn, bp, xc_index, i, j, b.lift),
                            )
                        })
                        .ok_or_else(|| format!("{:?} rows {:?} lift {}", x, raw.rows, raw.lift))
                })
        })
        .collect();
    let mut map = vec![None; build_constraints(d)?.key_space];
    let mut missing = Vec::new();
    for f in found {
        match f {
            Ok((k, big_key)) => map[k as usize] = Some(big_key),
            Err(m) => missing.push(m),
        }
    }
    if let Some(first) = missing.first() {
        return Err(Error::Precondition(format!(
            "{} parallelograms have no counterpart through the block centre, e.g. {first}",
            missing.len()
        )));
    }
    Ok(map)
}

/// Pulls a sign assignment of the stabilized grid back to the destabilized one.
pub fn restrict_signs(st: &Stabilization, after_signs: &SignAssignment) -> Result<SignAssignment> {
    if !after_signs.matches(&st.after) {
        return Err(Error::Precondition(
            "sign assignment belongs to a different grid".into(),
        ));
    }
    let sys = build_constraints(&st.before)?;
    let map = counterpart_keys(st)?;
    Ok(assignment_from(&sys, |k| {
        map[k as usize].map_or(0, |big| after_signs.epsilon_of_key(big).unwrap_or(0))
    }))
}

/// Solves for a sign assignment of the stabilized grid whose restriction
/// satisfies the axioms on the destabilized grid.
///
/// Row and column annuli through the split row or column become thick annuli
/// after stabilization, which S2 and S3 leave free; their equations are
/// pulled back and added to the stabilized system.
pub fn solve_restrictable_signs(st: &Stabilization) -> Result<SignAssignment> {
    let small = build_constraints(&st.before)?;
    let mut sys = build_constraints(&st.after)?;
    let map = counterpart_keys(st)?;
    for c in small
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::S1)
    {
        let vars = c
            .vars
            .iter()
            .map(|&k| map[k as usize])
            .collect::<Option<Vec<_>>>();
        if let Some(vars) = vars {
            sys.constraints.push(Constraint {
                relation: c.relation,
                vars,
                parity: c.parity,
            });
        }
    }
    solve(&sys, Fixing::Plus)
}

fn key_of(n: usize, p: usize, initial: usize, i: usize, j: usize, lift: usize) -> u32 {
    (((initial * n + i) * n + j) * p + lift) as u32
}
