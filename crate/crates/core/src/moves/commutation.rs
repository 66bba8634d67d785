//! Commutations and switches, and the pentagon and hexagon counts of the
//! combined diagram in which the shared β curve and its replacement γ meet
//! at two points.
//!
//! Positions along a circle are measured in eighths of a cell. A marking sits
//! at the middle of its segment (`8k + 4`); when a switch puts two markings on
//! the same segment they are pulled apart to `8k + 3` and `8k + 5`, with the
//! crossing at `8k + 4` between them.

use rayon::prelude::*;

use crate::algebra::complex::monomial_of;
use crate::algebra::{PolyMap, Ring, Term};
use crate::error::{Error, Result};
use crate::generators::{shared_lattice, Generator, GeneratorSpace, Lattice, Rect};
use crate::gradings::{floor_parity, Grader};
use crate::grid_model::{GridDiagram, MarkKind};
use crate::signs::SignAssignment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Columns,
    Rows,
}

/// A marking next to the shared circle. `minus` markings lie left of (or
/// below) the circle, the others right of (or above) it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleMark {
    pub kind: MarkKind,
    pub row: usize,
    pub c1: usize,
    pub minus: bool,
    pub pos: usize,
}

#[derive(Clone, Debug)]
struct CircleLayout {
    axis: Axis,
    n: usize,
    p: usize,
    q: i64,
    /// `beta_turn[x]`: number of vertical wraps before the β circle reaches column `x`.
    beta_turn: Vec<usize>,
    marks: Vec<CircleMark>,
    cross_fwd: usize,
    cross_back: usize,
    tied: bool,
}

impl CircleLayout {
    fn new(d: &GridDiagram, axis: Axis, index: usize) -> Result<CircleLayout> {
        let (n, p, q, np) = (d.n(), d.p(), d.q(), d.np());
        if n < 2 {
            return Err(Error::Precondition(
                "moves between neighbours need n >= 2".into(),
            ));
        }
        if index >= n {
            return Err(Error::Precondition(format!(
                "index {index} is out of range for n = {n}"
            )));
        }
        let next = (index + 1) % n;
        let mut beta_turn = vec![0; np];
        if axis == Axis::Columns {
            for m in 0..p {
                let x = (next as i64 - (m * n) as i64 * q).rem_euclid(np as i64) as usize;
                beta_turn[x] = m;
            }
        }
        let mut layout = CircleLayout {
            axis,
            n,
            p,
            q,
            beta_turn,
            marks: Vec::with_capacity(4),
            cross_fwd: 0,
            cross_back: 0,
            tied: false,
        };
        for row in 0..n {
            for (kind, c1) in [(MarkKind::X, d.x_c1(row)), (MarkKind::O, d.o_c1(row))] {
                let (x, y) = (c1 as i64, row as i64);
                let side = match axis {
                    Axis::Columns if c1 % n == index => Some((true, (x + 1, y))),
                    Axis::Columns if c1 % n == next => Some((false, (x, y))),
                    Axis::Rows if row == index => Some((true, (x, y + 1))),
                    Axis::Rows if row == next => Some((false, (x, y))),
                    _ => None,
                };
                if let Some((minus, (sx, sy))) = side {
                    let pos = 8 * layout.segment(sx, sy) + 4;
                    layout.marks.push(CircleMark {
                        kind,
                        row,
                        c1,
                        minus,
                        pos,
                    });
                }
            }
        }
        debug_assert_eq!(layout.marks.len(), 4);
        Ok(layout)
    }

    fn len8(&self) -> usize {
        8 * self.n * self.p
    }

    /// Index along the circle of the unit segment starting at the plane point `(x, y)`.
    fn segment(&self, x: i64, y: i64) -> usize {
        let (x0, y0) = crate::grid_model::reduce_point(self.n, self.p, self.q, x, y);
        match self.axis {
            Axis::Columns => self.beta_turn[x0] * self.n + y0,
            Axis::Rows => x0,
        }
    }

    /// Separates tied markings and places the two crossings right after each
    /// group of markings. Fails when the groups interleave.
    fn place_crossings(&mut self, ties: Ties) -> Result<()> {
        let mut tie_pairs = Vec::new();
        for a in 0..4 {
            for b in 0..4 {
                let (ma, mb) = (self.marks[a], self.marks[b]);
                if ma.minus && !mb.minus && ma.pos == mb.pos {
                    tie_pairs.push((a, b));
                }
            }
        }
        match (ties, tie_pairs.is_empty()) {
            (Ties::Forbidden, false) => {
                return Err(Error::Precondition(
                    "an X and an O of the two lines share a row of cells; this pair needs a switch"
                        .into(),
                ))
            }
            (Ties::Required, true) => {
                return Err(Error::Precondition(
                    "the pair is not special: no X of one line is adjacent to the O of the other"
                        .into(),
                ))
            }
            _ => {}
        }
        self.tied = !tie_pairs.is_empty();
        let base: Vec<usize> = self.marks.iter().map(|m| m.pos).collect();
        for choice in 0..(1usize << tie_pairs.len()) {
            for (k, m) in self.marks.iter_mut().enumerate() {
                m.pos = base[k];
            }
            for (t, &(a, b)) in tie_pairs.iter().enumerate() {
                let minus_above = choice >> t & 1 == 1;
                let (da, db) = if minus_above { (1, -1) } else { (-1, 1) };
                self.marks[a].pos = (base[a] as i64 + da) as usize;
                self.marks[b].pos = (base[b] as i64 + db) as usize;
            }
            let mut order: Vec<CircleMark> = self.marks.clone();
            order.sort_by_key(|m| m.pos);
            let changes = (0..4)
                .filter(|&k| order[k].minus != order[(k + 1) % 4].minus)
                .count();
            if changes != 2 {
                continue;
            }
            let len = self.len8();
            for k in 0..4 {
                let (cur, nxt) = (order[k], order[(k + 1) % 4]);
                if cur.minus && !nxt.minus {
                    self.cross_fwd = (cur.pos + 1) % len;
                } else if !cur.minus && nxt.minus {
                    self.cross_back = (cur.pos + 1) % len;
                }
            }
            return Ok(());
        }
        Err(Error::Precondition(
            "the markings of the two lines interleave".into(),
        ))
    }

    /// Whether the eighth-position lies on the arc where the new curve runs on
    /// the minus side of the old one.
    fn on_minus_arc(&self, pos: usize) -> bool {
        let len = self.len8();
        (pos + len - self.cross_back) % len < (self.cross_fwd + len - self.cross_back) % len
    }

    /// The diagram with the markings on the two sides of the circle exchanged.
    fn exchanged(&self, d: &GridDiagram) -> Result<GridDiagram> {
        let (n, np) = (self.n, self.n * self.p);
        let mut x: Vec<usize> = (0..n).map(|r| d.x_c1(r)).collect();
        let mut o: Vec<usize> = (0..n).map(|r| d.o_c1(r)).collect();
        let mut new_x = vec![None; n];
        let mut new_o = vec![None; n];
        for m in &self.marks {
            let (c1, row) = match (self.axis, m.minus) {
                (Axis::Columns, true) => ((m.c1 + 1) % np, m.row),
                (Axis::Columns, false) => ((m.c1 + np - 1) % np, m.row),
                (Axis::Rows, true) => d.reduce(m.c1 as i64, m.row as i64 + 1),
                (Axis::Rows, false) => d.reduce(m.c1 as i64, m.row as i64 - 1),
            };
            match m.kind {
                MarkKind::X => new_x[row] = Some(c1),
                MarkKind::O => new_o[row] = Some(c1),
            }
        }
        for r in 0..n {
            if let Some(c) = new_x[r] {
                x[r] = c;
            }
            if let Some(c) = new_o[r] {
                o[r] = c;
            }
        }
        GridDiagram::from_rows(d.p() as i64, d.q(), &x, &o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ties {
    Forbidden,
    Allowed,
    Required,
}

fn exchange(d: &GridDiagram, axis: Axis, index: usize, ties: Ties) -> Result<GridDiagram> {
    let mut layout = CircleLayout::new(d, axis, index)?;
    layout.place_crossings(ties)?;
    layout.exchanged(d)
}

/// Exchanges the markings of columns `j` and `j + 1`.
pub fn commute_columns(d: &GridDiagram, j: usize) -> Result<GridDiagram> {
    exchange(d, Axis::Columns, j, Ties::Forbidden)
}

/// Exchanges the markings of rows `i` and `i + 1`.
pub fn commute_rows(d: &GridDiagram, i: usize) -> Result<GridDiagram> {
    exchange(d, Axis::Rows, i, Ties::Forbidden)
}

/// Exchanges a special pair of columns.
pub fn switch_columns(d: &GridDiagram, j: usize) -> Result<GridDiagram> {
    exchange(d, Axis::Columns, j, Ties::Required)
}

pub fn switch_rows(d: &GridDiagram, i: usize) -> Result<GridDiagram> {
    exchange(d, Axis::Rows, i, Ties::Required)
}

/// Before and after a column commutation or switch, drawn on one torus.
/// Generators of both diagrams are indexed alike: a point on γ is slid
/// along its α curve to the neighbouring point on β.
#[derive(Clone, Debug)]
pub struct CombinedDiagram {
    pub before: GridDiagram,
    pub after: GridDiagram,
    pub column: usize,
    pub switch: bool,
    /// Where γ crosses from the left of β to its right, going up (eighths of a cell along β).
    pub cross_up: usize,
    /// Where γ crosses back.
    pub cross_down: usize,
    layout: CircleLayout,
}

impl CombinedDiagram {
    pub fn marks(&self) -> &[CircleMark] {
        &self.layout.marks
    }

    pub fn circle_len8(&self) -> usize {
        self.layout.len8()
    }
}

/// The combined diagram for columns `j`, `j + 1`; a switch when the pair is special.
pub fn build_combined(d: &GridDiagram, j: usize) -> Result<CombinedDiagram> {
    let mut layout = CircleLayout::new(d, Axis::Columns, j)?;
    layout.place_crossings(Ties::Allowed)?;
    let after = layout.exchanged(d)?;
    Ok(CombinedDiagram {
        before: d.clone(),
        after,
        column: j,
        switch: layout.tied,
        cross_up: layout.cross_fwd,
        cross_down: layout.cross_back,
        layout,
    })
}

/// From `before` to `after` (β to γ), or back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    BetaGamma,
    GammaBeta,
}

/// Which side of the crossing carries the polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// A pentagon or hexagon, recorded through its straightened parallelogram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polygon {
    pub initial: Generator,
    pub terminal: Generator,
    pub rows: (usize, usize),
    pub lift: usize,
    pub rect: Rect,
    /// `None` for hexagons.
    pub side: Option<Side>,
    pub n_o: Vec<u8>,
    pub n_x: Vec<u8>,
}

impl Polygon {
    pub fn x_total(&self) -> u32 {
        self.n_x.iter().map(|&v| v as u32).sum()
    }
}

/// The vertical edge of a parallelogram lying on the shared circle.
struct Edge {
    x: i64,
    /// circle segment at the bottom of the edge
    s0: usize,
    /// the parallelogram lies left of the edge
    on_minus: bool,
    /// the bottom corner belongs to the initial generator
    bottom_initial: bool,
}

impl CombinedDiagram {
    fn edge(&self, r: &Rect) -> Option<Edge> {
        let (n, b) = (
            self.layout.n as i64,
            ((self.column + 1) % self.layout.n) as i64,
        );
        let (x, on_minus) = if (r.u + r.w).rem_euclid(n) == b {
            (r.u + r.w, true)
        } else if r.u.rem_euclid(n) == b {
            (r.u, false)
        } else {
            return None;
        };
        Some(Edge {
            x,
            s0: self.layout.segment(x, r.v),
            on_minus,
            bottom_initial: !on_minus,
        })
    }

    /// Position relative to the bottom of the edge.
    fn rel(&self, e: &Edge, pos: usize) -> usize {
        let len = self.layout.len8();
        (pos + len - 8 * e.s0 % len) % len
    }

    fn base_counts(&self, lat: &Lattice, r: &Rect) -> (Vec<u8>, Vec<u8>) {
        let d = &self.before;
        let n = d.n();
        (
            (0..n)
                .map(|k| lat.cell_inside((d.o_c1(k), k), r) as u8)
                .collect(),
            (0..n)
                .map(|k| lat.cell_inside((d.x_c1(k), k), r) as u8)
                .collect(),
        )
    }

    /// Adjusts marking counts for the markings next to the edge strictly
    /// between the relative positions `lo` and `hi`, where the boundary runs
    /// along γ instead of β.
    fn adjust(&self, e: &Edge, lo: usize, hi: usize, n_o: &mut [u8], n_x: &mut [u8]) {
        for m in &self.layout.marks {
            let t = self.rel(e, m.pos);
            if t <= lo || t >= hi {
                continue;
            }
            let counts = match m.kind {
                MarkKind::X => &mut *n_x,
                MarkKind::O => &mut *n_o,
            };
            if m.minus == e.on_minus {
                counts[m.row] -= 1;
            } else {
                counts[m.row] += 1;
            }
        }
    }

    /// Whether γ, bulging outwards between `lo` and `hi`, overlaps a cell the
    /// parallelogram already covers.
    fn bulge_overlaps(&self, lat: &Lattice, r: &Rect, e: &Edge, lo: usize, hi: usize) -> bool {
        let len = self.layout.len8();
        for k in 0..r.h as usize {
            let bulges = (1..8).any(|t| {
                let rel = 8 * k + t;
                rel > lo
                    && rel < hi
                    && self.layout.on_minus_arc((8 * e.s0 + rel) % len) != e.on_minus
            });
            if !bulges {
                continue;
            }
            let y = r.v + k as i64;
            let cell = if e.on_minus {
                lat.reduce(e.x, y)
            } else {
                lat.reduce(e.x - 1, y)
            };
            if lat.cell_inside(cell, r) > 0 {
                return true;
            }
        }
        false
    }
}

/// Empty pentagons out of `x`, X markings allowed.
pub fn enumerate_pentagons(c: &CombinedDiagram, dir: Direction, x: &Generator) -> Vec<Polygon> {
    let lat = shared_lattice(c.layout.n, c.layout.p, c.layout.q);
    let crossing = match dir {
        Direction::BetaGamma => c.layout.cross_fwd,
        Direction::GammaBeta => c.layout.cross_back,
    };
    let mut out = Vec::new();
    for raw in lat.parallelograms_from(x, true) {
        let Some(e) = c.edge(&raw.rect) else { continue };
        let top = 8 * raw.rect.h as usize;
        let a = c.rel(&e, crossing);
        if a == 0 || a >= top {
            continue;
        }
        // the corner on γ belongs to the after-diagram generator
        let gamma_bottom = e.bottom_initial == (dir == Direction::GammaBeta);
        let (lo, hi) = if gamma_bottom { (0, a) } else { (a, top) };
        if c.bulge_overlaps(&lat, &raw.rect, &e, lo, hi) {
            continue;
        }
        let (mut n_o, mut n_x) = c.base_counts(&lat, &raw.rect);
        c.adjust(&e, lo, hi, &mut n_o, &mut n_x);
        out.push(Polygon {
            initial: x.clone(),
            terminal: raw.terminal,
            rows: raw.rows,
            lift: raw.lift,
            rect: raw.rect,
            side: Some(if e.on_minus { Side::Left } else { Side::Right }),
            n_o,
            n_x,
        });
    }
    out
}

/// Empty hexagons out of `x` (both ends in the before-diagram), X markings allowed.
pub fn enumerate_hexagons(c: &CombinedDiagram, x: &Generator) -> Vec<Polygon> {
    let lat = shared_lattice(c.layout.n, c.layout.p, c.layout.q);
    let mut out = Vec::new();
    for raw in lat.parallelograms_from(x, true) {
        let Some(e) = c.edge(&raw.rect) else { continue };
        let top = 8 * raw.rect.h as usize;
        let (f, b) = (
            c.rel(&e, c.layout.cross_fwd),
            c.rel(&e, c.layout.cross_back),
        );
        if f == 0 || f >= top || b == 0 || b >= top {
            continue;
        }
        // the bigon on the parallelogram's own side must lie inside the edge
        let (lo, hi) = if e.on_minus { (b, f) } else { (f, b) };
        if lo >= hi {
            continue;
        }
        let (mut n_o, mut n_x) = c.base_counts(&lat, &raw.rect);
        c.adjust(&e, lo, hi, &mut n_o, &mut n_x);
        out.push(Polygon {
            initial: x.clone(),
            terminal: raw.terminal,
            rows: raw.rows,
            lift: raw.lift,
            rect: raw.rect,
            side: None,
            n_o,
            n_x,
        });
    }
    out
}

fn check_signs(c: &CombinedDiagram, ring: Ring, signs: Option<&SignAssignment>) -> Result<()> {
    if ring == Ring::Z {
        match signs {
            None => {
                return Err(Error::Precondition(
                    "integer coefficients need a sign assignment".into(),
                ))
            }
            Some(s) if !s.matches(&c.before) => {
                return Err(Error::Precondition(
                    "sign assignment belongs to a different grid".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(())
}

fn polygon_map(
    c: &CombinedDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
    polygons: &(dyn Fn(&Generator) -> Vec<Polygon> + Sync),
    source: &GridDiagram,
    signed_by_maslov: bool,
) -> Result<PolyMap> {
    check_signs(c, ring, signs)?;
    let space = GeneratorSpace::for_diagram(&c.before)?;
    let grader = Grader::new(source);
    let cols: Vec<Vec<Term>> = (0..space.len())
        .into_par_iter()
        .map(|xi| {
            let x = space.generator(xi);
            let parity = if ring == Ring::Z && signed_by_maslov {
                floor_parity(&grader.maslov(&x))
            } else {
                0
            };
            polygons(&x)
                .into_iter()
                .filter(|s| s.x_total() == 0)
                .map(|s| {
                    let coeff = match ring {
                        Ring::F2 => 1,
                        Ring::Z => {
                            let base = signs.unwrap().sign(xi, s.rows.0, s.rows.1, s.lift);
                            let flip = match s.side {
                                Some(Side::Left) => 1 - parity as i64 % 2,
                                Some(Side::Right) => parity as i64,
                                None => 0,
                            };
                            if flip % 2 == 1 {
                                -base
                            } else {
                                base
                            }
                        }
                    };
                    Term {
                        tgt: space.index(&s.terminal) as u32,
                        mono: monomial_of(&s.n_o),
                        coeff,
                    }
                })
                .collect()
        })
        .collect();
    let mut m = PolyMap {
        ring,
        tgt_dim: space.len(),
        cols,
    };
    m.normalize();
    Ok(m)
}

/// Pentagon map from the before-complex to the after-complex.
pub fn phi_beta_gamma(
    c: &CombinedDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<PolyMap> {
    polygon_map(
        c,
        ring,
        signs,
        &|x| enumerate_pentagons(c, Direction::BetaGamma, x),
        &c.before,
        true,
    )
}

/// Pentagon map from the after-complex back to the before-complex.
pub fn phi_gamma_beta(
    c: &CombinedDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<PolyMap> {
    polygon_map(
        c,
        ring,
        signs,
        &|x| enumerate_pentagons(c, Direction::GammaBeta, x),
        &c.after,
        true,
    )
}

/// Hexagon homotopy on the before-complex.
pub fn h_beta_gamma_beta(
    c: &CombinedDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<PolyMap> {
    polygon_map(
        c,
        ring,
        signs,
        &|x| enumerate_hexagons(c, x),
        &c.before,
        false,
    )
}
