//! Twisted toroidal grid diagrams in sheared lattice coordinates.
//!
//! The torus is the plane modulo the lattice spanned by `(n*p, 0)` and
//! `(n*q, n)`. Horizontal lines `y = i` are the alpha curves, vertical lines
//! `x = j (mod n)` are the beta curves, and a cell is indexed by its lower-left
//! lattice corner `(c1, c2)` with `0 <= c1 < n*p`, `0 <= c2 < n`.

use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LensParams {
    pub p: u32,
    pub q: i32,
}

impl LensParams {
    pub fn new(p: i64, q: i64) -> std::result::Result<Self, Vec<Violation>> {
        let v = Self::violations(p, q);
        if v.is_empty() {
            Ok(LensParams {
                p: p as u32,
                q: q as i32,
            })
        } else {
            Err(v)
        }
    }

    pub fn violations(p: i64, q: i64) -> Vec<Violation> {
        let mut v = Vec::new();
        if p <= 0 {
            v.push(Violation::PNotPositive { p });
            return v;
        }
        if q <= -p || q >= p {
            v.push(Violation::QOutOfRange { p, q });
        }
        if p.gcd(&q.abs()) != 1 {
            v.push(Violation::NotCoprime { p, q });
        }
        v
    }

    /// `q mod p` in `[0, p)`.
    pub fn q_mod(&self) -> u32 {
        (self.q as i64).rem_euclid(self.p as i64) as u32
    }

    /// Multiplicative inverse of `q` modulo `p` (0 when `p = 1`).
    pub fn q_inv(&self) -> u32 {
        let p = self.p as i64;
        if p == 1 {
            return 0;
        }
        let e = (self.q as i64).extended_gcd(&p);
        e.x.rem_euclid(p) as u32
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Marking {
    pub c1: usize,
    pub c2: usize,
}

impl Marking {
    pub fn new(c1: usize, c2: usize) -> Self {
        Marking { c1, c2 }
    }
    pub fn column(&self, n: usize) -> usize {
        self.c1 % n
    }
    pub fn sheet(&self, n: usize) -> usize {
        self.c1 / n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkKind {
    X,
    O,
}

impl fmt::Display for MarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MarkKind::X => "X",
            MarkKind::O => "O",
        })
    }
}

/// One broken invariant, with the offending indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    PNotPositive {
        p: i64,
    },
    QOutOfRange {
        p: i64,
        q: i64,
    },
    NotCoprime {
        p: i64,
        q: i64,
    },
    NNotPositive,
    WrongCount {
        kind: MarkKind,
        expected: usize,
        found: usize,
    },
    OutOfRange {
        kind: MarkKind,
        index: usize,
        c1: usize,
        c2: usize,
    },
    DuplicateRow {
        kind: MarkKind,
        row: usize,
        indices: Vec<usize>,
    },
    DuplicateColumn {
        kind: MarkKind,
        column: usize,
        indices: Vec<usize>,
    },
    SharedCell {
        x_index: usize,
        o_index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PNotPositive { p } => write!(f, "p must be positive (got {p})"),
            Violation::QOutOfRange { p, q } => {
                write!(f, "q must satisfy -p < q < p (p={p}, q={q})")
            }
            Violation::NotCoprime { p, q } => write!(f, "gcd(p,q) ≠ 1 (p={p}, q={q})"),
            Violation::NNotPositive => write!(f, "n must be positive"),
            Violation::WrongCount {
                kind,
                expected,
                found,
            } => {
                write!(f, "expected {expected} {kind} markings, found {found}")
            }
            Violation::OutOfRange {
                kind,
                index,
                c1,
                c2,
            } => {
                write!(
                    f,
                    "{kind} marking {index} at ({c1},{c2}) lies outside the fundamental domain"
                )
            }
            Violation::DuplicateRow { kind, row, indices } => {
                write!(f, "duplicate {kind} row {row} (markings {indices:?})")
            }
            Violation::DuplicateColumn {
                kind,
                column,
                indices,
            } => {
                write!(f, "duplicate {kind} column {column} (markings {indices:?})")
            }
            Violation::SharedCell { x_index, o_index } => {
                write!(
                    f,
                    "X marking {x_index} and O marking {o_index} share a cell"
                )
            }
        }
    }
}

/// Unchecked diagram data, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDiagram {
    pub p: i64,
    pub q: i64,
    pub n: i64,
    pub x: Vec<Marking>,
    pub o: Vec<Marking>,
}

impl RawDiagram {
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = LensParams::violations(self.p, self.q);
        if self.n <= 0 {
            v.push(Violation::NNotPositive);
        }
        if !v.is_empty() {
            return v;
        }
        let n = self.n as usize;
        let np = n * self.p as usize;
        for (kind, marks) in [(MarkKind::X, &self.x), (MarkKind::O, &self.o)] {
            if marks.len() != n {
                v.push(Violation::WrongCount {
                    kind,
                    expected: n,
                    found: marks.len(),
                });
            }
            for (i, m) in marks.iter().enumerate() {
                if m.c1 >= np || m.c2 >= n {
                    v.push(Violation::OutOfRange {
                        kind,
                        index: i,
                        c1: m.c1,
                        c2: m.c2,
                    });
                }
            }
            for row in 0..n {
                let idx: Vec<usize> = (0..marks.len()).filter(|&i| marks[i].c2 == row).collect();
                if idx.len() > 1 {
                    v.push(Violation::DuplicateRow {
                        kind,
                        row,
                        indices: idx,
                    });
                }
            }
            for column in 0..n {
                let idx: Vec<usize> = (0..marks.len())
                    .filter(|&i| marks[i].c1 < np && marks[i].column(n) == column)
                    .collect();
                if idx.len() > 1 {
                    v.push(Violation::DuplicateColumn {
                        kind,
                        column,
                        indices: idx,
                    });
                }
            }
        }
        // A 1x1 grid has a single cell, which both markings must share.
        for (i, a) in self.x.iter().enumerate() {
            for (j, b) in self.o.iter().enumerate() {
                if a == b && n > 1 {
                    v.push(Violation::SharedCell {
                        x_index: i,
                        o_index: j,
                    });
                }
            }
        }
        v
    }

    pub fn into_diagram(self) -> Result<GridDiagram> {
        let v = self.validate();
        if !v.is_empty() {
            return Err(Error::Invalid(v));
        }
        let lens = LensParams {
            p: self.p as u32,
            q: self.q as i32,
        };
        let n = self.n as usize;
        let mut x = vec![0; n];
        let mut o = vec![0; n];
        for m in &self.x {
            x[m.c2] = m.c1;
        }
        for m in &self.o {
            o[m.c2] = m.c1;
        }
        Ok(GridDiagram { lens, n, x, o })
    }
}

/// A valid grid diagram. The X and O markings are indexed by row, so
/// `x_c1(i)` is the horizontal cell index of the X marking in row `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridDiagram {
    lens: LensParams,
    n: usize,
    x: Vec<usize>,
    o: Vec<usize>,
}

/// The p-fold cover: an ordinary `np x np` toroidal grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverDiagram {
    pub size: usize,
    pub x: Vec<(usize, usize)>,
    pub o: Vec<(usize, usize)>,
    pub deck: (usize, usize),
}

impl GridDiagram {
    /// Builds a diagram from the `c1` values of the X and O markings, row by row.
    pub fn from_rows(p: i64, q: i64, x: &[usize], o: &[usize]) -> Result<Self> {
        let raw = RawDiagram {
            p,
            q,
            n: x.len() as i64,
            x: x.iter()
                .enumerate()
                .map(|(r, &c)| Marking::new(c, r))
                .collect(),
            o: o.iter()
                .enumerate()
                .map(|(r, &c)| Marking::new(c, r))
                .collect(),
        };
        raw.into_diagram()
    }

    pub fn lens(&self) -> LensParams {
        self.lens
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.lens.p as usize
    }
    pub fn q(&self) -> i64 {
        self.lens.q as i64
    }
    pub fn np(&self) -> usize {
        self.n * self.p()
    }

    pub fn x_c1(&self, row: usize) -> usize {
        self.x[row]
    }
    pub fn o_c1(&self, row: usize) -> usize {
        self.o[row]
    }
    pub fn x_markings(&self) -> Vec<Marking> {
        self.x
            .iter()
            .enumerate()
            .map(|(r, &c)| Marking::new(c, r))
            .collect()
    }
    pub fn o_markings(&self) -> Vec<Marking> {
        self.o
            .iter()
            .enumerate()
            .map(|(r, &c)| Marking::new(c, r))
            .collect()
    }

    /// Row of the X marking in the given column.
    pub fn x_row_in_column(&self, column: usize) -> usize {
        (0..self.n).find(|&r| self.x[r] % self.n == column).unwrap()
    }
    pub fn o_row_in_column(&self, column: usize) -> usize {
        (0..self.n).find(|&r| self.o[r] % self.n == column).unwrap()
    }

    /// Reduces a plane lattice point (or the cell with that lower-left corner)
    /// to the fundamental domain.
    pub fn reduce(&self, x: i64, y: i64) -> (usize, usize) {
        reduce_point(self.n, self.p(), self.q(), x, y)
    }

    pub fn to_raw(&self) -> RawDiagram {
        RawDiagram {
            p: self.p() as i64,
            q: self.q(),
            n: self.n as i64,
            x: self.x_markings(),
            o: self.o_markings(),
        }
    }

    /// Re-coordinatizes after moving the fundamental domain by `(dx, dy)`.
    pub fn shifted(&self, dx: i64, dy: i64) -> GridDiagram {
        let mv = |c1: usize, c2: usize| self.reduce(c1 as i64 - dx, c2 as i64 - dy);
        let mut x = vec![0; self.n];
        let mut o = vec![0; self.n];
        for r in 0..self.n {
            let (a, b) = mv(self.x[r], r);
            x[b] = a;
            let (a, b) = mv(self.o[r], r);
            o[b] = a;
        }
        GridDiagram {
            lens: self.lens,
            n: self.n,
            x,
            o,
        }
    }

    pub fn lift_to_cover(&self) -> CoverDiagram {
        let lift = |c1: usize, c2: usize| -> Vec<(usize, usize)> {
            (0..self.p()).map(|k| self.cover_point(c1, c2, k)).collect()
        };
        let mut x = Vec::new();
        let mut o = Vec::new();
        for r in 0..self.n {
            x.extend(lift(self.x[r], r));
            o.extend(lift(self.o[r], r));
        }
        x.sort();
        o.sort();
        let np = self.np() as i64;
        CoverDiagram {
            size: self.np(),
            x,
            o,
            deck: ((self.n as i64 * self.q()).rem_euclid(np) as usize, self.n),
        }
    }

    /// The `k`-th lift `((c1 + nqk) mod np, c2 + nk)` of a fundamental-domain point.
    pub fn cover_point(&self, c1: usize, c2: usize, k: usize) -> (usize, usize) {
        let np = self.np() as i64;
        let x = (c1 as i64 + self.n as i64 * self.q() * k as i64).rem_euclid(np);
        (x as usize, c2 + self.n * k)
    }

    /// Rows grouped by link component; a class holds the X and O of each listed row.
    pub fn link_components(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut x_row_of_col = vec![0; n];
        for r in 0..n {
            x_row_of_col[self.x[r] % n] = r;
        }
        let mut seen = vec![false; n];
        let mut classes = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut class = Vec::new();
            let mut r = start;
            while !seen[r] {
                seen[r] = true;
                class.push(r);
                r = x_row_of_col[self.o[r] % n];
            }
            class.sort();
            classes.push(class);
        }
        classes
    }

    pub fn ell(&self) -> usize {
        self.link_components().len()
    }

    /// Number of generators, `n! * p^n`, saturating.
    pub fn generator_count(&self) -> u128 {
        let mut c: u128 = 1;
        for k in 1..=self.n as u128 {
            c = c.saturating_mul(k).saturating_mul(self.p() as u128);
        }
        c
    }

    /// Canonical text form: X then O, each sorted by row.
    pub fn to_text(&self) -> String {
        let mut s = format!("lensgrid 1\np {}\nq {}\nn {}\n", self.p(), self.q(), self.n);
        for r in 0..self.n {
            s.push_str(&format!("X {} {}\n", self.x[r], r));
        }
        for r in 0..self.n {
            s.push_str(&format!("O {} {}\n", self.o[r], r));
        }
        s
    }

    pub fn parse(text: &str) -> Result<GridDiagram> {
        parse_raw(text)?.into_diagram()
    }

    /// Canonical form of a diagram file, without validation beyond parsing.
    pub fn canonical_text(text: &str) -> Result<String> {
        Ok(Self::parse(text)?.to_text())
    }
}

pub(crate) fn reduce_point(n: usize, p: usize, q: i64, x: i64, y: i64) -> (usize, usize) {
    let n_i = n as i64;
    let t = y.div_euclid(n_i);
    let y2 = y - n_i * t;
    let x2 = (x - n_i * q * t).rem_euclid(n_i * p as i64);
    (x2 as usize, y2 as usize)
}

/// Parses the line-oriented diagram format without validating invariants.
pub fn parse_raw(text: &str) -> Result<RawDiagram> {
    let err = |line: usize, column: usize, message: String| Error::Parse {
        line,
        column,
        message,
    };
    let mut header = false;
    let (mut p, mut q, mut n) = (None, None, None);
    let mut x = Vec::new();
    let mut o = Vec::new();
    let mut last_line = 0;
    for (li, raw_line) in text.lines().enumerate() {
        let line_no = li + 1;
        last_line = line_no;
        let line = match raw_line.find('#') {
            Some(k) => &raw_line[..k],
            None => raw_line,
        };
        let toks: Vec<(usize, &str)> = tokens(line);
        if toks.is_empty() {
            continue;
        }
        let int = |k: usize| -> Result<i64> {
            let (col, t) = toks[k];
            t.parse::<i64>()
                .map_err(|_| err(line_no, col, format!("expected an integer, found `{t}`")))
        };
        let arity = |want: usize| -> Result<()> {
            if toks.len() != want {
                let col = toks.get(want).map(|t| t.0).unwrap_or(line.len() + 1);
                return Err(err(
                    line_no,
                    col,
                    format!("`{}` takes {} argument(s)", toks[0].1, want - 1),
                ));
            }
            Ok(())
        };
        if !header {
            if toks[0].1 != "lensgrid" {
                return Err(err(
                    line_no,
                    toks[0].0,
                    "expected header `lensgrid 1`".into(),
                ));
            }
            arity(2)?;
            if int(1)? != 1 {
                return Err(err(line_no, toks[1].0, "unsupported format version".into()));
            }
            header = true;
            continue;
        }
        match toks[0].1 {
            "p" | "q" | "n" => {
                arity(2)?;
                let v = int(1)?;
                let slot = match toks[0].1 {
                    "p" => &mut p,
                    "q" => &mut q,
                    _ => &mut n,
                };
                if slot.is_some() {
                    return Err(err(
                        line_no,
                        toks[0].0,
                        format!("`{}` given twice", toks[0].1),
                    ));
                }
                if toks[0].1 == "p" && v <= 0 {
                    return Err(err(line_no, toks[1].0, "p must be positive".into()));
                }
                if toks[0].1 == "n" && v <= 0 {
                    return Err(err(line_no, toks[1].0, "n must be positive".into()));
                }
                *slot = Some(v);
            }
            "X" | "O" => {
                arity(3)?;
                let a = int(1)?;
                let b = int(2)?;
                if a < 0 {
                    return Err(err(
                        line_no,
                        toks[1].0,
                        "coordinates must be nonnegative".into(),
                    ));
                }
                if b < 0 {
                    return Err(err(
                        line_no,
                        toks[2].0,
                        "coordinates must be nonnegative".into(),
                    ));
                }
                let m = Marking::new(a as usize, b as usize);
                if toks[0].1 == "X" {
                    x.push(m);
                } else {
                    o.push(m);
                }
            }
            other => {
                return Err(err(
                    line_no,
                    toks[0].0,
                    format!("unknown keyword `{other}`"),
                ));
            }
        }
    }
    if !header {
        return Err(err(
            last_line.max(1),
            1,
            "missing header `lensgrid 1`".into(),
        ));
    }
    let need = |v: Option<i64>, name: &str| {
        v.ok_or_else(|| err(last_line.max(1), 1, format!("missing `{name}` line")))
    };
    Ok(RawDiagram {
        p: need(p, "p")?,
        q: need(q, "q")?,
        n: need(n, "n")?,
        x,
        o,
    })
}

/// Whitespace-separated tokens with 1-based column numbers.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s + 1, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s + 1, &line[s..]));
    }
    out
}

impl fmt::Display for GridDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str =
        "lensgrid 1\n# comment\np 5\nq 2\nn 3\nX 10 0\nX 2 1\nX 0 2\nO 9 0\nO 13 1\nO 8 2\n";

    #[test]
    fn parses_and_prints_canonically() {
        let d = GridDiagram::parse(SAMPLE).unwrap();
        assert_eq!((d.p(), d.q(), d.n(), d.np()), (5, 2, 3, 15));
        assert_eq!(GridDiagram::parse(&d.to_text()).unwrap(), d);
        assert_eq!(
            d,
            GridDiagram::from_rows(5, 2, &[10, 2, 0], &[9, 13, 8]).unwrap()
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        let bad = SAMPLE.replace("X 2 1", "X two 1");
        match GridDiagram::parse(&bad) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (7, 3)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            GridDiagram::parse("p 5\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn invalid_parameters_are_reported() {
        assert_eq!(
            LensParams::violations(4, 2),
            vec![Violation::NotCoprime { p: 4, q: 2 }]
        );
        assert_eq!(
            LensParams::violations(0, 0),
            vec![Violation::PNotPositive { p: 0 }]
        );
        assert!(LensParams::violations(5, -2).is_empty());
        assert!(LensParams::violations(5, 5).contains(&Violation::QOutOfRange { p: 5, q: 5 }));
        match GridDiagram::from_rows(1, 0, &[0, 1], &[0, 1]) {
            Err(Error::Invalid(v)) => {
                assert!(v.iter().any(|x| matches!(x, Violation::SharedCell { .. })))
            }
            other => panic!("unexpected {other:?}"),
        }
        match GridDiagram::from_rows(3, 1, &[0, 2], &[1, 3]) {
            Err(Error::Invalid(v)) => {
                assert!(v
                    .iter()
                    .any(|x| matches!(x, Violation::DuplicateColumn { .. })))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reduction_applies_the_deck_shear() {
        let (n, p, q) = (3, 5, 2);
        for x in -20..20 {
            for y in -9..9 {
                let (a, b) = reduce_point(n, p, q, x, y);
                assert!(a < n * p && b < n);
                let t = (y - b as i64) / n as i64;
                assert_eq!(
                    (x - a as i64 - n as i64 * q * t).rem_euclid((n * p) as i64),
                    0
                );
            }
        }
        assert_eq!(reduce_point(n, p, q, 1, 3), (15 + 1 - 6, 0));
    }

    #[test]
    fn components_of_small_links() {
        let knot = GridDiagram::parse(SAMPLE).unwrap();
        assert_eq!(knot.ell(), 1);
        let link = GridDiagram::from_rows(2, 1, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(link.ell(), 2);
        assert_eq!(link.link_components().len(), 2);
    }
}
