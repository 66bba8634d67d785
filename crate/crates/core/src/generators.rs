//! Generators, parallelograms and domains.
//!
//! A generator is a permutation `perm` (row to column) with p-coordinates
//! `pcoords`; its row-`i` component is the lattice point
//! `(pcoords[i] * n + perm[i], i)`.
//!
//! A parallelogram with rows `(i, j)` is the plane rectangle whose lower-left
//! corner is the row-`i` component of the initial generator and whose upper
//! right corner is the lift of the row-`j` component at height
//! `j + n * lift`. The initial generator occupies the SW and NE corners, the
//! terminal one the NW and SE corners.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid_model::{reduce_point, GridDiagram};

pub const DEFAULT_CEILING: u128 = 10_000_000;

/// Generator count ceiling, overridable through `LENSGRID_CEILING`.
pub fn ceiling() -> u128 {
    std::env::var("LENSGRID_CEILING")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CEILING)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub perm: Vec<usize>,
    pub pcoords: Vec<usize>,
}

impl Generator {
    pub fn new(perm: Vec<usize>, pcoords: Vec<usize>) -> Self {
        Generator { perm, pcoords }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn point(&self, row: usize) -> (usize, usize) {
        (self.pcoords[row] * self.n() + self.perm[row], row)
    }

    pub fn points(&self) -> Vec<(usize, usize)> {
        (0..self.n()).map(|r| self.point(r)).collect()
    }

    /// Inverse of [`Generator::points`]; `None` unless there is exactly one
    /// point per row and per column.
    pub fn from_points(n: usize, pts: &[(usize, usize)]) -> Option<Generator> {
        if pts.len() != n {
            return None;
        }
        let mut perm = vec![usize::MAX; n];
        let mut pcoords = vec![0; n];
        let mut used = vec![false; n];
        for &(c1, c2) in pts {
            if c2 >= n || perm[c2] != usize::MAX || used[c1 % n] {
                return None;
            }
            used[c1 % n] = true;
            perm[c2] = c1 % n;
            pcoords[c2] = c1 / n;
        }
        Some(Generator { perm, pcoords })
    }

    pub fn is_valid(&self, p: usize) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        self.pcoords.len() == n
            && self
                .perm
                .iter()
                .all(|&c| c < n && !std::mem::replace(&mut seen[c], true))
            && self.pcoords.iter().all(|&a| a < p)
    }

    /// The same generator after moving the fundamental domain by `(dx, dy)`.
    pub fn shifted(&self, d: &GridDiagram, dx: i64, dy: i64) -> Generator {
        let pts: Vec<_> = self
            .points()
            .into_iter()
            .map(|(a, b)| d.reduce(a as i64 - dx, b as i64 - dy))
            .collect();
        Generator::from_points(self.n(), &pts).expect("shift preserves generators")
    }

    /// Parses `perm|pcoords`, e.g. `1,2,0|4,0,3`.
    pub fn parse(s: &str) -> Result<Generator> {
        let bad = || {
            Error::Format(format!(
                "malformed generator `{s}` (expected `perm|pcoords`)"
            ))
        };
        let (a, b) = s.split_once('|').ok_or_else(bad)?;
        let list = |t: &str| -> Result<Vec<usize>> {
            t.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
                .collect()
        };
        let g = Generator::new(list(a)?, list(b)?);
        if g.perm.len() != g.pcoords.len() {
            return Err(bad());
        }
        Ok(g)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(f, "{}|{}", j(&self.perm), j(&self.pcoords))
    }
}

/// Bijection between generators and `0..n! * p^n`, ordered
/// lexicographically by permutation and then by p-coordinates.
#[derive(Clone, Debug)]
pub struct GeneratorSpace {
    n: usize,
    p: usize,
    p_pow: usize,
    count: usize,
}

impl GeneratorSpace {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        let mut count: u128 = 1;
        for k in 1..=n as u128 {
            count = count.saturating_mul(k).saturating_mul(p as u128);
        }
        let ceiling = ceiling();
        if count > ceiling {
            return Err(Error::Ceiling {
                what: "generator count",
                count,
                ceiling,
            });
        }
        Ok(GeneratorSpace {
            n,
            p,
            p_pow: p.pow(n as u32),
            count: count as usize,
        })
    }

    pub fn for_diagram(d: &GridDiagram) -> Result<Self> {
        Self::new(d.n(), d.p())
    }

    pub fn len(&self) -> usize {
        self.count
    }
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn index(&self, g: &Generator) -> usize {
        let n = self.n;
        let mut rank = 0;
        for i in 0..n {
            let smaller = (i + 1..n).filter(|&k| g.perm[k] < g.perm[i]).count();
            rank = rank * (n - i) + smaller;
        }
        let mut a = 0;
        for &c in &g.pcoords {
            a = a * self.p + c;
        }
        rank * self.p_pow + a
    }

    pub fn generator(&self, idx: usize) -> Generator {
        let n = self.n;
        let mut a = idx % self.p_pow;
        let mut rank = idx / self.p_pow;
        let mut pcoords = vec![0; n];
        for i in (0..n).rev() {
            pcoords[i] = a % self.p;
            a /= self.p;
        }
        let mut digits = vec![0; n];
        for i in (0..n).rev() {
            let base = n - i;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<usize> = (0..n).collect();
        let perm = digits.iter().map(|&d| pool.remove(d)).collect();
        Generator { perm, pcoords }
    }

    pub fn iter(&self) -> impl Iterator<Item = Generator> + '_ {
        (0..self.count).map(move |i| self.generator(i))
    }
}

/// All generators of the diagram in index order, refusing counts above the ceiling.
pub fn enumerate_generators(d: &GridDiagram) -> Result<impl Iterator<Item = Generator>> {
    let space = GeneratorSpace::for_diagram(d)?;
    Ok((0..space.len()).map(move |i| space.generator(i)))
}

/// The generator at the lower-left corners of the O-marked cells.
pub fn special_generator_xo(d: &GridDiagram) -> Generator {
    let pts: Vec<_> = (0..d.n()).map(|r| (d.o_c1(r), r)).collect();
    Generator::from_points(d.n(), &pts).expect("O markings form a generator")
}

pub fn special_generator_xx(d: &GridDiagram) -> Generator {
    let pts: Vec<_> = (0..d.n()).map(|r| (d.x_c1(r), r)).collect();
    Generator::from_points(d.n(), &pts).expect("X markings form a generator")
}

/// Plane rectangle `[u, u+w] x [v, v+h]` in sheared coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rect {
    pub u: i64,
    pub v: i64,
    pub w: i64,
    pub h: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Parallelogram {
    pub initial: Generator,
    pub terminal: Generator,
    /// `(i, j)`: the rows of the SW and NE corners.
    pub rows: (usize, usize),
    /// Which of the `p` lifts of the row-`j` component is the NE corner.
    pub lift: usize,
    pub rect: Rect,
    pub n_o: Vec<u8>,
    pub n_x: Vec<u8>,
}

impl Parallelogram {
    pub fn tau(&self) -> (usize, usize) {
        let (i, j) = self.rows;
        (i.min(j), i.max(j))
    }
    pub fn o_total(&self) -> u32 {
        self.n_o.iter().map(|&v| v as u32).sum()
    }
    pub fn x_total(&self) -> u32 {
        self.n_x.iter().map(|&v| v as u32).sum()
    }
}

/// Marking-independent lattice geometry of a grid with parameters `(n, p, q)`.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub n: usize,
    pub p: usize,
    pub q: i64,
    np: usize,
    /// `embedded[(w - 1) * (np - 1) + (h - 1)]`
    embedded: Vec<bool>,
}

/// Geometric part of a parallelogram, before marking counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawParallelogram {
    pub rows: (usize, usize),
    pub lift: usize,
    pub rect: Rect,
    pub terminal: Generator,
    pub empty: bool,
}

impl Lattice {
    pub fn new(n: usize, p: usize, q: i64) -> Lattice {
        let np = n * p;
        let mut embedded = Vec::new();
        if np > 1 {
            embedded = vec![true; (np - 1) * (np - 1)];
            let (ni, npi) = (n as i64, np as i64);
            for w in 1..npi {
                for h in 1..npi {
                    let mut ok = true;
                    let tmax = (h - 1) / ni;
                    'outer: for t in -tmax..=tmax {
                        // horizontal components nps + nqt with |.| < w
                        let base = ni * q * t;
                        let s_lo = (-w - base).div_euclid(npi) - 1;
                        let s_hi = (w - base).div_euclid(npi) + 1;
                        for s in s_lo..=s_hi {
                            if s == 0 && t == 0 {
                                continue;
                            }
                            if (npi * s + base).abs() < w {
                                ok = false;
                                break 'outer;
                            }
                        }
                    }
                    embedded[((w - 1) * (npi - 1) + (h - 1)) as usize] = ok;
                }
            }
        }
        Lattice {
            n,
            p,
            q,
            np,
            embedded,
        }
    }

    pub fn for_diagram(d: &GridDiagram) -> Lattice {
        Lattice::new(d.n(), d.p(), d.q())
    }

    pub fn np(&self) -> usize {
        self.np
    }

    pub fn cell_count(&self) -> usize {
        self.np * self.n
    }

    pub fn reduce(&self, x: i64, y: i64) -> (usize, usize) {
        reduce_point(self.n, self.p, self.q, x, y)
    }

    pub fn is_embedded(&self, w: i64, h: i64) -> bool {
        let m = self.np as i64 - 1;
        w >= 1 && h >= 1 && w <= m && h <= m && self.embedded[((w - 1) * m + (h - 1)) as usize]
    }

    /// Number of lattice translates of the point `(x, y)` (given in the
    /// fundamental domain, doubled coordinates) strictly inside the doubled
    /// rectangle.
    fn count_inside2(&self, x2: i64, y2: i64, r: &Rect) -> u32 {
        let (n, np) = (self.n as i64, self.np as i64);
        let (u2, v2, w2, h2) = (2 * r.u, 2 * r.v, 2 * r.w, 2 * r.h);
        let mut count = 0;
        // vertical translates y2 + 2nt in (v2, v2 + h2)
        let t_lo = (v2 - y2).div_euclid(2 * n);
        let t_hi = (v2 + h2 - y2).div_euclid(2 * n) + 1;
        for t in t_lo..=t_hi {
            let y = y2 + 2 * n * t;
            if y <= v2 || y >= v2 + h2 {
                continue;
            }
            let xb = x2 + 2 * n * self.q * t;
            // horizontal translates xb + 2np s in (u2, u2 + w2)
            let s_lo = (u2 - xb).div_euclid(2 * np);
            for s in s_lo..=s_lo + 2 {
                let x = xb + 2 * np * s;
                if x > u2 && x < u2 + w2 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Number of translates of the lattice point strictly inside the rectangle.
    pub fn point_inside(&self, pt: (usize, usize), r: &Rect) -> u32 {
        self.count_inside2(2 * pt.0 as i64, 2 * pt.1 as i64, r)
    }

    /// Number of translates of the cell (through its center) inside the rectangle.
    pub fn cell_inside(&self, cell: (usize, usize), r: &Rect) -> u32 {
        self.count_inside2(2 * cell.0 as i64 + 1, 2 * cell.1 as i64 + 1, r)
    }

    /// Embedded parallelograms out of `x`, in order of rows `(i, j)` and lift.
    pub fn parallelograms_from(&self, x: &Generator, empty_only: bool) -> Vec<RawParallelogram> {
        let n = self.n;
        let (ni, npi) = (n as i64, self.np as i64);
        let mut out = Vec::new();
        if n < 2 {
            return out;
        }
        let pts = x.points();
        for i in 0..n {
            let (u, _) = pts[i];
            let u = u as i64;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (xj, _) = pts[j];
                let t_start = if j > i { 0 } else { 1 };
                for t in t_start..t_start + self.p as i64 {
                    let h = j as i64 - i as i64 + ni * t;
                    let w = (xj as i64 + ni * self.q * t - u).rem_euclid(npi);
                    if !self.is_embedded(w, h) {
                        continue;
                    }
                    let rect = Rect {
                        u,
                        v: i as i64,
                        w,
                        h,
                    };
                    let empty = pts.iter().all(|&pt| self.point_inside(pt, &rect) == 0);
                    if empty_only && !empty {
                        continue;
                    }
                    let mut terminal_pts = pts.clone();
                    terminal_pts[i] = self.reduce(u + w, i as i64);
                    terminal_pts[j] = self.reduce(u, i as i64 + h);
                    let terminal = Generator::from_points(n, &terminal_pts)
                        .expect("corner swap gives a generator");
                    out.push(RawParallelogram {
                        rows: (i, j),
                        lift: (t - t_start) as usize,
                        rect,
                        terminal,
                        empty,
                    });
                }
            }
        }
        out
    }

    /// Cell indices `c2 * np + c1` covered by the rectangle (each once, by embeddedness).
    pub fn cells(&self, r: &Rect) -> Vec<usize> {
        let mut out = Vec::with_capacity((r.w * r.h) as usize);
        for dy in 0..r.h {
            for dx in 0..r.w {
                let (c1, c2) = self.reduce(r.u + dx, r.v + dy);
                out.push(c2 * self.np + c1);
            }
        }
        out
    }
}

fn count_markings(lat: &Lattice, d: &GridDiagram, rect: &Rect) -> (Vec<u8>, Vec<u8>) {
    let n = d.n();
    let n_o = (0..n)
        .map(|r| lat.cell_inside((d.o_c1(r), r), rect) as u8)
        .collect();
    let n_x = (0..n)
        .map(|r| lat.cell_inside((d.x_c1(r), r), rect) as u8)
        .collect();
    (n_o, n_x)
}

fn finish(
    lat: &Lattice,
    d: &GridDiagram,
    x: &Generator,
    raw: Vec<RawParallelogram>,
) -> Vec<Parallelogram> {
    raw.into_iter()
        .map(|r| {
            let (n_o, n_x) = count_markings(lat, d, &r.rect);
            Parallelogram {
                initial: x.clone(),
                terminal: r.terminal,
                rows: r.rows,
                lift: r.lift,
                rect: r.rect,
                n_o,
                n_x,
            }
        })
        .collect()
}

/// Empty embedded parallelograms with initial generator `x`.
pub fn empty_parallelograms_from(d: &GridDiagram, x: &Generator) -> Vec<Parallelogram> {
    let lat = Lattice::for_diagram(d);
    finish(&lat, d, x, lat.parallelograms_from(x, true))
}

/// All embedded parallelograms (empty or not) with initial generator `x`.
pub fn all_parallelograms_from(d: &GridDiagram, x: &Generator) -> Vec<Parallelogram> {
    let lat = Lattice::for_diagram(d);
    finish(&lat, d, x, lat.parallelograms_from(x, false))
}

/// Same as [`empty_parallelograms_from`] with a prebuilt lattice.
pub fn empty_parallelograms_with(
    lat: &Lattice,
    d: &GridDiagram,
    x: &Generator,
) -> Vec<Parallelogram> {
    finish(lat, d, x, lat.parallelograms_from(x, true))
}

/// A 2-chain with nonnegative cell multiplicities between two generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Domain {
    pub initial: Generator,
    pub terminal: Generator,
    /// Indexed by `c2 * np + c1`.
    pub mult: Vec<u32>,
}

impl Domain {
    pub fn n_o(&self, d: &GridDiagram) -> Vec<u32> {
        let np = d.np();
        (0..d.n()).map(|r| self.mult[r * np + d.o_c1(r)]).collect()
    }
    pub fn n_x(&self, d: &GridDiagram) -> Vec<u32> {
        let np = d.np();
        (0..d.n()).map(|r| self.mult[r * np + d.x_c1(r)]).collect()
    }
}

pub fn domain_of_with(lat: &Lattice, r: &Parallelogram) -> Domain {
    let mut mult = vec![0; lat.cell_count()];
    for c in lat.cells(&r.rect) {
        mult[c] += 1;
    }
    Domain {
        initial: r.initial.clone(),
        terminal: r.terminal.clone(),
        mult,
    }
}

pub fn domain_of(d: &GridDiagram, r: &Parallelogram) -> Domain {
    domain_of_with(&Lattice::for_diagram(d), r)
}

pub fn juxtapose(a: &Domain, b: &Domain) -> Result<Domain> {
    if a.terminal != b.initial {
        return Err(Error::Precondition(format!(
            "cannot juxtapose: first domain ends at {} but second starts at {}",
            a.terminal, b.initial
        )));
    }
    Ok(Domain {
        initial: a.initial.clone(),
        terminal: b.terminal.clone(),
        mult: a.mult.iter().zip(&b.mult).map(|(x, y)| x + y).collect(),
    })
}

/// All ordered factorizations of `phi` into two empty parallelograms.
pub fn decompositions(d: &GridDiagram, phi: &Domain) -> Vec<(Parallelogram, Parallelogram)> {
    let lat = Lattice::for_diagram(d);
    let mut out = Vec::new();
    for r1 in empty_parallelograms_with(&lat, d, &phi.initial) {
        let d1 = domain_of_with(&lat, &r1);
        if d1.mult.iter().zip(&phi.mult).any(|(a, b)| a > b) {
            continue;
        }
        for r2 in empty_parallelograms_with(&lat, d, &r1.terminal) {
            if r2.terminal != phi.terminal {
                continue;
            }
            let d2 = domain_of_with(&lat, &r2);
            if d1
                .mult
                .iter()
                .zip(&d2.mult)
                .zip(&phi.mult)
                .all(|((a, b), c)| a + b == *c)
            {
                out.push((r1.clone(), r2));
            }
        }
    }
    out
}

/// Embeddedness tables are reused across diagrams with the same `(n, p, q)`.
pub fn shared_lattice(n: usize, p: usize, q: i64) -> std::sync::Arc<Lattice> {
    type Cache = std::sync::Mutex<HashMap<(usize, usize, i64), std::sync::Arc<Lattice>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let mut guard = cache.lock().unwrap();
    guard
        .entry((n, p, q))
        .or_insert_with(|| std::sync::Arc::new(Lattice::new(n, p, q)))
        .clone()
}
