//! Sign assignments on parallelograms, solved from axioms S1-S3 over GF(2).
//!
//! A sign `(-1)^eps` is attached to every embedded parallelogram. The
//! parallelograms, and therefore the constraints, depend only on `(n, p, q)`.
//!
//! * S1: if `r1 * r2 = r3 * r4` go from `x` to `z != x` through different
//!   intermediate generators, `eps1 + eps2 + eps3 + eps4 = 1`.
//! * S2: if `r1 * r2` is a row annulus, `eps1 + eps2 = 0`.
//! * S3: if `r1 * r2` is a column annulus, `eps1 + eps2 = 1`.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::generators::{shared_lattice, Generator, GeneratorSpace, Lattice, Rect};
use crate::grid_model::GridDiagram;

const UNDEF: u8 = 2;

/// Cell sets of up to 256 cells.
type Cells = [u64; 4];
/// Terminal generator with the two cell sets of a two-step domain.
type DomainKey = (u32, Cells, Cells);

/// `((initial * n + i) * n + j) * p + lift`.
pub type ParallelogramKey = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignAssignment {
    n: usize,
    p: usize,
    q: i64,
    eps: Vec<u8>,
}

impl SignAssignment {
    pub fn params(&self) -> (usize, usize, i64) {
        (self.n, self.p, self.q)
    }

    pub fn matches(&self, d: &GridDiagram) -> bool {
        self.n == d.n() && self.p == d.p() && self.q == d.q()
    }

    pub fn key(&self, initial: usize, i: usize, j: usize, lift: usize) -> ParallelogramKey {
        key_of(self.n, self.p, initial, i, j, lift)
    }

    pub fn epsilon(&self, initial: usize, i: usize, j: usize, lift: usize) -> Option<u8> {
        match self.eps[self.key(initial, i, j, lift) as usize] {
            UNDEF => None,
            e => Some(e),
        }
    }

    /// `+1` or `-1`; panics on a key that is not an embedded parallelogram.
    pub fn sign(&self, initial: usize, i: usize, j: usize, lift: usize) -> i64 {
        match self.epsilon(initial, i, j, lift) {
            Some(0) => 1,
            Some(_) => -1,
            None => panic!("no sign for parallelogram ({initial},{i},{j},{lift})"),
        }
    }

    pub fn epsilon_of_key(&self, k: ParallelogramKey) -> Option<u8> {
        match self.eps[k as usize] {
            UNDEF => None,
            e => Some(e),
        }
    }

    pub fn flip(&mut self, k: ParallelogramKey) {
        let e = &mut self.eps[k as usize];
        if *e != UNDEF {
            *e ^= 1;
        }
    }

    pub fn set(&mut self, k: ParallelogramKey, value: u8) {
        self.eps[k as usize] = value & 1;
    }

    /// Applies `eps(r) += g(initial) + g(terminal)`, which preserves every axiom.
    pub fn gauge(&self, sys: &ConstraintSystem, g: &[u8]) -> SignAssignment {
        let mut out = self.clone();
        for (k, &(a, b)) in sys.ends.iter().enumerate() {
            if a != u32::MAX && out.eps[k] != UNDEF {
                out.eps[k] ^= (g[a as usize] ^ g[b as usize]) & 1;
            }
        }
        out
    }

    pub fn defined_count(&self) -> usize {
        self.eps.iter().filter(|&&e| e != UNDEF).count()
    }

    /// Text export: a header line, then `generator i j u,v,w,h -> +1|-1`.
    pub fn export(&self) -> Result<String> {
        let space = GeneratorSpace::new(self.n, self.p)?;
        let lat = shared_lattice(self.n, self.p, self.q);
        let mut s = format!("lensgrid-signs 1 p {} q {} n {}\n", self.p, self.q, self.n);
        for xi in 0..space.len() {
            let x = space.generator(xi);
            for r in lat.parallelograms_from(&x, false) {
                let k = self.key(xi, r.rows.0, r.rows.1, r.lift);
                let sign = if self.eps[k as usize] == 0 {
                    "+1"
                } else {
                    "-1"
                };
                let Rect { u, v, w, h } = r.rect;
                s.push_str(&format!(
                    "{x} {} {} {u},{v},{w},{h} -> {sign}\n",
                    r.rows.0, r.rows.1
                ));
            }
        }
        Ok(s)
    }

    /// Inverse of [`SignAssignment::export`]; every embedded parallelogram must be listed.
    pub fn import(d: &GridDiagram, text: &str) -> Result<SignAssignment> {
        let (n, p, q) = (d.n(), d.p(), d.q());
        let space = GeneratorSpace::new(n, p)?;
        let lat = shared_lattice(n, p, q);
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let bad = |line: usize, msg: &str| Error::Parse {
            line: line + 1,
            column: 1,
            message: msg.to_string(),
        };
        let (hl, header) = lines.next().ok_or_else(|| bad(0, "empty sign file"))?;
        let expect = format!("lensgrid-signs 1 p {p} q {q} n {n}");
        if header.trim() != expect {
            return Err(bad(
                hl,
                &format!("header does not match the diagram (expected `{expect}`)"),
            ));
        }
        let mut eps = vec![UNDEF; space.len() * n * n * p];
        for (ln, line) in lines {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| bad(ln, "missing `->`"))?;
            let value = match rhs.trim() {
                "+1" => 0,
                "-1" => 1,
                _ => return Err(bad(ln, "sign must be +1 or -1")),
            };
            let toks: Vec<&str> = lhs.split_whitespace().collect();
            if toks.len() != 4 {
                return Err(bad(ln, "expected `generator i j u,v,w,h`"));
            }
            let x = Generator::parse(toks[0])?;
            if x.n() != n || !x.is_valid(p) {
                return Err(bad(ln, "generator does not belong to the diagram"));
            }
            let i: usize = toks[1].parse().map_err(|_| bad(ln, "bad row index"))?;
            let j: usize = toks[2].parse().map_err(|_| bad(ln, "bad row index"))?;
            let rect: Vec<i64> = toks[3]
                .split(',')
                .map(|t| t.parse().map_err(|_| bad(ln, "bad rectangle")))
                .collect::<Result<_>>()?;
            if rect.len() != 4 {
                return Err(bad(ln, "bad rectangle"));
            }
            let found = lat
                .parallelograms_from(&x, false)
                .into_iter()
                .find(|r| r.rows == (i, j) && [r.rect.u, r.rect.v, r.rect.w, r.rect.h] == rect[..]);
            let Some(r) = found else {
                return Err(bad(ln, "no embedded parallelogram with this key"));
            };
            eps[key_of(n, p, space.index(&x), i, j, r.lift) as usize] = value;
        }
        let out = SignAssignment { n, p, q, eps };
        let expected: usize = (0..space.len())
            .map(|xi| lat.parallelograms_from(&space.generator(xi), false).len())
            .sum();
        if out.defined_count() != expected {
            return Err(Error::Format(format!(
                "sign file lists {} of {} parallelograms",
                out.defined_count(),
                expected
            )));
        }
        Ok(out)
    }
}

fn key_of(n: usize, p: usize, initial: usize, i: usize, j: usize, lift: usize) -> ParallelogramKey {
    (((initial * n + i) * n + j) * p + lift) as ParallelogramKey
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    S1,
    S2,
    S3,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::S1 => "S1",
            Relation::S2 => "S2",
            Relation::S3 => "S3",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub relation: Relation,
    pub vars: Vec<ParallelogramKey>,
    pub parity: u8,
}

#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    pub n: usize,
    pub p: usize,
    pub q: i64,
    /// Size of the key space.
    pub key_space: usize,
    /// `(initial, terminal)` generator indices per key; `u32::MAX` if not embedded.
    pub ends: Vec<(u32, u32)>,
    pub constraints: Vec<Constraint>,
    /// Two-step domains with `x = z` that are neither a thin row nor a thin
    /// column annulus (thick annuli of non-empty parallelograms); no axiom applies.
    pub unclassified: usize,
    /// Largest number of factorizations with pairwise distinct intermediates
    /// found for one domain with `x != z`.
    pub max_factorizations: usize,
}

impl ConstraintSystem {
    pub fn variable_count(&self) -> usize {
        self.ends.iter().filter(|e| e.0 != u32::MAX).count()
    }

    pub fn count(&self, rel: Relation) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.relation == rel)
            .count()
    }
}

struct Para {
    key: ParallelogramKey,
    terminal: u32,
    cells: Cells,
}

fn cells_of(lat: &Lattice, r: &Rect) -> Cells {
    let mut c = [0u64; 4];
    for k in lat.cells(r) {
        c[k / 64] |= 1 << (k % 64);
    }
    c
}

fn union(a: &Cells, b: &Cells) -> Cells {
    [a[0] | b[0], a[1] | b[1], a[2] | b[2], a[3] | b[3]]
}

fn inter(a: &Cells, b: &Cells) -> Cells {
    [a[0] & b[0], a[1] & b[1], a[2] & b[2], a[3] & b[3]]
}

/// Builds S1-S3 for the grid parameters of `d`.
pub fn build_constraints(d: &GridDiagram) -> Result<ConstraintSystem> {
    build_constraints_for(d.n(), d.p(), d.q())
}

pub fn build_constraints_for(n: usize, p: usize, q: i64) -> Result<ConstraintSystem> {
    let space = GeneratorSpace::new(n, p)?;
    let lat = shared_lattice(n, p, q);
    let np = n * p;
    if n * np > 256 {
        return Err(Error::Ceiling {
            what: "cell count for sign constraints",
            count: (n * np) as u128,
            ceiling: 256,
        });
    }
    let key_space = space.len() * n * n * p;
    let paras: Vec<Vec<Para>> = (0..space.len())
        .into_par_iter()
        .map(|xi| {
            let x = space.generator(xi);
            lat.parallelograms_from(&x, false)
                .into_iter()
                .map(|r| Para {
                    key: key_of(n, p, xi, r.rows.0, r.rows.1, r.lift),
                    terminal: space.index(&r.terminal) as u32,
                    cells: cells_of(&lat, &r.rect),
                })
                .collect()
        })
        .collect();
    let mut ends = vec![(u32::MAX, u32::MAX); key_space];
    for (xi, list) in paras.iter().enumerate() {
        for r in list {
            ends[r.key as usize] = (xi as u32, r.terminal);
        }
    }
    let mut row_masks = vec![[0u64; 4]; n];
    let mut col_masks = vec![[0u64; 4]; n];
    for (c2, row_mask) in row_masks.iter_mut().enumerate() {
        for c1 in 0..np {
            let k = c2 * np + c1;
            row_mask[k / 64] |= 1 << (k % 64);
            col_masks[c1 % n][k / 64] |= 1 << (k % 64);
        }
    }
    let per_x: Vec<(Vec<Constraint>, usize, usize)> = (0..space.len())
        .into_par_iter()
        .map(|xi| {
            let mut groups: HashMap<DomainKey, Vec<(u32, u32, u32)>> = HashMap::new();
            for r1 in &paras[xi] {
                for r2 in &paras[r1.terminal as usize] {
                    let key = (
                        r2.terminal,
                        union(&r1.cells, &r2.cells),
                        inter(&r1.cells, &r2.cells),
                    );
                    groups
                        .entry(key)
                        .or_default()
                        .push((r1.key, r2.key, r1.terminal));
                }
            }
            let mut out = Vec::new();
            let mut unclassified = 0;
            let mut max_fact = 0;
            let mut keys: Vec<_> = groups.keys().cloned().collect();
            keys.sort_unstable();
            for key in keys {
                let facts = &groups[&key];
                let (z, uni, int) = key;
                if z as usize == xi {
                    let empty_inter = int.iter().all(|&w| w == 0);
                    let rel = if empty_inter && row_masks.contains(&uni) {
                        Relation::S2
                    } else if empty_inter && col_masks.contains(&uni) {
                        Relation::S3
                    } else {
                        unclassified += facts.len();
                        continue;
                    };
                    for &(a, b, _) in facts {
                        out.push(Constraint {
                            relation: rel,
                            vars: vec![a, b],
                            parity: if rel == Relation::S2 { 0 } else { 1 },
                        });
                    }
                } else {
                    let mut mids: Vec<u32> = facts.iter().map(|f| f.2).collect();
                    mids.sort_unstable();
                    mids.dedup();
                    max_fact = max_fact.max(mids.len());
                    for (ia, fa) in facts.iter().enumerate() {
                        for fb in &facts[ia + 1..] {
                            if fa.2 != fb.2 {
                                out.push(Constraint {
                                    relation: Relation::S1,
                                    vars: vec![fa.0, fa.1, fb.0, fb.1],
                                    parity: 1,
                                });
                            }
                        }
                    }
                }
            }
            (out, unclassified, max_fact)
        })
        .collect();
    let mut constraints = Vec::new();
    let mut unclassified = 0;
    let mut max_factorizations = 0;
    for (c, u, m) in per_x {
        constraints.extend(c);
        unclassified += u;
        max_factorizations = max_factorizations.max(m);
    }
    Ok(ConstraintSystem {
        n,
        p,
        q,
        key_space,
        ends,
        constraints,
        unclassified,
        max_factorizations,
    })
}

/// Which spanning forest and free-variable values the solver uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fixing {
    /// Forest grown in key order, forest edges and free variables set to `+1`.
    Plus,
    /// Forest grown in reverse key order, forest edges and free variables set to `-1`.
    Minus,
}

pub fn solve_sign_assignment(d: &GridDiagram) -> Result<SignAssignment> {
    let sys = build_constraints(d)?;
    solve(&sys, Fixing::Plus)
}

/// Solves the system: gauge-fixes a spanning forest of the generator graph,
/// propagates single-unknown equations, then eliminates what remains.
pub fn solve(sys: &ConstraintSystem, fixing: Fixing) -> Result<SignAssignment> {
    let free_value = match fixing {
        Fixing::Plus => 0u8,
        Fixing::Minus => 1u8,
    };
    let nkeys = sys.key_space;
    let ngens = sys
        .ends
        .iter()
        .filter(|e| e.0 != u32::MAX)
        .map(|e| e.0.max(e.1) as usize + 1)
        .max()
        .unwrap_or(0);
    let mut value = vec![UNDEF; nkeys];

    // spanning forest of the generator graph
    let mut adj: Vec<Vec<(u32, u32)>> = vec![Vec::new(); ngens];
    let order: Box<dyn Iterator<Item = usize>> = match fixing {
        Fixing::Plus => Box::new(0..nkeys),
        Fixing::Minus => Box::new((0..nkeys).rev()),
    };
    for k in order {
        let (a, b) = sys.ends[k];
        if a != u32::MAX {
            adj[a as usize].push((b, k as u32));
            adj[b as usize].push((a, k as u32));
        }
    }
    let mut seen = vec![false; ngens];
    let roots: Box<dyn Iterator<Item = usize>> = match fixing {
        Fixing::Plus => Box::new(0..ngens),
        Fixing::Minus => Box::new((0..ngens).rev()),
    };
    for root in roots {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, k) in &adj[u] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    value[k as usize] = free_value;
                    queue.push_back(v as usize);
                }
            }
        }
    }

    // unit propagation
    let mut occurs: Vec<Vec<u32>> = vec![Vec::new(); nkeys];
    for (ci, c) in sys.constraints.iter().enumerate() {
        for &v in &c.vars {
            occurs[v as usize].push(ci as u32);
        }
    }
    let unknowns = |c: &Constraint, value: &[u8]| -> (Vec<u32>, u8) {
        let mut unk = Vec::new();
        let mut acc = c.parity;
        for &v in &c.vars {
            match value[v as usize] {
                UNDEF => {
                    // repeated variables cancel
                    if let Some(pos) = unk.iter().position(|&u| u == v) {
                        unk.remove(pos);
                    } else {
                        unk.push(v);
                    }
                }
                e => acc ^= e,
            }
        }
        (unk, acc)
    };
    let inconsistent = |ci: usize| {
        let c = &sys.constraints[ci];
        Error::Unsolvable(format!(
            "{} constraint on keys {:?} with parity {} cannot be met",
            c.relation, c.vars, c.parity
        ))
    };
    let mut queue: VecDeque<u32> = (0..sys.constraints.len() as u32).collect();
    let mut in_queue = vec![true; sys.constraints.len()];
    while let Some(ci) = queue.pop_front() {
        in_queue[ci as usize] = false;
        let (unk, acc) = unknowns(&sys.constraints[ci as usize], &value);
        match unk.len() {
            0 if acc != 0 => return Err(inconsistent(ci as usize)),
            1 => {
                let v = unk[0] as usize;
                value[v] = acc;
                for &cj in &occurs[v] {
                    if !in_queue[cj as usize] {
                        in_queue[cj as usize] = true;
                        queue.push_back(cj);
                    }
                }
            }
            _ => {}
        }
    }

    // elimination on the residual
    let residual: Vec<usize> = (0..sys.constraints.len())
        .filter(|&ci| !unknowns(&sys.constraints[ci], &value).0.is_empty())
        .collect();
    if !residual.is_empty() {
        let mut cols: Vec<u32> = residual
            .iter()
            .flat_map(|&ci| unknowns(&sys.constraints[ci], &value).0)
            .collect();
        cols.sort_unstable();
        cols.dedup();
        let words = cols.len().div_ceil(64);
        // echelon rows keyed by their lowest column
        let mut pivot_of: Vec<Option<(Vec<u64>, u8)>> = vec![None; cols.len()];
        for &ci in &residual {
            let (unk, mut acc) = unknowns(&sys.constraints[ci], &value);
            let mut row = vec![0u64; words];
            for v in unk {
                let k = cols.binary_search(&v).unwrap();
                row[k / 64] ^= 1 << (k % 64);
            }
            loop {
                let Some(lead) = lowest_bit(&row) else {
                    if acc != 0 {
                        return Err(inconsistent(ci));
                    }
                    break;
                };
                match &pivot_of[lead] {
                    Some((prow, pacc)) => {
                        for (a, b) in row.iter_mut().zip(prow) {
                            *a ^= b;
                        }
                        acc ^= pacc;
                    }
                    None => {
                        pivot_of[lead] = Some((row, acc));
                        break;
                    }
                }
            }
        }
        // free columns take the fixed value; pivots are solved from the highest down
        let mut sol = vec![free_value; cols.len()];
        for col in (0..cols.len()).rev() {
            if let Some((row, acc)) = &pivot_of[col] {
                let mut v = *acc;
                for k in col + 1..cols.len() {
                    if row[k / 64] >> (k % 64) & 1 == 1 {
                        v ^= sol[k];
                    }
                }
                sol[col] = v;
            }
        }
        for (k, &v) in cols.iter().enumerate() {
            value[v as usize] = sol[k];
        }
    }

    for (k, e) in sys.ends.iter().enumerate() {
        if e.0 == u32::MAX {
            value[k] = UNDEF;
        } else if value[k] == UNDEF {
            value[k] = free_value;
        }
    }
    let s = SignAssignment {
        n: sys.n,
        p: sys.p,
        q: sys.q,
        eps: value,
    };
    let violations = verify_axioms(sys, &s);
    if let Some(v) = violations.first() {
        return Err(inconsistent(v.constraint));
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub constraint: usize,
    pub relation: Relation,
    pub vars: Vec<ParallelogramKey>,
}

/// Every constraint that `s` violates (empty means all three axioms hold).
pub fn verify_axioms(sys: &ConstraintSystem, s: &SignAssignment) -> Vec<AxiomViolation> {
    sys.constraints
        .par_iter()
        .enumerate()
        .filter_map(|(ci, c)| {
            let mut acc = c.parity;
            for &v in &c.vars {
                match s.eps[v as usize] {
                    UNDEF => return Some(ci),
                    e => acc ^= e,
                }
            }
            (acc != 0).then_some(ci)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .map(|ci| AxiomViolation {
            constraint: ci,
            relation: sys.constraints[ci].relation,
            vars: sys.constraints[ci].vars.clone(),
        })
        .collect()
}

/// An assignment with the given values, for callers that build signs by
/// other means (restriction, import). Undefined keys stay undefined.
pub fn assignment_from(
    sys: &ConstraintSystem,
    values: impl Fn(ParallelogramKey) -> u8,
) -> SignAssignment {
    let eps = sys
        .ends
        .iter()
        .enumerate()
        .map(|(k, e)| {
            if e.0 == u32::MAX {
                UNDEF
            } else {
                values(k as u32) & 1
            }
        })
        .collect();
    SignAssignment {
        n: sys.n,
        p: sys.p,
        q: sys.q,
        eps,
    }
}

/// Decodes a key into `(initial, i, j, lift)`.
pub fn decode_key(n: usize, p: usize, k: ParallelogramKey) -> (usize, usize, usize, usize) {
    let k = k as usize;
    let lift = k % p;
    let rest = k / p;
    let j = rest % n;
    let rest = rest / n;
    (rest / n, rest % n, j, lift)
}

fn lowest_bit(row: &[u64]) -> Option<usize> {
    row.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}
