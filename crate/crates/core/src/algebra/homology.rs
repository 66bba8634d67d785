//! Homology of a trigraded complex, one `(S, A, M)` piece at a time.
//!
//! A piece of the minus complex is spanned by the elements `V^k x` with
//! `A(x) - |k| = A` and `M(x) - 2|k| = M`. Pieces are finite, so homology is
//! computed inside an Alexander window `A >= a_min`.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::complex::TrigradedComplex;
use super::poly::{Monomial, Ring};
use super::snf::{matrix_invariants, MatrixInvariants};
use crate::error::{Error, Result};
use crate::gradings::fmt_rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Window {
    /// Every piece; only valid when all variables are specialized away.
    AllFinite,
    /// Pieces with `min <= A` (and `A <= max` when given).
    Alexander {
        min: BigRational,
        max: Option<BigRational>,
    },
}

impl Window {
    pub fn alexander_at_least(min: BigRational) -> Window {
        Window::Alexander { min, max: None }
    }

    fn admits(&self, a: &BigRational) -> bool {
        match self {
            Window::AllFinite => true,
            Window::Alexander { min, max } => a >= min && max.as_ref().is_none_or(|m| a <= m),
        }
    }
}

/// `(S, A, M)`, ordered lexicographically.
pub type PieceKey = (u32, BigRational, BigRational);

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PieceHomology {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HomologyTable {
    /// Only pieces with nonzero homology are stored.
    pub pieces: BTreeMap<PieceKey, PieceHomology>,
}

impl HomologyTable {
    pub fn total_rank(&self) -> usize {
        self.pieces.values().map(|p| p.rank).sum()
    }

    pub fn has_torsion(&self) -> bool {
        self.pieces.values().any(|p| !p.torsion.is_empty())
    }

    pub fn to_json(&self, meta: Value) -> Value {
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .map(|((s, a, m), h)| {
                json!({
                    "S": s,
                    "A": fmt_rational(a),
                    "M": fmt_rational(m),
                    "rank": h.rank,
                    "torsion": h.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "schema": 1, "pieces": pieces, "meta": meta })
    }

    /// Restricts to pieces with Alexander grading in the window.
    pub fn restricted(&self, window: &Window) -> HomologyTable {
        HomologyTable {
            pieces: self
                .pieces
                .iter()
                .filter(|(k, _)| window.admits(&k.1))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }
}

/// All monomials of total degree `deg` in the given variables.
fn monomials(vars: &[usize], deg: u32) -> Vec<Monomial> {
    fn rec(vars: &[usize], deg: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        match vars.split_first() {
            None => {
                if deg == 0 {
                    out.push(*cur);
                }
            }
            Some((&v, rest)) => {
                if rest.is_empty() {
                    cur.0[v] = deg as u8;
                    out.push(*cur);
                    cur.0[v] = 0;
                    return;
                }
                for e in 0..=deg {
                    cur.0[v] = e as u8;
                    rec(rest, deg - e, cur, out);
                }
                cur.0[v] = 0;
            }
        }
    }
    let mut out = Vec::new();
    rec(vars, deg, &mut Monomial::one(), &mut out);
    out
}

struct Piece {
    key: PieceKey,
    elems: Vec<(usize, Monomial)>,
}

pub fn homology(c: &TrigradedComplex, window: &Window) -> Result<HomologyTable> {
    let free: Vec<usize> = (0..c.nvars).filter(|&i| !c.zeroed[i]).collect();
    if matches!(window, Window::AllFinite) && !free.is_empty() {
        return Err(Error::Precondition(
            "the unspecialized complex has infinitely many pieces; give an Alexander window".into(),
        ));
    }
    // basis elements V^k x grouped by piece
    let mut groups: BTreeMap<PieceKey, Vec<(usize, Monomial)>> = BTreeMap::new();
    for (xi, g) in c.gradings.iter().enumerate() {
        let kmax: u32 = match window {
            Window::AllFinite => 0,
            Window::Alexander { min, .. } => {
                if free.is_empty() || &g.a < min {
                    0
                } else {
                    (&g.a - min).floor().to_integer().try_into().unwrap_or(0)
                }
            }
        };
        for k in 0..=kmax {
            let kr = BigRational::from_integer(BigInt::from(k));
            let a = &g.a - &kr;
            if !window.admits(&a) {
                continue;
            }
            let m = &g.m - &kr * BigRational::from_integer(BigInt::from(2));
            let monos = if k == 0 {
                vec![Monomial::one()]
            } else {
                monomials(&free, k)
            };
            if monos.is_empty() {
                continue;
            }
            let entry = groups.entry((g.s, a, m)).or_default();
            entry.extend(monos.into_iter().map(|mono| (xi, mono)));
        }
    }
    let pieces: Vec<Piece> = groups
        .into_iter()
        .map(|(key, elems)| Piece { key, elems })
        .collect();
    let mut locate: HashMap<(usize, Monomial), (usize, u32)> = HashMap::new();
    for (pi, piece) in pieces.iter().enumerate() {
        for (k, e) in piece.elems.iter().enumerate() {
            locate.insert(*e, (pi, k as u32));
        }
    }
    let key_index: HashMap<&PieceKey, usize> = pieces
        .iter()
        .enumerate()
        .map(|(i, p)| (&p.key, i))
        .collect();
    let one = BigRational::one();
    // outgoing boundary of each piece
    let out: Vec<(Option<usize>, MatrixInvariants)> = pieces
        .par_iter()
        .map(|piece| {
            let below = (piece.key.0, piece.key.1.clone(), &piece.key.2 - &one);
            let Some(&bi) = key_index.get(&below) else {
                return (None, MatrixInvariants::default());
            };
            let mut entries = Vec::new();
            for (col, &(xi, mono)) in piece.elems.iter().enumerate() {
                for t in &c.diff.cols[xi] {
                    if t.mono.touches(&c.zeroed) {
                        continue;
                    }
                    let target = (t.tgt as usize, t.mono.mul(&mono));
                    match locate.get(&target) {
                        Some(&(pj, row)) if pj == bi => entries.push((row, col as u32, t.coeff)),
                        Some(_) => {
                            panic!("differential leaves its piece; the complex is not homogeneous")
                        }
                        None => {}
                    }
                }
            }
            let inv =
                matrix_invariants(pieces[bi].elems.len(), piece.elems.len(), &entries, c.ring);
            (Some(bi), inv)
        })
        .collect();
    let mut incoming: Vec<Option<&MatrixInvariants>> = vec![None; pieces.len()];
    for (tgt, inv) in &out {
        if let Some(t) = tgt {
            incoming[*t] = Some(inv);
        }
    }
    let mut table = HomologyTable::default();
    for (pi, piece) in pieces.iter().enumerate() {
        let rank_out = out[pi].1.rank;
        let (rank_in, torsion) = match incoming[pi] {
            Some(inv) => (inv.rank, inv.torsion.clone()),
            None => (0, Vec::new()),
        };
        let rank = piece.elems.len() - rank_out - rank_in;
        let torsion = if c.ring == Ring::Z {
            torsion
        } else {
            Vec::new()
        };
        if rank > 0 || !torsion.is_empty() {
            table
                .pieces
                .insert(piece.key.clone(), PieceHomology { rank, torsion });
        }
    }
    Ok(table)
}

/// Sum of piece dimensions, `(S, A, M) -> dim`, for rank bookkeeping checks.
pub fn piece_dimensions(
    c: &TrigradedComplex,
    window: &Window,
) -> Result<BTreeMap<PieceKey, usize>> {
    let free: Vec<usize> = (0..c.nvars).filter(|&i| !c.zeroed[i]).collect();
    if matches!(window, Window::AllFinite) && !free.is_empty() {
        return Err(Error::Precondition("window required".into()));
    }
    let mut dims = BTreeMap::new();
    for g in &c.gradings {
        let kmax: u32 = match window {
            Window::Alexander { min, .. } if !free.is_empty() && &g.a >= min => {
                (&g.a - min).floor().to_integer().try_into().unwrap_or(0)
            }
            _ => 0,
        };
        for k in 0..=kmax {
            let kr = BigRational::from_integer(BigInt::from(k));
            let a = &g.a - &kr;
            if !window.admits(&a) {
                continue;
            }
            let count = if k == 0 { 1 } else { monomials(&free, k).len() };
            if count == 0 {
                continue;
            }
            let m = &g.m - &kr * BigRational::from_integer(BigInt::from(2));
            *dims.entry((g.s, a, m)).or_insert(0) += count;
        }
    }
    Ok(dims)
}
