//! Monomials in `V_0..V_{n-1}` and sparse module maps with polynomial entries.

use std::fmt;

/// Maximum number of polynomial variables (grid number).
pub const MAX_VARS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ring {
    F2,
    Z,
}

impl Ring {
    pub fn reduce(self, c: i64) -> i64 {
        match self {
            Ring::F2 => c.rem_euclid(2),
            Ring::Z => c,
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ring::F2 => "f2",
            Ring::Z => "z",
        })
    }
}

/// Exponent vector of `V_0^e_0 ... V_15^e_15`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(pub [u8; MAX_VARS]);

impl Monomial {
    pub fn one() -> Self {
        Monomial([0; MAX_VARS])
    }

    pub fn var(i: usize) -> Self {
        let mut m = Self::one();
        m.0[i] = 1;
        m
    }

    pub fn from_exps(exps: &[u8]) -> Self {
        let mut m = Self::one();
        m.0[..exps.len()].copy_from_slice(exps);
        m
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut m = *self;
        for (a, b) in m.0.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Whether any variable flagged in `mask` occurs.
    pub fn touches(&self, mask: &[bool]) -> bool {
        mask.iter().zip(self.0.iter()).any(|(&z, &e)| z && e > 0)
    }

    /// Drops one factor of `V_i` if present.
    pub fn without_one(&self, i: usize) -> Option<Monomial> {
        if self.0[i] == 0 {
            return None;
        }
        let mut m = *self;
        m.0[i] -= 1;
        Some(m)
    }

    pub fn display(&self, nvars: usize) -> String {
        let parts: Vec<String> = (0..nvars)
            .filter(|&i| self.0[i] > 0)
            .map(|i| match self.0[i] {
                1 => format!("V{i}"),
                e => format!("V{i}^{e}"),
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Term {
    pub tgt: u32,
    pub mono: Monomial,
    pub coeff: i64,
}

/// A map between free modules, stored column by column (column = source basis element).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMap {
    pub ring: Ring,
    pub tgt_dim: usize,
    pub cols: Vec<Vec<Term>>,
}

impl PolyMap {
    pub fn zero(ring: Ring, src_dim: usize, tgt_dim: usize) -> Self {
        PolyMap {
            ring,
            tgt_dim,
            cols: vec![Vec::new(); src_dim],
        }
    }

    pub fn src_dim(&self) -> usize {
        self.cols.len()
    }

    /// `coeff * mono * Id`.
    pub fn scalar(ring: Ring, dim: usize, mono: Monomial, coeff: i64) -> Self {
        let mut m = Self::zero(ring, dim, dim);
        for (c, col) in m.cols.iter_mut().enumerate() {
            col.push(Term {
                tgt: c as u32,
                mono,
                coeff,
            });
        }
        m.normalize();
        m
    }

    pub fn identity(ring: Ring, dim: usize) -> Self {
        Self::scalar(ring, dim, Monomial::one(), 1)
    }

    pub fn push(&mut self, src: usize, tgt: usize, mono: Monomial, coeff: i64) {
        self.cols[src].push(Term {
            tgt: tgt as u32,
            mono,
            coeff,
        });
    }

    /// Sorts each column, merges equal terms and drops zeros.
    pub fn normalize(&mut self) {
        let ring = self.ring;
        for col in &mut self.cols {
            normalize_col(ring, col);
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &PolyMap) -> PolyMap {
        assert_eq!(
            other.tgt_dim,
            self.src_dim(),
            "composition dimension mismatch"
        );
        let mut out = PolyMap::zero(self.ring, other.src_dim(), self.tgt_dim);
        for (c, col) in other.cols.iter().enumerate() {
            let dst = &mut out.cols[c];
            for t in col {
                for s in &self.cols[t.tgt as usize] {
                    dst.push(Term {
                        tgt: s.tgt,
                        mono: s.mono.mul(&t.mono),
                        coeff: s.coeff * t.coeff,
                    });
                }
            }
            normalize_col(self.ring, dst);
        }
        out
    }

    pub fn add(&self, other: &PolyMap) -> PolyMap {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &PolyMap) -> PolyMap {
        self.combine(other, -1)
    }

    fn combine(&self, other: &PolyMap, sign: i64) -> PolyMap {
        assert_eq!(self.src_dim(), other.src_dim(), "source dimension mismatch");
        assert_eq!(self.tgt_dim, other.tgt_dim, "target dimension mismatch");
        let mut out = self.clone();
        for (c, col) in other.cols.iter().enumerate() {
            out.cols[c].extend(col.iter().map(|t| Term {
                coeff: sign * t.coeff,
                ..*t
            }));
            normalize_col(self.ring, &mut out.cols[c]);
        }
        out
    }

    pub fn scale(&self, k: i64) -> PolyMap {
        let mut out = self.clone();
        for col in &mut out.cols {
            for t in col.iter_mut() {
                t.coeff *= k;
            }
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> PolyMap {
        self.scale(-1)
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    /// First nonzero entry as `(source, term)`.
    pub fn first_nonzero(&self) -> Option<(usize, Term)> {
        self.cols
            .iter()
            .enumerate()
            .find_map(|(c, col)| col.first().map(|t| (c, *t)))
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    /// Restricts to the given source and target subsets (given as index lists, in order).
    pub fn block(&self, src: &[usize], tgt: &[usize]) -> PolyMap {
        let mut pos = vec![u32::MAX; self.tgt_dim];
        for (k, &t) in tgt.iter().enumerate() {
            pos[t] = k as u32;
        }
        let mut out = PolyMap::zero(self.ring, src.len(), tgt.len());
        for (k, &s) in src.iter().enumerate() {
            out.cols[k] = self.cols[s]
                .iter()
                .filter(|t| pos[t.tgt as usize] != u32::MAX)
                .map(|t| Term {
                    tgt: pos[t.tgt as usize],
                    ..*t
                })
                .collect();
        }
        out
    }

    /// Renumbers targets through `map` (old target -> new target) into a space of dimension `tgt_dim`.
    pub fn retarget(&self, map: &[usize], tgt_dim: usize) -> PolyMap {
        let mut out = PolyMap::zero(self.ring, self.src_dim(), tgt_dim);
        for (c, col) in self.cols.iter().enumerate() {
            out.cols[c] = col
                .iter()
                .map(|t| Term {
                    tgt: map[t.tgt as usize] as u32,
                    ..*t
                })
                .collect();
        }
        out.normalize();
        out
    }

    /// Renumbers sources: new column `k` is old column `order[k]`.
    pub fn reorder_sources(&self, order: &[usize]) -> PolyMap {
        PolyMap {
            ring: self.ring,
            tgt_dim: self.tgt_dim,
            cols: order.iter().map(|&s| self.cols[s].clone()).collect(),
        }
    }

    /// Block matrix `[[a, b], [c, d]]` acting on `S1 ⊕ S2 → T1 ⊕ T2`.
    pub fn from_blocks(a: &PolyMap, b: &PolyMap, c: &PolyMap, d: &PolyMap) -> PolyMap {
        let (s1, s2) = (a.src_dim(), b.src_dim());
        let (t1, t2) = (a.tgt_dim, c.tgt_dim);
        assert_eq!(c.src_dim(), s1);
        assert_eq!(d.src_dim(), s2);
        assert_eq!(b.tgt_dim, t1);
        assert_eq!(d.tgt_dim, t2);
        let mut out = PolyMap::zero(a.ring, s1 + s2, t1 + t2);
        for k in 0..s1 {
            let col = &mut out.cols[k];
            col.extend(a.cols[k].iter().copied());
            col.extend(c.cols[k].iter().map(|t| Term {
                tgt: t.tgt + t1 as u32,
                ..*t
            }));
        }
        for k in 0..s2 {
            let col = &mut out.cols[s1 + k];
            col.extend(b.cols[k].iter().copied());
            col.extend(d.cols[k].iter().map(|t| Term {
                tgt: t.tgt + t1 as u32,
                ..*t
            }));
        }
        out.normalize();
        out
    }

    /// Renames variables: `V_i` becomes `V_{perm[i]}`.
    pub fn rename_vars(&self, perm: &[usize]) -> PolyMap {
        let mut out = self.clone();
        for col in &mut out.cols {
            for t in col.iter_mut() {
                let mut m = Monomial::one();
                for (i, &e) in t.mono.0.iter().enumerate().take(perm.len()) {
                    m.0[perm[i]] += e;
                }
                t.mono = m;
            }
        }
        out.normalize();
        out
    }

    /// Sets the flagged variables to zero.
    pub fn specialize(&self, zeroed: &[bool]) -> PolyMap {
        let mut out = self.clone();
        for col in &mut out.cols {
            col.retain(|t| !t.mono.touches(zeroed));
        }
        out
    }
}

fn normalize_col(ring: Ring, col: &mut Vec<Term>) {
    col.sort_unstable_by_key(|a| (a.tgt, a.mono));
    let mut out: Vec<Term> = Vec::with_capacity(col.len());
    for t in col.drain(..) {
        match out.last_mut() {
            Some(last) if last.tgt == t.tgt && last.mono == t.mono => last.coeff += t.coeff,
            _ => out.push(t),
        }
    }
    for t in out.iter_mut() {
        t.coeff = ring.reduce(t.coeff);
    }
    out.retain(|t| t.coeff != 0);
    *col = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomials_multiply_and_print() {
        let m = Monomial::var(0)
            .mul(&Monomial::var(2))
            .mul(&Monomial::var(2));
        assert_eq!(m.degree(), 3);
        assert_eq!(m.display(3), "V0*V2^2");
        assert_eq!(m.without_one(2), Some(Monomial::from_exps(&[1, 0, 1])));
        assert_eq!(Monomial::one().without_one(1), None);
        assert_eq!(Monomial::one().display(4), "1");
    }

    #[test]
    fn f2_cancels_and_z_keeps_signs() {
        for (ring, expect_zero) in [(Ring::F2, true), (Ring::Z, false)] {
            let mut a = PolyMap::zero(ring, 1, 1);
            a.push(0, 0, Monomial::var(0), 1);
            let doubled = a.add(&a);
            assert_eq!(doubled.is_zero(), expect_zero, "{ring}");
            assert!(a.sub(&a).is_zero());
        }
    }

    #[test]
    fn composition_multiplies_monomials() {
        let mut f = PolyMap::zero(Ring::Z, 1, 2);
        f.push(0, 0, Monomial::var(0), 2);
        f.push(0, 1, Monomial::one(), -1);
        let mut g = PolyMap::zero(Ring::Z, 2, 1);
        g.push(0, 0, Monomial::var(1), 3);
        g.push(1, 0, Monomial::var(0), 1);
        let gf = g.compose(&f);
        let mut want = PolyMap::zero(Ring::Z, 1, 1);
        want.push(0, 0, Monomial::from_exps(&[1, 1]), 6);
        want.push(0, 0, Monomial::var(0), -1);
        want.normalize();
        assert_eq!(gf, want);
        assert_eq!(PolyMap::identity(Ring::Z, 2).compose(&f), f);
    }
}
