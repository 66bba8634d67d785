//! Smith normal form over `Z` and rank over `F2`.
//!
//! Boundary matrices are first reduced by sparse elimination on unit pivots,
//! which settles most of the rank; whatever is left goes through a dense
//! `BigInt` Smith normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::poly::Ring;

/// Dense Smith normal form with unimodular transforms: `u * a * v = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: Vec<Vec<BigInt>>,
    pub d: Vec<Vec<BigInt>>,
    pub v: Vec<Vec<BigInt>>,
}

impl SmithForm {
    /// Nonzero diagonal entries `d_1 | d_2 | ...`.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        (0..self.d.len().min(self.d.first().map_or(0, |r| r.len())))
            .map(|i| self.d[i][i].clone())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

/// Nonzero invariant factors of an integer matrix, in divisibility order.
pub fn smith_normal_form(m: &[Vec<i64>]) -> Vec<BigInt> {
    let a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    dense_snf(a, false).invariant_factors()
}

pub fn smith_normal_form_with_transforms(m: &[Vec<i64>]) -> SmithForm {
    let a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    dense_snf(a, true)
}

fn identity(n: usize) -> Vec<Vec<BigInt>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

struct Dense {
    a: Vec<Vec<BigInt>>,
    u: Option<Vec<Vec<BigInt>>>,
    v: Option<Vec<Vec<BigInt>>>,
    rows: usize,
    cols: usize,
}

impl Dense {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for r in &mut self.a {
            r.swap(i, j);
        }
        if let Some(v) = &mut self.v {
            for r in v.iter_mut() {
                r.swap(i, j);
            }
        }
    }

    /// row_i -= k * row_j
    fn row_axpy(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let t = &self.a[j][c] * k;
            self.a[i][c] -= t;
        }
        if let Some(u) = &mut self.u {
            let src = u[j].clone();
            for (dst, s) in u[i].iter_mut().zip(&src) {
                *dst -= s * k;
            }
        }
    }

    /// col_i -= k * col_j
    fn col_axpy(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let t = &self.a[r][j] * k;
            self.a[r][i] -= t;
        }
        if let Some(v) = &mut self.v {
            for row in v.iter_mut() {
                let t = &row[j] * k;
                row[i] -= t;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[i] {
                *x = -&*x;
            }
        }
    }
}

fn dense_snf(a: Vec<Vec<BigInt>>, transforms: bool) -> SmithForm {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m = Dense {
        a,
        u: transforms.then(|| identity(rows)),
        v: transforms.then(|| identity(cols)),
        rows,
        cols,
    };
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m.a[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| m.a[i][j].abs() < m.a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap_rows(t, bi);
        m.swap_cols(t, bj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !m.a[i][t].is_zero() {
                    let k = m.a[i][t].div_floor(&m.a[t][t]);
                    m.row_axpy(i, t, &k);
                    if !m.a[i][t].is_zero() {
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if !m.a[t][j].is_zero() {
                    let k = m.a[t][j].div_floor(&m.a[t][t]);
                    m.col_axpy(j, t, &k);
                    if !m.a[t][j].is_zero() {
                        clean = false;
                    }
                }
            }
            if !clean {
                // move the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !m.a[i][t].is_zero() && m.a[i][t].abs() < m.a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !m.a[t][j].is_zero() && m.a[t][j].abs() < m.a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                m.swap_rows(t, best.0);
                m.swap_cols(t, best.1);
                continue;
            }
            // divisibility of the trailing block by the pivot
            let piv = m.a[t][t].clone();
            let bad =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&m.a[i][j] % &piv).is_zero()));
            match bad {
                Some(i) => m.row_axpy(t, i, &BigInt::from(-1)),
                None => break,
            }
        }
        if m.a[t][t].is_negative() {
            m.negate_row(t);
        }
        t += 1;
    }
    SmithForm {
        u: m.u.unwrap_or_default(),
        d: m.a,
        v: m.v.unwrap_or_default(),
    }
}

/// Rank and nonunit invariant factors of a sparse matrix.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatrixInvariants {
    pub rank: usize,
    /// Invariant factors greater than 1 (always empty over `F2`).
    pub torsion: Vec<BigInt>,
}

/// Entries are `(row, col, value)`; duplicates are summed.
pub fn matrix_invariants(
    nrows: usize,
    ncols: usize,
    entries: &[(u32, u32, i64)],
    ring: Ring,
) -> MatrixInvariants {
    match sparse_reduce(nrows, ncols, entries, ring) {
        Some((units, residual)) => {
            if residual.is_empty() || residual[0].is_empty() {
                return MatrixInvariants {
                    rank: units,
                    torsion: Vec::new(),
                };
            }
            let f = dense_snf(residual, false).invariant_factors();
            MatrixInvariants {
                rank: units + f.len(),
                torsion: f.into_iter().filter(|x| !x.is_one()).collect(),
            }
        }
        None => {
            let mut dense = vec![vec![BigInt::zero(); ncols]; nrows];
            for &(r, c, v) in entries {
                dense[r as usize][c as usize] += v;
            }
            let f = dense_snf(dense, false).invariant_factors();
            MatrixInvariants {
                rank: f.len(),
                torsion: f.into_iter().filter(|x| !x.is_one()).collect(),
            }
        }
    }
}

type Row = Vec<(u32, i64)>;

/// Eliminates unit pivots. Returns the pivot count and the dense residual,
/// or `None` on `i64` overflow.
fn sparse_reduce(
    nrows: usize,
    ncols: usize,
    entries: &[(u32, u32, i64)],
    ring: Ring,
) -> Option<(usize, Vec<Vec<BigInt>>)> {
    let mut rows: Vec<Row> = vec![Vec::new(); nrows];
    for &(r, c, v) in entries {
        rows[r as usize].push((c, v));
    }
    for row in &mut rows {
        row.sort_unstable_by_key(|e| e.0);
        let mut merged: Row = Vec::with_capacity(row.len());
        for &(c, v) in row.iter() {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 = last.1.checked_add(v)?,
                _ => merged.push((c, v)),
            }
        }
        for e in merged.iter_mut() {
            e.1 = ring.reduce(e.1);
        }
        merged.retain(|e| e.1 != 0);
        *row = merged;
    }
    let mut col_rows: Vec<Vec<u32>> = vec![Vec::new(); ncols];
    for (r, row) in rows.iter().enumerate() {
        for &(c, _) in row {
            col_rows[c as usize].push(r as u32);
        }
    }
    let mut row_alive = vec![true; nrows];
    let mut units = 0;
    let mut progress = true;
    while progress {
        progress = false;
        for r in 0..nrows {
            if !row_alive[r] || rows[r].is_empty() {
                continue;
            }
            // unit entry whose column is sparsest
            let pick = rows[r]
                .iter()
                .filter(|e| e.1.abs() == 1)
                .min_by_key(|e| col_rows[e.0 as usize].len())
                .copied();
            let Some((pc, pv)) = pick else { continue };
            progress = true;
            units += 1;
            row_alive[r] = false;
            let pivot_row = std::mem::take(&mut rows[r]);
            let others = std::mem::take(&mut col_rows[pc as usize]);
            for &r2 in &others {
                let r2 = r2 as usize;
                if r2 == r || !row_alive[r2] {
                    continue;
                }
                let Ok(k) = rows[r2].binary_search_by_key(&pc, |e| e.0) else {
                    continue;
                };
                let factor = rows[r2][k].1.checked_mul(pv)?;
                let merged = axpy(&rows[r2], &pivot_row, factor, ring)?;
                for &(c, _) in &merged {
                    if rows[r2].binary_search_by_key(&c, |e| e.0).is_err() {
                        col_rows[c as usize].push(r2 as u32);
                    }
                }
                rows[r2] = merged;
            }
        }
    }
    let live_rows: Vec<usize> = (0..nrows)
        .filter(|&r| row_alive[r] && !rows[r].is_empty())
        .collect();
    let mut live_cols: Vec<u32> = live_rows
        .iter()
        .flat_map(|&r| rows[r].iter().map(|e| e.0))
        .collect();
    live_cols.sort_unstable();
    live_cols.dedup();
    let residual = live_rows
        .iter()
        .map(|&r| {
            let mut dense = vec![BigInt::zero(); live_cols.len()];
            for &(c, v) in &rows[r] {
                let k = live_cols.binary_search(&c).unwrap();
                dense[k] = BigInt::from(v);
            }
            dense
        })
        .collect();
    Some((units, residual))
}

/// `a - factor * b`, both sorted by column.
fn axpy(a: &Row, b: &Row, factor: i64, ring: Ring) -> Option<Row> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        let (c, v) = if take_a {
            i += 1;
            a[i - 1]
        } else if take_b {
            j += 1;
            (b[j - 1].0, b[j - 1].1.checked_mul(factor)?.checked_neg()?)
        } else {
            i += 1;
            j += 1;
            (
                a[i - 1].0,
                a[i - 1].1.checked_sub(b[j - 1].1.checked_mul(factor)?)?,
            )
        };
        let v = ring.reduce(v);
        if v != 0 {
            out.push((c, v));
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| x.into()).collect()
    }

    #[test]
    fn known_invariant_factors() {
        assert_eq!(
            smith_normal_form(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]),
            ints(&[2, 6, 12])
        );
        assert_eq!(smith_normal_form(&[vec![0, 0], vec![0, 0]]), ints(&[]));
        assert_eq!(smith_normal_form(&[vec![4, 0], vec![0, 6]]), ints(&[2, 12]));
    }

    #[test]
    fn sparse_path_agrees_with_dense() {
        let m = [vec![1, 0, 3], vec![0, 4, 0], vec![2, 0, 6]];
        let entries: Vec<(u32, u32, i64)> = m
            .iter()
            .enumerate()
            .flat_map(|(i, r)| {
                r.iter()
                    .enumerate()
                    .map(move |(j, &v)| (i as u32, j as u32, v))
            })
            .filter(|e| e.2 != 0)
            .collect();
        let z = matrix_invariants(3, 3, &entries, Ring::Z);
        assert_eq!(z.rank, 2);
        assert_eq!(z.torsion, ints(&[4]));
        let f2 = matrix_invariants(3, 3, &entries, Ring::F2);
        assert_eq!(f2.rank, 1);
        assert!(f2.torsion.is_empty());
    }
}
