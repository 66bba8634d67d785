//! Brute-force reference computations, independent of the library internals.

use std::collections::HashMap;

use num_integer::Integer;

use lensgrid::{Generator, GridDiagram};

/// `(terminal, n_O, n_X)` of one empty parallelogram.
pub type Summary = (Generator, Vec<u32>, Vec<u32>);

/// Empty embedded parallelograms out of `x`, found as rectangles in the
/// p-fold cover whose deck translates are pairwise disjoint.
pub fn cover_parallelograms(d: &GridDiagram, x: &Generator) -> Vec<Summary> {
    let cover = d.lift_to_cover();
    let m = cover.size as i64;
    let (p, n) = (d.p(), d.n());
    let wrap = |a: i64, b: i64| (a.rem_euclid(m) as usize, b.rem_euclid(m) as usize);
    let mut down = HashMap::new();
    for c1 in 0..d.np() {
        for c2 in 0..n {
            for k in 0..p {
                down.insert(d.cover_point(c1, c2, k), (c1, c2));
            }
        }
    }
    let lift: Vec<(usize, usize)> = x
        .points()
        .iter()
        .flat_map(|&(c1, c2)| (0..p).map(move |k| d.cover_point(c1, c2, k)))
        .collect();
    let deck = |pt: (usize, usize), k: usize| {
        wrap(
            pt.0 as i64 + (k * cover.deck.0) as i64,
            pt.1 as i64 + (k * cover.deck.1) as i64,
        )
    };
    let mut out = Vec::new();
    // one deck translate of each rectangle: SW corner on the base sheet
    for (u, v) in x
        .points()
        .into_iter()
        .map(|(c1, c2)| d.cover_point(c1, c2, 0))
    {
        for w in 1..m {
            for h in 1..m {
                let ne = wrap(u as i64 + w, v as i64 + h);
                if !lift.contains(&ne) {
                    continue;
                }
                let cells: Vec<(usize, usize)> = (0..w)
                    .flat_map(|i| (0..h).map(move |j| wrap(u as i64 + i, v as i64 + j)))
                    .collect();
                let interior = (1..w)
                    .any(|i| (1..h).any(|j| lift.contains(&wrap(u as i64 + i, v as i64 + j))));
                if interior {
                    continue;
                }
                let mut all_cells: Vec<(usize, usize)> = (0..p)
                    .flat_map(|k| cells.iter().map(move |&c| deck(c, k)))
                    .collect();
                all_cells.sort();
                all_cells.dedup();
                if all_cells.len() != cells.len() * p {
                    continue;
                }
                let (se, nw) = (wrap(u as i64 + w, v as i64), wrap(u as i64, v as i64 + h));
                let mut pts: Vec<(usize, usize)> = x.points();
                let swap =
                    |pt: (usize, usize), to: (usize, usize), pts: &mut Vec<(usize, usize)>| {
                        let i = pts.iter().position(|&q| q == down[&pt]).unwrap();
                        pts[i] = down[&to];
                    };
                let (sw_down, ne_down) = (down[&(u, v)], down[&ne]);
                if sw_down.1 == ne_down.1 {
                    continue;
                }
                swap((u, v), se, &mut pts);
                swap(ne, nw, &mut pts);
                let Some(y) = Generator::from_points(n, &pts) else {
                    continue;
                };
                let count = |marks: &[(usize, usize)], row_of: &dyn Fn(usize) -> usize| {
                    let mut c = vec![0u32; n];
                    for &mk in marks {
                        if cells.contains(&mk) {
                            c[row_of(mk.1)] += 1;
                        }
                    }
                    c
                };
                let row_of = |c2: usize| c2 % n;
                out.push((y, count(&cover.o, &row_of), count(&cover.x, &row_of)));
            }
        }
    }
    out.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    out
}

/// Determinantal divisors `d_k` (gcd of all `k x k` minors) until the first zero.
///
/// Minors are built by Laplace expansion along the last chosen row, keyed by
/// row and column bitmasks; entries stay below Hadamard's bound, well inside i128.
pub fn determinantal_divisors(m: &[Vec<i64>]) -> Vec<i128> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut level: HashMap<(u16, u16), i128> = HashMap::from([((0, 0), 1)]);
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut next: HashMap<(u16, u16), i128> = HashMap::new();
        for (&(rmask, cmask), &minor) in &level {
            if minor == 0 {
                continue;
            }
            // add a row above all chosen rows, and any free column
            let top = 16 - rmask.leading_zeros() as usize;
            for (r, row) in m.iter().enumerate().skip(top) {
                for c in (0..cols).filter(|c| cmask & (1 << c) == 0) {
                    let before = (cmask & ((1 << c) - 1)).count_ones() as usize;
                    let sign = if (k - 1 + before).is_multiple_of(2) {
                        1
                    } else {
                        -1
                    };
                    *next.entry((rmask | 1 << r, cmask | 1 << c)).or_insert(0) +=
                        sign * row[c] as i128 * minor;
                }
            }
        }
        let g = next.values().fold(0i128, |g, v| g.gcd(v));
        if g == 0 {
            break;
        }
        out.push(g);
        level = next;
    }
    out
}

/// Twice the symmetrized count `J(A, B)` of pairs with `a < b` in both coordinates.
fn j2(a: &[(i64, i64)], b: &[(i64, i64)]) -> i64 {
    let below = |u: &[(i64, i64)], v: &[(i64, i64)]| {
        u.iter()
            .map(|p| v.iter().filter(|q| p.0 < q.0 && p.1 < q.1).count() as i64)
            .sum::<i64>()
    };
    below(a, b) + below(b, a)
}

/// Maslov grading `J(x - M, x - M) + 1` in doubled coordinates (cells sit at odd ones).
pub fn classical_maslov2(x: &[(i64, i64)], marks: &[(i64, i64)]) -> i64 {
    // J is bilinear; doubling coordinates does not change any comparison
    (j2(x, x) - 2 * j2(x, marks) + j2(marks, marks)) / 2 + 1
}
