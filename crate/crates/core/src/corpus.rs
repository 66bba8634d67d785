//! Test corpora: every small diagram up to translation, and seeded samples.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::algebra::{build_complex, homology, PieceKey, Ring, Window};
use crate::error::Result;
use crate::gradings::fmt_rational;
use crate::grid_model::GridDiagram;
use crate::moves::canonical_form;
use crate::signs::solve_sign_assignment;

/// Lens parameters `(p, q)` with `1 <= p <= p_max`, `0 <= q < p` and
/// `gcd(p, q) = 1`; `L(1, 0)` is the 3-sphere.
pub fn lens_spaces(p_max: i64) -> Vec<(i64, i64)> {
    let mut out = vec![(1, 0)];
    for p in 2..=p_max {
        out.extend((1..p).filter(|q| q.gcd(&p) == 1).map(|q| (p, q)));
    }
    out
}

/// All valid diagrams of grid number `n` on `L(p, q)`, one per translation class.
pub fn exhaustive(n: usize, p: i64, q: i64) -> Vec<GridDiagram> {
    let np = n * p as usize;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut x = vec![0; n];
    let mut o = vec![0; n];
    let total = np.pow(2 * n as u32);
    for code in 0..total {
        let mut c = code;
        for r in 0..n {
            x[r] = c % np;
            c /= np;
            o[r] = c % np;
            c /= np;
        }
        let Ok(d) = GridDiagram::from_rows(p, q, &x, &o) else {
            continue;
        };
        let canon = canonical_form(&d);
        if seen.insert(canon.to_text()) {
            out.push(canon);
        }
    }
    out
}

/// `exhaustive(n, ..)` over every lens space with `p <= p_max`.
pub fn exhaustive_upto(n: usize, p_max: i64) -> Vec<GridDiagram> {
    lens_spaces(p_max)
        .into_iter()
        .flat_map(|(p, q)| exhaustive(n, p, q))
        .collect()
}

/// `count` random valid diagrams of grid number `n` over lens spaces with
/// `p <= p_max`, reproducible from `seed`.
pub fn random_diagrams(n: usize, p_max: i64, count: usize, seed: u64) -> Vec<GridDiagram> {
    let spaces = lens_spaces(p_max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (p, q) = spaces[rng.gen_range(0..spaces.len())];
        let np = n * p as usize;
        let mut xcols: Vec<usize> = (0..n).collect();
        let mut ocols: Vec<usize> = (0..n).collect();
        xcols.shuffle(&mut rng);
        ocols.shuffle(&mut rng);
        let sheet = |rng: &mut ChaCha8Rng| rng.gen_range(0..p as usize) * n;
        let x: Vec<usize> = xcols.iter().map(|&c| c + sheet(&mut rng)).collect();
        let o: Vec<usize> = ocols.iter().map(|&c| c + sheet(&mut rng)).collect();
        debug_assert!(x.iter().chain(&o).all(|&c| c < np));
        if let Ok(d) = GridDiagram::from_rows(p, q, &x, &o) {
            out.push(d);
        }
    }
    out
}

/// Integral tilde homology of one scanned diagram.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanRecord {
    pub diagram: GridDiagram,
    pub total_rank: usize,
    /// Pieces with nontrivial invariant factors.
    pub torsion: Vec<(PieceKey, Vec<BigInt>)>,
}

/// Computes the sign-refined tilde homology of every diagram, in input order.
pub fn scan_torsion(diagrams: &[GridDiagram]) -> Result<Vec<ScanRecord>> {
    diagrams
        .par_iter()
        .map(|d| {
            let signs = solve_sign_assignment(d)?;
            let c = build_complex(d, Ring::Z, Some(&signs))?.tilde();
            let table = homology(&c, &Window::AllFinite)?;
            Ok(ScanRecord {
                diagram: d.clone(),
                total_rank: table.total_rank(),
                torsion: table
                    .pieces
                    .iter()
                    .filter(|(_, h)| !h.torsion.is_empty())
                    .map(|(k, h)| (k.clone(), h.torsion.clone()))
                    .collect(),
            })
        })
        .collect()
}

/// One JSON line per diagram, then a summary line.
pub fn scan_log(records: &[ScanRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let torsion: Vec<_> = r
            .torsion
            .iter()
            .map(|((s, a, m), f)| {
                json!({
                    "S": s,
                    "A": fmt_rational(a),
                    "M": fmt_rational(m),
                    "factors": f.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        let line = json!({
            "schema": 1,
            "diagram": r.diagram.to_text(),
            "total_rank": r.total_rank,
            "torsion": torsion,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    let with_torsion = records.iter().filter(|r| !r.torsion.is_empty()).count();
    let summary = json!({
        "schema": 1,
        "summary": { "diagrams": records.len(), "with_torsion": with_torsion },
    });
    out.push_str(&summary.to_string());
    out.push('\n');
    out
}
