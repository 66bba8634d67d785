#![allow(dead_code)]

pub mod oracle;

use lensgrid::corpus::{exhaustive_upto, random_diagrams};
use lensgrid::GridDiagram;

/// The three-marking link in L(5,2) used as the worked example throughout.
pub fn l52_knot() -> GridDiagram {
    GridDiagram::from_rows(5, 2, &[10, 2, 0], &[9, 13, 8]).unwrap()
}

pub const RANDOM_SEED: u64 = 0x5eed_2024;

/// Every n = 2 diagram with p <= 5 up to translation, then 100 seeded n = 3 ones.
pub fn corpus() -> Vec<GridDiagram> {
    let mut all = exhaustive_upto(2, 5);
    all.extend(random_diagrams(3, 5, 100, RANDOM_SEED));
    all
}
