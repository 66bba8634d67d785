//! Grid homology of links in lens spaces.
//!
//! Diagrams live in sheared lattice coordinates (see [`grid_model`]); the
//! chain complexes, gradings, sign assignments and grid-move maps are all
//! computed exactly over `F2` or `Z`.

pub mod algebra;
pub mod corpus;
pub mod error;
pub mod generators;
pub mod gradings;
pub mod grid_model;
pub mod moves;
pub mod signs;

pub use error::{Error, Result};
pub use generators::{Generator, GeneratorSpace, Lattice, Parallelogram};
pub use gradings::{Grader, GradingTriple};
pub use grid_model::{GridDiagram, LensParams, Marking, RawDiagram, Violation};
