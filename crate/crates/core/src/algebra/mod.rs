//! Polynomial module maps, trigraded complexes, homology and Smith normal form.

pub mod complex;
pub mod homology;
pub mod poly;
pub mod snf;

pub use complex::{
    build_complex, check_degree, cone_induced_map, is_anti_chain_map, is_chain_map, mapping_cone,
    parallelogram_map, phi_x_marker, TrigradedComplex, Witness,
};
pub use homology::{homology, HomologyTable, PieceHomology, PieceKey, Window};
pub use poly::{Monomial, PolyMap, Ring, Term};
pub use snf::{smith_normal_form, smith_normal_form_with_transforms, SmithForm};
