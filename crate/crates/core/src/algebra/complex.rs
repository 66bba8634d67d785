//! Trigraded chain complexes over `F2[V]` and `Z[V]`.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::poly::{Monomial, PolyMap, Ring, Term, MAX_VARS};
use crate::error::{Error, Result};
use crate::generators::{shared_lattice, Generator, GeneratorSpace, Parallelogram, Rect};
use crate::gradings::{Grader, GradingTriple};
use crate::grid_model::GridDiagram;
use crate::signs::SignAssignment;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigradedComplex {
    pub ring: Ring,
    pub nvars: usize,
    /// Variables set to zero by specialization.
    pub zeroed: Vec<bool>,
    /// Basis labels; cones and shifted copies may repeat generators.
    pub generators: Vec<Generator>,
    pub gradings: Vec<GradingTriple>,
    pub diff: PolyMap,
    /// Link component of each variable.
    pub components: Vec<usize>,
}

/// An offending coefficient: `source -> coeff * mono * target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub source: usize,
    pub target: usize,
    pub mono: Monomial,
    pub coeff: i64,
}

impl Witness {
    fn from_term(source: usize, t: Term) -> Witness {
        Witness {
            source,
            target: t.tgt as usize,
            mono: t.mono,
            coeff: t.coeff,
        }
    }
}

pub fn first_witness(m: &PolyMap) -> Option<Witness> {
    m.first_nonzero().map(|(s, t)| Witness::from_term(s, t))
}

pub fn monomial_of(n_o: &[u8]) -> Monomial {
    assert!(
        n_o.len() <= MAX_VARS,
        "at most {MAX_VARS} variables are supported"
    );
    Monomial::from_exps(n_o)
}

/// Monomial weight of a parallelogram's contribution, or `None` to skip it.
pub type Weight<'a> = dyn Fn(&Parallelogram) -> Option<Monomial> + Sync + 'a;

/// Sums `[sign] * weight(r) * terminal(r)` over the parallelograms out of every generator.
pub fn parallelogram_map(
    d: &GridDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
    empty_only: bool,
    weight: &Weight,
) -> Result<PolyMap> {
    let space = GeneratorSpace::for_diagram(d)?;
    if ring == Ring::Z {
        match signs {
            None => {
                return Err(Error::Precondition(
                    "integer coefficients need a sign assignment".into(),
                ))
            }
            Some(s) if !s.matches(d) => {
                return Err(Error::Precondition(
                    "sign assignment belongs to a different grid".into(),
                ))
            }
            _ => {}
        }
    }
    let lat = shared_lattice(d.n(), d.p(), d.q());
    let cols: Vec<Vec<Term>> = (0..space.len())
        .into_par_iter()
        .map(|xi| {
            let x = space.generator(xi);
            let mut col = Vec::new();
            for raw in lat.parallelograms_from(&x, empty_only) {
                let (n_o, n_x) = count_markings(d, &lat, &raw.rect);
                let r = Parallelogram {
                    initial: x.clone(),
                    terminal: raw.terminal,
                    rows: raw.rows,
                    lift: raw.lift,
                    rect: raw.rect,
                    n_o,
                    n_x,
                };
                let Some(mono) = weight(&r) else { continue };
                let coeff = match ring {
                    Ring::F2 => 1,
                    Ring::Z => signs.unwrap().sign(xi, r.rows.0, r.rows.1, r.lift),
                };
                col.push(Term {
                    tgt: space.index(&r.terminal) as u32,
                    mono,
                    coeff,
                });
            }
            col
        })
        .collect();
    let mut m = PolyMap {
        ring,
        tgt_dim: space.len(),
        cols,
    };
    m.normalize();
    Ok(m)
}

fn count_markings(
    d: &GridDiagram,
    lat: &crate::generators::Lattice,
    rect: &Rect,
) -> (Vec<u8>, Vec<u8>) {
    let n = d.n();
    (
        (0..n)
            .map(|r| lat.cell_inside((d.o_c1(r), r), rect) as u8)
            .collect(),
        (0..n)
            .map(|r| lat.cell_inside((d.x_c1(r), r), rect) as u8)
            .collect(),
    )
}

/// Gradings of every generator, in index order.
pub fn all_gradings(d: &GridDiagram) -> Result<(Vec<Generator>, Vec<GradingTriple>)> {
    let space = GeneratorSpace::for_diagram(d)?;
    let grader = Grader::new(d);
    let gens: Vec<Generator> = space.iter().collect();
    let gr = gens.par_iter().map(|x| grader.triple(x)).collect();
    Ok((gens, gr))
}

/// Link component index of each variable `V_i` (the O marking in row `i`).
pub fn variable_components(d: &GridDiagram) -> Vec<usize> {
    let mut comp = vec![0; d.n()];
    for (k, class) in d.link_components().iter().enumerate() {
        for &r in class {
            comp[r] = k;
        }
    }
    comp
}

/// The minus complex with the X-avoiding differential.
pub fn build_complex(
    d: &GridDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<TrigradedComplex> {
    let diff = parallelogram_map(d, ring, signs, true, &|r| {
        (r.x_total() == 0).then(|| monomial_of(&r.n_o))
    })?;
    let (generators, gradings) = all_gradings(d)?;
    Ok(TrigradedComplex {
        ring,
        nvars: d.n(),
        zeroed: vec![false; d.n()],
        generators,
        gradings,
        diff,
        components: variable_components(d),
    })
}

/// `(i, j)` such that `X_a` shares a row with `O_i` and a column with `O_j`.
pub fn connector_variables(d: &GridDiagram, a: usize) -> Result<(usize, usize)> {
    if a >= d.n() {
        return Err(Error::Precondition(format!("X marking {a} does not exist")));
    }
    Ok((a, d.o_row_in_column(d.x_c1(a) % d.n())))
}

/// Homotopy between multiplication by `V_i` and `V_j`, counting parallelograms
/// whose only X is `X_a`.
pub fn phi_x_marker(
    d: &GridDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
    a: usize,
) -> Result<PolyMap> {
    connector_variables(d, a)?;
    parallelogram_map(d, ring, signs, true, &|r| {
        (r.x_total() == 1 && r.n_x[a] == 1).then(|| monomial_of(&r.n_o))
    })
}

impl TrigradedComplex {
    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// `d ∘ d = 0`, or the first nonzero coefficient of `d ∘ d`.
    pub fn verify_d_squared(&self) -> std::result::Result<(), Witness> {
        match first_witness(&self.diff.compose(&self.diff)) {
            None => Ok(()),
            Some(w) => Err(w),
        }
    }

    /// Checks that the differential preserves S and A and drops M by one.
    pub fn check_homogeneous(&self) -> std::result::Result<(), Witness> {
        check_degree(self, self, &self.diff, -1, 0)
    }

    pub fn specialize(&self, zeroed: &[usize]) -> TrigradedComplex {
        let mut mask = self.zeroed.clone();
        for &i in zeroed {
            mask[i] = true;
        }
        TrigradedComplex {
            diff: self.diff.specialize(&mask),
            zeroed: mask,
            ..self.clone()
        }
    }

    /// All variables set to zero.
    pub fn tilde(&self) -> TrigradedComplex {
        self.specialize(&(0..self.nvars).collect::<Vec<_>>())
    }

    pub fn is_fully_specialized(&self) -> bool {
        self.zeroed.iter().all(|&z| z)
    }

    /// The same complex over one more variable, attached to the given component.
    pub fn adjoin_variable(&self, component: usize) -> TrigradedComplex {
        let mut c = self.clone();
        c.nvars += 1;
        assert!(
            c.nvars <= MAX_VARS,
            "at most {MAX_VARS} variables are supported"
        );
        c.zeroed.push(false);
        c.components.push(component);
        c
    }

    /// `C⟦dm, da, 0⟧`: every grading lowered by the shift, so that degree `r`
    /// of the result is degree `r + shift` of `C`.
    pub fn shifted(&self, dm: i64, da: i64) -> TrigradedComplex {
        let (dm, da) = (
            BigRational::from_integer(BigInt::from(dm)),
            BigRational::from_integer(BigInt::from(da)),
        );
        TrigradedComplex {
            gradings: self
                .gradings
                .iter()
                .map(|g| GradingTriple {
                    s: g.s,
                    m: &g.m - &dm,
                    a: &g.a - &da,
                })
                .collect(),
            ..self.clone()
        }
    }

    /// The complex restricted to a basis subset closed under the differential
    /// in the sense that `diff` is block-triangular; used for splittings.
    pub fn sub_block(&self, basis: &[usize]) -> TrigradedComplex {
        TrigradedComplex {
            generators: basis.iter().map(|&i| self.generators[i].clone()).collect(),
            gradings: basis.iter().map(|&i| self.gradings[i].clone()).collect(),
            diff: self.diff.block(basis, basis),
            ..self.clone()
        }
    }
}

/// Checks that `f: src -> tgt` preserves S and shifts `(M, A)` by `(dm, da)`,
/// counting `V_i` as `(-2, -1)`.
pub fn check_degree(
    src: &TrigradedComplex,
    tgt: &TrigradedComplex,
    f: &PolyMap,
    dm: i64,
    da: i64,
) -> std::result::Result<(), Witness> {
    let (dm, da) = (BigInt::from(dm), BigInt::from(da));
    for (s, col) in f.cols.iter().enumerate() {
        let gs = &src.gradings[s];
        for t in col {
            let gt = &tgt.gradings[t.tgt as usize];
            let deg = BigInt::from(t.mono.degree());
            let m_ok = &gt.m - BigRational::from_integer(&deg * 2)
                == &gs.m + BigRational::from_integer(dm.clone());
            let a_ok = &gt.a - BigRational::from_integer(deg.clone())
                == &gs.a + BigRational::from_integer(da.clone());
            if gt.s != gs.s || !m_ok || !a_ok {
                return Err(Witness::from_term(s, *t));
            }
        }
    }
    Ok(())
}

/// `f ∘ d_src = d_tgt ∘ f`.
pub fn is_chain_map(
    src: &TrigradedComplex,
    tgt: &TrigradedComplex,
    f: &PolyMap,
) -> std::result::Result<(), Witness> {
    match first_witness(&f.compose(&src.diff).sub(&tgt.diff.compose(f))) {
        None => Ok(()),
        Some(w) => Err(w),
    }
}

/// `f ∘ d_src = -d_tgt ∘ f`.
pub fn is_anti_chain_map(
    src: &TrigradedComplex,
    tgt: &TrigradedComplex,
    f: &PolyMap,
) -> std::result::Result<(), Witness> {
    match first_witness(&f.compose(&src.diff).add(&tgt.diff.compose(f))) {
        None => Ok(()),
        Some(w) => Err(w),
    }
}

/// Cone of a chain map `f: a -> b` that lowers M by one and preserves S and A.
/// The differential is `[[-d_a, 0], [f, d_b]]` and gradings are kept.
pub fn mapping_cone(
    a: &TrigradedComplex,
    b: &TrigradedComplex,
    f: &PolyMap,
) -> Result<TrigradedComplex> {
    if a.ring != b.ring || a.nvars != b.nvars {
        return Err(Error::Precondition(
            "cone of maps between different rings".into(),
        ));
    }
    if f.src_dim() != a.dim() || f.tgt_dim != b.dim() {
        return Err(Error::Precondition("cone map has the wrong shape".into()));
    }
    if let Err(w) = is_chain_map(a, b, f) {
        return Err(Error::Precondition(format!(
            "cone input is not a chain map (witness {w:?})"
        )));
    }
    if let Err(w) = check_degree(a, b, f, -1, 0) {
        return Err(Error::Precondition(format!(
            "cone input is not homogeneous of degree (-1,0) (witness {w:?})"
        )));
    }
    let zero = PolyMap::zero(a.ring, b.dim(), a.dim());
    let diff = PolyMap::from_blocks(&a.diff.neg(), &zero, f, &b.diff);
    Ok(TrigradedComplex {
        ring: a.ring,
        nvars: a.nvars,
        zeroed: a
            .zeroed
            .iter()
            .zip(&b.zeroed)
            .map(|(x, y)| *x || *y)
            .collect(),
        generators: a.generators.iter().chain(&b.generators).cloned().collect(),
        gradings: a.gradings.iter().chain(&b.gradings).cloned().collect(),
        diff,
        components: a.components.clone(),
    })
}

/// Map `Cone(f) -> Cone(g)` induced by a commuting square `g ∘ phi = phi2 ∘ f`.
pub fn cone_induced_map(
    f: &PolyMap,
    g: &PolyMap,
    phi: &PolyMap,
    phi2: &PolyMap,
) -> Result<PolyMap> {
    if let Some(w) = first_witness(&g.compose(phi).sub(&phi2.compose(f))) {
        return Err(Error::Precondition(format!(
            "square does not commute (witness {w:?})"
        )));
    }
    let upper = PolyMap::zero(phi.ring, phi2.src_dim(), phi.tgt_dim);
    let lower = PolyMap::zero(phi.ring, phi.src_dim(), phi2.tgt_dim);
    Ok(PolyMap::from_blocks(phi, &upper, &lower, phi2))
}
