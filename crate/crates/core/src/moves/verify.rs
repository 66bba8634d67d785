//! Matrix-exact checks of the identities satisfied by the move maps.

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;

use super::commutation::{h_beta_gamma_beta, phi_beta_gamma, phi_gamma_beta, CombinedDiagram};
use super::stabilization::{restrict_signs, StabilizationSplit};
use crate::algebra::complex::{
    all_gradings, connector_variables, first_witness, phi_x_marker, variable_components,
};
use crate::algebra::{
    build_complex, check_degree, cone_induced_map, homology, is_chain_map, mapping_cone, Monomial,
    PolyMap, Ring, TrigradedComplex, Window,
};
use crate::error::{Error, Result};
use crate::generators::{empty_parallelograms_with, GeneratorSpace, Lattice};
use crate::gradings::{rat, Grader};
use crate::grid_model::GridDiagram;
use crate::signs::{build_constraints, verify_axioms, SignAssignment};

/// Outcome of one identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, outcome: std::result::Result<(), String>) -> Check {
        match outcome {
            Ok(()) => Check {
                name: name.into(),
                passed: true,
                detail: String::new(),
            },
            Err(detail) => Check {
                name: name.into(),
                passed: false,
                detail,
            },
        }
    }
}

fn zero(m: &PolyMap) -> std::result::Result<(), String> {
    match first_witness(m) {
        None => Ok(()),
        Some(w) => Err(format!("{w:?}")),
    }
}

fn witness<T: std::fmt::Debug>(r: std::result::Result<(), T>) -> std::result::Result<(), String> {
    r.map_err(|w| format!("{w:?}"))
}

fn need_signs(ring: Ring, signs: Option<&SignAssignment>) -> Result<()> {
    if ring == Ring::Z && signs.is_none() {
        return Err(Error::Precondition(
            "integer coefficients need a sign assignment".into(),
        ));
    }
    Ok(())
}

/// Chain-map, grading and homotopy identities for a column commutation or switch,
/// plus equality of the tilde homology tables.
pub fn verify_commutation(
    c: &CombinedDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<Vec<Check>> {
    need_signs(ring, signs)?;
    let before = build_complex(&c.before, ring, signs)?;
    let after = build_complex(&c.after, ring, signs)?;
    let phi = phi_beta_gamma(c, ring, signs)?;
    let psi = phi_gamma_beta(c, ring, signs)?;
    let h = h_beta_gamma_beta(c, ring, signs)?;
    let id = PolyMap::identity(ring, before.dim());
    let mut out = vec![
        Check::new(
            "pentagons preserve gradings (forward)",
            witness(check_degree(&before, &after, &phi, 0, 0)),
        ),
        Check::new(
            "pentagons preserve gradings (backward)",
            witness(check_degree(&after, &before, &psi, 0, 0)),
        ),
        Check::new(
            "hexagons raise M by one",
            witness(check_degree(&before, &before, &h, 1, 0)),
        ),
        Check::new(
            "forward map is a chain map",
            witness(is_chain_map(&before, &after, &phi)),
        ),
        Check::new(
            "backward map is a chain map",
            witness(is_chain_map(&after, &before, &psi)),
        ),
    ];
    let sum = psi
        .compose(&phi)
        .add(&before.diff.compose(&h))
        .add(&h.compose(&before.diff));
    let homotopy = match ring {
        Ring::F2 => sum.sub(&id),
        Ring::Z => sum.add(&id),
    };
    out.push(Check::new("hexagon homotopy identity", zero(&homotopy)));
    let (hb, ha) = (
        homology(&before.tilde(), &Window::AllFinite)?,
        homology(&after.tilde(), &Window::AllFinite)?,
    );
    out.push(Check::new(
        "tilde homology unchanged",
        if hb == ha {
            Ok(())
        } else {
            Err(format!("ranks {} vs {}", hb.total_rank(), ha.total_rank()))
        },
    ));
    Ok(out)
}

fn renamed(c: &TrigradedComplex, perm: &[usize]) -> TrigradedComplex {
    let mut r = c.clone();
    r.diff = c.diff.rename_vars(perm);
    for (i, &j) in perm.iter().enumerate() {
        r.components[j] = c.components[i];
        r.zeroed[j] = c.zeroed[i];
    }
    r
}

/// Alexander windows used to compare cone homologies: the bottom of the
/// complex, and one step above it.
fn windows(c: &TrigradedComplex) -> Vec<Window> {
    let amin = c
        .gradings
        .iter()
        .map(|g| g.a.clone())
        .min()
        .unwrap_or_else(|| BigRational::from_integer(0.into()));
    vec![
        Window::Alexander {
            min: amin.clone(),
            max: Some(amin.clone()),
        },
        Window::Alexander {
            min: amin.clone(),
            max: Some(amin + BigRational::one()),
        },
    ]
}

/// The identities comparing a complex with its X:SW or X:NE stabilization.
/// Over Z, `after_signs` is the stabilized grid's assignment; the
/// destabilized grid uses its restriction.
pub fn verify_stabilization(
    split: &StabilizationSplit,
    ring: Ring,
    after_signs: Option<&SignAssignment>,
) -> Result<Vec<Check>> {
    need_signs(ring, after_signs)?;
    let st = &split.stab;
    let mut out = Vec::new();
    let before_signs = match (ring, after_signs) {
        (Ring::Z, Some(s)) => {
            let r = restrict_signs(st, s)?;
            let sys = build_constraints(&st.before)?;
            let bad = verify_axioms(&sys, &r);
            out.push(Check::new(
                "restricted signs satisfy the axioms",
                match bad.first() {
                    None => Ok(()),
                    Some(v) => Err(format!("{} violations, first {v:?}", bad.len())),
                },
            ));
            Some(r)
        }
        _ => None,
    };
    let n = st.before.n();
    let perm = split.var_rename();
    let big = renamed(&build_complex(&st.after, ring, after_signs)?, &perm);
    let small = build_complex(&st.before, ring, before_signs.as_ref())?;
    let comp = variable_components(&st.before)[split.v_prev];
    let small_v = small.adjoin_variable(comp);
    let (iset, nset) = (&split.i_set, &split.n_set);
    let d_ii = big.diff.block(iset, iset);
    let d_in = big.diff.block(iset, nset);
    let d_nn = big.diff.block(nset, nset);
    let d_ni = big.diff.block(nset, iset);
    let ic = big.sub_block(iset);
    let nc = big.sub_block(nset);
    let signed = ring == Ring::Z;
    let flip = |m: &PolyMap| if signed { m.neg() } else { m.clone() };

    out.push(Check::new("no differential from N to I", zero(&d_ni)));

    let shift_ok = iset.iter().zip(&split.e_target).try_for_each(|(&xi, &yi)| {
        let (g, h) = (&big.gradings[xi], &small.gradings[yi]);
        let one = BigRational::one();
        if g.s == h.s && &g.m + &one == h.m && &g.a + &one == h.a {
            Ok(())
        } else {
            Err(format!("generator {xi}: {g:?} vs {h:?}"))
        }
    });
    out.push(Check::new("e shifts gradings by (1,1,0)", shift_ok));

    let e = split.e_map(ring, signed)?;
    out.push(Check::new(
        "e is a chain isomorphism onto C[V_n]",
        zero(&e.compose(&flip(&d_ii)).sub(&small_v.diff.compose(&e))),
    ));

    let phi_xn = split.phi_xn(ring, after_signs)?.rename_vars(&perm);
    let phi_on = split.phi_on(ring, after_signs)?.rename_vars(&perm);
    let phi_onxn = split.phi_on_xn(ring, after_signs)?.rename_vars(&perm);
    out.push(Check::new(
        "Phi_Xn has tridegree (-1,-1,0)",
        witness(check_degree(&nc, &ic, &phi_xn, -1, -1)),
    ));
    out.push(Check::new(
        "Phi_Xn is a chain map",
        zero(&phi_xn.compose(&d_nn).sub(&flip(&d_ii).compose(&phi_xn))),
    ));
    let id_i = PolyMap::identity(ring, iset.len());
    let id_n = PolyMap::identity(ring, nset.len());
    out.push(Check::new(
        "Phi_Xn after Phi_On is the identity on I",
        zero(&flip(&phi_xn.compose(&phi_on)).sub(&id_i)),
    ));
    let eq53 = phi_on
        .compose(&phi_xn)
        .add(&d_nn.compose(&phi_onxn))
        .add(&phi_onxn.compose(&d_nn));
    out.push(Check::new(
        "homotopy identity on N",
        zero(&eq53.sub(&flip(&id_n))),
    ));

    let vn_minus = PolyMap::scalar(ring, iset.len(), Monomial::var(n), 1).sub(&PolyMap::scalar(
        ring,
        iset.len(),
        Monomial::var(split.v_prev),
        1,
    ));
    out.push(Check::new(
        "square with V_n - V_{n-1} commutes",
        zero(&flip(&phi_xn).compose(&d_in).sub(&vn_minus)),
    ));

    // Cone(d_IN) is the stabilized complex; compare with Cone(V_n - V_{n-1}).
    let mut a = ic.clone();
    a.diff = flip(&d_ii);
    let cone1 = mapping_cone(&a, &nc, &d_in)?;
    let small_vn = PolyMap::scalar(ring, small.dim(), Monomial::var(n), 1).sub(&PolyMap::scalar(
        ring,
        small.dim(),
        Monomial::var(split.v_prev),
        1,
    ));
    let cone2 = mapping_cone(&small_v.shifted(1, 1), &small_v, &small_vn)?;
    let induced = cone_induced_map(&d_in, &small_vn, &e, &e.compose(&flip(&phi_xn)))
        .map_err(|err| err.to_string())
        .and_then(|m| witness(is_chain_map(&cone1, &cone2, &m)));
    out.push(Check::new("induced map of cones is a chain map", induced));
    let mut same = Ok(());
    for w in windows(&big) {
        let (h1, h2) = (homology(&cone1, &w)?, homology(&cone2, &w)?);
        if h1 != h2 {
            same = Err(format!(
                "window {w:?}: ranks {} vs {}",
                h1.total_rank(),
                h2.total_rank()
            ));
            break;
        }
    }
    out.push(Check::new("cone homologies agree", same));
    Ok(out)
}

/// Grading laws along every empty parallelogram `r: x -> y`: S is preserved,
/// `M(x) - M(y) = 1 - 2 n_O(r)` and `A(x) - A(y) = n_X(r) - n_O(r)`.
pub fn verify_grading_laws(d: &GridDiagram) -> Result<Vec<Check>> {
    let space = GeneratorSpace::for_diagram(d)?;
    let grader = Grader::new(d);
    let lat = Lattice::for_diagram(d);
    let (grader, lat) = (&grader, &lat);
    let failures: Vec<[Option<String>; 3]> = (0..space.len())
        .into_par_iter()
        .flat_map_iter(|xi| {
            let x = space.generator(xi);
            let gx = grader.triple(&x);
            empty_parallelograms_with(lat, d, &x)
                .into_iter()
                .map(move |r| {
                    let gy = grader.triple(&r.terminal);
                    let (no, nx) = (r.o_total() as i64, r.x_total() as i64);
                    let at = |ok: bool, what: &str| {
                        (!ok).then(|| format!("{what} fails on {x} -> {}", r.terminal))
                    };
                    [
                        at(gx.s == gy.s, "S"),
                        at(&gx.m - &gy.m == rat(1 - 2 * no, 1), "M drop"),
                        at(&gx.a - &gy.a == rat(nx - no, 1), "A drop"),
                    ]
                })
        })
        .filter(|f| f.iter().any(Option::is_some))
        .collect();
    let first = |k: usize| match failures.iter().find_map(|f| f[k].clone()) {
        None => Ok(()),
        Some(msg) => Err(msg),
    };
    Ok(vec![
        Check::new("parallelograms preserve S", first(0)),
        Check::new("M drops by 1 - 2 n_O", first(1)),
        Check::new("A drops by n_X - n_O", first(2)),
    ])
}

/// For every X marking joining two distinct O markings, the map counting
/// parallelograms through that X alone is a homotopy between multiplication
/// by their variables. Over Z the homotopy is `-Phi`, from `V_j` to `V_i`
/// where `O_j` shares the column of the X.
pub fn verify_marker_homotopy(
    d: &GridDiagram,
    ring: Ring,
    signs: Option<&SignAssignment>,
) -> Result<Vec<Check>> {
    need_signs(ring, signs)?;
    let c = build_complex(d, ring, signs)?;
    let mut out = Vec::new();
    for a in 0..d.n() {
        let (i, j) = connector_variables(d, a)?;
        if i == j {
            continue;
        }
        let phi = phi_x_marker(d, ring, signs, a)?;
        let mut sum = c.diff.compose(&phi).add(&phi.compose(&c.diff));
        let (i, j) = if ring == Ring::Z {
            sum = sum.neg();
            (j, i)
        } else {
            (i, j)
        };
        let target = PolyMap::scalar(ring, c.dim(), Monomial::var(i), 1).sub(&PolyMap::scalar(
            ring,
            c.dim(),
            Monomial::var(j),
            1,
        ));
        out.push(Check::new(
            &format!("X_{a} gives V_{i} ~ V_{j}"),
            zero(&sum.sub(&target)),
        ));
    }
    Ok(out)
}

/// Moving the fundamental domain by `(dx, dy)` keeps every generator's
/// gradings and the homology tables.
pub fn verify_shift_invariance(d: &GridDiagram, dx: i64, dy: i64) -> Result<Vec<Check>> {
    let s = d.shifted(dx, dy);
    let (gens, gr) = all_gradings(d)?;
    let grader = Grader::new(&s);
    let graded = gens.iter().zip(&gr).try_for_each(|(x, g)| {
        let h = grader.triple(&x.shifted(d, dx, dy));
        if &h == g {
            Ok(())
        } else {
            Err(format!("{x}: {g:?} vs {h:?}"))
        }
    });
    let a = build_complex(d, Ring::F2, None)?;
    let b = build_complex(&s, Ring::F2, None)?;
    let mut tables = vec![(
        homology(&a.tilde(), &Window::AllFinite)?,
        homology(&b.tilde(), &Window::AllFinite)?,
    )];
    for w in windows(&a) {
        tables.push((homology(&a, &w)?, homology(&b, &w)?));
    }
    let same = match tables.iter().position(|(x, y)| x != y) {
        None => Ok(()),
        Some(k) => Err(format!("table {k} differs")),
    };
    Ok(vec![
        Check::new(&format!("shift ({dx},{dy}) keeps gradings"), graded),
        Check::new(&format!("shift ({dx},{dy}) keeps homology"), same),
    ])
}
