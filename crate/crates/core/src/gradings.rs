//! Spin^c, Maslov and Alexander gradings.
//!
//! Maslov-type counts are taken on the p-fold cover in doubled coordinates,
//! so lattice points are even and marking centers odd.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::generators::{special_generator_xo, Generator};
use crate::grid_model::GridDiagram;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GradingTriple {
    pub s: u32,
    pub m: BigRational,
    pub a: BigRational,
}

/// `num/den` in lowest terms (`den` omitted when 1).
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let den: BigInt = b.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(a.trim().parse().ok()?, den))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `floor(r) mod 2`, the parity used for sign twists by a rational grading.
pub fn floor_parity(r: &BigRational) -> u8 {
    let f = r.floor().to_integer();
    if f.is_even() {
        0
    } else {
        1
    }
}

/// Number of pairs `(a, b)` with `a` strictly below and left of `b`.
pub fn i_count(a: &[(i64, i64)], b: &[(i64, i64)]) -> u64 {
    let mut c = 0;
    for &(a1, a2) in a {
        for &(b1, b2) in b {
            if a1 < b1 && a2 < b2 {
                c += 1;
            }
        }
    }
    c
}

/// Spin^c grading in `Z/p`.
pub fn spin_c(d: &GridDiagram, x: &Generator) -> u32 {
    let p = d.p() as i64;
    let xo = special_generator_xo(d);
    let tilde: i64 = (0..d.n())
        .map(|i| x.pcoords[i] as i64 - xo.pcoords[i] as i64)
        .sum();
    (tilde + d.q() - 1).rem_euclid(p) as u32
}

/// `S~`, the spin^c grading before the `q - 1` offset.
pub fn spin_c_tilde(d: &GridDiagram, x: &Generator) -> u32 {
    let p = d.p() as i64;
    let xo = special_generator_xo(d);
    let tilde: i64 = (0..d.n())
        .map(|i| x.pcoords[i] as i64 - xo.pcoords[i] as i64)
        .sum();
    tilde.rem_euclid(p) as u32
}

/// Correction term by Euclidean recursion; requires `0 <= q < p`, `q = 0`
/// only for `p = 1`, and `0 <= i < p + q`.
///
/// `d(p, q, i) = (pq - (2i + 1 - p - q)^2) / (4pq) - d(q, p mod q, i mod q)`.
pub fn d_invariant(p: i64, q: i64, i: i64) -> Result<BigRational> {
    if p < 1 || q < 0 || q >= p.max(1) || (q == 0 && p != 1) || i < 0 || num_integer::gcd(p, q) != 1
    {
        return Err(Error::Precondition(format!(
            "d-invariant arguments ({p},{q},{i}) are not normalized"
        )));
    }
    Ok(d_cached(p, q, i))
}

fn d_cached(p: i64, q: i64, i: i64) -> BigRational {
    if p == 1 {
        return BigRational::zero();
    }
    type Memo = Mutex<HashMap<(i64, i64, i64), BigRational>>;
    static MEMO: OnceLock<Memo> = OnceLock::new();
    let memo = MEMO.get_or_init(Default::default);
    if let Some(v) = memo.lock().unwrap().get(&(p, q, i)) {
        return v.clone();
    }
    let k = 2 * i + 1 - p - q;
    let head = rat(p * q - k * k, 4 * p * q);
    let v = head - d_cached(q, p % q, i % q);
    memo.lock().unwrap().insert((p, q, i), v.clone());
    v
}

/// The normalized arguments `(p, q mod p, (q - 1) mod p)` of the correction term.
pub fn correction_args(p: i64, q: i64) -> (i64, i64, i64) {
    (p, q.rem_euclid(p), (q - 1).rem_euclid(p))
}

pub fn correction_term(d: &GridDiagram) -> BigRational {
    let (p, q, i) = correction_args(d.p() as i64, d.q());
    d_invariant(p, q, i).expect("diagram parameters are coprime")
}

/// Doubled cover coordinates of a set of fundamental-domain lattice points.
pub fn lift_points2(d: &GridDiagram, pts: &[(usize, usize)], offset: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::with_capacity(pts.len() * d.p());
    for &(c1, c2) in pts {
        for k in 0..d.p() {
            let (a, b) = d.cover_point(c1, c2, k);
            out.push((2 * a as i64 + offset, 2 * b as i64 + offset));
        }
    }
    out
}

/// Grading evaluator with the marking lifts precomputed.
#[derive(Clone, Debug)]
pub struct Grader {
    p: i64,
    q: i64,
    n: usize,
    ell: usize,
    xo_pcoords: Vec<usize>,
    o_lift: Vec<(i64, i64)>,
    x_lift: Vec<(i64, i64)>,
    i_oo: i64,
    i_xx: i64,
    offset: BigRational,
    diagram: GridDiagram,
}

impl Grader {
    pub fn new(d: &GridDiagram) -> Grader {
        let o_pts: Vec<_> = (0..d.n()).map(|r| (d.o_c1(r), r)).collect();
        let x_pts: Vec<_> = (0..d.n()).map(|r| (d.x_c1(r), r)).collect();
        let o_lift = lift_points2(d, &o_pts, 1);
        let x_lift = lift_points2(d, &x_pts, 1);
        Grader {
            p: d.p() as i64,
            q: d.q(),
            n: d.n(),
            ell: d.ell(),
            xo_pcoords: special_generator_xo(d).pcoords,
            i_oo: i_count(&o_lift, &o_lift) as i64,
            i_xx: i_count(&x_lift, &x_lift) as i64,
            o_lift,
            x_lift,
            offset: correction_term(d) + BigRational::one(),
            diagram: d.clone(),
        }
    }

    pub fn spin_c(&self, x: &Generator) -> u32 {
        let tilde: i64 = (0..self.n)
            .map(|i| x.pcoords[i] as i64 - self.xo_pcoords[i] as i64)
            .sum();
        (tilde + self.q - 1).rem_euclid(self.p) as u32
    }

    fn lift(&self, x: &Generator) -> Vec<(i64, i64)> {
        lift_points2(&self.diagram, &x.points(), 0)
    }

    /// The four counts `I(x,x), I(x,M), I(M,x), I(M,M)` for `M` = O or X markings.
    pub fn quadruple(&self, x: &Generator, use_x: bool) -> [i64; 4] {
        let xl = self.lift(x);
        let (ml, imm) = if use_x {
            (&self.x_lift, self.i_xx)
        } else {
            (&self.o_lift, self.i_oo)
        };
        [
            i_count(&xl, &xl) as i64,
            i_count(&xl, ml) as i64,
            i_count(ml, &xl) as i64,
            imm,
        ]
    }

    fn quad_value(&self, q: [i64; 4]) -> BigRational {
        rat(q[0] - q[1] - q[2] + q[3], self.p) + &self.offset
    }

    pub fn maslov(&self, x: &Generator) -> BigRational {
        self.quad_value(self.quadruple(x, false))
    }

    pub fn maslov_x(&self, x: &Generator) -> BigRational {
        self.quad_value(self.quadruple(x, true))
    }

    pub fn alexander(&self, x: &Generator) -> BigRational {
        let at = self.maslov(x) - self.maslov_x(x);
        (at - BigRational::from_integer(BigInt::from(self.n as i64 - self.ell as i64))) / rat(2, 1)
    }

    pub fn triple(&self, x: &Generator) -> GradingTriple {
        let xl = self.lift(x);
        let ixx = i_count(&xl, &xl) as i64;
        let m = self.quad_value([
            ixx,
            i_count(&xl, &self.o_lift) as i64,
            i_count(&self.o_lift, &xl) as i64,
            self.i_oo,
        ]);
        let mx = self.quad_value([
            ixx,
            i_count(&xl, &self.x_lift) as i64,
            i_count(&self.x_lift, &xl) as i64,
            self.i_xx,
        ]);
        let a =
            (&m - mx - BigRational::from_integer(BigInt::from(self.n as i64 - self.ell as i64)))
                / rat(2, 1);
        GradingTriple {
            s: self.spin_c(x),
            m,
            a,
        }
    }

    /// Whether `p * (M - d - 1)` is an integer.
    pub fn maslov_is_integral_offset(&self, m: &BigRational) -> bool {
        ((m - &self.offset) * rat(self.p, 1)).is_integer()
    }
}

pub fn maslov(d: &GridDiagram, x: &Generator) -> BigRational {
    Grader::new(d).maslov(x)
}

pub fn maslov_x(d: &GridDiagram, x: &Generator) -> BigRational {
    Grader::new(d).maslov_x(x)
}

pub fn alexander(d: &GridDiagram, x: &Generator) -> BigRational {
    Grader::new(d).alexander(x)
}

pub fn gradings(d: &GridDiagram, x: &Generator) -> GradingTriple {
    Grader::new(d).triple(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_print_and_parse() {
        for (n, d, s) in [(3, 2, "3/2"), (-1, 4, "-1/4"), (6, 3, "2"), (0, 5, "0")] {
            assert_eq!(fmt_rational(&rat(n, d)), s);
            assert_eq!(parse_rational(s), Some(rat(n, d)));
        }
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn floor_parity_rounds_down() {
        assert_eq!(floor_parity(&rat(-1, 2)), 1);
        assert_eq!(floor_parity(&rat(3, 2)), 1);
        assert_eq!(floor_parity(&rat(2, 1)), 0);
        assert_eq!(floor_parity(&rat(-2, 1)), 0);
    }

    #[test]
    fn correction_terms_follow_the_recursion() {
        assert_eq!(d_invariant(1, 0, 0).unwrap(), BigRational::zero());
        assert_eq!(d_invariant(2, 1, 0).unwrap(), rat(-1, 4));
        assert_eq!(d_invariant(2, 1, 1).unwrap(), rat(1, 4));
        assert_eq!(d_invariant(3, 1, 0).unwrap(), rat(-1, 2));
        for (p, q, i) in [(4, 2, 0), (3, 3, 0), (3, 1, -1), (0, 0, 0)] {
            assert!(d_invariant(p, q, i).is_err(), "({p},{q},{i})");
        }
        assert_eq!(correction_args(5, -2), (5, 3, 2));
    }

    #[test]
    fn correction_terms_are_symmetric() {
        for p in 2..12 {
            for q in (1..p).filter(|q| num_integer::gcd(p, *q) == 1) {
                for i in 0..p + q {
                    let j = p + q - 1 - i;
                    assert_eq!(d_invariant(p, q, i).unwrap(), d_invariant(p, q, j).unwrap());
                }
            }
        }
    }
}
