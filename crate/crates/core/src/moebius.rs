//! `PSL₂(O)` matrices, the generators `r` and `s(α)`, the boundary action and
//! isometric hemispheres.
//!
//! For `g = [[m11, m12], [m21, m22]]` the height formula reads
//! `t(gP) = t / (|m22 + m21·ζ|² + |m21|²t²)`, so in the usual notation the
//! bottom row is `(-β, α)` with `β = -m21` and `α = m22`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use crate::arith::{Discriminant, KElem, OInt, Rat};
use crate::error::{Error, Result};

/// Determinant-one matrix over `O` up to global sign.
///
/// The first nonzero entry in the order `m11, m12, m21, m22` is kept positive
/// under the canonical ordering of `O`, so `==` and `Hash` are equality in
/// `PSL₂(O)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mat {
    e: [OInt; 4],
}

impl Mat {
    pub fn new(m11: OInt, m12: OInt, m21: OInt, m22: OInt) -> Result<Self> {
        let det = &m11 * &m22 - &m12 * &m21;
        if !det.is_one() {
            return Err(Error::DeterminantNotOne(det.to_string()));
        }
        Ok(Self::canonical([m11, m12, m21, m22]))
    }

    fn canonical(e: [OInt; 4]) -> Self {
        let flip = e
            .iter()
            .find(|x| !x.is_zero())
            .is_some_and(|x| !x.is_positive());
        if flip {
            let [a, b, c, d] = e;
            Self {
                e: [-a, -b, -c, -d],
            }
        } else {
            Self { e }
        }
    }

    pub fn identity(d: Discriminant) -> Self {
        Self::canonical([d.one(), d.zero(), d.zero(), d.one()])
    }

    /// `r = [[0, -1], [1, 0]]`.
    pub fn r(d: Discriminant) -> Self {
        Self::canonical([d.zero(), -d.one(), d.one(), d.zero()])
    }

    /// `s(a) = [[1, a], [0, 1]]`.
    pub fn s(a: &OInt) -> Self {
        let d = a.disc();
        Self::canonical([d.one(), a.clone(), d.zero(), d.one()])
    }

    pub fn disc(&self) -> Discriminant {
        self.e[0].disc()
    }

    pub fn m11(&self) -> &OInt {
        &self.e[0]
    }
    pub fn m12(&self) -> &OInt {
        &self.e[1]
    }
    pub fn m21(&self) -> &OInt {
        &self.e[2]
    }
    pub fn m22(&self) -> &OInt {
        &self.e[3]
    }

    pub fn entries(&self) -> &[OInt; 4] {
        &self.e
    }

    /// `β = -m21`.
    pub fn beta(&self) -> OInt {
        -self.m21()
    }

    /// `α = m22`.
    pub fn alpha(&self) -> &OInt {
        self.m22()
    }

    pub fn det(&self) -> OInt {
        self.m11() * self.m22() - self.m12() * self.m21()
    }

    pub fn mul(&self, o: &Mat) -> Mat {
        let [a, b, c, d] = &self.e;
        let [w, x, y, z] = &o.e;
        Self::canonical([a * w + b * y, a * x + b * z, c * w + d * y, c * x + d * z])
    }

    pub fn inv(&self) -> Mat {
        let [a, b, c, d] = &self.e;
        Self::canonical([d.clone(), -b, -c, a.clone()])
    }

    pub fn pow(&self, k: u32) -> Mat {
        (0..k).fold(Mat::identity(self.disc()), |acc, _| acc.mul(self))
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat::identity(self.disc())
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.m21().is_zero()
    }

    /// Least `k ≤ cap` with `gᵏ = 1` in `PSL₂(O)`.
    pub fn order_in_psl(&self, cap: u32) -> Option<u32> {
        let mut acc = self.clone();
        for k in 1..=cap {
            if acc.is_identity() {
                return Some(k);
            }
            acc = acc.mul(self);
        }
        None
    }

    /// The hemisphere on which `g` preserves heights, `None` when `m21 = 0`.
    pub fn isometric_hemisphere(&self) -> Option<Hemisphere> {
        if self.m21().is_zero() {
            return None;
        }
        let center = KElem::new(-self.m22(), self.m21()).expect("m21 is nonzero");
        Some(Hemisphere {
            center,
            radius_sq: Rat::new(BigInt::one(), self.m21().norm()),
            owner_bottom_row: Some((self.m21().clone(), self.m22().clone())),
        })
    }

    /// Exact position of a boundary point relative to the isometric hemisphere,
    /// from the sign of `|α - βζ|² - 1`.
    pub fn outside_test(&self, z: &KElem) -> Result<Side> {
        if self.m21().is_zero() {
            return Err(Error::NoHemisphere);
        }
        let w = z.mul_oint(self.m21()).add_oint(self.m22());
        Ok(Side::from_cmp(&w.norm(), &Rat::one()))
    }

    pub fn apply_boundary(&self, z: &Boundary) -> Boundary {
        match z {
            Boundary::Infinity => {
                if self.m21().is_zero() {
                    Boundary::Infinity
                } else {
                    Boundary::Finite(KElem::new(self.m11().clone(), self.m21()).unwrap())
                }
            }
            Boundary::Finite(z) => {
                let num = z.mul_oint(self.m11()).add_oint(self.m12());
                let den = z.mul_oint(self.m21()).add_oint(self.m22());
                match num.div(&den) {
                    Ok(w) => Boundary::Finite(w),
                    Err(_) => Boundary::Infinity,
                }
            }
        }
    }

    /// Floating-point height of `gP`. Rendering and sanity checks only.
    pub fn height_after(&self, p: &Point) -> f64 {
        let (cr, ci) = self.m21().to_complex();
        let (dr, di) = self.m22().to_complex();
        // m22 + m21·ζ
        let wr = dr + cr * p.re - ci * p.im;
        let wi = di + cr * p.im + ci * p.re;
        let c2 = cr * cr + ci * ci;
        p.t / (wr * wr + wi * wi + c2 * p.t * p.t)
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = &self.e;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Outcome of comparing a boundary point against an isometric hemisphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Outside,
    On,
    Inside,
}

impl Side {
    /// Classifies `lhs` against `rhs` as `Outside` when `lhs > rhs`.
    pub fn from_cmp(lhs: &Rat, rhs: &Rat) -> Side {
        match lhs.cmp(rhs) {
            std::cmp::Ordering::Greater => Side::Outside,
            std::cmp::Ordering::Equal => Side::On,
            std::cmp::Ordering::Less => Side::Inside,
        }
    }
}

/// A point of `K ∪ {∞}` on the boundary of upper half-space.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Boundary {
    Finite(KElem),
    Infinity,
}

/// An approximate point `(ζ, t)` of upper half-space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub re: f64,
    pub im: f64,
    pub t: f64,
}

/// An isometric hemisphere: exact center in `K` and exact squared radius.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Hemisphere {
    pub center: KElem,
    pub radius_sq: Rat,
    /// Raw `(m21, m22)` of the owning matrix, when known.
    pub owner_bottom_row: Option<(OInt, OInt)>,
}

impl Hemisphere {
    /// Squared height above `z`; non-positive outside the disc.
    pub fn height_sq_at(&self, z: &KElem) -> Rat {
        &self.radius_sq - z.sub(&self.center).norm()
    }

    pub fn radius_f64(&self) -> f64 {
        self.radius_sq.to_f64().unwrap_or(f64::NAN).sqrt()
    }

    pub fn radius_is_one(&self) -> bool {
        self.radius_sq.is_one()
    }

    pub fn has_positive_radius(&self) -> bool {
        self.radius_sq.is_positive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use proptest::prelude::*;

    fn d40() -> Discriminant {
        Discriminant::new(-40).unwrap()
    }

    #[test]
    fn generator_identities() {
        let d = d40();
        let r = Mat::r(d);
        assert!(r.mul(&r).is_identity());
        let g = Mat::s(&d.elem(2, -3)).mul(&r);
        assert_eq!(g.mul(&Mat::identity(d)), g);
        let rs1 = r.mul(&Mat::s(&d.one()));
        assert!(rs1.pow(3).is_identity());
        assert!(Mat::s(&d.zero()).is_identity());
        let a = d.elem(1, 2);
        let b = d.elem(-4, 1);
        assert_eq!(Mat::s(&a).mul(&Mat::s(&b)), Mat::s(&(&a + &b)));
        assert!(g.inv().mul(&g).is_identity());
    }

    #[test]
    fn determinant_is_checked() {
        let d = d40();
        assert!(Mat::new(d.int(2), d.zero(), d.zero(), d.one()).is_err());
        let m = Mat::new(d.elem(1, 1), d.int(5), d.int(2), d.elem(1, -1)).unwrap();
        assert!(m.det().is_one());
        // Negated representative is the same element of PSL2.
        let neg = Mat::new(d.elem(-1, -1), d.int(-5), d.int(-2), d.elem(-1, 1)).unwrap();
        assert_eq!(m, neg);
    }

    #[test]
    fn hemisphere_examples() {
        let d = d40();
        let a = d.elem(3, 1);
        let g = Mat::r(d).mul(&Mat::s(&-&a));
        let h = g.isometric_hemisphere().unwrap();
        assert_eq!(h.center, KElem::from_oint(a));
        assert_eq!(h.radius_sq, rat(1, 1));
        assert!(Mat::s(&d.tau()).isometric_hemisphere().is_none());
        let hr = Mat::r(d).isometric_hemisphere().unwrap();
        assert_eq!(hr.center, KElem::from_oint(d.zero()));
        assert_eq!(hr.radius_sq, rat(1, 1));
    }

    #[test]
    fn outside_test_examples() {
        let d = d40();
        let r = Mat::r(d);
        let z = KElem::new(d.elem(1, 1), &d.int(2)).unwrap();
        assert_eq!(r.outside_test(&z).unwrap(), Side::Outside);
        assert_eq!(
            r.outside_test(&KElem::from_oint(d.one())).unwrap(),
            Side::On
        );
        let half = KElem::new(d.one(), &d.int(2)).unwrap();
        assert_eq!(r.outside_test(&half).unwrap(), Side::Inside);
        assert!(matches!(
            Mat::s(&d.one()).outside_test(&half),
            Err(Error::NoHemisphere)
        ));
    }

    #[test]
    fn boundary_action_examples() {
        let d = d40();
        let z = KElem::new(d.elem(2, 1), &d.elem(0, 3)).unwrap();
        let a = d.elem(-1, 4);
        assert_eq!(
            Mat::s(&a).apply_boundary(&Boundary::Finite(z.clone())),
            Boundary::Finite(z.add_oint(&a))
        );
        assert_eq!(
            Mat::r(d).apply_boundary(&Boundary::Finite(z.clone())),
            Boundary::Finite(z.recip().unwrap().neg())
        );
        assert_eq!(
            Mat::r(d).apply_boundary(&Boundary::Finite(KElem::from_oint(d.zero()))),
            Boundary::Infinity
        );
        assert_eq!(
            Mat::r(d).apply_boundary(&Boundary::Infinity),
            Boundary::Finite(KElem::from_oint(d.zero()))
        );
    }

    #[test]
    fn height_examples() {
        let d = d40();
        let p = Point {
            re: 0.3,
            im: -1.2,
            t: 0.7,
        };
        assert!((Mat::s(&d.elem(5, 2)).height_after(&p) - 0.7).abs() < 1e-12);
        let r = Mat::r(d);
        let apex = Point {
            re: 0.0,
            im: 0.0,
            t: 1.0,
        };
        assert!((r.height_after(&apex) - 1.0).abs() < 1e-12);
        let high = Point {
            re: 0.0,
            im: 0.0,
            t: 2.0,
        };
        assert!((r.height_after(&high) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orders() {
        let d = d40();
        assert_eq!(Mat::r(d).order_in_psl(12), Some(2));
        assert_eq!(Mat::r(d).mul(&Mat::s(&d.one())).order_in_psl(12), Some(3));
        assert_eq!(Mat::s(&d.one()).order_in_psl(50), None);
        assert_eq!(Mat::identity(d).order_in_psl(1), Some(1));
    }

    fn random_mat(d: Discriminant, coeffs: &[(i64, i64, bool)]) -> Mat {
        coeffs.iter().fold(Mat::identity(d), |acc, &(a, b, is_r)| {
            let step = if is_r {
                Mat::r(d)
            } else {
                Mat::s(&d.elem(a, b))
            };
            acc.mul(&step)
        })
    }

    fn letters() -> impl Strategy<Value = Vec<(i64, i64, bool)>> {
        prop::collection::vec((-6i64..6, -6i64..6, any::<bool>()), 0..14)
    }

    fn discs() -> impl Strategy<Value = Discriminant> {
        prop::sample::select(vec![-15i64, -16, -19, -20, -23, -24, -40])
            .prop_map(|x| Discriminant::new(x).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn det_preserved(d in discs(), w in letters()) {
            let g = random_mat(d, &w);
            prop_assert!(g.det().is_one());
            prop_assert!(g.inv().det().is_one());
            prop_assert!(g.mul(&g.inv()).is_identity());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn outside_test_matches_float(d in discs(), w in letters(), a in -30i64..30, b in -30i64..30, den in 1i64..7) {
            let g = random_mat(d, &w);
            prop_assume!(!g.m21().is_zero());
            let z = KElem::new(d.elem(a, b), &d.int(den)).unwrap();
            let (zr, zi) = z.to_complex();
            let (cr, ci) = g.m21().to_complex();
            let (dr, di) = g.m22().to_complex();
            let wr = dr + cr * zr - ci * zi;
            let wi = di + cr * zi + ci * zr;
            let val = wr * wr + wi * wi - 1.0;
            prop_assume!(val.abs() > 1e-6 && val.is_finite());
            let side = g.outside_test(&z).unwrap();
            prop_assert_eq!(side == Side::Outside, val > 0.0);
            prop_assert_eq!(side == Side::Inside, val < 0.0);
        }

        #[test]
        fn shifts_act_on_hemisphere(d in discs(), w in letters(), a in -9i64..9, b in -9i64..9) {
            let g = random_mat(d, &w);
            prop_assume!(!g.m21().is_zero());
            let shift = d.elem(a, b);
            let h = g.isometric_hemisphere().unwrap();
            let left = Mat::s(&shift).mul(&g).isometric_hemisphere().unwrap();
            prop_assert_eq!(&h.center, &left.center);
            let moved = g.mul(&Mat::s(&-&shift)).isometric_hemisphere().unwrap();
            prop_assert_eq!(&h.radius_sq, &moved.radius_sq);
            prop_assert_eq!(h.center.add_oint(&shift), moved.center);
        }

        #[test]
        fn boundary_action_is_group_action(d in discs(), w1 in letters(), w2 in letters(),
                                           a in -20i64..20, b in -20i64..20, den in 1i64..6) {
            let g = random_mat(d, &w1);
            let h = random_mat(d, &w2);
            let z = Boundary::Finite(KElem::new(d.elem(a, b), &d.int(den)).unwrap());
            let inner = h.apply_boundary(&z);
            prop_assume!(inner != Boundary::Infinity);
            let outer = g.apply_boundary(&inner);
            prop_assume!(outer != Boundary::Infinity);
            prop_assert_eq!(g.mul(&h).apply_boundary(&z), outer);
        }
    }
}
