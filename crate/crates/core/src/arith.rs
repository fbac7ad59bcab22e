//! Exact arithmetic in an imaginary quadratic order `O = Z[τ]` and its
//! fraction field.
//!
//! `τ = √Δ/2` when `Δ` is even and `τ = (1 + √Δ)/2` when `Δ` is odd, so in
//! both cases `τ² = pτ + q` with `p = Δ mod 2` and `q = (Δ - p)/4`.
//! Integers of the order carry their discriminant, which keeps the operator
//! overloads free of an explicit context argument.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Shorthand for an exact rational `p/q`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub(crate) fn rat_int(n: BigInt) -> Rat {
    Rat::from_integer(n)
}

/// Smallest integer `s ≥ 0` with `s² ≥ r`, or a slightly larger bound.
pub(crate) fn sqrt_upper_bound(r: &Rat) -> BigInt {
    if !r.is_positive() {
        return BigInt::zero();
    }
    r.ceil().to_integer().sqrt() + 1
}

/// Validated discriminant of an imaginary quadratic order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant {
    delta: i64,
}

impl Discriminant {
    pub fn new(delta: i64) -> Result<Self> {
        if delta >= 0 || !matches!(delta.rem_euclid(4), 0 | 1) {
            return Err(Error::InvalidDiscriminant(delta));
        }
        Ok(Self { delta })
    }

    pub fn delta(self) -> i64 {
        self.delta
    }

    /// `|Δ|`.
    pub fn abs(self) -> i64 {
        -self.delta
    }

    pub fn is_odd(self) -> bool {
        self.delta.rem_euclid(2) == 1
    }

    /// `p` in `τ² = pτ + q`; also the trace `τ + τ̄`.
    pub fn trace_tau(self) -> i64 {
        self.delta.rem_euclid(2)
    }

    /// `q` in `τ² = pτ + q`.
    pub fn tau_sq_constant(self) -> i64 {
        (self.delta - self.trace_tau()) / 4
    }

    /// `|τ|²`.
    pub fn norm_tau(self) -> i64 {
        -self.tau_sq_constant()
    }

    /// Units are exactly ±1 only when `|Δ| > 4`.
    pub fn require_units_pm1(self) -> Result<()> {
        if self.abs() <= 4 {
            return Err(Error::OutOfScope {
                delta: self.delta,
                reason: "requires |Δ| > 4 so that the only units are ±1",
            });
        }
        Ok(())
    }

    /// Group-level results need a gap between rows of unit discs, `|Δ| > 12`.
    pub fn require_gap(self) -> Result<()> {
        if self.abs() <= 12 {
            return Err(Error::OutOfScope {
                delta: self.delta,
                reason: "PE2 and PSL2 coincide for |Δ| ≤ 12",
            });
        }
        Ok(())
    }

    pub fn units(self) -> Result<[OInt; 2]> {
        self.require_units_pm1()?;
        Ok([self.one(), -self.one()])
    }

    pub fn zero(self) -> OInt {
        OInt::new(self, BigInt::zero(), BigInt::zero())
    }

    pub fn one(self) -> OInt {
        self.int(1)
    }

    pub fn tau(self) -> OInt {
        self.elem(0, 1)
    }

    pub fn int(self, a: i64) -> OInt {
        self.elem(a, 0)
    }

    pub fn elem(self, a: i64, b: i64) -> OInt {
        OInt::new(self, BigInt::from(a), BigInt::from(b))
    }
}

impl fmt::Display for Discriminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.delta)
    }
}

/// An integer `a + bτ` of the order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct OInt {
    a: BigInt,
    b: BigInt,
    d: Discriminant,
}

impl OInt {
    pub fn new(d: Discriminant, a: BigInt, b: BigInt) -> Self {
        Self { a, b, d }
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn disc(&self) -> Discriminant {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    /// `|x|² = a² + pab - qb²`.
    pub fn norm(&self) -> BigInt {
        let p = self.d.trace_tau();
        let q = self.d.tau_sq_constant();
        &self.a * &self.a + &self.a * &self.b * p - &self.b * &self.b * q
    }

    pub fn conj(&self) -> OInt {
        let p = self.d.trace_tau();
        OInt::new(self.d, &self.a + &self.b * p, -&self.b)
    }

    /// True iff `x ∈ {0, 1, -1}`.
    pub fn is_small(&self) -> bool {
        self.b.is_zero() && self.a.abs() <= BigInt::one()
    }

    /// Positive under the canonical ordering: `b > 0`, or `b = 0` and `a > 0`.
    pub fn is_positive(&self) -> bool {
        self.b.is_positive() || (self.b.is_zero() && self.a.is_positive())
    }

    pub fn scale(&self, k: &BigInt) -> OInt {
        OInt::new(self.d, &self.a * k, &self.b * k)
    }

    /// Complex embedding `(Re, Im)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        let p = self.d.trace_tau() as f64;
        let im_tau = (self.d.abs() as f64).sqrt() / 2.0;
        (a + b * p / 2.0, b * im_tau)
    }

    fn check_same(&self, other: &OInt) {
        debug_assert_eq!(self.d, other.d, "mixing integers of different orders");
    }
}

impl PartialOrd for OInt {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OInt {
    fn cmp(&self, other: &Self) -> Ordering {
        self.b.cmp(&other.b).then_with(|| self.a.cmp(&other.a))
    }
}

impl fmt::Display for OInt {
    /// Uses the `a+b*t` text syntax, e.g. `3`, `t`, `1-2*t`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.a;
        let b = &self.b;
        if b.is_zero() {
            return write!(f, "{a}");
        }
        let bpart = if b.is_one() {
            "t".to_string()
        } else if *b == -BigInt::one() {
            "-t".to_string()
        } else {
            format!("{b}*t")
        };
        if a.is_zero() {
            write!(f, "{bpart}")
        } else if b.is_negative() {
            write!(f, "{a}{bpart}")
        } else {
            write!(f, "{a}+{bpart}")
        }
    }
}

impl<'a> Add<&'a OInt> for &'a OInt {
    type Output = OInt;
    fn add(self, rhs: &OInt) -> OInt {
        self.check_same(rhs);
        OInt::new(self.d, &self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl<'a> Sub<&'a OInt> for &'a OInt {
    type Output = OInt;
    fn sub(self, rhs: &OInt) -> OInt {
        self.check_same(rhs);
        OInt::new(self.d, &self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl<'a> Mul<&'a OInt> for &'a OInt {
    type Output = OInt;
    fn mul(self, rhs: &OInt) -> OInt {
        self.check_same(rhs);
        let p = self.d.trace_tau();
        let q = self.d.tau_sq_constant();
        let bd = &self.b * &rhs.b;
        let a = &self.a * &rhs.a + &bd * q;
        let b = &self.a * &rhs.b + &self.b * &rhs.a + bd * p;
        OInt::new(self.d, a, b)
    }
}

impl Neg for &OInt {
    type Output = OInt;
    fn neg(self) -> OInt {
        OInt::new(self.d, -&self.a, -&self.b)
    }
}

impl Neg for OInt {
    type Output = OInt;
    fn neg(self) -> OInt {
        OInt::new(self.d, -self.a, -self.b)
    }
}

macro_rules! forward_owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<OInt> for OInt {
            type Output = OInt;
            fn $method(self, rhs: OInt) -> OInt {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a OInt> for OInt {
            type Output = OInt;
            fn $method(self, rhs: &OInt) -> OInt {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<OInt> for &'a OInt {
            type Output = OInt;
            fn $method(self, rhs: OInt) -> OInt {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);

/// An element `num/den` of the fraction field `K`.
///
/// Stored with a positive rational-integer denominator and coprime content,
/// which makes structural equality coincide with field equality.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct KElem {
    num: OInt,
    den: BigInt,
}

impl KElem {
    /// `num/den`, canonically reduced.
    pub fn new(num: OInt, den: &OInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = &num * &den.conj();
        Ok(Self::reduce(n, den.norm()))
    }

    pub fn from_oint(x: OInt) -> Self {
        Self {
            num: x,
            den: BigInt::one(),
        }
    }

    /// `x + yτ` for rational coordinates.
    pub fn from_coords(d: Discriminant, x: &Rat, y: &Rat) -> Self {
        let l = x.denom().lcm(y.denom());
        let a = (x * rat_int(l.clone())).to_integer();
        let b = (y * rat_int(l.clone())).to_integer();
        Self::reduce(OInt::new(d, a, b), l)
    }

    fn reduce(num: OInt, den: BigInt) -> Self {
        debug_assert!(!den.is_zero());
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        let g = num.a.gcd(&num.b).gcd(&den);
        if g.is_one() || g.is_zero() {
            return Self { num, den };
        }
        let d = num.d;
        Self {
            num: OInt::new(d, &num.a / &g, &num.b / &g),
            den: den / g,
        }
    }

    pub fn num(&self) -> &OInt {
        &self.num
    }

    /// Positive rational-integer denominator.
    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn disc(&self) -> Discriminant {
        self.num.d
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_oint(&self) -> Option<OInt> {
        self.den.is_one().then(|| self.num.clone())
    }

    /// Coordinates `(x, y)` with `self = x + yτ`.
    pub fn coords(&self) -> (Rat, Rat) {
        (
            Rat::new(self.num.a.clone(), self.den.clone()),
            Rat::new(self.num.b.clone(), self.den.clone()),
        )
    }

    pub fn norm(&self) -> Rat {
        Rat::new(self.num.norm(), &self.den * &self.den)
    }

    pub fn conj(&self) -> KElem {
        Self::reduce(self.num.conj(), self.den.clone())
    }

    pub fn add(&self, other: &KElem) -> KElem {
        let num = self.num.scale(&other.den) + other.num.scale(&self.den);
        Self::reduce(num, &self.den * &other.den)
    }

    pub fn sub(&self, other: &KElem) -> KElem {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &KElem) -> KElem {
        Self::reduce(&self.num * &other.num, &self.den * &other.den)
    }

    pub fn div(&self, other: &KElem) -> Result<KElem> {
        let num = self.num.scale(&other.den);
        let den = other.num.scale(&self.den);
        KElem::new(num, &den)
    }

    pub fn recip(&self) -> Result<KElem> {
        let d = self.disc();
        KElem::from_oint(d.one()).div(self)
    }

    pub fn neg(&self) -> KElem {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn add_oint(&self, g: &OInt) -> KElem {
        Self::reduce(&self.num + &g.scale(&self.den), self.den.clone())
    }

    pub fn mul_oint(&self, g: &OInt) -> KElem {
        Self::reduce(&self.num * g, self.den.clone())
    }

    pub fn to_complex(&self) -> (f64, f64) {
        let (re, im) = self.num.to_complex();
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        (re / den, im / den)
    }
}

impl fmt::Display for KElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/{}", self.num, self.den)
        }
    }
}

/// `|z - g|²` exactly.
pub fn dist_sq(z: &KElem, g: &OInt) -> Rat {
    let diff = &z.num - &g.scale(&z.den);
    Rat::new(diff.norm(), &z.den * &z.den)
}

/// All `γ ∈ O` with `|z - γ|² < rsq` (or `≤ rsq` when `closed`), sorted by the
/// canonical ordering.
///
/// The candidate box is derived exactly: `|Im(z - γ)|² = (y - b)²|Δ|/4` bounds
/// `b`, and for each `b` the real part bounds `a`.
pub fn lattice_points_within(z: &KElem, rsq: &Rat, closed: bool) -> Vec<OInt> {
    let d = z.disc();
    if rsq.is_negative() || (!closed && rsq.is_zero()) {
        return Vec::new();
    }
    let (x, y) = z.coords();
    let p = Rat::from_integer(BigInt::from(d.trace_tau()));
    let two = Rat::from_integer(BigInt::from(2));
    let b_span = sqrt_upper_bound(&(rsq * Rat::from_integer(BigInt::from(4)) / rat(d.abs(), 1)));
    let a_span = sqrt_upper_bound(rsq);
    let b_lo = y.floor().to_integer() - &b_span;
    let b_hi = y.ceil().to_integer() + &b_span;

    let mut out = Vec::new();
    let mut b = b_lo;
    while b <= b_hi {
        let bq = Rat::from_integer(b.clone());
        let center = &x + &p * (&y - &bq) / &two;
        let mut a = center.floor().to_integer() - &a_span;
        let a_hi = center.ceil().to_integer() + &a_span;
        while a <= a_hi {
            let g = OInt::new(d, a.clone(), b.clone());
            let ds = dist_sq(z, &g);
            let keep = match ds.cmp(rsq) {
                Ordering::Less => true,
                Ordering::Equal => closed,
                Ordering::Greater => false,
            };
            if keep {
                out.push(g);
            }
            a += 1;
        }
        b += 1;
    }
    out.sort();
    out
}

/// Squared distance from `z` to the nearest lattice point, with every lattice
/// point attaining it.
pub fn nearest_lattice_points(z: &KElem) -> (Rat, Vec<OInt>) {
    let mut rsq = Rat::one();
    loop {
        let pts = lattice_points_within(z, &rsq, true);
        if let Some(best) = pts.iter().map(|g| dist_sq(z, g)).min() {
            let at: Vec<OInt> = pts.into_iter().filter(|g| dist_sq(z, g) == best).collect();
            return (best, at);
        }
        rsq *= Rat::from_integer(BigInt::from(4));
    }
}

/// A point `u + v·√|Δ|·i` of the complex plane with rational `u, v`.
///
/// Every lattice point and every element of `K` has such coordinates, and the
/// perpendicular bisectors between lattice points meet at such points.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PlanePoint {
    pub u: Rat,
    pub v: Rat,
}

impl PlanePoint {
    pub fn new(u: Rat, v: Rat) -> Self {
        Self { u, v }
    }

    pub fn origin() -> Self {
        Self::new(Rat::zero(), Rat::zero())
    }

    pub fn from_oint(x: &OInt) -> Self {
        Self::from_kelem(&KElem::from_oint(x.clone()))
    }

    pub fn from_kelem(z: &KElem) -> Self {
        let d = z.disc();
        let (x, y) = z.coords();
        let p = rat(d.trace_tau(), 2);
        Self::new(&x + &y * p, y / rat(2, 1))
    }

    pub fn to_kelem(&self, d: Discriminant) -> KElem {
        let y = &self.v * rat(2, 1);
        let x = &self.u - &self.v * rat(d.trace_tau(), 1);
        KElem::from_coords(d, &x, &y)
    }

    pub fn add(&self, o: &PlanePoint) -> PlanePoint {
        Self::new(&self.u + &o.u, &self.v + &o.v)
    }

    pub fn sub(&self, o: &PlanePoint) -> PlanePoint {
        Self::new(&self.u - &o.u, &self.v - &o.v)
    }

    pub fn scale(&self, k: &Rat) -> PlanePoint {
        Self::new(&self.u * k, &self.v * k)
    }

    /// Euclidean inner product in actual coordinates: `u₁u₂ + |Δ|v₁v₂`.
    pub fn dot(&self, o: &PlanePoint, d: Discriminant) -> Rat {
        &self.u * &o.u + &self.v * &o.v * rat(d.abs(), 1)
    }

    pub fn norm_sq(&self, d: Discriminant) -> Rat {
        self.dot(self, d)
    }

    pub fn dist_sq(&self, o: &PlanePoint, d: Discriminant) -> Rat {
        self.sub(o).norm_sq(d)
    }

    /// Actual `(Re, Im)`.
    pub fn to_f64(&self, d: Discriminant) -> (f64, f64) {
        let u = self.u.to_f64().unwrap_or(f64::NAN);
        let v = self.v.to_f64().unwrap_or(f64::NAN);
        (u, v * (d.abs() as f64).sqrt())
    }
}

impl fmt::Display for PlanePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}·√|Δ|)", self.u, self.v)
    }
}
