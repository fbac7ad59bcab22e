//! Isometric hemispheres of `PSL₂(O)` over a window, exact face certificates,
//! wall envelopes and the split of faces by a horizontal plane.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{
    lattice_points_within, nearest_lattice_points, rat, sqrt_upper_bound, Discriminant, KElem,
    OInt, PlanePoint, Rat,
};
use crate::error::{Error, Result};
use crate::ford::{amalgam_rectangle, FundPolygon};
use crate::moebius::{Hemisphere, Mat};

/// Default grid pitch for face certificates.
pub fn default_resolution() -> Rat {
    rat(1, 64)
}

struct Gen {
    v: [BigInt; 2],
    c: [BigInt; 4],
}

impl Gen {
    fn sub_mul(&mut self, q: &BigInt, o: &Gen) {
        for k in 0..2 {
            self.v[k] -= q * &o.v[k];
        }
        for k in 0..4 {
            self.c[k] -= q * &o.c[k];
        }
    }
}

/// Reduces coordinate `k` of `gens` to a single nonzero generator, which is
/// removed and returned.
fn pivot_out(gens: &mut Vec<Gen>, k: usize) -> Option<Gen> {
    loop {
        let live: Vec<usize> = (0..gens.len())
            .filter(|&i| !gens[i].v[k].is_zero())
            .collect();
        match live.len() {
            0 => return None,
            1 => return Some(gens.remove(live[0])),
            _ => {}
        }
        let p = *live.iter().min_by_key(|&&i| gens[i].v[k].abs()).unwrap();
        let pivot = Gen {
            v: gens[p].v.clone(),
            c: gens[p].c.clone(),
        };
        for &i in &live {
            if i != p {
                let q = gens[i].v[k].div_floor(&pivot.v[k]);
                gens[i].sub_mul(&q, &pivot);
            }
        }
    }
}

/// Completion `[[λ, b], [μ, d]]` of determinant 1 when `λO + μO = O`.
///
/// Decides whether `1` lies in the `Z`-module spanned by `λ, λτ, μ, μτ`
/// by integer reduction with tracked coefficients. The completion is then
/// normalised by a right shift so that `|d|` is as small as possible.
pub fn is_unimodular(lambda: &OInt, mu: &OInt, d: Discriminant) -> Option<Mat> {
    if lambda.is_zero() && mu.is_zero() {
        return None;
    }
    let tau = d.tau();
    let vecs = [lambda.clone(), lambda * &tau, mu.clone(), mu * &tau];
    let mut gens: Vec<Gen> = vecs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut c: [BigInt; 4] = Default::default();
            c[i] = BigInt::one();
            Gen {
                v: [x.a().clone(), x.b().clone()],
                c,
            }
        })
        .collect();
    // λ ≠ 0 or μ ≠ 0 makes the module rank 2, so the τ-coordinate has a pivot
    // and 1 is in the module iff the remaining 1-coordinates have gcd 1.
    pivot_out(&mut gens, 1)?;
    let unit = pivot_out(&mut gens, 0)?;
    let sign = if unit.v[0].is_one() {
        BigInt::one()
    } else if (-&unit.v[0]).is_one() {
        -BigInt::one()
    } else {
        return None;
    };
    let c: Vec<BigInt> = unit.c.iter().map(|x| x * &sign).collect();
    let x = OInt::new(d, c[0].clone(), c[1].clone());
    let y = OInt::new(d, c[2].clone(), c[3].clone());
    let (mut b, mut dd) = (-&y, x);
    if !mu.is_zero() {
        let target = KElem::new(-&dd, mu).expect("μ ≠ 0");
        let (_, near) = nearest_lattice_points(&target);
        let k = &near[0];
        dd = &dd + &(k * mu);
        b = &b + &(k * lambda);
    }
    Some(Mat::new(lambda.clone(), b, mu.clone(), dd).expect("determinant one by construction"))
}

/// A hemisphere `λ/μ`, radius `1/|μ|`, with `g = completion⁻¹` as owner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrHemisphere {
    pub hemisphere: Hemisphere,
    pub point: PlanePoint,
    pub lambda: OInt,
    pub mu: OInt,
    pub owner: Mat,
}

impl ArrHemisphere {
    fn new(lambda: OInt, mu: OInt, completion: &Mat) -> Self {
        let owner = completion.inv();
        let hemisphere = owner.isometric_hemisphere().expect("μ ≠ 0");
        let point = PlanePoint::from_kelem(&hemisphere.center);
        Self {
            hemisphere,
            point,
            lambda,
            mu,
            owner,
        }
    }

    pub fn radius_sq(&self) -> &Rat {
        &self.hemisphere.radius_sq
    }

    pub fn height_sq_at(&self, p: &PlanePoint, d: Discriminant) -> Rat {
        self.radius_sq() - p.dist_sq(&self.point, d)
    }
}

/// Hemispheres with `N(μ) ≤ norm_bound` whose discs meet the window.
#[derive(Clone, Debug)]
pub struct HemiSet {
    pub d: Discriminant,
    pub norm_bound: u64,
    pub window: FundPolygon,
    pub hemispheres: Vec<ArrHemisphere>,
}

impl HemiSet {
    pub fn len(&self) -> usize {
        self.hemispheres.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hemispheres.is_empty()
    }

    pub fn find(&self, point: &PlanePoint, radius_sq: &Rat) -> Option<usize> {
        self.hemispheres
            .iter()
            .position(|h| h.point == *point && h.radius_sq() == radius_sq)
    }
}

fn circumradius_sq(w: &FundPolygon) -> Rat {
    w.vertices
        .iter()
        .map(|v| v.dist_sq(&w.center, w.d))
        .max()
        .unwrap_or_else(Rat::zero)
}

pub fn enumerate_hemispheres(
    d: Discriminant,
    norm_bound: u64,
    window: &FundPolygon,
) -> Result<HemiSet> {
    d.require_gap()?;
    if norm_bound == 0 {
        return Err(Error::Precondition("norm bound must be at least 1".into()));
    }
    let zero = KElem::from_oint(d.zero());
    let bound = Rat::from_integer(BigInt::from(norm_bound));
    let wc = window.center.to_kelem(d);
    let rw = circumradius_sq(window);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mu in lattice_points_within(&zero, &bound, true) {
        if !mu.is_positive() {
            continue;
        }
        let n = Rat::from_integer(mu.norm());
        let rsq = n.recip();
        // |λ - μc| ≤ |μ|(R_w + R) is implied by the larger disc below.
        let reach = &n * &rw * rat(2, 1) + rat(2, 1);
        for lambda in lattice_points_within(&wc.mul_oint(&mu), &reach, true) {
            let center = KElem::new(lambda.clone(), &mu).expect("μ ≠ 0");
            let p = PlanePoint::from_kelem(&center);
            if window.dist_sq_to(&p) > rsq || !seen.insert((p.clone(), rsq.clone())) {
                continue;
            }
            if let Some(m) = is_unimodular(&lambda, &mu, d) {
                out.push(ArrHemisphere::new(lambda, mu.clone(), &m));
            }
        }
    }
    out.sort_by(|a, b| {
        b.radius_sq()
            .cmp(a.radius_sq())
            .then_with(|| a.point.cmp(&b.point))
    });
    Ok(HemiSet {
        d,
        norm_bound,
        window: window.clone(),
        hemispheres: out,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FaceStatus {
    /// The hemisphere is strictly highest at `witness` among all hemispheres
    /// considered; heights are over the dominating grid samples.
    Contributes {
        witness: KElem,
        samples: usize,
        max_height_sq: Rat,
        min_height_sq: Rat,
    },
    /// No dominating grid point at this pitch.
    CoveredUpTo(Rat),
}

impl FaceStatus {
    pub fn contributes(&self) -> bool {
        matches!(self, FaceStatus::Contributes { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            FaceStatus::Contributes { .. } => "contributes",
            FaceStatus::CoveredUpTo(_) => "covered",
        }
    }
}

/// Integer affine form `c0 + c1·i + c2·j` scaled from rationals by a
/// positive factor.
struct Form([i128; 3]);

impl Form {
    fn new(coeffs: [Rat; 3]) -> Result<Self> {
        let l = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let conv = |c: &Rat| -> Result<i128> {
            (c * Rat::from_integer(l.clone()))
                .to_integer()
                .to_i128()
                .ok_or_else(|| Error::Precondition("grid coefficients exceed 128 bits".into()))
        };
        Ok(Form([
            conv(&coeffs[0])?,
            conv(&coeffs[1])?,
            conv(&coeffs[2])?,
        ]))
    }

    fn eval(&self, i: i128, j: i128) -> i128 {
        self.0[0] + self.0[1] * i + self.0[2] * j
    }
}

/// Grid steps `(ε, ε/k)` with `k = ⌈√|Δ|⌉`, so both actual pitches are at most `ε`.
fn grid_steps(d: Discriminant, eps: &Rat) -> (Rat, Rat) {
    let dd = BigInt::from(d.abs());
    let mut k = dd.sqrt();
    if &k * &k < dd {
        k += 1;
    }
    (eps.clone(), eps / Rat::from_integer(k))
}

/// Certifies whether `h` has a face over `window` among `rest`.
///
/// Grid points `c + (iε, jε/k)` around the centre are tested exactly; the
/// difference of two squared heights is affine in the point, so every test
/// reduces to the sign of an integer affine form in `(i, j)`.
pub fn face_status(
    h: &Hemisphere,
    rest: &[&Hemisphere],
    window: &FundPolygon,
    eps: &Rat,
) -> Result<FaceStatus> {
    let d = window.d;
    let dq = rat(d.abs(), 1);
    let two = rat(2, 1);
    let c = PlanePoint::from_kelem(&h.center);
    let (du, dv) = grid_steps(d, eps);
    let r2 = &h.radius_sq;
    let covered = || Ok(FaceStatus::CoveredUpTo(eps.clone()));
    if !r2.is_positive() {
        return covered();
    }

    let mut rivals = Vec::new();
    for o in rest {
        let oc = PlanePoint::from_kelem(&o.center);
        let delta = c.sub(&oc);
        let dist = delta.norm_sq(d);
        if dist >= (r2 + &o.radius_sq) * &two {
            continue;
        }
        rivals.push(Form::new([
            r2 - &o.radius_sq + &dist,
            &two * &du * &delta.u,
            &two * &dq * &dv * &delta.v,
        ])?);
    }
    let sides: Vec<Form> = window
        .sides()
        .map(|(a, b)| {
            let e = b.sub(a);
            let w = c.sub(a);
            Form::new([&e.u * &w.v - &e.v * &w.u, -(&e.v * &du), &e.u * &dv])
        })
        .collect::<Result<_>>()?;
    // Height² = (h0 - h1·i² - h2·j²) / scale.
    let hc = [r2.clone(), &du * &du, &dq * &dv * &dv];
    let scale = hc.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let hq: Vec<i128> = hc
        .iter()
        .map(|x| {
            (x * Rat::from_integer(scale.clone()))
                .to_integer()
                .to_i128()
        })
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Precondition("grid coefficients exceed 128 bits".into()))?;
    let height = |i: i128, j: i128| hq[0] - hq[1] * i * i - hq[2] * j * j;

    let imax = sqrt_upper_bound(&(r2 / (&du * &du)))
        .to_i128()
        .unwrap_or(i128::MAX);
    let jmax = sqrt_upper_bound(&(r2 / (&dq * &dv * &dv)))
        .to_i128()
        .unwrap_or(i128::MAX);
    let wins = |i: i128, j: i128| {
        height(i, j) > 0
            && sides.iter().all(|s| s.eval(i, j) >= 0)
            && rivals.iter().all(|f| f.eval(i, j) > 0)
    };

    // Interior witnesses are preferred: they translate back into the window
    // uniquely, which the face pairing relies on.
    let interior = |i: i128, j: i128| sides.iter().all(|s| s.eval(i, j) > 0);
    let mut first: Option<(i128, i128)> = None;
    let mut first_inner: Option<(i128, i128)> = None;
    if wins(0, 0) {
        first = Some((0, 0));
        first_inner = interior(0, 0).then_some((0, 0));
    }
    let mut samples = 0usize;
    let (mut hi, mut lo) = (i128::MIN, i128::MAX);
    for i in -imax..=imax {
        for j in -jmax..=jmax {
            if wins(i, j) {
                samples += 1;
                first.get_or_insert((i, j));
                if first_inner.is_none() && interior(i, j) {
                    first_inner = Some((i, j));
                }
                let hv = height(i, j);
                hi = hi.max(hv);
                lo = lo.min(hv);
            }
        }
    }
    let Some((i, j)) = first_inner.or(first) else {
        return covered();
    };
    let s = Rat::from_integer(scale);
    let at = PlanePoint::new(&c.u + &du * rat_i(i), &c.v + &dv * rat_i(j));
    Ok(FaceStatus::Contributes {
        witness: at.to_kelem(d),
        samples,
        max_height_sq: Rat::from_integer(BigInt::from(hi)) / &s,
        min_height_sq: Rat::from_integer(BigInt::from(lo)) / &s,
    })
}

fn rat_i(x: i128) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

/// Re-checks a witness by direct evaluation of every squared height.
pub fn verify_witness(set: &HemiSet, idx: usize, z: &KElem) -> bool {
    let h = &set.hemispheres[idx].hemisphere;
    let mine = h.height_sq_at(z);
    mine.is_positive()
        && set.window.contains(&PlanePoint::from_kelem(z))
        && set
            .hemispheres
            .iter()
            .enumerate()
            .all(|(k, o)| k == idx || o.hemisphere.height_sq_at(z) < mine)
}

/// Face statuses of every hemisphere against all others, in set order.
pub fn face_statuses(set: &HemiSet, eps: &Rat) -> Result<Vec<FaceStatus>> {
    (0..set.len())
        .into_par_iter()
        .map(|i| {
            let rest: Vec<&Hemisphere> = set
                .hemispheres
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != i)
                .map(|(_, h)| &h.hemisphere)
                .collect();
            face_status(&set.hemispheres[i].hemisphere, &rest, &set.window, eps)
        })
        .collect()
}

/// Vertical wall over a side of the amalgam rectangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WallFace {
    pub from: PlanePoint,
    pub to: PlanePoint,
    pub pairing: Mat,
    pub partner: usize,
    /// Least sampled squared height of the hemisphere envelope under the wall.
    pub envelope_min_sq: Rat,
    pub samples: usize,
}

/// Walls of the amalgam rectangle with their pairings: the sides `u = ±1/2`
/// are paired by `s(∓1)`; the horizontal sides by `s(±τ)`, split at `u = 0`
/// with `s(±(τ-1))` when `Δ` is odd.
pub fn amalgam_walls(set: &HemiSet, eps: &Rat) -> Result<Vec<WallFace>> {
    let d = set.d;
    let h = rat(1, 2);
    let z = Rat::zero();
    let pt = |u: &Rat, v: &Rat| PlanePoint::new(u.clone(), v.clone());
    let mh = -&h;
    let one = d.one();
    let tau = d.tau();
    let mut sides: Vec<(PlanePoint, PlanePoint, OInt, usize)> = vec![
        (pt(&h, &z), pt(&h, &h), -&one, 1),
        (pt(&mh, &h), pt(&mh, &z), one.clone(), 0),
    ];
    if d.is_odd() {
        let t1 = &tau - &one;
        sides.extend([
            (pt(&mh, &z), pt(&z, &z), tau.clone(), 5),
            (pt(&z, &z), pt(&h, &z), t1.clone(), 4),
            (pt(&z, &h), pt(&mh, &h), -&t1, 3),
            (pt(&h, &h), pt(&z, &h), -&tau, 2),
        ]);
    } else {
        sides.extend([
            (pt(&mh, &z), pt(&h, &z), tau.clone(), 3),
            (pt(&h, &h), pt(&mh, &h), -&tau, 2),
        ]);
    }
    let (du, dv) = grid_steps(d, eps);
    sides.into_iter()
        .map(|(from, to, shift, partner)| {
            let e = to.sub(&from);
            let steps = (e.u.abs() / &du).max(e.v.abs() / &dv).ceil().to_integer();
            let n = steps.to_usize().unwrap_or(1).max(1);
            let mut envelope_min_sq: Option<Rat> = None;
            for s in 0..=n {
                let p = from.add(&e.scale(&rat(s as i64, n as i64)));
                let top = set
                    .hemispheres
                    .iter()
                    .map(|hs| hs.height_sq_at(&p, d))
                    .max()
                    .unwrap_or_else(Rat::zero);
                let top = top.max(Rat::zero());
                if envelope_min_sq.as_ref().is_none_or(|m| top < *m) {
                    envelope_min_sq = Some(top);
                }
            }
            Ok(WallFace {
                from,
                to,
                pairing: Mat::s(&shift),
                partner,
                envelope_min_sq: envelope_min_sq.unwrap_or_else(Rat::zero),
                samples: n + 1,
            })
        })
        .collect()
}

/// Image of the footprint of a point of `S_g` under `g`.
///
/// For `(ζ, t)` on `S_g` the height is preserved and the image has footprint
/// `(aζ + b)·conj(cζ + d) + a·conj(c)·t²` with `t² = (1 - |cζ + d|²)/|c|²`.
pub fn footprint_image(g: &Mat, z: &KElem) -> KElem {
    let [a, b, c, dd] = g.entries();
    let w = z.mul_oint(c).add_oint(dd);
    let t2 = (Rat::one() - w.norm()) / Rat::from_integer(c.norm());
    let t2k = KElem::from_coords(z.disc(), &t2, &Rat::zero());
    z.mul_oint(a)
        .add_oint(b)
        .mul(&w.conj())
        .add(&KElem::from_oint(a * &c.conj()).mul(&t2k))
}

/// Pairing of a contributing hemisphere face: `s(k)·g` moves the face back
/// over the window, onto hemisphere `partner` when it is in the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HemiPairing {
    pub matrix: Mat,
    pub partner: Option<usize>,
}

pub fn hemisphere_pairing(set: &HemiSet, idx: usize, witness: &KElem) -> HemiPairing {
    let d = set.d;
    let h = &set.hemispheres[idx];
    let img = footprint_image(&h.owner, witness);
    let wc = set.window.center.to_kelem(d);
    let reach = circumradius_sq(&set.window) * rat(4, 1) + rat(1, 1);
    let shift = lattice_points_within(&img.sub(&wc), &reach, true)
        .into_iter()
        .find(|gamma| {
            set.window.contains(&PlanePoint::from_kelem(
                &img.sub(&KElem::from_oint(gamma.clone())),
            ))
        })
        .map(|gamma| -gamma)
        .unwrap_or_else(|| d.zero());
    let matrix = Mat::s(&shift).mul(&h.owner);
    let partner = matrix
        .inv()
        .isometric_hemisphere()
        .and_then(|s| set.find(&PlanePoint::from_kelem(&s.center), &s.radius_sq));
    HemiPairing { matrix, partner }
}

/// Hemispheres, their statuses and pairings, and (for the amalgam window)
/// the walls.
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub set: HemiSet,
    pub resolution: Rat,
    pub statuses: Vec<FaceStatus>,
    pub pairings: Vec<Option<HemiPairing>>,
    pub walls: Vec<WallFace>,
}

impl Arrangement {
    pub fn new(d: Discriminant, norm_bound: u64, window: &FundPolygon, eps: &Rat) -> Result<Self> {
        let set = enumerate_hemispheres(d, norm_bound, window)?;
        let statuses = face_statuses(&set, eps)?;
        let pairings = statuses
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                FaceStatus::Contributes { witness, .. } => {
                    Some(hemisphere_pairing(&set, i, witness))
                }
                FaceStatus::CoveredUpTo(_) => None,
            })
            .collect();
        Ok(Self {
            set,
            resolution: eps.clone(),
            statuses,
            pairings,
            walls: Vec::new(),
        })
    }

    /// Arrangement over the amalgam rectangle, walls included.
    pub fn amalgam(d: Discriminant, norm_bound: u64, eps: &Rat) -> Result<Self> {
        let mut arr = Self::new(d, norm_bound, &amalgam_rectangle(d)?, eps)?;
        arr.walls = amalgam_walls(&arr.set, eps)?;
        Ok(arr)
    }

    pub fn contributing(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.statuses.len()).filter(|&i| self.statuses[i].contributes())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceRef {
    Hemisphere(usize),
    Wall(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceSplit {
    pub face: FaceRef,
    pub pairing: Mat,
    pub above: bool,
    pub below: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaneSplit {
    pub plane: Rat,
    pub faces: Vec<FaceSplit>,
}

impl PlaneSplit {
    pub fn above(&self) -> impl Iterator<Item = &FaceSplit> {
        self.faces.iter().filter(|f| f.above)
    }

    pub fn below(&self) -> impl Iterator<Item = &FaceSplit> {
        self.faces.iter().filter(|f| f.below)
    }

    pub fn overlap(&self) -> impl Iterator<Item = &FaceSplit> {
        self.faces.iter().filter(|f| f.above && f.below)
    }

    fn side_of(&self, face: FaceRef) -> Option<(bool, bool)> {
        self.faces
            .iter()
            .find(|f| f.face == face)
            .map(|f| (f.above, f.below))
    }

    /// Whether every face and its partner lie on the same sides of the plane.
    pub fn pairs_consistent(&self, arr: &Arrangement) -> bool {
        self.faces.iter().all(|f| {
            let partner = match f.face {
                FaceRef::Hemisphere(i) => match arr.pairings[i].as_ref().and_then(|p| p.partner) {
                    Some(k) => FaceRef::Hemisphere(k),
                    None => return false,
                },
                FaceRef::Wall(i) => FaceRef::Wall(arr.walls[i].partner),
            };
            self.side_of(partner) == Some((f.above, f.below))
        })
    }
}

/// Splits contributing faces by the plane `t = plane`: a hemisphere face is
/// above when some dominating sample is higher than the plane and below when
/// one is lower; a wall is always above and is below when the envelope
/// under it dips below the plane.
pub fn plane_split(arr: &Arrangement, plane: &Rat) -> PlaneSplit {
    let p2 = plane * plane;
    let mut faces = Vec::new();
    for (i, s) in arr.statuses.iter().enumerate() {
        if let FaceStatus::Contributes {
            max_height_sq,
            min_height_sq,
            ..
        } = s
        {
            faces.push(FaceSplit {
                face: FaceRef::Hemisphere(i),
                pairing: arr.pairings[i]
                    .as_ref()
                    .map(|p| p.matrix.clone())
                    .unwrap_or_else(|| arr.set.hemispheres[i].owner.clone()),
                above: *max_height_sq > p2,
                below: *min_height_sq < p2,
            });
        }
    }
    for (i, w) in arr.walls.iter().enumerate() {
        faces.push(FaceSplit {
            face: FaceRef::Wall(i),
            pairing: w.pairing.clone(),
            above: true,
            below: w.envelope_min_sq < p2,
        });
    }
    PlaneSplit {
        plane: plane.clone(),
        faces,
    }
}
