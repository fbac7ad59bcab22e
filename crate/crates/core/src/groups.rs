//! Gap points, coset families, normalizer witnesses and the amalgam report.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::arith::{
    dist_sq, lattice_points_within, nearest_lattice_points, rat, Discriminant, KElem, OInt, Rat,
};
use crate::arrangement::{is_unimodular, plane_split, Arrangement, FaceRef, FaceStatus};
use crate::error::{Error, Result};
use crate::ford::presentation;
use crate::moebius::Mat;
use crate::words::{membership, membership_with_stats, MembershipResult, StandardForm, Word};

/// A unimodular pair whose ratio `λ/μ` is at squared distance `> 1` from
/// every lattice point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapPoint {
    pub lambda: OInt,
    pub mu: OInt,
    pub completion: Mat,
    pub ratio: KElem,
    pub min_dist_sq: Rat,
    /// Lattice points within squared distance 4 of the ratio; the nearest
    /// one is among them because the cell circumradius is below 2.
    pub checked: Vec<OInt>,
}

impl GapPoint {
    fn try_new(lambda: OInt, mu: OInt) -> Option<Self> {
        let ratio = KElem::new(lambda.clone(), &mu).ok()?;
        if !lattice_points_within(&ratio, &Rat::one(), true).is_empty() {
            return None;
        }
        let completion = is_unimodular(&lambda, &mu, mu.disc())?;
        let checked = lattice_points_within(&ratio, &rat(4, 1), true);
        let (min_dist_sq, _) = nearest_lattice_points(&ratio);
        Some(Self {
            lambda,
            mu,
            completion,
            ratio,
            min_dist_sq,
            checked,
        })
    }

    /// Re-derives the gap property over the recorded neighbourhood and over
    /// a larger one.
    pub fn verify(&self) -> bool {
        let ds: Vec<Rat> = self
            .checked
            .iter()
            .map(|g| dist_sq(&self.ratio, g))
            .collect();
        let wide = lattice_points_within(&self.ratio, &rat(16, 1), true);
        let wide_min = wide.iter().map(|g| dist_sq(&self.ratio, g)).min();
        ds.iter().min() == Some(&self.min_dist_sq)
            && wide_min.as_ref() == Some(&self.min_dist_sq)
            && self.min_dist_sq > Rat::one()
    }
}

/// Gap points with `μ` positive in order of increasing norm, and for each
/// `μ` the ratios `x + yτ` with `0 ≤ x, y < 1`, so ratios are pairwise
/// distinct modulo `O`.
pub struct GapPoints {
    d: Discriminant,
    norm: BigInt,
    pending: std::vec::IntoIter<GapPoint>,
}

impl GapPoints {
    pub fn new(d: Discriminant) -> Result<Self> {
        d.require_gap()?;
        Ok(Self {
            d,
            norm: BigInt::zero(),
            pending: Vec::new().into_iter(),
        })
    }

    fn refill(&mut self) {
        let d = self.d;
        self.norm += 1;
        let zero = KElem::from_oint(d.zero());
        let nq = Rat::from_integer(self.norm.clone());
        let mut mus: Vec<OInt> = lattice_points_within(&zero, &nq, true)
            .into_iter()
            .filter(|m| m.is_positive() && m.norm() == self.norm)
            .collect();
        mus.sort();
        let mut batch = Vec::new();
        let mid = KElem::new(d.elem(1, 1), &d.int(2)).expect("nonzero");
        let reach = &nq * Rat::from_integer(BigInt::from(2) + d.norm_tau());
        for mu in mus {
            for lambda in lattice_points_within(&mid.mul_oint(&mu), &reach, true) {
                let Ok(z) = KElem::new(lambda.clone(), &mu) else {
                    continue;
                };
                let (x, y) = z.coords();
                let unit = |c: &Rat| !c.is_negative() && *c < Rat::one();
                if unit(&x) && unit(&y) {
                    if let Some(gp) = GapPoint::try_new(lambda, mu.clone()) {
                        batch.push(gp);
                    }
                }
            }
        }
        self.pending = batch.into_iter();
    }
}

impl Iterator for GapPoints {
    type Item = GapPoint;

    fn next(&mut self) -> Option<GapPoint> {
        loop {
            if let Some(g) = self.pending.next() {
                return Some(g);
            }
            self.refill();
        }
    }
}

pub fn gap_points(d: Discriminant, count: usize) -> Result<Vec<GapPoint>> {
    Ok(GapPoints::new(d)?.take(count).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCheck {
    pub i: usize,
    pub j: usize,
    /// Outcome for `Mᵢ·Mⱼ⁻¹`.
    pub outcome: &'static str,
    pub witness_verified: bool,
}

#[derive(Clone, Debug)]
pub struct CosetFamily {
    pub members: Vec<GapPoint>,
    /// Pairs `i > j` in acceptance order.
    pub checks: Vec<PairCheck>,
    /// Candidates dropped with the reason.
    pub dropped: Vec<(GapPoint, String)>,
}

impl CosetFamily {
    pub fn all_distinct(&self) -> bool {
        let n = self.members.len();
        self.checks.len() == n * n.saturating_sub(1) / 2
            && self
                .checks
                .iter()
                .all(|c| c.outcome == "NonMember" && c.witness_verified)
    }
}

/// Completions of gap points lying in pairwise distinct right cosets of
/// `PE₂(O)`, each pair certified by a non-membership witness for `Mᵢ·Mⱼ⁻¹`.
pub fn coset_family(d: Discriminant, count: usize, depth_cap: usize) -> Result<CosetFamily> {
    let scan_limit = 20 * count + 200;
    let mut members: Vec<GapPoint> = Vec::new();
    let mut checks = Vec::new();
    let mut dropped = Vec::new();
    for (scanned, cand) in GapPoints::new(d)?.enumerate() {
        if members.len() >= count {
            break;
        }
        if scanned >= scan_limit {
            return Err(Error::SearchExhausted(format!(
                "{} of {count} cosets after {scan_limit} candidates",
                members.len()
            )));
        }
        let results: Vec<Result<(MembershipResult, Mat)>> = members
            .par_iter()
            .map(|m| {
                let prod = cand.completion.mul(&m.completion.inv());
                membership(&prod, depth_cap).map(|r| (r, prod))
            })
            .collect();
        let mut row = Vec::with_capacity(results.len());
        let mut reject = None;
        for (j, res) in results.into_iter().enumerate() {
            let (r, prod) = res?;
            let outcome = r.label();
            let witness_verified = match &r {
                MembershipResult::NonMember(w) => w.verify(&prod),
                _ => false,
            };
            match r {
                MembershipResult::NonMember(_) => {}
                MembershipResult::Member { .. } => {
                    reject.get_or_insert(format!("same coset as member {j}"));
                }
                MembershipResult::Inconclusive { depth_reached } => {
                    reject.get_or_insert(format!(
                        "inconclusive against member {j} at depth {depth_reached}"
                    ));
                }
            }
            row.push(PairCheck {
                i: members.len(),
                j,
                outcome,
                witness_verified,
            });
        }
        match reject {
            Some(reason) => dropped.push((cand, reason)),
            None => {
                checks.extend(row);
                members.push(cand);
            }
        }
    }
    Ok(CosetFamily {
        members,
        checks,
        dropped,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalizerWitness {
    pub alpha: OInt,
    pub conjugate: Mat,
    /// `λ/μ - 1/(αμ²)`.
    pub shifted_ratio: KElem,
    /// Entries `1 - αλμ` and `-αμ²` match the conjugate up to sign.
    pub entries_verified: bool,
    pub candidates_tried: usize,
}

/// Bound on `N(α)` for [`normalizer_witness`].
pub const NORMALIZER_NORM_BOUND: u64 = 10_000;

/// Finds `α` with `g·s(α)·g⁻¹ ∉ PE₂(O)`, so `g` does not normalise `PE₂(O)`.
///
/// Requires `g ∉ PE₂(O)` and its ratio `λ/μ` to lie outside every open unit
/// disc about a lattice point.
pub fn normalizer_witness(g: &Mat, depth_cap: usize) -> Result<NormalizerWitness> {
    let d = g.disc();
    d.require_gap()?;
    let lambda = g.m11();
    let mu = g.m21();
    if mu.is_zero() {
        return Err(Error::Precondition("bottom-left entry is zero".into()));
    }
    let ratio = KElem::new(lambda.clone(), mu)?;
    if !lattice_points_within(&ratio, &Rat::one(), false).is_empty() {
        return Err(Error::Precondition(format!(
            "ratio {ratio} lies under a unit hemisphere"
        )));
    }
    if !membership(g, depth_cap)?.is_non_member() {
        return Err(Error::Precondition(
            "matrix is not certified outside PE₂".into(),
        ));
    }
    let mu2 = mu * mu;
    let zero = KElem::from_oint(d.zero());
    let mut alphas = lattice_points_within(
        &zero,
        &Rat::from_integer(BigInt::from(NORMALIZER_NORM_BOUND)),
        true,
    );
    alphas.retain(|a| !a.is_zero());
    alphas.sort_by(|a, b| a.norm().cmp(&b.norm()).then_with(|| a.cmp(b)));
    let mut tried = 0;
    for alpha in alphas {
        let shift = KElem::from_oint(d.one()).div(&KElem::from_oint(&alpha * &mu2))?;
        let shifted = ratio.sub(&shift);
        if !lattice_points_within(&shifted, &Rat::one(), true).is_empty() {
            continue;
        }
        tried += 1;
        let conjugate = g.mul(&Mat::s(&alpha)).mul(&g.inv());
        if membership(&conjugate, depth_cap)?.is_non_member() {
            let top = &d.one() - &(&(&alpha * lambda) * mu);
            let bottom = -(&alpha * &mu2);
            let entries_verified = (conjugate.m11() == &top && conjugate.m21() == &bottom)
                || (conjugate.m11() == &-&top && conjugate.m21() == &-&bottom);
            let conj_ratio = KElem::new(conjugate.m11().clone(), conjugate.m21())?;
            return Ok(NormalizerWitness {
                alpha,
                entries_verified: entries_verified && conj_ratio == shifted,
                conjugate,
                shifted_ratio: shifted,
                candidates_tried: tried,
            });
        }
    }
    Err(Error::WitnessNotFound(NORMALIZER_NORM_BOUND))
}

/// `r`, `s(1)` and `s(τ)·r·s(τ)⁻¹`.
pub fn n_generators(d: Discriminant) -> Result<Vec<Word>> {
    d.require_gap()?;
    let st = Word::s(&d.tau());
    Ok(vec![
        Word::r(d),
        Word::s(&d.one()),
        st.concat(&Word::r(d)).concat(&st.inverse()),
    ])
}

/// Image under `r ↦ 1`, `s(a + bτ) ↦ s(bτ)`.
pub fn collapse(w: &Word) -> Word {
    let d = w.disc();
    w.substitute(true, |a| OInt::new(d, BigInt::zero(), a.b().clone()))
        .free_reduce()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollapseCheck {
    /// `(relation, image, image is the identity)`.
    pub relations: Vec<(Word, Word, bool)>,
    /// `(generator of N, image, image is the identity)`.
    pub n_generators: Vec<(Word, Word, bool)>,
    pub s_tau_image: Word,
    pub holds: bool,
}

/// Checks that the collapse kills every defining relation and every generator
/// of `N` but not `s(τ)`, so `N` lies in a proper normal subgroup.
pub fn collapse_hom_check(d: Discriminant) -> Result<CollapseCheck> {
    let pres = presentation(d)?;
    let row = |w: &Word| {
        let img = collapse(w);
        let id = img.to_matrix().is_identity();
        (w.clone(), img, id)
    };
    let relations: Vec<_> = pres.relations.iter().map(|r| row(&r.word)).collect();
    let n_gens: Vec<_> = n_generators(d)?.iter().map(row).collect();
    let s_tau_image = collapse(&Word::s(&d.tau()));
    let holds = relations.iter().all(|r| r.2)
        && n_gens.iter().all(|r| r.2)
        && !s_tau_image.to_matrix().is_identity();
    Ok(CollapseCheck {
        relations,
        n_generators: n_gens,
        s_tau_image,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmalgamFaceKind {
    Hemisphere {
        center: KElem,
        radius_sq: Rat,
    },
    Wall {
        from: crate::arith::PlanePoint,
        to: crate::arith::PlanePoint,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamFace {
    pub face: FaceRef,
    pub kind: AmalgamFaceKind,
    pub pairing: Mat,
    /// Standard form of the pairing when it lies in `PE₂(O)`.
    pub pairing_form: Option<StandardForm>,
    pub above: bool,
    pub below: bool,
}

#[derive(Clone, Debug)]
pub struct AmalgamReport {
    pub d: Discriminant,
    pub plane: Rat,
    pub norm_bound: u64,
    pub resolution: Rat,
    pub hemispheres_considered: usize,
    pub faces: Vec<AmalgamFace>,
    pub above_generators: Vec<Mat>,
    pub below_generators: Vec<Mat>,
    pub overlap_generators: Vec<Mat>,
    pub n_generators: Vec<Word>,
    /// Overlap pairings equal the generators of `N` up to inversion.
    pub overlap_matches_n: bool,
    /// Paired faces lie on the same sides of the plane.
    pub pairs_consistent: bool,
    pub hom_check: CollapseCheck,
}

fn dedup_up_to_inverse(ms: impl Iterator<Item = Mat>) -> Vec<Mat> {
    let mut out: Vec<Mat> = Vec::new();
    for m in ms {
        let inv = m.inv();
        if !out.iter().any(|x| *x == m || *x == inv) {
            out.push(m);
        }
    }
    out
}

pub fn amalgam_report(
    d: Discriminant,
    norm_bound: u64,
    plane: &Rat,
    eps: &Rat,
    depth_cap: usize,
) -> Result<AmalgamReport> {
    d.require_gap()?;
    let arr = Arrangement::amalgam(d, norm_bound, eps)?;
    let split = plane_split(&arr, plane);
    let faces = split
        .faces
        .iter()
        .map(|f| {
            let kind = match f.face {
                FaceRef::Hemisphere(i) => {
                    let h = &arr.set.hemispheres[i].hemisphere;
                    AmalgamFaceKind::Hemisphere {
                        center: h.center.clone(),
                        radius_sq: h.radius_sq.clone(),
                    }
                }
                FaceRef::Wall(i) => AmalgamFaceKind::Wall {
                    from: arr.walls[i].from.clone(),
                    to: arr.walls[i].to.clone(),
                },
            };
            let (res, _) = membership_with_stats(&f.pairing, depth_cap)?;
            let pairing_form = match res {
                MembershipResult::Member { certificate } => Some(certificate),
                _ => None,
            };
            Ok(AmalgamFace {
                face: f.face,
                kind,
                pairing: f.pairing.clone(),
                pairing_form,
                above: f.above,
                below: f.below,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let above_generators = dedup_up_to_inverse(split.above().map(|f| f.pairing.clone()));
    let below_generators = dedup_up_to_inverse(split.below().map(|f| f.pairing.clone()));
    let overlap_generators = dedup_up_to_inverse(split.overlap().map(|f| f.pairing.clone()));
    let n_gens = n_generators(d)?;
    let n_mats: Vec<Mat> = n_gens.iter().map(Word::to_matrix).collect();
    let overlap_matches_n = overlap_generators.len() == n_mats.len()
        && n_mats
            .iter()
            .all(|m| overlap_generators.iter().any(|x| x == m || *x == m.inv()));
    let statuses_ok = arr.statuses.iter().any(FaceStatus::contributes);
    Ok(AmalgamReport {
        d,
        plane: plane.clone(),
        norm_bound,
        resolution: eps.clone(),
        hemispheres_considered: arr.set.len(),
        pairs_consistent: statuses_ok && split.pairs_consistent(&arr),
        faces,
        above_generators,
        below_generators,
        overlap_generators,
        n_generators: n_gens,
        overlap_matches_n,
        hom_check: collapse_hom_check(d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::PlanePoint;
    use crate::moebius::Side;
    use crate::words::{random_pe2_word, DEFAULT_DEPTH_CAP};
    use proptest::prelude::*;

    const DISCS: [i64; 7] = [-15, -16, -19, -20, -23, -24, -40];

    fn d(x: i64) -> Discriminant {
        Discriminant::new(x).unwrap()
    }

    #[test]
    fn gap_point_examples() {
        let dd = d(-40);
        let pts = gap_points(dd, 10).unwrap();
        let gp = pts
            .iter()
            .find(|g| g.lambda == dd.elem(1, 1) && g.mu == dd.int(2))
            .expect("(1+τ)/2 is a gap point");
        assert_eq!(gp.min_dist_sq, rat(11, 4));
        for g in &pts {
            assert!(g.verify());
            for gamma in &g.checked {
                let owner = Word::parse("r", dd)
                    .unwrap()
                    .to_matrix()
                    .mul(&Mat::s(&-gamma));
                assert_eq!(owner.outside_test(&g.ratio).unwrap(), Side::Outside);
            }
        }
        let dd = d(-16);
        let pts = gap_points(dd, 5).unwrap();
        let half_plus_i = KElem::new(dd.elem(1, 1), &dd.int(2)).unwrap();
        assert_eq!(
            PlanePoint::from_kelem(&half_plus_i),
            PlanePoint::new(rat(1, 2), rat(1, 4))
        );
        let gp = pts.iter().find(|g| g.ratio == half_plus_i).unwrap();
        assert_eq!(gp.min_dist_sq, rat(5, 4));
        assert!(gap_points(d(-11), 1).is_err());
    }

    #[test]
    fn gap_ratios_distinct() {
        for x in DISCS {
            let pts = gap_points(d(x), 40).unwrap();
            assert_eq!(pts.len(), 40);
            for (i, a) in pts.iter().enumerate() {
                for b in &pts[..i] {
                    assert!(a.ratio.sub(&b.ratio).to_oint().is_none());
                }
            }
        }
    }

    #[test]
    fn small_coset_family() {
        let fam = coset_family(d(-40), 1, DEFAULT_DEPTH_CAP).unwrap();
        assert_eq!(fam.members.len(), 1);
        assert!(fam.checks.is_empty());
        let fam = coset_family(d(-23), 12, DEFAULT_DEPTH_CAP).unwrap();
        assert_eq!(fam.members.len(), 12);
        assert!(fam.all_distinct());
        let m = &fam.members[3].completion;
        assert!(membership(&m.mul(&m.inv()), DEFAULT_DEPTH_CAP)
            .unwrap()
            .is_member());
        // Distinctness is symmetric.
        for a in &fam.members[..5] {
            for b in &fam.members[..5] {
                if a != b {
                    let ab = membership(&a.completion.mul(&b.completion.inv()), 64).unwrap();
                    let ba = membership(&b.completion.mul(&a.completion.inv()), 64).unwrap();
                    assert_eq!(ab.is_non_member(), ba.is_non_member());
                }
            }
        }
    }

    #[test]
    fn normalizer_example() {
        let dd = d(-40);
        let g = Mat::new(dd.elem(1, 1), dd.int(5), dd.int(2), dd.elem(1, -1)).unwrap();
        let w = normalizer_witness(&g, DEFAULT_DEPTH_CAP).unwrap();
        assert!(!w.alpha.is_zero());
        assert!(w.entries_verified);
        let shift = g.m11().clone();
        let ratio = KElem::new(shift, g.m21()).unwrap();
        let conj_ratio = KElem::new(w.conjugate.m11().clone(), w.conjugate.m21()).unwrap();
        let expected = KElem::from_oint(dd.one())
            .div(&KElem::from_oint(&w.alpha * &(g.m21() * g.m21())))
            .unwrap();
        assert_eq!(ratio.sub(&conj_ratio), expected);
        assert!(matches!(
            normalizer_witness(&Mat::identity(dd), 8),
            Err(Error::Precondition(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn conjugation_entries(x in prop::sample::select(DISCS.to_vec()), seed in any::<u64>(),
                               a in -20i64..20, b in -5i64..5) {
            let dd = d(x);
            let g = random_pe2_word(seed, 12, 6, dd).to_matrix();
            let alpha = dd.elem(a, b);
            let c = g.mul(&Mat::s(&alpha)).mul(&g.inv());
            let (l, m) = (g.m11(), g.m21());
            let top = &dd.one() - &(&(&alpha * l) * m);
            let bottom = -(&alpha * &(m * m));
            prop_assert!((c.m11() == &top && c.m21() == &bottom) || (c.m11() == &-&top && c.m21() == &-&bottom));
        }
    }

    #[test]
    fn n_generators_and_collapse() {
        for x in DISCS {
            let dd = d(x);
            let gens = n_generators(dd).unwrap();
            assert_eq!(gens.len(), 3);
            for g in &gens {
                assert!(g.to_matrix().det().is_one());
                assert!(membership(&g.to_matrix(), 16).unwrap().is_member());
            }
            let h = gens[2].to_matrix().isometric_hemisphere().unwrap();
            assert_eq!(h.center, KElem::from_oint(dd.tau()));
            assert!(h.radius_is_one());
            let check = collapse_hom_check(dd).unwrap();
            assert!(check.holds);
            assert!(check.relations.iter().all(|r| r.1.is_empty() || r.2));
            assert_eq!(check.s_tau_image, Word::s(&dd.tau()));
        }
        let dd = d(-40);
        let comm = Word::parse("s(1)*s(t)*s(-1)*s(-t)", dd).unwrap();
        assert_eq!(collapse(&comm).to_string(), "1");
        assert!(collapse(&Word::parse("r*r", dd).unwrap()).is_empty());
        assert!(n_generators(d(-7)).is_err());
    }
}
