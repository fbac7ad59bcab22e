//! Ford domain of `PE₂(O)` above the Voronoi cell of `0`, its face pairings,
//! edge cycles and the resulting presentation.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{rat, Discriminant, OInt, PlanePoint, Rat};
use crate::error::{Error, Result};
use crate::moebius::Mat;
use crate::words::{Letter, Word};

/// Cap used when computing the order of a cycle transformation.
pub const ORDER_CAP: u32 = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolygonKind {
    Rectangle,
    Hexagon,
}

/// Convex polygon in `(u, v)` coordinates, vertices counter-clockwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FundPolygon {
    pub d: Discriminant,
    pub kind: PolygonKind,
    pub center: PlanePoint,
    pub vertices: Vec<PlanePoint>,
}

impl FundPolygon {
    /// Segments `(vᵢ, vᵢ₊₁)`.
    pub fn sides(&self) -> impl Iterator<Item = (&PlanePoint, &PlanePoint)> {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }

    /// Area in `(u, v)` coordinates; the actual area is `√|Δ|` times this.
    pub fn uv_area(&self) -> Rat {
        let twice: Rat = self
            .sides()
            .map(|(a, b)| &a.u * &b.v - &b.u * &a.v)
            .fold(Rat::zero(), |s, x| s + x);
        twice / rat(2, 1)
    }

    /// Closed containment.
    pub fn contains(&self, p: &PlanePoint) -> bool {
        self.sides().all(|(a, b)| {
            let e = b.sub(a);
            let w = p.sub(a);
            !(&e.u * &w.v - &e.v * &w.u).is_negative()
        })
    }

    /// Exact squared distance from `p` to the closed polygon.
    pub fn dist_sq_to(&self, p: &PlanePoint) -> Rat {
        if self.contains(p) {
            return Rat::zero();
        }
        self.sides()
            .map(|(a, b)| segment_dist_sq(p, a, b, self.d))
            .min()
            .expect("polygon has sides")
    }

    /// `(u_min, u_max, v_min, v_max)`.
    pub fn bounding_box(&self) -> (Rat, Rat, Rat, Rat) {
        let us = self.vertices.iter().map(|p| &p.u);
        let vs = self.vertices.iter().map(|p| &p.v);
        (
            us.clone().min().unwrap().clone(),
            us.max().unwrap().clone(),
            vs.clone().min().unwrap().clone(),
            vs.max().unwrap().clone(),
        )
    }
}

/// Squared distance from `p` to the segment `[a, b]` in the metric `u² + |Δ|v²`.
pub fn segment_dist_sq(p: &PlanePoint, a: &PlanePoint, b: &PlanePoint, d: Discriminant) -> Rat {
    let e = b.sub(a);
    let len = e.norm_sq(d);
    if len.is_zero() {
        return p.dist_sq(a, d);
    }
    let t = p.sub(a).dot(&e, d) / &len;
    let t = t.max(Rat::zero()).min(Rat::one());
    p.dist_sq(&a.add(&e.scale(&t)), d)
}

/// Lattice neighbours whose bisectors bound the Voronoi cell of `0`, in
/// counter-clockwise order.
pub fn voronoi_neighbors(d: Discriminant) -> Result<Vec<OInt>> {
    d.require_units_pm1()?;
    let one = d.one();
    let tau = d.tau();
    Ok(if d.is_odd() {
        let t1 = &tau - &one;
        vec![one.clone(), tau.clone(), t1.clone(), -&one, -&tau, -&t1]
    } else {
        vec![one.clone(), tau.clone(), -&one, -&tau]
    })
}

/// Intersection of the bisectors between `0` and `n1`, and `0` and `n2`.
fn bisector_meet(n1: &PlanePoint, n2: &PlanePoint, d: Discriminant) -> PlanePoint {
    let dd = rat(d.abs(), 1);
    let c1 = n1.norm_sq(d) / rat(2, 1);
    let c2 = n2.norm_sq(d) / rat(2, 1);
    let det = (&n1.u * &n2.v - &n2.u * &n1.v) * &dd;
    let u = (&c1 * &n2.v - &c2 * &n1.v) * &dd / &det;
    let v = (&n1.u * &c2 - &n2.u * &c1) / &det;
    PlanePoint::new(u, v)
}

/// Voronoi cell of the lattice around `center`.
pub fn voronoi_cell(d: Discriminant, center: &OInt) -> Result<FundPolygon> {
    let nbrs: Vec<PlanePoint> = voronoi_neighbors(d)?
        .iter()
        .map(PlanePoint::from_oint)
        .collect();
    let c = PlanePoint::from_oint(center);
    let k = nbrs.len();
    let vertices = (0..k)
        .map(|i| bisector_meet(&nbrs[i], &nbrs[(i + 1) % k], d).add(&c))
        .collect();
    Ok(FundPolygon {
        d,
        kind: if d.is_odd() {
            PolygonKind::Hexagon
        } else {
            PolygonKind::Rectangle
        },
        center: c,
        vertices,
    })
}

/// The unit-width rectangle `[-1/2, 1/2] × [0, 1/2]` in `(u, v)`, centred at
/// `√Δ/4`.
pub fn amalgam_rectangle(d: Discriminant) -> Result<FundPolygon> {
    d.require_gap()?;
    let h = rat(1, 2);
    let z = Rat::zero();
    Ok(FundPolygon {
        d,
        kind: PolygonKind::Rectangle,
        center: PlanePoint::new(z.clone(), rat(1, 4)),
        vertices: vec![
            PlanePoint::new(-&h, z.clone()),
            PlanePoint::new(h.clone(), z.clone()),
            PlanePoint::new(h.clone(), h.clone()),
            PlanePoint::new(-&h, h.clone()),
        ],
    })
}

/// Expands `s(a+bτ)` into shifts by `±1` and `±τ`; the `τ` part comes first
/// when `b > 0`, so `s(x)` and `s(-x)` expand to mutually inverse words.
pub fn shift_word(x: &OInt) -> Word {
    let d = x.disc();
    let a = x.a().to_i64().expect("small shift");
    let b = x.b().to_i64().expect("small shift");
    let unit = |n: i64, g: OInt| -> Vec<Letter> {
        let l = if n > 0 { Letter::S(g) } else { Letter::S(-g) };
        std::iter::repeat_n(l, n.unsigned_abs() as usize).collect()
    };
    let ones = unit(a, d.one());
    let taus = unit(b, d.tau());
    let letters = if b > 0 {
        [taus, ones].concat()
    } else {
        [ones, taus].concat()
    };
    Word::new(d, letters)
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum FaceKind {
    /// Vertical wall over the side of the polygon facing lattice point `facing`.
    Wall {
        facing: OInt,
        from: PlanePoint,
        to: PlanePoint,
    },
    /// Unit hemisphere centred at a lattice point.
    Hemi { center: OInt },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub kind: FaceKind,
    /// Maps this face onto face `partner`.
    pub pairing: Mat,
    /// Single-letter word of the pairing.
    pub pairing_word: Word,
    /// The pairing written in `r`, `s(±1)`, `s(±τ)`.
    pub generator_word: Word,
    pub partner: usize,
}

impl Face {
    pub fn is_wall(&self) -> bool {
        matches!(self.kind, FaceKind::Wall { .. })
    }
}

impl fmt::Display for Face {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            FaceKind::Wall { facing, from, to } => {
                write!(
                    f,
                    "wall facing {facing} from {from} to {to}, paired by {}",
                    self.pairing_word
                )
            }
            FaceKind::Hemi { center } => {
                write!(
                    f,
                    "unit hemisphere at {center}, paired by {}",
                    self.pairing_word
                )
            }
        }
    }
}

/// Faces of the Ford domain over the Voronoi cell of `0`: the unit hemisphere
/// at `0` (paired to itself by `r`) and one wall per polygon side, the wall
/// facing `n` being paired with the wall facing `-n` by `s(-n)`.
pub fn pe2_ford_faces(d: Discriminant) -> Result<Vec<Face>> {
    d.require_gap()?;
    let poly = voronoi_cell(d, &d.zero())?;
    let nbrs = voronoi_neighbors(d)?;
    let k = nbrs.len();
    let mut faces = vec![Face {
        kind: FaceKind::Hemi { center: d.zero() },
        pairing: Mat::r(d),
        pairing_word: Word::r(d),
        generator_word: Word::r(d),
        partner: 0,
    }];
    for (i, n) in nbrs.iter().enumerate() {
        let shift = -n;
        faces.push(Face {
            kind: FaceKind::Wall {
                facing: n.clone(),
                from: poly.vertices[(i + k - 1) % k].clone(),
                to: poly.vertices[i].clone(),
            },
            pairing: Mat::s(&shift),
            pairing_word: Word::s(&shift),
            generator_word: shift_word(&shift),
            partner: 1 + (i + k / 2) % k,
        });
    }
    Ok(faces)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Edge {
    /// Vertical half-line above a polygon vertex.
    Vertical { foot: PlanePoint },
    /// Intersection of the unit hemisphere at `0` with the bisector wall of `0` and `facing`.
    Arc { facing: OInt },
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Edge::Vertical { foot } => write!(f, "vertical edge over {foot}"),
            Edge::Arc { facing } => {
                write!(f, "arc of the unit hemisphere on the wall facing {facing}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycleKind {
    Vertical,
    Hemisphere,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCycle {
    pub kind: CycleKind,
    pub edges: Vec<usize>,
    /// Faces whose pairings were applied, in order.
    pub faces: Vec<usize>,
    /// Product of the pairing letters, last applied leftmost.
    pub word: Word,
    pub transform: Mat,
    pub exponent: u32,
    /// `word^exponent`.
    pub relation: Word,
}

impl EdgeCycle {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Faces, edges and incidences of the `PE₂(O)` Ford domain.
#[derive(Clone, Debug)]
pub struct FordDomain {
    pub d: Discriminant,
    pub polygon: FundPolygon,
    pub faces: Vec<Face>,
    pub edges: Vec<Edge>,
    /// The two faces containing each edge.
    pub incidence: Vec<[usize; 2]>,
}

impl FordDomain {
    pub fn pe2(d: Discriminant) -> Result<Self> {
        let faces = pe2_ford_faces(d)?;
        let polygon = voronoi_cell(d, &d.zero())?;
        let k = polygon.vertices.len();
        let mut edges = Vec::new();
        let mut incidence = Vec::new();
        // Vertex i joins the walls facing neighbours i and i+1 (faces i+1, i+2).
        for (i, v) in polygon.vertices.iter().enumerate() {
            edges.push(Edge::Vertical { foot: v.clone() });
            incidence.push([1 + i, 1 + (i + 1) % k]);
        }
        // The unit hemisphere meets a wall in an arc when the wall's side
        // passes strictly inside the unit disc.
        let origin = PlanePoint::origin();
        for (idx, face) in faces.iter().enumerate() {
            if let FaceKind::Wall { facing, from, to } = &face.kind {
                if segment_dist_sq(&origin, from, to, d) < Rat::one() {
                    edges.push(Edge::Arc {
                        facing: facing.clone(),
                    });
                    incidence.push([0, idx]);
                }
            }
        }
        Ok(Self {
            d,
            polygon,
            faces,
            edges,
            incidence,
        })
    }

    /// Image of edge `e` under the pairing of face `f`, which must contain it.
    fn image(&self, e: &Edge, f: usize) -> Result<Edge> {
        let face = &self.faces[f];
        let unsupported = || Error::UnsupportedPairing(format!("{e} under {}", face.pairing_word));
        match (&face.kind, e) {
            (FaceKind::Wall { facing, .. }, Edge::Vertical { foot }) => Ok(Edge::Vertical {
                foot: foot.sub(&PlanePoint::from_oint(facing)),
            }),
            // S₀ ∩ W(0, n) moves to S₋ₙ ∩ W(-n, 0) = S₀ ∩ W(0, -n).
            (FaceKind::Wall { facing, .. }, Edge::Arc { facing: n }) if n == facing => {
                Ok(Edge::Arc { facing: -n })
            }
            // r acts on the unit sphere as the reflection u ↦ -u.
            (FaceKind::Hemi { center }, Edge::Arc { facing }) if center.is_zero() => {
                let p = PlanePoint::from_oint(facing);
                PlanePoint::new(-p.u, p.v)
                    .to_kelem(self.d)
                    .to_oint()
                    .map(|n| Edge::Arc { facing: n })
                    .ok_or_else(unsupported)
            }
            _ => Err(unsupported()),
        }
    }

    /// Follows every edge cycle once.
    pub fn edge_cycles(&self) -> Result<Vec<EdgeCycle>> {
        let mut seen: HashSet<(usize, usize)> = HashSet::new();
        let mut cycles = Vec::new();
        for e0 in 0..self.edges.len() {
            for &f0 in &self.incidence[e0] {
                if seen.contains(&(e0, f0)) {
                    continue;
                }
                let cycle = self.follow(e0, f0)?;
                for (&e, &f) in cycle.edges.iter().zip(&cycle.faces) {
                    seen.insert((e, f));
                    seen.insert((e, self.other_face(e, f)));
                }
                cycles.push(cycle);
            }
        }
        Ok(cycles)
    }

    fn other_face(&self, e: usize, f: usize) -> usize {
        let [a, b] = self.incidence[e];
        if a == f {
            b
        } else {
            a
        }
    }

    fn follow(&self, e0: usize, f0: usize) -> Result<EdgeCycle> {
        let (mut e, mut f) = (e0, f0);
        let mut edges = Vec::new();
        let mut faces = Vec::new();
        let mut transform = Mat::identity(self.d);
        let mut letters: Vec<Letter> = Vec::new();
        for _ in 0..=2 * self.edges.len() {
            edges.push(e);
            faces.push(f);
            let img = self.image(&self.edges[e], f)?;
            let e1 = self
                .edges
                .iter()
                .position(|x| *x == img)
                .ok_or(Error::CycleNotClosed(e0))?;
            let landed = self.faces[f].partner;
            if !self.incidence[e1].contains(&landed) {
                return Err(Error::CycleNotClosed(e0));
            }
            transform = self.faces[f].pairing.mul(&transform);
            let mut next = self.faces[f].pairing_word.letters().to_vec();
            next.extend(letters);
            letters = next;
            let f1 = self.other_face(e1, landed);
            if (e1, f1) == (e0, f0) {
                let exponent = transform
                    .order_in_psl(ORDER_CAP)
                    .ok_or(Error::NonEllipticCycle(ORDER_CAP))?;
                let word = Word::new(self.d, letters);
                let kind = match self.edges[e0] {
                    Edge::Vertical { .. } => CycleKind::Vertical,
                    Edge::Arc { .. } => CycleKind::Hemisphere,
                };
                return Ok(EdgeCycle {
                    kind,
                    relation: word.pow(exponent),
                    edges,
                    faces,
                    word,
                    transform,
                    exponent,
                });
            }
            e = e1;
            f = f1;
        }
        Err(Error::CycleNotClosed(e0))
    }

    /// `T²` for every face paired to itself by `T`.
    pub fn reflection_relations(&self) -> Vec<Word> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(i, face)| face.partner == *i)
            .map(|(_, face)| face.pairing_word.pow(2))
            .collect()
    }
}

pub fn edge_cycles(d: Discriminant) -> Result<Vec<EdgeCycle>> {
    FordDomain::pe2(d)?.edge_cycles()
}

fn is_generator_letter(l: &Letter) -> bool {
    match l {
        Letter::R => true,
        Letter::S(a) => {
            let d = a.disc();
            *a == d.one() || *a == -d.one() || *a == d.tau() || *a == -d.tau()
        }
    }
}

/// Solves a relator containing `s(x)^{±1}` exactly once for `s(x)`.
fn solve_for(rel: &Word, x: &OInt) -> Option<Word> {
    let ls = rel.letters();
    let hits: Vec<usize> = ls
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Letter::S(a) if a == x || *a == -x))
        .map(|(i, _)| i)
        .collect();
    if hits.len() != 1 {
        return None;
    }
    let i = hits[0];
    let mut rest: Vec<Letter> = ls[i + 1..].to_vec();
    rest.extend_from_slice(&ls[..i]);
    if !rest.iter().all(is_generator_letter) {
        return None;
    }
    // s(x)·U = 1 gives s(x) = U⁻¹; s(-x)·U = 1 gives s(x) = U.
    let u = Word::new(rel.disc(), rest);
    Some(if ls[i] == Letter::S(x.clone()) {
        u.inverse()
    } else {
        u
    })
}

fn substitute(rel: &Word, x: &OInt, expr: &Word) -> Word {
    let mut out = Vec::new();
    for l in rel.letters() {
        match l {
            Letter::S(a) if a == x => out.extend(expr.letters().iter().cloned()),
            Letter::S(a) if *a == -x => out.extend(expr.inverse().letters().iter().cloned()),
            _ => out.push(l.clone()),
        }
    }
    Word::new(rel.disc(), out)
}

/// Rewrites each cycle relation over `r, s(1), s(τ)`, eliminating any other
/// pairing letter with a different cycle that contains it exactly once.
pub fn relations_in_generators(cycles: &[EdgeCycle]) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(cycles.len());
    for (i, c) in cycles.iter().enumerate() {
        let mut rel = c.relation.clone();
        while let Some(x) = rel.letters().iter().find_map(|l| match l {
            Letter::S(a) if !is_generator_letter(l) => Some(a.clone()),
            _ => None,
        }) {
            let expr = cycles
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .find_map(|(_, o)| solve_for(&o.relation, &x))
                .ok_or_else(|| Error::PresentationMismatch(format!("cannot eliminate s({x})")))?;
            rel = substitute(&rel, &x, &expr);
        }
        out.push(rel.free_reduce());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: &'static str,
    pub word: Word,
    pub verified: bool,
}

/// Notes on the relation coming from the hemisphere edge cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HemisphereCycleNote {
    /// Order of `rs(1)` in `PSL₂(O)`.
    pub order: u32,
    /// Whether `(rs(1))²` is the identity.
    pub squared_relation_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub d: Discriminant,
    pub generators: Vec<(&'static str, Word)>,
    pub relations: Vec<Relation>,
    /// Relations read off the Ford domain, in the generators.
    pub derived: Vec<Word>,
    pub cross_checked: bool,
    pub hemisphere_cycle: HemisphereCycleNote,
}

/// `⟨r, s(1), s(τ) | [s(1), s(τ)], r², (rs(1))³⟩`, cross-checked against the
/// relations read off the Ford domain.
pub fn presentation(d: Discriminant) -> Result<Presentation> {
    d.require_gap()?;
    let r = Word::r(d);
    let s1 = Word::s(&d.one());
    let st = Word::s(&d.tau());
    let commutator = s1.concat(&st).concat(&s1.inverse()).concat(&st.inverse());
    let rs1 = r.concat(&s1);
    let expected = [
        ("commutator", commutator),
        ("r^2", r.pow(2)),
        ("(r*s(1))^3", rs1.pow(3)),
    ];
    let relations: Vec<Relation> = expected
        .iter()
        .map(|(name, w)| Relation {
            name,
            word: w.clone(),
            verified: w.to_matrix().is_identity(),
        })
        .collect();

    let dom = FordDomain::pe2(d)?;
    let cycles = dom.edge_cycles()?;
    let mut derived = dom.reflection_relations();
    derived.extend(relations_in_generators(&cycles)?);
    let got: BTreeSet<Vec<Letter>> = derived
        .iter()
        .map(|w| w.canonical_relator().letters().to_vec())
        .filter(|l| !l.is_empty())
        .collect();
    let want: BTreeSet<Vec<Letter>> = expected
        .iter()
        .map(|(_, w)| w.canonical_relator().letters().to_vec())
        .collect();
    if got != want {
        let show = |s: &BTreeSet<Vec<Letter>>| {
            s.iter()
                .map(|l| Word::new(d, l.clone()).to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(Error::PresentationMismatch(format!(
            "domain gives {{{}}}, expected {{{}}}",
            show(&got),
            show(&want)
        )));
    }
    let rs1m = rs1.to_matrix();
    Ok(Presentation {
        d,
        generators: vec![("r", r), ("s(1)", s1), ("s(t)", st)],
        relations,
        derived,
        cross_checked: true,
        hemisphere_cycle: HemisphereCycleNote {
            order: rs1m
                .order_in_psl(ORDER_CAP)
                .ok_or(Error::NonEllipticCycle(ORDER_CAP))?,
            squared_relation_holds: rs1m.pow(2).is_identity(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::lattice_points_within;
    use crate::moebius::Side;
    use crate::words::StandardForm;

    const DISCS: [i64; 7] = [-15, -16, -19, -20, -23, -24, -40];

    fn d(x: i64) -> Discriminant {
        Discriminant::new(x).unwrap()
    }

    fn pp(u: (i64, i64), v: (i64, i64)) -> PlanePoint {
        PlanePoint::new(rat(u.0, u.1), rat(v.0, v.1))
    }

    #[test]
    fn voronoi_shapes() {
        let cell = voronoi_cell(d(-40), &d(-40).zero()).unwrap();
        assert_eq!(cell.kind, PolygonKind::Rectangle);
        assert_eq!(
            cell.vertices,
            vec![
                pp((1, 2), (1, 4)),
                pp((-1, 2), (1, 4)),
                pp((-1, 2), (-1, 4)),
                pp((1, 2), (-1, 4))
            ]
        );
        assert_eq!(cell.uv_area(), rat(1, 2));
        let hex = voronoi_cell(d(-15), &d(-15).zero()).unwrap();
        assert_eq!(hex.kind, PolygonKind::Hexagon);
        assert_eq!(hex.vertices.len(), 6);
        assert!(hex.vertices.contains(&pp((1, 2), (7, 30))));
        assert!(hex.vertices.contains(&pp((0, 1), (16, 60))));
        assert!(voronoi_cell(d(-4), &d(-4).zero()).is_err());
        let moved = voronoi_cell(d(-40), &d(-40).elem(2, 1)).unwrap();
        assert_eq!(moved.center, pp((2, 1), (1, 2)));
        assert!(moved.contains(&pp((2, 1), (1, 2))));
    }

    #[test]
    fn voronoi_property() {
        for x in DISCS {
            let dd = d(x);
            let cell = voronoi_cell(dd, &dd.zero()).unwrap();
            assert_eq!(cell.uv_area(), rat(1, 2));
            for v in &cell.vertices {
                let z = v.to_kelem(dd);
                let r = z.norm();
                assert!(lattice_points_within(&z, &r, false).is_empty());
                assert!(lattice_points_within(&z, &r, true).len() >= 3);
            }
            // Central symmetry.
            for v in &cell.vertices {
                assert!(cell
                    .vertices
                    .contains(&PlanePoint::new(-v.u.clone(), -v.v.clone())));
            }
        }
    }

    #[test]
    fn amalgam_rectangle_geometry() {
        let dd = d(-40);
        let rect = amalgam_rectangle(dd).unwrap();
        assert_eq!(rect.center, pp((0, 1), (1, 4)));
        assert_eq!(rect.uv_area(), rat(1, 2));
        assert!(rect.contains(&PlanePoint::origin()));
        assert!(rect.contains(&PlanePoint::from_oint(&dd.tau())));
        assert_eq!(
            amalgam_rectangle(d(-15)).unwrap().center,
            pp((0, 1), (1, 4))
        );
        assert!(amalgam_rectangle(d(-11)).is_err());
        assert_eq!(rect.dist_sq_to(&pp((1, 1), (0, 1))), rat(1, 4));
        assert_eq!(rect.dist_sq_to(&pp((0, 1), (1, 1))), rat(10, 1));
    }

    #[test]
    fn face_lists() {
        let f40 = pe2_ford_faces(d(-40)).unwrap();
        assert_eq!(f40.len(), 5);
        assert_eq!(f40.iter().filter(|f| f.is_wall()).count(), 4);
        assert_eq!(f40[0].pairing, Mat::r(d(-40)));
        assert_eq!(f40[0].partner, 0);
        let f15 = pe2_ford_faces(d(-15)).unwrap();
        assert_eq!(f15.iter().filter(|f| f.is_wall()).count(), 6);
        assert!(pe2_ford_faces(d(-8)).is_err());
        for face in &f15 {
            assert_eq!(face.generator_word.to_matrix(), face.pairing);
            assert!(face
                .generator_word
                .letters()
                .iter()
                .all(is_generator_letter));
        }
    }

    #[test]
    fn pairings_are_involutive() {
        for x in DISCS {
            for (i, f) in pe2_ford_faces(d(x)).unwrap().iter().enumerate() {
                let faces = pe2_ford_faces(d(x)).unwrap();
                let partner = &faces[f.partner];
                assert_eq!(partner.partner, i);
                assert_eq!(partner.pairing, f.pairing.inv());
                if let (
                    FaceKind::Wall { facing, from, to },
                    FaceKind::Wall {
                        from: pf, to: pt, ..
                    },
                ) = (&f.kind, &partner.kind)
                {
                    let shift = PlanePoint::from_oint(facing);
                    let img: BTreeSet<_> = [from.sub(&shift), to.sub(&shift)].into_iter().collect();
                    let tgt: BTreeSet<_> = [pf.clone(), pt.clone()].into_iter().collect();
                    assert_eq!(img, tgt);
                }
            }
        }
    }

    #[test]
    fn cycles_even_and_odd() {
        let c40 = edge_cycles(d(-40)).unwrap();
        let mut lens: Vec<usize> = c40.iter().map(EdgeCycle::len).collect();
        lens.sort();
        assert_eq!(lens, vec![2, 4]);
        let hemi = c40
            .iter()
            .find(|c| c.kind == CycleKind::Hemisphere)
            .unwrap();
        assert_eq!(hemi.exponent, 3);
        let vert = c40.iter().find(|c| c.kind == CycleKind::Vertical).unwrap();
        assert_eq!(vert.exponent, 1);
        assert!(vert.transform.is_identity());

        let c15 = edge_cycles(d(-15)).unwrap();
        let vert: Vec<_> = c15
            .iter()
            .filter(|c| c.kind == CycleKind::Vertical)
            .collect();
        assert_eq!(vert.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![3, 3]);
        assert_eq!(
            c15.iter()
                .filter(|c| c.kind == CycleKind::Hemisphere)
                .count(),
            1
        );

        for x in DISCS {
            for c in edge_cycles(d(x)).unwrap() {
                assert!(c.relation.to_matrix().is_identity());
            }
        }
    }

    #[test]
    fn odd_cycles_give_the_same_relation() {
        let dd = d(-15);
        let cycles = edge_cycles(dd).unwrap();
        let rels = relations_in_generators(&cycles).unwrap();
        let comm = Word::parse("s(1)*s(t)*s(-1)*s(-t)", dd)
            .unwrap()
            .canonical_relator();
        let vert: Vec<_> = cycles
            .iter()
            .zip(&rels)
            .filter(|(c, _)| c.kind == CycleKind::Vertical)
            .map(|(_, r)| r.canonical_relator())
            .collect();
        assert_eq!(vert, vec![comm.clone(), comm]);
    }

    #[test]
    fn presentations() {
        for x in DISCS {
            let p = presentation(d(x)).unwrap();
            assert!(p.cross_checked);
            assert_eq!(p.relations.len(), 3);
            assert!(p.relations.iter().all(|r| r.verified));
            assert_eq!(p.hemisphere_cycle.order, 3);
            assert!(!p.hemisphere_cycle.squared_relation_holds);
        }
        assert!(Mat::r(d(-40)).pow(2).is_identity());
        assert!(matches!(
            presentation(d(-12)),
            Err(Error::OutOfScope { .. })
        ));
    }

    #[test]
    fn shift_words() {
        let dd = d(-15);
        let t1 = dd.elem(-1, 1);
        assert_eq!(shift_word(&t1).to_string(), "s(t)*s(-1)");
        assert_eq!(shift_word(&-&t1), shift_word(&t1).inverse());
        assert_eq!(shift_word(&dd.elem(2, 0)).to_string(), "s(1)*s(1)");
    }

    /// No PE₂ hemisphere from a bounded family of standard forms reaches a
    /// point of the cell lying outside the closed unit disc at 0.
    #[test]
    fn tessellation_sanity() {
        let dd = d(-40);
        let cell = voronoi_cell(dd, &dd.zero()).unwrap();
        let coeffs: Vec<OInt> = (-5..=5)
            .flat_map(|a| (-1..=1).map(move |b| (a, b)))
            .map(|(a, b)| dd.elem(a, b))
            .filter(|x| x.norm() <= 25.into())
            .collect();
        let interior: Vec<OInt> = coeffs.iter().filter(|x| !x.is_small()).cloned().collect();
        let mut points = Vec::new();
        for i in -7..=7 {
            for j in -7..=7 {
                let p = pp((i, 16), (j, 32));
                let z = p.to_kelem(dd);
                if cell.contains(&p) && z.norm() > Rat::one() {
                    points.push(z);
                }
            }
        }
        assert!(points.len() > 20);
        let mut checked = 0;
        for a0 in &coeffs {
            for a1 in &interior {
                for n in 1..=2 {
                    let alphas = if n == 1 {
                        vec![a0.clone(), dd.zero()]
                    } else {
                        vec![a0.clone(), a1.clone(), dd.zero()]
                    };
                    let g = StandardForm::new(dd, alphas).to_matrix();
                    for z in &points {
                        assert_eq!(g.outside_test(z).unwrap(), Side::Outside, "{g} at {z}");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 0);
    }
}
