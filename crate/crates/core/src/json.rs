//! JSON reports. Integers that fit in 64 bits are JSON numbers, larger ones
//! are decimal strings; rationals are `{p, q}`; field elements are
//! `{num, den}` with both parts as `[a, b]` coordinate pairs of `a + bτ`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::arith::{Discriminant, KElem, OInt, PlanePoint, Rat};
use crate::arrangement::{Arrangement, FaceRef, FaceStatus, PlaneSplit};
use crate::ford::{EdgeCycle, FaceKind, FordDomain, Presentation};
use crate::groups::{AmalgamFaceKind, AmalgamReport, CosetFamily, GapPoint, NormalizerWitness};
use crate::moebius::Mat;
use crate::words::{MembershipResult, SearchStats, StandardForm};

pub fn int(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn oint(x: &OInt) -> Value {
    json!([int(x.a()), int(x.b())])
}

pub fn rational(x: &Rat) -> Value {
    json!({ "p": int(x.numer()), "q": int(x.denom()) })
}

pub fn kelem(x: &KElem) -> Value {
    json!({ "num": oint(x.num()), "den": [int(x.den()), 0] })
}

pub fn point(p: &PlanePoint, d: Discriminant) -> Value {
    kelem(&p.to_kelem(d))
}

/// Four coordinate pairs, row-major, plus the sign-canonical flag.
pub fn matrix(m: &Mat) -> Value {
    let first_positive = m
        .entries()
        .iter()
        .find(|e| !e.is_zero())
        .is_some_and(OInt::is_positive);
    json!({
        "entries": m.entries().iter().map(oint).collect::<Vec<_>>(),
        "sign_canonical": first_positive,
    })
}

pub fn standard_form(sf: &StandardForm) -> Value {
    json!({
        "alphas": sf.alphas().iter().map(oint).collect::<Vec<_>>(),
        "word": sf.to_string(),
        "interior_constraint": sf.satisfies_interior_constraint(),
    })
}

pub fn order_info(d: Discriminant) -> Value {
    json!({
        "disc": d.delta(),
        "odd": d.is_odd(),
        "tau": { "trace": d.trace_tau(), "norm": d.norm_tau() },
        "group_commands_in_scope": d.require_gap().is_ok(),
    })
}

pub fn normal_form(input: &str, sf: &StandardForm) -> Value {
    json!({
        "input": input,
        "normal_form": standard_form(sf),
        "matrix": matrix(&sf.to_matrix()),
    })
}

pub fn membership(g: &Mat, result: &MembershipResult, stats: &SearchStats) -> Value {
    let detail = match result {
        MembershipResult::Member { certificate } => {
            json!({ "certificate": standard_form(certificate) })
        }
        MembershipResult::NonMember(w) => json!({
            "node": matrix(&w.node),
            "path": w.path.to_string(),
            "path_length": w.path.len(),
            "ratio": kelem(&w.ratio),
            "nearest_dist_sq": rational(&w.nearest_dist_sq),
            "verified": w.verify(g),
        }),
        MembershipResult::Inconclusive { depth_reached } => {
            json!({ "depth_reached": depth_reached })
        }
    };
    json!({
        "matrix": matrix(g),
        "result": result.label(),
        "detail": detail,
        "search": { "nodes": stats.nodes, "max_depth": stats.max_depth, "plateau_moves": stats.plateau_moves },
    })
}

fn cycle(c: &EdgeCycle) -> Value {
    json!({
        "kind": format!("{:?}", c.kind).to_lowercase(),
        "edges": c.edges,
        "faces": c.faces,
        "word": c.word.to_string(),
        "transform": matrix(&c.transform),
        "exponent": c.exponent,
        "relation": c.relation.to_string(),
        "verified": c.relation.to_matrix().is_identity(),
    })
}

pub fn ford(dom: &FordDomain, cycles: &[EdgeCycle]) -> Value {
    let d = dom.d;
    let faces: Vec<Value> = dom
        .faces
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let geometry = match &f.kind {
                FaceKind::Wall { facing, from, to } => json!({
                    "type": "wall", "facing": oint(facing), "from": point(from, d), "to": point(to, d),
                }),
                FaceKind::Hemi { center } => json!({ "type": "hemisphere", "center": oint(center) }),
            };
            json!({
                "index": i,
                "geometry": geometry,
                "pairing": matrix(&f.pairing),
                "pairing_word": f.pairing_word.to_string(),
                "generator_word": f.generator_word.to_string(),
                "partner": f.partner,
            })
        })
        .collect();
    let edges: Vec<Value> = dom
        .edges
        .iter()
        .zip(&dom.incidence)
        .map(|(e, inc)| json!({ "edge": e.to_string(), "faces": inc }))
        .collect();
    json!({
        "disc": d.delta(),
        "polygon": dom.polygon.vertices.iter().map(|v| point(v, d)).collect::<Vec<_>>(),
        "faces": faces,
        "edges": edges,
        "cycles": cycles.iter().map(cycle).collect::<Vec<_>>(),
    })
}

pub fn presentation(p: &Presentation) -> Value {
    json!({
        "disc": p.d.delta(),
        "generators": p.generators.iter().map(|(name, w)| json!({
            "name": name, "matrix": matrix(&w.to_matrix()),
        })).collect::<Vec<_>>(),
        "relations": p.relations.iter().map(|r| json!({
            "name": r.name, "word": r.word.to_string(), "verified": r.verified,
        })).collect::<Vec<_>>(),
        "derived": p.derived.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "cross_checked": p.cross_checked,
        "hemisphere_cycle": {
            "order": p.hemisphere_cycle.order,
            "squared_relation_holds": p.hemisphere_cycle.squared_relation_holds,
            "note": "the edge cycle of length two closes after three turns: (r*s(1))^3, not (r*s(1))^2",
        },
    })
}

pub fn gap_point(g: &GapPoint) -> Value {
    json!({
        "lambda": oint(&g.lambda),
        "mu": oint(&g.mu),
        "ratio": kelem(&g.ratio),
        "min_dist_sq": rational(&g.min_dist_sq),
        "completion": matrix(&g.completion),
        "verified": g.verify(),
    })
}

pub fn gap_points(d: Discriminant, pts: &[GapPoint]) -> Value {
    json!({ "disc": d.delta(), "count": pts.len(), "points": pts.iter().map(gap_point).collect::<Vec<_>>() })
}

/// SHA-256 over one line per pair check, in order.
pub fn certificate_digest(fam: &CosetFamily) -> String {
    let mut h = Sha256::new();
    for c in &fam.checks {
        h.update(format!(
            "{} {} {} {}\n",
            c.i, c.j, c.outcome, c.witness_verified
        ));
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cosets(d: Discriminant, fam: &CosetFamily) -> Value {
    json!({
        "disc": d.delta(),
        "members": fam.members.iter().map(gap_point).collect::<Vec<_>>(),
        "pairs": fam.checks.iter().map(|c| json!({
            "i": c.i, "j": c.j, "outcome": c.outcome, "witness_verified": c.witness_verified,
        })).collect::<Vec<_>>(),
        "dropped": fam.dropped.iter().map(|(g, why)| json!({ "candidate": gap_point(g), "reason": why })).collect::<Vec<_>>(),
        "all_distinct": fam.all_distinct(),
        "certificates_digest": certificate_digest(fam),
    })
}

pub fn normalizer(g: &Mat, w: &NormalizerWitness) -> Value {
    json!({
        "matrix": matrix(g),
        "alpha": oint(&w.alpha),
        "conjugate": matrix(&w.conjugate),
        "shifted_ratio": kelem(&w.shifted_ratio),
        "entries_verified": w.entries_verified,
        "candidates_tried": w.candidates_tried,
    })
}

fn split_of(split: Option<&PlaneSplit>, face: FaceRef) -> Value {
    match split.and_then(|s| s.faces.iter().find(|f| f.face == face)) {
        Some(f) => json!({ "above": f.above, "below": f.below }),
        None => Value::Null,
    }
}

pub fn arrangement(arr: &Arrangement, split: Option<&PlaneSplit>) -> Value {
    let d = arr.set.d;
    let hemispheres: Vec<Value> = arr
        .set
        .hemispheres
        .iter()
        .zip(&arr.statuses)
        .enumerate()
        .map(|(i, (h, s))| {
            let status = match s {
                FaceStatus::Contributes {
                    witness,
                    samples,
                    max_height_sq,
                    min_height_sq,
                } => json!({
                    "kind": "contributes",
                    "witness": kelem(witness),
                    "samples": samples,
                    "max_height_sq": rational(max_height_sq),
                    "min_height_sq": rational(min_height_sq),
                }),
                FaceStatus::CoveredUpTo(eps) => {
                    json!({ "kind": "covered", "resolution": rational(eps) })
                }
            };
            let pairing = arr.pairings[i].as_ref().map_or(
                Value::Null,
                |p| json!({ "matrix": matrix(&p.matrix), "partner": p.partner }),
            );
            json!({
                "index": i,
                "center": kelem(&h.hemisphere.center),
                "radius_sq": rational(h.radius_sq()),
                "owner_bottom_row": [oint(h.owner.m21()), oint(h.owner.m22())],
                "status": status,
                "pairing": pairing,
                "split": split_of(split, FaceRef::Hemisphere(i)),
            })
        })
        .collect();
    let walls: Vec<Value> = arr
        .walls
        .iter()
        .enumerate()
        .map(|(i, w)| {
            json!({
                "index": i,
                "from": point(&w.from, d),
                "to": point(&w.to, d),
                "pairing": matrix(&w.pairing),
                "partner": w.partner,
                "envelope_min_sq": rational(&w.envelope_min_sq),
                "split": split_of(split, FaceRef::Wall(i)),
            })
        })
        .collect();
    json!({
        "disc": d.delta(),
        "norm_bound": arr.set.norm_bound,
        "resolution": rational(&arr.resolution),
        "window": arr.set.window.vertices.iter().map(|v| point(v, d)).collect::<Vec<_>>(),
        "plane": split.map_or(Value::Null, |s| rational(&s.plane)),
        "hemispheres": hemispheres,
        "walls": walls,
    })
}

fn generator(m: &Mat, rep: &AmalgamReport) -> Value {
    let form = rep
        .faces
        .iter()
        .find(|f| f.pairing == *m)
        .and_then(|f| f.pairing_form.as_ref());
    json!({ "matrix": matrix(m), "word": form.map(|sf| sf.to_string()) })
}

pub fn amalgam(rep: &AmalgamReport) -> Value {
    let d = rep.d;
    let faces: Vec<Value> = rep
        .faces
        .iter()
        .map(|f| {
            let kind = match &f.kind {
                AmalgamFaceKind::Hemisphere { center, radius_sq } => json!({
                    "type": "hemisphere", "center": kelem(center), "radius_sq": rational(radius_sq),
                }),
                AmalgamFaceKind::Wall { from, to } => json!({
                    "type": "wall", "from": point(from, d), "to": point(to, d),
                }),
            };
            json!({
                "face": kind,
                "pairing": matrix(&f.pairing),
                "pairing_word": f.pairing_form.as_ref().map(|sf| sf.to_string()),
                "above": f.above,
                "below": f.below,
            })
        })
        .collect();
    let hom = &rep.hom_check;
    let image = |items: &[(crate::words::Word, crate::words::Word, bool)]| {
        items
            .iter()
            .map(|(w, img, ok)| json!({ "word": w.to_string(), "image": img.to_string(), "trivial": ok }))
            .collect::<Vec<_>>()
    };
    json!({
        "disc": d.delta(),
        "plane": rational(&rep.plane),
        "norm_bound": rep.norm_bound,
        "resolution": rational(&rep.resolution),
        "hemispheres_considered": rep.hemispheres_considered,
        "faces": faces,
        "above_generators": rep.above_generators.iter().map(|m| generator(m, rep)).collect::<Vec<_>>(),
        "below_generators": rep.below_generators.iter().map(|m| generator(m, rep)).collect::<Vec<_>>(),
        "overlap_generators": rep.overlap_generators.iter().map(|m| generator(m, rep)).collect::<Vec<_>>(),
        "n_generators": rep.n_generators.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "overlap_matches_n": rep.overlap_matches_n,
        "pairs_consistent": rep.pairs_consistent,
        "hom_check": {
            "relations": image(&hom.relations),
            "n_generators": image(&hom.n_generators),
            "s_tau_image": hom.s_tau_image.to_string(),
            "holds": hom.holds,
        },
    })
}
