//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pe2_core::arith::{lattice_points_within, rat, Discriminant, KElem, OInt, Rat};
use pe2_core::arrangement::FaceRef;
use pe2_core::ford::{edge_cycles, presentation, relations_in_generators, CycleKind};
use pe2_core::groups::{
    amalgam_report, coset_family, gap_points, normalizer_witness, AmalgamFaceKind,
};
use pe2_core::moebius::Mat;
use pe2_core::words::{
    membership, normal_form, product_identity, random_pe2_word, MembershipResult, StandardForm,
    Word, DEFAULT_DEPTH_CAP,
};

const DISCS: [i64; 7] = [-15, -16, -19, -20, -23, -24, -40];

fn disc(x: i64) -> Discriminant {
    Discriminant::new(x).expect("valid discriminant")
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    check(
        elapsed.as_secs() < limit_secs,
        format!("took {:.1}s, limit {limit_secs}s", elapsed.as_secs_f64()),
    )
}

fn presentation_relations() -> Outcome {
    let t = Instant::now();
    for x in DISCS {
        let d = disc(x);
        let r = Word::r(d);
        let s1 = Word::s(&d.one());
        let st = Word::s(&d.tau());
        let rels = [
            s1.concat(&st).concat(&s1.inverse()).concat(&st.inverse()),
            r.pow(2),
            r.concat(&s1).pow(3),
        ];
        for w in &rels {
            check(
                w.to_matrix().is_identity(),
                format!("Δ={x}: {w} is not the identity"),
            )?;
        }
    }
    within(t.elapsed(), 1)?;
    Ok(format!("3 relations × {} discriminants exact", DISCS.len()))
}

fn normal_form_round_trip() -> Outcome {
    let t = Instant::now();
    let mut total = 0;
    for x in DISCS {
        let d = disc(x);
        for seed in 0..1000u64 {
            let len = (seed % 31) as usize;
            let w = random_pe2_word(seed ^ (x.unsigned_abs() << 32), len, 10, d);
            let nf = normal_form(&w).map_err(|e| e.to_string())?;
            check(
                nf.to_matrix() == w.to_matrix(),
                format!("Δ={x}: value changed for {w}"),
            )?;
            check(
                nf.satisfies_interior_constraint(),
                format!("Δ={x}: interior letter in {nf}"),
            )?;
            total += 1;
        }
    }
    within(t.elapsed(), 30)?;
    Ok(format!("{total} words"))
}

fn desk_check() -> Outcome {
    let t = Instant::now();
    let d = disc(-40);
    let zero = KElem::from_oint(d.zero());
    let mut coeffs = lattice_points_within(&zero, &rat(25, 1), true);
    coeffs.sort();
    let interior: Vec<OInt> = coeffs.iter().filter(|a| !a.is_small()).cloned().collect();
    let points: Vec<KElem> = gap_points(d, 50)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|g| g.ratio)
        .collect();
    check(points.len() == 50, "fewer than 50 gap points")?;

    // The last shift multiplies on the left and leaves the bottom row alone
    // (up to the global sign), so every form is covered by its prefix with αₙ = 0.
    for a in coeffs.iter().take(6) {
        let base = StandardForm::new(d, vec![coeffs[3].clone(), interior[2].clone(), d.zero()])
            .to_matrix();
        let moved = StandardForm::new(d, vec![coeffs[3].clone(), interior[2].clone(), a.clone()])
            .to_matrix();
        let same = base.m21() == moved.m21() && base.m22() == moved.m22();
        let flipped = base.m21() == &-moved.m21() && base.m22() == &-moved.m22();
        check(same || flipped, "last shift changed the bottom row")?;
    }

    let mut prefixes: Vec<Vec<OInt>> = coeffs.iter().map(|a| vec![a.clone()]).collect();
    let mut forms = 0usize;
    let mut evaluations = 0usize;
    for n in 1..=3 {
        if n > 1 {
            prefixes = prefixes
                .iter()
                .flat_map(|p| {
                    interior.iter().map(move |a| {
                        let mut q = p.clone();
                        q.push(a.clone());
                        q
                    })
                })
                .collect();
        }
        for p in &prefixes {
            let mut alphas = p.clone();
            alphas.push(d.zero());
            let form = StandardForm::new(d, alphas);
            let g = form.to_matrix();
            if g.m21().is_zero() {
                continue;
            }
            forms += 1;
            for z in &points {
                let pid = product_identity(&form, z).map_err(|e| e.to_string())?;
                check(
                    pid.lhs.norm() > Rat::from_integer(1.into()),
                    format!("|α-βζ|² ≤ 1 for {form} at {z}"),
                )?;
                check(
                    pid.holds(),
                    format!("product identity fails for {form} at {z}"),
                )?;
                evaluations += 1;
            }
        }
    }
    within(t.elapsed(), 300)?;
    Ok(format!(
        "{forms} forms × 50 gap points = {evaluations} exact checks"
    ))
}

fn membership_certificates() -> Outcome {
    let t = Instant::now();
    let d = disc(-40);
    for seed in 0..500u64 {
        let w = random_pe2_word(seed, (seed % 31) as usize, 10, d);
        let g = w.to_matrix();
        match membership(&g, DEFAULT_DEPTH_CAP).map_err(|e| e.to_string())? {
            MembershipResult::Member { certificate } => check(
                certificate.to_matrix() == g,
                format!("certificate mismatch for {w}"),
            )?,
            other => return Err(format!("{w} returned {}", other.label())),
        }
    }
    let m = Mat::new(d.elem(1, 1), d.int(5), d.int(2), d.elem(1, -1)).map_err(|e| e.to_string())?;
    match membership(&m, DEFAULT_DEPTH_CAP).map_err(|e| e.to_string())? {
        MembershipResult::NonMember(w) => {
            check(w.path.is_empty(), "non-member not decided at the root")?;
            check(
                w.nearest_dist_sq == rat(11, 4),
                format!("nearest distance {}", w.nearest_dist_sq),
            )?;
            check(w.verify(&m), "witness does not re-verify")?;
        }
        other => return Err(format!("explicit non-member returned {}", other.label())),
    }
    within(t.elapsed(), 120)?;
    Ok("500 members certified, explicit non-member rejected at the root".into())
}

fn infinite_index() -> Outcome {
    let t = Instant::now();
    let fam = coset_family(disc(-40), 100, DEFAULT_DEPTH_CAP).map_err(|e| e.to_string())?;
    check(
        fam.members.len() == 100,
        format!("{} members", fam.members.len()),
    )?;
    check(
        fam.checks.len() == 4950,
        format!("{} pair checks", fam.checks.len()),
    )?;
    check(fam.all_distinct(), "some pair not certified NonMember")?;
    within(t.elapsed(), 900)?;
    let dropped = if fam.dropped.is_empty() {
        "none dropped".to_string()
    } else {
        format!(
            "{} candidates dropped and replaced ({})",
            fam.dropped.len(),
            fam.dropped
                .iter()
                .map(|(_, r)| r.as_str())
                .collect::<Vec<_>>()
                .join("; ")
        )
    };
    Ok(format!("100 cosets, 4950 pairs certified, {dropped}"))
}

fn self_normalizer() -> Outcome {
    let t = Instant::now();
    let d = disc(-40);
    let pts = gap_points(d, 20).map_err(|e| e.to_string())?;
    let mut max_norm = 0u64;
    for gp in &pts {
        let g = &gp.completion;
        check(
            membership(g, DEFAULT_DEPTH_CAP)
                .map_err(|e| e.to_string())?
                .is_non_member(),
            format!("{g} is not certified outside"),
        )?;
        let w = normalizer_witness(g, DEFAULT_DEPTH_CAP).map_err(|e| format!("{g}: {e}"))?;
        check(!w.alpha.is_zero(), "zero witness")?;
        check(
            w.entries_verified,
            format!("entry formulas fail for {g}, α = {}", w.alpha),
        )?;
        check(
            membership(&w.conjugate, DEFAULT_DEPTH_CAP)
                .map_err(|e| e.to_string())?
                .is_non_member(),
            "conjugate not certified",
        )?;
        let lm = KElem::new(g.m11().clone(), g.m21()).map_err(|e| e.to_string())?;
        let shift = KElem::from_oint(d.one())
            .div(&KElem::from_oint(&w.alpha * &(g.m21() * g.m21())))
            .map_err(|e| e.to_string())?;
        check(
            lm.sub(&w.shifted_ratio) == shift,
            "ratio shift is not 1/(αμ²)",
        )?;
        max_norm = max_norm.max(w.alpha.norm().try_into().unwrap_or(u64::MAX));
    }
    within(t.elapsed(), 300)?;
    Ok(format!("20 witnesses, largest N(α) = {max_norm}"))
}

fn amalgam_split() -> Outcome {
    let d = disc(-40);
    let plane = rat(2, 3);
    let rep =
        amalgam_report(d, 16, &plane, &rat(1, 64), DEFAULT_DEPTH_CAP).map_err(|e| e.to_string())?;
    check(rep.plane == plane, "plane is not 2/3")?;
    let mut above_hemis = 0;
    let mut crossing_walls = BTreeSet::new();
    for f in &rep.faces {
        match (&f.kind, f.face) {
            (AmalgamFaceKind::Hemisphere { radius_sq, center }, _) if f.above => {
                check(
                    radius_sq == &Rat::from_integer(1.into()),
                    format!("radius² {radius_sq} at {center} above"),
                )?;
                above_hemis += 1;
            }
            (AmalgamFaceKind::Wall { .. }, FaceRef::Wall(_)) if f.below => {
                crossing_walls.insert(f.pairing.to_string());
            }
            _ => {}
        }
    }
    let s1: BTreeSet<String> = [Mat::s(&d.one()), Mat::s(&-d.one())]
        .iter()
        .map(|m| m.to_string())
        .collect();
    check(
        crossing_walls == s1,
        format!("walls crossing the plane: {crossing_walls:?}"),
    )?;
    check(
        rep.overlap_matches_n,
        "overlap pairings differ from the generators of N",
    )?;
    check(rep.hom_check.holds, "collapse check failed")?;
    check(rep.pairs_consistent, "paired faces on different sides")?;
    Ok(format!(
        "{} hemispheres, {} faces, {above_hemis} unit faces above, s(±1) walls cross, overlap = N, collapse ok",
        rep.hemispheres_considered,
        rep.faces.len()
    ))
}

fn edge_cycle_audit() -> Outcome {
    let c40 = edge_cycles(disc(-40)).map_err(|e| e.to_string())?;
    let lens: BTreeSet<usize> = c40.iter().map(|c| c.len()).collect();
    check(
        lens == BTreeSet::from([2, 4]) && c40.len() == 2,
        format!("Δ=-40 cycle lengths {lens:?}"),
    )?;
    let hemi = c40
        .iter()
        .find(|c| c.kind == CycleKind::Hemisphere)
        .ok_or("no hemisphere cycle")?;
    check(
        hemi.exponent == 3,
        format!("hemisphere cycle exponent {}", hemi.exponent),
    )?;

    let d15 = disc(-15);
    let c15 = edge_cycles(d15).map_err(|e| e.to_string())?;
    let rels = relations_in_generators(&c15).map_err(|e| e.to_string())?;
    let comm = Word::parse("s(1)*s(t)*s(-1)*s(-t)", d15)
        .map_err(|e| e.to_string())?
        .canonical_relator();
    let vertical: Vec<_> = c15
        .iter()
        .zip(&rels)
        .filter(|(c, _)| c.kind == CycleKind::Vertical)
        .collect();
    check(
        vertical.len() == 2 && vertical.iter().all(|(c, _)| c.len() == 3),
        "Δ=-15 vertical cycles are not two of length three",
    )?;
    check(
        vertical.iter().all(|(_, r)| r.canonical_relator() == comm),
        "Δ=-15 vertical cycles give different relations",
    )?;
    for x in DISCS {
        for c in edge_cycles(disc(x)).map_err(|e| e.to_string())? {
            check(
                c.relation.to_matrix().is_identity(),
                format!("Δ={x}: {} is not the identity", c.relation),
            )?;
        }
        let p = presentation(disc(x)).map_err(|e| e.to_string())?;
        check(p.hemisphere_cycle.order == 3, "order of rs(1) is not 3")?;
        check(
            !p.hemisphere_cycle.squared_relation_holds,
            "(rs(1))² unexpectedly trivial",
        )?;
    }
    Ok("Δ=-40 cycles {4, 2}; Δ=-15 two 3-cycles give the commutator; exponent 3, (rs(1))² ≠ 1 flagged".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("presentation relations", presentation_relations),
        ("normal-form round trip", normal_form_round_trip),
        ("standard-form desk check", desk_check),
        ("membership certificates", membership_certificates),
        ("infinite index", infinite_index),
        ("self-normalizer", self_normalizer),
        ("amalgam split", amalgam_split),
        ("edge-cycle audit", edge_cycle_audit),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let result = run();
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
