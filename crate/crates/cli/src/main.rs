use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use pe2_core::arrangement::{plane_split, Arrangement, FaceStatus};
use pe2_core::ford::{presentation, CycleKind, FaceKind, FordDomain};
use pe2_core::groups::{amalgam_report, coset_family, gap_points, AmalgamFaceKind};
use pe2_core::render::{svg_ford, svg_topview};
use pe2_core::{
    json, membership_with_stats, normal_form, parse_oint, random_pe2_word, Discriminant, Error,
    Mat, MembershipResult, Rat, Word,
};

const EXIT_OTHER: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_OUT_OF_SCOPE: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "pe2",
    version,
    about = "Projective elementary groups over imaginary quadratic orders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Discriminant of the order (negative, 0 or 1 mod 4).
    #[arg(long, global = true, allow_hyphen_values = true)]
    disc: Option<i64>,

    /// Norm bound for hemisphere enumeration.
    #[arg(long, global = true, default_value_t = 16)]
    bound: u64,

    /// Number of cosets or gap points.
    #[arg(long, global = true, default_value_t = 100)]
    count: usize,

    /// Depth cap of the membership search.
    #[arg(long, global = true, default_value_t = 64)]
    depth: usize,

    /// Height of the splitting plane, as p/q.
    #[arg(long, global = true, default_value = "2/3")]
    plane: String,

    /// Grid pitch for face detection, as p/q.
    #[arg(long, global = true, default_value = "1/64")]
    resolution: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for random word generation.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Word such as "r*s(1+t)*r*s(-2)".
    #[arg(long, global = true, allow_hyphen_values = true)]
    word: Option<String>,

    /// Matrix "[[a, b], [c, d]]" with entries like 1+t.
    #[arg(long, global = true, allow_hyphen_values = true)]
    matrix: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Basic data of the order.
    OrderInfo,
    /// Standard form of a word (or of a random word with --seed).
    NormalForm,
    /// Decide membership in PE2 for --word or --matrix.
    Membership,
    /// Ford domain of PE2: faces, edges, edge cycles.
    Pe2Ford,
    /// Presentation of PE2 with verified relations.
    Presentation,
    /// Completions of gap points in distinct right cosets.
    Cosets,
    /// Hemisphere arrangement over the amalgam rectangle.
    Arrangement,
    /// Amalgam splitting along the plane.
    Amalgam,
    /// Gap points in enumeration order.
    GapPoints,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Svg,
}

struct Output {
    body: String,
    code: u8,
}

impl Output {
    fn ok(body: String) -> Self {
        Self { body, code: 0 }
    }
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidDiscriminant(_) | Error::Parse { .. } => EXIT_USAGE,
            Error::OutOfScope { .. } => EXIT_OUT_OF_SCOPE,
            _ => EXIT_OTHER,
        };
        Self {
            code,
            msg: e.to_string(),
        }
    }
}

type Run<T> = Result<T, Failure>;

fn parse_rat(flag: &str, text: &str) -> Run<Rat> {
    let r: Rat = text
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("--{flag}: expected p/q, got {text:?}")))?;
    if r <= Rat::from_integer(0.into()) {
        return Err(Failure::usage(format!("--{flag} must be positive")));
    }
    Ok(r)
}

fn parse_matrix(text: &str, d: Discriminant) -> Run<Mat> {
    let cleaned: String = text.chars().filter(|c| !matches!(c, '[' | ']')).collect();
    let parts: Vec<&str> = cleaned.split(',').collect();
    if parts.len() != 4 {
        return Err(Failure::usage("--matrix needs four entries"));
    }
    let e = parts
        .iter()
        .map(|p| parse_oint(p.trim(), d))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Mat::new(
        e[0].clone(),
        e[1].clone(),
        e[2].clone(),
        e[3].clone(),
    )?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn validate(cli: &Cli) -> Run<(Discriminant, Rat, Rat)> {
    let svg_ok = matches!(
        cli.command,
        Command::Pe2Ford | Command::Arrangement | Command::Amalgam
    );
    if cli.format == Format::Svg && !svg_ok {
        return Err(Failure::usage(
            "--format svg is available for pe2-ford, arrangement and amalgam",
        ));
    }
    let plane = parse_rat("plane", &cli.plane)?;
    let resolution = parse_rat("resolution", &cli.resolution)?;
    let delta = cli
        .disc
        .ok_or_else(|| Failure::usage("--disc is required"))?;
    let d = Discriminant::new(delta)?;
    if cli.command != Command::OrderInfo {
        d.require_gap()?;
    }
    match cli.command {
        Command::Membership if cli.word.is_some() == cli.matrix.is_some() => {
            return Err(Failure::usage(
                "membership needs exactly one of --word, --matrix",
            ));
        }
        Command::NormalForm if cli.word.is_some() == cli.seed.is_some() => {
            return Err(Failure::usage(
                "normal-form needs exactly one of --word, --seed",
            ));
        }
        _ => {}
    }
    if cli.depth == 0 {
        return Err(Failure::usage("--depth must be positive"));
    }
    Ok((d, plane, resolution))
}

fn order_info(cli: &Cli, d: Discriminant) -> Run<Output> {
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::order_info(d))));
    }
    let mut s = String::new();
    let _ = writeln!(s, "discriminant   {}", d.delta());
    let _ = writeln!(
        s,
        "tau            {}",
        if d.is_odd() {
            "(1 + sqrt(D))/2"
        } else {
            "sqrt(D)/2"
        }
    );
    let _ = writeln!(s, "tau^2          {}*tau - {}", d.trace_tau(), d.norm_tau());
    let _ = writeln!(
        s,
        "norm(a+b*tau)  a^2 + {}ab + {}b^2",
        d.trace_tau(),
        d.norm_tau()
    );
    let _ = writeln!(
        s,
        "group commands {}",
        if d.require_gap().is_ok() {
            "in scope"
        } else {
            "out of scope (|D| <= 12)"
        }
    );
    Ok(Output::ok(s))
}

fn normal_form_cmd(cli: &Cli, d: Discriminant) -> Run<Output> {
    let w = match (&cli.word, cli.seed) {
        (Some(text), _) => Word::parse(text, d)?,
        (None, Some(seed)) => random_pe2_word(seed, 20, 10, d),
        (None, None) => unreachable!("validated"),
    };
    let input = w.to_string();
    let sf = normal_form(&w)?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::normal_form(&input, &sf))));
    }
    Ok(Output::ok(format!(
        "input        {input}\nnormal form  {sf}\nmatrix       {}\n",
        sf.to_matrix()
    )))
}

fn membership_cmd(cli: &Cli, d: Discriminant) -> Run<Output> {
    let g = match (&cli.word, &cli.matrix) {
        (Some(text), _) => Word::parse(text, d)?.to_matrix(),
        (None, Some(text)) => parse_matrix(text, d)?,
        (None, None) => unreachable!("validated"),
    };
    let (result, stats) = membership_with_stats(&g, cli.depth)?;
    let code = if matches!(result, MembershipResult::Inconclusive { .. }) {
        EXIT_INCONCLUSIVE
    } else {
        0
    };
    let body = if cli.format == Format::Json {
        pretty(&json::membership(&g, &result, &stats))
    } else {
        let mut s = format!("matrix  {g}\nresult  {}\n", result.label());
        match &result {
            MembershipResult::Member { certificate } => {
                let _ = writeln!(s, "certificate  {certificate}");
            }
            MembershipResult::NonMember(w) => {
                let _ = writeln!(
                    s,
                    "path   {}",
                    if w.path.is_empty() {
                        "(root)".into()
                    } else {
                        w.path.to_string()
                    }
                );
                let _ = writeln!(s, "node   {}", w.node);
                let _ = writeln!(s, "ratio  {}", w.ratio);
                let _ = writeln!(
                    s,
                    "squared distance to nearest lattice points  {}",
                    w.nearest_dist_sq
                );
                let _ = writeln!(s, "witness verified  {}", yes(w.verify(&g)));
            }
            MembershipResult::Inconclusive { depth_reached } => {
                let _ = writeln!(s, "depth reached  {depth_reached}");
            }
        }
        let _ = writeln!(s, "nodes searched  {}", stats.nodes);
        s
    };
    Ok(Output { body, code })
}

fn pe2_ford(cli: &Cli, d: Discriminant) -> Run<Output> {
    if cli.format == Format::Svg {
        return Ok(Output::ok(svg_ford(d)?));
    }
    let dom = FordDomain::pe2(d)?;
    let cycles = dom.edge_cycles()?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::ford(&dom, &cycles))));
    }
    let mut s = String::new();
    let verts: Vec<String> = dom.polygon.vertices.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "polygon  {}", verts.join("  "));
    let _ = writeln!(s, "faces");
    for (i, f) in dom.faces.iter().enumerate() {
        let what = match &f.kind {
            FaceKind::Wall { facing, .. } => format!("wall facing {facing}"),
            FaceKind::Hemi { center } => format!("unit hemisphere at {center}"),
        };
        let _ = writeln!(
            s,
            "  {i}: {what}, paired by {} onto face {}",
            f.generator_word, f.partner
        );
    }
    let _ = writeln!(s, "edges");
    for (i, (e, inc)) in dom.edges.iter().zip(&dom.incidence).enumerate() {
        let _ = writeln!(s, "  {i}: {e} (faces {}, {})", inc[0], inc[1]);
    }
    let _ = writeln!(s, "edge cycles");
    for c in &cycles {
        let kind = match c.kind {
            CycleKind::Vertical => "vertical",
            CycleKind::Hemisphere => "hemisphere",
        };
        let _ = writeln!(
            s,
            "  {kind} length {}: ({})^{} = 1  [{}]",
            c.len(),
            c.word,
            c.exponent,
            if c.relation.to_matrix().is_identity() {
                "verified"
            } else {
                "FAILED"
            }
        );
    }
    Ok(Output::ok(s))
}

fn presentation_cmd(cli: &Cli, d: Discriminant) -> Run<Output> {
    let p = presentation(d)?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::presentation(&p))));
    }
    let mut s = String::new();
    let gens: Vec<&str> = p.generators.iter().map(|(n, _)| *n).collect();
    let _ = writeln!(s, "generators  {}", gens.join(", "));
    for r in &p.relations {
        let _ = writeln!(
            s,
            "relation    {} = 1  [{}]",
            r.word,
            if r.verified { "verified" } else { "FAILED" }
        );
    }
    let _ = writeln!(
        s,
        "matches the Ford domain edge cycles: {}",
        yes(p.cross_checked)
    );
    let _ = writeln!(
        s,
        "note: r*s(1) has order {} (squared: {}); the length-two cycle gives the cube relation",
        p.hemisphere_cycle.order,
        if p.hemisphere_cycle.squared_relation_holds {
            "identity"
        } else {
            "not the identity"
        }
    );
    Ok(Output::ok(s))
}

fn cosets_cmd(cli: &Cli, d: Discriminant) -> Run<Output> {
    let fam = coset_family(d, cli.count, cli.depth)?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::cosets(d, &fam))));
    }
    let mut s = String::new();
    for (i, m) in fam.members.iter().enumerate() {
        let _ = writeln!(s, "{i:>4}  ratio {}  completion {}", m.ratio, m.completion);
    }
    let _ = writeln!(
        s,
        "pairs certified distinct  {}/{}",
        fam.checks
            .iter()
            .filter(|c| c.outcome == "NonMember" && c.witness_verified)
            .count(),
        fam.checks.len()
    );
    for (g, why) in &fam.dropped {
        let _ = writeln!(s, "dropped {}/{}: {why}", g.lambda, g.mu);
    }
    let _ = writeln!(s, "all distinct  {}", yes(fam.all_distinct()));
    let _ = writeln!(s, "certificates digest  {}", json::certificate_digest(&fam));
    let code = if fam.checks.iter().any(|c| c.outcome == "Inconclusive") {
        EXIT_INCONCLUSIVE
    } else {
        0
    };
    Ok(Output { body: s, code })
}

fn arrangement_cmd(cli: &Cli, d: Discriminant, plane: &Rat, eps: &Rat) -> Run<Output> {
    let arr = Arrangement::amalgam(d, cli.bound, eps)?;
    let split = plane_split(&arr, plane);
    match cli.format {
        Format::Svg => {
            return Ok(Output::ok(svg_topview(
                &arr.set,
                &arr.statuses,
                Some(&split),
            )))
        }
        Format::Json => return Ok(Output::ok(pretty(&json::arrangement(&arr, Some(&split))))),
        Format::Text => {}
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "window  {}",
        arr.set
            .window
            .vertices
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join("  ")
    );
    let _ = writeln!(
        s,
        "hemispheres with norm(mu) <= {}: {}",
        cli.bound,
        arr.set.len()
    );
    for (i, (h, st)) in arr.set.hemispheres.iter().zip(&arr.statuses).enumerate() {
        let status = match st {
            FaceStatus::Contributes { witness, .. } => format!("face, witness {witness}"),
            FaceStatus::CoveredUpTo(e) => format!("no face found at pitch {e}"),
        };
        let _ = writeln!(
            s,
            "  {i:>3}  center {}  radius^2 {}  {status}",
            h.hemisphere.center,
            h.radius_sq()
        );
    }
    let _ = writeln!(s, "faces split by t = {plane}");
    for f in &split.faces {
        let side = match (f.above, f.below) {
            (true, true) => "above and below",
            (true, false) => "above",
            (false, true) => "below",
            (false, false) => "neither",
        };
        let _ = writeln!(s, "  {:?}: {side}, paired by {}", f.face, f.pairing);
    }
    Ok(Output::ok(s))
}

fn amalgam_cmd(cli: &Cli, d: Discriminant, plane: &Rat, eps: &Rat) -> Run<Output> {
    if cli.format == Format::Svg {
        return arrangement_cmd(cli, d, plane, eps);
    }
    let rep = amalgam_report(d, cli.bound, plane, eps, cli.depth)?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::amalgam(&rep))));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "plane t = {}, norm bound {}, pitch {}",
        rep.plane, rep.norm_bound, rep.resolution
    );
    let _ = writeln!(s, "hemispheres considered  {}", rep.hemispheres_considered);
    let _ = writeln!(s, "faces");
    for f in &rep.faces {
        let what = match &f.kind {
            AmalgamFaceKind::Hemisphere { center, radius_sq } => {
                format!("hemisphere at {center}, radius^2 {radius_sq}")
            }
            AmalgamFaceKind::Wall { from, to } => format!("wall {from} -> {to}"),
        };
        let side = match (f.above, f.below) {
            (true, true) => "above+below",
            (true, false) => "above",
            (false, true) => "below",
            (false, false) => "-",
        };
        let word = f
            .pairing_form
            .as_ref()
            .map_or_else(|| f.pairing.to_string(), |sf| sf.to_string());
        let _ = writeln!(s, "  {side:<12} {what}; pairing {word}");
    }
    let list = |ms: &[Mat]| {
        ms.iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let _ = writeln!(s, "above generators    {}", list(&rep.above_generators));
    let _ = writeln!(s, "below generators    {}", list(&rep.below_generators));
    let _ = writeln!(s, "overlap generators  {}", list(&rep.overlap_generators));
    let _ = writeln!(
        s,
        "N generated by      {}",
        rep.n_generators
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    );
    let _ = writeln!(s, "overlap matches N   {}", yes(rep.overlap_matches_n));
    let _ = writeln!(s, "pairs consistent    {}", yes(rep.pairs_consistent));
    let _ = writeln!(
        s,
        "collapse map check  {} (s(t) -> {})",
        yes(rep.hom_check.holds),
        rep.hom_check.s_tau_image
    );
    Ok(Output::ok(s))
}

fn gap_points_cmd(cli: &Cli, d: Discriminant) -> Run<Output> {
    let pts = gap_points(d, cli.count)?;
    if cli.format == Format::Json {
        return Ok(Output::ok(pretty(&json::gap_points(d, &pts))));
    }
    let mut s = String::new();
    for (i, p) in pts.iter().enumerate() {
        let _ = writeln!(
            s,
            "{i:>4}  ratio {}  lambda {}  mu {}  min dist^2 {}",
            p.ratio, p.lambda, p.mu, p.min_dist_sq
        );
    }
    Ok(Output::ok(s))
}

fn run(cli: &Cli) -> Run<Output> {
    let (d, plane, eps) = validate(cli)?;
    match cli.command {
        Command::OrderInfo => order_info(cli, d),
        Command::NormalForm => normal_form_cmd(cli, d),
        Command::Membership => membership_cmd(cli, d),
        Command::Pe2Ford => pe2_ford(cli, d),
        Command::Presentation => presentation_cmd(cli, d),
        Command::Cosets => cosets_cmd(cli, d),
        Command::Arrangement => arrangement_cmd(cli, d, &plane, &eps),
        Command::Amalgam => amalgam_cmd(cli, d, &plane, &eps),
        Command::GapPoints => gap_points_cmd(cli, d),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &out.body) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(EXIT_OTHER);
                }
            } else {
                print!("{}", out.body);
            }
            if out.code == EXIT_INCONCLUSIVE {
                eprintln!("inconclusive: depth cap {} reached", cli.depth);
            }
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
