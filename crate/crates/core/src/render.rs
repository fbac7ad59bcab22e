//! Deterministic SVG top views.
//!
//! The imaginary axis runs left to right and the real axis points up; one
//! unit of the complex plane is [`PX_PER_UNIT`] pixels. Coordinates are
//! printed with a fixed number of decimals so repeated runs are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use num_traits::ToPrimitive;

use crate::arith::{lattice_points_within, rat, Discriminant, KElem, PlanePoint, Rat};
use crate::arrangement::{FaceRef, FaceStatus, HemiSet, PlaneSplit};
use crate::error::Result;
use crate::ford::{voronoi_cell, FundPolygon};

pub const PX_PER_UNIT: f64 = 100.0;

const FILL_CONTRIBUTES: &str = "#c6dbef";
const FILL_COVERED: &str = "none";
const STROKE_ABOVE: &str = "#d62728";
const STROKE_BELOW: &str = "#1f77b4";
const STROKE_BOTH: &str = "#9467bd";
const STROKE_UNSPLIT: &str = "#969696";

/// Screen position of a plane point.
fn screen(p: &PlanePoint, d: Discriminant) -> (f64, f64) {
    let (re, im) = p.to_f64(d);
    (im * PX_PER_UNIT, -re * PX_PER_UNIT)
}

fn num(x: f64) -> String {
    // Avoid "-0.000".
    let s = format!("{x:.3}");
    if s.trim_start_matches('-')
        .chars()
        .all(|c| c == '0' || c == '.')
    {
        "0.000".to_string()
    } else {
        s
    }
}

fn radius_px(radius_sq: &Rat) -> f64 {
    radius_sq.to_f64().unwrap_or(0.0).sqrt() * PX_PER_UNIT
}

struct Canvas {
    clip: String,
    body: String,
    view: (f64, f64, f64, f64),
}

impl Canvas {
    fn new(window: &FundPolygon) -> Self {
        let (u0, u1, v0, v1) = window.bounding_box();
        let d = window.d;
        let (x0, y0) = screen(&PlanePoint::new(u1, v0), d);
        let (x1, y1) = screen(&PlanePoint::new(u0, v1), d);
        let pts: Vec<String> = window
            .vertices
            .iter()
            .map(|p| {
                let (x, y) = screen(p, d);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        Canvas {
            clip: format!(
                r#"<clipPath id="window"><polygon points="{}"/></clipPath>"#,
                pts.join(" ")
            ),
            body: String::new(),
            view: (x0, y0, x1 - x0, y1 - y0),
        }
    }

    fn circle(&mut self, center: (f64, f64), r: f64, fill: &str, stroke: &str, title: &str) {
        let _ = writeln!(
            self.body,
            r#"    <circle cx="{}" cy="{}" r="{}" fill="{fill}" stroke="{stroke}" stroke-width="0.6"><title>{title}</title></circle>"#,
            num(center.0),
            num(center.1),
            num(r)
        );
    }

    fn finish(self, window: &FundPolygon) -> String {
        let (x, y, w, h) = self.view;
        let pad = 0.05 * w.max(h);
        let d = window.d;
        let outline: Vec<String> = window
            .vertices
            .iter()
            .map(|p| {
                let (x, y) = screen(p, d);
                format!("{},{}", num(x), num(y))
            })
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
            num(x - pad),
            num(y - pad),
            num(w + 2.0 * pad),
            num(h + 2.0 * pad),
            num(w + 2.0 * pad),
            num(h + 2.0 * pad)
        );
        let _ = writeln!(out, "  <defs>{}</defs>", self.clip);
        let _ = writeln!(
            out,
            r#"  <rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#,
            num(x - pad),
            num(y - pad),
            num(w + 2.0 * pad),
            num(h + 2.0 * pad)
        );
        let _ = writeln!(out, r#"  <g clip-path="url(#window)">"#);
        out.push_str(&self.body);
        let _ = writeln!(out, "  </g>");
        let _ = writeln!(
            out,
            r#"  <polygon points="{}" fill="none" stroke="black" stroke-width="1.2"/>"#,
            outline.join(" ")
        );
        let _ = writeln!(out, "</svg>");
        out
    }
}

fn stroke_for(split: Option<&PlaneSplit>, face: FaceRef) -> &'static str {
    let Some(s) = split else {
        return STROKE_UNSPLIT;
    };
    match s
        .faces
        .iter()
        .find(|f| f.face == face)
        .map(|f| (f.above, f.below))
    {
        Some((true, true)) => STROKE_BOTH,
        Some((true, false)) => STROKE_ABOVE,
        Some((false, true)) => STROKE_BELOW,
        _ => STROKE_UNSPLIT,
    }
}

/// Top view of an arrangement: one circle per hemisphere, filled when it
/// contributes a face and stroked by its side of the plane split.
pub fn svg_topview(set: &HemiSet, statuses: &[FaceStatus], split: Option<&PlaneSplit>) -> String {
    let d = set.d;
    let mut canvas = Canvas::new(&set.window);
    for (i, h) in set.hemispheres.iter().enumerate() {
        let fill = match statuses.get(i) {
            Some(FaceStatus::Contributes { .. }) => FILL_CONTRIBUTES,
            _ => FILL_COVERED,
        };
        let title = format!(
            "{} / {}: {}",
            h.lambda,
            h.mu,
            statuses.get(i).map_or("unclassified", FaceStatus::label)
        );
        canvas.circle(
            screen(&h.point, d),
            radius_px(h.radius_sq()),
            fill,
            stroke_for(split, FaceRef::Hemisphere(i)),
            &title,
        );
    }
    canvas.finish(&set.window)
}

/// Top view of the `PE₂(O)` Ford domain: the Voronoi cell at 0 and the unit
/// circles around nearby lattice points.
pub fn svg_ford(d: Discriminant) -> Result<String> {
    let cell = voronoi_cell(d, &d.zero())?;
    let reach = cell
        .vertices
        .iter()
        .map(|v| v.norm_sq(d))
        .max()
        .unwrap_or_else(|| rat(0, 1));
    let bound = reach * rat(2, 1) + rat(2, 1);
    let mut canvas = Canvas::new(&cell);
    for g in lattice_points_within(&KElem::from_oint(d.zero()), &bound, true) {
        let p = PlanePoint::from_oint(&g);
        if cell.dist_sq_to(&p) >= rat(1, 1) {
            continue;
        }
        let fill = if g.is_zero() {
            FILL_CONTRIBUTES
        } else {
            FILL_COVERED
        };
        canvas.circle(
            screen(&p, d),
            PX_PER_UNIT,
            fill,
            STROKE_ABOVE,
            &g.to_string(),
        );
    }
    Ok(canvas.finish(&cell))
}

pub fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg)?;
    Ok(())
}
