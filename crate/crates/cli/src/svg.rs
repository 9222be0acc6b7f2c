//! Hand-written SVG: the two-panel partition/estimate view and the
//! error-vs-calls tradeoff chart. Fixed 800x400 canvas.

use std::fmt::Write;
use std::path::Path;

use reach_core::Partitioner;
use reach_core::{AnalysisResult, BoundaryEstimate, IntervalBox, Propagator, ReachError, Result, SampleSet};

use crate::error::CliResult;
use crate::output::write_atomic;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 30.0;

/// Maps a 2-D data rectangle onto a pixel rectangle, y pointing up.
struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Frame {
    fn new(x0: f64, y0: f64, w: f64, h: f64, lo: [f64; 2], hi: [f64; 2]) -> Self {
        let mut lo = lo;
        let mut hi = hi;
        for i in 0..2 {
            let span = hi[i] - lo[i];
            let pad = if span > 0.0 {
                0.05 * span
            } else {
                0.5 * lo[i].abs().max(1.0)
            };
            lo[i] -= pad;
            hi[i] += pad;
        }
        Frame { x0, y0, w, h, lo, hi }
    }

    fn x(&self, v: f64) -> f64 {
        self.x0 + (v - self.lo[0]) / (self.hi[0] - self.lo[0]) * self.w
    }

    fn y(&self, v: f64) -> f64 {
        self.y0 + self.h - (v - self.lo[1]) / (self.hi[1] - self.lo[1]) * self.h
    }

    fn rect(&self, b: &IntervalBox, style: &str) -> String {
        let (x, y) = (self.x(b.lo()[0]), self.y(b.hi()[1]));
        let w = self.x(b.hi()[0]) - x;
        let h = self.y(b.lo()[1]) - y;
        format!(r#"<rect x="{x:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" {style}/>"#)
    }

    fn border(&self) -> String {
        format!(
            r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#999"/>"##,
            self.x0, self.y0, self.w, self.h
        )
    }
}

fn require_2d(what: &str, dim: usize) -> Result<()> {
    if dim != 2 {
        return Err(ReachError::InvalidArgument(format!(
            "plot needs 2-D {what}, got {dim}-D"
        )));
    }
    Ok(())
}

fn bounds_of<'a>(boxes: impl IntoIterator<Item = &'a IntervalBox>) -> Option<([f64; 2], [f64; 2])> {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut any = false;
    for b in boxes {
        any = true;
        for i in 0..2 {
            lo[i] = lo[i].min(b.lo()[i]);
            hi[i] = hi[i].max(b.hi()[i]);
        }
    }
    any.then_some((lo, hi))
}

fn estimate_extent(est: &BoundaryEstimate) -> Option<IntervalBox> {
    match est {
        BoundaryEstimate::BoxBound { bounds } => Some(bounds.clone()),
        BoundaryEstimate::Hull2D { hull } => IntervalBox::enclosing(hull.vertices.iter().map(|v| &v[..])).ok(),
        BoundaryEstimate::LowerBounds { lower } => IntervalBox::point(lower).ok(),
    }
}

/// Two panels: input cells on the left; truth samples, cell outputs and the
/// merged estimate on the right.
pub fn svg_document(result: &AnalysisResult, truth: &SampleSet) -> Result<String> {
    let first = result
        .cells
        .first()
        .ok_or_else(|| ReachError::InvalidArgument("result has no cells".into()))?;
    require_2d("input", first.region.dim())?;
    require_2d("output", first.output.dim())?;
    require_2d("truth", truth.enclosing_box.dim())?;

    let panel = WIDTH / 2.0 - 2.0 * MARGIN;
    let (ilo, ihi) = bounds_of(result.cells.iter().map(|c| &c.region)).expect("nonempty");
    let left = Frame::new(MARGIN, MARGIN, panel, HEIGHT - 2.0 * MARGIN, ilo, ihi);
    let extent = estimate_extent(&result.estimate);
    let (olo, ohi) = bounds_of(
        result
            .cells
            .iter()
            .map(|c| &c.output)
            .chain(std::iter::once(&truth.enclosing_box))
            .chain(extent.as_ref()),
    )
    .expect("nonempty");
    let right = Frame::new(WIDTH / 2.0 + MARGIN, MARGIN, panel, HEIGHT - 2.0 * MARGIN, olo, ohi);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-size="13" text-anchor="middle">input cells ({})</text>"#,
        WIDTH / 4.0,
        result.cells.len()
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" font-size="13" text-anchor="middle">outputs ({} calls)</text>"#,
        3.0 * WIDTH / 4.0,
        result.propagator_calls
    );
    let _ = writeln!(s, "{}", left.border());
    let _ = writeln!(s, "{}", right.border());

    let _ = writeln!(s, r#"<g id="input-cells">"#);
    for c in &result.cells {
        let _ = writeln!(
            s,
            "{}",
            left.rect(&c.region, r##"fill="#cfe2f3" stroke="#1f4e79" stroke-width="0.5""##)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="output-cells">"#);
    for c in &result.cells {
        let _ = writeln!(
            s,
            "{}",
            right.rect(&c.output, r##"fill="none" stroke="#e69138" stroke-width="0.5""##)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r##"<g id="truth" fill="#444">"##);
    for p in &truth.points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="0.8"/>"#,
            right.x(p[0]),
            right.y(p[1])
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="estimate">"#);
    let outline = r##"fill="none" stroke="#cc0000" stroke-width="1.5""##;
    match &result.estimate {
        BoundaryEstimate::BoxBound { bounds } => {
            let _ = writeln!(s, "{}", right.rect(bounds, outline));
        }
        BoundaryEstimate::Hull2D { hull } => {
            let pts: Vec<String> = hull
                .vertices
                .iter()
                .map(|v| format!("{:.3},{:.3}", right.x(v[0]), right.y(v[1])))
                .collect();
            let _ = writeln!(s, r#"<polygon points="{}" {outline}/>"#, pts.join(" "));
        }
        BoundaryEstimate::LowerBounds { lower } => {
            let (x, y) = (right.x(lower[0]), right.y(lower[1]));
            let (top, bottom) = (right.y0, right.y0 + right.h);
            let (l, r) = (right.x0, right.x0 + right.w);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.3}" y1="{top:.3}" x2="{x:.3}" y2="{bottom:.3}" {outline}/>"#
            );
            let _ = writeln!(
                s,
                r#"<line x1="{l:.3}" y1="{y:.3}" x2="{r:.3}" y2="{y:.3}" {outline}/>"#
            );
        }
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn render_svg(result: &AnalysisResult, truth: &SampleSet, path: &Path) -> CliResult<()> {
    let doc = svg_document(result, truth)?;
    write_atomic(path, doc.as_bytes())
}

/// One (propagator, partitioner) line on the tradeoff chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub propagator: Propagator,
    pub partitioner: Partitioner,
    /// `(propagator calls, error)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Errors at or below this are drawn on the floor of the log axis.
const ERROR_FLOOR: f64 = 1e-6;

fn color(p: Propagator) -> &'static str {
    match p {
        Propagator::Ibp => "#d62728",
        Propagator::FastLin => "#2ca02c",
        Propagator::Crown => "#1f77b4",
    }
}

fn marker(part: Partitioner, x: f64, y: f64, fill: &str) -> String {
    let r = 4.0;
    match part {
        Partitioner::None => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{fill}"/>"#),
        Partitioner::Uniform => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{fill}"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Partitioner::Sg => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"/>"#,
            x,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r
        ),
        Partitioner::Gsg => format!(
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{fill}"/>"#,
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        ),
        Partitioner::Agsg => format!(
            r#"<path d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{fill}" stroke-width="2"/>"#,
            x - r,
            y - r,
            x + r,
            y + r,
            x - r,
            y + r,
            x + r,
            y - r
        ),
    }
}

fn decades(values: impl Iterator<Item = f64>) -> (i32, i32) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v.log10());
        hi = hi.max(v.log10());
    }
    if !lo.is_finite() {
        return (0, 1);
    }
    let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
    (a, if b > a { b } else { a + 1 })
}

/// Log-log error vs. propagator calls; colour encodes the propagator, the
/// marker the partitioner.
pub fn tradeoff_chart(series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    let (xa, xb) = decades(all().map(|p| p.0.max(1.0)));
    let (ya, yb) = decades(all().map(|p| p.1.max(ERROR_FLOOR)));
    let (x0, y0) = (70.0, 20.0);
    let (w, h) = (WIDTH - 250.0, HEIGHT - 70.0);
    let px = |c: f64| x0 + (c.max(1.0).log10() - xa as f64) / (xb - xa) as f64 * w;
    let py = |e: f64| y0 + h - (e.max(ERROR_FLOOR).log10() - ya as f64) / (yb - ya) as f64 * h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#999"/>"##
    );
    let _ = writeln!(s, r#"<g id="axes" font-size="11">"#);
    for d in xa..=xb {
        let x = px(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{d}</text>"##,
            y0,
            y0 + h,
            y0 + h + 15.0
        );
    }
    for d in ya..=yb {
        let y = py(10f64.powi(d));
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"##,
            x0 + w,
            x0 - 5.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">propagator calls</text>"#,
        x0 + w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">error</text>"#,
        y0 + h / 2.0,
        y0 + h / 2.0
    );
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="series">"#);
    for (i, ser) in series.iter().enumerate() {
        let c = color(ser.propagator);
        let mut pts = ser.points.clone();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let line: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1" opacity="0.6"/>"#,
            line.join(" ")
        );
        for p in &pts {
            let _ = writeln!(s, "{}", marker(ser.partitioner, px(p.0), py(p.1), c));
        }
        let ly = y0 + 10.0 + 18.0 * i as f64;
        let lx = x0 + w + 25.0;
        let _ = writeln!(s, "{}", marker(ser.partitioner, lx, ly, c));
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{} + {}</text>"#,
            lx + 12.0,
            ly + 4.0,
            ser.propagator,
            ser.partitioner
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
