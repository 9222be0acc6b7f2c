//! Output-set shapes and the metrics used to score them.

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::interval::IntervalBox;
use crate::nn::SampleSet;

pub type Point2 = [f64; 2];

/// Which boundary the analyzer is asked to tighten.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    LowerBounds,
    LinfBall,
    ConvexHull,
}

impl Shape {
    pub const ALL: [Shape; 3] = [Shape::LowerBounds, Shape::LinfBall, Shape::ConvexHull];

    pub fn name(self) -> &'static str {
        match self {
            Shape::LowerBounds => "lower-bounds",
            Shape::LinfBall => "linf-ball",
            Shape::ConvexHull => "convex-hull",
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Shape {
    type Err = ReachError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower-bounds" => Ok(Shape::LowerBounds),
            "linf-ball" => Ok(Shape::LinfBall),
            "convex-hull" => Ok(Shape::ConvexHull),
            other => Err(ReachError::InvalidArgument(format!("unknown shape {other:?}"))),
        }
    }
}

/// Convex polygon with counterclockwise vertices and no collinear triples.
/// One or two vertices encode a degenerate (point or segment) hull.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Point2>,
}

#[inline]
fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a[0] + t * dx, a[1] + t * dy);
    ((p[0] - qx).powi(2) + (p[1] - qy).powi(2)).sqrt()
}

impl Polygon {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Inside-or-on test with an absolute-plus-relative slack.
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        let slack = tol * (1.0 + p[0].abs().max(p[1].abs()));
        if self.vertices.len() < 3 {
            return self.distance(p) <= slack;
        }
        self.edges().all(|(a, b)| {
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            cross(a, b, p) >= -slack * len
        })
    }

    /// Euclidean distance from `p` to the polygon, 0 inside.
    pub fn distance(&self, p: Point2) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => segment_distance(p, self.vertices[0], self.vertices[0]),
            2 => segment_distance(p, self.vertices[0], self.vertices[1]),
            _ => {
                if self.edges().all(|(a, b)| cross(a, b, p) >= 0.0) {
                    0.0
                } else {
                    self.edges()
                        .map(|(a, b)| segment_distance(p, a, b))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }
}

/// Andrew's monotone chain. Collinear points are dropped from the boundary.
pub fn convex_hull_2d(points: &[Point2]) -> Result<Polygon> {
    if points.is_empty() {
        return Err(ReachError::Geometry("convex hull of an empty point set".into()));
    }
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(ReachError::Geometry("non-finite point".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return Ok(Polygon { vertices: pts });
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    Ok(Polygon { vertices: hull })
}

/// Shoelace area; zero for degenerate hulls.
pub fn polygon_area(poly: &Polygon) -> f64 {
    if poly.vertices.len() < 3 {
        return 0.0;
    }
    let twice: f64 = poly.edges().map(|(a, b)| a[0] * b[1] - b[0] * a[1]).sum();
    0.5 * twice.abs()
}

/// Exact area of a union of 2-D boxes by coordinate compression.
pub fn union_area_boxes_2d(boxes: &[IntervalBox]) -> Result<f64> {
    if let Some(b) = boxes.iter().find(|b| b.dim() != 2) {
        return Err(ReachError::Dimension {
            expected: 2,
            actual: b.dim(),
        });
    }
    let mut xs: Vec<f64> = boxes.iter().flat_map(|b| [b.lo()[0], b.hi()[0]]).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut area = 0.0;
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let mut spans: Vec<(f64, f64)> = boxes
            .iter()
            .filter(|b| b.lo()[0] <= x0 && x1 <= b.hi()[0])
            .map(|b| (b.lo()[1], b.hi()[1]))
            .collect();
        spans.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut covered = 0.0;
        let mut current: Option<(f64, f64)> = None;
        for (lo, hi) in spans {
            match current {
                Some((cl, ch)) if lo <= ch => current = Some((cl, ch.max(hi))),
                Some((cl, ch)) => {
                    covered += ch - cl;
                    current = Some((lo, hi));
                }
                None => current = Some((lo, hi)),
            }
        }
        if let Some((cl, ch)) = current {
            covered += ch - cl;
        }
        area += covered * (x1 - x0);
    }
    Ok(area)
}

/// The analyzer's output: a sound over-approximation in the requested shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum BoundaryEstimate {
    #[serde(rename = "lower-bounds")]
    LowerBounds { lower: Vec<f64> },
    #[serde(rename = "box")]
    BoxBound { bounds: IntervalBox },
    #[serde(rename = "hull")]
    Hull2D { hull: Polygon },
}

impl BoundaryEstimate {
    pub fn shape(&self) -> Shape {
        match self {
            BoundaryEstimate::LowerBounds { .. } => Shape::LowerBounds,
            BoundaryEstimate::BoxBound { .. } => Shape::LinfBall,
            BoundaryEstimate::Hull2D { .. } => Shape::ConvexHull,
        }
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self {
            BoundaryEstimate::LowerBounds { lower } => {
                p.len() == lower.len() && p.iter().zip(lower).all(|(x, l)| *x >= l - tol * (1.0 + x.abs()))
            }
            BoundaryEstimate::BoxBound { bounds } => bounds.contains_point_tol(p, tol),
            BoundaryEstimate::Hull2D { hull } => p.len() == 2 && hull.contains([p[0], p[1]], tol),
        }
    }
}

/// Merges cell output boxes (and extra sample points) into one estimate.
pub fn merge(outputs: &[IntervalBox], extra_points: &[Vec<f64>], shape: Shape) -> Result<BoundaryEstimate> {
    let dim = outputs
        .first()
        .map(IntervalBox::dim)
        .or_else(|| extra_points.first().map(Vec::len))
        .ok_or_else(|| ReachError::Geometry("nothing to merge".into()))?;
    if let Some(b) = outputs.iter().find(|b| b.dim() != dim) {
        return Err(ReachError::Dimension {
            expected: dim,
            actual: b.dim(),
        });
    }
    if let Some(p) = extra_points.iter().find(|p| p.len() != dim) {
        return Err(ReachError::Dimension {
            expected: dim,
            actual: p.len(),
        });
    }
    let point_slices = outputs
        .iter()
        .flat_map(|b| [b.lo(), b.hi()])
        .chain(extra_points.iter().map(Vec::as_slice));
    Ok(match shape {
        Shape::LowerBounds => {
            let mut lower = vec![f64::INFINITY; dim];
            for p in point_slices {
                for (l, x) in lower.iter_mut().zip(p) {
                    *l = l.min(*x);
                }
            }
            BoundaryEstimate::LowerBounds { lower }
        }
        Shape::LinfBall => BoundaryEstimate::BoxBound {
            bounds: IntervalBox::enclosing(point_slices)?,
        },
        Shape::ConvexHull => {
            if dim != 2 {
                return Err(ReachError::Dimension {
                    expected: 2,
                    actual: dim,
                });
            }
            let mut pts: Vec<Point2> = Vec::with_capacity(4 * outputs.len() + extra_points.len());
            for b in outputs {
                let (lo, hi) = (b.lo(), b.hi());
                pts.extend([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]);
            }
            pts.extend(extra_points.iter().map(|p| [p[0], p[1]]));
            BoundaryEstimate::Hull2D {
                hull: convex_hull_2d(&pts)?,
            }
        }
    })
}

/// Conservatism of `estimate` against a sampled true set.
///
/// Box and hull shapes report percent extra area `(A_est - A_true) / A_true`
/// (volume for boxes in other dimensions). Lower bounds report the summed gap
/// between sampled minima and estimated lower bounds.
pub fn estimate_error(estimate: &BoundaryEstimate, truth: &SampleSet, shape: Shape) -> Result<f64> {
    if truth.is_empty() {
        return Err(ReachError::InvalidArgument("empty truth set".into()));
    }
    if estimate.shape() != shape {
        return Err(ReachError::InvalidArgument(format!(
            "estimate is a {} but error was requested for {}",
            estimate.shape(),
            shape
        )));
    }
    let dim = truth.enclosing_box.dim();
    match estimate {
        BoundaryEstimate::LowerBounds { lower } => {
            if lower.len() != dim {
                return Err(ReachError::Dimension {
                    expected: dim,
                    actual: lower.len(),
                });
            }
            Ok(truth.minima().iter().zip(lower).map(|(t, e)| t - e).sum())
        }
        BoundaryEstimate::BoxBound { bounds } => {
            if bounds.dim() != dim {
                return Err(ReachError::Dimension {
                    expected: dim,
                    actual: bounds.dim(),
                });
            }
            let truth_vol = truth.enclosing_box.volume();
            if truth_vol <= 0.0 {
                return Err(ReachError::UndefinedError);
            }
            Ok((bounds.volume() - truth_vol) / truth_vol)
        }
        BoundaryEstimate::Hull2D { hull } => {
            if dim != 2 {
                return Err(ReachError::Dimension {
                    expected: 2,
                    actual: dim,
                });
            }
            let pts: Vec<Point2> = truth.points.iter().map(|p| [p[0], p[1]]).collect();
            let truth_area = polygon_area(&convex_hull_2d(&pts)?);
            if truth_area <= 0.0 {
                return Err(ReachError::UndefinedError);
            }
            Ok((polygon_area(hull) - truth_area) / truth_area)
        }
    }
}
