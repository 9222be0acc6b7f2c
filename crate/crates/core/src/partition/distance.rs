use crate::error::{ReachError, Result};
use crate::geometry::{merge, BoundaryEstimate, Shape};
use crate::interval::IntervalBox;
use crate::nn::SampleSet;

/// How far a cell's output box reaches outside the reference boundary.
///
/// Box and lower-bound references use the largest per-coordinate excess; hull
/// references use the largest Euclidean distance from a box corner to the hull.
pub fn outside_distance(cell_output: &IntervalBox, reference: &BoundaryEstimate) -> Result<f64> {
    let dim = cell_output.dim();
    let (lo, hi) = (cell_output.lo(), cell_output.hi());
    match reference {
        BoundaryEstimate::BoxBound { bounds } => {
            check_dim(dim, bounds.dim())?;
            Ok((0..dim)
                .map(|i| (hi[i] - bounds.hi()[i]).max(bounds.lo()[i] - lo[i]))
                .fold(0.0, f64::max))
        }
        BoundaryEstimate::LowerBounds { lower } => {
            check_dim(dim, lower.len())?;
            Ok((0..dim).map(|i| lower[i] - lo[i]).fold(0.0, f64::max))
        }
        BoundaryEstimate::Hull2D { hull } => {
            check_dim(dim, 2)?;
            Ok([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]
                .into_iter()
                .map(|c| hull.distance(c))
                .fold(0.0, f64::max))
        }
    }
}

fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(ReachError::Dimension { expected, actual });
    }
    Ok(())
}

/// The sample-derived boundary a shape-aware partitioner steers toward.
pub(crate) fn sample_reference(samples: &SampleSet, shape: Shape) -> Result<BoundaryEstimate> {
    merge(&[], &samples.points, shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convex_hull_2d;

    fn b2(x0: f64, x1: f64, y0: f64, y1: f64) -> IntervalBox {
        IntervalBox::from_bounds(&[(x0, x1), (y0, y1)]).unwrap()
    }

    #[test]
    fn box_reference() {
        let reference = BoundaryEstimate::BoxBound {
            bounds: IntervalBox::unit(2),
        };
        assert_eq!(outside_distance(&b2(0.0, 1.5, 0.0, 1.0), &reference).unwrap(), 0.5);
        assert_eq!(outside_distance(&b2(0.2, 0.8, 0.1, 0.9), &reference).unwrap(), 0.0);
        assert_eq!(outside_distance(&b2(-0.7, 0.5, 0.0, 1.2), &reference).unwrap(), 0.7);
        assert!(outside_distance(&IntervalBox::unit(3), &reference).is_err());
    }

    #[test]
    fn lower_reference_ignores_upper_side() {
        let reference = BoundaryEstimate::LowerBounds { lower: vec![0.0, 0.0] };
        assert_eq!(outside_distance(&b2(0.0, 9.0, -0.25, 1.0), &reference).unwrap(), 0.25);
    }

    #[test]
    fn hull_reference_uses_point_to_polygon_distance() {
        let square = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap();
        let reference = BoundaryEstimate::Hull2D { hull: square.clone() };
        // oracle: min distance to each edge segment, clamped to zero inside
        let oracle = |p: [f64; 2]| -> f64 {
            let inside = (0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]);
            if inside {
                return 0.0;
            }
            let dx = (p[0] - p[0].clamp(0.0, 1.0)).abs();
            let dy = (p[1] - p[1].clamp(0.0, 1.0)).abs();
            dx.hypot(dy)
        };
        let cell = b2(1.0, 2.0, 0.0, 1.0);
        let d = outside_distance(&cell, &reference).unwrap();
        assert_eq!(d, 1.0);
        let expected = cell.corners().iter().map(|c| oracle([c[0], c[1]])).fold(0.0, f64::max);
        assert_eq!(d, expected);
        assert_eq!(outside_distance(&b2(0.1, 0.9, 0.1, 0.9), &reference).unwrap(), 0.0);
    }
}
