//! Planar predicates.

use crate::point_process::Point;

/// Determinants at or below this magnitude count as collinear.
pub const ORIENTATION_TOLERANCE: f64 = 1e-12;

/// `(b − a) × (c − a)`: positive for a counter-clockwise turn.
pub fn orientation(a: &Point, b: &Point, c: &Point) -> f64 {
    (b.0[0] - a.0[0]) * (c.0[1] - a.0[1]) - (b.0[1] - a.0[1]) * (c.0[0] - a.0[0])
}

/// Sign of [`orientation`], zero within the tolerance.
pub fn orientation_sign(a: &Point, b: &Point, c: &Point) -> i8 {
    let o = orientation(a, b, c);
    if o > ORIENTATION_TOLERANCE {
        1
    } else if o < -ORIENTATION_TOLERANCE {
        -1
    } else {
        0
    }
}

pub fn has_collinear_triple(points: &[Point]) -> bool {
    let n = points.len();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if orientation_sign(&points[a], &points[b], &points[c]) == 0 {
                    return true;
                }
            }
        }
    }
    false
}

/// Indices of the convex hull vertices in counter-clockwise order (Andrew's
/// monotone chain). Points on hull edges are not vertices.
pub fn convex_hull(points: &[Point]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (&points[i].0, &points[j].0);
        a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1]))
    });
    if idx.len() < 3 {
        return idx;
    }
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let order: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &i in order {
            while hull.len() >= start + 2
                && orientation(
                    &points[hull[hull.len() - 2]],
                    &points[hull[hull.len() - 1]],
                    &points[i],
                ) <= ORIENTATION_TOLERANCE
            {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

/// True iff every point is a vertex of the convex hull. Any collinear triple
/// makes the answer false.
pub fn in_convex_position(points: &[Point]) -> bool {
    if has_collinear_triple(points) {
        return false;
    }
    convex_hull(points).len() == points.len()
}

/// Intersection point of the lines `x·(cos φ, sin φ) = p`, or `None` for
/// parallel lines.
pub fn line_intersection(l1: &Point, l2: &Point) -> Option<[f64; 2]> {
    let (s1, c1) = l1.phi().sin_cos();
    let (s2, c2) = l2.phi().sin_cos();
    let det = c1 * s2 - s1 * c2;
    if det.abs() < 1e-14 {
        return None;
    }
    let (p1, p2) = (l1.offset(), l2.offset());
    Some([(p1 * s2 - p2 * s1) / det, (c1 * p2 - c2 * p1) / det])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(&[x, y])
    }

    #[test]
    fn orientation_is_antisymmetric() {
        let (a, b, c) = (p(0.0, 0.0), p(1.0, 0.0), p(0.3, 0.8));
        assert_eq!(orientation_sign(&a, &b, &c), 1);
        assert_eq!(orientation_sign(&b, &a, &c), -1);
        assert_eq!(orientation(&a, &b, &c), -orientation(&a, &c, &b));
        assert_eq!(orientation_sign(&a, &b, &p(2.0, 0.0)), 0);
    }

    #[test]
    fn hull_of_square_with_centre() {
        let pts = [
            p(0.0, 0.0),
            p(1.0, 0.0),
            p(1.0, 1.0),
            p(0.0, 1.0),
            p(0.5, 0.4),
        ];
        let mut h = convex_hull(&pts);
        h.sort_unstable();
        assert_eq!(h, vec![0, 1, 2, 3]);
        assert!(in_convex_position(&pts[..4]));
        assert!(!in_convex_position(&pts));
    }

    #[test]
    fn collinear_points_not_in_convex_position() {
        assert!(!in_convex_position(&[
            p(0.0, 0.0),
            p(1.0, 1.0),
            p(2.0, 2.0)
        ]));
        assert!(in_convex_position(&[p(0.0, 0.0), p(1.0, 1.0), p(2.0, 2.5)]));
    }

    #[test]
    fn intersections() {
        use std::f64::consts::FRAC_PI_2;
        let x = line_intersection(&Point::line(0.0, 0.3), &Point::line(FRAC_PI_2, -0.2)).unwrap();
        assert!((x[0] - 0.3).abs() < 1e-15 && (x[1] + 0.2).abs() < 1e-15);
        assert!(line_intersection(&Point::line(1.0, 0.3), &Point::line(1.0, -0.2)).is_none());
        let (l1, l2) = (Point::line(0.4, 0.1), Point::line(2.0, 0.5));
        let y = line_intersection(&l1, &l2).unwrap();
        for l in [l1, l2] {
            let (s, c) = l.phi().sin_cos();
            assert!((y[0] * c + y[1] * s - l.offset()).abs() < 1e-12);
        }
    }
}
