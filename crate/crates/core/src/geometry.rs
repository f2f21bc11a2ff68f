//! Planar primitives: points, segments and simple polygons.
//!
//! All predicates use an absolute tolerance of [`GEOM_EPS`]. Degenerate
//! contact (a segment touching a boundary edge or passing through a vertex)
//! is reported as an intersection, so touching segments are never treated as
//! lying inside a domain.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

pub const GEOM_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance_to(&self, p: Point) -> f64 {
        let ab = self.b - self.a;
        let len2 = ab.dot(ab);
        if len2 == 0.0 {
            return p.dist(self.a);
        }
        let t = ((p - self.a).dot(ab) / len2).clamp(0.0, 1.0);
        p.dist(self.a + ab * t)
    }

    /// Closed-segment intersection test, touching included.
    pub fn intersects(&self, other: &Segment) -> bool {
        let (p1, p2, q1, q2) = (self.a, self.b, other.a, other.b);
        let d1 = orient(q1, q2, p1);
        let d2 = orient(q1, q2, p2);
        let d3 = orient(p1, p2, q1);
        let d4 = orient(p1, p2, q2);
        if ((d1 > GEOM_EPS && d2 < -GEOM_EPS) || (d1 < -GEOM_EPS && d2 > GEOM_EPS))
            && ((d3 > GEOM_EPS && d4 < -GEOM_EPS) || (d3 < -GEOM_EPS && d4 > GEOM_EPS))
        {
            return true;
        }
        (d1.abs() <= GEOM_EPS && on_segment(q1, q2, p1))
            || (d2.abs() <= GEOM_EPS && on_segment(q1, q2, p2))
            || (d3.abs() <= GEOM_EPS && on_segment(p1, p2, q1))
            || (d4.abs() <= GEOM_EPS && on_segment(p1, p2, q2))
    }

    pub fn bbox(&self) -> (Point, Point) {
        (
            Point::new(self.a.x.min(self.b.x), self.a.y.min(self.b.y)),
            Point::new(self.a.x.max(self.b.x), self.a.y.max(self.b.y)),
        )
    }
}

/// Twice the signed area of triangle (a, b, c), normalized by the longest
/// side so that the tolerance acts on a length rather than an area.
fn orient(a: Point, b: Point, c: Point) -> f64 {
    let ab = b - a;
    let len = ab.norm();
    let cr = ab.cross(c - a);
    if len > 0.0 {
        cr / len
    } else {
        c.dist(a)
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) - GEOM_EPS
        && p.x <= a.x.max(b.x) + GEOM_EPS
        && p.y >= a.y.min(b.y) - GEOM_EPS
        && p.y <= a.y.max(b.y) + GEOM_EPS
}

/// A closed polygon given by its vertex loop (last vertex joins the first).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<Point>,
}

impl Polygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| Segment::new(self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace signed area; positive for counter-clockwise loops.
    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        let mut s = 0.0;
        for i in 0..n {
            s += self.vertices[i].cross(self.vertices[(i + 1) % n]);
        }
        0.5 * s
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn reversed(&self) -> Polygon {
        let mut v = self.vertices.clone();
        v.reverse();
        Polygon::new(v)
    }

    /// True when no two non-adjacent edges meet and adjacent edges share
    /// only their common vertex. O(n²), run once at load time.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 || self.signed_area().abs() <= GEOM_EPS {
            return false;
        }
        let edges: Vec<Segment> = self.edges().collect();
        for i in 0..n {
            if edges[i].a.dist(edges[i].b) <= GEOM_EPS {
                return false;
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges may only share the joint: reject folds back
                    // onto the previous edge.
                    let (shared, p, q) = if j == i + 1 {
                        (edges[i].b, edges[i].a, edges[j].b)
                    } else {
                        (edges[i].a, edges[i].b, edges[j].a)
                    };
                    let u = p - shared;
                    let v = q - shared;
                    if u.cross(v).abs() <= GEOM_EPS * u.norm().max(v.norm()) && u.dot(v) > 0.0 {
                        return false;
                    }
                    continue;
                }
                if edges[i].intersects(&edges[j]) {
                    return false;
                }
            }
        }
        true
    }

    /// Even-odd point-in-polygon test. Points on the boundary may go either
    /// way; callers combine this with a boundary-distance check.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let vi = self.vertices[i];
            let vj = self.vertices[j];
            if (vi.y > p.y) != (vj.y > p.y) {
                let x_cross = vj.x + (p.y - vj.y) / (vi.y - vj.y) * (vi.x - vj.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn intersects_polygon(&self, other: &Polygon) -> bool {
        self.edges().any(|e| other.edges().any(|f| e.intersects(&f)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ])
    }

    #[test]
    fn point_segment_distance_cases() {
        let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
        assert_eq!(s.distance_to(Point::new(0.5, 0.3)), 0.3);
        assert_eq!(s.distance_to(Point::new(2.0, 0.0)), 1.0);
        assert!((s.distance_to(Point::new(-1.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn crossing_and_touching_segments() {
        let a = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let b = Segment::new(Point::new(0.0, 1.0), Point::new(1.0, 0.0));
        assert!(a.intersects(&b));
        let c = Segment::new(Point::new(1.0, 1.0), Point::new(2.0, 0.0));
        assert!(a.intersects(&c), "shared endpoint counts as touching");
        let d = Segment::new(Point::new(0.0, 0.5), Point::new(0.2, 0.6));
        assert!(!a.intersects(&d));
        let e = Segment::new(Point::new(2.0, 2.0), Point::new(3.0, 3.0));
        assert!(!a.intersects(&e), "collinear but disjoint");
        let f = Segment::new(Point::new(0.5, 0.5), Point::new(3.0, 3.0));
        assert!(a.intersects(&f), "collinear overlap");
    }

    #[test]
    fn square_is_simple_and_ccw() {
        let sq = unit_square();
        assert!(sq.is_simple());
        assert!(sq.is_ccw());
        assert_eq!(sq.signed_area(), 1.0);
        assert!(!sq.reversed().is_ccw());
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(!bow.is_simple());
    }

    #[test]
    fn point_in_square() {
        let sq = unit_square();
        assert!(sq.contains(Point::new(0.5, 0.5)));
        assert!(!sq.contains(Point::new(1.5, 0.5)));
        assert!(!sq.contains(Point::new(-0.1, 0.5)));
    }
}
