//! Plan-view geometry on the warehouse floor.
//!
//! All positions live in the horizontal `(x, z)` plane, in meters. Orientation
//! tests use the usual convention that a positive cross product means a
//! counter-clockwise turn when `x` points right and `z` points up.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub z: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, z: 0.0 };

    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.z * other.z
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.z - self.z * other.x
    }

    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn length(self) -> f64 {
        self.x.hypot(self.z)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).length()
    }

    pub fn normalized(self) -> Option<Vec2> {
        let len = self.length();
        (len > 0.0 && len.is_finite()).then(|| self * (1.0 / len))
    }

    pub fn lerp(self, other: Vec2, t: f64) -> Vec2 {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, z]: [f64; 2]) -> Self {
        Self { x, z }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.z]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.z + rhs.z)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.z += rhs.z;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.z * rhs)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.z)
    }
}

/// Position plus heading. Heading 0 faces +z; positive heading turns toward +x
/// (clockwise seen from above), so `forward = (sin h, cos h)` and
/// `right = (cos h, -sin h)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub z: f64,
    pub heading: f64,
}

impl Pose {
    pub const fn new(x: f64, z: f64, heading: f64) -> Self {
        Self { x, z, heading }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.z)
    }

    pub fn forward(&self) -> Vec2 {
        Vec2::new(self.heading.sin(), self.heading.cos())
    }

    pub fn right(&self) -> Vec2 {
        Vec2::new(self.heading.cos(), -self.heading.sin())
    }

    /// World point into the robot frame: `x` is lateral (right positive),
    /// `z` is forward.
    pub fn inverse_transform_point(&self, world: Vec2) -> Vec2 {
        self.inverse_transform_direction(world - self.position())
    }

    /// World direction into the robot frame, rotation only.
    pub fn inverse_transform_direction(&self, dir: Vec2) -> Vec2 {
        Vec2::new(dir.dot(self.right()), dir.dot(self.forward()))
    }
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn depth(&self) -> f64 {
        self.max.z - self.min.z
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.z >= self.min.z && p.z <= self.max.z
    }
}

/// Twice the signed area of `abc`; positive when counter-clockwise.
pub fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

pub fn polygon_signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    (0..n).map(|i| points[i].cross(points[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Inclusive point-in-convex-polygon test for a counter-clockwise polygon.
pub fn convex_contains(poly: &[Vec2], p: Vec2) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) >= 0.0)
}

pub fn closest_point_on_segment(a: Vec2, b: Vec2, p: Vec2) -> Vec2 {
    let ab = b - a;
    let len2 = ab.length_squared();
    if len2 == 0.0 {
        return a;
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    a + ab * t
}

pub fn point_segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    closest_point_on_segment(a, b, p).distance(p)
}

/// Distance from `p` to a convex counter-clockwise polygon; zero inside.
pub fn point_convex_distance(poly: &[Vec2], p: Vec2) -> f64 {
    if convex_contains(poly, p) {
        return 0.0;
    }
    let n = poly.len();
    (0..n).map(|i| point_segment_distance(poly[i], poly[(i + 1) % n], p)).fold(f64::INFINITY, f64::min)
}

/// Minimum distance between segment `ab` and point `p`, used for disc tests.
pub fn segment_intersects_disc(a: Vec2, b: Vec2, center: Vec2, radius: f64) -> bool {
    point_segment_distance(a, b, center) < radius
}

pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |p: Vec2, q: Vec2, r: Vec2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.z >= p.z.min(q.z) && r.z <= p.z.max(q.z)
    };
    (d1 == 0.0 && on(c, d, a)) || (d2 == 0.0 && on(c, d, b)) || (d3 == 0.0 && on(a, b, c)) || (d4 == 0.0 && on(a, b, d))
}

/// Distance between a segment and a convex polygon; zero when they touch.
pub fn segment_convex_distance(poly: &[Vec2], a: Vec2, b: Vec2) -> f64 {
    if convex_contains(poly, a) || convex_contains(poly, b) {
        return 0.0;
    }
    let n = poly.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        if segments_intersect(a, b, p, q) {
            return 0.0;
        }
        best = best
            .min(point_segment_distance(p, q, a))
            .min(point_segment_distance(p, q, b))
            .min(point_segment_distance(a, b, p));
    }
    best
}

/// Closest point of a triangle to `p`, inclusive of the interior.
pub fn closest_point_on_triangle(tri: [Vec2; 3], p: Vec2) -> Vec2 {
    if convex_contains(&tri, p) {
        return p;
    }
    let mut best = tri[0];
    let mut best_d = f64::INFINITY;
    for i in 0..3 {
        let c = closest_point_on_segment(tri[i], tri[(i + 1) % 3], p);
        let d = c.distance(p);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Length of the part of segment `ab` lying strictly inside the triangle,
/// found by clipping against the three edge half-planes.
pub fn segment_triangle_overlap(tri: [Vec2; 3], a: Vec2, b: Vec2) -> f64 {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let d = b - a;
    for i in 0..3 {
        let (p, q) = (tri[i], tri[(i + 1) % 3]);
        let edge = q - p;
        let len = edge.length();
        if len == 0.0 {
            return 0.0;
        }
        // signed distance of a point to the edge line, positive inside
        let f0 = edge.cross(a - p) / len;
        let df = edge.cross(d) / len;
        if df == 0.0 {
            if f0 <= 0.0 {
                return 0.0;
            }
        } else {
            let t = -f0 / df;
            if df > 0.0 {
                t0 = t0.max(t);
            } else {
                t1 = t1.min(t);
            }
        }
        if t0 >= t1 {
            return 0.0;
        }
    }
    (t1 - t0) * d.length()
}

/// Whether the triangle's closed area comes strictly closer than `radius` to
/// `center`.
pub fn triangle_intersects_disc(tri: [Vec2; 3], center: Vec2, radius: f64) -> bool {
    closest_point_on_triangle(tri, center).distance(center) < radius
}

/// Wraps an angle into (-π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let w = a - tau * (a / tau).round();
    if w <= -std::f64::consts::PI {
        w + tau
    } else {
        w
    }
}

pub fn polyline_length(points: &[Vec2]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn robot_frame_axes() {
        let pose = Pose::new(1.0, 2.0, 0.0);
        let local = pose.inverse_transform_point(Vec2::new(-1.0, 5.0));
        assert_eq!(local, Vec2::new(-2.0, 3.0));

        let turned = Pose::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let fwd = turned.forward();
        assert!((fwd.x - 1.0).abs() < 1e-12 && fwd.z.abs() < 1e-12);
        let local = turned.inverse_transform_direction(Vec2::new(0.0, -1.0));
        assert!((local.x - 1.0).abs() < 1e-12, "{local:?}");
    }

    #[test]
    fn convex_distance_and_containment() {
        let sq = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!(polygon_signed_area(&sq) > 0.0);
        assert!(convex_contains(&sq, Vec2::new(1.0, 0.5)));
        assert_eq!(point_convex_distance(&sq, Vec2::new(0.5, 0.5)), 0.0);
        assert!((point_convex_distance(&sq, Vec2::new(2.0, 0.5)) - 1.0).abs() < 1e-12);
        assert!((point_convex_distance(&sq, Vec2::new(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(segment_convex_distance(&sq, Vec2::new(-1.0, 0.5), Vec2::new(2.0, 0.5)), 0.0);
    }

    #[test]
    fn segment_clipping() {
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0)];
        let len = segment_triangle_overlap(tri, Vec2::new(-1.0, 0.5), Vec2::new(3.0, 0.5));
        assert!((len - 1.5).abs() < 1e-12);
        // running along an edge is not an interior overlap
        assert_eq!(segment_triangle_overlap(tri, Vec2::new(-1.0, 0.0), Vec2::new(3.0, 0.0)), 0.0);
        assert_eq!(segment_triangle_overlap(tri, Vec2::new(3.0, 3.0), Vec2::new(4.0, 3.0)), 0.0);
    }
}
