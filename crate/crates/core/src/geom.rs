//! Points, enclosing balls and the planar summarizing shapes.

use std::fmt;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A point in the plane or in space.
///
/// Planar points keep `z = 0`, so every routine can work on three
/// coordinates without branching on the dimension.
#[derive(Clone, Copy, PartialEq)]
pub struct Location {
    xyz: [f64; 3],
    dim: u8,
}

impl Location {
    pub const fn new2(x: f64, y: f64) -> Self {
        Location {
            xyz: [x, y, 0.0],
            dim: 2,
        }
    }

    pub const fn new3(x: f64, y: f64, z: f64) -> Self {
        Location {
            xyz: [x, y, z],
            dim: 3,
        }
    }

    /// Builds a location from 2 or 3 coordinates.
    pub fn from_slice(coords: &[f64]) -> Option<Self> {
        match *coords {
            [x, y] => Some(Self::new2(x, y)),
            [x, y, z] => Some(Self::new3(x, y, z)),
            _ => None,
        }
    }

    pub(crate) fn from_raw(xyz: [f64; 3], dim: usize) -> Self {
        let mut xyz = xyz;
        if dim == 2 {
            xyz[2] = 0.0;
        }
        Location { xyz, dim: dim as u8 }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[f64] {
        &self.xyz[..self.dim()]
    }

    pub fn x(&self) -> f64 {
        self.xyz[0]
    }

    pub fn y(&self) -> f64 {
        self.xyz[1]
    }

    pub fn z(&self) -> f64 {
        self.xyz[2]
    }

    pub(crate) fn raw(&self) -> [f64; 3] {
        self.xyz
    }

    pub fn is_finite(&self) -> bool {
        self.xyz.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, u: &[f64; 3]) -> f64 {
        self.xyz[0] * u[0] + self.xyz[1] * u[1] + self.xyz[2] * u[2]
    }

    pub fn dist2(&self, other: &Location) -> f64 {
        dist2(&self.xyz, &other.xyz)
    }

    pub fn dist(&self, other: &Location) -> f64 {
        self.dist2(other).sqrt()
    }

    pub(crate) fn offset(&self, dir: &[f64; 3], scale: f64) -> Location {
        let mut xyz = self.xyz;
        for (c, d) in xyz.iter_mut().zip(dir) {
            *c += d * scale;
        }
        Location::from_raw(xyz, self.dim())
    }
}

impl fmt::Debug for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl Serialize for Location {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.dim()))?;
        for c in self.coords() {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Location {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct LocVisitor;
        impl<'de> Visitor<'de> for LocVisitor {
            type Value = Location;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array of 2 or 3 numbers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Location, A::Error> {
                let mut coords = Vec::with_capacity(3);
                while let Some(c) = seq.next_element::<f64>()? {
                    coords.push(c);
                }
                Location::from_slice(&coords)
                    .ok_or_else(|| de::Error::invalid_length(coords.len(), &self))
            }
        }
        deserializer.deserialize_seq(LocVisitor)
    }
}

pub(crate) fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Diagonal length of the axis-aligned bounding box.
pub fn bbox_diameter<'a>(points: impl IntoIterator<Item = &'a Location>) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut any = false;
    for p in points {
        any = true;
        for k in 0..3 {
            lo[k] = lo[k].min(p.xyz[k]);
            hi[k] = hi[k].max(p.xyz[k]);
        }
    }
    if !any {
        return 0.0;
    }
    dist2(&lo, &hi).sqrt()
}

/// Closed Euclidean ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Ball {
    const EMPTY: Ball = Ball {
        center: [0.0; 3],
        radius: -1.0,
    };

    pub fn contains(&self, p: &[f64; 3], slack: f64) -> bool {
        self.radius >= 0.0 && dist2(&self.center, p).sqrt() <= self.radius + slack
    }
}

/// Smallest enclosing ball by move-to-front Welzl recursion.
///
/// Works for planar and spatial inputs; the support set is capped at
/// `dim + 1` points.
pub fn min_ball(points: &[Location]) -> Ball {
    if points.is_empty() {
        return Ball::EMPTY;
    }
    let dim = points[0].dim();
    let mut pts: Vec<[f64; 3]> = points.iter().map(|p| p.raw()).collect();
    let slack = 1e-12 * bbox_diameter(points).max(f64::MIN_POSITIVE);
    let mut support = Vec::with_capacity(dim + 1);
    let end = pts.len();
    mtf(&mut pts, end, &mut support, dim + 1, slack)
}

fn mtf(
    pts: &mut [[f64; 3]],
    end: usize,
    support: &mut Vec<[f64; 3]>,
    max_support: usize,
    slack: f64,
) -> Ball {
    let mut ball = circumball(support);
    if support.len() == max_support {
        return ball;
    }
    for i in 0..end {
        let p = pts[i];
        if !ball.contains(&p, slack) {
            support.push(p);
            ball = mtf(pts, i, support, max_support, slack);
            support.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball with every support point on its boundary.
///
/// Affinely dependent supports fall back to the ball spanned by the farthest
/// pair, which is the correct answer for collinear triples.
pub(crate) fn circumball(support: &[[f64; 3]]) -> Ball {
    match support.len() {
        0 => Ball::EMPTY,
        1 => Ball {
            center: support[0],
            radius: 0.0,
        },
        _ => solve_circumball(support).unwrap_or_else(|| farthest_pair_ball(support)),
    }
}

fn farthest_pair_ball(support: &[[f64; 3]]) -> Ball {
    let mut best = (0, 0, -1.0);
    for i in 0..support.len() {
        for j in i + 1..support.len() {
            let d = dist2(&support[i], &support[j]);
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (a, b) = (support[best.0], support[best.1]);
    let center = [
        0.5 * (a[0] + b[0]),
        0.5 * (a[1] + b[1]),
        0.5 * (a[2] + b[2]),
    ];
    Ball {
        center,
        radius: 0.5 * best.2.sqrt(),
    }
}

fn solve_circumball(support: &[[f64; 3]]) -> Option<Ball> {
    let p0 = support[0];
    let s = support.len() - 1;
    let v: Vec<[f64; 3]> = support[1..]
        .iter()
        .map(|p| [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]])
        .collect();
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    // Gram system 2 <v_i, v_j> λ_j = |v_i|^2.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..s {
        for j in 0..s {
            m[i][j] = 2.0 * dot(&v[i], &v[j]);
        }
        m[i][s] = dot(&v[i], &v[i]);
    }
    let scale = (0..s).map(|i| m[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    for col in 0..s {
        let piv = (col..s).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in 0..s {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..=s {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut center = p0;
    for i in 0..s {
        let lambda = m[i][s] / m[i][i];
        for k in 0..3 {
            center[k] += lambda * v[i][k];
        }
    }
    let radius = dist2(&center, &p0).sqrt();
    radius.is_finite().then_some(Ball { center, radius })
}

/// Planar summarizing shape of a support: a disk or an axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Disk { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl Shape {
    /// Closed containment with absolute slack `tol`.
    pub fn contains(&self, q: [f64; 2], tol: f64) -> bool {
        match *self {
            Shape::Disk { center, radius } => {
                let dx = q[0] - center[0];
                let dy = q[1] - center[1];
                (dx * dx + dy * dy).sqrt() <= radius + tol
            }
            Shape::Rect { min, max } => {
                q[0] >= min[0] - tol && q[0] <= max[0] + tol && q[1] >= min[1] - tol && q[1] <= max[1] + tol
            }
        }
    }

    pub fn disk_of(points: &[Location]) -> Shape {
        let b = min_ball(points);
        Shape::Disk {
            center: [b.center[0], b.center[1]],
            radius: b.radius.max(0.0),
        }
    }

    pub fn rect_of(points: &[Location]) -> Shape {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            min[0] = min[0].min(p.x());
            min[1] = min[1].min(p.y());
            max[0] = max[0].max(p.x());
            max[1] = max[1].max(p.y());
        }
        Shape::Rect { min, max }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over all supports of size <= dim + 1.
    fn brute_ball(points: &[Location]) -> f64 {
        let raw: Vec<[f64; 3]> = points.iter().map(|p| p.raw()).collect();
        let n = raw.len();
        let dim = points[0].dim();
        let mut best = f64::INFINITY;
        let mut check = |sup: &[[f64; 3]]| {
            let b = circumball(sup);
            if raw.iter().all(|p| b.contains(p, 1e-9)) {
                best = best.min(b.radius);
            }
        };
        for i in 0..n {
            check(&[raw[i]]);
            for j in i + 1..n {
                check(&[raw[i], raw[j]]);
                for k in j + 1..n {
                    check(&[raw[i], raw[j], raw[k]]);
                    if dim == 3 {
                        for l in k + 1..n {
                            check(&[raw[i], raw[j], raw[k], raw[l]]);
                        }
                    }
                }
            }
        }
        best
    }

    #[test]
    fn antipodal_pair_and_equilateral_triangle() {
        let pair = [Location::new2(0.0, 0.0), Location::new2(2.0, 0.0)];
        assert!((min_ball(&pair).radius - 1.0).abs() < 1e-15);
        let h = 3f64.sqrt() / 2.0;
        let tri = [
            Location::new2(0.0, 0.0),
            Location::new2(1.0, 0.0),
            Location::new2(0.5, h),
        ];
        assert!((min_ball(&tri).radius - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn collinear_triple_uses_extremes() {
        let pts = [
            Location::new2(0.0, 0.0),
            Location::new2(1.0, 0.0),
            Location::new2(3.0, 0.0),
        ];
        let b = min_ball(&pts);
        assert!((b.radius - 1.5).abs() < 1e-12);
        assert!((b.center[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn welzl_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 1 + trial % 9;
            let pts: Vec<Location> = (0..n)
                .map(|_| {
                    if trial % 2 == 0 {
                        Location::new2(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0))
                    } else {
                        Location::new3(
                            rng.random_range(-5.0..5.0),
                            rng.random_range(-5.0..5.0),
                            rng.random_range(-5.0..5.0),
                        )
                    }
                })
                .collect();
            let fast = min_ball(&pts).radius;
            let slow = brute_ball(&pts);
            assert!((fast - slow).abs() < 1e-9, "trial {trial}: {fast} vs {slow}");
        }
    }

    #[test]
    fn shapes_are_closed() {
        let d = Shape::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        };
        assert!(d.contains([1.0, 0.0], 0.0));
        assert!(!d.contains([1.0 + 1e-6, 0.0], 0.0));
        let r = Shape::Rect {
            min: [0.0, 0.0],
            max: [2.0, 1.0],
        };
        assert!(r.contains([2.0, 1.0], 0.0));
        assert!(!r.contains([2.5, 0.5], 0.0));
    }

    #[test]
    fn location_json_round_trip() {
        let p = Location::new3(1.0, -2.5, 3.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[1.0,-2.5,3.0]");
        let q: Location = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        assert!(serde_json::from_str::<Location>("[1.0]").is_err());
    }
}
