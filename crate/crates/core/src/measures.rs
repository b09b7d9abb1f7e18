//! Geometric measures and the LP-type machinery around them.
//!
//! Every measure except [`MeasureId::Diameter`] is LP-type: its value on a set
//! is attained by a basis of at most β points, and adding a point either
//! raises the value (a violation) or leaves it unchanged.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{bbox_diameter, min_ball, Ball, Location, Shape};
use crate::rng::trial_rng;

/// Relative geometric tolerance, scaled by the bounding-box diameter.
pub const REL_TOL: f64 = 1e-9;

/// Unit direction for directional width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Direction {
    u: [f64; 3],
    dim: u8,
}

impl Direction {
    /// Normalizes 2 or 3 components.
    pub fn new(components: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&components.len()) {
            return Err(Error::param("direction", "expected 2 or 3 components"));
        }
        let norm = components.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::param("direction", "direction must be nonzero and finite"));
        }
        let mut u = [0.0; 3];
        for (ui, c) in u.iter_mut().zip(components) {
            *ui = c / norm;
        }
        Ok(Direction {
            u,
            dim: components.len() as u8,
        })
    }

    /// Planar direction at angle `theta` (radians) from the x-axis.
    pub fn from_angle(theta: f64) -> Self {
        Direction {
            u: [theta.cos(), theta.sin(), 0.0],
            dim: 2,
        }
    }

    pub fn components(&self) -> &[f64] {
        &self.u[..self.dim as usize]
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.u
    }

    pub fn reversed(&self) -> Self {
        Direction {
            u: [-self.u[0], -self.u[1], -self.u[2]],
            dim: self.dim,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureId {
    /// Radius of the smallest enclosing Euclidean ball.
    Seb2,
    /// Radius of the smallest enclosing L1 ball (planar only).
    Seb1,
    /// Radius of the smallest enclosing L∞ ball.
    SebInf,
    /// Perimeter of the bounding box; surface area in space.
    AabbPerimeter,
    /// Area of the bounding box; volume in space.
    AabbArea,
    Dwid(Direction),
    Diameter,
}

impl MeasureId {
    pub fn is_lp_type(&self) -> bool {
        !matches!(self, MeasureId::Diameter)
    }

    /// Largest basis size β in dimension `dim`.
    pub fn combinatorial_dimension(&self, dim: usize) -> usize {
        match self {
            MeasureId::Seb2 => dim + 1,
            MeasureId::Seb1 | MeasureId::SebInf => dim + 1,
            MeasureId::AabbPerimeter | MeasureId::AabbArea => 2 * dim,
            MeasureId::Dwid(_) | MeasureId::Diameter => 2,
        }
    }

    /// Errors unless the measure is defined for points of dimension `dim`.
    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        match self {
            MeasureId::Seb1 if dim != 2 => Err(Error::UnsupportedMeasure {
                measure: self.to_string(),
                reason: "the L1 ball is implemented in the plane only".into(),
            }),
            MeasureId::Dwid(u) if u.dim() != dim => Err(Error::Dimension {
                expected: dim,
                found: u.dim(),
            }),
            _ if !(2..=3).contains(&dim) => Err(Error::Dimension { expected: 2, found: dim }),
            _ => Ok(()),
        }
    }

    /// Polynomial degree of the measure in the coordinates, used to scale
    /// the tolerance.
    fn degree(&self, dim: usize) -> i32 {
        match self {
            MeasureId::AabbPerimeter => dim as i32 - 1,
            MeasureId::AabbArea => dim as i32,
            _ => 1,
        }
    }

    /// Absolute tolerance for comparing values of sets whose bounding-box
    /// diameter is `scale`.
    pub fn tolerance(&self, scale: f64, dim: usize) -> f64 {
        REL_TOL * scale.powi(self.degree(dim))
    }

    /// Whether the measure has a planar summarizing shape (disk or box).
    pub fn has_shape(&self) -> bool {
        matches!(self, MeasureId::Seb2 | MeasureId::AabbPerimeter | MeasureId::AabbArea)
    }

    pub(crate) fn require_lp_type(&self) -> Result<()> {
        if self.is_lp_type() {
            Ok(())
        } else {
            Err(Error::NotLpType(self.to_string()))
        }
    }
}

impl fmt::Display for MeasureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureId::Seb2 => f.write_str("seb2"),
            MeasureId::Seb1 => f.write_str("seb1"),
            MeasureId::SebInf => f.write_str("sebinf"),
            MeasureId::AabbPerimeter => f.write_str("aabb-perimeter"),
            MeasureId::AabbArea => f.write_str("aabb-area"),
            MeasureId::Diameter => f.write_str("diameter"),
            MeasureId::Dwid(u) => {
                f.write_str("dwid:")?;
                let parts: Vec<String> = u.components().iter().map(|c| c.to_string()).collect();
                f.write_str(&parts.join(","))
            }
        }
    }
}

impl FromStr for MeasureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let m = match s {
            "seb2" => MeasureId::Seb2,
            "seb1" => MeasureId::Seb1,
            "sebinf" => MeasureId::SebInf,
            "aabb-perimeter" | "aabb_perimeter" => MeasureId::AabbPerimeter,
            "aabb-area" | "aabb_area" => MeasureId::AabbArea,
            "diameter" | "diam" => MeasureId::Diameter,
            _ => {
                let Some(rest) = s.strip_prefix("dwid:") else {
                    return Err(Error::param("measure", format!("unknown measure `{s}`")));
                };
                let comps = rest
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::param("measure", format!("bad direction in `{s}`")))?;
                MeasureId::Dwid(Direction::new(&comps)?)
            }
        };
        Ok(m)
    }
}

impl Serialize for MeasureId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

fn axis_extent(points: &[Location], proj: impl Fn(&Location) -> f64) -> (f64, f64) {
    points
        .iter()
        .map(proj)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn axis_widths(points: &[Location]) -> [f64; 3] {
    let mut w = [0.0; 3];
    for (k, wk) in w.iter_mut().enumerate() {
        let (lo, hi) = axis_extent(points, |p| p.raw()[k]);
        *wk = hi - lo;
    }
    w
}

fn uv_widths(points: &[Location]) -> [f64; 2] {
    let (ulo, uhi) = axis_extent(points, |p| p.x() + p.y());
    let (vlo, vhi) = axis_extent(points, |p| p.x() - p.y());
    [uhi - ulo, vhi - vlo]
}

/// Value of `measure` on `points`; `0` for an empty set.
///
/// Panics if the measure is not defined in the points' dimension (see
/// [`MeasureId::check_dimension`]).
pub fn evaluate(measure: &MeasureId, points: &[Location]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let dim = points[0].dim();
    match measure {
        MeasureId::Seb2 => min_ball(points).radius,
        MeasureId::SebInf => axis_widths(points).iter().fold(0.0f64, |a, &b| a.max(b)) / 2.0,
        MeasureId::Seb1 => {
            assert_eq!(dim, 2, "seb1 is planar");
            let [wu, wv] = uv_widths(points);
            wu.max(wv) / 2.0
        }
        MeasureId::AabbPerimeter => {
            let [a, b, c] = axis_widths(points);
            if dim == 2 {
                2.0 * (a + b)
            } else {
                2.0 * (a * b + b * c + c * a)
            }
        }
        MeasureId::AabbArea => {
            let [a, b, c] = axis_widths(points);
            if dim == 2 {
                a * b
            } else {
                a * b * c
            }
        }
        MeasureId::Dwid(u) => {
            assert_eq!(u.dim(), dim, "direction dimension");
            let (lo, hi) = axis_extent(points, |p| p.dot(&u.u));
            hi - lo
        }
        MeasureId::Diameter => {
            let mut best = 0.0f64;
            for (i, p) in points.iter().enumerate() {
                for q in &points[i + 1..] {
                    best = best.max(p.dist2(q));
                }
            }
            best.sqrt()
        }
    }
}

/// One basis member: its index in the source collection, the candidate index
/// when the source is an indecisive set, and the location itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BasisMember {
    pub index: usize,
    pub candidate: Option<usize>,
    pub location: Location,
}

/// A minimal subset attaining the value of the whole set.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub members: Vec<BasisMember>,
    pub value: f64,
    pub measure: MeasureId,
    /// Absolute tolerance used for every comparison involving this basis.
    pub tolerance: f64,
}

impl Basis {
    pub fn locations(&self) -> Vec<Location> {
        self.members.iter().map(|m| m.location).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Summarizing shape of the basis, for measures that have one.
    pub fn shape(&self) -> Option<Shape> {
        summarizing_shape(&self.measure, &self.locations())
    }
}

/// Disk for `seb2`, bounding box for the `aabb` measures; planar only.
pub fn summarizing_shape(measure: &MeasureId, points: &[Location]) -> Option<Shape> {
    if points.is_empty() || points[0].dim() != 2 {
        return None;
    }
    match measure {
        MeasureId::Seb2 => Some(Shape::disk_of(points)),
        MeasureId::AabbPerimeter | MeasureId::AabbArea => Some(Shape::rect_of(points)),
        _ => None,
    }
}

/// Precomputed boundary of a set's optimal shape, used to decide which
/// points can possibly belong to a basis.
pub(crate) enum Boundary {
    Ball(Ball),
    /// Extremes along a list of projections.
    Extremes(Vec<([f64; 3], f64, f64)>),
}

impl Boundary {
    pub(crate) fn of(measure: &MeasureId, points: &[Location]) -> Boundary {
        let dim = points.first().map_or(2, |p| p.dim());
        let projections: Vec<[f64; 3]> = match measure {
            MeasureId::Seb2 => return Boundary::Ball(min_ball(points)),
            MeasureId::Seb1 => vec![[1.0, 1.0, 0.0], [1.0, -1.0, 0.0]],
            MeasureId::SebInf | MeasureId::AabbPerimeter | MeasureId::AabbArea => {
                (0..dim).map(|k| std::array::from_fn(|j| if j == k { 1.0 } else { 0.0 })).collect()
            }
            MeasureId::Dwid(u) => vec![u.u],
            MeasureId::Diameter => Vec::new(),
        };
        Boundary::Extremes(
            projections
                .into_iter()
                .map(|u| {
                    let (lo, hi) = axis_extent(points, |p| p.dot(&u));
                    (u, lo, hi)
                })
                .collect(),
        )
    }

    /// Whether `p` lies on (or outside) the boundary within `tol`.
    pub(crate) fn is_critical(&self, p: &Location, tol: f64) -> bool {
        match self {
            Boundary::Ball(b) => b.radius < 0.0 || p.dist2(&Location::from_raw(b.center, p.dim())).sqrt() >= b.radius - tol,
            Boundary::Extremes(list) => list.iter().any(|(u, lo, hi)| {
                let v = p.dot(u);
                v <= lo + tol || v >= hi - tol
            }),
        }
    }
}

/// Canonical basis as indices into `points`: among all minimal subsets of at
/// most β critical points attaining the value, the lexicographically smallest
/// index tuple.
pub(crate) fn canonical_basis_indices(measure: &MeasureId, points: &[Location], tol: f64) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let value = evaluate(measure, points);
    let boundary = Boundary::of(measure, points);
    let critical: Vec<usize> = (0..points.len())
        .filter(|&i| boundary.is_critical(&points[i], tol))
        .collect();
    let beta = measure.combinatorial_dimension(points[0].dim());
    let mut scratch = Vec::with_capacity(beta + 1);
    let mut is_basis = |subset: &[usize]| {
        scratch.clear();
        scratch.extend(subset.iter().map(|&i| points[i]));
        if (evaluate(measure, &scratch) - value).abs() > tol {
            return false;
        }
        if subset.len() == 1 {
            return true;
        }
        (0..subset.len()).all(|skip| {
            scratch.clear();
            scratch.extend(subset.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| points[i]));
            evaluate(measure, &scratch) < value - tol
        })
    };
    if critical.len() <= 12 {
        let mut best: Option<Vec<usize>> = None;
        let mut subset = Vec::with_capacity(beta);
        for_each_subset(&critical, beta, &mut subset, &mut |s| {
            if best.as_ref().is_some_and(|b| b.as_slice() <= s) {
                return;
            }
            if is_basis(s) {
                best = Some(s.to_vec());
            }
        });
        if let Some(b) = best {
            return b;
        }
    }
    greedy_reduction(measure, points, critical, value, tol)
}

/// Calls `visit` on every nonempty subset of `items` with at most `max`
/// elements, in lexicographic order.
fn for_each_subset(items: &[usize], max: usize, current: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    for (pos, &item) in items.iter().enumerate() {
        current.push(item);
        visit(current);
        if current.len() < max {
            for_each_subset(&items[pos + 1..], max, current, visit);
        }
        current.pop();
    }
}

fn greedy_reduction(measure: &MeasureId, points: &[Location], mut keep: Vec<usize>, value: f64, tol: f64) -> Vec<usize> {
    let mut i = 0;
    while i < keep.len() && keep.len() > 1 {
        let trial: Vec<Location> = keep.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &k)| points[k]).collect();
        if evaluate(measure, &trial) >= value - tol {
            keep.remove(i);
        } else {
            i += 1;
        }
    }
    keep
}

/// Basis of `points` with the lexicographic tie rule.
pub fn find_basis(measure: &MeasureId, points: &[Location]) -> Result<Basis> {
    measure.require_lp_type()?;
    let first = points
        .first()
        .ok_or_else(|| Error::param("points", "at least one point is required"))?;
    measure.check_dimension(first.dim())?;
    let tol = measure.tolerance(bbox_diameter(points), first.dim());
    let idx = canonical_basis_indices(measure, points, tol);
    let members: Vec<BasisMember> = idx
        .iter()
        .map(|&i| BasisMember {
            index: i,
            candidate: None,
            location: points[i],
        })
        .collect();
    let locs: Vec<Location> = members.iter().map(|m| m.location).collect();
    Ok(Basis {
        value: evaluate(measure, &locs),
        members,
        measure: *measure,
        tolerance: tol,
    })
}

/// Whether adding `candidate` raises the basis value beyond its tolerance.
/// Equality is not a violation: shapes are closed.
pub fn full_violation_test(measure: &MeasureId, basis: &Basis, candidate: &Location) -> bool {
    let mut pts = basis.locations();
    pts.push(*candidate);
    evaluate(measure, &pts) > basis.value + basis.tolerance
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Monotonicity,
    Locality,
}

/// A failed axiom instance. Index lists refer to the input points.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub f: Vec<usize>,
    pub g: Vec<usize>,
    pub h: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub measure: MeasureId,
    pub trials: usize,
    pub violations: Vec<AxiomViolation>,
    pub note: Option<String>,
}

impl AxiomReport {
    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom == axiom).count()
    }
}

/// Randomized check of monotonicity and locality.
///
/// Each trial draws a random `G`, a random `F ⊆ G` for monotonicity, reduces
/// `G` greedily to an `F'` with the same value, and tests locality with a
/// random `h ∉ G`.
pub fn check_lp_axioms(measure: &MeasureId, points: &[Location], trials: usize, seed: u64) -> Result<AxiomReport> {
    let first = points
        .first()
        .ok_or_else(|| Error::param("points", "at least one point is required"))?;
    measure.check_dimension(first.dim())?;
    let n = points.len();
    let tol = measure.tolerance(bbox_diameter(points), first.dim());
    let pick = |idx: &[usize]| idx.iter().map(|&i| points[i]).collect::<Vec<_>>();
    let mut violations = Vec::new();
    for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let g_size = if n > 1 { rng.random_range(1..n) } else { 1 };
        let mut g: Vec<usize> = sample(&mut rng, n, g_size).into_vec();
        g.sort_unstable();
        let f_size = rng.random_range(1..=g.len());
        let mut f: Vec<usize> = sample(&mut rng, g.len(), f_size).into_iter().map(|i| g[i]).collect();
        f.sort_unstable();
        let fg = evaluate(measure, &pick(&g));
        let ff = evaluate(measure, &pick(&f));
        if ff > fg + tol {
            violations.push(AxiomViolation {
                axiom: Axiom::Monotonicity,
                f,
                g: g.clone(),
                h: None,
                detail: format!("f(F) = {ff} > f(G) = {fg}"),
            });
        }
        let outside: Vec<usize> = (0..n).filter(|i| g.binary_search(i).is_err()).collect();
        if outside.is_empty() {
            continue;
        }
        let h = outside[rng.random_range(0..outside.len())];
        let reduced: Vec<usize> = greedy_reduction(measure, points, g.clone(), fg, tol);
        let fr = evaluate(measure, &pick(&reduced));
        let mut gh = g.clone();
        gh.push(h);
        let mut rh = reduced.clone();
        rh.push(h);
        let fgh = evaluate(measure, &pick(&gh));
        let frh = evaluate(measure, &pick(&rh));
        if fgh > fg + tol && frh <= fr + tol {
            violations.push(AxiomViolation {
                axiom: Axiom::Locality,
                f: reduced,
                g,
                h: Some(h),
                detail: format!("f(G ∪ h) = {fgh} > f(G) = {fg} but f(F ∪ h) = {frh} = f(F)"),
            });
        }
    }
    let note = (!measure.is_lp_type()).then(|| {
        "diameter is not LP-type: locality fails in general, so no full violation test is used for it".to_string()
    });
    Ok(AxiomReport {
        measure: *measure,
        trials,
        violations,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Location {
        Location::new2(x, y)
    }

    fn random_points(seed: u64, n: usize) -> Vec<Location> {
        let mut rng = trial_rng(seed, 0);
        (0..n).map(|_| p(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()
    }

    #[test]
    fn spec_values() {
        assert!((evaluate(&MeasureId::Seb2, &[p(0.0, 0.0), p(2.0, 0.0)]) - 1.0).abs() < 1e-15);
        let tri = [p(0.0, 0.0), p(1.0, 0.0), p(0.5, 3f64.sqrt() / 2.0)];
        assert!((evaluate(&MeasureId::Seb2, &tri) - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert_eq!(evaluate(&MeasureId::AabbPerimeter, &[p(0.0, 0.0), p(2.0, 1.0)]), 6.0);
    }

    #[test]
    fn other_measures() {
        let pts = [p(0.0, 0.0), p(2.0, 1.0), p(1.0, 3.0)];
        assert_eq!(evaluate(&MeasureId::AabbArea, &pts), 6.0);
        assert_eq!(evaluate(&MeasureId::SebInf, &pts), 1.5);
        // u = x + y spans [0, 4], v = x - y spans [-2, 1].
        assert_eq!(evaluate(&MeasureId::Seb1, &pts), 2.0);
        let d = MeasureId::Dwid(Direction::new(&[0.0, 1.0]).unwrap());
        assert_eq!(evaluate(&d, &pts), 3.0);
        assert!((evaluate(&MeasureId::Diameter, &pts) - 10f64.sqrt()).abs() < 1e-15);
        let cube = [Location::new3(0.0, 0.0, 0.0), Location::new3(1.0, 2.0, 3.0)];
        assert_eq!(evaluate(&MeasureId::AabbPerimeter, &cube), 22.0);
        assert_eq!(evaluate(&MeasureId::AabbArea, &cube), 6.0);
    }

    #[test]
    fn parse_and_display() {
        for s in ["seb2", "seb1", "sebinf", "aabb-perimeter", "aabb-area", "diameter", "dwid:0,1"] {
            let m: MeasureId = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        let m: MeasureId = "dwid:3,4".parse().unwrap();
        let MeasureId::Dwid(u) = m else { panic!() };
        assert!((u.components()[0] - 0.6).abs() < 1e-15);
        assert!("dwid:0,0".parse::<MeasureId>().is_err());
        assert!("hull".parse::<MeasureId>().is_err());
    }

    #[test]
    fn collinear_basis_is_the_extreme_pair() {
        let b = find_basis(&MeasureId::Seb2, &[p(0.0, 0.0), p(1.0, 0.0), p(3.0, 0.0)]).unwrap();
        let idx: Vec<usize> = b.members.iter().map(|m| m.index).collect();
        assert_eq!(idx, vec![0, 2]);
    }

    #[test]
    fn square_picks_first_diagonal() {
        let sq = [p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)];
        let b = find_basis(&MeasureId::Seb2, &sq).unwrap();
        let idx: Vec<usize> = b.members.iter().map(|m| m.index).collect();
        assert_eq!(idx, vec![0, 2]);
        assert!((b.value - evaluate(&MeasureId::Seb2, &sq)).abs() < 1e-12);
        assert!((b.value - 2f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn aabb_basis_uses_extreme_points() {
        for seed in 0..20 {
            let pts = random_points(seed, 5);
            let b = find_basis(&MeasureId::AabbPerimeter, &pts).unwrap();
            assert!(b.len() <= 4);
            assert!((b.value - evaluate(&MeasureId::AabbPerimeter, &pts)).abs() <= b.tolerance);
        }
    }

    #[test]
    fn bases_are_minimal_and_small() {
        let measures = [
            MeasureId::Seb2,
            MeasureId::Seb1,
            MeasureId::SebInf,
            MeasureId::AabbPerimeter,
            MeasureId::AabbArea,
            MeasureId::Dwid(Direction::from_angle(0.3)),
        ];
        for seed in 0..30 {
            let pts = random_points(100 + seed, 3 + seed as usize % 8);
            for m in &measures {
                let b = find_basis(m, &pts).unwrap();
                assert!(b.len() <= m.combinatorial_dimension(2), "{m}: {}", b.len());
                assert!((b.value - evaluate(m, &pts)).abs() <= b.tolerance);
                let locs = b.locations();
                for skip in 0..locs.len() {
                    if locs.len() == 1 {
                        break;
                    }
                    let sub: Vec<_> = locs.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, l)| *l).collect();
                    assert!(evaluate(m, &sub) < b.value - b.tolerance, "{m} not minimal");
                }
            }
        }
    }

    #[test]
    fn diameter_has_no_basis() {
        let err = find_basis(&MeasureId::Diameter, &[p(0.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NotLpType(_)));
        assert!(err.to_string().contains("#P-hard"));
    }

    #[test]
    fn violation_on_disk() {
        let b = find_basis(&MeasureId::Seb2, &[p(-1.0, 0.0), p(1.0, 0.0)]).unwrap();
        assert!(!full_violation_test(&MeasureId::Seb2, &b, &p(0.2, 0.3)));
        assert!(full_violation_test(&MeasureId::Seb2, &b, &p(0.0, 1.5)));
        assert!(!full_violation_test(&MeasureId::Seb2, &b, &p(0.0, 1.0)));
    }

    #[test]
    fn fast_and_slow_violation_paths_agree() {
        for seed in 0..50 {
            let pts = random_points(500 + seed, 6);
            let b = find_basis(&MeasureId::Seb2, &pts[..5]).unwrap();
            let q = pts[5];
            let mut all = b.locations();
            all.push(q);
            let slow = evaluate(&MeasureId::Seb2, &all) > b.value + b.tolerance;
            assert_eq!(full_violation_test(&MeasureId::Seb2, &b, &q), slow);
        }
    }

    #[test]
    fn axioms_hold_for_lp_measures() {
        let pts = random_points(9, 10);
        let r = check_lp_axioms(&MeasureId::Seb2, &pts, 100, 4).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        let d = MeasureId::Dwid(Direction::from_angle(1.0));
        let r = check_lp_axioms(&d, &pts, 100, 4).unwrap();
        assert_eq!(r.count(Axiom::Monotonicity), 0);
    }

    #[test]
    fn diameter_axioms_are_diagnostic() {
        let pts = random_points(12, 12);
        let r = check_lp_axioms(&MeasureId::Diameter, &pts, 200, 1).unwrap();
        assert_eq!(r.count(Axiom::Monotonicity), 0);
        assert!(r.note.is_some());
    }

    #[test]
    fn seb1_is_planar() {
        assert!(MeasureId::Seb1.check_dimension(3).is_err());
        assert!(MeasureId::Seb2.check_dimension(3).is_ok());
    }
}
