//! Continuous to indecisive: lattice ε-samples of each distribution, then
//! exact rational candidate weights.

use std::f64::consts::{PI, TAU};

use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::geom::{bbox_diameter, min_ball, Location};
use crate::measures::{evaluate, Direction, MeasureId};
use crate::model::{ContinuousUncertainPoint, ContinuousUncertainSet, IndecisivePoint, IndecisivePointSet};
use crate::rng::{splitmix64, unit_from_hash};

/// Lattice size constant `c` in `N = ⌈c (ν/ε²) ln(ν/ε)⌉`.
pub const LATTICE_CONSTANT: f64 = 1.0;

/// Fixed lattice rotation, in radians.
const LATTICE_ANGLE: f64 = 0.618_033_988_749_894_8;

#[derive(Clone, Debug, PartialEq)]
pub enum RangeFamily {
    /// Intersections of slabs normal to the given directions.
    Slabs(Vec<Direction>),
    /// Wedges of enclosing-ball ranges.
    WedgesSeb2,
    Balls,
    AxisRects,
}

impl RangeFamily {
    /// Slabs along 0°, 45°, 90° and 135°.
    pub fn four_slabs() -> Self {
        RangeFamily::Slabs((0..4).map(|i| Direction::from_angle(i as f64 * PI / 4.0)).collect())
    }

    /// VC-dimension bound used for sizing.
    pub fn nu(&self) -> f64 {
        match self {
            RangeFamily::Slabs(d) => 2.0 * d.len() as f64,
            RangeFamily::WedgesSeb2 => 9.0,
            RangeFamily::Balls => 3.0,
            RangeFamily::AxisRects => 4.0,
        }
    }

    /// Target lattice size for accuracy `eps`.
    pub fn target_size(&self, eps: f64) -> usize {
        let nu = self.nu();
        (LATTICE_CONSTANT * nu / (eps * eps) * (nu / eps).ln()).ceil().max(1.0) as usize
    }
}

/// Weighted lattice points approximating one distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSample {
    pub points: Vec<Location>,
    /// Positive, summing to 1.
    pub weights: Vec<f64>,
    pub target_epsilon: f64,
    pub family: RangeFamily,
}

impl LatticeSample {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total weight of points satisfying `pred`.
    pub fn mass(&self, pred: impl Fn(&Location) -> bool) -> f64 {
        self.points.iter().zip(&self.weights).filter(|(p, _)| pred(p)).map(|(_, w)| w).sum()
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Half-width `z` of the truncation square with excluded mass at most
/// `eps/4`.
fn truncation_halfwidth(eps: f64) -> f64 {
    let inside = (1.0 - eps / 4.0).sqrt();
    -std_normal().inverse_cdf((1.0 - inside) / 2.0)
}

fn shift(index: usize, axis: u64) -> f64 {
    unit_from_hash(splitmix64((index as u64).wrapping_mul(0x9e37_79b9) ^ (axis << 48) ^ 0x5851_f42d_4c95_7f2d))
}

/// Cell edges covering `[-z, z]` with spacing `h`, shifted by `offset·h`.
fn edges(z: f64, cells: usize, offset: f64) -> Vec<f64> {
    let h = 2.0 * z / cells as f64;
    let mut e: Vec<f64> = (0..=cells + 1)
        .map(|i| (-z - offset * h + i as f64 * h).clamp(-z, z))
        .collect();
    e.dedup();
    e
}

/// Lattice ε-sample of `dist` for `family`.
pub fn lattice_eps_sample(dist: &ContinuousUncertainPoint, family: &RangeFamily, eps: f64) -> Result<LatticeSample> {
    lattice_eps_sample_sized(dist, family, eps, 0, usize::MAX)
}

/// As [`lattice_eps_sample`], with the lattice offset derived from `index`
/// and at most `max_points` points.
pub fn lattice_eps_sample_sized(
    dist: &ContinuousUncertainPoint,
    family: &RangeFamily,
    eps: f64,
    index: usize,
    max_points: usize,
) -> Result<LatticeSample> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let target = family.target_size(eps).min(max_points.max(1));
    let (points, weights) = match dist {
        ContinuousUncertainPoint::PointMass { at } => (vec![*at], vec![1.0]),
        ContinuousUncertainPoint::Gaussian(g) => {
            if g.mean().dim() != 2 {
                return Err(Error::UnsupportedDistribution("lattice samples are planar only".into()));
            }
            let z = truncation_halfwidth(eps);
            // (cells + 1)² cells at most, after the shift.
            let cells = ((target as f64).sqrt().floor() as usize).saturating_sub(1).max(1);
            let es = edges(z, cells, shift(index, 0));
            let et = edges(z, cells, shift(index, 1));
            let n = std_normal();
            let pdf = |x: f64| (-0.5 * x * x).exp() / TAU.sqrt();
            let (c, s) = (LATTICE_ANGLE.cos(), LATTICE_ANGLE.sin());
            let mut pts = Vec::new();
            let mut ws = Vec::new();
            for sx in es.windows(2) {
                let ms = n.cdf(sx[1]) - n.cdf(sx[0]);
                // Conditional mean of the normal on the interval.
                let cs = (pdf(sx[0]) - pdf(sx[1])) / ms;
                for tx in et.windows(2) {
                    let mt = n.cdf(tx[1]) - n.cdf(tx[0]);
                    let ct = (pdf(tx[0]) - pdf(tx[1])) / mt;
                    let w = ms * mt;
                    if w > 0.0 && cs.is_finite() && ct.is_finite() {
                        pts.push(g.from_whitened([c * cs - s * ct, s * cs + c * ct, 0.0]));
                        ws.push(w);
                    }
                }
            }
            let total: f64 = ws.iter().sum();
            ws.iter_mut().for_each(|w| *w /= total);
            (pts, ws)
        }
        ContinuousUncertainPoint::UniformDisk { center, radius } => {
            if center.dim() != 2 {
                return Err(Error::UnsupportedDistribution("lattice samples are planar only".into()));
            }
            // A square lattice over the disk keeps about π/4 of its cells.
            let cells = ((target as f64 * 4.0 / PI).sqrt().ceil() as usize).max(1);
            let mut cells = cells;
            loop {
                let h = 2.0 / cells as f64;
                let (c, s) = (LATTICE_ANGLE.cos(), LATTICE_ANGLE.sin());
                let (o0, o1) = (shift(index, 0), shift(index, 1));
                let mut pts = Vec::new();
                let half = cells as i64 / 2 + 2;
                for i in -half..=half {
                    for j in -half..=half {
                        let a = (i as f64 + o0) * h;
                        let b = (j as f64 + o1) * h;
                        if a * a + b * b <= 1.0 {
                            pts.push(center.offset(&[c * a - s * b, s * a + c * b, 0.0], *radius));
                        }
                    }
                }
                if pts.len() <= max_points || cells == 1 {
                    if pts.is_empty() {
                        pts.push(*center);
                    }
                    let w = 1.0 / pts.len() as f64;
                    let ws = vec![w; pts.len()];
                    break (pts, ws);
                }
                cells -= 1;
            }
        }
    };
    Ok(LatticeSample {
        points,
        weights,
        target_epsilon: eps,
        family: family.clone(),
    })
}

/// Whether adding `p` to `anchor` keeps the measure at most `w`.
pub fn range_membership(measure: &MeasureId, anchor: &[Location], w: f64, p: &Location) -> bool {
    let mut pts = anchor.to_vec();
    pts.push(*p);
    let scale = bbox_diameter(&pts);
    evaluate(measure, &pts) <= w + measure.tolerance(scale, p.dim())
}

/// Intersection of an angular sector at `apex` with a disk.
///
/// The sector is half-open: angles in `[start, start + span)` as seen from
/// the apex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wedge {
    pub apex: [f64; 2],
    pub start: f64,
    pub span: f64,
    pub center: [f64; 2],
    pub radius: f64,
}

impl Wedge {
    pub fn contains(&self, p: &Location, tol: f64) -> bool {
        let (dx, dy) = (p.x() - self.apex[0], p.y() - self.apex[1]);
        let in_sector = if dx == 0.0 && dy == 0.0 {
            self.start == 0.0 || self.span >= TAU
        } else {
            (dy.atan2(dx) - self.start).rem_euclid(TAU) < self.span
        };
        let (ex, ey) = (p.x() - self.center[0], p.y() - self.center[1]);
        in_sector && (ex * ex + ey * ey).sqrt() <= self.radius + tol
    }
}

/// One piece of the range boundary: an arc of the circle at `center`.
struct Arc {
    center: [f64; 2],
    radius: f64,
    from: f64,
    to: f64,
}

impl Arc {
    fn point(&self, angle: f64) -> [f64; 2] {
        [self.center[0] + self.radius * angle.cos(), self.center[1] + self.radius * angle.sin()]
    }
}

/// Splits the enclosing-ball range `{p : seb2(anchor ∪ p) <= w}` into
/// sectors around the anchor centroid.
///
/// The range is the set of centers within `w` of every anchor, grown by `w`.
/// Its boundary alternates between arcs of radius `2w` around anchors and
/// arcs of radius `w` around corners of the center region, so there are at
/// most `2·|anchor|` wedges. A single anchor yields two half disks.
pub fn wedge_decompose_seb2(anchor: &[Location], w: f64) -> Result<Vec<Wedge>> {
    let first = anchor.first().ok_or_else(|| Error::param("anchor", "anchor must be nonempty"))?;
    if first.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: first.dim(),
        });
    }
    let ball = min_ball(anchor);
    let tol = MeasureId::Seb2.tolerance(bbox_diameter(anchor), 2);
    if w < ball.radius - tol {
        return Err(Error::EmptyRange { w, radius: ball.radius });
    }
    let mut zs: Vec<[f64; 2]> = anchor.iter().map(|p| [p.x(), p.y()]).collect();
    zs.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    zs.dedup();
    let n = zs.len() as f64;
    let apex = [zs.iter().map(|z| z[0]).sum::<f64>() / n, zs.iter().map(|z| z[1]).sum::<f64>() / n];
    let w = w.max(ball.radius);

    // Angular interval of circle i inside every other disk.
    let mut arcs: Vec<(usize, f64, f64)> = Vec::new();
    for (i, zi) in zs.iter().enumerate() {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut empty = false;
        for (j, zj) in zs.iter().enumerate() {
            if i == j {
                continue;
            }
            let (dx, dy) = (zj[0] - zi[0], zj[1] - zi[1]);
            let d = (dx * dx + dy * dy).sqrt();
            let half = (d / (2.0 * w)).min(1.0).acos();
            let mut c = dy.atan2(dx);
            if lo.is_finite() {
                let mid = 0.5 * (lo + hi);
                c += ((mid - c) / TAU).round() * TAU;
            }
            lo = lo.max(c - half);
            hi = hi.min(c + half);
            if hi - lo <= 1e-12 {
                empty = true;
                break;
            }
        }
        if !empty {
            arcs.push((i, lo, hi));
        }
    }

    let mut pieces: Vec<Arc> = Vec::new();
    if zs.len() == 1 || arcs.is_empty() {
        // The center region is a single disk or a single point.
        let (center, radius) = if zs.len() == 1 {
            (zs[0], 2.0 * w)
        } else {
            ([ball.center[0], ball.center[1]], w)
        };
        pieces.push(Arc { center, radius, from: 0.0, to: PI });
        pieces.push(Arc { center, radius, from: PI, to: TAU });
    } else {
        // Order arcs counterclockwise around the center region.
        let region_mid = {
            let pts: Vec<[f64; 2]> = arcs
                .iter()
                .map(|&(i, lo, hi)| {
                    let a = 0.5 * (lo + hi);
                    [zs[i][0] + w * a.cos(), zs[i][1] + w * a.sin()]
                })
                .collect();
            let k = pts.len() as f64;
            [pts.iter().map(|p| p[0]).sum::<f64>() / k, pts.iter().map(|p| p[1]).sum::<f64>() / k]
        };
        arcs.sort_by(|a, b| {
            let ang = |&(i, lo, hi): &(usize, f64, f64)| {
                let m = 0.5 * (lo + hi);
                (zs[i][1] + w * m.sin() - region_mid[1]).atan2(zs[i][0] + w * m.cos() - region_mid[0])
            };
            ang(a).total_cmp(&ang(b))
        });
        for (k, &(i, lo, hi)) in arcs.iter().enumerate() {
            pieces.push(Arc {
                center: zs[i],
                radius: 2.0 * w,
                from: lo,
                to: hi,
            });
            let (j, next_lo, _) = arcs[(k + 1) % arcs.len()];
            let vertex = [zs[i][0] + w * hi.cos(), zs[i][1] + w * hi.sin()];
            let mut to = next_lo;
            while to < hi {
                to += TAU;
            }
            while to - hi >= TAU {
                to -= TAU;
            }
            if to - hi > 1e-12 && j != i {
                pieces.push(Arc {
                    center: vertex,
                    radius: w,
                    from: hi,
                    to,
                });
            }
        }
    }
    let angle_of = |p: [f64; 2]| (p[1] - apex[1]).atan2(p[0] - apex[0]);
    let wedges = pieces
        .iter()
        .map(|a| {
            let start = angle_of(a.point(a.from));
            let mut span = (angle_of(a.point(a.to)) - start).rem_euclid(TAU);
            if pieces.len() == 1 || (span < 1e-15 && a.to - a.from > PI) {
                span = TAU;
            }
            Wedge {
                apex,
                start,
                span,
                center: a.center,
                radius: a.radius,
            }
        })
        .collect();
    Ok(wedges)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscretizeOptions {
    /// Upper bound on candidates per point.
    pub max_candidates: usize,
}

impl Default for DiscretizeOptions {
    fn default() -> Self {
        DiscretizeOptions { max_candidates: 100 }
    }
}

/// Per-point accuracy and range family for `measure` over `n` points.
pub fn per_point_target(measure: &MeasureId, n: usize, eps: f64) -> Result<(f64, RangeFamily)> {
    let n = n.max(1) as f64;
    match measure {
        MeasureId::AabbPerimeter => Ok((eps / n, RangeFamily::four_slabs())),
        MeasureId::Seb2 => Ok((eps / (2.0 * n * n), RangeFamily::WedgesSeb2)),
        _ => Err(Error::UnsupportedMeasure {
            measure: measure.to_string(),
            reason: "discretization ships for aabb-perimeter and seb2 only".into(),
        }),
    }
}

pub fn discretize_for_measure(set: &ContinuousUncertainSet, measure: &MeasureId, eps: f64) -> Result<IndecisivePointSet> {
    discretize_for_measure_with(set, measure, eps, &DiscretizeOptions::default())
}

pub fn discretize_for_measure_with(
    set: &ContinuousUncertainSet,
    measure: &MeasureId,
    eps: f64,
    options: &DiscretizeOptions,
) -> Result<IndecisivePointSet> {
    if set.dimension() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: set.dimension(),
        });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1), got {eps}")));
    }
    let (point_eps, family) = per_point_target(measure, set.len(), eps)?;
    let points = set
        .points()
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let sample = lattice_eps_sample_sized(d, &family, point_eps, i, options.max_candidates)?;
            let weights = exact_weights(&sample.weights);
            IndecisivePoint::new(sample.points, weights)
        })
        .collect::<Result<Vec<_>>>()?;
    IndecisivePointSet::new(points)
}

/// Rationals with denominator `2³²` that sum to exactly 1, each positive,
/// and within `2⁻³²` of the inputs up to the rounding remainder.
fn exact_weights(w: &[f64]) -> Vec<BigRational> {
    const SCALE: u64 = 1 << 32;
    let mut nums: Vec<u64> = w.iter().map(|x| ((x * SCALE as f64).floor() as u64).max(1)).collect();
    let total: u64 = nums.iter().sum();
    // Hand the remainder to the heaviest cells, one unit each, or take the
    // excess from them.
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].total_cmp(&w[a]).then(a.cmp(&b)));
    if total < SCALE {
        let mut rem = SCALE - total;
        let mut k = 0;
        while rem > 0 {
            nums[order[k % order.len()]] += 1;
            rem -= 1;
            k += 1;
        }
    } else {
        let mut excess = total - SCALE;
        let mut k = 0;
        while excess > 0 {
            let i = order[k % order.len()];
            if nums[i] > 1 {
                nums[i] -= 1;
                excess -= 1;
            }
            k += 1;
        }
    }
    nums.into_iter()
        .map(|n| BigRational::new(BigInt::from(n), BigInt::from(SCALE)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Gaussian;
    use crate::rng::trial_rng;
    use num_traits::One;
    use rand::Rng;

    fn p(x: f64, y: f64) -> Location {
        Location::new2(x, y)
    }

    #[test]
    fn point_mass_is_exact() {
        let d = ContinuousUncertainPoint::point_mass(p(1.0, 2.0)).unwrap();
        let s = lattice_eps_sample(&d, &RangeFamily::Balls, 0.1).unwrap();
        assert_eq!(s.points, vec![p(1.0, 2.0)]);
        assert_eq!(s.weights, vec![1.0]);
    }

    #[test]
    fn weights_are_normalized() {
        let g = ContinuousUncertainPoint::Gaussian(Gaussian::new(p(1.0, -1.0), &[vec![2.0, 0.3], vec![0.3, 0.5]]).unwrap());
        for fam in [RangeFamily::four_slabs(), RangeFamily::AxisRects] {
            let s = lattice_eps_sample(&g, &fam, 0.1).unwrap();
            assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(s.weights.iter().all(|&w| w > 0.0));
        }
        let u = ContinuousUncertainPoint::uniform_disk(p(0.0, 0.0), 2.0).unwrap();
        let s = lattice_eps_sample(&u, &RangeFamily::Balls, 0.1).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(s.points.iter().all(|q| q.dist(&p(0.0, 0.0)) <= 2.0));
    }

    #[test]
    fn single_anchor_membership_is_a_disk() {
        let z = [p(1.0, 1.0)];
        assert!(range_membership(&MeasureId::Seb2, &z, 1.0, &p(2.9, 1.0)));
        assert!(!range_membership(&MeasureId::Seb2, &z, 1.0, &p(3.1, 1.0)));
        let wedges = wedge_decompose_seb2(&z, 1.0).unwrap();
        assert_eq!(wedges.len(), 2);
        assert!(wedges.iter().all(|w| w.radius == 2.0));
    }

    #[test]
    fn aabb_inside_box_is_free() {
        let z = [p(0.0, 0.0), p(2.0, 1.0)];
        assert!(range_membership(&MeasureId::AabbPerimeter, &z, 6.0, &p(1.0, 0.5)));
        assert!(!range_membership(&MeasureId::AabbPerimeter, &z, 6.0, &p(3.0, 0.5)));
    }

    #[test]
    fn membership_is_definitional() {
        let mut rng = trial_rng(31, 0);
        let z: Vec<Location> = (0..4).map(|_| p(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let w = evaluate(&MeasureId::Seb2, &z) * 1.3;
        for _ in 0..10_000 {
            let q = p(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
            let mut all = z.clone();
            all.push(q);
            let direct = evaluate(&MeasureId::Seb2, &all) <= w + MeasureId::Seb2.tolerance(bbox_diameter(&all), 2);
            assert_eq!(range_membership(&MeasureId::Seb2, &z, w, &q), direct);
        }
    }

    #[test]
    fn wedges_tile_the_range() {
        for seed in 0..20 {
            let mut rng = trial_rng(40 + seed, 0);
            let k = 1 + seed as usize % 5;
            let z: Vec<Location> = (0..k).map(|_| p(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let w = evaluate(&MeasureId::Seb2, &z) * rng.random_range(1.01..2.0) + 1e-3;
            let wedges = wedge_decompose_seb2(&z, w).unwrap();
            assert!(wedges.len() <= 2 * k.max(1), "{} wedges for {k} anchors", wedges.len());
            let total: f64 = wedges.iter().map(|x| x.span).sum();
            assert!((total - TAU).abs() < 1e-9, "spans sum to {total}");
            let mut mismatches = 0;
            for _ in 0..10_000 {
                let q = p(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
                let hits = wedges.iter().filter(|x| x.contains(&q, 1e-12)).count();
                assert!(hits <= 1);
                if (hits == 1) != range_membership(&MeasureId::Seb2, &z, w, &q) {
                    mismatches += 1;
                }
            }
            assert_eq!(mismatches, 0, "seed {seed}");
        }
    }

    #[test]
    fn wedge_range_below_radius_is_empty() {
        let z = [p(0.0, 0.0), p(2.0, 0.0)];
        assert!(matches!(wedge_decompose_seb2(&z, 0.5), Err(Error::EmptyRange { .. })));
        let tight = wedge_decompose_seb2(&z, 1.0).unwrap();
        assert!(tight.iter().any(|x| x.contains(&p(1.0, 0.9), 0.0)));
    }

    #[test]
    fn point_masses_discretize_to_single_candidates() {
        let set = ContinuousUncertainSet::new(vec![
            ContinuousUncertainPoint::point_mass(p(0.0, 0.0)).unwrap(),
            ContinuousUncertainPoint::point_mass(p(1.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let d = discretize_for_measure(&set, &MeasureId::AabbPerimeter, 0.2).unwrap();
        assert!(d.points().iter().all(|q| q.len() == 1 && q.weights()[0].is_one()));
        assert!(discretize_for_measure(&set, &MeasureId::SebInf, 0.2).is_err());
    }

    #[test]
    fn candidate_cap_is_respected() {
        let g = ContinuousUncertainPoint::Gaussian(Gaussian::isotropic(p(0.0, 0.0), 1.0).unwrap());
        let u = ContinuousUncertainPoint::uniform_disk(p(3.0, 0.0), 1.0).unwrap();
        let set = ContinuousUncertainSet::new(vec![g, u]).unwrap();
        let d = discretize_for_measure(&set, &MeasureId::Seb2, 0.3).unwrap();
        for q in d.points() {
            assert!(q.len() <= 100 && q.len() > 10, "{}", q.len());
        }
    }

    #[test]
    fn exact_weights_sum_to_one() {
        let w = exact_weights(&[0.3, 0.3, 0.4]);
        assert!(w.iter().sum::<BigRational>().is_one());
        let w = exact_weights(&[1e-15, 1.0 - 1e-15]);
        assert!(w.iter().all(|x| *x > BigRational::from_integer(0.into())));
    }
}
