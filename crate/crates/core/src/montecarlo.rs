//! Randomized engine: sample supports, evaluate, sort.
//!
//! Trial `t` always draws from `trial_rng(seed, t)`, so results do not depend
//! on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{bbox_diameter, Location, Shape};
use crate::harness::{SipField, WeightedShapes};
use crate::measures::{evaluate, summarizing_shape, Direction, MeasureId};
use crate::model::UncertainSet;
use crate::quantize::{EpsAlphaQuantization, Quantization1D, QuantizationKD};
use crate::rng::trial_rng;

/// Empirical constant of the sample-size formula.
pub const DEFAULT_CONSTANT_C: f64 = 0.5;

/// Number of supports `m = ⌈C (ν + ln(1/δ)) / ε²⌉`, unless overridden.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleBudget {
    pub epsilon: f64,
    pub delta: f64,
    pub nu: f64,
    pub constant_c: f64,
    pub explicit_m: Option<usize>,
}

impl SampleBudget {
    pub fn new(epsilon: f64, delta: f64, nu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("eps", format!("must lie in (0, 1), got {epsilon}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param("delta", format!("must lie in (0, 1), got {delta}")));
        }
        if !(nu >= 1.0 && nu.is_finite()) {
            return Err(Error::param("nu", format!("must be at least 1, got {nu}")));
        }
        Ok(SampleBudget {
            epsilon,
            delta,
            nu,
            constant_c: DEFAULT_CONSTANT_C,
            explicit_m: None,
        })
    }

    /// Budget for SIP construction. The shape ranges have VC-dimension 3
    /// (disks) and 4 (boxes).
    pub fn for_sip(epsilon: f64, delta: f64, measure: &MeasureId) -> Result<Self> {
        let nu = match measure {
            MeasureId::Seb2 => 3.0,
            _ => 4.0,
        };
        Self::new(epsilon, delta, nu)
    }

    pub fn with_constant(mut self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        self.constant_c = c;
        Ok(self)
    }

    pub fn with_m(mut self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::param("m", "must be at least 1"));
        }
        self.explicit_m = Some(m);
        Ok(self)
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn m(&self) -> usize {
        self.explicit_m.unwrap_or_else(|| {
            let m = self.constant_c * (self.nu + (1.0 / self.delta).ln()) / (self.epsilon * self.epsilon);
            (m.ceil() as usize).max(1)
        })
    }
}

fn sample_values<T: Send>(
    set: &UncertainSet,
    m: usize,
    seed: u64,
    f: impl Fn(&[Location]) -> T + Sync,
) -> Vec<T> {
    (0..m as u64)
        .into_par_iter()
        .map_init(Vec::new, |buf, t| {
            let mut rng = trial_rng(seed, t);
            set.sample_into(&mut rng, buf);
            f(buf)
        })
        .collect()
}

/// `m` sampled values of `measure` with uniform weights.
pub fn build_quantization(
    set: &UncertainSet,
    measure: &MeasureId,
    budget: &SampleBudget,
    seed: u64,
) -> Result<Quantization1D> {
    measure.check_dimension(set.dimension())?;
    let values = sample_values(set, budget.m(), seed, |pts| evaluate(measure, pts));
    Quantization1D::from_samples(values)
}

/// One `k`-vector of measure values per sampled support. The budget is
/// computed with `ν = k` unless `m` is explicit.
pub fn build_kvariate_quantization(
    set: &UncertainSet,
    measures: &[MeasureId],
    budget: &SampleBudget,
    seed: u64,
) -> Result<QuantizationKD> {
    if measures.is_empty() {
        return Err(Error::param("measures", "at least one measure is required"));
    }
    for m in measures {
        m.check_dimension(set.dimension())?;
    }
    let budget = budget.with_nu(measures.len() as f64);
    let points = sample_values(set, budget.m(), seed, |pts| measures.iter().map(|m| evaluate(m, pts)).collect());
    QuantizationKD::from_samples(points)
}

/// `count` equally spaced directions over `[0, π)`.
pub fn direction_net_2d(count: usize) -> Vec<[f64; 3]> {
    (0..count)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / count as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect()
}

/// `count` near-uniform directions on the upper unit hemisphere.
pub fn direction_net_3d(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

/// Directions on which [`alpha_kernel`] verifies its guarantee.
pub fn verification_net(dim: usize) -> Vec<[f64; 3]> {
    if dim == 2 {
        direction_net_2d(720)
    } else {
        direction_net_3d(2000)
    }
}

fn extremes(points: &[Location], u: &[f64; 3]) -> (usize, usize) {
    let mut lo = (0, f64::INFINITY);
    let mut hi = (0, f64::NEG_INFINITY);
    for (i, p) in points.iter().enumerate() {
        let v = p.dot(u);
        if v < lo.1 {
            lo = (i, v);
        }
        if v > hi.1 {
            hi = (i, v);
        }
    }
    (lo.0, hi.0)
}

/// `max ⟨p,u⟩ - min ⟨p,u⟩`.
pub fn directional_width(points: &[Location], u: &[f64; 3]) -> f64 {
    let (lo, hi) = extremes(points, u);
    points[hi].dot(u) - points[lo].dot(u)
}

fn normalize(v: [f64; 3]) -> Option<[f64; 3]> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    (n > 0.0).then(|| [v[0] / n, v[1] / n, v[2] / n])
}

fn sub(a: &Location, b: &Location) -> [f64; 3] {
    let (a, b) = (a.raw(), b.raw());
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Orthonormal frame whose first axis approximates the diameter direction.
fn fat_frame(points: &[Location]) -> Vec<[f64; 3]> {
    let dim = points[0].dim();
    let far = |from: &Location| {
        (0..points.len())
            .max_by(|&a, &b| points[a].dist2(from).total_cmp(&points[b].dist2(from)))
            .unwrap()
    };
    let a = far(&points[0]);
    let b = far(&points[a]);
    let Some(e1) = normalize(sub(&points[b], &points[a])) else {
        return Vec::new();
    };
    if dim == 2 {
        return vec![e1, [-e1[1], e1[0], 0.0]];
    }
    // Farthest point from the line through a and b fixes the second axis.
    let off_line = |p: &Location| {
        let v = sub(p, &points[a]);
        let t = v[0] * e1[0] + v[1] * e1[1] + v[2] * e1[2];
        [v[0] - t * e1[0], v[1] - t * e1[1], v[2] - t * e1[2]]
    };
    let c = (0..points.len())
        .max_by(|&x, &y| {
            let (vx, vy) = (off_line(&points[x]), off_line(&points[y]));
            (vx[0] * vx[0] + vx[1] * vx[1] + vx[2] * vx[2]).total_cmp(&(vy[0] * vy[0] + vy[1] * vy[1] + vy[2] * vy[2]))
        })
        .unwrap();
    let e2 = normalize(off_line(&points[c])).unwrap_or_else(|| {
        let helper = if e1[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        normalize(cross(e1, helper)).unwrap()
    });
    vec![e1, e2, cross(e1, e2)]
}

/// Subset `K` with `ω(P,u) - ω(K,u) <= α ω(P,u)` on every direction of
/// [`verification_net`].
///
/// Points are first expressed in a frame scaled to unit width along each
/// axis; extremes along `⌈4/√α⌉` (plane) or `⌈16/α⌉` (space) spread
/// directions of that frame form the kernel. Any net direction that still
/// fails contributes its two extremes, so the guarantee is never violated.
pub fn alpha_kernel(points: &[Location], alpha: f64) -> Result<Vec<Location>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let dim = first.dim();
    if points.len() <= 2 {
        return Ok(points.to_vec());
    }
    let frame = fat_frame(points);
    if frame.is_empty() {
        return Ok(vec![*first]);
    }
    let mut keep = vec![false; points.len()];
    let mark = |u: &[f64; 3], keep: &mut Vec<bool>| {
        let (lo, hi) = extremes(points, u);
        keep[lo] = true;
        keep[hi] = true;
    };
    let scales: Vec<f64> = frame.iter().map(|e| directional_width(points, e)).collect();
    // A direction v in the scaled frame corresponds to Σ v_i e_i / s_i.
    let to_world = |v: &[f64; 3]| {
        let mut u = [0.0; 3];
        for (i, e) in frame.iter().enumerate() {
            if scales[i] > 0.0 {
                for k in 0..3 {
                    u[k] += v[i] * e[k] / scales[i];
                }
            }
        }
        u
    };
    let net: Vec<[f64; 3]> = if dim == 2 {
        direction_net_2d((4.0 / alpha.sqrt()).ceil() as usize)
    } else {
        direction_net_3d((16.0 / alpha).ceil() as usize)
    };
    for v in &net {
        mark(&to_world(v), &mut keep);
    }
    for e in &frame {
        mark(e, &mut keep);
    }
    let check: Vec<[f64; 3]> = verification_net(dim);
    for u in &check {
        let kernel: Vec<Location> = points.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect();
        let wp = directional_width(points, u);
        if wp - directional_width(&kernel, u) > alpha * wp {
            mark(u, &mut keep);
        }
    }
    Ok(points.iter().zip(&keep).filter(|(_, &k)| k).map(|(p, _)| *p).collect())
}

/// Sampled supports, each reduced to an `α/2`-kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct EdaKernel {
    pub kernels: Vec<Vec<Location>>,
    pub alpha: f64,
    pub budget: SampleBudget,
}

impl EdaKernel {
    /// Sorted kernel widths along `direction`.
    pub fn query(&self, direction: &Direction) -> EpsAlphaQuantization {
        let u = direction.as_array();
        let mut widths: Vec<f64> = self.kernels.iter().map(|k| directional_width(k, &u)).collect();
        widths.sort_by(f64::total_cmp);
        EpsAlphaQuantization {
            widths,
            alpha: self.alpha,
            epsilon: self.budget.epsilon,
        }
    }

    /// Total number of stored locations.
    pub fn storage(&self) -> usize {
        self.kernels.iter().map(Vec::len).sum()
    }
}

pub fn build_eda_kernel(set: &UncertainSet, alpha: f64, budget: &SampleBudget, seed: u64) -> Result<EdaKernel> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    let kernels = sample_values(set, budget.m(), seed, |pts| alpha_kernel(pts, alpha / 2.0))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(EdaKernel {
        kernels,
        alpha,
        budget: *budget,
    })
}

/// `m` sampled summarizing shapes with weight `1/m` each.
///
/// Both shapes used here are unique optima, so no tie between optimal shapes
/// ever needs breaking.
pub fn build_random_sip(set: &UncertainSet, measure: &MeasureId, budget: &SampleBudget, seed: u64) -> Result<SipField> {
    if !measure.has_shape() {
        return Err(Error::UnsupportedMeasure {
            measure: measure.to_string(),
            reason: "SIP needs a disk (seb2) or box (aabb-*) summarizing shape".into(),
        });
    }
    if set.dimension() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: set.dimension(),
        });
    }
    let shapes: Vec<Shape> = sample_values(set, budget.m(), seed, |pts| {
        summarizing_shape(measure, pts).expect("planar shape measure")
    });
    let scale = shapes.iter().map(shape_extent).fold(0.0, f64::max);
    Ok(SipField::Shapes(WeightedShapes::uniform(shapes, crate::measures::REL_TOL * scale)))
}

fn shape_extent(s: &Shape) -> f64 {
    match *s {
        Shape::Disk { center, radius } => center[0].abs().max(center[1].abs()) + radius,
        Shape::Rect { min, max } => bbox_diameter(&[Location::new2(min[0], min[1]), Location::new2(max[0], max[1])]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContinuousUncertainPoint, ContinuousUncertainSet, IndecisivePointSet};
    use rand::Rng;

    fn masses(pts: &[(f64, f64)]) -> UncertainSet {
        ContinuousUncertainSet::new(
            pts.iter()
                .map(|&(x, y)| ContinuousUncertainPoint::point_mass(Location::new2(x, y)).unwrap())
                .collect(),
        )
        .unwrap()
        .into()
    }

    #[test]
    fn budget_formula() {
        assert_eq!(SampleBudget::new(0.1, 0.05, 1.0).unwrap().m(), 200);
        assert_eq!(SampleBudget::new(0.1, 0.05, 2.0).unwrap().m(), 250);
        assert_eq!(SampleBudget::new(0.1, 0.05, 1.0).unwrap().with_m(7).unwrap().m(), 7);
        assert!(SampleBudget::new(0.0, 0.05, 1.0).is_err());
        assert!(SampleBudget::new(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn point_masses_give_one_step() {
        let set = masses(&[(0.0, 0.0), (2.0, 0.0), (1.0, 1.0)]);
        let budget = SampleBudget::new(0.1, 0.05, 1.0).unwrap().with_m(50).unwrap();
        let q = build_quantization(&set, &MeasureId::Seb2, &budget, 1).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q.values()[0] - 1.0).abs() < 1e-12);
        let k = build_kvariate_quantization(
            &set,
            &[MeasureId::Dwid(Direction::from_angle(0.0)), MeasureId::Dwid(Direction::from_angle(std::f64::consts::FRAC_PI_2))],
            &budget,
            1,
        )
        .unwrap();
        assert!(k.points().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn kvariate_budget_uses_arity() {
        let rng_set = masses(&[(0.0, 0.0)]);
        let budget = SampleBudget::new(0.1, 0.05, 1.0).unwrap();
        let k = build_kvariate_quantization(&rng_set, &[MeasureId::Seb2, MeasureId::SebInf], &budget, 0).unwrap();
        assert_eq!(k.len(), 250);
    }

    #[test]
    fn reproducible() {
        let set: UncertainSet = IndecisivePointSet::uniform(vec![
            vec![Location::new2(0.0, 0.0), Location::new2(1.0, 0.0)],
            vec![Location::new2(0.0, 2.0), Location::new2(3.0, 1.0)],
        ])
        .unwrap()
        .into();
        let budget = SampleBudget::new(0.05, 0.05, 1.0).unwrap();
        let a = build_quantization(&set, &MeasureId::Diameter, &budget, 99).unwrap();
        let b = build_quantization(&set, &MeasureId::Diameter, &budget, 99).unwrap();
        assert_eq!(a, b);
    }

    fn check_kernel(points: &[Location], kernel: &[Location], alpha: f64) {
        for u in verification_net(points[0].dim()) {
            let wp = directional_width(points, &u);
            let wk = directional_width(kernel, &u);
            assert!(wp - wk <= alpha * wp + 1e-12, "{wp} vs {wk}");
        }
    }

    #[test]
    fn kernel_of_circle() {
        let pts: Vec<Location> = (0..64)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / 64.0;
                Location::new2(t.cos(), t.sin())
            })
            .collect();
        let k = alpha_kernel(&pts, 0.2).unwrap();
        assert!(k.len() < 64, "{}", k.len());
        check_kernel(&pts, &k, 0.2);
    }

    #[test]
    fn kernel_degenerate_inputs() {
        let one = [Location::new2(3.0, 4.0)];
        assert_eq!(alpha_kernel(&one, 0.1).unwrap(), one.to_vec());
        let line: Vec<Location> = (0..10).map(|i| Location::new2(i as f64, 2.0 * i as f64)).collect();
        let k = alpha_kernel(&line, 0.1).unwrap();
        assert!(k.contains(&line[0]) && k.contains(&line[9]));
        let u = [1.0 / 5f64.sqrt(), 2.0 / 5f64.sqrt(), 0.0];
        assert!((directional_width(&k, &u) - directional_width(&line, &u)).abs() < 1e-12);
    }

    #[test]
    fn kernels_in_space() {
        let mut rng = trial_rng(4, 0);
        let pts: Vec<Location> = (0..150)
            .map(|_| Location::new3(rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0), rng.random_range(0.0..0.5)))
            .collect();
        let k = alpha_kernel(&pts, 0.1).unwrap();
        check_kernel(&pts, &k, 0.1);
    }

    #[test]
    fn eda_kernel_compresses() {
        let mut rng = trial_rng(21, 0);
        let set: UncertainSet = ContinuousUncertainSet::new(
            (0..200)
                .map(|_| {
                    let c = Location::new2(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
                    ContinuousUncertainPoint::uniform_disk(c, 1.0).unwrap()
                })
                .collect(),
        )
        .unwrap()
        .into();
        let budget = SampleBudget::new(0.2, 0.1, 1.0).unwrap();
        let k = build_eda_kernel(&set, 0.1, &budget, 5).unwrap();
        assert!(k.storage() < budget.m() * 200);
        let u = Direction::from_angle(0.3);
        assert_eq!(k.query(&u).widths, k.query(&u.reversed()).widths);
    }

    #[test]
    fn sip_far_away_is_zero() {
        let set = masses(&[(0.0, 0.0), (1.0, 0.0)]);
        let budget = SampleBudget::new(0.1, 0.05, 3.0).unwrap();
        let field = build_random_sip(&set, &MeasureId::Seb2, &budget, 2).unwrap();
        assert_eq!(field.query([0.5, 0.0]), 1.0);
        assert_eq!(field.query([50.0, 50.0]), 0.0);
    }
}
