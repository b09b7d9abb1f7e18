//! Uncertain point sets: the discrete (indecisive) and the continuous model.
//!
//! An *indecisive* point is a finite set of candidate locations with exact
//! rational weights. A *continuous* uncertain point is governed by a
//! parametric distribution. A [`Support`] is one realization of a whole set:
//! exactly one location per point.

mod io;
mod rational;

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geom::{bbox_diameter, Location};
use crate::rng::{splitmix64, unit_from_hash};

pub use io::{load_point_set, save_point_set, to_json_value};
pub use rational::{parse_rational, rational_from_f64};

/// Jitter quantum applied to coincident candidates by the exact engine.
pub const JITTER_QUANTUM: f64 = 1.0 / (1u64 << 40) as f64;

/// A point with `k` weighted candidate locations.
#[derive(Clone, Debug)]
pub struct IndecisivePoint {
    locations: Vec<Location>,
    weights: Vec<BigRational>,
    scaled: Vec<BigUint>,
    denom: BigUint,
    table: SamplingTable,
}

#[derive(Clone, Debug)]
enum SamplingTable {
    Small { cumulative: Vec<u64>, total: u64 },
    Big { cumulative: Vec<BigUint>, total: BigUint },
}

impl PartialEq for IndecisivePoint {
    fn eq(&self, other: &Self) -> bool {
        self.locations == other.locations && self.weights == other.weights
    }
}

impl IndecisivePoint {
    pub fn new(locations: Vec<Location>, weights: Vec<BigRational>) -> Result<Self> {
        Self::checked(locations, weights, "point")
    }

    /// Equal weights `1/k` on every candidate.
    pub fn uniform(locations: Vec<Location>) -> Result<Self> {
        let k = locations.len().max(1);
        let w = BigRational::new(1.into(), k.into());
        Self::new(locations, vec![w; k])
    }

    pub(crate) fn checked(locations: Vec<Location>, weights: Vec<BigRational>, path: &str) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::validation(format!("{path}.locations"), "at least one candidate location is required"));
        }
        if locations.len() != weights.len() {
            return Err(Error::validation(
                path,
                format!("{} locations but {} weights", locations.len(), weights.len()),
            ));
        }
        let dim = locations[0].dim();
        for (j, loc) in locations.iter().enumerate() {
            if loc.dim() != dim {
                return Err(Error::validation(format!("{path}.locations[{j}]"), "mixed dimensions"));
            }
            if !loc.is_finite() {
                return Err(Error::validation(format!("{path}.locations[{j}]"), "coordinates must be finite"));
            }
        }
        let one = BigRational::one();
        for (j, w) in weights.iter().enumerate() {
            if *w <= BigRational::zero() || *w > one {
                return Err(Error::validation(format!("{path}.weights[{j}]"), format!("weight {w} is outside (0, 1]")));
            }
        }
        let total: BigRational = weights.iter().sum();
        if total != one {
            return Err(Error::validation(
                format!("{path}.weights"),
                format!("weights sum to {total}, expected exactly 1"),
            ));
        }
        let (scaled, denom) = rational::common_denominator(&weights);
        let table = match (denom.to_u64(), scaled.iter().map(|s| s.to_u64()).collect::<Option<Vec<_>>>()) {
            (Some(total), Some(small)) => {
                let cumulative = small
                    .iter()
                    .scan(0u64, |acc, w| {
                        *acc += w;
                        Some(*acc)
                    })
                    .collect();
                SamplingTable::Small { cumulative, total }
            }
            _ => {
                let cumulative = scaled
                    .iter()
                    .scan(BigUint::zero(), |acc, w| {
                        *acc += w;
                        Some(acc.clone())
                    })
                    .collect();
                SamplingTable::Big {
                    cumulative,
                    total: denom.clone(),
                }
            }
        };
        Ok(IndecisivePoint {
            locations,
            weights,
            scaled,
            denom,
            table,
        })
    }

    pub fn locations(&self) -> &[Location] {
        &self.locations
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.locations[0].dim()
    }

    /// Weights as integers over the common denominator [`Self::denominator`].
    pub fn integer_weights(&self) -> &[BigUint] {
        &self.scaled
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denom
    }

    /// Draws a candidate index by exact inverse-CDF over the integer weights.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.table {
            SamplingTable::Small { cumulative, total } => {
                if cumulative.len() == 1 {
                    return 0;
                }
                let u = rng.random_range(0..*total);
                cumulative.partition_point(|&c| c <= u)
            }
            SamplingTable::Big { cumulative, total } => {
                let u = uniform_biguint_below(rng, total);
                cumulative.partition_point(|c| *c <= u)
            }
        }
    }
}

fn uniform_biguint_below<R: Rng + ?Sized>(rng: &mut R, bound: &BigUint) -> BigUint {
    let bits = bound.bits();
    let words = bits.div_ceil(32) as usize;
    let excess = (words as u64) * 32 - bits;
    loop {
        let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
        if let Some(top) = digits.last_mut() {
            *top >>= excess;
        }
        let candidate = BigUint::new(digits);
        if candidate < *bound {
            return candidate;
        }
    }
}

/// Identifies one candidate: `(point index, candidate index)`.
pub type CandidateId = (usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct IndecisivePointSet {
    points: Vec<IndecisivePoint>,
    dimension: usize,
}

impl IndecisivePointSet {
    pub fn new(points: Vec<IndecisivePoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::validation("points", "at least one point is required"))?;
        let dimension = first.dim();
        if !(2..=3).contains(&dimension) {
            return Err(Error::validation("points[0]", format!("dimension {dimension} not in {{2, 3}}")));
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dimension {
                return Err(Error::validation(
                    format!("points[{i}]"),
                    format!("dimension {} differs from {dimension}", p.dim()),
                ));
            }
        }
        Ok(IndecisivePointSet { points, dimension })
    }

    /// Every point gets the same number of candidates with uniform weights.
    pub fn uniform(candidates: Vec<Vec<Location>>) -> Result<Self> {
        let points = candidates
            .into_iter()
            .map(IndecisivePoint::uniform)
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }

    pub fn points(&self) -> &[IndecisivePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Total number of candidate locations `Σ k_i`.
    pub fn candidate_count(&self) -> usize {
        self.points.iter().map(|p| p.len()).sum()
    }

    /// Number of supports `Π k_i`.
    pub fn support_count(&self) -> BigUint {
        self.points.iter().map(|p| BigUint::from(p.len())).product()
    }

    pub fn all_locations(&self) -> impl Iterator<Item = &Location> {
        self.points.iter().flat_map(|p| p.locations.iter())
    }

    pub fn location(&self, id: CandidateId) -> Location {
        self.points[id.0].locations[id.1]
    }

    pub fn sample_support<R: Rng + ?Sized>(&self, rng: &mut R) -> Support {
        let provenance: Vec<usize> = self.points.iter().map(|p| p.sample_index(rng)).collect();
        let locations = provenance
            .iter()
            .zip(&self.points)
            .map(|(&j, p)| p.locations[j])
            .collect();
        Support {
            locations,
            provenance: Some(provenance),
        }
    }

    /// Copy in which exactly coincident candidates are separated.
    ///
    /// The second and later occurrences of a location are moved by distinct
    /// multiples of `2^-40` (relative to the bounding-box diameter) along a
    /// fixed pseudo-random direction derived from the candidate's index pair.
    /// Returns the moved candidates so callers can flag them.
    pub fn jittered(&self) -> (IndecisivePointSet, Vec<CandidateId>) {
        let scale = bbox_diameter(self.all_locations());
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut seen: HashMap<[u64; 3], CandidateId> = HashMap::new();
        let mut moved = Vec::new();
        let mut points = self.points.clone();
        for (i, point) in points.iter_mut().enumerate() {
            for (j, loc) in point.locations.iter_mut().enumerate() {
                let key = |l: &Location| {
                    let r = l.raw();
                    [r[0].to_bits(), r[1].to_bits(), r[2].to_bits()]
                };
                if seen.contains_key(&key(loc)) {
                    let dir = jitter_direction(i, j, self.dimension);
                    let rank = moved.len() as f64 + 1.0;
                    let mut next = loc.offset(&dir, rank * JITTER_QUANTUM * scale);
                    let mut bump = rank;
                    while seen.contains_key(&key(&next)) {
                        bump += 1.0;
                        next = loc.offset(&dir, bump * JITTER_QUANTUM * scale);
                    }
                    *loc = next;
                    moved.push((i, j));
                }
                seen.insert(key(loc), (i, j));
            }
        }
        (
            IndecisivePointSet {
                points,
                dimension: self.dimension,
            },
            moved,
        )
    }
}

fn jitter_direction(point: usize, candidate: usize, dim: usize) -> [f64; 3] {
    let h = splitmix64(((point as u64) << 32) ^ candidate as u64 ^ 0x6a09_e667_f3bc_c908);
    let theta = 2.0 * std::f64::consts::PI * unit_from_hash(h);
    if dim == 2 {
        [theta.cos(), theta.sin(), 0.0]
    } else {
        let z = 2.0 * unit_from_hash(splitmix64(h)) - 1.0;
        let r = (1.0 - z * z).sqrt();
        [r * theta.cos(), r * theta.sin(), z]
    }
}

/// Multivariate normal with a symmetric positive-definite covariance.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    mean: Location,
    cov: [[f64; 3]; 3],
    chol: [[f64; 3]; 3],
}

impl Gaussian {
    pub fn new(mean: Location, cov: &[Vec<f64>]) -> Result<Self> {
        let d = mean.dim();
        if cov.len() != d || cov.iter().any(|row| row.len() != d) {
            return Err(Error::validation("cov", format!("covariance must be {d}x{d}")));
        }
        let mut m = [[0.0; 3]; 3];
        for i in 0..d {
            for j in 0..d {
                m[i][j] = cov[i][j];
                if !m[i][j].is_finite() {
                    return Err(Error::validation(format!("cov[{i}][{j}]"), "entries must be finite"));
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                let tol = 1e-12 * (m[i][j].abs() + m[j][i].abs()).max(1e-300);
                if (m[i][j] - m[j][i]).abs() > tol {
                    return Err(Error::validation("cov", "covariance must be symmetric"));
                }
            }
        }
        let chol = cholesky(&m, d).ok_or_else(|| Error::validation("cov", "covariance must be positive definite"))?;
        if !mean.is_finite() {
            return Err(Error::validation("mean", "coordinates must be finite"));
        }
        Ok(Gaussian { mean, cov: m, chol })
    }

    /// Isotropic normal with standard deviation `sigma` per axis.
    pub fn isotropic(mean: Location, sigma: f64) -> Result<Self> {
        let d = mean.dim();
        let cov: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect())
            .collect();
        Self::new(mean, &cov)
    }

    pub fn mean(&self) -> Location {
        self.mean
    }

    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let d = self.mean.dim();
        (0..d).map(|i| self.cov[i][..d].to_vec()).collect()
    }

    /// Lower-triangular factor `L` with `L Lᵀ = Σ`.
    pub fn cholesky_factor(&self) -> [[f64; 3]; 3] {
        self.chol
    }

    /// Maps a whitened coordinate `z` to `mean + L z`.
    pub fn from_whitened(&self, z: [f64; 3]) -> Location {
        let d = self.mean.dim();
        let mut out = self.mean.raw();
        for i in 0..d {
            for j in 0..=i {
                out[i] += self.chol[i][j] * z[j];
            }
        }
        Location::from_raw(out, d)
    }
}

fn cholesky(m: &[[f64; 3]; 3], d: usize) -> Option<[[f64; 3]; 3]> {
    let mut l = [[0.0; 3]; 3];
    for i in 0..d {
        for j in 0..=i {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// A point governed by a parametric distribution.
///
/// `UniformDisk` is uniform over the disk in the plane and over the ball in
/// space.
#[derive(Clone, Debug, PartialEq)]
pub enum ContinuousUncertainPoint {
    Gaussian(Gaussian),
    UniformDisk { center: Location, radius: f64 },
    PointMass { at: Location },
}

impl ContinuousUncertainPoint {
    pub fn uniform_disk(center: Location, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::validation("radius", format!("radius must be positive, got {radius}")));
        }
        if !center.is_finite() {
            return Err(Error::validation("center", "coordinates must be finite"));
        }
        Ok(ContinuousUncertainPoint::UniformDisk { center, radius })
    }

    pub fn point_mass(at: Location) -> Result<Self> {
        if !at.is_finite() {
            return Err(Error::validation("at", "coordinates must be finite"));
        }
        Ok(ContinuousUncertainPoint::PointMass { at })
    }

    pub fn dim(&self) -> usize {
        match self {
            ContinuousUncertainPoint::Gaussian(g) => g.mean.dim(),
            ContinuousUncertainPoint::UniformDisk { center, .. } => center.dim(),
            ContinuousUncertainPoint::PointMass { at } => at.dim(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Location {
        match self {
            ContinuousUncertainPoint::Gaussian(g) => {
                let mut z = [0.0; 3];
                for zi in z.iter_mut().take(g.mean.dim()) {
                    *zi = rng.sample(StandardNormal);
                }
                g.from_whitened(z)
            }
            ContinuousUncertainPoint::UniformDisk { center, radius } => {
                let d = center.dim();
                // Rejection from the enclosing cube keeps the draw exact.
                loop {
                    let mut v = [0.0; 3];
                    for vi in v.iter_mut().take(d) {
                        *vi = rng.random_range(-1.0..1.0);
                    }
                    if v[0] * v[0] + v[1] * v[1] + v[2] * v[2] <= 1.0 {
                        return center.offset(&v, *radius);
                    }
                }
            }
            ContinuousUncertainPoint::PointMass { at } => *at,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousUncertainSet {
    points: Vec<ContinuousUncertainPoint>,
    dimension: usize,
}

impl ContinuousUncertainSet {
    pub fn new(points: Vec<ContinuousUncertainPoint>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::validation("points", "at least one point is required"))?;
        let dimension = first.dim();
        if !(2..=3).contains(&dimension) {
            return Err(Error::validation("points[0]", format!("dimension {dimension} not in {{2, 3}}")));
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dimension {
                return Err(Error::validation(
                    format!("points[{i}]"),
                    format!("dimension {} differs from {dimension}", p.dim()),
                ));
            }
        }
        Ok(ContinuousUncertainSet { points, dimension })
    }

    pub fn points(&self) -> &[ContinuousUncertainPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sample_support<R: Rng + ?Sized>(&self, rng: &mut R) -> Support {
        Support {
            locations: self.points.iter().map(|p| p.sample(rng)).collect(),
            provenance: None,
        }
    }
}

/// Either kind of uncertain point set.
#[derive(Clone, Debug, PartialEq)]
pub enum UncertainSet {
    Indecisive(IndecisivePointSet),
    Continuous(ContinuousUncertainSet),
}

impl UncertainSet {
    pub fn len(&self) -> usize {
        match self {
            UncertainSet::Indecisive(s) => s.len(),
            UncertainSet::Continuous(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dimension(&self) -> usize {
        match self {
            UncertainSet::Indecisive(s) => s.dimension(),
            UncertainSet::Continuous(s) => s.dimension(),
        }
    }

    pub fn as_indecisive(&self) -> Option<&IndecisivePointSet> {
        match self {
            UncertainSet::Indecisive(s) => Some(s),
            UncertainSet::Continuous(_) => None,
        }
    }

    pub fn as_continuous(&self) -> Option<&ContinuousUncertainSet> {
        match self {
            UncertainSet::Continuous(s) => Some(s),
            UncertainSet::Indecisive(_) => None,
        }
    }

    pub fn sample_support<R: Rng + ?Sized>(&self, rng: &mut R) -> Support {
        match self {
            UncertainSet::Indecisive(s) => s.sample_support(rng),
            UncertainSet::Continuous(s) => s.sample_support(rng),
        }
    }

    /// Samples locations only, reusing `out`.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<Location>) {
        out.clear();
        match self {
            UncertainSet::Indecisive(s) => out.extend(s.points.iter().map(|p| p.locations[p.sample_index(rng)])),
            UncertainSet::Continuous(s) => out.extend(s.points.iter().map(|p| p.sample(rng))),
        }
    }
}

impl From<IndecisivePointSet> for UncertainSet {
    fn from(s: IndecisivePointSet) -> Self {
        UncertainSet::Indecisive(s)
    }
}

impl From<ContinuousUncertainSet> for UncertainSet {
    fn from(s: ContinuousUncertainSet) -> Self {
        UncertainSet::Continuous(s)
    }
}

/// One realization of an uncertain set.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub locations: Vec<Location>,
    /// Chosen candidate index per point, for supports of indecisive sets.
    pub provenance: Option<Vec<usize>>,
}

impl Support {
    /// Support of an indecisive set picking candidate `choice[i]` of point `i`.
    pub fn from_choice(set: &IndecisivePointSet, choice: &[usize]) -> Result<Self> {
        if choice.len() != set.len() {
            return Err(Error::validation(
                "support",
                format!("{} choices for {} points", choice.len(), set.len()),
            ));
        }
        let mut locations = Vec::with_capacity(choice.len());
        for (i, (&j, p)) in choice.iter().zip(set.points()).enumerate() {
            let loc = p
                .locations()
                .get(j)
                .ok_or_else(|| Error::validation(format!("support[{i}]"), format!("candidate {j} out of range")))?;
            locations.push(*loc);
        }
        Ok(Support {
            locations,
            provenance: Some(choice.to_vec()),
        })
    }
}

/// Exact probability `Π_i w(p_i)` of a support with provenance.
pub fn support_probability(set: &IndecisivePointSet, support: &Support) -> Result<BigRational> {
    let choice = support.provenance.as_ref().ok_or(Error::ProvenanceRequired)?;
    if choice.len() != set.len() {
        return Err(Error::validation(
            "support.provenance",
            format!("{} indices for {} points", choice.len(), set.len()),
        ));
    }
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for (i, (&j, p)) in choice.iter().zip(set.points()).enumerate() {
        let w = p
            .integer_weights()
            .get(j)
            .ok_or_else(|| Error::validation(format!("support.provenance[{i}]"), format!("candidate {j} out of range")))?;
        num *= w;
        den *= p.denominator();
    }
    Ok(BigRational::new(num.into(), den.into()))
}
