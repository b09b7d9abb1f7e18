//! Exact distributions of LP-type measures over indecisive point sets.
//!
//! Every support has exactly one canonical basis. The engine walks all
//! potential bases (at most β candidates, each from a different point) and
//! counts, per basis, the supports that have it: basis members are fixed, and
//! every other point may take any candidate that does not violate the basis.
//! Probabilities are exact rationals throughout.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{bbox_diameter, Location};
use crate::harness::{SipField, WeightedShapes};
use crate::measures::{canonical_basis_indices, evaluate, Basis, BasisMember, Boundary, MeasureId};
use crate::model::{CandidateId, IndecisivePointSet};
use crate::quantize::Quantization1D;

/// Default cap on the number of supports the brute-force oracle enumerates.
pub const DEFAULT_SUPPORT_CAP: u64 = 1_000_000;

/// Default cap on the number of candidate subsets the exact engine scans.
pub const DEFAULT_SUBSET_CAP: u64 = 200_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BasisRecord {
    pub basis: Basis,
    pub probability: BigRational,
    /// Number of supports with this basis.
    pub support_count: BigUint,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    /// One record per basis with positive probability. Empty for the
    /// brute-force oracle, which aggregates supports directly.
    pub records: Vec<BasisRecord>,
    /// Values merged at `tolerance`, with exact weights.
    pub collapsed: Quantization1D,
    /// Candidates moved apart because they coincided with earlier ones.
    pub jittered: Vec<CandidateId>,
    pub tolerance: f64,
}

impl ExactDistribution {
    pub fn total_probability(&self) -> BigRational {
        self.records.iter().map(|r| &r.probability).sum()
    }
}

/// Flattened view of a (jittered) indecisive set.
struct Engine<'a> {
    set: IndecisivePointSet,
    measure: &'a MeasureId,
    /// Measure whose bases are counted. The L1 and L∞ radii have no unique
    /// optimal ball, so they are counted through the bounding box in their
    /// own frame, whose bases are unique.
    counting: MeasureId,
    /// Candidate locations as given, for reported values.
    given: Vec<Location>,
    /// Global candidate order: point-major, then candidate.
    ids: Vec<CandidateId>,
    locs: Vec<Location>,
    /// First global index of each point.
    offsets: Vec<usize>,
    tol: f64,
    report_tol: f64,
    beta: usize,
}

/// Counting measure and frame map for `measure`.
fn counting_frame(measure: &MeasureId) -> (MeasureId, fn(&Location) -> Location) {
    match measure {
        MeasureId::SebInf => (MeasureId::AabbPerimeter, |l| *l),
        MeasureId::Seb1 => (MeasureId::AabbPerimeter, |l| Location::new2(l.x() + l.y(), l.x() - l.y())),
        m => (*m, |l| *l),
    }
}

impl<'a> Engine<'a> {
    fn new(set: &IndecisivePointSet, measure: &'a MeasureId) -> Result<(Self, Vec<CandidateId>)> {
        measure.require_lp_type()?;
        if set.dimension() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                found: set.dimension(),
            });
        }
        measure.check_dimension(2)?;
        let (set, moved) = set.jittered();
        let mut ids = Vec::with_capacity(set.candidate_count());
        let mut locs = Vec::with_capacity(set.candidate_count());
        let mut offsets = Vec::with_capacity(set.len());
        for (i, p) in set.points().iter().enumerate() {
            offsets.push(ids.len());
            for (j, l) in p.locations().iter().enumerate() {
                ids.push((i, j));
                locs.push(*l);
            }
        }
        let (counting, frame) = counting_frame(measure);
        let given = locs;
        let locs: Vec<Location> = given.iter().map(frame).collect();
        let tol = counting.tolerance(bbox_diameter(&locs), 2);
        let report_tol = measure.tolerance(bbox_diameter(&given), 2);
        let beta = counting.combinatorial_dimension(2);
        Ok((
            Engine {
                set,
                measure,
                counting,
                given,
                ids,
                locs,
                offsets,
                tol,
                report_tol,
                beta,
            },
            moved,
        ))
    }

    fn subset_count(&self) -> f64 {
        // Elementary symmetric sums of the k_i up to degree β.
        let mut e = vec![0.0f64; self.beta + 1];
        e[0] = 1.0;
        for p in self.set.points() {
            for d in (1..=self.beta).rev() {
                e[d] += e[d - 1] * p.len() as f64;
            }
        }
        e[1..].iter().sum()
    }

    fn is_potential_basis(&self, subset: &[usize]) -> bool {
        let pts: Vec<Location> = subset.iter().map(|&g| self.locs[g]).collect();
        let idx = canonical_basis_indices(&self.counting, &pts, self.tol);
        idx.len() == subset.len() && idx.iter().enumerate().all(|(a, &b)| a == b)
    }

    fn basis_of(&self, subset: &[usize]) -> Basis {
        let members: Vec<BasisMember> = subset
            .iter()
            .map(|&g| BasisMember {
                index: self.ids[g].0,
                candidate: Some(self.ids[g].1),
                location: self.given[g],
            })
            .collect();
        let locs: Vec<Location> = members.iter().map(|m| m.location).collect();
        Basis {
            value: evaluate(self.measure, &locs),
            members,
            measure: *self.measure,
            tolerance: self.report_tol,
        }
    }

    /// Whether a support containing `subset` can keep it as its basis when
    /// it also contains global candidate `c`.
    fn non_violating(&self, subset: &[usize], value: f64, boundary: &Boundary, c: usize) -> bool {
        let loc = self.locs[c];
        if !boundary.is_critical(&loc, self.tol) {
            return true;
        }
        let pos = subset.partition_point(|&g| g < c);
        let mut merged: Vec<Location> = Vec::with_capacity(subset.len() + 1);
        merged.extend(subset[..pos].iter().map(|&g| self.locs[g]));
        merged.push(loc);
        merged.extend(subset[pos..].iter().map(|&g| self.locs[g]));
        if evaluate(&self.counting, &merged) > value + self.tol {
            return false;
        }
        let idx = canonical_basis_indices(&self.counting, &merged, self.tol);
        let expected: Vec<usize> = (0..merged.len()).filter(|&p| p != pos).collect();
        idx == expected
    }

    /// Exact integer weight numerator and support count of `subset`, or
    /// `None` when no support has it. The denominator is the product of the
    /// per-point denominators.
    fn count(&self, subset: &[usize]) -> Option<(BigUint, BigUint)> {
        let pts: Vec<Location> = subset.iter().map(|&g| self.locs[g]).collect();
        let value = evaluate(&self.counting, &pts);
        let boundary = Boundary::of(&self.counting, &pts);
        let mut num = BigUint::one();
        let mut count = BigUint::one();
        for (i, p) in self.set.points().iter().enumerate() {
            let weights = p.integer_weights();
            if let Some(&g) = subset.iter().find(|&&g| self.ids[g].0 == i) {
                num *= &weights[self.ids[g].1];
                continue;
            }
            let mut sum = BigUint::zero();
            let mut allowed = 0u64;
            for (j, w) in weights.iter().enumerate() {
                if self.non_violating(subset, value, &boundary, self.offsets[i] + j) {
                    sum += w;
                    allowed += 1;
                }
            }
            if allowed == 0 {
                return None;
            }
            num *= sum;
            count *= allowed;
        }
        Some((num, count))
    }

    fn denominator(&self) -> BigUint {
        self.set.points().iter().map(|p| p.denominator().clone()).product()
    }

    /// Potential bases whose subsets start at global candidate `lead`, in
    /// lexicographic order.
    fn bases_from(&self, lead: usize, out: &mut Vec<Vec<usize>>) {
        let mut subset = vec![lead];
        self.extend(&mut subset, out);
    }

    fn extend(&self, subset: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if self.is_potential_basis(subset) {
            out.push(subset.clone());
        }
        if subset.len() == self.beta {
            return;
        }
        let last_point = self.ids[*subset.last().unwrap()].0;
        for next_point in last_point + 1..self.set.len() {
            let start = self.offsets[next_point];
            for g in start..start + self.set.points()[next_point].len() {
                subset.push(g);
                self.extend(subset, out);
                subset.pop();
            }
        }
    }

    fn check_cap(&self, cap: u64) -> Result<()> {
        let needed = self.subset_count();
        if needed > cap as f64 {
            return Err(Error::CapExceeded {
                required: format!("{needed:.0} candidate subsets"),
                cap,
            });
        }
        Ok(())
    }
}

/// Every subset of at most β candidates from distinct points that is its own
/// canonical basis. Locations are those of the jittered set.
pub fn enumerate_potential_bases(set: &IndecisivePointSet, measure: &MeasureId) -> Result<Vec<Basis>> {
    let (engine, _) = Engine::new(set, measure)?;
    engine.check_cap(DEFAULT_SUBSET_CAP)?;
    let subsets: Vec<Vec<Vec<usize>>> = (0..engine.locs.len())
        .into_par_iter()
        .map(|lead| {
            let mut out = Vec::new();
            engine.bases_from(lead, &mut out);
            out
        })
        .collect();
    Ok(subsets.into_iter().flatten().map(|s| engine.basis_of(&s)).collect())
}

/// Exact probability that a random support has `basis` as its basis.
///
/// `basis` must carry candidate indices, as produced by
/// [`enumerate_potential_bases`].
pub fn basis_support_probability(set: &IndecisivePointSet, measure: &MeasureId, basis: &Basis) -> Result<BigRational> {
    Ok(basis_support(set, measure, basis)?.0)
}

/// Probability and number of supports with `basis`.
pub fn basis_support(set: &IndecisivePointSet, measure: &MeasureId, basis: &Basis) -> Result<(BigRational, BigUint)> {
    let (engine, _) = Engine::new(set, measure)?;
    let mut subset = Vec::with_capacity(basis.len());
    for (n, m) in basis.members.iter().enumerate() {
        let j = m.candidate.ok_or(Error::ProvenanceRequired)?;
        let point = set
            .points()
            .get(m.index)
            .ok_or_else(|| Error::validation(format!("basis.members[{n}]"), "point index out of range"))?;
        if j >= point.len() {
            return Err(Error::validation(format!("basis.members[{n}]"), "candidate index out of range"));
        }
        subset.push(engine.offsets[m.index] + j);
    }
    subset.sort_unstable();
    if subset.windows(2).any(|w| engine.ids[w[0]].0 == engine.ids[w[1]].0) {
        return Err(Error::validation("basis", "members must come from distinct points"));
    }
    Ok(match engine.count(&subset) {
        Some((num, count)) => (BigRational::new(num.into(), engine.denominator().into()), count),
        None => (BigRational::zero(), BigUint::zero()),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ExactOptions {
    /// Refuse inputs whose potential-basis scan exceeds this many subsets.
    pub subset_cap: u64,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions {
            subset_cap: DEFAULT_SUBSET_CAP,
        }
    }
}

/// Exact distribution of an LP-type measure.
///
/// Fails with [`Error::Degenerate`] when the basis probabilities do not sum
/// to exactly 1, which happens only for inputs with co-optimal bases that the
/// lexicographic tie rule cannot separate.
pub fn exact_distribution(set: &IndecisivePointSet, measure: &MeasureId) -> Result<ExactDistribution> {
    exact_distribution_with(set, measure, &ExactOptions::default())
}

pub fn exact_distribution_with(
    set: &IndecisivePointSet,
    measure: &MeasureId,
    options: &ExactOptions,
) -> Result<ExactDistribution> {
    let (engine, jittered) = Engine::new(set, measure)?;
    engine.check_cap(options.subset_cap)?;
    let denom = engine.denominator();
    let per_lead: Vec<Vec<BasisRecord>> = (0..engine.locs.len())
        .into_par_iter()
        .map(|lead| {
            let mut subsets = Vec::new();
            engine.bases_from(lead, &mut subsets);
            subsets
                .into_iter()
                .filter_map(|s| {
                    let (num, support_count) = engine.count(&s)?;
                    let basis = engine.basis_of(&s);
                    Some(BasisRecord {
                        probability: BigRational::new(num.into(), denom.clone().into()),
                        support_count,
                        value: basis.value,
                        basis,
                    })
                })
                .collect()
        })
        .collect();
    let records: Vec<BasisRecord> = per_lead.into_iter().flatten().collect();
    let total: BigRational = records.iter().map(|r| &r.probability).sum();
    if !total.is_one() {
        return Err(Error::Degenerate { total: total.to_string() });
    }
    let collapsed =
        Quantization1D::exact_merged(records.iter().map(|r| (r.value, r.probability.clone())).collect(), engine.report_tol)?;
    Ok(ExactDistribution {
        records,
        collapsed,
        jittered,
        tolerance: engine.report_tol,
    })
}

/// Distribution of any measure by enumerating all `Π k_i` supports.
pub fn brute_force_distribution(set: &IndecisivePointSet, measure: &MeasureId) -> Result<ExactDistribution> {
    brute_force_distribution_capped(set, measure, DEFAULT_SUPPORT_CAP)
}

pub fn brute_force_distribution_capped(
    set: &IndecisivePointSet,
    measure: &MeasureId,
    cap: u64,
) -> Result<ExactDistribution> {
    measure.check_dimension(set.dimension())?;
    let total = set.support_count();
    if total > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            required: format!("{total} supports"),
            cap,
        });
    }
    let tol = measure.tolerance(bbox_diameter(set.all_locations()), set.dimension());
    let points = set.points();
    let n = points.len();
    let mut choice = vec![0usize; n];
    let mut locs: Vec<Location> = points.iter().map(|p| p.locations()[0]).collect();
    let mut entries: Vec<(f64, BigUint)> = Vec::new();
    loop {
        let mut num = BigUint::one();
        for (p, &j) in points.iter().zip(&choice) {
            num *= &p.integer_weights()[j];
        }
        entries.push((evaluate(measure, &locs), num));
        // Odometer step.
        let mut i = 0;
        loop {
            if i == n {
                let denom: BigUint = points.iter().map(|p| p.denominator().clone()).product();
                let denom: num_bigint::BigInt = denom.into();
                let pairs = entries
                    .into_iter()
                    .map(|(v, w)| (v, BigRational::new(w.into(), denom.clone())))
                    .collect();
                return Ok(ExactDistribution {
                    records: Vec::new(),
                    collapsed: Quantization1D::exact_merged(pairs, tol)?,
                    jittered: Vec::new(),
                    tolerance: tol,
                });
            }
            choice[i] += 1;
            if choice[i] == points[i].len() {
                choice[i] = 0;
                locs[i] = points[i].locations()[0];
                i += 1;
            } else {
                locs[i] = points[i].locations()[choice[i]];
                break;
            }
        }
    }
}

/// Weighted summarizing shapes, one per basis, with exact weights.
pub fn deterministic_sip(set: &IndecisivePointSet, measure: &MeasureId) -> Result<SipField> {
    if !measure.has_shape() {
        return Err(Error::UnsupportedMeasure {
            measure: measure.to_string(),
            reason: "SIP needs a disk (seb2) or box (aabb-*) summarizing shape".into(),
        });
    }
    let dist = exact_distribution(set, measure)?;
    let mut shapes = Vec::with_capacity(dist.records.len());
    let mut weights = Vec::with_capacity(dist.records.len());
    for r in dist.records {
        shapes.push(r.basis.shape().expect("planar shape measure"));
        weights.push(r.probability);
    }
    let tol = crate::measures::REL_TOL * bbox_diameter(set.all_locations());
    Ok(SipField::Shapes(WeightedShapes::exact(shapes, weights, tol)))
}
