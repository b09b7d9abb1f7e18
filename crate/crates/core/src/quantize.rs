//! Quantizations: weighted breakpoints standing in for a CDF.
//!
//! The step convention is closed: `h(v)` is the weight of breakpoints with
//! value `<= v`.

use std::io::{BufRead, Write};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::parse_rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Weights {
    Exact(Vec<BigRational>),
    Sampled(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuantizationKind {
    Exact,
    Sampled,
}

/// Univariate quantization with strictly increasing values.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantization1D {
    values: Vec<f64>,
    weights: Weights,
    cumulative: Vec<f64>,
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::param("values", "a quantization needs at least one breakpoint"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::validation(format!("values[{i}]"), "value is not finite"));
    }
    Ok(())
}

impl Quantization1D {
    /// Uniform weights `1/m` on the given values; equal values merge.
    pub fn from_samples(mut values: Vec<f64>) -> Result<Self> {
        check_values(&values)?;
        values.sort_by(f64::total_cmp);
        let m = values.len() as f64;
        let mut out_v = Vec::new();
        let mut cum = Vec::new();
        for (i, v) in values.iter().enumerate() {
            if out_v.last() == Some(v) {
                *cum.last_mut().unwrap() = (i + 1) as f64 / m;
            } else {
                out_v.push(*v);
                cum.push((i + 1) as f64 / m);
            }
        }
        let weights = cum
            .iter()
            .scan(0.0, |prev, &c| {
                let w = c - *prev;
                *prev = c;
                Some(w)
            })
            .collect();
        Ok(Quantization1D {
            values: out_v,
            weights: Weights::Sampled(weights),
            cumulative: cum,
        })
    }

    /// Arbitrary positive real weights summing to 1 within `1e-12`.
    pub fn from_weighted(pairs: Vec<(f64, f64)>) -> Result<Self> {
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        check_values(&values)?;
        if let Some(i) = pairs.iter().position(|p| !(p.1 > 0.0 && p.1.is_finite())) {
            return Err(Error::validation(format!("weights[{i}]"), "weight must be positive"));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation("weights", format!("weights sum to {total}, expected 1")));
        }
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match merged.last_mut() {
                Some(last) if last.0 == v => last.1 += w,
                _ => merged.push((v, w)),
            }
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = merged
            .iter()
            .map(|p| {
                acc += p.1;
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Quantization1D {
            values: merged.iter().map(|p| p.0).collect(),
            weights: Weights::Sampled(merged.iter().map(|p| p.1).collect()),
            cumulative,
        })
    }

    /// Exact rational weights, which must sum to exactly 1. Equal values
    /// merge.
    pub fn exact(pairs: Vec<(f64, BigRational)>) -> Result<Self> {
        Self::exact_merged(pairs, 0.0)
    }

    /// Like [`Self::exact`], but chains of values within `tol` of their
    /// predecessor merge into the first value of the chain.
    pub fn exact_merged(mut pairs: Vec<(f64, BigRational)>, tol: f64) -> Result<Self> {
        let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        check_values(&values)?;
        if let Some(i) = pairs.iter().position(|p| p.1 <= BigRational::zero()) {
            return Err(Error::validation(format!("weights[{i}]"), "weight must be positive"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64, BigRational)> = Vec::with_capacity(pairs.len());
        for (v, w) in pairs {
            match merged.last_mut() {
                Some(last) if v - last.1 <= tol => {
                    last.1 = v;
                    last.2 += w;
                }
                _ => merged.push((v, v, w)),
            }
        }
        let mut acc = BigRational::zero();
        let mut cumulative = Vec::with_capacity(merged.len());
        for (_, _, w) in &merged {
            acc += w;
            cumulative.push(acc.to_f64().unwrap_or(f64::NAN));
        }
        if !acc.is_one() {
            return Err(Error::validation("weights", format!("exact weights sum to {acc}, expected 1")));
        }
        Ok(Quantization1D {
            values: merged.iter().map(|p| p.0).collect(),
            weights: Weights::Exact(merged.into_iter().map(|p| p.2).collect()),
            cumulative,
        })
    }

    pub fn kind(&self) -> QuantizationKind {
        match self.weights {
            Weights::Exact(_) => QuantizationKind::Exact,
            Weights::Sampled(_) => QuantizationKind::Sampled,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn weight_f64(&self, i: usize) -> f64 {
        match &self.weights {
            Weights::Exact(w) => w[i].to_f64().unwrap_or(f64::NAN),
            Weights::Sampled(w) => w[i],
        }
    }

    /// Cumulative weight through breakpoint `i`.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Weight of breakpoints `<= v`.
    pub fn eval_cdf(&self, v: f64) -> f64 {
        let i = self.values.partition_point(|&x| x <= v);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// Weight of breakpoints `< v`.
    pub fn eval_cdf_left(&self, v: f64) -> f64 {
        let i = self.values.partition_point(|&x| x < v);
        if i == 0 {
            0.0
        } else {
            self.cumulative[i - 1]
        }
    }

    /// Exact CDF value; `None` for sampled quantizations.
    pub fn eval_cdf_exact(&self, v: f64) -> Option<BigRational> {
        let Weights::Exact(w) = &self.weights else {
            return None;
        };
        let i = self.values.partition_point(|&x| x <= v);
        Some(w[..i].iter().sum())
    }

    /// Smallest breakpoint whose cumulative weight reaches `t`.
    pub fn quantile(&self, t: f64) -> f64 {
        let i = self.cumulative.partition_point(|&c| c < t);
        self.values[i.min(self.values.len() - 1)]
    }
}

/// Every `1/s`-spaced quantile at levels `(j - 1/2)/s`, `s = ⌈2/eps⌉`.
///
/// The result has at most `s` breakpoints and stays within `1/(2s) <= eps/4`
/// of the input everywhere. Inputs already that small are returned as is.
pub fn simplify(q: &Quantization1D, eps: f64) -> Result<Quantization1D> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::param("eps", format!("must lie in (0, 1], got {eps}")));
    }
    let s = (2.0 / eps - 1e-9).ceil() as usize;
    if q.len() <= s {
        return Ok(q.clone());
    }
    let picks: Vec<f64> = (1..=s).map(|j| q.quantile((j as f64 - 0.5) / s as f64)).collect();
    match q.kind() {
        QuantizationKind::Sampled => Quantization1D::from_samples(picks),
        QuantizationKind::Exact => {
            let w = BigRational::new(1.into(), s.into());
            Quantization1D::exact(picks.into_iter().map(|v| (v, w.clone())).collect())
        }
    }
}

/// `sup_v |h_a(v) - h_b(v)|`, checked at and just below every breakpoint of
/// either input.
pub fn max_deviation(a: &Quantization1D, b: &Quantization1D) -> f64 {
    let mut worst = 0.0f64;
    for v in a.values.iter().chain(&b.values) {
        worst = worst.max((a.eval_cdf(*v) - b.eval_cdf(*v)).abs());
        worst = worst.max((a.eval_cdf_left(*v) - b.eval_cdf_left(*v)).abs());
    }
    worst
}

/// Multivariate quantization queried by coordinatewise dominance.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantizationKD {
    arity: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    lossy: bool,
}

impl QuantizationKD {
    /// Uniform weights `1/m`.
    pub fn from_samples(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        Self::new(points, vec![1.0 / m as f64; m])
    }

    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let arity = points
            .first()
            .map(|p| p.len())
            .ok_or_else(|| Error::param("points", "a quantization needs at least one point"))?;
        if arity == 0 {
            return Err(Error::param("points", "arity must be at least 1"));
        }
        if points.len() != weights.len() {
            return Err(Error::param("weights", "one weight per point is required"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) || !(weights[i] > 0.0) {
                return Err(Error::validation(format!("points[{i}]"), "non-finite value or nonpositive weight"));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::validation("weights", format!("weights sum to {total}, expected 1")));
        }
        Ok(QuantizationKD {
            arity,
            points,
            weights,
            lossy: false,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Set once [`Self::thin`] has merged points.
    pub fn is_lossy(&self) -> bool {
        self.lossy
    }

    /// Total weight of points `p` with `p_i <= v_i` for every coordinate.
    pub fn eval_dominance(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: v.len(),
            });
        }
        // Summing in the same order as the total keeps full dominance at 1.
        let (hit, total) = self.points.iter().zip(&self.weights).fold((0.0, 0.0), |(hit, total), (p, w)| {
            let dominated = p.iter().zip(v).all(|(a, b)| a <= b);
            (if dominated { hit + w } else { hit }, total + w)
        });
        Ok(hit / total)
    }

    /// Lossy size reduction: points sharing a cell of a uniform grid with
    /// `cells` cells per axis merge into their coordinatewise maximum.
    pub fn thin(&self, cells: usize) -> QuantizationKD {
        let cells = cells.max(1);
        let mut lo = vec![f64::INFINITY; self.arity];
        let mut hi = vec![f64::NEG_INFINITY; self.arity];
        for p in &self.points {
            for k in 0..self.arity {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let mut groups: std::collections::BTreeMap<Vec<usize>, (Vec<f64>, f64)> = Default::default();
        for (p, w) in self.points.iter().zip(&self.weights) {
            let key: Vec<usize> = (0..self.arity)
                .map(|k| {
                    let span = hi[k] - lo[k];
                    if span > 0.0 {
                        (((p[k] - lo[k]) / span * cells as f64) as usize).min(cells - 1)
                    } else {
                        0
                    }
                })
                .collect();
            let e = groups.entry(key).or_insert_with(|| (p.clone(), 0.0));
            for k in 0..self.arity {
                e.0[k] = e.0[k].max(p[k]);
            }
            e.1 += w;
        }
        let lossy = groups.len() < self.points.len();
        let (points, weights) = groups.into_values().unzip();
        QuantizationKD {
            arity: self.arity,
            points,
            weights,
            lossy: self.lossy || lossy,
        }
    }
}

/// Sorted widths of sampled kernels along one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsAlphaQuantization {
    pub widths: Vec<f64>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl EpsAlphaQuantization {
    pub fn eval_cdf(&self, x: f64) -> f64 {
        self.widths.partition_point(|&w| w <= x) as f64 / self.widths.len() as f64
    }

    pub fn to_quantization(&self) -> Result<Quantization1D> {
        Quantization1D::from_samples(self.widths.clone())
    }
}

/// CSV with rows `value,weight,cumulative`; exact quantizations add
/// `weight_exact,cumulative_exact` as `num/den` strings.
pub fn write_csv<W: Write>(q: &Quantization1D, mut out: W) -> std::io::Result<()> {
    match &q.weights {
        Weights::Sampled(w) => {
            writeln!(out, "value,weight,cumulative")?;
            for i in 0..q.len() {
                writeln!(out, "{:.16e},{:.16e},{:.16e}", q.values[i], w[i], q.cumulative[i])?;
            }
        }
        Weights::Exact(w) => {
            writeln!(out, "value,weight,cumulative,weight_exact,cumulative_exact")?;
            let mut acc = BigRational::zero();
            for i in 0..q.len() {
                acc += &w[i];
                writeln!(
                    out,
                    "{:.16e},{:.16e},{:.16e},{}/{},{}/{}",
                    q.values[i],
                    w[i].to_f64().unwrap_or(f64::NAN),
                    q.cumulative[i],
                    w[i].numer(),
                    w[i].denom(),
                    acc.numer(),
                    acc.denom()
                )?;
            }
        }
    }
    Ok(())
}

/// Reads the format of [`write_csv`]; exact columns take precedence.
pub fn read_csv<R: BufRead>(input: R) -> Result<Quantization1D> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Format("empty CSV".into()))??;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let find = |name: &str| cols.iter().position(|c| *c == name);
    let vi = find("value").ok_or_else(|| Error::Format("missing `value` column".into()))?;
    let wi = find("weight").ok_or_else(|| Error::Format("missing `weight` column".into()))?;
    let ei = find("weight_exact");
    let mut sampled = Vec::new();
    let mut exact = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = || Error::Format(format!("row {}: malformed", n + 1));
        let v: f64 = fields.get(vi).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        match ei {
            Some(ei) => exact.push((v, parse_rational(fields.get(ei).ok_or_else(bad)?).ok_or_else(bad)?)),
            None => sampled.push((v, fields.get(wi).ok_or_else(bad)?.parse::<f64>().map_err(|_| bad())?)),
        }
    }
    if ei.is_some() {
        Quantization1D::exact(exact)
    } else {
        Quantization1D::from_weighted(sampled)
    }
}

/// CSV with columns `v0..v{k-1},weight`.
pub fn write_kd_csv<W: Write>(q: &QuantizationKD, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (0..q.arity).map(|k| format!("v{k}")).chain(["weight".into()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for (p, w) in q.points.iter().zip(&q.weights) {
        let row: Vec<String> = p.iter().chain([w]).map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
