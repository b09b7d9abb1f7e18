//! Deviation experiment: how far `m`-sample quantizations stray from a
//! large-sample reference, and the fitted sample-size constant.

use std::io::{BufRead, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Location;
use crate::measures::MeasureId;
use crate::model::{ContinuousUncertainPoint, ContinuousUncertainSet, Gaussian, UncertainSet};
use crate::montecarlo::{build_quantization, SampleBudget};
use crate::quantize::max_deviation;
use crate::rng::{derive_seed, trial_rng};

#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `n` Gaussians of standard deviation `sigma`, centered on uniform
    /// points of the lateral surface of a cylinder along the z-axis.
    Cylinder { n: usize, length: f64, radius: f64, sigma: f64 },
    Custom(UncertainSet),
}

impl Generator {
    pub fn build(&self, seed: u64) -> Result<UncertainSet> {
        match self {
            Generator::Custom(set) => Ok(set.clone()),
            Generator::Cylinder { n, length, radius, sigma } => {
                if *n == 0 {
                    return Err(Error::param("n", "must be at least 1"));
                }
                let mut rng = trial_rng(seed, 0);
                let points = (0..*n)
                    .map(|_| {
                        let t = rng.random_range(0.0..std::f64::consts::TAU);
                        let z = rng.random_range(0.0..*length);
                        let c = Location::new3(radius * t.cos(), radius * t.sin(), z);
                        Gaussian::isotropic(c, *sigma).map(ContinuousUncertainPoint::Gaussian)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ContinuousUncertainSet::new(points)?.into())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub generator: Generator,
    pub measures: Vec<MeasureId>,
    pub m_values: Vec<usize>,
    /// Sample count of the reference quantization.
    pub eta: usize,
    /// Trials per `m`.
    pub tau: usize,
    pub seed: u64,
    /// `ν` held fixed in the fit.
    pub nu: f64,
}

impl ExperimentConfig {
    /// Desk-scale cylinder setup: `n = 20`, `σ = 2`, `m ∈ {16, 64, 256, 1024}`,
    /// `η = 2·10⁴`, `τ = 200`, with directional width at 75° to the axis,
    /// diameter and enclosing-ball radius.
    pub fn desk_scale(seed: u64) -> Self {
        let a = 75f64.to_radians();
        ExperimentConfig {
            generator: Generator::Cylinder {
                n: 20,
                length: 10.0,
                radius: 1.0,
                sigma: 2.0,
            },
            measures: vec![
                MeasureId::Dwid(crate::measures::Direction::new(&[a.sin(), 0.0, a.cos()]).expect("unit")),
                MeasureId::Diameter,
                MeasureId::Seb2,
            ],
            m_values: vec![16, 64, 256, 1024],
            eta: 20_000,
            tau: 200,
            seed,
            nu: 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tau == 0 {
            return Err(Error::param("tau", "must be at least 1"));
        }
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::param("m", "need at least one positive sample count"));
        }
        if self.measures.is_empty() {
            return Err(Error::param("measures", "at least one measure is required"));
        }
        let max_m = *self.m_values.iter().max().unwrap();
        if self.eta < max_m {
            return Err(Error::param("eta", format!("reference size {} is below the largest m {max_m}", self.eta)));
        }
        Ok(())
    }
}

/// Deviations of `tau` trials at one sample count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationTable {
    pub m: usize,
    /// Sorted ascending.
    pub deviations: Vec<f64>,
}

impl DeviationTable {
    pub fn new(m: usize, mut deviations: Vec<f64>) -> Self {
        deviations.sort_by(f64::total_cmp);
        DeviationTable { m, deviations }
    }

    pub fn median(&self) -> f64 {
        let d = &self.deviations;
        let n = d.len();
        if n % 2 == 1 {
            d[n / 2]
        } else {
            0.5 * (d[n / 2 - 1] + d[n / 2])
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub c: f64,
    pub nu: f64,
    pub residual_norm: f64,
    pub points_used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureReport {
    pub measure: MeasureId,
    pub tables: Vec<DeviationTable>,
    /// `Err` text when the fit is degenerate or lacks data.
    pub fit: std::result::Result<FitResult, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub measures: Vec<MeasureReport>,
}

pub fn run_deviation_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let set = config.generator.build(derive_seed(config.seed, 0))?;
    let mut reports = Vec::with_capacity(config.measures.len());
    for (mi, measure) in config.measures.iter().enumerate() {
        let base = derive_seed(config.seed, 1 + mi as u64);
        let reference = build_quantization(
            &set,
            measure,
            &SampleBudget::new(0.5, 0.5, 1.0)?.with_m(config.eta)?,
            derive_seed(base, u64::MAX),
        )?;
        let mut tables = Vec::with_capacity(config.m_values.len());
        for (ki, &m) in config.m_values.iter().enumerate() {
            let budget = SampleBudget::new(0.5, 0.5, 1.0)?.with_m(m)?;
            let seeds: Vec<u64> = (0..config.tau as u64)
                .map(|t| derive_seed(base, ((ki as u64) << 32) | t))
                .collect();
            let devs = seeds
                .par_iter()
                .map(|&s| build_quantization(&set, measure, &budget, s).map(|q| max_deviation(&q, &reference)))
                .collect::<Result<Vec<_>>>()?;
            tables.push(DeviationTable::new(m, devs));
        }
        let fit = fit_sample_constant(&tables, config.nu).map_err(|e| e.to_string());
        reports.push(MeasureReport {
            measure: *measure,
            tables,
            fit,
        });
    }
    Ok(ExperimentReport { measures: reports })
}

/// Least-squares fit of `C` in `δ(ε) = exp(ν - m ε² / C)`.
///
/// For every table and every observed deviation `ε`, the empirical
/// exceedance `δ̂` is the midpoint of the strict and non-strict tail
/// fractions. Pairs with `δ̂ ∈ [1/τ, 1/2]` give points
/// `x = m ε²`, `y = ν - ln δ̂`, and `1/C` is the slope of the line through
/// the origin.
pub fn fit_sample_constant(tables: &[DeviationTable], nu: f64) -> Result<FitResult> {
    let mut ms: Vec<usize> = tables.iter().map(|t| t.m).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 distinct sample counts, got {}",
            ms.len()
        )));
    }
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut pts = Vec::new();
    for t in tables {
        let tau = t.deviations.len();
        if tau == 0 {
            continue;
        }
        let d = &t.deviations;
        let mut i = 0;
        while i < tau {
            let eps = d[i];
            let mut j = i;
            while j < tau && d[j] == eps {
                j += 1;
            }
            // i values are < eps, j values are <= eps.
            let delta = ((tau - j) as f64 + (tau - i) as f64) / (2.0 * tau as f64);
            if delta >= 1.0 / tau as f64 && delta <= 0.5 {
                let x = t.m as f64 * eps * eps;
                let y = nu - delta.ln();
                sxy += x * y;
                sxx += x * x;
                pts.push((x, y));
            }
            i = j;
        }
    }
    if pts.is_empty() {
        return Err(Error::InsufficientData("no deviation level falls in the fitting window".into()));
    }
    if sxx == 0.0 {
        return Err(Error::Degenerate {
            total: "all deviations are zero, so no constant can be fitted".into(),
        });
    }
    let slope = sxy / sxx;
    let residual_norm = pts.iter().map(|(x, y)| (y - slope * x).powi(2)).sum::<f64>().sqrt();
    Ok(FitResult {
        c: 1.0 / slope,
        nu,
        residual_norm,
        points_used: pts.len(),
    })
}

/// CSV rows `m,trial,deviation`.
pub fn write_deviation_csv<W: Write>(tables: &[DeviationTable], mut out: W) -> std::io::Result<()> {
    writeln!(out, "m,trial,deviation")?;
    for t in tables {
        for (i, d) in t.deviations.iter().enumerate() {
            writeln!(out, "{},{},{:.16e}", t.m, i, d)?;
        }
    }
    Ok(())
}

pub fn read_deviation_csv<R: BufRead>(input: R) -> Result<Vec<DeviationTable>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<f64>> = Default::default();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if n == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("row {n}: expected m,trial,deviation"));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let m: usize = f[0].parse().map_err(|_| bad())?;
        let d: f64 = f[2].parse().map_err(|_| bad())?;
        groups.entry(m).or_default().push(d);
    }
    Ok(groups.into_iter().map(|(m, d)| DeviationTable::new(m, d)).collect())
}
