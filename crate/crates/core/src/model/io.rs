//! JSON interchange format for point sets.
//!
//! ```json
//! {"dimension": 2, "model": "indecisive",
//!  "points": [{"locations": [[0, 0], [1, 0]], "weights": ["1/3", "2/3"]}]}
//! ```
//!
//! Continuous points use `{"kind": "gaussian", "mean": [..], "cov": [[..]]}`,
//! `{"kind": "uniform_disk", "center": [..], "radius": r}` or
//! `{"kind": "point_mass", "at": [..]}`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{
    parse_rational, ContinuousUncertainPoint, ContinuousUncertainSet, Gaussian, IndecisivePoint, IndecisivePointSet,
    UncertainSet,
};
use crate::error::{Error, Result};
use crate::geom::Location;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    dimension: usize,
    model: ModelKind,
    points: Vec<Value>,
}

#[derive(Deserialize, Serialize, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum ModelKind {
    Indecisive,
    Continuous,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIndecisive {
    locations: Vec<Vec<f64>>,
    weights: Vec<RawWeight>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawWeight {
    Text(String),
    Number(serde_json::Number),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawContinuous {
    Gaussian { mean: Vec<f64>, cov: Vec<Vec<f64>> },
    UniformDisk { center: Vec<f64>, radius: f64 },
    PointMass { at: Vec<f64> },
}

fn schema_error(path: String, err: serde_json::Error) -> Error {
    Error::validation(path, format!("schema violation: {err}"))
}

fn location(coords: &[f64], dim: usize, path: &str) -> Result<Location> {
    if coords.len() != dim {
        return Err(Error::validation(path, format!("expected {dim} coordinates, found {}", coords.len())));
    }
    let loc = Location::from_slice(coords).ok_or_else(|| Error::validation(path, "dimension must be 2 or 3"))?;
    if !loc.is_finite() {
        return Err(Error::validation(path, "coordinates must be finite"));
    }
    Ok(loc)
}

/// Parses a point-set document, validating every invariant.
pub fn load_point_set(bytes: &[u8]) -> Result<UncertainSet> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema_error(path, e.into_inner())
    })?;
    if !(2..=3).contains(&doc.dimension) {
        return Err(Error::validation("dimension", format!("{} is not 2 or 3", doc.dimension)));
    }
    let d = doc.dimension;
    match doc.model {
        ModelKind::Indecisive => {
            let mut points = Vec::with_capacity(doc.points.len());
            for (i, raw) in doc.points.into_iter().enumerate() {
                let path = format!("points[{i}]");
                let raw: RawIndecisive = serde_json::from_value(raw).map_err(|e| schema_error(path.clone(), e))?;
                let locations = raw
                    .locations
                    .iter()
                    .enumerate()
                    .map(|(j, c)| location(c, d, &format!("{path}.locations[{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                let weights = raw
                    .weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| {
                        let text = match w {
                            RawWeight::Text(s) => s.clone(),
                            RawWeight::Number(n) => n.to_string(),
                        };
                        parse_rational(&text).ok_or_else(|| {
                            Error::validation(format!("{path}.weights[{j}]"), format!("`{text}` is not a rational"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                points.push(IndecisivePoint::checked(locations, weights, &path)?);
            }
            Ok(UncertainSet::Indecisive(IndecisivePointSet::new(points)?))
        }
        ModelKind::Continuous => {
            let mut points = Vec::with_capacity(doc.points.len());
            for (i, raw) in doc.points.into_iter().enumerate() {
                let path = format!("points[{i}]");
                let raw: RawContinuous = serde_json::from_value(raw).map_err(|e| schema_error(path.clone(), e))?;
                let requalify = |e: Error| match e {
                    Error::Validation { path: p, message } => Error::validation(format!("{path}.{p}"), message),
                    other => other,
                };
                let point = match raw {
                    RawContinuous::Gaussian { mean, cov } => {
                        let mean = location(&mean, d, &format!("{path}.mean"))?;
                        ContinuousUncertainPoint::Gaussian(Gaussian::new(mean, &cov).map_err(requalify)?)
                    }
                    RawContinuous::UniformDisk { center, radius } => {
                        let center = location(&center, d, &format!("{path}.center"))?;
                        ContinuousUncertainPoint::uniform_disk(center, radius).map_err(requalify)?
                    }
                    RawContinuous::PointMass { at } => {
                        ContinuousUncertainPoint::point_mass(location(&at, d, &format!("{path}.at"))?)?
                    }
                };
                points.push(point);
            }
            Ok(UncertainSet::Continuous(ContinuousUncertainSet::new(points)?))
        }
    }
}

/// JSON value in the interchange format. Weights are written as `"p/q"`.
pub fn to_json_value(set: &UncertainSet) -> Value {
    match set {
        UncertainSet::Indecisive(s) => {
            let points: Vec<Value> = s
                .points()
                .iter()
                .map(|p| {
                    json!({
                        "locations": p.locations(),
                        "weights": p.weights().iter().map(|w| format!("{}/{}", w.numer(), w.denom())).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json!({"dimension": s.dimension(), "model": "indecisive", "points": points})
        }
        UncertainSet::Continuous(s) => {
            let points: Vec<Value> = s
                .points()
                .iter()
                .map(|p| match p {
                    ContinuousUncertainPoint::Gaussian(g) => {
                        json!({"kind": "gaussian", "mean": g.mean(), "cov": g.covariance()})
                    }
                    ContinuousUncertainPoint::UniformDisk { center, radius } => {
                        json!({"kind": "uniform_disk", "center": center, "radius": radius})
                    }
                    ContinuousUncertainPoint::PointMass { at } => json!({"kind": "point_mass", "at": at}),
                })
                .collect();
            json!({"dimension": s.dimension(), "model": "continuous", "points": points})
        }
    }
}

/// Pretty-printed UTF-8 document.
pub fn save_point_set(set: &UncertainSet) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&to_json_value(set)).expect("JSON values always serialize");
    out.push(b'\n');
    out
}
