//! Distributions of geometric measures over uncertain point sets.
//!
//! Points are either indecisive (finitely many weighted candidate
//! locations) or continuous (Gaussian, uniform disk, point mass). For a
//! measure such as the smallest enclosing ball radius or the bounding box
//! perimeter, the crate computes
//!
//! * Monte Carlo ε-quantizations of the measure's distribution,
//! * exact distributions over indecisive inputs for LP-type measures,
//! * shape-inclusion probability fields and their isolines,
//! * lattice discretizations that turn continuous inputs into indecisive
//!   ones.
//!
//! ```
//! use uqgeom::{build_quantization, IndecisivePointSet, Location, MeasureId, SampleBudget, UncertainSet};
//!
//! let set = IndecisivePointSet::uniform(vec![
//!     vec![Location::new2(0.0, 0.0), Location::new2(1.0, 0.0)],
//!     vec![Location::new2(0.0, 1.0), Location::new2(1.0, 1.0)],
//! ])
//! .unwrap();
//! let budget = SampleBudget::new(0.1, 0.05, 1.0).unwrap();
//! let q = build_quantization(&UncertainSet::from(set), &MeasureId::Diameter, &budget, 7).unwrap();
//! assert!(q.eval_cdf(2f64.sqrt()) == 1.0);
//! ```

pub mod discretize;
pub mod error;
pub mod exact;
pub mod geom;
pub mod harness;
pub mod measures;
pub mod model;
pub mod montecarlo;
pub mod quantize;
pub mod rng;

pub use discretize::{
    discretize_for_measure, discretize_for_measure_with, lattice_eps_sample, range_membership, wedge_decompose_seb2,
    DiscretizeOptions, LatticeSample, RangeFamily, Wedge,
};
pub use error::{Error, Result};
pub use exact::{
    basis_support_probability, brute_force_distribution, deterministic_sip, enumerate_potential_bases,
    exact_distribution, exact_distribution_with, BasisRecord, ExactDistribution, ExactOptions,
};
pub use geom::{Ball, Location, Shape};
pub use harness::{
    extract_isolines, fit_sample_constant, isolines_to_svg, rasterize_sip, run_deviation_experiment, Bounds,
    ExperimentConfig, Isoline, Raster, SipField, WeightedShapes,
};
pub use measures::{check_lp_axioms, evaluate, find_basis, Basis, Direction, MeasureId, REL_TOL};
pub use model::{load_point_set, save_point_set};
pub use model::{
    ContinuousUncertainPoint, ContinuousUncertainSet, Gaussian, IndecisivePoint, IndecisivePointSet, Support,
    UncertainSet,
};
pub use montecarlo::{
    alpha_kernel, build_eda_kernel, build_kvariate_quantization, build_quantization, build_random_sip, EdaKernel,
    SampleBudget,
};
pub use quantize::{max_deviation, simplify, EpsAlphaQuantization, Quantization1D, QuantizationKD, Weights};

// Guide chapters, so their snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/quantize.md")]
    mod quantize {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/sip.md")]
    mod sip {}
    #[doc = include_str!("../../../book/src/discretize.md")]
    mod discretize {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    mod experiment {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
