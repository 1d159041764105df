//! Generalized Matérn I/II dependent thinning of Poisson processes.
//!
//! Points of a homogeneous Poisson process delete each other with a
//! distance-dependent probability `f(r)` (optionally depending on marks and,
//! for the Matérn II type, on arrival weights); survivors are then
//! independently retained with probability `p0`. The crate provides
//!
//! * [`simulate`]: seeded simulation of the base process and the three thinning rules,
//! * [`analytic`]: exact intensities and pair correlation functions by quadrature,
//! * [`estimate`]: nonparametric summary statistics with edge corrections,
//! * [`infer`]: minimum-contrast fitting and Monte Carlo deviation tests,
//! * [`io`]: file formats and run manifests.

pub mod analytic;
pub mod error;
pub mod estimate;
pub mod geom;
pub mod infer;
pub mod io;
pub mod model;
pub mod numeric;
pub mod par;
pub mod rng;
pub mod simulate;

pub use error::{Error, Issue, Result};
pub use model::{
    registry_make, InteractionFunction, MarkDistribution, ModelSpec, PointPattern, SummaryTable, Variant,
    WeightDistribution, Window,
};
pub use par::Exec;
