//! Domain types shared by every module.

pub mod interaction;
pub mod marks;
pub mod pattern;
pub mod spec;
pub mod table;
pub mod window;

pub use interaction::{registry_make, Family, InteractionDoc, InteractionFunction};
pub use marks::{MarkDistribution, MarkKind, MarkNode, WeightDistribution, WeightLaw};
pub use pattern::PointPattern;
pub use spec::{ModelSpec, ModelSpecDoc, Variant};
pub use table::{Provenance, Statistic, SummaryTable};
pub use window::{Point, Window};
