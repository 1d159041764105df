//! Fitting and testing thinned models against data.

pub mod devtest;
pub mod fit;
mod nelder_mead;
pub mod roots;

use serde::{Deserialize, Serialize};

use crate::analytic::{AnalyticOptions, ThinningKernels};
use crate::error::{Error, Result};
use crate::model::table::{linspace, Provenance, Statistic, SummaryTable};
use crate::model::ModelSpec;

pub use devtest::{deviation_test, DeviationReport, DeviationTestSpec, Reference};
pub use fit::{fit_min_contrast, Constraint, ContrastDomain, FitProblem, FitResult, FreeParam};
pub use nelder_mead::{nelder_mead, Minimum, NelderMeadOptions};
pub use roots::{solve_lambda_constraint, IntensityMap, LambdaRoots};

/// Law of the mark of a typical retained point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RetainedMarks {
    Discrete { values: Vec<f64>, probs: Vec<f64> },
    Density(SummaryTable),
}

/// `p(m) ∝ (retention of a point with mark m) · μ(dm)` on `n` grid points
/// over the mark support.
pub fn radius_pdf_after_thinning(spec: &ModelSpec, n: usize) -> Result<RetainedMarks> {
    let mu = spec
        .mu()
        .ok_or_else(|| Error::invalid("mu", "retained mark law needs a marked model"))?;
    let opts = AnalyticOptions::default();
    let k = ThinningKernels::new(spec, &opts);
    let nodes = mu.quadrature();
    let ret: Vec<f64> = nodes.iter().map(|x| k.retention(x.value)).collect::<Result<_>>()?;
    let mass: f64 = nodes.iter().map(|x| x.weight).sum();
    let z = nodes.iter().zip(&ret).map(|(x, r)| x.weight * r).sum::<f64>() / mass;
    if !(z > 0.0) {
        return Err(Error::Numeric("no point survives thinning".into()));
    }
    if mu.is_atomic() {
        return Ok(RetainedMarks::Discrete {
            values: nodes.iter().map(|x| x.value).collect(),
            probs: nodes.iter().zip(&ret).map(|(x, r)| x.weight / mass * r / z).collect(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("n", "need at least 2 grid points"));
    }
    let (lo, hi) = mu.support();
    let grid = linspace(lo, hi, n);
    let values = grid
        .iter()
        .map(|&m| Ok(k.retention(m)? * mu.pdf(m) / z))
        .collect::<Result<Vec<f64>>>()?;
    Ok(RetainedMarks::Density(SummaryTable::new(
        Statistic::MarkPdf,
        Provenance::Analytic,
        grid,
        values,
    )?))
}
