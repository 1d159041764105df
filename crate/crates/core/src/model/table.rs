use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Pcf,
    K,
    L,
    G,
    F,
    Intensity,
    /// Density of the mark of a typical retained point.
    #[serde(rename = "mark-pdf")]
    MarkPdf,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Pcf => "pcf",
            Statistic::K => "K",
            Statistic::L => "L",
            Statistic::G => "G",
            Statistic::F => "F",
            Statistic::Intensity => "intensity",
            Statistic::MarkPdf => "mark-pdf",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "pcf" | "g_pair" => Statistic::Pcf,
            "k" => Statistic::K,
            "l" => Statistic::L,
            "g" => Statistic::G,
            "f" => Statistic::F,
            "intensity" => Statistic::Intensity,
            "mark-pdf" | "radius-pdf" | "markpdf" => Statistic::MarkPdf,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analytic,
    Empirical,
    SimulatedEnvelope,
}

/// A function tabulated on an increasing grid. `NaN` marks grid points
/// where the estimator is undefined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub statistic: Statistic,
    pub provenance: Provenance,
    pub r: Vec<f64>,
    pub values: Vec<f64>,
}

impl SummaryTable {
    pub fn new(statistic: Statistic, provenance: Provenance, r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.len() != values.len() {
            return Err(Error::invalid("values", "grid and values differ in length"));
        }
        if r.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("r", "grid must be strictly increasing"));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::invalid("values", "values must be finite or NaN"));
        }
        Ok(Self {
            statistic,
            provenance,
            r,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn defined(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| !v.is_nan())
            .map(|(&r, &v)| (r, v))
    }

    /// Pointwise mean of tables on a common grid (NaN where any input is NaN).
    pub fn mean(tables: &[SummaryTable]) -> Result<SummaryTable> {
        let first = tables
            .first()
            .ok_or_else(|| Error::invalid("tables", "nothing to average"))?;
        let n = tables.len() as f64;
        let mut values = vec![0.0; first.len()];
        for t in tables {
            if t.r != first.r {
                return Err(Error::invalid("tables", "grids differ"));
            }
            for (acc, v) in values.iter_mut().zip(&t.values) {
                *acc += v / n;
            }
        }
        Ok(SummaryTable {
            statistic: first.statistic,
            provenance: Provenance::SimulatedEnvelope,
            r: first.r.clone(),
            values,
        })
    }
}

/// `n` equally spaced points on `[0, r_max]`.
pub fn uniform_grid(r_max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n).map(|k| r_max * k as f64 / (n - 1) as f64).collect()
}

/// `n` equally spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Trapezoid rule over consecutive defined values.
pub fn trapezoid(r: &[f64], y: &[f64]) -> f64 {
    r.windows(2)
        .zip(y.windows(2))
        .filter(|(_, v)| !v[0].is_nan() && !v[1].is_nan())
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}
