//! Monte-Carlo deviation tests.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, AnalyticOptions};
use crate::error::{Error, Result};
use crate::estimate::{self, estimate_mark_pdf, Bandwidth, EdgeCorrection, EstimatorConfig};
use crate::model::table::{linspace, trapezoid, uniform_grid};
use crate::model::{ModelSpec, PointPattern, Statistic};
use crate::par::Exec;
use crate::simulate::{map_replicates, SimConfig};

/// Where the reference curve comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Reference {
    /// Analytic for pcf, K, L and intensity; simulated mean otherwise.
    #[default]
    Auto,
    Analytic,
    SimulatedMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationTestSpec {
    pub statistic: Statistic,
    #[serde(default = "default_k")]
    pub k: usize,
    pub r_max: f64,
    pub seed: u64,
    #[serde(default)]
    pub reference: Reference,
    #[serde(default = "default_points")]
    pub n_points: usize,
    /// Kernel half-width for pcf and mark density. The automatic value is
    /// resolved once on the data and reused for every simulation.
    #[serde(default)]
    pub bandwidth: Bandwidth,
    #[serde(default)]
    pub edge_correction: EdgeCorrection,
    #[serde(default = "default_exec")]
    pub exec: Exec,
}

fn default_k() -> usize {
    99
}

fn default_points() -> usize {
    128
}

fn default_exec() -> Exec {
    Exec::default()
}

impl DeviationTestSpec {
    pub fn new(statistic: Statistic, r_max: f64, seed: u64) -> Self {
        Self {
            statistic,
            k: default_k(),
            r_max,
            seed,
            reference: Reference::Auto,
            n_points: default_points(),
            bandwidth: Bandwidth::Auto,
            edge_correction: EdgeCorrection::Translation,
            exec: Exec::default(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_reference(mut self, r: Reference) -> Self {
        self.reference = r;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub statistic: Statistic,
    pub p_value: f64,
    pub delta_obs: f64,
    pub deltas: Vec<f64>,
    /// `#{i : Δ_i ≥ Δ_obs}`.
    pub exceedances: usize,
    pub reference: Reference,
    pub r: Vec<f64>,
    pub observed: Vec<f64>,
    pub reference_curve: Vec<f64>,
    pub spec: DeviationTestSpec,
}

fn analytic_ok(stat: Statistic) -> bool {
    matches!(stat, Statistic::Pcf | Statistic::K | Statistic::L | Statistic::Intensity)
}

/// Ranks the deviation of `data` from `model` among `k` simulations of the
/// model on the data window.
pub fn deviation_test(data: &PointPattern, model: &ModelSpec, spec: &DeviationTestSpec) -> Result<DeviationReport> {
    if spec.k < 19 {
        return Err(Error::invalid("k", format!("need at least 19 simulations (got {})", spec.k)));
    }
    if data.dim() != model.dim() {
        return Err(Error::invalid("pattern", "dimension differs from the model"));
    }
    let reference = match spec.reference {
        Reference::Auto if analytic_ok(spec.statistic) => Reference::Analytic,
        Reference::Auto => Reference::SimulatedMean,
        Reference::Analytic if !analytic_ok(spec.statistic) => {
            return Err(Error::invalid(
                "reference",
                format!("no analytic form for `{}`", spec.statistic.name()),
            ))
        }
        r => r,
    };

    let curve = curve_fn(data, model, spec)?;
    let (r, observed) = curve(data)?;

    let sims: Vec<Vec<f64>> = map_replicates(
        model,
        data.window(),
        &SimConfig::new(spec.seed),
        spec.k,
        spec.exec,
        |_, p| curve(&p).map(|(_, v)| v),
    )?
    .into_iter()
    .collect::<Result<_>>()?;

    let reference_curve = match reference {
        Reference::Analytic => analytic_curve(model, spec.statistic, &r)?,
        _ => {
            // the data curve is part of the mean so that all k+1 deviations are exchangeable
            let n = (sims.len() + 1) as f64;
            (0..r.len())
                .map(|i| (observed[i] + sims.iter().map(|s| s[i]).sum::<f64>()) / n)
                .collect()
        }
    };
    let dev = |v: &[f64]| {
        let sq: Vec<f64> = v.iter().zip(&reference_curve).map(|(a, b)| (a - b).powi(2)).collect();
        trapezoid(&r, &sq)
    };
    let delta_obs = dev(&observed);
    let deltas: Vec<f64> = sims.iter().map(|s| dev(s)).collect();
    let exceedances = deltas.iter().filter(|&&d| d >= delta_obs).count();
    Ok(DeviationReport {
        statistic: spec.statistic,
        p_value: (1 + exceedances) as f64 / (spec.k + 1) as f64,
        delta_obs,
        deltas,
        exceedances,
        reference,
        r,
        observed,
        reference_curve,
        spec: *spec,
    })
}

fn analytic_curve(model: &ModelSpec, stat: Statistic, r: &[f64]) -> Result<Vec<f64>> {
    let opts = AnalyticOptions {
        exec: Exec::default(),
        ..AnalyticOptions::default()
    };
    Ok(analytic::summary_table(model, stat, r, &opts)?.values)
}

type Curve<'a> = Box<dyn Fn(&PointPattern) -> Result<(Vec<f64>, Vec<f64>)> + Sync + Send + 'a>;

/// The summary curve, with every tuning choice fixed from the data.
fn curve_fn<'a>(data: &PointPattern, model: &ModelSpec, spec: &'a DeviationTestSpec) -> Result<Curve<'a>> {
    if spec.statistic == Statistic::MarkPdf {
        let marks = data
            .marks()
            .ok_or_else(|| Error::invalid("pattern.marks", "mark density needs a marked pattern"))?;
        let (lo, hi) = match model.mu() {
            Some(mu) => mu.support(),
            None => return Err(Error::invalid("model.mu", "mark density needs a marked model")),
        };
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        let h = match spec.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Auto => silverman(marks).unwrap_or(0.05 * (hi - lo)),
        };
        let n = spec.n_points;
        return Ok(Box::new(move |p: &PointPattern| {
            if p.is_empty() {
                let r = linspace(lo, hi, n);
                let z = vec![0.0; n];
                return Ok((r, z));
            }
            let t = estimate_mark_pdf(p, lo, hi, n, h)?;
            Ok((t.r, t.values))
        }));
    }
    let mut cfg = EstimatorConfig::new(spec.r_max, spec.n_points).with_edge_correction(spec.edge_correction);
    cfg.validate(data.window())?;
    if matches!(spec.statistic, Statistic::Pcf) {
        let h = cfg.bandwidth_for(data)?;
        cfg = cfg.with_bandwidth(match spec.bandwidth {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Auto => h,
        });
    }
    let stat = spec.statistic;
    // L and K of a pattern with fewer than two points are taken as 0
    Ok(Box::new(move |p: &PointPattern| {
        if p.len() < 2 && matches!(stat, Statistic::K | Statistic::L | Statistic::Pcf) {
            let r = uniform_grid(cfg.r_max, cfg.n_points);
            let z = vec![0.0; r.len()];
            return Ok((r, z));
        }
        let t = estimate::estimate(p, stat, &cfg)?;
        Ok((t.r, t.values))
    }))
}

fn silverman(x: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if n < 2.0 {
        return None;
    }
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    (sd > 0.0).then(|| 1.06 * sd * n.powf(-0.2))
}
