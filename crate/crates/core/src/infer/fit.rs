//! Minimum-contrast fitting of the pair correlation function.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::nelder_mead::{nelder_mead, NelderMeadOptions};
use super::roots::solve_lambda_constraint;
use crate::analytic::{self, radial_self_convolution, AnalyticOptions, Profile};
use crate::error::{Error, Result};
use crate::estimate::{default_bandwidth, estimate_intensity, pcf_at};
use crate::model::table::{linspace, trapezoid};
use crate::model::{ModelSpec, PointPattern, Variant};
use crate::rng::stream;

/// A free parameter addressed by its path in the model document
/// (`p0`, `f.a`, `mu.shape`, ...) with finite search bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub path: String,
    pub lower: f64,
    pub upper: f64,
}

impl FreeParam {
    pub fn new(path: impl Into<String>, lower: f64, upper: f64) -> Self {
        Self {
            path: path.into(),
            lower,
            upper,
        }
    }

    /// Unconstrained coordinate to parameter value. Positive ranges are
    /// searched on a log scale.
    fn to_value(&self, t: f64) -> f64 {
        let s = logistic(t);
        if self.lower > 0.0 {
            self.lower * (self.upper / self.lower).powf(s)
        } else {
            self.lower + (self.upper - self.lower) * s
        }
    }

    fn from_unit(&self, u: f64) -> f64 {
        logit(u.clamp(1e-9, 1.0 - 1e-9))
    }
}

fn logistic(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn logit(u: f64) -> f64 {
    (u / (1.0 - u)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    /// `λ` is eliminated by requiring `λ_th = λ̂`.
    #[default]
    IntensityMatch,
    None,
}

/// Everything needed to fit a family to an observed pcf.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub template: ModelSpec,
    pub free: Vec<FreeParam>,
    /// Distances of the contrast grid.
    pub r: Vec<f64>,
    /// Observed pcf on `r`.
    pub observed: Vec<f64>,
    pub lambda_hat: f64,
    pub constraint: Constraint,
    pub restarts: usize,
    pub analytic: AnalyticOptions,
    pub optimizer: NelderMeadOptions,
}

/// Contrast domain and grid used when building a problem from a pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastDomain {
    /// Defaults to the kernel bandwidth.
    pub r_min: Option<f64>,
    /// Defaults to three times the interaction range of the template.
    pub r_max: Option<f64>,
    /// Kernel half-width; defaults to the rule-of-thumb value.
    pub bandwidth: Option<f64>,
    pub grid: usize,
}

impl Default for ContrastDomain {
    fn default() -> Self {
        Self {
            r_min: None,
            r_max: None,
            bandwidth: None,
            grid: 256,
        }
    }
}

impl FitProblem {
    /// A problem against an already tabulated pcf.
    pub fn from_table(
        template: ModelSpec,
        free: Vec<FreeParam>,
        r: Vec<f64>,
        observed: Vec<f64>,
        lambda_hat: f64,
    ) -> Result<Self> {
        let p = Self {
            template,
            free,
            r,
            observed,
            lambda_hat,
            constraint: Constraint::IntensityMatch,
            restarts: 5,
            analytic: AnalyticOptions::default(),
            optimizer: NelderMeadOptions::default(),
        };
        p.validate()?;
        Ok(p)
    }

    /// Estimates `λ̂` and `ĝ` from `pattern` on the contrast domain.
    pub fn from_pattern(
        template: ModelSpec,
        free: Vec<FreeParam>,
        pattern: &PointPattern,
        domain: &ContrastDomain,
    ) -> Result<Self> {
        if pattern.dim() != template.dim() {
            return Err(Error::invalid("pattern", "dimension differs from the model"));
        }
        let lambda_hat = estimate_intensity(pattern);
        let h = match domain.bandwidth {
            Some(h) => h,
            None => default_bandwidth(pattern.dim(), lambda_hat)?,
        };
        let r_min = domain.r_min.unwrap_or(h);
        let r_max = match domain.r_max {
            Some(r) => r,
            None => {
                let range = template.interaction_range();
                if !range.is_finite() {
                    return Err(Error::invalid("r_max", "must be given when the interaction range is unbounded"));
                }
                3.0 * range
            }
        };
        if r_min < h {
            return Err(Error::invalid("r_min", format!("must be at least the bandwidth {h}")));
        }
        let half = 0.5 * pattern.window().min_side();
        if r_max >= half {
            return Err(Error::invalid(
                "r_max",
                format!("r_max = {r_max} must be below half the shortest window side ({half})"),
            ));
        }
        if !(r_max > r_min) || domain.grid < 2 {
            return Err(Error::invalid("r_max", "need r_min < r_max and at least 2 grid points"));
        }
        let r = linspace(r_min, r_max, domain.grid);
        let observed = pcf_at(pattern, &r, h)?;
        Self::from_table(template, free, r, observed, lambda_hat)
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraint = c;
        self
    }

    pub fn with_restarts(mut self, n: usize) -> Self {
        self.restarts = n.max(1);
        self
    }

    pub fn with_analytic(mut self, opts: AnalyticOptions) -> Self {
        self.analytic = opts;
        self
    }

    fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        for (i, p) in self.free.iter().enumerate() {
            if !(p.lower.is_finite() && p.upper.is_finite() && p.lower < p.upper) {
                issues.push(crate::Issue::new(format!("free[{i}]"), "bounds must be finite with lower < upper"));
            }
            if let Err(e) = self.template.param(&p.path) {
                issues.push(crate::Issue::new(format!("free[{i}].path"), e.to_string()));
            }
            if self.constraint == Constraint::IntensityMatch && p.path == "lambda" {
                issues.push(crate::Issue::new(
                    format!("free[{i}]"),
                    "λ is fixed by the intensity constraint",
                ));
            }
        }
        if self.r.len() != self.observed.len() || self.r.len() < 2 {
            issues.push(crate::Issue::new("observed", "need matching r and values, at least 2"));
        }
        if !(self.lambda_hat > 0.0 && self.lambda_hat.is_finite()) {
            issues.push(crate::Issue::new("lambda_hat", "must be finite and > 0"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }

    fn spec_at(&self, values: &[f64]) -> Result<ModelSpec> {
        let mut s = self.template.clone();
        for (p, v) in self.free.iter().zip(values) {
            s = s.set_param(&p.path, *v)?;
        }
        Ok(s)
    }

    /// Trapezoid contrast of `spec` against the observation.
    pub fn contrast(&self, spec: &ModelSpec) -> Result<f64> {
        let g = analytic::pcf_grid(spec, &self.r, &self.analytic)?;
        Ok(self.contrast_of(&g))
    }

    fn contrast_of(&self, g: &[f64]) -> f64 {
        let sq: Vec<f64> = self.observed.iter().zip(g).map(|(o, t)| (o - t).powi(2)).collect();
        trapezoid(&self.r, &sq)
    }

    /// Best contrast over the admissible values of λ at fixed other
    /// parameters, or by how much the target exceeds the reachable intensities.
    fn evaluate(&self, values: &[f64]) -> Result<Eval> {
        let spec = self.spec_at(values)?;
        let lambdas = match self.constraint {
            Constraint::None => vec![spec.lambda()],
            Constraint::IntensityMatch => {
                let roots = solve_lambda_constraint(&spec, self.lambda_hat, None)?;
                if roots.roots.is_empty() {
                    let gap = (self.lambda_hat - roots.supremum).max(0.0) / self.lambda_hat;
                    return Ok(Eval::Infeasible(gap));
                }
                roots.roots
            }
        };
        let candidates: Vec<(f64, ModelSpec)> = if spec.variant() == Variant::MatI {
            // the convolution does not depend on λ
            let f = spec.f();
            let p = Profile::unmarked(f);
            let conv: Vec<(f64, f64)> = self
                .analytic
                .exec
                .map_slice(&self.r, |&r| radial_self_convolution(p, p, r, &self.analytic.conv).map(|c| (f.eval(r, 0.0, 0.0), c)))
                .into_iter()
                .collect::<Result<_>>()?;
            lambdas
                .iter()
                .map(|&l| {
                    let g: Vec<f64> = conv
                        .iter()
                        .map(|&(fr, c)| if fr >= 1.0 { 0.0 } else { (1.0 - fr).powi(2) * (l * c).exp() })
                        .collect();
                    Ok((self.contrast_of(&g), spec.with_lambda(l)?))
                })
                .collect::<Result<_>>()?
        } else {
            lambdas
                .iter()
                .map(|&l| {
                    let s = spec.with_lambda(l)?;
                    Ok((self.contrast(&s)?, s))
                })
                .collect::<Result<_>>()?
        };
        Ok(candidates
            .into_iter()
            .filter(|(d, _)| d.is_finite())
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map_or(Eval::Infeasible(0.0), |(d, s)| Eval::Fit(d, s)))
    }
}

enum Eval {
    Fit(f64, ModelSpec),
    /// Relative shortfall of the largest reachable intensity.
    Infeasible(f64),
}

/// Objective value for infeasible points; larger than any contrast, and
/// decreasing towards the feasible region.
const INFEASIBLE: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub start: Vec<f64>,
    pub params: Vec<f64>,
    pub contrast: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub contrast: f64,
    pub params: BTreeMap<String, f64>,
    pub lambda: f64,
    /// `|λ_th − λ̂| / λ̂` of the returned model.
    pub residual: f64,
    pub converged: bool,
    pub restarts: Vec<RestartRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Latin-hypercube sample of `n` points in `[0,1]^dim`.
fn latin_hypercube(n: usize, dim: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]; n];
    for j in 0..dim {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(rng);
        for (i, s) in strata.into_iter().enumerate() {
            pts[i][j] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    pts
}

/// Minimises the contrast over the free parameters with Nelder–Mead
/// restarted from Latin-hypercube starts.
pub fn fit_min_contrast(problem: &FitProblem, seed: u64) -> Result<FitResult> {
    problem.validate()?;
    let dim = problem.free.len();
    let restarts = if dim == 0 { 1 } else { problem.restarts.max(1) };
    let mut rng = stream(seed, "fit-starts", 0);
    let starts = latin_hypercube(restarts, dim, &mut rng);

    let to_values = |t: &[f64]| -> Vec<f64> { problem.free.iter().zip(t).map(|(p, &x)| p.to_value(x)).collect() };
    let mut records = Vec::with_capacity(restarts);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for u in &starts {
        let t0: Vec<f64> = problem.free.iter().zip(u).map(|(p, &x)| p.from_unit(x)).collect();
        let objective = |t: &[f64]| -> f64 {
            match problem.evaluate(&to_values(t)) {
                Ok(Eval::Fit(d, _)) => d,
                Ok(Eval::Infeasible(gap)) => INFEASIBLE * (1.0 + gap),
                Err(e) => {
                    if matches!(e, Error::Validation(_) | Error::Divergent(_)) {
                        f64::INFINITY
                    } else {
                        f64::NAN
                    }
                }
            }
        };
        let m = nelder_mead(objective, &t0, &problem.optimizer);
        let params = to_values(&m.x);
        records.push(RestartRecord {
            start: to_values(&t0),
            params: params.clone(),
            contrast: if m.value < INFEASIBLE { m.value } else { f64::INFINITY },
            evaluations: m.evaluations,
            converged: m.converged,
        });
        if m.value < INFEASIBLE && best.as_ref().is_none_or(|(v, _)| m.value < *v) {
            best = Some((m.value, params));
        }
    }
    let Some((_, params)) = best else {
        // surface a hard error at the box centre if there is one
        problem.evaluate(&to_values(&vec![0.0; dim]))?;
        return Err(Error::NotConverged(format!(
            "no parameters in the search box admit λ with λ_th = {}",
            problem.lambda_hat
        )));
    };
    let Eval::Fit(contrast, spec) = problem.evaluate(&params)? else {
        return Err(Error::Numeric("best parameters lost their λ root".into()));
    };
    let lambda_th = analytic::intensity(&spec)?.value;
    let residual = match problem.constraint {
        Constraint::IntensityMatch => (lambda_th - problem.lambda_hat).abs() / problem.lambda_hat,
        Constraint::None => f64::NAN,
    };
    let converged = records.iter().any(|r| r.converged && r.contrast <= contrast * (1.0 + 1e-9) + 1e-300);
    let diagnostic = (!converged).then(|| "optimizer did not converge within its budget; best point returned".to_string());
    Ok(FitResult {
        params: problem.free.iter().map(|p| p.path.clone()).zip(params).collect(),
        lambda: spec.lambda(),
        spec,
        contrast,
        residual,
        converged,
        restarts: records,
        diagnostic,
    })
}
