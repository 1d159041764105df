//! Inverting the map `λ ↦ λ_th(λ)` at an observed intensity.

use serde::{Deserialize, Serialize};

use crate::analytic::{self, ThinningKernels};
use crate::error::{Error, Result};
use crate::model::{ModelSpec, Variant};
use crate::numeric::gauss::{gauss_legendre, Map};
use crate::numeric::partition;
use crate::numeric::special::exprel;

const WEIGHT_NODES: usize = 32;

/// `λ_th` as a function of the base intensity with everything else fixed.
#[derive(Debug, Clone)]
pub enum IntensityMap {
    /// `λ p0 Σ ω_k e^{−λ P_k}` (MatI, and MatII with weights tied to marks).
    Exponential { p0: f64, terms: Vec<(f64, f64)> },
    /// `p0 Σ ω_k (1 − e^{−λ C_k}) / C_k` (MatII with mark-free weights).
    Saturating { p0: f64, terms: Vec<(f64, f64)> },
}

impl IntensityMap {
    pub fn new(spec: &ModelSpec) -> Result<Self> {
        let opts = analytic::AnalyticOptions::default();
        let k = ThinningKernels::new(spec, &opts);
        let lam = spec.lambda();
        let rule = k.mark_rule();
        let mark_free_weights = spec.nu().is_none_or(|n| n.is_mark_independent());
        if spec.variant() == Variant::MatII && !mark_free_weights {
            // λ_th = λ p0 Σ_m ω_m ∫ exp(−λ A_m(u)) du with A_m free of λ
            let nu = spec.nu().expect("MatII has weights");
            let gl = gauss_legendre(WEIGHT_NODES);
            let mut terms = Vec::new();
            for m in rule {
                let row = k.volume_row(m.value)?;
                let mut edges: Vec<f64> = rule
                    .iter()
                    .map(|l| nu.cdf(nu.quantile(1.0, l.value), m.value))
                    .filter(|b| b.is_finite())
                    .collect();
                edges.extend([0.0, 1.0]);
                let edges = partition(0.0, 1.0, edges);
                for e in edges.windows(2) {
                    for (u, wu) in gl.mapped(e[0], e[1], Map::Linear) {
                        let w = nu.quantile(u, m.value);
                        let a: f64 = rule
                            .iter()
                            .zip(&row)
                            .map(|(l, v)| l.weight * nu.cdf(w, l.value) * v)
                            .sum();
                        terms.push((m.weight * wu, a));
                    }
                }
            }
            return Ok(IntensityMap::Exponential { p0: spec.p0(), terms });
        }
        let mut terms = Vec::with_capacity(rule.len());
        for m in rule {
            // log q_m is linear in λ
            terms.push((m.weight, -k.log_q(m.value)? / lam));
        }
        Ok(match spec.variant() {
            Variant::MatII => IntensityMap::Saturating { p0: spec.p0(), terms },
            _ => IntensityMap::Exponential { p0: spec.p0(), terms },
        })
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        Ok(match self {
            IntensityMap::Exponential { p0, terms } => {
                lambda * p0 * terms.iter().map(|(w, p)| w * (-lambda * p).exp()).sum::<f64>()
            }
            IntensityMap::Saturating { p0, terms } => {
                lambda * p0 * terms.iter().map(|(w, c)| w * exprel(-lambda * c)).sum::<f64>()
            }
        })
    }

    /// Scale beyond which the exponential factors have decayed.
    fn scale(&self) -> f64 {
        let (IntensityMap::Exponential { terms, .. } | IntensityMap::Saturating { terms, .. }) = self;
        terms
            .iter()
            .filter(|(w, p)| *w > 0.0 && *p > 0.0)
            .map(|(_, p)| 1.0 / p)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaRoots {
    /// All solutions, ascending.
    pub roots: Vec<f64>,
    /// Largest value of `λ_th` seen on the search range.
    pub supremum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

const SCAN_POINTS: usize = 600;

/// All `λ` in `(0, lambda_max]` with `λ_th(λ) = target`, where the other
/// parameters are those of `spec`. `lambda_max` defaults to a range that
/// covers every root of the map.
pub fn solve_lambda_constraint(spec: &ModelSpec, target: f64, lambda_max: Option<f64>) -> Result<LambdaRoots> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::invalid("target", format!("must be finite and > 0 (got {target})")));
    }
    match IntensityMap::new(spec) {
        Ok(map) => solve_map(&map, spec.p0(), target, lambda_max),
        Err(e @ Error::Divergent(_)) => Ok(LambdaRoots {
            roots: Vec::new(),
            supremum: 0.0,
            diagnostic: Some(format!("{e}; the thinned intensity is 0 for every λ")),
        }),
        Err(e) => Err(e),
    }
}

pub(crate) fn solve_map(map: &IntensityMap, p0: f64, target: f64, lambda_max: Option<f64>) -> Result<LambdaRoots> {
    // λ_th ≤ λ p0, so every root lies above target / p0
    let lo = 0.5 * target / p0;
    let hi = lambda_max.unwrap_or_else(|| lo.max(map.scale()) * 1e3).max(2.0 * lo);
    let g = |l: f64| map.eval(l).map(|v| v - target);
    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let xs: Vec<f64> = (0..SCAN_POINTS).map(|k| lo * ratio.powi(k as i32)).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| g(x)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    let mut sup = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + target;
    for k in 0..SCAN_POINTS - 1 {
        let (a, b) = (xs[k], xs[k + 1]);
        let (fa, fb) = (ys[k], ys[k + 1]);
        if fa == 0.0 {
            roots.push(a);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            roots.push(bisect(&g, a, b, fa)?);
        } else if fa < 0.0 && fb < 0.0 && k + 2 < SCAN_POINTS && ys[k + 1] >= fa && ys[k + 1] >= ys[k + 2] {
            // a local maximum below the target may still cross it between grid points
            let (xm, fm) = golden_max(&g, a, xs[k + 2])?;
            sup = sup.max(fm + target);
            if fm > 0.0 {
                roots.push(bisect(&g, a, xm, fa)?);
                roots.push(bisect(&g, xm, xs[k + 2], fm)?);
            }
        }
    }
    if ys[SCAN_POINTS - 1] == 0.0 {
        roots.push(xs[SCAN_POINTS - 1]);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let diagnostic = roots.is_empty().then(|| {
        format!("target intensity {target} exceeds the largest attainable thinned intensity {sup}")
    });
    Ok(LambdaRoots {
        roots,
        supremum: sup,
        diagnostic,
    })
}

fn bisect(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= 1e-15 * m {
            break;
        }
        let fm = g(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

fn golden_max(g: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    for _ in 0..200 {
        if b - a <= 1e-14 * b {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = g(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}
