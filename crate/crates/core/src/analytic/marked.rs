//! Mark and weight integrals for the marked MatI and the MatII models.

use crate::error::{Error, Result};
use crate::model::marks::MarkNode;
use crate::model::{InteractionFunction, ModelSpec, Variant, WeightDistribution, WeightLaw};
use crate::numeric::special::{exprel, unit_sphere_area};
use crate::numeric::{gauss_legendre, integrate, Map, QuadOptions};

use super::conv::{convolve, Profile};
use super::weights::weight_integral;
use super::{tail_integral, AnalyticOptions, WeightPath};

fn normalized(mut nodes: Vec<MarkNode>) -> Vec<MarkNode> {
    let total: f64 = nodes.iter().map(|n| n.weight).sum();
    for n in &mut nodes {
        n.weight /= total;
    }
    nodes
}

const SINGLE: MarkNode = MarkNode {
    value: 0.0,
    weight: 1.0,
};

/// `w ↦ Σ c_l F_{ν_l}(w)` with the mark scales resolved once.
struct CdfSum {
    law: WeightLaw,
    terms: Vec<(f64, f64)>,
}

impl CdfSum {
    fn new(nu: &WeightDistribution, terms: impl Iterator<Item = (f64, f64)>) -> Self {
        Self {
            law: nu.law(),
            terms: terms.filter(|t| t.1 != 0.0).map(|(l, c)| (1.0 / nu.scale(l), c)).collect(),
        }
    }

    fn eval(&self, w: f64) -> f64 {
        self.terms.iter().map(|(inv, c)| c * self.law.cdf(w * inv)).sum()
    }
}

/// Retention kernels of a marked model: `q_m`, `q_{m,n}(r)`, and for MatII
/// their weight-dependent versions.
pub struct ThinningKernels<'a> {
    spec: &'a ModelSpec,
    f: &'a InteractionFunction,
    nu: Option<&'a WeightDistribution>,
    lam: f64,
    area: f64,
    /// Marks carry no information (unmarked `f`, mark-free weights).
    collapsed: bool,
    rule: Vec<MarkNode>,
    opts: AnalyticOptions,
}

impl<'a> ThinningKernels<'a> {
    pub fn new(spec: &'a ModelSpec, opts: &AnalyticOptions) -> Self {
        let f = spec.f();
        let nu = spec.nu();
        let collapsed = spec.mu().is_none() || (!f.is_marked() && nu.is_none_or(|n| n.is_mark_independent()));
        let rule = match spec.mu() {
            Some(mu) if !collapsed => normalized(mu.quadrature().to_vec()),
            Some(mu) if mu.is_atomic() && mu.quadrature().len() == 1 => mu.quadrature().to_vec(),
            _ => vec![SINGLE],
        };
        Self {
            spec,
            f,
            nu,
            lam: spec.lambda(),
            area: unit_sphere_area(spec.dim()),
            collapsed,
            rule,
            opts: *opts,
        }
    }

    /// Quadrature of the mark law used for outer and inner mark integrals.
    pub fn mark_rule(&self) -> &[MarkNode] {
        &self.rule
    }

    fn split_rule(&self, brk: f64) -> Vec<MarkNode> {
        match self.spec.mu() {
            Some(mu) if !self.collapsed && self.f.has_mark_sum_edge() && !mu.is_atomic() => {
                normalized(mu.quadrature_split(&[brk]))
            }
            _ => self.rule.clone(),
        }
    }

    /// `∫ f(‖x‖, m, l) dx` for each mark node `l`.
    pub fn volume_row(&self, m: f64) -> Result<Vec<f64>> {
        self.rule
            .iter()
            .map(|l| Ok(self.area * tail_integral(self.f, m, l.value)?))
            .collect()
    }

    /// `log q_m = −λ ∫∫ f(‖x‖, m, l) dx μ(dl)`.
    pub fn log_q(&self, m: f64) -> Result<f64> {
        let row = self.volume_row(m)?;
        Ok(-self.lam * self.rule.iter().zip(&row).map(|(l, v)| l.weight * v).sum::<f64>())
    }

    pub fn q(&self, m: f64) -> Result<f64> {
        Ok(self.log_q(m)?.exp())
    }

    /// `w ↦ log q_m(w) = −λ ∫ F_{ν_l}(w) ∫ f(‖x‖, m, l) dx μ(dl)` from a precomputed row.
    fn weighted_row(&self, row: &[f64]) -> CdfSum {
        let nu = self.nu.expect("weights present");
        CdfSum::new(nu, self.rule.iter().zip(row).map(|(l, v)| (l.value, -self.lam * l.weight * v)))
    }

    /// `(l, weight, [f(·,m,l) ⊙ f(·,n,l)](r))` over the mark nodes.
    pub fn pair_row(&self, m: f64, n: f64, r: f64) -> Result<Vec<(f64, f64, f64)>> {
        let (c1, c2) = (self.f.max_cutoff(m.max(0.0)), self.f.max_cutoff(n.max(0.0)));
        if !c1.is_finite() || !c2.is_finite() {
            return Err(Error::Divergent(format!("`{}` is not integrable", self.f.id())));
        }
        let nodes = self.split_rule(0.5 * (r - m - n));
        Ok(nodes
            .iter()
            .map(|l| {
                let c = convolve(
                    Profile::new(self.f, m, l.value),
                    Profile::new(self.f, n, l.value),
                    r,
                    self.opts.conv.nodes,
                    self.opts.conv.method,
                );
                (l.value, l.weight, c)
            })
            .collect())
    }

    /// `log q_{m,n}(r) = λ ∫ [f(·,m,l) ⊙ f(·,n,l)](r) μ(dl)`.
    pub fn log_q_pair(&self, m: f64, n: f64, r: f64) -> Result<f64> {
        Ok(self.lam * self.pair_row(m, n, r)?.iter().map(|(_, w, c)| w * c).sum::<f64>())
    }

    fn closed_weights(&self) -> bool {
        self.opts.weight_path == WeightPath::Auto && self.nu.is_some_and(|n| n.is_mark_independent())
    }

    /// `∫ q_m(w) ν_m(dw)` for MatII, `q_m` for MatI.
    pub fn retention(&self, m: f64) -> Result<f64> {
        if self.spec.variant() != Variant::MatII {
            return self.q(m);
        }
        if self.closed_weights() {
            return Ok(exprel(self.log_q(m)?));
        }
        let nu = self.nu.expect("MatII has weights");
        let log_q = self.weighted_row(&self.volume_row(m)?);
        let res = integrate(
            |u| log_q.eval(nu.quantile(u, m)).exp(),
            0.0,
            1.0,
            &[],
            QuadOptions {
                rel_tol: 1e-11,
                ..QuadOptions::default()
            },
        );
        Ok(res.value)
    }

    /// `I_r(m, n) = ∫∫ q_m(w) q_n(t) q_{m,n}(w,t,r) ν_m(dw) ν_n(dt)`.
    pub fn weight_integral(&self, m: f64, n: f64, r: f64) -> Result<f64> {
        if self.closed_weights() {
            return Ok(weight_integral(self.log_q(m)?, self.log_q(n)?, self.log_q_pair(m, n, r)?));
        }
        let nu = self.nu.ok_or_else(|| Error::invalid("nu", "weight integral needs a weight law"))?;
        let log_q_m = self.weighted_row(&self.volume_row(m)?);
        let log_q_n = self.weighted_row(&self.volume_row(n)?);
        let pair = self.pair_row(m, n, r)?;
        let log_pair = CdfSum::new(nu, pair.iter().map(|(l, wt, c)| (*l, self.lam * wt * c)));
        let rule = gauss_legendre(self.opts.weight_nodes);
        let total = rule.integrate(0.0, 1.0, Map::Cosine, |u| {
            let w = nu.quantile(u, m);
            let a = log_q_m.eval(w);
            // the minimum switches where the two weights coincide
            let v_star = nu.cdf(w, n).clamp(0.0, 1.0);
            let edges = crate::numeric::partition(0.0, 1.0, [v_star]);
            rule.integrate_pieces(&edges, Map::Cosine, |v| {
                let t = nu.quantile(v, n);
                (a + log_q_n.eval(t) + log_pair.eval(w.min(t))).exp()
            })
        });
        Ok(total)
    }
}

/// `λ p0 ∫ retention(m) μ(dm)`.
pub(super) fn intensity(spec: &ModelSpec, opts: &AnalyticOptions) -> Result<f64> {
    let k = ThinningKernels::new(spec, opts);
    let mut s = 0.0;
    for m in k.mark_rule() {
        s += m.weight * k.retention(m.value)?;
    }
    Ok(spec.lambda() * spec.p0() * s)
}

/// Pair correlation of the marked MatI or the MatII model at `r`.
pub(super) fn pcf(spec: &ModelSpec, r: f64, opts: &AnalyticOptions) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid("r", format!("must be ≥ 0 (got {r})")));
    }
    let k = ThinningKernels::new(spec, opts);
    let f = spec.f();
    let mat2 = spec.variant() == Variant::MatII;
    let outer = k.mark_rule().to_vec();
    let mut den = 0.0;
    let mut ret = Vec::with_capacity(outer.len());
    for m in &outer {
        let q = k.retention(m.value)?;
        ret.push(q);
        den += m.weight * q;
    }
    if !(den > 0.0) {
        return Err(Error::Numeric("thinned intensity is 0; the pcf is undefined".into()));
    }
    let mut num = 0.0;
    for (m, q_m) in outer.iter().zip(&ret) {
        let inner = k.split_rule(r - m.value);
        let mut acc = 0.0;
        for n in &inner {
            let keep = 1.0 - f.eval(r, m.value, n.value);
            if keep <= 0.0 {
                continue;
            }
            acc += n.weight
                * if mat2 {
                    keep * k.weight_integral(m.value, n.value, r)?
                } else {
                    keep * keep * k.q(n.value)? * k.log_q_pair(m.value, n.value, r)?.exp()
                };
        }
        num += m.weight * if mat2 { acc } else { q_m * acc };
    }
    Ok(num / (den * den))
}
