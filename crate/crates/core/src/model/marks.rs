//! Mark and weight distributions.
//!
//! Continuous mark laws carry a Gauss–Legendre representation on their
//! (possibly truncated) support so mark integrals are deterministic.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma as GammaSampler};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Gamma};

use crate::error::{Checker, Error, Result};
use crate::numeric::{gauss_legendre, partition, Map};

pub const DEFAULT_MARK_NODES: usize = 64;
/// Upper quantile used as truncation point when none is given.
pub const DEFAULT_TRUNCATION_QUANTILE: f64 = 0.9999;
/// Mass neglected when an untruncated gamma law is integrated numerically.
const GAMMA_TAIL_MASS: f64 = 1e-12;

/// Parameterised mark law. Gamma laws use (shape, scale).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MarkKind {
    PointMass {
        value: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gamma {
        shape: f64,
        scale: f64,
    },
    TruncatedGamma {
        shape: f64,
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<f64>,
    },
    FiniteDiscrete {
        values: Vec<f64>,
        probs: Vec<f64>,
    },
}

/// One quadrature node of a mark law: `sum weight * g(value) ≈ E g(M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkNode {
    pub value: f64,
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct MarkDistribution {
    kind: MarkKind,
    nodes: usize,
    support: (f64, f64),
    /// Mass of the untruncated law on `support` (1 for everything but gamma).
    mass: f64,
    gamma: Option<Gamma>,
    quad: Vec<MarkNode>,
}

impl PartialEq for MarkDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.nodes == other.nodes
    }
}

impl MarkDistribution {
    pub fn new(kind: MarkKind, nodes: usize) -> Result<Self> {
        let mut c = Checker::new();
        c.check(nodes >= 8, "nodes", format!("need at least 8 quadrature nodes (got {nodes})"));
        let pos = |x: f64| x.is_finite() && x > 0.0;
        match &kind {
            MarkKind::PointMass { value } => c.check(value.is_finite(), "value", "must be finite"),
            MarkKind::Uniform { lo, hi } => c.check(
                lo.is_finite() && hi.is_finite() && hi > lo,
                "hi",
                "uniform law needs finite lo < hi",
            ),
            MarkKind::Gamma { shape, scale } => {
                c.check(pos(*shape), "shape", "must be > 0");
                c.check(pos(*scale), "scale", "must be > 0");
            }
            MarkKind::TruncatedGamma { shape, scale, cap } => {
                c.check(pos(*shape), "shape", "must be > 0");
                c.check(pos(*scale), "scale", "must be > 0");
                if let Some(cap) = cap {
                    c.check(pos(*cap), "cap", "must be > 0");
                }
            }
            MarkKind::FiniteDiscrete { values, probs } => {
                c.check(!values.is_empty(), "values", "must be non-empty");
                c.check(values.len() == probs.len(), "probs", "must match values in length");
                c.check(values.iter().all(|v| v.is_finite()), "values", "must be finite");
                c.check(probs.iter().all(|p| p.is_finite() && *p >= 0.0), "probs", "must be >= 0");
                let s: f64 = probs.iter().sum();
                c.check((s - 1.0).abs() <= 1e-12, "probs", format!("must sum to 1 (sum = {s})"));
            }
        }
        c.finish()?;

        let mut kind = kind;
        let gamma = match &kind {
            MarkKind::Gamma { shape, scale } | MarkKind::TruncatedGamma { shape, scale, .. } => Some(
                Gamma::new(*shape, 1.0 / scale).map_err(|e| Error::invalid("shape", e.to_string()))?,
            ),
            _ => None,
        };
        if let (MarkKind::TruncatedGamma { cap, .. }, Some(g)) = (&mut kind, &gamma) {
            if cap.is_none() {
                *cap = Some(g.inverse_cdf(DEFAULT_TRUNCATION_QUANTILE));
            }
        }
        let (support, mass) = match (&kind, &gamma) {
            (MarkKind::PointMass { value }, _) => ((*value, *value), 1.0),
            (MarkKind::Uniform { lo, hi }, _) => ((*lo, *hi), 1.0),
            (MarkKind::Gamma { .. }, Some(g)) => {
                let hi = g.inverse_cdf(1.0 - GAMMA_TAIL_MASS);
                ((0.0, hi), g.cdf(hi))
            }
            (MarkKind::TruncatedGamma { cap, .. }, Some(g)) => {
                let cap = cap.expect("cap resolved above");
                ((0.0, cap), g.cdf(cap))
            }
            (MarkKind::FiniteDiscrete { values, .. }, _) => {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                ((lo, hi), 1.0)
            }
            _ => unreachable!("gamma handle exists for gamma kinds"),
        };
        if !(mass > 0.0) {
            return Err(Error::invalid("cap", "truncation leaves no probability mass"));
        }
        let mut dist = Self {
            kind,
            nodes,
            support,
            mass,
            gamma,
            quad: Vec::new(),
        };
        dist.quad = dist.quadrature_split(&[]);
        Ok(dist)
    }

    pub fn point_mass(value: f64) -> Result<Self> {
        Self::new(MarkKind::PointMass { value }, DEFAULT_MARK_NODES)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(MarkKind::Uniform { lo, hi }, DEFAULT_MARK_NODES)
    }

    pub fn kind(&self) -> &MarkKind {
        &self.kind
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.kind.clone(), nodes)
    }

    /// Smallest interval carrying the (truncated) law.
    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.kind, MarkKind::PointMass { .. } | MarkKind::FiniteDiscrete { .. })
    }

    /// Quadrature representation on the full support.
    pub fn quadrature(&self) -> &[MarkNode] {
        &self.quad
    }

    /// Quadrature with the support split at `breaks`, one Gauss–Legendre
    /// rule per piece. Atomic laws ignore the breaks.
    pub fn quadrature_split(&self, breaks: &[f64]) -> Vec<MarkNode> {
        match &self.kind {
            MarkKind::PointMass { value } => vec![MarkNode {
                value: *value,
                weight: 1.0,
            }],
            MarkKind::FiniteDiscrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(_, p)| **p > 0.0)
                .map(|(&value, &weight)| MarkNode { value, weight })
                .collect(),
            _ => {
                let rule = gauss_legendre(self.nodes);
                let edges = partition(self.support.0, self.support.1, breaks.iter().copied());
                let mut out = Vec::with_capacity(self.nodes * (edges.len() - 1));
                for e in edges.windows(2) {
                    for (x, w) in rule.mapped(e[0], e[1], Map::Linear) {
                        out.push(MarkNode {
                            value: x,
                            weight: w * self.pdf(x),
                        });
                    }
                }
                out
            }
        }
    }

    /// `|sum of quadrature weights - 1|`.
    pub fn quadrature_mass_error(&self) -> f64 {
        (self.quad.iter().map(|n| n.weight).sum::<f64>() - 1.0).abs()
    }

    /// Density of the (truncated) law; zero for atomic laws.
    pub fn pdf(&self, m: f64) -> f64 {
        if m < self.support.0 || m > self.support.1 {
            return 0.0;
        }
        match &self.kind {
            MarkKind::Uniform { lo, hi } => 1.0 / (hi - lo),
            MarkKind::Gamma { .. } | MarkKind::TruncatedGamma { .. } => {
                self.gamma.as_ref().expect("gamma").pdf(m) / self.mass
            }
            _ => 0.0,
        }
    }

    pub fn cdf(&self, m: f64) -> f64 {
        match &self.kind {
            MarkKind::PointMass { value } => (m >= *value) as u8 as f64,
            MarkKind::Uniform { lo, hi } => ((m - lo) / (hi - lo)).clamp(0.0, 1.0),
            MarkKind::Gamma { .. } | MarkKind::TruncatedGamma { .. } => {
                if m <= 0.0 {
                    0.0
                } else if m >= self.support.1 {
                    1.0
                } else {
                    self.gamma.as_ref().expect("gamma").cdf(m) / self.mass
                }
            }
            MarkKind::FiniteDiscrete { values, probs } => values
                .iter()
                .zip(probs)
                .filter(|(v, _)| **v <= m)
                .map(|(_, p)| p)
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            MarkKind::PointMass { value } => *value,
            MarkKind::Uniform { lo, hi } => 0.5 * (lo + hi),
            MarkKind::Gamma { shape, scale } => shape * scale,
            _ => self.quad.iter().map(|n| n.weight * n.value).sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            MarkKind::PointMass { value } => *value,
            MarkKind::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            MarkKind::Gamma { shape, scale } => GammaSampler::new(*shape, *scale)
                .expect("validated gamma")
                .sample(rng),
            MarkKind::TruncatedGamma { shape, scale, cap } => {
                let cap = cap.expect("resolved cap");
                let g = GammaSampler::new(*shape, *scale).expect("validated gamma");
                loop {
                    let x = g.sample(rng);
                    if x <= cap {
                        break x;
                    }
                }
            }
            MarkKind::FiniteDiscrete { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("non-empty")
            }
        }
    }
}

/// Base law of a weight before any mark scaling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightLaw {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
}

impl WeightLaw {
    pub fn cdf(&self, w: f64) -> f64 {
        match *self {
            WeightLaw::Uniform { lo, hi } => ((w - lo) / (hi - lo)).clamp(0.0, 1.0),
            WeightLaw::Exponential { rate } => {
                if w <= 0.0 {
                    0.0
                } else {
                    -(-rate * w).exp_m1()
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            WeightLaw::Uniform { lo, hi } => lo + (hi - lo) * u,
            WeightLaw::Exponential { rate } => -(-u).ln_1p() / rate,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            WeightLaw::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            WeightLaw::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
        }
    }
}

/// Family of continuous weight laws `nu_m`: the weight of a point with mark
/// `m` is `m^mark_power * V` with `V` drawn from `law`. `mark_power = 0`
/// gives a mark-independent law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightDistribution {
    #[serde(flatten)]
    law: WeightLaw,
    #[serde(skip_serializing_if = "is_zero")]
    mark_power: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Deserialize)]
struct WeightDoc {
    kind: String,
    #[serde(default)]
    lo: Option<f64>,
    #[serde(default)]
    hi: Option<f64>,
    #[serde(default)]
    rate: Option<f64>,
    #[serde(default)]
    mark_power: f64,
}

impl<'de> Deserialize<'de> for WeightDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = WeightDoc::deserialize(d)?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| serde::de::Error::custom(format!("missing field `{name}`")))
        };
        let law = match doc.kind.as_str() {
            "uniform" => WeightLaw::Uniform {
                lo: need(doc.lo, "lo")?,
                hi: need(doc.hi, "hi")?,
            },
            "exponential" => WeightLaw::Exponential {
                rate: need(doc.rate, "rate")?,
            },
            "point-mass" | "finite-discrete" => {
                return Err(serde::de::Error::custom(
                    "weight distribution must be continuous (atoms are not supported)",
                ))
            }
            other => return Err(serde::de::Error::custom(format!("unknown weight law `{other}`"))),
        };
        WeightDistribution::new(law, doc.mark_power).map_err(serde::de::Error::custom)
    }
}

impl WeightDistribution {
    pub fn new(law: WeightLaw, mark_power: f64) -> Result<Self> {
        let mut c = Checker::new();
        match law {
            WeightLaw::Uniform { lo, hi } => {
                c.check(lo.is_finite() && hi.is_finite() && hi > lo, "hi", "uniform law needs lo < hi")
            }
            WeightLaw::Exponential { rate } => c.check(rate.is_finite() && rate > 0.0, "rate", "must be > 0"),
        }
        c.check(mark_power.is_finite(), "mark_power", "must be finite");
        c.finish()?;
        Ok(Self { law, mark_power })
    }

    /// Uniform law on `[0, 1]`, independent of marks.
    pub fn standard_uniform() -> Self {
        Self {
            law: WeightLaw::Uniform { lo: 0.0, hi: 1.0 },
            mark_power: 0.0,
        }
    }

    pub fn law(&self) -> WeightLaw {
        self.law
    }

    pub fn mark_power(&self) -> f64 {
        self.mark_power
    }

    pub fn is_mark_independent(&self) -> bool {
        self.mark_power == 0.0
    }

    /// Factor `m^mark_power` applied to the base law.
    pub fn scale(&self, m: f64) -> f64 {
        if self.mark_power == 0.0 {
            1.0
        } else {
            m.powf(self.mark_power)
        }
    }

    /// `F_{nu_m}(w)`.
    pub fn cdf(&self, w: f64, m: f64) -> f64 {
        self.law.cdf(w / self.scale(m))
    }

    /// Quantile of `nu_m` at level `u`.
    pub fn quantile(&self, u: f64, m: f64) -> f64 {
        self.scale(m) * self.law.quantile(u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: f64, rng: &mut R) -> f64 {
        self.scale(m) * self.law.sample(rng)
    }
}
