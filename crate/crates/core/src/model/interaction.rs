//! Registry of deletion-probability functions `f(r)` / `f(r, m, n)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Checker, Error, Result};

/// Level below which a smooth tail counts as negligible.
pub const CUTOFF_LEVEL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `f ≡ c`; non-integrable unless `c = 0`.
    Constant { c: f64 },
    /// `1_{[0,R]}`.
    HardCore { radius: f64 },
    /// `f0 * 1_{[0,R]}`.
    Strauss { f0: f64, radius: f64 },
    /// 1 on `[0,a]`, then `exp(-(r²-a²)/(R²-a²))`.
    SoftCore { a: f64, radius: f64 },
    /// `r^a exp(-r²) / Γ(1 + a/2)`.
    Aggregative { a: f64 },
    /// 1 on `[0,R]`, then `exp(-(r-R)²/b) / a`.
    StepGauss { radius: f64, a: f64, b: f64 },
    /// `1_{[0, m+n]}` for radius marks.
    MarkSumHardCore,
    /// 1 on `[0, m+n]`, then `exp(-c (r-m-n))`.
    MarkSumExp { c: f64 },
}

/// Registry ids, in the order they are documented.
pub const REGISTRY: &[(&str, &[&str])] = &[
    ("constant", &["c"]),
    ("hardcore", &["R"]),
    ("strauss", &["f0", "R"]),
    ("example1", &["a", "R"]),
    ("example2", &["a"]),
    ("step-gauss", &["R", "a", "b"]),
    ("marksum-hardcore", &[]),
    ("fc", &["c"]),
];

fn canonical_id(id: &str) -> Option<&'static str> {
    Some(match id {
        "constant" => "constant",
        "hardcore" | "hard-core" => "hardcore",
        "strauss" => "strauss",
        "example1" | "softcore" | "soft-core" => "example1",
        "example2" | "aggregative" => "example2",
        "step-gauss" | "f_rab" => "step-gauss",
        "marksum-hardcore" | "mark-sum-hardcore" => "marksum-hardcore",
        "fc" | "marksum-exp" => "fc",
        _ => return None,
    })
}

/// A validated interaction function bound to a dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionFunction {
    family: Family,
    dim: usize,
    /// Precomputed cutoff for mark-free families.
    cutoff: f64,
    /// `1/Γ(1 + a/2)` for the aggregative family.
    norm: f64,
}

/// Serialized form: `{"id": "...", <params>}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionDoc {
    pub id: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

pub fn registry_make(id: &str, params: &BTreeMap<String, f64>, dim: usize) -> Result<InteractionFunction> {
    let canon = canonical_id(id).ok_or_else(|| Error::UnknownFunction(id.to_string()))?;
    let expected = REGISTRY
        .iter()
        .find(|(k, _)| *k == canon)
        .map(|(_, p)| *p)
        .expect("canonical id is registered");
    let mut c = Checker::new();
    for key in params.keys() {
        c.check(expected.contains(&key.as_str()), key.clone(), format!("unknown parameter for `{canon}`"));
    }
    for key in expected {
        match params.get(*key) {
            None => c.push(crate::error::Issue::new(*key, format!("missing parameter for `{canon}`"))),
            Some(v) if !v.is_finite() => c.push(crate::error::Issue::new(*key, "must be finite")),
            _ => {}
        }
    }
    c.check((1..=3).contains(&dim), "dim", "dimension must be 1, 2 or 3");
    c.finish()?;
    let p = |k: &str| params[k];

    let mut c = Checker::new();
    let family = match canon {
        "constant" => {
            let v = p("c");
            c.check((0.0..=1.0).contains(&v), "c", "c ∈ [0,1]");
            Family::Constant { c: v }
        }
        "hardcore" => {
            let r = p("R");
            c.check(r >= 0.0, "R", "R ≥ 0");
            Family::HardCore { radius: r }
        }
        "strauss" => {
            let (f0, r) = (p("f0"), p("R"));
            c.check((0.0..=1.0).contains(&f0), "f0", "f0 ∈ [0,1]");
            c.check(r >= 0.0, "R", "R ≥ 0");
            Family::Strauss { f0, radius: r }
        }
        "example1" => {
            let (a, r) = (p("a"), p("R"));
            c.check(r > 0.0, "R", "R > 0");
            c.check((0.0..=r).contains(&a), "a", "a ∈ [0,R]");
            Family::SoftCore { a, radius: r }
        }
        "example2" => {
            let a = p("a");
            c.check(a >= 0.0, "a", "a ≥ 0");
            Family::Aggregative { a }
        }
        "step-gauss" => {
            let (r, a, b) = (p("R"), p("a"), p("b"));
            c.check(r >= 0.0, "R", "R ≥ 0");
            c.check(a >= 1.0, "a", "a ≥ 1 (keeps f ≤ 1)");
            c.check(b > 0.0, "b", "b > 0");
            Family::StepGauss { radius: r, a, b }
        }
        "marksum-hardcore" => Family::MarkSumHardCore,
        "fc" => {
            let v = p("c");
            c.check(v > 0.0, "c", "c > 0");
            Family::MarkSumExp { c: v }
        }
        _ => unreachable!(),
    };
    c.finish()?;
    InteractionFunction::from_family(family, dim)
}

impl InteractionFunction {
    pub fn from_family(family: Family, dim: usize) -> Result<Self> {
        let norm = match family {
            Family::Aggregative { a } => 1.0 / gamma(1.0 + a / 2.0),
            _ => 1.0,
        };
        let mut f = Self {
            family,
            dim,
            cutoff: f64::NAN,
            norm,
        };
        if let Family::Aggregative { a } = family {
            let peak = f.eval(peak_location(a), 0.0, 0.0);
            if peak > 1.0 + 1e-12 {
                return Err(Error::invalid("a", format!("sup h_a = {peak} exceeds 1")));
            }
        }
        if !f.is_marked() {
            f.cutoff = f.compute_cutoff(0.0, 0.0);
        }
        Ok(f)
    }

    /// `f ≡ 0`.
    pub fn zero(dim: usize) -> Self {
        Self::from_family(Family::Constant { c: 0.0 }, dim).expect("zero function is valid")
    }

    pub fn hard_core(radius: f64, dim: usize) -> Result<Self> {
        registry_make("hardcore", &BTreeMap::from([("R".to_string(), radius)]), dim)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::from_family(self.family, dim)
    }

    pub fn is_marked(&self) -> bool {
        matches!(self.family, Family::MarkSumHardCore | Family::MarkSumExp { .. })
    }

    pub fn is_zero(&self) -> bool {
        match self.family {
            Family::Constant { c } => c == 0.0,
            Family::HardCore { radius } => radius == 0.0,
            Family::Strauss { f0, radius } => f0 == 0.0 || radius == 0.0,
            _ => false,
        }
    }

    pub fn id(&self) -> &'static str {
        match self.family {
            Family::Constant { .. } => "constant",
            Family::HardCore { .. } => "hardcore",
            Family::Strauss { .. } => "strauss",
            Family::SoftCore { .. } => "example1",
            Family::Aggregative { .. } => "example2",
            Family::StepGauss { .. } => "step-gauss",
            Family::MarkSumHardCore => "marksum-hardcore",
            Family::MarkSumExp { .. } => "fc",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let kv: Vec<(&str, f64)> = match self.family {
            Family::Constant { c } => vec![("c", c)],
            Family::HardCore { radius } => vec![("R", radius)],
            Family::Strauss { f0, radius } => vec![("f0", f0), ("R", radius)],
            Family::SoftCore { a, radius } => vec![("a", a), ("R", radius)],
            Family::Aggregative { a } => vec![("a", a)],
            Family::StepGauss { radius, a, b } => vec![("R", radius), ("a", a), ("b", b)],
            Family::MarkSumHardCore => vec![],
            Family::MarkSumExp { c } => vec![("c", c)],
        };
        kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_doc(&self) -> InteractionDoc {
        InteractionDoc {
            id: self.id().to_string(),
            params: self.params(),
        }
    }

    /// `f(r, m, n)`; mark-free families ignore the marks.
    #[inline]
    pub fn eval(&self, r: f64, m: f64, n: f64) -> f64 {
        match self.family {
            Family::Constant { c } => c,
            Family::HardCore { radius } => (r <= radius) as u8 as f64,
            Family::Strauss { f0, radius } => {
                if r <= radius {
                    f0
                } else {
                    0.0
                }
            }
            Family::SoftCore { a, radius } => {
                if r <= a {
                    1.0
                } else if radius <= a {
                    0.0
                } else {
                    (-(r * r - a * a) / (radius * radius - a * a)).exp()
                }
            }
            Family::Aggregative { a } => {
                if r == 0.0 {
                    if a == 0.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (a * r.ln() - r * r).exp() * self.norm
                }
            }
            Family::StepGauss { radius, a, b } => {
                if r <= radius {
                    1.0
                } else {
                    let u = r - radius;
                    (-u * u / b).exp() / a
                }
            }
            Family::MarkSumHardCore => (r <= m + n) as u8 as f64,
            Family::MarkSumExp { c } => {
                let s = m + n;
                if r <= s {
                    1.0
                } else {
                    (-c * (r - s)).exp()
                }
            }
        }
    }

    /// Points where `f(·, m, n)` jumps or has a kink.
    pub fn breakpoints(&self, m: f64, n: f64) -> Vec<f64> {
        match self.family {
            Family::HardCore { radius } | Family::Strauss { radius, .. } | Family::StepGauss { radius, .. } => {
                vec![radius]
            }
            Family::SoftCore { a, radius } => {
                if a > 0.0 && a < radius {
                    vec![a]
                } else if a >= radius {
                    vec![radius]
                } else {
                    vec![]
                }
            }
            Family::MarkSumHardCore | Family::MarkSumExp { .. } => vec![m + n],
            Family::Constant { .. } | Family::Aggregative { .. } => vec![],
        }
    }

    /// True when the marks enter only through a hard edge at `r = m + n`.
    pub fn has_mark_sum_edge(&self) -> bool {
        self.is_marked()
    }

    /// `Some((height, radius))` when `f(·, m, n) = height * 1_{[0,radius]}`.
    pub fn as_indicator(&self, m: f64, n: f64) -> Option<(f64, f64)> {
        match self.family {
            Family::HardCore { radius } => Some((1.0, radius)),
            Family::Strauss { f0, radius } => Some((f0, radius)),
            Family::MarkSumHardCore => Some((1.0, (m + n).max(0.0))),
            Family::Constant { c } if c == 0.0 => Some((0.0, 0.0)),
            Family::SoftCore { a, radius } if a >= radius => Some((1.0, radius)),
            _ => None,
        }
    }

    /// Interaction range of `f(·, m, n)`: exact support end for compact
    /// families, otherwise the smallest `r` past which `f < CUTOFF_LEVEL`.
    /// Infinite for non-integrable constants.
    pub fn cutoff(&self, m: f64, n: f64) -> f64 {
        if self.is_marked() {
            self.compute_cutoff(m, n)
        } else {
            self.cutoff
        }
    }

    /// Range over all mark pairs in `[.., mark_hi]` (mark-sum families grow with the marks).
    pub fn max_cutoff(&self, mark_hi: f64) -> f64 {
        if self.is_marked() {
            self.compute_cutoff(mark_hi.max(0.0), mark_hi.max(0.0))
        } else {
            self.cutoff
        }
    }

    fn compute_cutoff(&self, m: f64, n: f64) -> f64 {
        match self.family {
            Family::Constant { c } => {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Family::HardCore { radius } => radius,
            Family::Strauss { f0, radius } => {
                if f0 == 0.0 {
                    0.0
                } else {
                    radius
                }
            }
            Family::MarkSumHardCore => (m + n).max(0.0),
            Family::MarkSumExp { c } => (m + n).max(0.0) + (1.0 / CUTOFF_LEVEL).ln() / c,
            Family::SoftCore { a, radius } if a >= radius => radius,
            Family::SoftCore { a, .. } => tail_cutoff(|r| self.eval(r, m, n), a),
            Family::Aggregative { a } => tail_cutoff(|r| self.eval(r, m, n), peak_location(a)),
            Family::StepGauss { radius, .. } => tail_cutoff(|r| self.eval(r, m, n), radius),
        }
    }

    /// Closed form of `∫_0^∞ f(r, m, n) r^{d-1} dr` where one is known.
    pub fn closed_form_tail(&self, m: f64, n: f64) -> Option<f64> {
        let d = self.dim as i32;
        match self.family {
            Family::Constant { c } if c == 0.0 => Some(0.0),
            Family::HardCore { radius } => Some(radius.powi(d) / d as f64),
            Family::Strauss { f0, radius } => Some(f0 * radius.powi(d) / d as f64),
            Family::MarkSumHardCore => Some((m + n).max(0.0).powi(d) / d as f64),
            Family::MarkSumExp { c } => {
                // ∫_0^s r^{d-1} dr + ∫_0^∞ e^{-cu} (u+s)^{d-1} du
                let s = (m + n).max(0.0);
                let mut tail = 0.0;
                let mut binom = 1.0;
                let mut fact = 1.0;
                for k in 0..d {
                    if k > 0 {
                        binom = binom * (d - k) as f64 / k as f64;
                        fact *= k as f64;
                    }
                    tail += binom * s.powi(d - 1 - k) * fact / c.powi(k + 1);
                }
                Some(s.powi(d) / d as f64 + tail)
            }
            _ => None,
        }
    }
}

fn peak_location(a: f64) -> f64 {
    (a / 2.0).sqrt()
}

/// Smallest `r ≥ start` beyond which `f < CUTOFF_LEVEL`, assuming `f` is
/// nonincreasing past `start`: doubling search, then bisection.
pub fn tail_cutoff<F: Fn(f64) -> f64>(f: F, start: f64) -> f64 {
    let mut lo = start.max(0.0);
    if f(lo) < CUTOFF_LEVEL {
        return lo;
    }
    let mut step = lo.max(1.0);
    let mut hi = lo + step;
    let mut doublings = 0;
    while f(hi) >= CUTOFF_LEVEL {
        lo = hi;
        step *= 2.0;
        hi = lo + step;
        doublings += 1;
        if doublings > 1100 || !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < CUTOFF_LEVEL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
