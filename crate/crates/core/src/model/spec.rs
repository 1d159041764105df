use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Checker, Error, Issue, Result};

use super::interaction::{registry_make, InteractionDoc, InteractionFunction};
use super::marks::{MarkDistribution, MarkKind, WeightDistribution, DEFAULT_MARK_NODES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "MatI", alias = "mat1")]
    MatI,
    #[serde(rename = "MatI-marked", alias = "mat1-marked")]
    MatIMarked,
    #[serde(rename = "MatII", alias = "mat2")]
    MatII,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::MatI => "MatI",
            Variant::MatIMarked => "MatI-marked",
            Variant::MatII => "MatII",
        }
    }
}

/// A fully specified thinned-Poisson model: `MatI[λ,p0,f]`,
/// `MatI[λ,μ,p0,f]` or `MatII[λ,μ,(ν_m),p0,f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    variant: Variant,
    dim: usize,
    lambda: f64,
    p0: f64,
    f: InteractionFunction,
    mu: Option<MarkDistribution>,
    nu: Option<WeightDistribution>,
}

/// JSON shape of a mark law: the kind plus an optional node count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkDoc {
    #[serde(flatten)]
    pub kind: MarkKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpecDoc {
    pub variant: Variant,
    pub dim: usize,
    pub lambda: f64,
    pub p0: f64,
    pub f: InteractionDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MarkDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<WeightDistribution>,
}

impl ModelSpec {
    pub fn new(
        variant: Variant,
        lambda: f64,
        p0: f64,
        f: InteractionFunction,
        mu: Option<MarkDistribution>,
        nu: Option<WeightDistribution>,
    ) -> Result<Self> {
        let dim = f.dim();
        let mut c = Checker::new();
        c.check(lambda.is_finite() && lambda > 0.0, "lambda", "λ must be finite and > 0");
        c.check(p0 > 0.0 && p0 <= 1.0, "p0", "p0 ∈ (0,1]");
        match variant {
            Variant::MatI => {
                c.check(
                    !f.is_marked(),
                    "f",
                    format!("arity mismatch: `{}` needs marks but variant MatI is unmarked", f.id()),
                );
                c.check(mu.is_none(), "mu", "not used by variant MatI");
                c.check(nu.is_none(), "nu", "not used by variant MatI");
            }
            Variant::MatIMarked => {
                c.check(mu.is_some(), "mu", "required for variant MatI-marked");
                c.check(nu.is_none(), "nu", "not used by variant MatI-marked");
            }
            Variant::MatII => {
                c.check(mu.is_some(), "mu", "required for variant MatII");
                c.check(nu.is_some(), "nu", "required for variant MatII");
            }
        }
        if let Some(mu) = &mu {
            if f.has_mark_sum_edge() {
                c.check(mu.support().0 >= 0.0, "mu", "radius marks must be ≥ 0");
            }
            if let Some(nu) = &nu {
                if !nu.is_mark_independent() {
                    c.check(mu.support().0 > 0.0, "nu.mark_power", "mark-scaled weights need marks > 0");
                }
            }
        }
        c.finish()?;
        Ok(Self {
            variant,
            dim,
            lambda,
            p0,
            f,
            mu,
            nu,
        })
    }

    pub fn mat1(lambda: f64, p0: f64, f: InteractionFunction) -> Result<Self> {
        Self::new(Variant::MatI, lambda, p0, f, None, None)
    }

    pub fn mat1_marked(lambda: f64, p0: f64, f: InteractionFunction, mu: MarkDistribution) -> Result<Self> {
        Self::new(Variant::MatIMarked, lambda, p0, f, Some(mu), None)
    }

    pub fn mat2(
        lambda: f64,
        p0: f64,
        f: InteractionFunction,
        mu: MarkDistribution,
        nu: WeightDistribution,
    ) -> Result<Self> {
        Self::new(Variant::MatII, lambda, p0, f, Some(mu), Some(nu))
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn f(&self) -> &InteractionFunction {
        &self.f
    }

    pub fn mu(&self) -> Option<&MarkDistribution> {
        self.mu.as_ref()
    }

    pub fn nu(&self) -> Option<&WeightDistribution> {
        self.nu.as_ref()
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.variant, lambda, self.p0, self.f.clone(), self.mu.clone(), self.nu)
    }

    pub fn with_p0(&self, p0: f64) -> Result<Self> {
        Self::new(self.variant, self.lambda, p0, self.f.clone(), self.mu.clone(), self.nu)
    }

    pub fn with_f(&self, f: InteractionFunction) -> Result<Self> {
        Self::new(self.variant, self.lambda, self.p0, f, self.mu.clone(), self.nu)
    }

    /// Same model with a different mark quadrature size.
    pub fn with_mark_nodes(&self, nodes: usize) -> Result<Self> {
        let mu = self.mu.as_ref().map(|m| m.with_nodes(nodes)).transpose()?;
        Self::new(self.variant, self.lambda, self.p0, self.f.clone(), mu, self.nu)
    }

    /// Largest interaction range over the mark support.
    pub fn interaction_range(&self) -> f64 {
        let hi = self.mu.as_ref().map(|m| m.support().1).unwrap_or(0.0);
        self.f.max_cutoff(hi)
    }

    pub fn to_doc(&self) -> ModelSpecDoc {
        ModelSpecDoc {
            variant: self.variant,
            dim: self.dim,
            lambda: self.lambda,
            p0: self.p0,
            f: self.f.to_doc(),
            mu: self.mu.as_ref().map(|m| MarkDoc {
                kind: m.kind().clone(),
                nodes: (m.nodes() != DEFAULT_MARK_NODES).then_some(m.nodes()),
            }),
            nu: self.nu,
        }
    }

    pub fn from_doc(doc: &ModelSpecDoc) -> Result<Self> {
        let mut c = Checker::new();
        c.check((1..=3).contains(&doc.dim), "dim", "dimension must be 1, 2 or 3");
        c.finish()?;
        let mut c = Checker::new();
        let f = registry_make(&doc.f.id, &doc.f.params, doc.dim)
            .map_err(|e| match e {
                Error::UnknownFunction(id) => Error::invalid("id", format!("unknown interaction function `{id}`")),
                other => other,
            })
            .map_err(|e| c.absorb("f", e))
            .ok();
        let mu = doc
            .mu
            .as_ref()
            .and_then(|m| {
                MarkDistribution::new(m.kind.clone(), m.nodes.unwrap_or(DEFAULT_MARK_NODES))
                    .map_err(|e| c.absorb("mu", e))
                    .ok()
            });
        c.finish()?;
        Self::new(doc.variant, doc.lambda, doc.p0, f.expect("checked"), mu, doc.nu)
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self.to_doc()).expect("model docs serialize")
    }

    /// Current value of a named parameter (`lambda`, `p0`, `f.<k>`,
    /// `mu.<k>`, `nu.<k>`).
    pub fn param(&self, path: &str) -> Result<f64> {
        let v = self.to_json();
        lookup(&v, path)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::invalid(path, "no such numeric parameter"))
    }

    /// Returns a copy with one named parameter replaced.
    pub fn set_param(&self, path: &str, value: f64) -> Result<Self> {
        let mut v = self.to_json();
        {
            let slot = lookup_mut(&mut v, path).ok_or_else(|| Error::invalid(path, "no such parameter"))?;
            if !slot.is_number() {
                return Err(Error::invalid(path, "not a numeric parameter"));
            }
            *slot = serde_json::json!(value);
        }
        let doc: ModelSpecDoc =
            serde_json::from_value(v).map_err(|e| Error::Validation(vec![Issue::new(path, e.to_string())]))?;
        Self::from_doc(&doc)
    }
}

fn lookup<'a>(v: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(v, |acc, k| acc.get(k))
}

fn lookup_mut<'a>(v: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    path.split('.').try_fold(v, |acc, k| acc.get_mut(k))
}

impl Serialize for ModelSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_doc().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = ModelSpecDoc::deserialize(d)?;
        ModelSpec::from_doc(&doc).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_mat1() {
        let s: ModelSpec = serde_json::from_str(
            r#"{"variant":"MatI","lambda":1.0,"p0":1.0,"f":{"id":"hardcore","R":1},"dim":2}"#,
        )
        .unwrap();
        assert_eq!(s.variant(), Variant::MatI);
        assert_eq!(s.f().cutoff(0.0, 0.0), 1.0);
    }

    #[test]
    fn missing_nu_is_named() {
        let e = serde_json::from_str::<ModelSpec>(
            r#"{"variant":"MatII","lambda":1.0,"p0":1.0,"f":{"id":"hardcore","R":1},"dim":2,
                "mu":{"kind":"point-mass","value":0.5}}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("nu"), "{e}");
    }

    #[test]
    fn arity_mismatch() {
        let f = registry_make("marksum-hardcore", &Default::default(), 2).unwrap();
        let e = ModelSpec::mat1(1.0, 1.0, f).unwrap_err();
        assert!(e.to_string().contains("arity"), "{e}");
    }

    #[test]
    fn set_param_round_trip() {
        let f = registry_make(
            "step-gauss",
            &[("R".to_string(), 1.0), ("a".to_string(), 6.3), ("b".to_string(), 1.0)].into(),
            2,
        )
        .unwrap();
        let s = ModelSpec::mat1(0.4, 0.9, f).unwrap();
        let t = s.set_param("f.b", 2.5).unwrap().set_param("p0", 0.5).unwrap();
        assert_eq!(t.param("f.b").unwrap(), 2.5);
        assert_eq!(t.p0(), 0.5);
        assert!(s.set_param("f.zz", 1.0).is_err());
        assert!(s.set_param("p0", 1.5).is_err());
    }
}
