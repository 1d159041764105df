//! First- and second-order characteristics of the thinned processes.
//!
//! Intensities and pair correlation functions are computed by quadrature
//! from the interaction function, the mark law and the weight law. Mark
//! integrals use the Gauss–Legendre representation of the mark law
//! (normalised to total mass one), so a point-mass law reproduces the
//! unmarked formulas exactly.

pub mod conv;
mod marked;
pub mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::table::{Provenance, Statistic, SummaryTable};
use crate::model::{InteractionFunction, ModelSpec, Variant};
use crate::numeric::special::unit_sphere_area;
use crate::numeric::{gauss_legendre, integrate, partition, unit_ball_volume, Map, QuadOptions};
use crate::par::Exec;

pub use conv::{ball_intersection, radial_self_convolution, ConvMethod, ConvOptions, Profile};
pub use marked::ThinningKernels;
pub use weights::{j, weight_integral};

/// How the MatII weight integrals are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightPath {
    /// Closed forms when the weight law does not depend on the mark.
    #[default]
    Auto,
    /// Direct quadrature over the weights in all cases.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticOptions {
    /// Convolution rule used inside pcf evaluations.
    pub conv: ConvOptions,
    /// Nodes per piece for the weight quadrature of the general MatII path.
    pub weight_nodes: usize,
    pub weight_path: WeightPath,
    /// Parallelism over grid points.
    pub exec: Exec,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self {
            conv: ConvOptions::fast(32),
            weight_nodes: 48,
            weight_path: WeightPath::Auto,
            exec: Exec::default(),
        }
    }
}

/// A condition met during an evaluation that changes how the result reads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

/// An intensity value, with a diagnostic when the value is degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Diagnostic>,
}

impl Intensity {
    fn divergent(err: &Error) -> Self {
        Intensity {
            value: 0.0,
            diagnostic: Some(Diagnostic {
                code: "divergent".into(),
                message: format!("{err}; every point is deleted, so the thinned process is empty"),
            }),
        }
    }
}

/// `∫₀^∞ f(r, m, n) r^{d-1} dr`.
pub fn tail_integral(f: &InteractionFunction, m: f64, n: f64) -> Result<f64> {
    if let Some(v) = f.closed_form_tail(m, n) {
        return Ok(v);
    }
    let d = f.dim() as i32;
    let integrand = |r: f64| f.eval(r, m, n) * r.powi(d - 1);
    let cut = f.cutoff(m, n);
    let divergent = || {
        Error::Divergent(format!(
            "∫ f(r) r^{} dr over [0, ∞) is infinite for `{}`",
            d - 1,
            f.id()
        ))
    };
    if !cut.is_finite() {
        return Err(divergent());
    }
    let opts = QuadOptions {
        rel_tol: 1e-11,
        ..QuadOptions::default()
    };
    let body = integrate(integrand, 0.0, cut, &f.breakpoints(m, n), opts);
    if !body.converged {
        return Err(Error::NotConverged(format!(
            "tail integral of `{}` (error estimate {:.3e})",
            f.id(),
            body.error
        )));
    }
    // certify the tail on doubling shells [c 2^k, c 2^{k+1}]
    let mut total = body.value;
    let mut lo = cut.max(f64::MIN_POSITIVE);
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    for _ in 0..64 {
        let shell = integrate(integrand, lo, 2.0 * lo, &[], opts).value;
        total += shell;
        if shell <= 1e-13 * total.abs().max(f64::MIN_POSITIVE) {
            return Ok(total);
        }
        if shell >= prev {
            growing += 1;
            if growing >= 3 {
                return Err(divergent());
            }
        }
        prev = shell;
        lo *= 2.0;
    }
    Err(divergent())
}

fn check_variant(spec: &ModelSpec, want: &[Variant], op: &str) -> Result<()> {
    if want.contains(&spec.variant()) {
        Ok(())
    } else {
        Err(Error::invalid(
            "variant",
            format!("{op} does not apply to variant {}", spec.variant().name()),
        ))
    }
}

/// Intensity of the thinned unmarked process.
pub fn intensity_mat1(spec: &ModelSpec) -> Result<Intensity> {
    check_variant(spec, &[Variant::MatI], "intensity_mat1")?;
    let f = spec.f();
    match tail_integral(f, 0.0, 0.0) {
        Ok(t) => {
            let (lam, d) = (spec.lambda(), spec.dim());
            Ok(Intensity {
                value: lam * spec.p0() * (-lam * unit_sphere_area(d) * t).exp(),
                diagnostic: None,
            })
        }
        Err(e @ Error::Divergent(_)) => Ok(Intensity::divergent(&e)),
        Err(e) => Err(e),
    }
}

/// Intensity of the thinned marked process.
pub fn intensity_marked(spec: &ModelSpec) -> Result<Intensity> {
    check_variant(spec, &[Variant::MatIMarked], "intensity_marked")?;
    guard_divergence(marked::intensity(spec, &AnalyticOptions::default()))
}

/// Intensity of the thinned weighted process.
pub fn intensity_mat2(spec: &ModelSpec) -> Result<Intensity> {
    intensity_mat2_with(spec, &AnalyticOptions::default())
}

pub fn intensity_mat2_with(spec: &ModelSpec, opts: &AnalyticOptions) -> Result<Intensity> {
    check_variant(spec, &[Variant::MatII], "intensity_mat2")?;
    guard_divergence(marked::intensity(spec, opts))
}

fn guard_divergence(v: Result<f64>) -> Result<Intensity> {
    match v {
        Ok(value) => Ok(Intensity {
            value,
            diagnostic: None,
        }),
        Err(e @ Error::Divergent(_)) => Ok(Intensity::divergent(&e)),
        Err(e) => Err(e),
    }
}

/// Intensity for any variant.
pub fn intensity(spec: &ModelSpec) -> Result<Intensity> {
    match spec.variant() {
        Variant::MatI => intensity_mat1(spec),
        Variant::MatIMarked => intensity_marked(spec),
        Variant::MatII => intensity_mat2(spec),
    }
}

/// Pair correlation function of the unmarked model at `r`.
pub fn pcf_mat1(spec: &ModelSpec, r: f64) -> Result<f64> {
    check_variant(spec, &[Variant::MatI], "pcf_mat1")?;
    pcf_mat1_with(spec, r, &AnalyticOptions::default())
}

fn pcf_mat1_with(spec: &ModelSpec, r: f64, opts: &AnalyticOptions) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid("r", format!("must be ≥ 0 (got {r})")));
    }
    let f = spec.f();
    tail_integral(f, 0.0, 0.0)?;
    let fr = f.eval(r, 0.0, 0.0);
    if fr >= 1.0 {
        return Ok(0.0);
    }
    let p = Profile::unmarked(f);
    let c = radial_self_convolution(p, p, r, &opts.conv)?;
    Ok((1.0 - fr).powi(2) * (spec.lambda() * c).exp())
}

pub fn pcf_marked(spec: &ModelSpec, r: f64) -> Result<f64> {
    check_variant(spec, &[Variant::MatIMarked], "pcf_marked")?;
    marked::pcf(spec, r, &AnalyticOptions::default())
}

pub fn pcf_mat2(spec: &ModelSpec, r: f64) -> Result<f64> {
    check_variant(spec, &[Variant::MatII], "pcf_mat2")?;
    marked::pcf(spec, r, &AnalyticOptions::default())
}

/// Pair correlation function of any variant at one distance.
pub fn pcf(spec: &ModelSpec, r: f64, opts: &AnalyticOptions) -> Result<f64> {
    match spec.variant() {
        Variant::MatI => pcf_mat1_with(spec, r, opts),
        _ => marked::pcf(spec, r, opts),
    }
}

/// Pair correlation function on a grid of distances.
pub fn pcf_grid(spec: &ModelSpec, r: &[f64], opts: &AnalyticOptions) -> Result<Vec<f64>> {
    opts.exec
        .map_slice(r, |&x| pcf(spec, x, &AnalyticOptions { exec: Exec::Sequential, ..*opts }))
        .into_iter()
        .collect()
}

/// Distances where the pcf may jump or kink.
fn pcf_breaks(spec: &ModelSpec) -> Vec<f64> {
    let f = spec.f();
    match spec.mu() {
        Some(mu) if f.is_marked() => {
            let (lo, hi) = mu.support();
            let mut b = vec![2.0 * lo, 2.0 * hi, lo + hi];
            b.extend(f.breakpoints(lo, lo));
            b
        }
        _ => {
            let mut b = f.breakpoints(0.0, 0.0);
            b.extend(b.clone().iter().map(|x| 2.0 * x));
            b
        }
    }
}

/// Ripley's `K(r) = d b_d ∫₀^r g(s) s^{d-1} ds` on a grid starting above 0.
pub fn k_function(spec: &ModelSpec, r: &[f64], opts: &AnalyticOptions) -> Result<Vec<f64>> {
    let d = spec.dim() as i32;
    let mut edges = vec![0.0];
    edges.extend_from_slice(r);
    let rule = gauss_legendre(8);
    let breaks = pcf_breaks(spec);
    // nodes for every sub-piece of every grid interval
    let mut nodes = Vec::new();
    let mut owner = Vec::new();
    for (i, e) in edges.windows(2).enumerate() {
        for p in partition(e[0], e[1], breaks.iter().copied()).windows(2) {
            for (x, w) in rule.mapped(p[0], p[1], Map::Linear) {
                nodes.push((x, w));
                owner.push(i);
            }
        }
    }
    let xs: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let g = pcf_grid(spec, &xs, opts)?;
    let mut k = vec![0.0; r.len()];
    for ((&(x, w), gi), &i) in nodes.iter().zip(&g).zip(&owner) {
        k[i] += w * gi * x.powi(d - 1);
    }
    let area = unit_sphere_area(spec.dim());
    let mut acc = 0.0;
    for v in k.iter_mut() {
        acc += *v;
        *v = area * acc;
    }
    Ok(k)
}

/// `L(r) = (K(r) / b_d)^{1/d}`.
pub fn l_function(spec: &ModelSpec, r: &[f64], opts: &AnalyticOptions) -> Result<Vec<f64>> {
    let d = spec.dim();
    let b = unit_ball_volume(d);
    Ok(k_function(spec, r, opts)?
        .into_iter()
        .map(|k| (k.max(0.0) / b).powf(1.0 / d as f64))
        .collect())
}

/// Analytic summary table for `stat` ∈ {intensity, pcf, K, L}.
pub fn summary_table(spec: &ModelSpec, stat: Statistic, r: &[f64], opts: &AnalyticOptions) -> Result<SummaryTable> {
    let values = match stat {
        Statistic::Pcf => pcf_grid(spec, r, opts)?,
        Statistic::K => k_function(spec, r, opts)?,
        Statistic::L => l_function(spec, r, opts)?,
        Statistic::Intensity => vec![intensity(spec)?.value; r.len()],
        other => {
            return Err(Error::invalid(
                "stat",
                format!("no analytic form for `{}`", other.name()),
            ))
        }
    };
    SummaryTable::new(stat, Provenance::Analytic, r.to_vec(), values)
}

#[cfg(test)]
mod tests;
