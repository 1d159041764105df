//! Radial self-convolution `[f1 ⊙ f2](r) = ∫ f1(‖x‖) f2(‖x − r v‖) dx`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::InteractionFunction;
use crate::numeric::{gauss_legendre, integrate, partition, unit_ball_volume, GaussLegendre, Map, QuadOptions};

/// The radial profile `r ↦ f(r, m, n)` for fixed marks.
#[derive(Debug, Clone, Copy)]
pub struct Profile<'a> {
    f: &'a InteractionFunction,
    m: f64,
    n: f64,
}

impl<'a> Profile<'a> {
    pub fn new(f: &'a InteractionFunction, m: f64, n: f64) -> Self {
        Self { f, m, n }
    }

    pub fn unmarked(f: &'a InteractionFunction) -> Self {
        Self { f, m: 0.0, n: 0.0 }
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        self.f.eval(r, self.m, self.n)
    }

    pub fn cutoff(&self) -> f64 {
        self.f.cutoff(self.m, self.n)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints(self.m, self.n)
    }

    fn indicator(&self) -> Option<(f64, f64)> {
        self.f.as_indicator(self.m, self.n)
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConvMethod {
    /// Exact ball-intersection volume for indicator profiles, quadrature otherwise.
    #[default]
    Auto,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvOptions {
    /// Gauss–Legendre nodes per piece in each direction.
    pub nodes: usize,
    /// Repeat with doubled nodes and require agreement.
    pub check: bool,
    pub method: ConvMethod,
}

impl Default for ConvOptions {
    fn default() -> Self {
        Self {
            nodes: 64,
            check: true,
            method: ConvMethod::Auto,
        }
    }
}

impl ConvOptions {
    pub fn fast(nodes: usize) -> Self {
        Self {
            nodes,
            check: false,
            method: ConvMethod::Auto,
        }
    }
}

const CHECK_TOL: f64 = 1e-7;
const MAX_NODES: usize = 512;

/// `[f1 ⊙ f2](r)` in the dimension of the profiles.
pub fn radial_self_convolution(f1: Profile, f2: Profile, r: f64, opts: &ConvOptions) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid("r", format!("must be ≥ 0 (got {r})")));
    }
    let (c1, c2) = (f1.cutoff(), f2.cutoff());
    if !c1.is_finite() || !c2.is_finite() {
        return Err(Error::Divergent(format!(
            "`{}` is not integrable; its self-convolution is infinite",
            f1.f.id()
        )));
    }
    if !opts.check {
        return Ok(convolve(f1, f2, r, opts.nodes, opts.method));
    }
    let mut n = opts.nodes;
    let mut prev = convolve(f1, f2, r, n, opts.method);
    loop {
        let next = convolve(f1, f2, r, 2 * n, opts.method);
        let scale = next.abs().max(1e-14 * unit_ball_volume(f1.dim()) * c1.max(c2).powi(f1.dim() as i32));
        if (next - prev).abs() <= CHECK_TOL * scale {
            return Ok(next);
        }
        n *= 2;
        if 2 * n > MAX_NODES {
            return Err(Error::NotConverged(format!(
                "convolution at r = {r} did not stabilise ({prev} vs {next})"
            )));
        }
        prev = next;
    }
}

/// Unchecked evaluation used on hot paths.
pub(crate) fn convolve(f1: Profile, f2: Profile, r: f64, nodes: usize, method: ConvMethod) -> f64 {
    let d = f1.dim();
    let (c1, c2) = (f1.cutoff(), f2.cutoff());
    if r > c1 + c2 || c1 == 0.0 || c2 == 0.0 {
        return 0.0;
    }
    if method == ConvMethod::Auto {
        if let (Some((h1, a)), Some((h2, b))) = (f1.indicator(), f2.indicator()) {
            return h1 * h2 * ball_intersection(d, a, b, r);
        }
    }
    if r == 0.0 {
        return at_origin(f1, f2);
    }
    let rule = gauss_legendre(nodes);
    match d {
        1 => conv1(f1, f2, r, &rule),
        2 => conv2(f1, f2, r, &rule),
        _ => conv3(f1, f2, r, &rule),
    }
}

fn at_origin(f1: Profile, f2: Profile) -> f64 {
    let d = f1.dim();
    let hi = f1.cutoff().min(f2.cutoff());
    let mut breaks = f1.breakpoints();
    breaks.extend(f2.breakpoints());
    let q = integrate(
        |s| f1.eval(s) * f2.eval(s) * s.powi(d as i32 - 1),
        0.0,
        hi,
        &breaks,
        QuadOptions::default(),
    );
    d as f64 * unit_ball_volume(d) * q.value
}

/// Edges where the `s`-integrand changes regularity: breaks of `f1` and
/// the tangency points `|s ± r| = b` for the breaks `b` of `f2`.
fn outer_edges(f1: Profile, f2: Profile, r: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut b2 = f2.breakpoints();
    b2.push(f2.cutoff());
    let mut cuts = f1.breakpoints();
    for b in b2 {
        cuts.extend([r + b, b - r, r - b]);
    }
    cuts.push(r);
    partition(lo, hi, cuts)
}

fn conv1(f1: Profile, f2: Profile, r: f64, rule: &GaussLegendre) -> f64 {
    let (c1, c2) = (f1.cutoff(), f2.cutoff());
    let lo = (-c1).max(r - c2);
    let hi = c1.min(r + c2);
    if hi <= lo {
        return 0.0;
    }
    let mut cuts = vec![0.0, r];
    for b in f1.breakpoints() {
        cuts.extend([b, -b]);
    }
    for b in f2.breakpoints() {
        cuts.extend([r + b, r - b]);
    }
    let edges = partition(lo, hi, cuts);
    rule.integrate_pieces(&edges, Map::Cosine, |x| f1.eval(x.abs()) * f2.eval((x - r).abs()))
}

fn conv2(f1: Profile, f2: Profile, r: f64, rule: &GaussLegendre) -> f64 {
    let (c1, c2) = (f1.cutoff(), f2.cutoff());
    let lo = (r - c2).max(0.0);
    let hi = c1.min(r + c2);
    if hi <= lo {
        return 0.0;
    }
    let b2 = f2.breakpoints();
    let edges = outer_edges(f1, f2, r, lo, hi);
    let mut theta = Vec::with_capacity(b2.len() + 2);
    2.0 * rule.integrate_pieces(&edges, Map::Cosine, |s| {
        let fs = f1.eval(s);
        if fs == 0.0 || s == 0.0 {
            return 0.0;
        }
        // ρ(θ) = sqrt(s² + r² − 2 s r cos θ) increases on [0, π]
        let angle = |b: f64| ((s * s + r * r - b * b) / (2.0 * s * r)).clamp(-1.0, 1.0).acos();
        let top = if s + r <= c2 { PI } else { angle(c2) };
        theta.clear();
        theta.push(0.0);
        theta.extend(b2.iter().filter(|&&b| (s - r).abs() < b && b < s + r).map(|&b| angle(b)));
        theta.push(top);
        let edges = partition(0.0, top, theta.iter().copied());
        let inner = rule.integrate_pieces(&edges, Map::Cosine, |t| {
            let rho2 = (s * s + r * r - 2.0 * s * r * t.cos()).max(0.0);
            f2.eval(rho2.sqrt())
        });
        fs * s * inner
    })
}

fn conv3(f1: Profile, f2: Profile, r: f64, rule: &GaussLegendre) -> f64 {
    let (c1, c2) = (f1.cutoff(), f2.cutoff());
    let lo = (r - c2).max(0.0);
    let hi = c1.min(r + c2);
    if hi <= lo {
        return 0.0;
    }
    let b2 = f2.breakpoints();
    let edges = outer_edges(f1, f2, r, lo, hi);
    let mut cuts = Vec::with_capacity(b2.len() + 2);
    2.0 * PI / r
        * rule.integrate_pieces(&edges, Map::Cosine, |s| {
            let fs = f1.eval(s);
            if fs == 0.0 {
                return 0.0;
            }
            let (a, b) = ((s - r).abs(), (s + r).min(c2));
            if b <= a {
                return 0.0;
            }
            cuts.clear();
            cuts.extend(b2.iter().copied());
            let edges = partition(a, b, cuts.iter().copied());
            fs * s * rule.integrate_pieces(&edges, Map::Linear, |t| t * f2.eval(t))
        })
}

/// Volume of the intersection of balls of radii `a`, `b` with centres `r` apart.
pub fn ball_intersection(dim: usize, a: f64, b: f64, r: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 || r >= a + b {
        return 0.0;
    }
    let small = a.min(b);
    if r <= (a - b).abs() {
        return unit_ball_volume(dim) * small.powi(dim as i32);
    }
    match dim {
        1 => (a + b - r).min(2.0 * small),
        2 => {
            let t1 = ((r * r + a * a - b * b) / (2.0 * r * a)).clamp(-1.0, 1.0).acos();
            let t2 = ((r * r + b * b - a * a) / (2.0 * r * b)).clamp(-1.0, 1.0).acos();
            let k = ((-r + a + b) * (r + a - b) * (r - a + b) * (r + a + b)).max(0.0);
            a * a * t1 + b * b * t2 - 0.5 * k.sqrt()
        }
        _ => {
            let s = a + b - r;
            PI * s * s * (r * r + 2.0 * r * (a + b) - 3.0 * (a - b) * (a - b)) / (12.0 * r)
        }
    }
}
