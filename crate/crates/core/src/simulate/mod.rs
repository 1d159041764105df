//! Seeded simulation of the base Poisson process and the thinning rules.
//!
//! Every deletion decision is made against the complete base pattern. The
//! Bernoulli draw for "`killer` deletes `victim`" is a counter-based uniform
//! keyed by the replicate and the two point identities, so the outcome does
//! not depend on enumeration order, and MatI and MatII runs on the same
//! base pattern share their pair draws.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::CellGrid;
use crate::model::{
    InteractionFunction, MarkDistribution, ModelSpec, Point, PointPattern, Variant, WeightDistribution, Window,
};
use crate::par::Exec;
use crate::rng::{point_id, stream, DrawKey};

/// Width of the frame added around the observation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Halo {
    /// The interaction range of the model.
    #[default]
    Auto,
    Explicit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    #[serde(default)]
    pub halo: Halo,
    #[serde(default)]
    pub replicate_index: u64,
    /// Enumerate all pairs instead of using the cell grid.
    #[serde(default)]
    pub brute_force: bool,
    /// Parallelism inside one replicate.
    #[serde(default = "sequential")]
    pub exec: Exec,
}

fn sequential() -> Exec {
    Exec::Sequential
}

impl SimConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            halo: Halo::Auto,
            replicate_index: 0,
            brute_force: false,
            exec: Exec::Sequential,
        }
    }

    pub fn replicate(mut self, index: u64) -> Self {
        self.replicate_index = index;
        self
    }

    pub fn with_halo(mut self, halo: Halo) -> Self {
        self.halo = halo;
        self
    }

    pub fn with_brute_force(mut self, on: bool) -> Self {
        self.brute_force = on;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// Halo width for `spec`; an unbounded interaction range is an error.
    pub fn resolve_halo(&self, spec: &ModelSpec) -> Result<f64> {
        match self.halo {
            Halo::Explicit(r) if r.is_finite() && r >= 0.0 => Ok(r),
            Halo::Explicit(r) => Err(Error::invalid("halo", format!("must be finite and ≥ 0 (got {r})"))),
            Halo::Auto => {
                let r = spec.interaction_range();
                if r.is_finite() {
                    Ok(r)
                } else {
                    Err(Error::Divergent(format!(
                        "`{}` has unbounded range; every point is deleted, so the thinned process is empty",
                        spec.f().id()
                    )))
                }
            }
        }
    }
}

/// Homogeneous Poisson process on `window`, independently marked by `mu`
/// and weighted by `nu` given the mark.
pub fn sample_poisson(
    window: &Window,
    lambda: f64,
    mu: Option<&MarkDistribution>,
    nu: Option<&WeightDistribution>,
    cfg: &SimConfig,
) -> Result<PointPattern> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", format!("must be finite and ≥ 0 (got {lambda})")));
    }
    let mut rng = stream(cfg.seed, "base", cfg.replicate_index);
    let mean = lambda * window.volume();
    let n = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::Numeric(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let dim = window.dim();
    let (lo, hi) = (window.lower(), window.upper());
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut p: Point = [0.0; 3];
        for i in 0..dim {
            p[i] = lo[i] + (hi[i] - lo[i]) * rng.random::<f64>();
        }
        points.push(p);
    }
    let marks = mu.map(|mu| (0..n).map(|_| mu.sample(&mut rng)).collect::<Vec<_>>());
    let weights = nu.map(|nu| {
        (0..n)
            .map(|i| {
                let m = marks.as_ref().map_or(1.0, |m| m[i]);
                nu.sample(m, &mut rng)
            })
            .collect::<Vec<_>>()
    });
    Ok(PointPattern::from_parts_unchecked(window.clone(), points, marks, weights))
}

#[derive(Clone, Copy)]
enum Rule {
    Mat1,
    Mat2,
}

/// MatI rule (unmarked or marked): every pair draws "y deletes x" and
/// "x deletes y" independently with probability `f`; survivors are kept
/// with probability `p0`; the result is clipped to `target`.
pub fn thin_mat1(
    base: &PointPattern,
    target: &Window,
    f: &InteractionFunction,
    p0: f64,
    cfg: &SimConfig,
) -> Result<PointPattern> {
    thin(base, target, f, p0, cfg, Rule::Mat1)
}

/// MatII rule: a point can only be deleted by a neighbour whose weight does
/// not exceed its own.
pub fn thin_mat2(
    base: &PointPattern,
    target: &Window,
    f: &InteractionFunction,
    p0: f64,
    cfg: &SimConfig,
) -> Result<PointPattern> {
    if base.weights().is_none() {
        return Err(Error::Arity("MatII thinning needs weights on the base pattern".into()));
    }
    thin(base, target, f, p0, cfg, Rule::Mat2)
}

fn thin(
    base: &PointPattern,
    target: &Window,
    f: &InteractionFunction,
    p0: f64,
    cfg: &SimConfig,
    rule: Rule,
) -> Result<PointPattern> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::invalid("p0", format!("p0 ∈ (0,1] (got {p0})")));
    }
    if target.dim() != base.dim() {
        return Err(Error::invalid("window", "target and base dimensions differ"));
    }
    if f.is_marked() && base.marks().is_none() {
        return Err(Error::Arity(format!("`{}` needs marks but the base pattern has none", f.id())));
    }
    let points = base.points();
    let marks = base.marks();
    let weights = base.weights();
    let mark = |i: usize| marks.map_or(0.0, |m| m[i]);
    let mark_hi = marks.map_or(0.0, |m| m.iter().copied().fold(0.0, f64::max));
    let range = f.max_cutoff(mark_hi);
    let key = DrawKey::new(cfg.seed, cfg.replicate_index);
    let ids: Vec<u64> = points.iter().map(point_id).collect();
    let grid = (!cfg.brute_force && range.is_finite()).then(|| {
        let w = base.window();
        CellGrid::new(points, w.lower(), w.upper(), range)
    });

    let survives = |i: usize| -> bool {
        if !target.contains(&points[i]) {
            return false;
        }
        let (xi, mi) = (&points[i], mark(i));
        let mut deleted = false;
        let mut visit = |j: usize, d2: f64| -> bool {
            if j == i {
                return true;
            }
            if let (Rule::Mat2, Some(w)) = (rule, weights) {
                if w[i] < w[j] {
                    return true;
                }
            }
            let fv = f.eval(d2.sqrt(), mi, mark(j));
            if fv > 0.0 && key.pair_uniform(ids[i], ids[j]) < fv {
                deleted = true;
                return false;
            }
            true
        };
        match &grid {
            Some(g) => g.for_each_within(xi, range, visit),
            None => {
                for (j, xj) in points.iter().enumerate() {
                    let d2 = crate::model::window::dist2(xi, xj);
                    if d2 <= range * range || !range.is_finite() {
                        if !visit(j, d2) {
                            break;
                        }
                    }
                }
            }
        }
        !deleted && (p0 >= 1.0 || key.point_uniform(ids[i]) < p0)
    };
    let keep = cfg.exec.filter_range(points.len(), survives);
    Ok(base.select_into(&keep, target.clone()))
}

/// One replicate of `spec` observed in `window`: base process on the dilated
/// window, then the variant's thinning rule.
pub fn simulate_model(spec: &ModelSpec, window: &Window, cfg: &SimConfig) -> Result<PointPattern> {
    if window.dim() != spec.dim() {
        return Err(Error::invalid(
            "window.dim",
            format!("window has dim {} but the model has dim {}", window.dim(), spec.dim()),
        ));
    }
    let halo = cfg.resolve_halo(spec)?;
    let base = sample_poisson(&window.dilate(halo), spec.lambda(), spec.mu(), spec.nu(), cfg)?;
    match spec.variant() {
        Variant::MatI | Variant::MatIMarked => thin_mat1(&base, window, spec.f(), spec.p0(), cfg),
        Variant::MatII => thin_mat2(&base, window, spec.f(), spec.p0(), cfg),
    }
}

/// Runs replicates `0..n` of `spec` and maps each through `summarize`,
/// returning the results in replicate order.
pub fn map_replicates<T, F>(
    spec: &ModelSpec,
    window: &Window,
    cfg: &SimConfig,
    n: usize,
    exec: Exec,
    summarize: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, PointPattern) -> T + Sync + Send,
{
    cfg.resolve_halo(spec)?;
    exec.map_range(n, |i| {
        let c = cfg.replicate(cfg.replicate_index + i as u64).with_exec(Exec::Sequential);
        simulate_model(spec, window, &c).map(|p| summarize(c.replicate_index, p))
    })
    .into_iter()
    .collect()
}

/// Replicates `0..n` of `spec`.
pub fn simulate_replicates(
    spec: &ModelSpec,
    window: &Window,
    cfg: &SimConfig,
    n: usize,
    exec: Exec,
) -> Result<Vec<PointPattern>> {
    map_replicates(spec, window, cfg, n, exec, |_, p| p)
}
