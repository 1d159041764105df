use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use matern_thin::analytic::{self, AnalyticOptions};
use matern_thin::model::table::linspace;
use matern_thin::model::MarkKind;
use matern_thin::{registry_make, InteractionFunction, MarkDistribution, ModelSpec, WeightDistribution};

use super::{params, quad, rel, Outcome};

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn c5() -> Outcome {
    let opts = AnalyticOptions::default();
    let spec = s(ModelSpec::mat1(0.3, 1.0, s(InteractionFunction::hard_core(1.0, 2))?))?;
    let inside = linspace(0.0, 0.999, 40);
    let g_in = s(analytic::pcf_grid(&spec, &inside, &opts))?;
    if let Some((r, g)) = inside.iter().zip(&g_in).find(|(_, g)| **g != 0.0) {
        return Err(format!("hard-core g({r}) = {g}, expected exactly 0"));
    }
    let beyond = linspace(2.0 + 1e-9, 5.0, 40);
    let g_out = s(analytic::pcf_grid(&spec, &beyond, &opts))?;
    let dev = g_out.iter().map(|g| (g - 1.0).abs()).fold(0.0, f64::max);
    if dev > 1e-12 {
        return Err(format!("hard-core max |g − 1| beyond 2R = {dev:.1e}"));
    }
    let f = s(registry_make("example2", &params(&[("a", 2.0)]), 2))?;
    let agg = s(ModelSpec::mat1(2.0, 1.0, f))?;
    let grid = linspace(0.0, 4.0, 81);
    let g = s(analytic::pcf_grid(&agg, &grid, &opts))?;
    let arg = (0..g.len()).max_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
    if arg != 0 || !(g[0] > 1.0) {
        return Err(format!("aggregative pcf maximum at r = {} (g(0) = {})", grid[arg], g[0]));
    }
    Ok(format!(
        "hard-core g ≡ 0 on [0,R), |g−1| ≤ {dev:.1e} beyond 2R; aggregative g(0) = {:.4} is the grid max",
        g[0]
    ))
}

pub fn c6() -> Outcome {
    let opts = AnalyticOptions::default();
    let r = linspace(0.05, 1.0, 20);
    let mark_sum = s(registry_make("marksum-hardcore", &BTreeMap::new(), 2))?;
    let mu = s(MarkDistribution::uniform(0.1, 0.3))?;
    let marked = |p0: f64| ModelSpec::mat1_marked(2.0, p0, mark_sum.clone(), mu.clone());
    let nu = s(WeightDistribution::new(
        matern_thin::model::WeightLaw::Uniform { lo: 0.0, hi: 1.0 },
        1.0,
    ))?;
    let mat2 = |p0: f64| ModelSpec::mat2(2.0, p0, mark_sum.clone(), mu.clone(), nu);
    let mut worst: f64 = 0.0;
    for build in [&marked as &dyn Fn(f64) -> _, &mat2] {
        let a = s(analytic::pcf_grid(&s(build(0.3))?, &r, &opts))?;
        let b = s(analytic::pcf_grid(&s(build(1.0))?, &r, &opts))?;
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs());
        }
    }
    if worst <= 1e-10 {
        Ok(format!("max |Δg| = {worst:.1e} at 20 points, marked Matérn I and Matérn II"))
    } else {
        Err(format!("max |Δg| = {worst:.1e} > 1e-10"))
    }
}

/// `∫_0^1 e^{bt} ∫_0^t e^{(a+c)s} ds dt` on composite Gauss rules.
fn j_oracle(a: f64, b: f64, c: f64) -> f64 {
    let h = a + c;
    quad::integrate(
        |t| (b * t).exp() * quad::integrate(|x| (h * x).exp(), 0.0, t, 20, 4),
        0.0,
        1.0,
        20,
        16,
    )
}

/// The full square `∫∫ e^{as + bt + c min(s,t)}`.
fn square_oracle(a: f64, b: f64, c: f64) -> f64 {
    j_oracle(a, b, c) + j_oracle(b, a, c)
}

pub fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut triples = Vec::new();
    // near-singular cases: a + c → 0, b → 0, a = b, c = 0
    for e in [0.0, 1e-14, 1e-10, 1e-6, 1e-4, 1e-3, 2e-3] {
        triples.push((-3.0, -1.5, 3.0 - e));
        triples.push((-0.7, e, 0.2));
        triples.push((-e, -e, e));
    }
    triples.push((-2.0, -2.0, 0.0));
    triples.push((0.0, 0.0, 0.0));
    while triples.len() < 100 {
        let a = -30.0 * rng.random::<f64>().powi(2);
        let b = -30.0 * rng.random::<f64>().powi(2);
        let c = rng.random::<f64>() * a.abs().min(b.abs());
        triples.push((a, b, c));
    }
    let mut worst: f64 = 0.0;
    let mut at = (0.0, 0.0, 0.0);
    for &(a, b, c) in &triples {
        let e1 = rel(analytic::j(a, b, c), j_oracle(a, b, c));
        let e2 = rel(analytic::weight_integral(a, b, c), square_oracle(a, b, c));
        if e1.max(e2) > worst {
            worst = e1.max(e2);
            at = (a, b, c);
        }
    }
    if worst <= 1e-7 {
        Ok(format!("{} triples, max rel err {worst:.1e}", triples.len()))
    } else {
        Err(format!("max rel err {worst:.1e} at (a,b,c) = {at:?}"))
    }
}

pub fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_gap = f64::INFINITY;
    for i in 0..20 {
        let lam = 0.1 + 2.9 * rng.random::<f64>();
        let p0 = 0.3 + 0.7 * rng.random::<f64>();
        let radius = 0.2 + 0.8 * rng.random::<f64>();
        let (f, mu) = match i % 5 {
            0 => (s(InteractionFunction::hard_core(radius, 2))?, None),
            1 => (
                s(registry_make("example1", &params(&[("a", radius * rng.random::<f64>()), ("R", radius)]), 2))?,
                None,
            ),
            2 => (
                s(registry_make(
                    "step-gauss",
                    &params(&[("R", radius), ("a", 1.0 + 9.0 * rng.random::<f64>()), ("b", 0.1 + rng.random::<f64>())]),
                    2,
                ))?,
                None,
            ),
            3 => (
                s(registry_make("strauss", &params(&[("f0", rng.random::<f64>()), ("R", radius)]), 2))?,
                None,
            ),
            _ => {
                let lo = 0.05 + 0.2 * rng.random::<f64>();
                (
                    s(registry_make("marksum-hardcore", &BTreeMap::new(), 2))?,
                    Some(s(MarkDistribution::new(MarkKind::Uniform { lo, hi: lo + 0.3 }, 16))?),
                )
            }
        };
        let (one, two) = match mu {
            None => (
                s(ModelSpec::mat1(lam, p0, f.clone()))?,
                s(ModelSpec::mat2(
                    lam,
                    p0,
                    f,
                    s(MarkDistribution::point_mass(0.0))?,
                    WeightDistribution::standard_uniform(),
                ))?,
            ),
            Some(mu) => (
                s(ModelSpec::mat1_marked(lam, p0, f.clone(), mu.clone()))?,
                s(ModelSpec::mat2(lam, p0, f, mu, WeightDistribution::standard_uniform()))?,
            ),
        };
        let a = s(analytic::intensity(&one))?.value;
        let b = s(analytic::intensity(&two))?.value;
        if !(b > a) {
            return Err(format!("spec {i}: Matérn II {b} ≤ Matérn I {a}"));
        }
        min_gap = min_gap.min((b - a) / a);
    }
    Ok(format!("20 specs, smallest relative gap {min_gap:.2e}"))
}
