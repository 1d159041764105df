//! Monte Carlo replicates against the analytic intensity and pcf.

use std::collections::BTreeMap;

use matern_thin::analytic::{self, AnalyticOptions};
use matern_thin::estimate::{binned_pcf, default_bandwidth};
use matern_thin::model::table::linspace;
use matern_thin::model::{MarkKind, Window};
use matern_thin::par::Exec;
use matern_thin::simulate::{map_replicates, SimConfig};
use matern_thin::{registry_make, InteractionFunction, MarkDistribution, ModelSpec, WeightDistribution};

use super::{params, quad, Outcome};

const REPLICATES: usize = 10_000;
const BINS: usize = 10;
const SEED: u64 = 20_240_404;

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

struct Case {
    name: &'static str,
    spec: ModelSpec,
    /// Distances where the pcf jumps or kinks.
    breaks: Vec<f64>,
}

fn cases() -> Result<Vec<Case>, String> {
    let mark_sum = s(registry_make("marksum-hardcore", &BTreeMap::new(), 2))?;
    let gamma = s(MarkDistribution::new(
        MarkKind::TruncatedGamma {
            shape: 4.0,
            scale: 0.05,
            cap: None,
        },
        16,
    ))?;
    Ok(vec![
        Case {
            name: "hard-core",
            spec: s(ModelSpec::mat1(0.3, 1.0, s(InteractionFunction::hard_core(1.0, 2))?))?,
            breaks: vec![1.0, 2.0],
        },
        Case {
            name: "soft-core",
            spec: s(ModelSpec::mat1(
                0.2,
                1.0,
                s(registry_make("example1", &params(&[("a", 0.5), ("R", 1.0)]), 2))?,
            ))?,
            breaks: vec![0.5, 1.0, 1.5, 2.0],
        },
        Case {
            name: "aggregative",
            spec: s(ModelSpec::mat1(0.2, 1.0, s(registry_make("example2", &params(&[("a", 2.0)]), 2))?))?,
            breaks: vec![],
        },
        Case {
            name: "marked mark-sum hard-core",
            spec: s(ModelSpec::mat1_marked(0.5, 1.0, mark_sum.clone(), s(MarkDistribution::uniform(0.25, 0.5))?))?,
            breaks: vec![0.5, 0.75, 1.0],
        },
        Case {
            name: "classic Matérn II",
            spec: s(ModelSpec::mat2(
                1.0,
                1.0,
                mark_sum,
                s(MarkDistribution::point_mass(0.5))?,
                WeightDistribution::standard_uniform(),
            ))?,
            breaks: vec![1.0, 2.0],
        },
        Case {
            name: "Matérn II, gamma marks, f_c",
            spec: s(ModelSpec::mat2(
                1.0,
                1.0,
                s(registry_make("fc", &params(&[("c", 50.0)]), 2))?,
                gamma,
                WeightDistribution::standard_uniform(),
            ))?,
            breaks: vec![],
        },
    ])
}

/// `∫_{e0}^{e1} g(r) r dr / ((e1² − e0²)/2)`, split at the pcf's breaks.
fn shell_means(spec: &ModelSpec, edges: &[f64], breaks: &[f64]) -> Result<Vec<f64>, String> {
    let rule = quad::nodes(8);
    let mut xs = Vec::new();
    let mut owner = Vec::new();
    for (k, e) in edges.windows(2).enumerate() {
        let mut cuts = vec![e[0]];
        cuts.extend(breaks.iter().copied().filter(|&b| b > e[0] && b < e[1]));
        cuts.push(e[1]);
        for p in cuts.windows(2) {
            let (c, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            for (x, w) in &rule {
                xs.push((c + h * x, w * h));
                owner.push(k);
            }
        }
    }
    let r: Vec<f64> = xs.iter().map(|x| x.0).collect();
    let g = s(analytic::pcf_grid(spec, &r, &AnalyticOptions::default()))?;
    let mut out = vec![0.0; edges.len() - 1];
    for ((&(x, w), gi), &k) in xs.iter().zip(&g).zip(&owner) {
        out[k] += w * gi * x;
    }
    for (o, e) in out.iter_mut().zip(edges.windows(2)) {
        *o /= 0.5 * (e[1] * e[1] - e[0] * e[0]);
    }
    Ok(out)
}

/// Standardised difference; a zero SE demands exact agreement.
fn z_score(m: f64, se: f64, want: f64) -> f64 {
    if se > 0.0 {
        (m - want) / se
    } else if (m - want).abs() <= 1e-12 * want.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}

fn mean_se(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check(case: &Case, seed: u64) -> Result<String, String> {
    let spec = &case.spec;
    let r_cut = spec.interaction_range();
    let window = s(Window::cube(2, 20.0 * r_cut))?;
    let lam = s(analytic::intensity(spec))?.value;
    let h = s(default_bandwidth(2, lam))?;
    let edges = linspace(h, 3.0 * r_cut, BINS + 1);
    let area = window.volume();
    let reps = s(map_replicates(
        spec,
        &window,
        &SimConfig::new(seed),
        REPLICATES,
        Exec::default(),
        |_, p| binned_pcf(&p, &edges, Some(lam)).map(|g| (p.len() as f64 / area, g)),
    ))?;
    let reps: Vec<(f64, Vec<f64>)> = s(reps.into_iter().collect())?;

    let (m, se) = mean_se(reps.iter().map(|r| r.0));
    let z_int = z_score(m, se, lam);
    if z_int.abs() > 3.0 {
        return Err(format!("{}: intensity {m:.6} vs {lam:.6} ({z_int:+.2} SE)", case.name));
    }
    let want = shell_means(spec, &edges, &case.breaks)?;
    let mut worst: f64 = 0.0;
    for (k, w) in want.iter().enumerate() {
        let (m, se) = mean_se(reps.iter().map(|r| r.1[k]));
        let z = z_score(m, se, *w);
        if z.abs() > 3.0 {
            return Err(format!(
                "{}: pcf bin [{:.3}, {:.3}) {m:.5} vs {w:.5} ({z:+.2} SE)",
                case.name,
                edges[k],
                edges[k + 1]
            ));
        }
        worst = worst.max(z.abs());
    }
    Ok(format!("{} |z| ≤ {:.2}/{:.2}", case.name, z_int.abs(), worst))
}

pub fn c4() -> Outcome {
    let mut lines = Vec::new();
    for (i, case) in cases()?.iter().enumerate() {
        lines.push(check(case, SEED + i as u64)?);
    }
    Ok(format!("{REPLICATES} replicates each, intensity/pcf: {}", lines.join("; ")))
}
