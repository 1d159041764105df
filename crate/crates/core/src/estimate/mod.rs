//! Nonparametric summary statistics of an observed pattern.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::CellGrid;
use crate::model::table::{uniform_grid, Provenance, Statistic, SummaryTable};
use crate::model::{Point, PointPattern, Window};
use crate::numeric::special::unit_sphere_area;
use crate::numeric::unit_ball_volume;
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `c / λ̂^{1/d}` with `c` = 0.1, 0.15, 0.26 for d = 1, 2, 3.
    #[default]
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EdgeCorrection {
    #[default]
    Translation,
    Border,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    #[serde(default)]
    pub bandwidth: Bandwidth,
    pub r_max: f64,
    pub n_points: usize,
    /// Correction for K and L; the pcf always uses translation weights and
    /// G and F always use minus-sampling.
    #[serde(default)]
    pub edge_correction: EdgeCorrection,
    /// Lattice points per axis for the empty-space function.
    #[serde(default = "default_test_points")]
    pub f_test_points: usize,
    #[serde(default = "sequential")]
    pub exec: Exec,
}

fn default_test_points() -> usize {
    100
}

fn sequential() -> Exec {
    Exec::Sequential
}

impl EstimatorConfig {
    pub fn new(r_max: f64, n_points: usize) -> Self {
        Self {
            bandwidth: Bandwidth::Auto,
            r_max,
            n_points,
            edge_correction: EdgeCorrection::Translation,
            f_test_points: default_test_points(),
            exec: Exec::Sequential,
        }
    }

    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth = Bandwidth::Fixed(h);
        self
    }

    pub fn with_edge_correction(mut self, e: EdgeCorrection) -> Self {
        self.edge_correction = e;
        self
    }

    pub fn with_test_points(mut self, n: usize) -> Self {
        self.f_test_points = n;
        self
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.r_max, self.n_points)
    }

    /// Checks the grid against the window: `r_max` must stay below half the shortest side.
    pub fn validate(&self, window: &Window) -> Result<()> {
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::invalid("r_max", "must be finite and > 0"));
        }
        if self.n_points < 2 {
            return Err(Error::invalid("grid", "need at least 2 grid points"));
        }
        let half = 0.5 * window.min_side();
        if self.r_max >= half {
            return Err(Error::invalid(
                "r_max",
                format!("r_max = {} must be below half the shortest window side ({half})", self.r_max),
            ));
        }
        if let Bandwidth::Fixed(h) = self.bandwidth {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::invalid("bandwidth", "must be finite and > 0"));
            }
        }
        if self.f_test_points < 2 {
            return Err(Error::invalid("f_test_points", "need at least 2 per axis"));
        }
        Ok(())
    }

    /// Resolved kernel half-width for `pattern`.
    pub fn bandwidth_for(&self, pattern: &PointPattern) -> Result<f64> {
        match self.bandwidth {
            Bandwidth::Fixed(h) => Ok(h),
            Bandwidth::Auto => default_bandwidth(pattern.dim(), estimate_intensity(pattern)),
        }
    }
}

/// Rule-of-thumb bandwidth for intensity `lambda` in dimension `dim`.
pub fn default_bandwidth(dim: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("bandwidth", "automatic bandwidth needs a non-empty pattern"));
    }
    let c = match dim {
        1 => 0.1,
        2 => 0.15,
        _ => 0.26,
    };
    Ok(c / lambda.powf(1.0 / dim as f64))
}

/// `n / |W|`.
pub fn estimate_intensity(pattern: &PointPattern) -> f64 {
    pattern.intensity()
}

/// Calls `visit(i, j, distance, displacement)` for every ordered pair `i ≠ j` at distance ≤ `r`.
fn for_each_pair(pattern: &PointPattern, r: f64, mut visit: impl FnMut(usize, usize, f64, Point)) {
    let pts = pattern.points();
    let w = pattern.window();
    let grid = CellGrid::new(pts, w.lower(), w.upper(), r);
    for (i, x) in pts.iter().enumerate() {
        grid.for_each_within(x, r, |j, d2| {
            if j != i {
                let y = &pts[j];
                visit(i, j, d2.sqrt(), [x[0] - y[0], x[1] - y[1], x[2] - y[2]]);
            }
            true
        });
    }
}

fn need_pairs(pattern: &PointPattern) -> Result<()> {
    if pattern.len() < 2 {
        Err(Error::invalid("pattern", format!("need at least 2 points (got {})", pattern.len())))
    } else {
        Ok(())
    }
}

/// `n(n−1)/|W|²`, the unbiased estimate of `λ²` under a Poisson count.
fn lambda2(pattern: &PointPattern) -> f64 {
    let n = pattern.len() as f64;
    let v = pattern.window().volume();
    n * (n - 1.0) / (v * v)
}

/// Kernel estimate of the pair correlation function with Epanechnikov
/// kernel and translation weights; NaN where `r ≤ h`.
pub fn estimate_pcf(pattern: &PointPattern, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    cfg.validate(pattern.window())?;
    let h = cfg.bandwidth_for(pattern)?;
    let r = cfg.grid();
    let values = pcf_at(pattern, &r, h)?;
    SummaryTable::new(Statistic::Pcf, Provenance::Empirical, r, values)
}

/// The kernel pcf estimate at arbitrary increasing distances `r` with half-width `h`.
pub fn pcf_at(pattern: &PointPattern, r: &[f64], h: f64) -> Result<Vec<f64>> {
    need_pairs(pattern)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("bandwidth", "must be finite and > 0"));
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("r", "grid must be strictly increasing"));
    }
    let Some(&top) = r.last() else {
        return Ok(Vec::new());
    };
    let d = pattern.dim();
    let w = pattern.window();
    let mut acc = vec![0.0; r.len()];
    for_each_pair(pattern, top + h, |_, _, dist, z| {
        let weight = 1.0 / w.overlap_volume(&z);
        let lo = r.partition_point(|&x| x <= dist - h);
        for k in lo..r.len() {
            let t = (r[k] - dist) / h;
            if t >= 1.0 {
                break;
            }
            acc[k] += 0.75 / h * (1.0 - t * t) * weight;
        }
    });
    let norm = unit_sphere_area(d) * lambda2(pattern);
    Ok(r.iter()
        .zip(&acc)
        .map(|(&rk, &a)| if rk <= h { f64::NAN } else { a / (norm * rk.powi(d as i32 - 1)) })
        .collect())
}

/// Ratio-unbiased pair density per distance bin `[edges[k], edges[k+1])`:
/// translation-weighted pair counts over `λ² |shell|`. With `lambda` given,
/// the expectation is exactly the shell average of `g`.
pub fn binned_pcf(pattern: &PointPattern, edges: &[f64], lambda: Option<f64>) -> Result<Vec<f64>> {
    if edges.len() < 2 || edges.windows(2).any(|e| !(e[1] > e[0])) || edges[0] < 0.0 {
        return Err(Error::invalid("edges", "need an increasing list of at least two non-negative edges"));
    }
    let top = *edges.last().expect("non-empty");
    if top >= 0.5 * pattern.window().min_side() {
        return Err(Error::invalid("edges", "last edge must be below half the shortest window side"));
    }
    let l2 = match lambda {
        Some(l) => l * l,
        None => {
            need_pairs(pattern)?;
            lambda2(pattern)
        }
    };
    let w = pattern.window();
    let d = pattern.dim() as i32;
    let mut acc = vec![0.0; edges.len() - 1];
    for_each_pair(pattern, top, |_, _, dist, z| {
        if dist < edges[0] || dist >= top {
            return;
        }
        let k = edges.partition_point(|&e| e <= dist) - 1;
        acc[k] += 1.0 / w.overlap_volume(&z);
    });
    let b = unit_ball_volume(pattern.dim());
    Ok(acc
        .iter()
        .zip(edges.windows(2))
        .map(|(a, e)| a / (l2 * b * (e[1].powi(d) - e[0].powi(d))))
        .collect())
}

/// Ripley's K with the configured edge correction; identically 0 below 2 points.
pub fn estimate_k(pattern: &PointPattern, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    cfg.validate(pattern.window())?;
    let r = cfg.grid();
    if pattern.len() < 2 {
        let zeros = vec![0.0; r.len()];
        return SummaryTable::new(Statistic::K, Provenance::Empirical, r, zeros);
    }
    let w = pattern.window();
    let dr = r[1] - r[0];
    let bin = |dist: f64| ((dist / dr).ceil() as usize).min(r.len());
    let mut inc = vec![0.0; r.len() + 1];
    let values = match cfg.edge_correction {
        EdgeCorrection::Translation => {
            for_each_pair(pattern, cfg.r_max, |_, _, dist, z| inc[bin(dist)] += 1.0 / w.overlap_volume(&z));
            let scale = 1.0 / lambda2(pattern);
            cumulative(&inc[..r.len()]).into_iter().map(|v| v * scale).collect()
        }
        EdgeCorrection::Border => {
            // reduced sample: centres at least r from the boundary
            let b: Vec<f64> = pattern.points().iter().map(|p| w.boundary_distance(p)).collect();
            let mut near: Vec<Vec<f64>> = vec![Vec::new(); pattern.len()];
            for_each_pair(pattern, cfg.r_max, |i, _, dist, _| near[i].push(dist));
            for v in &mut near {
                v.sort_by(f64::total_cmp);
            }
            let lam = estimate_intensity(pattern);
            r.iter()
                .map(|&rk| {
                    let (mut centres, mut pairs) = (0usize, 0usize);
                    for (bi, v) in b.iter().zip(&near) {
                        if *bi >= rk {
                            centres += 1;
                            pairs += v.partition_point(|&x| x <= rk);
                        }
                    }
                    if centres == 0 {
                        f64::NAN
                    } else {
                        pairs as f64 / (lam * centres as f64)
                    }
                })
                .collect()
        }
    };
    SummaryTable::new(Statistic::K, Provenance::Empirical, r, values)
}

fn cumulative(v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    v.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

/// `L(r) = (K(r)/b_d)^{1/d}`.
pub fn estimate_l(pattern: &PointPattern, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    let k = estimate_k(pattern, cfg)?;
    let d = pattern.dim();
    let b = unit_ball_volume(d);
    let values = k.values.iter().map(|v| (v.max(0.0) / b).powf(1.0 / d as f64)).collect();
    SummaryTable::new(Statistic::L, Provenance::Empirical, k.r, values)
}

/// Nearest-neighbour distance distribution, minus-sampling on `W ⊖ r_max`.
pub fn estimate_g(pattern: &PointPattern, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    cfg.validate(pattern.window())?;
    if pattern.is_empty() {
        return Err(Error::invalid("pattern", "G needs a non-empty pattern"));
    }
    let w = pattern.window();
    let inner = w.erode(cfg.r_max).expect("validated r_max");
    let pts = pattern.points();
    let grid = CellGrid::new(pts, w.lower(), w.upper(), cfg.r_max);
    let nn: Vec<Option<f64>> = cfg.exec.map_range(pts.len(), |i| {
        if !inner.contains(&pts[i]) {
            return None;
        }
        Some(grid.nearest_within(&pts[i], cfg.r_max, Some(i)).map_or(f64::INFINITY, |(_, d)| d))
    });
    let dists: Vec<f64> = nn.into_iter().flatten().collect();
    Ok(ecdf(Statistic::G, cfg, dists))
}

/// Empty-space function from a lattice of test locations in `W ⊖ r_max`.
pub fn estimate_f(pattern: &PointPattern, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    cfg.validate(pattern.window())?;
    let w = pattern.window();
    let inner = w.erode(cfg.r_max).expect("validated r_max");
    let pts = pattern.points();
    let grid = CellGrid::new(pts, w.lower(), w.upper(), cfg.r_max);
    let k = cfg.f_test_points;
    let d = w.dim();
    let total = k.pow(d as u32);
    let dists = cfg.exec.map_range(total, |idx| {
        let mut p: Point = [0.0; 3];
        let mut rest = idx;
        for a in 0..d {
            let c = rest % k;
            rest /= k;
            p[a] = inner.lower()[a] + (c as f64 + 0.5) * inner.side(a) / k as f64;
        }
        grid.nearest_within(&p, cfg.r_max, None).map_or(f64::INFINITY, |(_, d)| d)
    });
    Ok(ecdf(Statistic::F, cfg, dists))
}

fn ecdf(stat: Statistic, cfg: &EstimatorConfig, mut dists: Vec<f64>) -> SummaryTable {
    let r = cfg.grid();
    dists.sort_by(f64::total_cmp);
    let n = dists.len();
    let values = r
        .iter()
        .map(|&rk| {
            if n == 0 {
                f64::NAN
            } else {
                dists.partition_point(|&x| x <= rk) as f64 / n as f64
            }
        })
        .collect();
    SummaryTable::new(stat, Provenance::Empirical, r, values).expect("grid is increasing")
}

/// Empirical density of the marks on a grid over `[lo, hi]`, by an
/// Epanechnikov kernel with half-width `h`.
pub fn estimate_mark_pdf(pattern: &PointPattern, lo: f64, hi: f64, n: usize, h: f64) -> Result<SummaryTable> {
    let marks = pattern
        .marks()
        .ok_or_else(|| Error::invalid("pattern.marks", "mark density needs a marked pattern"))?;
    if !(hi > lo) || n < 2 || !(h > 0.0) {
        return Err(Error::invalid("grid", "need lo < hi, n ≥ 2 and h > 0"));
    }
    let r = crate::model::table::linspace(lo, hi, n);
    let m = marks.len().max(1) as f64;
    let values = r
        .iter()
        .map(|&x| {
            marks
                .iter()
                .map(|&v| {
                    let t = (x - v) / h;
                    if t.abs() < 1.0 {
                        0.75 / h * (1.0 - t * t)
                    } else {
                        0.0
                    }
                })
                .sum::<f64>()
                / m
        })
        .collect();
    SummaryTable::new(Statistic::MarkPdf, Provenance::Empirical, r, values)
}

/// Dispatch by statistic (mark density excluded).
pub fn estimate(pattern: &PointPattern, stat: Statistic, cfg: &EstimatorConfig) -> Result<SummaryTable> {
    match stat {
        Statistic::Pcf => estimate_pcf(pattern, cfg),
        Statistic::K => estimate_k(pattern, cfg),
        Statistic::L => estimate_l(pattern, cfg),
        Statistic::G => estimate_g(pattern, cfg),
        Statistic::F => estimate_f(pattern, cfg),
        Statistic::Intensity => {
            let r = cfg.grid();
            let v = vec![estimate_intensity(pattern); r.len()];
            SummaryTable::new(Statistic::Intensity, Provenance::Empirical, r, v)
        }
        Statistic::MarkPdf => Err(Error::invalid("stat", "use estimate_mark_pdf for mark densities")),
    }
}
