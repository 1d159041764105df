use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Change of variables applied when mapping a rule onto `[a, b]`.
///
/// `Cosine` uses `x = a + (b-a)(1 - cos(pi t))/2`, which clusters nodes at
/// both ends and removes square-root endpoint singularities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Map {
    Linear,
    Cosine,
}

impl GaussLegendre {
    /// Computes the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64, map: Map) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| match map {
                Map::Linear => (a + 0.5 * h * (t + 1.0), 0.5 * h * w),
                Map::Cosine => {
                    let u = 0.5 * (t + 1.0);
                    let x = a + 0.5 * h * (1.0 - (PI * u).cos());
                    (x, 0.5 * w * 0.5 * h * PI * (PI * u).sin())
                }
            })
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, map: Map, mut f: F) -> f64 {
        self.mapped(a, b, map).map(|(x, w)| w * f(x)).sum()
    }

    /// Integrates over consecutive pieces of `edges`.
    pub fn integrate_pieces<F: FnMut(f64) -> f64>(&self, edges: &[f64], map: Map, mut f: F) -> f64 {
        edges
            .windows(2)
            .map(|e| self.integrate(e[0], e[1], map, &mut f))
            .sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared, cached rule with `n` nodes.
pub fn gauss_legendre(n: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| Arc::new(GaussLegendre::new(n)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64, 128] {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            let deg = 2 * n - 1;
            let v = rule.integrate(0.0, 1.0, Map::Linear, |x| x.powi(deg as i32));
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn cosine_map_handles_sqrt_endpoint() {
        let rule = GaussLegendre::new(32);
        let v = rule.integrate(0.0, 1.0, Map::Cosine, |x| (x * (1.0 - x)).sqrt());
        assert!((v - PI / 8.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let r = GaussLegendre::new(7);
        for w in r.nodes.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..7 {
            assert!((r.nodes[i] + r.nodes[6 - i]).abs() < 1e-15);
        }
    }
}
