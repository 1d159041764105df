//! Adaptive Gauss–Kronrod (7/15) integration with user breakpoints.

use std::collections::BinaryHeap;

use super::partition;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Integrates `f` over `[a, b]`, splitting first at `breaks`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> QuadResult {
    if b <= a {
        return QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            converged: true,
        };
    }
    let edges = partition(a, b, breaks.iter().copied());
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    let (mut total, mut err) = (0.0, 0.0);
    for e in edges.windows(2) {
        let (v, er) = kronrod15(&mut f, e[0], e[1]);
        evaluations += 15;
        total += v;
        err += er;
        heap.push(Panel {
            a: e[0],
            b: e[1],
            value: v,
            error: er,
        });
    }
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) && heap.len() < opts.max_intervals {
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod15(&mut f, worst.a, mid);
        let (v2, e2) = kronrod15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed accumulated rounding from the running updates
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    QuadResult {
        value,
        error,
        evaluations,
        converged: error <= opts.abs_tol.max(opts.rel_tol * value.abs()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_integrand() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, &[], QuadOptions::default());
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!(r.converged);
    }

    #[test]
    fn breakpoint_makes_step_exact() {
        let step = |x: f64| if x <= 0.3 { 1.0 } else { 0.0 };
        let r = integrate(step, 0.0, 1.0, &[0.3], QuadOptions::default());
        assert!((r.value - 0.3).abs() < 1e-15);
        assert!(r.evaluations <= 30);
    }

    #[test]
    fn adapts_to_a_peak() {
        let f = |x: f64| 1.0 / (1e-4 + (x - 0.37).powi(2));
        let exact = ((0.63f64 / 1e-2).atan() + (0.37f64 / 1e-2).atan()) / 1e-2;
        let r = integrate(f, 0.0, 1.0, &[], QuadOptions::default());
        assert!(((r.value - exact) / exact).abs() < 1e-9, "{} vs {exact}", r.value);
    }

    #[test]
    fn empty_interval_is_zero() {
        let r = integrate(|_| 1.0, 1.0, 1.0, &[], QuadOptions::default());
        assert_eq!(r.value, 0.0);
    }
}
