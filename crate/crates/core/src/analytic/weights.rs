//! The weight integral `I = ∫₀¹∫₀¹ e^{a s + b t + c min(s,t)} ds dt`.

use crate::numeric::special::{exp_moment, exprel};

/// Below this `|a + c|` the divided difference in [`j`] is replaced by its series.
const SERIES_BELOW: f64 = 1e-3;

/// Contribution of the region `s < t`:
/// `J(a,b,c) = 1/(b(a+b+c)) + (e^{a+b+c}/(a+b+c) − e^b/b)/(a+c)`,
/// evaluated without its removable singularities.
pub fn j(a: f64, b: f64, c: f64) -> f64 {
    let h = a + c;
    if h.abs() >= SERIES_BELOW {
        (exprel(b + h) - exprel(b)) / h
    } else {
        // Σ_{k≥1} h^{k-1}/k! ∫₀¹ u^k e^{b u} du
        let mut sum = 0.0;
        let mut coef = 1.0;
        for k in 1..=10 {
            coef /= k as f64;
            sum += coef * exp_moment(k, b);
            coef *= h;
        }
        sum
    }
}

/// `I(a, b, c) = J(a,b,c) + J(b,a,c)`.
pub fn weight_integral(a: f64, b: f64, c: f64) -> f64 {
    j(a, b, c) + j(b, a, c)
}

/// The literal formula, for comparison away from singular points.
pub fn j_literal(a: f64, b: f64, c: f64) -> f64 {
    let s = a + b + c;
    1.0 / (b * s) + ((s).exp() / s - b.exp() / b) / (a + c)
}
