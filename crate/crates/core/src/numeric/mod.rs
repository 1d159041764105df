//! Quadrature rules and small special functions used by the analytic module.

pub mod gauss;
pub mod kronrod;
pub mod special;

pub use gauss::{gauss_legendre, GaussLegendre, Map};
pub use kronrod::{integrate, QuadOptions, QuadResult};
pub use special::unit_ball_volume;

/// Sorted, deduplicated breakpoints strictly inside `(lo, hi)`, with the
/// endpoints prepended/appended.
pub fn partition(lo: f64, hi: f64, breaks: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = breaks
        .into_iter()
        .filter(|b| b.is_finite() && *b > lo && *b < hi)
        .collect();
    pts.sort_by(f64::total_cmp);
    let scale = (hi - lo).abs().max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(lo);
    for p in pts {
        let last = *out.last().unwrap();
        if p - last > 1e-13 * scale {
            out.push(p);
        }
    }
    if hi - *out.last().unwrap() <= 1e-13 * scale && out.len() > 1 {
        out.pop();
    }
    out.push(hi);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_filters_and_sorts() {
        assert_eq!(partition(0.0, 3.0, [2.0, 5.0, 1.0, -1.0, 1.0]), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(partition(0.0, 1.0, [1.0, 0.0]), vec![0.0, 1.0]);
        assert_eq!(partition(0.0, 1.0, [1.0 - 1e-16]), vec![0.0, 1.0]);
    }
}
