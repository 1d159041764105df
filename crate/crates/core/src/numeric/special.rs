use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Volume `b_d = pi^{d/2} / Gamma(d/2 + 1)` of the unit ball in `R^d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => PI.powf(dim as f64 / 2.0) / gamma(dim as f64 / 2.0 + 1.0),
    }
}

/// Surface factor `d * b_d` (area of the unit sphere).
pub fn unit_sphere_area(dim: usize) -> f64 {
    dim as f64 * unit_ball_volume(dim)
}

/// `(e^x - 1) / x`, continuous at 0.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-5 {
        1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        x.exp_m1() / x
    }
}

/// `int_0^1 u^k e^{b u} du` for small `k`, stable for all real `b`.
pub fn exp_moment(k: usize, b: f64) -> f64 {
    if b.abs() <= 1.0 {
        // power series; terms shrink like 1/j!
        let mut sum = 0.0;
        let mut term = 1.0; // b^j / j!
        for j in 0..40 {
            let t = term / (k + j + 1) as f64;
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
            term *= b / (j + 1) as f64;
        }
        sum
    } else {
        // forward recurrence M_k = (e^b - k M_{k-1}) / b, stable for |b| > 1 and small k
        let eb = b.exp();
        let mut m = b.exp_m1() / b;
        for j in 1..=k {
            m = (eb - j as f64 * m) / b;
        }
        m
    }
}
