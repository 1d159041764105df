use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::*;
use crate::model::{registry_make, MarkDistribution, MarkKind, WeightDistribution, WeightLaw};

fn make(id: &str, kv: &[(&str, f64)], dim: usize) -> InteractionFunction {
    let p: BTreeMap<String, f64> = kv.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    registry_make(id, &p, dim).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn trapezoid(f: impl Fn(f64) -> f64, hi: f64, panels: usize) -> f64 {
    let h = hi / panels as f64;
    let mut s = 0.5 * (f(0.0) + f(hi));
    for i in 1..panels {
        s += f(i as f64 * h);
    }
    s * h
}

#[test]
fn tail_of_indicator_and_soft_core() {
    let hc = InteractionFunction::hard_core(1.3, 2).unwrap();
    assert!(rel(tail_integral(&hc, 0.0, 0.0).unwrap(), 1.3 * 1.3 / 2.0) < 1e-15);
    for a in [0.0, 0.4, 0.9, 1.0] {
        let f = make("example1", &[("a", a), ("R", 1.0)], 2);
        assert!(rel(tail_integral(&f, 0.0, 0.0).unwrap(), 0.5) < 1e-9, "a = {a}");
    }
}

#[test]
fn tail_of_aggregative_matches_trapezoid() {
    for (a, d) in [(2.0, 2), (0.5, 2), (8.0, 3), (1.0, 1)] {
        let f = make("example2", &[("a", a)], d);
        let oracle = trapezoid(|r| f.eval(r, 0.0, 0.0) * r.powi(d as i32 - 1), 12.0, 1_000_000);
        let got = tail_integral(&f, 0.0, 0.0).unwrap();
        assert!(rel(got, oracle) < 1e-8, "a={a} d={d}: {got} vs {oracle}");
    }
}

#[test]
fn tail_of_step_gauss_and_fc() {
    let (r0, a, b) = (0.6, 6.3, 0.1);
    let f = make("step-gauss", &[("R", r0), ("a", a), ("b", b)], 2);
    let want = r0 * r0 / 2.0 + (b / 2.0 + r0 * (PI * b).sqrt() / 2.0) / a;
    assert!(rel(tail_integral(&f, 0.0, 0.0).unwrap(), want) < 1e-9);
    for d in 1..=3 {
        let fc = make("fc", &[("c", 3.0)], d);
        let (m, n) = (0.2, 0.35);
        let closed = tail_integral(&fc, m, n).unwrap();
        let oracle = trapezoid(|r| fc.eval(r, m, n) * r.powi(d as i32 - 1), 20.0, 2_000_000);
        assert!(rel(closed, oracle) < 1e-8, "d={d}: {closed} vs {oracle}");
    }
}

#[test]
fn non_integrable_constant_diverges() {
    let f = make("constant", &[("c", 0.5)], 2);
    assert!(matches!(tail_integral(&f, 0.0, 0.0), Err(Error::Divergent(_))));
    let spec = ModelSpec::mat1(1.0, 1.0, f).unwrap();
    let i = intensity_mat1(&spec).unwrap();
    assert_eq!(i.value, 0.0);
    assert_eq!(i.diagnostic.unwrap().code, "divergent");
}

#[test]
fn convolution_of_indicators() {
    let f = InteractionFunction::hard_core(1.0, 2).unwrap();
    let p = Profile::unmarked(&f);
    let numeric = ConvOptions {
        method: ConvMethod::Numeric,
        ..ConvOptions::default()
    };
    let at0 = radial_self_convolution(p, p, 0.0, &numeric).unwrap();
    assert!(rel(at0, PI) < 1e-8);
    // circle-intersection oracle
    let lens = 2.0 * (0.5f64).acos() - 0.5 * 3f64.sqrt();
    let got = radial_self_convolution(p, p, 1.0, &numeric).unwrap();
    assert!(rel(got, lens) < 1e-8, "{got} vs {lens}");
    assert!(rel(ball_intersection(2, 1.0, 1.0, 1.0), 2.0 * PI / 3.0 - 3f64.sqrt() / 2.0) < 1e-14);
    assert_eq!(radial_self_convolution(p, p, 2.5, &numeric).unwrap(), 0.0);
    for d in [1, 3] {
        let f = InteractionFunction::hard_core(0.7, d).unwrap();
        let p = Profile::unmarked(&f);
        for r in [0.1, 0.5, 0.9, 1.3] {
            let got = radial_self_convolution(p, p, r, &numeric).unwrap();
            let want = ball_intersection(d, 0.7, 0.7, r);
            assert!(rel(got, want) < 1e-8, "d={d} r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn convolution_of_gaussians() {
    // ∫ e^{-|x|²} e^{-|x-y|²} dx = (π/2)^{d/2} e^{-|y|²/2}
    for d in 1..=3 {
        let f = make("example1", &[("a", 0.0), ("R", 1.0)], d);
        let p = Profile::unmarked(&f);
        for r in [0.0, 0.3, 1.0, 2.5] {
            let got = radial_self_convolution(p, p, r, &ConvOptions::default()).unwrap();
            let want = (PI / 2.0).powf(d as f64 / 2.0) * (-r * r / 2.0).exp();
            assert!((got - want).abs() < 1e-8 * want.max(1e-3), "d={d} r={r}: {got} vs {want}");
        }
    }
}

#[test]
fn fast_rule_tracks_checked_rule() {
    let cases = [
        make("example1", &[("a", 0.5), ("R", 1.0)], 2),
        make("example2", &[("a", 2.0)], 2),
        make("step-gauss", &[("R", 1.0), ("a", 6.3), ("b", 1.06)], 2),
        make("example1", &[("a", 0.3), ("R", 0.8)], 3),
    ];
    for f in &cases {
        let p = Profile::unmarked(f);
        for r in [0.1, 0.5, 1.0, 1.7, 3.0] {
            let fast = radial_self_convolution(p, p, r, &ConvOptions::fast(32)).unwrap();
            let checked = radial_self_convolution(p, p, r, &ConvOptions::default()).unwrap();
            assert!((fast - checked).abs() < 1e-7 * checked.max(1e-3), "{} r={r}: {fast} vs {checked}", f.id());
        }
    }
}

#[test]
fn convolution_of_unequal_mark_sum_profiles() {
    let f = make("marksum-hardcore", &[], 2);
    let numeric = ConvOptions {
        method: ConvMethod::Numeric,
        ..ConvOptions::default()
    };
    for r in [0.05, 0.3, 0.6, 0.79] {
        let got = radial_self_convolution(Profile::new(&f, 0.1, 0.2), Profile::new(&f, 0.3, 0.2), r, &numeric).unwrap();
        let want = ball_intersection(2, 0.3, 0.5, r);
        assert!(rel(got, want) < 1e-8, "r={r}: {got} vs {want}");
    }
}

#[test]
fn example_intensities() {
    let want = 0.5 * (-PI / 2.0).exp();
    for a in [0.0, 0.5, 0.75, 1.0] {
        let spec = ModelSpec::mat1(0.5, 1.0, make("example1", &[("a", a), ("R", 1.0)], 2)).unwrap();
        assert!(rel(intensity_mat1(&spec).unwrap().value, want) < 1e-9);
    }
    let spec = ModelSpec::mat1(3.0, 0.4, InteractionFunction::zero(2)).unwrap();
    assert!(rel(intensity_mat1(&spec).unwrap().value, 1.2) < 1e-15);
}

#[test]
fn hard_core_pcf_structure() {
    let spec = ModelSpec::mat1(0.8, 1.0, InteractionFunction::hard_core(1.0, 2).unwrap()).unwrap();
    for r in [0.0, 0.3, 0.99] {
        assert_eq!(pcf_mat1(&spec, r).unwrap(), 0.0);
    }
    for r in [2.0, 2.5, 5.0] {
        assert!((pcf_mat1(&spec, r).unwrap() - 1.0).abs() < 1e-12);
    }
    let g = pcf_mat1(&spec, 1.5).unwrap();
    let want = (0.8 * ball_intersection(2, 1.0, 1.0, 1.5)).exp();
    assert!(rel(g, want) < 1e-12);
}

#[test]
fn marked_collapses_to_unmarked() {
    let rp = 0.4;
    let mu = MarkDistribution::point_mass(rp).unwrap();
    let marked = ModelSpec::mat1_marked(0.7, 0.9, make("marksum-hardcore", &[], 2), mu).unwrap();
    let plain = ModelSpec::mat1(0.7, 0.9, InteractionFunction::hard_core(2.0 * rp, 2).unwrap()).unwrap();
    let a = intensity_marked(&marked).unwrap().value;
    let b = intensity_mat1(&plain).unwrap().value;
    assert!(rel(a, b) < 1e-14);
    assert!(rel(a, 0.7 * 0.9 * (-0.7 * PI * (2.0 * rp).powi(2)).exp()) < 1e-14);
    for r in [0.5, 0.9, 1.2, 1.7] {
        let (x, y) = (pcf_marked(&marked, r).unwrap(), pcf_mat1(&plain, r).unwrap());
        assert!((x - y).abs() < 1e-10, "r={r}: {x} vs {y}");
    }

    // mark-free f with a continuous mark law
    let f = make("example1", &[("a", 0.2), ("R", 0.6)], 2);
    let mu = MarkDistribution::uniform(0.1, 0.5).unwrap();
    let marked = ModelSpec::mat1_marked(1.1, 0.8, f.clone(), mu).unwrap();
    let plain = ModelSpec::mat1(1.1, 0.8, f).unwrap();
    assert!(rel(intensity_marked(&marked).unwrap().value, intensity_mat1(&plain).unwrap().value) < 1e-14);
    for r in [0.1, 0.5, 1.0] {
        assert!(rel(pcf_marked(&marked, r).unwrap(), pcf_mat1(&plain, r).unwrap()) < 1e-12);
    }
}

#[test]
fn marked_hard_core_intensity_matches_direct_formula() {
    // λ ∫ exp(−λ b_d ∫ (l+m)^d μ(dl)) μ(dm) for μ uniform on [u0,u1], by nested Simpson
    let (lam, u0, u1) = (1.5, 0.1, 0.3);
    let mu = MarkDistribution::uniform(u0, u1).unwrap();
    let spec = ModelSpec::mat1_marked(lam, 1.0, make("marksum-hardcore", &[], 2), mu).unwrap();
    let inner = |m: f64| ((m + u1).powi(3) - (m + u0).powi(3)) / 3.0 / (u1 - u0);
    let n = 2000;
    let h = (u1 - u0) / n as f64;
    let mut s = 0.0;
    for i in 0..=n {
        let m = u0 + i as f64 * h;
        let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * (-lam * PI * inner(m)).exp();
    }
    let want = lam * s * h / 3.0 / (u1 - u0);
    assert!(rel(intensity_marked(&spec).unwrap().value, want) < 1e-10);
}

#[test]
fn classic_mat2_intensity() {
    for (d, lam, r0) in [(2, 1.0, 0.5), (3, 2.0, 0.4)] {
        let mu = MarkDistribution::point_mass(r0 / 2.0).unwrap();
        let spec = ModelSpec::mat2(lam, 1.0, make("marksum-hardcore", &[], d), mu, WeightDistribution::standard_uniform())
            .unwrap();
        let v = crate::numeric::unit_ball_volume(d) * r0.powi(d as i32);
        let want = (1.0 - (-lam * v).exp()) / v;
        assert!(rel(intensity_mat2(&spec).unwrap().value, want) < 1e-12);
    }
}

fn gamma_fc_mat2(nu: WeightDistribution, p0: f64) -> ModelSpec {
    let mu = MarkDistribution::new(
        MarkKind::TruncatedGamma {
            shape: 6.0,
            scale: 0.02,
            cap: None,
        },
        12,
    )
    .unwrap();
    ModelSpec::mat2(2.0, p0, make("fc", &[("c", 10.0)], 2), mu, nu).unwrap()
}

#[test]
fn mat2_weight_paths_agree() {
    let spec = gamma_fc_mat2(WeightDistribution::standard_uniform(), 1.0);
    let quad = AnalyticOptions {
        weight_path: WeightPath::Quadrature,
        ..AnalyticOptions::default()
    };
    let a = intensity_mat2(&spec).unwrap().value;
    let b = intensity_mat2_with(&spec, &quad).unwrap().value;
    assert!(rel(a, b) < 1e-7, "{a} vs {b}");
    for r in [0.3, 0.6] {
        let x = pcf(&spec, r, &AnalyticOptions::default()).unwrap();
        let y = pcf(&spec, r, &quad).unwrap();
        assert!(rel(x, y) < 1e-6, "r={r}: {x} vs {y}");
    }
}

#[test]
fn mat2_with_mark_scaled_weights() {
    let nu = WeightDistribution::new(WeightLaw::Uniform { lo: 0.0, hi: 1.0 }, 1.0).unwrap();
    let mu = MarkDistribution::new(MarkKind::Uniform { lo: 0.05, hi: 0.2 }, 12).unwrap();
    let f = make("fc", &[("c", 10.0)], 2);
    let spec = ModelSpec::mat2(2.0, 1.0, f.clone(), mu.clone(), nu).unwrap();
    let i2 = intensity_mat2(&spec).unwrap().value;
    let i1 = intensity_marked(&ModelSpec::mat1_marked(2.0, 1.0, f, mu).unwrap()).unwrap().value;
    assert!(i2 > i1 && i2 < 2.0);
    let g = pcf(&spec, 0.5, &AnalyticOptions::default()).unwrap();
    assert!(g.is_finite() && g > 0.0);
}

#[test]
fn pcf_is_independent_of_p0() {
    let a = gamma_fc_mat2(WeightDistribution::standard_uniform(), 0.3);
    let b = gamma_fc_mat2(WeightDistribution::standard_uniform(), 1.0);
    for r in [0.2, 0.5, 0.8] {
        assert_eq!(pcf_mat2(&a, r).unwrap(), pcf_mat2(&b, r).unwrap());
    }
}

#[test]
fn k_and_l_of_poisson_and_hard_core() {
    let r: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
    let poisson = ModelSpec::mat1(1.0, 1.0, InteractionFunction::zero(2)).unwrap();
    let l = l_function(&poisson, &r, &AnalyticOptions::default()).unwrap();
    for (x, y) in r.iter().zip(&l) {
        assert!((x - y).abs() < 1e-12);
    }
    let hc = ModelSpec::mat1(0.5, 1.0, InteractionFunction::hard_core(0.55, 2).unwrap()).unwrap();
    let l = l_function(&hc, &r, &AnalyticOptions::default()).unwrap();
    for (x, y) in r.iter().zip(&l) {
        if *x < 0.55 {
            assert_eq!(*y, 0.0);
        }
    }
    assert!(l.windows(2).all(|w| w[1] >= w[0]));
}

