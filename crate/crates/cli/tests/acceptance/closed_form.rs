use std::f64::consts::PI;
use std::process::Command;

use matern_thin::analytic;
use matern_thin::{registry_make, InteractionFunction, MarkDistribution, ModelSpec, WeightDistribution};

use super::{params, rel, Outcome};

pub fn c1() -> Outcome {
    let expected = 0.5 * (-PI / 2.0).exp();
    let mut worst: f64 = 0.0;
    for a in [0.0, 0.5, 0.75, 1.0] {
        let f = registry_make("example1", &params(&[("a", a), ("R", 1.0)]), 2).map_err(|e| e.to_string())?;
        let spec = ModelSpec::mat1(0.5, 1.0, f).map_err(|e| e.to_string())?;
        let v = analytic::intensity_mat1(&spec).map_err(|e| e.to_string())?.value;
        worst = worst.max(rel(v, expected));
    }
    if worst <= 1e-9 {
        Ok(format!("max rel err {worst:.1e} over a ∈ {{0, 0.5, 0.75, 1}}"))
    } else {
        Err(format!("max rel err {worst:.1e} > 1e-9"))
    }
}

pub fn c2() -> Outcome {
    let expected = 2.0 * (-2.0 * PI).exp();
    let mut worst: f64 = 0.0;
    for a in [0.5, 2.0, 8.0] {
        let f = registry_make("example2", &params(&[("a", a)]), 2).map_err(|e| e.to_string())?;
        // quadrature path: the family has no closed-form tail
        if f.closed_form_tail(0.0, 0.0).is_some() {
            return Err("aggregative family unexpectedly has a closed form".into());
        }
        let spec = ModelSpec::mat1(2.0, 1.0, f).map_err(|e| e.to_string())?;
        let v = analytic::intensity_mat1(&spec).map_err(|e| e.to_string())?.value;
        worst = worst.max(rel(v, expected));
    }
    if worst <= 1e-7 {
        Ok(format!("max rel err {worst:.1e} over a ∈ {{0.5, 2, 8}}"))
    } else {
        Err(format!("max rel err {worst:.1e} > 1e-7"))
    }
}

pub fn c3() -> Outcome {
    let mut worst: f64 = 0.0;
    for d in [2usize, 3] {
        let b = if d == 2 { PI } else { 4.0 * PI / 3.0 };
        for (lam, r) in [(0.5, 1.0), (3.0, 0.4), (40.0, 0.1)] {
            let f = InteractionFunction::hard_core(r, d).map_err(|e| e.to_string())?;
            let mu = MarkDistribution::point_mass(0.0).map_err(|e| e.to_string())?;
            let spec = ModelSpec::mat2(lam, 1.0, f, mu, WeightDistribution::standard_uniform())
                .map_err(|e| e.to_string())?;
            let v = analytic::intensity_mat2(&spec).map_err(|e| e.to_string())?.value;
            let c = b * r.powi(d as i32);
            worst = worst.max(rel(v, (1.0 - (-lam * c).exp()) / c));
        }
    }
    if worst <= 1e-7 {
        Ok(format!("max rel err {worst:.1e} over d ∈ {{2,3}} × 3 (λ,R)"))
    } else {
        Err(format!("max rel err {worst:.1e} > 1e-7"))
    }
}

pub fn c11() -> Outcome {
    let f = registry_make("constant", &params(&[("c", 0.5)]), 2).map_err(|e| e.to_string())?;
    let spec = ModelSpec::mat1(1.0, 1.0, f).map_err(|e| e.to_string())?;
    let res = analytic::intensity(&spec).map_err(|e| e.to_string())?;
    let diag = res.diagnostic.ok_or("no diagnostic")?;
    if res.value != 0.0 || diag.code != "divergent" {
        return Err(format!("value {} code {}", res.value, diag.code));
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("m.json"), serde_json::to_string(&spec).unwrap()).map_err(|e| e.to_string())?;
    let out = Command::new(env!("CARGO_BIN_EXE_mthin"))
        .args(["--json-errors", "analytic", "--model", "m.json", "--stat", "intensity", "--out", "i.json"])
        .current_dir(dir.path())
        .output()
        .map_err(|e| e.to_string())?;
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(3) if err["error"] == "divergent" => Ok("intensity 0, code `divergent`, CLI exit 3".into()),
        code => Err(format!("CLI exit {code:?}, stderr {err}")),
    }
}
