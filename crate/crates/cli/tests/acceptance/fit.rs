//! Minimum-contrast recovery of simulated step-Gauss parameters.

use matern_thin::analytic;
use matern_thin::infer::{fit_min_contrast, ContrastDomain, FitProblem, FreeParam};
use matern_thin::model::Window;
use matern_thin::simulate::{simulate_model, SimConfig};
use matern_thin::{registry_make, ModelSpec};

use super::{params, rel, Outcome};

const TRIALS: u64 = 10;
const SIDE: f64 = 200.0;

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn c9() -> Outcome {
    let (a, b, p0) = (6.3, 1.06, 0.92);
    let f = s(registry_make("step-gauss", &params(&[("R", 1.0), ("a", a), ("b", b)]), 2))?;
    let truth = s(ModelSpec::mat1(0.4, p0, f))?;
    let window = s(Window::cube(2, SIDE))?;
    let expected = s(analytic::intensity(&truth))?.value * window.volume();
    if expected < 2000.0 {
        return Err(format!("only {expected:.0} points expected"));
    }
    let template = s(s(s(truth.set_param("f.a", 3.0))?.set_param("f.b", 0.5))?.with_p0(0.6))?;
    let free = vec![
        FreeParam::new("f.a", 1.0, 30.0),
        FreeParam::new("f.b", 0.1, 10.0),
        FreeParam::new("p0", 0.3, 1.0),
    ];
    let domain = ContrastDomain {
        r_min: Some(0.2),
        r_max: Some(5.0),
        bandwidth: Some(0.2),
        grid: 128,
    };
    let mut hits = 0;
    let mut worst = Vec::new();
    for t in 0..TRIALS {
        let data = s(simulate_model(&truth, &window, &SimConfig::new(9_000 + t)))?;
        let problem = s(FitProblem::from_pattern(template.clone(), free.clone(), &data, &domain))?;
        let fit = s(fit_min_contrast(&problem, t))?;
        let err = [
            rel(fit.params["f.a"], a),
            rel(fit.params["f.b"], b),
            rel(fit.params["p0"], p0),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        if err <= 0.2 {
            hits += 1;
        }
        worst.push(format!("{:.0}%", 100.0 * err));
    }
    let msg = format!("{hits}/{TRIALS} trials within 20% (worst relative error per trial: {})", worst.join(" "));
    if hits >= 8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}
