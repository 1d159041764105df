//! Size and power of the deviation test.

use matern_thin::analytic;
use matern_thin::infer::{deviation_test, fit_min_contrast, ContrastDomain, DeviationTestSpec, FitProblem};
use matern_thin::model::{Statistic, Window};
use matern_thin::simulate::{simulate_model, SimConfig};
use matern_thin::{InteractionFunction, ModelSpec};

use super::Outcome;

const TRIALS: u64 = 500;
const K: usize = 99;
const ALPHA: f64 = 0.05;
const RADIUS: f64 = 0.03;
/// The hard-core and Poisson L differ most on `[0, R]`.
const R_MAX: f64 = 2.0 * RADIUS;

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

pub fn c10() -> Outcome {
    let model = s(ModelSpec::mat1(100.0, 1.0, s(InteractionFunction::hard_core(RADIUS, 2))?))?;
    let window = s(Window::cube(2, 1.0))?;
    let lam = s(analytic::intensity(&model))?.value;
    let poisson = s(ModelSpec::mat1(lam, 1.0, InteractionFunction::zero(2)))?;
    let domain = ContrastDomain {
        r_max: Some(0.1),
        ..ContrastDomain::default()
    };

    let mut size = 0;
    let mut power = 0;
    for t in 0..TRIALS {
        let data = s(simulate_model(&model, &window, &SimConfig::new(10_000 + t)))?;
        let spec = DeviationTestSpec::new(Statistic::L, R_MAX, t).with_k(K);
        if s(deviation_test(&data, &model, &spec))?.p_value <= ALPHA {
            size += 1;
        }

        let data = s(simulate_model(&poisson, &window, &SimConfig::new(20_000 + t)))?;
        let problem = s(FitProblem::from_pattern(model.clone(), Vec::new(), &data, &domain))?;
        let fitted = s(fit_min_contrast(&problem, t))?.spec;
        let spec = DeviationTestSpec::new(Statistic::L, R_MAX, 30_000 + t).with_k(K);
        if s(deviation_test(&data, &fitted, &spec))?.p_value <= ALPHA {
            power += 1;
        }
    }
    let (size, power) = (size as f64 / TRIALS as f64, power as f64 / TRIALS as f64);
    let msg = format!("{TRIALS} trials, k = {K}: rejection under the model {size:.3}, against Poisson data {power:.3}");
    if (0.03..=0.07).contains(&size) && power >= 0.95 {
        Ok(msg)
    } else {
        Err(msg)
    }
}
