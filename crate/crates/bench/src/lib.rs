//! Fixtures shared by the benchmarks.

use paraexp::lab::preset;
use paraexp::{ExpansionPlan, ExpansionScheme, Payoff};

/// Order-`n` diagonal Taylor plan on a preset.
pub fn plan(name: &str, n: usize) -> ExpansionPlan {
    let p = preset(name).expect("known preset");
    let center = p.spot.clone();
    ExpansionPlan::new(p.field, ExpansionScheme::taylor(center), n).expect("valid plan")
}

pub fn spot(name: &str) -> Vec<f64> {
    preset(name).expect("known preset").spot
}

pub fn call() -> Payoff {
    Payoff::Call { strike: 1.0, log_price: true }
}
