use bayesel::elcore::{solve_el, ElSolution, SolverOptions};
use bayesel::estimating::el_at;
use serde_json::{json, Value};

use crate::config::{load, Built, SolveConfig};
use crate::failure::Failure;
use crate::Globals;

pub fn solution_json(sol: &ElSolution) -> Value {
    let log_el = if sol.log_el.is_finite() { json!(sol.log_el) } else { json!("-inf") };
    json!({
        "feasible": sol.feasible,
        "log_el": log_el,
        "weights": sol.weights,
        "multipliers": sol.multipliers,
        "iterations": sol.iterations,
        "grad_norm": sol.grad_norm,
    })
}

pub fn run(g: &Globals) -> Result<(), Failure> {
    let (cfg, base): (SolveConfig, _) = load(g.config_path()?)?;
    let built = cfg.model.build(&base)?;
    let opts = SolverOptions::default();
    let sol = match (&built, built.model()) {
        (Built::Raw(c), _) => solve_el(c, &opts)?,
        (_, Some(model)) => {
            if cfg.theta1.len() != model.theta1_dim() || cfg.theta2.len() != model.theta2_dim() {
                return Err(Failure::input(format!(
                    "model expects {} + {} parameters, got {} + {}",
                    model.theta1_dim(),
                    model.theta2_dim(),
                    cfg.theta1.len(),
                    cfg.theta2.len()
                )));
            }
            el_at(model.as_ref(), &cfg.theta1, &cfg.theta2, &opts)?
        }
        (_, None) => unreachable!("only raw constraints lack a model"),
    };
    println!("{}", serde_json::to_string_pretty(&solution_json(&sol)).map_err(Failure::input)?);
    Ok(())
}
