use std::fmt::Write;

use bayesel::estimating::{log_posterior_unnorm, ThetaSplit};
use rayon::prelude::*;

use crate::commands::write;
use crate::config::{load, GridConfig};
use crate::failure::Failure;
use crate::svg;
use crate::Globals;

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn axis(range: [f64; 2], resolution: usize) -> Vec<f64> {
    if resolution == 1 {
        return vec![0.5 * (range[0] + range[1])];
    }
    (0..resolution).map(|i| range[0] + (range[1] - range[0]) * i as f64 / (resolution - 1) as f64).collect()
}

pub fn run(g: &Globals) -> Result<(), Failure> {
    let (cfg, base): (GridConfig, _) = load(g.config_path()?)?;
    if cfg.resolution == 0 {
        return Err(Failure::input("resolution must be positive"));
    }
    if cfg.theta1_range.iter().chain(&cfg.theta2_range).any(|v| !v.is_finite()) {
        return Err(Failure::input("grid ranges must be finite"));
    }
    let built = cfg.model.build(&base)?;
    let model = built.model().ok_or_else(|| Failure::input("raw constraint rows have no parameters to grid over"))?;
    if model.theta1_dim() != 1 || model.theta2_dim() != 1 {
        return Err(Failure::input(format!(
            "grid needs one parameter of each kind, model has {} + {}",
            model.theta1_dim(),
            model.theta2_dim()
        )));
    }
    let xs = axis(cfg.theta1_range, cfg.resolution);
    let ys = axis(cfg.theta2_range, cfg.resolution);
    let values: Vec<f64> = xs
        .par_iter()
        .map(|&a| {
            ys.iter()
                .map(|&b| log_posterior_unnorm(model.as_ref(), &ThetaSplit { theta1: vec![a], theta2: vec![b] }))
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    let names = model.param_names();
    let mut csv = String::from("theta1,theta2,log_post\n");
    for (i, a) in xs.iter().enumerate() {
        for (j, b) in ys.iter().enumerate() {
            let v = values[i * ys.len() + j];
            if v.is_finite() {
                let _ = writeln!(csv, "{a},{b},{v}");
            } else {
                let _ = writeln!(csv, "{a},{b},NA");
            }
        }
    }
    let dir = g.out_dir()?;
    write(&dir.join("grid.csv"), csv)?;
    if g.plot {
        write(&dir.join("grid.svg"), svg::heatmap(&xs, &ys, &values, &names[0], &names[1]))?;
    }
    let finite = values.iter().filter(|v| v.is_finite()).count();
    println!("{} grid points, {finite} with positive posterior density", values.len());
    Ok(())
}
