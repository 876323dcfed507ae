use bayesel::applications::rats::T_BAR;
use bayesel::applications::run_rats;
use bayesel::sampler::{run_chains, two_step_mh, RunConfig, RunError, Scan, Trace};
use serde_json::json;

use crate::commands::diagnose::analyse;
use crate::commands::{chain_file, to_json, write};
use crate::config::{load, Built, SampleConfig};
use crate::failure::Failure;
use crate::svg;
use crate::Globals;

/// Post-burn-in series reported for a run: every column, or for the growth
/// model the population intercept at day 0, the slope and the residual sd.
fn reported_series(built: &Built, trace: &Trace, burn_in: usize) -> Vec<(String, Vec<f64>)> {
    let kept = |name: &str| trace.column_by_name(name).map(|c| c[burn_in..].to_vec()).unwrap_or_default();
    match built {
        Built::Rats { .. } => {
            let (c1, c2, s2) = (kept("theta1c"), kept("theta2c"), kept("theta2_1"));
            let theta0 = c1.iter().zip(&c2).map(|(a, b)| a - T_BAR * b).collect();
            let sigma = s2.iter().map(|v| v.sqrt()).collect();
            vec![("theta2c".into(), c2), ("theta0".into(), theta0), ("sigma_e".into(), sigma)]
        }
        _ => trace.column_names().iter().map(|n| (n.clone(), kept(n))).collect(),
    }
}

pub fn run(g: &Globals) -> Result<(), Failure> {
    let (cfg, base): (SampleConfig, _) = load(g.config_path()?)?;
    if cfg.length == 0 || cfg.burn_in >= cfg.length {
        return Err(Failure::input("need length > burn_in"));
    }
    if !(cfg.hw_alpha > 0.0 && cfg.hw_alpha < 1.0) || !(cfg.hw_eps > 0.0) {
        return Err(Failure::input("hw_alpha must lie in (0, 1) and hw_eps must be positive"));
    }
    let seed = g.seed.or(cfg.seed).unwrap_or(0);
    let built = cfg.model.build(&base)?;
    let results: Vec<Result<Trace, RunError>> = match &built {
        Built::Raw(_) => return Err(Failure::input("raw constraint rows cannot be sampled")),
        Built::Rats { model, .. } => {
            if cfg.q1.is_some() || cfg.q2.is_some() || cfg.init.is_some() || cfg.scan != Scan::Joint {
                return Err(Failure::input("the growth model uses its own proposals, start and scan"));
            }
            run_chains(g.chains, |k| {
                let rc = built.rat_config(cfg.length, cfg.burn_in, seed, k).expect("growth model");
                run_rats(model.data(), &rc)
            })
        }
        _ => {
            let (Some(q1), Some(q2)) = (&cfg.q1, &cfg.q2) else {
                return Err(Failure::input("q1 and q2 are required"));
            };
            let init = match &cfg.init {
                Some(t) => t.clone(),
                None => built.default_init()?,
            };
            let model = built.model().expect("non-raw model");
            run_chains(g.chains, |k| {
                let rc = RunConfig { length: cfg.length, burn_in: cfg.burn_in, seed, chain: k, scan: cfg.scan.clone() };
                two_step_mh(model.as_ref(), init.clone(), q1, q2, &rc)
            })
        }
    };
    let dir = g.out_dir()?;
    for (k, result) in results.into_iter().enumerate() {
        let k = k as u64;
        let trace = match result {
            Ok(t) => t,
            Err(RunError { error, partial }) => {
                if let Some(p) = partial {
                    let mut buf = Vec::new();
                    p.write_csv(&mut buf).map_err(Failure::input)?;
                    write(&chain_file(dir, "trace_partial", "csv", k, g.chains), buf)?;
                }
                return Err(error.into());
            }
        };
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).map_err(Failure::input)?;
        write(&chain_file(dir, "trace", "csv", k, g.chains), buf)?;

        let report = analyse(&reported_series(&built, &trace, cfg.burn_in), cfg.hw_alpha, cfg.hw_eps)?;
        let mut csv = String::from("name,mean,sd,q025,median,q975\n");
        for r in &report.summary {
            csv.push_str(&format!("{},{},{},{},{},{}\n", r.name, r.mean, r.sd, r.q025, r.median, r.q975));
        }
        write(&chain_file(dir, "summary", "csv", k, g.chains), csv)?;
        let summary = json!({
            "seed": seed,
            "chain": k,
            "length": cfg.length,
            "burn_in": cfg.burn_in,
            "acceptance_rate": trace.acceptance_rate(),
            "summary": report.summary,
            "heidelberger_welch": report.heidelberger_welch,
        });
        write(&chain_file(dir, "summary", "json", k, g.chains), to_json(&summary)?)?;
        let text = format!("acceptance rate {:.4}\n\n{}", trace.acceptance_rate(), report.text());
        write(&chain_file(dir, "diagnostics", "txt", k, g.chains), &text)?;
        if g.plot {
            write(&chain_file(dir, "trace", "svg", k, g.chains), svg::traces(&trace))?;
        }
        if g.chains > 1 {
            println!("chain {k}");
        }
        print!("{text}");
    }
    Ok(())
}
