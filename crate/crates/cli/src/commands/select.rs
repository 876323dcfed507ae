use std::path::Path;

use bayesel::applications::{dag_pipeline, DagConfig, DagProblem};
use bayesel::modelselect::{rjmcmc, ModelTrace, RegressionData, RjConfig};
use bayesel::sampler::run_chains;

use crate::commands::{chain_file, write};
use crate::config::{load, SelectConfig};
use crate::failure::Failure;
use crate::Globals;

fn write_trace(trace: &ModelTrace, csv: &Path, json: &Path) -> Result<(), Failure> {
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    write(csv, buf)?;
    write(json, trace.frequencies_json())
}

pub fn run(g: &Globals) -> Result<(), Failure> {
    let (cfg, base): (SelectConfig, _) = load(g.config_path()?)?;
    let dir;
    match cfg {
        SelectConfig::Regression { data, response, covariates, standardize, sampler } => {
            let m = data.load(&base)?;
            let covariates = covariates.unwrap_or_else(|| (0..m.v()).filter(|&j| j != response).collect());
            let mut d = RegressionData::from_matrix(&m, response, &covariates)?;
            if standardize {
                d = d.standardize()?;
            }
            let sampler = RjConfig { seed: g.seed.unwrap_or(sampler.seed), ..sampler };
            sampler.validate(d.s())?;
            let traces = run_chains(g.chains, |k| rjmcmc(&d, &RjConfig { chain: k, ..sampler.clone() }));
            dir = g.out_dir()?;
            for (k, trace) in traces.into_iter().enumerate() {
                let trace = trace?;
                let k = k as u64;
                write_trace(&trace, &chain_file(dir, "model_trace", "csv", k, g.chains), &chain_file(dir, "model_frequencies", "json", k, g.chains))?;
                let modal = trace.modal_model().unwrap_or_default();
                println!("chain {k}: modal model {modal}, cross-model acceptance {:.4}", trace.cross_acceptance());
            }
        }
        SelectConfig::Dag { data, roots, sampler } => {
            if g.chains > 1 {
                return Err(Failure::input("network mode runs one chain per node; --chains does not apply"));
            }
            let problem = DagProblem::new(data.load(&base)?, roots)?;
            let mut config = DagConfig::default();
            if let Some(s) = sampler {
                if s.init_gamma.is_some() {
                    return Err(Failure::input("network mode does not take an initial model"));
                }
                config.sampler = s;
            }
            if let Some(seed) = g.seed {
                config.sampler.seed = seed;
            }
            config.sampler.validate(problem.nodes() - 1)?;
            let result = dag_pipeline(&problem, &config)?;
            dir = g.out_dir()?;
            for node in &result.nodes {
                let name = &result.names[node.node];
                write_trace(&node.trace, &dir.join(format!("model_trace_{name}.csv")), &dir.join(format!("model_frequencies_{name}.json")))?;
            }
            write(&dir.join("edges.csv"), result.edges_csv())?;
            write(&dir.join("graph.dot"), result.dot())?;
            println!("{} edges", result.edges.len());
            for &(p, c) in &result.edges {
                println!("{} -> {}", result.names[p], result.names[c]);
            }
        }
    }
    Ok(())
}
