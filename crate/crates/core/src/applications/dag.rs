//! Parent-set selection for an ordered network.
//!
//! Each non-root node is regressed on all earlier nodes and its parents are
//! the modal model of a reversible-jump run. Nodes are independent, so their
//! chains run in parallel, each on its own random stream.

use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::DataMatrix;
use crate::modelselect::{modal_support, rjmcmc, ModelTrace, RegressionData, RjConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct DagProblem {
    genes: DataMatrix,
    names: Vec<String>,
    roots: usize,
}

impl DagProblem {
    /// Columns in causal order; the first `roots` have no parents.
    pub fn new(genes: DataMatrix, roots: usize) -> Result<Self> {
        let g = genes.v();
        if roots == 0 || roots >= g {
            return Err(Error::Invalid(format!("need between 1 and {} roots, got {roots}", g.saturating_sub(1))));
        }
        // the last node has g - 1 candidates and g + 1 estimating equations
        if genes.n() <= g + 1 {
            return Err(Error::Dimension(format!("{} observations are too few for {g} nodes", genes.n())));
        }
        let names = genes.names().map(<[String]>::to_vec).unwrap_or_else(|| (1..=g).map(|k| format!("g{k}")).collect());
        Ok(Self { genes, names, roots })
    }

    pub fn nodes(&self) -> usize {
        self.genes.v()
    }

    pub fn roots(&self) -> usize {
        self.roots
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Standardised regression of node `k` on nodes `0..k`.
    pub fn regression(&self, k: usize) -> Result<RegressionData> {
        let covariates: Vec<usize> = (0..k).collect();
        RegressionData::from_matrix(&self.genes, k, &covariates)?.standardize()
    }
}

fn pipeline_defaults() -> RjConfig {
    RjConfig { length: 150_000, burn_in: 30_000, beta_scale: 0.03, sigma2_scale: 1.0, u_sd: 0.05, ..Default::default() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DagConfig {
    /// Sampler settings shared by every node; `chain` is replaced by the node index.
    pub sampler: RjConfig,
}

impl Default for DagConfig {
    fn default() -> Self {
        Self { sampler: pipeline_defaults() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeResult {
    pub node: usize,
    pub trace: ModelTrace,
    pub frequencies: BTreeMap<String, f64>,
    pub parents: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DagResult {
    pub names: Vec<String>,
    pub nodes: Vec<NodeResult>,
    /// `(parent, child)` pairs, 0-based.
    pub edges: Vec<(usize, usize)>,
}

/// Chain for one node; depends only on the problem, the config and `k`.
pub fn run_node(problem: &DagProblem, k: usize, config: &DagConfig) -> Result<NodeResult> {
    if k < problem.roots || k >= problem.nodes() {
        return Err(Error::Invalid(format!("node {k} is a root or out of range")));
    }
    let data = problem.regression(k)?;
    let sampler = RjConfig { chain: k as u64, init_gamma: None, ..config.sampler.clone() };
    let trace = rjmcmc(&data, &sampler)?;
    Ok(NodeResult { node: k, frequencies: trace.model_frequencies(), parents: modal_support(&trace), trace })
}

pub fn dag_pipeline(problem: &DagProblem, config: &DagConfig) -> Result<DagResult> {
    let nodes: Vec<NodeResult> = (problem.roots..problem.nodes()).into_par_iter().map(|k| run_node(problem, k, config)).collect::<Result<_>>()?;
    let edges = nodes.iter().flat_map(|r| r.parents.iter().map(move |&p| (p, r.node))).collect();
    Ok(DagResult { names: problem.names.clone(), nodes, edges })
}

impl DagResult {
    pub fn edges_csv(&self) -> String {
        let mut s = String::from("parent,child\n");
        for &(p, c) in &self.edges {
            let _ = writeln!(s, "{},{}", self.names[p], self.names[c]);
        }
        s
    }

    pub fn dot(&self) -> String {
        let mut s = String::from("digraph parents {\n");
        for name in &self.names {
            let _ = writeln!(s, "  \"{name}\";");
        }
        for &(p, c) in &self.edges {
            let _ = writeln!(s, "  \"{}\" -> \"{}\";", self.names[p], self.names[c]);
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::applications::synth::{synth_dag, EXAMPLE_EDGES};

    fn small_config() -> DagConfig {
        DagConfig { sampler: RjConfig { length: 1500, burn_in: 300, seed: 11, sigma2_scale: 0.1, ..pipeline_defaults() } }
    }

    #[test]
    fn strong_parent_is_recovered_and_graph_is_ordered() {
        let genes = synth_dag(1, 80, 6, &[(0, 3, 1.0), (1, 4, -1.0), (3, 5, 1.0)], 0.3).unwrap();
        let problem = DagProblem::new(genes, 3).unwrap();
        let result = dag_pipeline(&problem, &small_config()).unwrap();
        assert_eq!(result.nodes.len(), 3);
        assert_eq!(result.nodes[0].parents, vec![0]);
        assert!(result.edges.iter().all(|&(p, c)| p < c));
        assert!(result.edges_csv().starts_with("parent,child\ng1,g4\n"));
        assert!(result.dot().contains("\"g1\" -> \"g4\";"));
    }

    #[test]
    fn node_runs_do_not_depend_on_each_other() {
        let genes = synth_dag(2, 40, 13, &EXAMPLE_EDGES, 0.5).unwrap();
        let problem = DagProblem::new(genes, 3).unwrap();
        let config = DagConfig { sampler: RjConfig { length: 200, burn_in: 50, ..small_config().sampler } };
        let alone = run_node(&problem, 7, &config).unwrap();
        let all = dag_pipeline(&problem, &config).unwrap();
        assert_eq!(all.nodes[7 - 3], alone);
        assert!(run_node(&problem, 1, &config).is_err());
    }

    #[test]
    fn problem_validation() {
        let genes = synth_dag(3, 10, 13, &EXAMPLE_EDGES, 0.5).unwrap();
        assert!(DagProblem::new(genes, 3).is_err());
        let genes = synth_dag(3, 40, 4, &[], 0.5).unwrap();
        assert!(DagProblem::new(genes.clone(), 4).is_err());
        assert!(DagProblem::new(genes, 0).is_err());
    }
}
