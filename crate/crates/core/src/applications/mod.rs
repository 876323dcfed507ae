//! Ready-to-run models: the normal toy, the rats growth model and network
//! parent selection.

pub mod dag;
pub mod normal_toy;
pub mod rats;
pub mod synth;

pub use dag::{dag_pipeline, run_node, DagConfig, DagProblem, DagResult, NodeResult};
pub use normal_toy::{normal_toy_model, NormalToy};
pub use rats::{rat_model, rat_summary, run_rats, RatConfig, RatData, RatModel};
pub use synth::{synth_dag, synth_regression};
