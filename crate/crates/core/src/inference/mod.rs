mod chain;
mod gibbs;
mod graph;
mod predict;
mod px;
mod spec;

pub use chain::{run_chain, Block, ChainDraws, ChainMeta, IterationStats, BLOCK_NAMES};
pub use gibbs::{Gibbs, ParamState};
pub use graph::{extract_graph, graph_to_dot, precision_series, write_edges_csv, Edge, GraphMatrix, Sign};
pub use predict::{
    error_draws, event_probability, posterior_predictive, summarize_predictive, PredictEvent, PredictiveSummary,
};
pub use px::{run_px_chain, sample_expansion};
pub use spec::{BetaPriorSpec, ModelSpec, SamplerConfig, SigmaAlphaPriorSpec};
