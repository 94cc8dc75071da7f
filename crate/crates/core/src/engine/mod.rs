//! Item-based neighborhood prediction, Top-N recommendation and the
//! multi-criteria pipeline.

mod mc;
mod neighborhood;
mod persist;

pub use mc::{
    aggregate_overall, build_mc_model, fit_aggregation, impute_tensor, AggregationWeights, McConfig, McModel,
    McPrediction, SimSpace, SliceSimilarity, DEFAULT_CELL_BUDGET,
};
pub use neighborhood::{predict_single, recommend_top_n, ItemBasedPredictor, NeighborhoodSpec, Prediction};
pub use persist::{DumpedSimilarity, ModelDump, SCHEMA_VERSION};
