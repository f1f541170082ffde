//! Training, evaluation, grid search, analysis exports and report tables.

pub mod eval;
pub mod grid;
pub mod report;
pub mod train;
pub mod viz;

pub use eval::{evaluate, evaluate_stats, EvalStats, HandPredictor, OraclePredictor};
pub use train::{train, BinResult, EpochRecord, StopReason, TrainOptions, TrainRun, MAX_EPOCHS};
pub use grid::{
    budget_indices, desk_lstm_space, desk_transformer_space, grid_search, lstm_space, summarize, top_k_mean,
    transformer_space, GridEntry, GridOptions, GridPoint, GridResult, TransformerFlags, GRID_INDEX_FILE,
    GRID_SCHEMES,
};
pub use viz::{
    attention_entropy_ratio, best_correlations, export_visualization, pearson, ratio_correlations, Correlation,
    VizManifest, VizOptions,
};
pub use report::{build_report, load_runs, model_variant, write_report, Report, TableRow, RUN_FILE};
