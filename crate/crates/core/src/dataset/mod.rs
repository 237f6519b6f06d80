//! Dataset handling: class labels and regression targets, single-label
//! filtering, stratified halving, 70/10/20 splits, one-hot encoding, and
//! deterministic batching.

mod batch;
mod labels;
mod split;

pub use batch::{batch_iter, Batch, BatchIter, BatchTargets, Task, DEFAULT_BATCH_SIZE};
pub use labels::{
    filter_single_label, one_hot, ClassLabel, LabeledRecord, RegressionParam, RegressionTargets,
    CLASS_COUNT,
};
pub use split::{
    assign_real, assign_synthetic, split_stats_csv, split_tvt, stratified_halves, Assignment,
    Halves, SplitAssignment, Tvt,
};
