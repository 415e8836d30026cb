//! Benchmark distillation: method ranks, rank-consistent dataset subsets,
//! tree/DNN preference picks and seed-level significance rates.

pub mod rank;
pub mod select;
pub mod treednn;
pub mod ttest;

pub use rank::{rank, rank_mae, rank_methods, rank_row, RankMatrix};
pub use select::{
    evaluate_method_split, select_greedy, select_kmeans, select_random, Quota, QuotaGroup, SplitEvaluation, Strategy,
    SubsetSelection, DEFAULT_ETA, DEFAULT_TRIALS,
};
pub use treednn::{default_groups, group_and_pick, tree_dnn_score, Pick, Preference, Role, TreeDnnScore, DEFAULT_TAU};
pub use ttest::{pairwise_significance, welch_t_test, Outcome, PairwiseRates, Welch, DEFAULT_ALPHA};
