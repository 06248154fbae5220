pub mod metrics;
pub mod report;
pub mod reward;

pub use metrics::{
    exact_match, normalize, normalized_key, parse_year, score_em, score_f1, score_numeric,
    token_f1, NumericScore, UnparseablePolicy,
};
pub use report::{
    evaluate, format_table, Breakdown, Bucket, EvalConfig, EvalError, EvalReport, Metrics,
    MissingPolicy, Prediction,
};
pub use reward::{check_disjoint, reward, OverlapError, RewardRecord, Scorer};
