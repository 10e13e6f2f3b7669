//! Confusion matrices, per-class and averaged metrics, classification
//! reports, k-fold cross-validation and model comparison.

pub mod compare;
pub mod confusion;
pub mod cv;
pub mod metrics;
pub mod report;

pub use compare::{compare, compare_prepared, Comparison, ComparisonRow};
pub use confusion::{confusion, ConfusionMatrix};
pub use cv::{cv_prepared, kfold_cv, CvResult, Folds, PreparedFolds};
pub use metrics::{metrics, Average, ClassMetrics, ClassScore, Metric};
pub use report::{classification_report, parse_report_csv, report_csv};
