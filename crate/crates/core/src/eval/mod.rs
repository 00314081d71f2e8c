//! Exact-match micro-averaged scoring, dev/test gap reports and HTML diffs.

mod diff;
mod score;

pub use diff::{categorize, category_counts, highlights, render_diff, CategorizedMention, DiffCategory, Highlight};
pub use score::{
    compare_splits, evaluate_corpus, f1_from_pr, fmt4, match_exact, micro_metrics, per_document_tsv, report_tsv,
    round_half_up, Counts, DocRow, EvalCounts, EvalError, EvalReport, GapReport, Metrics, DEFAULT_OVERFIT_THRESHOLD,
    REPORT_HEADER,
};
