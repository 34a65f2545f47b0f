//! Scenario-fidelity evaluation: tree edit distance, IE accuracy, error
//! injection, field projection and benchmark runs.

mod accuracy;
mod benchmark;
mod inject;
mod project;
mod report;
mod ted;

pub use accuracy::ie_accuracy;
pub use inject::{
    inject_detection_drop, inject_text_hallucination, injection_count, relabel_distance, repetition_seed,
    specified_leaf_count, InjectError, InjectKind, Injection, HALLUCINATED_LANES_MAX, HALLUCINATED_SPEED_MAX,
};
pub use project::{check_mask, project_fields, InvalidPath, LANE_EXTENSION_MASK};
pub use ted::ted;
pub use benchmark::{
    load_benchmark, load_record, BenchmarkError, BenchmarkRecord, DESCRIPTION_FILE, DETECTIONS_FILE,
    GROUND_TRUTH_FILE, IMAGE_FILE,
};
pub use report::{
    evaluate, injection_sweep, margin_of_error, spearman, EvalConfig, EvalError, EvalReport, RecordResult,
    RunScore, SweepPoint,
};
