//! Multi-modal traffic scenario compiler.
//!
//! Textual descriptions and image detections are each lowered to a
//! scenario IR, the two IRs are merged under per-field modality
//! priorities, and the result is compiled to simulator scripts. The crate
//! also carries a small kinematic testbed with a mutation fuzzer, and the
//! tree-edit-distance based accuracy evaluator.

pub mod ir;
pub mod eval;
pub mod text_extract;
pub mod vision;
pub mod align;
pub mod codegen;
pub mod testbed;
pub mod pipeline;
