//! The end-to-end extraction pipeline: textual IR, visual IR, merge.

use crate::align::{merge, MergeReport};
use crate::ir::Scenario;
use crate::text_extract::{default_fewshot, extract_textual_ir, ExtractError, FewshotExample, ProviderConfig};
use crate::vision::{build_visual_ir, DetectionSet, VisionConfig};

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub provider: ProviderConfig,
    pub fewshot: Vec<FewshotExample>,
    pub vision: VisionConfig,
}

impl PipelineConfig {
    pub fn new(provider: ProviderConfig) -> PipelineConfig {
        PipelineConfig {
            provider,
            fewshot: default_fewshot(),
            vision: VisionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    pub textual: Scenario,
    pub visual: Scenario,
    pub merged: Scenario,
    pub report: MergeReport,
}

/// Merges already extracted IRs; the last stage of [`compose`].
pub fn finish(textual: Scenario, visual: Scenario) -> Composition {
    let (merged, report) = merge(&textual, &visual);
    Composition {
        textual,
        visual,
        merged,
        report,
    }
}

/// Description and detections in, aligned scenario IR out.
pub fn compose(description: &str, detections: &DetectionSet, config: &PipelineConfig) -> Result<Composition, ExtractError> {
    let textual = extract_textual_ir(description, &config.fewshot, &config.provider)?;
    let visual = build_visual_ir(detections, &config.vision);
    Ok(finish(textual, visual))
}
