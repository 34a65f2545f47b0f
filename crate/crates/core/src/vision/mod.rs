//! Visual front-end: detections JSON, lane occupancy and the visual
//! scenario IR.

mod detections;
mod lanes;
mod visual_ir;

pub use detections::{
    detections_from_value, load_detections, parse_detections, BBox, BoxClass, Detection,
    DetectionError, DetectionSet, ImageSize, LightColor, Polyline, DEFAULT_CONFIDENCE_FLOOR,
    DETECTIONS_SCHEMA,
};
pub use lanes::{
    assign_lanes, boundaries_left_of, boundary_x_at, ego_anchor, lane_of_point, LaneAssignment,
    LaneError,
};
pub use visual_ir::{build_visual_ir, dedup_boxes, VisionConfig};
