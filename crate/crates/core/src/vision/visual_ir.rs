use std::cmp::Ordering;

use crate::ir::{
    LightState, NpcActor, Position, Provenance, RelativePosition, Scenario, TrafficSignKind, Tri,
};

use super::detections::{BoxClass, Detection, DetectionSet, LightColor, DEFAULT_CONFIDENCE_FLOOR};
use super::lanes::{assign_lanes, boundary_x_at, ego_anchor, LaneAssignment};

/// Tunables of the visual front-end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisionConfig {
    pub confidence_floor: f64,
    /// Same-class boxes overlapping more than this are one object.
    pub dedup_iou: f64,
    /// Fraction of image height an anchor must sit above the ego anchor to
    /// count as in front.
    pub front_margin: f64,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            confidence_floor: DEFAULT_CONFIDENCE_FLOOR,
            dedup_iou: 0.9,
            front_margin: 0.02,
        }
    }
}

fn detection_order(a: &Detection, b: &Detection) -> Ordering {
    a.class
        .cmp(&b.class)
        .then_with(|| b.confidence.total_cmp(&a.confidence))
        .then_with(|| a.bbox.x_min.total_cmp(&b.bbox.x_min))
        .then_with(|| a.bbox.y_min.total_cmp(&b.bbox.y_min))
        .then_with(|| a.bbox.x_max.total_cmp(&b.bbox.x_max))
        .then_with(|| a.bbox.y_max.total_cmp(&b.bbox.y_max))
}

/// Sorts boxes deterministically and drops same-class duplicates whose IoU
/// with an already kept box exceeds `iou`. The most confident box of each
/// duplicate group survives.
pub fn dedup_boxes(boxes: &[Detection], iou: f64) -> Vec<Detection> {
    let mut sorted = boxes.to_vec();
    sorted.sort_by(detection_order);
    let mut kept: Vec<Detection> = Vec::with_capacity(sorted.len());
    for b in sorted {
        if !kept
            .iter()
            .any(|k| k.class == b.class && k.bbox.iou(&b.bbox) > iou)
        {
            kept.push(b);
        }
    }
    kept
}

fn light_state(boxes: &[Detection]) -> Tri<LightState> {
    boxes
        .iter()
        .filter(|b| b.class == BoxClass::TrafficLight)
        .filter_map(|b| b.light_state.map(|s| (b.confidence, s)))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .map_or(Tri::Unspecified, |(_, s)| {
            Tri::Specified(match s {
                LightColor::Red => LightState::RedLight,
                LightColor::Green => LightState::GreenLight,
            })
        })
}

fn signs(boxes: &[Detection]) -> Vec<TrafficSignKind> {
    let mut kinds: Vec<TrafficSignKind> = boxes
        .iter()
        .filter(|b| b.class == BoxClass::TrafficSign)
        .filter_map(|b| b.sign_kind)
        .collect();
    kinds.sort_by_key(|k| k.as_str());
    kinds.dedup();
    kinds
}

fn relative_position(
    ds: &DetectionSet,
    lanes: &LaneAssignment,
    lane: Option<u32>,
    anchor: (f64, f64),
    front_margin: f64,
) -> RelativePosition {
    let (_, ego_y) = ego_anchor(ds);
    let front = anchor.1 < ego_y - front_margin * ds.image_size.height;
    match lane {
        Some(l) if l == lanes.ego_lane => {
            if front {
                RelativePosition::Front
            } else {
                RelativePosition::Behind
            }
        }
        Some(l) if l < lanes.ego_lane => {
            if front {
                RelativePosition::FrontLeft
            } else {
                RelativePosition::Left
            }
        }
        Some(_) => {
            if front {
                RelativePosition::FrontRight
            } else {
                RelativePosition::Right
            }
        }
        None => {
            let leftmost = ds
                .lane_boundaries
                .iter()
                .map(|b| boundary_x_at(b, anchor.1))
                .fold(f64::INFINITY, f64::min);
            if anchor.0 <= leftmost {
                RelativePosition::Left
            } else {
                RelativePosition::Right
            }
        }
    }
}

/// Builds the visual scenario IR of one detection set. Boxes below the
/// confidence floor are ignored. Without at least two lane boundaries the
/// IR carries no lanes and no actor positions.
pub fn build_visual_ir(ds: &DetectionSet, config: &VisionConfig) -> Scenario {
    let boxes: Vec<Detection> = ds
        .boxes
        .iter()
        .filter(|b| b.confidence >= config.confidence_floor)
        .cloned()
        .collect();
    let boxes = dedup_boxes(&boxes, config.dedup_iou);
    let kept = DetectionSet {
        image_size: ds.image_size,
        boxes,
        lane_boundaries: ds.lane_boundaries.clone(),
    };
    let assignment = assign_lanes(&kept).ok();

    let mut scenario = Scenario::default();
    scenario.road_network.traffic_light = light_state(&kept.boxes);
    scenario.road_network.traffic_signs = signs(&kept.boxes);
    if let Some(a) = &assignment {
        scenario.road_network.lane_number = Tri::Specified(a.lane_count);
        scenario.ego.lane_idx = Tri::Specified(a.ego_lane);
    }

    for (i, b) in kept.boxes.iter().enumerate() {
        let BoxClass::Actor(kind) = b.class else {
            continue;
        };
        let mut npc = NpcActor::new(kind);
        npc.provenance = Provenance::Visual;
        if let Some(a) = &assignment {
            let lane = a.lanes[i];
            npc.lane_idx = lane.into();
            let rel = relative_position(&kept, a, lane, b.bbox.anchor(), config.front_margin);
            npc.position = Tri::Specified(Position::of_ego(rel));
        }
        scenario.npc_actors.push(npc);
    }
    scenario.canonicalized()
}
