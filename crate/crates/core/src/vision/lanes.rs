use serde::Serialize;

use super::detections::{DetectionSet, Polyline};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaneError {
    #[error("lane assignment needs at least 2 lane boundaries, found {found}")]
    NoLanes { found: usize },
}

/// Lane occupancy for every box of a detection set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LaneAssignment {
    /// Parallel to `DetectionSet::boxes`; `None` when the anchor lies
    /// outside the outermost boundaries.
    pub lanes: Vec<Option<u32>>,
    pub ego_lane: u32,
    pub lane_count: u32,
}

/// x coordinate of a polyline at height `y`. Rows above or below the
/// polyline extend its first or last segment.
pub fn boundary_x_at(poly: &Polyline, y: f64) -> f64 {
    debug_assert!(poly.len() >= 2);
    let seg = poly
        .windows(2)
        .position(|w| y <= w[1].1)
        .unwrap_or(poly.len() - 2);
    let (x0, y0) = poly[seg];
    let (x1, y1) = poly[seg + 1];
    x0 + (x1 - x0) * (y - y0) / (y1 - y0)
}

/// Number of boundaries passing strictly left of `(x, y)`.
pub fn boundaries_left_of(boundaries: &[Polyline], x: f64, y: f64) -> usize {
    boundaries
        .iter()
        .filter(|b| boundary_x_at(b, y) < x)
        .count()
}

/// Lane index of a point, `None` outside the outermost boundaries.
pub fn lane_of_point(boundaries: &[Polyline], x: f64, y: f64) -> Option<u32> {
    let left = boundaries_left_of(boundaries, x, y);
    (left >= 1 && left < boundaries.len()).then(|| (left - 1) as u32)
}

pub fn assign_lanes(ds: &DetectionSet) -> Result<LaneAssignment, LaneError> {
    let bounds = &ds.lane_boundaries;
    if bounds.len() < 2 {
        return Err(LaneError::NoLanes { found: bounds.len() });
    }
    let lane_count = bounds.len() as u32 - 1;
    let lanes = ds
        .boxes
        .iter()
        .map(|b| {
            let (x, y) = b.bbox.anchor();
            lane_of_point(bounds, x, y)
        })
        .collect();
    let (ex, ey) = ego_anchor(ds);
    let left = boundaries_left_of(bounds, ex, ey);
    let ego_lane = (left.max(1) - 1).min(lane_count as usize - 1) as u32;
    Ok(LaneAssignment {
        lanes,
        ego_lane,
        lane_count,
    })
}

/// The image bottom-center, where a dashboard camera sits.
pub fn ego_anchor(ds: &DetectionSet) -> (f64, f64) {
    (ds.image_size.width / 2.0, ds.image_size.height)
}
