use std::fmt;

use super::model::{Position, Scenario, Tri};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// `lane_idx` not below the road network's `lane_number`.
    LaneOutOfRange,
    /// Two actors at the same lane index and position.
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Valid apart from same-cell overlaps. Image-derived IRs routinely
    /// hold several vehicles in one lane ahead of the ego, which the coarse
    /// position vocabulary cannot tell apart; downstream passes tolerate
    /// that and placement spaces them out.
    pub fn is_structurally_valid(&self) -> bool {
        self.violations
            .iter()
            .all(|v| v.kind == ViolationKind::Overlap)
    }

    pub fn at(&self, path: &str) -> Option<&Violation> {
        self.violations.iter().find(|v| v.path == path)
    }
}

fn located(lane: &Tri<u32>, position: &Tri<Position>) -> Option<(u32, Position)> {
    Some((lane.get()?, position.get()?))
}

pub fn validate(scenario: &Scenario) -> ValidationReport {
    let mut violations = Vec::new();
    let lanes = scenario.road_network.lane_number.get();

    let mut actors: Vec<(String, &Tri<u32>, &Tri<Position>)> =
        vec![("ego_vehicle".to_string(), &scenario.ego.lane_idx, &scenario.ego.position)];
    for (i, npc) in scenario.npc_actors.iter().enumerate() {
        actors.push((format!("npc_actors[{i}]"), &npc.lane_idx, &npc.position));
    }

    if let Some(n) = lanes {
        for (path, lane, _) in &actors {
            if let Some(idx) = lane.get() {
                if idx >= n {
                    violations.push(Violation {
                        path: format!("{path}.lane_idx"),
                        kind: ViolationKind::LaneOutOfRange,
                        message: format!("lane index {idx} outside 0..{n}"),
                    });
                }
            }
        }
    }

    for (j, (path, lane, pos)) in actors.iter().enumerate() {
        let Some(cell) = located(lane, pos) else {
            continue;
        };
        if let Some((other, _, _)) = actors[..j]
            .iter()
            .find(|(_, l, p)| located(l, p) == Some(cell))
        {
            violations.push(Violation {
                path: path.clone(),
                kind: ViolationKind::Overlap,
                message: format!(
                    "same lane {} and position {} {} as {other}",
                    cell.0, cell.1.relative_position, cell.1.reference_point
                ),
            });
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::model::NpcActor;
    use crate::ir::vocab::{ActorKind, RelativePosition};

    fn npc(lane: u32, rel: RelativePosition) -> NpcActor {
        let mut a = NpcActor::new(ActorKind::Car);
        a.lane_idx = Tri::Specified(lane);
        a.position = Tri::Specified(Position::of_ego(rel));
        a
    }

    #[test]
    fn valid_scenario_has_empty_report() {
        let mut s = Scenario::default();
        s.road_network.lane_number = Tri::Specified(3);
        s.npc_actors = vec![npc(0, RelativePosition::Front), npc(1, RelativePosition::Front)];
        assert!(validate(&s).is_valid());
    }

    #[test]
    fn lane_out_of_range_is_reported_with_path() {
        let mut s = Scenario::default();
        s.road_network.lane_number = Tri::Specified(3);
        s.npc_actors = vec![npc(5, RelativePosition::Front)];
        let report = validate(&s);
        let v = report.at("npc_actors[0].lane_idx").expect("violation");
        assert_eq!(v.kind, ViolationKind::LaneOutOfRange);
    }

    #[test]
    fn identical_positions_overlap() {
        let mut s = Scenario::default();
        s.npc_actors = vec![npc(1, RelativePosition::Front), npc(1, RelativePosition::Front)];
        let report = validate(&s);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].kind, ViolationKind::Overlap);
        assert!(report.is_structurally_valid());
        assert!(!report.is_valid());
    }
}
