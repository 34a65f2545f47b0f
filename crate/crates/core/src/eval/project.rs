use crate::ir::{NpcActor, Scenario, Tri};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid field path `{path}`: {reason}")]
pub struct InvalidPath {
    pub path: String,
    pub reason: String,
}

/// The mask that removes the lane-index extension from every actor, for
/// comparisons with scenario languages that lack it.
pub const LANE_EXTENSION_MASK: &[&str] = &["ego_vehicle.lane_idx", "npc_actors[*].lane_idx"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Which {
    All,
    One(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FieldPath {
    Weather,
    Time,
    RoadType,
    TrafficSigns,
    TrafficLight,
    LaneNumber,
    Ego(ActorField),
    Npc(Which, ActorField),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ActorField {
    Behavior,
    Position,
    LaneIdx,
    Speed,
}

fn parse_path(path: &str) -> Result<FieldPath, InvalidPath> {
    let bad = |reason: String| InvalidPath {
        path: path.to_string(),
        reason,
    };
    let (head, field) = path
        .split_once('.')
        .ok_or_else(|| bad("expected <section>.<field>".into()))?;
    let actor_field = || match field {
        "behavior" => Ok(ActorField::Behavior),
        "position" => Ok(ActorField::Position),
        "lane_idx" => Ok(ActorField::LaneIdx),
        "speed" => Ok(ActorField::Speed),
        "actor_type" => Err(bad("actor_type is always stated and cannot be masked".into())),
        _ => Err(bad("unknown actor field".into())),
    };
    Ok(match (head, field) {
        ("environment", "weather") => FieldPath::Weather,
        ("environment", "time") => FieldPath::Time,
        ("road_network", "road_type") => FieldPath::RoadType,
        ("road_network", "traffic_signs") => FieldPath::TrafficSigns,
        ("road_network", "traffic_light") => FieldPath::TrafficLight,
        ("road_network", "lane_number") => FieldPath::LaneNumber,
        ("ego_vehicle", _) => FieldPath::Ego(actor_field()?),
        (h, _) if h.starts_with("npc_actors") => {
            let inner = h
                .strip_prefix("npc_actors[")
                .and_then(|r| r.strip_suffix(']'))
                .ok_or_else(|| bad("expected npc_actors[<index>|*]".into()))?;
            let which = if inner == "*" {
                Which::All
            } else {
                Which::One(inner.parse().map_err(|_| bad(format!("bad index `{inner}`")))?)
            };
            FieldPath::Npc(which, actor_field()?)
        }
        _ => return Err(bad("unknown field".into())),
    })
}

fn clear(a: &mut NpcActor, f: ActorField) {
    match f {
        ActorField::Behavior => a.behavior = Tri::Unspecified,
        ActorField::Position => a.position = Tri::Unspecified,
        ActorField::LaneIdx => a.lane_idx = Tri::Unspecified,
        ActorField::Speed => a.speed = Tri::Unspecified,
    }
}

fn apply(s: &mut Scenario, path: &str) -> Result<(), InvalidPath> {
    match parse_path(path)? {
        FieldPath::Weather => s.environment.weather = Tri::Unspecified,
        FieldPath::Time => s.environment.time = Tri::Unspecified,
        FieldPath::RoadType => s.road_network.road_type = Tri::Unspecified,
        FieldPath::TrafficSigns => s.road_network.traffic_signs.clear(),
        FieldPath::TrafficLight => s.road_network.traffic_light = Tri::Unspecified,
        FieldPath::LaneNumber => s.road_network.lane_number = Tri::Unspecified,
        FieldPath::Ego(f) => match f {
            ActorField::Behavior => s.ego.behavior = Tri::Unspecified,
            ActorField::Position => s.ego.position = Tri::Unspecified,
            ActorField::LaneIdx => s.ego.lane_idx = Tri::Unspecified,
            ActorField::Speed => s.ego.speed = Tri::Unspecified,
        },
        FieldPath::Npc(Which::All, f) => s.npc_actors.iter_mut().for_each(|a| clear(a, f)),
        FieldPath::Npc(Which::One(i), f) => {
            let len = s.npc_actors.len();
            let a = s.npc_actors.get_mut(i).ok_or_else(|| InvalidPath {
                path: path.to_string(),
                reason: format!("index {i} but only {len} actors"),
            })?;
            clear(a, f);
        }
    }
    Ok(())
}

/// Checks that every path names a maskable field, without a scenario.
/// Actor indices are only range-checked by [`project_fields`].
pub fn check_mask<S: AsRef<str>>(mask: &[S]) -> Result<(), InvalidPath> {
    mask.iter().try_for_each(|p| parse_path(p.as_ref()).map(|_| ()))
}

/// Makes every masked field unspecified. Paths use the document syntax,
/// with `npc_actors[*]` addressing every actor and `npc_actors[i]` one
/// actor in canonical order.
pub fn project_fields<S: AsRef<str>>(ir: &Scenario, mask: &[S]) -> Result<Scenario, InvalidPath> {
    let mut s = ir.clone().canonicalized();
    for path in mask {
        apply(&mut s, path.as_ref())?;
    }
    s.canonicalize();
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::parse_dsl;

    const DOC: &str = include_str!("../../assets/fewshot/example-1.scn.yaml");

    #[test]
    fn lane_mask_clears_every_lane_index() {
        let s = parse_dsl(DOC).unwrap();
        let p = project_fields(&s, LANE_EXTENSION_MASK).unwrap();
        assert!(p.npc_actors.iter().all(|a| a.lane_idx.is_unspecified()));
        assert!(p.ego.lane_idx.is_unspecified());
        assert_eq!(p.environment, s.environment);
        assert_eq!(p.npc_actors.len(), s.npc_actors.len());
    }

    #[test]
    fn empty_mask_is_identity() {
        let s = parse_dsl(DOC).unwrap();
        assert_eq!(project_fields::<&str>(&s, &[]).unwrap(), s);
    }

    #[test]
    fn unknown_paths_are_rejected() {
        let s = parse_dsl(DOC).unwrap();
        for path in ["environment.wind", "npc_actors[99].speed", "npc_actors[*].actor_type", "speed", "npc_actors[x].speed"] {
            assert!(project_fields(&s, &[path]).is_err(), "{path}");
        }
        assert!(check_mask(&["npc_actors[99].speed", "environment.time"]).is_ok());
        assert!(check_mask(&["ego_vehicle.actor_type"]).is_err());
    }
}
