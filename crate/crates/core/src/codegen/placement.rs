use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ir::{
    ActorKind, BehaviorKind, LightState, Position, ReferencePoint, RelativePosition, Scenario,
    TimeOfDay, TrafficSignKind, Tri, WeatherKind,
};

use super::catalog::MapSection;

pub const MPH_TO_MPS: f64 = 0.44704;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementConfig {
    /// Waypoints between a forward-moving actor's start and its target.
    pub advance_waypoints: usize,
    /// Inclusive range of the front/behind offset, in waypoints.
    pub offset_min: usize,
    pub offset_max: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        PlacementConfig {
            advance_waypoints: 10,
            offset_min: 2,
            offset_max: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Waypoint {
    pub lane_id: String,
    /// Index into the section's lanes; `None` for lanes of another leg.
    pub lane: Option<u32>,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedActor {
    pub name: String,
    pub is_ego: bool,
    pub actor_type: ActorKind,
    pub behavior: BehaviorKind,
    pub start: Waypoint,
    pub target: Waypoint,
    pub speed_mph: u32,
    pub speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DefaultRecord {
    pub path: String,
    pub value: String,
    pub seed: u64,
}

/// A scenario bound to a map section with every value resolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcreteScenario {
    pub section: MapSection,
    pub weather: WeatherKind,
    pub time: TimeOfDay,
    pub traffic_light: Option<LightState>,
    pub traffic_signs: Vec<TrafficSignKind>,
    pub ego: PlacedActor,
    pub npcs: Vec<PlacedActor>,
    pub defaults: Vec<DefaultRecord>,
}

impl ConcreteScenario {
    pub fn actors(&self) -> impl Iterator<Item = &PlacedActor> {
        std::iter::once(&self.ego).chain(self.npcs.iter())
    }

    /// One-line description of the road network, used as script header.
    pub fn road_header(&self) -> String {
        let signs = if self.traffic_signs.is_empty() {
            "none".to_string()
        } else {
            self.traffic_signs
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        format!(
            "road network: section {} | road_type {} | lanes {} | traffic_light {} | signs {}",
            self.section.id,
            self.section.road_type,
            self.section.lane_count,
            self.traffic_light.map_or("unspecified", |l| l.as_str()),
            signs
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PlacementError {
    #[error("no free waypoint left for {actor} (section {section} has {capacity} slots)")]
    PlacementOverflow {
        actor: String,
        section: String,
        capacity: usize,
    },
    #[error("{path} = {lane} but section {section} has {lanes} lanes")]
    LaneOutOfRange {
        path: String,
        lane: u32,
        section: String,
        lanes: u32,
    },
    #[error("{0} is unspecified; fill defaults before placement")]
    Unresolved(String),
}

fn resolved<V: Copy>(t: &Tri<V>, path: &str) -> Result<V, PlacementError> {
    t.get().ok_or_else(|| PlacementError::Unresolved(path.to_string()))
}

struct Slots<'s> {
    section: &'s MapSection,
    taken: HashSet<(u32, usize)>,
}

impl Slots<'_> {
    fn count(&self, lane: u32) -> usize {
        self.section.lanes[lane as usize].waypoint_count()
    }

    fn capacity(&self) -> usize {
        (0..self.section.lane_count).map(|l| self.count(l)).sum()
    }

    fn free(&self, lane: u32, index: usize) -> bool {
        index < self.count(lane) && !self.taken.contains(&(lane, index))
    }

    /// The free slot nearest to `(lane, index)`: same lane first, then
    /// neighbouring lanes, closer waypoints before farther ones.
    fn nearest(&self, lane: u32, index: usize) -> Option<(u32, usize)> {
        let mut all: Vec<(u32, usize)> = (0..self.section.lane_count)
            .flat_map(|l| (0..self.count(l)).map(move |w| (l, w)))
            .filter(|&(l, w)| self.free(l, w))
            .collect();
        all.sort_by_key(|&(l, w)| (l.abs_diff(lane), w.abs_diff(index), l, w));
        all.first().copied()
    }

    fn take(&mut self, slot: (u32, usize)) {
        self.taken.insert(slot);
    }

    fn waypoint(&self, lane: u32, index: usize) -> Waypoint {
        Waypoint {
            lane_id: self.section.lanes[lane as usize].lane_id.clone(),
            lane: Some(lane),
            index,
        }
    }
}

fn target(
    section: &MapSection,
    behavior: BehaviorKind,
    lane: u32,
    index: usize,
    advance: usize,
) -> Waypoint {
    let last = section.lane_count - 1;
    let ahead = |l: u32| {
        let n = section.lanes[l as usize].waypoint_count();
        Waypoint {
            lane_id: section.lanes[l as usize].lane_id.clone(),
            lane: Some(l),
            index: (index + advance).min(n - 1),
        }
    };
    let turn = |pick: fn(&super::catalog::Connections) -> Option<&String>| {
        section.lanes[lane as usize]
            .connections
            .as_ref()
            .and_then(pick)
            .map(|id| Waypoint {
                lane_id: id.clone(),
                lane: None,
                index: 0,
            })
    };
    match behavior {
        BehaviorKind::Static => Waypoint {
            lane_id: section.lanes[lane as usize].lane_id.clone(),
            lane: Some(lane),
            index,
        },
        BehaviorKind::GoForward => ahead(lane),
        BehaviorKind::ChangeLaneLeft => ahead(lane.saturating_sub(1)),
        BehaviorKind::ChangeLaneRight => ahead((lane + 1).min(last)),
        BehaviorKind::TurnLeft => turn(|c| c.left.as_ref()).unwrap_or_else(|| ahead(lane)),
        BehaviorKind::TurnRight => turn(|c| c.right.as_ref()).unwrap_or_else(|| ahead(lane)),
    }
}

fn default_records(s: &Scenario) -> Vec<DefaultRecord> {
    let mut out = Vec::new();
    let mut push = |path: String, value: Option<String>, seed: Option<u64>| {
        if let (Some(value), Some(seed)) = (value, seed) {
            out.push(DefaultRecord { path, value, seed });
        }
    };
    fn seed_of<V>(t: &Tri<V>) -> Option<u64> {
        match t {
            Tri::Defaulted { seed, .. } => Some(*seed),
            _ => None,
        }
    }
    push(
        "environment.weather".into(),
        s.environment.weather.value().map(|v| v.to_string()),
        seed_of(&s.environment.weather),
    );
    push(
        "environment.time".into(),
        s.environment.time.value().map(|v| v.to_string()),
        seed_of(&s.environment.time),
    );
    push(
        "ego_vehicle.behavior".into(),
        s.ego.behavior.value().map(|v| v.to_string()),
        seed_of(&s.ego.behavior),
    );
    push(
        "ego_vehicle.speed".into(),
        s.ego.speed.value().map(|v| v.to_string()),
        seed_of(&s.ego.speed),
    );
    for (i, a) in s.npc_actors.iter().enumerate() {
        push(
            format!("npc_actors[{i}].behavior"),
            a.behavior.value().map(|v| v.to_string()),
            seed_of(&a.behavior),
        );
        push(
            format!("npc_actors[{i}].speed"),
            a.speed.value().map(|v| v.to_string()),
            seed_of(&a.speed),
        );
    }
    out
}

fn check_lane(path: String, lane: u32, section: &MapSection) -> Result<u32, PlacementError> {
    if lane < section.lane_count {
        Ok(lane)
    } else {
        Err(PlacementError::LaneOutOfRange {
            path,
            lane,
            section: section.id.clone(),
            lanes: section.lane_count,
        })
    }
}

/// Places the ego and then every NPC (canonical order) on `section`.
/// Starts are pairwise distinct; an actor whose preferred slots are all
/// taken gets the nearest free one.
pub fn place_actors(
    scenario: &Scenario,
    section: &MapSection,
    seed: u64,
    config: &PlacementConfig,
) -> Result<ConcreteScenario, PlacementError> {
    let scenario = scenario.clone().canonicalized();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut slots = Slots {
        section,
        taken: HashSet::new(),
    };
    let capacity = slots.capacity();
    let overflow = |actor: &str| PlacementError::PlacementOverflow {
        actor: actor.to_string(),
        section: section.id.clone(),
        capacity,
    };

    let ego_lane = check_lane(
        "ego_vehicle.lane_idx".into(),
        scenario.ego.lane_idx.get().unwrap_or(0),
        section,
    )?;
    let n = slots.count(ego_lane);
    let ego_index = ((n - 1) / 2).min((n - 1).saturating_sub(config.advance_waypoints));
    slots.take((ego_lane, ego_index));
    let ego_behavior = resolved(&scenario.ego.behavior, "ego_vehicle.behavior")?;
    let ego_speed = resolved(&scenario.ego.speed, "ego_vehicle.speed")?;
    let ego = PlacedActor {
        name: "ego".into(),
        is_ego: true,
        actor_type: ActorKind::Car,
        behavior: ego_behavior,
        start: slots.waypoint(ego_lane, ego_index),
        target: target(section, ego_behavior, ego_lane, ego_index, config.advance_waypoints),
        speed_mph: ego_speed,
        speed_mps: f64::from(ego_speed) * MPH_TO_MPS,
    };

    let stop_index = |lane: u32| -> Option<usize> {
        let l = &section.lanes[lane as usize];
        section
            .stop_line_m
            .map(|m| ((m / l.waypoint_spacing_m).round() as usize).min(l.waypoint_count() - 1))
    };

    let mut npcs = Vec::with_capacity(scenario.npc_actors.len());
    for (i, npc) in scenario.npc_actors.iter().enumerate() {
        let name = format!("npc_{}", i + 1);
        let behavior = resolved(&npc.behavior, &format!("npc_actors[{i}].behavior"))?;
        let speed = resolved(&npc.speed, &format!("npc_actors[{i}].speed"))?;
        let position: Option<Position> = npc.position.get();
        let rel = position.map(|p| p.relative_position);
        let last = section.lane_count - 1;
        let lane = match (npc.lane_idx.get(), rel) {
            (Some(l), _) => check_lane(format!("npc_actors[{i}].lane_idx"), l, section)?,
            (None, Some(RelativePosition::Left | RelativePosition::FrontLeft)) => ego_lane.saturating_sub(1),
            (None, Some(RelativePosition::Right | RelativePosition::FrontRight)) => (ego_lane + 1).min(last),
            _ => ego_lane,
        };
        let count = slots.count(lane);
        let anchor = match position.map(|p| p.reference_point) {
            Some(ReferencePoint::EgoVehicle) | None => ego_index,
            Some(_) => stop_index(lane).unwrap_or(ego_index),
        }
        .min(count - 1);

        let preferred: Vec<usize> = match rel {
            Some(RelativePosition::Front | RelativePosition::FrontLeft | RelativePosition::FrontRight) => {
                let d = rng.random_range(config.offset_min..=config.offset_max);
                (anchor + d..count).collect()
            }
            Some(RelativePosition::Behind) => {
                let d = rng.random_range(config.offset_min..=config.offset_max);
                if anchor >= d {
                    (0..=anchor - d).rev().collect()
                } else {
                    Vec::new()
                }
            }
            _ => Vec::new(),
        };
        let slot = preferred
            .into_iter()
            .find(|&w| slots.free(lane, w))
            .map(|w| (lane, w))
            .or_else(|| slots.nearest(lane, anchor))
            .ok_or_else(|| overflow(&name))?;
        slots.take(slot);
        npcs.push(PlacedActor {
            name,
            is_ego: false,
            actor_type: npc.actor_type,
            behavior,
            start: slots.waypoint(slot.0, slot.1),
            target: target(section, behavior, slot.0, slot.1, config.advance_waypoints),
            speed_mph: speed,
            speed_mps: f64::from(speed) * MPH_TO_MPS,
        });
    }

    let mut traffic_signs = scenario.road_network.traffic_signs.clone();
    traffic_signs.sort_by_key(|k| k.as_str());
    Ok(ConcreteScenario {
        section: section.clone(),
        weather: resolved(&scenario.environment.weather, "environment.weather")?,
        time: resolved(&scenario.environment.time, "environment.time")?,
        traffic_light: scenario.road_network.traffic_light.get(),
        traffic_signs,
        ego,
        npcs,
        defaults: default_records(&scenario),
    })
}
