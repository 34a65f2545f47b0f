//! The native scenario format of the kinematic testbed.

use serde::{Deserialize, Serialize};

use crate::ir::{ActorKind, BehaviorKind, LightState, TimeOfDay, WeatherKind};

use super::placement::{ConcreteScenario, PlacedActor};

pub const MINISIM_FORMAT: &str = "minisim/1";
pub const VEHICLE_LENGTH_M: f64 = 4.5;
pub const PEDESTRIAN_LENGTH_M: f64 = 0.5;
pub const RED_PHASE_S: f64 = 8.0;
pub const GREEN_PHASE_S: f64 = 12.0;

pub fn actor_length(kind: ActorKind) -> f64 {
    if kind == ActorKind::Pedestrian {
        PEDESTRIAN_LENGTH_M
    } else {
        VEHICLE_LENGTH_M
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Red,
    Green,
}

/// A light that alternates between red and green phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LightCycle {
    pub initial: Phase,
    pub red_s: f64,
    pub green_s: f64,
}

impl LightCycle {
    pub fn phase_at(&self, t: f64) -> Phase {
        let (first, first_len, second_len) = match self.initial {
            Phase::Red => (Phase::Red, self.red_s, self.green_s),
            Phase::Green => (Phase::Green, self.green_s, self.red_s),
        };
        let period = first_len + second_len;
        if period <= 0.0 {
            return first;
        }
        if t.rem_euclid(period) < first_len {
            first
        } else {
            match first {
                Phase::Red => Phase::Green,
                Phase::Green => Phase::Red,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinisimLane {
    pub lane_id: String,
    pub length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinisimEnvironment {
    pub weather: WeatherKind,
    pub time: TimeOfDay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinisimActor {
    pub name: String,
    pub ego: bool,
    pub actor_type: ActorKind,
    pub behavior: BehaviorKind,
    pub lane: u32,
    /// Front bumper position along the lane, meters.
    pub s_m: f64,
    pub speed_mps: f64,
    pub length_m: f64,
    pub target_lane: u32,
    pub target_s_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinisimScenario {
    pub format: String,
    pub road_network: String,
    pub section_id: String,
    pub lanes: Vec<MinisimLane>,
    #[serde(default)]
    pub stop_line_m: Option<f64>,
    #[serde(default)]
    pub traffic_light: Option<LightCycle>,
    pub environment: MinisimEnvironment,
    pub actors: Vec<MinisimActor>,
}

fn lower_actor(cs: &ConcreteScenario, a: &PlacedActor) -> MinisimActor {
    let lanes = &cs.section.lanes;
    let start_lane = a.start.lane.expect("starts lie on the section");
    let spacing = lanes[start_lane as usize].waypoint_spacing_m;
    let (target_lane, target_s_m) = match a.target.lane {
        Some(l) => (l, a.target.index as f64 * lanes[l as usize].waypoint_spacing_m),
        // Turning onto another leg: the actor leaves through the lane end.
        None => (start_lane, lanes[start_lane as usize].length_m),
    };
    MinisimActor {
        name: a.name.clone(),
        ego: a.is_ego,
        actor_type: a.actor_type,
        behavior: a.behavior,
        lane: start_lane,
        s_m: a.start.index as f64 * spacing,
        speed_mps: a.speed_mps,
        length_m: actor_length(a.actor_type),
        target_lane,
        target_s_m,
    }
}

pub fn to_minisim(cs: &ConcreteScenario) -> MinisimScenario {
    let traffic_light = if cs.section.has_traffic_light {
        match cs.traffic_light {
            Some(LightState::Absent) => None,
            Some(LightState::RedLight) => Some(Phase::Red),
            Some(LightState::GreenLight) | None => Some(Phase::Green),
        }
    } else {
        None
    }
    .map(|initial| LightCycle {
        initial,
        red_s: RED_PHASE_S,
        green_s: GREEN_PHASE_S,
    });
    MinisimScenario {
        format: MINISIM_FORMAT.to_string(),
        road_network: cs.road_header(),
        section_id: cs.section.id.clone(),
        lanes: cs
            .section
            .lanes
            .iter()
            .map(|l| MinisimLane {
                lane_id: l.lane_id.clone(),
                length_m: l.length_m,
            })
            .collect(),
        stop_line_m: cs.section.stop_line_m,
        traffic_light,
        environment: MinisimEnvironment {
            weather: cs.weather,
            time: cs.time,
        },
        actors: cs.actors().map(|a| lower_actor(cs, a)).collect(),
    }
}

impl MinisimScenario {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("minisim serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<MinisimScenario, serde_json::Error> {
        serde_json::from_str(text)
    }
}
