use std::fmt;
use std::str::FromStr;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codegen::{DEFAULT_BEHAVIOR, DEFAULT_TIME, DEFAULT_WEATHER, MAX_DEFAULT_SPEED_MPH};
use crate::ir::{
    validate, ActorKind, BehaviorKind, NpcActor, Position, Provenance, RelativePosition, Scenario,
    TimeOfDay, Tri, WeatherKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    AddActor,
    MoveStart,
    MoveTarget,
    SetWeather,
    SetTime,
    SetSpeed,
    SetVehicleType,
}

impl MutationKind {
    pub const ALL: [MutationKind; 7] = [
        MutationKind::AddActor,
        MutationKind::MoveStart,
        MutationKind::MoveTarget,
        MutationKind::SetWeather,
        MutationKind::SetTime,
        MutationKind::SetSpeed,
        MutationKind::SetVehicleType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MutationKind::AddActor => "add_actor",
            MutationKind::MoveStart => "move_start",
            MutationKind::MoveTarget => "move_target",
            MutationKind::SetWeather => "set_weather",
            MutationKind::SetTime => "set_time",
            MutationKind::SetSpeed => "set_speed",
            MutationKind::SetVehicleType => "set_vehicle_type",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MutationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mutation `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{op} is inapplicable: {reason}")]
pub struct MutationInapplicable {
    pub op: MutationKind,
    pub reason: String,
}

/// Which actor a per-actor mutation touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Who {
    Ego,
    Npc(usize),
}

fn lane_bound(s: &Scenario) -> u32 {
    s.road_network.lane_number.get().unwrap_or_else(|| {
        let lanes = std::iter::once(s.ego.lane_idx.get())
            .chain(s.npc_actors.iter().map(|a| a.lane_idx.get()))
            .flatten();
        lanes.max().map_or(1, |m| m + 1)
    })
}

/// Lane/position cells free for an NPC, in a seeded random order.
fn free_cells(s: &Scenario, skip: Option<usize>, rng: &mut ChaCha8Rng) -> Vec<(u32, RelativePosition)> {
    let mut cells: Vec<(u32, RelativePosition)> = (0..lane_bound(s))
        .flat_map(|l| RelativePosition::ALL.iter().map(move |&r| (l, r)))
        .collect();
    cells.shuffle(rng);
    cells
        .into_iter()
        .filter(|&(l, r)| {
            let mut probe = s.clone();
            let npc = match skip {
                Some(i) => &mut probe.npc_actors[i],
                None => {
                    probe.npc_actors.push(NpcActor::new(ActorKind::Car));
                    probe.npc_actors.last_mut().expect("pushed")
                }
            };
            npc.lane_idx = Tri::Specified(l);
            npc.position = Tri::Specified(Position::of_ego(r));
            validate(&probe).is_valid()
        })
        .collect()
}

fn other<T: Copy + PartialEq>(all: &[T], current: T, rng: &mut ChaCha8Rng) -> Option<T> {
    let rest: Vec<T> = all.iter().copied().filter(|&v| v != current).collect();
    rest.choose(rng).copied()
}

fn pick_actor(s: &Scenario, rng: &mut ChaCha8Rng) -> Who {
    let i = rng.random_range(0..=s.npc_actors.len());
    if i == 0 {
        Who::Ego
    } else {
        Who::Npc(i - 1)
    }
}

/// Applies one mutation operator. The result validates and the same
/// `(scenario, op, seed)` always gives the same result.
pub fn mutate(s: &Scenario, op: MutationKind, seed: u64) -> Result<Scenario, MutationInapplicable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = s.clone().canonicalized();
    let nope = |reason: &str| MutationInapplicable {
        op,
        reason: reason.to_string(),
    };
    match op {
        MutationKind::AddActor => {
            let &(lane, rel) = free_cells(&out, None, &mut rng)
                .first()
                .ok_or_else(|| nope("no free lane/position cell"))?;
            let mut npc = NpcActor::new(*ActorKind::ALL.choose(&mut rng).expect("non-empty"));
            npc.lane_idx = Tri::Specified(lane);
            npc.position = Tri::Specified(Position::of_ego(rel));
            npc.behavior = Tri::Specified(*BehaviorKind::ALL.choose(&mut rng).expect("non-empty"));
            npc.speed = Tri::Specified(rng.random_range(0..=MAX_DEFAULT_SPEED_MPH));
            npc.provenance = Provenance::Text;
            out.npc_actors.push(npc);
        }
        MutationKind::MoveStart => {
            if out.npc_actors.is_empty() {
                let lanes = lane_bound(&out);
                let current = out.ego.lane_idx.get().unwrap_or(0);
                let all: Vec<u32> = (0..lanes).collect();
                let lane = other(&all, current, &mut rng).ok_or_else(|| nope("single-lane road and no NPC"))?;
                let mut probe = out.clone();
                probe.ego.lane_idx = Tri::Specified(lane);
                if !validate(&probe).is_valid() {
                    return Err(nope("ego lane change would overlap an actor"));
                }
                out = probe;
            } else {
                let i = rng.random_range(0..out.npc_actors.len());
                let current = (out.npc_actors[i].lane_idx.get(), out.npc_actors[i].relative_position());
                let &(lane, rel) = free_cells(&out, Some(i), &mut rng)
                    .iter()
                    .find(|&&(l, r)| (Some(l), Some(r)) != current)
                    .ok_or_else(|| nope("no other free cell"))?;
                let npc = &mut out.npc_actors[i];
                npc.lane_idx = Tri::Specified(lane);
                npc.position = Tri::Specified(Position::of_ego(rel));
            }
        }
        MutationKind::MoveTarget => {
            let who = pick_actor(&out, &mut rng);
            let slot = match who {
                Who::Ego => &mut out.ego.behavior,
                Who::Npc(i) => &mut out.npc_actors[i].behavior,
            };
            let current = slot.get().unwrap_or(DEFAULT_BEHAVIOR);
            let b = other(BehaviorKind::ALL, current, &mut rng).expect("several behaviors");
            *slot = Tri::Specified(b);
        }
        MutationKind::SetWeather => {
            let current = out.environment.weather.get().unwrap_or(DEFAULT_WEATHER);
            let w = other(WeatherKind::ALL, current, &mut rng).expect("several weathers");
            out.environment.weather = Tri::Specified(w);
        }
        MutationKind::SetTime => {
            let current = out.environment.time.get().unwrap_or(DEFAULT_TIME);
            let t = other(TimeOfDay::ALL, current, &mut rng).expect("two times");
            out.environment.time = Tri::Specified(t);
        }
        MutationKind::SetSpeed => {
            let who = pick_actor(&out, &mut rng);
            let slot = match who {
                Who::Ego => &mut out.ego.speed,
                Who::Npc(i) => &mut out.npc_actors[i].speed,
            };
            let all: Vec<u32> = (0..=MAX_DEFAULT_SPEED_MPH).collect();
            let current = slot.get().unwrap_or(u32::MAX);
            let v = other(&all, current, &mut rng).expect("31 speeds");
            *slot = Tri::Specified(v);
        }
        MutationKind::SetVehicleType => {
            let vehicles: Vec<usize> = (0..out.npc_actors.len())
                .filter(|&i| out.npc_actors[i].actor_type.is_vehicle())
                .collect();
            let &i = vehicles.choose(&mut rng).ok_or_else(|| nope("no NPC vehicle"))?;
            let current = out.npc_actors[i].actor_type;
            out.npc_actors[i].actor_type = other(ActorKind::VEHICLES, current, &mut rng).expect("several vehicles");
        }
    }
    out.canonicalize();
    debug_assert!(validate(&out).is_valid());
    Ok(out)
}
