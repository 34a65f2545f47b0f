use std::cmp::Ordering;

use super::vocab::{
    ActorKind, BehaviorKind, LightState, ReferencePoint, RelativePosition, RoadType, TimeOfDay,
    TrafficSignKind, WeatherKind,
};

/// A field value that is either stated by an input, absent, or filled in
/// later from a default. Defaulted values remember the seed that produced
/// them so a rerun can reproduce them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Tri<V> {
    Specified(V),
    #[default]
    Unspecified,
    Defaulted { value: V, seed: u64 },
}

impl<V> Tri<V> {
    /// The carried value for specified and defaulted fields.
    pub fn value(&self) -> Option<&V> {
        match self {
            Tri::Specified(v) | Tri::Defaulted { value: v, .. } => Some(v),
            Tri::Unspecified => None,
        }
    }

    pub fn is_unspecified(&self) -> bool {
        matches!(self, Tri::Unspecified)
    }

    pub fn is_known(&self) -> bool {
        !self.is_unspecified()
    }

    pub fn is_defaulted(&self) -> bool {
        matches!(self, Tri::Defaulted { .. })
    }

    /// Returns `self` when it carries a value, otherwise `fallback`.
    pub fn or(self, fallback: Tri<V>) -> Tri<V> {
        if self.is_known() {
            self
        } else {
            fallback
        }
    }

    pub fn map<U>(self, f: impl FnOnce(V) -> U) -> Tri<U> {
        match self {
            Tri::Specified(v) => Tri::Specified(f(v)),
            Tri::Unspecified => Tri::Unspecified,
            Tri::Defaulted { value, seed } => Tri::Defaulted {
                value: f(value),
                seed,
            },
        }
    }
}

impl<V: Copy> Tri<V> {
    pub fn get(&self) -> Option<V> {
        self.value().copied()
    }
}

impl<V> From<Option<V>> for Tri<V> {
    fn from(v: Option<V>) -> Self {
        match v {
            Some(v) => Tri::Specified(v),
            None => Tri::Unspecified,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Position {
    pub reference_point: ReferencePoint,
    pub relative_position: RelativePosition,
}

impl Position {
    pub fn new(reference_point: ReferencePoint, relative_position: RelativePosition) -> Self {
        Position {
            reference_point,
            relative_position,
        }
    }

    /// Position relative to the ego vehicle.
    pub fn of_ego(relative_position: RelativePosition) -> Self {
        Position::new(ReferencePoint::EgoVehicle, relative_position)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Environment {
    pub weather: Tri<WeatherKind>,
    pub time: Tri<TimeOfDay>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoadNetwork {
    pub road_type: Tri<RoadType>,
    pub traffic_signs: Vec<TrafficSignKind>,
    pub traffic_light: Tri<LightState>,
    pub lane_number: Tri<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EgoActor {
    pub behavior: Tri<BehaviorKind>,
    pub position: Tri<Position>,
    pub lane_idx: Tri<u32>,
    /// Miles per hour.
    pub speed: Tri<u32>,
}

/// Which front-end an actor came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Provenance {
    #[default]
    Text,
    Visual,
    Both,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Text => "text",
            Provenance::Visual => "visual",
            Provenance::Both => "both",
        }
    }

    pub fn parse(s: &str) -> Option<Provenance> {
        match s {
            "text" => Some(Provenance::Text),
            "visual" => Some(Provenance::Visual),
            "both" => Some(Provenance::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NpcActor {
    pub actor_type: ActorKind,
    pub behavior: Tri<BehaviorKind>,
    pub position: Tri<Position>,
    pub lane_idx: Tri<u32>,
    /// Miles per hour.
    pub speed: Tri<u32>,
    pub provenance: Provenance,
}

impl NpcActor {
    pub fn new(actor_type: ActorKind) -> Self {
        NpcActor {
            actor_type,
            behavior: Tri::Unspecified,
            position: Tri::Unspecified,
            lane_idx: Tri::Unspecified,
            speed: Tri::Unspecified,
            provenance: Provenance::Text,
        }
    }

    pub fn relative_position(&self) -> Option<RelativePosition> {
        self.position.get().map(|p| p.relative_position)
    }

    /// Ordering used everywhere actors must be listed deterministically:
    /// lane index (unknown last), relative-position rank (unknown last),
    /// actor type, then the remaining fields as a total tie-break.
    pub fn canonical_cmp(&self, other: &NpcActor) -> Ordering {
        let lane = |a: &NpcActor| a.lane_idx.get().map(u64::from).unwrap_or(u64::MAX);
        let rel = |a: &NpcActor| a.relative_position().map(|r| r.rank()).unwrap_or(u8::MAX);
        lane(self)
            .cmp(&lane(other))
            .then_with(|| rel(self).cmp(&rel(other)))
            .then_with(|| self.actor_type.as_str().cmp(other.actor_type.as_str()))
            .then_with(|| tri_key(&self.behavior).cmp(&tri_key(&other.behavior)))
            .then_with(|| tri_key(&self.speed).cmp(&tri_key(&other.speed)))
            .then_with(|| tri_key(&self.position).cmp(&tri_key(&other.position)))
            .then_with(|| tri_key(&self.lane_idx).cmp(&tri_key(&other.lane_idx)))
            .then_with(|| self.provenance.cmp(&other.provenance))
    }
}

fn tri_key<V: Ord + Copy>(t: &Tri<V>) -> (u8, Option<V>, u64) {
    match *t {
        Tri::Specified(v) => (0, Some(v), 0),
        Tri::Defaulted { value, seed } => (1, Some(value), seed),
        Tri::Unspecified => (2, None, 0),
    }
}

/// A complete scenario IR. `npc_actors` is kept in canonical order by the
/// constructors in this crate; call [`Scenario::canonicalize`] after
/// editing the list by hand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scenario {
    pub environment: Environment,
    pub road_network: RoadNetwork,
    pub ego: EgoActor,
    pub npc_actors: Vec<NpcActor>,
}

impl Scenario {
    pub fn new(
        environment: Environment,
        road_network: RoadNetwork,
        ego: EgoActor,
        npc_actors: Vec<NpcActor>,
    ) -> Self {
        let mut s = Scenario {
            environment,
            road_network,
            ego,
            npc_actors,
        };
        s.canonicalize();
        s
    }

    pub fn canonicalize(&mut self) {
        self.npc_actors.sort_by(NpcActor::canonical_cmp);
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.npc_actors
            .windows(2)
            .all(|w| w[0].canonical_cmp(&w[1]) != Ordering::Greater)
    }
}
