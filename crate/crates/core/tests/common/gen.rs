//! Seeded generators of random valid scenarios.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use scenario_forge::codegen::{MapCatalog, MapSection};
use scenario_forge::ir::{
    validate, ActorKind, BehaviorKind, EgoActor, Environment, LightState, NpcActor, Position,
    Provenance, ReferencePoint, RelativePosition, RoadNetwork, RoadType, Scenario, TimeOfDay,
    TrafficSignKind, Tri, WeatherKind,
};

pub fn tri<V: Copy>(rng: &mut impl Rng, values: &[V]) -> Tri<V> {
    match rng.random_range(0..10) {
        0..=5 => Tri::Specified(*values.choose(rng).unwrap()),
        6..=8 => Tri::Unspecified,
        _ => Tri::Defaulted {
            value: *values.choose(rng).unwrap(),
            seed: rng.random_range(0..1000),
        },
    }
}

fn count(rng: &mut impl Rng, below: u32) -> Tri<u32> {
    let values: Vec<u32> = (0..below.max(1)).collect();
    tri(rng, &values)
}

fn position(rng: &mut impl Rng) -> Tri<Position> {
    let refs = ReferencePoint::all();
    let positions: Vec<Position> = refs
        .iter()
        .flat_map(|&r| RelativePosition::ALL.iter().map(move |&p| Position::new(r, p)))
        .collect();
    if rng.random_bool(0.7) {
        let p = if rng.random_bool(0.8) {
            Position::of_ego(*RelativePosition::ALL.choose(rng).unwrap())
        } else {
            *positions.choose(rng).unwrap()
        };
        if rng.random_bool(0.9) {
            Tri::Specified(p)
        } else {
            Tri::Defaulted {
                value: p,
                seed: rng.random_range(0..1000),
            }
        }
    } else {
        Tri::Unspecified
    }
}

/// A random scenario that passes validation, with at most `max_npcs`
/// actors.
pub fn random_scenario(rng: &mut impl Rng, max_npcs: usize) -> Scenario {
    loop {
        let lane_number = count(rng, 6).map(|n| n.max(1));
        let lanes_below = lane_number.get().unwrap_or(4);
        let mut signs: Vec<TrafficSignKind> = TrafficSignKind::ALL
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.3))
            .collect();
        if rng.random_bool(0.2) && !signs.is_empty() {
            signs.push(signs[0]);
        }
        let environment = Environment {
            weather: tri(rng, WeatherKind::ALL),
            time: tri(rng, TimeOfDay::ALL),
        };
        let road_network = RoadNetwork {
            road_type: tri(rng, RoadType::ALL),
            traffic_signs: signs,
            traffic_light: tri(rng, LightState::ALL),
            lane_number,
        };
        let ego = EgoActor {
            behavior: tri(rng, BehaviorKind::ALL),
            position: if rng.random_bool(0.2) { position(rng) } else { Tri::Unspecified },
            lane_idx: count(rng, lanes_below),
            speed: count(rng, 61),
        };
        let n = rng.random_range(0..=max_npcs);
        let npcs = (0..n)
            .map(|_| NpcActor {
                actor_type: *ActorKind::ALL.choose(rng).unwrap(),
                behavior: tri(rng, BehaviorKind::ALL),
                position: position(rng),
                lane_idx: count(rng, lanes_below),
                speed: count(rng, 61),
                provenance: *[Provenance::Text, Provenance::Visual, Provenance::Both]
                    .choose(rng)
                    .unwrap(),
            })
            .collect();
        let s = Scenario::new(environment, road_network, ego, npcs);
        if validate(&s).is_valid() {
            return s;
        }
    }
}

/// A pair of scenarios shaped like front-end outputs: the textual one
/// carries dynamics and coarse positions, the visual one lanes and
/// positions only.
pub fn random_ir_pair(rng: &mut impl Rng, max_npcs: usize) -> (Scenario, Scenario) {
    let mut text = random_scenario(rng, max_npcs);
    for a in &mut text.npc_actors {
        a.provenance = Provenance::Text;
        if rng.random_bool(0.6) {
            a.lane_idx = Tri::Unspecified;
        }
    }
    text.canonicalize();
    let mut visual = random_scenario(rng, max_npcs);
    visual.environment = Environment::default();
    visual.ego.behavior = Tri::Unspecified;
    visual.ego.speed = Tri::Unspecified;
    visual.road_network.road_type = Tri::Unspecified;
    if rng.random_bool(0.5) {
        // Reuse some of the textual actors so that matches happen.
        for a in text.npc_actors.iter().take(rng.random_range(0..=max_npcs)) {
            let mut v = a.clone();
            v.lane_idx = count(rng, 4);
            visual.npc_actors.push(v);
        }
    }
    for a in &mut visual.npc_actors {
        a.provenance = Provenance::Visual;
        a.behavior = Tri::Unspecified;
        a.speed = Tri::Unspecified;
    }
    visual.canonicalize();
    (text, visual)
}

/// Rewrites the road network of `s` so that `section` satisfies it, and
/// folds lane indices into range. Returns `None` when the folding makes the
/// scenario invalid.
pub fn fit_to_section(mut s: Scenario, section: &MapSection, rng: &mut impl Rng) -> Option<Scenario> {
    let rn = &mut s.road_network;
    rn.road_type = if rng.random_bool(0.5) {
        Tri::Specified(section.road_type)
    } else {
        Tri::Unspecified
    };
    let lanes = rng.random_range(1..=section.lane_count);
    rn.lane_number = if rng.random_bool(0.7) {
        Tri::Specified(lanes)
    } else {
        Tri::Unspecified
    };
    let lights: &[LightState] = if section.has_traffic_light {
        &[LightState::RedLight, LightState::GreenLight]
    } else {
        &[LightState::Absent]
    };
    rn.traffic_light = if rng.random_bool(0.6) {
        Tri::Specified(*lights.choose(rng).unwrap())
    } else {
        Tri::Unspecified
    };
    rn.traffic_signs = section
        .traffic_signs
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.5))
        .collect();
    let fold = |t: Tri<u32>| t.map(|l| l % lanes);
    // Incoming defaulted speeds become stated ones so that every defaulted
    // speed in the output was drawn by codegen.
    let stated = |t: Tri<u32>| match t {
        Tri::Defaulted { value, .. } => Tri::Specified(value),
        other => other,
    };
    s.ego.lane_idx = fold(s.ego.lane_idx);
    s.ego.speed = stated(s.ego.speed);
    for a in &mut s.npc_actors {
        a.lane_idx = fold(a.lane_idx);
        a.speed = stated(a.speed);
    }
    s.canonicalize();
    validate(&s).is_valid().then_some(s)
}

pub fn random_compatible(rng: &mut ChaCha8Rng, catalog: &MapCatalog) -> Scenario {
    loop {
        let section = catalog.sections.choose(rng).unwrap();
        let s = random_scenario(rng, 6);
        if let Some(s) = fit_to_section(s, section, rng) {
            return s;
        }
    }
}
