use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ir::{
    canonical_tree, validate, ActorKind, BehaviorKind, LabeledTree, LightState, NpcActor, Position,
    ReferencePoint, RelativePosition, RoadType, Scenario, TimeOfDay, TrafficSignKind, Tri, WeatherKind,
};
use crate::vision::DetectionSet;

/// Largest speed a hallucinated speed leaf may take, mph.
pub const HALLUCINATED_SPEED_MAX: u32 = 60;
/// Largest lane count a hallucinated lane leaf may take.
pub const HALLUCINATED_LANES_MAX: u32 = 8;
const ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectKind {
    Text,
    Detections,
}

impl std::str::FromStr for InjectKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(InjectKind::Text),
            "detect" | "detections" => Ok(InjectKind::Detections),
            _ => Err(format!("unknown injection kind `{s}` (expected text or detect)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Injection {
    pub kind: InjectKind,
    pub rate: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InjectError {
    #[error("rate {0} outside (0, 1]")]
    BadRate(f64),
    #[error("nothing to inject into: {0}")]
    NothingToInject(&'static str),
}

/// Number of elements touched at `rate` out of `n`: at least one.
pub fn injection_count(rate: f64, n: usize) -> usize {
    ((rate * n as f64).round() as usize).clamp(1, n.max(1))
}

fn check_rate(rate: f64) -> Result<(), InjectError> {
    if rate > 0.0 && rate <= 1.0 {
        Ok(())
    } else {
        Err(InjectError::BadRate(rate))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Type,
    Behavior,
    Reference,
    Relative,
    Lane,
    Speed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Leaf {
    Weather,
    Time,
    RoadType,
    Sign(usize),
    Light,
    LaneNumber,
    Ego(Field),
    Npc(usize, Field),
}

fn actor_leaves(
    behavior: &Tri<BehaviorKind>,
    position: &Tri<Position>,
    lane: &Tri<u32>,
    speed: &Tri<u32>,
    wrap: impl Fn(Field) -> Leaf,
    out: &mut Vec<Leaf>,
) {
    let stated = |known: bool, f: Field, out: &mut Vec<Leaf>| {
        if known {
            out.push(wrap(f));
        }
    };
    stated(matches!(behavior, Tri::Specified(_)), Field::Behavior, out);
    stated(matches!(position, Tri::Specified(_)), Field::Reference, out);
    stated(matches!(position, Tri::Specified(_)), Field::Relative, out);
    stated(matches!(lane, Tri::Specified(_)), Field::Lane, out);
    stated(matches!(speed, Tri::Specified(_)), Field::Speed, out);
}

/// Leaves of the IR whose value was stated, in document order.
fn specified_leaves(s: &Scenario) -> Vec<Leaf> {
    let mut out = Vec::new();
    let spec = |t: bool, leaf: Leaf, out: &mut Vec<Leaf>| {
        if t {
            out.push(leaf);
        }
    };
    spec(matches!(s.environment.weather, Tri::Specified(_)), Leaf::Weather, &mut out);
    spec(matches!(s.environment.time, Tri::Specified(_)), Leaf::Time, &mut out);
    let rn = &s.road_network;
    spec(matches!(rn.road_type, Tri::Specified(_)), Leaf::RoadType, &mut out);
    out.extend((0..rn.traffic_signs.len()).map(Leaf::Sign));
    spec(matches!(rn.traffic_light, Tri::Specified(_)), Leaf::Light, &mut out);
    spec(matches!(rn.lane_number, Tri::Specified(_)), Leaf::LaneNumber, &mut out);
    let e = &s.ego;
    actor_leaves(&e.behavior, &e.position, &e.lane_idx, &e.speed, Leaf::Ego, &mut out);
    for (i, a) in s.npc_actors.iter().enumerate() {
        out.push(Leaf::Npc(i, Field::Type));
        actor_leaves(&a.behavior, &a.position, &a.lane_idx, &a.speed, |f| Leaf::Npc(i, f), &mut out);
    }
    out
}

/// Number of stated leaves a hallucination can hit.
pub fn specified_leaf_count(s: &Scenario) -> usize {
    specified_leaves(s).len()
}

fn other<T: Copy + PartialEq>(all: &[T], current: T, rng: &mut ChaCha8Rng) -> T {
    let rest: Vec<T> = all.iter().copied().filter(|v| *v != current).collect();
    *rest.choose(rng).expect("vocabulary has an alternative")
}

fn relabel_tri<T: Copy + PartialEq>(slot: &mut Tri<T>, all: &[T], rng: &mut ChaCha8Rng) {
    if let Tri::Specified(v) = *slot {
        *slot = Tri::Specified(other(all, v, rng));
    }
}

fn relabel_position(slot: &mut Tri<Position>, reference: bool, rng: &mut ChaCha8Rng) {
    if let Tri::Specified(p) = *slot {
        let mut p = p;
        if reference {
            p.reference_point = other(&ReferencePoint::all(), p.reference_point, rng);
        } else {
            p.relative_position = other(RelativePosition::ALL, p.relative_position, rng);
        }
        *slot = Tri::Specified(p);
    }
}

fn relabel_actor(
    f: Field,
    actor_type: Option<&mut ActorKind>,
    behavior: &mut Tri<BehaviorKind>,
    position: &mut Tri<Position>,
    lane: &mut Tri<u32>,
    speed: &mut Tri<u32>,
    lanes: u32,
    rng: &mut ChaCha8Rng,
) {
    match f {
        Field::Type => {
            if let Some(t) = actor_type {
                *t = other(ActorKind::ALL, *t, rng);
            }
        }
        Field::Behavior => relabel_tri(behavior, BehaviorKind::ALL, rng),
        Field::Reference => relabel_position(position, true, rng),
        Field::Relative => relabel_position(position, false, rng),
        Field::Lane => {
            let all: Vec<u32> = (0..lanes.max(2)).collect();
            relabel_tri(lane, &all, rng);
        }
        Field::Speed => {
            let all: Vec<u32> = (0..=HALLUCINATED_SPEED_MAX).collect();
            relabel_tri(speed, &all, rng);
        }
    }
}

fn relabel(s: &mut Scenario, leaf: Leaf, rng: &mut ChaCha8Rng) {
    let lanes = s.road_network.lane_number.get().unwrap_or(HALLUCINATED_LANES_MAX);
    match leaf {
        Leaf::Weather => relabel_tri(&mut s.environment.weather, WeatherKind::ALL, rng),
        Leaf::Time => relabel_tri(&mut s.environment.time, TimeOfDay::ALL, rng),
        Leaf::RoadType => relabel_tri(&mut s.road_network.road_type, RoadType::ALL, rng),
        Leaf::Sign(i) => {
            let current = s.road_network.traffic_signs[i];
            s.road_network.traffic_signs[i] = other(TrafficSignKind::ALL, current, rng);
        }
        Leaf::Light => relabel_tri(&mut s.road_network.traffic_light, LightState::ALL, rng),
        Leaf::LaneNumber => {
            let lowest = std::iter::once(s.ego.lane_idx.get())
                .chain(s.npc_actors.iter().map(|a| a.lane_idx.get()))
                .flatten()
                .max()
                .map_or(1, |m| m + 1);
            let all: Vec<u32> = (lowest..=HALLUCINATED_LANES_MAX.max(lowest + 1)).collect();
            relabel_tri(&mut s.road_network.lane_number, &all, rng);
        }
        Leaf::Ego(f) => {
            let e = &mut s.ego;
            relabel_actor(f, None, &mut e.behavior, &mut e.position, &mut e.lane_idx, &mut e.speed, lanes, rng);
        }
        Leaf::Npc(i, f) => {
            let NpcActor {
                actor_type,
                behavior,
                position,
                lane_idx,
                speed,
                ..
            } = &mut s.npc_actors[i];
            relabel_actor(f, Some(actor_type), behavior, position, lane_idx, speed, lanes, rng);
        }
    }
}

/// Number of differing labels when both trees have the same shape.
pub fn relabel_distance(a: &LabeledTree, b: &LabeledTree) -> Option<usize> {
    let (pa, pb) = (a.preorder(), b.preorder());
    if pa.len() != pb.len() {
        return None;
    }
    let mut diff = 0;
    for (&x, &y) in pa.iter().zip(&pb) {
        if a.children(x).len() != b.children(y).len() {
            return None;
        }
        if a.label(x) != b.label(y) {
            diff += 1;
        }
    }
    Some(diff)
}

/// Relabels `k = max(1, round(rate × stated leaves))` stated leaves of a
/// textual IR to different in-vocabulary values. Leaves are visited in
/// one seeded shuffle and each is accepted once a draw keeps the actor
/// order, the lane ranges and the tree shape; leaves with no such draw
/// are skipped. A larger rate with the same seed therefore corrupts a
/// superset of the leaves, and the canonical tree differs in exactly `k`
/// labels unless fewer than `k` leaves can change in place.
pub fn inject_text_hallucination(ir: &Scenario, rate: f64, seed: u64) -> Result<Scenario, InjectError> {
    check_rate(rate)?;
    let base = ir.clone().canonicalized();
    let mut leaves = specified_leaves(&base);
    if leaves.is_empty() {
        return Err(InjectError::NothingToInject("no stated leaves"));
    }
    let k = injection_count(rate, leaves.len());
    let tree = canonical_tree(&base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    leaves.shuffle(&mut rng);
    let mut s = base;
    let mut done = 0;
    for &leaf in &leaves {
        if done == k {
            break;
        }
        for _ in 0..ATTEMPTS {
            let mut t = s.clone();
            relabel(&mut t, leaf, &mut rng);
            t.canonicalize();
            if validate(&t).is_structurally_valid() && relabel_distance(&tree, &canonical_tree(&t)) == Some(done + 1) {
                s = t;
                done += 1;
                break;
            }
        }
    }
    Ok(s)
}

/// Removes `k = max(1, round(rate × actor boxes))` actor boxes picked by
/// a seeded shuffle. Lights, signs and lane boundaries are untouched.
pub fn inject_detection_drop(ds: &DetectionSet, rate: f64, seed: u64) -> Result<DetectionSet, InjectError> {
    check_rate(rate)?;
    let mut actors: Vec<usize> = (0..ds.boxes.len()).filter(|&i| ds.boxes[i].class.is_actor()).collect();
    if actors.is_empty() {
        return Err(InjectError::NothingToInject("no actor boxes"));
    }
    let k = injection_count(rate, actors.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    actors.shuffle(&mut rng);
    let gone = &actors[..k];
    let mut out = ds.clone();
    out.boxes = ds
        .boxes
        .iter()
        .enumerate()
        .filter(|(i, _)| !gone.contains(i))
        .map(|(_, b)| b.clone())
        .collect();
    Ok(out)
}

/// Injection seed of repetition `rep` in a run seeded with `base`.
pub fn repetition_seed(base: u64, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(rep as u64);
    rng.random()
}
