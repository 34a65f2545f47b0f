use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codegen::{MinisimScenario, Phase, MINISIM_FORMAT};
use crate::ir::BehaviorKind;

use super::agent::{EgoPolicy, EgoView};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt_s: f64,
    pub duration_s: f64,
    pub lane_change_s: f64,
    pub immobile_speed_mps: f64,
    pub immobile_s: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt_s: 0.1,
            duration_s: 30.0,
            lane_change_s: 2.0,
            immobile_speed_mps: 0.1,
            immobile_s: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BugKind {
    Collision,
    RedLightViolation,
    Immobility,
}

impl BugKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BugKind::Collision => "collision",
            BugKind::RedLightViolation => "red_light_violation",
            BugKind::Immobility => "immobility",
        }
    }
}

/// Identity of a bug for deduplication: kind, sorted participant kinds
/// (`ego` for the ego vehicle) and the lane where it happened.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BugSignature {
    pub kind: BugKind,
    pub participants: Vec<String>,
    pub lane: u32,
}

impl fmt::Display for BugSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}|{}|{}", self.kind.as_str(), self.participants.join("+"), self.lane)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BugReport {
    pub kind: BugKind,
    pub time_s: f64,
    /// Actor names, ego first.
    pub participants: Vec<String>,
    pub participant_kinds: Vec<String>,
    pub lane: u32,
}

impl BugReport {
    pub fn signature(&self) -> BugSignature {
        let mut participants = self.participant_kinds.clone();
        participants.sort();
        BugSignature {
            kind: self.kind,
            participants,
            lane: self.lane,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActorFrame {
    pub name: String,
    pub lane: u32,
    /// Second lane occupied while a lane change is in progress.
    pub other_lane: Option<u32>,
    pub s_m: f64,
    pub speed_mps: f64,
    pub length_m: f64,
    pub active: bool,
}

impl ActorFrame {
    pub fn occupies(&self, lane: u32) -> bool {
        self.active && (self.lane == lane || self.other_lane == Some(lane))
    }

    pub fn rear_m(&self) -> f64 {
        self.s_m - self.length_m
    }

    /// Whether the two actors share a lane and their closed longitudinal
    /// intervals intersect; returns the lowest shared lane.
    pub fn overlap(&self, other: &ActorFrame) -> Option<u32> {
        let lanes = [Some(self.lane), self.other_lane];
        let mut shared: Vec<u32> = lanes.into_iter().flatten().filter(|&l| other.occupies(l)).collect();
        shared.sort_unstable();
        let hit = self.active
            && other.active
            && self.rear_m() <= other.s_m
            && other.rear_m() <= self.s_m;
        shared.first().copied().filter(|_| hit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub t_s: f64,
    pub phase: Option<Phase>,
    pub actors: Vec<ActorFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub frames: Vec<Frame>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOutcome {
    pub trace: Trace,
    pub bugs: Vec<BugReport>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Structural checks the simulator relies on.
pub fn check_scenario(sc: &MinisimScenario) -> Result<(), SimError> {
    let bad = |m: String| Err(SimError::InvalidScenario(m));
    if sc.format != MINISIM_FORMAT {
        return bad(format!("format `{}`, expected `{MINISIM_FORMAT}`", sc.format));
    }
    if sc.lanes.is_empty() {
        return bad("no lanes".into());
    }
    let egos = sc.actors.iter().filter(|a| a.ego).count();
    if egos != 1 {
        return bad(format!("{egos} ego actors, expected exactly one"));
    }
    let lanes = sc.lanes.len() as u32;
    for a in &sc.actors {
        if a.lane >= lanes || a.target_lane >= lanes {
            return bad(format!(
                "actor {} uses lane {} / {} outside 0..{lanes}",
                a.name, a.lane, a.target_lane
            ));
        }
        let finite = [a.s_m, a.speed_mps, a.length_m, a.target_s_m].iter().all(|x| x.is_finite());
        if !finite || a.s_m < 0.0 || a.speed_mps < 0.0 || a.length_m <= 0.0 {
            return bad(format!("actor {} has a negative or non-finite quantity", a.name));
        }
    }
    Ok(())
}

struct Body {
    name: String,
    ego: bool,
    lane: u32,
    target_lane: u32,
    changing_until: Option<f64>,
    s: f64,
    v: f64,
    cruise: f64,
    length: f64,
    target_s: f64,
    lane_length: f64,
    active: bool,
}

impl Body {
    fn rear(&self) -> f64 {
        self.s - self.length
    }

    fn frame(&self) -> ActorFrame {
        ActorFrame {
            name: self.name.clone(),
            lane: self.lane,
            other_lane: self.changing_until.map(|_| self.target_lane),
            s_m: self.s,
            speed_mps: self.v,
            length_m: self.length,
            active: self.active,
        }
    }
}

fn view_of(ego: &ActorFrame, others: &[ActorFrame], cruise: f64, sc: &MinisimScenario, t: f64, dt: f64) -> EgoView {
    let leader = others
        .iter()
        .filter(|o| o.name != ego.name && o.active && o.s_m > ego.s_m)
        .filter(|o| o.occupies(ego.lane) || ego.other_lane.is_some_and(|l| o.occupies(l)))
        .map(|o| (o.rear_m() - ego.s_m, o.speed_mps))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let light = sc.traffic_light.map(|c| c.phase_at(t));
    EgoView {
        speed_mps: ego.speed_mps,
        cruise_mps: cruise,
        leader_gap_m: leader.map(|l| l.0),
        leader_speed_mps: leader.map(|l| l.1),
        light,
        stop_line_m: sc.stop_line_m.map(|m| m - ego.s_m).filter(|d| *d >= 0.0),
        dt_s: dt,
    }
}

/// Runs a fixed-step kinematic simulation of a minisim scenario with the
/// ego driven by `agent`, and evaluates the collision, red-light and
/// immobility oracles. Only bugs involving the ego are reported. The run
/// stops at the first ego collision or when the ego leaves the section.
pub fn run(sc: &MinisimScenario, agent: &dyn EgoPolicy, config: &SimConfig) -> Result<SimOutcome, SimError> {
    check_scenario(sc)?;
    if !(config.dt_s > 0.0 && config.duration_s >= config.dt_s) {
        return Err(SimError::InvalidConfig(format!(
            "dt {} s and duration {} s",
            config.dt_s, config.duration_s
        )));
    }
    let dt = config.dt_s;
    let mut bodies: Vec<Body> = sc
        .actors
        .iter()
        .map(|a| {
            let still = a.behavior == BehaviorKind::Static;
            let v = if still { 0.0 } else { a.speed_mps };
            Body {
                name: a.name.clone(),
                ego: a.ego,
                lane: a.lane,
                target_lane: a.target_lane,
                changing_until: (a.target_lane != a.lane).then_some(config.lane_change_s),
                s: a.s_m,
                v,
                cruise: v,
                length: a.length_m,
                target_s: a.target_s_m,
                lane_length: sc.lanes[a.lane as usize].length_m,
                active: true,
            }
        })
        .collect();
    let ego_at = bodies.iter().position(|b| b.ego).expect("checked");

    let mut bugs = Vec::new();
    let mut frames = Vec::new();
    let phase_at = |t: f64| sc.traffic_light.map(|c| c.phase_at(t));
    let snapshot = |bodies: &[Body], t: f64| Frame {
        t_s: t,
        phase: phase_at(t),
        actors: bodies.iter().map(Body::frame).collect(),
    };

    let collisions = |frame: &Frame, t: f64, bugs: &mut Vec<BugReport>| -> bool {
        let ego = &frame.actors[ego_at];
        let mut crashed = false;
        for (i, o) in frame.actors.iter().enumerate() {
            if i == ego_at {
                continue;
            }
            if let Some(lane) = ego.overlap(o) {
                crashed = true;
                bugs.push(BugReport {
                    kind: BugKind::Collision,
                    time_s: t,
                    participants: vec![ego.name.clone(), o.name.clone()],
                    participant_kinds: vec!["ego".into(), sc.actors[i].actor_type.to_string()],
                    lane,
                });
            }
        }
        crashed
    };

    let first = snapshot(&bodies, 0.0);
    let crashed = collisions(&first, 0.0, &mut bugs);
    frames.push(first);
    if crashed {
        return Ok(SimOutcome {
            trace: Trace { frames },
            bugs,
        });
    }

    let steps = (config.duration_s / dt).round() as usize;
    let mut reached = false;
    let mut low_steps = 0usize;
    let mut immobile_reported = false;
    let low_needed = (config.immobile_s / dt).round() as usize;

    for k in 1..=steps {
        let t_prev = (k - 1) as f64 * dt;
        let t = k as f64 * dt;
        let prev = frames.last().expect("initial frame");
        let ego_frame = &prev.actors[ego_at];
        let view = view_of(ego_frame, &prev.actors, bodies[ego_at].cruise, sc, t_prev, dt);
        let accel = agent.acceleration(&view);
        let ego_prev_s = bodies[ego_at].s;

        for b in bodies.iter_mut().filter(|b| b.active) {
            if b.ego {
                b.v = (b.v + accel * dt).max(0.0);
            }
            b.s += b.v * dt;
            if b.changing_until.is_some_and(|end| t >= end - 1e-9) {
                b.lane = b.target_lane;
                b.changing_until = None;
            }
            if b.rear() > b.lane_length {
                b.active = false;
            }
        }

        let frame = snapshot(&bodies, t);
        let ego = &bodies[ego_at];

        if let (Some(stop), Some(Phase::Red)) = (sc.stop_line_m, phase_at(t)) {
            if ego_prev_s < stop && ego.s >= stop {
                bugs.push(BugReport {
                    kind: BugKind::RedLightViolation,
                    time_s: t,
                    participants: vec![ego.name.clone()],
                    participant_kinds: vec!["ego".into()],
                    lane: ego.lane,
                });
            }
        }

        reached |= ego.s >= ego.target_s - 1e-9 && ego.lane == ego.target_lane && ego.changing_until.is_none();
        if !reached && ego.v < config.immobile_speed_mps {
            low_steps += 1;
        } else {
            low_steps = 0;
        }
        if low_steps >= low_needed && !immobile_reported {
            immobile_reported = true;
            bugs.push(BugReport {
                kind: BugKind::Immobility,
                time_s: t,
                participants: vec![ego.name.clone()],
                participant_kinds: vec!["ego".into()],
                lane: ego.lane,
            });
        }

        let crashed = collisions(&frame, t, &mut bugs);
        let left = !bodies[ego_at].active;
        frames.push(frame);
        if crashed || left {
            break;
        }
    }
    Ok(SimOutcome {
        trace: Trace { frames },
        bugs,
    })
}
