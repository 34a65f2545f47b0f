use std::collections::HashMap;
use std::fmt::Display;

use serde::Serialize;

use crate::ir::{NpcActor, Position, Provenance, Scenario, Tri, UNSPECIFIED};

use super::matching::{match_actors, ActorPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Text,
    Visual,
    Unspecified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Text,
    Visual,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldDecision {
    pub path: String,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conflict {
    pub path: String,
    pub text_value: String,
    pub visual_value: String,
    pub winner: Modality,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingleActor {
    pub modality: Modality,
    /// Index in the canonically ordered input list of that modality.
    pub index: usize,
    pub actor_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedActor {
    pub modality: Modality,
    pub index: usize,
    pub actor_type: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct MergeReport {
    /// One entry per field of the merged scenario, in document order.
    pub fields: Vec<FieldDecision>,
    pub pairs: Vec<ActorPair>,
    pub kept: Vec<SingleActor>,
    pub dropped: Vec<DroppedActor>,
    pub conflicts: Vec<Conflict>,
}

impl MergeReport {
    pub fn source_of(&self, path: &str) -> Option<Source> {
        self.fields.iter().find(|f| f.path == path).map(|f| f.source)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Every field path of a scenario with `npc_count` actors, in document
/// order.
pub fn field_paths(npc_count: usize) -> Vec<String> {
    let mut paths: Vec<String> = [
        "environment.weather",
        "environment.time",
        "road_network.road_type",
        "road_network.traffic_signs",
        "road_network.traffic_light",
        "road_network.lane_number",
        "ego_vehicle.behavior",
        "ego_vehicle.position",
        "ego_vehicle.lane_idx",
        "ego_vehicle.speed",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 0..npc_count {
        for f in NPC_FIELDS {
            paths.push(format!("npc_actors[{i}].{f}"));
        }
    }
    paths
}

const NPC_FIELDS: [&str; 5] = ["actor_type", "behavior", "position", "lane_idx", "speed"];

fn show<V: Display>(t: &Tri<V>) -> String {
    t.value().map_or(UNSPECIFIED.to_string(), |v| v.to_string())
}

fn show_position(t: &Tri<Position>) -> String {
    t.value().map_or(UNSPECIFIED.to_string(), |p| {
        format!("{} of {}", p.relative_position, p.reference_point)
    })
}

struct Picker<'r> {
    conflicts: &'r mut Vec<Conflict>,
}

impl Picker<'_> {
    /// Takes the preferred side when it carries a value, else the other.
    /// Two different known values are recorded as a conflict.
    fn pick<V: Clone + PartialEq>(
        &mut self,
        path: &str,
        text: &Tri<V>,
        visual: &Tri<V>,
        prefer: Modality,
        render: impl Fn(&Tri<V>) -> String,
    ) -> (Tri<V>, Source) {
        if text.is_known() && visual.is_known() && text.value() != visual.value() {
            self.conflicts.push(Conflict {
                path: path.to_string(),
                text_value: render(text),
                visual_value: render(visual),
                winner: prefer,
            });
        }
        let ordered = match prefer {
            Modality::Text => [(text, Source::Text), (visual, Source::Visual)],
            Modality::Visual => [(visual, Source::Visual), (text, Source::Text)],
        };
        ordered
            .into_iter()
            .find(|(t, _)| t.is_known())
            .map_or((Tri::Unspecified, Source::Unspecified), |(t, s)| {
                (t.clone(), s)
            })
    }
}

fn single_sources(actor: &NpcActor, source: Source) -> [Source; 5] {
    let s = |known: bool| if known { source } else { Source::Unspecified };
    [
        source,
        s(actor.behavior.is_known()),
        s(actor.position.is_known()),
        s(actor.lane_idx.is_known()),
        s(actor.speed.is_known()),
    ]
}

fn cell(actor: &NpcActor) -> Option<(u32, Position)> {
    Some((actor.lane_idx.get()?, actor.position.get()?))
}

fn cell_counts(actors: &[NpcActor]) -> HashMap<(u32, Position), usize> {
    let mut counts = HashMap::new();
    for a in actors {
        if let Some(c) = cell(a) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

/// Merges a textual and a visual IR. Environment, road type, signs and the
/// light come from text when it states them; the lane count comes from
/// the image. Matched actors take behavior and speed from text and lane
/// and position from the image. Unmatched actors are admitted while their
/// (lane, position) cell holds fewer actors than their own modality saw
/// there; the rest are dropped and reported.
pub fn merge(text_ir: &Scenario, visual_ir: &Scenario) -> (Scenario, MergeReport) {
    let text_ir = text_ir.clone().canonicalized();
    let visual_ir = visual_ir.clone().canonicalized();
    let mut conflicts = Vec::new();
    let mut p = Picker {
        conflicts: &mut conflicts,
    };
    let mut head_sources = Vec::with_capacity(10);
    let mut out = Scenario::default();

    let (te, ve) = (&text_ir.environment, &visual_ir.environment);
    let (v, s) = p.pick("environment.weather", &te.weather, &ve.weather, Modality::Text, show);
    out.environment.weather = v;
    head_sources.push(s);
    let (v, s) = p.pick("environment.time", &te.time, &ve.time, Modality::Text, show);
    out.environment.time = v;
    head_sources.push(s);

    let (tr, vr) = (&text_ir.road_network, &visual_ir.road_network);
    let (v, s) = p.pick("road_network.road_type", &tr.road_type, &vr.road_type, Modality::Text, show);
    out.road_network.road_type = v;
    head_sources.push(s);

    let sorted_signs = |signs: &[crate::ir::TrafficSignKind]| {
        let mut v: Vec<_> = signs.to_vec();
        v.sort_by_key(|k| k.as_str());
        v
    };
    let (ts, vs) = (sorted_signs(&tr.traffic_signs), sorted_signs(&vr.traffic_signs));
    let join = |v: &[crate::ir::TrafficSignKind]| {
        v.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
    };
    if !ts.is_empty() && !vs.is_empty() && ts != vs {
        p.conflicts.push(Conflict {
            path: "road_network.traffic_signs".into(),
            text_value: join(&ts),
            visual_value: join(&vs),
            winner: Modality::Text,
        });
    }
    let (signs, s) = if !tr.traffic_signs.is_empty() {
        (tr.traffic_signs.clone(), Source::Text)
    } else if !vr.traffic_signs.is_empty() {
        (vr.traffic_signs.clone(), Source::Visual)
    } else {
        (Vec::new(), Source::Unspecified)
    };
    out.road_network.traffic_signs = signs;
    head_sources.push(s);

    let (v, s) = p.pick(
        "road_network.traffic_light",
        &tr.traffic_light,
        &vr.traffic_light,
        Modality::Text,
        show,
    );
    out.road_network.traffic_light = v;
    head_sources.push(s);
    let (v, s) = p.pick(
        "road_network.lane_number",
        &tr.lane_number,
        &vr.lane_number,
        Modality::Visual,
        show,
    );
    out.road_network.lane_number = v;
    head_sources.push(s);

    let (tg, vg) = (&text_ir.ego, &visual_ir.ego);
    let (v, s) = p.pick("ego_vehicle.behavior", &tg.behavior, &vg.behavior, Modality::Text, show);
    out.ego.behavior = v;
    head_sources.push(s);
    let (v, s) = p.pick(
        "ego_vehicle.position",
        &tg.position,
        &vg.position,
        Modality::Visual,
        show_position,
    );
    out.ego.position = v;
    head_sources.push(s);
    let (v, s) = p.pick("ego_vehicle.lane_idx", &tg.lane_idx, &vg.lane_idx, Modality::Visual, show);
    out.ego.lane_idx = v;
    head_sources.push(s);
    let (v, s) = p.pick("ego_vehicle.speed", &tg.speed, &vg.speed, Modality::Text, show);
    out.ego.speed = v;
    head_sources.push(s);

    let texts = &text_ir.npc_actors;
    let visuals = &visual_ir.npc_actors;
    let matching = match_actors(texts, visuals);
    let mut merged: Vec<(NpcActor, [Source; 5])> = Vec::new();

    for pair in &matching.pairs {
        let (t, v) = (&texts[pair.text], &visuals[pair.visual]);
        let path = format!("npc_actors[text {}, visual {}]", pair.text, pair.visual);
        if t.actor_type != v.actor_type {
            p.conflicts.push(Conflict {
                path: format!("{path}.actor_type"),
                text_value: t.actor_type.to_string(),
                visual_value: v.actor_type.to_string(),
                winner: Modality::Text,
            });
        }
        let mut a = NpcActor::new(t.actor_type);
        a.provenance = Provenance::Both;
        let (b, bs) = p.pick(&format!("{path}.behavior"), &t.behavior, &v.behavior, Modality::Text, show);
        let (pos, ps) = p.pick(
            &format!("{path}.position"),
            &t.position,
            &v.position,
            Modality::Visual,
            show_position,
        );
        let (l, ls) = p.pick(&format!("{path}.lane_idx"), &t.lane_idx, &v.lane_idx, Modality::Visual, show);
        let (sp, ss) = p.pick(&format!("{path}.speed"), &t.speed, &v.speed, Modality::Text, show);
        a.behavior = b;
        a.position = pos;
        a.lane_idx = l;
        a.speed = sp;
        merged.push((a, [Source::Text, bs, ps, ls, ss]));
    }

    let mut placed = cell_counts(&merged.iter().map(|(a, _)| a.clone()).collect::<Vec<_>>());
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let singles = [
        (Modality::Visual, &matching.visual_only, visuals, Source::Visual, Provenance::Visual),
        (Modality::Text, &matching.text_only, texts, Source::Text, Provenance::Text),
    ];
    for (modality, indices, actors, source, provenance) in singles {
        let seen = cell_counts(actors);
        for &i in indices {
            let actor = &actors[i];
            if let Some(c) = cell(actor) {
                let here = placed.get(&c).copied().unwrap_or(0);
                if here >= seen[&c] {
                    dropped.push(DroppedActor {
                        modality,
                        index: i,
                        actor_type: actor.actor_type.to_string(),
                        reason: format!(
                            "lane {} {} already holds {here} actor(s)",
                            c.0, c.1.relative_position
                        ),
                    });
                    continue;
                }
                *placed.entry(c).or_insert(0) += 1;
            }
            let mut a = actor.clone();
            a.provenance = provenance;
            kept.push(SingleActor {
                modality,
                index: i,
                actor_type: actor.actor_type.to_string(),
            });
            let sources = single_sources(&a, source);
            merged.push((a, sources));
        }
    }

    merged.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    let mut fields: Vec<FieldDecision> = field_paths(0)
        .into_iter()
        .zip(head_sources)
        .map(|(path, source)| FieldDecision { path, source })
        .collect();
    for (i, (_, sources)) in merged.iter().enumerate() {
        for (f, s) in NPC_FIELDS.iter().zip(sources) {
            fields.push(FieldDecision {
                path: format!("npc_actors[{i}].{f}"),
                source: *s,
            });
        }
    }
    out.npc_actors = merged.into_iter().map(|(a, _)| a).collect();

    let report = MergeReport {
        fields,
        pairs: matching.pairs,
        kept,
        dropped,
        conflicts,
    };
    (out, report)
}
