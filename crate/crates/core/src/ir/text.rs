//! The `.scn.yaml` scenario document: parsing into a [`Scenario`] and
//! canonical emission.

use std::fmt::Write as _;
use std::str::FromStr;

use super::doc::{parse_document, DocEntry, DocError, DocNode};
use super::model::{
    EgoActor, Environment, NpcActor, Position, Provenance, RoadNetwork, Scenario, Tri,
};
use super::vocab::{ActorKind, ReferencePoint, RelativePosition, TrafficSignKind, UnknownWord};

/// Literal used for absent values.
pub const UNSPECIFIED: &str = "unspecified";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DslError {
    #[error("syntax error: {0}")]
    Syntax(#[from] DocError),
    #[error("{path}: `{value}` is not a valid {vocabulary} (line {line})")]
    Vocabulary {
        path: String,
        value: String,
        vocabulary: String,
        line: usize,
    },
    #[error("{path}: {message}")]
    Structure { path: String, message: String },
}

impl DslError {
    fn structure(path: impl Into<String>, message: impl Into<String>) -> Self {
        DslError::Structure {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Parses a scenario document. Absent keys become [`Tri::Unspecified`];
/// the NPC list comes back in canonical order.
pub fn parse_dsl(text: &str) -> Result<Scenario, DslError> {
    let root = parse_document(text)?;
    scenario_from_doc(&root)
}

/// Builds a scenario from an already parsed document tree.
pub fn scenario_from_doc(root: &DocNode) -> Result<Scenario, DslError> {
    let entries = match root {
        DocNode::Map(entries) => entries.as_slice(),
        other => {
            return Err(DslError::structure(
                "$",
                format!("expected a mapping at top level, found a {}", other.kind()),
            ))
        }
    };
    check_keys(
        entries,
        "",
        &["environment", "road_network", "ego_vehicle", "npc_actors"],
    )?;

    let environment = match root.get("environment") {
        Some(node) => parse_environment(node)?,
        None => Environment::default(),
    };
    let road_network = match root.get("road_network") {
        Some(node) => parse_road_network(node)?,
        None => RoadNetwork::default(),
    };
    let ego = match root.get("ego_vehicle") {
        Some(node) => parse_ego(node)?,
        None => return Err(DslError::structure("ego_vehicle", "missing ego vehicle")),
    };
    let npc_actors = match root.get("npc_actors") {
        None => Vec::new(),
        Some(node) if node.is_null() || is_unspecified(node) => Vec::new(),
        Some(DocNode::Seq(items)) => items
            .iter()
            .enumerate()
            .map(|(i, item)| parse_npc(item, &format!("npc_actors[{i}]")))
            .collect::<Result<_, _>>()?,
        Some(other) => {
            return Err(DslError::structure(
                "npc_actors",
                format!("expected a sequence, found a {}", other.kind()),
            ))
        }
    };
    Ok(Scenario::new(environment, road_network, ego, npc_actors))
}

fn is_unspecified(node: &DocNode) -> bool {
    matches!(node, DocNode::Scalar { text, .. } if text == UNSPECIFIED)
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn check_keys(entries: &[DocEntry], prefix: &str, allowed: &[&str]) -> Result<(), DslError> {
    for e in entries {
        if !allowed.contains(&e.key.as_str()) {
            return Err(DslError::structure(
                join(prefix, &e.key),
                format!("unknown key (expected one of: {})", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

/// A mapping section; `unspecified` or an empty value reads as an empty
/// mapping.
fn section<'a>(node: &'a DocNode, path: &str) -> Result<&'a [DocEntry], DslError> {
    match node {
        DocNode::Map(entries) => Ok(entries),
        n if n.is_null() || is_unspecified(n) => Ok(&[]),
        other => Err(DslError::structure(
            path,
            format!("expected a mapping, found a {}", other.kind()),
        )),
    }
}

fn find<'a>(entries: &'a [DocEntry], key: &str) -> Option<&'a DocEntry> {
    entries.iter().find(|e| e.key == key)
}

fn vocab_error(path: &str, line: usize, err: UnknownWord) -> DslError {
    DslError::Vocabulary {
        path: path.to_string(),
        value: err.word,
        vocabulary: err.vocabulary.to_string(),
        line,
    }
}

/// Reads the seed out of a `defaulted seed=N` annotation.
fn defaulted_seed(comment: Option<&str>) -> Option<u64> {
    let c = comment?.trim();
    let rest = c.strip_prefix("defaulted")?;
    let rest = rest.trim();
    if rest.is_empty() {
        return Some(0);
    }
    rest.strip_prefix("seed=")?.trim().parse().ok()
}

fn scalar_tri<V>(
    entries: &[DocEntry],
    key: &str,
    path: &str,
    parse: impl Fn(&str) -> Result<V, UnknownWord>,
) -> Result<Tri<V>, DslError> {
    let Some(entry) = find(entries, key) else {
        return Ok(Tri::Unspecified);
    };
    match &entry.value {
        DocNode::Scalar { text, comment, line } => {
            if text == UNSPECIFIED || entry.value.is_null() {
                return Ok(Tri::Unspecified);
            }
            let value = parse(text).map_err(|e| vocab_error(path, *line, e))?;
            Ok(match defaulted_seed(comment.as_deref()) {
                Some(seed) => Tri::Defaulted { value, seed },
                None => Tri::Specified(value),
            })
        }
        other => Err(DslError::structure(
            path,
            format!("expected a scalar, found a {}", other.kind()),
        )),
    }
}

fn word<V: FromStr<Err = UnknownWord>>(s: &str) -> Result<V, UnknownWord> {
    s.parse()
}

fn count(vocabulary: &'static str) -> impl Fn(&str) -> Result<u32, UnknownWord> {
    move |s: &str| {
        s.parse::<u32>().map_err(|_| UnknownWord {
            vocabulary,
            word: s.to_string(),
        })
    }
}

fn parse_environment(node: &DocNode) -> Result<Environment, DslError> {
    let entries = section(node, "environment")?;
    check_keys(entries, "environment", &["weather", "time"])?;
    Ok(Environment {
        weather: scalar_tri(entries, "weather", "environment.weather", word)?,
        time: scalar_tri(entries, "time", "environment.time", word)?,
    })
}

fn parse_road_network(node: &DocNode) -> Result<RoadNetwork, DslError> {
    let entries = section(node, "road_network")?;
    check_keys(
        entries,
        "road_network",
        &["road_type", "traffic_signs", "traffic_light", "lane_number"],
    )?;
    let traffic_signs = match find(entries, "traffic_signs").map(|e| &e.value) {
        None => Vec::new(),
        Some(n) if n.is_null() || is_unspecified(n) => Vec::new(),
        Some(DocNode::Seq(items)) => items
            .iter()
            .enumerate()
            .map(|(i, item)| {
                let path = format!("road_network.traffic_signs[{i}]");
                match item {
                    DocNode::Scalar { text, line, .. } => {
                        text.parse::<TrafficSignKind>().map_err(|e| vocab_error(&path, *line, e))
                    }
                    other => Err(DslError::structure(
                        path,
                        format!("expected a scalar, found a {}", other.kind()),
                    )),
                }
            })
            .collect::<Result<_, _>>()?,
        Some(other) => {
            return Err(DslError::structure(
                "road_network.traffic_signs",
                format!("expected a sequence, found a {}", other.kind()),
            ))
        }
    };
    Ok(RoadNetwork {
        road_type: scalar_tri(entries, "road_type", "road_network.road_type", word)?,
        traffic_signs,
        traffic_light: scalar_tri(entries, "traffic_light", "road_network.traffic_light", word)?,
        lane_number: scalar_tri(
            entries,
            "lane_number",
            "road_network.lane_number",
            count("lane number"),
        )?,
    })
}

fn parse_position(entries: &[DocEntry], path: &str) -> Result<Tri<Position>, DslError> {
    let Some(entry) = find(entries, "position") else {
        return Ok(Tri::Unspecified);
    };
    let path = join(path, "position");
    let fields = match &entry.value {
        n if n.is_null() || is_unspecified(n) => return Ok(Tri::Unspecified),
        DocNode::Map(fields) => fields,
        other => {
            return Err(DslError::structure(
                path,
                format!("expected a mapping, found a {}", other.kind()),
            ))
        }
    };
    check_keys(fields, &path, &["reference_point", "relative_position"])?;
    let reference: Tri<ReferencePoint> = scalar_tri(
        fields,
        "reference_point",
        &join(&path, "reference_point"),
        word,
    )?;
    let relative: Tri<RelativePosition> = scalar_tri(
        fields,
        "relative_position",
        &join(&path, "relative_position"),
        word,
    )?;
    // A relative position without a reference point is relative to the ego
    // vehicle; a reference point alone does not locate anything.
    let Some(relative_position) = relative.get() else {
        return Ok(Tri::Unspecified);
    };
    let position = Position {
        reference_point: reference.get().unwrap_or(ReferencePoint::EgoVehicle),
        relative_position,
    };
    Ok(match defaulted_seed(entry.comment.as_deref()) {
        Some(seed) => Tri::Defaulted {
            value: position,
            seed,
        },
        None => Tri::Specified(position),
    })
}

fn parse_ego(node: &DocNode) -> Result<EgoActor, DslError> {
    let entries = section(node, "ego_vehicle")?;
    check_keys(
        entries,
        "ego_vehicle",
        &["behavior", "position", "lane_idx", "speed"],
    )?;
    Ok(EgoActor {
        behavior: scalar_tri(entries, "behavior", "ego_vehicle.behavior", word)?,
        position: parse_position(entries, "ego_vehicle")?,
        lane_idx: scalar_tri(entries, "lane_idx", "ego_vehicle.lane_idx", count("lane index"))?,
        speed: scalar_tri(entries, "speed", "ego_vehicle.speed", count("speed"))?,
    })
}

fn parse_npc(node: &DocNode, path: &str) -> Result<NpcActor, DslError> {
    let DocNode::Map(entries) = node else {
        return Err(DslError::structure(
            path,
            format!("expected a mapping, found a {}", node.kind()),
        ));
    };
    check_keys(
        entries,
        path,
        &[
            "actor_type",
            "behavior",
            "position",
            "lane_idx",
            "speed",
            "provenance",
        ],
    )?;
    let actor_type = match scalar_tri::<ActorKind>(entries, "actor_type", &join(path, "actor_type"), word)? {
        Tri::Specified(kind) | Tri::Defaulted { value: kind, .. } => kind,
        Tri::Unspecified => {
            return Err(DslError::structure(
                join(path, "actor_type"),
                "every npc actor needs an actor_type",
            ))
        }
    };
    let provenance = match find(entries, "provenance").map(|e| &e.value) {
        None => Provenance::Text,
        Some(DocNode::Scalar { text, line, .. }) => {
            Provenance::parse(text).ok_or_else(|| DslError::Vocabulary {
                path: join(path, "provenance"),
                value: text.clone(),
                vocabulary: "provenance".into(),
                line: *line,
            })?
        }
        Some(other) => {
            return Err(DslError::structure(
                join(path, "provenance"),
                format!("expected a scalar, found a {}", other.kind()),
            ))
        }
    };
    Ok(NpcActor {
        actor_type,
        behavior: scalar_tri(entries, "behavior", &join(path, "behavior"), word)?,
        position: parse_position(entries, path)?,
        lane_idx: scalar_tri(entries, "lane_idx", &join(path, "lane_idx"), count("lane index"))?,
        speed: scalar_tri(entries, "speed", &join(path, "speed"), count("speed"))?,
        provenance,
    })
}

fn emit_tri<V: std::fmt::Display>(out: &mut String, indent: &str, key: &str, value: &Tri<V>) {
    match value {
        Tri::Specified(v) => writeln!(out, "{indent}{key}: {v}"),
        Tri::Unspecified => writeln!(out, "{indent}{key}: {UNSPECIFIED}"),
        Tri::Defaulted { value, seed } => {
            writeln!(out, "{indent}{key}: {value}  # defaulted seed={seed}")
        }
    }
    .expect("writing to a String cannot fail");
}

fn emit_position(out: &mut String, indent: &str, position: &Tri<Position>) {
    let (p, note) = match position {
        Tri::Unspecified => {
            let _ = writeln!(out, "{indent}position: {UNSPECIFIED}");
            return;
        }
        Tri::Specified(p) => (p, String::new()),
        Tri::Defaulted { value, seed } => (value, format!("  # defaulted seed={seed}")),
    };
    let _ = writeln!(out, "{indent}position:{note}");
    let _ = writeln!(out, "{indent}  reference_point: {}", p.reference_point);
    let _ = writeln!(out, "{indent}  relative_position: {}", p.relative_position);
}

/// Serializes a scenario in canonical layout. NPCs are written in
/// canonical order regardless of their order in `scenario`.
pub fn emit_dsl(scenario: &Scenario) -> String {
    let mut out = String::new();
    let env = &scenario.environment;
    out.push_str("environment:\n");
    emit_tri(&mut out, "  ", "weather", &env.weather);
    emit_tri(&mut out, "  ", "time", &env.time);

    let rn = &scenario.road_network;
    out.push_str("road_network:\n");
    emit_tri(&mut out, "  ", "road_type", &rn.road_type);
    let signs: Vec<&str> = rn.traffic_signs.iter().map(|s| s.as_str()).collect();
    let _ = writeln!(out, "  traffic_signs: [{}]", signs.join(", "));
    emit_tri(&mut out, "  ", "traffic_light", &rn.traffic_light);
    emit_tri(&mut out, "  ", "lane_number", &rn.lane_number);

    let ego = &scenario.ego;
    out.push_str("ego_vehicle:\n");
    emit_tri(&mut out, "  ", "behavior", &ego.behavior);
    emit_position(&mut out, "  ", &ego.position);
    emit_tri(&mut out, "  ", "lane_idx", &ego.lane_idx);
    emit_tri(&mut out, "  ", "speed", &ego.speed);

    let mut npcs: Vec<&NpcActor> = scenario.npc_actors.iter().collect();
    npcs.sort_by(|a, b| a.canonical_cmp(b));
    if npcs.is_empty() {
        out.push_str("npc_actors: []\n");
    } else {
        out.push_str("npc_actors:\n");
        for npc in npcs {
            let _ = writeln!(out, "  - actor_type: {}", npc.actor_type);
            emit_tri(&mut out, "    ", "behavior", &npc.behavior);
            emit_position(&mut out, "    ", &npc.position);
            emit_tri(&mut out, "    ", "lane_idx", &npc.lane_idx);
            emit_tri(&mut out, "    ", "speed", &npc.speed);
            let _ = writeln!(out, "    provenance: {}", npc.provenance.as_str());
        }
    }
    out
}
