use crate::ir::doc::{parse_document, DocEntry, DocNode};
use crate::ir::{scenario_from_doc, DslError, Provenance, Scenario};

use super::prompt::{CLOSE_MARKER, OPEN_MARKER};

/// Key names used in the prompt's step list, mapped to document keys.
pub const KEY_SYNONYMS: &[(&str, &str)] = &[
    ("current_behavior", "behavior"),
    ("position_target", "reference_point"),
    ("position_relation", "relative_position"),
    ("type", "actor_type"),
    ("traffic_sign", "traffic_signs"),
];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResponseError {
    #[error("response has no {OPEN_MARKER} ... {CLOSE_MARKER} block")]
    MarkerMissing { raw: String },
    #[error("scenario in response does not parse: {source}")]
    Dsl {
        #[source]
        source: DslError,
        raw: String,
    },
}

impl ResponseError {
    pub fn raw(&self) -> &str {
        match self {
            ResponseError::MarkerMissing { raw } | ResponseError::Dsl { raw, .. } => raw,
        }
    }
}

/// The text strictly between the first opening marker and the last
/// closing marker.
pub fn extract_block(raw: &str) -> Option<&str> {
    let start = raw.find(OPEN_MARKER)? + OPEN_MARKER.len();
    let end = raw.rfind(CLOSE_MARKER)?;
    (start <= end).then(|| &raw[start..end])
}

fn canonical_key(key: &str) -> String {
    KEY_SYNONYMS
        .iter()
        .find(|(from, _)| *from == key)
        .map_or(key, |(_, to)| to)
        .to_string()
}

fn normalize(node: DocNode) -> DocNode {
    match node {
        DocNode::Scalar {
            text,
            comment,
            line,
        } => DocNode::Scalar {
            text: text.trim().to_ascii_lowercase(),
            comment,
            line,
        },
        DocNode::Seq(items) => DocNode::Seq(items.into_iter().map(normalize).collect()),
        DocNode::Map(entries) => {
            let entries = entries
                .into_iter()
                .map(|e| {
                    let key = canonical_key(&e.key);
                    let mut value = normalize(e.value);
                    match key.as_str() {
                        "ego_vehicle" => value = nest_position(value),
                        "npc_actors" => {
                            if let DocNode::Seq(items) = value {
                                value = DocNode::Seq(items.into_iter().map(nest_position).collect());
                            }
                        }
                        "traffic_signs" => {
                            if let DocNode::Scalar { text, comment, line } = value {
                                value = if text.is_empty() || text == "unspecified" || text == "none" {
                                    DocNode::Seq(Vec::new())
                                } else {
                                    DocNode::Seq(vec![DocNode::Scalar { text, comment, line }])
                                };
                            }
                        }
                        _ => {}
                    }
                    DocEntry { key, value, ..e }
                })
                .collect();
            DocNode::Map(entries)
        }
    }
}

/// Moves flat `reference_point` / `relative_position` keys of an actor
/// into a nested `position` mapping.
fn nest_position(actor: DocNode) -> DocNode {
    let DocNode::Map(entries) = actor else {
        return actor;
    };
    let (flat, mut rest): (Vec<DocEntry>, Vec<DocEntry>) = entries
        .into_iter()
        .partition(|e| e.key == "reference_point" || e.key == "relative_position");
    if flat.is_empty() || rest.iter().any(|e| e.key == "position") {
        rest.extend(flat);
        return DocNode::Map(rest);
    }
    let line = flat[0].line;
    rest.push(DocEntry {
        key: "position".into(),
        value: DocNode::Map(flat),
        line,
        comment: None,
    });
    DocNode::Map(rest)
}

/// Parses a model response into a textual scenario IR.
pub fn parse_response(raw: &str) -> Result<Scenario, ResponseError> {
    let block = extract_block(raw).ok_or_else(|| ResponseError::MarkerMissing {
        raw: raw.to_string(),
    })?;
    let block = strip_fence(block);
    let wrap = |source: DslError| ResponseError::Dsl {
        source,
        raw: raw.to_string(),
    };
    let doc = parse_document(block).map_err(|e| wrap(e.into()))?;
    let mut scenario = scenario_from_doc(&normalize(doc)).map_err(wrap)?;
    for npc in &mut scenario.npc_actors {
        npc.provenance = Provenance::Text;
    }
    Ok(scenario)
}

/// Drops a Markdown code fence wrapped around the document, if any.
fn strip_fence(block: &str) -> &str {
    let t = block.trim();
    if let Some(rest) = t.strip_prefix("```") {
        let rest = rest.split_once('\n').map_or("", |(_, body)| body);
        return rest.trim_end().strip_suffix("```").unwrap_or(rest);
    }
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{
        ActorKind, BehaviorKind, Position, RelativePosition, TrafficSignKind, Tri, WeatherKind,
    };

    #[test]
    fn delimiter_extraction() {
        let s = parse_response("<YAML>environment:\n  weather: rainy\nego_vehicle:\n</YAML>").unwrap();
        assert_eq!(s.environment.weather, Tri::Specified(WeatherKind::Rainy));
    }

    #[test]
    fn prose_around_markers_is_ignored() {
        let doc = "environment:\n  weather: rainy\nego_vehicle:\n  speed: 10\n";
        let bare = parse_response(&format!("<YAML>{doc}</YAML>")).unwrap();
        let chatty = parse_response(&format!(
            "Sure! Step 1: the weather is rainy.\n<YAML>\n{doc}</YAML>\nHope this helps."
        ))
        .unwrap();
        assert_eq!(bare, chatty);
    }

    #[test]
    fn missing_markers() {
        assert!(matches!(
            parse_response("environment:\n  weather: rainy\n"),
            Err(ResponseError::MarkerMissing { .. })
        ));
        assert!(matches!(
            parse_response("</YAML> backwards <YAML>"),
            Err(ResponseError::MarkerMissing { .. })
        ));
    }

    #[test]
    fn synonyms_are_mapped() {
        let raw = "<YAML>
road_network:
  traffic_sign: stop_sign
ego_vehicle:
  current_behavior: go_forward
npc_actors:
  - type: Car
    current_behavior: turn_left
    position_target: ego_vehicle
    position_relation: front_left
    speed: 20
</YAML>";
        let s = parse_response(raw).unwrap();
        assert_eq!(s.road_network.traffic_signs, vec![TrafficSignKind::StopSign]);
        assert_eq!(s.ego.behavior, Tri::Specified(BehaviorKind::GoForward));
        let npc = &s.npc_actors[0];
        assert_eq!(npc.actor_type, ActorKind::Car);
        assert_eq!(npc.behavior, Tri::Specified(BehaviorKind::TurnLeft));
        assert_eq!(
            npc.position,
            Tri::Specified(Position::of_ego(RelativePosition::FrontLeft))
        );
        assert_eq!(npc.speed, Tri::Specified(20));
    }

    #[test]
    fn synonym_map_is_total_and_injective() {
        let mut targets: Vec<&str> = KEY_SYNONYMS.iter().map(|(_, t)| *t).collect();
        targets.sort();
        targets.dedup();
        assert_eq!(targets.len(), KEY_SYNONYMS.len());
        for (from, to) in KEY_SYNONYMS {
            assert_eq!(canonical_key(from), *to);
        }
    }

    #[test]
    fn code_fence_inside_markers() {
        let raw = "<YAML>\n```yaml\nego_vehicle:\n  speed: 5\n```\n</YAML>";
        assert_eq!(parse_response(raw).unwrap().ego.speed, Tri::Specified(5));
    }

    #[test]
    fn dsl_errors_keep_raw_text() {
        let raw = "<YAML>environment:\n  weather: volcanic\nego_vehicle:\n</YAML>";
        let err = parse_response(raw).unwrap_err();
        assert_eq!(err.raw(), raw);
        assert!(matches!(
            err,
            ResponseError::Dsl {
                source: DslError::Vocabulary { .. },
                ..
            }
        ));
    }
}
