use std::fmt::Write as _;

use crate::ir::{
    parse_dsl, ActorKind, BehaviorKind, DslError, LightState, RelativePosition, RoadType,
    TimeOfDay, TrafficSignKind, WeatherKind,
};

/// Opening delimiter the model must put before its scenario document.
pub const OPEN_MARKER: &str = "<YAML>";
/// Closing delimiter after the scenario document.
pub const CLOSE_MARKER: &str = "</YAML>";

/// One input/output demonstration pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FewshotExample {
    pub description: String,
    pub document: String,
}

impl FewshotExample {
    pub fn new(description: impl Into<String>, document: impl Into<String>) -> Self {
        FewshotExample {
            description: description.into(),
            document: document.into(),
        }
    }
}

/// The two demonstrations shipped with the crate.
pub fn default_fewshot() -> Vec<FewshotExample> {
    vec![
        FewshotExample::new(
            include_str!("../../assets/fewshot/example-1.txt").trim(),
            include_str!("../../assets/fewshot/example-1.scn.yaml"),
        ),
        FewshotExample::new(
            include_str!("../../assets/fewshot/example-2.txt").trim(),
            include_str!("../../assets/fewshot/example-2.scn.yaml"),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PromptError {
    #[error("the scenario description is empty")]
    EmptyDescription,
    #[error("at least one few-shot example is required")]
    NoFewshot,
    #[error("few-shot example {index} does not parse: {source}")]
    FewshotInvalid {
        index: usize,
        #[source]
        source: DslError,
    },
}

/// A fully assembled prompt. Segments are rendered in field order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub role_segment: String,
    pub steps_segment: String,
    pub grammar_segment: String,
    pub fewshot_segment: String,
    pub user_description: String,
    /// Set on the repair round: the parse error of the previous answer.
    pub repair_note: Option<String>,
}

impl PromptBundle {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for part in [
            &self.role_segment,
            &self.steps_segment,
            &self.grammar_segment,
            &self.fewshot_segment,
        ] {
            out.push_str(part.trim_end());
            out.push_str("\n\n");
        }
        out.push_str("Traffic description:\n");
        out.push_str(self.user_description.trim());
        out.push('\n');
        if let Some(note) = &self.repair_note {
            out.push_str("\nYour previous answer could not be parsed: ");
            out.push_str(note.trim());
            out.push_str(
                "\nAnswer again, using only the keys and values allowed by the grammar.\n",
            );
        }
        out
    }

    /// The same prompt with a repair note appended.
    pub fn with_repair(&self, error: &str) -> PromptBundle {
        PromptBundle {
            repair_note: Some(error.to_string()),
            ..self.clone()
        }
    }
}

const ROLE: &str = "You are a test engineer for autonomous driving systems. \
Your job is to turn a written traffic scene into a test scenario for a driving simulator.";

fn steps() -> String {
    format!(
        "Work through the description one step at a time and do not skip any step.\n\
Step 1: Decide the `weather` of the scenario. Leave it unspecified if the description does not mention it.\n\
Step 2: Decide the `time` of day of the scenario.\n\
Step 3: Decide the `road_network`: its `road_type`, any `traffic_sign`, the `traffic_light` state and the `lane_number`.\n\
Step 4: For the ego vehicle, decide its `current_behavior`, its `position_target`, its `position_relation` and its `speed` in miles per hour.\n\
Step 5: List every actor other than the ego vehicle. For each one decide its `type`, `current_behavior`, `position_target`, `position_relation` and `speed`.\n\
Step 6: Write everything from the steps above as one YAML document that follows the grammar below. \
The document must begin with `{OPEN_MARKER}` and finish with `{CLOSE_MARKER}`."
    )
}

fn words<T: Copy>(all: &[T], f: impl Fn(T) -> &'static str) -> String {
    all.iter().map(|&x| f(x)).collect::<Vec<_>>().join(" | ")
}

/// The scenario grammar as shown to the model.
pub fn grammar_text() -> String {
    let mut g = String::from("Scenario grammar:\n");
    let rows = [
        ("scenario", "environment; road_network; ego_vehicle; npc_actors".to_string()),
        ("environment", "weather; time".to_string()),
        ("weather", words(WeatherKind::ALL, WeatherKind::as_str)),
        ("time", words(TimeOfDay::ALL, TimeOfDay::as_str)),
        (
            "road_network",
            "road_type; traffic_signs; traffic_light; lane_number".to_string(),
        ),
        ("road_type", words(RoadType::ALL, RoadType::as_str)),
        ("traffic_signs", "[] | [traffic_sign, ...]".to_string()),
        ("traffic_sign", words(TrafficSignKind::ALL, TrafficSignKind::as_str)),
        ("traffic_light", words(LightState::ALL, LightState::as_str)),
        ("lane_number", "0 | 1 | 2 | 3 | ...".to_string()),
        ("ego_vehicle", "behavior; position; lane_idx; speed".to_string()),
        ("npc_actors", "[] | npc_actor; npc_actors".to_string()),
        (
            "npc_actor",
            "actor_type; behavior; position; lane_idx; speed".to_string(),
        ),
        ("actor_type", words(ActorKind::ALL, ActorKind::as_str)),
        ("behavior", words(BehaviorKind::ALL, BehaviorKind::as_str)),
        ("position", "reference_point; relative_position".to_string()),
        (
            "reference_point",
            "ego_vehicle | road_type | traffic_sign".to_string(),
        ),
        (
            "relative_position",
            words(RelativePosition::ALL, RelativePosition::as_str),
        ),
        ("lane_idx", "0 | 1 | 2 | ... (0 is the leftmost lane)".to_string()),
        ("speed", "0 | 1 | 2 | ... (miles per hour)".to_string()),
    ];
    for (lhs, rhs) in rows {
        let _ = writeln!(g, "  {lhs} ::= {rhs}");
    }
    g.push_str("Write `unspecified` for any value the description does not give.\n");
    g
}

/// Assembles the prompt for `description`.
pub fn build_prompt(
    description: &str,
    fewshot: &[FewshotExample],
) -> Result<PromptBundle, PromptError> {
    if description.trim().is_empty() {
        return Err(PromptError::EmptyDescription);
    }
    if fewshot.is_empty() {
        return Err(PromptError::NoFewshot);
    }
    let mut examples = String::from(
        "Below are examples of traffic descriptions and the scenario each one becomes:\n",
    );
    for (index, ex) in fewshot.iter().enumerate() {
        parse_dsl(&ex.document).map_err(|source| PromptError::FewshotInvalid { index, source })?;
        let _ = write!(
            examples,
            "\nExample {n}\nTraffic description: {desc}\nScenario representation:\n{doc}\n",
            n = index + 1,
            desc = ex.description.trim(),
            doc = ex.document.trim_end(),
        );
    }
    examples.push_str(
        "\nFollowing the steps and examples above, convert the next traffic description into its scenario representation.",
    );
    Ok(PromptBundle {
        role_segment: ROLE.to_string(),
        steps_segment: steps(),
        grammar_segment: grammar_text(),
        fewshot_segment: examples,
        user_description: description.trim().to_string(),
        repair_note: None,
    })
}
