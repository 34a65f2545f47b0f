//! Scenario intermediate representation: domain types, validation, the
//! text document format and the canonical tree encoding.

pub mod doc;
mod model;
mod text;
mod tree;
mod validate;
pub mod vocab;

pub use model::{
    EgoActor, Environment, NpcActor, Position, Provenance, RoadNetwork, Scenario, Tri,
};
pub use text::{emit_dsl, parse_dsl, scenario_from_doc, DslError, UNSPECIFIED};
pub use tree::{canonical_tree, LabeledTree};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};
pub use vocab::{
    ActorKind, BehaviorKind, LightState, ReferencePoint, RelativePosition, RoadType, TimeOfDay,
    TrafficSignKind, UnknownWord, WeatherKind,
};
