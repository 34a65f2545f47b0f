//! Lowering of an aligned scenario IR onto a map section, and script
//! emission for the supported simulators.

mod catalog;
mod defaults;
mod emit;
mod minisim;
mod placement;

pub use catalog::{
    find_map_section, find_section_for, CatalogError, Connections, Lane, MapCatalog, MapSection,
    NoSectionFound, DEFAULT_CATALOG,
};
pub use defaults::{
    fill_defaults, DEFAULT_BEHAVIOR, DEFAULT_TIME, DEFAULT_WEATHER, MAX_DEFAULT_SPEED_MPH,
};
pub use emit::{emit_script, Target};
pub use minisim::{
    actor_length, to_minisim, LightCycle, MinisimActor, MinisimEnvironment, MinisimLane,
    MinisimScenario, Phase, GREEN_PHASE_S, MINISIM_FORMAT, PEDESTRIAN_LENGTH_M, RED_PHASE_S,
    VEHICLE_LENGTH_M,
};
pub use placement::{
    place_actors, ConcreteScenario, DefaultRecord, PlacedActor, PlacementConfig, PlacementError,
    Waypoint, MPH_TO_MPS,
};

use crate::ir::Scenario;

#[derive(Debug, thiserror::Error)]
pub enum CodegenError {
    #[error(transparent)]
    NoSection(#[from] NoSectionFound),
    #[error(transparent)]
    Placement(#[from] PlacementError),
}

/// Default filling, section search and placement in one pass.
pub fn compile(
    scenario: &Scenario,
    catalog: &MapCatalog,
    seed: u64,
    config: &PlacementConfig,
) -> Result<ConcreteScenario, CodegenError> {
    let filled = fill_defaults(scenario, seed);
    let section = find_section_for(catalog, &filled)?;
    Ok(place_actors(&filled, section, seed, config)?)
}
