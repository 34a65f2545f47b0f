//! Kinematic lane simulator with failure oracles, ego policies, scenario
//! mutation operators and a mutation-based fuzz loop.

mod agent;
mod fuzz;
mod mutate;
mod sim;

pub use agent::{naive_agent, EgoPolicy, EgoView, NaiveAgent, NoOpAgent};
pub use fuzz::{dry_run, fuzz, DroppedSeed, FuzzConfig, FuzzError, FuzzStats, TimelineEntry};
pub use mutate::{mutate, MutationInapplicable, MutationKind};
pub use sim::{
    check_scenario, run, ActorFrame, BugKind, BugReport, BugSignature, Frame, SimConfig, SimError,
    SimOutcome, Trace,
};
