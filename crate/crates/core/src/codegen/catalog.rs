use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ir::{LightState, RoadNetwork, RoadType, Scenario, TrafficSignKind};

/// Lanes that a turn from this lane leads onto.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Connections {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub lane_id: String,
    pub length_m: f64,
    pub waypoint_spacing_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connections: Option<Connections>,
}

impl Lane {
    pub fn waypoint_count(&self) -> usize {
        (self.length_m / self.waypoint_spacing_m).floor() as usize + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSection {
    pub id: String,
    pub road_type: RoadType,
    pub lane_count: u32,
    pub has_traffic_light: bool,
    pub traffic_signs: Vec<TrafficSignKind>,
    /// Ordered left to right; lane index i is `lanes[i]`.
    pub lanes: Vec<Lane>,
    /// Distance of the stop line from the start of every lane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_line_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapCatalog {
    pub sections: Vec<MapSection>,
}

#[derive(Debug, thiserror::Error)]
pub enum CatalogError {
    #[error("cannot read map catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("map catalog is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("map catalog: {0}")]
    Invalid(String),
}

/// The catalog shipped with the crate.
pub const DEFAULT_CATALOG: &str = include_str!("../../assets/maps/catalog.json");

impl MapCatalog {
    pub fn parse(text: &str) -> Result<MapCatalog, CatalogError> {
        let catalog: MapCatalog = serde_json::from_str(text)?;
        catalog.check()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<MapCatalog, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        MapCatalog::parse(&text)
    }

    pub fn builtin() -> MapCatalog {
        MapCatalog::parse(DEFAULT_CATALOG).expect("shipped catalog is valid")
    }

    pub fn check(&self) -> Result<(), CatalogError> {
        if self.sections.is_empty() {
            return Err(CatalogError::Invalid("no sections".into()));
        }
        for s in &self.sections {
            if s.lanes.len() != s.lane_count as usize || s.lanes.is_empty() {
                return Err(CatalogError::Invalid(format!(
                    "section {}: lane_count {} but {} lanes listed",
                    s.id,
                    s.lane_count,
                    s.lanes.len()
                )));
            }
            for l in &s.lanes {
                if !(l.waypoint_spacing_m > 0.0) || !(l.length_m > 0.0) {
                    return Err(CatalogError::Invalid(format!(
                        "section {} lane {}: length and spacing must be positive",
                        s.id, l.lane_id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no map section satisfies: {}", unsatisfied.join(", "))]
pub struct NoSectionFound {
    pub unsatisfied: Vec<String>,
}

struct Constraint {
    name: String,
    test: Box<dyn Fn(&MapSection) -> bool>,
}

fn constraints(rn: &RoadNetwork, min_lanes: Option<u32>) -> Vec<Constraint> {
    let mut out = Vec::new();
    if let Some(rt) = rn.road_type.get() {
        out.push(Constraint {
            name: format!("road_type = {rt}"),
            test: Box::new(move |s| s.road_type == rt),
        });
    }
    if let Some(n) = min_lanes {
        out.push(Constraint {
            name: format!("lane_count >= {n}"),
            test: Box::new(move |s| s.lane_count >= n),
        });
    }
    if let Some(light) = rn.traffic_light.get() {
        let wanted = light != LightState::Absent;
        out.push(Constraint {
            name: format!("traffic_light = {light}"),
            test: Box::new(move |s| s.has_traffic_light == wanted),
        });
    }
    let mut signs = rn.traffic_signs.clone();
    signs.sort_by_key(|k| k.as_str());
    signs.dedup();
    for sign in signs {
        out.push(Constraint {
            name: format!("sign {sign}"),
            test: Box::new(move |s| s.traffic_signs.contains(&sign)),
        });
    }
    out
}

fn search<'c>(
    catalog: &'c MapCatalog,
    rn: &RoadNetwork,
    min_lanes: Option<u32>,
) -> Result<&'c MapSection, NoSectionFound> {
    let cs = constraints(rn, min_lanes);
    if let Some(s) = catalog
        .sections
        .iter()
        .find(|s| cs.iter().all(|c| (c.test)(s)))
    {
        return Ok(s);
    }
    let alone: Vec<String> = cs
        .iter()
        .filter(|c| !catalog.sections.iter().any(|s| (c.test)(s)))
        .map(|c| c.name.clone())
        .collect();
    Err(NoSectionFound {
        unsatisfied: if alone.is_empty() {
            cs.into_iter().map(|c| c.name).collect()
        } else {
            alone
        },
    })
}

/// First section in catalog order meeting every known road-network
/// constraint.
pub fn find_map_section<'c>(
    catalog: &'c MapCatalog,
    rn: &RoadNetwork,
) -> Result<&'c MapSection, NoSectionFound> {
    search(catalog, rn, rn.lane_number.get())
}

/// Like [`find_map_section`], also requiring room for every stated lane
/// index of the scenario's actors.
pub fn find_section_for<'c>(
    catalog: &'c MapCatalog,
    scenario: &Scenario,
) -> Result<&'c MapSection, NoSectionFound> {
    let highest = std::iter::once(scenario.ego.lane_idx.get())
        .chain(scenario.npc_actors.iter().map(|a| a.lane_idx.get()))
        .flatten()
        .max()
        .map(|l| l + 1);
    let min_lanes = match (scenario.road_network.lane_number.get(), highest) {
        (Some(a), Some(b)) => Some(a.max(b)),
        (a, b) => a.or(b),
    };
    search(catalog, &scenario.road_network, min_lanes)
}
