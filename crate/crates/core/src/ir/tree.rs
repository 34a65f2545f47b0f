//! Ordered labeled trees and the canonical tree encoding of a scenario.
//!
//! Encoding: the root `scenario` has three section children
//! (`environment`, `road_network`, `actors`). `actors` always holds an
//! `ego_vehicle` node followed by one `npc_actor` node per NPC in
//! canonical order. Known scalar fields become `key: value` leaves; a
//! known position becomes a `position` node with two leaves; traffic signs
//! become one sorted `traffic_sign: kind` leaf each. Unspecified fields
//! produce no node at all.

use std::fmt;

use super::model::{NpcActor, Position, Scenario, Tri};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    labels: Vec<String>,
    children: Vec<Vec<usize>>,
}

impl LabeledTree {
    pub fn new(root_label: impl Into<String>) -> Self {
        LabeledTree {
            labels: vec![root_label.into()],
            children: vec![Vec::new()],
        }
    }

    pub const ROOT: usize = 0;

    pub fn add_child(&mut self, parent: usize, label: impl Into<String>) -> usize {
        let id = self.labels.len();
        self.labels.push(label.into());
        self.children.push(Vec::new());
        self.children[parent].push(id);
        id
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn leaf_count(&self) -> usize {
        self.children.iter().filter(|c| c.is_empty()).count()
    }

    /// Node ids in preorder.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut stack = vec![Self::ROOT];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.children[n].iter().rev());
        }
        out
    }

    /// Parses bracket notation, e.g. `{a{b}{c{d}}}`.
    pub fn from_brackets(text: &str) -> Option<LabeledTree> {
        fn node(chars: &[char], pos: &mut usize, tree: &mut Option<LabeledTree>, parent: Option<usize>) -> Option<()> {
            if chars.get(*pos) != Some(&'{') {
                return None;
            }
            *pos += 1;
            let start = *pos;
            while *pos < chars.len() && chars[*pos] != '{' && chars[*pos] != '}' {
                *pos += 1;
            }
            let label: String = chars[start..*pos].iter().collect();
            let id = match (tree.as_mut(), parent) {
                (None, None) => {
                    *tree = Some(LabeledTree::new(label));
                    LabeledTree::ROOT
                }
                (Some(t), Some(p)) => t.add_child(p, label),
                _ => return None,
            };
            while chars.get(*pos) == Some(&'{') {
                node(chars, pos, tree, Some(id))?;
            }
            if chars.get(*pos) != Some(&'}') {
                return None;
            }
            *pos += 1;
            Some(())
        }
        let chars: Vec<char> = text.trim().chars().collect();
        let mut pos = 0;
        let mut tree = None;
        node(&chars, &mut pos, &mut tree, None)?;
        (pos == chars.len()).then_some(tree).flatten()
    }
}

impl fmt::Display for LabeledTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write(t: &LabeledTree, n: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "{{{}", t.label(n))?;
            for &c in t.children(n) {
                write(t, c, f)?;
            }
            write!(f, "}}")
        }
        write(self, LabeledTree::ROOT, f)
    }
}

fn leaf<V: fmt::Display>(tree: &mut LabeledTree, parent: usize, key: &str, value: &Tri<V>) {
    if let Some(v) = value.value() {
        tree.add_child(parent, format!("{key}: {v}"));
    }
}

fn position(tree: &mut LabeledTree, parent: usize, value: &Tri<Position>) {
    if let Some(p) = value.value() {
        let node = tree.add_child(parent, "position");
        tree.add_child(node, format!("reference_point: {}", p.reference_point));
        tree.add_child(node, format!("relative_position: {}", p.relative_position));
    }
}

/// The canonical labeled tree of a scenario. Deterministic and invariant
/// under permutations of the NPC list and of the traffic-sign list.
pub fn canonical_tree(scenario: &Scenario) -> LabeledTree {
    let mut t = LabeledTree::new("scenario");
    let root = LabeledTree::ROOT;

    let env = t.add_child(root, "environment");
    leaf(&mut t, env, "weather", &scenario.environment.weather);
    leaf(&mut t, env, "time", &scenario.environment.time);

    let rn = &scenario.road_network;
    let road = t.add_child(root, "road_network");
    leaf(&mut t, road, "road_type", &rn.road_type);
    let mut signs: Vec<&str> = rn.traffic_signs.iter().map(|s| s.as_str()).collect();
    signs.sort_unstable();
    for s in signs {
        t.add_child(road, format!("traffic_sign: {s}"));
    }
    leaf(&mut t, road, "traffic_light", &rn.traffic_light);
    leaf(&mut t, road, "lane_number", &rn.lane_number);

    let actors = t.add_child(root, "actors");
    let ego = t.add_child(actors, "ego_vehicle");
    leaf(&mut t, ego, "behavior", &scenario.ego.behavior);
    position(&mut t, ego, &scenario.ego.position);
    leaf(&mut t, ego, "lane_idx", &scenario.ego.lane_idx);
    leaf(&mut t, ego, "speed", &scenario.ego.speed);

    let mut npcs: Vec<&NpcActor> = scenario.npc_actors.iter().collect();
    npcs.sort_by(|a, b| a.canonical_cmp(b));
    for npc in npcs {
        let n = t.add_child(actors, "npc_actor");
        t.add_child(n, format!("actor_type: {}", npc.actor_type));
        leaf(&mut t, n, "behavior", &npc.behavior);
        position(&mut t, n, &npc.position);
        leaf(&mut t, n, "lane_idx", &npc.lane_idx);
        leaf(&mut t, n, "speed", &npc.speed);
    }
    t
}
