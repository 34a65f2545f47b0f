use crate::ir::{canonical_tree, Scenario};

use super::ted::ted;

/// Information-extraction accuracy of `extracted` against `ground_truth`:
/// one minus the tree edit distance between their canonical trees divided
/// by the ground-truth tree size, floored at zero.
pub fn ie_accuracy(extracted: &Scenario, ground_truth: &Scenario) -> f64 {
    let s = canonical_tree(extracted);
    let g = canonical_tree(ground_truth);
    let d = ted(&s, &g);
    (1.0 - d as f64 / g.node_count() as f64).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ActorKind, NpcActor, Tri, WeatherKind};

    #[test]
    fn identical_is_one() {
        let mut g = Scenario::default();
        g.environment.weather = Tri::Specified(WeatherKind::Rainy);
        assert_eq!(ie_accuracy(&g, &g), 1.0);
    }

    #[test]
    fn clamped_at_zero() {
        let g = Scenario::default();
        let mut s = Scenario::default();
        for _ in 0..4 {
            s.npc_actors.push(NpcActor::new(ActorKind::Car));
        }
        // 8 extra nodes against a 5-node ground truth.
        assert_eq!(ie_accuracy(&s, &g), 0.0);
    }
}
