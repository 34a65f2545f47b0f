//! Merging of the textual and visual IRs.

mod matching;
mod merge;

pub use matching::{match_actors, match_score, ActorPair, Matching, MATCH_THRESHOLD};
pub use merge::{
    field_paths, merge, Conflict, DroppedActor, FieldDecision, MergeReport, Modality,
    SingleActor, Source,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{
        parse_dsl, ActorKind, BehaviorKind, Position, Provenance, RelativePosition, Scenario, Tri,
        WeatherKind,
    };

    #[test]
    fn environment_prefers_text() {
        let mut t = Scenario::default();
        t.environment.weather = Tri::Specified(WeatherKind::Rainy);
        let mut v = Scenario::default();
        v.environment.weather = Tri::Specified(WeatherKind::Sunny);
        let (m, r) = merge(&t, &v);
        assert_eq!(m.environment.weather, Tri::Specified(WeatherKind::Rainy));
        assert_eq!(r.source_of("environment.weather"), Some(Source::Text));
        assert_eq!(r.conflicts.len(), 1);
        assert_eq!(r.conflicts[0].winner, Modality::Text);
    }

    #[test]
    fn lane_number_prefers_visual() {
        let mut t = Scenario::default();
        t.road_network.lane_number = Tri::Specified(3);
        let mut v = Scenario::default();
        v.road_network.lane_number = Tri::Specified(4);
        let (m, r) = merge(&t, &v);
        assert_eq!(m.road_network.lane_number, Tri::Specified(4));
        assert_eq!(r.source_of("road_network.lane_number"), Some(Source::Visual));
    }

    #[test]
    fn matched_actor_takes_dynamics_from_text() {
        let t = parse_dsl(
            "ego_vehicle:\nnpc_actors:\n  - actor_type: car\n    behavior: turn_left\n    position:\n      relative_position: front_right\n    speed: 20\n",
        )
        .unwrap();
        let v = parse_dsl(
            "ego_vehicle:\nnpc_actors:\n  - actor_type: car\n    position:\n      relative_position: front_right\n    lane_idx: 2\n    provenance: visual\n",
        )
        .unwrap();
        let (m, r) = merge(&t, &v);
        assert_eq!(m.npc_actors.len(), 1);
        let a = &m.npc_actors[0];
        assert_eq!(a.behavior, Tri::Specified(BehaviorKind::TurnLeft));
        assert_eq!(a.speed, Tri::Specified(20));
        assert_eq!(a.lane_idx, Tri::Specified(2));
        assert_eq!(a.provenance, Provenance::Both);
        assert_eq!(r.source_of("npc_actors[0].lane_idx"), Some(Source::Visual));
        assert_eq!(r.source_of("npc_actors[0].speed"), Some(Source::Text));
    }

    #[test]
    fn type_conflict_goes_to_text() {
        let mut ta = crate::ir::NpcActor::new(ActorKind::Truck);
        ta.position = Tri::Specified(Position::of_ego(RelativePosition::Front));
        ta.lane_idx = Tri::Specified(1);
        let mut va = ta.clone();
        va.actor_type = ActorKind::Bus;
        let t = Scenario { npc_actors: vec![ta], ..Scenario::default() };
        let v = Scenario { npc_actors: vec![va], ..Scenario::default() };
        let (m, r) = merge(&t, &v);
        assert_eq!(m.npc_actors[0].actor_type, ActorKind::Truck);
        assert!(r.conflicts.iter().any(|c| c.path.ends_with("actor_type")));
    }

    #[test]
    fn count_disagreement_keeps_the_larger_count() {
        let car = "  - actor_type: car\n    position:\n      relative_position: front\n    lane_idx: 1\n";
        let t = parse_dsl(&format!("ego_vehicle:\nnpc_actors:\n{car}{car}")).unwrap();
        let v = parse_dsl(&format!("ego_vehicle:\nnpc_actors:\n{car}")).unwrap();
        let (m, r) = merge(&t, &v);
        assert_eq!(m.npc_actors.len(), 2);
        assert_eq!(r.pairs.len(), 1);
        assert_eq!(r.kept.len(), 1);
        let (m, r) = merge(&v, &t);
        assert_eq!(m.npc_actors.len(), 2);
        assert!(r.dropped.is_empty());
    }

    #[test]
    fn text_only_actor_in_a_full_cell_is_dropped() {
        let at = |kind, lane, rel| {
            let mut a = crate::ir::NpcActor::new(kind);
            a.lane_idx = Tri::Specified(lane);
            a.position = Tri::Specified(Position::of_ego(rel));
            a
        };
        let t = Scenario::new(
            Default::default(),
            Default::default(),
            Default::default(),
            vec![
                at(ActorKind::Truck, 1, RelativePosition::Behind),
                at(ActorKind::Car, 1, RelativePosition::Front),
            ],
        );
        let v = Scenario::new(
            Default::default(),
            Default::default(),
            Default::default(),
            vec![at(ActorKind::Car, 1, RelativePosition::Behind)],
        );
        let (m, r) = merge(&t, &v);
        assert_eq!(m.npc_actors.len(), 1);
        assert_eq!(m.npc_actors[0].actor_type, ActorKind::Car);
        assert_eq!(m.npc_actors[0].relative_position(), Some(RelativePosition::Behind));
        assert_eq!(r.dropped.len(), 1);
        assert_eq!(r.dropped[0].actor_type, "truck");
        assert_eq!(r.dropped[0].modality, Modality::Text);
    }

    #[test]
    fn report_covers_every_field_once() {
        let t = parse_dsl(include_str!("../../assets/fewshot/example-1.scn.yaml")).unwrap();
        let v = parse_dsl(include_str!("../../assets/fewshot/example-2.scn.yaml")).unwrap();
        let (m, r) = merge(&t, &v);
        let paths: Vec<String> = r.fields.iter().map(|f| f.path.clone()).collect();
        assert_eq!(paths, field_paths(m.npc_actors.len()));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(json["fields"].is_array());
    }

    #[test]
    fn neither_side_leaves_unspecified() {
        let (m, r) = merge(&Scenario::default(), &Scenario::default());
        assert_eq!(m, Scenario::default());
        assert!(r.fields.iter().all(|f| f.source == Source::Unspecified));
    }
}
