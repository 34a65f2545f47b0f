mod common;

use common::gen::random_ir_pair;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scenario_forge::align::{field_paths, match_actors, match_score, merge, Source, MATCH_THRESHOLD};
use scenario_forge::ir::{
    ActorKind, NpcActor, Position, RelativePosition, Scenario, Tri,
};

/// Best total score over every one-to-one assignment that only uses pairs
/// meeting the threshold.
fn best_total(text: &[NpcActor], visual: &[NpcActor]) -> u32 {
    fn go(i: usize, text: &[NpcActor], visual: &[NpcActor], used: &mut Vec<bool>) -> u32 {
        if i == text.len() {
            return 0;
        }
        let mut best = go(i + 1, text, visual, used);
        for j in 0..visual.len() {
            let s = match_score(&text[i], &visual[j]);
            if !used[j] && s >= MATCH_THRESHOLD {
                used[j] = true;
                best = best.max(s + go(i + 1, text, visual, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, text, visual, &mut vec![false; visual.len()])
}

fn at(kind: ActorKind, lane: Option<u32>, rel: RelativePosition) -> NpcActor {
    let mut a = NpcActor::new(kind);
    a.lane_idx = lane.into();
    a.position = Tri::Specified(Position::of_ego(rel));
    a
}

fn pair_set(text: &[NpcActor], visual: &[NpcActor]) -> Vec<(String, String)> {
    let mut text = text.to_vec();
    let mut visual = visual.to_vec();
    text.sort_by(NpcActor::canonical_cmp);
    visual.sort_by(NpcActor::canonical_cmp);
    let m = match_actors(&text, &visual);
    let mut out: Vec<(String, String)> = m
        .pairs
        .iter()
        .map(|p| (format!("{:?}", text[p.text]), format!("{:?}", visual[p.visual])))
        .collect();
    out.sort();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

#[test]
fn three_by_three_matching_is_optimal_and_order_free() {
    let text = vec![
        at(ActorKind::Car, None, RelativePosition::FrontLeft),
        at(ActorKind::Truck, Some(1), RelativePosition::Front),
        at(ActorKind::Pedestrian, None, RelativePosition::Right),
    ];
    let visual = vec![
        at(ActorKind::Car, Some(0), RelativePosition::FrontLeft),
        at(ActorKind::Bus, Some(1), RelativePosition::Front),
        at(ActorKind::Pedestrian, Some(2), RelativePosition::Right),
    ];
    let base = pair_set(&text, &visual);
    assert_eq!(base.len(), 3);

    let mut t = text.clone();
    let mut v = visual.clone();
    t.sort_by(NpcActor::canonical_cmp);
    v.sort_by(NpcActor::canonical_cmp);
    let greedy: u32 = match_actors(&t, &v).pairs.iter().map(|p| p.score).sum();
    assert_eq!(greedy, best_total(&t, &v));

    for pt in permutations(3) {
        for pv in permutations(3) {
            let t: Vec<_> = pt.iter().map(|&i| text[i].clone()).collect();
            let v: Vec<_> = pv.iter().map(|&i| visual[i].clone()).collect();
            assert_eq!(pair_set(&t, &v), base);
        }
    }
}

#[test]
fn greedy_matching_is_within_half_of_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let (t, v) = random_ir_pair(&mut rng, 4);
        let m = match_actors(&t.npc_actors, &v.npc_actors);
        let greedy: u32 = m.pairs.iter().map(|p| p.score).sum();
        let best = best_total(&t.npc_actors, &v.npc_actors);
        assert!(2 * greedy >= best, "greedy {greedy} vs best {best}");
        assert!(greedy <= best);
    }
}

fn scenario_view(s: &Scenario) -> impl PartialEq + std::fmt::Debug {
    let mut signs: Vec<&str> = s.road_network.traffic_signs.iter().map(|k| k.as_str()).collect();
    signs.sort();
    (
        s.environment.clone(),
        s.road_network.road_type,
        signs.join(","),
        s.road_network.traffic_light,
        s.ego.behavior,
        s.ego.speed,
    )
}

fn actor_dynamics(s: &Scenario) -> Vec<String> {
    let mut v: Vec<String> = s
        .npc_actors
        .iter()
        .map(|a| format!("{} {:?} {:?}", a.actor_type, a.behavior, a.speed))
        .collect();
    v.sort();
    v
}

fn is_sub_multiset(small: &[String], big: &[String]) -> bool {
    let mut rest = big.to_vec();
    small.iter().all(|x| match rest.iter().position(|y| y == x) {
        Some(i) => {
            rest.remove(i);
            true
        }
        None => false,
    })
}

#[test]
fn merge_properties_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for case in 0..500 {
        let (text, visual) = random_ir_pair(&mut rng, 5);
        let (m, report) = merge(&text, &visual);

        // Conservation.
        assert_eq!(
            m.npc_actors.len(),
            report.pairs.len() + report.kept.len(),
            "case {case}"
        );
        assert_eq!(
            report.pairs.len() * 2 + report.kept.len() + report.dropped.len(),
            text.npc_actors.len() + visual.npc_actors.len(),
            "case {case}"
        );

        // Totality: one decision per output field, in document order.
        let paths: Vec<String> = report.fields.iter().map(|f| f.path.clone()).collect();
        assert_eq!(paths, field_paths(m.npc_actors.len()), "case {case}");

        // Unspecified propagation.
        for f in &report.fields {
            if f.source == Source::Unspecified && f.path.starts_with("environment.") {
                let field = &f.path["environment.".len()..];
                match field {
                    "weather" => assert!(m.environment.weather.is_unspecified()),
                    _ => assert!(m.environment.time.is_unspecified()),
                }
            }
        }
        if text.environment.weather.is_unspecified() && visual.environment.weather.is_unspecified() {
            assert!(m.environment.weather.is_unspecified());
        }
        if text.road_network.lane_number.is_unspecified() && visual.road_network.lane_number.is_unspecified() {
            assert!(m.road_network.lane_number.is_unspecified());
        }

        // Idempotence on text-priority fields.
        let (again, _) = merge(&m, &visual);
        assert_eq!(scenario_view(&again), scenario_view(&m), "case {case}");
        assert!(
            is_sub_multiset(&actor_dynamics(&m), &actor_dynamics(&again)),
            "case {case}"
        );
        assert!(m.is_canonical());
    }
}
