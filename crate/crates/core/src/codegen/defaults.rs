use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ir::{BehaviorKind, Scenario, TimeOfDay, Tri, WeatherKind};

pub const DEFAULT_WEATHER: WeatherKind = WeatherKind::Sunny;
pub const DEFAULT_TIME: TimeOfDay = TimeOfDay::Daytime;
pub const DEFAULT_BEHAVIOR: BehaviorKind = BehaviorKind::GoForward;
/// Inclusive upper bound of sampled speeds, in mph.
pub const MAX_DEFAULT_SPEED_MPH: u32 = 30;

fn fill<V>(slot: &mut Tri<V>, seed: u64, make: impl FnOnce() -> V) {
    if slot.is_unspecified() {
        *slot = Tri::Defaulted {
            value: make(),
            seed,
        };
    }
}

/// Resolves every unspecified environment, behavior and speed field.
/// Speeds are drawn uniformly from 0..=30 mph, ego first and then the
/// NPCs in canonical order, from one generator seeded with `seed`.
pub fn fill_defaults(scenario: &Scenario, seed: u64) -> Scenario {
    let mut s = scenario.clone().canonicalized();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fill(&mut s.environment.weather, seed, || DEFAULT_WEATHER);
    fill(&mut s.environment.time, seed, || DEFAULT_TIME);
    fill(&mut s.ego.behavior, seed, || DEFAULT_BEHAVIOR);
    fill(&mut s.ego.speed, seed, || rng.random_range(0..=MAX_DEFAULT_SPEED_MPH));
    for npc in &mut s.npc_actors {
        fill(&mut npc.behavior, seed, || DEFAULT_BEHAVIOR);
        fill(&mut npc.speed, seed, || rng.random_range(0..=MAX_DEFAULT_SPEED_MPH));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_dsl, ActorKind, NpcActor};

    #[test]
    fn speeds_are_seeded_and_bounded() {
        let s = Scenario::new(
            Default::default(),
            Default::default(),
            Default::default(),
            vec![NpcActor::new(ActorKind::Car)],
        );
        let a = fill_defaults(&s, 42);
        let b = fill_defaults(&s, 42);
        assert_eq!(a, b);
        match a.npc_actors[0].speed {
            Tri::Defaulted { value, seed } => {
                assert!(value <= 30);
                assert_eq!(seed, 42);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            a.npc_actors[0].behavior,
            Tri::Defaulted {
                value: BehaviorKind::GoForward,
                seed: 42
            }
        );
        assert_eq!(a.environment.weather.get(), Some(WeatherKind::Sunny));
        assert_eq!(a.environment.time.get(), Some(TimeOfDay::Daytime));
    }

    #[test]
    fn fully_specified_is_unchanged() {
        let s = parse_dsl(include_str!("../../assets/fewshot/example-2.scn.yaml")).unwrap();
        let mut full = s.clone();
        full.environment.time = Tri::Specified(TimeOfDay::Nighttime);
        for a in &mut full.npc_actors {
            a.behavior = Tri::Specified(BehaviorKind::Static);
            a.speed = Tri::Specified(0);
        }
        assert_eq!(fill_defaults(&full, 7), full);
    }

    #[test]
    fn sampled_speeds_cover_the_range() {
        let s = Scenario::default();
        let mut seen = [false; 31];
        for seed in 0..2000 {
            let v = fill_defaults(&s, seed).ego.speed.get().unwrap();
            seen[v as usize] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }
}
