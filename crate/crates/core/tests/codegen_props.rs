mod common;

use std::collections::HashSet;

use common::gen::random_compatible;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenario_forge::codegen::{compile, emit_script, MapCatalog, PlacementConfig, Target, MPH_TO_MPS};

#[test]
fn five_hundred_random_scenarios_compile_safely() {
    let catalog = MapCatalog::builtin();
    let config = PlacementConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE);
    for case in 0..500 {
        let s = random_compatible(&mut rng, &catalog);
        let seed = rng.random_range(0..10_000);
        let cs = compile(&s, &catalog, seed, &config)
            .unwrap_or_else(|e| panic!("case {case}: {e}\n{s:#?}"));

        let starts: HashSet<_> = cs.actors().map(|a| a.start.clone()).collect();
        assert_eq!(starts.len(), 1 + cs.npcs.len(), "case {case}: start overlap");

        for d in &cs.defaults {
            if d.path.ends_with(".speed") {
                let mph: u32 = d.value.parse().unwrap();
                assert!(mph <= 30, "case {case}: {} = {mph}", d.path);
            }
        }
        let unstated_ego = usize::from(s.ego.speed.is_unspecified());
        let unstated = unstated_ego + s.npc_actors.iter().filter(|a| a.speed.is_unspecified()).count();
        let filled: Vec<_> = cs.defaults.iter().filter(|d| d.path.ends_with(".speed")).collect();
        assert_eq!(filled.len(), unstated, "case {case}");
        if s.ego.speed.is_unspecified() {
            assert!(cs.ego.speed_mps <= 30.0 * MPH_TO_MPS + 1e-9);
        }

        let again = compile(&s, &catalog, seed, &config).unwrap();
        assert_eq!(cs, again);
        for t in Target::ALL {
            assert_eq!(emit_script(&cs, t), emit_script(&again, t), "case {case} {t:?}");
        }
    }
}
