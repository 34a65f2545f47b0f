mod common;

use common::oracle::{forest_search, mapping_enumeration, random_tree};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scenario_forge::eval::ted;

#[test]
fn oracles_agree_on_small_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..150 {
        let a = random_tree(&mut rng, 6, &["a", "b", "c"]);
        let b = random_tree(&mut rng, 6, &["a", "b", "c"]);
        let enumerated = mapping_enumeration(&a, &b);
        assert_eq!(forest_search(&a, &b), enumerated, "{a} vs {b}");
        assert_eq!(ted(&a, &b), enumerated, "{a} vs {b}");
    }
}

#[test]
fn metric_laws_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let a = random_tree(&mut rng, 10, &["a", "b", "c", "d"]);
        let b = random_tree(&mut rng, 10, &["a", "b", "c", "d"]);
        let c = random_tree(&mut rng, 10, &["a", "b", "c", "d"]);
        let ab = ted(&a, &b);
        assert_eq!(ab, ted(&b, &a));
        assert!(ted(&a, &c) <= ab + ted(&b, &c));
        assert_eq!(ab == 0, a == b);
    }
}
