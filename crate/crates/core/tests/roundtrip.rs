mod common;

use common::gen::random_scenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scenario_forge::ir::{emit_dsl, parse_dsl};

#[test]
fn emit_then_parse_is_identity_on_random_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut failures = Vec::new();
    for i in 0..1000 {
        let s = random_scenario(&mut rng, 6);
        let text = emit_dsl(&s);
        match parse_dsl(&text) {
            Ok(back) if back == s => {}
            Ok(back) => failures.push(format!("case {i}: {back:?}\n!=\n{s:?}\n{text}")),
            Err(e) => failures.push(format!("case {i}: {e}\n{text}")),
        }
        assert_eq!(emit_dsl(&parse_dsl(&text).unwrap_or_default()), text, "case {i}");
    }
    assert!(failures.is_empty(), "{} failures, first:\n{}", failures.len(), failures[0]);
}
