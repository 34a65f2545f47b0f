use scenario_forge::vision::{parse_detections, DETECTIONS_SCHEMA};

#[test]
fn documented_schema_matches_the_shipped_one() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/detections.schema.json");
    assert_eq!(std::fs::read_to_string(path).unwrap(), DETECTIONS_SCHEMA);
}

#[test]
fn documented_example_validates() {
    let doc = include_str!("../../../docs/format-detections.md");
    let start = doc.find("```json\n").unwrap() + 8;
    let end = start + doc[start..].find("```").unwrap();
    let ds = parse_detections(&doc[start..end], 0.25).unwrap();
    assert_eq!((ds.boxes.len(), ds.lane_boundaries.len()), (3, 3));
}
