//! The detections JSON contract shared with the detector adapter.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ir::{ActorKind, TrafficSignKind};

/// Default confidence floor below which boxes are dropped on load.
pub const DEFAULT_CONFIDENCE_FLOOR: f64 = 0.25;

/// Machine-readable JSON schema of the detections file.
pub const DETECTIONS_SCHEMA: &str = include_str!("../../assets/detections.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxClass {
    Actor(ActorKind),
    TrafficLight,
    TrafficSign,
}

impl BoxClass {
    pub fn parse(s: &str) -> Option<BoxClass> {
        match s {
            "traffic_light" => Some(BoxClass::TrafficLight),
            "traffic_sign" => Some(BoxClass::TrafficSign),
            other => other.parse().ok().map(BoxClass::Actor),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoxClass::Actor(k) => k.as_str(),
            BoxClass::TrafficLight => "traffic_light",
            BoxClass::TrafficSign => "traffic_sign",
        }
    }

    pub fn is_actor(self) -> bool {
        matches!(self, BoxClass::Actor(_))
    }
}

impl Serialize for BoxClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for BoxClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BoxClass::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("unknown class `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LightColor {
    Red,
    Green,
}

/// Axis-aligned box in pixels, top-left origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl From<[f64; 4]> for BBox {
    fn from(v: [f64; 4]) -> Self {
        BBox {
            x_min: v[0],
            y_min: v[1],
            x_max: v[2],
            y_max: v[3],
        }
    }
}

impl From<BBox> for [f64; 4] {
    fn from(b: BBox) -> Self {
        [b.x_min, b.y_min, b.x_max, b.y_max]
    }
}

impl BBox {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min).max(0.0) * (self.y_max - self.y_min).max(0.0)
    }

    /// Bottom-center point, the approximate ground contact of the object.
    pub fn anchor(&self) -> (f64, f64) {
        ((self.x_min + self.x_max) / 2.0, self.y_max)
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let w = (self.x_max.min(other.x_max) - self.x_min.max(other.x_min)).max(0.0);
        let h = (self.y_max.min(other.y_max) - self.y_min.max(other.y_min)).max(0.0);
        let inter = w * h;
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: BoxClass,
    pub bbox: BBox,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_state: Option<LightColor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign_kind: Option<TrafficSignKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImageSize {
    pub width: f64,
    pub height: f64,
}

pub type Polyline = Vec<(f64, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub image_size: ImageSize,
    pub boxes: Vec<Detection>,
    pub lane_boundaries: Vec<Polyline>,
}

impl DetectionSet {
    /// Number of lanes implied by the boundaries, when at least two exist.
    pub fn lane_count_candidate(&self) -> Option<u32> {
        (self.lane_boundaries.len() >= 2).then(|| self.lane_boundaries.len() as u32 - 1)
    }

    pub fn actor_boxes(&self) -> impl Iterator<Item = &Detection> {
        self.boxes.iter().filter(|b| b.class.is_actor())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("detections serialize")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DetectionError {
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> DetectionError {
    DetectionError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn number(v: &Value, path: &str) -> Result<f64, DetectionError> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| schema(path, "expected a finite number"))
}

fn object<'a>(
    v: &'a Value,
    path: &str,
    allowed: &[&str],
) -> Result<&'a serde_json::Map<String, Value>, DetectionError> {
    let map = v.as_object().ok_or_else(|| schema(path, "expected an object"))?;
    if let Some(k) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(schema(format!("{path}.{k}"), "unknown field"));
    }
    Ok(map)
}

fn required<'a>(
    map: &'a serde_json::Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Value, DetectionError> {
    map.get(key)
        .ok_or_else(|| schema(format!("{path}.{key}"), "missing required field"))
}

/// Validates a parsed JSON value against the detections contract and
/// converts it. Every error carries the JSON path of the offending value.
pub fn detections_from_value(v: &Value) -> Result<DetectionSet, DetectionError> {
    let root = object(v, "$", &["image_size", "boxes", "lane_boundaries"])?;

    let size_v = required(root, "image_size", "$")?;
    let size = object(size_v, "$.image_size", &["width", "height"])?;
    let width = number(required(size, "width", "$.image_size")?, "$.image_size.width")?;
    let height = number(required(size, "height", "$.image_size")?, "$.image_size.height")?;
    if width <= 0.0 || height <= 0.0 {
        return Err(schema("$.image_size", "dimensions must be positive"));
    }
    let in_x = |x: f64| (0.0..=width).contains(&x);
    let in_y = |y: f64| (0.0..=height).contains(&y);

    let boxes_v = required(root, "boxes", "$")?
        .as_array()
        .ok_or_else(|| schema("$.boxes", "expected an array"))?;
    let mut boxes = Vec::with_capacity(boxes_v.len());
    for (i, b) in boxes_v.iter().enumerate() {
        let path = format!("$.boxes[{i}]");
        let m = object(
            b,
            &path,
            &["class", "bbox", "confidence", "light_state", "sign_kind"],
        )?;
        let class_s = required(m, "class", &path)?
            .as_str()
            .ok_or_else(|| schema(format!("{path}.class"), "expected a string"))?;
        let class = BoxClass::parse(class_s)
            .ok_or_else(|| schema(format!("{path}.class"), format!("unknown class `{class_s}`")))?;
        let coords = required(m, "bbox", &path)?
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| schema(format!("{path}.bbox"), "expected [x_min, y_min, x_max, y_max]"))?;
        let mut c = [0.0; 4];
        for (k, value) in coords.iter().enumerate() {
            c[k] = number(value, &format!("{path}.bbox[{k}]"))?;
        }
        let bbox = BBox::from(c);
        if !(in_x(bbox.x_min) && in_x(bbox.x_max) && in_y(bbox.y_min) && in_y(bbox.y_max)) {
            return Err(schema(format!("{path}.bbox"), "coordinates outside the image"));
        }
        if bbox.x_min >= bbox.x_max || bbox.y_min >= bbox.y_max {
            return Err(schema(format!("{path}.bbox"), "requires x_min < x_max and y_min < y_max"));
        }
        let confidence = number(required(m, "confidence", &path)?, &format!("{path}.confidence"))?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(schema(format!("{path}.confidence"), "must lie in [0, 1]"));
        }
        let light_state = match m.get("light_state") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) if s == "red" => Some(LightColor::Red),
            Some(Value::String(s)) if s == "green" => Some(LightColor::Green),
            Some(_) => return Err(schema(format!("{path}.light_state"), "expected \"red\" or \"green\"")),
        };
        if light_state.is_some() && class != BoxClass::TrafficLight {
            return Err(schema(format!("{path}.light_state"), "only traffic lights carry a state"));
        }
        let sign_kind = match m.get("sign_kind") {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(
                s.parse::<TrafficSignKind>()
                    .map_err(|e| schema(format!("{path}.sign_kind"), e.to_string()))?,
            ),
            Some(_) => return Err(schema(format!("{path}.sign_kind"), "expected a string")),
        };
        if sign_kind.is_some() && class != BoxClass::TrafficSign {
            return Err(schema(format!("{path}.sign_kind"), "only traffic signs carry a kind"));
        }
        boxes.push(Detection {
            class,
            bbox,
            confidence,
            light_state,
            sign_kind,
        });
    }

    let lanes_v = required(root, "lane_boundaries", "$")?
        .as_array()
        .ok_or_else(|| schema("$.lane_boundaries", "expected an array"))?;
    let mut lane_boundaries = Vec::with_capacity(lanes_v.len());
    for (i, line) in lanes_v.iter().enumerate() {
        let path = format!("$.lane_boundaries[{i}]");
        let pts = line
            .as_array()
            .ok_or_else(|| schema(&path, "expected an array of [x, y] points"))?;
        if pts.len() < 2 {
            return Err(schema(&path, "a lane boundary needs at least 2 points"));
        }
        let mut poly: Polyline = Vec::with_capacity(pts.len());
        for (k, p) in pts.iter().enumerate() {
            let ppath = format!("{path}[{k}]");
            let xy = p
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| schema(&ppath, "expected [x, y]"))?;
            let x = number(&xy[0], &format!("{ppath}[0]"))?;
            let y = number(&xy[1], &format!("{ppath}[1]"))?;
            if !in_x(x) || !in_y(y) {
                return Err(schema(&ppath, "point outside the image"));
            }
            if let Some(&(_, prev_y)) = poly.last() {
                if y <= prev_y {
                    return Err(schema(&ppath, "points must be strictly increasing in y"));
                }
            }
            poly.push((x, y));
        }
        lane_boundaries.push(poly);
    }

    Ok(DetectionSet {
        image_size: ImageSize { width, height },
        boxes,
        lane_boundaries,
    })
}

/// Parses detections JSON text, then drops boxes under `confidence_floor`.
pub fn parse_detections(text: &str, confidence_floor: f64) -> Result<DetectionSet, DetectionError> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    let mut ds = detections_from_value(&v)?;
    ds.boxes.retain(|b| b.confidence >= confidence_floor);
    Ok(ds)
}

pub fn load_detections(path: &Path, confidence_floor: f64) -> Result<DetectionSet, DetectionError> {
    let text = std::fs::read_to_string(path).map_err(|source| DetectionError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_detections(&text, confidence_floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn base() -> Value {
        json!({
            "image_size": {"width": 1000, "height": 800},
            "boxes": [
                {"class": "car", "bbox": [450, 600, 550, 700], "confidence": 0.9},
                {"class": "car", "bbox": [250, 500, 350, 560], "confidence": 0.8},
                {"class": "car", "bbox": [650, 500, 750, 560], "confidence": 0.1},
                {"class": "traffic_light", "bbox": [480, 10, 500, 60], "confidence": 0.7, "light_state": "red"}
            ],
            "lane_boundaries": [
                [[200, 0], [200, 800]], [[400, 0], [400, 800]],
                [[600, 0], [600, 800]], [[800, 0], [800, 800]]
            ]
        })
    }

    #[test]
    fn loads_fixture_and_drops_low_confidence() {
        let ds = parse_detections(&base().to_string(), DEFAULT_CONFIDENCE_FLOOR).unwrap();
        assert_eq!(ds.actor_boxes().count(), 2);
        assert_eq!(ds.lane_count_candidate(), Some(3));
        let all = parse_detections(&base().to_string(), 0.0).unwrap();
        assert_eq!(all.actor_boxes().count(), 3);
    }

    #[test]
    fn single_point_polyline_is_schema_error() {
        let mut v = base();
        v["lane_boundaries"][1] = json!([[400, 0]]);
        let err = parse_detections(&v.to_string(), 0.25).unwrap_err();
        match err {
            DetectionError::Schema { path, .. } => assert_eq!(path, "$.lane_boundaries[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn schema_errors_carry_json_paths() {
        let cases = [
            ("/boxes/0/bbox", json!([10, 10, 5, 20]), "$.boxes[0].bbox"),
            ("/boxes/1/class", json!("spaceship"), "$.boxes[1].class"),
            ("/boxes/0/confidence", json!(1.5), "$.boxes[0].confidence"),
            ("/boxes/0/bbox", json!([0, 0, 1200, 10]), "$.boxes[0].bbox"),
        ];
        for (ptr, value, expected) in cases {
            let mut v = base();
            *v.pointer_mut(ptr).unwrap() = value;
            match parse_detections(&v.to_string(), 0.25).unwrap_err() {
                DetectionError::Schema { path, .. } => assert_eq!(path, expected),
                other => panic!("{other:?}"),
            }
        }
        let mut v = base();
        v["lane_boundaries"][0] = json!([[200, 500], [210, 100]]);
        assert!(parse_detections(&v.to_string(), 0.25).is_err());
        let mut v = base();
        v.as_object_mut().unwrap().remove("boxes");
        match parse_detections(&v.to_string(), 0.25).unwrap_err() {
            DetectionError::Schema { path, .. } => assert_eq!(path, "$.boxes"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialization_round_trips() {
        let ds = parse_detections(&base().to_string(), 0.0).unwrap();
        let again = parse_detections(&ds.to_json(), 0.0).unwrap();
        assert_eq!(ds, again);
    }

    #[test]
    fn iou_basics() {
        let a = BBox::from([0.0, 0.0, 10.0, 10.0]);
        assert_eq!(a.iou(&a), 1.0);
        assert_eq!(a.iou(&BBox::from([20.0, 20.0, 30.0, 30.0])), 0.0);
        assert!((a.iou(&BBox::from([5.0, 0.0, 15.0, 10.0])) - 1.0 / 3.0).abs() < 1e-12);
    }
}
