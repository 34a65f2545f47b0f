//! Closed vocabularies of the scenario DSL.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Error returned when a word is not part of a closed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("`{word}` is not a valid {vocabulary}")]
pub struct UnknownWord {
    pub vocabulary: &'static str,
    pub word: String,
}

macro_rules! vocabulary {
    (
        $(#[$meta:meta])*
        $name:ident, $label:literal {
            $( $variant:ident => $word:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $( $variant ),+
        }

        impl $name {
            /// Every member, in declaration order.
            pub const ALL: &'static [$name] = &[ $( $name::$variant ),+ ];

            pub fn as_str(self) -> &'static str {
                match self {
                    $( $name::$variant => $word ),+
                }
            }
        }

        impl FromStr for $name {
            type Err = UnknownWord;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $( $word => Ok($name::$variant), )+
                    other => Err(UnknownWord { vocabulary: $label, word: other.to_string() }),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let word = String::deserialize(deserializer)?;
                word.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

vocabulary! {
    WeatherKind, "weather" {
        Rainy => "rainy",
        Foggy => "foggy",
        Snowy => "snowy",
        Wet => "wet",
        Sunny => "sunny",
        Clear => "clear",
        Cloudy => "cloudy",
    }
}

vocabulary! {
    TimeOfDay, "time of day" {
        Daytime => "daytime",
        Nighttime => "nighttime",
    }
}

vocabulary! {
    RoadType, "road type" {
        Intersection => "intersection",
        Roundabout => "roundabout",
        Straight => "straight",
        Highway => "highway",
    }
}

vocabulary! {
    TrafficSignKind, "traffic sign" {
        StopSign => "stop_sign",
        SpeedLimitSign => "speed_limit_sign",
        YieldSign => "yield_sign",
    }
}

vocabulary! {
    /// `Absent` is the explicit "no traffic light" statement; it differs
    /// from an unspecified light.
    LightState, "traffic light state" {
        RedLight => "red_light",
        GreenLight => "green_light",
        Absent => "absent",
    }
}

vocabulary! {
    BehaviorKind, "behavior" {
        GoForward => "go_forward",
        TurnLeft => "turn_left",
        TurnRight => "turn_right",
        ChangeLaneLeft => "change_lane_left",
        ChangeLaneRight => "change_lane_right",
        Static => "static",
    }
}

vocabulary! {
    ActorKind, "actor type" {
        Car => "car",
        Truck => "truck",
        Bus => "bus",
        Train => "train",
        Motorcycle => "motorcycle",
        Bicycle => "bicycle",
        Pedestrian => "pedestrian",
    }
}

vocabulary! {
    /// Ordered by canonical rank: front < front_left < front_right < left
    /// < right < on < behind.
    RelativePosition, "relative position" {
        Front => "front",
        FrontLeft => "front_left",
        FrontRight => "front_right",
        Left => "left",
        Right => "right",
        On => "on",
        Behind => "behind",
    }
}

impl ActorKind {
    pub fn is_vehicle(self) -> bool {
        !matches!(self, ActorKind::Pedestrian)
    }

    /// Vehicle kinds only.
    pub const VEHICLES: &'static [ActorKind] = &[
        ActorKind::Car,
        ActorKind::Truck,
        ActorKind::Bus,
        ActorKind::Train,
        ActorKind::Motorcycle,
        ActorKind::Bicycle,
    ];
}

impl RelativePosition {
    pub fn rank(self) -> u8 {
        self as u8
    }
}

/// What a [`Position`](super::Position) is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReferencePoint {
    EgoVehicle,
    Road(RoadType),
    Sign(TrafficSignKind),
}

impl ReferencePoint {
    pub fn all() -> Vec<ReferencePoint> {
        let mut out = vec![ReferencePoint::EgoVehicle];
        out.extend(RoadType::ALL.iter().map(|r| ReferencePoint::Road(*r)));
        out.extend(TrafficSignKind::ALL.iter().map(|s| ReferencePoint::Sign(*s)));
        out
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ReferencePoint::EgoVehicle => "ego_vehicle",
            ReferencePoint::Road(r) => r.as_str(),
            ReferencePoint::Sign(s) => s.as_str(),
        }
    }
}

impl FromStr for ReferencePoint {
    type Err = UnknownWord;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "ego_vehicle" {
            return Ok(ReferencePoint::EgoVehicle);
        }
        if let Ok(r) = s.parse::<RoadType>() {
            return Ok(ReferencePoint::Road(r));
        }
        if let Ok(t) = s.parse::<TrafficSignKind>() {
            return Ok(ReferencePoint::Sign(t));
        }
        Err(UnknownWord {
            vocabulary: "reference point",
            word: s.to_string(),
        })
    }
}

impl fmt::Display for ReferencePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ReferencePoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for ReferencePoint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let word = String::deserialize(deserializer)?;
        word.parse().map_err(serde::de::Error::custom)
    }
}
