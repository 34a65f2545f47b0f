use std::fmt::Write as _;
use std::str::FromStr;

use crate::ir::{ActorKind, TimeOfDay, WeatherKind};

use super::minisim::to_minisim;
use super::placement::{ConcreteScenario, PlacedActor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Carla,
    Lgsvl,
    Minisim,
}

impl Target {
    pub const ALL: [Target; 3] = [Target::Carla, Target::Lgsvl, Target::Minisim];

    pub fn as_str(self) -> &'static str {
        match self {
            Target::Carla => "carla",
            Target::Lgsvl => "lgsvl",
            Target::Minisim => "minisim",
        }
    }

    /// Output file suffix, appended to the scenario name.
    pub fn file_suffix(self) -> &'static str {
        match self {
            Target::Carla => ".carla.py.txt",
            Target::Lgsvl => ".lgsvl.py.txt",
            Target::Minisim => ".minisim.json",
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Target::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown target `{s}` (expected carla, lgsvl or minisim)"))
    }
}

pub fn emit_script(cs: &ConcreteScenario, target: Target) -> String {
    match target {
        Target::Carla => carla(cs),
        Target::Lgsvl => lgsvl(cs),
        Target::Minisim => to_minisim(cs).to_json(),
    }
}

/// Weather parameters shared by both simulator templates:
/// (cloudiness, precipitation, deposits, wetness, fog), each 0..100.
fn weather_levels(w: WeatherKind) -> (u32, u32, u32, u32, u32) {
    match w {
        WeatherKind::Sunny => (10, 0, 0, 0, 0),
        WeatherKind::Clear => (0, 0, 0, 0, 0),
        WeatherKind::Cloudy => (80, 0, 0, 0, 0),
        WeatherKind::Rainy => (90, 80, 60, 80, 10),
        WeatherKind::Wet => (40, 0, 50, 90, 0),
        WeatherKind::Foggy => (60, 0, 0, 20, 70),
        WeatherKind::Snowy => (90, 50, 80, 60, 30),
    }
}

fn carla_blueprint(kind: ActorKind) -> &'static str {
    match kind {
        ActorKind::Car => "vehicle.tesla.model3",
        ActorKind::Truck => "vehicle.carlamotors.european_hgv",
        ActorKind::Bus => "vehicle.mitsubishi.fusorosa",
        ActorKind::Train => "vehicle.carlamotors.european_hgv",
        ActorKind::Motorcycle => "vehicle.yamaha.yzf",
        ActorKind::Bicycle => "vehicle.diamondback.century",
        ActorKind::Pedestrian => "walker.pedestrian.0001",
    }
}

fn lgsvl_agent(kind: ActorKind) -> (&'static str, &'static str) {
    match kind {
        ActorKind::Car => ("Sedan", "NPC"),
        ActorKind::Truck => ("BoxTruck", "NPC"),
        ActorKind::Bus => ("SchoolBus", "NPC"),
        ActorKind::Train => ("BoxTruck", "NPC"),
        ActorKind::Motorcycle => ("Hatchback", "NPC"),
        ActorKind::Bicycle => ("Hatchback", "NPC"),
        ActorKind::Pedestrian => ("Bob", "PEDESTRIAN"),
    }
}

fn waypoint_ref(a: &PlacedActor) -> (String, String) {
    (
        format!("\"{}\"->{}", a.start.lane_id, a.start.index),
        format!("\"{}\"->{}", a.target.lane_id, a.target.index),
    )
}

fn carla(cs: &ConcreteScenario) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "# {}", cs.road_header());
    for line in [
        "import carla",
        "",
        "client = carla.Client(\"localhost\", 2000)",
        "client.set_timeout(10.0)",
        "world = client.get_world()",
        "library = world.get_blueprint_library()",
        "",
        "def lane_waypoint(lane_id, index, spacing):",
        "    \"\"\"Resolves a symbolic section lane and waypoint index on the loaded map.\"\"\"",
        "    start = SECTION_LANES[lane_id]",
        "    return start.next(index * spacing)[0] if index > 0 else start",
        "",
    ] {
        o.push_str(line);
        o.push('\n');
    }
    let _ = writeln!(o, "SECTION = \"{}\"", cs.section.id);
    o.push_str("SECTION_LANES = {}  # lane_id -> carla.Waypoint at the lane start, bound per map\n\n");

    let (cloud, rain, deposits, wet, fog) = weather_levels(cs.weather);
    let [cloud, rain, deposits, wet, fog] = [cloud, rain, deposits, wet, fog].map(f64::from);
    let sun = match cs.time {
        TimeOfDay::Daytime => 60.0,
        TimeOfDay::Nighttime => -30.0,
    };
    let _ = writeln!(o, "# environment: weather {}, time {}", cs.weather, cs.time);
    let _ = writeln!(
        o,
        "weather = carla.WeatherParameters(cloudiness={cloud:.1}, precipitation={rain:.1}, precipitation_deposits={deposits:.1}, wetness={wet:.1}, fog_density={fog:.1}, sun_altitude_angle={sun:.1})"
    );
    o.push_str("world.set_weather(weather)\n");

    for a in cs.actors() {
        let (start, target) = waypoint_ref(a);
        let spacing = cs.section.lanes[a.start.lane.unwrap_or(0) as usize].waypoint_spacing_m;
        let _ = writeln!(
            o,
            "\n# actor: {} ({}), start {start}, target {target}, behavior {}",
            a.name, a.actor_type, a.behavior
        );
        let _ = writeln!(o, "{}_bp = library.find(\"{}\")", a.name, carla_blueprint(a.actor_type));
        if a.is_ego {
            let _ = writeln!(o, "{}_bp.set_attribute(\"role_name\", \"hero\")", a.name);
        }
        let _ = writeln!(
            o,
            "{n}_transform = lane_waypoint(\"{lane}\", {idx}, {spacing:.1}).transform",
            n = a.name,
            lane = a.start.lane_id,
            idx = a.start.index
        );
        let _ = writeln!(o, "{n} = world.spawn_actor({n}_bp, {n}_transform)", n = a.name);
        if a.actor_type == ActorKind::Pedestrian {
            let _ = writeln!(
                o,
                "{n}.apply_control(carla.WalkerControl(direction={n}_transform.get_forward_vector(), speed={v:.4}))",
                n = a.name,
                v = a.speed_mps
            );
        } else {
            let _ = writeln!(
                o,
                "{n}.enable_constant_velocity(carla.Vector3D(x={v:.4}, y=0.0, z=0.0))",
                n = a.name,
                v = a.speed_mps
            );
        }
    }
    o.push_str("\nworld.tick()\n");
    o
}

fn lgsvl(cs: &ConcreteScenario) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "# {}", cs.road_header());
    o.push_str(
        "import lgsvl\n\n\
sim = lgsvl.Simulator(\"127.0.0.1\", 8181)\n",
    );
    let _ = writeln!(
        o,
        "if sim.current_scene == \"{id}\":\n    sim.reset()\nelse:\n    sim.load(\"{id}\")\n",
        id = cs.section.id
    );
    for line in [
        "def lane_transform(lane_id, index):",
        "    \"\"\"Resolves a symbolic section lane and waypoint index on the loaded map.\"\"\"",
        "    return SECTION_LANES[lane_id][index]",
        "",
        "SECTION_LANES = {}  # lane_id -> list of lgsvl.Transform, bound per map",
        "",
    ] {
        o.push_str(line);
        o.push('\n');
    }
    let (cloud, rain, _, wet, fog) = weather_levels(cs.weather);
    let hour = match cs.time {
        TimeOfDay::Daytime => 12.0,
        TimeOfDay::Nighttime => 22.0,
    };
    let _ = writeln!(o, "# environment: weather {}, time {}", cs.weather, cs.time);
    let _ = writeln!(
        o,
        "sim.weather = lgsvl.WeatherState(rain={:.2}, fog={:.2}, wetness={:.2}, cloudiness={:.2}, damage=0.0)",
        f64::from(rain) / 100.0,
        f64::from(fog) / 100.0,
        f64::from(wet) / 100.0,
        f64::from(cloud) / 100.0
    );
    let _ = writeln!(o, "sim.set_time_of_day({hour:.1}, fixed=True)");

    for a in cs.actors() {
        let (start, target) = waypoint_ref(a);
        let _ = writeln!(
            o,
            "\n# actor: {} ({}), placed at {start}, target {target}, behavior {}",
            a.name, a.actor_type, a.behavior
        );
        let _ = writeln!(o, "{}_state = lgsvl.AgentState()", a.name);
        let _ = writeln!(
            o,
            "{n}_state.transform = lane_transform(\"{lane}\", {idx})",
            n = a.name,
            lane = a.start.lane_id,
            idx = a.start.index
        );
        let _ = writeln!(
            o,
            "{n}_state.velocity = lgsvl.utils.transform_to_forward({n}_state.transform) * {v:.4}",
            n = a.name,
            v = a.speed_mps
        );
        let (model, kind) = if a.is_ego {
            ("Lincoln2017MKZ", "EGO")
        } else {
            lgsvl_agent(a.actor_type)
        };
        let _ = writeln!(
            o,
            "{n} = sim.add_agent(\"{model}\", lgsvl.AgentType.{kind}, {n}_state)",
            n = a.name
        );
        if !a.is_ego {
            if a.actor_type == ActorKind::Pedestrian {
                let _ = writeln!(o, "{}.walk_randomly(False)", a.name);
            } else {
                let _ = writeln!(o, "{}.follow_closest_lane(True, {:.4})", a.name, a.speed_mps);
            }
        }
    }
    o.push_str("\nsim.run(30.0)\n");
    o
}
