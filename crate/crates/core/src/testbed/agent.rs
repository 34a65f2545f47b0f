use crate::codegen::Phase;

/// What the ego policy sees at the start of a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgoView {
    pub speed_mps: f64,
    pub cruise_mps: f64,
    /// Bumper-to-bumper distance to the nearest actor ahead in any lane the
    /// ego occupies. Negative when they already overlap.
    pub leader_gap_m: Option<f64>,
    pub leader_speed_mps: Option<f64>,
    pub light: Option<Phase>,
    /// Distance from the ego front bumper to a stop line not yet crossed.
    pub stop_line_m: Option<f64>,
    pub dt_s: f64,
}

impl EgoView {
    /// A view with free road at the given speed.
    pub fn cruising(speed_mps: f64) -> EgoView {
        EgoView {
            speed_mps,
            cruise_mps: speed_mps,
            leader_gap_m: None,
            leader_speed_mps: None,
            light: None,
            stop_line_m: None,
            dt_s: 0.1,
        }
    }
}

/// An ego driving policy: longitudinal acceleration in m/s² per step.
pub trait EgoPolicy: Sync {
    fn name(&self) -> &'static str;
    fn acceleration(&self, view: &EgoView) -> f64;
}

/// Keeps the initial speed whatever happens.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoOpAgent;

impl EgoPolicy for NoOpAgent {
    fn name(&self) -> &'static str {
        "noop"
    }

    fn acceleration(&self, _view: &EgoView) -> f64 {
        0.0
    }
}

/// Car-following with a time headway, stopping for red lights and holding
/// the cruise speed otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaiveAgent {
    pub headway_s: f64,
    pub brake_mps2: f64,
    pub accel_mps2: f64,
    /// Standstill distance kept to a leader.
    pub min_gap_m: f64,
    /// Extra distance before the stop line at which braking starts.
    pub stop_margin_m: f64,
}

impl Default for NaiveAgent {
    fn default() -> Self {
        NaiveAgent {
            headway_s: 2.0,
            brake_mps2: 3.0,
            accel_mps2: 2.0,
            min_gap_m: 2.0,
            stop_margin_m: 5.0,
        }
    }
}

impl EgoPolicy for NaiveAgent {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn acceleration(&self, view: &EgoView) -> f64 {
        let v = view.speed_mps;
        if view.light == Some(Phase::Red) {
            if let Some(d) = view.stop_line_m {
                let reach = v * v / (2.0 * self.brake_mps2) + self.stop_margin_m;
                if d <= reach {
                    return -self.brake_mps2;
                }
            }
        }
        if let Some(gap) = view.leader_gap_m {
            if gap < self.headway_s * v || gap < self.min_gap_m {
                return -self.brake_mps2;
            }
        }
        let to_cruise = (view.cruise_mps - v) / view.dt_s;
        if v < view.cruise_mps {
            self.accel_mps2.min(to_cruise)
        } else if v > view.cruise_mps {
            (-self.brake_mps2).max(to_cruise)
        } else {
            0.0
        }
    }
}

/// The naive policy with its default constants.
pub fn naive_agent(view: &EgoView) -> f64 {
    NaiveAgent::default().acceleration(view)
}
