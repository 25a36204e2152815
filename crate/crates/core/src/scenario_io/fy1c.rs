//! The FengYun-1C engagement of January 2007, reconstructed approximately.
//!
//! The interceptor is a two-stage solid booster plus a kill vehicle. Its state
//! when it first climbs through 104 km comes from a drag-free gravity-turn
//! ascent out of Xichang on the published launch azimuth, with the pitch-over
//! angle solved so the crossing falls at 68 s. Stage masses are assumptions;
//! only the burn times, specific impulses and the 104 km criterion are
//! reported values. The target is an idealised circular 860 km, 98.8° orbit
//! phased to pass the interceptor's nominal position at the intercept epoch.

use crate::kepler::{self, GravParam, StateVector, EARTH_MU_KM3_S2};
use crate::maneuver::{rocket_delta_v, EARTH_RADIUS_KM, G0_M_S2};
use crate::vec3::Vec3;

use super::{ConeSection, Sampling, Scenario};

/// Inputs of the reconstruction. Masses in kg, times in s, angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Fy1cParameters {
    pub launch_lat_deg: f64,
    pub launch_lon_deg: f64,
    pub launch_azimuth_deg: f64,
    /// rad/s
    pub earth_rotation: f64,
    pub vertical_rise_s: f64,
    pub stage1_propellant: f64,
    pub stage1_dry: f64,
    pub stage1_burn_s: f64,
    pub stage1_isp_s: f64,
    pub stage2_propellant: f64,
    pub stage2_dry: f64,
    pub stage2_burn_s: f64,
    pub stage2_isp_s: f64,
    pub kill_vehicle_mass: f64,
    pub kill_vehicle_propellant: f64,
    pub kill_vehicle_isp_s: f64,
    pub vertex_altitude_km: f64,
    pub vertex_epoch_s: f64,
    pub interceptor_window_end_s: f64,
    pub target_altitude_km: f64,
    pub target_inclination_deg: f64,
    pub intercept_epoch_s: f64,
    pub target_window_s: [f64; 2],
    pub target_isp_s: f64,
    pub target_wet_mass: f64,
    pub target_dry_mass: f64,
}

impl Default for Fy1cParameters {
    fn default() -> Self {
        Self {
            launch_lat_deg: 28.13,
            launch_lon_deg: 102.02,
            launch_azimuth_deg: 345.73,
            earth_rotation: 7.292_115e-5,
            vertical_rise_s: 6.0,
            stage1_propellant: 9_000.0,
            stage1_dry: 800.0,
            stage1_burn_s: 36.0,
            stage1_isp_s: 225.0,
            stage2_propellant: 4_000.0,
            stage2_dry: 400.0,
            stage2_burn_s: 36.0,
            stage2_isp_s: 230.0,
            kill_vehicle_mass: 400.0,
            kill_vehicle_propellant: 100.0,
            kill_vehicle_isp_s: 230.0,
            vertex_altitude_km: 104.0,
            vertex_epoch_s: 68.0,
            interceptor_window_end_s: 750.0,
            target_altitude_km: 860.0,
            target_inclination_deg: 98.8,
            intercept_epoch_s: 450.0,
            target_window_s: [425.0, 475.0],
            target_isp_s: 76.0,
            target_wet_mass: 892.0,
            target_dry_mass: 880.0,
        }
    }
}

const ASCENT_STEP_S: f64 = 0.01;

impl Fy1cParameters {
    fn liftoff_mass(&self) -> f64 {
        self.stage1_propellant + self.stage1_dry + self.stage2_propellant + self.stage2_dry + self.kill_vehicle_mass
    }

    /// Vehicle mass (kg) and thrust (kN) at `t`; the spent first stage is
    /// dropped at its burnout.
    fn mass_thrust(&self, t: f64) -> (f64, f64) {
        let g0 = G0_M_S2 / 1000.0;
        let b1 = self.stage1_burn_s;
        let b2 = b1 + self.stage2_burn_s;
        let upper = self.stage2_propellant + self.stage2_dry + self.kill_vehicle_mass;
        if t < b1 {
            let mdot = self.stage1_propellant / b1;
            (self.liftoff_mass() - mdot * t, mdot * self.stage1_isp_s * g0)
        } else if t < b2 {
            let mdot = self.stage2_propellant / self.stage2_burn_s;
            (upper - mdot * (t - b1), mdot * self.stage2_isp_s * g0)
        } else {
            (self.stage2_dry + self.kill_vehicle_mass, 0.0)
        }
    }

    fn launch_site(&self) -> (Vec3<f64>, Vec3<f64>, Vec3<f64>) {
        let (lat, lon) = (self.launch_lat_deg.to_radians(), self.launch_lon_deg.to_radians());
        let up = Vec3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin());
        let east = Vec3::new(-lon.sin(), lon.cos(), 0.0);
        let north = up.cross(&east);
        let az = self.launch_azimuth_deg.to_radians();
        (up, east, north * az.cos() + east * az.sin())
    }

    fn spin(&self) -> Vec3<f64> {
        Vec3::new(0.0, 0.0, self.earth_rotation)
    }

    /// Inertial state at `t_stop` after a vertical rise and a pitch-over of
    /// `kick` radians toward the launch azimuth, thrusting along the
    /// Earth-relative velocity thereafter.
    pub fn ascent_state(&self, kick: f64, t_stop: f64) -> StateVector<f64> {
        let (up, _, downrange) = self.launch_site();
        let omega = self.spin();
        let mut r = up * EARTH_RADIUS_KM;
        let mut v = omega.cross(&r);
        let accel = |t: f64, r: Vec3<f64>, v: Vec3<f64>| {
            let rn = r.norm();
            let gravity = r * (-EARTH_MU_KM3_S2 / (rn * rn * rn));
            let (m, f) = self.mass_thrust(t);
            let dir = if t < self.vertical_rise_s {
                r / rn
            } else {
                (v - omega.cross(&r)).normalize().unwrap_or(r / rn)
            };
            gravity + dir * (f / m)
        };
        let steps = (t_stop / ASCENT_STEP_S).round() as usize;
        let h = t_stop / steps as f64;
        for i in 0..steps {
            let t = i as f64 * h;
            if (t - self.vertical_rise_s).abs() < h / 2.0 {
                // pitch-over: tilt the Earth-relative velocity toward downrange
                let ground = omega.cross(&r);
                let rel = v - ground;
                let vertical = r / r.norm();
                v = ground + (vertical * kick.cos() + downrange * kick.sin()) * rel.norm();
            }
            let (k1r, k1v) = (v, accel(t, r, v));
            let (k2r, k2v) = (v + k1v * (h / 2.0), accel(t + h / 2.0, r + k1r * (h / 2.0), v + k1v * (h / 2.0)));
            let (k3r, k3v) = (v + k2v * (h / 2.0), accel(t + h / 2.0, r + k2r * (h / 2.0), v + k2v * (h / 2.0)));
            let (k4r, k4v) = (v + k3v * h, accel(t + h, r + k3r * h, v + k3v * h));
            r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
            v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        }
        StateVector { r, v, t: t_stop }
    }

    /// Pitch-over angle placing the vehicle at the vertex altitude at the
    /// vertex epoch.
    pub fn solve_kick(&self) -> f64 {
        let altitude = |kick: f64| self.ascent_state(kick, self.vertex_epoch_s).r.norm() - EARTH_RADIUS_KM;
        let (mut lo, mut hi) = (0.0f64, 80f64.to_radians());
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if altitude(mid) > self.vertex_altitude_km {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Δv left in the second stage at the vertex epoch plus the kill
    /// vehicle's own, km/s.
    pub fn interceptor_budget(&self) -> f64 {
        let (m, _) = self.mass_thrust(self.vertex_epoch_s);
        let burnout = self.stage2_dry + self.kill_vehicle_mass;
        let stage2 = rocket_delta_v(self.stage2_isp_s, m, burnout).expect("vertex precedes second-stage burnout");
        let kv = rocket_delta_v(
            self.kill_vehicle_isp_s,
            self.kill_vehicle_mass,
            self.kill_vehicle_mass - self.kill_vehicle_propellant,
        )
        .expect("kill vehicle masses are ordered");
        stage2 + kv
    }

    pub fn target_budget(&self) -> f64 {
        rocket_delta_v(self.target_isp_s, self.target_wet_mass, self.target_dry_mass).expect("target masses are ordered")
    }
}

fn reverse(s: &StateVector<f64>) -> StateVector<f64> {
    StateVector { r: s.r, v: -s.v, t: -s.t }
}

/// Fraction of the interceptor budget, burned along the velocity at the
/// vertex, that carries it through the target altitude at the intercept epoch.
fn nominal_burn_fraction(p: &Fy1cParameters, vertex: &StateVector<f64>, budget: f64) -> f64 {
    let mu = GravParam::earth();
    let dir = vertex.v / vertex.v.norm();
    let altitude = |k: f64| {
        let s = vertex.with_velocity(vertex.v + dir * (k * budget));
        kepler::propagate_time(&s, p.intercept_epoch_s - vertex.t, mu)
            .map(|e| e.r.norm() - EARTH_RADIUS_KM)
            .unwrap_or(f64::INFINITY)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if altitude(mid) < p.target_altitude_km {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Interceptor vertex, interceptor budget, target state at launch and target
/// budget.
pub fn fy1c_states(p: &Fy1cParameters) -> (StateVector<f64>, f64, StateVector<f64>, f64) {
    let mu = GravParam::earth();
    let vertex = p.ascent_state(p.solve_kick(), p.vertex_epoch_s);
    let budget = p.interceptor_budget();

    let k = nominal_burn_fraction(p, &vertex, budget);
    let nominal = vertex.with_velocity(vertex.v + vertex.v * (k * budget / vertex.v.norm()));
    let meet = kepler::propagate_time(&nominal, p.intercept_epoch_s - vertex.t, mu).expect("nominal arc is bound");

    // circular orbit through the meeting point with the target inclination
    let radius = EARTH_RADIUS_KM + p.target_altitude_km;
    let pos = meet.r * (radius / meet.r.norm());
    let rhat = pos / radius;
    let z = Vec3::new(0.0, 0.0, 1.0);
    let e1 = (z - rhat * rhat.dot(&z)).normalize().expect("meeting point is off the pole");
    let e2 = rhat.cross(&e1);
    let alpha = p.target_inclination_deg.to_radians().cos() / e1.dot(&z);
    let normal = e1 * alpha + e2 * (1.0 - alpha * alpha).sqrt();
    let speed = (EARTH_MU_KM3_S2 / radius).sqrt();
    let at_meet = StateVector { r: pos, v: normal.cross(&rhat) * speed, t: p.intercept_epoch_s };
    let at_launch = reverse(&kepler::propagate_time(&reverse(&at_meet), p.intercept_epoch_s, mu).expect("circular"));
    (vertex, budget, StateVector { t: 0.0, ..at_launch }, p.target_budget())
}

/// The bundled FY-1C engagement.
pub fn fy1c_scenario() -> Scenario {
    let p = Fy1cParameters::default();
    let (vertex, budget, target, target_budget) = fy1c_states(&p);
    Scenario {
        name: "fy1c".into(),
        mu_km3_s2: EARTH_MU_KM3_S2,
        body_radius_km: EARTH_RADIUS_KM,
        floor_km: crate::maneuver::DEFAULT_FLOOR_KM,
        approximate: true,
        interceptor: Some(ConeSection::new(vertex, budget, [p.vertex_epoch_s, p.interceptor_window_end_s])),
        target: Some(ConeSection::new(target, target_budget, p.target_window_s)),
        sampling: Sampling { n_samples: 2000, time_grid: 51, seed: 2007 },
        propagation: None,
        twocars: None,
    }
}
