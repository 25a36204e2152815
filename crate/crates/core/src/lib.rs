//! Future-cone reachability and guaranteed-intercept analysis for impulsive
//! spacecraft, plus the planar Two Cars pursuit game.
//!
//! Every numerical type is generic over the scalar (`f32` or `f64`); the
//! aliases below fix it to `f64`.

// `!(a < b)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cone;
pub mod kepler;
pub mod lambert;
pub mod maneuver;
pub mod real;
pub mod scenario_io;
pub mod twocars;
pub mod vec3;

#[cfg(test)]
pub(crate) mod testing;

pub use real::Real;

pub type Vector = vec3::Vec3<f64>;
pub type State = kepler::StateVector<f64>;
pub type Arc = kepler::BallisticArc<f64>;
pub type Mu = kepler::GravParam<f64>;
pub type Lambert = lambert::LambertSolution<f64>;
pub type Env = maneuver::Environment<f64>;
pub type Shock = maneuver::ShockEvent<f64>;
pub type Schedule = maneuver::ImpulsiveSchedule<f64>;
pub type Trajectory = maneuver::ImpulsiveTrajectory<f64>;
pub type Thrust = maneuver::ThrustProfile<f64>;
pub type Cone = cone::ConeSpec<f64>;
pub type Samples = cone::ConeSampleSet<f64>;
pub type Membership = cone::MembershipResult<f64>;
pub type Report = cone::ContainmentReport<f64>;
pub type Car = twocars::CarConfig<f64>;
pub type CarPose = twocars::CarState<f64>;
pub type Steering = twocars::SteeringLaw<f64>;
pub type Reachable = twocars::ReachableSet<f64>;
pub type Policy = twocars::ExplicitPolicy<f64>;
pub type Equivalence = twocars::EquivalenceVerdict<f64>;
