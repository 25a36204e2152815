//! Future cones of impulsive vehicles.
//!
//! A cone is the set of positions a vehicle can occupy over a time window
//! given a vertex state and a total Δv budget. Any multi-shock trajectory ends
//! on a point a single burn at the vertex also reaches, so cones are sampled
//! with single burns and membership is decided by Lambert targeting from the
//! vertex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::UnitBall;
use rayon::prelude::*;
use thiserror::Error;

use crate::kepler::{self, BallisticArc, KeplerError, StateVector};
use crate::lambert::{self, LambertError, LambertSolution, DEFAULT_MAX_REVS};
use crate::maneuver::{Environment, ImpulsiveTrajectory, ManeuverError};
use crate::real::Real;
use crate::vec3::Vec3;

/// Position-only intercept tolerance, km.
pub const DEFAULT_MISS_DISTANCE_KM: f64 = 1e-3;

/// Leaf times per window when none is specified.
pub const DEFAULT_TIME_GRID: usize = 51;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("invalid cone: {0}")]
    InvalidSpec(&'static str),
    #[error("no sampled trajectory is bound and above the floor")]
    EmptyCone,
    #[error("t = {t} s outside [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },
    #[error("cone windows do not overlap")]
    EmptyOverlap,
    #[error("no bound single-burn arc reaches the endpoint within the revolution cap")]
    NoBoundArc,
    #[error("targeting ({x}, {y}, {z}) km at t = {t} s: {source}")]
    Targeting {
        t: f64,
        x: f64,
        y: f64,
        z: f64,
        #[source]
        source: LambertError,
    },
    #[error(transparent)]
    Lambert(#[from] LambertError),
    #[error(transparent)]
    Maneuver(#[from] ManeuverError),
    #[error(transparent)]
    Kepler(#[from] KeplerError),
}

pub type ConeResult<T> = Result<T, ConeError>;

/// Vertex state, Δv budget and time window of a future cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpec<T> {
    pub vertex: StateVector<T>,
    /// km/s
    pub budget: T,
    /// (t1, t2) s, with `vertex.t ≤ t1 < t2`.
    pub window: (T, T),
    pub env: Environment<T>,
    pub max_revs: u32,
    /// km
    pub miss_distance: T,
}

impl<T: Real> ConeSpec<T> {
    pub fn new(vertex: StateVector<T>, budget: T, window: (T, T), env: Environment<T>) -> ConeResult<Self> {
        let spec = Self {
            vertex,
            budget,
            window,
            env,
            max_revs: DEFAULT_MAX_REVS,
            miss_distance: T::lit(DEFAULT_MISS_DISTANCE_KM),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> ConeResult<()> {
        self.vertex.validate()?;
        if !(self.budget.is_finite() && self.budget >= T::zero()) {
            return Err(ConeError::InvalidSpec("budget must be finite and non-negative"));
        }
        let (t1, t2) = self.window;
        if !(t1.is_finite() && t2.is_finite() && self.vertex.t <= t1 && t1 < t2) {
            return Err(ConeError::InvalidSpec("window must satisfy vertex epoch <= t1 < t2"));
        }
        if self.vertex.r.norm() < self.env.floor_radius() {
            return Err(ConeError::InvalidSpec("vertex lies below the altitude floor"));
        }
        if !(self.miss_distance > T::zero()) {
            return Err(ConeError::InvalidSpec("miss distance must be positive"));
        }
        Ok(())
    }

    pub fn with_budget(mut self, budget: T) -> Self {
        self.budget = budget;
        self
    }

    fn check_time(&self, t: T) -> ConeResult<()> {
        if t >= self.vertex.t && t <= self.window.1 {
            Ok(())
        } else {
            Err(ConeError::OutsideWindow { t: t.as_f64(), start: self.vertex.t.as_f64(), end: self.window.1.as_f64() })
        }
    }
}

/// `n` times evenly spaced over `[a, b]`, endpoints included.
pub fn uniform_grid<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = T::lit((n - 1) as f64);
            (0..n)
                .map(|i| if i + 1 == n { b } else { a + (b - a) * T::lit(i as f64) / last })
                .collect()
        }
    }
}

/// One single-burn trajectory of a sampled cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeTrajectory<T> {
    pub dv: Vec3<T>,
    pub arc: BallisticArc<T>,
}

impl<T: Real> ConeTrajectory<T> {
    /// Position at `t`, or `None` once the arc has dipped below the floor.
    pub fn position_at(&self, t: T, env: &Environment<T>) -> ConeResult<Option<Vec3<T>>> {
        let t0 = self.arc.epoch_state.t;
        if self.arc.min_radius_between(t0, t)? < env.floor_radius() {
            return Ok(None);
        }
        Ok(Some(kepler::propagate_arc(&self.arc, t - t0)?.r))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSampleSet<T> {
    pub spec: ConeSpec<T>,
    pub trajectories: Vec<ConeTrajectory<T>>,
    pub seed: u64,
    pub leaf_times: Vec<T>,
    /// Burns drawn before unbound ones were discarded.
    pub drawn: usize,
}

/// A leaf point tagged with the trajectory it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeafPoint<T> {
    pub trajectory: usize,
    pub t: T,
    pub r: Vec3<T>,
}

/// Draws `n` burns uniformly from the ball of radius `spec.budget`, applies
/// each at the vertex and keeps the bound ones. Leaves are recorded on a
/// `grid`-point uniform time grid over the window.
pub fn sample_cone<T: Real>(spec: &ConeSpec<T>, n: usize, grid: usize, seed: u64) -> ConeResult<ConeSampleSet<T>> {
    spec.validate()?;
    if n == 0 {
        return Err(ConeError::InvalidSpec("sample count must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trajectories = Vec::with_capacity(n);
    for _ in 0..n {
        let [x, y, z]: [f64; 3] = rng.sample(UnitBall);
        let dv = Vec3::new(T::lit(x), T::lit(y), T::lit(z)) * spec.budget;
        let start = spec.vertex.with_velocity(spec.vertex.v + dv);
        let arc = match kepler::arc_from_state(&start, spec.env.mu) {
            Ok(arc) => arc,
            Err(KeplerError::EccentricityOutOfRange(_)) => continue,
            Err(e) => return Err(e.into()),
        };
        let traj = ConeTrajectory { dv, arc };
        if traj.position_at(spec.window.0, &spec.env)?.is_some() {
            trajectories.push(traj);
        }
    }
    if trajectories.is_empty() {
        return Err(ConeError::EmptyCone);
    }
    Ok(ConeSampleSet {
        spec: *spec,
        trajectories,
        seed,
        leaf_times: uniform_grid(spec.window.0, spec.window.1, grid),
        drawn: n,
    })
}

impl<T: Real> ConeSampleSet<T> {
    /// Positions of every surviving trajectory at `t`, by exact propagation.
    pub fn leaf(&self, t: T) -> ConeResult<Vec<LeafPoint<T>>> {
        self.spec.check_time(t)?;
        let mut out = Vec::with_capacity(self.trajectories.len());
        for (i, traj) in self.trajectories.iter().enumerate() {
            if let Some(r) = traj.position_at(t, &self.spec.env)? {
                out.push(LeafPoint { trajectory: i, t, r });
            }
        }
        Ok(out)
    }

    /// Every leaf on the recorded time grid, time-major.
    pub fn leaves(&self) -> ConeResult<Vec<LeafPoint<T>>> {
        let mut out = Vec::new();
        for &t in &self.leaf_times {
            out.extend(self.leaf(t)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipResult<T> {
    pub member: bool,
    /// Smallest vertex burn reaching the point on a floor-respecting arc,
    /// km/s; infinite when there is none.
    pub required_dv: T,
    /// `budget − required_dv` plus the velocity equivalent of the miss
    /// distance, `ε/(t − t0)`.
    pub margin: T,
    pub solutions_checked: usize,
    /// The arc achieving `required_dv`.
    pub witness: Option<LambertSolution<T>>,
}

impl<T: Real> MembershipResult<T> {
    fn unreachable(solutions_checked: usize) -> Self {
        Self {
            member: false,
            required_dv: T::infinity(),
            margin: T::neg_infinity(),
            solutions_checked,
            witness: None,
        }
    }
}

/// Decides whether `point` is in the cone's leaf at `t`.
pub fn membership<T: Real>(spec: &ConeSpec<T>, point: Vec3<T>, t: T) -> ConeResult<MembershipResult<T>> {
    spec.check_time(t)?;
    let t0 = spec.vertex.t;
    if t == t0 {
        let hit = (point - spec.vertex.r).norm() <= spec.miss_distance;
        return Ok(MembershipResult {
            member: hit,
            required_dv: if hit { T::zero() } else { T::infinity() },
            margin: if hit { spec.budget } else { T::neg_infinity() },
            solutions_checked: 0,
            witness: None,
        });
    }
    let dt = t - t0;
    let sols = lambert::solve_lambert(spec.vertex.r, point, dt, spec.env.mu, spec.max_revs).map_err(|source| {
        ConeError::Targeting { t: t.as_f64(), x: point.x.as_f64(), y: point.y.as_f64(), z: point.z.as_f64(), source }
    })?;
    let mut best: Option<(T, LambertSolution<T>)> = None;
    for sol in &sols {
        let start = spec.vertex.with_velocity(sol.v_depart);
        let arc = kepler::arc_from_state(&start, spec.env.mu)?;
        if arc.min_radius_between(t0, t)? < spec.env.floor_radius() {
            continue;
        }
        let need = (sol.v_depart - spec.vertex.v).norm();
        if best.as_ref().is_none_or(|(b, _)| need < *b) {
            best = Some((need, *sol));
        }
    }
    let Some((required_dv, witness)) = best else {
        return Ok(MembershipResult::unreachable(sols.len()));
    };
    let margin = spec.budget - required_dv + spec.miss_distance / dt;
    Ok(MembershipResult {
        member: margin >= T::zero(),
        required_dv,
        margin,
        solutions_checked: sols.len(),
        witness: Some(witness),
    })
}

/// Verdict for one target leaf point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointVerdict<T> {
    pub point: LeafPoint<T>,
    pub result: MembershipResult<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport<T> {
    pub contained: bool,
    pub fraction_contained: T,
    /// km/s
    pub worst_margin: T,
    /// (position km, time s) of the worst margin.
    pub worst_point: (Vec3<T>, T),
    /// Target trajectories drawn.
    pub samples: usize,
    /// Leaf points tested.
    pub points_tested: usize,
    pub time_grid: usize,
    pub seed: u64,
    pub window_tested: (T, T),
}

/// Tests every sampled target leaf point on the overlap of the two windows
/// for membership in the interceptor cone, in parallel.
pub fn evaluate_containment<T: Real>(
    interceptor: &ConeSpec<T>,
    target: &ConeSpec<T>,
    n_target_samples: usize,
    time_grid: usize,
    seed: u64,
) -> ConeResult<(ContainmentReport<T>, Vec<PointVerdict<T>>)> {
    interceptor.validate()?;
    target.validate()?;
    let start = interceptor.window.0.max(target.window.0);
    let end = interceptor.window.1.min(target.window.1);
    if !(start < end) {
        return Err(ConeError::EmptyOverlap);
    }
    let mut sample_spec = *target;
    sample_spec.window = (start, end);
    let set = sample_cone(&sample_spec, n_target_samples, time_grid, seed)?;

    let points = set.leaves()?;
    let verdicts = points
        .par_iter()
        .map(|p| membership(interceptor, p.r, p.t).map(|result| PointVerdict { point: *p, result }))
        .collect::<ConeResult<Vec<_>>>()?;

    let members = verdicts.iter().filter(|v| v.result.member).count();
    let worst = verdicts
        .iter()
        .min_by(|a, b| a.result.margin.partial_cmp(&b.result.margin).unwrap_or(std::cmp::Ordering::Equal));
    let total = verdicts.len();
    let report = ContainmentReport {
        contained: total > 0 && members == total,
        fraction_contained: if total == 0 { T::zero() } else { T::lit(members as f64) / T::lit(total as f64) },
        worst_margin: worst.map_or(T::neg_infinity(), |w| w.result.margin),
        worst_point: worst.map_or((Vec3::zeros(), start), |w| (w.point.r, w.point.t)),
        samples: n_target_samples,
        points_tested: total,
        time_grid,
        seed,
        window_tested: (start, end),
    };
    Ok((report, verdicts))
}

/// Containment verdict without the per-point detail.
pub fn containment<T: Real>(
    interceptor: &ConeSpec<T>,
    target: &ConeSpec<T>,
    n_target_samples: usize,
    time_grid: usize,
    seed: u64,
) -> ConeResult<ContainmentReport<T>> {
    evaluate_containment(interceptor, target, n_target_samples, time_grid, seed).map(|(r, _)| r)
}

/// Single vertex burn reaching the endpoint of `traj` at the same time: the
/// smallest over all Lambert solutions up to `max_revs` revolutions.
pub fn reduce_to_single_burn<T: Real>(traj: &ImpulsiveTrajectory<T>, max_revs: u32) -> ConeResult<Vec3<T>> {
    let end = traj.endpoint()?;
    let origin = traj.origin;
    let dt = end.t - origin.t;
    let sols = lambert::solve_lambert(origin.r, end.r, dt, traj.segments[0].arc.mu, max_revs)?;
    sols.iter()
        .map(|s| s.v_depart - origin.v)
        .min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or(ConeError::NoBoundArc)
}
