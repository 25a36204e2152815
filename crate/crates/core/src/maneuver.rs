//! Propulsive trajectories: impulsive shock schedules chained from ballistic
//! arcs, the rocket equation, and a fixed-step integrator for continuous
//! thrust.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use thiserror::Error;

use crate::kepler::{self, BallisticArc, GravParam, KeplerError, StateVector};
use crate::real::Real;
use crate::vec3::Vec3;

/// Standard gravity, m/s².
pub const G0_M_S2: f64 = 9.80665;

/// Equatorial radius of the spherical Earth model, km.
pub const EARTH_RADIUS_KM: f64 = 6378.137;

/// Default altitude below which trajectory points are invalid, km.
pub const DEFAULT_FLOOR_KM: f64 = 90.0;

/// Default relative endpoint change accepted by the step-halving loop.
pub const DEFAULT_INTEGRATOR_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManeuverError {
    #[error("post-shock orbit is unbound (e = {eccentricity})")]
    UnboundResult { eccentricity: f64 },
    #[error("trajectory drops to radius {radius} km, below the floor, at t = {t} s")]
    SurfaceViolation { t: f64, radius: f64 },
    #[error("trajectory escapes at t = {t} s")]
    Escape { t: f64 },
    #[error("masses must satisfy m_i >= m_f > 0 (got m_i = {m_i}, m_f = {m_f})")]
    InvalidMass { m_i: f64, m_f: f64 },
    #[error("specific impulse must be positive, got {0} s")]
    InvalidIsp(f64),
    #[error("shock {index} is not strictly after its predecessor")]
    UnorderedShocks { index: usize },
    #[error("shock {index} at t = {t} s lies outside [{start}, {end}]")]
    ShockOutsideWindow { index: usize, t: f64, start: f64, end: f64 },
    #[error("total impulse {total} km/s exceeds budget {budget} km/s")]
    OverBudget { total: f64, budget: f64 },
    #[error("invalid window [{start}, {end}]")]
    InvalidWindow { start: f64, end: f64 },
    #[error("time {t} s outside trajectory window [{start}, {end}]")]
    OutsideWindow { t: f64, start: f64, end: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("at shock {index}: {source}")]
    AtShock {
        index: usize,
        #[source]
        source: Box<ManeuverError>,
    },
    #[error("step halving did not converge after {halvings} halvings")]
    IntegratorNoConvergence { halvings: usize },
    #[error(transparent)]
    Kepler(#[from] KeplerError),
}

pub type ManeuverResult<T> = Result<T, ManeuverError>;

/// Central body and the altitude floor trajectories must respect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment<T> {
    pub mu: GravParam<T>,
    /// km
    pub body_radius: T,
    /// km above `body_radius`
    pub floor_altitude: T,
}

impl<T: Real> Environment<T> {
    pub fn earth() -> Self {
        Self {
            mu: GravParam::earth(),
            body_radius: T::lit(EARTH_RADIUS_KM),
            floor_altitude: T::lit(DEFAULT_FLOOR_KM),
        }
    }

    pub fn floor_radius(&self) -> T {
        self.body_radius + self.floor_altitude
    }
}

impl<T: Real> Default for Environment<T> {
    fn default() -> Self {
        Self::earth()
    }
}

/// Ideal velocity change from burning `m_i − m_f` kg at specific impulse
/// `isp` seconds, in km/s.
pub fn rocket_delta_v<T: Real>(isp: T, m_i: T, m_f: T) -> ManeuverResult<T> {
    if !(isp.is_finite() && isp > T::zero()) {
        return Err(ManeuverError::InvalidIsp(isp.as_f64()));
    }
    if !(m_f.is_finite() && m_i.is_finite() && m_f > T::zero() && m_i >= m_f) {
        return Err(ManeuverError::InvalidMass { m_i: m_i.as_f64(), m_f: m_f.as_f64() });
    }
    Ok(isp * T::lit(G0_M_S2 / 1000.0) * (m_i / m_f).ln())
}

fn arc_after_shock<T: Real>(s: &StateVector<T>, dv: Vec3<T>, env: &Environment<T>) -> ManeuverResult<BallisticArc<T>> {
    let shocked = s.with_velocity(s.v + dv);
    kepler::arc_from_state(&shocked, env.mu).map_err(|e| match e {
        KeplerError::EccentricityOutOfRange(ecc) => ManeuverError::UnboundResult { eccentricity: ecc },
        other => other.into(),
    })
}

fn check_floor<T: Real>(arc: &BallisticArc<T>, env: &Environment<T>, until: Option<T>) -> ManeuverResult<()> {
    let t0 = arc.epoch_state.t;
    let (rmin, t) = match until {
        Some(t1) => (arc.min_radius_between(t0, t1)?, t1),
        None => (arc.periapsis_radius(), t0),
    };
    if rmin < env.floor_radius() {
        return Err(ManeuverError::SurfaceViolation { t: t.as_f64(), radius: rmin.as_f64() });
    }
    Ok(())
}

/// Applies an instantaneous velocity change. The resulting orbit must be
/// bound and its perigee must clear the floor.
pub fn apply_shock<T: Real>(s: &StateVector<T>, dv: Vec3<T>, env: &Environment<T>) -> ManeuverResult<StateVector<T>> {
    let arc = arc_after_shock(s, dv, env)?;
    check_floor(&arc, env, None)?;
    Ok(arc.epoch_state)
}

/// Like [`apply_shock`], but the floor only has to hold until `t_end`.
pub fn apply_shock_until<T: Real>(
    s: &StateVector<T>,
    dv: Vec3<T>,
    env: &Environment<T>,
    t_end: T,
) -> ManeuverResult<StateVector<T>> {
    let arc = arc_after_shock(s, dv, env)?;
    check_floor(&arc, env, Some(t_end))?;
    Ok(arc.epoch_state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockEvent<T> {
    /// s
    pub t: T,
    /// km/s
    pub dv: Vec3<T>,
}

/// Time-ordered shocks drawing on a shared Δv budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveSchedule<T> {
    shocks: Vec<ShockEvent<T>>,
    budget: T,
}

impl<T: Real> ImpulsiveSchedule<T> {
    pub fn new(shocks: Vec<ShockEvent<T>>, budget: T) -> ManeuverResult<Self> {
        if !(budget.is_finite() && budget >= T::zero()) {
            return Err(ManeuverError::InvalidParameter("budget must be finite and non-negative"));
        }
        for (i, w) in shocks.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(ManeuverError::UnorderedShocks { index: i + 1 });
            }
        }
        if shocks.iter().any(|s| !s.t.is_finite() || !s.dv.is_finite()) {
            return Err(ManeuverError::InvalidParameter("shock times and impulses must be finite"));
        }
        let total: T = shocks.iter().map(|s| s.dv.norm()).sum();
        if total > budget {
            return Err(ManeuverError::OverBudget { total: total.as_f64(), budget: budget.as_f64() });
        }
        Ok(Self { shocks, budget })
    }

    pub fn empty(budget: T) -> Self {
        Self { shocks: Vec::new(), budget }
    }

    pub fn shocks(&self) -> &[ShockEvent<T>] {
        &self.shocks
    }

    pub fn budget(&self) -> T {
        self.budget
    }

    pub fn total_dv(&self) -> T {
        self.shocks.iter().map(|s| s.dv.norm()).sum()
    }

    pub fn len(&self) -> usize {
        self.shocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shocks.is_empty()
    }
}

/// A ballistic arc together with the interval over which it is flown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcSegment<T> {
    pub arc: BallisticArc<T>,
    pub t_start: T,
    pub t_end: T,
}

/// Piecewise-ballistic trajectory: one arc before the first shock and one
/// after each shock.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulsiveTrajectory<T> {
    pub origin: StateVector<T>,
    pub schedule: ImpulsiveSchedule<T>,
    pub segments: Vec<ArcSegment<T>>,
}

impl<T: Real> ImpulsiveTrajectory<T> {
    pub fn t_end(&self) -> T {
        self.segments.last().map_or(self.origin.t, |s| s.t_end)
    }

    /// State at `t`; at a shock epoch the post-shock velocity is returned.
    pub fn state_at(&self, t: T) -> ManeuverResult<StateVector<T>> {
        let (start, end) = (self.origin.t, self.t_end());
        if !(t >= start && t <= end) {
            return Err(ManeuverError::OutsideWindow { t: t.as_f64(), start: start.as_f64(), end: end.as_f64() });
        }
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| s.t_start <= t)
            .unwrap_or(&self.segments[0]);
        Ok(kepler::propagate_arc(&seg.arc, t - seg.t_start)?)
    }

    pub fn endpoint(&self) -> ManeuverResult<StateVector<T>> {
        self.state_at(self.t_end())
    }
}

/// Flies `origin` through the shock schedule up to `t_end`, checking every arc
/// against the floor over the interval it is flown.
pub fn propagate_schedule<T: Real>(
    origin: &StateVector<T>,
    sched: &ImpulsiveSchedule<T>,
    t_end: T,
    env: &Environment<T>,
) -> ManeuverResult<ImpulsiveTrajectory<T>> {
    if !(t_end >= origin.t) {
        return Err(ManeuverError::InvalidWindow { start: origin.t.as_f64(), end: t_end.as_f64() });
    }
    for (index, s) in sched.shocks().iter().enumerate() {
        if s.t < origin.t || s.t > t_end {
            return Err(ManeuverError::ShockOutsideWindow {
                index,
                t: s.t.as_f64(),
                start: origin.t.as_f64(),
                end: t_end.as_f64(),
            });
        }
    }
    let at = |index: usize| move |e: ManeuverError| ManeuverError::AtShock { index, source: Box::new(e) };

    let mut segments = Vec::with_capacity(sched.len() + 1);
    let mut state = *origin;
    let mut arc = kepler::arc_from_state(&state, env.mu).map_err(|e| match e {
        KeplerError::EccentricityOutOfRange(ecc) => ManeuverError::UnboundResult { eccentricity: ecc },
        other => other.into(),
    })?;
    for (index, shock) in sched.shocks().iter().enumerate() {
        if shock.t > state.t {
            check_floor(&arc, env, Some(shock.t))?;
            segments.push(ArcSegment { arc, t_start: state.t, t_end: shock.t });
            state = kepler::propagate_arc(&arc, shock.t - state.t).map_err(|e| at(index)(e.into()))?;
        }
        arc = arc_after_shock(&state, shock.dv, env).map_err(at(index))?;
        state = arc.epoch_state;
    }
    let last = sched.len().checked_sub(1);
    check_floor(&arc, env, Some(t_end)).map_err(|e| match last {
        Some(i) => at(i)(e),
        None => e,
    })?;
    segments.push(ArcSegment { arc, t_start: state.t, t_end });
    Ok(ImpulsiveTrajectory { origin: *origin, schedule: sched.clone(), segments })
}

type AccelFn<T> = dyn Fn(T) -> Vec3<T> + Send + Sync;

/// Continuous thrust acceleration (km/s²) active over a time window.
#[derive(Clone)]
pub struct ThrustProfile<T> {
    accel: Arc<AccelFn<T>>,
    window: (T, T),
    budget: T,
}

impl<T: Real> fmt::Debug for ThrustProfile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ThrustProfile")
            .field("window", &self.window)
            .field("budget", &self.budget)
            .finish_non_exhaustive()
    }
}

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Composite 5-point Gauss-Legendre quadrature over `pieces` equal panels.
fn gauss_legendre<T, V>(f: impl Fn(T) -> V, a: T, b: T, pieces: usize, zero: V) -> V
where
    T: Real,
    V: Copy + Add<Output = V> + Mul<T, Output = V>,
{
    let h = (b - a) / T::lit(pieces as f64);
    let mut acc = zero;
    for k in 0..pieces {
        let mid = a + h * (T::lit(k as f64) + T::lit(0.5));
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            acc = acc + f(mid + h * T::lit(0.5 * x)) * (T::lit(0.5 * w) * h);
        }
    }
    acc
}

const BUDGET_QUADRATURE_PANELS: usize = 256;

impl<T: Real> ThrustProfile<T> {
    /// Fails when `∫‖a‖dt` over the window exceeds `budget`.
    pub fn new(
        accel: impl Fn(T) -> Vec3<T> + Send + Sync + 'static,
        window: (T, T),
        budget: T,
    ) -> ManeuverResult<Self> {
        if !(window.0.is_finite() && window.1.is_finite() && window.1 > window.0) {
            return Err(ManeuverError::InvalidWindow { start: window.0.as_f64(), end: window.1.as_f64() });
        }
        let profile = Self { accel: Arc::new(accel), window, budget };
        let used = profile.impulse_magnitude();
        if !used.is_finite() || used > budget * (T::one() + T::tolerance(1e-9)) {
            return Err(ManeuverError::OverBudget { total: used.as_f64(), budget: budget.as_f64() });
        }
        Ok(profile)
    }

    pub fn window(&self) -> (T, T) {
        self.window
    }

    pub fn budget(&self) -> T {
        self.budget
    }

    /// Acceleration at `t`; zero outside the window.
    pub fn accel(&self, t: T) -> Vec3<T> {
        if t >= self.window.0 && t <= self.window.1 {
            (self.accel)(t)
        } else {
            Vec3::zeros()
        }
    }

    /// `∫‖a‖dt` over the window.
    pub fn impulse_magnitude(&self) -> T {
        let (a, b) = self.window;
        gauss_legendre(|t| (self.accel)(t).norm(), a, b, BUDGET_QUADRATURE_PANELS, T::zero())
    }
}

/// Fixed-step samples of an integrated trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory<T> {
    pub samples: Vec<StateVector<T>>,
    /// Largest step actually used, s.
    pub step: T,
}

impl<T: Real> SampledTrajectory<T> {
    pub fn endpoint(&self) -> StateVector<T> {
        *self.samples.last().expect("trajectory has at least the origin sample")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions<T> {
    /// Initial step, s.
    pub initial_step: T,
    /// Relative endpoint change at which halving stops.
    pub tol: T,
    pub max_halvings: usize,
}

impl<T: Real> Default for IntegratorOptions<T> {
    fn default() -> Self {
        Self { initial_step: T::lit(10.0), tol: T::tolerance(DEFAULT_INTEGRATOR_TOL), max_halvings: 16 }
    }
}

fn rk4_step<T: Real>(
    r: Vec3<T>,
    v: Vec3<T>,
    t: T,
    h: T,
    mu: T,
    accel: &impl Fn(T) -> Vec3<T>,
) -> (Vec3<T>, Vec3<T>) {
    let deriv = |t: T, r: Vec3<T>, v: Vec3<T>| {
        let rn = r.norm();
        (v, r * (-mu / (rn * rn * rn)) + accel(t))
    };
    let half = h / T::lit(2.0);
    let (k1r, k1v) = deriv(t, r, v);
    let (k2r, k2v) = deriv(t + half, r + k1r * half, v + k1v * half);
    let (k3r, k3v) = deriv(t + half, r + k2r * half, v + k2v * half);
    let (k4r, k4v) = deriv(t + h, r + k3r * h, v + k3v * h);
    let two = T::lit(2.0);
    let sixth = h / T::lit(6.0);
    (
        r + (k1r + k2r * two + k3r * two + k4r) * sixth,
        v + (k1v + k2v * two + k3v * two + k4v) * sixth,
    )
}

/// One RK4 pass from `origin.t` to `t_end` with steps no longer than `max_step`.
/// Window edges are step nodes so the integrand is smooth within each step.
fn rk4_pass<T: Real>(
    origin: &StateVector<T>,
    profile: &ThrustProfile<T>,
    t_end: T,
    max_step: T,
    mu: T,
) -> Vec<StateVector<T>> {
    let mut breaks = vec![origin.t];
    for edge in [profile.window.0, profile.window.1] {
        if edge > origin.t && edge < t_end {
            breaks.push(edge);
        }
    }
    breaks.push(t_end);

    let mut out = vec![*origin];
    let (mut r, mut v) = (origin.r, origin.v);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let n = ((b - a) / max_step).ceil().max(T::one());
        let h = (b - a) / n;
        // window edges are break points, so each panel is wholly on or off
        let on = a >= profile.window.0 && b <= profile.window.1;
        let panel_accel = |t: T| if on { (profile.accel)(t.max(a).min(b)) } else { Vec3::zeros() };
        let steps = n.to_usize().unwrap_or(1);
        for i in 0..steps {
            let t = a + h * T::lit(i as f64);
            (r, v) = rk4_step(r, v, t, h, mu, &panel_accel);
            let t_next = if i + 1 == steps { b } else { a + h * T::lit((i + 1) as f64) };
            out.push(StateVector { r, v, t: t_next });
        }
    }
    out
}

fn state_change<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> T {
    ((a.r - b.r).norm() / b.r.norm()).max((a.v - b.v).norm() / b.v.norm())
}

/// Integrates `r̈ = −μr/|r|³ + a(t)` from `origin` to `t_end` with classical
/// RK4, halving the step until the endpoint moves by less than `opts.tol`
/// (relative, position and velocity).
pub fn integrate_thrust<T: Real>(
    origin: &StateVector<T>,
    profile: &ThrustProfile<T>,
    t_end: T,
    env: &Environment<T>,
    opts: IntegratorOptions<T>,
) -> ManeuverResult<SampledTrajectory<T>> {
    origin.validate()?;
    if !(t_end > origin.t) {
        return Err(ManeuverError::InvalidWindow { start: origin.t.as_f64(), end: t_end.as_f64() });
    }
    if !(opts.initial_step > T::zero() && opts.tol > T::zero()) {
        return Err(ManeuverError::InvalidParameter("step and tolerance must be positive"));
    }
    let mu = env.mu.mu();
    let mut step = opts.initial_step;
    let mut prev = rk4_pass(origin, profile, t_end, step, mu);
    let mut converged = false;
    for _ in 0..opts.max_halvings {
        step /= T::lit(2.0);
        let next = rk4_pass(origin, profile, t_end, step, mu);
        let change = state_change(&next[next.len() - 1], &prev[prev.len() - 1]);
        prev = next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(ManeuverError::IntegratorNoConvergence { halvings: opts.max_halvings });
    }
    for s in &prev {
        let rn = s.r.norm();
        if !(rn >= env.floor_radius()) {
            return Err(ManeuverError::SurfaceViolation { t: s.t.as_f64(), radius: rn.as_f64() });
        }
        if !(s.energy(env.mu) < T::zero()) {
            return Err(ManeuverError::Escape { t: s.t.as_f64() });
        }
    }
    Ok(SampledTrajectory { samples: prev, step })
}

/// Panels per sub-interval when integrating the profile into shock impulses.
const SHOCK_QUADRATURE_PANELS: usize = 4;

/// Replaces the profile by `n` shocks, one at the midpoint of each equal
/// sub-interval of the window, carrying that sub-interval's integrated
/// acceleration. Zero impulses are dropped.
pub fn shock_approximation<T: Real>(profile: &ThrustProfile<T>, n: usize) -> ManeuverResult<ImpulsiveSchedule<T>> {
    if n == 0 {
        return Err(ManeuverError::InvalidParameter("shock count must be at least 1"));
    }
    let (a, b) = profile.window;
    let h = (b - a) / T::lit(n as f64);
    let mut shocks = Vec::with_capacity(n);
    for i in 0..n {
        let lo = a + h * T::lit(i as f64);
        let hi = if i + 1 == n { b } else { lo + h };
        let dv = gauss_legendre(|t| (profile.accel)(t), lo, hi, SHOCK_QUADRATURE_PANELS, Vec3::zeros());
        if dv != Vec3::zeros() {
            shocks.push(ShockEvent { t: (lo + hi) / T::lit(2.0), dv });
        }
    }
    let slack = (profile.budget * T::tolerance(1e-9)).max(T::epsilon());
    ImpulsiveSchedule::new(shocks, profile.budget + slack)
}
