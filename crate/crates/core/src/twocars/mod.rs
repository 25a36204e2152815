//! The Two Cars pursuit game.
//!
//! Each car moves at constant speed `v` with heading θ measured clockwise from
//! the +y axis (`ẋ = v sin θ`, `ẏ = v cos θ`) and steers with a turn rate
//! bounded by `v/R`. The bound is strict, so admissible laws use
//! `(1 − 1e-9)·v/R`.

pub mod dubins;

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::real::Real;

/// Fraction of `v/R` an admissible turn rate may reach.
pub const TURN_RATE_FACTOR: f64 = 1.0 - 1e-9;

/// Capture radius as a fraction of the pursuer's turn radius.
pub const CAPTURE_RADIUS_FACTOR: f64 = 1e-3;

/// Leaf times per containment check.
pub const DEFAULT_EQUIVALENCE_GRID: usize = 51;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwoCarsError {
    #[error("car speed and turn radius must be positive and finite (v = {v}, R = {r_min})")]
    InvalidConfig { v: f64, r_min: f64 },
    #[error("turn rate {rate} rad/s exceeds the admissible {max} rad/s")]
    InadmissibleLaw { rate: f64, max: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("evader track turns at {rate} rad/s, tighter than the pursuer can follow")]
    TrackTooTight { rate: f64 },
    #[error("no capture by t = {horizon} s; closest approach {closest_approach} m")]
    NoCapture { closest_approach: f64, horizon: f64 },
}

pub type TwoCarsResult<T> = Result<T, TwoCarsError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarConfig<T> {
    /// m/s
    pub v: T,
    /// Minimum turn radius, m.
    pub r_min: T,
}

impl<T: Real> CarConfig<T> {
    pub fn new(v: T, r_min: T) -> TwoCarsResult<Self> {
        if !(v.is_finite() && r_min.is_finite() && v > T::zero() && r_min > T::zero()) {
            return Err(TwoCarsError::InvalidConfig { v: v.as_f64(), r_min: r_min.as_f64() });
        }
        Ok(Self { v, r_min })
    }

    /// Largest admissible turn rate, rad/s.
    pub fn max_turn_rate(&self) -> T {
        T::lit(TURN_RATE_FACTOR) * self.v / self.r_min
    }

    /// Largest lateral acceleration along an admissible path, m/s².
    pub fn max_accel(&self) -> T {
        self.v * self.max_turn_rate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CarState<T> {
    pub x: T,
    pub y: T,
    /// rad, clockwise from +y
    pub theta: T,
    pub t: T,
}

impl<T: Real> CarState<T> {
    pub fn new(x: T, y: T, theta: T, t: T) -> Self {
        Self { x, y, theta, t }
    }

    pub fn distance(&self, o: &Self) -> T {
        (self.x - o.x).hypot(self.y - o.y)
    }

    /// Heading reduced to `[0, 2π)`.
    pub fn heading(&self) -> T {
        let r = self.theta % T::two_pi();
        if r < T::zero() { r + T::two_pi() } else { r }
    }

    pub fn velocity(&self, v: T) -> (T, T) {
        (v * self.theta.sin(), v * self.theta.cos())
    }
}

fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        T::one() - x * x / T::lit(6.0)
    } else {
        x.sin() / x
    }
}

/// Exact pose after `dt` seconds at constant turn rate.
pub(crate) fn advance<T: Real>(s: &CarState<T>, v: T, rate: T, dt: T) -> CarState<T> {
    let half = rate * dt / T::lit(2.0);
    let chord = v * dt * sinc(half);
    let mid = s.theta + half;
    CarState { x: s.x + chord * mid.sin(), y: s.y + chord * mid.cos(), theta: s.theta + rate * dt, t: s.t + dt }
}

/// Piecewise-constant turn-rate control. Piece `i` holds from its start time
/// until the next piece; the first piece also covers earlier times.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringLaw<T> {
    pieces: Vec<(T, T)>,
}

impl<T: Real> SteeringLaw<T> {
    /// `pieces` are `(start_time, rate)` with strictly increasing starts.
    pub fn new(cfg: &CarConfig<T>, pieces: Vec<(T, T)>) -> TwoCarsResult<Self> {
        if pieces.is_empty() {
            return Err(TwoCarsError::InvalidParameter("steering law needs at least one piece"));
        }
        if pieces.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(TwoCarsError::InvalidParameter("piece start times must increase"));
        }
        let max = cfg.max_turn_rate();
        for &(t, rate) in &pieces {
            if !t.is_finite() || !rate.is_finite() || rate.abs() > max {
                return Err(TwoCarsError::InadmissibleLaw { rate: rate.as_f64(), max: max.as_f64() });
            }
        }
        Ok(Self { pieces })
    }

    pub fn constant(cfg: &CarConfig<T>, rate: T) -> TwoCarsResult<Self> {
        Self::new(cfg, vec![(T::zero(), rate)])
    }

    pub fn straight() -> Self {
        Self { pieces: vec![(T::zero(), T::zero())] }
    }

    pub fn pieces(&self) -> &[(T, T)] {
        &self.pieces
    }

    pub fn rate_at(&self, t: T) -> T {
        let i = self.pieces.partition_point(|p| p.0 <= t);
        self.pieces[i.saturating_sub(1)].1
    }

    /// Largest `|rate|` over the law.
    pub fn peak_rate(&self) -> T {
        self.pieces.iter().map(|p| p.1.abs()).fold(T::zero(), T::max)
    }

    /// Switch times strictly inside `(a, b)`.
    fn switches_in(&self, a: T, b: T) -> impl Iterator<Item = T> + '_ {
        self.pieces.iter().map(|p| p.0).filter(move |&t| t > a && t < b)
    }

    /// Exact pose at absolute time `t ≥ s0.t`.
    pub fn state_at(&self, s0: &CarState<T>, v: T, t: T) -> CarState<T> {
        let mut s = *s0;
        for sw in self.switches_in(s0.t, t).collect::<Vec<_>>() {
            s = advance(&s, v, self.rate_at(s.t), sw - s.t);
        }
        advance(&s, v, self.rate_at(s.t), t - s.t)
    }
}

/// Integrates a car from `s0` for `duration` seconds with RK4 steps no longer
/// than `step`, aligned with the law's switch times. The heading is integrated
/// exactly and the velocity is always `v(sin θ, cos θ)`.
pub fn propagate_car<T: Real>(
    cfg: &CarConfig<T>,
    s0: &CarState<T>,
    law: &SteeringLaw<T>,
    duration: T,
    step: T,
) -> TwoCarsResult<Vec<CarState<T>>> {
    if !(step > T::zero() && duration >= T::zero() && duration.is_finite()) {
        return Err(TwoCarsError::InvalidParameter("step must be positive and duration non-negative"));
    }
    let end = s0.t + duration;
    let mut nodes = vec![s0.t];
    nodes.extend(law.switches_in(s0.t, end));
    nodes.push(end);

    let mut path = vec![*s0];
    let mut s = *s0;
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let rate = law.rate_at(a);
        let n = ((b - a) / step).ceil().max(T::one()).to_usize().unwrap_or(1);
        let h = (b - a) / T::lit(n as f64);
        let theta_a = s.theta;
        let heading = |t: T| theta_a + rate * (t - a);
        for i in 0..n {
            let t = a + h * T::lit(i as f64);
            let th = heading(t);
            let thm = heading(t + h / T::lit(2.0));
            let th1 = heading(t + h);
            // RK4 on a time-only right-hand side
            let six = T::lit(6.0);
            let four = T::lit(4.0);
            s.x += cfg.v * h * (th.sin() + four * thm.sin() + th1.sin()) / six;
            s.y += cfg.v * h * (th.cos() + four * thm.cos() + th1.cos()) / six;
            s.theta = th1;
            s.t = if i + 1 == n { b } else { t + h };
            path.push(s);
        }
    }
    Ok(path)
}

/// Sampling controls for [`reachable_set`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachOptions<T> {
    /// Switch fractions per extremal family.
    pub extremal_switches: usize,
    pub random_laws: usize,
    /// Pieces per random law.
    pub pieces: usize,
    /// Occupancy cell size, m.
    pub cell: T,
    pub seed: u64,
}

impl<T: Real> Default for ReachOptions<T> {
    fn default() -> Self {
        Self { extremal_switches: 32, random_laws: 2000, pieces: 4, cell: T::lit(0.05), seed: 0 }
    }
}

/// Endpoints of sampled admissible controls at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachableSet<T> {
    pub origin: CarState<T>,
    pub t: T,
    pub points: Vec<(T, T)>,
    pub cell: T,
    /// Occupied cells, indexed by `floor(x/cell), floor(y/cell)`.
    pub cells: BTreeSet<(i64, i64)>,
}

impl<T: Real> ReachableSet<T> {
    /// Grid-level membership.
    pub fn occupies(&self, x: T, y: T) -> bool {
        self.cells.contains(&cell_of(x, y, self.cell))
    }
}

fn cell_of<T: Real>(x: T, y: T, cell: T) -> (i64, i64) {
    let i = (x / cell).floor().to_i64().unwrap_or(i64::MAX);
    let j = (y / cell).floor().to_i64().unwrap_or(i64::MAX);
    (i, j)
}

/// Extremal and random piecewise-constant laws on `[t0, t0 + duration]`.
fn sample_laws<T: Real>(
    cfg: &CarConfig<T>,
    t0: T,
    duration: T,
    switches: usize,
    random: usize,
    pieces: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<SteeringLaw<T>> {
    let w = cfg.max_turn_rate();
    let mut laws = vec![
        SteeringLaw { pieces: vec![(t0, T::zero())] },
        SteeringLaw { pieces: vec![(t0, w)] },
        SteeringLaw { pieces: vec![(t0, -w)] },
    ];
    for k in 1..switches.max(1) {
        let ts = t0 + duration * T::lit(k as f64 / switches as f64);
        for (first, second) in [(w, -w), (-w, w), (w, T::zero()), (-w, T::zero()), (T::zero(), w), (T::zero(), -w)] {
            laws.push(SteeringLaw { pieces: vec![(t0, first), (ts, second)] });
        }
    }
    for _ in 0..random {
        let mut cuts: Vec<f64> = (1..pieces.max(1)).map(|_| rng.random::<f64>()).collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let starts = std::iter::once(0.0).chain(cuts);
        let law_pieces = starts
            .map(|c| {
                let rate = if rng.random_bool(0.5) {
                    if rng.random_bool(0.5) { w } else { -w }
                } else {
                    w * T::lit(rng.random_range(-1.0..=1.0))
                };
                (t0 + duration * T::lit(c), rate)
            })
            .collect::<Vec<_>>();
        let mut dedup: Vec<(T, T)> = Vec::with_capacity(law_pieces.len());
        for p in law_pieces {
            if dedup.last().is_none_or(|q| p.0 > q.0) {
                dedup.push(p);
            }
        }
        laws.push(SteeringLaw { pieces: dedup });
    }
    laws
}

/// Positions reachable at `s0.t + duration` by sampled admissible controls:
/// bang-bang extremals plus random piecewise-constant laws, flown exactly.
pub fn reachable_set<T: Real>(
    cfg: &CarConfig<T>,
    s0: &CarState<T>,
    duration: T,
    opts: &ReachOptions<T>,
) -> TwoCarsResult<ReachableSet<T>> {
    if !(duration > T::zero() && opts.cell > T::zero()) {
        return Err(TwoCarsError::InvalidParameter("duration and cell size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let laws = sample_laws(cfg, s0.t, duration, opts.extremal_switches, opts.random_laws, opts.pieces, &mut rng);
    let end = s0.t + duration;
    let points: Vec<(T, T)> = laws
        .iter()
        .map(|law| {
            let s = law.state_at(s0, cfg.v, end);
            (s.x, s.y)
        })
        .collect();
    let cells = points.iter().map(|&(x, y)| cell_of(x, y, opts.cell)).collect();
    Ok(ReachableSet { origin: *s0, t: duration, points, cell: opts.cell, cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CockayneVerdict {
    /// `v₁ > v₂`
    pub speed_ok: bool,
    /// `v₁²/R₁ ≥ v₂²/R₂`
    pub accel_ok: bool,
}

impl CockayneVerdict {
    pub fn intercept(&self) -> bool {
        self.speed_ok && self.accel_ok
    }
}

pub fn cockayne_check<T: Real>(pursuer: &CarConfig<T>, evader: &CarConfig<T>) -> CockayneVerdict {
    CockayneVerdict {
        speed_ok: pursuer.v > evader.v,
        accel_ok: pursuer.v * pursuer.v / pursuer.r_min >= evader.v * evader.v / evader.r_min,
    }
}

/// Pursuer plan: shortest path to the evader's starting pose, then the
/// evader's own track at the pursuer's speed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitPolicy<T> {
    pub pursuer: CarConfig<T>,
    pub evader: CarConfig<T>,
    pub p0: CarState<T>,
    pub e0: CarState<T>,
    pub evader_law: SteeringLaw<T>,
    approach: SteeringLaw<T>,
    /// Time the pursuer reaches the evader's starting pose.
    pub arrival: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capture<T> {
    pub time: T,
    pub pursuer: CarState<T>,
    pub evader: CarState<T>,
    pub arrival: T,
}

impl<T: Real> ExplicitPolicy<T> {
    pub fn new(
        pursuer: CarConfig<T>,
        evader: CarConfig<T>,
        p0: CarState<T>,
        e0: CarState<T>,
        evader_law: SteeringLaw<T>,
    ) -> TwoCarsResult<Self> {
        // rounding slack only; admissible rates already sit 1e-9 below v/R
        let follow_limit = pursuer.max_turn_rate() * evader.v / pursuer.v * T::lit(1.0 + 1e-12);
        if evader_law.peak_rate() > follow_limit {
            return Err(TwoCarsError::TrackTooTight { rate: evader_law.peak_rate().as_f64() });
        }
        let rho = pursuer.v / pursuer.max_turn_rate();
        let path = dubins::shortest_path(&p0, &e0, rho)
            .ok_or(TwoCarsError::InvalidParameter("no bounded-curvature path to the evader's start"))?;
        let mut pieces = Vec::with_capacity(3);
        let mut t = p0.t;
        for (dt, rate) in path.rates(pursuer.v) {
            if dt > T::zero() {
                pieces.push((t, rate));
                t += dt;
            }
        }
        if pieces.is_empty() {
            pieces.push((p0.t, T::zero()));
        }
        Ok(Self {
            pursuer,
            evader,
            p0,
            e0,
            evader_law,
            approach: SteeringLaw { pieces },
            arrival: p0.t + path.length() / pursuer.v,
        })
    }

    pub fn evader_at(&self, t: T) -> CarState<T> {
        if t <= self.e0.t {
            return CarState { t, ..self.e0 };
        }
        self.evader_law.state_at(&self.e0, self.evader.v, t)
    }

    pub fn pursuer_at(&self, t: T) -> CarState<T> {
        if t <= self.arrival {
            return self.approach.state_at(&self.p0, self.pursuer.v, t.max(self.p0.t));
        }
        // the pursuer is where the evader was when it had covered the same track length
        let track_time = self.e0.t + self.pursuer.v * (t - self.arrival) / self.evader.v;
        CarState { t, ..self.evader_at(track_time) }
    }

    /// Track length separating the cars once the pursuer is on the track.
    pub fn track_gap(&self, t: T) -> T {
        self.evader.v * (t - self.e0.t).max(T::zero()) - self.pursuer.v * (t - self.arrival)
    }

    /// First time the cars are within `capture_radius`, checking sampled
    /// distances every `step` seconds and the closed-form track closure.
    pub fn pursue(&self, horizon: T, capture_radius: T, step: T) -> TwoCarsResult<Capture<T>> {
        if !(step > T::zero() && capture_radius > T::zero()) {
            return Err(TwoCarsError::InvalidParameter("step and capture radius must be positive"));
        }
        let closure = if self.pursuer.v > self.evader.v {
            // track_gap(t) = capture_radius, valid once t ≥ arrival
            let t = (self.pursuer.v * self.arrival - self.evader.v * self.e0.t - capture_radius)
                / (self.pursuer.v - self.evader.v);
            Some(t.max(self.arrival))
        } else {
            None
        };
        let scan_end = closure.map_or(horizon, |t| t.min(horizon));
        let n = ((scan_end - self.p0.t) / step).ceil().max(T::zero()).to_usize().unwrap_or(0);
        let mut closest = T::infinity();
        for i in 0..=n {
            let t = (self.p0.t + step * T::lit(i as f64)).min(scan_end);
            let (p, e) = (self.pursuer_at(t), self.evader_at(t));
            let d = p.distance(&e);
            closest = closest.min(d);
            if d <= capture_radius {
                return Ok(Capture { time: t, pursuer: p, evader: e, arrival: self.arrival });
            }
        }
        match closure {
            Some(t) if t <= horizon => {
                Ok(Capture { time: t, pursuer: self.pursuer_at(t), evader: self.evader_at(t), arrival: self.arrival })
            }
            _ => Err(TwoCarsError::NoCapture { closest_approach: closest.as_f64(), horizon: horizon.as_f64() }),
        }
    }
}

/// Runs the Explicit Policy against an evader flying `evader_law` from `e0`,
/// with the default capture radius.
pub fn explicit_policy_pursuit<T: Real>(
    pursuer: &CarConfig<T>,
    evader: &CarConfig<T>,
    p0: &CarState<T>,
    e0: &CarState<T>,
    evader_law: &SteeringLaw<T>,
    horizon: T,
) -> TwoCarsResult<Capture<T>> {
    let policy = ExplicitPolicy::new(*pursuer, *evader, *p0, *e0, evader_law.clone())?;
    let eps = T::lit(CAPTURE_RADIUS_FACTOR) * pursuer.r_min;
    let step = pursuer.r_min / pursuer.v / T::lit(20.0);
    policy.pursue(horizon, eps, step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    /// Farther from the common vertex than the pursuer can travel.
    Range,
    /// Turning harder than the pursuer can.
    Acceleration,
}

/// An evader trajectory point outside the pursuer's cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceWitness<T> {
    pub x: T,
    pub y: T,
    /// Time since the evader's start, s.
    pub tau: T,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceOptions {
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
}

impl Default for EquivalenceOptions {
    fn default() -> Self {
        Self { samples: 200, grid: DEFAULT_EQUIVALENCE_GRID, seed: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceVerdict<T> {
    pub contained: bool,
    pub cockayne: CockayneVerdict,
    pub points_tested: usize,
    pub witness: Option<EquivalenceWitness<T>>,
}

impl<T> EquivalenceVerdict<T> {
    pub fn agrees(&self) -> bool {
        self.contained == self.cockayne.intercept()
    }
}

/// Samples the evader's cone after the headstart and tests each trajectory
/// point against the pursuer's cone from the same vertex. Initial headings are
/// free, so the pursuer's leaf after `τ` seconds is the disk of radius `v₁τ`
/// (boundary excluded, since the turn-rate bound is strict), and a point is
/// only reachable along a path whose lateral acceleration the pursuer can
/// match.
pub fn containment_equivalence<T: Real>(
    pursuer: &CarConfig<T>,
    evader: &CarConfig<T>,
    horizon: T,
    headstart: T,
    opts: &EquivalenceOptions,
) -> TwoCarsResult<EquivalenceVerdict<T>> {
    let come_about = T::PI() * pursuer.r_min / pursuer.v;
    if !(headstart >= come_about) {
        return Err(TwoCarsError::InvalidParameter("headstart shorter than the pursuer's come-about time"));
    }
    if !(horizon > headstart) || opts.grid == 0 {
        return Err(TwoCarsError::InvalidParameter("horizon must exceed the headstart and the grid be non-empty"));
    }
    let span = horizon - headstart;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let laws = sample_laws(evader, T::zero(), span, 4, opts.samples, 4, &mut rng);
    let start = CarState::default();
    let strict = T::lit(TURN_RATE_FACTOR);
    let accel_limit = pursuer.max_accel();

    let mut points = 0;
    let mut witness = None;
    'laws: for law in &laws {
        for k in 1..=opts.grid {
            let tau = span * T::lit(k as f64 / opts.grid as f64);
            let s = law.state_at(&start, evader.v, tau);
            points += 1;
            let range = s.x.hypot(s.y);
            let accel = evader.v * law.rate_at(tau).abs();
            let reason = if !(range < strict * pursuer.v * tau) {
                Some(ExclusionReason::Range)
            } else if accel > accel_limit {
                Some(ExclusionReason::Acceleration)
            } else {
                None
            };
            if let Some(reason) = reason {
                witness = Some(EquivalenceWitness { x: s.x, y: s.y, tau, reason });
                break 'laws;
            }
        }
    }
    Ok(EquivalenceVerdict {
        contained: witness.is_none(),
        cockayne: cockayne_check(pursuer, evader),
        points_tested: points,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn car(v: f64, r: f64) -> CarConfig<f64> {
        CarConfig::new(v, r).unwrap()
    }

    fn origin() -> CarState<f64> {
        CarState::default()
    }

    #[test]
    fn config_and_law_validation() {
        assert!(CarConfig::new(0.0, 1.0).is_err());
        assert!(CarConfig::new(1.0, -1.0).is_err());
        let c = car(2.0, 1.0);
        assert!(SteeringLaw::constant(&c, 2.0).is_err());
        assert!(SteeringLaw::constant(&c, c.max_turn_rate()).is_ok());
        assert!(SteeringLaw::new(&c, vec![(1.0, 0.0), (1.0, 0.1)]).is_err());
    }

    #[test]
    fn straight_law_runs_along_y() {
        let c = car(3.0, 1.0);
        let path = propagate_car(&c, &origin(), &SteeringLaw::straight(), 5.0, 0.1).unwrap();
        let end = path.last().unwrap();
        assert!(end.x.abs() < 1e-12 && (end.y - 15.0).abs() < 1e-12);
    }

    #[test]
    fn constant_turn_closes_circle() {
        let c = car(2.0, 1.0);
        let rate = 1.5;
        let law = SteeringLaw::constant(&c, rate).unwrap();
        let period = 2.0 * PI / rate;
        let path = propagate_car(&c, &origin(), &law, period, 0.01).unwrap();
        let end = path.last().unwrap();
        assert!(end.distance(&origin()) < 1e-8, "{end:?}");
        let cx = c.v / rate;
        for s in &path {
            assert!(((s.x - cx).hypot(s.y) - c.v / rate).abs() < 1e-8);
        }
    }

    #[test]
    fn integration_matches_exact_arcs_and_converges() {
        let c = car(1.5, 0.8);
        let w = c.max_turn_rate();
        let law = SteeringLaw::new(&c, vec![(0.0, w), (1.3, -w), (2.9, 0.2), (4.1, -w)]).unwrap();
        let exact = law.state_at(&origin(), c.v, 6.0);
        let coarse = *propagate_car(&c, &origin(), &law, 6.0, 0.01).unwrap().last().unwrap();
        let fine = *propagate_car(&c, &origin(), &law, 6.0, 0.005).unwrap().last().unwrap();
        assert!(coarse.distance(&fine) < 1e-8 * exact.x.hypot(exact.y));
        assert!(fine.distance(&exact) < 1e-9);
    }

    #[test]
    fn reachable_points_respect_range_bound() {
        let c = car(1.0, 1.0);
        for t in [0.1, 1.0, PI, 6.0] {
            let set = reachable_set(&c, &origin(), t, &ReachOptions { random_laws: 300, ..Default::default() }).unwrap();
            assert!(set.points.iter().all(|&(x, y)| x.hypot(y) <= c.v * t * (1.0 + 1e-12)));
            // straight ahead is included
            assert!(set.points.iter().any(|&(x, y)| x.abs() < 1e-12 && (y - t).abs() < 1e-12));
            assert!(set.occupies(0.0, t - 1e-9));
        }
        let tiny = reachable_set(&c, &origin(), 1e-9, &ReachOptions::default()).unwrap();
        assert!(tiny.points.iter().all(|&(x, y)| x.hypot(y) <= 1e-9));
    }

    #[test]
    fn half_turn_spans_a_diameter() {
        let c = car(2.0, 1.5);
        let t = PI * c.r_min / c.v;
        let law = SteeringLaw::constant(&c, c.max_turn_rate()).unwrap();
        let end = law.state_at(&origin(), c.v, t);
        assert!((end.distance(&origin()) - 2.0 * c.r_min).abs() < 1e-8);
    }

    #[test]
    fn cockayne_examples() {
        assert_eq!(cockayne_check(&car(2.0, 1.0), &car(1.0, 1.0)), CockayneVerdict { speed_ok: true, accel_ok: true });
        assert_eq!(cockayne_check(&car(1.2, 2.0), &car(1.0, 1.0)), CockayneVerdict { speed_ok: true, accel_ok: false });
        assert_eq!(cockayne_check(&car(1.0, 1.0), &car(1.0, 1.0)), CockayneVerdict { speed_ok: false, accel_ok: true });
    }

    #[test]
    fn chase_down_straight_ahead() {
        let (p, e) = (car(2.0, 1.0), car(1.0, 1.0));
        let d = 10.0;
        let e0 = CarState::new(0.0, d, 0.0, 0.0);
        let cap = explicit_policy_pursuit(&p, &e, &origin(), &e0, &SteeringLaw::straight(), 100.0).unwrap();
        assert!((cap.arrival - d / p.v).abs() < 1e-12);
        // closed form: v₁ t = d + v₂ t, less the capture radius
        let expected = (d - 1e-3 * p.r_min) / (p.v - e.v);
        assert!((cap.time - expected).abs() < 1e-9, "{} vs {expected}", cap.time);
    }

    #[test]
    fn equal_speeds_never_close() {
        let c = car(1.0, 1.0);
        let e0 = CarState::new(3.0, 6.0, 0.5, 0.0);
        let err = explicit_policy_pursuit(&c, &c, &origin(), &e0, &SteeringLaw::straight(), 200.0).unwrap_err();
        assert!(matches!(err, TwoCarsError::NoCapture { .. }));
        let policy = ExplicitPolicy::new(c, c, origin(), e0, SteeringLaw::straight()).unwrap();
        let mut prev = 0.0;
        for i in 0..400 {
            let t = policy.arrival + i as f64 * 0.5;
            let gap = policy.pursuer_at(t).distance(&policy.evader_at(t));
            assert!(gap >= prev - 1e-9);
            prev = gap;
        }
    }

    #[test]
    fn tight_track_rejected() {
        let (p, e) = (car(2.0, 2.0), car(1.0, 0.5));
        let law = SteeringLaw::constant(&e, e.max_turn_rate()).unwrap();
        assert!(matches!(
            ExplicitPolicy::new(p, e, origin(), CarState::new(5.0, 5.0, 0.0, 0.0), law),
            Err(TwoCarsError::TrackTooTight { .. })
        ));
    }

    #[test]
    fn equivalence_examples() {
        let opts = EquivalenceOptions { samples: 100, ..Default::default() };
        let v = containment_equivalence(&car(2.0, 1.0), &car(1.0, 1.0), 20.0, 2.0, &opts).unwrap();
        assert!(v.contained && v.agrees());
        let slow = containment_equivalence(&car(1.0, 1.0), &car(1.5, 1.0), 20.0, 4.0, &opts).unwrap();
        assert!(!slow.contained && slow.agrees());
        let w = slow.witness.unwrap();
        assert_eq!(w.reason, ExclusionReason::Range);
        assert!(w.x.hypot(w.y) > 1.0 * w.tau);
        let same = containment_equivalence(&car(1.0, 1.0), &car(1.0, 1.0), 20.0, 4.0, &opts).unwrap();
        assert!(!same.contained && same.agrees());
        // matched lateral acceleration: 4/4 = 1/1
        let edge = containment_equivalence(&car(2.0, 4.0), &car(1.0, 1.0), 40.0, 7.0, &opts).unwrap();
        assert!(edge.contained && edge.agrees());
        assert!(containment_equivalence(&car(2.0, 4.0), &car(1.0, 1.0), 40.0, 1.0, &opts).is_err());
    }
}
