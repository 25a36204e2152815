//! Lambert targeting: the bound conic arcs joining two positions in a given
//! time.
//!
//! Universal-variable formulation (Bate, Mueller & White) with the free
//! parameter `z = ΔE²`. Zero-revolution transfers live on `z ∈ (0, 4π²)`
//! where time of flight increases monotonically; `N`-revolution transfers live
//! on `z ∈ (4π²N², 4π²(N+1)²)` where time of flight has a single minimum and
//! up to two roots. Every returned solution is re-propagated with the
//! two-body engine and discarded unless it lands on the target position.

use thiserror::Error;

use crate::kepler::{self, GravParam, KeplerError, StateVector};
use crate::real::Real;
use crate::vec3::Vec3;

/// Default revolution cap for membership testing.
pub const DEFAULT_MAX_REVS: u32 = 1;

/// Transfers within this angle (rad) of 0 or π have no defined plane.
pub const PLANE_TOLERANCE: f64 = 1e-8;

/// Relative miss allowed when re-propagating a solution onto the target.
pub const CERTIFY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LambertError {
    #[error("transfer angle {angle} rad is within {PLANE_TOLERANCE} of 0 or π: transfer plane undefined")]
    AmbiguousPlane { angle: f64 },
    #[error("positions must be finite and away from the attracting centre")]
    DegeneratePosition,
    #[error("transfer time must be positive, got {0} s")]
    NonPositiveTime(f64),
    #[error(transparent)]
    Kepler(#[from] KeplerError),
}

/// Direction of motion relative to the shorter of the two angles between
/// the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TransferWay {
    /// Sweeps the transfer angle below π.
    Short,
    /// Sweeps `2π` minus the short angle.
    Long,
}

/// Which root of a multi-revolution time-of-flight curve was taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RevSide {
    /// The unique zero-revolution root.
    Single,
    /// Root below the time-of-flight minimum in `z` (larger semimajor axis).
    Left,
    /// Root above the minimum in `z`.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertSolution<T> {
    pub v_depart: Vec3<T>,
    pub v_arrive: Vec3<T>,
    pub revs: u32,
    pub way: TransferWay,
    pub side: RevSide,
    /// Universal parameter at the root.
    pub z: T,
}

/// Stumpff functions `C(z)`, `S(z)` for `z ≥ 0`.
fn stumpff<T: Real>(z: T) -> (T, T) {
    if z < T::one() {
        // alternating series, |term| ≤ z^k/(2k+2)!
        let (mut c, mut s) = (T::zero(), T::zero());
        let mut term_c = T::lit(0.5);
        let mut term_s = T::lit(1.0 / 6.0);
        for k in 0..12 {
            c += term_c;
            s += term_s;
            let kk = T::lit(k as f64);
            let two = T::lit(2.0);
            term_c = -term_c * z / ((two * kk + T::lit(3.0)) * (two * kk + T::lit(4.0)));
            term_s = -term_s * z / ((two * kk + T::lit(4.0)) * (two * kk + T::lit(5.0)));
        }
        (c, s)
    } else {
        let sz = z.sqrt();
        let h = (sz / T::lit(2.0)).sin();
        (T::lit(2.0) * h * h / z, (sz - sz.sin()) / (z * sz))
    }
}

struct Geometry<T> {
    r1: T,
    r2: T,
    a: T,
    sqrt_mu: T,
}

impl<T: Real> Geometry<T> {
    fn y(&self, z: T, c: T, s: T) -> T {
        self.r1 + self.r2 + self.a * (z * s - T::one()) / c.sqrt()
    }

    /// Time of flight at `z`; `None` where the arc degenerates.
    fn tof(&self, z: T) -> Option<T> {
        let (c, s) = stumpff(z);
        if !(c > T::zero()) {
            return None;
        }
        let y = self.y(z, c, s);
        if !(y >= T::zero()) {
            return None;
        }
        let chi = (y / c).sqrt();
        let t = (chi * chi * chi * s + self.a * y.sqrt()) / self.sqrt_mu;
        t.is_finite().then_some(t)
    }
}

/// Solves Lambert's problem from `r0` to `r1` in `dt` seconds, returning every
/// bound solution with at most `max_revs` complete revolutions.
///
/// An empty list means no bound arc exists for this geometry and time.
pub fn solve_lambert<T: Real>(
    r0: Vec3<T>,
    r1: Vec3<T>,
    dt: T,
    mu: GravParam<T>,
    max_revs: u32,
) -> Result<Vec<LambertSolution<T>>, LambertError> {
    if !(r0.is_finite() && r1.is_finite()) || r0.norm() <= T::zero() || r1.norm() <= T::zero() {
        return Err(LambertError::DegeneratePosition);
    }
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(LambertError::NonPositiveTime(dt.as_f64()));
    }
    let (n0, n1) = (r0.norm(), r1.norm());
    let short_angle = (r0.cross(&r1).norm()).atan2(r0.dot(&r1));
    let pi = T::PI();
    let tol = T::lit(PLANE_TOLERANCE);
    if short_angle < tol || pi - short_angle < tol {
        return Err(LambertError::AmbiguousPlane { angle: short_angle.as_f64() });
    }

    let chord = (r1 - r0).norm();
    let a_min = (n0 + n1 + chord) / T::lit(4.0);
    let min_period = T::two_pi() * (a_min * a_min * a_min / mu.mu()).sqrt();

    let mut out = Vec::new();
    for way in [TransferWay::Short, TransferWay::Long] {
        let angle = match way {
            TransferWay::Short => short_angle,
            TransferWay::Long => T::two_pi() - short_angle,
        };
        let geom = Geometry {
            r1: n0,
            r2: n1,
            a: (T::lit(2.0) * n0 * n1).sqrt() * (angle / T::lit(2.0)).cos(),
            sqrt_mu: mu.mu().sqrt(),
        };
        for revs in 0..=max_revs {
            if revs > 0 && dt < T::lit(revs as f64) * min_period {
                break;
            }
            for (z, side) in roots_for(&geom, dt, revs) {
                if let Some(sol) = build_solution(&geom, r0, r1, dt, mu, z, revs, way, side)? {
                    out.push(sol);
                }
            }
        }
    }
    Ok(out)
}

fn roots_for<T: Real>(geom: &Geometry<T>, dt: T, revs: u32) -> Vec<(T, RevSide)> {
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let n = T::lit(revs as f64);
    let lo = four_pi2 * n * n;
    let hi = four_pi2 * (n + T::one()) * (n + T::one());
    let excess = |z: T| geom.tof(z).map(|t| t - dt);

    if revs == 0 {
        match excess(T::zero()) {
            Some(e) if e < T::zero() => bisect(&excess, T::zero(), hi, true).map(|z| vec![(z, RevSide::Single)]).unwrap_or_default(),
            _ => Vec::new(),
        }
    } else {
        let Some((z_min, t_min)) = golden_min(geom, lo, hi) else {
            return Vec::new();
        };
        if t_min > dt {
            return Vec::new();
        }
        if t_min == dt {
            return vec![(z_min, RevSide::Left)];
        }
        let mut roots = Vec::new();
        if let Some(z) = bisect(&excess, lo, z_min, false) {
            roots.push((z, RevSide::Left));
        }
        if let Some(z) = bisect(&excess, z_min, hi, true) {
            roots.push((z, RevSide::Right));
        }
        roots
    }
}

/// Bisection on `[lo, hi]` for a sign change of `f`. `increasing` tells which
/// end is negative; missing values (infinite time of flight at the interval
/// ends) count as positive.
fn bisect<T: Real>(f: &impl Fn(T) -> Option<T>, lo: T, hi: T, increasing: bool) -> Option<T> {
    let positive = |z: T| f(z).is_none_or(|v| v > T::zero());
    let (mut neg, mut pos) = if increasing { (lo, hi) } else { (hi, lo) };
    if positive(neg) {
        return None;
    }
    for _ in 0..400 {
        let mid = (neg + pos) / T::lit(2.0);
        if mid == neg || mid == pos {
            break;
        }
        if positive(mid) {
            pos = mid;
        } else {
            neg = mid;
        }
    }
    let (a, b) = (f(neg)?, f(pos));
    // the endpoint with the smaller residual
    Some(match b {
        Some(b) if b.abs() < a.abs() => pos,
        _ => neg,
    })
}

fn golden_min<T: Real>(geom: &Geometry<T>, lo: T, hi: T) -> Option<(T, T)> {
    let ratio = T::lit(0.618_033_988_749_894_9);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = geom.tof(x1)?;
    let mut f2 = geom.tof(x2)?;
    for _ in 0..200 {
        if b - a <= T::epsilon() * T::lit(4.0) * b {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = geom.tof(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = geom.tof(x2)?;
        }
    }
    Some(if f1 < f2 { (x1, f1) } else { (x2, f2) })
}

#[allow(clippy::too_many_arguments)]
fn build_solution<T: Real>(
    geom: &Geometry<T>,
    r0: Vec3<T>,
    r1: Vec3<T>,
    dt: T,
    mu: GravParam<T>,
    z: T,
    revs: u32,
    way: TransferWay,
    side: RevSide,
) -> Result<Option<LambertSolution<T>>, LambertError> {
    let Some(t) = geom.tof(z) else {
        return Ok(None);
    };
    // loose: near-degenerate geometries evaluate the time of flight noisily,
    // and the re-propagation below is the real check
    let tof_tol = (T::tolerance(1e-6) * dt).max(T::lit(1e-6));
    if (t - dt).abs() > tof_tol {
        return Ok(None);
    }
    let (c, s) = stumpff(z);
    let y = geom.y(z, c, s);
    let f = T::one() - y / geom.r1;
    let g = geom.a * (y / mu.mu()).sqrt();
    let gdot = T::one() - y / geom.r2;
    if g == T::zero() {
        return Ok(None);
    }
    let v_depart = (r1 - r0 * f) / g;
    let v_arrive = (r1 * gdot - r0) / g;

    let start = StateVector { r: r0, v: v_depart, t: T::zero() };
    let arc = match kepler::arc_from_state(&start, mu) {
        Ok(arc) => arc,
        Err(KeplerError::EccentricityOutOfRange(_)) => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let end = kepler::propagate_arc(&arc, dt)?;
    // along-track error from a velocity error grows by about 2π per orbit flown
    let orbits = dt / arc.period();
    if (end.r - r1).norm() > T::tolerance(CERTIFY_TOLERANCE) * (T::one() + T::two_pi() * orbits) * r1.norm() {
        return Ok(None);
    }
    Ok(Some(LambertSolution { v_depart, v_arrive, revs, way, side, z }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kepler::{propagate_time, EARTH_MU_KM3_S2};
    use crate::testing::rel_err;
    use std::f64::consts::TAU;

    fn mu() -> GravParam<f64> {
        GravParam::earth()
    }

    fn circular(radius: f64) -> StateVector<f64> {
        let v = (EARTH_MU_KM3_S2 / radius).sqrt();
        StateVector { r: Vec3::new(radius, 0.0, 0.0), v: Vec3::new(0.0, v * 0.8, v * 0.6), t: 0.0 }
    }

    #[test]
    fn stumpff_series_matches_closed_form_at_switch() {
        let z = 1.0f64;
        let (c, s) = stumpff(z - 1e-12);
        let sz = z.sqrt();
        assert!((c - (1.0 - sz.cos()) / z).abs() < 1e-12);
        assert!((s - (sz - sz.sin()) / (z * sz)).abs() < 1e-12);
        assert_eq!(stumpff(0.0f64), (0.5, 1.0 / 6.0));
    }

    #[test]
    fn quarter_period_on_circle() {
        let s = circular(7000.0);
        let period = TAU * (7000f64.powi(3) / EARTH_MU_KM3_S2).sqrt();
        let end = propagate_time(&s, period / 4.0, mu()).unwrap();
        let sols = solve_lambert(s.r, end.r, period / 4.0, mu(), 1).unwrap();
        let best = sols.iter().map(|x| rel_err(x.v_depart, s.v)).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-9, "{best}");
        let hit = sols.iter().find(|x| rel_err(x.v_depart, s.v) < 1e-9).unwrap();
        assert_eq!((hit.revs, hit.way, hit.side), (0, TransferWay::Short, RevSide::Single));
        assert!(rel_err(hit.v_arrive, end.v) < 1e-9);
    }

    #[test]
    fn exact_self_transfer_has_no_plane() {
        let s = circular(7000.0);
        let period = TAU * (7000f64.powi(3) / EARTH_MU_KM3_S2).sqrt();
        assert!(matches!(
            solve_lambert(s.r, s.r, period, mu(), 1),
            Err(LambertError::AmbiguousPlane { .. })
        ));
        let opposite = s.r * -1.2;
        assert!(matches!(
            solve_lambert(s.r, opposite, 2000.0, mu(), 1),
            Err(LambertError::AmbiguousPlane { .. })
        ));
    }

    #[test]
    fn slightly_more_than_one_period_recovers_one_rev_orbit() {
        let s = StateVector { r: Vec3::new(7100.0, 300.0, -50.0), v: Vec3::new(-0.3, 6.9, 2.4), t: 0.0 };
        let arc = kepler::arc_from_state(&s, mu()).unwrap();
        let dt = arc.period() * 1.02;
        let end = propagate_time(&s, dt, mu()).unwrap();
        let sols = solve_lambert(s.r, end.r, dt, mu(), 1).unwrap();
        let hit = sols.iter().find(|x| rel_err(x.v_depart, s.v) < 1e-6).expect("original orbit");
        assert_eq!(hit.revs, 1);
    }

    #[test]
    fn too_short_for_bound_arc_is_empty() {
        let r0 = Vec3::new(7000.0, 0.0, 0.0);
        let r1 = Vec3::new(0.0, 40_000.0, 0.0);
        assert!(solve_lambert(r0, r1, 60.0, mu(), 2).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_inputs() {
        let r0 = Vec3::new(7000.0, 0.0, 0.0);
        let r1 = Vec3::new(0.0, 7000.0, 0.0);
        assert!(matches!(solve_lambert(r0, r1, 0.0, mu(), 0), Err(LambertError::NonPositiveTime(_))));
        assert!(matches!(solve_lambert(Vec3::zeros(), r1, 10.0, mu(), 0), Err(LambertError::DegeneratePosition)));
    }

    #[test]
    fn raising_rev_cap_keeps_solutions() {
        let r0 = Vec3::new(7000.0, 0.0, 0.0);
        let r1 = Vec3::new(-2000.0, 6800.0, 900.0);
        let dt = 14_000.0;
        let mut prev = 0;
        for cap in 0..4 {
            let n = solve_lambert(r0, r1, dt, mu(), cap).unwrap().len();
            assert!(n >= prev);
            prev = n;
        }
        assert!(prev > 2, "multi-rev solutions expected, got {prev}");
    }

    #[test]
    fn time_reversal_mirrors_solutions() {
        let r0 = Vec3::new(7000.0, 100.0, 0.0);
        let r1 = Vec3::new(-3000.0, 6500.0, 1500.0);
        let dt = 3000.0;
        let fwd = solve_lambert(r0, r1, dt, mu(), 1).unwrap();
        let back = solve_lambert(r1, r0, dt, mu(), 1).unwrap();
        assert_eq!(fwd.len(), back.len());
        for f in &fwd {
            let mirrored = back
                .iter()
                .any(|b| rel_err(b.v_depart, -f.v_arrive) < 1e-8 && rel_err(b.v_arrive, -f.v_depart) < 1e-8);
            assert!(mirrored, "no mirror for {f:?}");
        }
    }

    #[test]
    fn works_in_single_precision() {
        let s = StateVector::<f32> {
            r: Vec3::new(7000.0, 0.0, 0.0),
            v: Vec3::new(0.0, 7.546, 0.0),
            t: 0.0,
        };
        let end = propagate_time(&s, 1200.0, GravParam::earth()).unwrap();
        let sols = solve_lambert(s.r, end.r, 1200.0, GravParam::earth(), 0).unwrap();
        assert!(sols.iter().any(|x| (x.v_depart - s.v).norm() < 1e-3));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn recovers_propagated_velocity(
            rx in 6600.0..20_000.0f64, vy in 5.0..8.5f64, vz in -3.0..3.0f64, vx in -1.0..1.0f64,
            frac in 0.05..2.5f64,
        ) {
            let s = StateVector { r: Vec3::new(rx, 0.0, 0.0), v: Vec3::new(vx, vy, vz), t: 0.0 };
            let Ok(arc) = kepler::arc_from_state(&s, mu()) else { return Ok(()) };
            let dt = frac * arc.period();
            let end = propagate_time(&s, dt, mu()).unwrap();
            match solve_lambert(s.r, end.r, dt, mu(), 3) {
                Ok(sols) => {
                    let hit = sols.iter().find(|x| rel_err(x.v_depart, s.v) < 1e-6);
                    proptest::prop_assert!(hit.is_some(), "no match among {}", sols.len());
                    proptest::prop_assert_eq!(hit.unwrap().revs, frac.floor() as u32);
                }
                Err(LambertError::AmbiguousPlane { .. }) => {}
                Err(e) => proptest::prop_assert!(false, "{e}"),
            }
        }
    }
}
