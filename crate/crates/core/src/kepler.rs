//! Exact two-body propagation.
//!
//! States are propagated along bound conics with the Lagrange coefficients
//! written in terms of the true-anomaly difference `θ = f − f₀`:
//!
//! ```text
//! F  = 1 − (r/p)(1 − cos θ)          G  = r r₀ sin θ / √(μ p)
//! Ḟ  = √μ/(r₀ p) [σ₀(1 − cos θ) − √p sin θ]
//! Ġ  = 1 − (r₀/p)(1 − cos θ)
//! ```
//!
//! with `p = |r × v|²/μ` and `σ₀ = r₀·v₀/√μ`. Time enters through the eccentric
//! and mean anomalies (Kepler's equation). Anomalies are kept unwrapped so that
//! time of flight stays monotone across revolutions.
//!
//! Units are km, s and km/s throughout.

use thiserror::Error;

use crate::real::Real;
use crate::vec3::Vec3;

/// Earth's gravitational parameter, km³/s².
pub const EARTH_MU_KM3_S2: f64 = 398_600.441_8;

/// Newton iteration cap for Kepler's equation before falling back to bisection.
pub const KEPLER_MAX_ITER: usize = 50;

/// Below this eccentricity the apsis direction is treated as undefined and the
/// true anomaly is measured from the epoch position.
pub const NEAR_CIRCULAR_ECC: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KeplerError {
    #[error("eccentricity {0} outside the bound range [0, 1)")]
    EccentricityOutOfRange(f64),
    #[error("Kepler's equation did not converge for M = {mean_anomaly}, e = {eccentricity}")]
    NoConvergence { mean_anomaly: f64, eccentricity: f64 },
    #[error("semimajor axis must be positive, got {0} km")]
    NonPositiveSemimajorAxis(f64),
    #[error("gravitational parameter must be positive and finite, got {0}")]
    InvalidGravParam(f64),
    #[error("state vector is non-finite or at the attracting centre")]
    DegenerateState,
    #[error("negative propagation interval {0} s")]
    NegativeInterval(f64),
    #[error("non-finite anomaly {0}")]
    NonFiniteAnomaly(f64),
}

pub type KeplerResult<T> = Result<T, KeplerError>;

/// Gravitational parameter μ in km³/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravParam<T>(T);

impl<T: Real> GravParam<T> {
    pub fn new(mu: T) -> KeplerResult<Self> {
        if mu.is_finite() && mu > T::zero() {
            Ok(Self(mu))
        } else {
            Err(KeplerError::InvalidGravParam(mu.as_f64()))
        }
    }

    pub fn earth() -> Self {
        Self(T::lit(EARTH_MU_KM3_S2))
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.0
    }
}

impl<T: Real> Default for GravParam<T> {
    fn default() -> Self {
        Self::earth()
    }
}

/// Position (km) and velocity (km/s) of a body at epoch `t` (s past the
/// scenario origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T> {
    pub r: Vec3<T>,
    pub v: Vec3<T>,
    pub t: T,
}

impl<T: Real> StateVector<T> {
    pub fn new(r: Vec3<T>, v: Vec3<T>, t: T) -> KeplerResult<Self> {
        let s = Self { r, v, t };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> KeplerResult<()> {
        if !self.r.is_finite() || !self.v.is_finite() || !self.t.is_finite() {
            return Err(KeplerError::DegenerateState);
        }
        if self.r.norm() <= T::zero() {
            return Err(KeplerError::DegenerateState);
        }
        Ok(())
    }

    /// Specific orbital energy `|v|²/2 − μ/|r|`.
    pub fn energy(&self, mu: GravParam<T>) -> T {
        self.v.norm_squared() / T::lit(2.0) - mu.mu() / self.r.norm()
    }

    pub fn angular_momentum(&self) -> Vec3<T> {
        self.r.cross(&self.v)
    }

    pub fn radius(&self) -> T {
        self.r.norm()
    }

    pub fn speed(&self) -> T {
        self.v.norm()
    }

    pub fn with_velocity(&self, v: Vec3<T>) -> Self {
        Self { v, ..*self }
    }
}

/// Conic descriptor of a bound ballistic arc, anchored at the state it was
/// derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallisticArc<T> {
    /// Semimajor axis, km.
    pub a: T,
    pub e: T,
    /// Parameter `a(1 − e²)`, km.
    pub p: T,
    /// `r₀·v₀/√μ`.
    pub sigma0: T,
    /// True anomaly at the epoch state, rad.
    pub f0: T,
    /// Eccentric anomaly at the epoch state, rad.
    pub ecc_anom0: T,
    /// Time of pericenter passage, s.
    pub tau: T,
    pub epoch_state: StateVector<T>,
    pub mu: GravParam<T>,
}

/// Lagrange state-transition coefficients for one anomaly step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeCoefficients<T> {
    pub f: T,
    pub g: T,
    pub ft: T,
    pub gt: T,
}

impl<T: Real> LagrangeCoefficients<T> {
    /// `F·Ġ − Ḟ·G`, which is identically one for two-body motion.
    pub fn wronskian(&self) -> T {
        self.f * self.gt - self.ft * self.g
    }

    pub fn apply(&self, r0: Vec3<T>, v0: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
        (r0 * self.f + v0 * self.g, r0 * self.ft + v0 * self.gt)
    }
}

/// `1 − cos θ` without cancellation near zero.
#[inline]
fn one_minus_cos<T: Real>(theta: T) -> T {
    let s = (theta / T::lit(2.0)).sin();
    T::lit(2.0) * s * s
}

fn check_ecc<T: Real>(e: T) -> KeplerResult<()> {
    if e.is_finite() && e >= T::zero() && e < T::one() {
        Ok(())
    } else {
        Err(KeplerError::EccentricityOutOfRange(e.as_f64()))
    }
}

/// Solves `M = E − e sin E` for the eccentric anomaly.
///
/// The result lies in the same 2π branch as `M`. Newton iteration from
/// `E = M + e sin M` is tried first; bisection on `[M − e, M + e]` takes over
/// if Newton stalls.
pub fn solve_kepler<T: Real>(mean_anomaly: T, e: T) -> KeplerResult<T> {
    check_ecc(e)?;
    if !mean_anomaly.is_finite() {
        return Err(KeplerError::NonFiniteAnomaly(mean_anomaly.as_f64()));
    }
    let two_pi = T::two_pi();
    let branch = (mean_anomaly / two_pi).floor();
    let m = mean_anomaly - branch * two_pi;
    if e == T::zero() {
        return Ok(mean_anomaly);
    }

    let tol = T::tolerance(1e-12);
    let step_tol = T::epsilon() * T::lit(4.0);
    let residual = |ea: T| ea - e * ea.sin() - m;
    let (lo, hi) = (m - e, m + e);

    let mut ea = m + e * m.sin();
    let mut converged = false;
    for _ in 0..KEPLER_MAX_ITER {
        let f = residual(ea);
        let fp = T::one() - e * ea.cos();
        let step = f / fp;
        ea -= step;
        if !ea.is_finite() || ea < lo || ea > hi {
            break;
        }
        if step.abs() <= step_tol * (T::one() + ea.abs()) {
            converged = true;
            break;
        }
    }
    if !(converged && residual(ea).abs() < tol) {
        // g(E) = E − e sin E − M is increasing with g(M − e) ≤ 0 ≤ g(M + e).
        let (mut a, mut b) = (lo, hi);
        for _ in 0..KEPLER_MAX_ITER + 20 {
            let mid = (a + b) / T::lit(2.0);
            if residual(mid) > T::zero() {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= step_tol * (T::one() + a.abs()) {
                break;
            }
        }
        ea = (a + b) / T::lit(2.0);
        if residual(ea).abs() >= tol {
            return Err(KeplerError::NoConvergence {
                mean_anomaly: mean_anomaly.as_f64(),
                eccentricity: e.as_f64(),
            });
        }
    }
    Ok(ea + branch * two_pi)
}

/// Converts an (unwrapped) eccentric anomaly to the true anomaly on the same
/// revolution. `f/2` and `E/2` share a quadrant.
pub fn true_from_eccentric<T: Real>(ecc_anom: T, e: T) -> KeplerResult<T> {
    check_ecc(e)?;
    half_angle_map(ecc_anom, (T::one() + e).sqrt(), (T::one() - e).sqrt())
}

/// Inverse of [`true_from_eccentric`].
pub fn eccentric_from_true<T: Real>(true_anom: T, e: T) -> KeplerResult<T> {
    check_ecc(e)?;
    half_angle_map(true_anom, (T::one() - e).sqrt(), (T::one() + e).sqrt())
}

// tan(out/2) = (num/den) tan(in/2), keeping out/2 in the quadrant of in/2.
fn half_angle_map<T: Real>(angle: T, num: T, den: T) -> KeplerResult<T> {
    if !angle.is_finite() {
        return Err(KeplerError::NonFiniteAnomaly(angle.as_f64()));
    }
    let two_pi = T::two_pi();
    let k = (angle / two_pi).round();
    let half = (angle - k * two_pi) / T::lit(2.0);
    let mapped = (num * half.sin()).atan2(den * half.cos());
    Ok(T::lit(2.0) * mapped + k * two_pi)
}

/// Mean motion `√(μ/a³)`, rad/s.
pub fn mean_motion<T: Real>(a: T, mu: GravParam<T>) -> KeplerResult<T> {
    if !(a.is_finite() && a > T::zero()) {
        return Err(KeplerError::NonPositiveSemimajorAxis(a.as_f64()));
    }
    Ok((mu.mu() / (a * a * a)).sqrt())
}

/// Time between eccentric anomalies `e1` and `e2` on `arc`.
pub fn time_of_flight<T: Real>(arc: &BallisticArc<T>, e1: T, e2: T) -> T {
    let scale = (arc.a * arc.a * arc.a / arc.mu.mu()).sqrt();
    scale * ((e2 - e1) - arc.e * (e2.sin() - e1.sin()))
}

/// Classical elements of the bound conic through `s`.
pub fn arc_from_state<T: Real>(s: &StateVector<T>, mu: GravParam<T>) -> KeplerResult<BallisticArc<T>> {
    s.validate()?;
    let m = mu.mu();
    let r = s.r.norm();
    let inv_a = T::lit(2.0) / r - s.v.norm_squared() / m;
    let h = s.r.cross(&s.v);
    let p = h.norm_squared() / m;
    let sigma0 = s.r.dot(&s.v) / m.sqrt();

    let e_cos = p / r - T::one();
    let e_sin = sigma0 * p.sqrt() / r;
    let e = e_cos.hypot(e_sin);
    if !(inv_a > T::zero()) || !(e < T::one()) {
        return Err(KeplerError::EccentricityOutOfRange(if inv_a > T::zero() {
            e.as_f64()
        } else {
            e.max(T::one()).as_f64()
        }));
    }
    let a = T::one() / inv_a;
    let f0 = if e < T::lit(NEAR_CIRCULAR_ECC) {
        T::zero()
    } else {
        e_sin.atan2(e_cos)
    };
    let ecc_anom0 = eccentric_from_true(f0, e)?;
    let n = mean_motion(a, mu)?;
    let tau = s.t - (ecc_anom0 - e * ecc_anom0.sin()) / n;
    Ok(BallisticArc {
        a,
        e,
        p,
        sigma0,
        f0,
        ecc_anom0,
        tau,
        epoch_state: *s,
        mu,
    })
}

impl<T: Real> BallisticArc<T> {
    pub fn mean_motion(&self) -> T {
        (self.mu.mu() / (self.a * self.a * self.a)).sqrt()
    }

    pub fn period(&self) -> T {
        T::two_pi() / self.mean_motion()
    }

    pub fn periapsis_radius(&self) -> T {
        self.a * (T::one() - self.e)
    }

    pub fn apoapsis_radius(&self) -> T {
        self.a * (T::one() + self.e)
    }

    /// Conic radius at (absolute) true anomaly `f`.
    pub fn radius_at_true(&self, f: T) -> T {
        self.p / (T::one() + self.e * f.cos())
    }

    /// Unwrapped mean anomaly at time `t`.
    pub fn mean_anomaly_at(&self, t: T) -> T {
        let m0 = self.ecc_anom0 - self.e * self.ecc_anom0.sin();
        m0 + self.mean_motion() * (t - self.epoch_state.t)
    }

    /// Lagrange coefficients for a true-anomaly step `theta`; the radius is
    /// taken from the conic at `f₀ + θ`.
    pub fn lagrange(&self, theta: T) -> LagrangeCoefficients<T> {
        let r = self.radius_at_true(self.f0 + theta);
        self.lagrange_with_radius(theta, r)
    }

    fn lagrange_with_radius(&self, theta: T, r: T) -> LagrangeCoefficients<T> {
        let mu = self.mu.mu();
        let r0 = self.epoch_state.r.norm();
        let omc = one_minus_cos(theta);
        let (sin_t, sqrt_p) = (theta.sin(), self.p.sqrt());
        LagrangeCoefficients {
            f: T::one() - r / self.p * omc,
            g: r * r0 * sin_t / (mu * self.p).sqrt(),
            ft: mu.sqrt() / (r0 * self.p) * (self.sigma0 * omc - sqrt_p * sin_t),
            gt: T::one() - r0 / self.p * omc,
        }
    }

    /// Smallest orbital radius reached between times `t_a ≤ t_b`.
    pub fn min_radius_between(&self, t_a: T, t_b: T) -> KeplerResult<T> {
        let two_pi = T::two_pi();
        let (ma, mb) = (self.mean_anomaly_at(t_a), self.mean_anomaly_at(t_b));
        let crosses = (mb / two_pi).floor() > (ma / two_pi).floor() || (ma / two_pi).fract() == T::zero();
        if crosses && self.e > T::zero() {
            return Ok(self.periapsis_radius());
        }
        let radius = |m: T| -> KeplerResult<T> {
            let ea = solve_kepler(m, self.e)?;
            Ok(self.a * (T::one() - self.e * ea.cos()))
        };
        Ok(radius(ma)?.min(radius(mb)?))
    }
}

/// Propagates `s0` through a true-anomaly step `theta` using the Lagrange
/// coefficients; the epoch advances by the matching time of flight.
pub fn propagate_theta<T: Real>(s0: &StateVector<T>, theta: T, mu: GravParam<T>) -> KeplerResult<StateVector<T>> {
    if !theta.is_finite() {
        return Err(KeplerError::NonFiniteAnomaly(theta.as_f64()));
    }
    let arc = arc_from_state(s0, mu)?;
    if theta == T::zero() {
        return Ok(*s0);
    }
    let coeffs = arc.lagrange(theta);
    let ecc_anom = eccentric_from_true(arc.f0 + theta, arc.e)?;
    let dt = time_of_flight(&arc, arc.ecc_anom0, ecc_anom);
    let (r, v) = coeffs.apply(s0.r, s0.v);
    Ok(StateVector { r, v, t: s0.t + dt })
}

/// Propagates `s0` forward by `dt` seconds along its ballistic arc.
pub fn propagate_time<T: Real>(s0: &StateVector<T>, dt: T, mu: GravParam<T>) -> KeplerResult<StateVector<T>> {
    let arc = arc_from_state(s0, mu)?;
    propagate_arc(&arc, dt)
}

/// Same as [`propagate_time`] for an arc whose elements are already known.
pub fn propagate_arc<T: Real>(arc: &BallisticArc<T>, dt: T) -> KeplerResult<StateVector<T>> {
    let s0 = &arc.epoch_state;
    if !dt.is_finite() || dt < T::zero() {
        return Err(KeplerError::NegativeInterval(dt.as_f64()));
    }
    if dt == T::zero() {
        return Ok(*s0);
    }
    let m = arc.mean_anomaly_at(s0.t + dt);
    let ecc_anom = solve_kepler(m, arc.e)?;
    let f = true_from_eccentric(ecc_anom, arc.e)?;
    let r = arc.a * (T::one() - arc.e * ecc_anom.cos());
    let coeffs = arc.lagrange_with_radius(f - arc.f0, r);
    let (r, v) = coeffs.apply(s0.r, s0.v);
    Ok(StateVector { r, v, t: s0.t + dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{rk_propagate, rel_err};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    const MU: f64 = EARTH_MU_KM3_S2;

    fn mu() -> GravParam<f64> {
        GravParam::earth()
    }

    fn circular(radius: f64) -> StateVector<f64> {
        let v = (MU / radius).sqrt();
        StateVector::new(Vec3::new(radius, 0.0, 0.0), Vec3::new(0.0, v, 0.0), 0.0).unwrap()
    }

    /// Pericenter state of an ellipse with the given a, e in a tilted plane.
    fn ellipse_at_pericenter(a: f64, e: f64) -> StateVector<f64> {
        let rp = a * (1.0 - e);
        let vp = (MU * (1.0 + e) / rp).sqrt();
        let (ci, si) = (0.4f64.cos(), 0.4f64.sin());
        StateVector::new(Vec3::new(rp, 0.0, 0.0), Vec3::new(0.0, vp * ci, vp * si), 0.0).unwrap()
    }

    // bisection oracle, independent of the Newton path
    fn kepler_bisect(m: f64, e: f64) -> f64 {
        let (mut a, mut b) = (0.0, TAU);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid - e * mid.sin() - m > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn kepler_trivial_cases() {
        assert_eq!(solve_kepler(0.0, 0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(solve_kepler(PI, 0.3).unwrap(), PI, epsilon = 1e-14);
    }

    #[test]
    fn kepler_matches_bisection_oracle() {
        let oracle = kepler_bisect(1.0, 0.1);
        assert_abs_diff_eq!(oracle, 1.088_597_752_397_378, epsilon = 1e-12);
        assert_abs_diff_eq!(solve_kepler(1.0, 0.1).unwrap(), oracle, epsilon = 1e-12);
    }

    #[test]
    fn kepler_residual_grid() {
        for ei in 0..10 {
            let e = ei as f64 / 10.0;
            for k in 0..720 {
                let m = TAU * k as f64 / 720.0;
                let ea = solve_kepler(m, e).unwrap();
                assert!((ea - e * ea.sin() - m).abs() < 1e-12, "M={m} e={e}");
            }
        }
    }

    #[test]
    fn kepler_keeps_revolution_branch() {
        let e = 0.4;
        let m = 3.0 * TAU + 0.7;
        let ea = solve_kepler(m, e).unwrap();
        assert!((ea - e * ea.sin() - m).abs() < 1e-12);
        assert!(ea > 3.0 * TAU && ea < 4.0 * TAU);
        let neg = solve_kepler(-0.7, e).unwrap();
        assert!((neg - e * neg.sin() + 0.7).abs() < 1e-12);
        assert!(neg < 0.0 && neg > -TAU);
    }

    #[test]
    fn kepler_rejects_unbound_eccentricity() {
        assert!(matches!(solve_kepler(1.0, 1.0), Err(KeplerError::EccentricityOutOfRange(_))));
        assert!(matches!(solve_kepler(1.0, -0.1), Err(KeplerError::EccentricityOutOfRange(_))));
    }

    #[test]
    fn kepler_high_eccentricity_still_converges() {
        for &e in &[0.95, 0.99, 0.999_999] {
            for k in 0..64 {
                let m = TAU * k as f64 / 64.0 + 1e-3;
                let ea = solve_kepler(m, e).unwrap();
                assert!((ea - e * ea.sin() - m).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kepler_f32_variant() {
        let ea: f32 = solve_kepler(1.0f32, 0.1).unwrap();
        assert!((ea - 1.088_597_8).abs() < 1e-5);
    }

    #[test]
    fn anomaly_conversion_cases() {
        assert_eq!(true_from_eccentric(0.0, 0.7).unwrap(), 0.0);
        assert_abs_diff_eq!(true_from_eccentric(PI, 0.7).unwrap(), PI, epsilon = 1e-12);
        let f = true_from_eccentric(FRAC_PI_2, 0.5).unwrap();
        let direct = 2.0 * (3f64.sqrt() * (PI / 4.0).tan()).atan();
        assert_abs_diff_eq!(f, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(f, 2.094_395_102_393_195, epsilon = 1e-12);
        assert_abs_diff_eq!(eccentric_from_true(f, 0.5).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn anomaly_quadrants_agree() {
        for &e in &[0.0, 0.3, 0.9] {
            for k in -40..40 {
                let ea = 0.173 * k as f64;
                let f = true_from_eccentric(ea, e).unwrap();
                let quadrant = |x: f64| ((x / 2.0).rem_euclid(TAU) / FRAC_PI_2).floor() as i32;
                assert_eq!(quadrant(f), quadrant(ea), "E={ea} e={e}");
                assert!((eccentric_from_true(f, e).unwrap() - ea).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mean_motion_cases() {
        let geo = mean_motion(42_164.17, mu()).unwrap();
        assert_abs_diff_eq!(geo, 7.2921e-5, epsilon = 5e-9);
        assert_abs_diff_eq!(TAU / geo, 86_164.0, epsilon = 1.0);
        let n = mean_motion(7238.0, mu()).unwrap();
        assert_abs_diff_eq!(n / mean_motion(4.0 * 7238.0, mu()).unwrap(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(n, 1.0252e-3, epsilon = 1e-7);
        // full-period propagation oracle
        let s = circular(7238.0);
        let back = propagate_time(&s, TAU / n, mu()).unwrap();
        assert!(rel_err(back.r, s.r) < 1e-12);
        assert!(mean_motion(0.0, mu()).is_err());
        assert!(mean_motion(-1.0, mu()).is_err());
    }

    #[test]
    fn time_of_flight_cases() {
        let arc = arc_from_state(&circular(7000.0), mu()).unwrap();
        assert_eq!(time_of_flight(&arc, 0.3, 0.3), 0.0);
        let period = TAU * (7000f64.powi(3) / MU).sqrt();
        assert_abs_diff_eq!(time_of_flight(&arc, 0.0, TAU), period, epsilon = 1e-9);

        // Simpson quadrature of dt/dE = (a³/μ)^½ (1 − e cos E)
        let arc = arc_from_state(&ellipse_at_pericenter(7238.0, 0.1), mu()).unwrap();
        let scale = (7238f64.powi(3) / MU).sqrt();
        let n = 2000;
        let h = FRAC_PI_2 / n as f64;
        let integrand = |ea: f64| scale * (1.0 - 0.1 * ea.cos());
        let mut quad = integrand(0.0) + integrand(FRAC_PI_2);
        for i in 1..n {
            quad += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        quad *= h / 3.0;
        assert_abs_diff_eq!(time_of_flight(&arc, 0.0, FRAC_PI_2), quad, epsilon = 1e-9);
        // additivity
        let a = time_of_flight(&arc, 0.2, 1.1) + time_of_flight(&arc, 1.1, 7.5);
        assert_abs_diff_eq!(a, time_of_flight(&arc, 0.2, 7.5), epsilon = 1e-9);
    }

    #[test]
    fn arc_from_circular_state() {
        let arc = arc_from_state(&circular(7238.0), mu()).unwrap();
        assert!(arc.e < 1e-12);
        assert_abs_diff_eq!(arc.sigma0, 0.0, epsilon = 1e-12);
        assert!((arc.a - 7238.0).abs() < 1e-8);
    }

    #[test]
    fn arc_from_pericenter_state() {
        let arc = arc_from_state(&ellipse_at_pericenter(9000.0, 0.3), mu()).unwrap();
        assert_abs_diff_eq!(arc.f0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(arc.sigma0, 0.0, epsilon = 1e-12);
        assert!((arc.e - 0.3).abs() < 1e-12);
        assert!((arc.a - 9000.0).abs() < 1e-8);
        assert!((arc.p - arc.a * (1.0 - arc.e * arc.e)).abs() < 1e-12 * arc.p);
    }

    #[test]
    fn arc_rejects_unbound_states() {
        let r = 7000.0;
        let s = StateVector::new(Vec3::new(r, 0.0, 0.0), Vec3::new(0.0, (2.0 * MU / r).sqrt() * 1.01, 0.0), 0.0).unwrap();
        assert!(matches!(arc_from_state(&s, mu()), Err(KeplerError::EccentricityOutOfRange(_))));
        assert!(StateVector::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn generic_state_elements_reproduce_state() {
        let s = StateVector::new(Vec3::new(6800.0, 1200.0, -300.0), Vec3::new(-1.1, 7.2, 1.9), 10.0).unwrap();
        let arc = arc_from_state(&s, mu()).unwrap();
        assert!((arc.p - arc.a * (1.0 - arc.e * arc.e)).abs() < 1e-12 * arc.p);
        // position radius from the conic equation at f0 equals |r|
        assert!((arc.radius_at_true(arc.f0) - s.r.norm()).abs() < 1e-9 * s.r.norm());
        // one full period brings the same elements back to the same state
        let back = propagate_arc(&arc, arc.period()).unwrap();
        assert!(rel_err(back.r, s.r) < 1e-9);
        assert!(rel_err(back.v, s.v) < 1e-9);
        // pericenter passage time is consistent with the mean anomaly
        let m = arc.mean_motion() * (s.t - arc.tau);
        assert_abs_diff_eq!(m, arc.ecc_anom0 - arc.e * arc.ecc_anom0.sin(), epsilon = 1e-12);
    }

    #[test]
    fn theta_zero_is_identity() {
        let s = ellipse_at_pericenter(8000.0, 0.2);
        let arc = arc_from_state(&s, mu()).unwrap();
        let c = arc.lagrange(0.0);
        assert_eq!((c.f, c.g, c.ft, c.gt), (1.0, 0.0, 0.0, 1.0));
        assert_eq!(propagate_theta(&s, 0.0, mu()).unwrap(), s);
    }

    #[test]
    fn circular_quarter_turn() {
        let s = circular(7238.0);
        let q = propagate_theta(&s, FRAC_PI_2, mu()).unwrap();
        assert!((q.r.norm() - 7238.0).abs() < 1e-9);
        assert!((q.v.norm() - s.v.norm()).abs() < 1e-12);
        assert!(q.r.dot(&s.r).abs() < 1e-12 * 7238.0 * 7238.0);
        assert!(q.r.y > 0.0);
        let period = TAU * (7238f64.powi(3) / MU).sqrt();
        assert_abs_diff_eq!(q.t, period / 4.0, epsilon = 1e-9);
    }

    #[test]
    fn propagate_theta_matches_integration_oracle() {
        let s = ellipse_at_pericenter(8000.0, 0.2);
        let out = propagate_theta(&s, 1.0, mu()).unwrap();
        let oracle = rk_propagate(&s, out.t - s.t, MU, |_| Vec3::zeros(), 0.05);
        assert!(rel_err(out.r, oracle.r) < 1e-8, "{}", rel_err(out.r, oracle.r));
        assert!(rel_err(out.v, oracle.v) < 1e-8);
    }

    #[test]
    fn propagate_time_matches_integration_oracle() {
        let mut s = ellipse_at_pericenter(7238.0, 0.1);
        s = propagate_theta(&s, 0.8, mu()).unwrap();
        let out = propagate_time(&s, 600.0, mu()).unwrap();
        let oracle = rk_propagate(&s, 600.0, MU, |_| Vec3::zeros(), 0.05);
        assert!(rel_err(out.r, oracle.r) < 1e-9);
        assert!(rel_err(out.v, oracle.v) < 1e-9);
        assert_abs_diff_eq!(out.t, s.t + 600.0, epsilon = 1e-12);
    }

    #[test]
    fn propagate_time_edge_cases() {
        let s = circular(7000.0);
        assert_eq!(propagate_time(&s, 0.0, mu()).unwrap(), s);
        assert!(matches!(propagate_time(&s, -1.0, mu()), Err(KeplerError::NegativeInterval(_))));
        let period = TAU * (7000f64.powi(3) / MU).sqrt();
        let back = propagate_time(&s, period, mu()).unwrap();
        assert!(rel_err(back.r, s.r) < 1e-9 && rel_err(back.v, s.v) < 1e-9);
    }

    #[test]
    fn wronskian_is_one() {
        let s = StateVector::new(Vec3::new(7000.0, -500.0, 900.0), Vec3::new(0.9, 7.6, 1.1), 0.0).unwrap();
        let arc = arc_from_state(&s, mu()).unwrap();
        for k in 0..360 {
            let c = arc.lagrange(TAU * k as f64 / 360.0);
            assert!((c.wronskian() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn min_radius_detects_pericenter() {
        let s = ellipse_at_pericenter(9000.0, 0.2);
        let later = propagate_time(&s, 300.0, mu()).unwrap();
        let arc = arc_from_state(&later, mu()).unwrap();
        let period = arc.period();
        // interval crossing pericenter
        let rp = arc.min_radius_between(later.t, later.t + period * 0.99).unwrap();
        assert!((rp - 7200.0).abs() < 1e-8);
        // short interval on the outbound leg: the start radius is the minimum
        let rmin = arc.min_radius_between(later.t, later.t + 100.0).unwrap();
        assert!((rmin - later.r.norm()).abs() < 1e-8);
    }

    #[test]
    fn gravparam_validation() {
        assert!(GravParam::new(0.0).is_err());
        assert!(GravParam::new(f64::NAN).is_err());
        assert_eq!(GravParam::<f64>::default().mu(), MU);
    }
}
