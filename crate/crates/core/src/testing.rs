//! Independent oracles for unit tests.

use crate::kepler::StateVector;
use crate::vec3::Vec3;

pub fn rel_err(a: Vec3<f64>, b: Vec3<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Classical RK4 on r̈ = −μ r/|r|³ + accel(t), fixed step (the last step is
/// shortened to land on `dt`).
pub fn rk_propagate(
    s: &StateVector<f64>,
    dt: f64,
    mu: f64,
    accel: impl Fn(f64) -> Vec3<f64>,
    step: f64,
) -> StateVector<f64> {
    let deriv = |t: f64, r: Vec3<f64>, v: Vec3<f64>| {
        let rn = r.norm();
        (v, r * (-mu / (rn * rn * rn)) + accel(t))
    };
    let (mut r, mut v, mut t) = (s.r, s.v, s.t);
    let end = s.t + dt;
    let n = (dt / step).ceil().max(1.0) as usize;
    let h = dt / n as f64;
    for i in 0..n {
        let t0 = s.t + h * i as f64;
        let (k1r, k1v) = deriv(t0, r, v);
        let (k2r, k2v) = deriv(t0 + h / 2.0, r + k1r * (h / 2.0), v + k1v * (h / 2.0));
        let (k3r, k3v) = deriv(t0 + h / 2.0, r + k2r * (h / 2.0), v + k2v * (h / 2.0));
        let (k4r, k4v) = deriv(t0 + h, r + k3r * h, v + k3v * h);
        r += (k1r + k2r * 2.0 + k3r * 2.0 + k4r) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        t = t0 + h;
    }
    debug_assert!((t - end).abs() < 1e-6);
    StateVector { r, v, t: end }
}
