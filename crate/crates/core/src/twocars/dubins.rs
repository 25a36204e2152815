//! Shortest bounded-curvature paths between planar poses.
//!
//! Standard six-word enumeration (LSL, RSR, LSR, RSL, RLR, LRL) in normalised
//! coordinates. Each candidate is flown with the exact arc map and kept only if
//! it lands on the goal pose, so a bad closed form can never be returned.

use crate::real::Real;

use super::{advance, CarState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Turn {
    Left,
    Straight,
    Right,
}

/// Three segments of a Dubins path, each a turn direction and a length in
/// metres along the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath<T> {
    pub segments: [(Turn, T); 3],
    /// Turn radius, m.
    pub rho: T,
}

impl<T: Real> DubinsPath<T> {
    pub fn length(&self) -> T {
        self.segments.iter().map(|s| s.1).sum()
    }

    /// Heading rate of each segment at speed `v` (compass headings: a left
    /// turn decreases θ).
    pub fn rates(&self, v: T) -> [(T, T); 3] {
        self.segments.map(|(turn, len)| {
            let omega = v / self.rho;
            let rate = match turn {
                Turn::Left => -omega,
                Turn::Straight => T::zero(),
                Turn::Right => omega,
            };
            (len / v, rate)
        })
    }

    /// Pose after flying the path from `start` at speed `v`.
    pub fn endpoint(&self, start: &CarState<T>, v: T) -> CarState<T> {
        self.rates(v).iter().fold(*start, |s, &(dt, rate)| advance(&s, v, rate, dt))
    }
}

fn mod2pi<T: Real>(a: T) -> T {
    let tau = T::two_pi();
    let r = a % tau;
    if r < T::zero() { r + tau } else { r }
}

/// Shortest path from `from` to `to` with turn radius `rho`.
pub fn shortest_path<T: Real>(from: &CarState<T>, to: &CarState<T>, rho: T) -> Option<DubinsPath<T>> {
    let half_pi = T::FRAC_PI_2();
    // math-convention headings
    let (phi0, phi1) = (half_pi - from.theta, half_pi - to.theta);
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let d = dx.hypot(dy) / rho;
    let base = if d > T::zero() { dy.atan2(dx) } else { T::zero() };
    let a = mod2pi(phi0 - base);
    let b = mod2pi(phi1 - base);
    let (sa, ca, sb, cb) = (a.sin(), a.cos(), b.sin(), b.cos());
    let cab = (a - b).cos();
    let two = T::lit(2.0);
    // tangent words with a zero-length straight come out marginally negative
    let slack = T::tolerance(1e-10);

    use Turn::*;
    let mut candidates: Vec<([Turn; 3], [T; 3])> = Vec::with_capacity(6);

    let p2 = two + d * d - two * cab + two * d * (sa - sb);
    if p2 >= -slack {
        let tmp = (cb - ca).atan2(d + sa - sb);
        candidates.push(([Left, Straight, Left], [mod2pi(tmp - a), p2.max(T::zero()).sqrt(), mod2pi(b - tmp)]));
    }
    let p2 = two + d * d - two * cab + two * d * (sb - sa);
    if p2 >= -slack {
        let tmp = (ca - cb).atan2(d - sa + sb);
        candidates.push(([Right, Straight, Right], [mod2pi(a - tmp), p2.max(T::zero()).sqrt(), mod2pi(tmp - b)]));
    }
    let p2 = -two + d * d + two * cab + two * d * (sa + sb);
    if p2 >= -slack {
        let p = p2.max(T::zero()).sqrt();
        let tmp = (-ca - cb).atan2(d + sa + sb) - (-two).atan2(p);
        candidates.push(([Left, Straight, Right], [mod2pi(tmp - a), p, mod2pi(tmp - b)]));
    }
    let p2 = d * d - two + two * cab - two * d * (sa + sb);
    if p2 >= -slack {
        let p = p2.max(T::zero()).sqrt();
        let tmp = (ca + cb).atan2(d - sa - sb) - two.atan2(p);
        candidates.push(([Right, Straight, Left], [mod2pi(a - tmp), p, mod2pi(b - tmp)]));
    }
    let c = (T::lit(6.0) - d * d + two * cab + two * d * (sa - sb)) / T::lit(8.0);
    if c.abs() <= T::one() + slack {
        let p = mod2pi(T::two_pi() - c.max(-T::one()).min(T::one()).acos());
        let t = mod2pi(a - (ca - cb).atan2(d - sa + sb) + p / two);
        candidates.push(([Right, Left, Right], [t, p, mod2pi(a - b - t + p)]));
    }
    let c = (T::lit(6.0) - d * d + two * cab + two * d * (sb - sa)) / T::lit(8.0);
    if c.abs() <= T::one() + slack {
        let p = mod2pi(T::two_pi() - c.max(-T::one()).min(T::one()).acos());
        let t = mod2pi(-a + (-ca + cb).atan2(d + sa - sb) + p / two);
        candidates.push(([Left, Right, Left], [t, p, mod2pi(b - a - t + p)]));
    }

    let v = T::one();
    let tol = T::tolerance(1e-7) * (rho + dx.hypot(dy));
    candidates
        .into_iter()
        .map(|(turns, lens)| DubinsPath {
            segments: [(turns[0], lens[0] * rho), (turns[1], lens[1] * rho), (turns[2], lens[2] * rho)],
            rho,
        })
        .filter(|path| {
            let end = path.endpoint(from, v);
            let dtheta = mod2pi(end.theta - to.theta + T::PI()) - T::PI();
            (end.x - to.x).hypot(end.y - to.y) <= tol && dtheta.abs() <= T::tolerance(1e-7)
        })
        .min_by(|p, q| p.length().partial_cmp(&q.length()).unwrap_or(std::cmp::Ordering::Equal))
}
