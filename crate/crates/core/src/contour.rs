//! The complex-scaling contour `g(t) = t e^{i phi(t)}`.
//!
//! The bend is parametrized in `tau = ln(t/R1) / ln(T0/R1)` rather than in
//! `t` itself. With that choice `arg(g'/g) = atan(theta s'(tau) / ln(T0/R1))`,
//! so the angle spread is controlled by the ratio `T0/R1` alone and any
//! `alpha0 > 0` can be met by moving `T0` outward.

use std::f64::consts::FRAC_PI_8;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{C64, I, ONE, ZERO};
use crate::smooth::{ds7, int_s7, s7};

/// Largest scaling angle the contour accepts.
pub const MAX_THETA: f64 = FRAC_PI_8;
/// Default angle spread.
pub const DEFAULT_ALPHA0: f64 = 0.1;
/// Tolerance every property must meet for `build_contour` to accept a `T0`.
pub const PROPERTY_TOL: f64 = 1e-12;
const VERIFY_POINTS: usize = 10_000;
const MAX_T0_RATIO: f64 = 1e6;

/// A nondecreasing map of `[0, 1]` onto itself, with two derivatives.
pub trait RadialProfile: Send + Sync + fmt::Debug {
    /// Returns `(s, s', s'')` at `tau` in `[0, 1]`.
    fn eval(&self, tau: f64) -> [f64; 3];
}

/// Ramps up over `[0, w]`, runs at constant slope, ramps down over `[1-w, 1]`.
/// The slope profile uses the septic smoothstep so `s` is C^4 at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateauRamp {
    pub ramp: f64,
}

impl Default for PlateauRamp {
    fn default() -> Self {
        Self { ramp: 0.25 }
    }
}

impl PlateauRamp {
    /// Maximum of `s'`.
    pub fn peak_slope(&self) -> f64 {
        1.0 / (1.0 - self.ramp)
    }
}

impl RadialProfile for PlateauRamp {
    fn eval(&self, tau: f64) -> [f64; 3] {
        let w = self.ramp;
        let k = 1.0 / (1.0 - w);
        if tau <= 0.0 {
            [0.0, 0.0, 0.0]
        } else if tau >= 1.0 {
            [1.0, 0.0, 0.0]
        } else if tau < w {
            let x = tau / w;
            [k * w * int_s7(x), k * s7(x), k * ds7(x) / w]
        } else if tau > 1.0 - w {
            let x = (1.0 - tau) / w;
            [1.0 - k * w * int_s7(x), k * s7(x), -k * ds7(x) / w]
        } else {
            [k * (tau - w / 2.0), k, 0.0]
        }
    }
}

#[derive(Clone)]
pub struct ScalingContour {
    theta: f64,
    r1: f64,
    t0: f64,
    alpha0: f64,
    profile: Arc<dyn RadialProfile>,
}

impl fmt::Debug for ScalingContour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalingContour")
            .field("theta", &self.theta)
            .field("r1", &self.r1)
            .field("t0", &self.t0)
            .field("alpha0", &self.alpha0)
            .field("profile", &self.profile)
            .finish()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("invalid contour parameter: {0}")]
    InvalidParameter(String),
    #[error("no T0 below {limit} satisfies all properties (worst violation {worst:e})")]
    ConstructionFailure { limit: f64, worst: f64 },
}

impl ScalingContour {
    /// The unscaled real half-line.
    pub fn identity(r1: f64) -> Self {
        Self::with_profile(0.0, r1, r1, DEFAULT_ALPHA0, Arc::new(PlateauRamp::default()))
    }

    /// Assembles a contour without checking any property.
    pub fn with_profile(
        theta: f64,
        r1: f64,
        t0: f64,
        alpha0: f64,
        profile: Arc<dyn RadialProfile>,
    ) -> Self {
        Self {
            theta,
            r1,
            t0: t0.max(r1),
            alpha0,
            profile,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn is_identity(&self) -> bool {
        self.theta == 0.0
    }

    /// `(g, g', g'')` at radius `t >= 0`.
    pub fn jet(&self, t: f64) -> (C64, C64, C64) {
        if self.theta == 0.0 || t <= self.r1 {
            return (C64::new(t, 0.0), ONE, ZERO);
        }
        if t >= self.t0 {
            let e = C64::from_polar(1.0, self.theta);
            return (e * t, e, ZERO);
        }
        let ell = (self.t0 / self.r1).ln();
        let tau = (t / self.r1).ln() / ell;
        let [s, ds, d2s] = self.profile.eval(tau);
        let e = C64::from_polar(1.0, self.theta * s);
        let a = self.theta * ds / ell;
        let b = self.theta * d2s / (ell * ell);
        let g = e * t;
        let gp = e * (ONE + I * a);
        let gpp = e * (I / t) * (a * (ONE + I * a) + b);
        (g, gp, gpp)
    }

    /// `(g, g')` at radius `t >= 0`.
    pub fn point(&self, t: f64) -> (C64, C64) {
        let (g, gp, _) = self.jet(t);
        (g, gp)
    }

    /// Jet of the odd extension `x -> sign(x) g(|x|)` used on the full line.
    pub fn line_jet(&self, x: f64) -> (C64, C64, C64) {
        let (g, gp, gpp) = self.jet(x.abs());
        if x < 0.0 {
            (-g, gp, -gpp)
        } else {
            (g, gp, gpp)
        }
    }
}

/// `(g, g')` at `t`.
pub fn contour_point(contour: &ScalingContour, t: f64) -> (C64, C64) {
    contour.point(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropertyViolation {
    pub property: u8,
    pub max_violation: f64,
    pub at_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourReport {
    pub grid_points: usize,
    pub properties: [PropertyViolation; 4],
}

impl ContourReport {
    pub fn worst(&self) -> f64 {
        self.properties
            .iter()
            .map(|p| p.max_violation)
            .fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.worst() < tol
    }
}

/// Sample points: the origin plus log-spaced radii up to `2 T0`.
pub fn verification_grid(contour: &ScalingContour, grid_points: usize) -> Vec<f64> {
    let hi = 2.0 * contour.t0.max(contour.r1);
    let lo = 1e-3 * contour.r1.min(hi);
    let m = grid_points.max(2) - 1;
    let mut ts = Vec::with_capacity(grid_points);
    ts.push(0.0);
    let (llo, lhi) = (lo.ln(), hi.ln());
    for i in 0..m {
        let f = if m == 1 { 1.0 } else { i as f64 / (m - 1) as f64 };
        ts.push((llo + f * (lhi - llo)).exp());
    }
    ts
}

pub fn verify_contour(contour: &ScalingContour, grid_points: usize) -> ContourReport {
    let mut worst = [(0.0f64, 0.0f64); 4];
    let mut record = |k: usize, v: f64, t: f64| {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > worst[k].0 {
            worst[k] = (v, t);
        }
    };
    let theta = contour.theta;
    let rot = C64::from_polar(1.0, theta);
    for t in verification_grid(contour, grid_points) {
        let (g, gp) = contour.point(t);
        if t <= contour.r1 {
            record(0, (g - t).norm(), t);
        }
        let arg_g = if t == 0.0 { 0.0 } else { g.arg() };
        record(1, (-arg_g).max(arg_g - theta).max(0.0), t);
        if gp.norm() == 0.0 || !gp.re.is_finite() {
            record(1, 1.0, t);
        }
        // arg g' - arg g, measured as a single angle to avoid branch issues.
        let spread = if t == 0.0 { gp.arg() } else { (gp * g.conj()).arg() };
        record(2, (-spread).max(spread - contour.alpha0).max(0.0), t);
        if t >= contour.t0 && t > 0.0 {
            record(3, (g - rot * t).norm() / t, t);
        }
    }
    let properties = std::array::from_fn(|k| PropertyViolation {
        property: (k + 1) as u8,
        max_violation: worst[k].0,
        at_t: worst[k].1,
    });
    ContourReport {
        grid_points,
        properties,
    }
}

/// Builds a contour for `(theta, R1, alpha0)`, doubling `T0` from
/// `R1 (1 + theta/alpha0)` until every property holds on a dense grid.
pub fn build_contour(theta: f64, r1: f64, alpha0: f64) -> Result<ScalingContour, ContourError> {
    if !(0.0..=MAX_THETA).contains(&theta) {
        return Err(ContourError::InvalidParameter(format!(
            "theta = {theta} outside [0, pi/8]"
        )));
    }
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(ContourError::InvalidParameter(format!("R1 = {r1} must be positive")));
    }
    if !(alpha0 > 0.0) {
        return Err(ContourError::ConstructionFailure {
            limit: MAX_T0_RATIO * r1,
            worst: f64::INFINITY,
        });
    }
    if theta == 0.0 {
        return Ok(ScalingContour::with_profile(
            0.0,
            r1,
            r1,
            alpha0,
            Arc::new(PlateauRamp::default()),
        ));
    }
    let profile: Arc<dyn RadialProfile> = Arc::new(PlateauRamp::default());
    let mut t0 = r1 * (1.0 + theta / alpha0);
    let mut worst = f64::INFINITY;
    while t0 <= MAX_T0_RATIO * r1 {
        let c = ScalingContour::with_profile(theta, r1, t0, alpha0, profile.clone());
        let rep = verify_contour(&c, VERIFY_POINTS);
        worst = rep.worst();
        if rep.passed(PROPERTY_TOL) {
            return Ok(c);
        }
        t0 *= 2.0;
    }
    Err(ContourError::ConstructionFailure {
        limit: MAX_T0_RATIO * r1,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_monotone_and_consistent() {
        let p = PlateauRamp::default();
        let h = 1e-6;
        let mut prev = 0.0;
        for i in 1..1000 {
            let tau = i as f64 / 1000.0;
            let [s, ds, d2s] = p.eval(tau);
            assert!(s >= prev);
            prev = s;
            let fd = (p.eval(tau + h)[0] - p.eval(tau - h)[0]) / (2.0 * h);
            assert!((fd - ds).abs() < 1e-7, "tau {tau}");
            let fd2 = (p.eval(tau + h)[1] - p.eval(tau - h)[1]) / (2.0 * h);
            assert!((fd2 - d2s).abs() < 1e-6, "tau {tau}");
        }
        assert!((p.eval(1.0 - 1e-12)[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn identity_for_zero_angle() {
        let c = build_contour(0.0, 3.0, 0.1).unwrap();
        assert_eq!(c.t0(), 3.0);
        assert_eq!(c.point(7.3), (C64::new(7.3, 0.0), ONE));
        assert_eq!(verify_contour(&c, 1000).worst(), 0.0);
    }

    #[test]
    fn rotated_beyond_t0() {
        let c = build_contour(0.3, 3.0, 0.2).unwrap();
        let t = 2.0 * c.t0();
        let (g, gp) = c.point(t);
        let e = C64::from_polar(1.0, 0.3);
        assert!((g - e * t).norm() < 1e-14 * t);
        assert!((gp - e).norm() < 1e-15);
        assert_eq!(c.point(1.5), (C64::new(1.5, 0.0), ONE));
    }

    #[test]
    fn derivative_matches_differences() {
        let c = build_contour(0.3, 3.0, 0.2).unwrap();
        let t = 0.5 * (c.r1() + c.t0());
        let h = 1e-5 * t;
        let (_, gp, gpp) = c.jet(t);
        let fd = (c.point(t + h).0 - c.point(t - h).0) / (2.0 * h);
        assert!((fd - gp).norm() < 1e-8 * gp.norm());
        let fd2 = (c.point(t + h).1 - c.point(t - h).1) / (2.0 * h);
        assert!((fd2 - gpp).norm() < 1e-6 * gpp.norm().max(1e-3));
    }

    #[derive(Debug)]
    struct Wobbly;
    impl RadialProfile for Wobbly {
        fn eval(&self, tau: f64) -> [f64; 3] {
            // s' = 1 + 0.6 pi cos(6 pi tau) dips below zero.
            let w = 6.0 * std::f64::consts::PI * tau;
            [tau + 0.1 * w.sin(), 1.0 + 0.6 * std::f64::consts::PI * w.cos(), 0.0]
        }
    }

    #[test]
    fn corrupted_profile_is_caught() {
        let c = ScalingContour::with_profile(0.3, 3.0, 30.0, 0.2, Arc::new(Wobbly));
        let rep = verify_contour(&c, 1000);
        let p3 = rep.properties[2];
        assert!(p3.max_violation > 0.0);
        assert!(p3.at_t > c.r1() && p3.at_t < c.t0());
    }
}
