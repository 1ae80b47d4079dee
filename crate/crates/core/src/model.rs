//! One-dimensional model problems: a compactly supported or decaying
//! potential, an optional metric perturbation, and the radii that separate the
//! "black box" region from the analytic tail.

use std::f64::consts::FRAC_PI_8;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{C64, ONE, ZERO};

/// Widest angle the analytic sector is ever asked to cover.
pub const MAX_SECTOR_ANGLE: f64 = FRAC_PI_8;

/// Minimum distance kept from the poles of `1/(1+z^2)`.
pub const POLE_CLEARANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    /// `[0, inf)` with a Dirichlet condition at the origin.
    HalfLineDirichlet,
    FullLine,
}

/// A constant potential `value` on `x_lo < x <= x_hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x_lo: f64,
    pub x_hi: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PotentialSpec {
    Zero,
    PiecewiseConstant(Vec<Segment>),
    /// `beta / (1 + x^2)`.
    RationalDecay { beta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelProblem {
    pub geometry: Geometry,
    pub potential: PotentialSpec,
    /// Metric coefficient `1 + metric_beta / (1 + x^2)`; zero for a flat metric.
    pub metric_beta: f64,
    pub r0: f64,
    pub r1: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("point {point} lies outside the analytic region of the coefficients")]
    SectorViolation { point: C64 },
}

/// Metric value and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricJet {
    pub m: C64,
    pub dm: C64,
    pub d2m: C64,
}

impl ModelProblem {
    /// Half-line barrier of height `height` on `[lo, hi]`, flat metric.
    pub fn barrier(lo: f64, hi: f64, height: f64, r0: f64, r1: f64) -> Self {
        Self {
            geometry: Geometry::HalfLineDirichlet,
            potential: PotentialSpec::PiecewiseConstant(vec![Segment {
                x_lo: lo,
                x_hi: hi,
                value: height,
            }]),
            metric_beta: 0.0,
            r0,
            r1,
        }
    }

    /// Free half-line.
    pub fn free_half_line(r0: f64, r1: f64) -> Self {
        Self {
            geometry: Geometry::HalfLineDirichlet,
            potential: PotentialSpec::Zero,
            metric_beta: 0.0,
            r0,
            r1,
        }
    }

    /// Positions where the potential is discontinuous, in increasing order,
    /// paired with the jump `c(x+) - c(x-)`.
    pub fn interfaces(&self) -> Vec<(f64, f64)> {
        let PotentialSpec::PiecewiseConstant(segs) = &self.potential else {
            return Vec::new();
        };
        let mut out: Vec<(f64, f64)> = Vec::new();
        for s in segs {
            out.push((s.x_lo, s.value));
            out.push((s.x_hi, -s.value));
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Abutting segments share an endpoint; merge their jumps.
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
        for (x, j) in out {
            match merged.last_mut() {
                Some(last) if (last.0 - x).abs() < 1e-12 => last.1 += j,
                _ => merged.push((x, j)),
            }
        }
        merged.retain(|&(_, j)| j != 0.0);
        merged
    }

    pub fn has_potential(&self) -> bool {
        match &self.potential {
            PotentialSpec::Zero => false,
            PotentialSpec::PiecewiseConstant(s) => s.iter().any(|s| s.value != 0.0),
            PotentialSpec::RationalDecay { beta } => *beta != 0.0,
        }
    }

    fn in_analytic_region(&self, z: C64) -> bool {
        if z.im == 0.0 {
            return self.geometry == Geometry::FullLine || z.re >= 0.0;
        }
        // The left half of a full-line contour is the mirror image -g(|x|).
        let x = if self.geometry == Geometry::FullLine && z.re < 0.0 {
            -z
        } else {
            z
        };
        let phi = x.im.atan2(x.re);
        x.norm() > self.r1 && (0.0..=MAX_SECTOR_ANGLE + 1e-12).contains(&phi)
    }

    /// Metric `1 + beta/(1+z^2)` with derivatives, at a complex point.
    pub fn metric(&self, z: C64) -> Result<MetricJet, ModelError> {
        if !self.in_analytic_region(z) {
            return Err(ModelError::SectorViolation { point: z });
        }
        let b = self.metric_beta;
        if b == 0.0 {
            return Ok(MetricJet {
                m: ONE,
                dm: ZERO,
                d2m: ZERO,
            });
        }
        let q = rational(z)?;
        let q2 = q * q;
        Ok(MetricJet {
            m: ONE + b * q,
            dm: -2.0 * b * z * q2,
            d2m: b * (6.0 * z * z - 2.0) * q2 * q,
        })
    }

    /// Potential value at a complex point. Real points inside the support use
    /// the segment convention `x_lo < x <= x_hi`.
    pub fn potential_at(&self, z: C64) -> Result<C64, ModelError> {
        if !self.in_analytic_region(z) {
            return Err(ModelError::SectorViolation { point: z });
        }
        match &self.potential {
            PotentialSpec::Zero => Ok(ZERO),
            PotentialSpec::RationalDecay { beta } => Ok(*beta * rational(z)?),
            PotentialSpec::PiecewiseConstant(segs) => {
                if z.im != 0.0 {
                    // Off the real axis we are beyond R1, where segments vanish.
                    return Ok(ZERO);
                }
                let x = z.re;
                let v: f64 = segs
                    .iter()
                    .filter(|s| s.x_lo < x && x <= s.x_hi)
                    .map(|s| s.value)
                    .sum();
                Ok(C64::new(v, 0.0))
            }
        }
    }
}

fn rational(z: C64) -> Result<C64, ModelError> {
    let d = ONE + z * z;
    // 1 + z^2 = (z - i)(z + i); compare the distance to the nearer pole.
    let near = (z - C64::new(0.0, 1.0)).norm().min((z + C64::new(0.0, 1.0)).norm());
    if near < POLE_CLEARANCE {
        return Err(ModelError::SectorViolation { point: z });
    }
    Ok(ONE / d)
}

/// Metric and potential at `point`.
pub fn evaluate_coefficients(problem: &ModelProblem, point: C64) -> Result<(C64, C64), ModelError> {
    let g = problem.metric(point)?.m;
    let c = problem.potential_at(point)?;
    Ok((g, c))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub(crate) fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

pub fn validate_problem(problem: &ModelProblem) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let p = problem;
    rep.push(
        "radii ordered",
        p.r0.is_finite() && p.r1.is_finite() && p.r0 >= 0.0 && p.r0 < p.r1,
        format!("R0 = {}, R1 = {}", p.r0, p.r1),
    );
    rep.push(
        "coefficient bounded below",
        p.metric_beta.is_finite() && p.metric_beta.abs() < 1.0,
        format!("metric beta = {}", p.metric_beta),
    );
    rep.push(
        "poles outside sector",
        p.metric_beta == 0.0
            && !matches!(p.potential, PotentialSpec::RationalDecay { .. })
            || p.r1 > 1.0 + POLE_CLEARANCE,
        format!("R1 = {} must exceed 1 when rational coefficients are used", p.r1),
    );
    match &p.potential {
        PotentialSpec::Zero => {}
        PotentialSpec::RationalDecay { beta } => {
            rep.push(
                "rational amplitude",
                beta.is_finite() && beta.abs() < 1.0,
                format!("beta = {beta}"),
            );
        }
        PotentialSpec::PiecewiseConstant(segs) => {
            let lo_bound = match p.geometry {
                Geometry::HalfLineDirichlet => 0.0,
                Geometry::FullLine => -p.r0,
            };
            for (i, s) in segs.iter().enumerate() {
                rep.push(
                    "segment well formed",
                    s.x_lo.is_finite() && s.x_hi.is_finite() && s.value.is_finite() && s.x_lo < s.x_hi,
                    format!("segment {i}: [{}, {}] -> {}", s.x_lo, s.x_hi, s.value),
                );
                rep.push(
                    "support within R0",
                    s.x_lo >= lo_bound && s.x_hi <= p.r0,
                    format!(
                        "segment {i}: [{}, {}] against [{lo_bound}, {}]",
                        s.x_lo, s.x_hi, p.r0
                    ),
                );
            }
            let mut sorted: Vec<&Segment> = segs.iter().collect();
            sorted.sort_by(|a, b| a.x_lo.total_cmp(&b.x_lo));
            let overlap = sorted.windows(2).find(|w| w[1].x_lo < w[0].x_hi);
            rep.push(
                "segments disjoint",
                overlap.is_none(),
                match overlap {
                    Some(w) => format!("[{}, {}] overlaps [{}, {}]", w[0].x_lo, w[0].x_hi, w[1].x_lo, w[1].x_hi),
                    None => format!("{} segments", segs.len()),
                },
            );
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_coefficients_are_flat() {
        let p = ModelProblem::free_half_line(1.0, 3.0);
        assert_eq!(evaluate_coefficients(&p, C64::new(2.5, 0.0)).unwrap(), (ONE, ZERO));
    }

    #[test]
    fn segment_lookup() {
        let p = ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0);
        let (g, c) = evaluate_coefficients(&p, C64::new(1.5, 0.0)).unwrap();
        assert_eq!((g, c), (ONE, C64::new(10.0, 0.0)));
        assert_eq!(p.potential_at(C64::new(1.0, 0.0)).unwrap(), ZERO);
        assert_eq!(p.potential_at(C64::new(2.0, 0.0)).unwrap(), C64::new(10.0, 0.0));
        assert_eq!(p.interfaces(), vec![(1.0, 10.0), (2.0, -10.0)]);
    }

    #[test]
    fn rational_decay_closed_form() {
        let p = ModelProblem {
            geometry: Geometry::HalfLineDirichlet,
            potential: PotentialSpec::RationalDecay { beta: 0.3 },
            metric_beta: 0.0,
            r0: 2.0,
            r1: 3.0,
        };
        let z = C64::from_polar(4.0, 0.2);
        let c = p.potential_at(z).unwrap();
        let want = 0.3 / (1.0 + 16.0 * C64::from_polar(1.0, 0.4));
        assert!((c - want).norm() < 1e-15);
    }

    #[test]
    fn outside_sector_is_rejected() {
        let p = ModelProblem::free_half_line(1.0, 3.0);
        assert!(p.potential_at(C64::new(1.0, 0.5)).is_err());
        assert!(p.potential_at(C64::from_polar(5.0, 0.5)).is_err());
        assert!(p.potential_at(C64::from_polar(5.0, 0.3)).is_ok());
    }

    #[test]
    fn metric_derivatives_match_differences() {
        let p = ModelProblem {
            metric_beta: 0.2,
            ..ModelProblem::free_half_line(2.0, 3.0)
        };
        let z = C64::from_polar(4.0, 0.25);
        let h = 1e-5;
        let jet = p.metric(z).unwrap();
        let fd1 = (p.metric(z + h).unwrap().m - p.metric(z - h).unwrap().m) / (2.0 * h);
        let fd2 = (p.metric(z + h).unwrap().dm - p.metric(z - h).unwrap().dm) / (2.0 * h);
        assert!((jet.dm - fd1).norm() < 1e-9);
        assert!((jet.d2m - fd2).norm() < 1e-9);
    }

    #[test]
    fn validation_flags_bad_inputs() {
        let good = ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0);
        assert!(validate_problem(&good).passed());

        let wide = ModelProblem::barrier(1.0, 3.0, 10.0, 2.0, 3.0);
        let rep = validate_problem(&wide);
        assert!(rep.failures().any(|c| c.name == "support within R0"));

        let soft = ModelProblem {
            metric_beta: 1.5,
            ..good
        };
        assert!(validate_problem(&soft)
            .failures()
            .any(|c| c.name == "coefficient bounded below"));
    }
}
