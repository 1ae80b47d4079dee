//! Dirichlet-to-Neumann values at an interface point and resonance counting
//! by the winding of their difference.
//!
//! The half-line is split at `a` (with `R0 < a < R1`) into the interior
//! `[0, a]` and the scaled exterior. The interior value comes from an exact
//! transfer matrix or an adaptive RK4 solve; the exterior value comes from the
//! discretized CAP operator. Their difference `N(z) = N_out(z) - N_in(z)`
//! vanishes exactly at resonances and has poles at interior Dirichlet
//! eigenvalues, so its winding around a circle counts resonances minus
//! interior eigenvalues inside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::ScalingContour;
use crate::discretize::{
    assemble_exterior_reference, assemble_interior_reference, stencil::fornberg, CutoffSpec, DiscretizeError,
    OperatorMatrix,
};
use crate::eigen::{eig_dense, EigenError, ShiftedLu};
use crate::linalg::{C64, ONE, ZERO};
use crate::model::{Geometry, ModelError, ModelProblem, PotentialSpec};
use crate::oracle::{self, EnergyWindow, OracleError};
use crate::winding::{circle_point, winding_number, WindingFailure};

/// `|phi(a)|` below this fraction of `max |phi|` counts as an interior eigenvalue.
pub const INTERIOR_SINGULAR_RATIO: f64 = 1e-12;
/// Smallest `|N|` tolerated on a counting circle.
pub const MIN_MODULUS: f64 = 1e-8;
/// Nodes of the interior reference grid used for margins.
pub const INTERIOR_GRID_POINTS: usize = 257;
/// Required ratio between a margin and its discretization error estimate.
pub const MARGIN_SAFETY: f64 = 10.0;
const RK4_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DtnError {
    #[error("z = {z} is an interior Dirichlet eigenvalue to working accuracy")]
    InteriorSingular { z: C64 },
    #[error("z = {z} is in the exterior spectrum to working accuracy (pivot ratio {pivot_ratio:e})")]
    ExteriorSingular { z: C64, pivot_ratio: f64 },
    #[error("interface a = {a} must lie in (R0, R1) = ({r0}, {r1})")]
    InvalidInterface { a: f64, r0: f64, r1: f64 },
    #[error("no safe interface: best margin {best_margin:e} against required {required:e}")]
    NoSafeInterface { best_margin: f64, required: f64 },
    #[error("|N| vanishes on the counting circle near z = {z}")]
    ZeroOnContour { z: C64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl DtnError {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::InteriorSingular { .. } => "InteriorSingular",
            Self::ExteriorSingular { .. } => "ExteriorSingular",
            Self::InvalidInterface { .. } => "InvalidInterface",
            Self::NoSafeInterface { .. } => "NoSafeInterface",
            Self::ZeroOnContour { .. } => "ZeroOnContour",
            Self::Unsupported(_) => "Unsupported",
            Self::Discretize(_) => "Discretize",
            Self::Eigen(_) => "Eigen",
            Self::Model(_) => "Model",
        }
    }
}

/// The interface point. Its normal points into `[0, a]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interface {
    pub a: f64,
}

impl Interface {
    pub fn new(problem: &ModelProblem, a: f64) -> Result<Self, DtnError> {
        if problem.geometry != Geometry::HalfLineDirichlet {
            return Err(DtnError::Unsupported("the DtN split needs a half-line problem".into()));
        }
        if !(a > problem.r0 && a < problem.r1) {
            return Err(DtnError::InvalidInterface {
                a,
                r0: problem.r0,
                r1: problem.r1,
            });
        }
        Ok(Self { a })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DtnSample {
    pub z: C64,
    pub n_in: C64,
    pub n_out: C64,
    pub n_total: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: C64,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: C64, radius: f64) -> Self {
        Self { center, radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub circle: Circle,
    pub winding: i64,
    pub samples: usize,
    pub min_modulus: f64,
}

/// Region of the energy plane whose distance to auxiliary spectra matters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Rect(EnergyWindow),
    Disk(Circle),
}

impl Region {
    /// Distance from `z` to the region, zero inside.
    pub fn distance(&self, z: C64) -> f64 {
        match self {
            Self::Rect(w) => {
                let dx = (w.re_min - z.re).max(z.re - w.re_max).max(0.0);
                let dy = (w.im_min - z.im).max(z.im - w.im_max).max(0.0);
                dx.hypot(dy)
            }
            Self::Disk(c) => ((z - c.center).norm() - c.radius).max(0.0),
        }
    }
}

/// How the exterior problem is truncated and discretized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDiscretization {
    pub length: f64,
    pub spacing: f64,
    pub cutoff: CutoffSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteriorMethod {
    TransferMatrix,
    OdeStepper,
}

fn has_transfer_matrix(problem: &ModelProblem) -> bool {
    problem.metric_beta == 0.0 && !matches!(problem.potential, PotentialSpec::RationalDecay { .. })
}

/// Interior DtN value `-m(a) phi'(a) / phi(a)`, by transfer matrix when the
/// problem admits one and by RK4 otherwise.
pub fn dtn_interior(problem: &ModelProblem, z: C64, interface: &Interface) -> Result<C64, DtnError> {
    let method = if has_transfer_matrix(problem) {
        InteriorMethod::TransferMatrix
    } else {
        InteriorMethod::OdeStepper
    };
    dtn_interior_with(problem, z, interface, method)
}

pub fn dtn_interior_with(
    problem: &ModelProblem,
    z: C64,
    interface: &Interface,
    method: InteriorMethod,
) -> Result<C64, DtnError> {
    let (phi, dphi, max_phi) = match method {
        InteriorMethod::TransferMatrix => interior_transfer(problem, z, interface.a)?,
        InteriorMethod::OdeStepper => interior_rk4(problem, z, interface.a)?,
    };
    if phi.norm() < INTERIOR_SINGULAR_RATIO * max_phi {
        return Err(DtnError::InteriorSingular { z });
    }
    let m = problem.metric(C64::new(interface.a, 0.0))?.m;
    Ok(-m * dphi / phi)
}

fn oracle_err(e: OracleError) -> DtnError {
    DtnError::Unsupported(e.to_string())
}

fn interior_transfer(problem: &ModelProblem, z: C64, a: f64) -> Result<(C64, C64, f64), DtnError> {
    if !has_transfer_matrix(problem) {
        return Err(DtnError::Unsupported("no transfer matrix for this problem".into()));
    }
    let k = z.sqrt();
    let t = oracle::transfer_matrix_to(problem, k, a).map_err(oracle_err)?;
    // Sample |phi| along [0, a] for the singularity test.
    let mut max_phi = t[0][1].norm();
    for j in 1..64 {
        let tj = oracle::transfer_matrix_to(problem, k, a * j as f64 / 64.0).map_err(oracle_err)?;
        max_phi = max_phi.max(tj[0][1].norm());
    }
    Ok((t[0][1], t[1][1], max_phi))
}

/// Adaptive RK4 for `u' = p / m`, `p' = (c - z) u` on `[0, a]`, restarted at
/// each potential jump. Returns `(u(a), u'(a), max |u|)`.
fn interior_rk4(problem: &ModelProblem, z: C64, a: f64) -> Result<(C64, C64, f64), DtnError> {
    let mut breaks: Vec<f64> = vec![0.0];
    breaks.extend(problem.interfaces().into_iter().map(|(x, _)| x).filter(|&x| x > 0.0 && x < a));
    breaks.push(a);
    let piecewise = matches!(problem.potential, PotentialSpec::PiecewiseConstant(_));
    let mut y = [ZERO, ONE];
    let mut max_u = 0.0f64;
    let mut h: f64 = 1e-2;
    for w in breaks.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        // Constant on the open piece; sample its midpoint to dodge the endpoint convention.
        let c_piece = problem.potential_at(C64::new(0.5 * (x0 + x1), 0.0))?;
        let rhs = |x: f64, y: &[C64; 2]| -> Result<[C64; 2], DtnError> {
            let m = problem.metric(C64::new(x, 0.0))?.m;
            let c = if piecewise {
                c_piece
            } else {
                problem.potential_at(C64::new(x, 0.0))?
            };
            Ok([y[1] / m, (c - z) * y[0]])
        };
        let step = |x: f64, y: &[C64; 2], h: f64| -> Result<[C64; 2], DtnError> {
            let k1 = rhs(x, y)?;
            let y2 = [y[0] + k1[0] * (h / 2.0), y[1] + k1[1] * (h / 2.0)];
            let k2 = rhs(x + h / 2.0, &y2)?;
            let y3 = [y[0] + k2[0] * (h / 2.0), y[1] + k2[1] * (h / 2.0)];
            let k3 = rhs(x + h / 2.0, &y3)?;
            let y4 = [y[0] + k3[0] * h, y[1] + k3[1] * h];
            let k4 = rhs(x + h, &y4)?;
            Ok([
                y[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * (h / 6.0),
                y[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * (h / 6.0),
            ])
        };
        let mut x = x0;
        while x < x1 {
            let hh = h.min(x1 - x);
            let full = step(x, &y, hh)?;
            let half = step(x, &y, hh / 2.0)?;
            let two = step(x + hh / 2.0, &half, hh / 2.0)?;
            let scale = two[0].norm().max(two[1].norm()).max(1e-300);
            let err = ((two[0] - full[0]).norm().max((two[1] - full[1]).norm()) / 15.0) / scale;
            if err <= RK4_TOL || hh < 1e-9 {
                // Local extrapolation of the step-doubling pair.
                y = [
                    two[0] + (two[0] - full[0]) / 15.0,
                    two[1] + (two[1] - full[1]) / 15.0,
                ];
                x = if hh == x1 - x { x1 } else { x + hh };
                max_u = max_u.max(y[0].norm());
            }
            let factor = if err > 0.0 { 0.9 * (RK4_TOL / err).powf(0.2) } else { 4.0 };
            h = hh * factor.clamp(0.2, 4.0);
        }
    }
    let m = problem.metric(C64::new(a, 0.0))?.m;
    Ok((y[0], y[1] / m, max_u))
}

/// Exterior DtN evaluator with the discretized operator assembled once.
pub struct ExteriorDtn {
    op: OperatorMatrix,
    metric_at_a: C64,
    /// One-sided first-derivative weights on the first five nodes.
    weights: Vec<f64>,
}

impl ExteriorDtn {
    pub fn new(
        problem: &ModelProblem,
        contour: &ScalingContour,
        epsilon: f64,
        interface: &Interface,
        disc: &ExteriorDiscretization,
    ) -> Result<Self, DtnError> {
        let op = assemble_exterior_reference(
            problem,
            contour,
            epsilon,
            &disc.cutoff,
            interface.a,
            disc.length,
            disc.spacing,
        )?;
        let xs: Vec<f64> = (0..5).map(|j| op.grid.node(j)).collect();
        let weights = fornberg(interface.a, &xs, 1).swap_remove(1);
        let metric_at_a = problem.metric(C64::new(interface.a, 0.0))?.m;
        Ok(Self {
            op,
            metric_at_a,
            weights,
        })
    }

    pub fn operator(&self) -> &OperatorMatrix {
        &self.op
    }

    /// Nodal solution of `(Q - z) u = 0` with `u(a) = 1`, `u(L) = 0`,
    /// including both boundary nodes.
    pub fn solution(&self, z: C64) -> Result<Vec<C64>, DtnError> {
        let lu = ShiftedLu::new(&self.op.entries, z).map_err(|e| match e {
            EigenError::NearSingular { z, pivot_ratio } => DtnError::ExteriorSingular { z, pivot_ratio },
            other => DtnError::Eigen(other),
        })?;
        let rhs: Vec<C64> = self.op.left_coupling.iter().map(|c| -*c).collect();
        let inner = lu.solve(&rhs);
        let mut u = Vec::with_capacity(inner.len() + 2);
        u.push(ONE);
        u.extend(inner);
        u.push(ZERO);
        Ok(u)
    }

    /// `-m(a) u'(a)` for the solution above.
    pub fn value(&self, z: C64) -> Result<C64, DtnError> {
        let u = self.solution(z)?;
        let du: C64 = self.weights.iter().zip(&u).map(|(w, v)| *v * *w).sum();
        Ok(-self.metric_at_a * du)
    }
}

pub fn dtn_exterior(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    z: C64,
    interface: &Interface,
    disc: &ExteriorDiscretization,
) -> Result<C64, DtnError> {
    ExteriorDtn::new(problem, contour, epsilon, interface, disc)?.value(z)
}

/// `N(z) = N_out(z) - N_in(z)` with both parts.
pub fn dtn_sample(exterior: &ExteriorDtn, problem: &ModelProblem, z: C64, interface: &Interface) -> Result<DtnSample, DtnError> {
    let n_in = dtn_interior(problem, z, interface)?;
    let n_out = exterior.value(z)?;
    Ok(DtnSample {
        z,
        n_in,
        n_out,
        n_total: n_out - n_in,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMargins {
    pub interior: f64,
    pub exterior: f64,
}

impl SpectrumMargins {
    pub fn min(&self) -> f64 {
        self.interior.min(self.exterior)
    }
}

fn distance_to(region: &Region, eigs: &[C64]) -> f64 {
    eigs.iter().map(|z| region.distance(*z)).fold(f64::INFINITY, f64::min)
}

fn margins_at(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    interface: &Interface,
    region: &Region,
    disc: &ExteriorDiscretization,
    interior_points: usize,
) -> Result<SpectrumMargins, DtnError> {
    let h_in = interface.a / (interior_points - 1) as f64;
    let interior = assemble_interior_reference(problem, interface.a, h_in)?;
    let ev_in = eig_dense(&interior.entries)?.eigenvalues;
    let exterior = ExteriorDtn::new(problem, contour, epsilon, interface, disc)?;
    let ev_out = eig_dense(&exterior.op.entries)?.eigenvalues;
    Ok(SpectrumMargins {
        interior: distance_to(region, &ev_in),
        exterior: distance_to(region, &ev_out),
    })
}

/// Distances from `region` to the interior Dirichlet spectrum on `[0, a]` and
/// to the spectrum of the truncated exterior operator.
pub fn spectrum_margin(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    interface: &Interface,
    region: &Region,
    disc: &ExteriorDiscretization,
) -> Result<SpectrumMargins, DtnError> {
    margins_at(problem, contour, epsilon, interface, region, disc, INTERIOR_GRID_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterfaceChoice {
    pub interface: Interface,
    pub margins: SpectrumMargins,
    /// Change of the margins when both grids are refined by two.
    pub error_estimate: f64,
}

/// The candidate whose auxiliary spectra stay farthest from `region`.
pub fn choose_interface(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    region: &Region,
    candidates: &[f64],
    disc: &ExteriorDiscretization,
) -> Result<InterfaceChoice, DtnError> {
    let mut best: Option<(Interface, SpectrumMargins)> = None;
    for &a in candidates {
        let iface = Interface::new(problem, a)?;
        let m = spectrum_margin(problem, contour, epsilon, &iface, region, disc)?;
        if best.map_or(true, |(_, b)| m.min() > b.min()) {
            best = Some((iface, m));
        }
    }
    let Some((interface, margins)) = best else {
        return Err(DtnError::NoSafeInterface {
            best_margin: 0.0,
            required: 0.0,
        });
    };
    let fine_disc = ExteriorDiscretization {
        spacing: 0.5 * disc.spacing,
        ..*disc
    };
    let fine = margins_at(
        problem,
        contour,
        epsilon,
        &interface,
        region,
        &fine_disc,
        2 * (INTERIOR_GRID_POINTS - 1) + 1,
    )?;
    let error_estimate = (fine.interior - margins.interior)
        .abs()
        .max((fine.exterior - margins.exterior).abs());
    let required = MARGIN_SAFETY * error_estimate;
    if !(margins.min() > required) {
        return Err(DtnError::NoSafeInterface {
            best_margin: margins.min(),
            required,
        });
    }
    Ok(InterfaceChoice {
        interface,
        margins,
        error_estimate,
    })
}

/// Initial uniform samples on a counting circle.
pub const DEFAULT_CIRCLE_SAMPLES: usize = 128;

/// Winding number of `N` around `circle`: resonances inside minus interior
/// Dirichlet eigenvalues inside.
pub fn count_resonances_dtn(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    interface: &Interface,
    disc: &ExteriorDiscretization,
    circle: &Circle,
    samples: usize,
) -> Result<CountResult, DtnError> {
    let exterior = ExteriorDtn::new(problem, contour, epsilon, interface, disc)?;
    count_with(&exterior, problem, interface, circle, samples, |_| {})
}

/// As [`count_resonances_dtn`] with a prepared exterior evaluator, reporting
/// every sample to `observe`.
pub fn count_with(
    exterior: &ExteriorDtn,
    problem: &ModelProblem,
    interface: &Interface,
    circle: &Circle,
    samples: usize,
    mut observe: impl FnMut(&DtnSample),
) -> Result<CountResult, DtnError> {
    if !(circle.radius > 0.0) {
        return Err(DtnError::Unsupported(format!("circle radius {}", circle.radius)));
    }
    let w = winding_number(
        |s| {
            let z = circle_point(circle.center, circle.radius, s);
            let sample = dtn_sample(exterior, problem, z, interface)?;
            observe(&sample);
            Ok(sample.n_total)
        },
        samples,
        MIN_MODULUS,
    )
    .map_err(|e| match e {
        WindingFailure::Eval(e) => e,
        WindingFailure::Unresolved { s, .. } => {
            let z = circle_point(circle.center, circle.radius, s);
            // A pole on the contour stalls refinement just as a zero does.
            // Near a zero the two maps cancel; near a pole one of them dominates.
            match dtn_sample(exterior, problem, z, interface) {
                Err(e) => e,
                Ok(d) if d.n_total.norm() < 0.5 * d.n_in.norm().max(d.n_out.norm()) => DtnError::ZeroOnContour { z },
                Ok(d) if d.n_in.norm() >= d.n_out.norm() => DtnError::InteriorSingular { z },
                Ok(d) => DtnError::ExteriorSingular {
                    z,
                    pivot_ratio: 1.0 / d.n_out.norm(),
                },
            }
        }
    })?;
    Ok(CountResult {
        circle: *circle,
        winding: w.winding,
        samples: w.samples,
        min_modulus: w.min_modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::build_contour;
    use crate::linalg::I;
    use std::f64::consts::PI;

    fn barrier() -> ModelProblem {
        ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0)
    }

    #[test]
    fn free_interior_is_a_cotangent() {
        let p = ModelProblem::free_half_line(2.0, 3.0);
        let iface = Interface::new(&p, 2.5).unwrap();
        for z in [C64::new(3.0, -0.7), C64::new(0.4, 0.2), C64::new(-1.0, -0.1)] {
            let k = z.sqrt();
            let exact = -k * (k * 2.5).cos() / (k * 2.5).sin();
            for m in [InteriorMethod::TransferMatrix, InteriorMethod::OdeStepper] {
                let v = dtn_interior_with(&p, z, &iface, m).unwrap();
                assert!((v - exact).norm() < 1e-10 * exact.norm().max(1.0), "{m:?}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn interior_paths_agree_on_the_barrier() {
        let p = barrier();
        let iface = Interface::new(&p, 2.5).unwrap();
        let z = C64::new(4.0, -0.5);
        let a = dtn_interior_with(&p, z, &iface, InteriorMethod::TransferMatrix).unwrap();
        let b = dtn_interior_with(&p, z, &iface, InteriorMethod::OdeStepper).unwrap();
        assert!((a - b).norm() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn interior_eigenvalue_is_singular() {
        let p = ModelProblem::free_half_line(2.0, 3.0);
        let iface = Interface::new(&p, 2.5).unwrap();
        let z = C64::new((PI / 2.5).powi(2), 0.0);
        assert!(matches!(
            dtn_interior(&p, z, &iface),
            Err(DtnError::InteriorSingular { .. })
        ));
    }

    #[test]
    fn free_exterior_is_outgoing() {
        let p = ModelProblem::free_half_line(2.0, 3.0);
        let contour = build_contour(0.3, 3.0, 0.4).unwrap();
        let iface = Interface::new(&p, 2.5).unwrap();
        let disc = ExteriorDiscretization {
            length: 40.0,
            spacing: 0.025,
            cutoff: CutoffSpec::new(2.2, 2.8),
        };
        let ext = ExteriorDtn::new(&p, &contour, 0.0, &iface, &disc).unwrap();
        let z = C64::new(5.0, -0.3);
        let u = ext.solution(z).unwrap();
        assert_eq!(*u.last().unwrap(), ZERO);
        let v = ext.value(z).unwrap();
        let err = (v - (-I * z.sqrt())).norm();
        assert!(err < 1e-5, "{v}: {err:e}");
    }

    #[test]
    fn free_problem_has_no_resonances_but_a_pole() {
        let p = ModelProblem::free_half_line(2.0, 3.0);
        let contour = build_contour(0.3, 3.0, 0.4).unwrap();
        let iface = Interface::new(&p, 2.5).unwrap();
        let disc = ExteriorDiscretization {
            length: 40.0,
            spacing: 0.1,
            cutoff: CutoffSpec::new(2.2, 2.8),
        };
        let c = count_resonances_dtn(&p, &contour, 0.0, &iface, &disc, &Circle::new(C64::new(5.0, -0.3), 0.2), 64)
            .unwrap();
        assert_eq!(c.winding, 0);
        let pole = C64::new((PI / 2.5).powi(2), 0.0);
        let c = count_resonances_dtn(&p, &contour, 0.0, &iface, &disc, &Circle::new(pole, 0.1), 64).unwrap();
        assert_eq!(c.winding, -1);
        // The same pole on the circle itself.
        let on = Circle::new(pole - 0.1, 0.1);
        let err = count_resonances_dtn(&p, &contour, 0.0, &iface, &disc, &on, 64).unwrap_err();
        assert_eq!(err.kind(), "InteriorSingular", "{err:?}");
    }

    #[test]
    fn region_distance() {
        let r = Region::Disk(Circle::new(ZERO, 1.0));
        assert_eq!(r.distance(C64::new(0.5, 0.0)), 0.0);
        assert!((r.distance(C64::new(3.0, 0.0)) - 2.0).abs() < 1e-15);
        let w = Region::Rect(EnergyWindow::new(0.0, 1.0, -1.0, 0.0));
        assert!((w.distance(C64::new(4.0, 4.0)) - 5.0).abs() < 1e-15);
    }
}
