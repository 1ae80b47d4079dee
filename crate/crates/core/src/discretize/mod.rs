//! Fourth-order finite-difference matrices for the scaled CAP operator, the
//! Davies oscillator, and the interior/exterior Dirichlet restrictions.
//!
//! The operator `-(1/g') d/dt (m(g)/g' d/dt) + c(g) - i eps (1 - chi) g^2` is
//! discretized in non-divergence form on a uniform grid in the real parameter
//! `t`. Potential discontinuities are handled by interface corrections (see
//! [`interface`]), which keep fourth-order accuracy across the jumps.

mod interface;
pub mod matfile;
pub mod stencil;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contour::ScalingContour;
use crate::linalg::{CMatrix, C64, I, ZERO};
use crate::model::{Geometry, ModelError, ModelProblem};
use crate::smooth;
use stencil::{fornberg, D1_CENTRAL, D2_CENTRAL};

/// Fewer points than this per unit length over the potential support is rejected.
pub const MIN_POINTS_PER_UNIT: f64 = 8.0;
pub const MIN_GRID_POINTS: usize = 50;
/// Minimum `eps^{1/4} L` for the Davies box.
pub const DAVIES_MIN_DECAY_LENGTHS: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t_min: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self, DiscretizeError> {
        let g = Self {
            t_min,
            t_max,
            n_points,
        };
        g.validate()?;
        Ok(g)
    }

    /// Grid on `[t_min, t_max]` whose spacing is as close as possible to `h`.
    pub fn with_spacing(t_min: f64, t_max: f64, h: f64) -> Result<Self, DiscretizeError> {
        let n = ((t_max - t_min) / h).round() as usize + 1;
        Self::new(t_min, t_max, n.max(2))
    }

    pub fn validate(&self) -> Result<(), DiscretizeError> {
        if self.n_points < MIN_GRID_POINTS {
            return Err(DiscretizeError::InvalidGrid(format!(
                "{} points, need at least {MIN_GRID_POINTS}",
                self.n_points
            )));
        }
        if !(self.t_max > self.t_min) || !self.t_min.is_finite() || !self.t_max.is_finite() {
            return Err(DiscretizeError::InvalidGrid(format!(
                "interval [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.t_min + j as f64 * self.spacing()
    }

    /// Interior nodes, which carry the unknowns.
    pub fn interior_nodes(&self) -> Vec<f64> {
        (1..self.n_points - 1).map(|j| self.node(j)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    Scaled,
    Davies,
    InteriorRef,
    ExteriorRef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub epsilon: f64,
    pub theta: f64,
    pub problem_id: String,
    pub boundary: String,
    pub kind: OperatorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub entries: CMatrix,
    pub grid: Grid,
    pub meta: OperatorMeta,
    /// Coefficient of the left boundary value in each row. Nonzero only when the
    /// left end is closed with one-sided stencils.
    pub left_coupling: Vec<C64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.rows()
    }
}

/// Smooth cutoff: 1 for `t <= r_inner`, 0 for `t >= r_outer`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub r_inner: f64,
    pub r_outer: f64,
    pub order: usize,
}

impl CutoffSpec {
    pub fn new(r_inner: f64, r_outer: f64) -> Self {
        Self {
            r_inner,
            r_outer,
            order: 7,
        }
    }

    pub fn validate(&self, problem: &ModelProblem) -> Result<(), DiscretizeError> {
        if !smooth::is_supported_order(self.order) {
            return Err(DiscretizeError::InvalidCutoff(format!(
                "smoothstep order {} (use 3, 5 or 7)",
                self.order
            )));
        }
        let ok = problem.r0 <= self.r_inner && self.r_inner < self.r_outer && self.r_outer <= problem.r1;
        if !ok {
            return Err(DiscretizeError::InvalidCutoff(format!(
                "need R0 <= r_inner < r_outer <= R1, got {} <= {} < {} <= {}",
                problem.r0, self.r_inner, self.r_outer, problem.r1
            )));
        }
        Ok(())
    }
}

pub fn cutoff_value(cutoff: &CutoffSpec, t: f64) -> f64 {
    let x = (t - cutoff.r_inner) / (cutoff.r_outer - cutoff.r_inner);
    1.0 - smooth::smoothstep(cutoff.order, x).0
}

/// How a grid end is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Closure {
    /// Dirichlet by odd reflection: ghost values `u_{-j} = -u_j`.
    OddReflection,
    /// Dirichlet with one-sided six-point stencils next to the end.
    OneSided,
}

/// Coefficients of `a2 u'' + a1 u' + a0 u` at one node.
#[derive(Debug, Clone, Copy)]
struct NodeCoefficients {
    a2: C64,
    a1: C64,
    a0: C64,
}

struct LineAssembly<'a, F: Fn(f64) -> Result<NodeCoefficients, DiscretizeError>> {
    grid: Grid,
    left: Closure,
    right: Closure,
    coefficients: F,
    /// Potential jumps to correct for, with the metric jet at each.
    interfaces: &'a [interface::Jump],
}

type SparseRow = Vec<(usize, C64)>;

fn add_entry(row: &mut SparseRow, j: usize, v: C64) {
    if let Some(e) = row.iter_mut().find(|e| e.0 == j) {
        e.1 += v;
    } else {
        row.push((j, v));
    }
}

impl<'a, F: Fn(f64) -> Result<NodeCoefficients, DiscretizeError>> LineAssembly<'a, F> {
    fn run(&self) -> Result<(CMatrix, Vec<C64>), DiscretizeError> {
        let grid = self.grid;
        let last = grid.n_points - 1;
        let h = grid.spacing();
        let n = last - 1;
        let xs: Vec<f64> = (0..=last).map(|j| grid.node(j)).collect();

        let mut rows: Vec<SparseRow> = Vec::with_capacity(n);
        for i in 1..last {
            let k = (self.coefficients)(xs[i])?;
            let mut row: SparseRow = Vec::with_capacity(8);
            let near_left = i < 2 && self.left == Closure::OneSided;
            let near_right = i + 2 > last && self.right == Closure::OneSided;
            if near_left || near_right {
                let nodes: Vec<usize> = if near_left {
                    (0..6).collect()
                } else {
                    (last - 5..=last).collect()
                };
                let pts: Vec<f64> = nodes.iter().map(|&j| xs[j]).collect();
                let w = fornberg(xs[i], &pts, 2);
                for (idx, &j) in nodes.iter().enumerate() {
                    add_entry(&mut row, j, k.a2 * w[2][idx] + k.a1 * w[1][idx]);
                }
            } else {
                for o in 0..5 {
                    let coef = k.a2 * (D2_CENTRAL[o] / (h * h)) + k.a1 * (D1_CENTRAL[o] / h);
                    let j = i as isize + o as isize - 2;
                    if j < 0 {
                        add_entry(&mut row, (-j) as usize, -coef);
                    } else if j as usize > last {
                        add_entry(&mut row, 2 * last - j as usize, -coef);
                    } else {
                        add_entry(&mut row, j as usize, coef);
                    }
                }
            }
            add_entry(&mut row, i, k.a0);
            rows.push(row);
        }

        for jump in self.interfaces {
            interface::apply(jump, &xs, &mut rows)?;
        }

        let mut a = CMatrix::zeros(n, n);
        let mut left_coupling = vec![ZERO; n];
        for (r, row) in rows.iter().enumerate() {
            for &(j, v) in row {
                if j == 0 {
                    left_coupling[r] += v;
                } else if j == last {
                    // The right end is always homogeneous Dirichlet.
                } else {
                    a[(r, j - 1)] += v;
                }
            }
        }
        Ok((a, left_coupling))
    }
}

/// Short label identifying a model problem inside matrix metadata.
pub fn problem_label(problem: &ModelProblem) -> String {
    let geom = match problem.geometry {
        Geometry::HalfLineDirichlet => "half-line",
        Geometry::FullLine => "full-line",
    };
    let pot = match &problem.potential {
        crate::model::PotentialSpec::Zero => "zero".to_string(),
        crate::model::PotentialSpec::PiecewiseConstant(s) => format!("piecewise[{}]", s.len()),
        crate::model::PotentialSpec::RationalDecay { beta } => format!("rational[{beta}]"),
    };
    format!(
        "{geom}/{pot}/metric[{}]/R0={}/R1={}",
        problem.metric_beta, problem.r0, problem.r1
    )
}

fn check_resolution(problem: &ModelProblem, grid: &Grid) -> Result<(), DiscretizeError> {
    let h = grid.spacing();
    if problem.has_potential() && h * MIN_POINTS_PER_UNIT > 1.0 + 1e-12 {
        return Err(DiscretizeError::GridTooCoarse(format!(
            "spacing {h} gives fewer than {MIN_POINTS_PER_UNIT} points per unit length"
        )));
    }
    Ok(())
}

fn node_coefficients(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    cutoff: Option<&CutoffSpec>,
    x: f64,
) -> Result<NodeCoefficients, DiscretizeError> {
    let (g, gp, gpp) = match problem.geometry {
        Geometry::HalfLineDirichlet => contour.jet(x),
        Geometry::FullLine => contour.line_jet(x),
    };
    let jet = problem.metric(g)?;
    let c = problem.potential_at(g)?;
    let gp2 = gp * gp;
    let a2 = -jet.m / gp2;
    let a1 = -jet.dm / gp + jet.m * gpp / (gp2 * gp);
    let absorb = match cutoff {
        Some(cut) if epsilon != 0.0 => 1.0 - cutoff_value(cut, x.abs()),
        _ => 0.0,
    };
    let a0 = c - I * (epsilon * absorb) * g * g;
    Ok(NodeCoefficients { a2, a1, a0 })
}

fn jumps_in(problem: &ModelProblem, lo: f64, hi: f64, h: f64) -> Result<Vec<interface::Jump>, DiscretizeError> {
    let mut out = Vec::new();
    for (s, jump) in problem.interfaces() {
        if s <= lo || s >= hi {
            continue;
        }
        let jet = problem.metric(C64::new(s, 0.0))?;
        out.push(interface::Jump {
            position: s,
            jump,
            m: jet.m.re,
            dm: jet.dm.re,
            d2m: jet.d2m.re,
        });
    }
    interface::check_spacing(&out, lo, hi, h)?;
    Ok(out)
}

/// Matrix of the scaled CAP operator on `[0, L]` (half-line) or `[-L, L]`
/// (full line) with Dirichlet ends.
pub fn assemble_scaled_operator(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    cutoff: &CutoffSpec,
    grid: &Grid,
) -> Result<OperatorMatrix, DiscretizeError> {
    grid.validate()?;
    cutoff.validate(problem)?;
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(DiscretizeError::Unsupported(format!("epsilon = {epsilon}")));
    }
    let l = grid.t_max;
    match problem.geometry {
        Geometry::HalfLineDirichlet if grid.t_min != 0.0 => {
            return Err(DiscretizeError::InvalidGrid("half-line grids start at 0".into()))
        }
        Geometry::FullLine if (grid.t_min + l).abs() > 1e-12 * l => {
            return Err(DiscretizeError::InvalidGrid("full-line grids are symmetric".into()))
        }
        _ => {}
    }
    if !contour.is_identity() && l <= contour.t0() {
        return Err(DiscretizeError::DomainTooSmall(format!(
            "L = {l} must exceed T0 = {}",
            contour.t0()
        )));
    }
    check_resolution(problem, grid)?;
    let jumps = jumps_in(problem, grid.t_min, grid.t_max, grid.spacing())?;
    let asm = LineAssembly {
        grid: *grid,
        left: Closure::OddReflection,
        right: Closure::OddReflection,
        coefficients: |x| node_coefficients(problem, contour, epsilon, Some(cutoff), x),
        interfaces: &jumps,
    };
    let (entries, left_coupling) = asm.run()?;
    Ok(OperatorMatrix {
        entries,
        grid: *grid,
        meta: OperatorMeta {
            epsilon,
            theta: contour.theta(),
            problem_id: problem_label(problem),
            boundary: "dirichlet-both".into(),
            kind: OperatorKind::Scaled,
        },
        left_coupling,
    })
}

/// Matrix of `-e^{-2i theta} d^2/dx^2 - i eps e^{2i theta} x^2` on `[-L, L]`.
pub fn assemble_davies(epsilon: f64, theta: f64, grid: &Grid) -> Result<OperatorMatrix, DiscretizeError> {
    grid.validate()?;
    if !(epsilon > 0.0) {
        return Err(DiscretizeError::Unsupported(format!("epsilon = {epsilon} must be positive")));
    }
    let l = grid.t_max.min(-grid.t_min);
    if epsilon.powf(0.25) * l < DAVIES_MIN_DECAY_LENGTHS {
        return Err(DiscretizeError::DomainTooSmall(format!(
            "eps^(1/4) L = {} < {DAVIES_MIN_DECAY_LENGTHS}",
            epsilon.powf(0.25) * l
        )));
    }
    let a2 = -C64::from_polar(1.0, -2.0 * theta);
    let pot = -I * epsilon * C64::from_polar(1.0, 2.0 * theta);
    let asm = LineAssembly {
        grid: *grid,
        left: Closure::OddReflection,
        right: Closure::OddReflection,
        coefficients: |x: f64| {
            Ok(NodeCoefficients {
                a2,
                a1: ZERO,
                a0: pot * (x * x),
            })
        },
        interfaces: &[],
    };
    let (entries, left_coupling) = asm.run()?;
    Ok(OperatorMatrix {
        entries,
        grid: *grid,
        meta: OperatorMeta {
            epsilon,
            theta,
            problem_id: "davies".into(),
            boundary: "dirichlet-both".into(),
            kind: OperatorKind::Davies,
        },
        left_coupling,
    })
}

fn half_line_only(problem: &ModelProblem) -> Result<(), DiscretizeError> {
    if problem.geometry != Geometry::HalfLineDirichlet {
        return Err(DiscretizeError::Unsupported(
            "interior/exterior splitting needs a half-line problem".into(),
        ));
    }
    Ok(())
}

/// The unscaled operator on `[0, a]` with Dirichlet conditions at both ends.
pub fn assemble_interior_reference(
    problem: &ModelProblem,
    a: f64,
    spacing: f64,
) -> Result<OperatorMatrix, DiscretizeError> {
    half_line_only(problem)?;
    let grid = Grid::with_spacing(0.0, a, spacing)?;
    check_resolution(problem, &grid)?;
    let identity = ScalingContour::identity(problem.r1);
    let jumps = jumps_in(problem, 0.0, a, grid.spacing())?;
    let asm = LineAssembly {
        grid,
        left: Closure::OddReflection,
        right: Closure::OneSided,
        coefficients: |x| node_coefficients(problem, &identity, 0.0, None, x),
        interfaces: &jumps,
    };
    let (entries, left_coupling) = asm.run()?;
    Ok(OperatorMatrix {
        entries,
        grid,
        meta: OperatorMeta {
            epsilon: 0.0,
            theta: 0.0,
            problem_id: problem_label(problem),
            boundary: "dirichlet-both".into(),
            kind: OperatorKind::InteriorRef,
        },
        left_coupling,
    })
}

/// The scaled CAP operator on `[a, L]` with Dirichlet conditions at both
/// ends. Rows next to `a` use one-sided stencils, and their coupling to the
/// boundary value at `a` is kept in `left_coupling`.
pub fn assemble_exterior_reference(
    problem: &ModelProblem,
    contour: &ScalingContour,
    epsilon: f64,
    cutoff: &CutoffSpec,
    a: f64,
    length: f64,
    spacing: f64,
) -> Result<OperatorMatrix, DiscretizeError> {
    half_line_only(problem)?;
    cutoff.validate(problem)?;
    if !(a > problem.r0 && a < problem.r1) {
        return Err(DiscretizeError::Unsupported(format!(
            "interface a = {a} must lie in (R0, R1) = ({}, {})",
            problem.r0, problem.r1
        )));
    }
    if !contour.is_identity() && length <= contour.t0() {
        return Err(DiscretizeError::DomainTooSmall(format!(
            "L = {length} must exceed T0 = {}",
            contour.t0()
        )));
    }
    let grid = Grid::with_spacing(a, length, spacing)?;
    check_resolution(problem, &grid)?;
    let jumps = jumps_in(problem, a, length, grid.spacing())?;
    let asm = LineAssembly {
        grid,
        left: Closure::OneSided,
        right: Closure::OddReflection,
        coefficients: |x| node_coefficients(problem, contour, epsilon, Some(cutoff), x),
        interfaces: &jumps,
    };
    let (entries, left_coupling) = asm.run()?;
    Ok(OperatorMatrix {
        entries,
        grid,
        meta: OperatorMeta {
            epsilon,
            theta: contour.theta(),
            problem_id: problem_label(problem),
            boundary: "dirichlet-both".into(),
            kind: OperatorKind::ExteriorRef,
        },
        left_coupling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::build_contour;
    use crate::eigen::eig_dense;
    use std::f64::consts::PI;

    fn lowest(op: &OperatorMatrix) -> C64 {
        let ev = eig_dense(&op.entries).unwrap().eigenvalues;
        *ev.iter().min_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap()
    }

    #[test]
    fn cutoff_values() {
        let c = CutoffSpec::new(2.0, 3.0);
        assert_eq!(cutoff_value(&c, 1.0), 1.0);
        assert_eq!(cutoff_value(&c, 6.0), 0.0);
        assert!((cutoff_value(&c, 2.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn free_dirichlet_lowest_eigenvalue() {
        let p = ModelProblem::free_half_line(1.0, 3.0);
        let c = ScalingContour::identity(3.0);
        let grid = Grid::new(0.0, 10.0, 801).unwrap();
        let op = assemble_scaled_operator(&p, &c, 0.0, &CutoffSpec::new(1.0, 2.0), &grid).unwrap();
        assert!(op.entries.max_asymmetry() < 1e-12);
        let exact = (PI / 10.0).powi(2);
        assert!((lowest(&op) - exact).norm() < 1e-6);
    }

    #[test]
    fn interior_reference_matches_box_spectrum() {
        let p = ModelProblem::free_half_line(1.0, 3.0);
        let op = assemble_interior_reference(&p, 2.5, 0.01).unwrap();
        let exact = (PI / 2.5).powi(2);
        assert!((lowest(&op) - exact).norm() < 1e-7);
    }

    #[test]
    fn exterior_reference_matches_box_spectrum() {
        let p = ModelProblem::free_half_line(1.0, 3.0);
        let c = ScalingContour::identity(3.0);
        let op = assemble_exterior_reference(&p, &c, 0.0, &CutoffSpec::new(1.0, 2.0), 2.5, 7.5, 0.01)
            .unwrap();
        let exact = (PI / 5.0).powi(2);
        assert!((lowest(&op) - exact).norm() < 1e-7);
    }

    #[test]
    fn linear_in_epsilon() {
        let p = ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0);
        let c = build_contour(0.2, 3.0, 0.4).unwrap();
        let cut = CutoffSpec::new(2.2, 2.8);
        let grid = Grid::new(0.0, 20.0, 201).unwrap();
        let a = assemble_scaled_operator(&p, &c, 0.01, &cut, &grid).unwrap();
        let b = assemble_scaled_operator(&p, &c, 0.03, &cut, &grid).unwrap();
        let d = b.entries.sub(&a.entries);
        for (r, &x) in grid.interior_nodes().iter().enumerate() {
            let g = c.jet(x).0;
            let want = -I * 0.02 * (1.0 - cutoff_value(&cut, x)) * g * g;
            assert!((d[(r, r)] - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
        let off: f64 = (0..d.rows())
            .flat_map(|i| (0..d.cols()).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j)].norm())
            .fold(0.0, f64::max);
        assert_eq!(off, 0.0);
    }

    #[test]
    fn coarse_grid_rejected() {
        let p = ModelProblem::barrier(1.0, 2.0, 10.0, 2.0, 3.0);
        let c = ScalingContour::identity(3.0);
        let grid = Grid::new(0.0, 10.0, 60).unwrap();
        let err = assemble_scaled_operator(&p, &c, 0.0, &CutoffSpec::new(2.2, 2.8), &grid).unwrap_err();
        assert!(matches!(err, DiscretizeError::GridTooCoarse(_)));
    }

    #[test]
    fn davies_domain_check() {
        let grid = Grid::new(-5.0, 5.0, 200).unwrap();
        assert!(matches!(
            assemble_davies(1.0, 0.0, &grid),
            Err(DiscretizeError::DomainTooSmall(_))
        ));
    }
}
