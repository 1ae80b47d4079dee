//! Winding numbers of closed curves by adaptive phase unwrapping.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::linalg::C64;

/// Sub-interval depth limit for the adaptive sampler.
pub const MAX_REFINEMENT_LEVELS: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Function evaluations, including the refinement points.
    pub samples: usize,
    pub min_modulus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindingFailure<E> {
    /// The phase could not be resolved near parameter `s` (likely a zero on the curve).
    Unresolved { s: f64, modulus: f64 },
    Eval(E),
}

/// Counts how often `f(gamma(s))` winds around the origin as `s` runs over
/// `[0, 1]`. `f` receives the curve parameter; `f(1)` must equal `f(0)`.
/// Each of the `initial` uniform intervals is bisected until its phase
/// increment is below pi/2, to at most [`MAX_REFINEMENT_LEVELS`] levels.
pub fn winding_number<E>(
    mut f: impl FnMut(f64) -> Result<C64, E>,
    initial: usize,
    tiny: f64,
) -> Result<Winding, WindingFailure<E>> {
    let initial = initial.max(4);
    let mut samples = 0usize;
    let mut min_modulus = f64::INFINITY;
    let mut eval = |s: f64, samples: &mut usize, min_modulus: &mut f64| -> Result<C64, WindingFailure<E>> {
        let v = f(s).map_err(WindingFailure::Eval)?;
        *samples += 1;
        let m = v.norm();
        *min_modulus = min_modulus.min(m);
        if !(m > tiny) || !m.is_finite() {
            return Err(WindingFailure::Unresolved { s, modulus: m });
        }
        Ok(v)
    };
    let f0 = eval(0.0, &mut samples, &mut min_modulus)?;
    let mut total = 0.0;
    let mut prev = (0.0, f0);
    for k in 1..=initial {
        let s1 = k as f64 / initial as f64;
        let f1 = if k == initial {
            f0
        } else {
            eval(s1, &mut samples, &mut min_modulus)?
        };
        // Depth-first bisection with an explicit stack of right halves.
        let mut stack = vec![(s1, f1, 0u32)];
        let mut left = prev;
        while let Some(&(sr, fr, level)) = stack.last() {
            let d = (fr / left.1).arg();
            if d.abs() < FRAC_PI_2 {
                total += d;
                left = (sr, fr);
                stack.pop();
                continue;
            }
            if level >= MAX_REFINEMENT_LEVELS {
                return Err(WindingFailure::Unresolved {
                    s: 0.5 * (left.0 + sr),
                    modulus: fr.norm().min(left.1.norm()),
                });
            }
            let sm = 0.5 * (left.0 + sr);
            let fm = eval(sm, &mut samples, &mut min_modulus)?;
            let top = stack.len() - 1;
            stack[top].2 = level + 1;
            stack.push((sm, fm, level + 1));
        }
        prev = (s1, f1);
    }
    let w = total / (2.0 * PI);
    Ok(Winding {
        winding: w.round() as i64,
        samples,
        min_modulus,
    })
}

/// Point on the circle `center + radius e^{2 pi i s}`.
pub fn circle_point(center: C64, radius: f64, s: f64) -> C64 {
    center + C64::from_polar(radius, 2.0 * PI * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_winding(center: C64, r: f64, f: impl Fn(C64) -> C64) -> i64 {
        winding_number::<()>(|s| Ok(f(circle_point(center, r, s))), 16, 1e-300)
            .unwrap()
            .winding
    }

    #[test]
    fn counts_zeros_minus_poles() {
        let f = |z: C64| (z - 0.5) * (z + C64::new(0.0, 0.3)) / (z - C64::new(0.2, 0.2));
        assert_eq!(circle_winding(C64::new(0.0, 0.0), 1.0, f), 1);
        assert_eq!(circle_winding(C64::new(0.5, 0.0), 0.1, f), 1);
        assert_eq!(circle_winding(C64::new(0.2, 0.2), 0.05, f), -1);
        assert_eq!(circle_winding(C64::new(3.0, 0.0), 0.5, f), 0);
    }

    #[test]
    fn high_degree_needs_refinement() {
        let f = |z: C64| z.powi(40);
        let w = winding_number::<()>(|s| Ok(f(circle_point(C64::new(0.0, 0.0), 1.0, s))), 64, 0.0).unwrap();
        assert_eq!(w.winding, 40);
        // Each of the 64 arcs turns by 0.625 revolutions and needs two bisections.
        assert_eq!(w.samples, 64 * 4);
    }

    #[test]
    fn zero_on_curve_is_reported() {
        let r = winding_number::<()>(|s| Ok(circle_point(C64::new(1.0, 0.0), 1.0, s)), 8, 1e-12);
        assert!(matches!(r, Err(WindingFailure::Unresolved { .. })));
    }
}
