//! Polynomial smoothsteps and the ramp profile built from them.

/// Smoothstep of odd `order` (3, 5 or 7) on `[0, 1]`, clamped outside, with its
/// first derivative. Order 7 joins its end values with three vanishing derivatives.
pub fn smoothstep(order: usize, x: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0);
    }
    if x >= 1.0 {
        return (1.0, 0.0);
    }
    match order {
        3 => (x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x)),
        5 => {
            let v = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
            let d = 30.0 * x * x * (1.0 - x) * (1.0 - x);
            (v, d)
        }
        7 => (s7(x), ds7(x)),
        _ => panic!("unsupported smoothstep order {order}"),
    }
}

pub fn is_supported_order(order: usize) -> bool {
    matches!(order, 3 | 5 | 7)
}

#[inline]
pub(crate) fn s7(x: f64) -> f64 {
    let x4 = x * x * x * x;
    x4 * (35.0 + x * (-84.0 + x * (70.0 - 20.0 * x)))
}

#[inline]
pub(crate) fn ds7(x: f64) -> f64 {
    let u = x * (1.0 - x);
    140.0 * u * u * u
}

/// Antiderivative of `s7` vanishing at 0; equals 1/2 at 1.
#[inline]
pub(crate) fn int_s7(x: f64) -> f64 {
    let x5 = x * x * x * x * x;
    x5 * (7.0 + x * (-14.0 + x * (10.0 - 2.5 * x)))
}
