//! Small numeric helpers shared by the controllers and planners.

use std::f64::consts::PI;

/// Sign with `sgn(0) = 0`.
#[inline]
pub fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Switching function used by the sliding-mode laws.
///
/// `width <= 0` gives the discontinuous sign; otherwise the linear ramp
/// `clamp(x / width, -1, 1)`.
#[inline]
pub fn switching(x: f64, width: f64) -> f64 {
    if width > 0.0 {
        (x / width).clamp(-1.0, 1.0)
    } else {
        sgn(x)
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn sign_of_zero_is_zero() {
        assert_eq!(sgn(0.0), 0.0);
        assert_eq!(switching(0.0, 0.0), 0.0);
        assert_eq!(switching(-3.0, 0.0), -1.0);
        assert_eq!(switching(0.005, 0.01), 0.5);
        assert_eq!(switching(1.0, 0.01), 1.0);
    }
}
