//! Thin `libm` shims so the kernels read like `std` float code.

use core::f64::consts::{FRAC_PI_2, PI, TAU};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sincos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}
#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}
#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}
#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn round(x: f64) -> f64 {
    libm::round(x)
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = x - TAU * floor((x + PI) / TAU);
    if r <= -PI {
        r + TAU
    } else if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Reduces an angle to `(-pi/2, pi/2]`, the range of a principal arctangent.
pub fn wrap_half_pi(x: f64) -> f64 {
    let r = x - PI * floor((x + FRAC_PI_2) / PI);
    if r <= -FRAC_PI_2 {
        r + PI
    } else if r > FRAC_PI_2 {
        r - PI
    } else {
        r
    }
}

/// `(1 - x)(1 + x)` without cancellation near `|x| = 1`.
#[inline]
pub fn one_minus_sq(x: f64) -> f64 {
    (1.0 - x) * (1.0 + x)
}

/// `(x - 1)(x + 1)` without cancellation near `x = 1`.
#[inline]
pub fn sq_minus_one(x: f64) -> f64 {
    (x - 1.0) * (x + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_half_open_ranges() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(15.2) - (15.2 - 2.0 * TAU)).abs() < 1e-14);
        assert_eq!(wrap_half_pi(FRAC_PI_2), FRAC_PI_2);
        assert!((wrap_half_pi(-FRAC_PI_2) - FRAC_PI_2).abs() < 1e-15);
        assert!((wrap_half_pi(3.0) - (3.0 - PI)).abs() < 1e-15);
    }
}
