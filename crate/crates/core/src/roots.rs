//! Scalar root finders shared by the contour and trajectory correctors.

/// Illinois-modified regula falsi on a sign-changing bracket.
///
/// Returns once `|f| <= ftol` or the bracket is narrower than `xtol`.
pub fn illinois<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    ftol: f64,
    xtol: f64,
    max_iter: usize,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut x = (a * fb - b * fa) / (fb - fa);
        if !x.is_finite() || x <= a.min(b) || x >= a.max(b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx.abs() <= ftol || (b - a).abs() <= xtol {
            return Some(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    let x = if fa.abs() < fb.abs() { a } else { b };
    ((b - a).abs() <= 1e3 * xtol).then_some(x)
}

/// Secant iteration from `x0` with a Newton-like second point, falling back
/// to a symmetric bracket search of half-width up to `h * 2^expansions`.
pub fn solve_near<F: FnMut(f64) -> f64>(
    mut f: F,
    x0: f64,
    slope: f64,
    h: f64,
    ftol: f64,
    max_iter: usize,
    expansions: u32,
) -> Option<f64> {
    let f0 = f(x0);
    if f0.abs() <= ftol {
        return Some(x0);
    }
    if slope != 0.0 && slope.is_finite() {
        let mut xa = x0;
        let mut fa = f0;
        let mut xb = x0 - f0 / slope;
        if (xb - x0).abs() <= h {
            for _ in 0..max_iter {
                let fb = f(xb);
                if fb.abs() <= ftol {
                    if (xb - x0).abs() <= h {
                        return Some(xb);
                    }
                    break;
                }
                if !fb.is_finite() || fb == fa || (xb - x0).abs() > h {
                    break;
                }
                let xn = xb - fb * (xb - xa) / (fb - fa);
                xa = xb;
                fa = fb;
                xb = xn;
            }
        }
    }
    let mut w = h;
    for _ in 0..=expansions {
        let (a, b) = (x0 - w, x0 + w);
        let (fa, fb) = (f(a), f(b));
        if fa.signum() != f0.signum() || fb.signum() != f0.signum() {
            let right =
                fb.signum() != f0.signum() && (fa.signum() == f0.signum() || fb.abs() <= fa.abs());
            let (lo, hi, flo, fhi) = if right {
                (x0, b, f0, fb)
            } else {
                (a, x0, fa, f0)
            };
            return illinois(
                &mut f,
                lo,
                hi,
                flo,
                fhi,
                ftol,
                1e-15 * (1.0 + x0.abs()),
                4 * max_iter,
            );
        }
        w *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let r = illinois(f, 0.0, 2.0, -2.0, 6.0, 1e-14, 1e-15, 200).unwrap();
        assert!((r - libm::cbrt(2.0)).abs() < 1e-12);
        let s = solve_near(f, 1.0, 3.0, 0.5, 1e-14, 50, 8).unwrap();
        assert!((s - libm::cbrt(2.0)).abs() < 1e-12);
    }
}
