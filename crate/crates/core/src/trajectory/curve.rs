//! The trajectory equation as an implicit curve in the signed meridian plane.

use crate::coords::PhysicalParams;
use crate::error::{Error, Result};
use crate::math::{hypot, sincos};
use crate::roots::solve_near;

use super::MotionConstant;

/// `G(rho, z)` for a fixed slope `c = k_z / k_rho`; trajectories are its zero set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeridianCurve {
    c: f64,
    k: f64,
    a: f64,
}

impl MeridianCurve {
    /// Curve for a constant of the motion; axial constants have no finite slope.
    pub fn new(constant: &MotionConstant, params: &PhysicalParams) -> Result<Self> {
        if constant.is_axial() {
            return Err(Error::DegenerateDirection);
        }
        Ok(Self::from_slope(constant.eta_a() / constant.q(), params))
    }

    pub(crate) fn from_slope(c: f64, params: &PhysicalParams) -> Self {
        MeridianCurve {
            c,
            k: params.wavenumber(),
            a: params.separation(),
        }
    }

    /// Slope `c`.
    pub fn slope(&self) -> f64 {
        self.c
    }

    /// Source separation.
    pub fn separation(&self) -> f64 {
        self.a
    }

    /// Wavenumber.
    pub fn wavenumber(&self) -> f64 {
        self.k
    }

    /// Residual at signed `rho`.
    pub fn value(&self, rho: f64, z: f64) -> f64 {
        let (u, v) = (z + 0.5 * self.a, z - 0.5 * self.a);
        let (r1, r2) = (hypot(rho, u), hypot(rho, v));
        let cr = self.c * rho;
        r2 * r2 * (u - cr)
            + r1 * r1 * (v - cr)
            + 2.0 * r1 * r2 * libm::cos(self.k * (r1 - r2)) * (z - cr)
    }

    /// Residual and its gradient `(dG/drho, dG/dz)`; the gradient is undefined at the foci.
    pub fn value_and_grad(&self, rho: f64, z: f64) -> (f64, f64, f64) {
        let (c, k) = (self.c, self.k);
        let (u, v) = (z + 0.5 * self.a, z - 0.5 * self.a);
        let (r1, r2) = (hypot(rho, u), hypot(rho, v));
        let (a1, a2, a0) = (u - c * rho, v - c * rho, z - c * rho);
        let (sn, cs) = sincos(k * (r1 - r2));
        let g = r2 * r2 * a1 + r1 * r1 * a2 + 2.0 * r1 * r2 * cs * a0;
        let p = r1 * r2;
        let sum_sq = r1 * r1 + r2 * r2;
        let g_rho = 2.0 * rho * (a1 + a2) - c * sum_sq + 2.0 * rho * sum_sq / p * cs * a0
            - 2.0 * sn * k * rho * (r2 - r1) * a0
            - 2.0 * c * p * cs;
        let g_z = 2.0 * v * a1
            + r2 * r2
            + 2.0 * u * a2
            + r1 * r1
            + 2.0 * (u * r2 * r2 + v * r1 * r1) / p * cs * a0
            - 2.0 * sn * k * (u * r2 - v * r1) * a0
            + 2.0 * p * cs;
        (g, g_rho, g_z)
    }

    /// Sum of the magnitudes of the three weighted terms.
    pub fn scale(&self, rho: f64, z: f64) -> f64 {
        let (u, v) = (z + 0.5 * self.a, z - 0.5 * self.a);
        let (r1, r2) = (hypot(rho, u), hypot(rho, v));
        let cr = self.c * rho;
        r2 * r2 * (u - cr).abs() + r1 * r1 * (v - cr).abs() + 2.0 * r1 * r2 * (z - cr).abs()
    }

    /// Projects `p` onto the curve along the local normal, moving at most about `h`.
    pub fn project(&self, p: (f64, f64), h: f64, tol: f64, max_iter: usize) -> Option<(f64, f64)> {
        let (_, gr, gz) = self.value_and_grad(p.0, p.1);
        let n = hypot(gr, gz);
        if !(n > 0.0 && n.is_finite()) {
            return None;
        }
        let (nr, nz) = (gr / n, gz / n);
        // near a saddle of G a residual bound alone would admit a neighbouring level set
        let ftol = tol * self.scale(p.0, p.1).min(1e2 * n * self.a).max(1e-300);
        let s = solve_near(
            |s| self.value(p.0 + s * nr, p.1 + s * nz),
            0.0,
            n,
            h,
            ftol,
            max_iter,
            6,
        )?;
        Some((p.0 + s * nr, p.1 + s * nz))
    }

    /// Unit tangent `(-dG/dz, dG/drho) / |grad G|`.
    pub fn tangent(&self, rho: f64, z: f64) -> Option<(f64, f64)> {
        let (_, gr, gz) = self.value_and_grad(rho, z);
        let n = hypot(gr, gz);
        (n > 0.0 && n.is_finite()).then(|| (-gz / n, gr / n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_differences() {
        let params = PhysicalParams::default();
        let m = MeridianCurve::from_slope(-0.17, &params);
        for &(r, z) in &[(0.3, 0.1), (-0.8, 0.4), (2.0, -1.3), (0.01, 0.2)] {
            let (_, gr, gz) = m.value_and_grad(r, z);
            let h = 1e-6;
            let fr = (m.value(r + h, z) - m.value(r - h, z)) / (2.0 * h);
            let fz = (m.value(r, z + h) - m.value(r, z - h)) / (2.0 * h);
            assert!((gr - fr).abs() < 1e-6 * (1.0 + fr.abs()), "{gr} {fr}");
            assert!((gz - fz).abs() < 1e-6 * (1.0 + fz.abs()), "{gz} {fz}");
        }
    }

    #[test]
    fn axis_between_foci_factorises() {
        let params = PhysicalParams::default();
        let m = MeridianCurve::from_slope(0.4, &params);
        for z in [-0.3, 0.05, 0.2] {
            let expect = (0.25 - z * z) * 2.0 * z * (libm::cos(2.0 * 15.2 * z) - 1.0);
            assert!((m.value(0.0, z) - expect).abs() < 1e-14);
        }
        let (_, gr, _) = m.value_and_grad(0.0, core::f64::consts::PI / 15.2);
        assert!((gr + 0.4).abs() < 1e-12);
    }

    #[test]
    fn point_reflection_is_odd() {
        let params = PhysicalParams::default();
        let m = MeridianCurve::from_slope(0.7, &params);
        for &(r, z) in &[(0.3, 0.1), (1.1, -0.4)] {
            assert!((m.value(-r, -z) + m.value(r, z)).abs() < 1e-12);
        }
    }
}
