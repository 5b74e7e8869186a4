//! Reduced action of the two-source superposition.
//!
//! `W = hbar * arg(psi_1 + psi_2)`. The principal value is the arctangent
//! branch of
//!
//! ```text
//! tan(W/hbar) = (r2 sin k r1 + r1 sin k r2) / (r2 cos k r1 + r1 cos k r2)
//! ```
//!
//! The superposition never vanishes away from the foci, so the phase unwraps
//! to a single-valued field. It is anchored so that
//! `W(origin) = (ka/2 - 2 pi) hbar` and in closed form reads
//!
//! ```text
//! W/hbar = ka xi / 2 - arg(xi cos d + i e sin d) - 2 pi,   d = ka e / 2, e = |eta|
//! ```
//!
//! where the argument is taken continuously from `0` at `e = 0`.
//! All values here are expressed in multiples of `hbar`.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use crate::coords::{PhysicalParams, Point, ProlatePoint};
use crate::error::{domain, Error, Result};
use crate::math::{atan2, sincos, wrap_half_pi, wrap_pi};
use crate::wavefield::psi_dispherical;

mod contour;

pub use contour::{
    critical_merge_level, find_wrinkles, trace_action_contour, ActionContour, ContourBranch,
    ContourControls, ContourVertex, Topology, Window,
};

/// Unit an action level is quoted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ActionUnit {
    /// Reduced Planck constant.
    Hbar,
    /// Planck constant `h = 2 pi hbar`.
    H,
}

impl ActionUnit {
    /// Size of the unit in multiples of `hbar`.
    pub fn in_hbar(self) -> f64 {
        match self {
            ActionUnit::Hbar => 1.0,
            ActionUnit::H => TAU,
        }
    }

    /// Short tag, `hbar` or `h`.
    pub fn tag(self) -> &'static str {
        match self {
            ActionUnit::Hbar => "hbar",
            ActionUnit::H => "h",
        }
    }
}

/// Action level with an explicit unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionLevel {
    /// Numerical value in `unit`.
    pub value: f64,
    /// Unit of `value`.
    pub unit: ActionUnit,
}

impl ActionLevel {
    /// Level in multiples of `hbar`.
    pub fn hbar(value: f64) -> Self {
        ActionLevel {
            value,
            unit: ActionUnit::Hbar,
        }
    }

    /// Level in multiples of `h`.
    pub fn h(value: f64) -> Self {
        ActionLevel {
            value,
            unit: ActionUnit::H,
        }
    }

    /// The level in multiples of `hbar`.
    pub fn in_hbar(&self) -> f64 {
        self.value * self.unit.in_hbar()
    }

    /// Converts a value in multiples of `hbar` to this level's unit.
    pub fn to_unit(&self, w_hbar: f64) -> f64 {
        w_hbar / self.unit.in_hbar()
    }
}

/// Principal and unwrapped action at one point, in multiples of `hbar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    /// Arctangent branch, in `(-pi/2, pi/2]`.
    pub principal: f64,
    /// Continuous value anchored at the origin.
    pub unwrapped: f64,
}

impl ActionValue {
    /// Unwrapped value in multiples of `h`.
    pub fn unwrapped_h(&self) -> f64 {
        self.unwrapped / TAU
    }

    /// Builds both values from an unwrapped one.
    pub fn from_unwrapped(unwrapped: f64) -> Self {
        ActionValue {
            principal: wrap_half_pi(unwrapped),
            unwrapped,
        }
    }
}

fn checked<P: Point>(p: &P, params: &PhysicalParams) -> Result<ProlatePoint> {
    p.validate()?;
    let q = p.to_prolate(params.separation());
    let fd = p.focal_distances(params.separation());
    if fd.r1 <= 0.0 || fd.r2 <= 0.0 {
        return Err(Error::Singularity);
    }
    Ok(q)
}

/// Numerator and denominator of the tangent ratio in prolate form.
pub fn action_ratio_prolate(xi: f64, eta: f64, ka: f64) -> (f64, f64) {
    let (s1, c1) = sincos(0.5 * ka * (xi + eta));
    let (s2, c2) = sincos(0.5 * ka * (xi - eta));
    (
        (xi - eta) * s1 + (xi + eta) * s2,
        (xi - eta) * c1 + (xi + eta) * c2,
    )
}

/// Numerator and denominator of the tangent ratio in cylindrical form.
pub fn action_ratio_cyl(rho: f64, z: f64, params: &PhysicalParams) -> (f64, f64) {
    let a = params.separation();
    let k = params.wavenumber();
    let r1 = libm::hypot(rho, z + 0.5 * a);
    let r2 = libm::hypot(rho, z - 0.5 * a);
    let (s1, c1) = sincos(k * r1);
    let (s2, c2) = sincos(k * r2);
    (r2 * s1 + r1 * s2, r2 * c1 + r1 * c2)
}

fn principal_of(ratio: (f64, f64)) -> f64 {
    wrap_half_pi(atan2(ratio.0, ratio.1))
}

/// Principal value from the prolate form, in multiples of `hbar`.
pub fn principal_prolate(xi: f64, eta: f64, params: &PhysicalParams) -> f64 {
    principal_of(action_ratio_prolate(xi, eta, params.ka()))
}

/// Principal value from the cylindrical form, in multiples of `hbar`.
pub fn principal_cyl(rho: f64, z: f64, params: &PhysicalParams) -> f64 {
    principal_of(action_ratio_cyl(rho, z, params))
}

/// Principal reduced action at a point.
pub fn reduced_action_principal<P: Point>(p: &P, params: &PhysicalParams) -> Result<f64> {
    let q = checked(p, params)?;
    Ok(principal_prolate(q.xi, q.eta, params))
}

/// Closed-form unwrapped action `W/hbar` at prolate `(xi, eta)`.
///
/// Finite everywhere including the foci, where it equals `-2 pi`.
pub fn unwrapped_closed_form(xi: f64, eta: f64, ka: f64) -> f64 {
    0.5 * ka * xi - winding(xi, eta.abs(), ka) - TAU
}

/// `arg(xi cos d + i e sin d)` continued from zero at `e = 0`, for `e >= 0`.
fn winding(xi: f64, e: f64, ka: f64) -> f64 {
    let d = 0.5 * ka * e;
    let (s2, c2) = sincos(2.0 * d);
    let (hp, hm) = (0.5 * (xi + e), 0.5 * (xi - e));
    d + atan2(-hm * s2, hp + hm * c2)
}

/// Gradient `(dW/dxi, dW/deta)` of the unwrapped action in multiples of `hbar`.
pub fn unwrapped_gradient(xi: f64, eta: f64, ka: f64) -> (f64, f64) {
    let e = eta.abs();
    let d = 0.5 * ka * e;
    let (s, c) = sincos(d);
    // w = xi cos d + i e sin d
    let (wr, wi) = (xi * c, e * s);
    let n = wr * wr + wi * wi;
    // d arg w = Im(dw * conj w) / |w|^2
    let (dxr, dxi) = (c, 0.0);
    let (der, dei) = (-xi * s * 0.5 * ka, s + e * c * 0.5 * ka);
    let phi_xi = (dxi * wr - dxr * wi) / n;
    let phi_e = (dei * wr - der * wi) / n;
    let sgn = if eta < 0.0 { -1.0 } else { 1.0 };
    (0.5 * ka - phi_xi, -sgn * phi_e)
}

/// Principal and unwrapped action at a point.
pub fn reduced_action_unwrapped<P: Point>(p: &P, params: &PhysicalParams) -> Result<ActionValue> {
    let q = checked(p, params)?;
    let unwrapped = unwrapped_closed_form(q.xi, q.eta, params.ka());
    Ok(ActionValue {
        principal: principal_prolate(q.xi, q.eta, params),
        unwrapped,
    })
}

/// Unwraps the phase of `psi_d` along a polyline starting at the origin.
///
/// The origin is prepended. Segments are interpolated linearly in
/// `(xi, eta)`, cut into pieces no longer than `1 / (4 ka)` and bisected
/// until each phase step is below 0.5 rad and agrees with its two halves.
pub fn unwrap_along_path(path: &[ProlatePoint], params: &PhysicalParams) -> Result<ActionValue> {
    let origin = ProlatePoint::new(1.0, 0.0);
    let mut w = 0.5 * params.ka() - TAU;
    let anchor = psi_dispherical(&origin, params)?.phase_principal;
    if wrap_pi(anchor - w).abs() > 1e-9 {
        return Err(domain("anchor phase", anchor));
    }
    let mut prev = origin;
    let mut prev_phase = anchor;
    for &p in path {
        p.validate()?;
        let len = libm::hypot(p.xi - prev.xi, p.eta - prev.eta);
        let n = libm::ceil(4.0 * params.ka() * len).max(1.0) as usize;
        for i in 1..=n {
            let t = i as f64 / n as f64;
            let q = ProlatePoint::new(
                prev.xi + t * (p.xi - prev.xi),
                prev.eta + t * (p.eta - prev.eta),
            );
            let a = ProlatePoint::new(
                prev.xi + (t - 1.0 / n as f64) * (p.xi - prev.xi),
                prev.eta + (t - 1.0 / n as f64) * (p.eta - prev.eta),
            );
            let qp = psi_dispherical(&q, params)?.phase_principal;
            w += phase_increment(a, prev_phase, q, qp, params, 0)?;
            prev_phase = qp;
        }
        prev = p;
    }
    Ok(ActionValue::from_unwrapped(w))
}

fn phase_increment(
    a: ProlatePoint,
    pa: f64,
    b: ProlatePoint,
    pb: f64,
    params: &PhysicalParams,
    depth: u32,
) -> Result<f64> {
    let step = wrap_pi(pb - pa);
    let m = ProlatePoint::new(0.5 * (a.xi + b.xi), 0.5 * (a.eta + b.eta));
    let pm = psi_dispherical(&m, params)?.phase_principal;
    let (h1, h2) = (wrap_pi(pm - pa), wrap_pi(pb - pm));
    if (step.abs() <= 0.5 && (h1 + h2 - step).abs() < 1e-9) || depth >= 48 {
        return Ok(step);
    }
    Ok(phase_increment(a, pa, m, pm, params, depth + 1)?
        + phase_increment(m, pm, b, pb, params, depth + 1)?)
}

/// Level-to-`xi` inversion on the mirror plane, where `W/hbar = ka xi/2 - 2 pi`.
pub fn mirror_plane_crossing(level: ActionLevel, params: &PhysicalParams) -> Option<f64> {
    let xi = 2.0 * (level.in_hbar() + TAU) / params.ka();
    (xi >= 1.0).then_some(xi)
}

/// Predicted wrinkle positions `(2n - 1) pi / (ka)` inside `(0, 1)`.
pub fn predicted_wrinkles(params: &PhysicalParams) -> Vec<f64> {
    (1..)
        .map(|n| (2 * n - 1) as f64 * PI / params.ka())
        .take_while(|&e| e < 1.0)
        .collect()
}
