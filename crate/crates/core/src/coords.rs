//! Cylindrical and prolate spheroidal coordinates about two foci on the z-axis.
//!
//! The foci sit at `z = -a/2` (lower, source 1) and `z = +a/2` (upper,
//! source 2). With focal distances `r1`, `r2`,
//!
//! ```text
//! xi  = (r1 + r2) / a      in [1, inf)
//! eta = (r1 - r2) / a      in [-1, 1]
//! rho = (a/2) sqrt((xi^2 - 1)(1 - eta^2)),   z = a xi eta / 2
//! ```
//!
//! Curves that cross the z-axis continue on the opposite meridian half-plane;
//! [`Sheet`] records which one so a traced curve stays a single polyline.

use core::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::math::{acos, hypot, one_minus_sq, sq_minus_one, sqrt, wrap_pi};

/// Mass, action unit, source separation and wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    mass: f64,
    hbar: f64,
    separation: f64,
    wavenumber: f64,
}

impl Default for PhysicalParams {
    /// `m = hbar = a = 1`, `k = 15.2`.
    fn default() -> Self {
        PhysicalParams {
            mass: 1.0,
            hbar: 1.0,
            separation: 1.0,
            wavenumber: 15.2,
        }
    }
}

impl PhysicalParams {
    /// Validated constructor; every argument must be finite and positive.
    pub fn new(mass: f64, hbar: f64, separation: f64, wavenumber: f64) -> Result<Self> {
        for (what, v) in [
            ("mass", mass),
            ("hbar", hbar),
            ("separation", separation),
            ("wavenumber", wavenumber),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(what, v));
            }
        }
        Ok(PhysicalParams {
            mass,
            hbar,
            separation,
            wavenumber,
        })
    }

    /// Copy with a different wavenumber.
    pub fn with_wavenumber(self, k: f64) -> Result<Self> {
        Self::new(self.mass, self.hbar, self.separation, k)
    }

    /// Particle mass `m`.
    pub fn mass(&self) -> f64 {
        self.mass
    }
    /// Reduced Planck constant `hbar`.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }
    /// Source separation `a`.
    pub fn separation(&self) -> f64 {
        self.separation
    }
    /// Wavenumber `k`.
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }
    /// Energy `hbar^2 k^2 / (2m)`.
    pub fn energy(&self) -> f64 {
        self.hbar * self.hbar * self.wavenumber * self.wavenumber / (2.0 * self.mass)
    }
    /// Dimensionless product `k a`.
    pub fn ka(&self) -> f64 {
        self.wavenumber * self.separation
    }
}

/// Meridian half-plane a point lives on, relative to its azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Sheet {
    /// Same half-plane as `phi`.
    #[default]
    Positive,
    /// Opposite half-plane, `phi + pi`.
    Negative,
}

impl Sheet {
    /// `+1.0` or `-1.0`.
    pub fn sign(self) -> f64 {
        match self {
            Sheet::Positive => 1.0,
            Sheet::Negative => -1.0,
        }
    }

    /// Sheet of a signed radial coordinate; zero maps to `Positive`.
    pub fn of(rho_signed: f64) -> Sheet {
        if rho_signed < 0.0 {
            Sheet::Negative
        } else {
            Sheet::Positive
        }
    }

    /// The other sheet.
    pub fn flipped(self) -> Sheet {
        match self {
            Sheet::Positive => Sheet::Negative,
            Sheet::Negative => Sheet::Positive,
        }
    }
}

/// Cylindrical point `(rho, z, phi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylPoint {
    /// Distance from the axis, non-negative.
    pub rho: f64,
    /// Axial coordinate.
    pub z: f64,
    /// Azimuth in `(-pi, pi]`.
    pub phi: f64,
}

impl CylPoint {
    /// Point in the `phi = 0` meridian.
    pub fn new(rho: f64, z: f64) -> Self {
        CylPoint { rho, z, phi: 0.0 }
    }

    /// Point from a signed radial coordinate; negative `rho` lands at `phi = pi`.
    pub fn from_signed(rho_signed: f64, z: f64) -> Self {
        if rho_signed < 0.0 {
            CylPoint {
                rho: -rho_signed,
                z,
                phi: PI,
            }
        } else {
            CylPoint {
                rho: rho_signed,
                z,
                phi: 0.0,
            }
        }
    }

    /// Checks `rho >= 0` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(domain("rho", self.rho));
        }
        if !self.z.is_finite() {
            return Err(domain("z", self.z));
        }
        Ok(())
    }
}

/// Prolate spheroidal point `(xi, eta, phi)` on meridian sheet `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlatePoint {
    /// Ellipsoidal coordinate, `>= 1`.
    pub xi: f64,
    /// Hyperboloidal coordinate in `[-1, 1]`.
    pub eta: f64,
    /// Azimuth in `(-pi, pi]`.
    pub phi: f64,
    /// Meridian sheet.
    pub sigma: Sheet,
}

impl ProlatePoint {
    /// Point on the positive sheet of the `phi = 0` meridian.
    pub fn new(xi: f64, eta: f64) -> Self {
        ProlatePoint {
            xi,
            eta,
            phi: 0.0,
            sigma: Sheet::Positive,
        }
    }

    /// Same point on the given sheet.
    pub fn on_sheet(self, sigma: Sheet) -> Self {
        ProlatePoint { sigma, ..self }
    }

    /// Point of the signed meridian plane `(rho_signed, z)`, `phi = 0`.
    pub fn from_meridian(rho_signed: f64, z: f64, a: f64) -> Self {
        let c = cyl_to_prolate(&CylPoint::new(rho_signed.abs(), z), a);
        c.on_sheet(Sheet::of(rho_signed))
    }

    /// Signed radial coordinate `sigma * rho`.
    pub fn rho_signed(&self, a: f64) -> f64 {
        self.sigma.sign() * rho_of(self.xi, self.eta, a)
    }

    /// Checks `xi >= 1`, `|eta| <= 1` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(self.xi >= 1.0 && self.xi.is_finite()) {
            return Err(domain("xi", self.xi));
        }
        if !(self.eta.abs() <= 1.0) {
            return Err(domain("eta", self.eta));
        }
        Ok(())
    }

    /// True at either source focus.
    pub fn is_focus(&self) -> bool {
        self.xi == 1.0 && self.eta.abs() == 1.0
    }
}

/// Distances from a point to the lower (`r1`) and upper (`r2`) focus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalDistances {
    /// Distance to the lower focus `z = -a/2`.
    pub r1: f64,
    /// Distance to the upper focus `z = +a/2`.
    pub r2: f64,
}

/// Anything that can be located relative to the foci.
pub trait Point {
    /// Focal distances for separation `a`.
    fn focal_distances(&self, a: f64) -> FocalDistances;
    /// Prolate form of the point.
    fn to_prolate(&self, a: f64) -> ProlatePoint;
    /// Cylindrical form of the point.
    fn to_cyl(&self, a: f64) -> CylPoint;
    /// Domain check.
    fn validate(&self) -> Result<()>;
}

impl Point for CylPoint {
    fn focal_distances(&self, a: f64) -> FocalDistances {
        FocalDistances {
            r1: hypot(self.rho, self.z + 0.5 * a),
            r2: hypot(self.rho, self.z - 0.5 * a),
        }
    }
    fn to_prolate(&self, a: f64) -> ProlatePoint {
        cyl_to_prolate(self, a)
    }
    fn to_cyl(&self, _a: f64) -> CylPoint {
        *self
    }
    fn validate(&self) -> Result<()> {
        CylPoint::validate(self)
    }
}

impl Point for ProlatePoint {
    fn focal_distances(&self, a: f64) -> FocalDistances {
        FocalDistances {
            r1: 0.5 * a * (self.xi + self.eta),
            r2: 0.5 * a * (self.xi - self.eta),
        }
    }
    fn to_prolate(&self, _a: f64) -> ProlatePoint {
        *self
    }
    fn to_cyl(&self, a: f64) -> CylPoint {
        prolate_to_cyl(self, a)
    }
    fn validate(&self) -> Result<()> {
        ProlatePoint::validate(self)
    }
}

/// Focal distances of any point.
pub fn focal_distances<P: Point>(p: &P, a: f64) -> FocalDistances {
    p.focal_distances(a)
}

fn rho_of(xi: f64, eta: f64, a: f64) -> f64 {
    0.5 * a * sqrt((sq_minus_one(xi) * one_minus_sq(eta)).max(0.0))
}

/// Prolate to cylindrical; the negative sheet maps to azimuth `phi + pi`.
pub fn prolate_to_cyl(p: &ProlatePoint, a: f64) -> CylPoint {
    let phi = match p.sigma {
        Sheet::Positive => wrap_pi(p.phi),
        Sheet::Negative => wrap_pi(p.phi + PI),
    };
    CylPoint {
        rho: rho_of(p.xi, p.eta, a),
        z: 0.5 * a * p.xi * p.eta,
        phi,
    }
}

/// Cylindrical to prolate on the positive sheet.
pub fn cyl_to_prolate(p: &CylPoint, a: f64) -> ProlatePoint {
    if p.rho == 0.0 {
        // on the axis the coordinates are exact: the focal segment is xi = 1, beyond it eta = +-1
        let h = 0.5 * a;
        let (xi, eta) = if p.z.abs() >= h {
            (p.z.abs() / h, libm::copysign(1.0, p.z))
        } else {
            (1.0, p.z / h)
        };
        return ProlatePoint {
            xi,
            eta,
            phi: wrap_pi(p.phi),
            sigma: Sheet::Positive,
        };
    }
    let FocalDistances { r1, r2 } = p.focal_distances(a);
    let xi = ((r1 + r2) / a).max(1.0);
    let eta = ((r1 - r2) / a).clamp(-1.0, 1.0);
    ProlatePoint {
        xi,
        eta,
        phi: wrap_pi(p.phi),
        sigma: Sheet::Positive,
    }
}

/// Split of the wavenumber along the axis and across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    /// Axial component `k eta_a`.
    pub k_z: f64,
    /// Transverse component, non-negative.
    pub k_rho: f64,
    /// Asymptotic cone angle `arccos(eta_a)`.
    pub theta: f64,
}

impl WaveVector {
    /// Slope `k_z / k_rho` of the asymptotic cone in the meridian plane.
    pub fn slope(&self) -> Result<f64> {
        if self.k_rho == 0.0 {
            return Err(Error::DegenerateDirection);
        }
        Ok(self.k_z / self.k_rho)
    }
}

/// Wave vector with axial share `eta_a`.
pub fn wave_vector_components(k: f64, eta_a: f64) -> Result<WaveVector> {
    if !(k.is_finite() && k > 0.0) {
        return Err(domain("wavenumber", k));
    }
    if !(eta_a.abs() <= 1.0) {
        return Err(domain("eta_a", eta_a));
    }
    Ok(WaveVector {
        k_z: k * eta_a,
        k_rho: k * sqrt(one_minus_sq(eta_a)),
        theta: acos(eta_a),
    })
}
