//! Spherical point-source waves and their superpositions.
//!
//! `psi_i = exp(i k r_i) / r_i`, `psi_d = psi_1 + psi_2`.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::coords::{PhysicalParams, Point, ProlatePoint};
use crate::error::{domain, Error, Result};
use crate::math::{atan2, sincos, sqrt, wrap_pi};

/// One of the two point sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Source {
    /// Source 1 at `z = -a/2`, `eta = -1`.
    Lower,
    /// Source 2 at `z = +a/2`, `eta = +1`.
    Upper,
}

impl Source {
    /// `eta` of the focus.
    pub fn eta(self) -> f64 {
        match self {
            Source::Lower => -1.0,
            Source::Upper => 1.0,
        }
    }

    /// The other source.
    pub fn other(self) -> Source {
        match self {
            Source::Lower => Source::Upper,
            Source::Upper => Source::Lower,
        }
    }

    /// Index used in formulas, 1 or 2.
    pub fn index(self) -> u8 {
        match self {
            Source::Lower => 1,
            Source::Upper => 2,
        }
    }
}

/// Complex field value at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Real part.
    pub re: f64,
    /// Imaginary part.
    pub im: f64,
    /// Modulus.
    pub amplitude: f64,
    /// Argument in `(-pi, pi]`; zero for a vanishing value.
    pub phase_principal: f64,
    /// Where the value was taken.
    pub at: ProlatePoint,
}

impl FieldSample {
    /// Polar decomposition of a complex value.
    pub fn from_complex(v: Complex64, at: ProlatePoint) -> Self {
        let amplitude = v.norm();
        let phase_principal = if amplitude == 0.0 {
            0.0
        } else {
            wrap_pi(atan2(v.im, v.re))
        };
        FieldSample {
            re: v.re,
            im: v.im,
            amplitude,
            phase_principal,
            at,
        }
    }

    /// The value as a complex number.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

fn checked_prolate<P: Point>(p: &P, params: &PhysicalParams) -> Result<ProlatePoint> {
    p.validate()?;
    Ok(p.to_prolate(params.separation()))
}

/// Outgoing spherical wave of one source.
pub fn psi_point_source<P: Point>(
    p: &P,
    source: Source,
    params: &PhysicalParams,
) -> Result<FieldSample> {
    let at = checked_prolate(p, params)?;
    let fd = p.focal_distances(params.separation());
    let r = match source {
        Source::Lower => fd.r1,
        Source::Upper => fd.r2,
    };
    if r <= 0.0 {
        return Err(Error::Singularity);
    }
    let kr = params.wavenumber() * r;
    let (s, c) = sincos(kr);
    Ok(FieldSample {
        re: c / r,
        im: s / r,
        amplitude: 1.0 / r,
        phase_principal: wrap_pi(kr),
        at,
    })
}

/// The superposition `psi_1 + psi_2`.
pub fn psi_dispherical<P: Point>(p: &P, params: &PhysicalParams) -> Result<FieldSample> {
    let s1 = psi_point_source(p, Source::Lower, params)?;
    let s2 = psi_point_source(p, Source::Upper, params)?;
    Ok(FieldSample::from_complex(s1.value() + s2.value(), s1.at))
}

/// Modulus of `psi_1 + psi_2` from the focal distances alone.
pub fn dispherical_amplitude(r1: f64, r2: f64, k: f64) -> f64 {
    let (i1, i2) = (1.0 / r1, 1.0 / r2);
    sqrt((i1 * i1 + i2 * i2 + 2.0 * i1 * i2 * libm::cos(k * (r1 - r2))).max(0.0))
}

/// Sum of arbitrary components in Cartesian and polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntangledSum {
    /// Sum of real parts.
    pub x: f64,
    /// Sum of imaginary parts.
    pub y: f64,
    /// `sqrt(x^2 + y^2)`.
    pub amplitude: f64,
    /// Four-quadrant angle of `(x, y)`; zero when both vanish.
    pub phase: f64,
}

impl EntangledSum {
    /// The sum as a complex number.
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// Adds the components; an empty list is rejected.
pub fn synthesize_entangled(components: &[FieldSample]) -> Result<EntangledSum> {
    if components.is_empty() {
        return Err(domain("component count", 0.0));
    }
    let (x, y) = components
        .iter()
        .fold((0.0, 0.0), |(x, y), c| (x + c.re, y + c.im));
    let amplitude = libm::hypot(x, y);
    let phase = if amplitude == 0.0 { 0.0 } else { atan2(y, x) };
    Ok(EntangledSum {
        x,
        y,
        amplitude,
        phase,
    })
}

/// Hemisphere of the erasure construction; the mirror plane belongs to `Lower`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hemisphere {
    /// `eta <= 0`.
    Lower,
    /// `eta > 0`.
    Upper,
}

impl Hemisphere {
    /// Hemisphere containing `eta`.
    pub fn of(eta: f64) -> Self {
        if eta > 0.0 {
            Hemisphere::Upper
        } else {
            Hemisphere::Lower
        }
    }
}

/// Antisymmetric and hemisphere-signed symmetric combinations and their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureFields {
    /// `(psi_1 - psi_2) / sqrt 2`.
    pub psi_y: FieldSample,
    /// `+-(psi_1 + psi_2) / sqrt 2`, plus on the lower hemisphere.
    pub psi_l: FieldSample,
    /// `psi_y + psi_l`.
    pub combined: FieldSample,
    /// Hemisphere of the point.
    pub hemisphere: Hemisphere,
}

/// Builds the erasure combinations at a point.
pub fn erasure_fields<P: Point>(p: &P, params: &PhysicalParams) -> Result<ErasureFields> {
    let s1 = psi_point_source(p, Source::Lower, params)?;
    let s2 = psi_point_source(p, Source::Upper, params)?;
    let at = s1.at;
    let hemisphere = Hemisphere::of(at.eta);
    let sign = match hemisphere {
        Hemisphere::Lower => 1.0,
        Hemisphere::Upper => -1.0,
    };
    let y = (s1.value() - s2.value()) / SQRT_2;
    let l = (s1.value() + s2.value()) * (sign / SQRT_2);
    Ok(ErasureFields {
        psi_y: FieldSample::from_complex(y, at),
        psi_l: FieldSample::from_complex(l, at),
        combined: FieldSample::from_complex(y + l, at),
        hemisphere,
    })
}

/// Samples `psi_d` on a uniform `(xi, eta)` grid, row-major in `eta`.
///
/// Grid nodes that coincide with a focus are skipped.
pub fn sample_grid(
    xi: (f64, f64),
    eta: (f64, f64),
    n_xi: usize,
    n_eta: usize,
    params: &PhysicalParams,
) -> Result<Vec<FieldSample>> {
    if n_xi < 2 || n_eta < 2 {
        return Err(domain("grid size", n_xi.min(n_eta) as f64));
    }
    if !(xi.0 >= 1.0 && xi.1 > xi.0) {
        return Err(domain("xi range", xi.0));
    }
    if !(eta.0 >= -1.0 && eta.1 <= 1.0 && eta.1 > eta.0) {
        return Err(domain("eta range", eta.0));
    }
    let mut out = Vec::with_capacity(n_xi * n_eta);
    for j in 0..n_eta {
        let e = eta.0 + (eta.1 - eta.0) * j as f64 / (n_eta - 1) as f64;
        for i in 0..n_xi {
            let x = xi.0 + (xi.1 - xi.0) * i as f64 / (n_xi - 1) as f64;
            let p = ProlatePoint::new(x, e);
            if p.is_focus() {
                continue;
            }
            out.push(psi_dispherical(&p, params)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coords::CylPoint;

    #[test]
    fn point_source_examples() {
        let params = PhysicalParams::default();
        let s = psi_point_source(&CylPoint::new(0.0, 1.5), Source::Upper, &params).unwrap();
        assert!((s.amplitude - 1.0).abs() < 1e-15);
        assert!((s.phase_principal - 2.633629385640828).abs() < 1e-12);
        let s = psi_point_source(&ProlatePoint::new(2.0, 0.0), Source::Lower, &params).unwrap();
        assert!((s.amplitude - 1.0).abs() < 1e-15);
        assert!((s.phase_principal - wrap_pi(15.2)).abs() < 1e-12);
        assert_eq!(
            psi_point_source(&ProlatePoint::new(1.0, 1.0), Source::Upper, &params),
            Err(Error::Singularity)
        );
    }

    #[test]
    fn dispherical_examples() {
        let params = PhysicalParams::default();
        let s = psi_dispherical(&ProlatePoint::new(2.0, 0.0), &params).unwrap();
        assert!((s.amplitude - 2.0).abs() < 1e-14);
        let eta = core::f64::consts::PI / 15.2;
        let s = psi_dispherical(&ProlatePoint::new(2.0, eta), &params).unwrap();
        let (r1, r2) = (0.5 * (2.0 + eta), 0.5 * (2.0 - eta));
        assert!((s.amplitude - (1.0 / r2 - 1.0 / r1)).abs() < 1e-12);
        assert!((s.amplitude - 0.20884).abs() < 1e-4);
        assert_eq!(
            psi_dispherical(&ProlatePoint::new(1.0, 1.0), &params),
            Err(Error::Singularity)
        );
    }

    #[test]
    fn entangled_examples() {
        let params = PhysicalParams::default();
        let p = ProlatePoint::new(2.0, 0.0);
        let s1 = psi_point_source(&p, Source::Lower, &params).unwrap();
        let s2 = psi_point_source(&p, Source::Upper, &params).unwrap();
        let one = synthesize_entangled(&[s1]).unwrap();
        assert!((one.amplitude - s1.amplitude).abs() < 1e-15);
        assert!((one.phase - s1.phase_principal).abs() < 1e-12);
        let two = synthesize_entangled(&[s1, s2]).unwrap();
        assert!((two.amplitude - 2.0).abs() < 1e-14);
        let neg = FieldSample::from_complex(-s1.value(), p);
        let zero = synthesize_entangled(&[s1, neg]).unwrap();
        assert_eq!((zero.amplitude, zero.phase), (0.0, 0.0));
        assert!(synthesize_entangled(&[]).is_err());
    }

    #[test]
    fn erasure_on_mirror_plane_matches_both_forms() {
        let params = PhysicalParams::default();
        let p = ProlatePoint::new(1.7, 0.0);
        let e = erasure_fields(&p, &params).unwrap();
        assert_eq!(e.hemisphere, Hemisphere::Lower);
        let s1 = psi_point_source(&p, Source::Lower, &params)
            .unwrap()
            .value();
        let s2 = psi_point_source(&p, Source::Upper, &params)
            .unwrap()
            .value();
        assert!((e.combined.value() - s1 * SQRT_2).norm() < 1e-12);
        assert!((e.combined.value() - s2 * SQRT_2).norm() < 1e-12);
    }

    #[test]
    fn grid_skips_foci() {
        let params = PhysicalParams::default();
        let g = sample_grid((1.0, 2.0), (-1.0, 1.0), 3, 3, &params).unwrap();
        assert_eq!(g.len(), 7);
    }
}
