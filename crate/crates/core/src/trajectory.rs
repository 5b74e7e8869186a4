//! Trajectories of the two-source superposition.
//!
//! With the constant of the motion `eta_a` and `c = eta_a / sqrt(1 - eta_a^2)`,
//! a trajectory anchored at either source obeys, in the signed meridian plane,
//!
//! ```text
//! r2^2 [(z + a/2) - c rho] + r1^2 [(z - a/2) - c rho]
//!     + 2 r1 r2 cos(k (r1 - r2)) (z - c rho) = 0
//! ```
//!
//! and, in prolate coordinates with `S = sigma sqrt((xi^2 - 1)(1 - eta^2))`,
//!
//! ```text
//! (xi - eta)^2 {eta_a S - q (xi eta + 1)} + (xi + eta)^2 {eta_a S - q (xi eta - 1)}
//!     + 2 (xi^2 - eta^2) cos(ka eta) {eta_a S - q xi eta} = 0,    q = sqrt(1 - eta_a^2).
//! ```
//!
//! The prolate residual equals `-(8 q / a^3)` times the cylindrical one.
//!
//! Tracing runs in the signed `(rho, z)` plane, where the curve passes
//! smoothly through the origin and touches the axis tangentially at the
//! tertiary foci `z = n pi / k`. A branch that runs off to infinity along a
//! destructive hyperboloid returns along its other side; the tracer records
//! such a passage and resumes on the returning branch.

use alloc::vec::Vec;

use crate::coords::{wave_vector_components, PhysicalParams, ProlatePoint, WaveVector};
use crate::error::{domain, Error, Result};
use crate::math::{one_minus_sq, sq_minus_one, sqrt};
use crate::wavefield::Source;

mod curve;
mod tracer;
mod turning;

pub use curve::MeridianCurve;
pub use turning::find_turning_points;

/// Which side of zero a vanishing constant of the motion is taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZeroSign {
    /// `eta_a = +0`.
    Positive,
    /// `eta_a = -0`.
    Negative,
}

/// The constant of the motion `eta_a`, the asymptotic `eta` of a free trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionConstant {
    eta_a: f64,
    zero_sign: Option<ZeroSign>,
}

impl MotionConstant {
    /// Constant from a float; the sign bit of a zero selects `+0` or `-0`.
    pub fn new(eta_a: f64) -> Result<Self> {
        let zs = (eta_a == 0.0).then(|| {
            if eta_a.is_sign_negative() {
                ZeroSign::Negative
            } else {
                ZeroSign::Positive
            }
        });
        Self::with_zero_sign(eta_a, zs)
    }

    /// Constant with an explicit zero side; `zero_sign` is required iff `eta_a == 0`.
    pub fn with_zero_sign(eta_a: f64, zero_sign: Option<ZeroSign>) -> Result<Self> {
        if !(eta_a.abs() <= 1.0) {
            return Err(domain("eta_a", eta_a));
        }
        match (eta_a == 0.0, zero_sign) {
            (true, None) => Err(domain("zero sign of eta_a", eta_a)),
            (false, Some(_)) => Err(domain("zero sign given for nonzero eta_a", eta_a)),
            (true, Some(ZeroSign::Negative)) => Ok(MotionConstant {
                eta_a: -0.0,
                zero_sign,
            }),
            (true, Some(ZeroSign::Positive)) => Ok(MotionConstant {
                eta_a: 0.0,
                zero_sign,
            }),
            (false, None) => Ok(MotionConstant { eta_a, zero_sign }),
        }
    }

    /// `eta_a`, a signed zero when vanishing.
    pub fn eta_a(&self) -> f64 {
        self.eta_a
    }

    /// Zero side, present iff `eta_a == 0`.
    pub fn zero_sign(&self) -> Option<ZeroSign> {
        self.zero_sign
    }

    /// `+1` or `-1`, the side of zero including the signed-zero cases.
    pub fn side(&self) -> f64 {
        if self.eta_a.is_sign_negative() {
            -1.0
        } else {
            1.0
        }
    }

    /// `sqrt(1 - eta_a^2)`.
    pub fn q(&self) -> f64 {
        sqrt(one_minus_sq(self.eta_a))
    }

    /// True for `|eta_a| = 1`, where the trajectory lies on the axis.
    pub fn is_axial(&self) -> bool {
        self.eta_a.abs() == 1.0
    }

    /// The constant for the mirrored trajectory, `-eta_a`.
    pub fn mirrored(&self) -> Self {
        MotionConstant {
            eta_a: -self.eta_a,
            zero_sign: self.zero_sign.map(|z| match z {
                ZeroSign::Positive => ZeroSign::Negative,
                ZeroSign::Negative => ZeroSign::Positive,
            }),
        }
    }

    /// Axial and transverse wave-vector components for wavenumber `k`.
    pub fn wave_vector(&self, k: f64) -> Result<WaveVector> {
        wave_vector_components(k, self.eta_a)
    }

    /// Signed-zero-aware label, e.g. `-0` or `0.173648`.
    pub fn label(&self) -> alloc::string::String {
        match self.zero_sign {
            Some(ZeroSign::Positive) => "+0".into(),
            Some(ZeroSign::Negative) => "-0".into(),
            None => alloc::format!("{}", self.eta_a),
        }
    }
}

/// Whether a trajectory stays between the sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// Runs from one source to the other.
    Confined,
    /// Escapes to infinity along `eta -> eta_a`.
    Free,
}

/// Kinds of turning points in `xi` (and folds in `eta`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TurningKind {
    /// Tangential touch of the axis between the sources, at `ka eta = 2 n pi`.
    ReinforcementFocus,
    /// Off-axis `xi` minimum near a reinforcement hyperboloid.
    Reinforcement,
    /// `xi` maximum near `ka eta = (2n - 1) pi`, possibly at infinity.
    RegularDestructive,
    /// `xi` maximum beyond the last destructive hyperboloid.
    Irregular,
    /// Any other `xi` extremum, or a reversal of `eta`.
    Fold,
}

impl TurningKind {
    /// Stable lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            TurningKind::ReinforcementFocus => "reinforcement-focus",
            TurningKind::Reinforcement => "reinforcement",
            TurningKind::RegularDestructive => "regular-destructive",
            TurningKind::Irregular => "irregular",
            TurningKind::Fold => "fold",
        }
    }
}

/// A located turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurningPoint {
    /// Kind of extremum.
    pub kind: TurningKind,
    /// Location; for a passage through infinity, the `xi_max` crossing.
    pub point: ProlatePoint,
    /// Sample index nearest to the turning point.
    pub sample_index: usize,
    /// True when the extremum lies at infinity.
    pub at_infinity: bool,
}

/// One traced point and its distance along the curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    /// Location.
    pub point: ProlatePoint,
    /// Cumulative meridian-plane length; a passage through infinity counts its chord.
    pub arclength: f64,
}

/// A traced trajectory from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Emitting source.
    pub source: Source,
    /// Constant of the motion.
    pub constant: MotionConstant,
    /// Samples from the source focus onward.
    pub samples: Vec<TrajectorySample>,
    /// Confined or free.
    pub classification: Classification,
    /// Turning points in sample order.
    pub turning_points: Vec<TurningPoint>,
    /// Indices `i` where the curve passes through infinity between samples `i` and `i + 1`.
    pub passages: Vec<usize>,
}

impl Trajectory {
    /// Signed meridian coordinates `(sigma rho, z)` of every sample.
    pub fn meridian(&self, a: f64) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|s| (s.point.rho_signed(a), 0.5 * a * s.point.xi * s.point.eta))
            .collect()
    }
}

/// Tracer settings; lengths are in units of the source separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceControls {
    /// Base step length.
    pub step: f64,
    /// Step floor.
    pub min_step: f64,
    /// Factor applied to a rejected step.
    pub shrink: f64,
    /// Largest tangent turn per step, in radians.
    pub max_turn: f64,
    /// Largest change of `eta` between consecutive samples.
    pub max_eta_step: f64,
    /// Distance from the source focus of the first traced point.
    pub seed_offset: f64,
    /// `xi` beyond which the far-field tests apply.
    pub xi_max: f64,
    /// Tolerance on `|eta - eta_a|` for the free asymptote.
    pub asymptote_tol: f64,
    /// Corrector tolerance relative to the local residual scale.
    pub tol: f64,
    /// Corrector iterations.
    pub max_iter: usize,
    /// Sample budget.
    pub max_samples: usize,
}

impl Default for TraceControls {
    fn default() -> Self {
        TraceControls {
            step: 1e-3,
            min_step: 1e-10,
            shrink: 0.25,
            max_turn: 0.1,
            max_eta_step: 8e-4,
            seed_offset: 1e-4,
            xi_max: 50.0,
            asymptote_tol: 0.01,
            tol: 1e-12,
            max_iter: 100,
            max_samples: 4_000_000,
        }
    }
}

/// Prolate residual of the trajectory equation (dimensionless).
pub fn trajectory_residual_prolate(
    xi: f64,
    eta: f64,
    sigma: crate::coords::Sheet,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> f64 {
    let (ea, q) = (constant.eta_a(), constant.q());
    let s = sigma.sign() * sqrt((sq_minus_one(xi) * one_minus_sq(eta)).max(0.0));
    let lower = ea * s - q * (xi * eta + 1.0);
    let upper = ea * s - q * (xi * eta - 1.0);
    let inter = ea * s - q * xi * eta;
    let (m, p) = (xi - eta, xi + eta);
    m * m * lower + p * p * upper + 2.0 * m * p * libm::cos(params.ka() * eta) * inter
}

/// Sum of the magnitudes of the prolate residual's terms.
pub fn trajectory_residual_scale(
    xi: f64,
    eta: f64,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> f64 {
    let (ea, q) = (constant.eta_a().abs(), constant.q());
    let s = sqrt((sq_minus_one(xi) * one_minus_sq(eta)).max(0.0));
    let (m, p) = (xi - eta, xi + eta);
    let c = libm::cos(params.ka() * eta).abs();
    m * m * (ea * s + q * (xi * eta + 1.0).abs())
        + p * p * (ea * s + q * (xi * eta - 1.0).abs())
        + 2.0 * m * p * c * (ea * s + q * (xi * eta).abs())
}

/// Change of the prolate residual under a one-ulp change of `xi` and `eta`.
///
/// Within ~1e-8 a of the axis the root `sqrt((xi^2-1)(1-eta^2))` is set by the last
/// bits of `xi` or `eta`, so no point stored as `(xi, eta)` has a smaller residual.
pub fn trajectory_residual_floor(
    xi: f64,
    eta: f64,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> f64 {
    let ea = constant.eta_a().abs();
    let s2 = (sq_minus_one(xi) * one_minus_sq(eta)).max(0.0);
    let ds2 = 2.0
        * f64::EPSILON
        * (xi * xi * one_minus_sq(eta).abs() + eta * eta * sq_minus_one(xi).abs());
    let ds = sqrt(s2 + ds2) - sqrt(s2);
    let (m, p) = (xi - eta, xi + eta);
    let c = libm::cos(params.ka() * eta).abs();
    ea * (m * m + p * p + 2.0 * m * p * c) * ds
}

/// Cylindrical residual (length cubed) at signed `rho`, for axial wavenumber `k_z`.
pub fn trajectory_residual_cyl(
    rho_signed: f64,
    z: f64,
    k_z: f64,
    params: &PhysicalParams,
) -> Result<f64> {
    let k = params.wavenumber();
    if !(k_z.abs() <= k) {
        return Err(domain("k_z", k_z));
    }
    let k_rho = sqrt(((k - k_z) * (k + k_z)).max(0.0));
    if k_rho == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let curve = MeridianCurve::from_slope(k_z / k_rho, params);
    Ok(curve.value(rho_signed, z))
}

/// Sign rule: free iff the source and `eta_a` lie in the same hemisphere.
pub fn classify_trajectory(source: Source, constant: &MotionConstant) -> Classification {
    if source.eta() * constant.side() > 0.0 {
        Classification::Free
    } else {
        Classification::Confined
    }
}

/// Traces the trajectory with constant `constant` leaving `source`.
pub fn trace_trajectory(
    source: Source,
    constant: &MotionConstant,
    params: &PhysicalParams,
    controls: &TraceControls,
) -> Result<Trajectory> {
    // lower-source trajectories are z-mirrors of upper-source ones with -eta_a
    let frame = match source {
        Source::Upper => *constant,
        Source::Lower => constant.mirrored(),
    };
    let path = tracer::trace_upper(&frame, params, controls)?;
    let a = params.separation();
    let expected = classify_trajectory(Source::Upper, &frame);
    let got = match path.end {
        tracer::End::Focus => Classification::Confined,
        tracer::End::Free => Classification::Free,
    };
    if got != expected {
        let last = path.pts[path.pts.len() - 1];
        let p = ProlatePoint::from_meridian(last.0, last.1, a);
        return Err(Error::Convergence {
            stage: "trajectory endpoint",
            xi: p.xi,
            eta: p.eta,
        });
    }
    let zsign = match source {
        Source::Upper => 1.0,
        Source::Lower => -1.0,
    };
    let mut samples = Vec::with_capacity(path.pts.len());
    let mut s = 0.0;
    let mut prev = path.pts[0];
    let mut sheet = crate::coords::Sheet::Positive;
    for &(r, z) in &path.pts {
        s += libm::hypot(r - prev.0, z - prev.1);
        prev = (r, z);
        if r != 0.0 {
            sheet = crate::coords::Sheet::of(r);
        }
        let mut p = ProlatePoint::from_meridian(r, zsign * z, a).on_sheet(sheet);
        if r == 0.0 && z.abs() == 0.5 * a {
            p.xi = 1.0;
            p.eta = zsign * z.signum();
        }
        samples.push(TrajectorySample {
            point: p,
            arclength: s,
        });
    }
    let mut t = Trajectory {
        source,
        constant: *constant,
        samples,
        classification: got,
        turning_points: Vec::new(),
        passages: path.passages,
    };
    t.turning_points = find_turning_points(&t, params);
    Ok(t)
}

/// A confined trajectory into a source joined to the free one leaving it.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledPath {
    /// Segment between the sources, ending at `joint`.
    pub confined: Trajectory,
    /// Segment leaving `joint` to infinity.
    pub free: Trajectory,
    /// Source where the two segments meet.
    pub joint: Source,
    /// Azimuth change across the joint.
    pub phi_shift: f64,
}

/// Couples the confined and free trajectories sharing `constant` at their common source.
pub fn branch_point_coupling(
    constant: &MotionConstant,
    params: &PhysicalParams,
    controls: &TraceControls,
) -> Result<CoupledPath> {
    let joint = if constant.side() > 0.0 {
        Source::Upper
    } else {
        Source::Lower
    };
    let confined = trace_trajectory(joint.other(), constant, params, controls)?;
    let free = trace_trajectory(joint, constant, params, controls)?;
    Ok(CoupledPath {
        confined,
        free,
        joint,
        phi_shift: core::f64::consts::PI,
    })
}
