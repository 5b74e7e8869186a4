//! Transit times along trajectories and loci of equal transit time.
//!
//! With the epoch fixed at departure from the source,
//!
//! ```text
//! t = (1 - 2 / (xi^2 + eta^2 + (xi^2 - eta^2) cos(ka eta))) m xi eta a / (hbar k eta_a)
//! ```
//!
//! and, for a vanishing constant, `t = m eta a / (hbar k sqrt(1 - eta_a^2))`.
//! Both expressions are odd in `eta` and vanish on the axis wherever
//! `cos(ka eta) = 1`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::coords::{PhysicalParams, ProlatePoint};
use crate::error::{domain, Error, Result};
use crate::math::{cos, floor, sin};
use crate::roots::illinois;
use crate::trajectory::{MeridianCurve, MotionConstant, Trajectory};
use crate::wavefield::Source;

/// Below this `|eta_a|` the `xi`-projected form is used.
pub const SMALL_CONSTANT: f64 = 1e-6;

/// Transit time measured from departure at the source.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitTime {
    /// Time in units of `m a^2 / hbar`.
    pub t: f64,
    /// Epoch; zero at departure.
    pub epoch_tau: f64,
}

impl TransitTime {
    fn at(t: f64) -> Self {
        TransitTime { t, epoch_tau: 0.0 }
    }
}

/// Time for motion projected across the `eta` coordinate.
pub fn transit_time_eta(
    xi: f64,
    eta: f64,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> Result<TransitTime> {
    if !(xi >= 1.0) || !(eta.abs() <= 1.0) {
        return Err(domain("prolate point", if xi >= 1.0 { eta } else { xi }));
    }
    let ea = constant.eta_a();
    if ea == 0.0 {
        return Err(Error::SingularConstant);
    }
    let (x2, e2) = (xi * xi, eta * eta);
    let d = x2 + e2 + (x2 - e2) * cos(params.ka() * eta);
    let bracket = 1.0 - 2.0 / d;
    let scale =
        params.mass() * xi * eta * params.separation() / (params.hbar() * params.wavenumber() * ea);
    Ok(TransitTime::at(bracket * scale))
}

/// Time for motion projected across the `xi` coordinate.
pub fn transit_time_xi(
    eta: f64,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> Result<TransitTime> {
    if constant.is_axial() {
        return Err(Error::SingularConstant);
    }
    if !(eta.abs() <= 1.0) {
        return Err(domain("eta", eta));
    }
    let t = params.mass() * eta * params.separation()
        / (params.hbar() * params.wavenumber() * constant.q());
    Ok(TransitTime::at(t))
}

/// Transit time by the primary form, or the `xi` form for a vanishing constant.
pub fn transit_time(
    p: &ProlatePoint,
    constant: &MotionConstant,
    params: &PhysicalParams,
) -> Result<TransitTime> {
    if constant.eta_a().abs() < SMALL_CONSTANT {
        transit_time_xi(p.eta, constant, params)
    } else {
        transit_time_eta(p.xi, p.eta, constant, params)
    }
}

/// Sense of motion in time along the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Time increases with arclength.
    Forward,
    /// Time decreases with arclength.
    Retrograde,
}

impl Direction {
    /// Stable lowercase name.
    pub fn name(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Retrograde => "retrograde",
        }
    }
}

/// Transit time of one trajectory sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimedSample {
    /// Index into the trajectory samples.
    pub index: usize,
    /// Time by the form in use for the constant.
    pub time: TransitTime,
    /// Time by the `xi`-projected form, when the constant is not axial.
    pub time_xi: Option<f64>,
    /// Sense of motion over the step leaving this sample (entering it for the last one).
    pub direction: Direction,
}

/// Per-sample transit times and the sense of motion along a trajectory.
pub fn time_along_trajectory(t: &Trajectory, params: &PhysicalParams) -> Result<Vec<TimedSample>> {
    let times = t
        .samples
        .iter()
        .map(|s| transit_time(&s.point, &t.constant, params))
        .collect::<Result<Vec<_>>>()?;
    let n = times.len();
    let mut out = Vec::with_capacity(n);
    let mut dir = Direction::Forward;
    for i in 0..n {
        if i + 1 < n {
            let dt = times[i + 1].t - times[i].t;
            if dt > 0.0 {
                dir = Direction::Forward;
            } else if dt < 0.0 {
                dir = Direction::Retrograde;
            }
        }
        let time_xi = transit_time_xi(t.samples[i].point.eta, &t.constant, params)
            .ok()
            .map(|x| x.t);
        out.push(TimedSample {
            index: i,
            time: times[i],
            time_xi,
            direction: dir,
        });
    }
    Ok(out)
}

/// One crossing of a trajectory with a locus of equal time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusPoint {
    /// Location.
    pub point: ProlatePoint,
    /// Source of the trajectory.
    pub source: Source,
    /// Constant of the trajectory.
    pub constant: MotionConstant,
    /// Arclength along the trajectory.
    pub arclength: f64,
}

/// Interval of `eta` free of locus points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaGap {
    /// Lower end.
    pub lo: f64,
    /// Upper end.
    pub hi: f64,
}

/// A locus of equal transit time assembled from a trajectory family.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLocus {
    /// Target time.
    pub t: f64,
    /// Crossings ordered by constant and arclength, upper source first.
    pub points: Vec<LocusPoint>,
    /// Gaps in `eta` wider than the cut threshold, in increasing order.
    pub cuts: Vec<EtaGap>,
}

/// Family of constants uniform in `arcsin(eta_a)` at cell centres of `n` cells on `[-pi/2, pi/2]`.
///
/// For odd `n` the central cell sits at zero and contributes both signed zeros.
pub fn arcsin_family(n: usize) -> Result<Vec<MotionConstant>> {
    if n == 0 {
        return Err(domain("family size", 0.0));
    }
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..n {
        if 2 * j + 1 == n {
            out.push(MotionConstant::new(-0.0)?);
            out.push(MotionConstant::new(0.0)?);
            continue;
        }
        let th = -0.5 * PI + PI * (j as f64 + 0.5) / n as f64;
        out.push(MotionConstant::new(sin(th))?);
    }
    Ok(out)
}

/// Crossings of `t_target` along one trajectory, refined on the curve.
pub fn locus_points(
    traj: &Trajectory,
    t_target: f64,
    params: &PhysicalParams,
) -> Result<Vec<LocusPoint>> {
    let a = params.separation();
    let c = traj.constant;
    let curve = MeridianCurve::new(&c, params).ok();
    let m = traj.meridian(a);
    let times = traj
        .samples
        .iter()
        .map(|s| transit_time(&s.point, &c, params).map(|x| x.t - t_target))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    let push = |out: &mut Vec<LocusPoint>, point: ProlatePoint, arclength: f64| {
        out.push(LocusPoint {
            point,
            source: traj.source,
            constant: c,
            arclength,
        });
    };
    for i in 0..times.len() {
        let s = &traj.samples[i];
        if times[i] == 0.0 {
            push(&mut out, s.point, s.arclength);
            continue;
        }
        if i + 1 == times.len() || traj.passages.contains(&i) || times[i] * times[i + 1] >= 0.0 {
            continue;
        }
        let (p, q) = (m[i], m[i + 1]);
        let sheet = s.point.sigma;
        let locate = |u: f64| {
            let g = (p.0 + u * (q.0 - p.0), p.1 + u * (q.1 - p.1));
            let h = libm::hypot(q.0 - p.0, q.1 - p.1);
            let g = curve
                .and_then(|cv| cv.project(g, h, 1e-13, 60))
                .unwrap_or(g);
            let mut pt = ProlatePoint::from_meridian(g.0, g.1, a);
            if g.0 == 0.0 {
                pt = pt.on_sheet(sheet);
            }
            pt
        };
        let f = |u: f64| transit_time(&locate(u), &c, params).map_or(f64::NAN, |x| x.t - t_target);
        let u = illinois(f, 0.0, 1.0, times[i], times[i + 1], 0.0, 1e-15, 200).unwrap_or(0.5);
        let ds = traj.samples[i + 1].arclength - s.arclength;
        push(&mut out, locate(u), s.arclength + u * ds);
    }
    Ok(out)
}

/// Sorts the crossings and reports `eta` gaps wider than `threshold`, with `eta = +-1` as walls.
pub fn assemble_locus(t_target: f64, mut points: Vec<LocusPoint>, threshold: f64) -> TimeLocus {
    points.sort_by(|x, y| {
        (y.source, x.constant.eta_a(), x.constant.side(), x.arclength)
            .partial_cmp(&(x.source, y.constant.eta_a(), y.constant.side(), y.arclength))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut etas: Vec<f64> = points.iter().map(|p| p.point.eta).collect();
    etas.push(-1.0);
    etas.push(1.0);
    etas.sort_by(f64::total_cmp);
    let cuts = etas
        .windows(2)
        .filter(|w| w[1] - w[0] > threshold)
        .map(|w| EtaGap { lo: w[0], hi: w[1] })
        .collect();
    TimeLocus {
        t: t_target,
        points,
        cuts,
    }
}

/// Cut threshold: `factor` times the mean spacing of the family in `eta_a`.
pub fn cut_threshold(family: &[MotionConstant], factor: f64) -> f64 {
    factor * 2.0 / family.len().max(1) as f64
}

/// Locus refinement settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusControls {
    /// Cut threshold as a multiple of the mean family spacing in `eta_a`.
    pub cut_factor: f64,
    /// Rounds of family refinement at the ends of each gap.
    pub rounds: usize,
    /// Smallest `arcsin(eta_a)` spacing refinement may create.
    pub min_spacing: f64,
}

impl Default for LocusControls {
    fn default() -> Self {
        LocusControls {
            cut_factor: 3.0,
            rounds: 4,
            min_spacing: 1e-6,
        }
    }
}

/// Orders constants by value, `-0` before `+0`.
fn constant_key(c: &MotionConstant) -> (f64, f64) {
    (c.eta_a(), c.side())
}

fn arcsin_midpoint(
    x: &MotionConstant,
    y: &MotionConstant,
    min_spacing: f64,
) -> Option<MotionConstant> {
    let (t1, t2) = (libm::asin(x.eta_a()), libm::asin(y.eta_a()));
    if (t1 - t2).abs() < min_spacing {
        return None;
    }
    let m = sin(0.5 * (t1 + t2));
    if m == 0.0 {
        return None;
    }
    MotionConstant::new(m).ok()
}

/// Loci for several times from one family traced from both sources.
///
/// A locus that runs nearly along the trajectories is crossed by few family
/// members, which would open spurious gaps; each gap wider than the threshold
/// therefore triggers new members midway (in `arcsin(eta_a)`) between the
/// members bounding it and their neighbours. A gap that survives every round
/// is reported as a cut. `trace` receives each batch in order and must return
/// the trajectories in the same order.
pub fn trace_time_loci<F>(
    times: &[f64],
    family: &[MotionConstant],
    params: &PhysicalParams,
    controls: &LocusControls,
    mut trace: F,
) -> Result<Vec<TimeLocus>>
where
    F: FnMut(&[(Source, MotionConstant)]) -> Result<Vec<Trajectory>>,
{
    if family.is_empty() {
        return Err(domain("family size", 0.0));
    }
    for &t in times {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(domain("target time", t));
        }
    }
    let threshold = cut_threshold(family, controls.cut_factor);
    let mut jobs = Vec::with_capacity(2 * family.len());
    for src in [Source::Upper, Source::Lower] {
        for c in family {
            jobs.push((src, *c));
        }
    }
    let mut pool: Vec<Trajectory> = trace(&jobs)?;
    let mut members: [Vec<MotionConstant>; 2] = [family.to_vec(), family.to_vec()];
    for m in members.iter_mut() {
        m.sort_by(|x, y| constant_key(x).partial_cmp(&constant_key(y)).unwrap());
    }
    let slot = |s: Source| match s {
        Source::Upper => 0,
        Source::Lower => 1,
    };
    let mut points: Vec<Vec<LocusPoint>> = Vec::with_capacity(times.len());
    for &t in times {
        let mut v = Vec::new();
        for tr in &pool {
            v.extend(locus_points(tr, t, params)?);
        }
        points.push(v);
    }
    for _ in 0..controls.rounds {
        let mut want: Vec<(Source, MotionConstant)> = Vec::new();
        for pts in &points {
            let mut sorted: Vec<&LocusPoint> = pts.iter().collect();
            sorted.sort_by(|x, y| x.point.eta.total_cmp(&y.point.eta));
            for w in sorted.windows(2) {
                if w[1].point.eta - w[0].point.eta <= threshold {
                    continue;
                }
                for p in w {
                    let list = &members[slot(p.source)];
                    let key = constant_key(&p.constant);
                    let Ok(i) =
                        list.binary_search_by(|c| constant_key(c).partial_cmp(&key).unwrap())
                    else {
                        continue;
                    };
                    for j in [i.wrapping_sub(1), i + 1] {
                        if let Some(nb) = list.get(j) {
                            if let Some(m) = arcsin_midpoint(&p.constant, nb, controls.min_spacing)
                            {
                                want.push((p.source, m));
                            }
                        }
                    }
                }
            }
        }
        want.sort_by(|x, y| {
            (x.0, constant_key(&x.1))
                .partial_cmp(&(y.0, constant_key(&y.1)))
                .unwrap()
        });
        want.dedup_by(|x, y| x.0 == y.0 && constant_key(&x.1) == constant_key(&y.1));
        want.retain(|(s, c)| {
            let key = constant_key(c);
            members[slot(*s)]
                .binary_search_by(|m| constant_key(m).partial_cmp(&key).unwrap())
                .is_err()
        });
        if want.is_empty() {
            break;
        }
        let fresh = trace(&want)?;
        for (s, c) in &want {
            let list = &mut members[slot(*s)];
            let key = constant_key(c);
            let at = list.partition_point(|m| constant_key(m) < key);
            list.insert(at, *c);
        }
        for (k, &t) in times.iter().enumerate() {
            for tr in &fresh {
                points[k].extend(locus_points(tr, t, params)?);
            }
        }
        pool.extend(fresh);
    }
    Ok(times
        .iter()
        .zip(points)
        .map(|(&t, pts)| assemble_locus(t, pts, threshold))
        .collect())
}

/// Single-locus convenience wrapper tracing sequentially.
pub fn trace_time_locus(
    t_target: f64,
    family: &[MotionConstant],
    params: &PhysicalParams,
    controls: &crate::trajectory::TraceControls,
) -> Result<TimeLocus> {
    let mut out = trace_time_loci(
        &[t_target],
        family,
        params,
        &LocusControls::default(),
        |jobs| {
            jobs.iter()
                .map(|(s, c)| crate::trajectory::trace_trajectory(*s, c, params, controls))
                .collect()
        },
    )?;
    Ok(out.remove(0))
}

/// Points `(1, 2 n pi / ka)` strictly inside the interfocal segment, origin included.
pub fn tertiary_foci(params: &PhysicalParams) -> Vec<ProlatePoint> {
    let ka = params.ka();
    let n_max = floor(ka / (2.0 * PI)) as i64;
    let mut out = Vec::new();
    for n in -n_max..=n_max {
        let eta = 2.0 * PI * n as f64 / ka;
        if eta.abs() < 1.0 {
            out.push(ProlatePoint::new(1.0, eta));
        }
    }
    out
}

/// Largest `|t_eta - t_xi|` over the samples of a trajectory.
pub fn form_disagreement(t: &Trajectory, params: &PhysicalParams) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for s in &t.samples {
        if t.constant.eta_a() == 0.0 || t.constant.is_axial() {
            break;
        }
        let a = transit_time_eta(s.point.xi, s.point.eta, &t.constant, params)?.t;
        let b = transit_time_xi(s.point.eta, &t.constant, params)?.t;
        worst = worst.max((a - b).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> MotionConstant {
        MotionConstant::new(x).unwrap()
    }

    #[test]
    fn eta_form_examples() {
        let p = PhysicalParams::default();
        assert_eq!(transit_time_eta(1.0, 1.0, &c(0.3), &p).unwrap().t, 0.0);
        let t = transit_time_eta(1.0, 4.0 * PI / 15.2, &c(0.3), &p)
            .unwrap()
            .t;
        assert!(t.abs() < 1e-15);
        assert_eq!(
            transit_time_eta(1.2, 0.5, &c(0.0), &p),
            Err(Error::SingularConstant)
        );
        // direct evaluation
        let ea = -sin(PI / 18.0);
        let d = 1.44 + 0.25 + (1.44 - 0.25) * cos(7.6);
        let expect = (1.0 - 2.0 / d) * 1.2 * 0.5 / (15.2 * ea);
        let t = transit_time_eta(1.2, 0.5, &c(ea), &p).unwrap().t;
        assert!((t - expect).abs() < 1e-16);
        assert!(t > 0.0);
    }

    #[test]
    fn xi_form_examples() {
        let p = PhysicalParams::default();
        assert_eq!(transit_time_xi(0.0, &c(0.4), &p).unwrap().t, 0.0);
        let t = transit_time_xi(0.5, &c(0.0), &p).unwrap().t;
        assert!((t - 0.5 / 15.2).abs() < 1e-15);
        assert!((t - 0.032895).abs() < 1e-6);
        assert_eq!(
            transit_time_xi(0.5, &c(1.0), &p),
            Err(Error::SingularConstant)
        );
    }

    #[test]
    fn tertiary_examples() {
        let etas = |k: f64| {
            let p = PhysicalParams::default().with_wavenumber(k).unwrap();
            tertiary_foci(&p).iter().map(|q| q.eta).collect::<Vec<_>>()
        };
        let e = etas(15.2);
        assert_eq!(e.len(), 5);
        assert!((e[3] - 0.41337).abs() < 1e-5 && (e[4] - 0.82673).abs() < 1e-5);
        let e = etas(24.3);
        assert_eq!(e.len(), 7);
        for (j, (x, y)) in e[4..].iter().zip([0.25855, 0.51711, 0.77566]).enumerate() {
            assert!((x - 2.0 * PI * (j + 1) as f64 / 24.3).abs() < 1e-15);
            assert!((x - y).abs() < 1e-4);
        }
        assert_eq!(etas(6.0), [0.0]);
    }

    #[test]
    fn family_layout() {
        let f = arcsin_family(721).unwrap();
        assert_eq!(f.len(), 722);
        assert!(f.iter().all(|c| !c.is_axial()));
        assert_eq!(
            f[360].zero_sign(),
            Some(crate::trajectory::ZeroSign::Negative)
        );
        assert_eq!(
            f[361].zero_sign(),
            Some(crate::trajectory::ZeroSign::Positive)
        );
        assert!(arcsin_family(0).is_err());
    }
}
