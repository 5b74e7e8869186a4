//! Predictor-corrector continuation of a trajectory leaving the upper source.
//!
//! Lower-source trajectories are produced by the caller as z-mirrors.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::coords::{PhysicalParams, ProlatePoint};
use crate::error::{domain, Error, Result};
use crate::math::{acos, atan2, cos, hypot, round, sin, sqrt};
use crate::roots::illinois;

use super::{curve::MeridianCurve, MotionConstant, TraceControls, ZeroSign};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum End {
    Focus,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Stop {
    Focus,
    Free,
    Origin,
}

pub(super) struct Path {
    /// Signed meridian points `(rho, z)`.
    pub pts: Vec<(f64, f64)>,
    pub passages: Vec<usize>,
    pub end: End,
}

fn check_controls(c: &TraceControls) -> Result<()> {
    for (what, v) in [
        ("step", c.step),
        ("min_step", c.min_step),
        ("max_turn", c.max_turn),
        ("max_eta_step", c.max_eta_step),
        ("seed_offset", c.seed_offset),
        ("asymptote_tol", c.asymptote_tol),
        ("tol", c.tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(domain(what, v));
        }
    }
    if !(c.shrink > 0.0 && c.shrink < 1.0) {
        return Err(domain("shrink", c.shrink));
    }
    if !(c.xi_max > 1.0 && c.xi_max.is_finite()) {
        return Err(domain("xi_max", c.xi_max));
    }
    if c.min_step > c.step || c.seed_offset > 0.1 {
        return Err(domain("step bounds", c.min_step));
    }
    Ok(())
}

pub(super) fn trace_upper(
    constant: &MotionConstant,
    params: &PhysicalParams,
    controls: &TraceControls,
) -> Result<Path> {
    check_controls(controls)?;
    if constant.is_axial() {
        return Ok(axial_path(constant.eta_a(), params, controls));
    }
    let curve = MeridianCurve::new(constant, params)?;
    let mut m = Marcher::new(curve, constant, params, controls);
    if constant.eta_a() == 0.0 {
        m.zero_mode = true;
        m.seed()?;
        let stop = m.run()?;
        debug_assert_eq!(stop, Stop::Origin);
        return Ok(match constant.zero_sign() {
            Some(ZeroSign::Negative) => m.mirror_through_origin(),
            _ => m.mirror_plane_ray(),
        });
    }
    m.seed()?;
    let end = match m.run()? {
        Stop::Focus => End::Focus,
        Stop::Free | Stop::Origin => End::Free,
    };
    Ok(Path {
        pts: m.pts,
        passages: m.passages,
        end,
    })
}

fn axial_path(eta_a: f64, params: &PhysicalParams, c: &TraceControls) -> Path {
    let a = params.separation();
    let mut pts = Vec::new();
    if eta_a < 0.0 {
        let n = libm::ceil(2.0 / c.max_eta_step) as usize;
        for i in 0..=n {
            pts.push((0.0, 0.5 * a - a * i as f64 / n as f64));
        }
        Path {
            pts,
            passages: Vec::new(),
            end: End::Focus,
        }
    } else {
        let z_end = 0.5 * a * c.xi_max * (1.0 + 1e-9);
        let mut z = 0.5 * a;
        pts.push((0.0, z));
        while z < z_end {
            z = (z + c.step * a * (z / a).max(1.0)).min(z_end);
            pts.push((0.0, z));
        }
        Path {
            pts,
            passages: Vec::new(),
            end: End::Free,
        }
    }
}

struct Marcher<'a> {
    curve: MeridianCurve,
    ctl: &'a TraceControls,
    a: f64,
    k: f64,
    ka: f64,
    eta_a: f64,
    q: f64,
    zero_mode: bool,
    pts: Vec<(f64, f64)>,
    passages: Vec<usize>,
    t: (f64, f64),
    h: f64,
}

fn dist(p: (f64, f64), q: (f64, f64)) -> f64 {
    hypot(p.0 - q.0, p.1 - q.1)
}

impl<'a> Marcher<'a> {
    fn new(
        curve: MeridianCurve,
        constant: &MotionConstant,
        params: &PhysicalParams,
        ctl: &'a TraceControls,
    ) -> Self {
        Marcher {
            curve,
            ctl,
            a: params.separation(),
            k: params.wavenumber(),
            ka: params.ka(),
            eta_a: constant.eta_a(),
            q: constant.q(),
            zero_mode: false,
            pts: Vec::new(),
            passages: Vec::new(),
            t: (0.0, -1.0),
            h: 0.0,
        }
    }

    fn prolate(&self, p: (f64, f64)) -> ProlatePoint {
        ProlatePoint::from_meridian(p.0, p.1, self.a)
    }

    fn fail(&self, stage: &'static str) -> Error {
        let p = self.prolate(*self.pts.last().unwrap_or(&(0.0, 0.5 * self.a)));
        Error::Convergence {
            stage,
            xi: p.xi,
            eta: p.eta,
        }
    }

    /// First point on a small circle about the source, on the `rho > 0` side.
    fn seed(&mut self) -> Result<()> {
        let a = self.a;
        let d = self.ctl.seed_offset * a;
        let src = (0.0, 0.5 * a);
        let g = |al: f64| self.curve.value(d * sin(al), src.1 + d * cos(al));
        let n = 2048;
        let mut roots = Vec::new();
        let mut a0 = 0.0;
        let mut g0 = g(a0);
        for i in 1..=n {
            let a1 = PI * i as f64 / n as f64;
            let g1 = g(a1);
            if g0 * g1 < 0.0 {
                if let Some(r) = illinois(g, a0, a1, g0, g1, 0.0, 1e-15, 200) {
                    if r > 0.0 && r < PI {
                        roots.push(r);
                    }
                }
            }
            a0 = a1;
            g0 = g1;
        }
        // leading order about the focus: cos(al) - c sin(al) = -cos(ka)
        let c = self.curve.slope();
        let phi = atan2(c, 1.0);
        let w = acos((-cos(self.ka) / sqrt(1.0 + c * c)).clamp(-1.0, 1.0));
        let guesses = [w - phi, 2.0 * PI - w - phi, w - phi + 2.0 * PI, -w - phi];
        let guess = guesses
            .iter()
            .copied()
            .find(|x| *x > 0.0 && *x < PI)
            .unwrap_or(0.5 * PI);
        let al = roots
            .iter()
            .copied()
            .min_by(|x, y| (x - guess).abs().partial_cmp(&(y - guess).abs()).unwrap())
            .ok_or_else(|| Error::Convergence {
                stage: "trajectory seed",
                xi: 1.0,
                eta: 1.0,
            })?;
        let (s, co) = (sin(al), cos(al));
        self.pts.push(src);
        self.pts.push((d * s, src.1 + d * co));
        self.t = (s, co);
        self.h = 0.5 * d;
        Ok(())
    }

    fn eta_of(&self, p: (f64, f64)) -> f64 {
        let r1 = hypot(p.0, p.1 + 0.5 * self.a);
        let r2 = hypot(p.0, p.1 - 0.5 * self.a);
        (r1 - r2) / self.a
    }

    /// One accepted predictor-corrector step; shrinks `h` until accepted.
    fn advance(&mut self, p: (f64, f64), floor: f64) -> Result<((f64, f64), (f64, f64), f64)> {
        let ctl = self.ctl;
        let cos_max = cos(ctl.max_turn);
        let eta_p = self.eta_of(p);
        loop {
            let h = self.h;
            let pred = (p.0 + h * self.t.0, p.1 + h * self.t.1);
            let ok = self
                .curve
                .project(pred, h, ctl.tol, ctl.max_iter)
                .and_then(|q| {
                    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
                    let len = hypot(dx, dy);
                    if len == 0.0 || len > 2.0 * h {
                        return None;
                    }
                    if (dx * self.t.0 + dy * self.t.1) / len < cos_max {
                        return None;
                    }
                    let tq = self.curve.tangent(q.0, q.1)?;
                    let tq = if tq.0 * self.t.0 + tq.1 * self.t.1 < 0.0 {
                        (-tq.0, -tq.1)
                    } else {
                        tq
                    };
                    let turn = (tq.0 * self.t.0 + tq.1 * self.t.1).clamp(-1.0, 1.0);
                    if turn < cos_max {
                        return None;
                    }
                    if (self.eta_of(q) - eta_p).abs() > ctl.max_eta_step {
                        return None;
                    }
                    Some((q, tq, acos(turn)))
                });
            if let Some(r) = ok {
                return Ok(r);
            }
            self.h *= ctl.shrink;
            if self.h < floor {
                return Err(self.fail("trajectory corrector"));
            }
        }
    }

    fn nearest_vertex(&self, p: (f64, f64)) -> Option<(f64, f64)> {
        if p.0.abs() > 0.1 * self.a || p.1.abs() >= 0.5 * self.a {
            return None;
        }
        let n = round(p.1 * self.k / PI);
        let zn = n * PI / self.k;
        if zn.abs() >= 0.5 * self.a {
            return None;
        }
        let v = (0.0, zn);
        ((v.0 - p.0) * self.t.0 + (v.1 - p.1) * self.t.1 > 0.0).then_some(v)
    }

    fn run(&mut self) -> Result<Stop> {
        let a = self.a;
        let ctl = self.ctl;
        let src = (0.0, 0.5 * a);
        let dst = (0.0, -0.5 * a);
        let delta = ctl.seed_offset * a;
        let base = ctl.step * a;
        let runaway = 1e3 * ctl.xi_max;
        loop {
            if self.pts.len() >= ctl.max_samples {
                return Err(self.fail("trajectory sample budget"));
            }
            let p = *self.pts.last().unwrap();
            let mut cap = base * (hypot(p.0, p.1) / a).max(1.0);
            cap = cap.min((0.5 * dist(p, src)).max(0.5 * delta));
            let dd = dist(p, dst);
            if !self.zero_mode {
                if dd <= 1.5 * delta {
                    self.pts.push(dst);
                    return Ok(Stop::Focus);
                }
                cap = cap.min(0.5 * dd);
            }
            if self.zero_mode {
                if let Some(v) = self.nearest_vertex(p) {
                    let dv = dist(p, v);
                    // the origin is a triple point, so the corrector loses accuracy sooner there
                    let snap = if v.1 == 0.0 { 5e-4 } else { 1e-5 };
                    if dv < snap * a {
                        self.pts.push(v);
                        if v.1 == 0.0 {
                            return Ok(Stop::Origin);
                        }
                        self.reflect_at_vertex(v)?;
                        continue;
                    }
                    cap = cap.min(0.25 * dv);
                }
            } else if let Some(v) = self.nearest_vertex(p) {
                // for small |c| the crossings of the c = 0 curve open into hairpins of width ~ |c| a
                let dv = dist(p, v);
                cap = cap.min((0.25 * dv).max(1e-2 * self.curve.slope().abs() * a));
            }
            self.h = self.h.min(cap);
            let floor = (ctl.min_step * a).min(1e-2 * cap);
            let (q, tq, turn) = self.advance(p, floor)?;
            self.insert_axis_points(p, q);
            self.pts.push(q);
            self.t = tq;
            if turn < 0.25 * ctl.max_turn {
                self.h = (1.5 * self.h).min(cap.max(base * (hypot(q.0, q.1) / a).max(1.0)));
            }
            let pq = self.prolate(q);
            let outward = q.0 * tq.0 + q.1 * tq.1 > 0.0;
            if pq.xi > ctl.xi_max && outward {
                let sigma = if q.0 < 0.0 { -1.0 } else { 1.0 };
                if !self.zero_mode && (pq.eta - sigma * self.eta_a).abs() < ctl.asymptote_tol {
                    return Ok(Stop::Free);
                }
                if self.try_passage(q, pq, sigma)? {
                    continue;
                }
                if pq.xi > runaway {
                    return Err(self.fail("trajectory runaway"));
                }
            }
        }
    }

    /// Inserts exact axis samples the step `p -> q` passes through or touches.
    fn insert_axis_points(&mut self, p: (f64, f64), q: (f64, f64)) {
        let (a, k) = (self.a, self.k);
        if p.0 * q.0 < 0.0 {
            let zc = p.1 + (q.1 - p.1) * (p.0 / (p.0 - q.0));
            let zn = round(zc * k / PI) * PI / k;
            if zn.abs() < 0.5 * a && (zc - zn).abs() <= 2.0 * dist(p, q) + 1e-12 {
                self.pts.push((0.0, zn));
            }
            return;
        }
        let n = self.pts.len();
        if n < 2 || p.0 == 0.0 || self.zero_mode {
            return;
        }
        let pp = self.pts[n - 2];
        if pp.0 == 0.0 || pp.0 * p.0 < 0.0 || !(p.0.abs() <= pp.0.abs() && p.0.abs() <= q.0.abs()) {
            return;
        }
        if p.1.abs() >= 0.5 * a {
            return;
        }
        let m = round(p.1 * k / PI);
        if m == 0.0 {
            return;
        }
        let zn = m * PI / k;
        if zn.abs() >= 0.5 * a {
            return;
        }
        let spacing = (p.1 - pp.1).abs().max((q.1 - p.1).abs());
        if (p.1 - zn).abs() > 1.5 * spacing {
            return;
        }
        // rho ~ C (z - zn)^2 on the branch through the tangency point
        let c = self.curve.slope();
        let cc = -4.0 * k * k * zn * (0.25 * a * a - zn * zn) / (c * a * a);
        let pred = cc * (p.1 - zn) * (p.1 - zn);
        if (p.0 - pred).abs() > 0.25 * pred.abs() + 1e-12 * a {
            return;
        }
        if (zn - p.1) * (q.1 - p.1) > 0.0 {
            self.pts.push((0.0, zn));
        } else {
            self.pts.insert(n - 1, (0.0, zn));
        }
    }

    /// Restarts on the mirrored arm after reaching an axis crossing with `c = 0`.
    fn reflect_at_vertex(&mut self, v: (f64, f64)) -> Result<()> {
        let d = 1e-4 * self.a;
        let out = (-self.t.0, self.t.1);
        let guess = (v.0 + d * out.0, v.1 + d * out.1);
        let q = self
            .curve
            .project(guess, 0.5 * d, self.ctl.tol, self.ctl.max_iter)
            .ok_or_else(|| self.fail("axis reflection"))?;
        let tq = self
            .curve
            .tangent(q.0, q.1)
            .ok_or_else(|| self.fail("axis reflection"))?;
        self.t = if tq.0 * out.0 + tq.1 * out.1 < 0.0 {
            (-tq.0, -tq.1)
        } else {
            tq
        };
        self.pts.push(q);
        self.h = 0.5 * d;
        Ok(())
    }

    /// Far-field continuation through infinity along a destructive hyperboloid.
    fn try_passage(&mut self, q: (f64, f64), pq: ProlatePoint, sigma: f64) -> Result<bool> {
        let ka = self.ka;
        let e = pq.eta;
        let mut star = f64::NAN;
        let mut n = 1;
        loop {
            let s = (2 * n - 1) as f64 * PI / ka;
            if s >= 1.0 {
                break;
            }
            for cand in [s, -s] {
                if star.is_nan() || (e - cand).abs() < (e - star).abs() {
                    star = cand;
                }
            }
            n += 1;
        }
        if star.is_nan() || (e - star).abs() > 0.05 {
            return Ok(false);
        }
        let b = sigma * self.eta_a * sqrt(1.0 - star * star) - self.q * star;
        if b == 0.0 {
            return Ok(false);
        }
        let crit = star * (star * b + self.q) / b;
        if crit >= 0.0 {
            return Ok(false);
        }
        let xi = pq.xi;
        let width = 2.0 * sqrt(-crit) / (xi * ka);
        let off = e - star;
        if off.abs() > 3.0 * width + 2e-3 {
            return Ok(false);
        }
        // returning branch: same xi, other side of the hyperboloid
        let a = self.a;
        let res = |et: f64| {
            let r = sigma
                * 0.5
                * a
                * sqrt(((xi - 1.0) * (xi + 1.0) * (1.0 - et) * (1.0 + et)).max(0.0));
            self.curve.value(r, 0.5 * a * xi * et)
        };
        // first sign change moving away from the hyperboloid on the far side
        let dir = -off.signum();
        let dx = 0.25 * width.min(off.abs()).max(1e-7);
        let mut lo = star + dir * 1e-3 * dx;
        let mut flo = res(lo);
        let mut found = None;
        while (lo - star).abs() < 0.05 {
            let hi = lo + dir * dx;
            let fhi = res(hi);
            if flo * fhi <= 0.0 {
                found = illinois(res, lo, hi, flo, fhi, 0.0, 1e-15, 400);
                break;
            }
            lo = hi;
            flo = fhi;
        }
        // no returning branch within reach: keep marching outward
        let Some(et) = found else {
            return Ok(false);
        };
        let r =
            sigma * 0.5 * a * sqrt(((xi - 1.0) * (xi + 1.0) * (1.0 - et) * (1.0 + et)).max(0.0));
        let back = (r, 0.5 * a * xi * et);
        let tq = self
            .curve
            .tangent(back.0, back.1)
            .ok_or_else(|| self.fail("passage through infinity"))?;
        self.t = if tq.0 * back.0 + tq.1 * back.1 > 0.0 {
            (-tq.0, -tq.1)
        } else {
            tq
        };
        self.passages.push(self.pts.len() - 1);
        self.pts.push(back);
        let _ = q;
        Ok(true)
    }

    /// `-0`: the traced half to the origin followed by its point reflection.
    fn mirror_through_origin(self) -> Path {
        let first = self.pts;
        let n = first.len();
        let mut pts = first.clone();
        for i in (0..n - 1).rev() {
            let (r, z) = first[i];
            pts.push((-r, -z));
        }
        let mut passages = self.passages.clone();
        for &i in self.passages.iter().rev() {
            passages.push(2 * n - 3 - i);
        }
        Path {
            pts,
            passages,
            end: End::Focus,
        }
    }

    /// `+0`: the traced half to the origin followed by the mirror-plane ray.
    fn mirror_plane_ray(self) -> Path {
        let a = self.a;
        let mut pts = self.pts;
        let r_end = 0.5 * a * sqrt((self.ctl.xi_max * self.ctl.xi_max - 1.0) * (1.0 + 1e-9));
        let mut r = 0.0;
        while r < r_end {
            r = (r + self.ctl.step * a * (r / a).max(1.0)).min(r_end);
            pts.push((r, 0.0));
        }
        Path {
            pts,
            passages: self.passages,
            end: End::Free,
        }
    }
}
