//! Level sets of the unwrapped action in a rectangular `(xi, eta)` window.
//!
//! Contours are seeded from sign changes on the window boundary and on a set
//! of interior scan lines, then marched with a tangent predictor and a secant
//! corrector that solves for `xi` at fixed `eta` or for `eta` at fixed `xi`,
//! whichever coordinate the level set is steeper in.

use alloc::vec::Vec;

use super::{unwrapped_closed_form, unwrapped_gradient, ActionLevel, ActionValue};
use crate::coords::{PhysicalParams, ProlatePoint};
use crate::error::{domain, Error, Result};
use crate::math::hypot;
use crate::roots::{illinois, solve_near};

/// Rectangular region of the `(xi, eta)` chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    /// `xi` range, `1 <= lo < hi`.
    pub xi: (f64, f64),
    /// `eta` range, `-1 <= lo < hi <= 1`.
    pub eta: (f64, f64),
}

impl Default for Window {
    /// `xi in [1, 6]`, `eta in [0, 1]`.
    fn default() -> Self {
        Window {
            xi: (1.0, 6.0),
            eta: (0.0, 1.0),
        }
    }
}

impl Window {
    /// Validated window.
    pub fn new(xi: (f64, f64), eta: (f64, f64)) -> Result<Self> {
        if !(xi.0 >= 1.0 && xi.1 > xi.0 && xi.1.is_finite()) {
            return Err(domain("xi window", xi.0));
        }
        if !(eta.0 >= -1.0 && eta.1 <= 1.0 && eta.1 > eta.0) {
            return Err(domain("eta window", eta.0));
        }
        Ok(Window { xi, eta })
    }

    /// True when `(x, e)` lies in the closed window.
    pub fn contains(&self, x: f64, e: f64) -> bool {
        let s = 1e-13;
        x >= self.xi.0 - s && x <= self.xi.1 + s && e >= self.eta.0 - s && e <= self.eta.1 + s
    }

    fn on_boundary(&self, x: f64, e: f64) -> bool {
        let s = 1e-11;
        (x - self.xi.0).abs() < s
            || (x - self.xi.1).abs() < s
            || (e - self.eta.0).abs() < s
            || (e - self.eta.1).abs() < s
    }

    /// True when the origin `(1, 0)` is inside.
    pub fn contains_origin(&self) -> bool {
        self.xi.0 <= 1.0 && self.eta.0 <= 0.0 && self.eta.1 >= 0.0
    }
}

/// Marching parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourControls {
    /// Largest step along the contour in the `(xi, eta)` chart.
    pub step: f64,
    /// Absolute corrector tolerance on `W/hbar - level`.
    pub tol: f64,
    /// Secant iterations per correction.
    pub max_iter: usize,
    /// Bracket doublings before a correction is declared failed.
    pub expansions: u32,
    /// Samples per boundary edge and per interior scan line.
    pub scan: usize,
    /// Interior scan lines of constant `eta`.
    pub scan_lines: usize,
    /// Vertex budget per branch.
    pub max_vertices: usize,
}

impl Default for ContourControls {
    fn default() -> Self {
        ContourControls {
            step: 5e-3,
            tol: 1e-10,
            max_iter: 100,
            expansions: 16,
            scan: 400,
            scan_lines: 48,
            max_vertices: 2_000_000,
        }
    }
}

impl ContourControls {
    /// Default controls with a different step.
    pub fn with_step(step: f64) -> Self {
        ContourControls {
            step,
            ..Self::default()
        }
    }
}

/// One vertex of a contour polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourVertex {
    /// Location.
    pub point: ProlatePoint,
    /// Cumulative length in the `(xi, eta)` chart.
    pub arclength: f64,
    /// `W - level` in the level's unit.
    pub residual: f64,
}

/// A connected polyline of one contour.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourBranch {
    /// Position in the contour's branch list.
    pub id: usize,
    /// Vertices in arclength order.
    pub vertices: Vec<ContourVertex>,
    /// True for a loop that closes inside the window.
    pub closed: bool,
}

/// Connectivity of the contours about the two foci.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    /// One contour around each focus, separated by the mirror plane.
    DisjointPair,
    /// A single contour around both foci, crossing the mirror plane.
    Merged,
}

/// All branches of one level set inside a window.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionContour {
    /// The traced level.
    pub level: ActionLevel,
    /// The window traced in.
    pub window: Window,
    /// Polylines, each in arclength order.
    pub branches: Vec<ContourBranch>,
    /// Connectivity about the foci.
    pub topology: Topology,
    /// Wrinkle positions, ascending in `|eta|`.
    pub wrinkle_etas: Vec<f64>,
}

#[derive(Clone, Copy)]
struct Field {
    ka: f64,
    level: f64,
}

impl Field {
    fn f(&self, x: f64, e: f64) -> f64 {
        unwrapped_closed_form(x, e, self.ka) - self.level
    }
    fn grad(&self, x: f64, e: f64) -> (f64, f64) {
        unwrapped_gradient(x, e, self.ka)
    }
    fn tangent(&self, x: f64, e: f64) -> Option<(f64, f64)> {
        let (gx, ge) = self.grad(x, e);
        let n = hypot(gx, ge);
        (n > 0.0 && n.is_finite()).then(|| (-ge / n, gx / n))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum End {
    Boundary,
    Closed,
}

/// Traces every branch of the level set inside `window`.
///
/// A level with no crossing in the window gives an empty contour.
pub fn trace_action_contour(
    level: ActionLevel,
    window: &Window,
    controls: &ContourControls,
    params: &PhysicalParams,
) -> Result<ActionContour> {
    let w = Window::new(window.xi, window.eta)?;
    if !(controls.step > 0.0 && controls.step.is_finite()) {
        return Err(domain("step", controls.step));
    }
    let field = Field {
        ka: params.ka(),
        level: level.in_hbar(),
    };
    let (boundary, interior) = seeds(&field, &w, controls);
    let mut polylines: Vec<(Vec<(f64, f64)>, bool)> = Vec::new();
    let near = 0.25 * controls.step;
    for (seed, on_edge) in boundary
        .into_iter()
        .map(|s| (s, true))
        .chain(interior.into_iter().map(|s| (s, false)))
    {
        if polylines
            .iter()
            .any(|(p, _)| distance_to_polyline(seed, p) < near)
        {
            continue;
        }
        let Some(t) = field.tangent(seed.0, seed.1) else {
            continue;
        };
        if on_edge {
            let eps = 1e-6 * controls.step;
            let inward = |d: f64| w.contains(seed.0 + eps * d * t.0, seed.1 + eps * d * t.1);
            let dir = if inward(1.0) {
                1.0
            } else if inward(-1.0) {
                -1.0
            } else {
                continue;
            };
            let (pts, _) = march(&field, &w, seed, dir, controls)?;
            if pts.len() >= 2 {
                polylines.push((pts, false));
            }
        } else {
            let (fwd, end) = march(&field, &w, seed, 1.0, controls)?;
            if end == End::Closed {
                polylines.push((fwd, true));
            } else {
                let (mut back, _) = march(&field, &w, seed, -1.0, controls)?;
                back.reverse();
                back.pop();
                back.extend(fwd);
                polylines.push((back, false));
            }
        }
    }
    let unit = level.unit.in_hbar();
    let mut branches: Vec<ContourBranch> = polylines
        .into_iter()
        .map(|(mut pts, closed)| {
            if !closed && key(pts[pts.len() - 1]) < key(pts[0]) {
                pts.reverse();
            }
            let mut s = 0.0;
            let mut prev = pts[0];
            let vertices = pts
                .iter()
                .map(|&(x, e)| {
                    s += hypot(x - prev.0, e - prev.1);
                    prev = (x, e);
                    ContourVertex {
                        point: ProlatePoint::new(x, e),
                        arclength: s,
                        residual: field.f(x, e) / unit,
                    }
                })
                .collect();
            ContourBranch {
                id: 0,
                vertices,
                closed,
            }
        })
        .collect();
    branches.sort_by(|a, b| {
        let ka = key((a.vertices[0].point.xi, a.vertices[0].point.eta));
        let kb = key((b.vertices[0].point.xi, b.vertices[0].point.eta));
        ka.partial_cmp(&kb).unwrap_or(core::cmp::Ordering::Equal)
    });
    for (i, b) in branches.iter_mut().enumerate() {
        b.id = i;
    }
    let topology = topology_of(&branches, &w);
    let mut contour = ActionContour {
        level,
        window: w,
        branches,
        topology,
        wrinkle_etas: Vec::new(),
    };
    contour.wrinkle_etas = find_wrinkles(&contour, params);
    Ok(contour)
}

fn key(p: (f64, f64)) -> (f64, f64) {
    (p.1, p.0)
}

fn topology_of(branches: &[ContourBranch], w: &Window) -> Topology {
    if !(w.eta.0 <= 0.0 && w.eta.1 >= 0.0) {
        return Topology::DisjointPair;
    }
    for b in branches {
        for pair in b.vertices.windows(2) {
            let (p, q) = (pair[0].point, pair[1].point);
            if (p.eta == 0.0 && p.xi > 1.0) || (q.eta == 0.0 && q.xi > 1.0) {
                return Topology::Merged;
            }
            if p.eta * q.eta < 0.0 {
                return Topology::Merged;
            }
        }
    }
    Topology::DisjointPair
}

fn seeds(field: &Field, w: &Window, c: &ContourControls) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
    let n = c.scan.max(8);
    let ftol = 1e-2 * c.tol;
    let mut boundary = Vec::new();
    let edges: [((f64, f64), (f64, f64)); 4] = [
        ((w.xi.0, w.eta.0), (w.xi.1, w.eta.0)),
        ((w.xi.1, w.eta.0), (w.xi.1, w.eta.1)),
        ((w.xi.1, w.eta.1), (w.xi.0, w.eta.1)),
        ((w.xi.0, w.eta.1), (w.xi.0, w.eta.0)),
    ];
    for (a, b) in edges {
        scan_segment(field, a, b, n, ftol, &mut boundary);
    }
    boundary.dedup_by(|p, q| hypot(p.0 - q.0, p.1 - q.1) < 1e-12);
    let mut interior = Vec::new();
    let m = c.scan_lines.max(1);
    for j in 1..m {
        let e = w.eta.0 + (w.eta.1 - w.eta.0) * j as f64 / m as f64;
        scan_segment(field, (w.xi.0, e), (w.xi.1, e), n, ftol, &mut interior);
    }
    (boundary, interior)
}

fn scan_segment(
    field: &Field,
    a: (f64, f64),
    b: (f64, f64),
    n: usize,
    ftol: f64,
    out: &mut Vec<(f64, f64)>,
) {
    let at = |s: f64| (a.0 + s * (b.0 - a.0), a.1 + s * (b.1 - a.1));
    let g = |s: f64| {
        let p = at(s);
        field.f(p.0, p.1)
    };
    let mut s0 = 0.0;
    let mut f0 = g(0.0);
    if f0 == 0.0 {
        out.push(at(0.0));
    }
    for i in 1..=n {
        let s1 = i as f64 / n as f64;
        let f1 = g(s1);
        if f1 == 0.0 {
            out.push(at(s1));
        } else if f0 * f1 < 0.0 {
            if let Some(s) = illinois(g, s0, s1, f0, f1, ftol, 1e-15, 200) {
                out.push(at(s));
            }
        }
        s0 = s1;
        f0 = f1;
    }
}

fn distance_to_polyline(p: (f64, f64), poly: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    for seg in poly.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let l2 = dx * dx + dy * dy;
        let t = if l2 > 0.0 {
            (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / l2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        best = best.min(hypot(p.0 - a.0 - t * dx, p.1 - a.1 - t * dy));
    }
    if poly.len() == 1 {
        best = hypot(p.0 - poly[0].0, p.1 - poly[0].1);
    }
    best
}

fn correct(field: &Field, pred: (f64, f64), h: f64, c: &ContourControls) -> Option<(f64, f64)> {
    let (gx, ge) = field.grad(pred.0, pred.1);
    if ge.abs() >= gx.abs() {
        let e = solve_near(
            |e| field.f(pred.0, e),
            pred.1,
            ge,
            h,
            c.tol,
            c.max_iter,
            c.expansions,
        )?;
        Some((pred.0, e))
    } else {
        let x = solve_near(
            |x| field.f(x, pred.1),
            pred.0,
            gx,
            h,
            c.tol,
            c.max_iter,
            c.expansions,
        )?;
        Some((x, pred.1))
    }
}

fn march(
    field: &Field,
    w: &Window,
    start: (f64, f64),
    dir: f64,
    c: &ContourControls,
) -> Result<(Vec<(f64, f64)>, End)> {
    let fail = |p: (f64, f64)| Error::Convergence {
        stage: "contour corrector",
        xi: p.0,
        eta: p.1,
    };
    let mut pts = Vec::new();
    pts.push(start);
    let mut p = start;
    let t0 = field.tangent(p.0, p.1).ok_or_else(|| fail(p))?;
    let mut t = (dir * t0.0, dir * t0.1);
    let mut h = c.step;
    let h_min = 1e-7 * c.step;
    let mut travelled = 0.0;
    let start_on_edge = w.on_boundary(start.0, start.1);
    while pts.len() < c.max_vertices {
        let pred = (p.0 + h * t.0, p.1 + h * t.1);
        let accepted = correct(field, pred, h, c).and_then(|q| {
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            let len = hypot(dx, dy);
            if len == 0.0 || len > 2.0 * h {
                return None;
            }
            let cosang = (dx * t.0 + dy * t.1) / len;
            let tq = field.tangent(q.0, q.1)?;
            let tq = if tq.0 * t.0 + tq.1 * t.1 < 0.0 {
                (-tq.0, -tq.1)
            } else {
                tq
            };
            let turn = tq.0 * t.0 + tq.1 * t.1;
            (cosang > 0.94 && turn > 0.94).then_some((q, tq, turn))
        });
        let Some((q, tq, turn)) = accepted else {
            h *= 0.5;
            if h < h_min {
                return Err(fail(p));
            }
            continue;
        };
        if !w.contains(q.0, q.1) {
            let b = exit_point(field, w, p, q, c).ok_or_else(|| fail(p))?;
            if hypot(b.0 - p.0, b.1 - p.1) > 0.0 {
                pts.push(b);
            }
            return Ok((pts, End::Boundary));
        }
        travelled += hypot(q.0 - p.0, q.1 - p.1);
        if !start_on_edge && travelled > 4.0 * h && hypot(q.0 - start.0, q.1 - start.1) < 1.5 * h {
            pts.push(q);
            pts.push(start);
            return Ok((pts, End::Closed));
        }
        pts.push(q);
        p = q;
        t = tq;
        if turn > 0.9995 {
            h = (1.5 * h).min(c.step);
        }
    }
    Err(fail(p))
}

fn exit_point(
    field: &Field,
    w: &Window,
    p: (f64, f64),
    q: (f64, f64),
    c: &ContourControls,
) -> Option<(f64, f64)> {
    let (dx, dy) = (q.0 - p.0, q.1 - p.1);
    let mut best = (f64::INFINITY, 0usize);
    let bounds = [(w.xi.0, 0usize), (w.xi.1, 0), (w.eta.0, 1), (w.eta.1, 1)];
    for (i, &(v, axis)) in bounds.iter().enumerate() {
        let (from, d) = if axis == 0 { (p.0, dx) } else { (p.1, dy) };
        if d != 0.0 {
            let lam = (v - from) / d;
            let crosses = (0.0..=1.0).contains(&lam)
                && ((axis == 0 && (q.0 - v) * (p.0 - v) <= 0.0)
                    || (axis == 1 && (q.1 - v) * (p.1 - v) <= 0.0));
            if crosses && lam < best.0 {
                best = (lam, i);
            }
        }
    }
    let (lam, i) = best;
    if !lam.is_finite() {
        return None;
    }
    let b = (p.0 + lam * dx, p.1 + lam * dy);
    let h = hypot(dx, dy).max(1e-12);
    let (gx, ge) = field.grad(b.0, b.1);
    let (v, axis) = bounds[i];
    let r = if axis == 0 {
        let e = solve_near(
            |e| field.f(v, e),
            b.1,
            ge,
            h,
            c.tol,
            c.max_iter,
            c.expansions,
        )?;
        (v, e.clamp(w.eta.0, w.eta.1))
    } else {
        let x = solve_near(
            |x| field.f(x, v),
            b.0,
            gx,
            h,
            c.tol,
            c.max_iter,
            c.expansions,
        )?;
        (x.clamp(w.xi.0, w.xi.1), v)
    };
    Some(r)
}

/// Interior local maxima of `|d xi / d eta|` along each branch, as `|eta|`.
///
/// Peaks closer than 0.01 in `|eta|` across branches are merged.
pub fn find_wrinkles(c: &ActionContour, params: &PhysicalParams) -> Vec<f64> {
    let ka = params.ka();
    let mut found = Vec::new();
    for b in &c.branches {
        let v = &b.vertices;
        if v.len() < 3 {
            continue;
        }
        let s: Vec<f64> = v
            .iter()
            .map(|x| {
                let (gx, ge) = unwrapped_gradient(x.point.xi, x.point.eta, ka);
                if gx == 0.0 {
                    f64::INFINITY
                } else {
                    (ge / gx).abs()
                }
            })
            .collect();
        for i in 1..v.len() - 1 {
            let p = v[i].point;
            if c.window.on_boundary(p.xi, p.eta) || !(s[i] > s[i - 1] && s[i] >= s[i + 1]) {
                continue;
            }
            if !prominent(&s, i) {
                continue;
            }
            let e = refine_peak(&s, v, i).abs();
            if e > 0.0 && e < 1.0 {
                found.push(e);
            }
        }
    }
    found.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for e in found {
        match merged.last_mut() {
            Some((sum, n)) if e - *sum / *n as f64 <= 0.01 => {
                *sum += e;
                *n += 1;
            }
            _ => merged.push((e, 1)),
        }
    }
    merged.into_iter().map(|(s, n)| s / n as f64).collect()
}

fn prominent(s: &[f64], i: usize) -> bool {
    let peak = s[i];
    let mut left = peak;
    for &x in s[..i].iter().rev() {
        if x > peak {
            break;
        }
        left = left.min(x);
    }
    let mut right = peak;
    for &x in &s[i + 1..] {
        if x > peak {
            break;
        }
        right = right.min(x);
    }
    peak - left.max(right) > 1e-3 * peak
}

fn refine_peak(s: &[f64], v: &[ContourVertex], i: usize) -> f64 {
    let (l0, l1, l2) = (v[i - 1].arclength, v[i].arclength, v[i + 1].arclength);
    let (y0, y1, y2) = (s[i - 1], s[i], s[i + 1]);
    let d01 = (y1 - y0) / (l1 - l0);
    let d12 = (y2 - y1) / (l2 - l1);
    let curv = (d12 - d01) / (l2 - l0);
    let at = if curv < 0.0 && curv.is_finite() {
        (0.5 * (l0 + l1) - 0.5 * d01 / curv).clamp(l0, l2)
    } else {
        l1
    };
    let (a, b, la, lb) = if at <= l1 {
        (v[i - 1], v[i], l0, l1)
    } else {
        (v[i], v[i + 1], l1, l2)
    };
    let t = if lb > la { (at - la) / (lb - la) } else { 0.0 };
    a.point.eta + t * (b.point.eta - a.point.eta)
}

/// Level, in multiples of `hbar`, at which the contours about the two foci join.
///
/// Bisects on topology between the lowest action on the axis segment and the
/// highest on the mirror plane inside the window until the bracket is below
/// `1e-8 hbar`.
pub fn critical_merge_level(
    window: &Window,
    controls: &ContourControls,
    params: &PhysicalParams,
) -> Result<ActionValue> {
    let w = Window::new(window.xi, window.eta)?;
    if !w.contains_origin() {
        return Err(domain("window must contain the origin", w.xi.0));
    }
    let ka = params.ka();
    let n = controls.scan.max(8);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=n {
        let s = i as f64 / n as f64;
        let e = w.eta.1 * s;
        if e > 0.0 {
            lo = lo.min(unwrapped_closed_form(1.0, e, ka));
        }
        let x = 1.0 + (w.xi.1 - 1.0) * s;
        hi = hi.max(unwrapped_closed_form(x, 0.0, ka));
    }
    let margin = 1e-2 * (hi - lo);
    lo += margin;
    hi -= margin;
    let topo = |l: f64| -> Result<Topology> {
        Ok(trace_action_contour(ActionLevel::hbar(l), &w, controls, params)?.topology)
    };
    let fail = Error::Convergence {
        stage: "merge level bracket",
        xi: 1.0,
        eta: 0.0,
    };
    if topo(lo)? != Topology::DisjointPair || topo(hi)? != Topology::Merged {
        return Err(fail);
    }
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match topo(mid)? {
            Topology::DisjointPair => lo = mid,
            Topology::Merged => hi = mid,
        }
    }
    Ok(ActionValue::from_unwrapped(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_h_level_is_merged() {
        let params = PhysicalParams::default();
        let c = trace_action_contour(
            ActionLevel::h(1.0),
            &Window::default(),
            &ContourControls::default(),
            &params,
        )
        .unwrap();
        assert_eq!(c.topology, Topology::Merged);
        assert!(!c.branches.is_empty());
        for b in &c.branches {
            for v in &b.vertices {
                assert!(v.residual.abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn triple_levels_straddle_merge() {
        let params = PhysicalParams::default();
        let ctl = ContourControls::default();
        let w = Window::default();
        let below = trace_action_contour(ActionLevel::hbar(1.315815), &w, &ctl, &params).unwrap();
        let above = trace_action_contour(ActionLevel::hbar(1.317815), &w, &ctl, &params).unwrap();
        assert_eq!(below.topology, Topology::DisjointPair);
        assert_eq!(above.topology, Topology::Merged);
    }

    #[test]
    fn level_above_window_is_empty() {
        let params = PhysicalParams::default();
        let c = trace_action_contour(
            ActionLevel::h(100.0),
            &Window::default(),
            &ContourControls::default(),
            &params,
        )
        .unwrap();
        assert!(c.branches.is_empty());
        assert!(c.wrinkle_etas.is_empty());
    }

    #[test]
    fn merge_level_needs_origin() {
        let params = PhysicalParams::default();
        let w = Window::new((1.5, 6.0), (0.0, 1.0)).unwrap();
        assert!(critical_merge_level(&w, &ContourControls::default(), &params).is_err());
    }
}
