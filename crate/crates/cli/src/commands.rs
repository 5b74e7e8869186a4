//! Resolved subcommands and their execution.

use std::f64::consts::PI;
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use dispherical_core::action::{
    critical_merge_level, predicted_wrinkles, trace_action_contour, ActionContour, ActionLevel,
    ActionUnit, ContourControls, Topology, Window,
};
use dispherical_core::coords::{prolate_to_cyl, PhysicalParams, ProlatePoint};
use dispherical_core::kinematics::{arcsin_family, tertiary_foci, trace_time_loci, LocusControls};
use dispherical_core::trajectory::{
    trace_trajectory, trajectory_residual_prolate, trajectory_residual_scale, Classification,
    MotionConstant, TraceControls, Trajectory, ZeroSign,
};
use dispherical_core::wavefield::{
    erasure_fields, psi_point_source, sample_grid, Hemisphere, Source,
};

use crate::config::{Command, Common};
use crate::output::{file_name, num, OutputSet, Table};
use crate::{parse, Failure, VERSION};

const DEFAULT_LEVELS_H: &str = "0.5:0.5:5.0";
const DEFAULT_WINDOW: &str = "1:6,0:1";
const DEFAULT_GRID_WINDOW: &str = "1:6,-1:1";
const DEFAULT_TIMES: &str = "0,0.002,0.02,0.04,0.06";
const DEFAULT_LOCUS_FAMILY: usize = 721;
const DEFAULT_TRACE_FAMILY: usize = 37;
const DEFAULT_ERASURE_GRID: usize = 100;
const DEFAULT_FIELD_GRID: usize = 101;
const ERASURE_TOL: f64 = 1e-12;

/// Output files and per-task diagnostics gathered during execution.
#[derive(Debug, Default)]
pub struct Report {
    /// Written files, by name.
    pub outputs: Vec<String>,
    /// Per-task diagnostics in task order.
    pub tasks: Vec<Value>,
    /// Command-level summary.
    pub summary: Map<String, Value>,
}

#[derive(Debug, Clone)]
enum Task {
    Params {
        window: Window,
        controls: ContourControls,
    },
    Contours {
        levels: Vec<ActionLevel>,
        level_text: String,
        window: Window,
        controls: ContourControls,
    },
    Trajectory {
        source: Source,
        constant: MotionConstant,
        stride: usize,
        controls: TraceControls,
    },
    Trajectories {
        jobs: Vec<(Source, MotionConstant)>,
        sources: String,
        family: Option<usize>,
        stride: usize,
        controls: TraceControls,
    },
    Loci {
        times: Vec<f64>,
        cells: usize,
        family: Vec<MotionConstant>,
        controls: TraceControls,
        locus: LocusControls,
    },
    Erasure {
        grid: usize,
        window: Window,
    },
    Field {
        grid: usize,
        window: Window,
    },
}

/// A fully validated run.
#[derive(Debug, Clone)]
pub struct Plan {
    command: &'static str,
    params: PhysicalParams,
    outputs: OutputSet,
    task: Task,
}

fn invalid(e: dispherical_core::Error) -> Failure {
    Failure::Invalid(e.to_string())
}

fn positive(what: &str, v: Option<f64>) -> Result<Option<f64>, Failure> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(Failure::Invalid(format!(
            "{what} must be positive, got {x}"
        ))),
        _ => Ok(v),
    }
}

fn at_least_one(what: &str, v: Option<usize>) -> Result<Option<usize>, Failure> {
    match v {
        Some(0) => Err(Failure::Invalid(format!("{what} must be at least 1"))),
        _ => Ok(v),
    }
}

fn trace_controls(c: &Common) -> TraceControls {
    let mut t = TraceControls::default();
    if let Some(tol) = c.tol {
        t.tol = tol;
    }
    if let Some(n) = c.max_iter {
        t.max_iter = n;
    }
    t
}

fn contour_controls(c: &Common, step: Option<f64>) -> ContourControls {
    let mut t = ContourControls::default();
    if let Some(tol) = c.tol {
        t.tol = tol;
    }
    if let Some(n) = c.max_iter {
        t.max_iter = n;
    }
    if let Some(s) = step {
        t.step = s;
    }
    t
}

fn window_or(text: &Option<String>, default: &str) -> Result<Window, Failure> {
    parse::window(text.as_deref().unwrap_or(default))
}

fn window_text(w: &Window) -> String {
    format!(
        "{}:{},{}:{}",
        num(w.xi.0),
        num(w.xi.1),
        num(w.eta.0),
        num(w.eta.1)
    )
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Lower => "lower",
        Source::Upper => "upper",
    }
}

fn zero_sign_name(c: &MotionConstant) -> &'static str {
    match c.zero_sign() {
        Some(ZeroSign::Positive) => "+",
        Some(ZeroSign::Negative) => "-",
        None => "",
    }
}

fn classification_name(c: Classification) -> &'static str {
    match c {
        Classification::Confined => "confined",
        Classification::Free => "free",
    }
}

fn topology_name(t: Topology) -> &'static str {
    match t {
        Topology::DisjointPair => "disjoint-pair",
        Topology::Merged => "merged",
    }
}

fn trace_controls_json(c: &TraceControls) -> Value {
    json!({
        "step": c.step,
        "min_step": c.min_step,
        "shrink": c.shrink,
        "max_turn": c.max_turn,
        "max_eta_step": c.max_eta_step,
        "seed_offset": c.seed_offset,
        "xi_max": c.xi_max,
        "asymptote_tol": c.asymptote_tol,
        "tol": c.tol,
        "max_iter": c.max_iter,
        "max_samples": c.max_samples,
    })
}

fn contour_controls_json(c: &ContourControls) -> Value {
    json!({
        "step": c.step,
        "tol": c.tol,
        "max_iter": c.max_iter,
        "expansions": c.expansions,
        "scan": c.scan,
        "scan_lines": c.scan_lines,
        "max_vertices": c.max_vertices,
    })
}

impl Plan {
    /// Validates every option and fills defaults; nothing is computed or written.
    pub fn resolve(common: &Common, command: &Command) -> Result<Plan, Failure> {
        let d = PhysicalParams::default();
        let params = PhysicalParams::new(
            common.mass.unwrap_or(d.mass()),
            common.hbar.unwrap_or(d.hbar()),
            common.a.unwrap_or(d.separation()),
            common.k.unwrap_or(d.wavenumber()),
        )
        .map_err(invalid)?;
        positive("tol", common.tol)?;
        at_least_one("max-iter", common.max_iter)?;
        let name = command.name();
        let outputs = OutputSet::new(
            common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from(format!("{name}.csv"))),
        );
        let task = match command {
            Command::Params(a) => Task::Params {
                window: window_or(&a.window, DEFAULT_WINDOW)?,
                controls: contour_controls(common, None),
            },
            Command::Contours(a) => {
                let (level_text, unit) = match (&a.levels_h, &a.levels_hbar) {
                    (Some(_), Some(_)) => {
                        return Err(Failure::Invalid(
                            "give only one of levels-h and levels-hbar".into(),
                        ))
                    }
                    (Some(s), None) => (s.clone(), ActionUnit::H),
                    (None, Some(s)) => (s.clone(), ActionUnit::Hbar),
                    (None, None) => (DEFAULT_LEVELS_H.to_string(), ActionUnit::H),
                };
                let levels = parse::range("levels", &level_text)?
                    .into_iter()
                    .map(|v| ActionLevel { value: v, unit })
                    .collect();
                positive("step", a.step)?;
                Task::Contours {
                    levels,
                    level_text: format!("{level_text} {}", unit.tag()),
                    window: window_or(&a.window, DEFAULT_WINDOW)?,
                    controls: contour_controls(common, a.step),
                }
            }
            Command::Trajectory(a) => {
                let source = parse::source(a.source.as_deref().unwrap_or("upper"))?;
                let Some(text) = a.eta_a.as_deref() else {
                    return Err(Failure::Invalid("eta-a is required".into()));
                };
                Task::Trajectory {
                    source,
                    constant: parse::eta_a(text)?,
                    stride: at_least_one("stride", a.stride)?.unwrap_or(1),
                    controls: trace_controls(common),
                }
            }
            Command::Trajectories(a) => {
                let sources_text = a.sources.clone().unwrap_or_else(|| "both".into());
                let sources = parse::sources(&sources_text)?;
                let (constants, family) = match &a.eta_a_list {
                    Some(list) => (
                        list.split(',')
                            .map(parse::eta_a)
                            .collect::<Result<Vec<_>, _>>()?,
                        None,
                    ),
                    None => {
                        let n = at_least_one("family", a.family)?.unwrap_or(DEFAULT_TRACE_FAMILY);
                        (arcsin_family(n).map_err(invalid)?, Some(n))
                    }
                };
                let jobs = sources
                    .iter()
                    .flat_map(|&s| constants.iter().map(move |&c| (s, c)))
                    .collect();
                Task::Trajectories {
                    jobs,
                    sources: sources_text,
                    family,
                    stride: at_least_one("stride", a.stride)?.unwrap_or(1),
                    controls: trace_controls(common),
                }
            }
            Command::Loci(a) => {
                let times = parse::list("times", a.times.as_deref().unwrap_or(DEFAULT_TIMES))?;
                if let Some(t) = times.iter().find(|t| **t < 0.0) {
                    return Err(Failure::Invalid(format!(
                        "times must be non-negative, got {t}"
                    )));
                }
                let cells = at_least_one("family", a.family)?.unwrap_or(DEFAULT_LOCUS_FAMILY);
                let mut locus = LocusControls::default();
                if let Some(f) = positive("cut-factor", a.cut_factor)? {
                    locus.cut_factor = f;
                }
                if let Some(r) = a.rounds {
                    locus.rounds = r;
                }
                Task::Loci {
                    times,
                    cells,
                    family: arcsin_family(cells).map_err(invalid)?,
                    controls: trace_controls(common),
                    locus,
                }
            }
            Command::ErasureCheck(a) => Task::Erasure {
                grid: grid_size(a.grid, DEFAULT_ERASURE_GRID)?,
                window: window_or(&a.window, DEFAULT_GRID_WINDOW)?,
            },
            Command::Field(a) => Task::Field {
                grid: grid_size(a.grid, DEFAULT_FIELD_GRID)?,
                window: window_or(&a.window, DEFAULT_GRID_WINDOW)?,
            },
        };
        Ok(Plan {
            command: name,
            params,
            outputs,
            task,
        })
    }

    /// Where the outputs go.
    pub fn outputs(&self) -> &OutputSet {
        &self.outputs
    }

    fn header(&self, extra: &str) -> Vec<String> {
        let p = &self.params;
        let mut v = vec![
            format!("dispherical {VERSION} {}", self.command),
            format!(
                "k={} a={} mass={} hbar={}",
                num(p.wavenumber()),
                num(p.separation()),
                num(p.mass()),
                num(p.hbar())
            ),
        ];
        if !extra.is_empty() {
            v.push(extra.to_string());
        }
        v
    }

    fn options(&self) -> Value {
        match &self.task {
            Task::Params { window, controls } => json!({
                "window": window_text(window),
                "contour_controls": contour_controls_json(controls),
            }),
            Task::Contours {
                levels,
                level_text,
                window,
                controls,
            } => json!({
                "levels": level_text,
                "level_values": levels.iter().map(|l| l.value).collect::<Vec<_>>(),
                "window": window_text(window),
                "contour_controls": contour_controls_json(controls),
            }),
            Task::Trajectory {
                source,
                constant,
                stride,
                controls,
            } => json!({
                "source": source_name(*source),
                "eta_a": constant.label(),
                "stride": stride,
                "trace_controls": trace_controls_json(controls),
            }),
            Task::Trajectories {
                jobs,
                sources,
                family,
                stride,
                controls,
            } => json!({
                "sources": sources,
                "family": family,
                "eta_a": jobs.iter().map(|(_, c)| c.label()).collect::<Vec<_>>(),
                "stride": stride,
                "trace_controls": trace_controls_json(controls),
            }),
            Task::Loci {
                times,
                cells,
                family,
                controls,
                locus,
            } => json!({
                "times": times,
                "family": cells,
                "family_members": family.len(),
                "cut_factor": locus.cut_factor,
                "rounds": locus.rounds,
                "min_spacing": locus.min_spacing,
                "trace_controls": trace_controls_json(controls),
            }),
            Task::Erasure { grid, window } => json!({
                "grid": grid,
                "window": window_text(window),
                "tolerance": ERASURE_TOL,
            }),
            Task::Field { grid, window } => json!({
                "grid": grid,
                "window": window_text(window),
            }),
        }
    }

    /// The manifest: configuration echo, outputs and diagnostics, no timestamps.
    pub fn manifest(&self, report: &Report, failure: Option<&Failure>) -> Value {
        let p = &self.params;
        let failure = failure.map(|f| {
            let (kind, task, message) = match f {
                Failure::Convergence { task, message } => {
                    ("non-convergence", task.clone(), message.clone())
                }
                Failure::Invalid(m) => ("invalid", self.command.to_string(), m.clone()),
                Failure::Io(e) => ("io", self.command.to_string(), e.to_string()),
            };
            json!({"kind": kind, "task": task, "message": message, "exit": f.exit_code()})
        });
        json!({
            "tool": "dispherical",
            "version": VERSION,
            "command": self.command,
            "status": if failure.is_some() { "failed" } else { "ok" },
            "failure": failure,
            "params": {
                "k": p.wavenumber(),
                "a": p.separation(),
                "mass": p.mass(),
                "hbar": p.hbar(),
                "ka": p.ka(),
                "energy": p.energy(),
            },
            "options": self.options(),
            "outputs": report.outputs,
            "summary": report.summary,
            "tasks": report.tasks,
        })
    }

    /// Runs the task on the current worker pool.
    pub fn execute(&self, report: &mut Report) -> Result<(), Failure> {
        match &self.task {
            Task::Params { window, controls } => self.run_params(window, controls, report),
            Task::Contours {
                levels,
                level_text,
                window,
                controls,
            } => self.run_contours(levels, level_text, window, controls, report),
            Task::Trajectory {
                source,
                constant,
                stride,
                controls,
            } => self.run_trajectories(&[(*source, *constant)], *stride, controls, false, report),
            Task::Trajectories {
                jobs,
                stride,
                controls,
                ..
            } => self.run_trajectories(jobs, *stride, controls, true, report),
            Task::Loci {
                times,
                family,
                controls,
                locus,
                ..
            } => self.run_loci(times, family, controls, locus, report),
            Task::Erasure { grid, window } => self.run_erasure(*grid, window, report),
            Task::Field { grid, window } => self.run_field(*grid, window, report),
        }
    }

    fn run_params(
        &self,
        window: &Window,
        controls: &ContourControls,
        report: &mut Report,
    ) -> Result<(), Failure> {
        let p = &self.params;
        let path = self.outputs.main().to_path_buf();
        let mut t = Table::create(&path, &self.header(""), &["quantity", "index", "value"])?;
        let analytic = 0.5 * p.ka() - 2.0 * PI;
        let mut rows: Vec<(&str, usize, f64)> = vec![
            ("k", 0, p.wavenumber()),
            ("a", 0, p.separation()),
            ("mass", 0, p.mass()),
            ("hbar", 0, p.hbar()),
            ("ka", 0, p.ka()),
            ("energy", 0, p.energy()),
            ("wavelength", 0, 2.0 * PI / p.wavenumber()),
            ("origin_action_hbar", 0, analytic),
        ];
        for (i, e) in predicted_wrinkles(p).into_iter().enumerate() {
            rows.push(("predicted_wrinkle_eta", i + 1, e));
        }
        for (i, f) in tertiary_foci(p).into_iter().enumerate() {
            rows.push(("tertiary_focus_eta", i, f.eta));
        }
        let merge = critical_merge_level(window, controls, p);
        if let Ok(m) = &merge {
            rows.push(("merge_level_hbar", 0, m.unwrapped));
            rows.push(("merge_level_h", 0, m.unwrapped_h()));
        }
        for (q, i, v) in &rows {
            t.row([q.to_string(), i.to_string(), num(*v)])?;
        }
        t.finish()?;
        report.outputs.push(file_name(&path));
        match merge {
            Ok(m) => {
                report.tasks.push(json!({
                    "task": "merge level",
                    "status": "ok",
                    "merge_level_hbar": m.unwrapped,
                    "origin_action_hbar": analytic,
                    "difference_hbar": m.unwrapped - analytic,
                }));
                Ok(())
            }
            Err(e) => {
                report.tasks.push(
                    json!({"task": "merge level", "status": "failed", "message": e.to_string()}),
                );
                Err(Failure::from_core("merge level", e))
            }
        }
    }

    fn run_contours(
        &self,
        levels: &[ActionLevel],
        level_text: &str,
        window: &Window,
        controls: &ContourControls,
        report: &mut Report,
    ) -> Result<(), Failure> {
        let p = &self.params;
        let a = p.separation();
        let ka = p.ka();
        let results: Vec<_> = levels
            .par_iter()
            .map(|l| trace_action_contour(*l, window, controls, p))
            .collect();
        let main = self.outputs.main().to_path_buf();
        let wpath = self.outputs.sibling("wrinkles.csv");
        let extra = format!("levels={level_text} window={}", window_text(window));
        let mut ct = Table::create(
            &main,
            &self.header(&extra),
            &[
                "level_value",
                "level_unit",
                "branch_id",
                "vertex_index",
                "xi",
                "eta",
                "rho",
                "z",
                "residual",
            ],
        )?;
        let mut wt = Table::create(
            &wpath,
            &self.header(&extra),
            &[
                "level_value",
                "level_unit",
                "k",
                "a",
                "n",
                "eta_wrinkle",
                "predicted_eta",
            ],
        )?;
        let mut failure = None;
        for (level, r) in levels.iter().zip(results) {
            let c: ActionContour = match r {
                Ok(c) => c,
                Err(e) => {
                    report.tasks.push(json!({
                        "task": format!("level {} {}", num(level.value), level.unit.tag()),
                        "status": "failed",
                        "message": e.to_string(),
                    }));
                    failure = Some(Failure::from_core(
                        format!("contour level {} {}", num(level.value), level.unit.tag()),
                        e,
                    ));
                    break;
                }
            };
            let lv = num(level.value);
            let tag = level.unit.tag();
            let mut worst: f64 = 0.0;
            let mut vertices = 0;
            for b in &c.branches {
                for (i, v) in b.vertices.iter().enumerate() {
                    let q = prolate_to_cyl(&v.point, a);
                    worst = worst.max(v.residual.abs());
                    vertices += 1;
                    ct.row([
                        lv.clone(),
                        tag.to_string(),
                        b.id.to_string(),
                        i.to_string(),
                        num(v.point.xi),
                        num(v.point.eta),
                        num(q.rho),
                        num(q.z),
                        num(v.residual),
                    ])?;
                }
            }
            for &e in &c.wrinkle_etas {
                let n = ((e.abs() * ka / PI + 1.0) / 2.0).round().max(1.0);
                let predicted = (2.0 * n - 1.0) * PI / ka;
                wt.row([
                    lv.clone(),
                    tag.to_string(),
                    num(p.wavenumber()),
                    num(a),
                    format!("{n}"),
                    num(e),
                    num(predicted),
                ])?;
            }
            report.tasks.push(json!({
                "task": format!("level {lv} {tag}"),
                "status": "ok",
                "level_hbar": level.in_hbar(),
                "branches": c.branches.len(),
                "closed_branches": c.branches.iter().filter(|b| b.closed).count(),
                "vertices": vertices,
                "topology": topology_name(c.topology),
                "max_abs_residual": worst,
                "wrinkles": c.wrinkle_etas,
            }));
        }
        ct.finish()?;
        wt.finish()?;
        report.outputs.push(file_name(&main));
        report.outputs.push(file_name(&wpath));
        failure.map_or(Ok(()), Err)
    }

    fn run_trajectories(
        &self,
        jobs: &[(Source, MotionConstant)],
        stride: usize,
        controls: &TraceControls,
        family: bool,
        report: &mut Report,
    ) -> Result<(), Failure> {
        let p = &self.params;
        let results: Vec<_> = jobs
            .par_iter()
            .map(|(s, c)| trace_trajectory(*s, c, p, controls))
            .collect();
        let main = self.outputs.main().to_path_buf();
        let tpath = self.outputs.sibling("turning.csv");
        let extra = match jobs {
            [(s, c)] if !family => format!("source={} eta_a={}", source_name(*s), c.label()),
            _ => format!("trajectories={}", jobs.len()),
        };
        let mut st = Table::create(
            &main,
            &self.header(&extra),
            &[
                "source",
                "eta_a",
                "zero_sign",
                "sample_index",
                "xi",
                "eta",
                "sigma",
                "rho",
                "z",
                "arclength",
                "residual",
            ],
        )?;
        let turning_cols: &[&str] = if family {
            &["source", "eta_a", "kind", "xi", "eta"]
        } else {
            &["kind", "xi", "eta"]
        };
        let mut tt = Table::create(&tpath, &self.header(&extra), turning_cols)?;
        let mut failure = None;
        for ((s, c), r) in jobs.iter().zip(results) {
            let task = format!("trajectory {} {}", source_name(*s), c.label());
            let tr = match r {
                Ok(t) => t,
                Err(e) => {
                    report
                        .tasks
                        .push(json!({"task": task, "status": "failed", "message": e.to_string()}));
                    failure = Some(Failure::from_core(task, e));
                    break;
                }
            };
            let worst = write_samples(&mut st, &tr, stride, p)?;
            for tp in &tr.turning_points {
                let mut row = Vec::with_capacity(5);
                if family {
                    row.push(source_name(*s).to_string());
                    row.push(c.label());
                }
                row.extend([
                    tp.kind.name().to_string(),
                    num(tp.point.xi),
                    num(tp.point.eta),
                ]);
                tt.row(row)?;
            }
            let last = tr
                .samples
                .last()
                .map(|x| x.point)
                .unwrap_or(ProlatePoint::new(1.0, 0.0));
            report.tasks.push(json!({
                "task": task,
                "status": "ok",
                "classification": classification_name(tr.classification),
                "samples": tr.samples.len(),
                "passages": tr.passages.len(),
                "turning_points": tr.turning_points.len(),
                "arclength": tr.samples.last().map_or(0.0, |x| x.arclength),
                "end_xi": last.xi,
                "end_eta": last.eta,
                "max_scaled_residual": worst,
            }));
        }
        st.finish()?;
        tt.finish()?;
        report.outputs.push(file_name(&main));
        report.outputs.push(file_name(&tpath));
        failure.map_or(Ok(()), Err)
    }

    fn run_loci(
        &self,
        times: &[f64],
        family: &[MotionConstant],
        controls: &TraceControls,
        locus: &LocusControls,
        report: &mut Report,
    ) -> Result<(), Failure> {
        let p = &self.params;
        let mut traced = 0usize;
        let mut failed: Option<String> = None;
        let loci = trace_time_loci(times, family, p, locus, |jobs| {
            let res: Vec<_> = jobs
                .par_iter()
                .map(|(s, c)| trace_trajectory(*s, c, p, controls))
                .collect();
            traced += jobs.len();
            let mut out = Vec::with_capacity(res.len());
            for ((s, c), r) in jobs.iter().zip(res) {
                match r {
                    Ok(t) => out.push(t),
                    Err(e) => {
                        failed = Some(format!("trajectory {} {}", source_name(*s), c.label()));
                        return Err(e);
                    }
                }
            }
            Ok(out)
        });
        report
            .summary
            .insert("trajectories_traced".into(), json!(traced));
        let loci = match loci {
            Ok(l) => l,
            Err(e) => {
                let task = failed.unwrap_or_else(|| "time loci".into());
                report
                    .tasks
                    .push(json!({"task": task, "status": "failed", "message": e.to_string()}));
                return Err(Failure::from_core(task, e));
            }
        };
        let a = p.separation();
        let main = self.outputs.main().to_path_buf();
        let cpath = self.outputs.sibling("cuts.csv");
        let extra = format!("family={} members", family.len());
        let mut lt = Table::create(
            &main,
            &self.header(&extra),
            &["t_target", "source", "eta_a", "xi", "eta", "rho", "z"],
        )?;
        let mut ct = Table::create(
            &cpath,
            &self.header(&extra),
            &["t_target", "eta_gap_lo", "eta_gap_hi"],
        )?;
        for l in &loci {
            let tv = num(l.t);
            for q in &l.points {
                let cyl = prolate_to_cyl(&q.point, a);
                lt.row([
                    tv.clone(),
                    source_name(q.source).to_string(),
                    q.constant.label(),
                    num(q.point.xi),
                    num(q.point.eta),
                    num(cyl.rho),
                    num(cyl.z),
                ])?;
            }
            for g in &l.cuts {
                ct.row([tv.clone(), num(g.lo), num(g.hi)])?;
            }
            report.tasks.push(json!({
                "task": format!("locus t={tv}"),
                "status": "ok",
                "points": l.points.len(),
                "cuts": l.cuts.iter().map(|g| [g.lo, g.hi]).collect::<Vec<_>>(),
            }));
        }
        lt.finish()?;
        ct.finish()?;
        report.outputs.push(file_name(&main));
        report.outputs.push(file_name(&cpath));
        Ok(())
    }

    fn run_erasure(&self, n: usize, window: &Window, report: &mut Report) -> Result<(), Failure> {
        let p = &self.params;
        let a = p.separation();
        let nodes = grid_nodes(n, window);
        let rows: Vec<_> = nodes
            .par_iter()
            .map(
                |q| -> Result<
                    Option<(ProlatePoint, Hemisphere, f64, f64)>,
                    dispherical_core::Error,
                > {
                    if q.is_focus() {
                        return Ok(None);
                    }
                    let e = erasure_fields(q, p)?;
                    let expected = match e.hemisphere {
                        Hemisphere::Lower => {
                            psi_point_source(q, Source::Lower, p)?.value()
                                * std::f64::consts::SQRT_2
                        }
                        Hemisphere::Upper => {
                            -psi_point_source(q, Source::Upper, p)?.value()
                                * std::f64::consts::SQRT_2
                        }
                    };
                    let s1 = psi_point_source(q, Source::Lower, p)?.value();
                    let s2 = psi_point_source(q, Source::Upper, p)?.value();
                    let y = (s1 - s2) / std::f64::consts::SQRT_2;
                    let err = (e.combined.value() - expected).norm() / expected.norm();
                    let err_y = (e.psi_y.value() - y).norm() / expected.norm();
                    Ok(Some((*q, e.hemisphere, err, err_y)))
                },
            )
            .collect();
        let main = self.outputs.main().to_path_buf();
        let mut t = Table::create(
            &main,
            &self.header(&format!("grid={n}x{n} window={}", window_text(window))),
            &[
                "xi",
                "eta",
                "rho",
                "z",
                "hemisphere",
                "rel_error_combined",
                "rel_error_psi_y",
            ],
        )?;
        let (mut worst, mut worst_y, mut checked) = (0.0f64, 0.0f64, 0usize);
        for r in rows {
            let Some((q, h, err, err_y)) =
                r.map_err(|e| Failure::from_core("erasure fields", e))?
            else {
                continue;
            };
            let cyl = prolate_to_cyl(&q, a);
            let hn = match h {
                Hemisphere::Lower => "lower",
                Hemisphere::Upper => "upper",
            };
            t.row([
                num(q.xi),
                num(q.eta),
                num(cyl.rho),
                num(cyl.z),
                hn.to_string(),
                num(err),
                num(err_y),
            ])?;
            worst = worst.max(err);
            worst_y = worst_y.max(err_y);
            checked += 1;
        }
        t.finish()?;
        report.outputs.push(file_name(&main));
        let ok = worst <= ERASURE_TOL && worst_y <= ERASURE_TOL;
        report.tasks.push(json!({
            "task": "erasure identity",
            "status": if ok { "ok" } else { "failed" },
            "points": checked,
            "max_rel_error_combined": worst,
            "max_rel_error_psi_y": worst_y,
        }));
        if ok {
            Ok(())
        } else {
            Err(Failure::Convergence {
                task: "erasure identity".into(),
                message: format!("largest relative error {worst:e} exceeds {ERASURE_TOL:e}"),
            })
        }
    }

    fn run_field(&self, n: usize, window: &Window, report: &mut Report) -> Result<(), Failure> {
        let p = &self.params;
        let a = p.separation();
        let samples = sample_grid(window.xi, window.eta, n, n, p)
            .map_err(|e| Failure::from_core("field grid", e))?;
        let main = self.outputs.main().to_path_buf();
        let mut t = Table::create(
            &main,
            &self.header(&format!("grid={n}x{n} window={}", window_text(window))),
            &[
                "xi",
                "eta",
                "rho",
                "z",
                "re",
                "im",
                "amplitude",
                "phase_principal",
            ],
        )?;
        let mut min_amp = f64::INFINITY;
        for s in &samples {
            let cyl = prolate_to_cyl(&s.at, a);
            min_amp = min_amp.min(s.amplitude);
            t.row([
                num(s.at.xi),
                num(s.at.eta),
                num(cyl.rho),
                num(cyl.z),
                num(s.re),
                num(s.im),
                num(s.amplitude),
                num(s.phase_principal),
            ])?;
        }
        t.finish()?;
        report.outputs.push(file_name(&main));
        report.tasks.push(json!({
            "task": "field grid",
            "status": "ok",
            "points": samples.len(),
            "min_amplitude": min_amp,
        }));
        Ok(())
    }
}

fn grid_size(v: Option<usize>, default: usize) -> Result<usize, Failure> {
    match v.unwrap_or(default) {
        n if n < 2 => Err(Failure::Invalid(format!(
            "grid must have at least 2 nodes per side, got {n}"
        ))),
        n => Ok(n),
    }
}

/// Row-major in `eta`, as `sample_grid` orders its nodes.
fn grid_nodes(n: usize, w: &Window) -> Vec<ProlatePoint> {
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        let e = w.eta.0 + (w.eta.1 - w.eta.0) * j as f64 / (n - 1) as f64;
        for i in 0..n {
            let x = w.xi.0 + (w.xi.1 - w.xi.0) * i as f64 / (n - 1) as f64;
            out.push(ProlatePoint::new(x, e));
        }
    }
    out
}

/// Writes the kept samples of one trace; returns the largest scaled residual over all samples.
///
/// Every `stride`-th sample is kept, plus both ends, turning points and the
/// samples bracketing a passage through infinity.
fn write_samples(
    t: &mut Table,
    tr: &Trajectory,
    stride: usize,
    p: &PhysicalParams,
) -> std::io::Result<f64> {
    let a = p.separation();
    let n = tr.samples.len();
    let mut keep = vec![false; n];
    for (i, k) in keep.iter_mut().enumerate() {
        *k = i % stride == 0 || i + 1 == n;
    }
    for tp in &tr.turning_points {
        keep[tp.sample_index.min(n - 1)] = true;
    }
    for &i in &tr.passages {
        keep[i] = true;
        if i + 1 < n {
            keep[i + 1] = true;
        }
    }
    let src = source_name(tr.source);
    let label = tr.constant.label();
    let zs = zero_sign_name(&tr.constant);
    let mut worst: f64 = 0.0;
    for (i, s) in tr.samples.iter().enumerate() {
        let q = s.point;
        let scale = trajectory_residual_scale(q.xi, q.eta, &tr.constant, p);
        let r = if scale > 0.0 {
            trajectory_residual_prolate(q.xi, q.eta, q.sigma, &tr.constant, p) / scale
        } else {
            0.0
        };
        worst = worst.max(r.abs());
        if !keep[i] {
            continue;
        }
        let cyl = prolate_to_cyl(&q, a);
        t.row([
            src.to_string(),
            label.clone(),
            zs.to_string(),
            i.to_string(),
            num(q.xi),
            num(q.eta),
            format!("{}", q.sigma.sign()),
            num(cyl.rho),
            num(cyl.z),
            num(s.arclength),
            num(r),
        ])?;
    }
    Ok(worst)
}
