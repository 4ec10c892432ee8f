//! Sweep orchestration and CSV emission.
//!
//! Every cell owns its trace file. The summary is written once, after all
//! cells finished, in configuration order. Floats are printed with `{:e}`,
//! which round-trips, so `gap = f - f_star` holds exactly on the parsed
//! columns.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use umd_core::divergence::{max_divergence, omega_radius};
use umd_core::online::{regret_bound, run_regret_game, tuned_eta};
use umd_core::problems::estimate_f_star;
use umd_core::solvers::{run_aumd, run_quasi_monotone, run_umd, RunOptions, CERT_TOL};
use umd_core::vi::{run_ump, vertex_gap, GradientOperator, MonotoneOperator, UmpOptions};
use umd_core::{ConstraintSet, Problem, Regularizer, StepSchedule, Trace, Vector};

use crate::config::{
    self, BoxedProblem, Method, Overrides, ProblemSpec, RawConfig, RunSpec, StepUnit,
};
use crate::error::{CliError, CliResult};

pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn csv_writer(path: &Path) -> CliResult<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e.to_string()))
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// A resolved first-order experiment.
pub struct Setup {
    pub problem: BoxedProblem,
    pub set: ConstraintSet,
    pub h: Regularizer,
    pub run: RunSpec,
    pub f_star: f64,
}

pub fn prepare(raw: &RawConfig, base: &Path, overrides: &Overrides) -> CliResult<Setup> {
    let problem = match config::resolve_problem(raw, base, overrides)? {
        ProblemSpec::Objective(p) => p,
        ProblemSpec::Bilinear(_) | ProblemSpec::Affine(_) => {
            return Err(CliError::config("bilinear and affine problems run under `vi`, not as objectives"))
        }
    };
    let n = problem.dim();
    let set = config::resolve_set(raw, n, None)?;
    if set.dim() != n {
        return Err(CliError::config(format!("set has dimension {}, problem has {n}", set.dim())));
    }
    let h = config::resolve_regularizer(raw, &set)?;
    let run = config::resolve_run(raw, n, overrides)?;
    let f_star = match run.f_star {
        Some(v) => v,
        None => estimate_f_star(&*problem, &set, run.f_star_budget).map_err(|e| {
            CliError::config(format!("cannot estimate f* ({e}); set `run.f-star` explicitly"))
        })?,
    };
    Ok(Setup {
        problem,
        set,
        h,
        run,
        f_star,
    })
}

/// One (method, step size) pair; `gamma` is absolute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub gamma: f64,
}

impl Cell {
    pub fn file_name(&self) -> String {
        format!("{}__{:e}.csv", self.method.label(), self.gamma)
    }
}

fn smoothness(setup: &Setup) -> CliResult<f64> {
    match setup.problem.smoothness() {
        Some(c) if c.value > 0.0 && c.value.is_finite() => Ok(c.value),
        _ => Err(CliError::config(format!(
            "{} has no positive smoothness constant",
            setup.problem.name()
        ))),
    }
}

/// Expands the policy list against the step sizes. The accelerated method
/// fixes its own steps and contributes one cell labelled with `K/L`.
pub fn cells(setup: &Setup) -> CliResult<Vec<Cell>> {
    let k = setup.h.strong_convexity();
    let run = &setup.run;
    let unit = match run.step_unit {
        StepUnit::Absolute => 1.0,
        StepUnit::Smooth => k / smoothness(setup)?,
        StepUnit::Nonsmooth => {
            let m = setup
                .problem
                .subgradient_bound()
                .map(|c| c.value)
                .filter(|m| *m > 0.0 && m.is_finite())
                .ok_or_else(|| {
                    CliError::config(format!("{} has no positive subgradient bound", setup.problem.name()))
                })?;
            let x1 = setup.h.grad_conjugate(&run.theta1);
            let omega = omega_radius(&setup.h, &x1, &run.theta1)
                .map_err(|e| CliError::config(format!("nonsmooth step unit needs a bounded set: {e}")))?;
            omega / m * (k / run.horizon as f64).sqrt()
        }
    };
    let mut out = Vec::new();
    for &method in &run.methods {
        if method == Method::Accelerated {
            out.push(Cell {
                method,
                gamma: k / smoothness(setup)?,
            });
            continue;
        }
        for s in &run.step_sizes {
            out.push(Cell { method, gamma: s * unit });
        }
    }
    Ok(out)
}

/// Final numbers of a finished cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub final_f: f64,
    pub final_gap: f64,
    pub worst_residuals: Option<(f64, f64)>,
}

#[derive(Debug)]
pub struct CellOutcome {
    pub cell: Cell,
    pub result: Result<CellSummary, String>,
}

pub const TRACE_HEADER: [&str; 7] = ["t", "f", "gap", "theta_norm", "branch", "res_I", "res_II"];

fn solve_cell(setup: &Setup, cell: Cell) -> CliResult<Trace> {
    let options = RunOptions {
        certify: setup.run.certify,
        tol: CERT_TOL,
    };
    let (f, h, set, run) = (&*setup.problem, &setup.h, &setup.set, &setup.run);
    let schedule = StepSchedule::Constant(cell.gamma);
    let trace = match cell.method {
        Method::Umd(policy) => run_umd(f, h, set, policy, &schedule, run.horizon, &run.theta1, options)?,
        Method::QuasiMonotone(choice) => {
            run_quasi_monotone(f, h, set, &schedule, run.horizon, &run.theta1, choice, options)?
        }
        Method::Accelerated => {
            let l = smoothness(setup)?;
            run_aumd(f, h, set, h.strong_convexity(), l, run.horizon, &run.theta1, options)?
        }
    };
    Ok(trace)
}

/// Rows `t = 1..=T+1`. The accelerated method reports `f(z_t)`.
fn trace_rows(setup: &Setup, cell: Cell, trace: &Trace) -> Vec<Vec<String>> {
    let f = &*setup.problem;
    let row = |t: usize, fv: f64, theta: &Vector, branch: &str, res: Option<(f64, f64)>| {
        vec![
            t.to_string(),
            num(fv),
            num(fv - setup.f_star),
            num(theta.norm2()),
            branch.to_string(),
            opt_num(res.map(|r| r.0)),
            opt_num(res.map(|r| r.1)),
        ]
    };
    let mut rows: Vec<Vec<String>> = trace
        .records
        .iter()
        .map(|r| {
            let fv = match (&cell.method, &r.z) {
                (Method::Accelerated, Some(z)) => f.value(z),
                _ => r.f_value,
            };
            let res = r.certificate.map(|c| (c.residual_i, c.residual_ii));
            row(r.t, fv, &r.theta, r.branch.label(), res)
        })
        .collect();
    rows.push(row(
        trace.final_state.t,
        trace.final_f,
        &trace.final_state.theta,
        trace.final_branch.label(),
        None,
    ));
    rows
}

fn run_cell(setup: &Setup, cell: Cell, out: &Path) -> CliResult<CellSummary> {
    let trace = solve_cell(setup, cell)?;
    write_rows(&out.join(cell.file_name()), &TRACE_HEADER, &trace_rows(setup, cell, &trace))?;
    Ok(CellSummary {
        final_f: trace.final_f,
        final_gap: trace.final_f - setup.f_star,
        worst_residuals: setup.run.certify.then(|| trace.worst_residuals()),
    })
}

pub const SUMMARY_HEADER: [&str; 9] = [
    "policy", "gamma", "status", "final_f", "final_gap", "f_star", "max_res_I", "max_res_II", "error",
];

/// Runs `cells` concurrently, writes one trace per cell and then
/// `summary.csv`. Failed cells are reported on stderr and do not stop the
/// others; any failure turns the result into [`CliError::Cells`].
pub fn run_cells(setup: &Setup, cells: &[Cell], out: &Path) -> CliResult<Vec<CellOutcome>> {
    ensure_dir(out)?;
    let outcomes: Vec<CellOutcome> = cells
        .par_iter()
        .map(|&cell| CellOutcome {
            cell,
            result: run_cell(setup, cell, out).map_err(|e| e.to_string()),
        })
        .collect();
    let rows: Vec<Vec<String>> = outcomes
        .iter()
        .map(|o| {
            let mut row = vec![o.cell.method.label(), num(o.cell.gamma)];
            match &o.result {
                Ok(s) => row.extend([
                    "ok".to_string(),
                    num(s.final_f),
                    num(s.final_gap),
                    num(setup.f_star),
                    opt_num(s.worst_residuals.map(|r| r.0)),
                    opt_num(s.worst_residuals.map(|r| r.1)),
                    String::new(),
                ]),
                Err(e) => row.extend([
                    "failed".to_string(),
                    String::new(),
                    String::new(),
                    num(setup.f_star),
                    String::new(),
                    String::new(),
                    e.clone(),
                ]),
            }
            row
        })
        .collect();
    write_rows(&out.join("summary.csv"), &SUMMARY_HEADER, &rows)?;
    for o in &outcomes {
        match &o.result {
            Ok(s) => println!(
                "{:<10} gamma={:<12e} final_gap={:e}",
                o.cell.method.label(),
                o.cell.gamma,
                s.final_gap
            ),
            Err(e) => eprintln!("cell {} gamma={:e} failed: {e}", o.cell.method.label(), o.cell.gamma),
        }
    }
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        return Err(CliError::Cells {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(outcomes)
}

pub fn sweep(raw: &RawConfig, base: &Path, overrides: &Overrides) -> CliResult<Vec<CellOutcome>> {
    let setup = prepare(raw, base, overrides)?;
    let cells = cells(&setup)?;
    run_cells(&setup, &cells, &setup.run.output)
}

/// The first policy at the first step size.
pub fn solve(raw: &RawConfig, base: &Path, overrides: &Overrides) -> CliResult<Vec<CellOutcome>> {
    let setup = prepare(raw, base, overrides)?;
    let cells = cells(&setup)?;
    run_cells(&setup, &cells[..1], &setup.run.output)
}

fn output_dir(raw: &RawConfig, overrides: &Overrides) -> PathBuf {
    overrides
        .out
        .clone()
        .or_else(|| raw.run.as_ref().and_then(|r| r.output.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Runs unified mirror prox and writes `vi__<variant>.csv` plus
/// `vi_summary.csv`. The gap column of the summary is the exact vertex gap
/// of the averaged iterate when the set is a polytope, empty otherwise.
pub fn vi(raw: &RawConfig, base: &Path, overrides: &Overrides) -> CliResult<f64> {
    let spec = config::resolve_problem(raw, base, overrides)?;
    let n = spec.dim();
    let set = config::resolve_set(raw, n, Some(&spec))?;
    if set.dim() != n {
        return Err(CliError::config(format!("set has dimension {}, operator has {n}", set.dim())));
    }
    let h = config::resolve_regularizer(raw, &set)?;
    let vi = config::resolve_vi(raw, n, overrides)?;
    let op: Box<dyn MonotoneOperator> = match spec {
        ProblemSpec::Objective(p) => Box::new(GradientOperator(p)),
        ProblemSpec::Bilinear(b) => Box::new(b),
        ProblemSpec::Affine(a) => Box::new(a),
    };
    let gamma = match (vi.gamma, op.lipschitz()) {
        (Some(g), _) => g,
        (None, Some(l)) if l > 0.0 && l.is_finite() => h.strong_convexity() / l,
        _ => return Err(CliError::config("operator has no Lipschitz constant; set `vi.gamma`")),
    };
    let options = UmpOptions {
        zeta: vi.zeta,
        theta_update: vi.theta_update,
        run: RunOptions {
            certify: vi.certify,
            tol: CERT_TOL,
        },
    };
    let trace = run_ump(&*op, &h, &set, gamma, vi.horizon, &vi.theta1, options)?;
    let out = output_dir(raw, overrides);
    ensure_dir(&out)?;
    let rows: Vec<Vec<String>> = trace
        .records
        .iter()
        .map(|r| {
            let res = |i: usize| opt_num(r.residuals.map(|v| v[i]));
            vec![
                r.t.to_string(),
                num(r.theta.norm2()),
                num(r.zeta.norm2()),
                num(r.y.norm2()),
                res(0),
                res(1),
                res(2),
                res(3),
            ]
        })
        .collect();
    let header = ["t", "theta_norm", "zeta_norm", "y_norm", "res_fenchel", "res_zeta", "res_I", "res_II"];
    write_rows(&out.join(format!("vi__{}.csv", vi.label)), &header, &rows)?;
    let gap = vertex_gap(&*op, &set, &trace.y_bar).ok();
    write_rows(
        &out.join("vi_summary.csv"),
        &["variant", "gamma", "horizon", "vertex_gap"],
        &[vec![vi.label.to_string(), num(gamma), vi.horizon.to_string(), opt_num(gap)]],
    )?;
    println!("{} gamma={gamma:e} T={} vertex_gap={}", vi.label, vi.horizon, opt_num(gap));
    Ok(gap.unwrap_or(f64::NAN))
}

/// Plays the online game and writes `regret.csv` (running regret against
/// the bound after each round) plus `regret_summary.csv`.
pub fn regret(raw: &RawConfig, overrides: &Overrides) -> CliResult<(f64, f64)> {
    let n = config::regret_dim(raw)?;
    let set = config::resolve_set(raw, n, None)?;
    let h = config::resolve_regularizer(raw, &set)?;
    let mut spec = config::resolve_regret(raw, &h, overrides)?;
    let x1 = h.grad_conjugate(&spec.theta1);
    let omega = max_divergence(&h, &x1, &spec.theta1)
        .map_err(|e| CliError::config(format!("regret games need a bounded set: {e}")))?;
    let k = h.strong_convexity();
    let m = spec.adversary.bound();
    let eta = match spec.eta {
        Some(eta) => eta,
        None if m > 0.0 && omega > 0.0 => tuned_eta(omega, m, k, spec.horizon),
        None => 1.0,
    };
    let options = RunOptions {
        certify: spec.certify,
        tol: CERT_TOL,
    };
    let game = run_regret_game(
        &h,
        &set,
        &mut *spec.adversary,
        eta,
        spec.horizon,
        &spec.theta1,
        spec.policy,
        options,
    )?;
    let out = output_dir(raw, overrides);
    ensure_dir(&out)?;
    let mut total = Vector::zeros(n);
    let mut earned = 0.0;
    let mut rows = Vec::with_capacity(spec.horizon);
    for (r, zeta) in game.trace.records.iter().zip(&game.payoffs) {
        total = &total + zeta;
        earned += r.f_value;
        let best = -set.support_min(&-&total)?.value;
        let res = r.certificate.map(|c| (c.residual_i, c.residual_ii));
        rows.push(vec![
            r.t.to_string(),
            num(r.f_value),
            num(best - earned),
            num(regret_bound(omega, eta, m, k, r.t)),
            num(r.theta.norm2()),
            r.branch.label().to_string(),
            opt_num(res.map(|c| c.0)),
            opt_num(res.map(|c| c.1)),
        ]);
    }
    let header = ["t", "payoff", "regret", "bound", "theta_norm", "branch", "res_I", "res_II"];
    write_rows(&out.join("regret.csv"), &header, &rows)?;
    let bound = regret_bound(omega, eta, m, k, spec.horizon);
    write_rows(
        &out.join("regret_summary.csv"),
        &["policy", "eta", "horizon", "regret", "bound"],
        &[vec![
            spec.policy.label(),
            num(eta),
            spec.horizon.to_string(),
            num(game.regret),
            num(bound),
        ]],
    )?;
    println!(
        "{} eta={eta:e} T={} regret={:e} bound={bound:e}",
        spec.policy.label(),
        spec.horizon,
        game.regret
    );
    Ok((game.regret, bound))
}
