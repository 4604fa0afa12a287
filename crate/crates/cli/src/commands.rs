use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use horograph::analytic::{global_gradient_bound, Classification, GlobalGradientBound, OracleSurface};
use horograph::estimates::verify_field;
use horograph::geometry::{check_existence_hypotheses, compute_quantities, GeometricQuantities, HypothesisReport};
use horograph::io::{load_field_csv, save_field_csv, write_json, ProblemConfig};
use horograph::solver::{
    continuation_solve, newton_solve, ContinuationSchedule, ScalarField, SolverConfig, StepRecord, Warning,
};
use horograph::Error;

use crate::problem::ProblemArgs;
use crate::CommonArgs;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NewtonDiverged { .. }
            | Error::LineSearchStalled { .. }
            | Error::SingularJacobian(_)
            | Error::Continuation { .. }
            | Error::NonPositiveLength { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn grid_nodes(field: &ScalarField) -> [usize; 2] {
    let (nx, nt) = field.domain().resolution();
    [nx + 1, nt + 1]
}

fn save_csv(field: &ScalarField, path: &Path) -> Result<()> {
    save_field_csv(field, path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_json(path, value).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn num(v: f64) -> String {
    horograph::io::format_float(v)
}

#[derive(Serialize)]
struct SolveReport<'a> {
    problem: &'a ProblemConfig,
    grid: [usize; 2],
    eps: f64,
    min: f64,
    max: f64,
    residual_norm: f64,
    iterations: usize,
    history: &'a [f64],
    max_error_vs_oracle: Option<f64>,
}

pub fn solve(common: &CommonArgs, args: &ProblemArgs, cfg: &SolverConfig, eps: f64) -> Result<()> {
    let p = args.resolve()?;
    let init = ScalarField::blend(p.domain.clone(), p.data.clone())?;
    let out = newton_solve(&init, eps, 1.0, cfg)?;
    let error = p
        .oracle
        .as_ref()
        .map(|o| out.field.max_error_against(|x, t| o.value(&[x, t]).unwrap_or(f64::NAN)));
    save_csv(&out.field, &common.out.join("field.csv"))?;
    save_json(
        &SolveReport {
            problem: &p.config,
            grid: grid_nodes(&out.field),
            eps,
            min: out.field.min(),
            max: out.field.max(),
            residual_norm: out.residual_norm,
            iterations: out.iterations,
            history: &out.history,
            max_error_vs_oracle: error,
        },
        &common.out.join("solve.json"),
    )?;
    println!(
        "converged in {} Newton iterations, residual {:.3e}, g in [{:.6}, {:.6}]",
        out.iterations,
        out.residual_norm,
        out.field.min(),
        out.field.max()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScheduleLog<'a> {
    problem: &'a ProblemConfig,
    grid: [usize; 2],
    schedule: &'a ContinuationSchedule,
    steps: &'a [StepRecord],
    warnings: &'a [Warning],
    eps_gaps: &'a [(f64, f64, f64)],
    final_eps: f64,
}

pub fn continuation(
    common: &CommonArgs,
    args: &ProblemArgs,
    cfg: &SolverConfig,
    eps_target: f64,
    s_steps: usize,
) -> Result<()> {
    let p = args.resolve()?;
    let schedule = ContinuationSchedule::new(s_steps, eps_target)?;
    let r = continuation_solve(p.domain.clone(), &p.data, &schedule, cfg)?;
    for (i, field) in r.fields.iter().enumerate() {
        save_csv(field, &common.out.join(format!("step_{i:03}.csv")))?;
    }
    save_csv(r.final_field(), &common.out.join("final.csv"))?;
    let rows: Vec<Vec<String>> = r
        .steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                i.to_string(),
                num(s.s),
                num(s.eps),
                num(s.min),
                num(s.max),
                s.iterations.to_string(),
                num(s.residual_norm),
            ]
        })
        .collect();
    write_table(
        &common.out.join("schedule.csv"),
        &["step", "s", "eps", "min", "max", "iterations", "residual_norm"],
        &rows,
    )?;
    save_json(
        &ScheduleLog {
            problem: &p.config,
            grid: grid_nodes(r.final_field()),
            schedule: &schedule,
            steps: &r.steps,
            warnings: &r.warnings,
            eps_gaps: &r.eps_gaps,
            final_eps: r.final_eps(),
        },
        &common.out.join("schedule.json"),
    )?;
    for w in &r.warnings {
        eprintln!("warning: {w:?}");
    }
    println!(
        "{} solves, final eps {}, g in [{:.6}, {:.6}]",
        r.steps.len(),
        r.final_eps(),
        r.final_field().min_interior(),
        r.final_field().max_interior()
    );
    Ok(())
}

pub fn verify(common: &CommonArgs, field: &Path, config: Option<&Path>, eps: f64, eps_target: f64) -> Result<()> {
    let domain = match config {
        Some(path) => {
            let cfg = ProblemConfig::load(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            Some(Arc::new(cfg.domain()?))
        }
        None => None,
    };
    let field = load_field_csv(field, domain).map_err(|e| CliError::Config(format!("{}: {e}", field.display())))?;
    let report = verify_field(&field, eps, eps_target, &SolverConfig::default())?;
    save_json(&report, &common.out.join("report.json"))?;
    println!("{:<28} result", "check");
    for (name, pass) in report.summary_rows() {
        println!("{name:<28} {}", if pass { "pass" } else { "fail" });
    }
    Ok(())
}

#[derive(Serialize)]
struct OracleReport<'a> {
    oracle: &'a OracleSurface,
    grid: [usize; 2],
    eps: f64,
    seed: u64,
    samples: usize,
    classification: Classification,
    declared: Classification,
    agrees: bool,
}

pub fn oracle(common: &CommonArgs, args: &ProblemArgs, eps: f64, samples: usize) -> Result<()> {
    let p = args.resolve()?;
    let oracle = p
        .oracle
        .clone()
        .ok_or_else(|| CliError::Config("oracle needs --oracle KIND or an oracle boundary in the config".into()))?;
    let field = ScalarField::sample_oracle(p.domain.clone(), &oracle)?;
    save_csv(&field, &common.out.join("oracle.csv"))?;

    let (x0, x1, t0, t1) = p.domain.bounding_box();
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let mut points = Vec::with_capacity(samples);
    let mut attempts = 0;
    while points.len() < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let pt = vec![rng.random_range(x0..=x1), rng.random_range(t0..=t1)];
        if oracle.value(&pt).is_ok_and(|g| g > 0.0) {
            points.push(pt);
        }
    }
    if points.is_empty() {
        return Err(CliError::Config("the oracle is not positive anywhere on the domain".into()));
    }
    let classification = oracle.classify_numerically(&points, eps, 1e-10)?;
    let declared = oracle.declared(eps);
    save_json(
        &OracleReport {
            oracle: &oracle,
            grid: grid_nodes(&field),
            eps,
            seed: common.seed,
            samples: points.len(),
            classification,
            declared,
            agrees: classification == declared,
        },
        &common.out.join("oracle.json"),
    )?;
    println!("{}: {classification} (declared {declared})", oracle.name());
    Ok(())
}

#[derive(Serialize)]
struct BoundRow {
    c3: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound: Option<GlobalGradientBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct BoundsReport<'a> {
    problem: &'a ProblemConfig,
    #[serde(rename = "R")]
    radius: f64,
    quantities: GeometricQuantities,
    hypotheses: HypothesisReport,
    global_gradient: Vec<BoundRow>,
}

pub fn bounds(common: &CommonArgs, args: &ProblemArgs, c3: &[f64]) -> Result<()> {
    let p = args.resolve()?;
    let q = compute_quantities(&p.domain, &p.data)?;
    let h = check_existence_hypotheses(&q);
    let rows: Vec<BoundRow> = c3
        .iter()
        .map(|&c3| match global_gradient_bound(q.min_f, q.radius, c3) {
            Ok(b) => BoundRow { c3, bound: Some(b), error: None },
            Err(e) => BoundRow { c3, bound: None, error: Some(e.to_string()) },
        })
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| match &r.bound {
            Some(b) => vec![num(r.c3), num(b.bound), num(b.interior), num(b.boundary)],
            None => vec![num(r.c3), String::new(), String::new(), String::new()],
        })
        .collect();
    write_table(&common.out.join("bounds.csv"), &["c3", "bound_C", "interior", "boundary"], &table)?;
    save_json(
        &BoundsReport {
            problem: &p.config,
            radius: q.radius,
            quantities: q,
            hypotheses: h,
            global_gradient: rows,
        },
        &common.out.join("bounds.json"),
    )?;
    println!("R(Omega, f) = {:.16}", q.radius);
    println!(
        "existence hypothesis R <= {:.16}: {}",
        h.existence_limit,
        if h.existence_ok { "holds" } else { "fails" }
    );
    println!("shift c0 = {:.16}", h.shift_c0);
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceRow {
    nodes: usize,
    h: f64,
    error: f64,
    order: Option<f64>,
    iterations: usize,
}

#[derive(Serialize)]
struct ConvergenceReport<'a> {
    oracle: &'a OracleSurface,
    rows: &'a [ConvergenceRow],
}

pub fn convergence(common: &CommonArgs, args: &ProblemArgs, cfg: &SolverConfig, grids: &[usize]) -> Result<()> {
    if grids.len() < 2 {
        return Err(CliError::Config("convergence needs at least two grids".into()));
    }
    let base = args.resolve()?;
    let oracle = base
        .oracle
        .clone()
        .ok_or_else(|| CliError::Config("convergence needs an exact solution, pass --oracle".into()))?;
    if oracle.declared(0.0) != Classification::Solution {
        return Err(CliError::Config(format!("{} is not an exact solution", oracle.name())));
    }
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in grids {
        let p = args.with_grid([n, n]).resolve()?;
        let init = ScalarField::blend(p.domain.clone(), p.data.clone())?;
        let out = newton_solve(&init, 0.0, 1.0, cfg)?;
        let error = out.field.max_error_against(|x, t| oracle.value(&[x, t]).unwrap_or(f64::NAN));
        let h = p.domain.spacing().0;
        let order = rows.last().map(|prev| (prev.error / error).ln() / (prev.h / h).ln());
        rows.push(ConvergenceRow { nodes: n, h, error, order, iterations: out.iterations });
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.nodes.to_string(),
                num(r.h),
                num(r.error),
                r.order.map(num).unwrap_or_default(),
                r.iterations.to_string(),
            ]
        })
        .collect();
    write_table(&common.out.join("convergence.csv"), &["nodes", "h", "error", "order", "iterations"], &table)?;
    save_json(&ConvergenceReport { oracle: &oracle, rows: &rows }, &common.out.join("convergence.json"))?;
    println!("{:>6} {:>12} {:>12} {:>7} {:>5}", "nodes", "h", "error", "order", "iters");
    for r in &rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        println!("{:>6} {:>12.4e} {:>12.4e} {:>7} {:>5}", r.nodes, r.h, r.error, order, r.iterations);
    }
    Ok(())
}
