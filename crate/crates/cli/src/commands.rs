use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hardcore_agm::criticality::{lambda_cr, lambda_cr_numeric, CriticalReport};
use hardcore_agm::free_energy::{f_alt, level_fractions, stationary_fractions};
use hardcore_agm::model::{solve_all_with, FieldPair, ModelParams, SolutionSet, SolveOptions};
use hardcore_agm::tree::{
    assign_field, build_half_tree_capped, consistency_residual, level_counts_recurrence,
    measure_table, write_field_csv, write_measure_csv, Label,
};
use hardcore_agm::Error;
use log::info;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error as ThisError;

use crate::output::{Cell, Report};
use crate::{Cli, Command, Scheme, Tuning};

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(e) => match e {
                Error::InvalidParameter(_) | Error::Domain(_) | Error::Precondition(_) | Error::ZeroPolynomial => 2,
                Error::NoSignChange { .. } | Error::NoTransition { .. } | Error::SizeCap { .. } | Error::Numerical(_) => 3,
            },
            CliError::Io(_) => 1,
            CliError::Check(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn options(t: &Tuning) -> SolveOptions {
    SolveOptions {
        grid_points: t.grid_points,
        ti_threshold: t.ti_threshold,
        dedup_radius: t.dedup_radius,
        tangency_tol: t.tangency_tol,
        residual_bound: t.residual_bound,
        root_tol: t.root_tol,
        ..SolveOptions::default()
    }
}

fn params(s: &Scheme, lambda: f64) -> Result<ModelParams> {
    Ok(ModelParams::new(s.k, lambda, s.m, s.r)?)
}

fn solve(s: &Scheme, lambda: f64, t: &Tuning) -> Result<SolutionSet> {
    Ok(solve_all_with(&params(s, lambda)?, &options(t))?)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Report> {
    let t = &cli.tuning;
    match &cli.command {
        Command::Solve { scheme, lambda } => cmd_solve(scheme, *lambda, t),
        Command::Scan { scheme, lambda_min, lambda_max, steps } => {
            cmd_scan(scheme, *lambda_min, *lambda_max, *steps, t)
        }
        Command::Critical { scheme, numeric, lo, hi, tol } => {
            let bracket = lo.zip(*hi);
            cmd_critical(scheme, *numeric, bracket, *tol)
        }
        Command::Verify { scheme, depth, lambda, tol } => cmd_verify(scheme, *depth, *lambda, *tol, t),
        Command::Field { scheme, depth, root, dump_assignment, dump_measure, h, l, lambda } => {
            let root = if root == "l" { Label::L } else { Label::H };
            let pair = h.zip(*l).map(|(h, l)| FieldPair::new(h, l)).transpose()?;
            cmd_field(scheme, *depth, root, pair, *lambda, dump_assignment.as_deref(), dump_measure.as_deref(), t)
        }
        Command::FreeEnergy { scheme, lambda, beta, h, l } => {
            let pair = h.zip(*l).map(|(h, l)| FieldPair::new(h, l)).transpose()?;
            cmd_free_energy(scheme, *lambda, *beta, pair, t)
        }
    }
}

const SOLVE_COLUMNS: [&str; 6] = ["lambda", "h", "l", "class", "multiplicity", "residual"];

fn cmd_solve(s: &Scheme, lambda: f64, t: &Tuning) -> Result<Report> {
    let set = solve(s, lambda, t)?;
    let mut rep = Report::new("solve", json!({"scheme": s, "lambda": lambda, "tuning": t}), &SOLVE_COLUMNS);
    for sol in set.solutions() {
        rep.rows.push(vec![
            Cell::Num(lambda),
            Cell::Num(sol.pair.h),
            Cell::Num(sol.pair.l),
            Cell::Text(sol.class.as_str().into()),
            Cell::Int(sol.multiplicity as u128),
            Cell::Num(sol.residual),
        ]);
    }
    Ok(rep)
}

/// `steps` evenly spaced activities from `lo` to `hi` inclusive.
pub fn lambda_grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(CliError::Usage(format!(
            "empty activity range: [{lo}, {hi}] with {steps} steps"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..steps)
        .map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 })
        .collect())
}

fn cmd_scan(s: &Scheme, lo: f64, hi: f64, steps: usize, t: &Tuning) -> Result<Report> {
    let grid = lambda_grid(lo, hi, steps)?;
    params(s, lo)?;
    let sets: Vec<SolutionSet> = grid
        .par_iter()
        .map(|&lam| solve(s, lam, t))
        .collect::<Result<_>>()?;
    let width = sets.iter().map(SolutionSet::len).max().unwrap_or(0);
    let mut columns = vec!["lambda".to_string(), "n_solutions".to_string()];
    for i in 1..=width {
        columns.push(format!("h{i}"));
        columns.push(format!("l{i}"));
    }
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    let mut rep = Report::new(
        "scan",
        json!({"scheme": s, "lambda_min": lo, "lambda_max": hi, "steps": steps, "tuning": t}),
        &cols,
    );
    for (lam, set) in grid.iter().zip(&sets) {
        let mut row = vec![Cell::Num(*lam), Cell::Int(set.len() as u128)];
        for sol in set.solutions() {
            row.push(Cell::Num(sol.pair.h));
            row.push(Cell::Num(sol.pair.l));
        }
        row.resize(columns.len(), Cell::Empty);
        rep.rows.push(row);
    }
    Ok(rep)
}

fn cmd_critical(s: &Scheme, numeric: bool, bracket: Option<(f64, f64)>, tol: f64) -> Result<Report> {
    ModelParams::new(s.k, 1.0, s.m, s.r)?;
    let report: CriticalReport = if numeric || bracket.is_some() {
        lambda_cr_numeric(s.k, s.m, s.r, bracket, tol)?
    } else {
        lambda_cr(s.k, s.m, s.r, tol)?
    };
    info!("critical report {report:?}");
    let mut rep = Report::new(
        "critical",
        json!({"scheme": s, "numeric": numeric, "bracket": bracket, "tol": tol}),
        &["lambda_cr", "method", "bracket_lo", "bracket_hi", "convention"],
    );
    rep.rows.push(vec![
        Cell::Num(report.lambda_cr),
        Cell::Text(report.method.as_str().into()),
        Cell::Num(report.bracket.0),
        Cell::Num(report.bracket.1),
        report.convention.map_or(Cell::Empty, |c| Cell::Text(c.as_str().into())),
    ]);
    rep.extra.insert(
        "solution_counts".into(),
        json!(report.solution_counts.iter().map(|(l, n)| json!({"lambda": l, "n_solutions": n})).collect::<Vec<_>>()),
    );
    Ok(rep)
}

fn cmd_verify(s: &Scheme, depth: u32, lambda: f64, tol: f64, t: &Tuning) -> Result<Report> {
    if depth < 1 {
        return Err(CliError::Usage("verify needs --depth >= 1".into()));
    }
    build_half_tree_capped(s.k, depth, t.vertex_cap)?;
    let set = solve(s, lambda, t)?;
    let mut rep = Report::new(
        "verify",
        json!({"scheme": s, "depth": depth, "lambda": lambda, "tol": tol, "tuning": t}),
        &["lambda", "h", "l", "class", "consistency_residual"],
    );
    let mut worst: f64 = 0.0;
    for sol in set.solutions() {
        let res = consistency_residual(s.k, depth, lambda, s.m, s.r, sol.pair)?;
        worst = worst.max(res);
        rep.rows.push(vec![
            Cell::Num(lambda),
            Cell::Num(sol.pair.h),
            Cell::Num(sol.pair.l),
            Cell::Text(sol.class.as_str().into()),
            Cell::Num(res),
        ]);
    }
    rep.extra.insert("max_residual".into(), json!(worst));
    if worst >= tol {
        let mut buf = Vec::new();
        rep.write(&mut buf, crate::output::Format::Csv)?;
        eprint!("{}", String::from_utf8_lossy(&buf));
        return Err(CliError::Check(format!("consistency residual {worst:e} >= {tol:e}")));
    }
    Ok(rep)
}

#[allow(clippy::too_many_arguments)]
fn cmd_field(
    s: &Scheme,
    depth: u32,
    root: Label,
    pair: Option<FieldPair>,
    lambda: Option<f64>,
    dump_assignment: Option<&Path>,
    dump_measure: Option<&Path>,
    t: &Tuning,
) -> Result<Report> {
    let counts = level_counts_recurrence(s.k, s.m, s.r, root, depth)?;
    let stationary = stationary_fractions(s.k, s.m, s.r).ok();
    let mut rep = Report::new(
        "field",
        json!({"scheme": s, "depth": depth, "root": root.as_str()}),
        &["n", "alpha", "beta", "total", "level_h_fraction", "level_l_fraction", "stationary_h", "stationary_l"],
    );
    for (n, (a, b)) in counts.iter().enumerate() {
        let (fa, fb) = match root {
            Label::H => level_fractions(s.k, s.m, s.r, n as u32)?,
            Label::L => {
                let ball = (s.k as f64).powi(n as i32 + 1) - 1.0;
                let sc = (s.k as f64 - 1.0) / ball;
                (sc * *a as f64, sc * *b as f64)
            }
        };
        let st = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
        rep.rows.push(vec![
            Cell::Int(n as u128),
            Cell::Int(*a),
            Cell::Int(*b),
            Cell::Int(a + b),
            Cell::Num(fa),
            Cell::Num(fb),
            st(stationary.map(|x| x.0)),
            st(stationary.map(|x| x.1)),
        ]);
    }
    if let (Some(path), Some(pair)) = (dump_assignment, pair) {
        let tree = build_half_tree_capped(s.k, depth, t.vertex_cap)?;
        let f = assign_field(&tree, s.m, s.r, root, pair)?;
        write_file(path, |w| write_field_csv(w, &tree, &f))?;
    }
    if let (Some(path), Some(pair), Some(lam)) = (dump_measure, pair, lambda) {
        let tree = build_half_tree_capped(s.k, depth, t.vertex_cap)?;
        let f = assign_field(&tree, s.m, s.r, root, pair)?;
        let table = measure_table(&tree, lam, &f)?;
        write_file(path, |w| write_measure_csv(w, &table))?;
    }
    Ok(rep)
}

fn cmd_free_energy(s: &Scheme, lambda: f64, beta: f64, pair: Option<FieldPair>, t: &Tuning) -> Result<Report> {
    let rows: Vec<(FieldPair, &'static str)> = match pair {
        Some(p) => vec![(p, "given")],
        None => solve(s, lambda, t)?.solutions().iter().map(|x| (x.pair, x.class.as_str())).collect(),
    };
    let mut rep = Report::new(
        "free-energy",
        json!({"scheme": s, "lambda": lambda, "beta": beta, "h": pair.map(|p| p.h), "l": pair.map(|p| p.l)}),
        &["lambda", "beta", "h", "l", "class", "value", "divergent", "h_coeff", "l_coeff", "denominator"],
    );
    for (p, class) in rows {
        let res = f_alt(s.k, s.m, s.r, p, beta, lambda)?;
        rep.rows.push(vec![
            Cell::Num(lambda),
            Cell::Num(beta),
            Cell::Num(p.h),
            Cell::Num(p.l),
            Cell::Text(class.into()),
            Cell::Num(res.value.as_f64()),
            Cell::Text(res.value.is_divergent().to_string()),
            Cell::Int(res.components.h_coeff as u128),
            Cell::Int(res.components.l_coeff as u128),
            Cell::Int(res.components.denominator as u128),
        ]);
    }
    Ok(rep)
}
