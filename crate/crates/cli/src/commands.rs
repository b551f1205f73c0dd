//! The `solve`, `verify` and `derive` commands.

use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scalecalc::variational::{
    el_symbolic, gateaux_derivative, hypothesis_warnings, random_variation, residual_report, solve_fixed_t,
    solve_free_t, Candidate, Solution, VariationalProblem,
};
use scalecalc::{Error, SampledFn};

use crate::problem::{Overrides, ProblemFile};
use crate::report::{write_json, FirstVariation, Num, Report, Root, Rung, ScanEntry, Status};
use crate::{trajectory, Failure};

/// Seed for hypothesis checks and random variations, fixed so that reports
/// are reproducible.
const SEED: u64 = 0;
/// Random admissible directions tried by `verify`.
const DRAWS: usize = 20;
/// Tolerance on CSV node positions.
const NODE_TOL: f64 = 1e-9;

struct Solved {
    roots: Vec<Solution>,
    scan: Vec<ScanEntry>,
}

fn solve_one(p: &VariationalProblem) -> Result<Solved, Error> {
    if p.regime().fixed_t().is_some() {
        return Ok(Solved {
            roots: vec![solve_fixed_t(p)?],
            scan: Vec::new(),
        });
    }
    let s = solve_free_t(p)?;
    Ok(Solved {
        roots: s.roots,
        scan: s.scan.iter().map(ScanEntry::from).collect(),
    })
}

fn status_of(outcome: &Result<Solved, Error>) -> Status {
    match outcome {
        Ok(s) if s.roots.iter().any(|r| r.report.verdict) => Status::Ok,
        Ok(_) => Status::Unverified,
        Err(Error::NoRoot { .. }) => Status::NoRoot,
        Err(Error::IndeterminateT { .. }) => Status::Indeterminate,
        Err(_) => Status::Failed,
    }
}

fn warnings(p: &VariationalProblem, c: &Candidate) -> Vec<String> {
    hypothesis_warnings(p, c, SEED).unwrap_or_else(|e| vec![format!("hypothesis check failed: {e}")])
}

fn prepare(path: &Path, out: &Path, o: Overrides) -> Result<ProblemFile, Failure> {
    let mut file = ProblemFile::read(path)?;
    file.apply(o);
    std::fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    Ok(file)
}

/// Solve on every rung of the grid and report the finest.
pub fn solve(path: &Path, out: &Path, o: Overrides, quiet: bool) -> Result<Status, Failure> {
    let file = prepare(path, out, o)?;
    let steps = file.steps();
    let problems = steps
        .iter()
        .map(|&h| file.problem(h, o))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outcomes: Vec<Result<Solved, Error>> = problems.iter().map(solve_one).collect();
    let ladder = if steps.len() > 1 {
        steps
            .iter()
            .zip(&outcomes)
            .map(|(&h, r)| Rung {
                h: Num(h),
                status: status_of(r),
                t_end: r
                    .as_ref()
                    .map_or(Vec::new(), |s| s.roots.iter().map(|x| Num(x.report.t_end)).collect()),
                message: r.as_ref().err().map(ToString::to_string),
            })
            .collect()
    } else {
        Vec::new()
    };

    let (p, outcome) = (
        problems.last().expect("at least one step"),
        outcomes.pop().expect("one outcome per step"),
    );
    let status = status_of(&outcome);
    let (roots, scan, message) = match outcome {
        Ok(s) => {
            let mut roots = Vec::new();
            for (k, sol) in s.roots.iter().enumerate() {
                let name = format!("trajectory_{}.csv", k + 1);
                trajectory::write(&out.join(&name), &sol.candidate.y, p.order())?;
                let mut r = Root::new(&sol.report);
                r.iterations = Some(sol.iterations);
                r.warnings = warnings(p, &sol.candidate);
                r.trajectory = Some(name);
                roots.push(r);
            }
            (roots, s.scan, None)
        }
        Err(e) => (Vec::new(), Vec::new(), Some(e.to_string())),
    };
    if !quiet {
        match &message {
            Some(m) => println!("{}: {m}", label(status)),
            None => {
                for r in &roots {
                    println!(
                        "root T = {:.12} el_norm = {:.3e} max natural = {:.3e} verdict = {}",
                        r.t_end.0,
                        r.el_norm.0,
                        r.natural_conditions.iter().map(|c| c.norm.0).fold(0.0, f64::max),
                        r.verdict
                    );
                }
            }
        }
    }
    let report = Report {
        command: "solve",
        status,
        exit_code: status.exit_code(),
        message,
        problem: file,
        h: Num(p.h()),
        roots,
        scan,
        ladder,
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(status)
}

fn label(s: Status) -> &'static str {
    match s {
        Status::Ok => "ok",
        Status::NoRoot => "no root",
        Status::Indeterminate => "indeterminate T",
        Status::Unverified => "unverified",
        Status::Failed => "failed",
    }
}

/// Match CSV rows to the lattice of `p` and build the candidate.
fn candidate_from_rows(
    p: &VariationalProblem,
    rows: &[(f64, num_complex::Complex64)],
    t_end: Option<f64>,
) -> Result<Candidate, Failure> {
    let mismatch = |msg: String| Failure::Input(format!("grid mismatch: {msg}"));
    let h = p.h();
    let start = p.a() - p.halo() as f64 * h;
    if (rows[0].0 - start).abs() > NODE_TOL {
        return Err(mismatch(format!(
            "first node {} but the grid starts at {start}",
            rows[0].0
        )));
    }
    for (j, w) in rows.windows(2).enumerate() {
        let gap = w[1].0 - w[0].0;
        if (gap - h).abs() > NODE_TOL {
            return Err(mismatch(format!(
                "spacing {gap} after row {} differs from h = {h}",
                j + 2
            )));
        }
    }
    let last = rows[rows.len() - 1].0 - p.halo() as f64 * h;
    let t_end = t_end.or(p.regime().fixed_t()).unwrap_or(last);
    let g = p
        .candidate_grid(t_end)
        .map_err(|e| Failure::Input(format!("T = {t_end}: {e}")))?;
    if rows.len() < g.len() {
        return Err(mismatch(format!(
            "{} rows, but T = {t_end} needs {} including {} halo nodes per side",
            rows.len(),
            g.len(),
            p.halo()
        )));
    }
    let values = rows[..g.len()].iter().map(|&(_, z)| z).collect();
    let y = SampledFn::new(g, values).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(Candidate::new(y, t_end))
}

fn first_variation(p: &VariationalProblem, c: &Candidate) -> Result<FirstVariation, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_magnitude: f64 = 0.0;
    let mut all_agree = true;
    for _ in 0..DRAWS {
        let (eta, delta) = random_variation(p, c, &mut rng)?;
        let g = gateaux_derivative(p, c, &eta, delta)?;
        max_magnitude = max_magnitude.max(g.magnitude());
        all_agree &= g.agree();
    }
    Ok(FirstVariation {
        draws: DRAWS,
        max_magnitude: Num(max_magnitude),
        all_agree,
    })
}

/// Residual report and first-variation check for a candidate trajectory.
pub fn verify(
    path: &Path,
    csv: &Path,
    t_end: Option<f64>,
    out: &Path,
    o: Overrides,
    quiet: bool,
) -> Result<Status, Failure> {
    let file = prepare(path, out, o)?;
    let h = *file.steps().last().expect("at least one step");
    let p = file.problem(h, o)?;
    let rows = trajectory::read(csv)?;
    let c = candidate_from_rows(&p, &rows, t_end)?;
    let (status, roots, message) = match residual_report(&p, &c) {
        Ok(r) => {
            let mut root = Root::new(&r);
            root.warnings = warnings(&p, &c);
            match first_variation(&p, &c) {
                Ok(fv) => root.first_variation = Some(fv),
                Err(e) => root.warnings.push(format!("first variation not evaluated: {e}")),
            }
            let status = if r.verdict { Status::Ok } else { Status::Unverified };
            (status, vec![root], None)
        }
        Err(e) => (Status::Failed, Vec::new(), Some(e.to_string())),
    };
    if !quiet {
        match (&message, roots.first()) {
            (Some(m), _) => println!("failed: {m}"),
            (None, Some(r)) => {
                println!(
                    "T = {:.12} el_norm = {:.3e} verdict = {}",
                    r.t_end.0, r.el_norm.0, r.verdict
                );
                for c in &r.natural_conditions {
                    println!("  {} = {:.6e} {:+.6e}i", c.label, c.re.0, c.im.0);
                }
            }
            (None, None) => {}
        }
    }
    let report = Report {
        command: "verify",
        status,
        exit_code: status.exit_code(),
        message,
        problem: file,
        h: Num(h),
        roots,
        scan: Vec::new(),
        ladder: Vec::new(),
    };
    write_json(&out.join("report.json"), &report)?;
    Ok(status)
}

/// Print the Euler–Lagrange equation and endpoint conditions.
pub fn derive(path: &Path, o: Overrides) -> Result<Status, Failure> {
    let mut file = ProblemFile::read(path)?;
    file.apply(o);
    let h = *file.steps().last().expect("at least one step");
    let p = file.problem(h, o)?;
    print!("{}", el_symbolic(&p));
    Ok(Status::Ok)
}
