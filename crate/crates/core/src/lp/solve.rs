use std::time::Duration;

use highs::{HighsModelStatus, RowProblem, Sense as Direction};

use super::{verify, LinearProgram, LpError, Sense, Solution, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Feasibility tolerance used when checking the returned point.
    pub tol: f64,
    /// Wall-clock budget; exhausting it yields `Status::IterLimit`.
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            time_limit: None,
        }
    }
}

fn failed(lp: &LinearProgram, status: Status) -> Solution {
    Solution {
        status,
        x: vec![0.0; lp.n_cols()],
        objective: f64::NAN,
        max_residual: f64::NAN,
    }
}

fn finish(lp: &LinearProgram, x: Vec<f64>, status: Status, tol: f64) -> Solution {
    let report = verify(lp, &x, tol);
    Solution {
        status,
        objective: lp.objective_value(&x),
        max_residual: report.max_violation.max(report.max_bound_violation),
        x,
    }
}

// Without rows every column sits at whichever bound its cost prefers.
fn solve_bounds_only(lp: &LinearProgram, tol: f64) -> Solution {
    let mut x = Vec::with_capacity(lp.n_cols());
    for j in 0..lp.n_cols() {
        let (c, lo, hi) = (lp.objective[j], lp.lower[j], lp.upper[j]);
        let v = if c > 0.0 {
            lo
        } else if c < 0.0 {
            hi
        } else if lo.is_finite() {
            lo
        } else if hi.is_finite() {
            hi
        } else {
            0.0
        };
        if !v.is_finite() {
            return failed(lp, Status::Unbounded);
        }
        x.push(v);
    }
    finish(lp, x, Status::Optimal, tol)
}

fn run(lp: &LinearProgram, opts: &SolveOptions, presolve: bool) -> (HighsModelStatus, Vec<f64>) {
    let mut pb = RowProblem::new();
    let cols: Vec<_> = (0..lp.n_cols())
        .map(|j| pb.add_column(lp.objective[j], lp.lower[j]..=lp.upper[j]))
        .collect();
    for (r, range) in lp.row_ranges().into_iter().enumerate() {
        let coeffs: Vec<_> = lp.triplets[range].iter().map(|t| (cols[t.col], t.value)).collect();
        let b = lp.rhs[r];
        match lp.senses[r] {
            Sense::Le => pb.add_row(..=b, coeffs),
            Sense::Ge => pb.add_row(b.., coeffs),
            Sense::Eq => pb.add_row(b..=b, coeffs),
        }
    }
    let mut model = pb.optimise(Direction::Minimise);
    model.make_quiet();
    model.set_option("threads", 1);
    model.set_option("random_seed", 0);
    model.set_option("primal_feasibility_tolerance", opts.tol);
    model.set_option("dual_feasibility_tolerance", opts.tol);
    if !presolve {
        model.set_option("presolve", "off");
    }
    if let Some(limit) = opts.time_limit {
        model.set_option("time_limit", limit.as_secs_f64());
    }
    let solved = model.solve();
    let status = solved.status();
    let x = if status == HighsModelStatus::Optimal {
        solved.get_solution().columns().to_vec()
    } else {
        Vec::new()
    };
    (status, x)
}

/// Solves `lp` with the HiGHS dual simplex, single-threaded and with a fixed
/// seed so that identical programs give identical points.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> Result<Solution, LpError> {
    lp.validate()?;
    if lp.n_rows() == 0 {
        return Ok(solve_bounds_only(lp, opts.tol));
    }
    let (mut status, mut x) = run(lp, opts, true);
    if status == HighsModelStatus::UnboundedOrInfeasible {
        (status, x) = run(lp, opts, false);
    }
    Ok(match status {
        HighsModelStatus::Optimal => finish(lp, x, Status::Optimal, opts.tol),
        HighsModelStatus::Infeasible => failed(lp, Status::Infeasible),
        HighsModelStatus::Unbounded => failed(lp, Status::Unbounded),
        HighsModelStatus::ReachedTimeLimit | HighsModelStatus::ReachedIterationLimit => {
            failed(lp, Status::IterLimit)
        }
        other => return Err(LpError::Invalid(format!("solver stopped with status {other:?}"))),
    })
}
