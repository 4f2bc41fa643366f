//! Seed-replicated sweeps and their CSV output.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{
    assemble_lrnn_c0dg, assemble_lrnn_c1dg, assemble_lrnn_dg, assemble_st_lrnn_c0dg, assemble_st_lrnn_c1dg,
    assemble_st_lrnn_dg, AssembledSystem, CollocationSet, PenaltySpec, QuadSpec, Scheme, TracePolicy,
};
use crate::basis::{sample_bases, LocalBasis};
use crate::error::{Error, Result};
use crate::geometry::{build_partition, Partition};
use crate::harness::config::ExperimentConfig;
use crate::harness::examples::{self, ExampleKind};
use crate::linsolve::{solve_system, LstsqReport, SolveOptions};
use crate::postprocess::{error_norms, Solution};
use crate::problem::{EllipticProblem, HeatProblem};
use crate::scalar::Point;

pub const RESULTS_HEADER: &str =
    "example,scheme,lambda,h,m,seed,w0,eta_e,l2_error,h1_error,effective_rank,residual_norm,solver_path,wall_ms";

pub const SUMMARY_HEADER: &str =
    "example,scheme,lambda,h,m,seeds,failed,median_l2_error,median_h1_error,median_effective_rank";

/// Marker written to `solver_path` when a cell could not be solved.
pub const FAILED_PATH: &str = "failed";

/// Execution knobs that are not part of the experiment itself.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
    /// Replace the configured seed list by this single seed.
    pub seed_override: Option<u64>,
    /// Also write a `grid_*.csv` solution dump with this many points per axis
    /// for the first seed of every `(h, M)` cell.
    pub dump_grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub example: ExampleKind,
    pub scheme: Scheme,
    pub lambda: f64,
    pub h: f64,
    pub m: usize,
    pub seed: u64,
    pub w0: f64,
    pub eta_e: f64,
    pub l2_error: f64,
    pub h1_error: f64,
    pub effective_rank: usize,
    pub residual_norm: f64,
    pub solver_path: String,
    pub wall_ms: u64,
    /// Failure message for flagged rows; not part of the CSV.
    #[serde(skip)]
    pub error: Option<String>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.example,
            self.scheme,
            num(self.lambda),
            num(self.h),
            self.m,
            self.seed,
            num(self.w0),
            num(self.eta_e),
            num(self.l2_error),
            num(self.h1_error),
            self.effective_rank,
            num(self.residual_norm),
            self.solver_path,
            self.wall_ms
        )
    }

    fn cmp_key(&self, other: &Self) -> Ordering {
        self.h
            .total_cmp(&other.h)
            .then(self.m.cmp(&other.m))
            .then(self.seed.cmp(&other.seed))
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub enum Problem {
    Elliptic(EllipticProblem<f64>),
    Heat(HeatProblem<f64>),
}

impl Problem {
    pub fn for_config(cfg: &ExperimentConfig) -> Result<Self> {
        Ok(match cfg.example {
            ExampleKind::Helmholtz1d => Problem::Elliptic(examples::helmholtz1d(cfg.lambda)?),
            ExampleKind::Poisson2d => Problem::Elliptic(examples::poisson2d()?),
            ExampleKind::Heat1d => Problem::Heat(examples::heat1d(cfg.lambda)?),
        })
    }

    pub fn exact(&self, x: &Point<f64>) -> f64 {
        let f = match self {
            Problem::Elliptic(p) => p.exact.as_ref(),
            Problem::Heat(p) => p.exact.as_ref(),
        };
        f.expect("manufactured problem")(x)
    }

    pub fn exact_grad(&self, x: &Point<f64>) -> Point<f64> {
        let f = match self {
            Problem::Elliptic(p) => p.exact_grad.as_ref(),
            Problem::Heat(p) => p.exact_grad.as_ref(),
        };
        f.expect("manufactured problem")(x)
    }

    fn domain(&self) -> &crate::geometry::Domain<f64> {
        match self {
            Problem::Elliptic(p) => &p.domain,
            Problem::Heat(p) => &p.domain,
        }
    }
}

/// One solved `(h, M, seed)` cell, owning everything its solution borrows.
pub struct SolvedCase {
    pub problem: Problem,
    pub partition: Partition<f64>,
    pub bases: Vec<LocalBasis<f64>>,
    pub scheme: Scheme,
    pub report: LstsqReport<f64>,
}

impl SolvedCase {
    pub fn solution(&self) -> Solution<'_, f64> {
        Solution::from_report(&self.partition, &self.bases, self.scheme, self.report.clone())
            .expect("coefficient count matches the bases")
    }
}

/// Assembles `cfg.scheme` for an already built partition and bases.
pub fn assemble(
    cfg: &ExperimentConfig,
    problem: &Problem,
    partition: &Partition<f64>,
    bases: &[LocalBasis<f64>],
) -> Result<AssembledSystem<f64>> {
    let quad = QuadSpec::uniform(cfg.quad_per_axis);
    let colloc = || CollocationSet::uniform(partition, cfg.collocation_per_face);
    match problem {
        Problem::Elliptic(p) => match cfg.scheme {
            Scheme::Dg => assemble_lrnn_dg(p, partition, bases, &PenaltySpec::new(cfg.eta_e())?, &quad),
            Scheme::C0dg => assemble_lrnn_c0dg(p, partition, bases, &colloc()?, &quad, true),
            Scheme::C0dgNonsym => assemble_lrnn_c0dg(p, partition, bases, &colloc()?, &quad, false),
            Scheme::C1dg => assemble_lrnn_c1dg(p, partition, bases, &colloc()?, &quad),
        },
        Problem::Heat(p) => match cfg.scheme {
            Scheme::Dg => assemble_st_lrnn_dg(
                p,
                partition,
                bases,
                &PenaltySpec::new(cfg.eta_e())?,
                &quad,
                &TracePolicy::new(cfg.temporal_penalty_sign)?,
            ),
            Scheme::C0dg => assemble_st_lrnn_c0dg(p, partition, bases, &colloc()?, &quad, true),
            Scheme::C0dgNonsym => assemble_st_lrnn_c0dg(p, partition, bases, &colloc()?, &quad, false),
            Scheme::C1dg => assemble_st_lrnn_c1dg(p, partition, bases, &colloc()?, &quad),
        },
    }
}

pub fn partition_for(cfg: &ExperimentConfig, problem: &Problem, h: f64) -> Result<Partition<f64>> {
    let n = ExperimentConfig::cells_for(h)?;
    build_partition(problem.domain(), &vec![n; cfg.example.dim()])
}

pub fn solve_case(cfg: &ExperimentConfig, h: f64, m: usize, seed: u64) -> Result<SolvedCase> {
    let problem = Problem::for_config(cfg)?;
    let partition = partition_for(cfg, &problem, h)?;
    let bases = sample_bases(seed, &partition, m, cfg.w0, cfg.activation, cfg.local_inputs)?;
    let sys = assemble(cfg, &problem, &partition, &bases)?;
    let opts = SolveOptions {
        rcond: cfg.rcond.value(),
        ..SolveOptions::default()
    };
    let report = solve_system(&sys, &opts)?;
    Ok(SolvedCase {
        problem,
        partition,
        bases,
        scheme: cfg.scheme,
        report,
    })
}

fn row_for(cfg: &ExperimentConfig, h: f64, m: usize, seed: u64) -> (ResultRow, Option<SolvedCase>) {
    let start = Instant::now();
    let outcome = solve_case(cfg, h, m, seed).and_then(|case| {
        let norms = error_norms(
            &case.solution(),
            &|x| case.problem.exact(x),
            &|x| case.problem.exact_grad(x),
            cfg.quad_per_axis,
        )?;
        Ok((case, norms))
    });
    let mut row = ResultRow {
        example: cfg.example,
        scheme: cfg.scheme,
        lambda: cfg.lambda,
        h,
        m,
        seed,
        w0: cfg.w0,
        eta_e: cfg.eta_e(),
        l2_error: f64::NAN,
        h1_error: f64::NAN,
        effective_rank: 0,
        residual_norm: f64::NAN,
        solver_path: FAILED_PATH.to_string(),
        wall_ms: 0,
        error: None,
    };
    let case = match outcome {
        Ok((case, norms)) => {
            row.l2_error = norms.l2;
            row.h1_error = norms.h1_semi;
            row.effective_rank = case.report.effective_rank;
            row.residual_norm = case.report.residual_norm;
            row.solver_path = case.report.method.as_str().to_string();
            Some(case)
        }
        Err(e) => {
            log::warn!("{} {} h={h} M={m} seed={seed} failed: {e}", cfg.example, cfg.scheme);
            row.error = Some(e.to_string());
            None
        }
    };
    row.wall_ms = start.elapsed().as_millis() as u64;
    (row, case)
}

/// Runs `f` on a dedicated pool when a thread count is requested.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Solves every `(h, M, seed)` cell; rows come back sorted by `h`, `M`, seed.
/// Solver failures become flagged rows instead of errors.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<ResultRow>> {
    Ok(run_with_cases(cfg, opts, |_, _| ())?.0)
}

/// Like [`run`], additionally handing each successful case to `visit`.
pub fn run_with_cases<V: Send>(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    visit: impl Fn(&ResultRow, &SolvedCase) -> V + Sync + Send,
) -> Result<(Vec<ResultRow>, Vec<V>)> {
    cfg.validate()?;
    let seeds = match opts.seed_override {
        Some(s) => vec![s],
        None => cfg.seeds.clone(),
    };
    let mut cells = Vec::new();
    for &h in &cfg.h_list {
        for &m in &cfg.m_list {
            for &s in &seeds {
                cells.push((h, m, s));
            }
        }
    }
    with_threads(opts.threads, || {
        let mut out: Vec<(ResultRow, Option<V>)> = cells
            .par_iter()
            .map(|&(h, m, s)| {
                let (row, case) = row_for(cfg, h, m, s);
                let v = case.as_ref().map(|c| visit(&row, c));
                (row, v)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp_key(&b.0));
        let (rows, visited): (Vec<_>, Vec<_>) = out.into_iter().unzip();
        (rows, visited.into_iter().flatten().collect())
    })
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULTS_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median over seeds of one `(h, M)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub example: ExampleKind,
    pub scheme: Scheme,
    pub lambda: f64,
    pub h: f64,
    pub m: usize,
    pub seeds: usize,
    pub failed: usize,
    pub median_l2_error: f64,
    pub median_h1_error: f64,
    pub median_effective_rank: f64,
}

/// Groups sorted rows by `(h, M)`.
pub fn summarize(rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out: Vec<SummaryRow> = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        while j < rows.len() && rows[j].h == rows[i].h && rows[j].m == rows[i].m && rows[j].scheme == rows[i].scheme
        {
            j += 1;
        }
        let group = &rows[i..j];
        let ok: Vec<&ResultRow> = group.iter().filter(|r| !r.failed()).collect();
        out.push(SummaryRow {
            example: rows[i].example,
            scheme: rows[i].scheme,
            lambda: rows[i].lambda,
            h: rows[i].h,
            m: rows[i].m,
            seeds: group.len(),
            failed: group.len() - ok.len(),
            median_l2_error: median(ok.iter().map(|r| r.l2_error).collect()),
            median_h1_error: median(ok.iter().map(|r| r.h1_error).collect()),
            median_effective_rank: median(ok.iter().map(|r| r.effective_rank as f64).collect()),
        });
        i = j;
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{}",
            r.example,
            r.scheme,
            num(r.lambda),
            num(r.h),
            r.m,
            r.seeds,
            r.failed,
            num(r.median_l2_error),
            num(r.median_h1_error),
            num(r.median_effective_rank)
        );
    }
    s
}

/// Point-wise solution and exact values on a uniform grid over the domain.
pub fn grid_csv(case: &SolvedCase, n: usize) -> Result<String> {
    let p = &case.partition;
    let dom = p.domain();
    let dim = p.dim();
    let names: &[&str] = match (dim, dom.is_temporal()) {
        (1, _) => &["x"],
        (_, true) => &["t", "x"],
        _ => &["x", "y"],
    };
    let n = n.max(2);
    let axis = |a: usize, i: usize| {
        let (lo, hi) = dom.bounds()[a];
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    };
    let sol = case.solution();
    let mut s = format!("{},value,exact,abs_error\n", names.join(","));
    let count = if dim == 1 { n } else { n * n };
    for idx in 0..count {
        let pt: Point<f64> = if dim == 1 {
            [axis(0, idx), 0.0]
        } else {
            [axis(0, idx / n), axis(1, idx % n)]
        };
        let el = p
            .locate(&pt)
            .ok_or_else(|| Error::invalid(format!("grid point {pt:?} outside the domain")))?;
        let v = sol.eval_on(el, &[pt])?[0].0;
        let u = case.problem.exact(&pt);
        let coords: Vec<String> = (0..dim).map(|a| num(pt[a])).collect();
        let _ = writeln!(s, "{},{},{},{}", coords.join(","), num(v), num(u), num((v - u).abs()));
    }
    Ok(s)
}

/// Runs `cfg` and writes `results.csv`, `summary.csv`, `config.json` and
/// optional grid dumps into `out`.
pub fn run_to_dir(cfg: &ExperimentConfig, opts: &RunOptions, out: &Path) -> Result<Vec<ResultRow>> {
    let first_seed = opts.seed_override.or_else(|| cfg.seeds.first().copied());
    let (rows, grids) = run_with_cases(cfg, opts, |row, case| match opts.dump_grid {
        Some(n) if Some(row.seed) == first_seed => {
            Some((format!("grid_h{}_m{}.csv", num(row.h), row.m), grid_csv(case, n)))
        }
        _ => None,
    })?;
    std::fs::create_dir_all(out)?;
    write_atomic(&out.join("results.csv"), &results_csv(&rows))?;
    write_atomic(&out.join("summary.csv"), &summary_csv(&summarize(&rows)))?;
    write_atomic(&out.join("config.json"), &serde_json::to_string_pretty(cfg)?)?;
    for (name, grid) in grids.into_iter().flatten() {
        write_atomic(&out.join(name), &grid?)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip_numbers() {
        for x in [0.25, 10.0, 3.28e-8, 1.0 / 3.0, 5.5] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.25), "0.25");
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(vec![]).is_nan());
    }
}
