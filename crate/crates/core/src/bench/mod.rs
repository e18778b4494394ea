//! Benchmark matrix runner, aggregate statistics and record I/O.
//!
//! A matrix is every combination of method × problem × dimension × start.
//! Runs are independent and spread over a small thread pool; the output order
//! is always the enumeration order, whatever the worker count.

mod profile;
mod svg;

pub use profile::{dolan_more, pairwise_wtl, wtl, Metric, ProfileCurve, Wtl};
pub use svg::{profile_points_csv, render_profile_svg};

use std::collections::HashMap;
use std::io;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::problems::{make_problem_with, starting_point, MonotoneProblem};
use crate::solver::{solve, MethodConfig, SolveReport, Status};

/// Outcome of one benchmark run, one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub problem_id: u32,
    pub n: usize,
    pub start_id: usize,
    pub status: Status,
    pub it: usize,
    pub fe: usize,
    pub cpu_s: f64,
    pub final_residual: f64,
}

/// Exact CSV header of [`RunRecord`] files.
pub const RECORD_HEADER: &str = "method,problem_id,n,start_id,status,it,fe,cpu_s,final_residual";

impl RunRecord {
    pub fn from_report(job: &RunJob, method: &str, report: &SolveReport) -> Self {
        Self {
            method: method.to_string(),
            problem_id: job.problem_id,
            n: job.n,
            start_id: job.start_id,
            status: report.status,
            it: report.iterations,
            fe: report.function_evals,
            cpu_s: report.wall_time_s,
            final_residual: report.final_residual,
        }
    }

    pub fn converged(&self) -> bool {
        self.status.is_converged()
    }

    /// `(problem, n, start)`: the instance this run belongs to.
    pub fn instance(&self) -> (u32, usize, usize) {
        (self.problem_id, self.n, self.start_id)
    }
}

/// The sets spanned by a benchmark matrix.
#[derive(Debug, Clone)]
pub struct MatrixSpec {
    pub methods: Vec<MethodConfig>,
    pub problems: Vec<u32>,
    pub dims: Vec<usize>,
    pub starts: Vec<usize>,
    /// Admit the problem-16 substitute.
    pub allow_substitute: bool,
}

/// One cell of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunJob {
    pub method_idx: usize,
    pub problem_id: u32,
    pub n: usize,
    pub start_id: usize,
}

/// A validated matrix: problems are built once and shared by all runs.
pub struct PreparedMatrix {
    pub spec: MatrixSpec,
    pub jobs: Vec<RunJob>,
    problems: HashMap<(u32, usize), MonotoneProblem>,
}

impl PreparedMatrix {
    pub fn new(spec: MatrixSpec) -> Result<Self> {
        if spec.methods.is_empty() {
            return Err(contract("benchmark matrix needs at least one method"));
        }
        for cfg in &spec.methods {
            cfg.validate()?;
        }
        let mut problems = HashMap::new();
        for &id in &spec.problems {
            for &n in &spec.dims {
                problems.insert((id, n), make_problem_with(id, n, spec.allow_substitute)?);
            }
        }
        for &s in &spec.starts {
            starting_point(1, s)?;
        }
        let mut jobs = Vec::new();
        for method_idx in 0..spec.methods.len() {
            for &problem_id in &spec.problems {
                for &n in &spec.dims {
                    for &start_id in &spec.starts {
                        jobs.push(RunJob {
                            method_idx,
                            problem_id,
                            n,
                            start_id,
                        });
                    }
                }
            }
        }
        Ok(Self {
            spec,
            jobs,
            problems,
        })
    }

    pub fn problem(&self, job: &RunJob) -> &MonotoneProblem {
        &self.problems[&(job.problem_id, job.n)]
    }

    pub fn config(&self, job: &RunJob) -> &MethodConfig {
        &self.spec.methods[job.method_idx]
    }

    pub fn start(&self, job: &RunJob) -> Vec<f64> {
        starting_point(job.n, job.start_id).expect("validated at construction")
    }

    /// Runs every job through `f` on `workers` threads, in job order.
    pub fn map<T, F>(&self, workers: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&RunJob) -> T + Sync,
    {
        par_map(&self.jobs, workers, f)
    }

    pub fn run(&self, workers: usize) -> Vec<RunRecord> {
        self.map(workers, |job| {
            let cfg = self.config(job);
            let report = solve(self.problem(job), &self.start(job), cfg)
                .expect("dimensions are consistent by construction");
            RunRecord::from_report(job, cfg.method.name(), &report)
        })
    }
}

/// Runs the whole matrix; records come back in (method, problem, n, start)
/// order. Failed solves are recorded, never dropped.
pub fn run_matrix(spec: MatrixSpec, workers: usize) -> Result<Vec<RunRecord>> {
    Ok(PreparedMatrix::new(spec)?.run(workers))
}

/// Order-preserving parallel map over `items` with a shared work counter.
pub fn par_map<I, T, F>(items: &[I], workers: usize, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let out = f(&items[i]);
                slots.lock().expect("worker panicked")[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|v| v.expect("every slot filled"))
        .collect()
}

/// Default worker count: available parallelism.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Per-method summary; medians are over converged runs only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub total: usize,
    pub converged: usize,
    pub rate: f64,
    pub median_it: Option<f64>,
    pub median_fe: Option<f64>,
    pub median_cpu: Option<f64>,
}

/// Median with the even-count rule (mean of the middle two); `None` if empty.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    })
}

/// Methods in order of first appearance.
pub(crate) fn method_order(records: &[RunRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.method) {
            out.push(r.method.clone());
        }
    }
    out
}

pub fn aggregate(records: &[RunRecord]) -> Vec<MethodSummary> {
    method_order(records)
        .into_iter()
        .map(|method| {
            let mine: Vec<&RunRecord> = records.iter().filter(|r| r.method == method).collect();
            let conv: Vec<&&RunRecord> = mine.iter().filter(|r| r.converged()).collect();
            let col =
                |f: fn(&RunRecord) -> f64| median(&conv.iter().map(|r| f(r)).collect::<Vec<_>>());
            MethodSummary {
                total: mine.len(),
                converged: conv.len(),
                rate: if mine.is_empty() {
                    0.0
                } else {
                    conv.len() as f64 / mine.len() as f64
                },
                median_it: col(|r| r.it as f64),
                median_fe: col(|r| r.fe as f64),
                median_cpu: col(|r| r.cpu_s),
                method,
            }
        })
        .collect()
}

pub fn write_records<W: io::Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(RECORD_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: io::Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RECORD_HEADER {
        return Err(crate::Error::Parse {
            line: 1,
            message: format!("expected header '{RECORD_HEADER}'"),
        });
    }
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Method;

    fn spec(methods: &[Method], problems: &[u32], starts: &[usize]) -> MatrixSpec {
        MatrixSpec {
            methods: methods.iter().map(|&m| MethodConfig::defaults(m)).collect(),
            problems: problems.to_vec(),
            dims: vec![50],
            starts: starts.to_vec(),
            allow_substitute: false,
        }
    }

    #[test]
    fn cardinality_and_order() {
        let recs =
            run_matrix(spec(&[Method::Gcgpm, Method::Gmopcgm], &[1, 3], &[2, 7]), 3).unwrap();
        assert_eq!(recs.len(), 8);
        let keys: Vec<_> = recs
            .iter()
            .map(|r| (r.method.as_str(), r.problem_id, r.start_id))
            .collect();
        assert_eq!(keys[0], ("gcgpm", 1, 2));
        assert_eq!(keys[1], ("gcgpm", 1, 7));
        assert_eq!(keys[2], ("gcgpm", 3, 2));
        assert_eq!(keys[4], ("gmopcgm", 1, 2));
    }

    #[test]
    fn worker_count_does_not_change_records() {
        let s = spec(&[Method::Gcgpm], &[1, 6, 14], &[1, 5, 9]);
        let strip = |mut v: Vec<RunRecord>| {
            v.iter_mut().for_each(|r| r.cpu_s = 0.0);
            v
        };
        let a = strip(run_matrix(s.clone(), 1).unwrap());
        let b = strip(run_matrix(s, 4).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_ids_are_rejected_up_front() {
        assert!(run_matrix(spec(&[Method::Gcgpm], &[16], &[1]), 1).is_err());
        assert!(run_matrix(spec(&[Method::Gcgpm], &[99], &[1]), 1).is_err());
        assert!(run_matrix(spec(&[Method::Gcgpm], &[1], &[11]), 1).is_err());
    }

    #[test]
    fn median_rules() {
        assert_eq!(median(&[3.0, 5.0, 7.0]), Some(5.0));
        assert_eq!(median(&[9.0, 3.0, 7.0, 5.0]), Some(6.0));
        assert_eq!(median(&[]), None);
    }

    fn rec(method: &str, problem: u32, status: Status, it: usize) -> RunRecord {
        RunRecord {
            method: method.into(),
            problem_id: problem,
            n: 10,
            start_id: 1,
            status,
            it,
            fe: 2 * it + 1,
            cpu_s: 0.01,
            final_residual: if status.is_converged() { 1e-12 } else { 1.0 },
        }
    }

    #[test]
    fn aggregate_uses_converged_runs_only() {
        let recs = vec![
            rec("a", 1, Status::Converged, 3),
            rec("a", 2, Status::Converged, 7),
            rec("a", 3, Status::MaxIterations, 2000),
            rec("b", 1, Status::LineSearchFailure, 4),
        ];
        let s = aggregate(&recs);
        assert_eq!(s[0].method, "a");
        assert_eq!(s[0].converged, 2);
        assert!((s[0].rate - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(s[0].median_it, Some(5.0));
        assert_eq!(s[1].rate, 0.0);
        assert_eq!(s[1].median_it, None);
    }

    #[test]
    fn csv_round_trip_with_exact_header() {
        let recs = vec![
            rec("gcgpm", 1, Status::Converged, 3),
            rec("gmopcgm", 4, Status::ConvergedAtTrialPoint, 8),
            rec("gmop-fixed", 8, Status::NonFinite, 12),
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), RECORD_HEADER);
        assert!(text.contains("converged_at_trial_point"));
        assert_eq!(read_records(buf.as_slice()).unwrap(), recs);

        let mut empty = Vec::new();
        write_records(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), RECORD_HEADER);
    }

    #[test]
    fn wrong_header_is_a_parse_error() {
        let text = "method,problem,n\nx,1,2\n";
        assert!(read_records(text.as_bytes()).is_err());
    }
}
