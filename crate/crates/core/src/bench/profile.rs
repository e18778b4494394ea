use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{method_order, RunRecord};
use crate::error::{contract, Error, Result};

/// Number of τ values on a profile grid.
pub const PROFILE_GRID_POINTS: usize = 200;

/// CPU times below this are floored before forming ratios.
pub const CPU_FLOOR_S: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    It,
    Fe,
    Cpu,
}

impl Metric {
    /// Metric value of a converged record. Counts are floored at 1 so that a
    /// start which is already a root (IT = 0) still has a finite ratio.
    pub fn value(self, r: &RunRecord) -> f64 {
        match self {
            Metric::It => r.it.max(1) as f64,
            Metric::Fe => r.fe.max(1) as f64,
            Metric::Cpu => r.cpu_s.max(CPU_FLOOR_S),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Metric::It => "it",
            Metric::Fe => "fe",
            Metric::Cpu => "cpu",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "it" => Ok(Metric::It),
            "fe" => Ok(Metric::Fe),
            "cpu" => Ok(Metric::Cpu),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric '{other}' (expected it, fe or cpu)"
            ))),
        }
    }
}

/// Dolan–Moré curve `ρ(τ)` of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub method: String,
    /// `(τ, ρ(τ))` on the shared log-spaced grid.
    pub points: Vec<(f64, f64)>,
    /// Performance ratio per instance; `+∞` for failures.
    pub ratios: Vec<f64>,
}

impl ProfileCurve {
    /// Exact `ρ(τ)`: fraction of instances with ratio ≤ τ.
    pub fn rho_at(&self, tau: f64) -> f64 {
        if self.ratios.is_empty() {
            return 0.0;
        }
        self.ratios.iter().filter(|&&r| r <= tau).count() as f64 / self.ratios.len() as f64
    }

    pub fn convergence_rate(&self) -> f64 {
        self.rho_at(f64::MAX)
    }
}

/// Performance profiles of every method in `records` under `metric`.
///
/// Instances are `(problem, n, start)` triples; a method with no converged
/// record on an instance gets an infinite ratio there.
pub fn dolan_more(records: &[RunRecord], metric: Metric) -> Result<Vec<ProfileCurve>> {
    if records.is_empty() {
        return Err(contract("performance profile needs at least one record"));
    }
    let methods = method_order(records);
    let instances: Vec<(u32, usize, usize)> = records
        .iter()
        .map(RunRecord::instance)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut table: HashMap<(&str, (u32, usize, usize)), f64> = HashMap::new();
    for r in records {
        let v = if r.converged() {
            metric.value(r)
        } else {
            f64::INFINITY
        };
        if table.insert((r.method.as_str(), r.instance()), v).is_some() {
            return Err(contract(format!(
                "duplicate record for method {} on instance {:?}",
                r.method,
                r.instance()
            )));
        }
    }

    let best: Vec<f64> = instances
        .iter()
        .map(|inst| {
            methods
                .iter()
                .filter_map(|m| table.get(&(m.as_str(), *inst)))
                .fold(f64::INFINITY, |a, &b| a.min(b))
        })
        .collect();

    let mut curves: Vec<ProfileCurve> = methods
        .iter()
        .map(|m| {
            let ratios = instances
                .iter()
                .zip(&best)
                .map(|(inst, &b)| match table.get(&(m.as_str(), *inst)) {
                    Some(&v) if v.is_finite() => v / b,
                    _ => f64::INFINITY,
                })
                .collect();
            ProfileCurve {
                method: m.clone(),
                points: Vec::new(),
                ratios,
            }
        })
        .collect();

    let tau_max = curves
        .iter()
        .flat_map(|c| c.ratios.iter().copied())
        .filter(|r| r.is_finite())
        .fold(1.0_f64, f64::max);
    let grid = log_grid(tau_max, PROFILE_GRID_POINTS);
    for c in &mut curves {
        c.points = grid.iter().map(|&t| (t, c.rho_at(t))).collect();
    }
    Ok(curves)
}

/// `points` log-spaced values from 1 to `tau_max`, both endpoints exact.
fn log_grid(tau_max: f64, points: usize) -> Vec<f64> {
    if tau_max <= 1.0 || points < 2 {
        return vec![1.0];
    }
    let top = tau_max.ln();
    let mut g: Vec<f64> = (0..points)
        .map(|i| (top * i as f64 / (points - 1) as f64).exp())
        .collect();
    g[0] = 1.0;
    g[points - 1] = tau_max;
    g
}

/// Win/tie/loss counts of one method against another.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Wtl {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

/// Compares `a` against `b` on instances where both converged; a smaller
/// metric is a win.
pub fn wtl(records: &[RunRecord], a: &str, b: &str, metric: Metric) -> Wtl {
    let conv = |m: &str| -> HashMap<(u32, usize, usize), f64> {
        records
            .iter()
            .filter(|r| r.method == m && r.converged())
            .map(|r| (r.instance(), metric.value(r)))
            .collect()
    };
    let (ma, mb) = (conv(a), conv(b));
    let mut out = Wtl::default();
    for (inst, va) in &ma {
        if let Some(vb) = mb.get(inst) {
            if va < vb {
                out.wins += 1;
            } else if va > vb {
                out.losses += 1;
            } else {
                out.ties += 1;
            }
        }
    }
    out
}

/// [`wtl`] for every ordered pair of distinct methods.
pub fn pairwise_wtl(records: &[RunRecord], metric: Metric) -> Vec<(String, String, Wtl)> {
    let methods = method_order(records);
    let mut out = Vec::new();
    for a in &methods {
        for b in &methods {
            if a != b {
                out.push((a.clone(), b.clone(), wtl(records, a, b, metric)));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Status;

    fn rec(method: &str, problem: u32, it: Option<usize>) -> RunRecord {
        RunRecord {
            method: method.into(),
            problem_id: problem,
            n: 100,
            start_id: 1,
            status: if it.is_some() {
                Status::Converged
            } else {
                Status::MaxIterations
            },
            it: it.unwrap_or(2000),
            fe: 0,
            cpu_s: 0.0,
            final_residual: 0.0,
        }
    }

    #[test]
    fn hand_computed_two_by_two() {
        // P1: A=1, B=2; P2: A=4, B=2 → ratios A=(1,2), B=(2,1)
        let recs = vec![
            rec("A", 1, Some(1)),
            rec("B", 1, Some(2)),
            rec("A", 2, Some(4)),
            rec("B", 2, Some(2)),
        ];
        let curves = dolan_more(&recs, Metric::It).unwrap();
        assert_eq!(curves.len(), 2);
        for c in &curves {
            assert_eq!(c.rho_at(1.0), 0.5);
            assert_eq!(c.rho_at(2.0), 1.0);
            assert_eq!(c.points.first().unwrap(), &(1.0, 0.5));
            assert_eq!(c.points.last().unwrap(), &(2.0, 1.0));
        }
        let mut a = curves[0].ratios.clone();
        a.sort_by(f64::total_cmp);
        assert_eq!(a, vec![1.0, 2.0]);
    }

    #[test]
    fn single_method_curve_is_its_convergence_rate() {
        let recs = vec![
            rec("A", 1, Some(5)),
            rec("A", 2, None),
            rec("A", 3, Some(9)),
        ];
        let c = &dolan_more(&recs, Metric::It).unwrap()[0];
        assert_eq!(c.points, vec![(1.0, 2.0 / 3.0)]);
        assert_eq!(c.rho_at(1e9), 2.0 / 3.0);
    }

    #[test]
    fn failing_everywhere_is_identically_zero() {
        let recs = vec![
            rec("A", 1, Some(5)),
            rec("B", 1, None),
            rec("A", 2, Some(50)),
            rec("B", 2, None),
        ];
        let curves = dolan_more(&recs, Metric::It).unwrap();
        assert!(curves[1].points.iter().all(|&(_, r)| r == 0.0));
        assert!(curves[0].points.iter().all(|&(_, r)| r == 1.0));
    }

    #[test]
    fn curves_are_monotone_and_bounded() {
        let recs: Vec<RunRecord> = (1..=30)
            .flat_map(|p| {
                [
                    rec(
                        "A",
                        p,
                        if p % 7 == 0 {
                            None
                        } else {
                            Some(p as usize * 3 % 11 + 1)
                        },
                    ),
                    rec(
                        "B",
                        p,
                        if p % 5 == 0 {
                            None
                        } else {
                            Some(p as usize * 5 % 13 + 1)
                        },
                    ),
                ]
            })
            .collect();
        for c in dolan_more(&recs, Metric::It).unwrap() {
            for w in c.points.windows(2) {
                assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
            }
            assert!(c.points.last().unwrap().1 <= c.convergence_rate());
        }
    }

    #[test]
    fn empty_and_duplicate_records_are_rejected() {
        assert!(dolan_more(&[], Metric::It).is_err());
        let recs = vec![rec("A", 1, Some(1)), rec("A", 1, Some(2))];
        assert!(dolan_more(&recs, Metric::It).is_err());
    }

    #[test]
    fn cpu_metric_is_floored() {
        let mut a = rec("A", 1, Some(1));
        a.cpu_s = 1e-6;
        let mut b = rec("B", 1, Some(1));
        b.cpu_s = 5e-4;
        let curves = dolan_more(&[a, b], Metric::Cpu).unwrap();
        assert_eq!(curves[0].ratios, vec![1.0]);
        assert_eq!(curves[1].ratios, vec![1.0]);
    }

    #[test]
    fn win_tie_loss_examples() {
        let recs = vec![
            rec("A", 1, Some(3)),
            rec("A", 2, Some(5)),
            rec("B", 1, Some(4)),
            rec("B", 2, Some(5)),
        ];
        assert_eq!(
            wtl(&recs, "A", "B", Metric::It),
            Wtl {
                wins: 1,
                ties: 1,
                losses: 0
            }
        );
        assert_eq!(
            wtl(&recs, "A", "A", Metric::It),
            Wtl {
                wins: 0,
                ties: 2,
                losses: 0
            }
        );

        let disjoint = vec![
            rec("A", 1, Some(3)),
            rec("A", 2, None),
            rec("B", 1, None),
            rec("B", 2, Some(5)),
        ];
        assert_eq!(wtl(&disjoint, "A", "B", Metric::It), Wtl::default());
        let table = pairwise_wtl(&recs, Metric::It);
        assert_eq!(table.len(), 2);
        assert_eq!(
            table[1].2,
            Wtl {
                wins: 0,
                ties: 1,
                losses: 1
            }
        );
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [Metric::It, Metric::Fe, Metric::Cpu] {
            assert_eq!(m.name().parse::<Metric>().unwrap(), m);
        }
        assert!("time".parse::<Metric>().is_err());
    }
}
