//! Worst-case total-variation mixing times.
//!
//! The mixing time at threshold eps is the least t such that
//! `max over initial states x of TV(delta_x M^t, pi) < eps`. The TV distance
//! to the stationary state never increases under a step of the chain, so the
//! worst-case distance d(t) is non-increasing and a linear scan in t with
//! early exit per initial state is exact.
//!
//! Scans run the initial states in parallel; each worker owns its own row
//! vector. Callers that know a symmetry of the chain can restrict the scan
//! to orbit representatives through [`MixingScan::initial_states`].

use crate::error::{Error, Result};
use crate::matrix::{check_ergodic, tv_slices, Distribution, SparseMatrix};
use rayon::prelude::*;
use serde::Serialize;

/// Outcome of a worst-case mixing scan at one threshold.
#[derive(Debug, Clone, Serialize)]
pub struct MixingReport {
    pub eps: f64,
    /// Least t with worst-case TV below eps.
    pub t_mix: usize,
    /// Initial state with the largest crossing time (smallest index on ties).
    pub worst_state: usize,
    /// Worst-case TV distance per step, starting at t = 0.
    pub trace: Vec<f64>,
    /// Spectral gap, when the caller computed one.
    pub gap: Option<f64>,
}

impl MixingReport {
    /// CSV row `n,eps,t_mix,gap,worst_state`.
    pub fn csv_row(&self, n: usize) -> String {
        let gap = self.gap.map_or(String::new(), |g| format!("{g}"));
        format!(
            "{},{},{},{},{}",
            n, self.eps, self.t_mix, gap, self.worst_state
        )
    }
}

/// Scan configuration.
#[derive(Debug, Clone)]
pub struct MixingScan {
    /// Thresholds, each in (0, 1). One report per threshold.
    pub eps_list: Vec<f64>,
    /// States excluded from both the initial-state scan and the target.
    pub excluded: Vec<usize>,
    /// Restrict the worst-case scan to these initial states (orbit
    /// representatives); `None` scans every active state.
    pub initial_states: Option<Vec<usize>>,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
    /// When set, every initial state is propagated to the global crossing
    /// time of the smallest threshold, so the trace is the exact worst-case
    /// distance at every step. Otherwise states stop early once they cross,
    /// which leaves the trace exact up to (but not at) the final step.
    pub full_trace: bool,
}

impl MixingScan {
    pub fn new(eps_list: &[f64]) -> Self {
        Self {
            eps_list: eps_list.to_vec(),
            excluded: Vec::new(),
            initial_states: None,
            max_steps: 200_000,
            full_trace: false,
        }
    }

    pub fn excluded(mut self, excluded: &[usize]) -> Self {
        self.excluded = excluded.to_vec();
        self
    }

    pub fn initial_states(mut self, states: &[usize]) -> Self {
        self.initial_states = Some(states.to_vec());
        self
    }

    pub fn full_trace(mut self, on: bool) -> Self {
        self.full_trace = on;
        self
    }
}

struct InitialScan {
    state: usize,
    /// TV to pi at t = 0, 1, ..., own crossing of the smallest threshold.
    trace: Vec<f64>,
}

fn scan_initial(
    m: &SparseMatrix<f64>,
    pi: &[f64],
    state: usize,
    min_eps: f64,
    horizon: Option<usize>,
    max_steps: usize,
) -> Result<InitialScan> {
    let mut v = vec![0.0; m.dim()];
    v[state] = 1.0;
    let mut trace = vec![tv_slices(&v, pi)];
    loop {
        let t = trace.len() - 1;
        let crossed = trace[t] < min_eps;
        let done = match horizon {
            Some(h) => t >= h,
            None => crossed,
        };
        if done && crossed {
            return Ok(InitialScan { state, trace });
        }
        if t >= max_steps {
            return Err(Error::NoConvergence {
                eps: min_eps,
                steps: max_steps,
            });
        }
        v = m.apply(&v);
        trace.push(tv_slices(&v, pi));
    }
}

/// One report per threshold in `scan.eps_list`, sharing a single propagation
/// per initial state. The chain restricted off `scan.excluded` must be
/// ergodic; `pi` is its stationary state (zero on excluded states).
pub fn mixing_reports(
    m: &SparseMatrix<f64>,
    pi: &Distribution<f64>,
    scan: &MixingScan,
) -> Result<Vec<MixingReport>> {
    if pi.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: pi.dim(),
        });
    }
    for &eps in &scan.eps_list {
        if !(0.0..1.0).contains(&eps) || eps == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eps = {eps} outside (0, 1)"
            )));
        }
    }
    if scan.eps_list.is_empty() {
        return Err(Error::InvalidParameter("no thresholds given".into()));
    }
    let active = check_ergodic(m, &scan.excluded)?;
    let initials: Vec<usize> = match &scan.initial_states {
        Some(list) => {
            for &s in list {
                if scan.excluded.contains(&s) || s >= m.dim() {
                    return Err(Error::InvalidParameter(format!(
                        "initial state {s} is excluded or out of range"
                    )));
                }
            }
            list.clone()
        }
        None => active,
    };
    let min_eps = scan.eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let pi_slice = pi.weights();

    let mut scans: Vec<InitialScan> = initials
        .par_iter()
        .map(|&s| scan_initial(m, pi_slice, s, min_eps, None, scan.max_steps))
        .collect::<Result<Vec<_>>>()?;

    let t_end = scans.iter().map(|s| s.trace.len() - 1).max().unwrap();

    if scan.full_trace {
        // Re-run early stoppers out to the global horizon so the pointwise
        // maximum is exact everywhere.
        scans = initials
            .par_iter()
            .map(|&s| scan_initial(m, pi_slice, s, min_eps, Some(t_end), scan.max_steps))
            .collect::<Result<Vec<_>>>()?;
    }

    // Worst-case distance per step.
    let mut d = vec![0.0f64; t_end + 1];
    for s in &scans {
        for (t, &tv) in s.trace.iter().enumerate() {
            if tv > d[t] {
                d[t] = tv;
            }
        }
    }
    for t in 1..=t_end {
        if scan.full_trace && d[t] > d[t - 1] + 1e-9 {
            return Err(Error::Eigensolver(format!(
                "worst-case TV increased from {} to {} at step {t}",
                d[t - 1],
                d[t]
            )));
        }
    }

    let reports = scan
        .eps_list
        .iter()
        .map(|&eps| {
            // Per-state crossing time of this threshold; worst state is the
            // one crossing last.
            let mut t_mix = 0usize;
            let mut worst_state = scans.first().map_or(0, |s| s.state);
            for s in &scans {
                let cross = s
                    .trace
                    .iter()
                    .position(|&tv| tv < eps)
                    .unwrap_or(s.trace.len());
                if cross > t_mix {
                    t_mix = cross;
                    worst_state = s.state;
                }
            }
            MixingReport {
                eps,
                t_mix,
                worst_state,
                trace: d.clone(),
                gap: None,
            }
        })
        .collect();
    Ok(reports)
}

/// Single-threshold convenience wrapper scanning every active initial state.
pub fn mixing_time(
    m: &SparseMatrix<f64>,
    pi: &Distribution<f64>,
    eps: f64,
    excluded: &[usize],
) -> Result<MixingReport> {
    Ok(mixing_reports(m, pi, &MixingScan::new(&[eps]).excluded(excluded))?.remove(0))
}
