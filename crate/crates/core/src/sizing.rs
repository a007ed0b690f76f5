//! Availability of a simulated tag and capacitor sizing for a target uptime.

use std::io::Write;

use crate::csvio;
use crate::energy::{Phase, PowerPath, SimTrace, Simulation};
use crate::error::{Error, Result};
use crate::insolation::IrradianceProfile;

/// Uptime breakdown of a trace after the warm-up window.
#[derive(Debug, Clone, PartialEq)]
pub struct AvailabilityReport {
    pub availability_fraction: f64,
    /// Time in each phase, indexed by [`Phase::index`].
    pub time_in_phase_s: [f64; 3],
    pub evaluated_s: f64,
    /// `(start, end)` of each blackout run within the evaluated window.
    pub blackout_intervals: Vec<(f64, f64)>,
    pub warmup_excluded_s: f64,
}

impl AvailabilityReport {
    pub fn time_in(&self, phase: Phase) -> f64 {
        self.time_in_phase_s[phase.index()]
    }

    /// Key-value summary block.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!(
            "availability = {:.6}\n",
            self.availability_fraction
        ));
        s.push_str(&format!("evaluated_s = {:.3}\n", self.evaluated_s));
        s.push_str(&format!(
            "warmup_excluded_s = {:.3}\n",
            self.warmup_excluded_s
        ));
        for phase in Phase::ALL {
            s.push_str(&format!(
                "time_{}_s = {:.3}\n",
                phase.as_str(),
                self.time_in(phase)
            ));
        }
        s.push_str(&format!(
            "blackout_intervals = {}\n",
            self.blackout_intervals.len()
        ));
        s
    }

    /// Writes `start_s,end_s` per blackout interval.
    pub fn write_blackouts_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csvio::writer(out);
        wtr.write_record(["start_s", "end_s"])?;
        for (a, b) in &self.blackout_intervals {
            wtr.write_record([a.to_string(), b.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Availability over samples at or after `warmup_s`.
///
/// Each sample stands for one `dt` of time; the chip is available when the
/// sample is not in blackout.
pub fn availability(trace: &SimTrace, warmup_s: f64) -> Result<AvailabilityReport> {
    if !(warmup_s >= 0.0) || warmup_s >= trace.duration() {
        return Err(Error::domain(format!(
            "warm-up {warmup_s} s must lie in [0, {}) s",
            trace.duration()
        )));
    }
    let dt = trace.dt;
    let cutoff = trace.start_time() + warmup_s;
    let mut counts = [0u64; 3];
    let mut intervals = Vec::new();
    let mut open: Option<f64> = None;
    for s in trace.states.iter().filter(|s| s.t >= cutoff) {
        counts[s.phase.index()] += 1;
        match (s.phase == Phase::Blackout, open) {
            (true, None) => open = Some(s.t),
            (false, Some(start)) => {
                intervals.push((start, s.t));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(start) = open {
        intervals.push((start, trace.end_time() + dt));
    }
    let total: u64 = counts.iter().sum();
    let up = total - counts[Phase::Blackout.index()];
    Ok(AvailabilityReport {
        availability_fraction: up as f64 / total as f64,
        time_in_phase_s: counts.map(|n| n as f64 * dt),
        evaluated_s: total as f64 * dt,
        blackout_intervals: intervals,
        warmup_excluded_s: warmup_s,
    })
}

/// Everything but the capacitance needed to simulate a candidate design.
#[derive(Debug, Clone, PartialEq)]
pub struct SizingProblem {
    pub path: PowerPath,
    pub profile: IrradianceProfile,
    pub duration_s: f64,
    pub dt_s: f64,
    pub v_initial: f64,
    pub warmup_s: f64,
}

impl SizingProblem {
    /// Availability of the design with the given capacitance.
    ///
    /// Streams the simulation instead of storing the trace.
    pub fn availability_at(&self, capacitance_f: f64) -> Result<f64> {
        let path = PowerPath {
            capacitance_f,
            ..self.path
        };
        let v_initial = self.v_initial.min(path.v_clamp);
        let sim = Simulation::new(&path, &self.profile, self.duration_s, self.dt_s, v_initial)?;
        if !(self.warmup_s >= 0.0) || self.warmup_s >= self.duration_s {
            return Err(Error::domain(format!(
                "warm-up {} s must lie in [0, {}) s",
                self.warmup_s, self.duration_s
            )));
        }
        let (mut up, mut total) = (0u64, 0u64);
        for s in sim.filter(|s| s.t >= self.warmup_s) {
            total += 1;
            if s.phase != Phase::Blackout {
                up += 1;
            }
        }
        Ok(up as f64 / total as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizingResult {
    pub capacitance_f: f64,
    pub availability: f64,
    pub iterations: u32,
    /// `(capacitance, availability)` at the bracket ends and the sampled
    /// intermediate points, in increasing capacitance.
    pub monotonicity_samples: Vec<(f64, f64)>,
}

const MONOTONICITY_SAMPLES: usize = 8;

/// Smallest capacitance in `[c_lo, c_hi]` whose availability reaches
/// `target`, to relative tolerance `rel_tol`.
///
/// Bisects geometrically, since useful capacitances span many decades. The
/// bracket must straddle the target, and availability is checked to be
/// non-decreasing at eight log-spaced capacitances inside it before the
/// search starts.
pub fn min_capacitance(
    problem: &SizingProblem,
    target: f64,
    c_lo: f64,
    c_hi: f64,
    rel_tol: f64,
) -> Result<SizingResult> {
    if !(c_lo > 0.0) || !(c_lo < c_hi) || !c_hi.is_finite() {
        return Err(Error::domain(format!(
            "capacitance bracket needs 0 < c_lo < c_hi, got [{c_lo}, {c_hi}]"
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 0.5) {
        return Err(Error::domain(format!(
            "rel_tol must lie in (0, 0.5), got {rel_tol}"
        )));
    }
    if !(target <= 1.0) || target.is_nan() {
        return Err(Error::domain(format!(
            "target availability {target} exceeds 1"
        )));
    }
    if target <= 0.0 {
        let availability = problem.availability_at(c_lo)?;
        return Ok(SizingResult {
            capacitance_f: c_lo,
            availability,
            iterations: 0,
            monotonicity_samples: vec![(c_lo, availability)],
        });
    }

    let ratio = c_hi / c_lo;
    let mut grid: Vec<f64> = (0..=MONOTONICITY_SAMPLES + 1)
        .map(|i| c_lo * ratio.powf(i as f64 / (MONOTONICITY_SAMPLES + 1) as f64))
        .collect();
    grid[0] = c_lo;
    grid[MONOTONICITY_SAMPLES + 1] = c_hi;
    let avail = evaluate_all(problem, &grid)?;
    let samples: Vec<(f64, f64)> = grid.into_iter().zip(avail).collect();
    if let Some(w) = samples.windows(2).find(|w| w[1].1 < w[0].1) {
        return Err(Error::NonMonotonic {
            c_lo: w[0].0,
            c_hi: w[1].0,
            available_lo: w[0].1,
            available_hi: w[1].1,
        });
    }
    let (a_lo, a_hi) = (samples[0].1, samples[samples.len() - 1].1);
    if !(a_lo < target && target <= a_hi) {
        return Err(Error::Bracket {
            c_lo,
            c_hi,
            avail_lo: a_lo,
            avail_hi: a_hi,
            target,
        });
    }

    // Start from the tightest sampled sub-bracket.
    let hi_idx = samples.iter().position(|&(_, a)| a >= target).unwrap();
    let (mut lo, mut hi) = (samples[hi_idx - 1].0, samples[hi_idx].0);
    let mut a_at_hi = samples[hi_idx].1;
    let mut iterations = 0;
    while hi / lo - 1.0 > rel_tol {
        let mid = (lo * hi).sqrt();
        let a = problem.availability_at(mid)?;
        if a >= target {
            hi = mid;
            a_at_hi = a;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(SizingResult {
        capacitance_f: hi,
        availability: a_at_hi,
        iterations,
        monotonicity_samples: samples,
    })
}

#[cfg(feature = "parallel")]
fn evaluate_all(problem: &SizingProblem, caps: &[f64]) -> Result<Vec<f64>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = caps
            .iter()
            .map(|&c| scope.spawn(move || problem.availability_at(c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("availability worker panicked"))
            .collect()
    })
}

#[cfg(not(feature = "parallel"))]
fn evaluate_all(problem: &SizingProblem, caps: &[f64]) -> Result<Vec<f64>> {
    caps.iter().map(|&c| problem.availability_at(c)).collect()
}
