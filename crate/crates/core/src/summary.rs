//! Trace summary shared by the `simulate` and `report` commands.
//!
//! Everything here is derived from the columns of the trace CSV, so a trace
//! written to disk and read back summarizes identically.

use std::fmt;

use crate::energy::{EventKind, Phase, SimTrace};
use crate::error::Result;
use crate::sizing::{availability, AvailabilityReport};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub samples: usize,
    pub dt_s: f64,
    pub duration_s: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_final: f64,
    pub blackout_entries: usize,
    pub blackout_exits: usize,
    /// Whether each of the three phases occurs anywhere in the trace.
    pub phases_seen: [bool; 3],
    pub availability: AvailabilityReport,
}

impl TraceSummary {
    pub fn new(trace: &SimTrace, warmup_s: f64) -> Result<Self> {
        let availability = availability(trace, warmup_s)?;
        let mut phases_seen = [false; 3];
        let (mut v_min, mut v_max) = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &trace.states {
            phases_seen[s.phase.index()] = true;
            v_min = v_min.min(s.v_cap);
            v_max = v_max.max(s.v_cap);
        }
        // count from phase labels so a re-read trace agrees
        let (mut entries, mut exits) = (0, 0);
        for w in trace.states.windows(2) {
            match (w[0].phase == Phase::Blackout, w[1].phase == Phase::Blackout) {
                (false, true) => entries += 1,
                (true, false) => exits += 1,
                _ => {}
            }
        }
        debug_assert_eq!(
            entries,
            trace
                .events
                .iter()
                .filter(|e| e.kind == EventKind::EnteredBlackout)
                .count()
        );
        Ok(Self {
            samples: trace.states.len(),
            dt_s: trace.dt,
            duration_s: trace.duration(),
            v_min,
            v_max,
            v_final: trace.states.last().map_or(0.0, |s| s.v_cap),
            blackout_entries: entries,
            blackout_exits: exits,
            phases_seen,
            availability,
        })
    }

    pub fn saw(&self, phase: Phase) -> bool {
        self.phases_seen[phase.index()]
    }
}

impl fmt::Display for TraceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "dt_s = {}", self.dt_s)?;
        writeln!(f, "duration_s = {:.3}", self.duration_s)?;
        writeln!(f, "v_min = {:.6}", self.v_min)?;
        writeln!(f, "v_max = {:.6}", self.v_max)?;
        writeln!(f, "v_final = {:.6}", self.v_final)?;
        let seen: Vec<_> = Phase::ALL
            .iter()
            .filter(|p| self.saw(**p))
            .map(|p| p.as_str())
            .collect();
        writeln!(f, "phases = {}", seen.join(","))?;
        writeln!(f, "blackout_entries = {}", self.blackout_entries)?;
        writeln!(f, "blackout_exits = {}", self.blackout_exits)?;
        f.write_str(&self.availability.summary())
    }
}
