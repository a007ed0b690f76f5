//! Power path of a PV-assisted tag: solar cell, series blocking diode,
//! Zener-clamped storage capacitor and the chip load.
//!
//! The capacitor obeys `C dV/dt = i_in - i_out` with piecewise-constant
//! currents, integrated by explicit Euler steps. Between switching events the
//! update is exact; threshold crossings are flagged at the first sample past
//! the crossing.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::csvio;
use crate::error::{Error, Result};
use crate::insolation::IrradianceProfile;
use crate::link_budget::IcProfile;

/// Solar cell modelled as an irradiance-proportional current source that
/// stops delivering at its open-circuit voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvCell {
    pub area_cm2: f64,
    /// Short-circuit current density at 1000 W/m² (A/cm²).
    pub j_sc_stc: f64,
    /// Open-circuit voltage (V).
    pub v_max: f64,
}

impl Default for PvCell {
    /// 12 cm² cell that fills 10 F to 2.7 V in under five minutes at one sun.
    fn default() -> Self {
        Self {
            area_cm2: 12.0,
            j_sc_stc: 8e-3,
            v_max: 4.0,
        }
    }
}

impl PvCell {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("area_cm2", self.area_cm2),
            ("j_sc_stc", self.j_sc_stc),
            ("v_max", self.v_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Cell output current at the given irradiance and terminal voltage.
pub fn pv_current(pv: &PvCell, irradiance_wm2: f64, v_terminal: f64) -> Result<f64> {
    if !(irradiance_wm2 >= 0.0) {
        return Err(Error::domain(format!(
            "irradiance must be >= 0, got {irradiance_wm2} W/m^2"
        )));
    }
    if v_terminal >= pv.v_max {
        return Ok(0.0);
    }
    Ok(pv.j_sc_stc * pv.area_cm2 * irradiance_wm2 / 1000.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPath {
    pub pv: PvCell,
    /// Forward drop of the series diode (V).
    pub v_diode: f64,
    /// Zener clamp voltage (V).
    pub v_clamp: f64,
    pub capacitance_f: f64,
    /// Capacitor self-discharge current (A).
    pub i_leak: f64,
    pub ic: IcProfile,
}

impl Default for PowerPath {
    fn default() -> Self {
        Self {
            pv: PvCell::default(),
            v_diode: 0.0,
            v_clamp: 2.7,
            capacitance_f: 10.0,
            i_leak: 1e-6,
            ic: IcProfile::default(),
        }
    }
}

impl PowerPath {
    pub fn validate(&self) -> Result<()> {
        self.pv.validate()?;
        self.ic.validate()?;
        if !(self.v_diode >= 0.0) || !self.v_diode.is_finite() {
            return Err(Error::invalid("v_diode", "must be >= 0"));
        }
        if !(self.v_clamp > self.ic.v_readwrite) || !self.v_clamp.is_finite() {
            return Err(Error::invalid(
                "v_clamp",
                "must exceed the chip v_readwrite",
            ));
        }
        if !(self.capacitance_f > 0.0) || !self.capacitance_f.is_finite() {
            return Err(Error::invalid("capacitance_f", "must be > 0"));
        }
        if !(self.i_leak >= 0.0) || !self.i_leak.is_finite() {
            return Err(Error::invalid("i_leak", "must be >= 0"));
        }
        Ok(())
    }

    /// Whether the clamp leaves room to reach the EEPROM-write threshold.
    pub fn eeprom_reachable(&self) -> bool {
        self.v_clamp >= self.ic.v_eeprom
    }

    /// Current the cell pushes through the diode into the capacitor node.
    fn current_in(&self, irradiance_wm2: f64, v_cap: f64) -> Result<f64> {
        let v_terminal = v_cap + self.v_diode;
        if self.pv.v_max < v_terminal {
            // reverse biased: the diode blocks backflow
            return Ok(0.0);
        }
        pv_current(&self.pv, irradiance_wm2, v_terminal)
    }

    /// Leakage plus the chip load, which is gated off below `v_readwrite`.
    fn current_out(&self, v_cap: f64) -> f64 {
        let chip = if v_cap >= self.ic.v_readwrite {
            self.ic.effective_load()
        } else {
            0.0
        };
        self.i_leak + chip
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// The cell carries the load and holds the capacitor up.
    DirectSolar,
    /// Dark, running from stored charge.
    CapacitorPowered,
    /// Below the chip read/write threshold.
    Blackout,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::DirectSolar, Phase::CapacitorPowered, Phase::Blackout];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::DirectSolar => "direct_solar",
            Phase::CapacitorPowered => "capacitor",
            Phase::Blackout => "blackout",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct_solar" => Ok(Phase::DirectSolar),
            "capacitor" => Ok(Phase::CapacitorPowered),
            "blackout" => Ok(Phase::Blackout),
            other => Err(Error::domain(format!("unknown phase `{other}`"))),
        }
    }
}

/// One sample of the power path.
///
/// The currents are those flowing at this sample, i.e. the ones that drive
/// the step to the next sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    pub t: f64,
    pub v_cap: f64,
    pub phase: Phase,
    pub i_pv_delivered: f64,
    pub i_load_drawn: f64,
}

impl EnergyState {
    /// Observes the path at capacitor voltage `v_cap` under `irradiance_wm2`.
    pub fn observe(path: &PowerPath, t: f64, v_cap: f64, irradiance_wm2: f64) -> Result<Self> {
        let i_pv_delivered = path.current_in(irradiance_wm2, v_cap)?;
        let i_load_drawn = path.current_out(v_cap);
        let phase = phase_for(path, v_cap, i_pv_delivered);
        Ok(Self {
            t,
            v_cap,
            phase,
            i_pv_delivered,
            i_load_drawn,
        })
    }
}

fn phase_for(path: &PowerPath, v_cap: f64, i_in: f64) -> Phase {
    if v_cap < path.ic.v_readwrite {
        Phase::Blackout
    } else if i_in > 0.0 {
        Phase::DirectSolar
    } else {
        Phase::CapacitorPowered
    }
}

pub fn classify_phase(path: &PowerPath, state: &EnergyState, irradiance_wm2: f64) -> Result<Phase> {
    let i_in = path.current_in(irradiance_wm2, state.v_cap)?;
    Ok(phase_for(path, state.v_cap, i_in))
}

/// Advances the capacitor by `dt_s` under constant `irradiance_wm2`.
///
/// The returned state is observed under the same irradiance; `simulate`
/// re-observes it under the profile value at the new time.
pub fn step(
    path: &PowerPath,
    state: &EnergyState,
    irradiance_wm2: f64,
    dt_s: f64,
) -> Result<EnergyState> {
    if !(dt_s > 0.0) {
        return Err(Error::domain(format!("dt must be > 0, got {dt_s} s")));
    }
    let i_in = path.current_in(irradiance_wm2, state.v_cap)?;
    let i_out = path.current_out(state.v_cap);
    let v_next =
        (state.v_cap + (i_in - i_out) * dt_s / path.capacitance_f).clamp(0.0, path.v_clamp);
    EnergyState::observe(path, state.t + dt_s, v_next, irradiance_wm2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    ChargeComplete,
    EnteredBlackout,
    ExitedBlackout,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ChargeComplete => "charge_complete",
            EventKind::EnteredBlackout => "entered_blackout",
            EventKind::ExitedBlackout => "exited_blackout",
        }
    }
}

impl FromStr for EventKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "charge_complete" => Ok(EventKind::ChargeComplete),
            "entered_blackout" => Ok(EventKind::EnteredBlackout),
            "exited_blackout" => Ok(EventKind::ExitedBlackout),
            other => Err(Error::domain(format!("unknown event `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

/// Events raised by moving from `prev` to `next`.
fn crossings(
    path: &PowerPath,
    prev: &EnergyState,
    next: &EnergyState,
) -> impl Iterator<Item = Event> {
    let t = next.t;
    let charge = (prev.v_cap < path.v_clamp && next.v_cap >= path.v_clamp)
        .then_some(EventKind::ChargeComplete);
    let was_out = prev.phase == Phase::Blackout;
    let is_out = next.phase == Phase::Blackout;
    let blackout = match (was_out, is_out) {
        (false, true) => Some(EventKind::EnteredBlackout),
        (true, false) => Some(EventKind::ExitedBlackout),
        _ => None,
    };
    blackout
        .into_iter()
        .chain(charge)
        .map(move |kind| Event { t, kind })
}

/// Uniformly sampled power-path trajectory with its threshold events.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub states: Vec<EnergyState>,
    pub events: Vec<Event>,
}

impl SimTrace {
    pub fn start_time(&self) -> f64 {
        self.states.first().map_or(0.0, |s| s.t)
    }

    pub fn end_time(&self) -> f64 {
        self.states.last().map_or(0.0, |s| s.t)
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// Sample closest in time to `t`, clamped to the trace.
    pub fn nearest(&self, t: f64) -> &EnergyState {
        let idx = ((t - self.start_time()) / self.dt).round();
        let idx = if idx.is_nan() || idx < 0.0 {
            0
        } else {
            (idx as usize).min(self.states.len() - 1)
        };
        &self.states[idx]
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csvio::writer(out);
        wtr.write_record(["t_s", "v_cap_v", "phase", "i_pv_a", "i_load_a"])?;
        for s in &self.states {
            wtr.write_record([
                s.t.to_string(),
                s.v_cap.to_string(),
                s.phase.as_str().to_string(),
                s.i_pv_delivered.to_string(),
                s.i_load_drawn.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_events_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csvio::writer(out);
        wtr.write_record(["t_s", "event_name"])?;
        for e in &self.events {
            wtr.write_record([e.t.to_string(), e.kind.as_str().to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Parses a trace written by [`SimTrace::write_csv`]. The sample interval
    /// is taken from the first two rows. Events are not stored in the trace
    /// file; phase transitions are recovered from the phase column.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let rows = csvio::read_rows(reader, &["t_s", "v_cap_v", "phase", "i_pv_a", "i_load_a"])?;
        if rows.len() < 2 {
            return Err(Error::Format(format!(
                "trace needs at least 2 samples, found {}",
                rows.len()
            )));
        }
        let mut states = Vec::with_capacity(rows.len());
        for row in &rows {
            let phase = row.fields[2].parse::<Phase>().map_err(|_| Error::Parse {
                line: row.line,
                message: format!("unknown phase `{}`", &row.fields[2]),
            })?;
            states.push(EnergyState {
                t: csvio::parse_f64(row, 0, "t_s")?,
                v_cap: csvio::parse_f64(row, 1, "v_cap_v")?,
                phase,
                i_pv_delivered: csvio::parse_f64(row, 3, "i_pv_a")?,
                i_load_drawn: csvio::parse_f64(row, 4, "i_load_a")?,
            });
        }
        let dt = states[1].t - states[0].t;
        if !(dt > 0.0) {
            return Err(Error::Format(
                "timestamps must be strictly increasing".into(),
            ));
        }
        for (row, w) in rows.iter().skip(1).zip(states.windows(2)) {
            let gap = w[1].t - w[0].t;
            if !(gap > 0.0) || (gap - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(Error::Parse {
                    line: row.line,
                    message: format!("non-uniform sample spacing {gap} s (expected {dt} s)"),
                });
            }
        }
        let events = states
            .windows(2)
            .filter_map(|w| {
                match (w[0].phase, w[1].phase) {
                    (p, Phase::Blackout) if p != Phase::Blackout => {
                        Some(EventKind::EnteredBlackout)
                    }
                    (Phase::Blackout, p) if p != Phase::Blackout => Some(EventKind::ExitedBlackout),
                    _ => None,
                }
                .map(|kind| Event { t: w[1].t, kind })
            })
            .collect();
        Ok(Self { dt, states, events })
    }
}

/// Lazily generated power-path trajectory.
///
/// Yields `floor(duration / dt) + 1` states starting at `t = 0`. Sample times
/// are `i * dt`, not a running sum, so they are reproducible to the bit.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    path: &'a PowerPath,
    profile: &'a IrradianceProfile,
    dt: f64,
    steps: u64,
    index: u64,
    current: Option<EnergyState>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        path: &'a PowerPath,
        profile: &'a IrradianceProfile,
        duration_s: f64,
        dt_s: f64,
        v_initial: f64,
    ) -> Result<Self> {
        path.validate()?;
        profile.validate()?;
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::domain(format!(
                "duration must be > 0, got {duration_s} s"
            )));
        }
        if !(dt_s > 0.0) || !dt_s.is_finite() {
            return Err(Error::domain(format!("dt must be > 0, got {dt_s} s")));
        }
        if !(0.0..=path.v_clamp).contains(&v_initial) {
            return Err(Error::domain(format!(
                "initial voltage {v_initial} V outside [0, {}] V",
                path.v_clamp
            )));
        }
        // tolerate duration/dt landing a hair under an integer
        let steps = (duration_s / dt_s * (1.0 + 1e-12)).floor() as u64;
        let first = EnergyState::observe(path, 0.0, v_initial, profile.irradiance_at(0.0))?;
        Ok(Self {
            path,
            profile,
            dt: dt_s,
            steps,
            index: 0,
            current: Some(first),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        (self.steps + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn advance(&self, state: &EnergyState) -> EnergyState {
        let i_in = state.i_pv_delivered;
        let i_out = state.i_load_drawn;
        let v = (state.v_cap + (i_in - i_out) * self.dt / self.path.capacitance_f)
            .clamp(0.0, self.path.v_clamp);
        let t = (self.index + 1) as f64 * self.dt;
        // irradiance was validated non-negative, observe cannot fail
        EnergyState::observe(self.path, t, v, self.profile.irradiance_at(t))
            .expect("profile irradiance is non-negative")
    }

    /// Runs to completion, collecting states and events.
    pub fn into_trace(self) -> SimTrace {
        let dt = self.dt;
        let path = self.path;
        let mut states: Vec<EnergyState> = Vec::with_capacity(self.len());
        let mut events = Vec::new();
        for state in self {
            if let Some(prev) = states.last() {
                events.extend(crossings(path, prev, &state));
            }
            states.push(state);
        }
        SimTrace { dt, states, events }
    }
}

impl Iterator for Simulation<'_> {
    type Item = EnergyState;

    fn next(&mut self) -> Option<EnergyState> {
        let out = self.current.take()?;
        if self.index < self.steps {
            self.current = Some(self.advance(&out));
            self.index += 1;
        }
        Some(out)
    }
}

/// Simulates the power path from `t = 0` for `duration_s` at step `dt_s`.
pub fn simulate(
    path: &PowerPath,
    profile: &IrradianceProfile,
    duration_s: f64,
    dt_s: f64,
    v_initial: f64,
) -> Result<SimTrace> {
    Ok(Simulation::new(path, profile, duration_s, dt_s, v_initial)?.into_trace())
}

/// How long a charged capacitor lasts between two voltages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Persistence {
    Seconds(f64),
    /// No discharge current: the voltage never falls.
    Indefinite,
}

impl Persistence {
    pub fn seconds(self) -> Option<f64> {
        match self {
            Persistence::Seconds(s) => Some(s),
            Persistence::Indefinite => None,
        }
    }
}

/// Constant-current discharge time `C (v_from - v_to) / i_total`.
pub fn time_to_blackout(
    capacitance_f: f64,
    v_from: f64,
    v_to: f64,
    i_total: f64,
) -> Result<Persistence> {
    if !(v_from > v_to) {
        return Err(Error::domain(format!(
            "discharge needs v_from > v_to, got {v_from} V -> {v_to} V"
        )));
    }
    if !(capacitance_f > 0.0) {
        return Err(Error::domain("capacitance must be > 0"));
    }
    if i_total == 0.0 {
        return Ok(Persistence::Indefinite);
    }
    if !(i_total > 0.0) {
        return Err(Error::domain(format!(
            "discharge current must be >= 0, got {i_total} A"
        )));
    }
    Ok(Persistence::Seconds(
        capacitance_f * (v_from - v_to) / i_total,
    ))
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn path(capacitance_f: f64, i_leak: f64, i_operating: f64, duty_cycle: f64) -> PowerPath {
        PowerPath {
            capacitance_f,
            i_leak,
            ic: IcProfile {
                i_operating,
                duty_cycle,
                ..IcProfile::default()
            },
            ..PowerPath::default()
        }
    }

    #[test]
    fn pv_current_cases() {
        let pv = PvCell::default();
        assert_relative_eq!(
            pv_current(&pv, 1000.0, 2.7).unwrap(),
            0.096,
            max_relative = 1e-12
        );
        assert_eq!(pv_current(&pv, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(pv_current(&pv, 1000.0, 4.0).unwrap(), 0.0);
        assert!(pv_current(&pv, -1.0, 1.0).is_err());
    }

    #[test]
    fn dark_step_discharges_by_total_current() {
        let p = path(1e-3, 1e-6, 10e-6, 1.0);
        let s = EnergyState::observe(&p, 0.0, 2.7, 0.0).unwrap();
        let next = step(&p, &s, 0.0, 1.0).unwrap();
        assert!((next.v_cap - 2.689).abs() < 1e-12, "{}", next.v_cap);
        assert_eq!(next.t, 1.0);
    }

    #[test]
    fn lit_step_holds_at_clamp() {
        let p = PowerPath::default();
        let s = EnergyState::observe(&p, 0.0, 2.7, 1000.0).unwrap();
        let next = step(&p, &s, 1000.0, 1.0).unwrap();
        assert_eq!(next.v_cap, 2.7);
        assert_eq!(next.phase, Phase::DirectSolar);
    }

    #[test]
    fn chip_off_below_threshold() {
        let p = path(1e-3, 1e-6, 10e-6, 1.0);
        let s = EnergyState::observe(&p, 0.0, 1.4, 0.0).unwrap();
        assert_eq!(s.i_load_drawn, 1e-6);
        let next = step(&p, &s, 0.0, 1.0).unwrap();
        assert!((next.v_cap - (1.4 - 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn step_rejects_bad_dt() {
        let p = PowerPath::default();
        let s = EnergyState::observe(&p, 0.0, 2.0, 0.0).unwrap();
        assert!(step(&p, &s, 0.0, 0.0).is_err());
    }

    #[test]
    fn diode_blocks_backflow() {
        let p = PowerPath {
            v_diode: 0.5,
            pv: PvCell {
                v_max: 3.0,
                ..PvCell::default()
            },
            ..PowerPath::default()
        };
        let s = EnergyState::observe(&p, 0.0, 2.6, 1000.0).unwrap();
        assert_eq!(s.i_pv_delivered, 0.0);
        assert_eq!(s.phase, Phase::CapacitorPowered);
        let s = EnergyState::observe(&p, 0.0, 2.0, 1000.0).unwrap();
        assert!(s.i_pv_delivered > 0.0);
    }

    #[test]
    fn phase_classification() {
        let p = PowerPath::default();
        let at = |v, g| {
            let s = EnergyState::observe(&p, 0.0, v, 0.0).unwrap();
            classify_phase(&p, &s, g).unwrap()
        };
        assert_eq!(at(2.7, 1000.0), Phase::DirectSolar);
        assert_eq!(at(2.0, 0.0), Phase::CapacitorPowered);
        assert_eq!(at(1.0, 0.0), Phase::Blackout);
        assert_eq!(at(1.0, 1000.0), Phase::Blackout);
    }

    #[test]
    fn phase_names_round_trip() {
        for phase in Phase::ALL {
            assert_eq!(phase.as_str().parse::<Phase>().unwrap(), phase);
        }
        assert!("dark".parse::<Phase>().is_err());
    }

    #[test]
    fn time_to_blackout_cases() {
        let t = time_to_blackout(1e-3, 2.7, 1.5, 11e-6)
            .unwrap()
            .seconds()
            .unwrap();
        assert!((t - 109.09).abs() < 0.01);
        let t = time_to_blackout(10.0, 2.7, 1.5, 11e-6)
            .unwrap()
            .seconds()
            .unwrap();
        assert_relative_eq!(t, 1.0909e6, max_relative = 1e-4);
        let t = time_to_blackout(1e-3, 2.7, 1.5, 1.33e-6)
            .unwrap()
            .seconds()
            .unwrap();
        assert!((t - 902.0).abs() < 1.0);
        assert_eq!(
            time_to_blackout(1.0, 2.7, 1.5, 0.0).unwrap(),
            Persistence::Indefinite
        );
        assert!(time_to_blackout(1.0, 1.5, 2.7, 1e-6).is_err());
    }

    #[test]
    fn dark_discharge_matches_closed_form() {
        let p = path(1.0, 1e-6, 10e-6, 1.0);
        let dark = IrradianceProfile::Constant { g_wm2: 0.0 };
        let trace = simulate(&p, &dark, 100_000.0, 1.0, 2.7).unwrap();
        let i = 11e-6;
        for s in trace.states.iter().filter(|s| s.v_cap >= 1.5) {
            let analytic = 2.7 - i * s.t / 1.0;
            assert!((s.v_cap - analytic).abs() <= 0.01 * analytic);
        }
    }

    #[test]
    fn no_light_no_charge() {
        let p = PowerPath::default();
        let dark = IrradianceProfile::Constant { g_wm2: 0.0 };
        let trace = simulate(&p, &dark, 3600.0, 1.0, 0.0).unwrap();
        assert!(trace.states.iter().all(|s| s.v_cap == 0.0));
        assert!(trace.events.is_empty());
    }

    #[test]
    fn trace_length_and_spacing() {
        let p = PowerPath::default();
        let light = IrradianceProfile::Constant { g_wm2: 100.0 };
        let trace = simulate(&p, &light, 10.5, 0.5, 0.0).unwrap();
        assert_eq!(trace.states.len(), 22);
        let trace = simulate(&p, &light, 10.0, 3.0, 0.0).unwrap();
        assert_eq!(trace.states.len(), 4);
        assert_eq!(trace.end_time(), 9.0);
    }

    #[test]
    fn simulate_rejects_bad_inputs() {
        let p = PowerPath::default();
        let light = IrradianceProfile::Constant { g_wm2: 100.0 };
        assert!(simulate(&p, &light, 0.0, 1.0, 0.0).is_err());
        assert!(simulate(&p, &light, 10.0, 0.0, 0.0).is_err());
        assert!(simulate(&p, &light, 10.0, 1.0, 3.0).is_err());
    }

    #[test]
    fn events_on_charge_and_blackout() {
        // 1 mF fills at 96 V/s
        let p = path(1e-3, 1e-6, 10e-6, 1.0);
        let profile = IrradianceProfile::Square {
            g_day_wm2: 1000.0,
            day_start_s: 0.0,
            day_length_s: 100.0,
            period_s: 1000.0,
        };
        let trace = simulate(&p, &profile, 1000.0, 0.01, 0.0).unwrap();
        let kinds: Vec<_> = trace.events.iter().map(|e| e.kind).collect();
        assert_eq!(
            kinds,
            [
                EventKind::ExitedBlackout,
                EventKind::ChargeComplete,
                EventKind::EnteredBlackout
            ]
        );
        let entered = trace.events[2].t;
        // 109.09 s of discharge after lights-off at t=100 s
        assert!((entered - 209.09).abs() < 0.02, "{entered}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = path(0.01, 5e-6, 10e-6, 0.5);
        let trace = simulate(
            &p,
            &IrradianceProfile::day_night(300.0),
            86_400.0,
            60.0,
            0.0,
        )
        .unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let back = SimTrace::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.states, trace.states);
        assert_eq!(back.dt, trace.dt);
        let blackout_events: Vec<_> = trace
            .events
            .iter()
            .filter(|e| e.kind != EventKind::ChargeComplete)
            .copied()
            .collect();
        assert_eq!(back.events, blackout_events);
    }

    #[test]
    fn events_csv_layout() {
        let trace = SimTrace {
            dt: 1.0,
            states: vec![],
            events: vec![Event {
                t: 12.0,
                kind: EventKind::EnteredBlackout,
            }],
        };
        let mut buf = Vec::new();
        trace.write_events_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "t_s,event_name\n12,entered_blackout\n"
        );
    }

    #[test]
    fn read_csv_errors() {
        assert!(matches!(
            SimTrace::read_csv("t_s,v_cap_v,phase,i_pv_a,i_load_a\n0,1,capacitor,0,0\n".as_bytes()),
            Err(Error::Format(_))
        ));
        let bad_phase = "t_s,v_cap_v,phase,i_pv_a,i_load_a\n0,1,capacitor,0,0\n1,1,dusk,0,0\n";
        assert!(matches!(
            SimTrace::read_csv(bad_phase.as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        let uneven = "t_s,v_cap_v,phase,i_pv_a,i_load_a\n0,1,capacitor,0,0\n1,1,capacitor,0,0\n3,1,capacitor,0,0\n";
        assert!(matches!(
            SimTrace::read_csv(uneven.as_bytes()),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    fn fuzzed_path() -> impl Strategy<Value = (PowerPath, IrradianceProfile, f64, f64)> {
        (
            1e-4..20.0f64,
            0.0..60e-6f64,
            0.0..50e-6f64,
            0.0..1.0f64,
            0.0..0.6f64,
            1.6..3.5f64,
            0.0..1200.0f64,
            1.0..5000.0f64,
            0.1..30.0f64,
            0.0..1.0f64,
        )
            .prop_map(
                |(c, leak, i_op, duty, v_diode, v_clamp, g, period, dt, v0)| {
                    let p = PowerPath {
                        capacitance_f: c,
                        i_leak: leak,
                        v_diode,
                        v_clamp,
                        ic: IcProfile {
                            i_operating: i_op,
                            duty_cycle: duty,
                            ..IcProfile::default()
                        },
                        ..PowerPath::default()
                    };
                    let profile = IrradianceProfile::Square {
                        g_day_wm2: g,
                        day_start_s: 0.0,
                        day_length_s: period / 2.0,
                        period_s: period,
                    };
                    (p, profile, dt, v0 * v_clamp)
                },
            )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn clamp_and_non_negativity((p, profile, dt, v0) in fuzzed_path()) {
            let sim = Simulation::new(&p, &profile, 1000.0 * dt, dt, v0).unwrap();
            let mut n = 0;
            for s in sim {
                prop_assert!(s.v_cap >= 0.0 && s.v_cap <= p.v_clamp);
                prop_assert!(s.i_pv_delivered >= 0.0);
                if p.pv.v_max < s.v_cap + p.v_diode {
                    prop_assert_eq!(s.i_pv_delivered, 0.0);
                }
                prop_assert_eq!(s.phase == Phase::Blackout, s.v_cap < p.ic.v_readwrite);
                n += 1;
            }
            prop_assert_eq!(n, 1001);
        }

        #[test]
        fn charge_bookkeeping((p, profile, dt, v0) in fuzzed_path()) {
            let trace = simulate(&p, &profile, 1000.0 * dt, dt, v0).unwrap();
            let c = p.capacitance_f;
            let mut integral = 0.0;
            let mut slack = 0.0;
            for w in trace.states.windows(2) {
                let net = (w[0].i_pv_delivered - w[0].i_load_drawn) * dt;
                integral += net;
                let unclamped = w[0].v_cap + net / c;
                if unclamped != w[1].v_cap {
                    // clamp event: at most one step's worth of charge is absorbed
                    slack += net.abs();
                }
            }
            let stored = c * (trace.end_time_v() - trace.states[0].v_cap);
            prop_assert!(
                (stored - integral).abs() <= slack + 1e-9 * (1.0 + c),
                "stored {} integral {} slack {}", stored, integral, slack
            );
        }
    }

    impl SimTrace {
        fn end_time_v(&self) -> f64 {
            self.states.last().unwrap().v_cap
        }
    }
}
