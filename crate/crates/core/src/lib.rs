//! Simulation and design toolkit for battery-less RFID tags whose chip is
//! kept powered by a small solar cell and storage capacitor.
//!
//! - [`link_budget`]: forward-link power and read range, passive vs.
//!   PV-assisted (semi-passive) operation, frequency sweeps.
//! - [`energy`]: time-stepped solar cell / diode / clamped capacitor / chip
//!   power path and its operating phases.
//! - [`insolation`]: irradiance profiles.
//! - [`interrogation`]: reader measurement campaigns against a simulated tag.
//! - [`sizing`]: availability and minimum capacitance for a target uptime.
//! - [`scenario`]: scenario file loading.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod csvio;
pub mod energy;
pub mod error;
pub mod insolation;
pub mod interrogation;
pub mod link_budget;
pub mod scenario;
pub mod sizing;
pub mod summary;

pub use energy::{
    classify_phase, pv_current, simulate, step, time_to_blackout, EnergyState, Event, EventKind,
    Persistence, Phase, PowerPath, PvCell, SimTrace, Simulation,
};
pub use error::{Error, Result};
pub use insolation::{IrradianceProfile, SampledIrradiance};
pub use interrogation::{attempt_read, run_campaign, CampaignResult, ReadOutcome, ReaderConfig};
pub use link_budget::{
    dbm_to_watts, range_ratio, range_sweep, read_range, received_power, watts_to_dbm, IcProfile,
    LinkParams, MatchingProfile, SweepPoint, TagMode,
};
pub use scenario::{load_scenario, Scenario};
pub use sizing::{availability, min_capacitance, AvailabilityReport, SizingProblem, SizingResult};
