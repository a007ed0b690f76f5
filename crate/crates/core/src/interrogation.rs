//! Reader measurement campaigns against a simulated tag.
//!
//! Each access read is an atomic attempt: it needs an energized chip, a
//! forward link that clears the chip sensitivity, and then succeeds with a
//! fixed probability that lumps together tag contention and channel loss.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csvio;
use crate::energy::{EnergyState, Phase, SimTrace};
use crate::error::{Error, Result};
use crate::link_budget::{self, IcProfile, LinkParams, TagMode};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReaderConfig {
    pub attempt_rate_hz: f64,
    /// Per-attempt success probability for an energized, in-range tag.
    pub success_prob: f64,
    pub distance_m: f64,
    /// Other tags in the field. Informational; folded into `success_prob`.
    pub population: u32,
    pub rng_seed: u64,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        Self {
            attempt_rate_hz: 4.0,
            // 133,911 reads out of 4 Hz * 24 h = 345,600 attempts
            success_prob: 0.3875,
            distance_m: 2.0,
            population: 120,
            rng_seed: 1,
        }
    }
}

impl ReaderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.attempt_rate_hz > 0.0) || !self.attempt_rate_hz.is_finite() {
            return Err(Error::invalid("attempt_rate_hz", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.success_prob) {
            return Err(Error::invalid("success_prob", "must lie in [0, 1]"));
        }
        if !(self.distance_m > 0.0) || !self.distance_m.is_finite() {
            return Err(Error::invalid("distance_m", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    /// Chip supply below the read/write threshold.
    NoEnergy,
    /// Forward link below the chip sensitivity.
    OutOfRange,
    /// Lost to contention or the channel.
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReadOutcome {
    Success,
    Failure(FailureReason),
}

/// One access read against the tag in `state`.
///
/// Random draws are taken only for attempts that clear both gates.
pub fn attempt_read<R: Rng + ?Sized>(
    state: &EnergyState,
    link_ok: bool,
    cfg: &ReaderConfig,
    rng: &mut R,
) -> ReadOutcome {
    if state.phase == Phase::Blackout {
        ReadOutcome::Failure(FailureReason::NoEnergy)
    } else if !link_ok {
        ReadOutcome::Failure(FailureReason::OutOfRange)
    } else if rng.random_bool(cfg.success_prob) {
        ReadOutcome::Success
    } else {
        ReadOutcome::Failure(FailureReason::Channel)
    }
}

/// Whether the forward link clears the chip sensitivity in `mode`.
pub fn link_ok(link: &LinkParams, ic: &IcProfile, mode: TagMode, distance_m: f64) -> Result<bool> {
    Ok(link_budget::received_power(link, distance_m)? >= ic.sensitivity_dbm(mode))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub duration_s: f64,
    pub attempts: u64,
    pub total_successes: u64,
    /// Successes per hour of campaign time.
    pub hourly: Vec<u64>,
    /// Longest stretch without a success, including the lead-in from the
    /// start and the tail to the end of the campaign.
    pub longest_gap_s: f64,
    /// Successes indexed by [`Phase::index`].
    pub successes_by_phase: [u64; 3],
    pub failures_no_energy: u64,
    pub failures_out_of_range: u64,
    pub failures_channel: u64,
}

impl CampaignResult {
    pub fn successes_in(&self, phase: Phase) -> u64 {
        self.successes_by_phase[phase.index()]
    }

    /// Writes `hour,successes`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csvio::writer(out);
        wtr.write_record(["hour", "successes"])?;
        for (hour, n) in self.hourly.iter().enumerate() {
            wtr.write_record([hour.to_string(), n.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("duration_s = {}\n", self.duration_s));
        s.push_str(&format!("attempts = {}\n", self.attempts));
        s.push_str(&format!("total_successes = {}\n", self.total_successes));
        s.push_str(&format!("longest_gap_s = {:.3}\n", self.longest_gap_s));
        for phase in Phase::ALL {
            s.push_str(&format!(
                "successes_{} = {}\n",
                phase.as_str(),
                self.successes_in(phase)
            ));
        }
        s.push_str(&format!(
            "failures_no_energy = {}\n",
            self.failures_no_energy
        ));
        s.push_str(&format!(
            "failures_out_of_range = {}\n",
            self.failures_out_of_range
        ));
        s.push_str(&format!("failures_channel = {}\n", self.failures_channel));
        s
    }
}

/// Runs a campaign of `duration_s` seconds against `trace`.
///
/// Attempts fire at `k / attempt_rate_hz` for every such time below
/// `duration_s`, and see the trace sample nearest in time. An energized tag is
/// in range when the link clears its semi-passive sensitivity.
pub fn run_campaign(
    trace: &SimTrace,
    link: &LinkParams,
    ic: &IcProfile,
    cfg: &ReaderConfig,
    duration_s: f64,
) -> Result<CampaignResult> {
    cfg.validate()?;
    link.validate()?;
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(Error::domain(format!(
            "campaign duration must be > 0, got {duration_s} s"
        )));
    }
    if trace.states.is_empty() || trace.end_time() < duration_s - trace.dt {
        return Err(Error::domain(format!(
            "trace covers {} s but the campaign runs {duration_s} s",
            trace.duration()
        )));
    }
    let in_range = link_ok(link, ic, TagMode::SemiPassive, cfg.distance_m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    let mut attempts = (duration_s * cfg.attempt_rate_hz).ceil() as u64;
    while attempts > 0 && (attempts - 1) as f64 / cfg.attempt_rate_hz >= duration_s {
        attempts -= 1;
    }
    let hours = (duration_s / 3600.0).ceil().max(1.0) as usize;

    let mut result = CampaignResult {
        duration_s,
        attempts,
        total_successes: 0,
        hourly: vec![0; hours],
        longest_gap_s: 0.0,
        successes_by_phase: [0; 3],
        failures_no_energy: 0,
        failures_out_of_range: 0,
        failures_channel: 0,
    };
    let mut last_success = 0.0f64;
    for k in 0..attempts {
        let t = k as f64 / cfg.attempt_rate_hz;
        let state = trace.nearest(t);
        match attempt_read(state, in_range, cfg, &mut rng) {
            ReadOutcome::Success => {
                result.total_successes += 1;
                result.hourly[((t / 3600.0) as usize).min(hours - 1)] += 1;
                result.successes_by_phase[state.phase.index()] += 1;
                result.longest_gap_s = result.longest_gap_s.max(t - last_success);
                last_success = t;
            }
            ReadOutcome::Failure(FailureReason::NoEnergy) => result.failures_no_energy += 1,
            ReadOutcome::Failure(FailureReason::OutOfRange) => result.failures_out_of_range += 1,
            ReadOutcome::Failure(FailureReason::Channel) => result.failures_channel += 1,
        }
    }
    result.longest_gap_s = result.longest_gap_s.max(duration_s - last_success);
    Ok(result)
}
