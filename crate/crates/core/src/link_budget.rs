//! Forward-link power budget and read range of a backscatter tag.
//!
//! The tag chip receives
//!
//! ```text
//! P_ic = P_tx * G_tag * G_reader * tau * (lambda / (4 pi d))^2
//! ```
//!
//! and backscatters whenever `P_ic` is at or above the chip sensitivity, so the
//! read range is the distance at which the two are equal. All arithmetic is
//! done in watts; dBm appears only at the API boundary.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Converts dBm to watts.
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

/// Converts watts to dBm. Non-positive power has no logarithm.
pub fn watts_to_dbm(p_w: f64) -> Result<f64> {
    if !(p_w > 0.0) || !p_w.is_finite() {
        return Err(Error::domain(format!(
            "power must be positive and finite, got {p_w} W"
        )));
    }
    Ok(10.0 * p_w.log10() + 30.0)
}

/// Reader-to-tag link parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Reader transmit power (dBm). EIRP when `eirp_mode` is set.
    pub p_tx_dbm: f64,
    /// Combined linear antenna gain. With `eirp_mode` the reader gain is
    /// already folded into `p_tx_dbm` and this holds the remaining gains.
    pub g_product: f64,
    /// Antenna/chip power transmission coefficient in `[0, 1]`.
    pub tau: f64,
    pub frequency_hz: f64,
    pub eirp_mode: bool,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            p_tx_dbm: 30.0,
            g_product: 0.8,
            tau: 0.8,
            frequency_hz: 915e6,
            eirp_mode: false,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if !self.p_tx_dbm.is_finite() {
            return Err(Error::invalid("p_tx_dbm", "must be finite"));
        }
        if !(self.g_product > 0.0) || !self.g_product.is_finite() {
            return Err(Error::invalid("g_product", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::invalid("tau", "must lie in [0, 1]"));
        }
        if !(self.frequency_hz > 0.0) || !self.frequency_hz.is_finite() {
            return Err(Error::invalid("frequency_hz", "must be > 0"));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn tx_watts(&self) -> f64 {
        dbm_to_watts(self.p_tx_dbm)
    }

    /// `P_tx * g * tau` in watts, the numerator shared by both link equations.
    fn effective_tx_watts(&self) -> f64 {
        self.tx_watts() * self.g_product * self.tau
    }

    /// Label for the transmit-power figure, for reports.
    pub fn tx_label(&self) -> &'static str {
        if self.eirp_mode {
            "EIRP"
        } else {
            "conducted"
        }
    }
}

/// Operating mode of a dual-mode tag chip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TagMode {
    /// Powered only by the reader field.
    Passive,
    /// Chip powered externally, communication still by backscatter.
    SemiPassive,
}

/// Sensitivities, thresholds and load of the tag chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcProfile {
    pub sensitivity_passive_dbm: f64,
    pub sensitivity_semipassive_dbm: f64,
    /// Minimum supply for read/write operation (V).
    pub v_readwrite: f64,
    /// Minimum supply for EEPROM writes (V).
    pub v_eeprom: f64,
    /// Supply current while active (A).
    pub i_operating: f64,
    /// Fraction of time the chip draws `i_operating`.
    pub duty_cycle: f64,
}

impl Default for IcProfile {
    /// EM4325-class dual-mode chip.
    fn default() -> Self {
        Self {
            sensitivity_passive_dbm: -21.0,
            sensitivity_semipassive_dbm: -31.0,
            v_readwrite: 1.5,
            v_eeprom: 3.0,
            i_operating: 10e-6,
            duty_cycle: 1.0,
        }
    }
}

impl IcProfile {
    pub fn validate(&self) -> Result<()> {
        if !self.sensitivity_passive_dbm.is_finite() {
            return Err(Error::invalid("sensitivity_passive_dbm", "must be finite"));
        }
        if !self.sensitivity_semipassive_dbm.is_finite()
            || self.sensitivity_semipassive_dbm > self.sensitivity_passive_dbm
        {
            return Err(Error::invalid(
                "sensitivity_semipassive_dbm",
                "must be finite and <= sensitivity_passive_dbm",
            ));
        }
        if !(self.v_readwrite > 0.0) {
            return Err(Error::invalid("v_readwrite", "must be > 0"));
        }
        if !(self.v_eeprom >= self.v_readwrite) || !self.v_eeprom.is_finite() {
            return Err(Error::invalid("v_eeprom", "must be >= v_readwrite"));
        }
        if !(self.i_operating >= 0.0) || !self.i_operating.is_finite() {
            return Err(Error::invalid("i_operating", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.duty_cycle) {
            return Err(Error::invalid("duty_cycle", "must lie in [0, 1]"));
        }
        Ok(())
    }

    pub fn sensitivity_dbm(&self, mode: TagMode) -> f64 {
        match mode {
            TagMode::Passive => self.sensitivity_passive_dbm,
            TagMode::SemiPassive => self.sensitivity_semipassive_dbm,
        }
    }

    /// Average chip current while above the read/write threshold.
    pub fn effective_load(&self) -> f64 {
        self.duty_cycle * self.i_operating
    }
}

/// Power delivered to the chip at `distance_m`, in dBm.
pub fn received_power(link: &LinkParams, distance_m: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::domain(format!(
            "distance must be positive, got {distance_m} m"
        )));
    }
    let path = link.wavelength_m() / (4.0 * PI * distance_m);
    watts_to_dbm(link.effective_tx_watts() * path * path)
}

/// Distance at which the received power equals `sensitivity_dbm`.
pub fn read_range(link: &LinkParams, sensitivity_dbm: f64) -> f64 {
    let p_ic = dbm_to_watts(sensitivity_dbm);
    link.wavelength_m() / (4.0 * PI) * (link.effective_tx_watts() / p_ic).sqrt()
}

/// Semi-passive over passive range. Depends only on the two sensitivities.
pub fn range_ratio(ic: &IcProfile) -> f64 {
    10f64.powf((ic.sensitivity_passive_dbm - ic.sensitivity_semipassive_dbm) / 20.0)
}

/// Transmission coefficient as a function of carrier frequency.
///
/// Linear interpolation between samples, clamped to the end values outside
/// the tabulated band.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingProfile {
    points: Vec<(f64, f64)>,
}

impl MatchingProfile {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("matching profile needs at least one point"));
        }
        for (i, &(f, tau)) in points.iter().enumerate() {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::invalid(
                    "frequency_hz",
                    format!("point {i}: must be > 0"),
                ));
            }
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::invalid(
                    "tau",
                    format!("point {i}: must lie in [0, 1]"),
                ));
            }
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "frequency_hz",
                "frequencies must be strictly increasing",
            ));
        }
        Ok(Self { points })
    }

    /// Frequency-independent matching.
    pub fn constant(tau: f64) -> Result<Self> {
        Self::new(vec![(1.0, tau)])
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn tau_at(&self, frequency_hz: f64) -> f64 {
        let pts = &self.points;
        let first = pts[0];
        let last = pts[pts.len() - 1];
        if frequency_hz <= first.0 {
            return first.1;
        }
        if frequency_hz >= last.0 {
            return last.1;
        }
        // first index whose frequency exceeds the query; 1 <= hi < len
        let hi = pts.partition_point(|&(f, _)| f <= frequency_hz);
        let (f0, t0) = pts[hi - 1];
        let (f1, t1) = pts[hi];
        t0 + (t1 - t0) * (frequency_hz - f0) / (f1 - f0)
    }

    /// Reads a `frequency_hz,tau` table.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = csvio::read_pairs(reader, ["frequency_hz", "tau"])?;
        if rows.is_empty() {
            return Err(Error::domain("matching profile has no rows"));
        }
        for &(line, f, tau) in &rows {
            if !(f > 0.0) || !(0.0..=1.0).contains(&tau) {
                return Err(Error::Parse {
                    line,
                    message: format!("({f}, {tau}) outside frequency > 0, tau in [0, 1]"),
                });
            }
        }
        if rows.windows(2).any(|w| w[1].1 <= w[0].1) {
            return Err(Error::Format(
                "frequencies must be strictly increasing".into(),
            ));
        }
        Self::new(rows.into_iter().map(|(_, f, t)| (f, t)).collect())
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_reader(File::open(path).map_err(|e| Error::io_at(path, e))?)
    }
}

/// Read range of both modes at one carrier frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub frequency_hz: f64,
    pub d_passive_m: f64,
    pub d_semipassive_m: f64,
}

/// Read range of both chip modes across `[f_lo, f_hi]`, with tau taken from
/// `matching` at each frequency.
pub fn range_sweep(
    link_base: &LinkParams,
    ic: &IcProfile,
    matching: &MatchingProfile,
    f_lo: f64,
    f_hi: f64,
    n_points: usize,
) -> Result<Vec<SweepPoint>> {
    if !(f_lo > 0.0) || !(f_lo < f_hi) || !f_hi.is_finite() {
        return Err(Error::domain(format!(
            "sweep needs 0 < f_lo < f_hi, got [{f_lo}, {f_hi}]"
        )));
    }
    if n_points < 2 {
        return Err(Error::domain("sweep needs at least two points"));
    }
    let step = (f_hi - f_lo) / (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| {
            // pin the last point so rounding never overshoots f_hi
            let frequency_hz = if i == n_points - 1 {
                f_hi
            } else {
                f_lo + step * i as f64
            };
            let link = LinkParams {
                frequency_hz,
                tau: matching.tau_at(frequency_hz),
                ..*link_base
            };
            SweepPoint {
                frequency_hz,
                d_passive_m: read_range(&link, ic.sensitivity_passive_dbm),
                d_semipassive_m: read_range(&link, ic.sensitivity_semipassive_dbm),
            }
        })
        .collect())
}

/// Writes `frequency_hz,d_passive_m,d_semipassive_m`.
pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    let mut wtr = csvio::writer(out);
    wtr.write_record(["frequency_hz", "d_passive_m", "d_semipassive_m"])?;
    for p in points {
        wtr.write_record([
            p.frequency_hz.to_string(),
            p.d_passive_m.to_string(),
            p.d_semipassive_m.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}
