//! Irradiance-vs-time profiles driving the solar cell.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};

/// Measured irradiance samples, linearly interpolated and held at the end
/// values outside the sampled window.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledIrradiance {
    samples: Vec<(f64, f64)>,
}

impl SampledIrradiance {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("sampled profile needs at least one sample"));
        }
        if samples
            .iter()
            .any(|&(t, g)| !t.is_finite() || !(g >= 0.0) || !g.is_finite())
        {
            return Err(Error::invalid(
                "g_wm2",
                "samples must be finite with irradiance >= 0",
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(
                "t_s",
                "sample times must be strictly increasing",
            ));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    fn at(&self, t_s: f64) -> f64 {
        let s = &self.samples;
        if t_s <= s[0].0 {
            return s[0].1;
        }
        if t_s >= s[s.len() - 1].0 {
            return s[s.len() - 1].1;
        }
        let hi = s.partition_point(|&(t, _)| t <= t_s);
        let (t0, g0) = s[hi - 1];
        let (t1, g1) = s[hi];
        g0 + (g1 - g0) * (t_s - t0) / (t1 - t0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IrradianceProfile {
    Constant {
        g_wm2: f64,
    },
    /// Lit at `g_day_wm2` for `day_length_s` every `period_s`, starting at
    /// `day_start_s`; dark otherwise.
    Square {
        g_day_wm2: f64,
        day_start_s: f64,
        day_length_s: f64,
        period_s: f64,
    },
    /// Positive half of a sine of the given period; night is clipped to zero.
    SinusoidalDiurnal {
        g_peak_wm2: f64,
        period_s: f64,
    },
    Sampled(SampledIrradiance),
}

impl IrradianceProfile {
    /// Twelve hours of full sun followed by twelve hours of darkness.
    pub fn day_night(g_day_wm2: f64) -> Self {
        IrradianceProfile::Square {
            g_day_wm2,
            day_start_s: 0.0,
            day_length_s: 43_200.0,
            period_s: 86_400.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be finite and >= 0"))
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, "must be > 0"))
            }
        };
        match *self {
            IrradianceProfile::Constant { g_wm2 } => non_negative("g_wm2", g_wm2),
            IrradianceProfile::Square {
                g_day_wm2,
                day_start_s,
                day_length_s,
                period_s,
            } => {
                non_negative("g_day_wm2", g_day_wm2)?;
                positive("period_s", period_s)?;
                if !day_start_s.is_finite() {
                    return Err(Error::invalid("day_start_s", "must be finite"));
                }
                if !(0.0..=period_s).contains(&day_length_s) {
                    return Err(Error::invalid("day_length_s", "must lie in [0, period_s]"));
                }
                Ok(())
            }
            IrradianceProfile::SinusoidalDiurnal {
                g_peak_wm2,
                period_s,
            } => {
                non_negative("g_peak_wm2", g_peak_wm2)?;
                positive("period_s", period_s)
            }
            IrradianceProfile::Sampled(_) => Ok(()),
        }
    }

    /// Repeat period, if the profile is periodic.
    pub fn period_s(&self) -> Option<f64> {
        match *self {
            IrradianceProfile::Square { period_s, .. }
            | IrradianceProfile::SinusoidalDiurnal { period_s, .. } => Some(period_s),
            _ => None,
        }
    }

    /// Irradiance in W/m² at time `t_s`; never negative.
    pub fn irradiance_at(&self, t_s: f64) -> f64 {
        match self {
            IrradianceProfile::Constant { g_wm2 } => *g_wm2,
            IrradianceProfile::Square {
                g_day_wm2,
                day_start_s,
                day_length_s,
                period_s,
            } => {
                let phase = (t_s - day_start_s).rem_euclid(*period_s);
                if phase < *day_length_s {
                    *g_day_wm2
                } else {
                    0.0
                }
            }
            IrradianceProfile::SinusoidalDiurnal {
                g_peak_wm2,
                period_s,
            } => {
                let phase = t_s.rem_euclid(*period_s) / period_s;
                (g_peak_wm2 * (2.0 * PI * phase).sin()).max(0.0)
            }
            IrradianceProfile::Sampled(s) => s.at(t_s),
        }
    }

    /// Reads a `t_s,g_wm2` table with at least two rows.
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let rows = csvio::read_pairs(reader, ["t_s", "g_wm2"])?;
        if rows.len() < 2 {
            return Err(Error::Format(format!(
                "irradiance file needs at least 2 rows, found {}",
                rows.len()
            )));
        }
        for &(line, _, g) in &rows {
            if g < 0.0 {
                return Err(Error::Parse {
                    line,
                    message: format!("negative irradiance {g} W/m^2"),
                });
            }
        }
        if let Some(w) = rows.windows(2).find(|w| w[1].1 <= w[0].1) {
            return Err(Error::Format(format!(
                "timestamps must be strictly increasing (line {})",
                w[1].0
            )));
        }
        let samples = rows.into_iter().map(|(_, t, g)| (t, g)).collect();
        Ok(IrradianceProfile::Sampled(SampledIrradiance::new(samples)?))
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_reader(File::open(path).map_err(|e| Error::io_at(path, e))?)
    }
}
