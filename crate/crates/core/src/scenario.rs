//! Scenario files: `key = value` lines under `[section]` headers.
//!
//! ```text
//! # FCC operating point
//! [link]
//! p_tx_dbm = 36.0206   # dBm
//! eirp_mode = true
//! ```
//!
//! Keys are case-sensitive and every value is in SI units (the unit is part
//! of the key name where it is not obvious). Omitted keys take the defaults
//! of [`Scenario::default`]; unknown sections and keys are rejected. Relative
//! file paths inside a scenario resolve against the scenario's directory.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::energy::{PowerPath, PvCell};
use crate::error::{Error, Result};
use crate::insolation::IrradianceProfile;
use crate::interrogation::ReaderConfig;
use crate::link_budget::{LinkParams, MatchingProfile};
use crate::sizing::SizingProblem;

/// Frequency sweep settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub points: usize,
    /// `frequency_hz,tau` table; `None` holds `link.tau` at every frequency.
    pub matching_csv: Option<PathBuf>,
}

/// Time-stepping and sizing controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub duration_s: f64,
    pub dt_s: f64,
    pub v_initial: f64,
    /// Warm-up excluded from availability; `None` means one profile period.
    pub warmup_s: Option<f64>,
    pub target_availability: f64,
    pub c_lo_f: f64,
    pub c_hi_f: f64,
    pub rel_tol: f64,
}

/// Output file locations; `None` falls back to `<scenario name>_<kind>.csv`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputPaths {
    pub trace: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
    pub campaign: Option<PathBuf>,
    pub blackouts: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub link: LinkParams,
    pub sweep: SweepSettings,
    pub power: PowerPath,
    pub light: IrradianceProfile,
    pub reader: ReaderConfig,
    /// Campaign length (s).
    pub campaign_duration_s: f64,
    pub sim: SimSettings,
    pub outputs: OutputPaths,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            link: LinkParams::default(),
            sweep: SweepSettings {
                f_lo_hz: 800e6,
                f_hi_hz: 1000e6,
                points: 201,
                matching_csv: None,
            },
            power: PowerPath::default(),
            light: IrradianceProfile::day_night(1000.0),
            reader: ReaderConfig::default(),
            campaign_duration_s: 86_400.0,
            sim: SimSettings {
                duration_s: 3.0 * 86_400.0,
                dt_s: 1.0,
                v_initial: 0.0,
                warmup_s: None,
                target_availability: 1.0,
                c_lo_f: 1e-3,
                c_hi_f: 100.0,
                rel_tol: 1e-3,
            },
            outputs: OutputPaths::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.power.validate()?;
        self.light.validate()?;
        self.reader.validate()?;
        let s = &self.sim;
        if !(s.duration_s > 0.0) || !s.duration_s.is_finite() {
            return Err(Error::invalid("sim.duration_s", "must be > 0"));
        }
        if !(s.dt_s > 0.0) || s.dt_s > s.duration_s / 10.0 {
            return Err(Error::invalid(
                "sim.dt_s",
                "must lie in (0, duration_s / 10]",
            ));
        }
        if !(0.0..=self.power.v_clamp).contains(&s.v_initial) {
            return Err(Error::invalid("sim.v_initial", "must lie in [0, v_clamp]"));
        }
        if let Some(w) = s.warmup_s {
            if !(w >= 0.0) || w >= s.duration_s {
                return Err(Error::invalid(
                    "sim.warmup_s",
                    "must lie in [0, duration_s)",
                ));
            }
        }
        if !(0.0..=1.0).contains(&s.target_availability) {
            return Err(Error::invalid(
                "sim.target_availability",
                "must lie in [0, 1]",
            ));
        }
        if !(s.c_lo_f > 0.0) || !(s.c_lo_f < s.c_hi_f) || !s.c_hi_f.is_finite() {
            return Err(Error::invalid("sim.c_lo_f", "need 0 < c_lo_f < c_hi_f"));
        }
        if !(s.rel_tol > 0.0 && s.rel_tol < 0.5) {
            return Err(Error::invalid("sim.rel_tol", "must lie in (0, 0.5)"));
        }
        if !(self.campaign_duration_s > 0.0) || !self.campaign_duration_s.is_finite() {
            return Err(Error::invalid("reader.duration_s", "must be > 0"));
        }
        let w = &self.sweep;
        if !(w.f_lo_hz > 0.0) || !(w.f_lo_hz < w.f_hi_hz) || !w.f_hi_hz.is_finite() {
            return Err(Error::invalid(
                "link.sweep_f_lo_hz",
                "need 0 < sweep_f_lo_hz < sweep_f_hi_hz",
            ));
        }
        if w.points < 2 {
            return Err(Error::invalid("link.sweep_points", "must be >= 2"));
        }
        Ok(())
    }

    /// Warm-up window: explicit, else one period of a periodic profile, else 0.
    pub fn warmup_s(&self) -> f64 {
        self.sim
            .warmup_s
            .or_else(|| self.light.period_s().filter(|&p| p < self.sim.duration_s))
            .unwrap_or(0.0)
    }

    pub fn matching(&self) -> Result<MatchingProfile> {
        match &self.sweep.matching_csv {
            Some(path) => MatchingProfile::from_csv(path),
            None => MatchingProfile::constant(self.link.tau),
        }
    }

    pub fn sizing_problem(&self) -> SizingProblem {
        SizingProblem {
            path: self.power,
            profile: self.light.clone(),
            duration_s: self.sim.duration_s,
            dt_s: self.sim.dt_s,
            v_initial: self.sim.v_initial,
            warmup_s: self.warmup_s(),
        }
    }

    /// Output path for `kind` (`trace`, `events`, ...), defaulting to
    /// `<name>_<kind>.csv` in the working directory.
    pub fn output_path(&self, kind: &str) -> PathBuf {
        let explicit = match kind {
            "trace" => &self.outputs.trace,
            "events" => &self.outputs.events,
            "sweep" => &self.outputs.sweep,
            "campaign" => &self.outputs.campaign,
            "blackouts" => &self.outputs.blackouts,
            _ => &None,
        };
        explicit
            .clone()
            .unwrap_or_else(|| PathBuf::from(format!("{}_{kind}.csv", self.name)))
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("scenario")
        .to_string();
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_scenario(&text, &name, base)
}

/// Parses scenario text. Relative paths resolve against `base_dir`.
pub fn parse_scenario(text: &str, name: &str, base_dir: &Path) -> Result<Scenario> {
    let mut kv = KeyValues::parse(text)?;
    let mut sc = Scenario {
        name: name.to_string(),
        ..Scenario::default()
    };
    let resolve = |p: String| {
        let p = PathBuf::from(p);
        if p.is_relative() {
            base_dir.join(p)
        } else {
            p
        }
    };

    let link = &mut sc.link;
    kv.set("link", "p_tx_dbm", &mut link.p_tx_dbm)?;
    kv.set("link", "g_product", &mut link.g_product)?;
    kv.set("link", "tau", &mut link.tau)?;
    kv.set("link", "frequency_hz", &mut link.frequency_hz)?;
    kv.set("link", "eirp_mode", &mut link.eirp_mode)?;
    kv.set("link", "sweep_f_lo_hz", &mut sc.sweep.f_lo_hz)?;
    kv.set("link", "sweep_f_hi_hz", &mut sc.sweep.f_hi_hz)?;
    kv.set("link", "sweep_points", &mut sc.sweep.points)?;
    sc.sweep.matching_csv = kv.string("link", "matching_csv").map(resolve);
    sc.outputs.sweep = kv.string("link", "sweep_out").map(resolve);

    let ic = &mut sc.power.ic;
    kv.set(
        "ic",
        "sensitivity_passive_dbm",
        &mut ic.sensitivity_passive_dbm,
    )?;
    kv.set(
        "ic",
        "sensitivity_semipassive_dbm",
        &mut ic.sensitivity_semipassive_dbm,
    )?;
    kv.set("ic", "v_readwrite", &mut ic.v_readwrite)?;
    kv.set("ic", "v_eeprom", &mut ic.v_eeprom)?;
    kv.set("ic", "i_operating", &mut ic.i_operating)?;
    kv.set("ic", "duty_cycle", &mut ic.duty_cycle)?;

    let power = &mut sc.power;
    let mut pv = PvCell::default();
    kv.set("power", "area_cm2", &mut pv.area_cm2)?;
    kv.set("power", "j_sc_stc", &mut pv.j_sc_stc)?;
    kv.set("power", "v_max", &mut pv.v_max)?;
    power.pv = pv;
    kv.set("power", "v_diode", &mut power.v_diode)?;
    kv.set("power", "v_clamp", &mut power.v_clamp)?;
    kv.set("power", "capacitance_f", &mut power.capacitance_f)?;
    kv.set("power", "i_leak", &mut power.i_leak)?;

    sc.light = parse_light(&mut kv, &resolve)?;

    let reader = &mut sc.reader;
    kv.set("reader", "attempt_rate_hz", &mut reader.attempt_rate_hz)?;
    kv.set("reader", "success_prob", &mut reader.success_prob)?;
    kv.set("reader", "distance_m", &mut reader.distance_m)?;
    kv.set("reader", "population", &mut reader.population)?;
    kv.set("reader", "rng_seed", &mut reader.rng_seed)?;
    kv.set("reader", "duration_s", &mut sc.campaign_duration_s)?;
    sc.outputs.campaign = kv.string("reader", "campaign_out").map(resolve);

    let sim = &mut sc.sim;
    kv.set("sim", "duration_s", &mut sim.duration_s)?;
    kv.set("sim", "dt_s", &mut sim.dt_s)?;
    kv.set("sim", "v_initial", &mut sim.v_initial)?;
    if let Some(w) = kv.parsed::<f64>("sim", "warmup_s")? {
        sim.warmup_s = Some(w);
    }
    kv.set("sim", "target_availability", &mut sim.target_availability)?;
    kv.set("sim", "c_lo_f", &mut sim.c_lo_f)?;
    kv.set("sim", "c_hi_f", &mut sim.c_hi_f)?;
    kv.set("sim", "rel_tol", &mut sim.rel_tol)?;
    sc.outputs.trace = kv.string("sim", "trace_out").map(resolve);
    sc.outputs.events = kv.string("sim", "events_out").map(resolve);
    sc.outputs.blackouts = kv.string("sim", "blackouts_out").map(resolve);

    kv.reject_leftovers()?;
    sc.validate()?;
    Ok(sc)
}

fn parse_light(
    kv: &mut KeyValues,
    resolve: &dyn Fn(String) -> PathBuf,
) -> Result<IrradianceProfile> {
    let kind = kv
        .string("light", "profile")
        .unwrap_or_else(|| "square".into());
    let mut g_wm2 = 1000.0;
    let mut g_day_wm2 = 1000.0;
    let mut day_start_s = 0.0;
    let mut day_length_s = 43_200.0;
    let mut period_s = 86_400.0;
    let mut g_peak_wm2 = 1000.0;
    kv.set("light", "g_wm2", &mut g_wm2)?;
    kv.set("light", "g_day_wm2", &mut g_day_wm2)?;
    kv.set("light", "day_start_s", &mut day_start_s)?;
    kv.set("light", "day_length_s", &mut day_length_s)?;
    kv.set("light", "period_s", &mut period_s)?;
    kv.set("light", "g_peak_wm2", &mut g_peak_wm2)?;
    let csv = kv.string("light", "csv");
    let profile = match kind.as_str() {
        "constant" => IrradianceProfile::Constant { g_wm2 },
        "square" => IrradianceProfile::Square {
            g_day_wm2,
            day_start_s,
            day_length_s,
            period_s,
        },
        "sinusoidal" => IrradianceProfile::SinusoidalDiurnal {
            g_peak_wm2,
            period_s,
        },
        "sampled" => match csv {
            Some(p) => IrradianceProfile::from_csv(resolve(p))?,
            None => {
                return Err(Error::invalid(
                    "light.csv",
                    "required for profile = sampled",
                ))
            }
        },
        other => {
            return Err(Error::invalid(
                "light.profile",
                format!("`{other}` is not one of constant|square|sinusoidal|sampled"),
            ))
        }
    };
    Ok(profile)
}

struct Entry {
    line: u64,
    value: String,
    used: bool,
}

/// Raw `section.key -> value` map with usage tracking.
struct KeyValues {
    entries: HashMap<(String, String), Entry>,
}

const SECTIONS: [&str; 6] = ["link", "ic", "power", "light", "reader", "sim"];

impl KeyValues {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx as u64 + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unterminated section header `{content}`"),
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::Parse {
                        line,
                        message: format!("unknown section `[{name}]`"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let sec = section.clone().ok_or_else(|| Error::Parse {
                line,
                message: "key outside of any [section]".into(),
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key".into(),
                });
            }
            let prev = entries.insert(
                (sec.clone(), key.clone()),
                Entry {
                    line,
                    value,
                    used: false,
                },
            );
            if let Some(prev) = prev {
                return Err(Error::Parse {
                    line,
                    message: format!("`{sec}.{key}` already set on line {}", prev.line),
                });
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<&Entry> {
        let e = self
            .entries
            .get_mut(&(section.to_string(), key.to_string()))?;
        e.used = true;
        Some(e)
    }

    fn string(&mut self, section: &str, key: &str) -> Option<String> {
        self.take(section, key).map(|e| e.value.clone())
    }

    fn parsed<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        let Some(e) = self.take(section, key) else {
            return Ok(None);
        };
        e.value.parse::<T>().map(Some).map_err(|_| Error::Parse {
            line: e.line,
            message: format!("{section}.{key}: cannot parse `{}`", e.value),
        })
    }

    fn set<T: FromStr>(&mut self, section: &str, key: &str, slot: &mut T) -> Result<()> {
        if let Some(v) = self.parsed(section, key)? {
            *slot = v;
        }
        Ok(())
    }

    fn reject_leftovers(&self) -> Result<()> {
        let mut unknown: Vec<_> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.used)
            .map(|((s, k), e)| (e.line, format!("{s}.{k}")))
            .collect();
        unknown.sort();
        match unknown.first() {
            Some((line, key)) => Err(Error::Parse {
                line: *line,
                message: format!("unknown key `{key}`"),
            }),
            None => Ok(()),
        }
    }
}
