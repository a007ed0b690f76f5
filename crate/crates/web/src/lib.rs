//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The computations live in [`demo`] as plain Rust so they can be tested
//! natively; the exported wrappers only translate errors into JS exceptions.

use wasm_bindgen::prelude::*;

pub mod demo {
    use pvrfid::energy::Simulation;
    use pvrfid::{
        min_capacitance, range_sweep, IcProfile, IrradianceProfile, LinkParams, MatchingProfile,
        PowerPath, SizingProblem,
    };

    /// Longest series handed to the page for plotting.
    pub const MAX_POINTS: usize = 2000;

    const SIM_DT_S: f64 = 10.0;

    /// Load and lighting knobs exposed on the page.
    #[derive(Debug, Clone, Copy)]
    pub struct Knobs {
        pub i_leak_a: f64,
        pub i_operating_a: f64,
        pub duty_cycle: f64,
        pub g_day_wm2: f64,
    }

    impl Knobs {
        fn path(&self, capacitance_f: f64) -> PowerPath {
            PowerPath {
                capacitance_f,
                i_leak: self.i_leak_a,
                ic: IcProfile {
                    i_operating: self.i_operating_a,
                    duty_cycle: self.duty_cycle,
                    ..IcProfile::default()
                },
                ..PowerPath::default()
            }
        }

        fn light(&self) -> IrradianceProfile {
            IrradianceProfile::day_night(self.g_day_wm2)
        }
    }

    /// Read range against frequency as `[f_hz, d_passive_m, d_semipassive_m]`
    /// triples, flattened.
    pub fn sweep(
        p_tx_dbm: f64,
        g_product: f64,
        tau: f64,
        f_lo_hz: f64,
        f_hi_hz: f64,
        points: usize,
    ) -> Result<Vec<f64>, String> {
        let link = LinkParams {
            p_tx_dbm,
            g_product,
            tau,
            ..LinkParams::default()
        };
        let matching = MatchingProfile::constant(tau).map_err(|e| e.to_string())?;
        let rows = range_sweep(
            &link,
            &IcProfile::default(),
            &matching,
            f_lo_hz,
            f_hi_hz,
            points,
        )
        .map_err(|e| e.to_string())?;
        Ok(rows
            .iter()
            .flat_map(|p| [p.frequency_hz, p.d_passive_m, p.d_semipassive_m])
            .collect())
    }

    /// Capacitor voltage over a 12 h / 12 h day-night cycle as
    /// `[t_h, v_cap, phase_index]` triples, thinned to at most
    /// [`MAX_POINTS`] samples.
    pub fn voltage_trace(
        capacitance_f: f64,
        knobs: Knobs,
        hours: f64,
        v_initial: f64,
    ) -> Result<Vec<f64>, String> {
        let path = knobs.path(capacitance_f);
        let light = knobs.light();
        let sim = Simulation::new(&path, &light, hours * 3600.0, SIM_DT_S, v_initial)
            .map_err(|e| e.to_string())?;
        let stride = sim.len().div_ceil(MAX_POINTS).max(1);
        Ok(sim
            .step_by(stride)
            .flat_map(|s| [s.t / 3600.0, s.v_cap, s.phase.index() as f64])
            .collect())
    }

    /// Smallest capacitance in [1 mF, 100 F] that reaches `target`
    /// availability over three days, the first excluded as warm-up.
    pub fn size(knobs: Knobs, target: f64) -> Result<f64, String> {
        let problem = SizingProblem {
            path: knobs.path(1.0),
            profile: knobs.light(),
            duration_s: 3.0 * 86_400.0,
            dt_s: SIM_DT_S,
            v_initial: 0.0,
            warmup_s: 86_400.0,
        };
        min_capacitance(&problem, target, 1e-3, 100.0, 1e-3)
            .map(|r| r.capacitance_f)
            .map_err(|e| e.to_string())
    }
}

#[wasm_bindgen(js_name = rangeSweep)]
pub fn range_sweep(
    p_tx_dbm: f64,
    g_product: f64,
    tau: f64,
    f_lo_hz: f64,
    f_hi_hz: f64,
    points: usize,
) -> Result<Vec<f64>, JsValue> {
    demo::sweep(p_tx_dbm, g_product, tau, f_lo_hz, f_hi_hz, points)
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = voltageTrace)]
#[allow(clippy::too_many_arguments)]
pub fn voltage_trace(
    capacitance_f: f64,
    i_leak_a: f64,
    i_operating_a: f64,
    duty_cycle: f64,
    g_day_wm2: f64,
    hours: f64,
    v_initial: f64,
) -> Result<Vec<f64>, JsValue> {
    let knobs = demo::Knobs {
        i_leak_a,
        i_operating_a,
        duty_cycle,
        g_day_wm2,
    };
    demo::voltage_trace(capacitance_f, knobs, hours, v_initial).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = minCapacitance)]
pub fn min_capacitance(
    i_leak_a: f64,
    i_operating_a: f64,
    duty_cycle: f64,
    g_day_wm2: f64,
    target: f64,
) -> Result<f64, JsValue> {
    let knobs = demo::Knobs {
        i_leak_a,
        i_operating_a,
        duty_cycle,
        g_day_wm2,
    };
    demo::size(knobs, target).map_err(|e| JsValue::from_str(&e))
}
