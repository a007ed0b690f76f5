use proptest::prelude::*;
use pvrfid::{read_range, received_power, LinkParams};

fn link() -> impl Strategy<Value = LinkParams> {
    (0.0..36.0f64, 0.05..4.0f64, 0.05..=1.0f64, 300e6..3e9f64).prop_map(|(p, g, tau, f)| {
        LinkParams {
            p_tx_dbm: p,
            g_product: g,
            tau,
            frequency_hz: f,
            eirp_mode: false,
        }
    })
}

proptest! {
    #[test]
    fn received_power_falls_with_distance(l in link(), d in 0.01..100.0f64, k in 1.001..10.0f64) {
        prop_assert!(received_power(&l, d * k).unwrap() < received_power(&l, d).unwrap());
    }

    #[test]
    fn six_db_more_sensitivity_doubles_range(l in link(), s in -40.0..-5.0f64) {
        let gain = 20.0 * 2f64.log10();
        let ratio = read_range(&l, s - gain) / read_range(&l, s);
        prop_assert!((ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn range_scales_with_wavelength(l in link(), s in -40.0..-5.0f64) {
        let doubled = LinkParams { frequency_hz: l.frequency_hz * 2.0, ..l };
        let ratio = read_range(&l, s) / read_range(&doubled, s);
        prop_assert!((ratio - 2.0).abs() < 1e-9);
    }

    #[test]
    fn power_at_range_equals_sensitivity(l in link(), s in -40.0..-5.0f64) {
        let back = received_power(&l, read_range(&l, s)).unwrap();
        prop_assert!((back - s).abs() < 1e-9);
    }
}
