#![no_main]
use libfuzzer_sys::fuzz_target;

use uaswave::channel::{max_excess_delay, rms_delay_spread, PowerDelayProfile};

fuzz_target!(|data: &[u8]| {
    let values: Vec<f64> = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (delays, powers) = values.split_at(values.len() / 2);
    let powers = &powers[..delays.len()];
    for pdp in [
        PowerDelayProfile::new(delays, powers),
        PowerDelayProfile::normalized(delays, powers),
    ] {
        if let Ok(pdp) = pdp {
            let sigma = rms_delay_spread(&pdp);
            assert!(sigma.is_finite() && sigma >= 0.0);
            assert!(sigma <= max_excess_delay(&pdp) * (1.0 + 1e-9) + 1e-9);
        }
    }
});
