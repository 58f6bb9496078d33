#![no_main]
use libfuzzer_sys::fuzz_target;

use uaswave::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_toml_str(s) {
            cfg.scenario
                .validate()
                .expect("accepted config has a valid scenario");
            assert!(!cfg.velocities_kmh.is_empty());
        }
    }
});
