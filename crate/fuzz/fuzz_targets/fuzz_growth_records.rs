#![no_main]
use libfuzzer_sys::fuzz_target;

use uaswave::forecast::{fit_logistic, parse_growth_records};

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(points) = parse_growth_records(s) {
            assert!(points
                .iter()
                .all(|(x, y)| x.is_finite() && y.is_finite() && *y >= 0.0));
            if points.len() <= 32 {
                let _ = fit_logistic(&points, 2015);
            }
        }
    }
});
