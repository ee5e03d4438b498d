#![no_main]

use libfuzzer_sys::fuzz_target;
use wavebem::experiments::{TimeGrid, MAX_GRID_POINTS};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(grid) = s.parse::<TimeGrid>() {
        let v = grid.values();
        assert!(!v.is_empty() && v.len() <= MAX_GRID_POINTS);
        assert!(v.iter().all(|t| t.is_finite() && *t > 0.0));
        assert!(v.windows(2).all(|w| w[0] < w[1]));
    }
});
