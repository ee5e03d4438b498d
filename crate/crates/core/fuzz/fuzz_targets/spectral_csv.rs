#![no_main]

use libfuzzer_sys::fuzz_target;
use wavebem::experiments::{parse_spectral_csv, spectral_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_spectral_csv(s) {
        let once = parse_spectral_csv(&spectral_csv(&rows)).expect("own output parses");
        assert_eq!(once.len(), rows.len());
        let twice = parse_spectral_csv(&spectral_csv(&once)).unwrap();
        assert_eq!(once, twice);
    }
});
