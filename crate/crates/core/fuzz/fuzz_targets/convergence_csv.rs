#![no_main]

use libfuzzer_sys::fuzz_target;
use wavebem::experiments::{convergence_csv, parse_convergence_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_convergence_csv(s) {
        // one round trip fixes the formatting precision
        let once = parse_convergence_csv(&convergence_csv(&rows)).expect("own output parses");
        assert_eq!(once.len(), rows.len());
        let twice = parse_convergence_csv(&convergence_csv(&once)).unwrap();
        assert_eq!(once, twice);
    }
});
