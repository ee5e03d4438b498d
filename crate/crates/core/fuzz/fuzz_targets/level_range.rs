#![no_main]

use libfuzzer_sys::fuzz_target;
use wavebem::experiments::{CaseKind, FormulationKind, LevelRange, MAX_LEVEL};

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(r) = s.parse::<LevelRange>() {
        assert!(r.min <= r.max && r.max <= MAX_LEVEL);
        assert_eq!(format!("{}:{}", r.min, r.max).parse::<LevelRange>().unwrap(), r);
    }
    if let Ok(c) = s.parse::<CaseKind>() {
        assert_eq!(c.to_string(), s);
    }
    if let Ok(f) = s.parse::<FormulationKind>() {
        assert_eq!(f.to_string(), s);
    }
});
