//! The branch CSV reader must never panic; accepted rows carry only finite
//! numbers and convert into states on any valid lattice.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(rows) = fkdv::io::parse_branch_csv(text) else {
        return;
    };
    for row in rows {
        assert!(row.s.is_finite() && row.mu.is_finite() && row.crest_gap.is_finite());
        assert!(row.coeffs.iter().all(|c| c.is_finite()));
        assert!(!row.coeffs.is_empty(), "a row always carries a0");
        assert!(row.into_state(1).is_ok(), "finite rows must convert");
    }
});
