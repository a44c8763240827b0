//! The run-metadata JSON reader must never panic; accepted metadata must
//! round-trip through the writer unchanged.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(meta) = fkdv::io::parse_metadata_json(text) else {
        return;
    };
    let serialized = fkdv::io::metadata_json(&meta).expect("accepted metadata serializes");
    let again = fkdv::io::parse_metadata_json(&serialized).expect("round-trip must stay valid");
    assert_eq!(meta.alpha.to_bits(), again.alpha.to_bits());
    assert_eq!(meta.k, again.k);
    assert_eq!(meta.modes, again.modes);
    assert_eq!(meta.newton_tol.to_bits(), again.newton_tol.to_bits());
    assert_eq!(meta.stop_crest_gap.to_bits(), again.stop_crest_gap.to_bits());
    assert_eq!(meta.points, again.points);
    assert_eq!(meta.stopped_reason, again.stopped_reason);
});
