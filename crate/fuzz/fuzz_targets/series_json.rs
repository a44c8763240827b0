//! The wave-series JSON reader must never panic; accepted documents must
//! round-trip bit-for-bit and convert into a usable state.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(doc) = fkdv::io::parse_series_json(text) else {
        return;
    };
    let serialized = fkdv::io::series_json(&doc).expect("accepted documents serialize");
    let again = fkdv::io::parse_series_json(&serialized).expect("round-trip must stay valid");
    assert_eq!(doc.alpha.to_bits(), again.alpha.to_bits());
    assert_eq!(doc.k, again.k);
    assert_eq!(doc.mu.to_bits(), again.mu.to_bits());
    assert_eq!(doc.coeffs.len(), again.coeffs.len());
    for (a, b) in doc.coeffs.iter().zip(&again.coeffs) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    assert!(doc.into_state().is_ok(), "validated documents must convert");
});
