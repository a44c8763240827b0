//! The config parser must never panic, and every accepted key must be
//! retrievable through each typed accessor without panicking.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = fkdv::config::Config::parse(text) else {
        return;
    };
    let keys: Vec<String> = cfg.keys().map(str::to_owned).collect();
    for key in &keys {
        assert!(cfg.get(key).is_some(), "listed key {key:?} must be present");
        let _ = cfg.get_f64(key);
        let _ = cfg.get_u32(key);
        let _ = cfg.get_usize(key);
        let _ = cfg.get_f64_list(key);
        let _ = cfg.get_u32_list(key);
    }
});
