#![no_main]

use esp_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = RunConfig::parse(text) else {
        return;
    };
    if let Ok(r) = cfg.resolve() {
        assert!(r.params.validate().is_ok());
        assert!(r.initial.check().is_ok());
        if let Some(s) = &r.sweep {
            assert_eq!(s.internal.len(), s.user.len());
        }
    }
});
