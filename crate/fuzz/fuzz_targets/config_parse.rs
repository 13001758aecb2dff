#![no_main]

use lcspec_core::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let Ok(cfg) = RunConfig::from_toml(text) else {
        return;
    };
    // Accepted configs must survive the derived views without panicking.
    if cfg.validate().is_ok() {
        let _ = cfg.problem();
        let _ = cfg.extension();
        let _ = cfg.lc_options();
    }
});
