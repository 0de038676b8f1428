#![no_main]

use libfuzzer_sys::fuzz_target;
use rmrl_core::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        // Anything accepted must survive a round trip unchanged.
        let again = ExperimentConfig::parse(&cfg.emit()).expect("emitted config parses");
        assert_eq!(again.emit(), cfg.emit());
    }
});
