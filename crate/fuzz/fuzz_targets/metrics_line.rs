#![no_main]

use libfuzzer_sys::fuzz_target;
use rmrl_core::harness::MetricsRecord;

fuzz_target!(|data: &[u8]| {
    let Ok(line) = std::str::from_utf8(data) else { return };
    if let Ok(rec) = MetricsRecord::parse_line(line) {
        let again = MetricsRecord::parse_line(&rec.to_line()).expect("written line parses");
        assert_eq!(again.to_line(), rec.to_line());
    }
});
