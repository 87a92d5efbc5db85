#![no_main]

use holder_euler_cli::csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(r) = csv::parse_converge(data) {
        let text = csv::write_converge(&r);
        assert_eq!(csv::parse_converge(&text).map(|r| csv::write_converge(&r)).ok(), Some(text));
    }
    if let Ok(m) = csv::parse_moments(data) {
        let text = csv::write_moments(&m);
        assert_eq!(csv::parse_moments(&text).map(|m| csv::write_moments(&m)).ok(), Some(text));
    }
    let _ = csv::parse_plot(data);
    let _ = csv::parse_compare(data);
    let _ = csv::parse_timechange(data);
    let _ = csv::parse_sequence(["y", "v"], data);
    let _ = csv::parse_sequence(["x", "min_g"], data);
});
