#![no_main]

use holder_euler_cli::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    // A config that parses must print back to an equal config.
    if let Ok(cfg) = RunConfig::parse(data) {
        let again = RunConfig::parse(&cfg.to_string()).expect("display output reparses");
        assert_eq!(cfg.to_string(), again.to_string());
    }
});
