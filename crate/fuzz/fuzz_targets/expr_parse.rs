#![no_main]

use holder_euler_cli::expr::{parse, parse_constant};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = parse_constant(data);
    if let Ok(e) = parse(data) {
        let printed = e.to_string();
        let back = parse(&printed).expect("printed expression reparses");
        assert_eq!(printed, back.to_string());
        let _ = e.dx().eval(0.5, 0.25);
    }
});
