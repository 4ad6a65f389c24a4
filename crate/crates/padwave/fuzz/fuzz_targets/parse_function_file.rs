//! Fuzzes the function-file JSON loader.
//!
//! ```bash
//! cargo +nightly fuzz run parse_function_file
//! ```

#![no_main]

use libfuzzer_sys::fuzz_target;
use padwave::{PAdic, SchwartzFunction};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(f) = SchwartzFunction::from_json(text) else {
        return;
    };
    // loaded functions must be usable without panics
    let _ = f.integral();
    let _ = f.norm_sq();
    if let Ok(zero) = PAdic::exact_zero(f.prime()) {
        let _ = f.evaluate(&zero);
    }
    // and must round-trip through their canonical serialization
    let again = SchwartzFunction::from_json(&f.to_json()).expect("canonical form loads");
    assert_eq!(again, f);
});
