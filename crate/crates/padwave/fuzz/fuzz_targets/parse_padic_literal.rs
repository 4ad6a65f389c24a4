//! Fuzzes the p-adic literal grammar.
//!
//! ```bash
//! cargo +nightly fuzz run parse_padic_literal
//! ```

#![no_main]

use libfuzzer_sys::fuzz_target;
use padwave::PAdic;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    for p in [2u32, 3, 5, 7] {
        let Ok(x) = PAdic::parse(text, p, 16) else {
            continue;
        };
        // accepted values must be internally consistent
        let _ = x.norm();
        let _ = x.fractional_part();
        if let Ok(padwave::Valuation::Finite(v)) = x.valuation() {
            for k in v..v + 16 {
                if x.digit_at(k).is_err() {
                    break;
                }
            }
        }
        if x.is_exact() {
            // exact literals render back to a literal that parses to the
            // same value
            let again = PAdic::parse(&x.to_literal(), p, 16).expect("rendered literal parses");
            assert_eq!(again, x);
        }
    }
});
