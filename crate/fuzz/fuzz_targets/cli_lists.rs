#![no_main]

use aor_precond::{Example, NamedPreconditioner};
use libfuzzer_sys::fuzz_target;
use precond_bench::config::{parse_counts, parse_param_pairs, parse_preconditioners};
use precond_bench::OutputFormat;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_counts(s);
    if let Ok(pairs) = parse_param_pairs(s) {
        for p in pairs {
            assert!(0.0 <= p.gamma() && p.gamma() <= p.omega() && p.omega() <= 1.0 && p.omega() > 0.0);
        }
    }
    if let Ok(list) = parse_preconditioners(s) {
        for p in list {
            assert_eq!(p.to_string().parse::<NamedPreconditioner>().ok(), Some(p));
        }
    }
    let _ = s.parse::<Example>();
    let _ = s.parse::<OutputFormat>();
});
